use crate::error::{Error, Result};
use crate::ground_state::{solve_fixed_omega, verify, GroundState, SolverSettings};

use super::rayleigh_lambda_minus;

/// Relative identity tolerance a curve sample must meet to be valid.
pub const SAMPLE_TOL: f64 = 1e-6;
/// Relative PDE residual a curve sample must meet to be valid.
pub const SAMPLE_RESIDUAL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CurveSample {
    pub omega: f64,
    pub mass: f64,
    pub energy: f64,
    pub de_domega: Option<f64>,
    /// `D''(omega)`, stored separately from `dm_domega` though computed by the
    /// same difference of the mass column.
    pub d_second: Option<f64>,
    pub dm_domega: Option<f64>,
    pub lambda_minus: f64,
    pub residual_l2: f64,
    pub valid: bool,
    /// Why the sample was rejected.
    pub note: Option<String>,
}

/// Where `m(omega)` meets `2 d_J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OmegaJ {
    /// `m(lo) < 2 d_J <= m(hi)`.
    Bracket { lo: f64, hi: f64 },
    /// No sampled mass reached `2 d_J`; `omega_J` exceeds this value.
    LowerBound(f64),
}

impl OmegaJ {
    pub fn estimate(&self) -> f64 {
        match *self {
            OmegaJ::Bracket { lo, hi } => 0.5 * (lo + hi),
            OmegaJ::LowerBound(w) => w,
        }
    }
    pub fn is_lower_bound(&self) -> bool {
        matches!(self, OmegaJ::LowerBound(_))
    }
}

#[derive(Clone, Debug)]
pub struct StabilityCurve {
    pub p: f64,
    pub dj: f64,
    pub samples: Vec<CurveSample>,
    pub omega_j: OmegaJ,
}

impl StabilityCurve {
    pub fn valid_samples(&self) -> impl Iterator<Item = &CurveSample> {
        self.samples.iter().filter(|s| s.valid)
    }

    /// Interior samples with both neighbours valid.
    pub fn interior(&self) -> impl Iterator<Item = &CurveSample> {
        let n = self.samples.len();
        self.samples
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i > 0 && *i + 1 < n)
            .filter(|(i, _)| self.samples[i - 1].valid && self.samples[*i].valid && self.samples[i + 1].valid)
            .map(|(_, s)| s)
    }

    /// `|dE/domega + omega dm/domega| / |omega dm/domega|`.
    pub fn relation_gap(s: &CurveSample) -> Option<f64> {
        let (de, dm) = (s.de_domega?, s.dm_domega?);
        Some((de + s.omega * dm).abs() / (s.omega * dm).abs())
    }
}

/// Derivative of `f` at `x[i]` from its neighbours on a non-uniform grid:
/// three-point centred in the interior, one-sided at the ends.
pub fn native_derivative(x: &[f64], f: &[f64], i: usize) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    if i > 0 && i + 1 < n {
        let (hm, hp) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        return Some((hm * hm * (f[i + 1] - f[i]) + hp * hp * (f[i] - f[i - 1])) / (hm * hp * (hm + hp)));
    }
    if n == 2 {
        return Some((f[1] - f[0]) / (x[1] - x[0]));
    }
    // second-order one-sided
    let (a, b, c, sgn) = if i == 0 { (0, 1, 2, 1.0) } else { (n - 1, n - 2, n - 3, -1.0) };
    let h1 = (x[b] - x[a]).abs();
    let h2 = (x[c] - x[a]).abs();
    let d = -(h1 + h2) / (h1 * h2) * f[a] + h2 / (h1 * (h2 - h1)) * f[b] - h1 / (h2 * (h2 - h1)) * f[c];
    Some(sgn * d)
}

/// One verified curve point.
pub fn curve_sample(omega: f64, p: f64, dj: f64, settings: &SolverSettings) -> (Option<GroundState>, CurveSample) {
    let blank = |note: String| CurveSample {
        omega,
        mass: f64::NAN,
        energy: f64::NAN,
        de_domega: None,
        d_second: None,
        dm_domega: None,
        lambda_minus: f64::NAN,
        residual_l2: f64::NAN,
        valid: false,
        note: Some(note),
    };
    let gs = match solve_fixed_omega(omega, p, dj, settings) {
        Ok(g) => g,
        Err(e) => return (None, blank(e.to_string())),
    };
    let check = verify(&gs);
    let lm = rayleigh_lambda_minus(&gs);
    let note = match (&check, &lm) {
        (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
        (Ok(c), _) if !c.passes(SAMPLE_TOL, SAMPLE_TOL) => Some(format!("verification failed: {c:?}")),
        _ if gs.residual > SAMPLE_RESIDUAL => Some(format!("residual {:.3e}", gs.residual)),
        _ => None,
    };
    let s = CurveSample {
        omega,
        mass: gs.mass,
        energy: gs.energy,
        de_domega: None,
        d_second: None,
        dm_domega: None,
        lambda_minus: lm.map(|l| l.formula).unwrap_or(f64::NAN),
        residual_l2: gs.residual,
        valid: note.is_none(),
        note,
    };
    (Some(gs), s)
}

/// Ground states along `omegas` with finite-difference derivatives and the
/// location of `omega_J`.
pub fn build_curve(p: f64, omegas: &[f64], dj: f64, settings: &SolverSettings) -> Result<StabilityCurve> {
    Ok(build_curve_with_states(p, omegas, dj, settings)?.0)
}

/// [`build_curve`] that also hands back the ground state of every sample.
pub fn build_curve_with_states(
    p: f64,
    omegas: &[f64],
    dj: f64,
    settings: &SolverSettings,
) -> Result<(StabilityCurve, Vec<Option<GroundState>>)> {
    if omegas.is_empty() {
        return Err(Error::Domain("empty omega grid".into()));
    }
    if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::Domain("omega samples must be positive".into()));
    }
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Ordering("omega samples must be strictly increasing".into()));
    }
    if !(dj > 0.0) {
        return Err(Error::Domain(format!("d_J = {dj} must be positive")));
    }
    let (states, mut samples): (Vec<_>, Vec<_>) = omegas.iter().map(|&w| curve_sample(w, p, dj, settings)).unzip();

    // derivatives over maximal runs of valid samples
    let n = samples.len();
    let mut i = 0;
    while i < n {
        if !samples[i].valid {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && samples[j + 1].valid {
            j += 1;
        }
        let x: Vec<f64> = samples[i..=j].iter().map(|s| s.omega).collect();
        let m: Vec<f64> = samples[i..=j].iter().map(|s| s.mass).collect();
        let e: Vec<f64> = samples[i..=j].iter().map(|s| s.energy).collect();
        for k in 0..x.len() {
            let s = &mut samples[i + k];
            s.dm_domega = native_derivative(&x, &m, k);
            s.d_second = s.dm_domega;
            s.de_domega = native_derivative(&x, &e, k);
        }
        i = j + 1;
    }

    let threshold = 2.0 * dj;
    let valid: Vec<&CurveSample> = samples.iter().filter(|s| s.valid).collect();
    let omega_j = match valid.iter().position(|s| s.mass >= threshold) {
        None => OmegaJ::LowerBound(valid.last().map(|s| s.omega).unwrap_or(0.0)),
        Some(0) => OmegaJ::Bracket { lo: 0.0, hi: valid[0].omega },
        Some(k) => {
            let (mut lo, mut hi) = (valid[k - 1].omega, valid[k].omega);
            for _ in 0..12 {
                let mid = 0.5 * (lo + hi);
                match curve_sample(mid, p, dj, settings).1 {
                    s if s.valid && s.mass < threshold => lo = mid,
                    s if s.valid => hi = mid,
                    _ => break,
                }
            }
            OmegaJ::Bracket { lo, hi }
        }
    };
    Ok((StabilityCurve { p, dj, samples, omega_j }, states))
}
