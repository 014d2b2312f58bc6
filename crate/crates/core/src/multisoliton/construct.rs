use crate::error::Result;
use crate::field::ComplexField;
use crate::evolution::{evolve_observed, EvolutionState, EvolveOptions};
use crate::spectral::h1_distance;

use super::{localized_quantities, quadratic_form_p, Ansatz, Localized, Modulation, Partition};

/// Localized quantities for one cutoff width.
#[derive(Clone, Debug)]
pub struct LocalRow {
    pub length: f64,
    pub values: Localized,
}

#[derive(Clone, Debug)]
pub struct TubeRow {
    pub t: f64,
    /// `||phi(t) - R(t)||_{H^1}`
    pub h1_error: f64,
    pub mass: f64,
    pub energy: f64,
    /// Fitted modulation, `None` once the trajectory leaves the tube.
    pub modulation: Option<Vec<Modulation>>,
    pub orthogonality: Option<f64>,
    /// `P(eps, eps) / ||eps||_{H^1}^2` at the fitted parameters.
    pub coercivity: Option<f64>,
    /// One entry per cutoff width, the configured width first.
    pub local: Vec<LocalRow>,
}

#[derive(Clone, Debug)]
pub struct TubeReport {
    /// Increasing in `t`.
    pub rows: Vec<TubeRow>,
    pub theta_fit: f64,
    pub theta0: f64,
    /// The constructed field at `t = 0`.
    pub phi0: ComplexField,
}

impl TubeReport {
    /// Row closest to `t`.
    pub fn at(&self, t: f64) -> &TubeRow {
        self.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
            .expect("report has rows")
    }

    /// `max_t |I_k(t) - I_k(T_n)|` over rows with `t >= from`, for cutoff
    /// entry `which`.
    pub fn local_mass_variation(&self, which: usize, from: f64) -> Vec<f64> {
        let last = &self.rows.last().expect("report has rows").local[which].values.mass;
        let mut out = vec![0.0; last.len()];
        for r in self.rows.iter().filter(|r| r.t >= from) {
            for (k, v) in r.local[which].values.mass.iter().enumerate() {
                out[k] = f64::max(out[k], (v - last[k]).abs());
            }
        }
        out
    }
}

/// `-slope` of the least-squares line through `(t, log e)` for
/// `t in [lo, hi)` and `e > 0`.
pub fn fit_decay_rate(rows: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|(t, e)| *t >= lo && *t < hi && *e > 0.0).map(|(t, e)| (*t, e.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (mt, me) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - me)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    -sxy / sxx
}

/// Set `phi(T_n) = R(T_n)` and integrate back to `t = 0`, logging the
/// distance to `R(t)`, the fitted modulation and the localized quantities for
/// the cutoff widths `L` and every entry of `extra_lengths`.
pub fn backward_construct(ansatz: &Ansatz, extra_lengths: &[f64]) -> Result<TubeReport> {
    let cfg = &ansatz.config;
    ansatz.check_placement(0.0)?;
    let start = ansatz.build_profile(cfg.tn)?;
    let base = cfg.partition();
    let mut partitions = vec![base.clone()];
    partitions.extend(extra_lengths.iter().map(|&l| Partition { length: l, ..base.clone() }));
    let nominal = ansatz.nominal();
    let mut rows: Vec<TubeRow> = Vec::new();
    let mut prev: Option<Vec<Modulation>> = None;
    let opts = EvolveOptions { monitor_every: cfg.monitor_every, ..Default::default() };
    let traj = evolve_observed(&ansatz.model, EvolutionState::at(cfg.tn, start), cfg.tn, -cfg.dt, &opts, |st| {
        let r = ansatz.sum(st.t, &nominal);
        let h1_error = h1_distance(&st.field, &r)?;
        let f = ansatz.model.functionals(&st.field)?;
        let fit = ansatz.fit_modulation(&st.field, st.t, prev.as_deref()).ok();
        let coercivity = fit.as_ref().and_then(|fit| {
            let n2 = crate::spectral::h1_norm_sq(&fit.epsilon);
            (n2 > 1e-20).then(|| quadratic_form_p(&fit.epsilon, ansatz, &fit.params, &base, st.t) / n2)
        });
        prev = fit.as_ref().map(|f| f.params.clone());
        rows.push(TubeRow {
            t: st.t,
            h1_error,
            mass: f.mass,
            energy: f.energy,
            orthogonality: fit.as_ref().map(|f| f.max_orthogonality()),
            modulation: fit.map(|f| f.params),
            coercivity,
            local: partitions
                .iter()
                .map(|p| LocalRow { length: p.length, values: localized_quantities(&st.field, p, st.t) })
                .collect(),
        });
        Ok(())
    })?;
    rows.reverse();
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.h1_error)).collect();
    let theta_fit = fit_decay_rate(&pts, cfg.tn / 3.0, cfg.tn);
    Ok(TubeReport { rows, theta_fit, theta0: super::theta0(cfg)?, phi0: traj.state.field })
}
