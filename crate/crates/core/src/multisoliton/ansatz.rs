use std::collections::hash_map::Entry;
use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::ground_state::{solve_fixed_omega, transfer, GroundState, SolverSettings};
use crate::linalg::minres;
use crate::model::Model;
use crate::spectral::h1_distance;
use crate::stability::Linearization;

use super::{MultiSolitonConfig, Partition, SolitonParams};

/// Ground state of one soliton on the simulation grid, centered at the
/// origin, with its gradient and frequency derivative.
#[derive(Clone, Debug)]
pub struct SolitonProfile {
    pub params: SolitonParams,
    pub q: ComplexField,
    pub grad: [ComplexField; 2],
    /// `dQ/domega = -L_+^{-1} Q`
    pub d_omega: ComplexField,
    pub mass: f64,
}

/// Modulation parameters `(omega_k, x_k, gamma_k)` of one soliton: the
/// center is `x0 + v t + x` and the phase `v.x/2 - |v|^2 t/4 + omega^0 t + gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulation {
    pub omega: f64,
    pub x: [f64; 2],
    pub gamma: f64,
}

#[derive(Clone, Debug)]
pub struct ModulationFit {
    pub params: Vec<Modulation>,
    pub epsilon: ComplexField,
    /// Per soliton: `Re<R_k, eps>`, `Im<R_k, eps>`, `Re<d_1 Q_k, eps>`,
    /// `Re<d_2 Q_k, eps>` (translated and phased), each divided by
    /// `max(||eps||, 1e-10 ||R_k||) ||R_k||`.
    pub orthogonality: Vec<[f64; 4]>,
    pub iterations: usize,
}

impl ModulationFit {
    pub fn max_orthogonality(&self) -> f64 {
        self.orthogonality.iter().flatten().fold(0.0, |a, b| a.max(b.abs()))
    }
}

#[derive(Clone, Debug)]
pub struct Localized {
    /// `I_k = int |phi|^2 y_k`
    pub mass: Vec<f64>,
    /// `M_k = Im int grad(phi) conj(phi) y_k`
    pub momentum: Vec<[f64; 2]>,
}

pub struct Ansatz {
    pub config: MultiSolitonConfig,
    pub grid: Grid2D,
    pub model: Model,
    pub profiles: Vec<SolitonProfile>,
    pub dj: f64,
}

/// `int f conj(g)`
fn pair(f: &ComplexField, g: &ComplexField) -> C {
    let s: C = f.values().iter().zip(g.values()).map(|(a, b)| a * b.conj()).sum();
    s * f.grid().cell_area()
}

fn d_omega(gs: &GroundState) -> Result<ComplexField> {
    let lin = Linearization::new(gs)?;
    let rhs: Vec<f64> = lin.q().iter().map(|v| -v).collect();
    let (x, rep) = minres(|h| lin.l_plus(h), |v| lin.precondition(v), &rhs, 1e-10, 4000)?;
    if rep.relative_residual > 1e-6 {
        return Err(Error::NoConvergence { what: "dQ/domega", iterations: rep.iterations, residual: rep.relative_residual });
    }
    ComplexField::from_real(gs.grid(), &x)
}

impl Ansatz {
    /// Solve each soliton's ground state, move it to the simulation grid and
    /// check the summed smallness `sum ||Q_k|| < sqrt(2 d_J)`.
    pub fn new(config: &MultiSolitonConfig, dj: f64, settings: &SolverSettings) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let model = settings.model(&grid, config.p)?;
        let mut cache: HashMap<u64, SolitonProfile> = HashMap::new();
        let mut profiles = Vec::new();
        for s in &config.solitons {
            let key = s.omega.to_bits();
            if let Entry::Vacant(slot) = cache.entry(key) {
                let gs0 = solve_fixed_omega(s.omega, config.p, dj, settings)?;
                let gs = transfer(&gs0, &grid, settings)?;
                let sp = model.spectral();
                let grad = sp.gradient(&gs.profile);
                let prof = SolitonProfile { params: *s, d_omega: d_omega(&gs)?, q: gs.profile, grad, mass: gs.mass };
                slot.insert(prof);
            }
            profiles.push(SolitonProfile { params: *s, ..cache[&key].clone() });
        }
        let sum: f64 = profiles.iter().map(|p| p.mass.sqrt()).sum();
        let bound = (2.0 * dj).sqrt();
        if sum >= bound {
            let single = profiles.iter().all(|p| p.mass < 2.0 * dj);
            return Err(Error::Config(format!(
                "sum of soliton L2 norms {sum:.6} is not below sqrt(2 d_J) = {bound:.6}; per-soliton bound {}",
                if single { "holds" } else { "fails too" }
            )));
        }
        Ok(Self { config: config.clone(), grid, model, profiles, dj })
    }

    pub fn nominal(&self) -> Vec<Modulation> {
        self.profiles.iter().map(|p| Modulation { omega: p.params.omega, x: [0.0; 2], gamma: p.params.gamma }).collect()
    }

    pub fn center(&self, k: usize, t: f64, m: &Modulation) -> [f64; 2] {
        let p = &self.profiles[k].params;
        [p.x0[0] + p.v[0] * t + m.x[0], p.x0[1] + p.v[1] * t + m.x[1]]
    }

    fn phased(&self, k: usize, t: f64, m: &Modulation, f: &ComplexField) -> ComplexField {
        let p = &self.profiles[k].params;
        let v2 = p.v[0] * p.v[0] + p.v[1] * p.v[1];
        let delta = -0.25 * v2 * t + p.omega * t + m.gamma;
        f.translate(self.center(k, t, m)).boost(p.v).scale_complex(C::from_polar(1.0, delta))
    }

    /// `Q_{omega_k}(x - center) e^{i(v.x/2 + delta)}`, with `Q_omega` to
    /// first order in `omega - omega^0`.
    pub fn component(&self, k: usize, t: f64, m: &Modulation) -> ComplexField {
        let pr = &self.profiles[k];
        let q = pr.q.axpy(C::new(m.omega - pr.params.omega, 0.0), &pr.d_omega);
        self.phased(k, t, m, &q)
    }

    pub fn sum(&self, t: f64, mods: &[Modulation]) -> ComplexField {
        let mut r = ComplexField::zeros(&self.grid);
        for (k, m) in mods.iter().enumerate() {
            r = r.add(&self.component(k, t, m));
        }
        r
    }

    /// Centers must stay five decay lengths inside the box.
    pub fn check_placement(&self, t: f64) -> Result<()> {
        for (k, m) in self.nominal().iter().enumerate() {
            let c = self.center(k, t, m);
            let margin = 5.0 / self.profiles[k].params.omega.sqrt();
            let half = [0.5 * self.grid.lx(), 0.5 * self.grid.ly()];
            if (0..2).any(|d| half[d] - c[d].abs() < margin) {
                return Err(Error::Placement(format!(
                    "soliton {k} at {c:?} for t = {t} is within {margin:.3} of the boundary"
                )));
            }
        }
        Ok(())
    }

    /// `R(t) = sum_k R_k(t)` at the configured parameters.
    pub fn build_profile(&self, t: f64) -> Result<ComplexField> {
        self.check_placement(t)?;
        let r = self.sum(t, &self.nominal());
        let m = r.mass();
        if m >= 2.0 * self.dj {
            return Err(Error::Config(format!("M(R({t})) = {m} is not below 2 d_J = {}", 2.0 * self.dj)));
        }
        Ok(r)
    }

    /// Parameters satisfying the orthogonality conditions
    /// `Re<R_k, eps> = Im<R_k, eps> = Re<d_j Q_k, eps> = 0`, found by Newton
    /// from `init` (the configured parameters when `None`).
    pub fn fit_modulation(&self, phi: &ComplexField, t: f64, init: Option<&[Modulation]>) -> Result<ModulationFit> {
        self.model.check_grid(phi)?;
        let kk = self.profiles.len();
        let mut mods: Vec<Modulation> = init.map(|m| m.to_vec()).unwrap_or_else(|| self.nominal());
        let start = h1_distance(phi, &self.sum(t, &mods))?;
        if start > self.config.alpha1 {
            return Err(Error::TubeExit { t, distance: start, limit: self.config.alpha1 });
        }
        let mut iterations = 0;
        let mut last: Option<(Vec<[f64; 4]>, ComplexField)> = None;
        for it in 0..40 {
            iterations = it;
            let parts: Vec<_> = (0..kk)
                .map(|k| {
                    let pr = &self.profiles[k];
                    let m = &mods[k];
                    let r = self.component(k, t, m);
                    let d = [self.phased(k, t, m, &pr.grad[0]), self.phased(k, t, m, &pr.grad[1])];
                    let w = self.phased(k, t, m, &pr.d_omega);
                    (r, d, w)
                })
                .collect();
            let mut eps = phi.clone();
            for (r, _, _) in &parts {
                eps = eps.sub(r);
            }
            let n = 4 * kk;
            let tests = |a: usize| -> (&ComplexField, bool) {
                let (r, d, _) = &parts[a / 4];
                match a % 4 {
                    0 => (r, false),
                    1 => (r, true),
                    2 => (&d[0], false),
                    _ => (&d[1], false),
                }
            };
            let take = |z: C, imag: bool| if imag { z.im } else { z.re };
            let f = DVector::from_fn(n, |a, _| {
                let (b, im) = tests(a);
                take(pair(b, &eps), im)
            });
            let norm_eps = eps.mass().sqrt();
            let ortho: Vec<[f64; 4]> = (0..kk)
                .map(|k| {
                    let nr = parts[k].0.mass().sqrt();
                    // eps at round-off level is treated as zero
                    let scale = norm_eps.max(1e-10 * nr) * nr;
                    let g = |j: usize| if scale > 0.0 { f[4 * k + j] / scale } else { 0.0 };
                    [g(0), g(1), g(2), g(3)]
                })
                .collect();
            let done = ortho.iter().flatten().all(|v| v.abs() <= 1e-10) || f.amax() == 0.0;
            last = Some((ortho, eps));
            if done {
                break;
            }
            // columns: d eps / d(omega, x1, x2, gamma) of soliton b
            let col = |b: usize| -> ComplexField {
                let (r, d, w) = &parts[b / 4];
                match b % 4 {
                    0 => w.scale(-1.0),
                    1 => d[0].clone(),
                    2 => d[1].clone(),
                    _ => r.scale_complex(C::new(0.0, -1.0)),
                }
            };
            let cols: Vec<ComplexField> = (0..n).map(col).collect();
            let a = DMatrix::from_fn(n, n, |i, j| {
                let (b, im) = tests(i);
                take(pair(b, &cols[j]), im)
            });
            let Some(step) = a.lu().solve(&(-&f)) else {
                return Err(Error::LinearSolver("singular modulation system".into()));
            };
            for (k, m) in mods.iter_mut().enumerate() {
                m.omega += step[4 * k];
                m.x[0] += step[4 * k + 1];
                m.x[1] += step[4 * k + 2];
                m.gamma += step[4 * k + 3];
            }
            if step.amax() < 1e-13 {
                let eps = phi.sub(&self.sum(t, &mods));
                last = last.map(|(o, _)| (o, eps));
                break;
            }
        }
        let (orthogonality, epsilon) = last.expect("at least one iteration");
        Ok(ModulationFit { params: mods, epsilon, orthogonality, iterations })
    }
}

/// `I_k` and `M_k` of `phi` against the partition at time `t`.
pub fn localized_quantities(phi: &ComplexField, partition: &Partition, t: f64) -> Localized {
    let grid = phi.grid();
    let nx = grid.nx();
    let g = crate::spectral::Spectral::new(grid).gradient(phi);
    let v = phi.values();
    let da = grid.cell_area();
    let kk = partition.count();
    let mut mass = vec![0.0; kk];
    let mut momentum = vec![[0.0; 2]; kk];
    for k in 0..kk {
        let w: Vec<f64> = (0..nx).map(|i| partition.weight(k, grid.x(i), t)[0]).collect();
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (idx, z) in v.iter().enumerate() {
            let y = w[idx % nx];
            a += z.norm_sqr() * y;
            b += (g[0].values()[idx] * z.conj()).im * y;
            c += (g[1].values()[idx] * z.conj()).im * y;
        }
        mass[k] = a * da;
        momentum[k] = [b * da, c * da];
    }
    Localized { mass, momentum }
}

/// The localized quadratic form `P(eps, eps)` about the modulated ansatz.
pub fn quadratic_form_p(eps: &ComplexField, ansatz: &Ansatz, mods: &[Modulation], partition: &Partition, t: f64) -> f64 {
    let model = &ansatz.model;
    let grid = eps.grid();
    let nx = grid.nx();
    let da = grid.cell_area();
    let p = model.p();
    let sp = model.spectral();
    let e = eps.values();
    let rho_eps = eps.density();
    let e1_eps = model.nonlocal().e1(&rho_eps);
    let grad = sp.gradient(eps);
    let mut total = sp.grad_sq(eps);
    for (k, m) in mods.iter().enumerate() {
        let r = ansatz.component(k, t, m);
        let rv = r.values();
        let rho = r.density();
        let re: Vec<f64> = rv.iter().zip(e).map(|(a, b)| (a.conj() * b).re).collect();
        let e1_rho = model.nonlocal().e1(&rho);
        let e1_re = model.nonlocal().e1(&re);
        let mut local = 0.0;
        let mut nonlocal = 0.0;
        for idx in 0..rho.len() {
            let a = rho[idx].sqrt();
            let extra = if a > 0.0 { (p - 1.0) * a.powf(p - 3.0) * re[idx] * re[idx] } else { 0.0 };
            local += a.powf(p - 1.0) * rho_eps[idx] + extra;
            nonlocal += e1_rho[idx] * rho_eps[idx] + e1_eps[idx] * rho[idx] + 4.0 * e1_re[idx] * re[idx];
        }
        let v = ansatz.profiles[k].params.v;
        let coef = m.omega + 0.25 * (v[0] * v[0] + v[1] * v[1]);
        let (mut mass, mut mom) = (0.0, 0.0);
        for idx in 0..rho.len() {
            let y = partition.weight(k, grid.x(idx % nx), t)[0];
            mass += rho_eps[idx] * y;
            let ge = [grad[0].values()[idx], grad[1].values()[idx]];
            mom += (v[0] * (ge[0] * e[idx].conj()).im + v[1] * (ge[1] * e[idx].conj()).im) * y;
        }
        total += -local * da + (coef * mass - mom) * da - 0.5 * nonlocal * da;
    }
    total
}
