use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::linalg;
use crate::model::Model;

use super::stationary::newton_fixed;
use super::{gaussian_seed, normalize_mass, SolverSettings};

/// The sharp constant `d_J = inf J` and its optimizer.
#[derive(Clone, Debug)]
pub struct SharpConstant {
    pub dj: f64,
    /// Optimizer scaled to solve `-Delta W + c W - E_1(W^2) W = 0`.
    pub profile: ComplexField,
    pub shift: f64,
    pub flow_iterations: usize,
    /// `|J(W) - M(W)/2| / d_J`
    pub identity_gap: f64,
    pub residual: f64,
}

/// Minimize `J(u) = M(u) G(u) / Q4(u)` over real fields on `grid`.
///
/// Gradient flow on `ln J` preconditioned by `(G/M - Delta)^{-1}` with the
/// mass renormalized every step, then Newton on the Euler-Lagrange equation
/// of the rescaled optimizer.
pub fn minimize_j(grid: &Grid2D, settings: &SolverSettings) -> Result<SharpConstant> {
    // J does not involve the power term; any admissible exponent will do
    let model: Model = settings.model(grid, 3.0)?;
    let da = grid.cell_area();
    let mut u = gaussian_seed(grid, settings.seed_width, 1.0)?;
    let eval = |u: &[f64]| {
        let rho: Vec<f64> = u.iter().map(|v| v * v).collect();
        let e1 = model.nonlocal().e1(&rho);
        let g = model.spectral().grad_sq_real(u);
        let m = rho.iter().sum::<f64>() * da;
        let q4 = linalg::dot(&e1, &rho) * da;
        (m * g / q4, g, m, q4, e1)
    };
    let (mut j, mut g, mut m, mut q4, mut e1) = eval(&u);
    let mut tau: f64 = 1.0;
    let mut iterations = 0;
    let mut res = f64::INFINITY;
    while iterations < settings.max_flow_iter {
        if !(j.is_finite() && q4 > 0.0) {
            return Err(Error::DegenerateSeed("quartic term vanished during the flow".into()));
        }
        let c = g / m;
        let a = 2.0 * g / q4;
        let src: Vec<f64> = u.iter().zip(&e1).map(|(v, e)| a * e * v).collect();
        let t = model.spectral().solve_shifted_real(c, &src);
        let d: Vec<f64> = u.iter().zip(&t).map(|(v, w)| v - w).collect();
        res = linalg::norm(&d) / linalg::norm(&u);
        if res <= settings.flow_tol {
            break;
        }
        loop {
            let mut trial: Vec<f64> = u.iter().zip(&d).map(|(v, w)| v - tau * w).collect();
            normalize_mass(&mut trial, grid, 1.0)?;
            let (jt, gt, mt, qt, et) = eval(&trial);
            if jt <= j * (1.0 + 1e-14) || tau < 1e-6 {
                u = trial;
                (j, g, m, q4, e1) = (jt, gt, mt, qt, et);
                tau = (tau * 1.25).min(1.5);
                break;
            }
            tau *= 0.5;
        }
        iterations += 1;
    }
    if res > settings.flow_tol {
        return Err(Error::NoConvergence { what: "J minimization", iterations, residual: res });
    }
    let c = g / m;
    let scale = (2.0 * g / q4).sqrt();
    let w0: Vec<f64> = u.iter().map(|v| v * scale).collect();
    let (w, history) = newton_fixed(&model, w0, c, 0.0, settings)?;
    let residual = *history.last().unwrap();
    let wf = ComplexField::from_real(grid, &w)?;
    let rep = model.functionals(&wf)?;
    let dj = rep.gn_ratio.ok_or_else(|| Error::DegenerateSeed("optimizer has no quartic term".into()))?;
    Ok(SharpConstant {
        dj,
        identity_gap: (dj - 0.5 * rep.mass).abs() / dj,
        profile: wf,
        shift: c,
        flow_iterations: iterations,
        residual,
    })
}
