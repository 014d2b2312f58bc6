use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::linalg::{self, minres};
use crate::model::Model;

use super::stationary::newton_fixed;
use super::{
    canonical_sign, check_p, gaussian_seed, mass_of, normalize_mass, GroundState, Preconditioner, SolverSettings,
    Stationary,
};

/// Outcome of the projected gradient flow.
pub(crate) struct FlowResult {
    pub q: Vec<f64>,
    pub omega: f64,
    pub iterations: usize,
}

/// Preconditioned projected gradient flow for `min E` at fixed mass.
/// The direction is the `(s - Delta)^{-1}`-preconditioned residual of the
/// Euler-Lagrange equation, projected tangent to the mass sphere; the step is
/// adapted so the energy decreases.
pub(crate) fn mass_flow(model: &Model, mut q: Vec<f64>, mass: f64, settings: &SolverSettings) -> Result<FlowResult> {
    let grid = model.grid().clone();
    let da = grid.cell_area();
    normalize_mass(&mut q, &grid, mass)?;
    let p = model.p();
    let eval = |q: &[f64]| {
        let rho: Vec<f64> = q.iter().map(|v| v * v).collect();
        let e1 = model.nonlocal().e1(&rho);
        let lap = model.spectral().laplacian_real(q);
        let g = -linalg::dot(&lap, q) * da;
        let n: f64 = rho.iter().map(|r| r.powf(0.5 * (p + 1.0))).sum::<f64>() * da;
        let q4 = linalg::dot(&e1, &rho) * da;
        let energy = g - 2.0 / (p + 1.0) * n - 0.5 * q4;
        let lambda = (n + q4 - g) / mass;
        (energy, lambda, lap, e1)
    };
    let (mut energy, mut lambda, mut lap, mut e1) = eval(&q);
    let mut tau: f64 = 1.0;
    let mut residual = f64::INFINITY;
    for it in 0..settings.max_flow_iter {
        if !energy.is_finite() {
            return Err(Error::NoConvergence { what: "gradient flow", iterations: it, residual });
        }
        let r: Vec<f64> = (0..q.len())
            .map(|k| -lap[k] - (q[k].abs().powf(p - 1.0) + e1[k]) * q[k] + lambda * q[k])
            .collect();
        residual = linalg::norm(&r) / (lambda.abs().max(1e-3) * linalg::norm(&q));
        if residual <= settings.flow_tol {
            return Ok(FlowResult { q, omega: lambda, iterations: it });
        }
        let s = lambda.max(0.05);
        let (pr, pq) = match settings.preconditioner {
            Preconditioner::ShiftedLaplacian => (
                model.spectral().solve_shifted_real(s, &r),
                model.spectral().solve_shifted_real(s, &q),
            ),
            Preconditioner::Identity => (r.clone(), q.clone()),
        };
        let coef = linalg::dot(&q, &pr) / linalg::dot(&q, &pq);
        let d: Vec<f64> = pr.iter().zip(&pq).map(|(a, b)| a - coef * b).collect();
        loop {
            let mut trial: Vec<f64> = q.iter().zip(&d).map(|(a, b)| a - tau * b).collect();
            normalize_mass(&mut trial, &grid, mass)?;
            let (e_t, l_t, lap_t, e1_t) = eval(&trial);
            if e_t <= energy + 1e-14 * energy.abs() || tau < 1e-6 {
                q = trial;
                energy = e_t;
                lambda = l_t;
                lap = lap_t;
                e1 = e1_t;
                tau = (tau * 1.25).min(4.0);
                break;
            }
            tau *= 0.5;
        }
    }
    Err(Error::NoConvergence { what: "gradient flow", iterations: settings.max_flow_iter, residual })
}

/// Newton on `(q, omega)` with the mass constraint appended.
fn bordered_newton(model: &Model, mut q: Vec<f64>, mut omega: f64, mass: f64, settings: &SolverSettings) -> Result<(Vec<f64>, f64, f64)> {
    let grid = model.grid().clone();
    let da = grid.cell_area();
    let mut r = f64::INFINITY;
    for _ in 0..settings.max_newton_iter {
        let st = Stationary::new(model, omega, 1.0);
        let f = st.residual(&q);
        r = linalg::norm(&f) / linalg::norm(&q);
        let gap = mass - mass_of(&q, &grid);
        if r <= settings.tol && gap.abs() <= 1e-12 * mass {
            return Ok((q, omega, r));
        }
        let lin = st.linearize(&q);
        let forcing = (0.05 * r).clamp(1e-13, 0.1);
        let prec = |v: &[f64]| lin.precondition(settings.preconditioner, v);
        let (a, _) = minres(|h| lin.apply(h), prec, &f, forcing, settings.max_krylov_iter)?;
        let (b, _) = minres(|h| lin.apply(h), prec, &q, forcing, settings.max_krylov_iter)?;
        let qb = linalg::dot(&q, &b) * da;
        if qb.abs() < 1e-300 {
            return Err(Error::LinearSolver("singular bordered system".into()));
        }
        let dw = (2.0 * linalg::dot(&q, &a) * da - gap) / (2.0 * qb);
        for k in 0..q.len() {
            q[k] += a[k] - dw * b[k];
        }
        omega += dw;
        if !(omega > 0.0) {
            return Err(Error::NoConvergence { what: "bordered Newton", iterations: 0, residual: r });
        }
    }
    Err(Error::NoConvergence { what: "bordered Newton", iterations: settings.max_newton_iter, residual: r })
}

/// Energy minimizer at mass `m`, `0 < m < 2 d_J`, with its Lagrange
/// multiplier `omega_m = (N + Q4 - G) / m`.
pub fn solve_mass_constrained(m: f64, p: f64, dj: f64, settings: &SolverSettings) -> Result<GroundState> {
    check_p(p)?;
    if !(m > 0.0 && m < 2.0 * dj) {
        return Err(Error::Domain(format!("mass {m} outside (0, 2 d_J) = (0, {})", 2.0 * dj)));
    }
    let grid = match settings.box_side {
        Some(l) => Grid2D::square(settings.points, l)?,
        None => {
            // a coarse pass sizes the box from the frequency
            let coarse = Grid2D::square(128, 60.0)?;
            let model = settings.model(&coarse, p)?;
            let seed = gaussian_seed(&coarse, settings.seed_width, m)?;
            let loose = SolverSettings { flow_tol: 1e-3, ..settings.clone() };
            let est = mass_flow(&model, seed, m, &loose)?;
            Grid2D::for_frequency(settings.points, est.omega.max(1e-3))?
        }
    };
    let model = settings.model(&grid, p)?;
    let seed = gaussian_seed(&grid, settings.seed_width, m)?;
    solve_mass_on(&model, seed, m, settings)
}

pub(crate) fn solve_mass_on(model: &Model, seed: Vec<f64>, m: f64, settings: &SolverSettings) -> Result<GroundState> {
    let flow = mass_flow(model, seed, m, settings)?;
    let (mut q, _, _) = bordered_newton(model, flow.q, flow.omega, m, settings)?;
    canonical_sign(&mut q);
    normalize_mass(&mut q, model.grid(), m)?;
    let omega = model.lagrange_frequency(&q);
    let r = Stationary::new(model, omega, 1.0).relative_residual(&q);
    let mut gs = GroundState::from_profile(model, q, omega, vec![r]);
    gs.flow_iterations = flow.iterations;
    Ok(gs)
}

/// Ground state at prescribed `omega`: a secant search on the mass of
/// energy minimizers brings `omega_m` close, then Newton at fixed `omega`.
pub fn solve_fixed_omega(omega: f64, p: f64, dj: f64, settings: &SolverSettings) -> Result<GroundState> {
    check_p(p)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("omega = {omega} must be positive")));
    }
    let grid = settings.grid_for(omega)?;
    let model = settings.model(&grid, p)?;
    let loose = SolverSettings { flow_tol: 1e-4, ..settings.clone() };
    let width = settings.seed_width.max(1.0 / omega.sqrt() * 0.5);
    let m_max = 2.0 * dj * (1.0 - 1e-6);
    let mut m = dj;
    let mut q = gaussian_seed(&grid, width, m)?;
    let mut hist: Vec<(f64, f64)> = Vec::new();
    for _ in 0..30 {
        let f = mass_flow(&model, q.clone(), m, &loose)?;
        q = f.q;
        hist.push((m.ln(), f.omega.ln()));
        if (f.omega - omega).abs() <= 0.02 * omega {
            break;
        }
        let next = if hist.len() < 2 {
            // p-dominated scaling guess, exponent (3-p)/(p-1) clamped
            let kappa = ((3.0 - p) / (p - 1.0)).clamp(0.2, 5.0);
            m * (omega / f.omega).powf(kappa)
        } else {
            let (a, b) = (hist[hist.len() - 2], hist[hist.len() - 1]);
            let slope = (b.1 - a.1) / (b.0 - a.0);
            if slope.is_finite() && slope > 0.0 {
                (b.0 + (omega.ln() - b.1) / slope).exp()
            } else {
                m * (omega / f.omega).powf(0.5)
            }
        };
        m = next.clamp(m * 0.05, m_max.min(m * 20.0));
    }
    let start = crate::field::ComplexField::from_real(&grid, &q)?;
    let mut gs = super::refine_newton(&model, &start, omega, settings);
    if gs.is_err() {
        // continuation in omega from the nearest minimizer
        let w0 = model.lagrange_frequency(&q);
        let mut cur = q.clone();
        for s in 1..=8 {
            let w = w0 + (omega - w0) * s as f64 / 8.0;
            cur = newton_fixed(&model, cur, w, 1.0, settings)?.0;
        }
        gs = super::refine_newton(&model, &crate::field::ComplexField::from_real(&grid, &cur)?, omega, settings);
    }
    gs
}
