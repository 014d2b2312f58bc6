use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::linalg::{self, minres};
use crate::model::Model;

use super::{canonical_sign, check_real, GroundState, Preconditioner, SolverSettings};

/// The map `F(q) = Delta q - c q + a |q|^{p-1} q + E_1(q^2) q` for real `q`,
/// with `a = 1` for ground states and `a = 0` for the sharp-constant profile.
pub struct Stationary<'a> {
    model: &'a Model,
    shift: f64,
    power: f64,
}

/// `L_+ h = -Delta h + c h - a p |q|^{p-1} h - E_1(q^2) h - 2 E_1(q h) q`,
/// the negative Jacobian of `F` at `q`.
pub struct Linearized<'a> {
    model: &'a Model,
    q: Vec<f64>,
    shift: f64,
    v0: Vec<f64>,
}

impl<'a> Stationary<'a> {
    pub fn new(model: &'a Model, shift: f64, power: f64) -> Self {
        Self { model, shift, power }
    }

    pub fn residual(&self, q: &[f64]) -> Vec<f64> {
        let p = self.model.p();
        let rho: Vec<f64> = q.iter().map(|v| v * v).collect();
        let e = self.model.nonlocal().e1(&rho);
        let lap = self.model.spectral().laplacian_real(q);
        (0..q.len())
            .map(|k| {
                let v = q[k];
                lap[k] - self.shift * v + self.power * v.abs().powf(p - 1.0) * v + e[k] * v
            })
            .collect()
    }

    /// `||F(q)|| / ||q||`.
    pub fn relative_residual(&self, q: &[f64]) -> f64 {
        linalg::norm(&self.residual(q)) / linalg::norm(q)
    }

    pub fn linearize(&self, q: &[f64]) -> Linearized<'a> {
        let p = self.model.p();
        let rho: Vec<f64> = q.iter().map(|v| v * v).collect();
        let e = self.model.nonlocal().e1(&rho);
        let v0 = (0..q.len())
            .map(|k| self.power * p * q[k].abs().powf(p - 1.0) + e[k])
            .collect();
        Linearized { model: self.model, q: q.to_vec(), shift: self.shift, v0 }
    }
}

impl Linearized<'_> {
    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        let qh: Vec<f64> = self.q.iter().zip(h).map(|(a, b)| a * b).collect();
        let e = self.model.nonlocal().e1(&qh);
        let lap = self.model.spectral().laplacian_real(h);
        (0..h.len())
            .map(|k| -lap[k] + (self.shift - self.v0[k]) * h[k] - 2.0 * e[k] * self.q[k])
            .collect()
    }

    pub fn precondition(&self, kind: Preconditioner, r: &[f64]) -> Vec<f64> {
        match kind {
            Preconditioner::ShiftedLaplacian => self.model.spectral().solve_shifted_real(self.shift, r),
            Preconditioner::Identity => r.to_vec(),
        }
    }

    /// Solve `L_+ x = b` to relative (preconditioned) tolerance `tol`.
    pub fn solve(&self, b: &[f64], tol: f64, settings: &SolverSettings) -> Result<Vec<f64>> {
        let (x, _) = minres(
            |h| self.apply(h),
            |r| self.precondition(settings.preconditioner, r),
            b,
            tol,
            settings.max_krylov_iter,
        )?;
        Ok(x)
    }
}

/// Newton iteration on `F(q) = 0` at a fixed shift. Returns the profile and
/// the relative residual after each step (first entry: the input).
pub(crate) fn newton_fixed(
    model: &Model,
    mut q: Vec<f64>,
    shift: f64,
    power: f64,
    settings: &SolverSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let st = Stationary::new(model, shift, power);
    let qn = |q: &[f64]| linalg::norm(q);
    let mut f = st.residual(&q);
    let mut r = linalg::norm(&f) / qn(&q);
    let mut history = vec![r];
    for _ in 0..settings.max_newton_iter {
        if r <= settings.tol {
            return Ok((q, history));
        }
        let forcing = (0.05 * r).clamp(1e-13, 0.1);
        let lin = st.linearize(&q);
        let h = lin.solve(&f, forcing, settings)?;
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = q.iter().zip(&h).map(|(a, b)| a + step * b).collect();
            let ft = st.residual(&trial);
            let rt = linalg::norm(&ft) / qn(&trial);
            if rt < r || step < 1e-3 {
                q = trial;
                f = ft;
                r = rt;
                history.push(r);
                break;
            }
            step *= 0.5;
        }
        if !r.is_finite() {
            break;
        }
    }
    if r <= settings.tol {
        return Ok((q, history));
    }
    Err(Error::NoConvergence { what: "Newton", iterations: settings.max_newton_iter, residual: r })
}

/// Polish a ground-state candidate at fixed `omega` by Newton's method.
/// A profile already within tolerance is returned unchanged.
pub fn refine_newton(model: &Model, q0: &ComplexField, omega: f64, settings: &SolverSettings) -> Result<GroundState> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("omega = {omega} must be positive")));
    }
    model.check_grid(q0)?;
    let q = check_real(q0)?;
    if linalg::norm(&q) == 0.0 {
        return Err(Error::DegenerateSeed("zero profile".into()));
    }
    let st = Stationary::new(model, omega, 1.0);
    let r0 = st.relative_residual(&q);
    if r0 <= settings.tol {
        let mut gs = GroundState::from_profile(model, q, omega, vec![r0]);
        gs.profile = q0.clone();
        return Ok(gs);
    }
    let (mut q, history) = newton_fixed(model, q, omega, 1.0, settings)?;
    canonical_sign(&mut q);
    Ok(GroundState::from_profile(model, q, omega, history))
}
