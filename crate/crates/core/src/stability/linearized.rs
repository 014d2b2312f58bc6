use crate::eigen::{lobpcg, Eigenpair};
use crate::error::{Error, Result};
use crate::ground_state::GroundState;
use crate::linalg::{dot, norm};
use crate::model::Model;
use crate::random::{rng, smooth_field, SmoothNoise};

/// Matrix-free `L_+`, `L_-` about a real ground state:
///
/// `L_+ h = -Delta h + omega h - p Q^{p-1} h - E_1(Q^2) h - 2 E_1(Q h) Q`
///
/// `L_- h = -Delta h + omega h - Q^{p-1} h - E_1(Q^2) h`
pub struct Linearization {
    model: Model,
    q: Vec<f64>,
    omega: f64,
    v_plus: Vec<f64>,
    v_minus: Vec<f64>,
}

impl Linearization {
    pub fn new(gs: &GroundState) -> Result<Self> {
        let model = gs.model()?;
        let q = gs.q();
        let p = gs.p;
        let rho: Vec<f64> = q.iter().map(|v| v * v).collect();
        let e = model.nonlocal().e1(&rho);
        let pw: Vec<f64> = q.iter().map(|v| v.abs().powf(p - 1.0)).collect();
        let v_plus = pw.iter().zip(&e).map(|(a, b)| p * a + b).collect();
        let v_minus = pw.iter().zip(&e).map(|(a, b)| a + b).collect();
        Ok(Self { model, q, omega: gs.omega, v_plus, v_minus })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }
    pub fn q(&self) -> &[f64] {
        &self.q
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn l_plus(&self, h: &[f64]) -> Vec<f64> {
        let qh: Vec<f64> = self.q.iter().zip(h).map(|(a, b)| a * b).collect();
        let e = self.model.nonlocal().e1(&qh);
        let lap = self.model.spectral().laplacian_real(h);
        (0..h.len())
            .map(|k| -lap[k] + (self.omega - self.v_plus[k]) * h[k] - 2.0 * e[k] * self.q[k])
            .collect()
    }

    pub fn l_minus(&self, h: &[f64]) -> Vec<f64> {
        let lap = self.model.spectral().laplacian_real(h);
        (0..h.len()).map(|k| -lap[k] + (self.omega - self.v_minus[k]) * h[k]).collect()
    }

    /// `(omega - Delta)^{-1}`.
    pub fn precondition(&self, r: &[f64]) -> Vec<f64> {
        self.model.spectral().solve_shifted_real(self.omega, r)
    }

    pub fn gradient_q(&self) -> [Vec<f64>; 2] {
        let sp = self.model.spectral();
        [sp.derivative_real(0, &self.q), sp.derivative_real(1, &self.q)]
    }

    /// `<A h, h>` with the grid measure.
    pub fn form(&self, a: &[f64], h: &[f64]) -> f64 {
        dot(a, h) * self.model.grid().cell_area()
    }

    pub fn kernel_check(&self) -> KernelCheck {
        let dq = self.gradient_q();
        let grad_norm = (norm(&dq[0]).powi(2) + norm(&dq[1]).powi(2)).sqrt();
        KernelCheck {
            l_minus_q: norm(&self.l_minus(&self.q)) / norm(&self.q),
            l_plus_dq: [
                norm(&self.l_plus(&dq[0])) / grad_norm,
                norm(&self.l_plus(&dq[1])) / grad_norm,
            ],
        }
    }
}

/// Relative sizes of `L_- Q` and `L_+ partial_j Q`.
#[derive(Clone, Copy, Debug)]
pub struct KernelCheck {
    /// `||L_- Q|| / ||Q||`
    pub l_minus_q: f64,
    /// `||L_+ partial_j Q|| / ||grad Q||`
    pub l_plus_dq: [f64; 2],
}

/// `lambda_-` by the closed formula and by the quotient of the operator
/// `H = -Delta + omega - p Q^{p-1} - 3 E_1(Q^2)` against `Q`.
#[derive(Clone, Copy, Debug)]
pub struct LambdaMinus {
    pub formula: f64,
    pub operator: f64,
}

impl LambdaMinus {
    pub fn relative_gap(&self) -> f64 {
        (self.formula - self.operator).abs() / self.formula.abs()
    }
}

pub fn rayleigh_lambda_minus(gs: &GroundState) -> Result<LambdaMinus> {
    Ok(lambda_minus_routes(&gs.model()?, &gs.q(), gs.omega))
}

/// Both `lambda_-` routes for an arbitrary real field `q` at frequency
/// `omega`. They coincide exactly when `omega` is the Lagrange frequency of
/// `q`.
pub fn lambda_minus_routes(model: &Model, q: &[f64], omega: f64) -> LambdaMinus {
    let p = model.p();
    let f = model.functionals_real(q);
    let formula = ((1.0 - p) * f.power - 2.0 * f.quartic) / f.mass;
    let rho: Vec<f64> = q.iter().map(|v| v * v).collect();
    let e = model.nonlocal().e1(&rho);
    let lap = model.spectral().laplacian_real(q);
    let hq: Vec<f64> = (0..q.len())
        .map(|k| -lap[k] + omega * q[k] - p * q[k].abs().powf(p - 1.0) * q[k] - 3.0 * e[k] * q[k])
        .collect();
    let operator = dot(&hq, q) / dot(q, q);
    LambdaMinus { formula, operator }
}

/// Lowest eigenvalues of `L_+` and `L_-` with the kernel checks.
#[derive(Clone, Debug)]
pub struct LinearizedPair {
    pub omega: f64,
    pub eigs_plus: Vec<Eigenpair>,
    pub eigs_minus: Vec<Eigenpair>,
    pub kernel: KernelCheck,
    /// Threshold separating negative from near-zero eigenvalues.
    pub zero_tol: f64,
    /// `|<v, Q>| / (|v| |Q|)` for the lowest `L_+` eigenvector.
    pub lowest_overlap_q: f64,
    pub converged: bool,
}

impl LinearizedPair {
    pub fn negative_plus(&self) -> usize {
        self.eigs_plus.iter().filter(|e| e.value < -self.zero_tol).count()
    }
    pub fn near_zero_plus(&self) -> usize {
        self.eigs_plus.iter().filter(|e| e.value.abs() <= self.zero_tol).count()
    }
    pub fn min_minus(&self) -> f64 {
        self.eigs_minus.iter().map(|e| e.value).fold(f64::INFINITY, f64::min)
    }
}

/// Eigen-residual tolerance of [`linearized_spectrum`].
pub const EIGEN_TOL: f64 = 1e-8;

/// `k` lowest eigenpairs (`k <= 8`) of `L_+` and `L_-`.
pub fn linearized_spectrum(gs: &GroundState, k: usize) -> Result<LinearizedPair> {
    if k == 0 || k > 8 {
        return Err(Error::Domain(format!("eigenvalue count {k} must be in 1..=8")));
    }
    let lin = Linearization::new(gs)?;
    let grid = gs.grid().clone();
    let dq = lin.gradient_q();
    let width = 2.0 / gs.omega.sqrt();
    let mut r = rng(0x5eed);
    let noise = SmoothNoise { bandwidth: gs.omega.sqrt().max(0.5), window: Some(width), complex: false, ..Default::default() };
    let block = k + 6;
    let mut start = vec![lin.q.clone(), dq[0].clone(), dq[1].clone()];
    while start.len() < block {
        start.push(smooth_field(&grid, &mut r, &noise).re());
    }
    let plus = lobpcg(|h| lin.l_plus(h), |v| lin.precondition(v), start.clone(), k, EIGEN_TOL, 3000)?;
    start.swap(0, 1);
    let minus = lobpcg(|h| lin.l_minus(h), |v| lin.precondition(v), start, k, EIGEN_TOL, 3000)?;
    let v0 = &plus.pairs[0].vector;
    let overlap = dot(v0, &lin.q).abs() / (norm(v0) * norm(&lin.q));
    Ok(LinearizedPair {
        omega: gs.omega,
        kernel: lin.kernel_check(),
        eigs_plus: plus.pairs,
        eigs_minus: minus.pairs,
        zero_tol: 1e-6,
        lowest_overlap_q: overlap,
        converged: plus.converged && minus.converged,
    })
}
