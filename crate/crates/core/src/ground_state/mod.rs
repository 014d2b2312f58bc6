//! Ground states `Delta Q - omega Q + Q^p + E_1(Q^2) Q = 0` and the sharp
//! Gagliardo-Nirenberg constant `d_J = inf M G / Q4`.

mod flow;
mod sharp;
mod stationary;
mod transfer;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::model::{check_exponent, FunctionalReport, Model};
use crate::nonlocal::NonlocalKind;

pub use flow::{solve_fixed_omega, solve_mass_constrained};
pub use sharp::{minimize_j, SharpConstant};
pub use stationary::{refine_newton, Stationary};
pub use transfer::{interpolate, transfer};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    /// `(c - Delta)^{-1}` with `c` the current frequency.
    ShiftedLaplacian,
    Identity,
}

#[derive(Clone, Debug)]
pub struct SolverSettings {
    /// Points per axis.
    pub points: usize,
    /// Box side; `None` picks one from the frequency.
    pub box_side: Option<f64>,
    /// Newton stopping tolerance on `||F|| / ||Q||`.
    pub tol: f64,
    /// Gradient-flow stopping tolerance before Newton takes over.
    pub flow_tol: f64,
    pub max_flow_iter: usize,
    pub max_newton_iter: usize,
    pub max_krylov_iter: usize,
    pub preconditioner: Preconditioner,
    pub nonlocal: NonlocalKind,
    pub dealias: bool,
    /// Width of the Gaussian seed.
    pub seed_width: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            points: 256,
            box_side: None,
            tol: 1e-10,
            flow_tol: 1e-5,
            max_flow_iter: 20_000,
            max_newton_iter: 40,
            max_krylov_iter: 2_000,
            preconditioner: Preconditioner::ShiftedLaplacian,
            nonlocal: NonlocalKind::Isolated,
            dealias: false,
            seed_width: 1.0,
        }
    }
}

impl SolverSettings {
    pub fn grid_for(&self, omega: f64) -> Result<Grid2D> {
        match self.box_side {
            Some(l) => Grid2D::square(self.points, l),
            None => Grid2D::for_frequency(self.points, omega),
        }
    }

    pub fn model(&self, grid: &Grid2D, p: f64) -> Result<Model> {
        Ok(Model::new(grid, p, self.nonlocal)?.with_dealias(self.dealias))
    }
}

/// Positive, centered solution of the ground-state equation.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub profile: ComplexField,
    pub omega: f64,
    pub p: f64,
    pub mass: f64,
    pub energy: f64,
    /// `||Delta Q - omega Q + Q^p + E_1(Q^2) Q|| / ||Q||` in discrete `L^2`.
    pub residual: f64,
    pub report: FunctionalReport,
    /// Fitted exponential decay rate of `Q`, see [`decay_slope`].
    pub decay_rate: f64,
    pub nonlocal: NonlocalKind,
    /// Relative residual before and after each Newton step.
    pub newton_history: Vec<f64>,
    pub flow_iterations: usize,
}

impl GroundState {
    pub fn grid(&self) -> &Grid2D {
        self.profile.grid()
    }

    pub fn q(&self) -> Vec<f64> {
        self.profile.re()
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.grid(), self.p, self.nonlocal)
    }

    pub(crate) fn from_profile(model: &Model, q: Vec<f64>, omega: f64, history: Vec<f64>) -> Self {
        let report = model.functionals_real(&q);
        let profile = ComplexField::from_values(
            model.grid(),
            q.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
        .unwrap();
        let decay_rate = -decay_slope(model.grid(), &q);
        Self {
            profile,
            omega,
            p: model.p(),
            mass: report.mass,
            energy: report.energy,
            residual: *history.last().unwrap_or(&f64::NAN),
            report,
            decay_rate,
            nonlocal: model.kind(),
            newton_history: history,
            flow_iterations: 0,
        }
    }
}

/// Least-squares slope of `log|f|` against `|x|` over the annulus
/// `0.3 R <= |x| <= 0.45 R`, `R` the half side of the box. Nodes where `f`
/// vanishes are skipped.
pub fn decay_slope(grid: &Grid2D, f: &[f64]) -> f64 {
    let rb = 0.5 * grid.lx().min(grid.ly());
    let nx = grid.nx();
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let peak = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (k, v) in f.iter().enumerate() {
        let r = grid.x(k % nx).hypot(grid.y(k / nx));
        if r < 0.3 * rb || r > 0.45 * rb || v.abs() <= 1e-300 || v.abs() < 1e-15 * peak {
            continue;
        }
        let l = v.abs().ln();
        n += 1.0;
        sx += r;
        sy += l;
        sxx += r * r;
        sxy += r * l;
    }
    if n < 2.0 {
        return f64::NAN;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Diagnostics from [`verify`].
#[derive(Clone, Copy, Debug)]
pub struct GroundStateCheck {
    pub residual: f64,
    /// `|2/(p+1) N + Q4/2 - omega M| / (omega M)`
    pub pohozaev: f64,
    /// `|I(Q)| / G`, equivalently the Nehari gap `|omega M - (N + Q4 - G)|` scaled.
    pub nehari: f64,
    /// Largest `|Q|` on the box edge relative to `max Q`.
    pub boundary: f64,
    /// Most negative value of `Q` relative to `max Q`.
    pub negativity: f64,
    /// Decay fits of `log|Q|`, `log|E_1(Q^2)|`, `log|E_2(Q^2)|` against `|x|`.
    pub decay_q: f64,
    pub decay_e1: f64,
    pub decay_e2: f64,
    /// The profile is identically zero.
    pub degenerate: bool,
}

impl GroundStateCheck {
    /// Identities within `tol`, edge amplitude and negativity within
    /// `boundary_tol`, all decay fits negative.
    pub fn passes(&self, tol: f64, boundary_tol: f64) -> bool {
        !self.degenerate
            && self.pohozaev <= tol
            && self.nehari <= tol
            && self.boundary <= boundary_tol
            && self.negativity <= boundary_tol
            && self.decay_q < 0.0
            && self.decay_e1 < 0.0
            && self.decay_e2 < 0.0
    }
}

/// Check the defining identities of a ground state.
pub fn verify(gs: &GroundState) -> Result<GroundStateCheck> {
    let model = gs.model()?;
    let q = gs.q();
    let peak = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak == 0.0 {
        return Ok(GroundStateCheck {
            residual: 0.0,
            pohozaev: f64::NAN,
            nehari: f64::NAN,
            boundary: f64::NAN,
            negativity: f64::NAN,
            decay_q: f64::NAN,
            decay_e1: f64::NAN,
            decay_e2: f64::NAN,
            degenerate: true,
        });
    }
    let f = model.functionals_real(&q);
    let p = gs.p;
    let wm = gs.omega * f.mass;
    let st = Stationary::new(&model, gs.omega, 1.0);
    let min = q.iter().cloned().fold(0.0, f64::min);
    let rho: Vec<f64> = q.iter().map(|v| v * v).collect();
    let grid = model.grid();
    Ok(GroundStateCheck {
        residual: st.relative_residual(&q),
        pohozaev: (2.0 / (p + 1.0) * f.power + 0.5 * f.quartic - wm).abs() / wm,
        nehari: f.nehari.abs() / f.gradient,
        boundary: gs.profile.boundary_max() / peak,
        negativity: (-min).max(0.0) / peak,
        decay_q: decay_slope(grid, &q),
        decay_e1: decay_slope(grid, &model.nonlocal().apply(1, &rho)),
        decay_e2: decay_slope(grid, &model.nonlocal().apply(2, &rho)),
        degenerate: false,
    })
}

/// Rotate the global phase so the mean is real and positive, and move the
/// peak modulus to the center node.
pub fn canonicalize(u: &ComplexField) -> ComplexField {
    let mean: Complex64 = u.values().iter().sum();
    let v = if mean.norm() > 0.0 { u.scale_complex(mean.conj() / mean.norm()) } else { u.clone() };
    let g = v.grid();
    let (i, j) = g.coords(v.argmax());
    v.shift_lattice((g.nx() / 2) as isize - i as isize, (g.ny() / 2) as isize - j as isize)
}

/// Normalized Gaussian `a exp(-r^2 / (2 w^2))` with mass `m`.
pub(crate) fn gaussian_seed(grid: &Grid2D, width: f64, mass: f64) -> Result<Vec<f64>> {
    if !(width > 0.0 && width.is_finite() && mass > 0.0) {
        return Err(Error::DegenerateSeed(format!("width {width}, mass {mass}")));
    }
    let nx = grid.nx();
    let mut q: Vec<f64> = (0..grid.len())
        .map(|k| {
            let (x, y) = (grid.x(k % nx), grid.y(k / nx));
            (-(x * x + y * y) / (2.0 * width * width)).exp()
        })
        .collect();
    normalize_mass(&mut q, grid, mass)?;
    Ok(q)
}

pub(crate) fn mass_of(q: &[f64], grid: &Grid2D) -> f64 {
    q.iter().map(|v| v * v).sum::<f64>() * grid.cell_area()
}

pub(crate) fn normalize_mass(q: &mut [f64], grid: &Grid2D, mass: f64) -> Result<()> {
    let m = mass_of(q, grid);
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::DegenerateSeed("seed has zero or non-finite mass".into()));
    }
    let s = (mass / m).sqrt();
    q.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

/// Flip the sign if needed so the profile is positive at its peak.
pub(crate) fn canonical_sign(q: &mut [f64]) {
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for &v in q.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if -lo > hi {
        q.iter_mut().for_each(|v| *v = -*v);
    }
}

pub(crate) fn check_real(u: &ComplexField) -> Result<Vec<f64>> {
    if u.max_imag() > 1e-12 * u.max_abs().max(1e-300) {
        return Err(Error::Domain("ground-state profile must be real".into()));
    }
    Ok(u.re())
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    check_exponent(p)
}
