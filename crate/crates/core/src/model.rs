//! The equation `i phi_t + Delta phi + |phi|^{p-1} phi + E_1(|phi|^2) phi = 0`
//! bound to a grid, and its conserved and variational functionals.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::nonlocal::{Nonlocal, NonlocalKind};
use crate::par;
use crate::spectral::Spectral;

type C = Complex64;

/// Values of the functionals at one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalReport {
    /// `M = int |u|^2`
    pub mass: f64,
    /// `int |grad u|^2`
    pub gradient: f64,
    /// `int |u|^{p+1}`
    pub power: f64,
    /// `int E_1(|u|^2) |u|^2`
    pub quartic: f64,
    /// `E = int |grad u|^2 - 2/(p+1) int |u|^{p+1} - 1/2 int E_1(|u|^2)|u|^2`
    pub energy: f64,
    /// `P = Im int conj(u) grad u`
    pub momentum: [f64; 2],
    /// `I = 2 int |grad u|^2 - 2(p-1)/(p+1) int |u|^{p+1} - int E_1(|u|^2)|u|^2`
    pub nehari: f64,
    /// `J = M int |grad u|^2 / int E_1(|u|^2)|u|^2`, absent when the quartic
    /// term is not positive.
    pub gn_ratio: Option<f64>,
    pub h1_norm_sq: f64,
}

/// Relative floor below which the quartic term counts as non-positive.
pub const QUARTIC_FLOOR: f64 = 1e-12;

#[derive(Clone)]
pub struct Model {
    grid: Grid2D,
    p: f64,
    nonlocal: Arc<Nonlocal>,
    spectral: Arc<Spectral>,
    dealias: bool,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("grid", &self.grid)
            .field("p", &self.p)
            .field("nonlocal", &self.nonlocal.kind())
            .field("dealias", &self.dealias)
            .finish()
    }
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("nonlinearity exponent p = {p} must exceed 1")))
    }
}

impl Model {
    pub fn new(grid: &Grid2D, p: f64, kind: NonlocalKind) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self {
            grid: grid.clone(),
            p,
            nonlocal: Nonlocal::get(grid, kind),
            spectral: Arc::new(Spectral::new(grid)),
            dealias: false,
        })
    }

    /// Evaluate products on a 3/2-padded grid before truncating back.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn kind(&self) -> NonlocalKind {
        self.nonlocal.kind()
    }
    pub fn dealias(&self) -> bool {
        self.dealias
    }
    pub fn nonlocal(&self) -> &Nonlocal {
        &self.nonlocal
    }
    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Same equation on another grid.
    pub fn on_grid(&self, grid: &Grid2D) -> Result<Self> {
        Ok(Self::new(grid, self.p, self.kind())?.with_dealias(self.dealias))
    }

    pub fn check_grid(&self, u: &ComplexField) -> Result<()> {
        self.grid.ensure_same(u.grid())
    }

    /// `|u|^{p-1} + E_1(|u|^2)`, so the nonlinear term is `potential * u`.
    pub fn potential(&self, u: &ComplexField) -> Vec<f64> {
        let p = self.p;
        let (rho, pw) = if self.dealias {
            (
                dealiased(u, |c| c.norm_sqr()),
                dealiased(u, |c| c.norm_sqr().powf(0.5 * (p - 1.0))),
            )
        } else {
            let rho = u.density();
            let pw = rho.iter().map(|r| r.powf(0.5 * (p - 1.0))).collect();
            (rho, pw)
        };
        let e = self.nonlocal.e1(&rho);
        pw.iter().zip(&e).map(|(a, b)| a + b).collect()
    }

    pub fn functionals(&self, u: &ComplexField) -> Result<FunctionalReport> {
        self.check_grid(u)?;
        let da = self.grid.cell_area();
        let spec = u.spectrum();
        let gradient = self.spectral.weighted_norm(&spec, |k2| k2);
        let mass = u.mass();
        let rho = u.density();
        let power = par::sum_range(rho.len(), |k| rho[k].powf(0.5 * (self.p + 1.0))) * da;
        let quartic = self.nonlocal.pairing(&rho, &rho);
        let quad = rho.iter().map(|r| r * r).sum::<f64>() * da;
        Ok(self.assemble(mass, gradient, power, quartic, quad, momentum(&self.grid, &spec)))
    }

    /// Functionals of a real profile `q`.
    pub fn functionals_real(&self, q: &[f64]) -> FunctionalReport {
        let da = self.grid.cell_area();
        let rho: Vec<f64> = q.iter().map(|v| v * v).collect();
        let mass = rho.iter().sum::<f64>() * da;
        let gradient = self.spectral.grad_sq_real(q);
        let power = rho.iter().map(|r| r.powf(0.5 * (self.p + 1.0))).sum::<f64>() * da;
        let quartic = self.nonlocal.pairing(&rho, &rho);
        let quad = rho.iter().map(|r| r * r).sum::<f64>() * da;
        self.assemble(mass, gradient, power, quartic, quad, [0.0, 0.0])
    }

    fn assemble(
        &self,
        mass: f64,
        gradient: f64,
        power: f64,
        quartic: f64,
        quad: f64,
        momentum: [f64; 2],
    ) -> FunctionalReport {
        let p = self.p;
        let energy = gradient - 2.0 / (p + 1.0) * power - 0.5 * quartic;
        let nehari = 2.0 * gradient - 2.0 * (p - 1.0) / (p + 1.0) * power - quartic;
        let gn_ratio = (quartic > QUARTIC_FLOOR * quad && quad > 0.0).then(|| mass * gradient / quartic);
        FunctionalReport {
            mass,
            gradient,
            power,
            quartic,
            energy,
            momentum,
            nehari,
            gn_ratio,
            h1_norm_sq: mass + gradient,
        }
    }

    /// Frequency `(N + Q4 - G)/M` that makes a real profile a critical point
    /// of `E + omega M` along its own direction.
    pub fn lagrange_frequency(&self, q: &[f64]) -> f64 {
        let f = self.functionals_real(q);
        (f.power + f.quartic - f.gradient) / f.mass
    }
}

fn momentum(grid: &Grid2D, spec: &[C]) -> [f64; 2] {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (kx, ky) = (grid.kx(), grid.ky());
    let mut p = [0.0; 2];
    for (k, c) in spec.iter().enumerate() {
        let (i, j) = (k % nx, k / nx);
        let n = c.norm_sqr();
        if i != nx / 2 {
            p[0] += kx[i] * n;
        }
        if j != ny / 2 {
            p[1] += ky[j] * n;
        }
    }
    let s = grid.cell_area() / grid.len() as f64;
    [p[0] * s, p[1] * s]
}

/// Evaluate `f(u)` pointwise on a grid refined by 3/2 through spectral
/// interpolation, then keep the modes resolved on the original grid.
pub fn dealiased(u: &ComplexField, f: impl Fn(C) -> f64 + Sync + Send) -> Vec<f64> {
    let g = u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (mx, my) = (3 * nx / 2, 3 * ny / 2);
    let spec = u.spectrum();
    let mut fine = vec![C::new(0.0, 0.0); mx * my];
    let map = |k: usize, n: usize, m: usize| -> Option<usize> {
        if k < n / 2 {
            Some(k)
        } else if k > n / 2 {
            Some(m - (n - k))
        } else {
            None
        }
    };
    for j in 0..ny {
        let Some(fj) = map(j, ny, my) else { continue };
        for i in 0..nx {
            let Some(fi) = map(i, nx, mx) else { continue };
            fine[fj * mx + fi] = spec[j * nx + i];
        }
    }
    let big = Fft2::get(mx, my);
    big.inverse(&mut fine);
    let ratio = (mx * my) as f64 / (nx * ny) as f64;
    par::for_each_mut(&mut fine, |_, c| *c = C::new(f(*c * ratio), 0.0));
    big.forward(&mut fine);
    let mut coarse = vec![C::new(0.0, 0.0); nx * ny];
    for j in 0..ny {
        let Some(fj) = map(j, ny, my) else { continue };
        for i in 0..nx {
            let Some(fi) = map(i, nx, mx) else { continue };
            coarse[j * nx + i] = fine[fj * mx + fi] / ratio;
        }
    }
    Fft2::get(nx, ny).inverse(&mut coarse);
    coarse.iter().map(|c| c.re).collect()
}

/// `u_lambda(x) = lambda u(lambda x)`, realized on the grid with both sides
/// divided by `lambda`. Nodes map to nodes, so nothing is interpolated.
pub fn dilate(u: &ComplexField, lambda: f64) -> Result<ComplexField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("dilation factor {lambda} must be positive")));
    }
    let grid = u.grid().rescaled(1.0 / lambda)?;
    ComplexField::from_values(&grid, u.values().iter().map(|v| v * lambda).collect())
}

/// Both sides of `d/dlambda [E(u_lambda) + omega M(u_lambda)] = I(u_lambda) / lambda`.
#[derive(Clone, Copy, Debug)]
pub struct ScalingCheck {
    pub lambda: f64,
    /// Centred difference of `E + omega M` with step `h`.
    pub derivative: f64,
    /// `I(u_lambda) / lambda`
    pub rhs: f64,
    /// `|M(u_lambda) - M(u)| / M(u)`
    pub mass_change: f64,
}

impl ScalingCheck {
    pub fn mismatch(&self) -> f64 {
        (self.derivative - self.rhs).abs() / self.rhs.abs().max(self.derivative.abs()).max(1e-300)
    }
}

pub fn scaling_check(u: &ComplexField, p: f64, kind: NonlocalKind, omega: f64, lambda: f64, h: f64) -> Result<ScalingCheck> {
    if !(h > 0.0 && h < lambda) {
        return Err(Error::Domain(format!("difference step {h} must lie in (0, lambda)")));
    }
    let action = |l: f64| -> Result<FunctionalReport> { functionals(&dilate(u, l)?, p, kind) };
    let (hi, lo, mid) = (action(lambda + h)?, action(lambda - h)?, action(lambda)?);
    let base = u.mass();
    Ok(ScalingCheck {
        lambda,
        derivative: (hi.energy + omega * hi.mass - lo.energy - omega * lo.mass) / (2.0 * h),
        rhs: mid.nehari / lambda,
        mass_change: (mid.mass - base).abs() / base,
    })
}

/// Functionals of `u` with the given exponent and nonlocal realization.
pub fn functionals(u: &ComplexField, p: f64, kind: NonlocalKind) -> Result<FunctionalReport> {
    Model::new(u.grid(), p, kind)?.functionals(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dealiased_product_of_band_limited_field() {
        let g = Grid2D::square(32, 2.0 * std::f64::consts::PI).unwrap();
        // modes up to |k| = 5 < 32/3: the product is resolved exactly
        let u = ComplexField::from_fn(&g, |x, y| C::new((3.0 * x).cos(), (2.0 * y + x).sin()));
        let exact = u.density();
        let d = dealiased(&u, |c| c.norm_sqr());
        for (a, b) in exact.iter().zip(&d) {
            assert!((a - b).abs() < 1e-12);
        }
        // modes near the cutoff: the aliased part is removed
        let v = ComplexField::from_fn(&g, |x, _| C::new((14.0 * x).cos(), 0.0));
        let d = dealiased(&v, |c| c.norm_sqr());
        for (k, val) in d.iter().enumerate() {
            let _ = k;
            assert!((val - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn momentum_of_plane_wave() {
        let g = Grid2D::square(32, 2.0 * std::f64::consts::PI).unwrap();
        let u = ComplexField::from_fn(&g, |x, y| C::from_polar(2.0, 3.0 * x - y));
        let r = functionals(&u, 3.0, NonlocalKind::Periodic).unwrap();
        let m = 4.0 * g.area();
        assert!((r.mass - m).abs() < 1e-9);
        assert!((r.momentum[0] - 3.0 * m).abs() < 1e-9);
        assert!((r.momentum[1] + m).abs() < 1e-9);
    }
}
