use crate::error::Result;
use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::model::Model;

use super::Propagator;

/// A weight `h(x_1)` with `h'` and `h'''`, sampled on the `x` nodes.
#[derive(Clone, Debug)]
pub struct Weight {
    pub h: Vec<f64>,
    pub d1: Vec<f64>,
    pub d3: Vec<f64>,
}

impl Weight {
    /// `f(x) = [h, h', h''']`.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64) -> [f64; 3]) -> Self {
        let vals: Vec<[f64; 3]> = (0..grid.nx()).map(|i| f(grid.x(i))).collect();
        Self {
            h: vals.iter().map(|v| v[0]).collect(),
            d1: vals.iter().map(|v| v[1]).collect(),
            d3: vals.iter().map(|v| v[2]).collect(),
        }
    }

    pub fn constant(grid: &Grid2D, c: f64) -> Self {
        Self::from_fn(grid, |_| [c, 0.0, 0.0])
    }
}

/// Both sides of the localized mass and momentum identities. Left sides
/// are `(1/2) d/dt` of `int |z|^2 h`, `Im int d_1 z conj(z) h` and
/// `Im int d_2 z conj(z) h` by centred differences over one step.
#[derive(Clone, Copy, Debug)]
pub struct VirialReport {
    pub mass_lhs: f64,
    /// `Im int d_1 z conj(z) h'`
    pub mass_rhs: f64,
    pub mom1_lhs: f64,
    /// Right side with a `+ (1/4) int |grad z_n|^2 h'` term. Kept for
    /// comparison; it does not balance the left side.
    pub mom1_rhs: f64,
    /// Right side with `(1/4) int ((d_1 z_n)^2 - (d_2 z_n)^2) h'` in place of
    /// the `|grad z_n|^2` term.
    pub mom1_rhs_derived: f64,
    pub mom2_lhs: f64,
    pub mom2_rhs: f64,
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(scale)
}

impl VirialReport {
    /// `|lhs - rhs| / max(|lhs|, |rhs|, floor)`.
    pub fn mass_mismatch(&self, floor: f64) -> f64 {
        rel(self.mass_lhs, self.mass_rhs, floor)
    }
    pub fn mom1_mismatch(&self, floor: f64) -> f64 {
        rel(self.mom1_lhs, self.mom1_rhs, floor)
    }
    pub fn mom1_derived_mismatch(&self, floor: f64) -> f64 {
        rel(self.mom1_lhs, self.mom1_rhs_derived, floor)
    }
    pub fn mom2_mismatch(&self, floor: f64) -> f64 {
        rel(self.mom2_lhs, self.mom2_rhs, floor)
    }
}

struct Weighted<'a> {
    model: &'a Model,
    w: &'a Weight,
}

impl Weighted<'_> {
    fn integrate(&self, f: impl Fn(usize) -> f64, weight: &[f64]) -> f64 {
        let nx = self.model.grid().nx();
        let n = self.model.grid().len();
        (0..n).map(|k| f(k) * weight[k % nx]).sum::<f64>() * self.model.grid().cell_area()
    }

    /// `(int |z|^2 h, Im int d_1 z conj z h, Im int d_2 z conj z h)`
    fn moments(&self, u: &ComplexField) -> [f64; 3] {
        let g = self.model.spectral().gradient(u);
        let v = u.values();
        let (g1, g2) = (g[0].values(), g[1].values());
        [
            self.integrate(|k| v[k].norm_sqr(), &self.w.h),
            self.integrate(|k| (g1[k] * v[k].conj()).im, &self.w.h),
            self.integrate(|k| (g2[k] * v[k].conj()).im, &self.w.h),
        ]
    }
}

/// Evaluate the localized identities at `u` with the step `dt` used for the
/// time differences.
pub fn virial_diagnostics(model: &Model, u: &ComplexField, weight: &Weight, dt: f64) -> Result<VirialReport> {
    model.check_grid(u)?;
    let wt = Weighted { model, w: weight };
    let mut fwd = u.clone();
    Propagator::new(model, dt)?.step(&mut fwd);
    let mut bwd = u.clone();
    Propagator::new(model, -dt)?.step(&mut bwd);
    let (a, b) = (wt.moments(&fwd), wt.moments(&bwd));
    let lhs: Vec<f64> = (0..3).map(|i| 0.25 * (a[i] - b[i]) / dt).collect();

    let p = model.p();
    let g = model.spectral().gradient(u);
    let v = u.values();
    let (g1, g2) = (g[0].values(), g[1].values());
    let rho = u.density();
    let e1 = model.nonlocal().apply(1, &rho);
    let e2 = model.nonlocal().apply(2, &rho);
    let (h1, h3) = (&weight.d1, &weight.d3);

    let mass_rhs = wt.integrate(|k| (g1[k] * v[k].conj()).im, h1);
    let common = wt.integrate(|k| g1[k].norm_sqr(), h1)
        - (p - 1.0) / (2.0 * (p + 1.0)) * wt.integrate(|k| rho[k].powf(0.5 * (p + 1.0)), h1)
        - 0.25 * wt.integrate(|k| rho[k], h3)
        - 0.5 * wt.integrate(|k| e1[k] * rho[k], h1);
    let mom1_rhs = common + 0.25 * wt.integrate(|k| e1[k] * e1[k] + e2[k] * e2[k], h1);
    let mom1_rhs_derived = common + 0.25 * wt.integrate(|k| e1[k] * e1[k] - e2[k] * e2[k], h1);
    let mom2_rhs = wt.integrate(|k| (g2[k] * g1[k].conj()).re, h1) + 0.5 * wt.integrate(|k| e1[k] * e2[k], h1)
        - 0.5 * wt.integrate(|k| e2[k] * rho[k], h1);
    Ok(VirialReport {
        mass_lhs: lhs[0],
        mass_rhs,
        mom1_lhs: lhs[1],
        mom1_rhs,
        mom1_rhs_derived,
        mom2_lhs: lhs[2],
        mom2_rhs,
    })
}
