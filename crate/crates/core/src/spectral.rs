//! Fourier-side differential operators on a periodic grid.

use num_complex::Complex64;
use std::sync::Arc;

use crate::fft::{Fft2, RealConv};
use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::par;

type C = Complex64;

/// Cached wavenumber tables for one grid.
pub struct Spectral {
    grid: Grid2D,
    conv: Arc<RealConv>,
    fft: Arc<Fft2>,
    /// `|k|^2` in the transposed half layout of [`RealConv`].
    k2_half: Vec<f64>,
    /// `i kx`, `i ky` in the half layout, Nyquist entries zeroed.
    ik_half: [Vec<C>; 2],
    /// `(kx, ky)` in the half layout.
    k_half: Vec<(f64, f64)>,
    /// `|k|^2` in the full x-fastest layout.
    k2_full: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &Grid2D) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let conv = RealConv::get(nx, ny, nx, ny);
        let hx = nx / 2 + 1;
        let mut k2_half = vec![0.0; hx * ny];
        let mut ikx = vec![C::new(0.0, 0.0); hx * ny];
        let mut iky = vec![C::new(0.0, 0.0); hx * ny];
        let mut k_half = vec![(0.0, 0.0); hx * ny];
        for i in 0..hx {
            let kx = 2.0 * std::f64::consts::PI * i as f64 / grid.lx();
            for j in 0..ny {
                let ky = grid.ky()[j];
                let idx = i * ny + j;
                k2_half[idx] = kx * kx + ky * ky;
                k_half[idx] = (kx, ky);
                if i != nx / 2 {
                    ikx[idx] = C::new(0.0, kx);
                }
                if j != ny / 2 {
                    iky[idx] = C::new(0.0, ky);
                }
            }
        }
        let k2_full = (0..nx * ny).map(|k| grid.k2(k % nx, k / nx)).collect();
        Self {
            grid: grid.clone(),
            conv,
            fft: Fft2::get(nx, ny),
            k2_half,
            ik_half: [ikx, iky],
            k_half,
            k2_full,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub fn k2_full(&self) -> &[f64] {
        &self.k2_full
    }

    /// `Delta f` for a real field.
    pub fn laplacian_real(&self, f: &[f64]) -> Vec<f64> {
        let mut spec = self.conv.forward(f);
        par::for_each_mut(&mut spec, |i, v| *v *= -self.k2_half[i]);
        let mut out = vec![0.0; f.len()];
        self.conv.inverse(spec, &mut out);
        out
    }

    /// `(a - Delta)^{-1} f` for a real field, `a > 0`.
    pub fn solve_shifted_real(&self, a: f64, f: &[f64]) -> Vec<f64> {
        let mut spec = self.conv.forward(f);
        par::for_each_mut(&mut spec, |i, v| *v /= a + self.k2_half[i]);
        let mut out = vec![0.0; f.len()];
        self.conv.inverse(spec, &mut out);
        out
    }

    /// Apply an even real Fourier multiplier `m(kx, ky)` to a real field.
    pub fn multiplier_real(&self, f: &[f64], m: impl Fn(f64, f64) -> f64 + Sync + Send) -> Vec<f64> {
        let mut spec = self.conv.forward(f);
        par::for_each_mut(&mut spec, |i, v| {
            let (kx, ky) = self.k_half[i];
            *v *= m(kx, ky)
        });
        let mut out = vec![0.0; f.len()];
        self.conv.inverse(spec, &mut out);
        out
    }

    /// Partial derivative along `axis` (0 = x, 1 = y) of a real field.
    pub fn derivative_real(&self, axis: usize, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.conv.apply_complex(f, &self.ik_half[axis], &mut out);
        out
    }

    /// `int |grad f|^2` for a real field.
    pub fn grad_sq_real(&self, f: &[f64]) -> f64 {
        let spec = self.conv.forward(f);
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let s = par::sum_range(spec.len(), |idx| {
            let i = idx / ny;
            let w = if i == 0 || i == nx / 2 { 1.0 } else { 2.0 };
            w * self.k2_half[idx] * spec[idx].norm_sqr()
        });
        s * self.grid.cell_area() / (nx * ny) as f64
    }

    /// `sum |k|^2 |u_k|^2` scaled to `int |grad u|^2`.
    pub fn grad_sq(&self, u: &ComplexField) -> f64 {
        let spec = u.spectrum();
        self.weighted_norm(&spec, |k2| k2)
    }

    /// `int conj(a) (1 - Delta) b`.
    pub fn h1_inner(&self, a: &ComplexField, b: &ComplexField) -> C {
        let sa = a.spectrum();
        let sb = b.spectrum();
        let s: C = sa
            .iter()
            .zip(&sb)
            .zip(&self.k2_full)
            .map(|((x, y), k2)| x.conj() * y * (1.0 + k2))
            .sum();
        s * self.grid.cell_area() / self.grid.len() as f64
    }

    /// `sum w(|k|^2) |s_k|^2`, scaled by Parseval.
    pub fn weighted_norm(&self, spec: &[C], w: impl Fn(f64) -> f64 + Sync + Send) -> f64 {
        let s = par::sum_range(spec.len(), |k| w(self.k2_full[k]) * spec[k].norm_sqr());
        s * self.grid.cell_area() / self.grid.len() as f64
    }

    pub fn laplacian(&self, u: &ComplexField) -> ComplexField {
        let mut spec = u.spectrum();
        par::for_each_mut(&mut spec, |k, v| *v *= -self.k2_full[k]);
        ComplexField::from_spectrum(&self.grid, spec)
    }

    /// `(partial_x u, partial_y u)`, Nyquist modes dropped.
    pub fn gradient(&self, u: &ComplexField) -> [ComplexField; 2] {
        let spec = u.spectrum();
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let (kx, ky) = (self.grid.kx(), self.grid.ky());
        let mut gx = spec.clone();
        let mut gy = spec;
        par::for_each_mut(&mut gx, |k, v| {
            let i = k % nx;
            *v *= if i == nx / 2 { C::new(0.0, 0.0) } else { C::new(0.0, kx[i]) };
        });
        par::for_each_mut(&mut gy, |k, v| {
            let j = k / nx;
            *v *= if j == ny / 2 { C::new(0.0, 0.0) } else { C::new(0.0, ky[j]) };
        });
        [
            ComplexField::from_spectrum(&self.grid, gx),
            ComplexField::from_spectrum(&self.grid, gy),
        ]
    }
}

/// `||u||_{H^1}^2 = int |u|^2 + |grad u|^2`.
pub fn h1_norm_sq(u: &ComplexField) -> f64 {
    Spectral::new(u.grid()).weighted_norm(&u.spectrum(), |k2| 1.0 + k2)
}

pub fn h1_norm(u: &ComplexField) -> f64 {
    h1_norm_sq(u).sqrt()
}

/// `||a - b||_{H^1}`.
pub fn h1_distance(a: &ComplexField, b: &ComplexField) -> crate::Result<f64> {
    a.grid().ensure_same(b.grid())?;
    Ok(h1_norm(&a.sub(b)))
}
