//! The nonlocal operators `E_j`, Fourier symbol `xi_1 xi_j / |xi|^2`.
//!
//! Two realizations are provided. [`NonlocalKind::Periodic`] applies the
//! symbol on the periodic grid with the zero mode set to zero.
//! [`NonlocalKind::Isolated`] approximates the whole-plane operator for fields
//! supported in the box: the density is zero padded and convolved with the
//! Fourier transform of the log kernel truncated at the box diagonal, so no
//! periodic images interact and the mean of the density is not discarded.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fft::RealConv;
use crate::field::ComplexField;
use crate::grid::Grid2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NonlocalKind {
    Periodic,
    Isolated,
}

impl std::str::FromStr for NonlocalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "isolated" => Ok(Self::Isolated),
            _ => Err(Error::Config(format!("unknown nonlocal operator '{s}'"))),
        }
    }
}

impl std::fmt::Display for NonlocalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::Isolated => "isolated",
        })
    }
}

/// Smallest even integer `>= n` with no prime factor above 5.
pub fn fft_friendly(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 && m.is_multiple_of(2) {
            return m;
        }
        m += 1;
    }
}

/// Fourier transform of `-(1/2 pi) log|x|` restricted to `|x| < r`.
pub fn truncated_log_kernel(k: f64, r: f64) -> f64 {
    if k == 0.0 {
        return 0.25 * r * r * (1.0 - 2.0 * r.ln());
    }
    let z = k * r;
    (1.0 - libm::j0(z)) / (k * k) - r * r.ln() * libm::j1(z) / k
}

/// `E_1` and `E_2` bound to one grid.
pub struct Nonlocal {
    grid: Grid2D,
    kind: NonlocalKind,
    conv: Arc<RealConv>,
    symbols: [Vec<f64>; 2],
}

impl Nonlocal {
    /// Cached operator for `grid`.
    pub fn get(grid: &Grid2D, kind: NonlocalKind) -> Arc<Nonlocal> {
        type Key = (usize, usize, u64, u64, NonlocalKind);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Nonlocal>>>> = OnceLock::new();
        let key = (grid.nx(), grid.ny(), grid.lx().to_bits(), grid.ly().to_bits(), kind);
        if let Some(op) = CACHE.get_or_init(Default::default).lock().unwrap().get(&key) {
            return op.clone();
        }
        let op = Arc::new(Self::build(grid, kind));
        let mut cache = CACHE.get().unwrap().lock().unwrap();
        if cache.len() > 64 {
            cache.clear();
        }
        cache.insert(key, op.clone());
        op
    }

    fn build(grid: &Grid2D, kind: NonlocalKind) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let (dx, dy) = (grid.dx(), grid.dy());
        let (px, py, radius) = match kind {
            NonlocalKind::Periodic => (nx, ny, 0.0),
            NonlocalKind::Isolated => {
                let r = grid.lx().hypot(grid.ly());
                let px = fft_friendly(((grid.lx() + r) / dx).ceil() as usize + 2);
                let py = fft_friendly(((grid.ly() + r) / dy).ceil() as usize + 2);
                (px, py, r)
            }
        };
        let conv = RealConv::get(nx, ny, px, py);
        let (lpx, lpy) = (px as f64 * dx, py as f64 * dy);
        let n = conv.spectrum_len();
        let mut s1 = vec![0.0; n];
        let mut s2 = vec![0.0; n];
        for idx in 0..n {
            let (i, j) = (idx / py, idx % py);
            let (kx, ky) = conv.wavenumber(idx, lpx, lpy);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let g = match kind {
                NonlocalKind::Periodic => 1.0 / k2,
                NonlocalKind::Isolated => truncated_log_kernel(k2.sqrt(), radius),
            };
            s1[idx] = kx * kx * g;
            if i != px / 2 && j != py / 2 {
                s2[idx] = kx * ky * g;
            }
        }
        Self { grid: grid.clone(), kind, conv, symbols: [s1, s2] }
    }

    pub fn kind(&self) -> NonlocalKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Transform size used for the convolution.
    pub fn padded(&self) -> (usize, usize) {
        self.conv.padded()
    }

    /// `E_j f` for a real field, `j` in {1, 2}.
    pub fn apply(&self, j: usize, f: &[f64]) -> Vec<f64> {
        assert!(j == 1 || j == 2);
        let mut out = vec![0.0; f.len()];
        self.conv.apply(f, &self.symbols[j - 1], &mut out);
        out
    }

    pub fn e1(&self, f: &[f64]) -> Vec<f64> {
        self.apply(1, f)
    }

    /// `int g E_1 f`.
    pub fn pairing(&self, f: &[f64], g: &[f64]) -> f64 {
        let e = self.e1(f);
        e.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area()
    }
}

fn real_part(f: &ComplexField) -> Result<Vec<f64>> {
    let scale = f.max_abs().max(1e-300);
    if f.max_imag() > 1e-12 * scale {
        return Err(Error::Domain(format!(
            "E_j needs a real field; max |Im f| = {:.3e}",
            f.max_imag()
        )));
    }
    Ok(f.re())
}

/// `E_j f` with the periodic symbol `k_1 k_j / |k|^2` (zero mode dropped).
pub fn apply_multiplier_ej(j: usize, f: &ComplexField) -> Result<ComplexField> {
    apply_ej(j, f, NonlocalKind::Periodic)
}

/// `E_j f` with the chosen realization.
pub fn apply_ej(j: usize, f: &ComplexField, kind: NonlocalKind) -> Result<ComplexField> {
    if j != 1 && j != 2 {
        return Err(Error::Domain(format!("E_j needs j in {{1, 2}}, got {j}")));
    }
    let re = real_part(f)?;
    ComplexField::from_real(f.grid(), &Nonlocal::get(f.grid(), kind).apply(j, &re))
}

/// Periodic `E_1 f` computed as `-partial_1^2 psi` with `-Delta psi = f`
/// (mean of `f` removed), each step a separate transform.
pub fn apply_e1_poisson(f: &ComplexField) -> Result<ComplexField> {
    let re = real_part(f)?;
    let sp = crate::spectral::Spectral::new(f.grid());
    let psi = sp.multiplier_real(&re, |kx, ky| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2
        }
    });
    let d11 = sp.multiplier_real(&psi, |kx, _| -kx * kx);
    ComplexField::from_real(f.grid(), &d11.iter().map(|v| -v).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friendly_sizes() {
        assert_eq!(fft_friendly(619), 640);
        assert_eq!(fft_friendly(700), 720);
        assert_eq!(fft_friendly(626), 640);
        assert_eq!(fft_friendly(7), 8);
    }

    #[test]
    fn kernel_small_k_limit() {
        let r = 30.0;
        let a = truncated_log_kernel(1e-6, r);
        let b = truncated_log_kernel(0.0, r);
        assert!((a - b).abs() < 1e-6 * b.abs());
    }
}
