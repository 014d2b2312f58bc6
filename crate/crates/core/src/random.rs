//! Seeded random smooth fields used by probes and test batteries.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::ComplexField;
use crate::grid::Grid2D;

type C = Complex64;

/// Parameters of a random band-limited field.
#[derive(Clone, Copy, Debug)]
pub struct SmoothNoise {
    /// Gaussian spectral envelope width in wavenumber.
    pub bandwidth: f64,
    /// Width of a Gaussian window in space, centered at `center`.
    pub window: Option<f64>,
    pub center: [f64; 2],
    pub complex: bool,
}

impl Default for SmoothNoise {
    fn default() -> Self {
        Self { bandwidth: 2.0, window: Some(3.0), center: [0.0, 0.0], complex: true }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random field with unit `L^2` norm.
pub fn smooth_field<R: Rng + ?Sized>(grid: &Grid2D, rng: &mut R, noise: &SmoothNoise) -> ComplexField {
    let nx = grid.nx();
    let spec: Vec<C> = (0..grid.len())
        .map(|k| {
            let k2 = grid.k2(k % nx, k / nx);
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            C::new(a, b) * (-0.5 * k2 / (noise.bandwidth * noise.bandwidth)).exp()
        })
        .collect();
    let mut u = ComplexField::from_spectrum(grid, spec);
    if !noise.complex {
        let re = u.re();
        u = ComplexField::from_real(grid, &re).unwrap();
    }
    if let Some(w) = noise.window {
        let c = noise.center;
        let win: Vec<f64> = (0..grid.len())
            .map(|k| {
                let (x, y) = (grid.x(k % nx) - c[0], grid.y(k / nx) - c[1]);
                (-(x * x + y * y) / (2.0 * w * w)).exp()
            })
            .collect();
        u = u.mul_real(&win);
    }
    let m = u.mass().sqrt();
    u.scale(1.0 / m)
}
