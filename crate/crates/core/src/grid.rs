use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Smallest accepted number of points per axis.
pub const MIN_POINTS: usize = 16;

/// Box half-widths measured in decay lengths `1/sqrt(omega)` used by
/// [`Grid2D::for_frequency`].
pub const DECAY_LENGTHS: f64 = 22.0;

/// Uniform periodic grid on `[-Lx/2, Lx/2) x [-Ly/2, Ly/2)`.
#[derive(Clone, Debug)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    kx: Arc<[f64]>,
    ky: Arc<[f64]>,
}

/// Angular wavenumbers in FFT ordering: `0, 1, .., n/2-1, -n/2, .., -1`
/// times `2 pi / L`.
pub fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    let dk = 2.0 * PI / l;
    (0..n)
        .map(|j| {
            let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            m * dk
        })
        .collect()
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (n, axis) in [(nx, "nx"), (ny, "ny")] {
            if n < MIN_POINTS || !n.is_power_of_two() {
                return Err(Error::Grid(format!(
                    "{axis} = {n} must be a power of two and at least {MIN_POINTS}"
                )));
            }
        }
        for (l, axis) in [(lx, "Lx"), (ly, "Ly")] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Grid(format!("{axis} = {l} must be positive and finite")));
            }
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            kx: wavenumbers(nx, lx).into(),
            ky: wavenumbers(ny, ly).into(),
        })
    }

    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    /// Square grid with side `max(40, 2 * DECAY_LENGTHS / sqrt(omega))`, so a
    /// ground state of frequency `omega` is negligible at the boundary.
    pub fn for_frequency(n: usize, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Domain(format!("omega = {omega} must be positive")));
        }
        Self::square(n, box_side(omega))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
    pub fn kx(&self) -> &[f64] {
        &self.kx
    }
    pub fn ky(&self) -> &[f64] {
        &self.ky
    }
    /// Largest resolved wavenumber on either axis.
    pub fn k_max(&self) -> f64 {
        (PI / self.dx()).min(PI / self.dy())
    }
    /// x coordinate of column `i`.
    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.lx + i as f64 * self.dx()
    }
    /// y coordinate of row `j`.
    pub fn y(&self, j: usize) -> f64 {
        -0.5 * self.ly + j as f64 * self.dy()
    }
    /// Flat index, x fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    /// `(i, j)` of a flat index.
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }
    pub fn k2(&self, i: usize, j: usize) -> f64 {
        self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j]
    }

    /// Same point counts with both sides multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.nx, self.ny, self.lx * factor, self.ly * factor)
    }

    /// Same box with `n` points per axis.
    pub fn with_points(&self, nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, self.lx, self.ly)
    }

    pub fn same_as(&self, other: &Grid2D) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.lx.to_bits() == other.lx.to_bits()
            && self.ly.to_bits() == other.ly.to_bits()
    }

    pub fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} on {}x{} vs {}x{} on {}x{}",
                self.nx, self.ny, self.lx, self.ly, other.nx, other.ny, other.lx, other.ly
            )))
        }
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Box side used for a ground state of frequency `omega`.
pub fn box_side(omega: f64) -> f64 {
    (2.0 * DECAY_LENGTHS / omega.sqrt()).max(40.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid2D::square(8, 1.0).is_err());
        assert!(Grid2D::square(48, 1.0).is_err());
        assert!(Grid2D::square(32, 0.0).is_err());
        assert!(Grid2D::square(32, f64::NAN).is_err());
        assert!(Grid2D::new(32, 64, 3.0, 6.0).is_ok());
    }

    #[test]
    fn fft_ordering() {
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let k = g.kx();
        assert_eq!(k[0], 0.0);
        assert_eq!(k[1], 1.0);
        assert_eq!(k[7], 7.0);
        assert_eq!(k[8], -8.0);
        assert_eq!(k[15], -1.0);
        for j in 1..8 {
            assert_eq!(k[16 - j], -k[j]);
        }
    }

    #[test]
    fn coordinates() {
        let g = Grid2D::new(16, 32, 4.0, 8.0).unwrap();
        assert_eq!(g.x(0), -2.0);
        assert_eq!(g.x(8), 0.0);
        assert_eq!(g.y(16), 0.0);
        assert_eq!(g.coords(g.index(3, 5)), (3, 5));
    }
}
