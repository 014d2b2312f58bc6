use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::Grid2D;
use crate::par;

type C = Complex64;

/// Complex samples on a [`Grid2D`], x fastest.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Grid2D,
    values: Vec<C>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self { grid: grid.clone(), values: vec![C::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: &Grid2D, values: Vec<C>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_real(grid: &Grid2D, re: &[f64]) -> Result<Self> {
        Self::from_values(grid, re.iter().map(|&v| C::new(v, 0.0)).collect())
    }

    /// Sample `f(x, y)` at every node.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> C + Sync + Send) -> Self {
        let nx = grid.nx();
        let values = par::map_range(grid.len(), |k| f(grid.x(k % nx), grid.y(k / nx)));
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn values(&self) -> &[C] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [C] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<C> {
        self.values
    }

    /// Same samples attached to another grid with identical point counts.
    pub fn regrid(&self, grid: &Grid2D) -> Result<Self> {
        if grid.nx() != self.grid.nx() || grid.ny() != self.grid.ny() {
            return Err(Error::GridMismatch("point counts differ".into()));
        }
        Ok(Self { grid: grid.clone(), values: self.values.clone() })
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }
    /// `|u|^2` at each node.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest `|u|` on the outermost ring of nodes.
    pub fn boundary_max(&self) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut m: f64 = 0.0;
        for i in 0..nx {
            m = m.max(self.values[i].norm()).max(self.values[(ny - 1) * nx + i].norm());
        }
        for j in 0..ny {
            m = m.max(self.values[j * nx].norm()).max(self.values[j * nx + nx - 1].norm());
        }
        m
    }

    /// `int |u|^2`.
    pub fn mass(&self) -> f64 {
        par::sum_range(self.values.len(), |k| self.values[k].norm_sqr()) * self.grid.cell_area()
    }

    /// `int conj(self) other`.
    pub fn inner(&self, other: &ComplexField) -> C {
        let s: C = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.cell_area()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }
    pub fn scale_complex(&self, s: C) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }
    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: C, other: &ComplexField) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Self { grid: self.grid.clone(), values }
    }
    pub fn add(&self, other: &ComplexField) -> Self {
        self.axpy(C::new(1.0, 0.0), other)
    }
    pub fn sub(&self, other: &ComplexField) -> Self {
        self.axpy(C::new(-1.0, 0.0), other)
    }

    /// Pointwise product with a real function sampled on the grid.
    pub fn mul_real(&self, w: &[f64]) -> Self {
        let values = self.values.iter().zip(w).map(|(v, s)| v * s).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Cyclic shift by whole cells: result(x) = self(x - (di dx, dj dy)).
    pub fn shift_lattice(&self, di: isize, dj: isize) -> Self {
        let (nx, ny) = (self.grid.nx() as isize, self.grid.ny() as isize);
        let mut out = vec![C::new(0.0, 0.0); self.values.len()];
        for j in 0..ny {
            let sj = (j - dj).rem_euclid(ny);
            for i in 0..nx {
                let si = (i - di).rem_euclid(nx);
                out[(j * nx + i) as usize] = self.values[(sj * nx + si) as usize];
            }
        }
        Self { grid: self.grid.clone(), values: out }
    }

    /// Band-limited translation: result(x) = self(x - shift).
    pub fn translate(&self, shift: [f64; 2]) -> Self {
        let fft = Fft2::get(self.grid.nx(), self.grid.ny());
        let mut v = self.values.clone();
        fft.forward(&mut v);
        let (kx, ky, nx) = (self.grid.kx(), self.grid.ky(), self.grid.nx());
        let (hx, hy) = (self.grid.nx() / 2, self.grid.ny() / 2);
        par::for_each_mut(&mut v, |k, c| {
            let (i, j) = (k % nx, k / nx);
            let ph = -(if i == hx { 0.0 } else { kx[i] } * shift[0]
                + if j == hy { 0.0 } else { ky[j] } * shift[1]);
            *c *= C::from_polar(1.0, ph);
        });
        fft.inverse(&mut v);
        Self { grid: self.grid.clone(), values: v }
    }

    /// Multiply by `exp(i (v . x) / 2)`.
    pub fn boost(&self, v: [f64; 2]) -> Self {
        let nx = self.grid.nx();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let (x, y) = (self.grid.x(k % nx), self.grid.y(k / nx));
                c * C::from_polar(1.0, 0.5 * (v[0] * x + v[1] * y))
            })
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Unnormalized DFT of the samples.
    pub fn spectrum(&self) -> Vec<C> {
        let mut v = self.values.clone();
        Fft2::get(self.grid.nx(), self.grid.ny()).forward(&mut v);
        v
    }

    pub fn from_spectrum(grid: &Grid2D, mut spec: Vec<C>) -> Self {
        Fft2::get(grid.nx(), grid.ny()).inverse(&mut spec);
        Self { grid: grid.clone(), values: spec }
    }

    /// Index of the node with the largest modulus.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        let mut bv = -1.0;
        for (k, v) in self.values.iter().enumerate() {
            let n = v.norm_sqr();
            if n > bv {
                bv = n;
                best = k;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translate_matches_lattice_shift() {
        let g = Grid2D::square(32, 20.0).unwrap();
        let u = ComplexField::from_fn(&g, |x, y| { let g = (-(x * x + 2.0 * y * y) / 4.0).exp(); C::new(g, 0.3 * x * g) });
        let a = u.translate([3.0 * g.dx(), -2.0 * g.dy()]);
        let b = u.shift_lattice(3, -2);
        for (p, q) in a.values().iter().zip(b.values()) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn mass_of_gaussian() {
        let g = Grid2D::square(64, 30.0).unwrap();
        let u = ComplexField::from_fn(&g, |x, y| C::new((-(x * x + y * y) / 2.0).exp(), 0.0));
        assert!((u.mass() - std::f64::consts::PI).abs() < 1e-12);
    }
}
