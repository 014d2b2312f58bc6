//! Two-dimensional transforms built from rustfft/realfft row transforms and
//! transposes. Plans are cached per size.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::par;

type C = Complex64;
type Cache<K, V> = Mutex<HashMap<K, Arc<V>>>;

fn plan_1d(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let mut p = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new())).lock().unwrap();
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

fn plan_real(n: usize) -> (Arc<dyn RealToComplex<f64>>, Arc<dyn ComplexToReal<f64>>) {
    static PLANNER: OnceLock<Mutex<RealFftPlanner<f64>>> = OnceLock::new();
    let mut p = PLANNER.get_or_init(|| Mutex::new(RealFftPlanner::new())).lock().unwrap();
    (p.plan_fft_forward(n), p.plan_fft_inverse(n))
}

fn rows(plan: &Arc<dyn Fft<f64>>, data: &mut [C], len: usize) {
    par::for_row_blocks(data, len, |_, block| {
        let mut scratch = vec![C::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(block, &mut scratch);
    });
}

/// `dst[c * rows + r] = src[r * cols + c]`.
fn transpose(src: &[C], dst: &mut [C], rows_n: usize, cols: usize) {
    const TILE: usize = 32;
    par::for_row_blocks(dst, rows_n, |c0, block| {
        let nc = block.len() / rows_n;
        for rt in (0..rows_n).step_by(TILE) {
            for c in 0..nc {
                let col = c0 + c;
                let out = &mut block[c * rows_n..(c + 1) * rows_n];
                for r in rt..(rt + TILE).min(rows_n) {
                    out[r] = src[r * cols + col];
                }
            }
        }
    });
}

/// Complex 2D FFT on an `nx * ny` array stored x fastest.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    /// Cached plan for the given size.
    pub fn get(nx: usize, ny: usize) -> Arc<Fft2> {
        static CACHE: OnceLock<Cache<(usize, usize), Fft2>> = OnceLock::new();
        let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
        cache
            .entry((nx, ny))
            .or_insert_with(|| {
                Arc::new(Fft2 {
                    nx,
                    ny,
                    fx: plan_1d(nx, false),
                    ix: plan_1d(nx, true),
                    fy: plan_1d(ny, false),
                    iy: plan_1d(ny, true),
                })
            })
            .clone()
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, data: &mut [C]) {
        self.run(data, &self.fx, &self.fy);
    }

    /// Inverse transform including the `1/(nx ny)` factor, in place.
    pub fn inverse(&self, data: &mut [C]) {
        self.run(data, &self.ix, &self.iy);
        let s = 1.0 / (self.nx * self.ny) as f64;
        par::for_each_mut(data, |_, v| *v *= s);
    }

    fn run(&self, data: &mut [C], px: &Arc<dyn Fft<f64>>, py: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.nx * self.ny);
        rows(px, data, self.nx);
        let mut buf = vec![C::new(0.0, 0.0); data.len()];
        transpose(data, &mut buf, self.ny, self.nx);
        rows(py, &mut buf, self.ny);
        transpose(&buf, data, self.nx, self.ny);
    }
}

/// Real-to-real convolution engine. Input and output live on an `nx * ny`
/// box; transforms run on a `px * py` array with the box in the corner, so
/// `px > nx` gives zero padding. Spectra are stored transposed:
/// `spec[i * py + j]` for `i < px/2+1`.
pub struct RealConv {
    nx: usize,
    ny: usize,
    px: usize,
    py: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl RealConv {
    pub fn get(nx: usize, ny: usize, px: usize, py: usize) -> Arc<RealConv> {
        static CACHE: OnceLock<Cache<[usize; 4], RealConv>> = OnceLock::new();
        assert!(px >= nx && py >= ny && px.is_multiple_of(2));
        let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
        cache
            .entry([nx, ny, px, py])
            .or_insert_with(|| {
                let (r2c, c2r) = plan_real(px);
                Arc::new(RealConv {
                    nx,
                    ny,
                    px,
                    py,
                    r2c,
                    c2r,
                    fy: plan_1d(py, false),
                    iy: plan_1d(py, true),
                })
            })
            .clone()
    }

    pub fn padded(&self) -> (usize, usize) {
        (self.px, self.py)
    }

    /// Number of stored spectral coefficients.
    pub fn spectrum_len(&self) -> usize {
        (self.px / 2 + 1) * self.py
    }

    /// Forward transform of a box field (zero padded).
    pub fn forward(&self, input: &[f64]) -> Vec<C> {
        assert_eq!(input.len(), self.nx * self.ny);
        let hx = self.px / 2 + 1;
        let mut half = vec![C::new(0.0, 0.0); hx * self.ny];
        par::for_row_blocks(&mut half, hx, |j0, block| {
            let mut row = self.r2c.make_input_vec();
            let mut scratch = self.r2c.make_scratch_vec();
            for (r, out) in block.chunks_mut(hx).enumerate() {
                let j = j0 + r;
                row[..self.nx].copy_from_slice(&input[j * self.nx..(j + 1) * self.nx]);
                row[self.nx..].iter_mut().for_each(|v| *v = 0.0);
                self.r2c.process_with_scratch(&mut row, out, &mut scratch).unwrap();
            }
        });
        let mut spec = vec![C::new(0.0, 0.0); hx * self.py];
        let (ny, py) = (self.ny, self.py);
        par::for_row_blocks(&mut spec, py, |i0, block| {
            for (r, col) in block.chunks_mut(py).enumerate() {
                let i = i0 + r;
                for j in 0..ny {
                    col[j] = half[j * hx + i];
                }
            }
        });
        rows(&self.fy, &mut spec, self.py);
        spec
    }

    /// Inverse transform, keeping the box part, scaled so that
    /// `inverse(forward(f)) == f`.
    pub fn inverse(&self, mut spec: Vec<C>, out: &mut [f64]) {
        assert_eq!(out.len(), self.nx * self.ny);
        assert_eq!(spec.len(), self.spectrum_len());
        rows(&self.iy, &mut spec, self.py);
        let hx = self.px / 2 + 1;
        let scale = 1.0 / (self.px * self.py) as f64;
        let (nx, py) = (self.nx, self.py);
        let spec = &spec;
        par::for_row_blocks(out, nx, |j0, block| {
            let mut row = self.c2r.make_input_vec();
            let mut real = self.c2r.make_output_vec();
            let mut scratch = self.c2r.make_scratch_vec();
            for (r, o) in block.chunks_mut(nx).enumerate() {
                let j = j0 + r;
                for i in 0..hx {
                    row[i] = spec[i * py + j];
                }
                row[0].im = 0.0;
                row[hx - 1].im = 0.0;
                self.c2r.process_with_scratch(&mut row, &mut real, &mut scratch).unwrap();
                for (d, s) in o.iter_mut().zip(&real[..nx]) {
                    *d = s * scale;
                }
            }
        });
    }

    /// `out = IFFT(symbol * FFT(input))` restricted to the box.
    pub fn apply(&self, input: &[f64], symbol: &[f64], out: &mut [f64]) {
        let mut spec = self.forward(input);
        par::for_each_mut(&mut spec, |i, v| *v *= symbol[i]);
        self.inverse(spec, out);
    }

    /// Like [`apply`](Self::apply) with a complex symbol.
    pub fn apply_complex(&self, input: &[f64], symbol: &[C], out: &mut [f64]) {
        let mut spec = self.forward(input);
        par::for_each_mut(&mut spec, |i, v| *v *= symbol[i]);
        self.inverse(spec, out);
    }

    /// Wavenumber pair for a stored coefficient, given padded lengths.
    pub fn wavenumber(&self, idx: usize, lpx: f64, lpy: f64) -> (f64, f64) {
        let i = idx / self.py;
        let j = idx % self.py;
        let kx = 2.0 * std::f64::consts::PI * i as f64 / lpx;
        let m = if j < self.py / 2 { j as f64 } else { j as f64 - self.py as f64 };
        (kx, 2.0 * std::f64::consts::PI * m / lpy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[C], nx: usize, ny: usize) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); nx * ny];
        for q in 0..ny {
            for p in 0..nx {
                let mut s = C::new(0.0, 0.0);
                for j in 0..ny {
                    for i in 0..nx {
                        let ph = -2.0 * std::f64::consts::PI
                            * ((p * i) as f64 / nx as f64 + (q * j) as f64 / ny as f64);
                        s += data[j * nx + i] * C::from_polar(1.0, ph);
                    }
                }
                out[q * nx + p] = s;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let (nx, ny) = (8, 4);
        let data: Vec<C> = (0..nx * ny)
            .map(|k| C::new((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos()))
            .collect();
        let mut fast = data.clone();
        Fft2::get(nx, ny).forward(&mut fast);
        let slow = naive_dft(&data, nx, ny);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        Fft2::get(nx, ny).inverse(&mut fast);
        for (a, b) in fast.iter().zip(&data) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn real_conv_roundtrip_and_padding() {
        let (nx, ny) = (16, 8);
        let data: Vec<f64> = (0..nx * ny).map(|k| (k as f64 * 0.71).sin()).collect();
        for (px, py) in [(16, 8), (40, 30)] {
            let conv = RealConv::get(nx, ny, px, py);
            let mut out = vec![0.0; nx * ny];
            conv.inverse(conv.forward(&data), &mut out);
            for (a, b) in out.iter().zip(&data) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn real_conv_matches_complex_fft() {
        let (nx, ny) = (16, 8);
        let data: Vec<f64> = (0..nx * ny).map(|k| (k as f64 * 0.29).cos()).collect();
        let mut full: Vec<C> = data.iter().map(|&v| C::new(v, 0.0)).collect();
        Fft2::get(nx, ny).forward(&mut full);
        let conv = RealConv::get(nx, ny, nx, ny);
        let spec = conv.forward(&data);
        for i in 0..=nx / 2 {
            for j in 0..ny {
                assert!((spec[i * ny + j] - full[j * nx + i]).norm() < 1e-12);
            }
        }
    }
}
