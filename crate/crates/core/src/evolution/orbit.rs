use num_complex::Complex64 as C;

use crate::error::Result;
use crate::fft::Fft2;
use crate::field::ComplexField;
use crate::spectral::{h1_distance, Spectral};

/// Closest point `e^{i theta} Q(x - shift)` of the orbit of `Q` to `phi`.
#[derive(Clone, Copy, Debug)]
pub struct OrbitFit {
    pub distance: f64,
    pub theta: f64,
    pub shift: [f64; 2],
}

/// `inf_{theta, y} ||phi - e^{i theta} Q(. - y)||_{H^1}`.
///
/// For fixed `y` the best phase is the argument of the `H^1` overlap
/// `c(y) = <Q(. - y), phi>`, and the distance is decreasing in `|c(y)|`.
/// `c` is a trigonometric sum: its lattice values come from one inverse FFT,
/// then Newton ascent on `|c|^2` refines `y` off the lattice.
pub fn orbit_distance(phi: &ComplexField, q: &ComplexField) -> Result<OrbitFit> {
    let grid = phi.grid().clone();
    grid.ensure_same(q.grid())?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let sp = Spectral::new(&grid);
    let k2 = sp.k2_full();
    let (sq, sf) = (q.spectrum(), phi.spectrum());
    let norm = grid.cell_area() / grid.len() as f64;
    let a: Vec<C> = (0..grid.len()).map(|k| sq[k].conj() * sf[k] * (1.0 + k2[k]) * norm).collect();

    // c at lattice shifts, up to the 1/N of the inverse transform
    let mut corr = a.clone();
    Fft2::get(nx, ny).inverse(&mut corr);
    let best = (0..corr.len()).max_by(|&i, &j| corr[i].norm_sqr().partial_cmp(&corr[j].norm_sqr()).unwrap()).unwrap();
    let wrap = |i: usize, m: usize, h: f64| if i < m / 2 { i as f64 * h } else { (i as f64 - m as f64) * h };
    let mut y = [wrap(best % nx, nx, grid.dx()), wrap(best / nx, ny, grid.dy())];

    let (kx, ky) = (grid.kx(), grid.ky());
    let wave = |k: usize| {
        let (i, j) = (k % nx, k / nx);
        [if i == nx / 2 { 0.0 } else { kx[i] }, if j == ny / 2 { 0.0 } else { ky[j] }]
    };
    for _ in 0..8 {
        let mut c = C::new(0.0, 0.0);
        let mut g = [C::new(0.0, 0.0); 2];
        let mut h = [[C::new(0.0, 0.0); 2]; 2];
        for (k, ak) in a.iter().enumerate() {
            let w = wave(k);
            let e = ak * C::from_polar(1.0, w[0] * y[0] + w[1] * y[1]);
            c += e;
            for r in 0..2 {
                g[r] += C::new(0.0, w[r]) * e;
                for s in 0..2 {
                    h[r][s] -= w[r] * w[s] * e;
                }
            }
        }
        // f = |c|^2
        let grad = [2.0 * (c.conj() * g[0]).re, 2.0 * (c.conj() * g[1]).re];
        let mut hess = [[0.0; 2]; 2];
        for r in 0..2 {
            for s in 0..2 {
                hess[r][s] = 2.0 * (g[r].conj() * g[s] + c.conj() * h[r][s]).re;
            }
        }
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        if !(det > 0.0 && hess[0][0] < 0.0) {
            break;
        }
        let step = [
            -(hess[1][1] * grad[0] - hess[0][1] * grad[1]) / det,
            -(-hess[1][0] * grad[0] + hess[0][0] * grad[1]) / det,
        ];
        if step[0].abs() > grid.dx() || step[1].abs() > grid.dy() {
            break;
        }
        y = [y[0] + step[0], y[1] + step[1]];
        if step[0].hypot(step[1]) < 1e-12 * grid.dx() {
            break;
        }
    }
    let c: C = a.iter().enumerate().map(|(k, ak)| {
        let w = wave(k);
        ak * C::from_polar(1.0, w[0] * y[0] + w[1] * y[1])
    }).sum();
    let theta = c.arg();
    let fit = q.translate(y).scale_complex(C::from_polar(1.0, theta));
    Ok(OrbitFit { distance: h1_distance(phi, &fit)?, theta, shift: y })
}
