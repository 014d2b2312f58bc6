use num_complex::Complex64 as C;

use crate::error::Result;
use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::par;

use super::{refine_newton, GroundState, SolverSettings};

/// Trigonometric interpolation of `u` at the nodes of `target`, with zero
/// outside the source box. Nyquist modes are dropped.
pub fn interpolate(u: &ComplexField, target: &Grid2D) -> ComplexField {
    let src = u.grid();
    let (nxs, nys) = (src.nx(), src.ny());
    let mut spec = u.spectrum();
    let n = src.len() as f64;
    for (k, c) in spec.iter_mut().enumerate() {
        let (i, j) = (k % nxs, k / nxs);
        *c = if i == nxs / 2 || j == nys / 2 { C::new(0.0, 0.0) } else { *c / n };
    }
    let (x0, y0) = (src.x(0), src.y(0));
    let (hx, hy) = (0.5 * src.lx(), 0.5 * src.ly());
    let (nxt, nyt) = (target.nx(), target.ny());
    let (kx, ky) = (src.kx(), src.ky());
    // rows[b][it] = sum_a c[a, b] e^{i kx_a (x_t - x0)}
    let rows: Vec<Vec<C>> = par::map_range(nys, |b| {
        (0..nxt)
            .map(|it| {
                let x = target.x(it);
                if x.abs() > hx {
                    return C::new(0.0, 0.0);
                }
                (0..nxs).map(|a| spec[b * nxs + a] * C::from_polar(1.0, kx[a] * (x - x0))).sum()
            })
            .collect()
    });
    let values: Vec<Vec<C>> = par::map_range(nyt, |jt| {
        let y = target.y(jt);
        if y.abs() > hy {
            return vec![C::new(0.0, 0.0); nxt];
        }
        let ph: Vec<C> = (0..nys).map(|b| C::from_polar(1.0, ky[b] * (y - y0))).collect();
        (0..nxt).map(|it| (0..nys).map(|b| rows[b][it] * ph[b]).sum()).collect()
    });
    let values = values.into_iter().flatten().collect();
    ComplexField::from_values(target, values).expect("target length")
}

/// The ground state of `gs` re-solved on `target` by Newton, starting from
/// its interpolant.
pub fn transfer(gs: &GroundState, target: &Grid2D, settings: &SolverSettings) -> Result<GroundState> {
    let model = settings.model(target, gs.p)?;
    let start = interpolate(&gs.profile, target);
    let start = ComplexField::from_real(target, &start.re())?;
    refine_newton(&model, &start, gs.omega, settings)
}
