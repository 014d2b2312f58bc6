use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::ground_state::GroundState;
use crate::linalg::dot;
use crate::par;
use crate::random::{rng, smooth_field, SmoothNoise};

use super::Linearization;

#[derive(Clone, Debug)]
pub struct CoercivityReport {
    /// Smallest `(<L_+ a, a> + <L_- b, b>) / ||a + i b||_{H^1}^2` over the
    /// projected samples.
    pub min_quotient: f64,
    pub samples: usize,
    /// Quotient for `v = Q` without projection (negative direction).
    pub quotient_q: f64,
    /// Quotient for `v = partial_1 Q` without projection (kernel direction).
    pub quotient_dq: f64,
}

/// Remove from `v` its orthogonal projection onto `span(basis)`.
fn project_out(v: &mut [f64], basis: &[&[f64]]) {
    let n = basis.len();
    let g = DMatrix::from_fn(n, n, |i, j| dot(basis[i], basis[j]));
    let b = DVector::from_fn(n, |i, _| dot(basis[i], v));
    let c = g.cholesky().expect("projection basis is independent").solve(&b);
    for (i, e) in basis.iter().enumerate() {
        for (x, y) in v.iter_mut().zip(e.iter()) {
            *x -= c[i] * y;
        }
    }
}

/// Random smooth complex fields `a + i b` with `a` orthogonal to
/// `Q, partial_1 Q, partial_2 Q` and `b` orthogonal to `Q`, scored by the
/// second variation normalized in `H^1`.
pub fn coercivity_probe(gs: &GroundState, samples: usize, seed: u64) -> Result<CoercivityReport> {
    let lin = Linearization::new(gs)?;
    let grid = gs.grid().clone();
    let sp = lin.model().spectral();
    let q = lin.q().to_vec();
    let dq = lin.gradient_q();
    let h1 = |a: &[f64], b: &[f64]| {
        let da = grid.cell_area();
        (dot(a, a) + dot(b, b)) * da + sp.grad_sq_real(a) + sp.grad_sq_real(b)
    };
    let quotient = |a: &[f64], b: &[f64]| {
        (lin.form(&lin.l_plus(a), a) + lin.form(&lin.l_minus(b), b)) / h1(a, b)
    };
    let width = 2.0 / gs.omega.sqrt();
    let noise = SmoothNoise { bandwidth: gs.omega.sqrt().max(0.5), window: Some(width), complex: true, ..Default::default() };
    let mut r = rng(seed);
    let fields: Vec<_> = (0..samples).map(|_| smooth_field(&grid, &mut r, &noise)).collect();
    let values = par::map_range(samples, |s| {
        let mut a = fields[s].re();
        let mut b = fields[s].im();
        project_out(&mut a, &[&q, &dq[0], &dq[1]]);
        project_out(&mut b, &[&q]);
        quotient(&a, &b)
    });
    let zero = vec![0.0; q.len()];
    Ok(CoercivityReport {
        min_quotient: values.iter().cloned().fold(f64::INFINITY, f64::min),
        samples,
        quotient_q: quotient(&q, &zero),
        quotient_dq: quotient(&dq[0], &zero),
    })
}
