//! Locally optimal block preconditioned conjugate gradient (LOBPCG) for the
//! lowest eigenpairs of a symmetric operator given as a matrix-free action.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::par;

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||A x - lambda x||` for the unit vector `x`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub pairs: Vec<Eigenpair>,
    pub iterations: usize,
    pub converged: bool,
}

fn combine(basis: &[&Vec<f64>], coef: &DMatrix<f64>, col: usize, rows: std::ops::Range<usize>) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for r in rows {
        let c = coef[(r, col)];
        if c != 0.0 {
            for (o, v) in out.iter_mut().zip(basis[r].iter()) {
                *o += c * v;
            }
        }
    }
    out
}

/// Lowest `nev` eigenpairs of `a`, starting from the block `x0`
/// (`x0.len() >= nev`), with residual tolerance `tol` on unit vectors.
pub fn lobpcg(
    a: impl Fn(&[f64]) -> Vec<f64> + Sync + Send,
    precond: impl Fn(&[f64]) -> Vec<f64> + Sync + Send,
    x0: Vec<Vec<f64>>,
    nev: usize,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    let m = x0.len();
    if m < nev || nev == 0 {
        return Err(Error::Domain("LOBPCG needs at least nev starting vectors".into()));
    }
    let apply_all = |v: &[Vec<f64>]| par::map_range(v.len(), |i| a(&v[i]));
    let mut x = x0;
    let mut ax = apply_all(&x);
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut ap: Vec<Vec<f64>> = Vec::new();
    let mut w: Vec<Vec<f64>> = Vec::new();
    let mut aw: Vec<Vec<f64>> = Vec::new();
    let mut theta = vec![0.0; m];
    let mut res = vec![f64::INFINITY; m];
    for it in 0..=max_iter {
        // Rayleigh-Ritz on span[X, W, P]
        let mut s: Vec<&Vec<f64>> = x.iter().collect();
        s.extend(w.iter());
        s.extend(p.iter());
        let mut as_: Vec<&Vec<f64>> = ax.iter().collect();
        as_.extend(aw.iter());
        as_.extend(ap.iter());
        let k = s.len();
        let scale: Vec<f64> = s.iter().map(|v| 1.0 / norm(v).max(1e-300)).collect();
        let gram = DMatrix::from_fn(k, k, |i, j| dot(s[i], s[j]) * scale[i] * scale[j]);
        let amat = DMatrix::from_fn(k, k, |i, j| {
            0.5 * (dot(s[i], as_[j]) + dot(as_[i], s[j])) * scale[i] * scale[j]
        });
        let ge = SymmetricEigen::new(gram);
        let dmax = ge.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..k).filter(|&i| ge.eigenvalues[i] > 1e-12 * dmax).collect();
        let mut z = DMatrix::zeros(k, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let f = 1.0 / ge.eigenvalues[i].sqrt();
            for r in 0..k {
                z[(r, c)] = ge.eigenvectors[(r, i)] * f;
            }
        }
        let red = z.transpose() * &amat * &z;
        let red = 0.5 * (&red + red.transpose());
        let re = SymmetricEigen::new(red);
        let mut order: Vec<usize> = (0..re.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| re.eigenvalues[i].partial_cmp(&re.eigenvalues[j]).unwrap());
        if order.len() < m {
            return Err(Error::LinearSolver("LOBPCG basis collapsed".into()));
        }
        let mut coef = DMatrix::zeros(k, m);
        for (c, &i) in order.iter().take(m).enumerate() {
            let col = &z * re.eigenvectors.column(i);
            for r in 0..k {
                coef[(r, c)] = col[r] * scale[r];
            }
            theta[c] = re.eigenvalues[i];
        }
        let new_x: Vec<Vec<f64>> = par::map_range(m, |c| combine(&s, &coef, c, 0..k));
        let new_ax: Vec<Vec<f64>> = par::map_range(m, |c| combine(&as_, &coef, c, 0..k));
        let (new_p, new_ap) = if k > m {
            (
                par::map_range(m, |c| combine(&s, &coef, c, m..k)),
                par::map_range(m, |c| combine(&as_, &coef, c, m..k)),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        x = new_x;
        ax = new_ax;
        p = new_p;
        ap = new_ap;
        if it % 15 == 14 {
            ax = apply_all(&x);
        }
        let r: Vec<Vec<f64>> = (0..m)
            .map(|c| ax[c].iter().zip(&x[c]).map(|(u, v)| u - theta[c] * v).collect())
            .collect();
        for c in 0..m {
            res[c] = norm(&r[c]) / norm(&x[c]);
        }
        if res[..nev].iter().all(|&v| v <= tol) {
            let pairs = (0..nev)
                .map(|c| {
                    let nx = norm(&x[c]);
                    Eigenpair {
                        value: theta[c],
                        vector: x[c].iter().map(|v| v / nx).collect(),
                        residual: res[c],
                    }
                })
                .collect();
            return Ok(EigenResult { pairs, iterations: it, converged: true });
        }
        if it == max_iter {
            break;
        }
        w = par::map_range(m, |c| precond(&r[c]));
        aw = apply_all(&w);
    }
    let pairs = (0..nev)
        .map(|c| {
            let nx = norm(&x[c]);
            Eigenpair { value: theta[c], vector: x[c].iter().map(|v| v / nx).collect(), residual: res[c] }
        })
        .collect();
    Ok(EigenResult { pairs, iterations: max_iter, converged: false })
}
