//! Small vector kernels and the Krylov/eigen solvers used on real fields.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a x`
pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += a * v;
    }
}

pub fn scaled(x: &[f64], a: f64) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovReport {
    pub iterations: usize,
    /// Preconditioned residual norm relative to that of the right-hand side.
    pub relative_residual: f64,
}

/// Preconditioned MINRES for a symmetric (possibly indefinite) operator `a`
/// with a symmetric positive definite preconditioner `m_inv`.
/// Starts from zero and stops when the preconditioned residual drops by `tol`.
pub fn minres(
    a: impl Fn(&[f64]) -> Vec<f64>,
    m_inv: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, KrylovReport)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut v_prev = vec![0.0; n];
    let mut v = b.to_vec();
    let mut z = m_inv(&v);
    let g2 = dot(&z, &v);
    if g2 < 0.0 {
        return Err(Error::LinearSolver("preconditioner is not positive definite".into()));
    }
    let mut gamma = g2.sqrt();
    if gamma == 0.0 {
        return Ok((x, KrylovReport { iterations: 0, relative_residual: 0.0 }));
    }
    let gamma1 = gamma;
    let mut gamma_prev = 1.0;
    let mut eta = gamma;
    let (mut s_prev, mut s) = (0.0, 0.0);
    let (mut c_prev, mut c) = (1.0, 1.0);
    let mut w_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    for it in 1..=max_iter {
        z.iter_mut().for_each(|e| *e /= gamma);
        let az = a(&z);
        let delta = dot(&az, &z);
        let mut v_next = az;
        axpy(&mut v_next, -delta / gamma, &v);
        axpy(&mut v_next, -gamma / gamma_prev, &v_prev);
        let z_next = m_inv(&v_next);
        let g2 = dot(&z_next, &v_next);
        if g2 < 0.0 {
            return Err(Error::LinearSolver("preconditioner is not positive definite".into()));
        }
        let gamma_next = g2.sqrt();
        let a0 = c * delta - c_prev * s * gamma;
        let a1 = a0.hypot(gamma_next);
        let a2 = s * delta + c_prev * c * gamma;
        let a3 = s_prev * gamma;
        if a1 == 0.0 {
            return Err(Error::LinearSolver("MINRES breakdown".into()));
        }
        let c_next = a0 / a1;
        let s_next = gamma_next / a1;
        let mut w_next = z.clone();
        axpy(&mut w_next, -a3, &w_prev);
        axpy(&mut w_next, -a2, &w);
        w_next.iter_mut().for_each(|e| *e /= a1);
        axpy(&mut x, c_next * eta, &w_next);
        eta *= -s_next;
        let rel = eta.abs() / gamma1;
        if rel <= tol || gamma_next == 0.0 {
            return Ok((x, KrylovReport { iterations: it, relative_residual: rel }));
        }
        v_prev = std::mem::replace(&mut v, v_next);
        z = z_next;
        w_prev = std::mem::replace(&mut w, w_next);
        gamma_prev = gamma;
        gamma = gamma_next;
        c_prev = c;
        c = c_next;
        s_prev = s;
        s = s_next;
    }
    Err(Error::NoConvergence {
        what: "MINRES",
        iterations: max_iter,
        residual: eta.abs() / gamma1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minres_solves_indefinite_diagonal() {
        let d: Vec<f64> = (0..50).map(|i| if i == 3 { -2.0 } else { 1.0 + i as f64 }).collect();
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let a = |x: &[f64]| x.iter().zip(&d).map(|(u, v)| u * v).collect::<Vec<_>>();
        let (x, rep) = minres(a, |x| x.to_vec(), &b, 1e-12, 200).unwrap();
        for i in 0..50 {
            assert!((x[i] * d[i] - b[i]).abs() < 1e-10);
        }
        assert!(rep.iterations <= 51);
        // with the exact inverse diagonal magnitude as preconditioner
        let (x, rep) = minres(a, |x| x.iter().zip(&d).map(|(u, v)| u / v.abs()).collect(), &b, 1e-12, 20).unwrap();
        assert!(rep.iterations <= 3);
        for i in 0..50 {
            assert!((x[i] * d[i] - b[i]).abs() < 1e-10);
        }
    }
}
