//! Linear solvers for the lattice operators.
//!
//! The reduced (fundamental-domain) form of a reflection-invariant symmetric
//! operator is self-adjoint in the orbit-weighted inner product
//! `⟨x, y⟩_W = Σ w_i x_i y_i`, so the Krylov methods here take the weights
//! explicitly instead of symmetrizing the operator.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// General tridiagonal matrix: row `i` reads
/// `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`.
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut du = self.upper[..n.saturating_sub(1)].to_vec();
        let mut dl: Vec<f64> = (1..n).map(|i| self.lower[i]).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let scale = self
            .diag
            .iter()
            .chain(&self.lower)
            .chain(&self.upper)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let min_pivot = d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(min_pivot > scale * 1e-14) {
            return Err(Error::SingularJacobian(min_pivot));
        }
        Ok(TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

pub(crate) fn wdot(w: &[f64], x: &[f64], y: &[f64]) -> f64 {
    w.iter().zip(x).zip(y).map(|((w, a), b)| w * a * b).sum()
}

pub(crate) fn wnorm(w: &[f64], x: &[f64]) -> f64 {
    wdot(w, x, x).sqrt()
}

/// Outcome of a Krylov solve.
#[derive(Clone, Copy, Debug)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for an operator that is positive definite in the
/// weighted inner product. `x` holds the initial guess and receives the solution.
pub fn cg_weighted(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    weights: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let bnorm = wnorm(weights, b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = wdot(weights, &r, &r);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let res = rr.sqrt() / bnorm;
        if res <= rel_tol {
            return Ok(KrylovStats {
                iterations: it,
                relative_residual: res,
            });
        }
        apply(&p, &mut ap);
        let pap = wdot(weights, &p, &ap);
        if !(pap > 0.0) {
            return Err(Error::InvalidParameter(
                "operator is not positive definite in CG".into(),
            ));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = wdot(weights, &r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let res = rr.sqrt() / bnorm;
    if res <= rel_tol {
        Ok(KrylovStats {
            iterations: max_iter,
            relative_residual: res,
        })
    } else {
        Err(Error::NoConvergence {
            stage: "conjugate gradients",
            iterations: max_iter,
            residual: res,
        })
    }
}

/// MINRES for an operator that is self-adjoint (possibly indefinite) in the
/// weighted inner product. `x` holds the initial guess and receives the solution.
pub fn minres_weighted(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    weights: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let bnorm = wnorm(weights, b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut tmp = vec![0.0; n];
    apply(x, &mut tmp);
    let mut q: Vec<f64> = b.iter().zip(&tmp).map(|(b, a)| b - a).collect();
    let beta1 = wnorm(weights, &q);
    if beta1 / bnorm <= rel_tol {
        return Ok(KrylovStats {
            iterations: 0,
            relative_residual: beta1 / bnorm,
        });
    }
    q.iter_mut().for_each(|v| *v /= beta1);
    let mut q_prev = vec![0.0; n];
    let mut p_prev = vec![0.0; n];
    let mut p_prev2 = vec![0.0; n];
    let mut p = vec![0.0; n];
    let (mut c_prev, mut s_prev) = (1.0, 0.0);
    let (mut c_prev2, mut s_prev2) = (1.0, 0.0);
    let mut beta = 0.0;
    let mut eta = beta1;
    for k in 1..=max_iter {
        apply(&q, &mut tmp);
        let alpha = wdot(weights, &q, &tmp);
        for i in 0..n {
            tmp[i] -= alpha * q[i] + beta * q_prev[i];
        }
        let beta_next = wnorm(weights, &tmp);

        // Column k of the Lanczos tridiagonal is (beta, alpha, beta_next).
        let t_km2 = s_prev2 * beta;
        let t_km1_raw = c_prev2 * beta;
        let t_km1 = c_prev * t_km1_raw + s_prev * alpha;
        let t_kk_raw = -s_prev * t_km1_raw + c_prev * alpha;
        let rho = t_kk_raw.hypot(beta_next);
        if rho == 0.0 {
            return Err(Error::SingularJacobian(0.0));
        }
        let c = t_kk_raw / rho;
        let s = beta_next / rho;
        let xi = c * eta;
        eta = -s * eta;

        for i in 0..n {
            p[i] = (q[i] - t_km1 * p_prev[i] - t_km2 * p_prev2[i]) / rho;
            x[i] += xi * p[i];
        }
        std::mem::swap(&mut p_prev2, &mut p_prev);
        std::mem::swap(&mut p_prev, &mut p);

        let res = eta.abs() / bnorm;
        if res <= rel_tol {
            return Ok(KrylovStats {
                iterations: k,
                relative_residual: res,
            });
        }
        if beta_next == 0.0 {
            break;
        }
        std::mem::swap(&mut q_prev, &mut q);
        for i in 0..n {
            q[i] = tmp[i] / beta_next;
        }
        beta = beta_next;
        c_prev2 = c_prev;
        s_prev2 = s_prev;
        c_prev = c;
        s_prev = s;
    }
    // Recompute the true residual before giving up.
    apply(x, &mut tmp);
    let res = b
        .iter()
        .zip(&tmp)
        .map(|(b, a)| b - a)
        .collect::<Vec<_>>();
    let res = wnorm(weights, &res) / bnorm;
    if res <= rel_tol * 10.0 {
        Ok(KrylovStats {
            iterations: max_iter,
            relative_residual: res,
        })
    } else {
        Err(Error::NoConvergence {
            stage: "minres",
            iterations: max_iter,
            residual: res,
        })
    }
}

/// Extremal eigenvalues of a weighted-self-adjoint operator by plain Lanczos
/// (no reorthogonalization; extremal Ritz values are unaffected by ghosts).
/// Returns `(smallest, largest)` Ritz values.
pub fn lanczos_extremes(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    start: &[f64],
    weights: &[f64],
    steps: usize,
) -> (f64, f64) {
    let n = start.len();
    let mut q = start.to_vec();
    let nrm = wnorm(weights, &q);
    q.iter_mut().for_each(|v| *v /= nrm);
    let mut q_prev = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);
    let mut beta = 0.0;
    for _ in 0..steps.min(n) {
        apply(&q, &mut tmp);
        let alpha = wdot(weights, &q, &tmp);
        for i in 0..n {
            tmp[i] -= alpha * q[i] + beta * q_prev[i];
        }
        alphas.push(alpha);
        beta = wnorm(weights, &tmp);
        if beta <= 1e-14 * alpha.abs().max(1.0) {
            break;
        }
        betas.push(beta);
        std::mem::swap(&mut q_prev, &mut q);
        for i in 0..n {
            q[i] = tmp[i] / beta;
        }
    }
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t).eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}
