//! Small dense solvers for symmetric positive definite systems.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Scalar};

/// Row-major lower Cholesky factor of a dense SPD matrix.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Fails with the first non-positive pivot.
    pub(crate) fn factor(a: &[T], n: usize) -> Result<Self> {
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let d = a[j * n + j] - ordered_sum((0..j).map(|k| l[j * n + k] * l[j * n + k]));
            if d.partial_cmp(&T::zero()) != Some(Ordering::Greater) {
                return Err(Error::NotPositiveDefinite {
                    pivot_index: j,
                    pivot_value: d.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in j + 1..n {
                let s = a[i * n + j] - ordered_sum((0..j).map(|k| l[i * n + k] * l[j * n + k]));
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub(crate) fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let s = b[i] - ordered_sum((0..i).map(|k| self.l[i * n + k] * y[k]));
            y[i] = s / self.l[i * n + i];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let s = y[i] - ordered_sum((i + 1..n).map(|k| self.l[k * n + i] * x[k]));
            x[i] = s / self.l[i * n + i];
        }
        x
    }
}

pub(crate) fn mat_vec<T: Scalar>(a: &[T], n: usize, x: &[T]) -> Vec<T> {
    (0..n)
        .map(|i| ordered_sum(a[i * n..(i + 1) * n].iter().zip(x).map(|(&p, &q)| p * q)))
        .collect()
}

fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    ordered_sum(x.iter().zip(y).map(|(&p, &q)| p * q))
}

/// Conjugate gradients from zero. Stops when `‖r‖ <= tol · ‖b‖`. On failure
/// the residual history is returned in the error.
pub(crate) fn conjugate_gradient<T: Scalar>(
    a: &[T],
    n: usize,
    b: &[T],
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, Vec<f64>)> {
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = tol * rr.sqrt();
    let mut history = vec![rr.sqrt().as_f64()];
    if rr.sqrt() <= target || rr == T::zero() {
        return Ok((x, history));
    }
    for _ in 0..max_iter {
        let ap = mat_vec(a, n, &p);
        let pap = dot(&p, &ap);
        if pap.partial_cmp(&T::zero()) != Some(Ordering::Greater) {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        history.push(rr_new.sqrt().as_f64());
        if rr_new.sqrt() <= target {
            return Ok((x, history));
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::NotConverged {
        iterations: history.len() - 1,
        residual_history: history,
    })
}
