//! Continuous-time Markov chains on energy eigenstates.
//!
//! Rate matrices use the column convention `w[m][n]` = rate from state `n`
//! into state `m`, with each column summing to zero.

use faer::Mat;

use crate::error::{Error, Result};
use crate::Scalar;

/// Rate matrix with off-diagonal entries `amp(m, n)` and diagonal fixed by
/// zero column sums.
pub fn rates_from_amplitudes<T: Scalar>(d: usize, amp: impl Fn(usize, usize) -> T) -> Vec<Vec<T>> {
    let mut w = vec![vec![T::zero(); d]; d];
    for n in 0..d {
        let mut out = T::zero();
        for m in 0..d {
            if m != n {
                let r = amp(m, n);
                w[m][n] = r;
                out = out + r;
            }
        }
        w[n][n] = -out;
    }
    w
}

/// Stationary distribution by Grassmann–Taksar–Heyman state reduction.
///
/// Only off-diagonal rates are read, so the result is free of the
/// cancellation that afflicts null-space solves when rates span many orders
/// of magnitude. Returns `None` if the chain is reducible.
pub fn gth_stationary<T: Scalar>(w: &[Vec<T>]) -> Option<Vec<T>> {
    let n = w.len();
    if n == 0 {
        return None;
    }
    // q[i][j]: rate i → j.
    let mut q: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| w[j][i]).collect()).collect();
    for k in (1..n).rev() {
        let mut s = T::zero();
        for j in 0..k {
            s = s + q[k][j];
        }
        if !(s > T::zero()) {
            return None;
        }
        for row in q.iter_mut().take(k) {
            row[k] = row[k] / s;
        }
        for i in 0..k {
            let qik = q[i][k];
            if qik == T::zero() {
                continue;
            }
            for j in 0..k {
                if i != j {
                    let qkj = q[k][j];
                    q[i][j] = q[i][j] + qik * qkj;
                }
            }
        }
    }
    let mut pi = vec![T::zero(); n];
    pi[0] = T::one();
    for k in 1..n {
        let mut acc = T::zero();
        for i in 0..k {
            acc = acc + pi[i] * q[i][k];
        }
        pi[k] = acc;
    }
    let total = pi.iter().fold(T::zero(), |a, &b| a + b);
    if !(total > T::zero()) || !total.is_finite() {
        return None;
    }
    Some(pi.into_iter().map(|p| p / total).collect())
}

/// Ratio of the two smallest singular values of the rate matrix, scaled so a
/// rank deficiency at rounding level yields a value of order one.
pub fn uniqueness_ratio(w: &[Vec<f64>]) -> Result<f64> {
    let n = w.len();
    if n < 2 {
        return Ok(f64::INFINITY);
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| w[i][j]);
    let sv = m
        .singular_values()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    // Descending order.
    let smallest = sv[n - 1];
    let second = sv[n - 2];
    let floor = f64::EPSILON * m.norm_l2();
    Ok(second / smallest.max(floor).max(f64::MIN_POSITIVE))
}

/// Stationary distribution normalized to the simplex, with a uniqueness check.
pub fn stationary_distribution(w: &[Vec<f64>], gap_threshold: f64) -> Result<Vec<f64>> {
    let ratio = uniqueness_ratio(w)?;
    if ratio < gap_threshold {
        return Err(Error::DegenerateNess { ratio, threshold: gap_threshold });
    }
    match gth_stationary(w) {
        Some(p) => Ok(p),
        None => null_vector_fallback(w),
    }
}

fn null_vector_fallback(w: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = w.len();
    let m = Mat::<f64>::from_fn(n, n, |i, j| w[i][j]);
    let svd = m.svd().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let v = svd.V();
    let mut p: Vec<f64> = (0..n).map(|i| v[(i, n - 1)]).collect();
    let sum: f64 = p.iter().sum();
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::NoConvergence("rate-matrix null vector has zero sum".into()));
    }
    for x in p.iter_mut() {
        *x /= sum;
    }
    if p.iter().any(|&x| x < -1e-12) {
        return Err(Error::NoConvergence("rate-matrix null vector is not a distribution".into()));
    }
    for x in p.iter_mut() {
        *x = x.max(0.0);
    }
    let sum: f64 = p.iter().sum();
    Ok(p.into_iter().map(|x| x / sum).collect())
}
