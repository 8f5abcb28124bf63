//! Dense complex linear algebra shared by the model, master-equation and
//! analysis layers: Hermitian eigendecomposition, bordered null-space solves,
//! and the matrix exponential.

use faer::linalg::solvers::Solve;
use faer::prelude::*;
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::Complex;

const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
const ONE: Complex = Complex { re: 1.0, im: 0.0 };

pub fn identity(n: usize) -> Mat<Complex> {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn dagger(a: MatRef<'_, Complex>) -> Mat<Complex> {
    a.adjoint().to_owned()
}

pub fn commutator(a: MatRef<'_, Complex>, b: MatRef<'_, Complex>) -> Mat<Complex> {
    a * b - b * a
}

/// Largest elementwise modulus.
pub fn max_abs(a: MatRef<'_, Complex>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Largest elementwise modulus of `a - a†`.
pub fn hermiticity_defect(a: MatRef<'_, Complex>) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn hermitize(a: MatRef<'_, Complex>) -> Mat<Complex> {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn trace(a: MatRef<'_, Complex>) -> Complex {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: MatRef<'_, Complex>, b: MatRef<'_, Complex>) -> Complex {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Kronecker product with the first factor as the slow (outer) index.
pub fn kron(a: MatRef<'_, Complex>, b: MatRef<'_, Complex>) -> Mat<Complex> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `u† a u`.
pub fn to_basis(a: MatRef<'_, Complex>, u: MatRef<'_, Complex>) -> Mat<Complex> {
    u.adjoint() * (a * u)
}

/// `u a u†`.
pub fn from_basis(a: MatRef<'_, Complex>, u: MatRef<'_, Complex>) -> Mat<Complex> {
    u * (a * u.adjoint())
}

/// Eigenpairs of a Hermitian matrix, energies ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, phase-fixed so the largest-modulus component
    /// is real and positive.
    pub vectors: Mat<Complex>,
}

pub fn eigh(a: MatRef<'_, Complex>) -> Result<HermitianEigen> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let n = a.nrows();
    let values: Vec<f64> = (0..n).map(|i| evd.S()[i].re).collect();
    let mut vectors = evd.U().to_owned();
    for j in 0..n {
        fix_phase(vectors.as_mut().col_mut(j));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Diagonalizes `a` block by block over disjoint index sets that `a` does not
/// couple, merging the eigenpairs in ascending energy order. Returns the
/// eigensystem and, for each eigenpair, the index of the block it came from.
pub fn eigh_blocks(
    a: MatRef<'_, Complex>,
    blocks: &[Vec<usize>],
) -> Result<(HermitianEigen, Vec<usize>)> {
    let n = a.nrows();
    let mut pairs: Vec<(f64, usize, Vec<(usize, Complex)>)> = Vec::with_capacity(n);
    for (b, idx) in blocks.iter().enumerate() {
        let sub = Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
        let e = eigh(sub.as_ref())?;
        for k in 0..idx.len() {
            let v = (0..idx.len()).map(|i| (idx[i], e.vectors[(i, k)])).collect();
            pairs.push((e.values[k], b, v));
        }
    }
    if pairs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pairs.len() });
    }
    // Stable: exact ties keep block order.
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut vectors = Mat::<Complex>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let mut origin = Vec::with_capacity(n);
    for (k, (e, b, v)) in pairs.into_iter().enumerate() {
        values.push(e);
        origin.push(b);
        for (i, c) in v {
            vectors[(i, k)] = c;
        }
    }
    Ok((HermitianEigen { values, vectors }, origin))
}

fn fix_phase(mut v: faer::ColMut<'_, Complex>) {
    let mut best = 0usize;
    let mut best_abs = -1.0f64;
    for i in 0..v.nrows() {
        let a = v[i].norm();
        // Prefer the earliest index among near-ties so the choice is stable.
        if a > best_abs * (1.0 + 1e-10) {
            best_abs = a;
            best = i;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        for i in 0..v.nrows() {
            v[i] *= phase;
        }
        v[best] = Complex::new(v[best].re, 0.0);
    }
}

/// Hermitian eigenvalues only, ascending.
pub fn eigvalsh(a: MatRef<'_, Complex>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Result of a normalized null-vector solve.
#[derive(Clone, Debug)]
pub struct NullSolution {
    pub vector: Col<Complex>,
    /// `‖A x‖₂` for the normalized solution.
    pub residual: f64,
    /// Estimated ratio between the second-smallest and the smallest singular
    /// value of `A`.
    pub gap_ratio: f64,
}

/// Solves `A x = 0` subject to the linear normalization `Σ w_k x_k = 1`.
///
/// The normalization row replaces row `redundant_row` of `A`, which must be a
/// linear combination of the other rows (as is the case for any trace
/// preserving generator and its trace functional). The uniqueness estimate
/// compares the smallest singular value of the bordered matrix, obtained by
/// inverse iteration on its LU factors, against the larger of the null-space
/// residual and `noise_floor`.
pub fn normalized_null_vector(
    a: MatRef<'_, Complex>,
    normalization: &[(usize, Complex)],
    redundant_row: usize,
    noise_floor: f64,
    gap_threshold: f64,
) -> Result<NullSolution> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let mut m = a.to_owned();
    for j in 0..n {
        m[(redundant_row, j)] = ZERO;
    }
    for &(k, w) in normalization {
        m[(redundant_row, k)] = w;
    }
    let lu = m.partial_piv_lu();
    let mut rhs = Col::<Complex>::zeros(n);
    rhs[redundant_row] = ONE;
    let mut x = lu.solve(&rhs);

    let scale = m.norm_l2();
    let mut converged = false;
    for _ in 0..6 {
        let r = &rhs - &m * &x;
        let rn = r.norm_l2();
        if !rn.is_finite() {
            break;
        }
        if rn <= 8.0 * f64::EPSILON * scale * x.norm_l2().max(1.0) {
            converged = true;
            break;
        }
        let dx = lu.solve(&r);
        x += &dx;
    }
    if !converged {
        let r = (&rhs - &m * &x).norm_l2();
        // Refinement stalls at the rounding floor; accept anything near it.
        if !(r.is_finite() && r <= 1e3 * f64::EPSILON * scale * x.norm_l2().max(1.0)) {
            return Err(Error::NoConvergence(format!(
                "iterative refinement residual {r:.3e}"
            )));
        }
    }

    let residual = (a * &x).norm_l2();
    let xn = x.norm_l2();
    let smallest = (residual / xn).max(noise_floor).max(f64::MIN_POSITIVE);

    // Power iteration on (MᴴM)⁻¹.
    let mut v = Col::<Complex>::from_fn(n, |i| {
        Complex::new(1.0 + (i % 7) as f64 * 0.1, ((i % 5) as f64 - 2.0) * 0.05)
    });
    let vn = v.norm_l2();
    v *= Scale(Complex::new(vn.recip(), 0.0));
    let mut growth = 0.0;
    for _ in 0..12 {
        let w = lu.solve(&v);
        let z = lu.solve_adjoint(&w);
        let zn = z.norm_l2();
        if !zn.is_finite() || zn == 0.0 {
            break;
        }
        growth = zn;
        v = z * Scale(Complex::new(zn.recip(), 0.0));
    }
    let sigma_bordered = if growth > 0.0 { growth.sqrt().recip() } else { 0.0 };
    let gap_ratio = sigma_bordered / smallest;
    if gap_ratio < gap_threshold {
        return Err(Error::DegenerateNess { ratio: gap_ratio, threshold: gap_threshold });
    }
    Ok(NullSolution { vector: x, residual, gap_ratio })
}

/// 1-norm (maximum absolute column sum).
pub fn norm1(a: MatRef<'_, Complex>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by degree-13 Padé approximation with scaling and
/// squaring.
pub fn expm(a: MatRef<'_, Complex>) -> Result<Mat<Complex>> {
    let n = a.nrows();
    let norm = norm1(a);
    if !norm.is_finite() {
        return Err(Error::StepFailure("non-finite generator".into()));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let a = a * Scale(Complex::new(scale, 0.0));
    let b = PADE13;
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |x: f64| Scale(Complex::new(x, 0.0));
    let u_inner = &a6 * (&a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]))
        + &a6 * c(b[7])
        + &a4 * c(b[5])
        + &a2 * c(b[3])
        + &id * c(b[1]);
    let u = &a * &u_inner;
    let v = &a6 * (&a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]))
        + &a6 * c(b[6])
        + &a4 * c(b[4])
        + &a2 * c(b[2])
        + &id * c(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.norm_l2().is_finite() {
        return Err(Error::StepFailure("matrix exponential overflowed".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { c(-(i as f64) * 3.0, 1.0) } else { ZERO });
        let e = expm(a.as_ref()).unwrap();
        assert!((e[(0, 0)] - c(0.0, 1.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - c(-3.0, 1.0).exp()).norm() < 1e-14);

        let mut n = Mat::<Complex>::zeros(2, 2);
        n[(0, 1)] = c(50.0, 0.0);
        let e = expm(n.as_ref()).unwrap();
        assert!((e[(0, 1)] - c(50.0, 0.0)).norm() < 1e-10);
        assert!((e[(0, 0)] - ONE).norm() < 1e-12);
    }

    #[test]
    fn expm_rotation_large_norm() {
        let t = 1000.3;
        let mut a = Mat::<Complex>::zeros(2, 2);
        a[(0, 1)] = c(-t, 0.0);
        a[(1, 0)] = c(t, 0.0);
        let e = expm(a.as_ref()).unwrap();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-9);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-9);
    }

    #[test]
    fn eigh_blocks_matches_full() {
        let h = Mat::from_fn(4, 4, |i, j| {
            let same = (i % 2) == (j % 2);
            if !same {
                ZERO
            } else if i == j {
                c(i as f64 * 0.7 - 1.0, 0.0)
            } else {
                c(0.3, 0.0)
            }
        });
        let full = eigh(h.as_ref()).unwrap();
        let (blk, origin) = eigh_blocks(h.as_ref(), &[vec![0, 2], vec![1, 3]]).unwrap();
        for k in 0..4 {
            assert!((full.values[k] - blk.values[k]).abs() < 1e-13);
        }
        assert_eq!(origin.len(), 4);
    }

    #[test]
    fn null_vector_of_two_state_chain() {
        // dp/dt = A p for a two-state rate process 0 <-> 1.
        let (k01, k10) = (2.0, 0.5);
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(-k10, 0.0),
            (0, 1) => c(k01, 0.0),
            (1, 0) => c(k10, 0.0),
            _ => c(-k01, 0.0),
        });
        let sol = normalized_null_vector(a.as_ref(), &[(0, ONE), (1, ONE)], 0, 1e-15, 1e3).unwrap();
        assert!((sol.vector[0].re - 0.8).abs() < 1e-14);
        assert!((sol.vector[1].re - 0.2).abs() < 1e-14);
    }

    #[test]
    fn null_vector_rejects_two_dimensional_kernel() {
        let a = Mat::<Complex>::zeros(3, 3);
        let err = normalized_null_vector(a.as_ref(), &[(0, ONE), (1, ONE), (2, ONE)], 0, 1e-15, 1e3);
        assert!(err.is_err());
    }
}
