//! Density matrices, partial traces and vectorization.

use faer::{Col, Mat, MatRef};

use crate::error::{Error, Result};
use crate::model::HilbertSpec;
use crate::{linalg, Complex, Operator};

/// Hermitian, unit-trace operator on the spin⊗boson space.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    hilbert: HilbertSpec,
    rho: Operator,
}

impl DensityMatrix {
    /// Hermitizes and trace-normalizes `rho`.
    pub fn new(hilbert: HilbertSpec, rho: MatRef<'_, Complex>) -> Result<Self> {
        let d = hilbert.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
        }
        let mut rho = linalg::hermitize(rho);
        let tr = linalg::trace(rho.as_ref()).re;
        if !(tr.is_finite() && tr.abs() > 0.0) {
            return Err(Error::InvalidSpec(format!("density matrix trace {tr} cannot be normalized")));
        }
        for j in 0..d {
            for i in 0..d {
                rho[(i, j)] /= tr;
            }
        }
        Ok(Self { hilbert, rho })
    }

    /// Pure state `|ψ⟩⟨ψ|` for an arbitrary-norm nonzero vector.
    pub fn pure(hilbert: HilbertSpec, psi: &[Complex]) -> Result<Self> {
        let d = hilbert.dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
        }
        let rho = Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Self::new(hilbert, rho.as_ref())
    }

    /// Product basis state `|spin⟩ ⊗ |n⟩`.
    pub fn basis(hilbert: HilbertSpec, spin: usize, n: usize) -> Result<Self> {
        if spin > 1 || n >= hilbert.n_boson_levels {
            return Err(Error::InvalidSpec(format!("basis state ({spin}, {n}) out of range")));
        }
        let mut psi = vec![Complex::new(0.0, 0.0); hilbert.dim()];
        psi[hilbert.index(spin, n)] = Complex::new(1.0, 0.0);
        Self::pure(hilbert, &psi)
    }

    pub fn maximally_mixed(hilbert: HilbertSpec) -> Self {
        let rho = linalg::identity(hilbert.dim());
        Self::new(hilbert, rho.as_ref()).expect("identity has positive trace")
    }

    /// Reassembles a column-stacked vector.
    pub fn from_vec(hilbert: HilbertSpec, v: &Col<Complex>) -> Result<Self> {
        let d = hilbert.dim();
        if v.nrows() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: v.nrows() });
        }
        let rho = Mat::from_fn(d, d, |i, j| v[j * d + i]);
        Self::new(hilbert, rho.as_ref())
    }

    pub fn hilbert(&self) -> HilbertSpec {
        self.hilbert
    }

    pub fn matrix(&self) -> MatRef<'_, Complex> {
        self.rho.as_ref()
    }

    pub fn into_matrix(self) -> Operator {
        self.rho
    }

    /// Column-stacked vector: entry `(i, j)` lands at `j·d + i`.
    pub fn to_vec(&self) -> Col<Complex> {
        vectorize(self.rho.as_ref())
    }

    /// `Tr_b ρ` as a 2×2 matrix.
    pub fn spin_reduced(&self) -> Operator {
        partial_trace_boson(self.hilbert, self.rho.as_ref())
    }

    pub fn boson_reduced(&self) -> Operator {
        partial_trace_spin(self.hilbert, self.rho.as_ref())
    }

    pub fn expectation(&self, op: MatRef<'_, Complex>) -> Complex {
        linalg::trace_product(self.rho.as_ref(), op)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigvalsh(self.rho.as_ref())
    }

    /// Checks Hermiticity, unit trace and numerical positivity.
    pub fn check(&self, tol_herm: f64, tol_trace: f64, tol_neg: f64) -> Result<()> {
        let herm = linalg::hermiticity_defect(self.rho.as_ref());
        if herm > tol_herm {
            return Err(Error::InvalidSpec(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = linalg::trace(self.rho.as_ref());
        if (tr - Complex::new(1.0, 0.0)).norm() > tol_trace {
            return Err(Error::InvalidSpec(format!("density matrix trace {tr}")));
        }
        let min = self.eigenvalues()?.first().copied().unwrap_or(0.0);
        if min < -tol_neg {
            return Err(Error::InvalidSpec(format!("density matrix eigenvalue {min:.3e}")));
        }
        Ok(())
    }
}

pub fn vectorize(a: MatRef<'_, Complex>) -> Col<Complex> {
    let d = a.nrows();
    Col::from_fn(d * a.ncols(), |k| a[(k % d, k / d)])
}

pub fn partial_trace_boson(h: HilbertSpec, rho: MatRef<'_, Complex>) -> Operator {
    let nb = h.n_boson_levels;
    Mat::from_fn(2, 2, |a, b| (0..nb).map(|n| rho[(h.index(a, n), h.index(b, n))]).sum())
}

pub fn partial_trace_spin(h: HilbertSpec, rho: MatRef<'_, Complex>) -> Operator {
    let nb = h.n_boson_levels;
    Mat::from_fn(nb, nb, |m, n| (0..2).map(|s| rho[(h.index(s, m), h.index(s, n))]).sum())
}

/// Reduced spin state `Tr_b |ψ⟩⟨ψ|` of a normalized pure state.
pub fn spin_reduced_pure(h: HilbertSpec, psi: &[Complex]) -> [[Complex; 2]; 2] {
    let nb = h.n_boson_levels;
    let mut out = [[Complex::new(0.0, 0.0); 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..nb).map(|n| psi[h.index(a, n)] * psi[h.index(b, n)].conj()).sum();
        }
    }
    out
}
