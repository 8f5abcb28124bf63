//! Lindblad generator with spin and boson decay, its steady state, time
//! propagation, and the secular population master equation.

use std::collections::HashMap;

use faer::{Col, Mat};

use crate::error::{Error, Result};
use crate::markov;
use crate::model::{Eigensystem, HilbertSpec, Primitives};
use crate::state::DensityMatrix;
use crate::{linalg, Complex, Operator};

/// Uniqueness threshold on the singular-value gap ratio of the generator.
pub const GAP_RATIO_THRESHOLD: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladSpec {
    pub r_s: f64,
    pub r_b: f64,
}

impl LindbladSpec {
    pub fn new(r_s: f64, r_b: f64) -> Result<Self> {
        let s = Self { r_s, r_b };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("r_s", self.r_s), ("r_b", self.r_b)] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be finite and nonnegative, got {r}")));
            }
        }
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        self.r_s.max(self.r_b)
    }

    /// Jump operators `√r_s σ₋` and `√r_b a`, in that order, with zero-rate
    /// channels dropped.
    pub fn jump_operators(&self, p: &Primitives) -> Vec<Operator> {
        let mut out = Vec::with_capacity(2);
        for (r, op) in [(self.r_s, &p.sigma_minus), (self.r_b, &p.a)] {
            if r > 0.0 {
                out.push(op * faer::Scale(Complex::new(r.sqrt(), 0.0)));
            }
        }
        out
    }
}

/// Basis a superoperator is expressed in.
#[derive(Clone, Debug)]
pub enum Basis {
    Product,
    /// Eigenbasis of the system Hamiltonian; columns of `vectors`.
    Energy { vectors: Operator },
}

/// Dense generator acting on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub hilbert: HilbertSpec,
    pub basis: Basis,
    pub matrix: Mat<Complex>,
    /// Frobenius norm of the dissipative part alone.
    pub dissipator_norm: f64,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Expresses a product-basis operator in this superoperator's basis.
    pub fn into_basis(&self, op: &Operator) -> Operator {
        match &self.basis {
            Basis::Product => op.clone(),
            Basis::Energy { vectors } => linalg::to_basis(op.as_ref(), vectors.as_ref()),
        }
    }

    pub fn out_of_basis(&self, op: &Operator) -> Operator {
        match &self.basis {
            Basis::Product => op.clone(),
            Basis::Energy { vectors } => linalg::from_basis(op.as_ref(), vectors.as_ref()),
        }
    }

    /// `L vec(ρ)` reshaped to a matrix, with ρ given in this basis.
    pub fn apply(&self, rho: &Operator) -> Operator {
        let d = self.hilbert.dim();
        let v = crate::state::vectorize(rho.as_ref());
        let w = &self.matrix * &v;
        Mat::from_fn(d, d, |i, j| w[j * d + i])
    }
}

/// Accumulates `J ρ J† − ½{J†J, ρ}` into a column-stacked generator.
fn add_dissipator(l: &mut Mat<Complex>, j: &Operator) -> f64 {
    let d = j.nrows();
    let k = j.adjoint() * j;
    let half = Complex::new(0.5, 0.0);
    let mut block = Mat::<Complex>::zeros(d * d, d * d);
    // vec(J ρ J†) = (conj(J) ⊗ J) vec(ρ): row (c·d + r), column (q·d + p)
    // carries J[r, p]·conj(J[c, q]).
    for c in 0..d {
        for q in 0..d {
            let jcq = j[(c, q)].conj();
            if jcq == Complex::new(0.0, 0.0) {
                continue;
            }
            for r in 0..d {
                for p in 0..d {
                    block[(c * d + r, q * d + p)] += j[(r, p)] * jcq;
                }
            }
        }
    }
    // −½ K ρ: row (c·d + r), column (c·d + p) carries K[r, p].
    // −½ ρ K: row (c·d + r), column (q·d + r) carries K[q, c].
    for c in 0..d {
        for r in 0..d {
            for p in 0..d {
                block[(c * d + r, c * d + p)] -= half * k[(r, p)];
                block[(c * d + r, p * d + r)] -= half * k[(p, c)];
            }
        }
    }
    let norm = block.norm_l2();
    *l += &block;
    norm
}

fn check_dim(hilbert: HilbertSpec, h: &Operator) -> Result<()> {
    let d = hilbert.dim();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: h.nrows() });
    }
    Ok(())
}

/// Liouvillian in the product basis.
pub fn build_liouvillian(
    h: &Operator,
    diss: &LindbladSpec,
    primitives: &Primitives,
) -> Result<Superoperator> {
    diss.validate()?;
    let d = primitives.identity.nrows();
    let hilbert = HilbertSpec::new(d / 2)?;
    check_dim(hilbert, h)?;
    let mi = Complex::new(0.0, -1.0);
    let mut l = Mat::<Complex>::zeros(d * d, d * d);
    // −i(I ⊗ H − Hᵀ ⊗ I).
    for c in 0..d {
        for r in 0..d {
            for p in 0..d {
                l[(c * d + r, c * d + p)] += mi * h[(r, p)];
                l[(c * d + r, p * d + r)] -= mi * h[(p, c)];
            }
        }
    }
    let mut sq = 0.0;
    for j in diss.jump_operators(primitives) {
        let n = add_dissipator(&mut l, &j);
        sq += n * n;
    }
    Ok(Superoperator { hilbert, basis: Basis::Product, matrix: l, dissipator_norm: sq.sqrt() })
}

/// Liouvillian in the energy eigenbasis, where the coherent part is exactly
/// diagonal.
pub fn build_liouvillian_energy(
    eig: &Eigensystem,
    diss: &LindbladSpec,
    primitives: &Primitives,
) -> Result<Superoperator> {
    diss.validate()?;
    let d = eig.dim();
    if primitives.identity.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: primitives.identity.nrows() });
    }
    let mut l = Mat::<Complex>::zeros(d * d, d * d);
    for c in 0..d {
        for r in 0..d {
            l[(c * d + r, c * d + r)] = Complex::new(0.0, -(eig.energies[r] - eig.energies[c]));
        }
    }
    let mut sq = 0.0;
    for j in diss.jump_operators(primitives) {
        let je = eig.to_eigenbasis(&j);
        let n = add_dissipator(&mut l, &je);
        sq += n * n;
    }
    Ok(Superoperator {
        hilbert: eig.hilbert,
        basis: Basis::Energy { vectors: eig.vectors.clone() },
        matrix: l,
        dissipator_norm: sq.sqrt(),
    })
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    /// Product-basis density matrix.
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖₂` before Hermitization.
    pub residual: f64,
    pub gap_ratio: f64,
}

/// Normalized null vector of the generator.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    let d = l.hilbert.dim();
    if l.dissipator_norm == 0.0 {
        return Err(Error::DegenerateNess { ratio: 1.0, threshold: GAP_RATIO_THRESHOLD });
    }
    let trace_row: Vec<(usize, Complex)> =
        (0..d).map(|i| (i * d + i, Complex::new(1.0, 0.0))).collect();
    let noise = f64::EPSILON * l.dissipator_norm;
    let sol = linalg::normalized_null_vector(
        l.matrix.as_ref(),
        &trace_row,
        0,
        noise,
        GAP_RATIO_THRESHOLD,
    )?;
    let bound = 1e-10 * l.matrix.norm_l2();
    if sol.residual > bound {
        return Err(Error::NoConvergence(format!(
            "steady-state residual {:.3e} exceeds {:.3e}",
            sol.residual, bound
        )));
    }
    let in_basis = Mat::from_fn(d, d, |i, j| sol.vector[j * d + i]);
    let rho = DensityMatrix::new(l.hilbert, l.out_of_basis(&in_basis).as_ref())?;
    Ok(SteadyState { rho, residual: sol.residual, gap_ratio: sol.gap_ratio })
}

/// Largest trace error of a propagated state before it is renormalized.
pub const TRACE_DRIFT_TOLERANCE: f64 = 1e-6;

/// States at each time of `t_grid`, starting from `rho0` at t = 0.
pub fn propagate(
    l: &Superoperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let d = l.hilbert.dim();
    if rho0.hilbert() != l.hilbert {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.hilbert().dim() });
    }
    check_time_grid(t_grid)?;
    let mut cache: HashMap<u64, Mat<Complex>> = HashMap::new();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut v: Col<Complex> =
        crate::state::vectorize(l.into_basis(&rho0.matrix().to_owned()).as_ref());
    let mut t_prev = 0.0;
    for &t in t_grid {
        let dt = t - t_prev;
        if dt > 0.0 {
            let step = match cache.get(&dt.to_bits()) {
                Some(s) => s,
                None => {
                    let a = &l.matrix * faer::Scale(Complex::new(dt, 0.0));
                    let e = linalg::expm(a.as_ref())?;
                    cache.entry(dt.to_bits()).or_insert(e)
                }
            };
            v = step * &v;
            t_prev = t;
        }
        if t == 0.0 {
            out.push(rho0.clone());
            continue;
        }
        let m = Mat::from_fn(d, d, |i, j| v[j * d + i]);
        let tr = linalg::trace(m.as_ref());
        if !(tr.re.is_finite()) || (tr - Complex::new(1.0, 0.0)).norm() > TRACE_DRIFT_TOLERANCE {
            return Err(Error::StepFailure(format!("trace drifted to {tr} at t = {t}")));
        }
        // Long steps square the exponential many times; remove the rounding drift.
        let m = m * faer::Scale(Complex::new(1.0, 0.0) / tr);
        let rho = DensityMatrix::new(l.hilbert, l.out_of_basis(&m).as_ref())?;
        // Continue from the Hermitized state.
        v = crate::state::vectorize(l.into_basis(&rho.matrix().to_owned()).as_ref());
        out.push(rho);
    }
    Ok(out)
}

pub(crate) fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for (k, &t) in t_grid.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) || (k > 0 && t <= prev) {
            return Err(Error::InvalidSpec(format!(
                "time grid must be nonnegative and strictly increasing (entry {k} = {t})"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// Population rate matrix over energy eigenstates.
#[derive(Clone, Debug)]
pub struct SecularRates {
    /// `rates[m][n]`: rate from eigenstate n into m; columns sum to zero.
    pub rates: Vec<Vec<f64>>,
    /// Per-channel contributions in the order of
    /// [`LindbladSpec::jump_operators`].
    pub channels: Vec<Vec<Vec<f64>>>,
    /// `coherence_decay[m][n] = (W_mm + W_nn)/2 − ½ Σ_y |⟨m|L_y|m⟩ − ⟨n|L_y|n⟩|²`,
    /// nonpositive.
    pub coherence_decay: Vec<Vec<f64>>,
}

/// `W_mn = Σ_y |⟨m|L_y|n⟩|²` off the diagonal, with the diagonal fixed by
/// probability conservation.
pub fn build_secular_rates(
    eig: &Eigensystem,
    diss: &LindbladSpec,
    primitives: &Primitives,
) -> Result<SecularRates> {
    diss.validate()?;
    let d = eig.dim();
    let mut channels = Vec::new();
    let mut diagonals = Vec::new();
    for j in diss.jump_operators(primitives) {
        let je = eig.to_eigenbasis(&j);
        let w = markov::rates_from_amplitudes(d, |m, n| je[(m, n)].norm_sqr());
        channels.push(w);
        diagonals.push((0..d).map(|m| je[(m, m)]).collect::<Vec<Complex>>());
    }
    let mut rates = vec![vec![0.0; d]; d];
    for w in &channels {
        for m in 0..d {
            for n in 0..d {
                rates[m][n] += w[m][n];
            }
        }
    }
    let coherence_decay = (0..d)
        .map(|m| {
            (0..d)
                .map(|n| {
                    let dephasing: f64 = diagonals.iter().map(|l| (l[m] - l[n]).norm_sqr()).sum();
                    0.5 * (rates[m][m] + rates[n][n] - dephasing)
                })
                .collect()
        })
        .collect();
    Ok(SecularRates { rates, channels, coherence_decay })
}

/// Stationary distribution of a population rate matrix.
pub fn secular_steady_populations(w: &[Vec<f64>]) -> Result<Vec<f64>> {
    markov::stationary_distribution(w, GAP_RATIO_THRESHOLD)
}

/// Time evolution under the secular equations: populations follow `Ṗ = WP`
/// and each eigenbasis coherence rotates at its Bohr frequency while decaying
/// at `(W_mm + W_nn)/2`.
pub fn secular_propagate(
    eig: &Eigensystem,
    rates: &SecularRates,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let d = eig.dim();
    if rho0.hilbert() != eig.hilbert || rates.rates.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.hilbert().dim() });
    }
    check_time_grid(t_grid)?;
    let w = Mat::from_fn(d, d, |m, n| Complex::new(rates.rates[m][n], 0.0));
    let rho_e0 = eig.to_eigenbasis(&rho0.matrix().to_owned());
    let p0 = Col::from_fn(d, |m| rho_e0[(m, m)]);
    let mut cache: HashMap<u64, Mat<Complex>> = HashMap::new();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut p = p0;
    let mut t_prev = 0.0;
    for &t in t_grid {
        if t == 0.0 {
            out.push(rho0.clone());
            continue;
        }
        let dt = t - t_prev;
        let step = match cache.get(&dt.to_bits()) {
            Some(s) => s,
            None => {
                let e = linalg::expm((&w * faer::Scale(Complex::new(dt, 0.0))).as_ref())?;
                cache.entry(dt.to_bits()).or_insert(e)
            }
        };
        p = step * &p;
        t_prev = t;
        let rho_e = Mat::from_fn(d, d, |m, n| {
            if m == n {
                p[m]
            } else {
                let omega = eig.energies[m] - eig.energies[n];
                let decay = rates.coherence_decay[m][n];
                rho_e0[(m, n)] * Complex::new(decay * t, -omega * t).exp()
            }
        });
        let tr = linalg::trace(rho_e.as_ref());
        if !tr.re.is_finite() || (tr - Complex::new(1.0, 0.0)).norm() > TRACE_DRIFT_TOLERANCE {
            return Err(Error::StepFailure(format!("trace drifted to {tr} at t = {t}")));
        }
        let rho_e = rho_e * faer::Scale(Complex::new(1.0 / tr.re, 0.0));
        out.push(DensityMatrix::new(eig.hilbert, eig.from_eigenbasis(&rho_e).as_ref())?);
    }
    Ok(out)
}

/// Product-basis density matrix diagonal in the energy eigenbasis.
pub fn state_from_populations(eig: &Eigensystem, p: &[f64]) -> Result<DensityMatrix> {
    let d = eig.dim();
    if p.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: p.len() });
    }
    let u = &eig.vectors;
    let rho = Mat::from_fn(d, d, |i, j| {
        let mut acc = Complex::new(0.0, 0.0);
        for (k, &pk) in p.iter().enumerate() {
            if pk != 0.0 {
                acc += u[(i, k)] * u[(j, k)].conj() * pk;
            }
        }
        acc
    });
    DensityMatrix::new(eig.hilbert, rho.as_ref())
}
