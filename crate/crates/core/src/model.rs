//! Hilbert space, operator primitives and the Rabi family of Hamiltonians.
//!
//! Basis ordering is spin-major: index `spin * n_b + n` with spin up = 0 and
//! spin down = 1. Energies are in units of the oscillator frequency.

use faer::Mat;

use crate::error::{Error, Result};
use crate::{linalg, Complex, Operator};

pub const DEFAULT_BOSON_LEVELS: usize = 20;

pub const SPIN_UP: usize = 0;
pub const SPIN_DOWN: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    pub n_boson_levels: usize,
}

impl HilbertSpec {
    pub fn new(n_boson_levels: usize) -> Result<Self> {
        let h = Self { n_boson_levels };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_boson_levels < 2 {
            return Err(Error::InvalidSpec(format!(
                "n_boson_levels must be at least 2, got {}",
                self.n_boson_levels
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * self.n_boson_levels
    }

    #[inline]
    pub fn index(&self, spin: usize, n: usize) -> usize {
        spin * self.n_boson_levels + n
    }

    /// Inverse of [`HilbertSpec::index`]: `(spin, n)`.
    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.n_boson_levels, k % self.n_boson_levels)
    }
}

impl Default for HilbertSpec {
    fn default() -> Self {
        Self { n_boson_levels: DEFAULT_BOSON_LEVELS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Rabi,
    JaynesCummings,
    Interpolated,
    BrokenZ2Rabi,
    BrokenU1JC,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Rabi,
        Family::JaynesCummings,
        Family::Interpolated,
        Family::BrokenZ2Rabi,
        Family::BrokenU1JC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Rabi => "rabi",
            Family::JaynesCummings => "jaynes_cummings",
            Family::Interpolated => "interpolated",
            Family::BrokenZ2Rabi => "broken_z2_rabi",
            Family::BrokenU1JC => "broken_u1_jc",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Whether the Hamiltonian commutes with the parity operator for every
    /// parameter value.
    pub fn has_parity(self) -> bool {
        !matches!(self, Family::BrokenZ2Rabi | Family::BrokenU1JC)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub delta_tilde: f64,
    pub lambda_tilde: f64,
    /// Counter-rotating weight; read only by [`Family::Interpolated`].
    pub s: f64,
    /// Symmetry-breaking field; read only by the broken families.
    pub epsilon_tilde: f64,
    pub hilbert: HilbertSpec,
}

impl ModelSpec {
    pub fn rabi(delta_tilde: f64, lambda_tilde: f64) -> Self {
        Self {
            family: Family::Rabi,
            delta_tilde,
            lambda_tilde,
            s: 1.0,
            epsilon_tilde: 0.0,
            hilbert: HilbertSpec::default(),
        }
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn with_epsilon(mut self, epsilon_tilde: f64) -> Self {
        self.epsilon_tilde = epsilon_tilde;
        self
    }

    pub fn with_boson_levels(mut self, n: usize) -> Self {
        self.hilbert = HilbertSpec { n_boson_levels: n };
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.hilbert.validate()?;
        let finite = [self.delta_tilde, self.lambda_tilde, self.s, self.epsilon_tilde];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("model parameters must be finite".into()));
        }
        if self.delta_tilde < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "delta_tilde must be nonnegative, got {}",
                self.delta_tilde
            )));
        }
        if self.lambda_tilde < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "lambda_tilde must be nonnegative, got {}",
                self.lambda_tilde
            )));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::InvalidSpec(format!("s must lie in [0, 1], got {}", self.s)));
        }
        Ok(())
    }

    /// Effective counter-rotating weight.
    fn counter_rotating(&self) -> f64 {
        match self.family {
            Family::Rabi | Family::BrokenZ2Rabi => 1.0,
            Family::JaynesCummings | Family::BrokenU1JC => 0.0,
            Family::Interpolated => self.s,
        }
    }

    fn field(&self) -> f64 {
        match self.family {
            Family::BrokenZ2Rabi | Family::BrokenU1JC => self.epsilon_tilde,
            _ => 0.0,
        }
    }

    /// Whether the total excitation number is conserved.
    pub fn conserves_excitations(&self) -> bool {
        self.family == Family::JaynesCummings
            || (self.family == Family::Interpolated && self.s == 0.0)
            || self.lambda_tilde == 0.0 && self.field() == 0.0
    }

    /// Index sets of the symmetry sectors the Hamiltonian leaves invariant,
    /// with their labels.
    pub fn symmetry_sectors(&self) -> Vec<(Sector, Vec<usize>)> {
        let h = self.hilbert;
        let nb = h.n_boson_levels;
        if self.family == Family::JaynesCummings
            || (self.family == Family::Interpolated && self.s == 0.0)
        {
            let mut out: Vec<(Sector, Vec<usize>)> = Vec::new();
            for nex in 0..=nb {
                let mut idx = Vec::new();
                if nex < nb {
                    idx.push(h.index(SPIN_DOWN, nex));
                }
                if nex >= 1 {
                    idx.push(h.index(SPIN_UP, nex - 1));
                }
                idx.sort_unstable();
                out.push((Sector::Excitation(nex), idx));
            }
            out
        } else if self.family.has_parity() {
            [1i8, -1]
                .into_iter()
                .map(|p| {
                    let idx = (0..h.dim()).filter(|&k| parity_of(h, k) == p).collect();
                    (Sector::Parity(p), idx)
                })
                .collect()
        } else {
            vec![(Sector::Unlabeled, (0..h.dim()).collect())]
        }
    }
}

/// Hamiltonian parameter that can be varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelAxis {
    DeltaTilde,
    LambdaTilde,
    S,
    EpsilonTilde,
}

impl ModelAxis {
    pub fn name(self) -> &'static str {
        match self {
            ModelAxis::DeltaTilde => "delta_tilde",
            ModelAxis::LambdaTilde => "lambda_tilde",
            ModelAxis::S => "s",
            ModelAxis::EpsilonTilde => "epsilon_tilde",
        }
    }

    pub fn get(self, m: &ModelSpec) -> f64 {
        match self {
            ModelAxis::DeltaTilde => m.delta_tilde,
            ModelAxis::LambdaTilde => m.lambda_tilde,
            ModelAxis::S => m.s,
            ModelAxis::EpsilonTilde => m.epsilon_tilde,
        }
    }

    pub fn set(self, m: &ModelSpec, value: f64) -> ModelSpec {
        let mut out = *m;
        match self {
            ModelAxis::DeltaTilde => out.delta_tilde = value,
            ModelAxis::LambdaTilde => out.lambda_tilde = value,
            ModelAxis::S => out.s = value,
            ModelAxis::EpsilonTilde => out.epsilon_tilde = value,
        }
        out
    }
}

/// Symmetry label of an eigenstate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Parity(i8),
    /// Total excitation number `a†a + |↑⟩⟨↑|`.
    Excitation(usize),
    Unlabeled,
}

impl Sector {
    pub fn parity(self) -> Option<i8> {
        match self {
            Sector::Parity(p) => Some(p),
            Sector::Excitation(n) => Some(if n % 2 == 0 { -1 } else { 1 }),
            Sector::Unlabeled => None,
        }
    }
}

fn parity_of(h: HilbertSpec, k: usize) -> i8 {
    let (spin, n) = h.split(k);
    let sz = if spin == SPIN_UP { 1 } else { -1 };
    if n % 2 == 0 {
        sz
    } else {
        -sz
    }
}

#[derive(Clone, Debug)]
pub struct Primitives {
    pub sigma_x: Operator,
    pub sigma_y: Operator,
    pub sigma_z: Operator,
    pub sigma_minus: Operator,
    pub sigma_plus: Operator,
    pub a: Operator,
    pub a_dagger: Operator,
    pub identity: Operator,
}

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

fn spin_matrix(entries: [[Complex; 2]; 2]) -> Operator {
    Mat::from_fn(2, 2, |i, j| entries[i][j])
}

pub fn build_primitives(h: HilbertSpec) -> Result<Primitives> {
    h.validate()?;
    let nb = h.n_boson_levels;
    let z = c(0.0);
    let i_s = linalg::identity(2);
    let i_b = linalg::identity(nb);
    let ann = Mat::from_fn(nb, nb, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { z });
    let cre = ann.adjoint().to_owned();

    let sx = spin_matrix([[z, c(1.0)], [c(1.0), z]]);
    let sy = spin_matrix([[z, Complex::new(0.0, -1.0)], [Complex::new(0.0, 1.0), z]]);
    let sz = spin_matrix([[c(1.0), z], [z, c(-1.0)]]);
    // |↓⟩⟨↑|: row down, column up.
    let sm = spin_matrix([[z, z], [c(1.0), z]]);
    let sp = sm.adjoint().to_owned();

    let on_spin = |m: &Operator| linalg::kron(m.as_ref(), i_b.as_ref());
    let on_boson = |m: &Operator| linalg::kron(i_s.as_ref(), m.as_ref());
    Ok(Primitives {
        sigma_x: on_spin(&sx),
        sigma_y: on_spin(&sy),
        sigma_z: on_spin(&sz),
        sigma_minus: on_spin(&sm),
        sigma_plus: on_spin(&sp),
        a: on_boson(&ann),
        a_dagger: on_boson(&cre),
        identity: linalg::identity(h.dim()),
    })
}

/// System Hamiltonian in units of the oscillator frequency.
pub fn build_hamiltonian(m: &ModelSpec) -> Result<Operator> {
    m.validate()?;
    let h = m.hilbert;
    let nb = h.n_boson_levels;
    let dim = h.dim();
    let half_delta = 0.5 * m.delta_tilde;
    let lambda = m.lambda_tilde;
    let s = m.counter_rotating();
    let eps = m.field();

    let mut out = Mat::<Complex>::zeros(dim, dim);
    for n in 0..nb {
        let up = h.index(SPIN_UP, n);
        let dn = h.index(SPIN_DOWN, n);
        out[(up, up)] = c(half_delta + n as f64);
        out[(dn, dn)] = c(-half_delta + n as f64);
    }
    for n in 0..nb {
        let up = h.index(SPIN_UP, n);
        // σ₋a†: |↑,n⟩ → |↓,n+1⟩, and its conjugate σ₊a.
        if n + 1 < nb {
            let g = lambda * ((n + 1) as f64).sqrt();
            let dn = h.index(SPIN_DOWN, n + 1);
            out[(dn, up)] += c(g);
            out[(up, dn)] += c(g);
        }
        // σ₋a: |↑,n⟩ → |↓,n−1⟩, and its conjugate σ₊a†.
        if n >= 1 {
            let g = s * lambda * (n as f64).sqrt();
            let dn = h.index(SPIN_DOWN, n - 1);
            out[(dn, up)] += c(g);
            out[(up, dn)] += c(g);
        }
    }
    if eps != 0.0 {
        for n in 0..nb {
            let up = h.index(SPIN_UP, n);
            let dn = h.index(SPIN_DOWN, n);
            out[(dn, up)] += c(eps);
            out[(up, dn)] += c(eps);
        }
    }
    Ok(out)
}

/// `σ_z ⊗ Σ_n (−1)^n |n⟩⟨n|`.
pub fn build_parity(h: HilbertSpec) -> Result<Operator> {
    h.validate()?;
    let dim = h.dim();
    Ok(Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            c(parity_of(h, i) as f64)
        } else {
            c(0.0)
        }
    }))
}

/// `a†a + |↑⟩⟨↑| ⊗ I`.
pub fn build_excitation_number(h: HilbertSpec) -> Result<Operator> {
    h.validate()?;
    let dim = h.dim();
    Ok(Mat::from_fn(dim, dim, |i, j| {
        if i != j {
            return c(0.0);
        }
        let (spin, n) = h.split(i);
        c(n as f64 + if spin == SPIN_UP { 1.0 } else { 0.0 })
    }))
}

/// Eigenpairs of a Hamiltonian, energies ascending, with the symmetry sector
/// of each eigenstate.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub hilbert: HilbertSpec,
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the product basis.
    pub vectors: Operator,
    pub sectors: Vec<Sector>,
}

impl Eigensystem {
    /// Diagonalizes the model sector by sector.
    pub fn of_model(m: &ModelSpec) -> Result<Self> {
        let h = build_hamiltonian(m)?;
        let sectors = m.symmetry_sectors();
        let blocks: Vec<Vec<usize>> = sectors.iter().map(|(_, v)| v.clone()).collect();
        let (eig, origin) = linalg::eigh_blocks(h.as_ref(), &blocks)?;
        Ok(Self {
            hilbert: m.hilbert,
            energies: eig.values,
            vectors: eig.vectors,
            sectors: origin.into_iter().map(|b| sectors[b].0).collect(),
        })
    }

    /// Diagonalizes an arbitrary Hermitian operator without symmetry labels.
    pub fn of_operator(hilbert: HilbertSpec, h: &Operator) -> Result<Self> {
        let d = hilbert.dim();
        if h.nrows() != d || h.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: h.nrows() });
        }
        let eig = linalg::eigh(h.as_ref())?;
        Ok(Self {
            hilbert,
            energies: eig.values,
            vectors: eig.vectors,
            sectors: vec![Sector::Unlabeled; d],
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Matrix elements `⟨m|op|n⟩` in the eigenbasis.
    pub fn to_eigenbasis(&self, op: &Operator) -> Operator {
        linalg::to_basis(op.as_ref(), self.vectors.as_ref())
    }

    pub fn from_eigenbasis(&self, op: &Operator) -> Operator {
        linalg::from_basis(op.as_ref(), self.vectors.as_ref())
    }
}
