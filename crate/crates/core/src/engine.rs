//! Steady-state engines sharing one interface.

use crate::bath::{BathSpec, CouplingOperator};
use crate::error::Result;
use crate::lindblad::{self, LindbladSpec};
use crate::model::{Eigensystem, ModelSpec, Primitives};
use crate::observables;
use crate::redfield::{self, RedfieldTensor};
use crate::state::DensityMatrix;
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    LindbladFull,
    LindbladSecular,
    RedfieldSecular,
    RedfieldFull,
}

impl EngineKind {
    pub const ALL: [EngineKind; 4] = [
        EngineKind::LindbladFull,
        EngineKind::LindbladSecular,
        EngineKind::RedfieldSecular,
        EngineKind::RedfieldFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::LindbladFull => "lindblad_full",
            EngineKind::LindbladSecular => "lindblad_secular",
            EngineKind::RedfieldSecular => "redfield_secular",
            EngineKind::RedfieldFull => "redfield_full",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    pub fn is_redfield(self) -> bool {
        matches!(self, EngineKind::RedfieldSecular | EngineKind::RedfieldFull)
    }
}

/// Dissipation parameters for every engine; each engine reads its subset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dissipation {
    pub r_s: f64,
    pub r_b: f64,
    /// Boson-bath coupling strength.
    pub eta_b: f64,
    /// `η_s / η_b`.
    pub eta_ratio: f64,
    /// Spin-bath cutoff; `None` follows the spin splitting `Δ̃`.
    pub gamma_s: Option<f64>,
    pub gamma_b: f64,
    pub t_s: f64,
    pub t_b: f64,
}

impl Default for Dissipation {
    fn default() -> Self {
        Self {
            r_s: 5e-12,
            r_b: 5e-6,
            eta_b: 1e-4,
            eta_ratio: 0.01,
            gamma_s: None,
            gamma_b: 1.0,
            t_s: 0.0,
            t_b: 0.0,
        }
    }
}

impl Dissipation {
    pub fn lindblad(&self) -> Result<LindbladSpec> {
        LindbladSpec::new(self.r_s, self.r_b)
    }

    /// Spin bath then boson bath.
    pub fn baths(&self, m: &ModelSpec) -> Result<[BathSpec; 2]> {
        let spin = BathSpec {
            eta: self.eta_b * self.eta_ratio,
            gamma: self.gamma_s.unwrap_or(m.delta_tilde),
            temperature: self.t_s,
            coupling: CouplingOperator::SpinSigmaX,
        };
        let boson = BathSpec {
            eta: self.eta_b,
            gamma: self.gamma_b,
            temperature: self.t_b,
            coupling: CouplingOperator::BosonPosition,
        };
        spin.validate()?;
        boson.validate()?;
        Ok([spin, boson])
    }
}

#[derive(Clone, Debug)]
pub struct EngineOutput {
    pub rho: DensityMatrix,
    /// Eigenbasis populations of `rho`.
    pub populations: Vec<f64>,
    pub spin_flux: f64,
    /// Natural magnitude of the spin flux for this engine, used to judge
    /// when a flux series is numerically flat.
    pub flux_scale: f64,
    pub residual: f64,
    pub gap_ratio: f64,
    pub warnings: Vec<String>,
}

pub const WARN_WEAK_COUPLING: &str = "coupling_not_above_rates";

/// Solves for the steady state of `model` with the chosen engine.
pub fn solve(
    kind: EngineKind,
    model: &ModelSpec,
    eig: &Eigensystem,
    primitives: &Primitives,
    diss: &Dissipation,
) -> Result<EngineOutput> {
    match kind {
        EngineKind::LindbladFull | EngineKind::LindbladSecular => {
            let spec = diss.lindblad()?;
            let mut warnings = Vec::new();
            if model.lambda_tilde <= spec.max_rate() {
                warnings.push(WARN_WEAK_COUPLING.to_string());
            }
            let (rho, residual, gap_ratio) = if kind == EngineKind::LindbladSecular {
                let rates = lindblad::build_secular_rates(eig, &spec, primitives)?;
                let ratio = crate::markov::uniqueness_ratio(&rates.rates)?;
                let p = lindblad::secular_steady_populations(&rates.rates)?;
                let res = rates
                    .rates
                    .iter()
                    .map(|row| row.iter().zip(&p).map(|(w, x)| w * x).sum::<f64>().powi(2))
                    .sum::<f64>()
                    .sqrt();
                (lindblad::state_from_populations(eig, &p)?, res, ratio)
            } else {
                let l = lindblad::build_liouvillian_energy(eig, &spec, primitives)?;
                let ss = lindblad::steady_state(&l)?;
                (ss.rho, ss.residual, ss.gap_ratio)
            };
            let spin_flux = observables::spin_flux(&rho, &spec, primitives);
            Ok(EngineOutput {
                populations: observables::eigenbasis_populations(eig, &rho),
                rho,
                spin_flux,
                flux_scale: spec.r_s,
                residual,
                gap_ratio,
                warnings,
            })
        }
        EngineKind::RedfieldSecular | EngineKind::RedfieldFull => {
            let baths = diss.baths(model)?;
            let t = redfield::build_redfield_tensor(
                eig,
                &baths,
                primitives,
                kind == EngineKind::RedfieldSecular,
            )?;
            let ss = redfield::redfield_steady_state(&t)?;
            let populations = observables::eigenbasis_populations(eig, &ss.rho);
            let spin_flux = redfield_spin_flux(&t, &ss.rho, primitives);
            let flux_scale = max_exit_rate(&t, 0);
            Ok(EngineOutput {
                rho: ss.rho,
                populations,
                spin_flux,
                flux_scale,
                residual: ss.residual,
                gap_ratio: ss.gap_ratio,
                warnings: Vec::new(),
            })
        }
    }
}

/// `½ Tr[σ_z R_s(ρ)]` for the spin bath (index 0).
pub fn redfield_spin_flux(t: &RedfieldTensor, rho: &DensityMatrix, p: &Primitives) -> f64 {
    let rho_e = t.eig.to_eigenbasis(&rho.matrix().to_owned());
    let r = t.apply_bath(0, &rho_e);
    let sz = t.eig.to_eigenbasis(&p.sigma_z);
    0.5 * linalg::trace_product(sz.as_ref(), r.as_ref()).re
}

/// `max_n Σ_{m≠n} W_mn` for one bath: the fastest escape rate of any level.
pub fn max_exit_rate(t: &RedfieldTensor, bath: usize) -> f64 {
    let w = t.population_rates(bath);
    let d = w.len();
    (0..d)
        .map(|n| (0..d).filter(|&m| m != n).map(|m| w[m][n]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Checks a solved state against the density-matrix invariants.
pub fn check_state(rho: &DensityMatrix) -> Result<()> {
    rho.check(1e-10, 1e-10, 1e-8)
}
