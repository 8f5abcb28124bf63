//! Ohmic bosonic baths.

use crate::error::{Error, Result};
use crate::model::Primitives;
use crate::{Operator, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CouplingOperator {
    /// `σ_x`.
    SpinSigmaX,
    /// `a + a†`.
    BosonPosition,
}

impl CouplingOperator {
    pub fn matrix(self, p: &Primitives) -> Operator {
        match self {
            CouplingOperator::SpinSigmaX => p.sigma_x.clone(),
            CouplingOperator::BosonPosition => &p.a + &p.a_dagger,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    pub eta: f64,
    pub gamma: f64,
    pub temperature: f64,
    pub coupling: CouplingOperator,
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidSpec(format!("bath eta must be positive, got {}", self.eta)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidSpec(format!("bath gamma must be positive, got {}", self.gamma)));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "bath temperature must be nonnegative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn rate(&self, epsilon: f64) -> f64 {
        correlation_rate(epsilon, self.eta, self.gamma, self.temperature)
    }
}

/// `J(x) = η x e^{−x/γ}`.
pub fn spectral_density<T: Scalar>(x: T, eta: T, gamma: T) -> T {
    eta * x * (-x / gamma).exp()
}

/// `1/(e^{x/T} − 1)`, identically zero at `T = 0`.
pub fn bose_einstein<T: Scalar>(x: T, temperature: T) -> T {
    if temperature <= T::zero() {
        return T::zero();
    }
    (x / temperature).exp_m1().recip()
}

/// Transition kernel for a bath that absorbs energy `epsilon` from the system
/// (negative `epsilon`: the system absorbs `|epsilon|` from the bath).
pub fn correlation_rate<T: Scalar>(epsilon: T, eta: T, gamma: T, temperature: T) -> T {
    if epsilon > T::zero() {
        spectral_density(epsilon, eta, gamma) * (bose_einstein(epsilon, temperature) + T::one())
    } else if epsilon < T::zero() {
        let x = -epsilon;
        spectral_density(x, eta, gamma) * bose_einstein(x, temperature)
    } else {
        eta * temperature
    }
}
