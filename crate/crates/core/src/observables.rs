//! Transport and state metrics.

use faer::Mat;

use crate::error::{Error, Result};
use crate::lindblad::LindbladSpec;
use crate::model::{Eigensystem, Primitives, SPIN_DOWN, SPIN_UP};
use crate::state::DensityMatrix;
use crate::{linalg, Complex, Operator};

/// Energies closer than this count as one degenerate level.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalPopulations {
    pub spin_down: f64,
    pub spin_up: f64,
    pub boson_ground: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableSet {
    /// Signed; decay of the up population is negative.
    pub spin_flux: f64,
    pub spin_down_population: f64,
    pub boson_ground_population: f64,
    pub purity: f64,
    pub trace_distance_to_thermal: f64,
}

/// `Tr[σ_z D_s(ρ)]/2` for the spin dissipator `D_s` with jump `√r_s σ₋`.
pub fn spin_flux(rho: &DensityMatrix, diss: &LindbladSpec, p: &Primitives) -> f64 {
    if diss.r_s == 0.0 {
        return 0.0;
    }
    let r = rho.matrix();
    let sm = p.sigma_minus.as_ref();
    let sp = p.sigma_plus.as_ref();
    let k = sp * sm;
    let jump = sm * r * sp;
    let anti = &k * r + r * &k;
    let d = &jump - &anti * faer::Scale(Complex::new(0.5, 0.0));
    0.5 * diss.r_s * linalg::trace_product(p.sigma_z.as_ref(), d.as_ref()).re
}

/// `Tr[σ_z X]/2` for an arbitrary product-basis operator.
pub fn half_sigma_z_contraction(x: &Operator, p: &Primitives) -> f64 {
    0.5 * linalg::trace_product(p.sigma_z.as_ref(), x.as_ref()).re
}

pub fn local_populations(rho: &DensityMatrix) -> LocalPopulations {
    let spin = rho.spin_reduced();
    let boson = rho.boson_reduced();
    LocalPopulations {
        spin_down: spin[(SPIN_DOWN, SPIN_DOWN)].re,
        spin_up: spin[(SPIN_UP, SPIN_UP)].re,
        boson_ground: boson[(0, 0)].re,
    }
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    let r = rho.matrix();
    linalg::trace_product(r, r).re
}

/// Boltzmann weights over an eigensystem; at `T = 0` an equal mixture over
/// the (possibly degenerate) ground level.
pub fn thermal_weights(energies: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::InvalidSpec(format!("temperature must be nonnegative, got {temperature}")));
    }
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = if temperature == 0.0 {
        energies
            .iter()
            .map(|&e| if e - e0 < DEGENERACY_TOLERANCE { 1.0 } else { 0.0 })
            .collect()
    } else {
        energies.iter().map(|&e| (-(e - e0) / temperature).exp()).collect()
    };
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// `e^{−H/T}/Z`.
pub fn thermal_state(eig: &Eigensystem, temperature: f64) -> Result<DensityMatrix> {
    let w = thermal_weights(&eig.energies, temperature)?;
    crate::lindblad::state_from_populations(eig, &w)
}

/// `½ Σ |eig(ρ_a − ρ_b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.hilbert() != b.hilbert() {
        return Err(Error::DimensionMismatch { expected: a.hilbert().dim(), found: b.hilbert().dim() });
    }
    let diff: Mat<Complex> = a.matrix() - b.matrix();
    let ev = linalg::eigvalsh(linalg::hermitize(diff.as_ref()).as_ref())?;
    Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
}

/// Diagonal of `ρ` in the eigenbasis.
pub fn eigenbasis_populations(eig: &Eigensystem, rho: &DensityMatrix) -> Vec<f64> {
    let u = &eig.vectors;
    let r = rho.matrix();
    let ru = r * u;
    (0..eig.dim())
        .map(|k| {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..eig.dim() {
                acc += u[(i, k)].conj() * ru[(i, k)];
            }
            acc.re
        })
        .collect()
}

pub fn observable_set(
    rho: &DensityMatrix,
    spin_flux: f64,
    thermal: &DensityMatrix,
) -> Result<ObservableSet> {
    let pops = local_populations(rho);
    Ok(ObservableSet {
        spin_flux,
        spin_down_population: pops.spin_down,
        boson_ground_population: pops.boson_ground,
        purity: purity(rho),
        trace_distance_to_thermal: trace_distance(rho, thermal)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HilbertSpec;

    #[test]
    fn purity_of_two_state_mixture() {
        let h = HilbertSpec::new(3).unwrap();
        let a = DensityMatrix::basis(h, 0, 1).unwrap();
        let b = DensityMatrix::basis(h, 1, 2).unwrap();
        let mix = a.matrix() * faer::Scale(Complex::new(0.7, 0.0))
            + b.matrix() * faer::Scale(Complex::new(0.3, 0.0));
        let rho = DensityMatrix::new(h, mix.as_ref()).unwrap();
        assert!((purity(&rho) - 0.58).abs() < 1e-15);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_populations() {
        let h = HilbertSpec::new(5).unwrap();
        let rho = DensityMatrix::maximally_mixed(h);
        let p = local_populations(&rho);
        assert!((p.spin_down - 0.5).abs() < 1e-15);
        assert!((p.boson_ground - 0.2).abs() < 1e-15);
        assert!((purity(&rho) - 0.1).abs() < 1e-15);
    }
}
