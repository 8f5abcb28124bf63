//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use faer::{c64, Mat};
use nesslab::model::{Family, ModelSpec};

/// Hamiltonian assembled term by term from its bare-basis matrix elements.
/// Spin index 0 is up, basis index `spin * n_b + n`.
pub fn hamiltonian_reference(m: &ModelSpec) -> Vec<Vec<f64>> {
    let nb = m.hilbert.n_boson_levels;
    let d = 2 * nb;
    let idx = |s: usize, n: usize| s * nb + n;
    let mut h = vec![vec![0.0; d]; d];
    for n in 0..nb {
        h[idx(0, n)][idx(0, n)] = 0.5 * m.delta_tilde + n as f64;
        h[idx(1, n)][idx(1, n)] = -0.5 * m.delta_tilde + n as f64;
    }
    let (rot, counter) = match m.family {
        Family::Rabi | Family::BrokenZ2Rabi => (1.0, 1.0),
        Family::JaynesCummings | Family::BrokenU1JC => (1.0, 0.0),
        Family::Interpolated => (1.0, m.s),
    };
    let lam = m.lambda_tilde;
    for n in 0..nb.saturating_sub(1) {
        let g = lam * ((n + 1) as f64).sqrt();
        // σ₋a† : |↑,n⟩ → |↓,n+1⟩ and its conjugate σ₊a.
        h[idx(1, n + 1)][idx(0, n)] += rot * g;
        h[idx(0, n)][idx(1, n + 1)] += rot * g;
        // σ₊a† : |↓,n⟩ → |↑,n+1⟩ and its conjugate σ₋a.
        h[idx(0, n + 1)][idx(1, n)] += counter * g;
        h[idx(1, n)][idx(0, n + 1)] += counter * g;
    }
    if matches!(m.family, Family::BrokenZ2Rabi | Family::BrokenU1JC) {
        for n in 0..nb {
            h[idx(0, n)][idx(1, n)] += m.epsilon_tilde;
            h[idx(1, n)][idx(0, n)] += m.epsilon_tilde;
        }
    }
    h
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Null vector of a square generator from its complete SVD, reshaped
/// column-major into a `d × d` matrix of unit trace.
pub fn svd_null_matrix(l: &Mat<c64>, d: usize) -> (Mat<c64>, f64, f64) {
    let svd = l.svd().expect("svd converges");
    let n = l.nrows();
    let s = svd.S();
    let v = svd.V();
    // Singular values come sorted in decreasing order.
    let smallest = s[n - 1].re;
    let second = s[n - 2].re;
    let mut rho = Mat::from_fn(d, d, |i, j| v[(j * d + i, n - 1)]);
    let tr: c64 = (0..d).map(|i| rho[(i, i)]).sum();
    for j in 0..d {
        for i in 0..d {
            rho[(i, j)] = rho[(i, j)] / tr;
        }
    }
    (rho, smallest, second)
}

/// Null vector of a site-basis generator from the complete SVD of its
/// energy-basis form `T† L T`, `T = conj(U) ⊗ U`, with every row scaled to
/// unit norm. Left scaling keeps the null space and evens out the backward
/// error between slow population rows and fast coherence rows. Returns the
/// site-basis state with the two smallest singular values.
pub fn svd_null_energy_basis(l: &Mat<c64>, u: &Mat<c64>) -> (Mat<c64>, f64, f64) {
    let d = u.nrows();
    let n = d * d;
    let t = Mat::from_fn(n, n, |r, c| u[(r / d, c / d)].conj() * u[(r % d, c % d)]);
    let le = t.adjoint() * l * &t;
    let scaled = Mat::from_fn(n, n, |i, j| {
        let norm: f64 = (0..n).map(|k| le[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        le[(i, j)] / norm
    });
    let (x, smallest, second) = svd_null_matrix(&scaled, d);
    (u * x * u.adjoint(), smallest, second)
}

/// `Σ_k ⟨i|k⟩ e^{−E_k/T} ⟨k|j⟩ / Z` with explicit loops; `T = 0` gives the
/// ground-state projector.
pub fn gibbs_reference(energies: &[f64], vectors: &Mat<c64>, temperature: f64) -> Mat<c64> {
    let d = energies.len();
    let e0 = energies[0];
    let w: Vec<f64> = energies
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            if temperature > 0.0 {
                (-(e - e0) / temperature).exp()
            } else if k == 0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let z: f64 = w.iter().sum();
    Mat::from_fn(d, d, |i, j| {
        let mut acc = c64::new(0.0, 0.0);
        for k in 0..d {
            acc += vectors[(i, k)] * vectors[(j, k)].conj() * (w[k] / z);
        }
        acc
    })
}

/// Bath kernel written out from the emission and absorption rules.
pub fn kernel_reference(eps: f64, eta: f64, gamma: f64, temperature: f64) -> f64 {
    let j = |x: f64| eta * x * (-x / gamma).exp();
    let nbe = |x: f64| if temperature > 0.0 { 1.0 / ((x / temperature).exp() - 1.0) } else { 0.0 };
    if eps > 0.0 {
        j(eps) * (nbe(eps) + 1.0)
    } else if eps < 0.0 {
        j(-eps) * nbe(-eps)
    } else {
        eta * temperature
    }
}

/// Redfield element for one bath from the four-index correlation tensor
/// `Γ_abcd = S_ab S_cd G(E_d − E_c)`:
/// `R_mn,op = Γ_pnmo + Γ*_omnp − δ_np Σ_q Γ_mqqo − δ_mo Σ_q Γ*_nqqp`.
pub fn redfield_reference(
    energies: &[f64],
    s: &Mat<c64>,
    g: &dyn Fn(f64) -> f64,
    m: usize,
    n: usize,
    o: usize,
    p: usize,
) -> c64 {
    let d = energies.len();
    let gamma = |a: usize, b: usize, c: usize, e: usize| s[(a, b)] * s[(c, e)] * g(energies[e] - energies[c]);
    let mut r = gamma(p, n, m, o) + gamma(o, m, n, p).conj();
    if n == p {
        for q in 0..d {
            r -= gamma(m, q, q, o);
        }
    }
    if m == o {
        for q in 0..d {
            r -= gamma(n, q, q, p).conj();
        }
    }
    r
}

/// Trace norm of a Hermitian difference, halved.
pub fn trace_distance(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let diff = a - b;
    let herm = Mat::from_fn(diff.nrows(), diff.ncols(), |i, j| (diff[(i, j)] + diff[(j, i)].conj()) * 0.5);
    let ev = herm.self_adjoint_eigenvalues(faer::Side::Lower).expect("eigenvalues");
    0.5 * ev.iter().map(|x| x.abs()).sum::<f64>()
}
