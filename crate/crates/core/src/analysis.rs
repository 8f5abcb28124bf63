//! Closed-system diagnostics: symmetry-labeled spectra, eigenstate tracking,
//! avoided-crossing search and entanglement entropy.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Eigensystem, HilbertSpec, ModelAxis, ModelSpec, Sector, SPIN_DOWN, SPIN_UP};
use crate::signal::golden_section;
use crate::state::spin_reduced_pure;
use crate::{linalg, Complex, Scalar};

/// Minimum overlap between consecutive tracked states.
pub const TRACKING_THRESHOLD: f64 = 0.5;
const MAX_REFINEMENTS: usize = 10;

#[derive(Clone, Debug)]
pub struct LabeledSpectrum {
    pub parameter: f64,
    pub eig: Eigensystem,
    pub parities: Vec<Option<i8>>,
    pub parity_expectations: Vec<f64>,
}

impl LabeledSpectrum {
    pub fn energies(&self) -> &[f64] {
        &self.eig.energies
    }

    pub fn state(&self, k: usize) -> Vec<Complex> {
        (0..self.eig.dim()).map(|i| self.eig.vectors[(i, k)]).collect()
    }

    /// Global indices of the eigenstates in `sector`, ascending in energy.
    pub fn sector_levels(&self, sector: Sector) -> Vec<usize> {
        (0..self.eig.dim()).filter(|&k| self.eig.sectors[k] == sector).collect()
    }

    /// Distinct sector labels, in order of first appearance.
    pub fn sectors(&self) -> Vec<Sector> {
        let mut out: Vec<Sector> = Vec::new();
        for &s in &self.eig.sectors {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
}

pub fn diagonalize_labeled(m: &ModelSpec) -> Result<LabeledSpectrum> {
    let eig = Eigensystem::of_model(m)?;
    let h = m.hilbert;
    let d = eig.dim();
    let parity_diag: Vec<f64> = (0..d)
        .map(|i| {
            let (spin, n) = h.split(i);
            let sz = if spin == SPIN_UP { 1.0 } else { -1.0 };
            if n % 2 == 0 {
                sz
            } else {
                -sz
            }
        })
        .collect();
    let parity_expectations: Vec<f64> = (0..d)
        .map(|k| (0..d).map(|i| eig.vectors[(i, k)].norm_sqr() * parity_diag[i]).sum())
        .collect();
    let parities = parity_expectations
        .iter()
        .map(|&p| {
            if m.family.has_parity() && (p.abs() - 1.0).abs() < 1e-6 {
                Some(if p > 0.0 { 1 } else { -1 })
            } else {
                None
            }
        })
        .collect();
    Ok(LabeledSpectrum { parameter: 0.0, eig, parities, parity_expectations })
}

fn spectrum_at(template: &ModelSpec, axis: ModelAxis, x: f64) -> Result<LabeledSpectrum> {
    let mut s = diagonalize_labeled(&axis.set(template, x))?;
    s.parameter = x;
    Ok(s)
}

/// Labeled spectra at every grid point, computed in parallel on the current
/// rayon pool and returned in grid order.
pub fn spectra_on_grid(
    template: &ModelSpec,
    axis: ModelAxis,
    grid: &[f64],
) -> Result<Vec<LabeledSpectrum>> {
    grid.par_iter().map(|&x| spectrum_at(template, axis, x)).collect()
}

#[derive(Clone, Debug)]
pub struct TrackedBranch {
    pub id: usize,
    pub sector: Sector,
    pub grid: Vec<f64>,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<Complex>>,
}

/// Greedy maximal-overlap assignment of `prev` states onto eigenstates of
/// `next`. Returns the chosen indices and the smallest assigned overlap.
fn assign(prev: &[Vec<Complex>], next: &LabeledSpectrum) -> (Vec<usize>, f64) {
    let d = next.eig.dim();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(prev.len() * d);
    for (b, psi) in prev.iter().enumerate() {
        for k in 0..d {
            let o = (0..d).map(|i| psi[i].conj() * next.eig.vectors[(i, k)]).sum::<Complex>().norm();
            pairs.push((o, b, k));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut chosen = vec![usize::MAX; prev.len()];
    let mut taken = vec![false; d];
    let mut worst = f64::INFINITY;
    for (o, b, k) in pairs {
        if chosen[b] == usize::MAX && !taken[k] {
            chosen[b] = k;
            taken[k] = true;
            worst = worst.min(o);
        }
    }
    (chosen, worst)
}

/// Follows the `n_branches` lowest eigenstates at the first grid point along
/// the grid by maximal overlap, bisecting steps whose best overlap falls
/// below [`TRACKING_THRESHOLD`].
pub fn track_branches(
    template: &ModelSpec,
    axis: ModelAxis,
    grid: &[f64],
    n_branches: usize,
) -> Result<Vec<TrackedBranch>> {
    let spectra = spectra_on_grid(template, axis, grid)?;
    track_on_spectra(template, axis, &spectra, n_branches)
}

pub fn track_on_spectra(
    template: &ModelSpec,
    axis: ModelAxis,
    spectra: &[LabeledSpectrum],
    n_branches: usize,
) -> Result<Vec<TrackedBranch>> {
    let Some(first) = spectra.first() else {
        return Ok(Vec::new());
    };
    let n = n_branches.min(first.eig.dim());
    let mut current: Vec<usize> = (0..n).collect();
    let mut branches: Vec<TrackedBranch> = (0..n)
        .map(|b| TrackedBranch {
            id: b,
            sector: first.eig.sectors[b],
            grid: vec![first.parameter],
            energies: vec![first.eig.energies[b]],
            states: vec![first.state(b)],
        })
        .collect();
    for w in spectra.windows(2) {
        let prev: Vec<Vec<Complex>> = current.iter().map(|&k| w[0].state(k)).collect();
        let next = advance(template, axis, &prev, w[0].parameter, &w[1], 0)?;
        for (b, &k) in next.iter().enumerate() {
            let br = &mut branches[b];
            br.grid.push(w[1].parameter);
            br.energies.push(w[1].eig.energies[k]);
            br.states.push(w[1].state(k));
        }
        current = next;
    }
    Ok(branches)
}

fn advance(
    template: &ModelSpec,
    axis: ModelAxis,
    prev: &[Vec<Complex>],
    x_prev: f64,
    next: &LabeledSpectrum,
    depth: usize,
) -> Result<Vec<usize>> {
    let (chosen, worst) = assign(prev, next);
    if worst >= TRACKING_THRESHOLD {
        return Ok(chosen);
    }
    if depth >= MAX_REFINEMENTS {
        return Err(Error::TrackingAmbiguity { parameter: next.parameter, overlap: worst });
    }
    let mid = spectrum_at(template, axis, 0.5 * (x_prev + next.parameter))?;
    let via = advance(template, axis, prev, x_prev, &mid, depth + 1)?;
    let prev_mid: Vec<Vec<Complex>> = via.iter().map(|&k| mid.state(k)).collect();
    advance(template, axis, &prev_mid, mid.parameter, next, depth + 1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LacSettings {
    /// Gap minima at or above this are recorded with order 0.
    pub max_gap: f64,
    /// Number of lowest levels per symmetry sector that are scanned.
    pub levels_per_sector: usize,
    pub tolerance: f64,
    /// Refined gaps below this are true crossings.
    pub degenerate_gap: f64,
}

impl Default for LacSettings {
    fn default() -> Self {
        Self { max_gap: 0.5, levels_per_sector: 6, tolerance: 1e-6, degenerate_gap: 1e-9 }
    }
}

/// Gap minimum between two levels of one symmetry sector.
#[derive(Clone, Debug, PartialEq)]
pub struct AvoidedCrossing {
    pub location: f64,
    pub gap: f64,
    /// Sector-local level indices of the lower and upper state.
    pub branch_indices: (usize, usize),
    pub sector: Sector,
    pub parity: Option<i8>,
    /// `n + 1` for the dominant bare pair `|↑,n⟩`, `|↓,m⟩`, so 1 marks the
    /// lowest crossing of its series; 0 when the gap is not below the
    /// sharpness threshold.
    pub order: usize,
    /// Boson-number difference `m − n` of the dominant bare states
    /// `|↑,n⟩` and `|↓,m⟩` the crossing mixes, when identifiable.
    pub series: Option<i64>,
    pub mean_energy: f64,
}

/// Exact degeneracy between states of different symmetry sectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TrueCrossing {
    pub location: f64,
    pub gap: f64,
    pub sectors: (Sector, Sector),
    pub mean_energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrossingReport {
    pub avoided: Vec<AvoidedCrossing>,
    pub crossings: Vec<TrueCrossing>,
}

fn sector_gap(s: &LabeledSpectrum, sector: Sector, i: usize) -> Option<(f64, usize, usize)> {
    let lv = s.sector_levels(sector);
    if i + 1 < lv.len() {
        Some((s.eig.energies[lv[i + 1]] - s.eig.energies[lv[i]], lv[i], lv[i + 1]))
    } else {
        None
    }
}

fn strict_interior_minima(g: &[f64]) -> Vec<usize> {
    (1..g.len().saturating_sub(1)).filter(|&p| g[p] < g[p - 1] && g[p] <= g[p + 1]).collect()
}

/// `(m − n, n)` for the dominant bare pair `|↑,n⟩`, `|↓,m⟩`.
fn dominant_pair(h: HilbertSpec, a: &[Complex], b: &[Complex]) -> Option<(i64, usize)> {
    let mut w: Vec<(f64, usize)> =
        (0..a.len()).map(|i| (a[i].norm_sqr() + b[i].norm_sqr(), i)).collect();
    w.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let (s1, n1) = h.split(w[0].1);
    let (s2, n2) = h.split(w[1].1);
    match (s1, s2) {
        (SPIN_UP, SPIN_DOWN) => Some((n2 as i64 - n1 as i64, n1)),
        (SPIN_DOWN, SPIN_UP) => Some((n1 as i64 - n2 as i64, n2)),
        _ => None,
    }
}

/// Locates gap minima between adjacent levels of each symmetry sector along
/// a grid, refining each by golden-section search, and separately records
/// exact crossings between adjacent levels of different sectors.
pub fn find_avoided_crossings(
    template: &ModelSpec,
    axis: ModelAxis,
    spectra: &[LabeledSpectrum],
    settings: &LacSettings,
) -> Result<CrossingReport> {
    let mut report = CrossingReport::default();
    let Some(first) = spectra.first() else {
        return Ok(report);
    };
    let h = template.hilbert;
    let step_bracket = |p: usize| (spectra[p - 1].parameter, spectra[p + 1].parameter);

    let mut found: Vec<AvoidedCrossing> = Vec::new();
    for sector in first.sectors() {
        for i in 0..settings.levels_per_sector {
            let g: Vec<f64> = spectra
                .iter()
                .map(|s| sector_gap(s, sector, i).map_or(f64::INFINITY, |x| x.0))
                .collect();
            for p in strict_interior_minima(&g) {
                let (a, b) = step_bracket(p);
                let gap_at = |x: f64| {
                    spectrum_at(template, axis, x)
                        .ok()
                        .and_then(|s| sector_gap(&s, sector, i).map(|v| v.0))
                        .unwrap_or(f64::INFINITY)
                };
                let (x, gap) = golden_section(gap_at, a, b, settings.tolerance);
                if gap < settings.degenerate_gap {
                    continue;
                }
                let s = spectrum_at(template, axis, x)?;
                let Some((_, lo, hi)) = sector_gap(&s, sector, i) else { continue };
                let pair = dominant_pair(h, &s.state(lo), &s.state(hi));
                found.push(AvoidedCrossing {
                    location: x,
                    gap,
                    branch_indices: (i, i + 1),
                    sector,
                    parity: sector.parity().filter(|_| template.family.has_parity()),
                    order: match pair {
                        Some((_, n_up)) if gap < settings.max_gap => n_up + 1,
                        _ => 0,
                    },
                    series: pair.map(|p| p.0),
                    mean_energy: 0.5 * (s.eig.energies[lo] + s.eig.energies[hi]),
                });
            }
        }
    }
    found.sort_by(|x, y| x.location.total_cmp(&y.location));
    let mut dedup: Vec<AvoidedCrossing> = Vec::new();
    for c in found {
        let dup = dedup.iter().any(|e| {
            e.sector == c.sector
                && e.branch_indices == c.branch_indices
                && (e.location - c.location).abs() < 1e3 * settings.tolerance
        });
        if !dup {
            dedup.push(c);
        }
    }
    // Crossings without a clean bare pair are ranked by mean energy.
    let mut idx: Vec<usize> = (0..dedup.len())
        .filter(|&k| dedup[k].series.is_none() && dedup[k].gap < settings.max_gap)
        .collect();
    idx.sort_by(|&x, &y| dedup[x].mean_energy.total_cmp(&dedup[y].mean_energy));
    for (rank, k) in idx.into_iter().enumerate() {
        dedup[k].order = rank + 1;
    }
    report.avoided = dedup;

    // Unlike-sector neighbours among the lowest levels.
    let n_low = settings.levels_per_sector * first.sectors().len().min(2);
    if first.sectors().len() > 1 {
        for k in 0..n_low.min(first.eig.dim() - 1) {
            let g: Vec<f64> = spectra
                .iter()
                .map(|s| {
                    if s.eig.sectors[k] != s.eig.sectors[k + 1] {
                        s.eig.energies[k + 1] - s.eig.energies[k]
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            for p in strict_interior_minima(&g) {
                let (a, b) = step_bracket(p);
                let gap_at = |x: f64| {
                    spectrum_at(template, axis, x)
                        .map(|s| s.eig.energies[k + 1] - s.eig.energies[k])
                        .unwrap_or(f64::INFINITY)
                };
                let (x, gap) = golden_section(gap_at, a, b, settings.tolerance);
                if gap >= settings.degenerate_gap.max(1e-6) {
                    continue;
                }
                let s = spectrum_at(template, axis, x)?;
                report.crossings.push(TrueCrossing {
                    location: x,
                    gap,
                    sectors: (s.eig.sectors[k], s.eig.sectors[k + 1]),
                    mean_energy: 0.5 * (s.eig.energies[k] + s.eig.energies[k + 1]),
                });
            }
        }
        report.crossings.sort_by(|x, y| x.location.total_cmp(&y.location));
    }
    Ok(report)
}

/// `−Σ p ln p` with `0 ln 0 = 0`.
pub fn entropy_from_eigenvalues<T: Scalar>(ps: &[T]) -> T {
    ps.iter().fold(T::zero(), |acc, &p| if p > T::zero() { acc - p * p.ln() } else { acc })
}

/// Von Neumann entropy (natural log) of the spin reduced state of a pure
/// state.
pub fn entanglement_entropy(h: HilbertSpec, psi: &[Complex]) -> f64 {
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    let r = spin_reduced_pure(h, psi);
    let (a, d) = (r[0][0].re / norm, r[1][1].re / norm);
    let b = r[0][1].norm() / norm;
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    entropy_from_eigenvalues(&[(mean + disc).clamp(0.0, 1.0), (mean - disc).clamp(0.0, 1.0)])
}

/// Same entropy from the boson reduced state.
pub fn entanglement_entropy_boson(h: HilbertSpec, psi: &[Complex]) -> Result<f64> {
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    let nb = h.n_boson_levels;
    let rb = faer::Mat::from_fn(nb, nb, |m, n| {
        (0..2).map(|s| psi[h.index(s, m)] * psi[h.index(s, n)].conj()).sum::<Complex>() / norm
    });
    let ev = linalg::eigvalsh(rb.as_ref())?;
    Ok(entropy_from_eigenvalues(&ev))
}

pub fn entropy_along_branch(h: HilbertSpec, branch: &TrackedBranch) -> Vec<f64> {
    branch.states.iter().map(|psi| entanglement_entropy(h, psi)).collect()
}

/// Entropy of sector-local level `index` of `sector` at parameter `x`.
pub fn level_entropy(
    template: &ModelSpec,
    axis: ModelAxis,
    sector: Sector,
    index: usize,
    x: f64,
) -> Result<f64> {
    let s = spectrum_at(template, axis, x)?;
    let lv = s.sector_levels(sector);
    let k = *lv.get(index).ok_or_else(|| Error::InvalidSpec(format!("sector level {index} out of range")))?;
    Ok(entanglement_entropy(template.hilbert, &s.state(k)))
}

/// Location and value of the entropy maximum of a sector level within
/// `[a, b]`.
pub fn level_entropy_maximum(
    template: &ModelSpec,
    axis: ModelAxis,
    sector: Sector,
    index: usize,
    a: f64,
    b: f64,
    tolerance: f64,
) -> (f64, f64) {
    let (x, neg) = golden_section(
        |x| -level_entropy(template, axis, sector, index, x).unwrap_or(0.0),
        a,
        b,
        tolerance,
    );
    (x, -neg)
}
