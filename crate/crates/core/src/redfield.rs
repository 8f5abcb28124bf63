//! Born–Markov (Redfield) generator for independent Ohmic baths, in the
//! energy eigenbasis, with an optional secular filter.
//!
//! For a bath coupled through `S` with transition kernel
//! `K[o][m] = G(E_o − E_m)` (rate factor for a jump from `o` down or up to
//! `m`), the dissipative part is
//!
//! `R_mn,op = S_mo S_pn (K[o][m] + K[p][n]) − δ_np A_mo − δ_mo conj(A_np)`
//!
//! with `A_xy = Σ_q S_xq S_qy K[y][q]`, and `dρ_mn/dt = −i ε_mn ρ_mn +
//! Σ_op R_mn,op ρ_op`.

use faer::Mat;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::lindblad::{check_time_grid, SteadyState, GAP_RATIO_THRESHOLD, TRACE_DRIFT_TOLERANCE};
use crate::model::{Eigensystem, Primitives};
use crate::state::DensityMatrix;
use crate::{linalg, markov, Complex, Operator};

/// Transition frequencies closer than this are treated as equal by the
/// secular filter.
pub const SECULAR_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
struct BathKernel {
    s: Operator,
    k: Vec<Vec<f64>>,
    a: Operator,
}

impl BathKernel {
    fn new(eig: &Eigensystem, bath: &BathSpec, p: &Primitives) -> Self {
        let d = eig.dim();
        let s = eig.to_eigenbasis(&bath.coupling.matrix(p));
        let e = &eig.energies;
        let k: Vec<Vec<f64>> =
            (0..d).map(|o| (0..d).map(|m| bath.rate(e[o] - e[m])).collect()).collect();
        let a = Mat::from_fn(d, d, |x, y| {
            let mut acc = Complex::new(0.0, 0.0);
            for q in 0..d {
                acc += s[(x, q)] * s[(q, y)] * k[y][q];
            }
            acc
        });
        Self { s, k, a }
    }

    #[inline]
    fn element(&self, m: usize, n: usize, o: usize, p: usize) -> Complex {
        let mut r = self.s[(m, o)] * self.s[(p, n)] * (self.k[o][m] + self.k[p][n]);
        if n == p {
            r -= self.a[(m, o)];
        }
        if m == o {
            r -= self.a[(n, p)].conj();
        }
        r
    }
}

/// Invariant subspace of the generator over column-stacked eigenbasis
/// indices `n·d + m`.
#[derive(Clone, Debug)]
struct Block {
    indices: Vec<usize>,
    generator: Mat<Complex>,
    dissipator_norm: f64,
}

#[derive(Clone, Debug)]
pub struct RedfieldTensor {
    pub eig: Eigensystem,
    pub secular: bool,
    baths: Vec<BathKernel>,
    blocks: Vec<Block>,
}

pub fn build_redfield_tensor(
    eig: &Eigensystem,
    baths: &[BathSpec],
    primitives: &Primitives,
    secular: bool,
) -> Result<RedfieldTensor> {
    let d = eig.dim();
    if primitives.identity.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: primitives.identity.nrows() });
    }
    for b in baths {
        b.validate()?;
    }
    let kernels: Vec<BathKernel> = baths.iter().map(|b| BathKernel::new(eig, b, primitives)).collect();
    let mut t = RedfieldTensor { eig: eig.clone(), secular, baths: kernels, blocks: Vec::new() };
    t.blocks = t.assemble_blocks();
    Ok(t)
}

impl RedfieldTensor {
    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn n_baths(&self) -> usize {
        self.baths.len()
    }

    fn frequency(&self, m: usize, n: usize) -> f64 {
        self.eig.energies[m] - self.eig.energies[n]
    }

    /// Whether the secular filter keeps the coupling `(m,n) ← (o,p)`.
    pub fn is_kept(&self, m: usize, n: usize, o: usize, p: usize) -> bool {
        !self.secular
            || (self.frequency(m, n) - self.frequency(o, p)).abs() < SECULAR_TOLERANCE
    }

    /// `R_mn,op` for one bath, or summed over baths when `bath` is `None`.
    /// Entries removed by the secular filter are zero.
    pub fn element(&self, bath: Option<usize>, m: usize, n: usize, o: usize, p: usize) -> Complex {
        if !self.is_kept(m, n, o, p) {
            return Complex::new(0.0, 0.0);
        }
        match bath {
            Some(y) => self.baths[y].element(m, n, o, p),
            None => self.baths.iter().map(|b| b.element(m, n, o, p)).sum(),
        }
    }

    fn assemble_blocks(&self) -> Vec<Block> {
        let d = self.dim();
        let dd = d * d;
        let split = |k: usize| (k % d, k / d);

        // Frequency clusters; a single cluster without the secular filter.
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        if self.secular {
            let mut order: Vec<usize> = (0..dd).collect();
            order.sort_by(|&x, &y| {
                let (mx, nx) = split(x);
                let (my, ny) = split(y);
                self.frequency(mx, nx).total_cmp(&self.frequency(my, ny)).then(x.cmp(&y))
            });
            let mut prev = f64::NEG_INFINITY;
            for k in order {
                let (m, n) = split(k);
                let f = self.frequency(m, n);
                if clusters.is_empty() || f - prev >= SECULAR_TOLERANCE {
                    clusters.push(Vec::new());
                }
                clusters.last_mut().unwrap().push(k);
                prev = f;
            }
        } else {
            clusters.push((0..dd).collect());
        }

        let mut blocks = Vec::new();
        for cluster in clusters {
            for comp in self.components(&cluster) {
                blocks.push(self.fill_block(comp));
            }
        }
        blocks.sort_by_key(|b| b.indices[0]);
        blocks
    }

    /// Connected components of the coupling graph restricted to `cluster`.
    fn components(&self, cluster: &[usize]) -> Vec<Vec<usize>> {
        let d = self.dim();
        let c = cluster.len();
        let mut parent: Vec<usize> = (0..c).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in 0..c {
            let (m, n) = (cluster[a] % d, cluster[a] / d);
            for b in (a + 1)..c {
                let (o, p) = (cluster[b] % d, cluster[b] / d);
                let couples = self.is_kept(m, n, o, p) && self.baths.iter().any(|k| {
                    k.element(m, n, o, p) != Complex::new(0.0, 0.0)
                        || k.element(o, p, m, n) != Complex::new(0.0, 0.0)
                });
                if couples {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for a in 0..c {
            let r = find(&mut parent, a);
            groups.entry(r).or_default().push(cluster[a]);
        }
        groups
            .into_values()
            .map(|mut v| {
                v.sort_unstable();
                v
            })
            .collect()
    }

    fn fill_block(&self, indices: Vec<usize>) -> Block {
        let d = self.dim();
        let c = indices.len();
        let mut generator = Mat::<Complex>::zeros(c, c);
        let mut sq = 0.0;
        for a in 0..c {
            let (m, n) = (indices[a] % d, indices[a] / d);
            for b in 0..c {
                let (o, p) = (indices[b] % d, indices[b] / d);
                if !self.is_kept(m, n, o, p) {
                    continue;
                }
                let r: Complex = self.baths.iter().map(|k| k.element(m, n, o, p)).sum();
                sq += r.norm_sqr();
                generator[(a, b)] = r;
            }
            generator[(a, a)] += Complex::new(0.0, -self.frequency(m, n));
        }
        Block { indices, generator, dissipator_norm: sq.sqrt() }
    }

    /// Dense generator over column-stacked eigenbasis coherences.
    pub fn generator(&self) -> Mat<Complex> {
        let dd = self.dim() * self.dim();
        let mut g = Mat::<Complex>::zeros(dd, dd);
        for b in &self.blocks {
            for (a, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    g[(i, j)] = b.generator[(a, c)];
                }
            }
        }
        g
    }

    /// One bath's dissipative action on an eigenbasis density matrix,
    /// respecting the secular filter.
    pub fn apply_bath(&self, bath: usize, rho_e: &Operator) -> Operator {
        let d = self.dim();
        let mut out = Mat::<Complex>::zeros(d, d);
        let k = &self.baths[bath];
        for b in &self.blocks {
            for &i in &b.indices {
                let (m, n) = (i % d, i / d);
                let mut acc = Complex::new(0.0, 0.0);
                for &j in &b.indices {
                    let (o, p) = (j % d, j / d);
                    let r = rho_e[(o, p)];
                    if r != Complex::new(0.0, 0.0) && self.is_kept(m, n, o, p) {
                        acc += k.element(m, n, o, p) * r;
                    }
                }
                out[(m, n)] = acc;
            }
        }
        out
    }

    /// Population transfer rates `W[m][n]` contributed by one bath.
    pub fn population_rates(&self, bath: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let k = &self.baths[bath];
        markov::rates_from_amplitudes(d, |m, n| k.element(m, m, n, n).re)
    }
}

/// Steady state of the Redfield generator, returned in the product basis.
pub fn redfield_steady_state(t: &RedfieldTensor) -> Result<SteadyState> {
    let d = t.dim();
    let pop = |k: usize| k % d == k / d;
    let owner = t
        .blocks
        .iter()
        .position(|b| b.indices.contains(&0))
        .expect("blocks cover every index");
    for (bi, b) in t.blocks.iter().enumerate() {
        if bi != owner && b.indices.iter().any(|&k| pop(k)) {
            return Err(Error::DegenerateNess { ratio: 1.0, threshold: GAP_RATIO_THRESHOLD });
        }
    }
    let block = &t.blocks[owner];
    let c = block.indices.len();
    let mut rho_e = Mat::<Complex>::zeros(d, d);
    let (residual, gap_ratio);
    if block.indices.iter().all(|&k| pop(k)) {
        let w: Vec<Vec<f64>> =
            (0..c).map(|a| (0..c).map(|b| block.generator[(a, b)].re).collect()).collect();
        let ratio = markov::uniqueness_ratio(&w)?;
        let p = markov::stationary_distribution(&w, GAP_RATIO_THRESHOLD)?;
        for (a, &k) in block.indices.iter().enumerate() {
            rho_e[(k % d, k % d)] = Complex::new(p[a], 0.0);
        }
        residual = (0..c)
            .map(|a| (0..c).map(|b| w[a][b] * p[b]).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        gap_ratio = ratio;
    } else {
        let norm: Vec<(usize, Complex)> = block
            .indices
            .iter()
            .enumerate()
            .filter(|(_, &k)| pop(k))
            .map(|(a, _)| (a, Complex::new(1.0, 0.0)))
            .collect();
        let sol = linalg::normalized_null_vector(
            block.generator.as_ref(),
            &norm,
            0,
            f64::EPSILON * block.dissipator_norm,
            GAP_RATIO_THRESHOLD,
        )?;
        for (a, &k) in block.indices.iter().enumerate() {
            rho_e[(k % d, k / d)] = sol.vector[a];
        }
        residual = sol.residual;
        gap_ratio = sol.gap_ratio;
    }
    let rho = DensityMatrix::new(t.eig.hilbert, t.eig.from_eigenbasis(&rho_e).as_ref())?;
    Ok(SteadyState { rho, residual, gap_ratio })
}

/// States at each time of `t_grid`, starting from `rho0` (product basis) at
/// t = 0.
pub fn redfield_propagate(
    t: &RedfieldTensor,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let d = t.dim();
    if rho0.hilbert() != t.eig.hilbert {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.hilbert().dim() });
    }
    check_time_grid(t_grid)?;
    let mut rho_e = t.eig.to_eigenbasis(&rho0.matrix().to_owned());
    let mut cache: std::collections::HashMap<u64, Vec<Mat<Complex>>> = Default::default();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut t_prev = 0.0;
    for &time in t_grid {
        let dt = time - t_prev;
        if dt > 0.0 {
            if !cache.contains_key(&dt.to_bits()) {
                let mut steps = Vec::with_capacity(t.blocks.len());
                for b in &t.blocks {
                    let a = &b.generator * faer::Scale(Complex::new(dt, 0.0));
                    steps.push(linalg::expm(a.as_ref())?);
                }
                cache.insert(dt.to_bits(), steps);
            }
            let steps = &cache[&dt.to_bits()];
            let mut next = Mat::<Complex>::zeros(d, d);
            for (b, e) in t.blocks.iter().zip(steps) {
                for (a, &i) in b.indices.iter().enumerate() {
                    let mut acc = Complex::new(0.0, 0.0);
                    for (c, &j) in b.indices.iter().enumerate() {
                        acc += e[(a, c)] * rho_e[(j % d, j / d)];
                    }
                    next[(i % d, i / d)] = acc;
                }
            }
            rho_e = next;
            t_prev = time;
        }
        if time == 0.0 {
            out.push(rho0.clone());
            continue;
        }
        let tr = linalg::trace(rho_e.as_ref());
        if !tr.re.is_finite() || (tr - Complex::new(1.0, 0.0)).norm() > TRACE_DRIFT_TOLERANCE {
            return Err(Error::StepFailure(format!("trace drifted to {tr} at t = {time}")));
        }
        rho_e = linalg::hermitize(rho_e.as_ref()) * faer::Scale(Complex::new(1.0 / tr.re, 0.0));
        out.push(DensityMatrix::new(t.eig.hilbert, t.eig.from_eigenbasis(&rho_e).as_ref())?);
    }
    Ok(out)
}
