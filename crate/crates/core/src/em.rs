//! EM driver shared by every emission family.
//!
//! Each run alternates a forward–backward E-step with the transition update
//! and the family's emission update, monitoring `ℓ_n(θ) - λ Σ_j I(f_j)`
//! (plain `ℓ_n` when no penalty applies). Several runs are started and the
//! best final objective wins.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics::emission_profile;
use crate::discrete::{
    self, m_step_negbin, m_step_np, m_step_regularized, negbin_weighted_ll, penalty_value, weighted_counts,
    DiscreteEmissionTable, NegBinEmission, NegBinParams, PenaltySpec,
};
use crate::error::{Error, Result};
use crate::hmm::{forward_backward, PosteriorSet, TransitionModel};
use crate::kernel::{
    bandwidth_cv, cross_kernel_matrix, default_bandwidth_grid, gem_emission_m_step, KernelEmission, KernelId,
    KernelMatrix,
};
use crate::mixture::{
    e_step_extended, m_step_expfam, m_step_psi, make_zero_inflated, sufficient_stats, Component,
    ExtendedPosteriorSet, MixtureEmission,
};
use crate::model::{EmissionModel, Hmm};
use crate::obs::ObservationSequence;

/// Share of the pooled empirical law blended into each quantile band so
/// that every state starts with full support.
const BAND_BLEND: f64 = 0.05;
const INIT_DIAGONAL: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    Quantile,
    RandomPerturb,
}

/// Dictionary used by mixture emissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentFamily {
    Poisson,
    Gaussian,
    Binomial { trials: u64 },
    Triangular,
    /// `k` Poisson components plus a point mass at zero.
    ZeroInflatedPoisson,
}

impl ComponentFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ComponentFamily::Poisson => "poisson",
            ComponentFamily::Gaussian => "gaussian",
            ComponentFamily::Binomial { .. } => "binomial",
            ComponentFamily::Triangular => "triangular",
            ComponentFamily::ZeroInflatedPoisson => "zero-inflated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Leave-one-out selection over the given grid, or the default grid.
    CrossValidated(Option<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmissionFamily {
    NonParametric { y_max: Option<u64> },
    Regularized { penalty: PenaltySpec, y_max: Option<u64> },
    NegBin,
    Mixture { components: usize, family: ComponentFamily },
    Kernel { kernel: KernelId, bandwidth: Bandwidth, inner_iters: usize, stride: usize },
}

impl EmissionFamily {
    pub fn name(&self) -> &'static str {
        match self {
            EmissionFamily::NonParametric { .. } => "np",
            EmissionFamily::Regularized { .. } => "np-reg",
            EmissionFamily::NegBin => "nb",
            EmissionFamily::Mixture { .. } => "mixture",
            EmissionFamily::Kernel { .. } => "kernel",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            EmissionFamily::Regularized { penalty, .. } => Some(penalty.lambda()),
            _ => None,
        }
    }

    fn is_discrete(&self) -> bool {
        matches!(self, EmissionFamily::NonParametric { .. } | EmissionFamily::Regularized { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative objective improvement below which a run stops.
    pub tol: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub family: EmissionFamily,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-6,
            n_starts: 5,
            seed: 0,
            family: EmissionFamily::NonParametric { y_max: None },
        }
    }
}

impl FitOptions {
    pub fn with_family(family: EmissionFamily) -> Self {
        Self { family, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be > 0".into()));
        }
        if self.n_starts == 0 {
            return Err(Error::InvalidInput("n_starts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: Hmm,
    /// Monitored objective of every evaluated model, initial model first.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    /// Number of M-steps performed.
    pub iterations: usize,
    pub best_start_index: usize,
    /// Unpenalized log-likelihood of the returned model.
    pub log_likelihood: f64,
}

/// SplitMix64 finalizer; used to derive independent per-start and
/// per-replicate seeds from one master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Transition update from summed pair posteriors. The initial law is reset
/// to the first posterior row.
pub fn m_step_transition(post: &PosteriorSet) -> Result<TransitionModel> {
    let k = post.k();
    let n = post.n();
    let tau = post.tau();
    let init: Vec<f64> = {
        let row: Vec<f64> = tau.row(0).iter().copied().collect();
        let s: f64 = row.iter().sum();
        row.into_iter().map(|v| v / s).collect()
    };
    if n < 2 {
        return TransitionModel::new(DMatrix::identity(k, k), init);
    }
    let mut q = post.pair_sum();
    for a in 0..k {
        let occupancy: f64 = (0..n - 1).map(|i| tau[(i, a)]).sum();
        if occupancy < 1e-12 {
            return Err(Error::EmptyState { state: a });
        }
        let total: f64 = q.row(a).sum();
        q.row_mut(a).scale_mut(1.0 / total);
    }
    TransitionModel::new(q, init)
}

/// Best permutation `perm` (candidate label `c` ↦ reference label
/// `perm[c]`) maximizing position-wise agreement of two paths.
pub fn align_paths(reference: &[usize], candidate: &[usize], k: usize) -> Result<Vec<usize>> {
    if reference.len() != candidate.len() {
        return Err(Error::LengthMismatch { left: reference.len(), right: candidate.len() });
    }
    if k > 10 {
        return Err(Error::KTooLarge { k });
    }
    if let Some(&bad) = reference.iter().chain(candidate).find(|&&s| s >= k) {
        return Err(Error::InvalidInput(format!("state label {bad} out of range for k={k}")));
    }
    let mut confusion = vec![0usize; k * k];
    for (&r, &c) in reference.iter().zip(candidate) {
        confusion[c * k + r] += 1;
    }
    Ok(best_permutation(k, |perm| perm.iter().enumerate().map(|(c, &r)| confusion[c * k + r] as f64).sum()))
}

/// Best permutation minimizing the summed total-variation distance between
/// matched emission rows. Rows are densities on a shared grid with cell
/// volume `cell`.
pub fn align_emission_rows(reference: &DMatrix<f64>, candidate: &DMatrix<f64>, cell: f64) -> Result<Vec<usize>> {
    let k = reference.nrows();
    if candidate.shape() != reference.shape() {
        return Err(Error::DimensionMismatch("emission profiles differ in shape".into()));
    }
    if k > 10 {
        return Err(Error::KTooLarge { k });
    }
    let tv = |c: usize, r: usize| -> f64 {
        0.5 * cell * (0..reference.ncols()).map(|g| (candidate[(c, g)] - reference[(r, g)]).abs()).sum::<f64>()
    };
    let cost: Vec<f64> = (0..k * k).map(|idx| tv(idx / k, idx % k)).collect();
    Ok(best_permutation(k, |perm| -perm.iter().enumerate().map(|(c, &r)| cost[c * k + r]).sum::<f64>()))
}

/// Aligns two models of the same family through their emission laws.
pub fn align_models(reference: &Hmm, candidate: &Hmm) -> Result<Vec<usize>> {
    if reference.k() != candidate.k() {
        return Err(Error::DimensionMismatch("models differ in state count".into()));
    }
    let a = emission_profile(reference.emission(), 1);
    let b = emission_profile(candidate.emission(), 1);
    // Evaluate both on the union grid of the reference profile.
    let b_on_a = a.evaluate(candidate.emission());
    if b_on_a.shape() != a.values.shape() {
        return align_emission_rows(&a.values, &b.values, a.cell);
    }
    align_emission_rows(&a.values, &b_on_a, a.cell)
}

/// Inverse of an alignment: `order[r]` is the candidate state matched to
/// reference state `r`, suitable for `reordered`.
pub fn alignment_order(perm: &[usize]) -> Vec<usize> {
    let mut order = vec![0; perm.len()];
    for (c, &r) in perm.iter().enumerate() {
        order[r] = c;
    }
    order
}

fn best_permutation(k: usize, score: impl Fn(&[usize]) -> f64) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..k).permutations(k) {
        let s = score(&perm);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

/// Data-dependent state shared by every start of one fit.
struct FitContext<'a> {
    obs: &'a ObservationSequence,
    k: usize,
    family: EmissionFamily,
    y_max: u64,
    kernel: Option<KernelSetup>,
}

struct KernelSetup {
    dim: usize,
    anchors: Vec<f64>,
    bandwidth: f64,
    kernel: KernelId,
    inner_iters: usize,
    matrix: KernelMatrix,
}

enum EStep {
    Plain(PosteriorSet),
    Extended(ExtendedPosteriorSet, PosteriorSet),
}

impl EStep {
    fn post(&self) -> &PosteriorSet {
        match self {
            EStep::Plain(p) | EStep::Extended(_, p) => p,
        }
    }
}

impl<'a> FitContext<'a> {
    fn new(obs: &'a ObservationSequence, k: usize, family: &EmissionFamily) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be >= 1".into()));
        }
        let needs_counts = match family {
            EmissionFamily::NonParametric { .. } | EmissionFamily::Regularized { .. } | EmissionFamily::NegBin => true,
            EmissionFamily::Mixture { family, .. } => *family != ComponentFamily::Gaussian,
            EmissionFamily::Kernel { .. } => false,
        };
        let counts = obs.as_counts();
        if needs_counts && counts.is_none() {
            return Err(Error::IncompatibleFamily(format!("{} emissions require count data", family.name())));
        }
        let observed_max = counts.map(|c| c.iter().copied().max().unwrap_or(0)).unwrap_or(0);
        let y_max = match family {
            EmissionFamily::NonParametric { y_max: Some(m) } | EmissionFamily::Regularized { y_max: Some(m), .. } => *m,
            _ => observed_max,
        };
        if family.is_discrete() {
            let distinct = counts.unwrap().iter().filter(|&&y| y <= y_max).unique().count();
            if distinct < k {
                return Err(Error::DegenerateData(format!("{distinct} distinct values for {k} states")));
            }
        }
        if let EmissionFamily::Mixture { components, family: cf } = family {
            let m = if *cf == ComponentFamily::ZeroInflatedPoisson { k + 1 } else { *components };
            if m < k {
                return Err(Error::InvalidInput(format!("need at least k={k} mixture components, got {m}")));
            }
        }
        let kernel = match family {
            EmissionFamily::Kernel { kernel, bandwidth, inner_iters, stride } => {
                if *inner_iters == 0 || *stride == 0 {
                    return Err(Error::InvalidInput("inner_iters and stride must be >= 1".into()));
                }
                let w = match bandwidth {
                    Bandwidth::Fixed(w) => *w,
                    Bandwidth::CrossValidated(grid) => {
                        let grid = grid.clone().unwrap_or_else(|| default_bandwidth_grid(obs));
                        bandwidth_cv(obs, *kernel, &grid)?
                    }
                };
                if !(w > 0.0) {
                    return Err(Error::InvalidInput(format!("bandwidth must be > 0, got {w}")));
                }
                let (dim, x) = obs.to_real_rows();
                let anchors: Vec<f64> = x.chunks(dim).step_by(*stride).flatten().copied().collect();
                if anchors.len() / dim < k {
                    return Err(Error::DegenerateData("fewer anchors than states".into()));
                }
                let matrix = cross_kernel_matrix(dim, &x, &anchors, *kernel, w);
                Some(KernelSetup { dim, anchors, bandwidth: w, kernel: *kernel, inner_iters: *inner_iters, matrix })
            }
            _ => None,
        };
        Ok(Self { obs, k, family: family.clone(), y_max, kernel })
    }

    fn counts(&self) -> &[u64] {
        self.obs.as_counts().expect("checked at construction")
    }

    fn e_step(&self, model: &Hmm) -> Result<EStep> {
        match model.emission() {
            EmissionModel::Mixture(mix) => {
                let (ext, post) = e_step_extended(model.transition(), mix, self.obs)?;
                Ok(EStep::Extended(ext, post))
            }
            EmissionModel::Kernel(ke) => {
                let setup = self.kernel.as_ref().expect("kernel context");
                let dens = ke.log_densities_from_matrix(&setup.matrix);
                Ok(EStep::Plain(forward_backward(model.transition(), &dens)?))
            }
            em => Ok(EStep::Plain(forward_backward(model.transition(), &em.log_densities(self.obs)?)?)),
        }
    }

    fn penalty(&self, model: &Hmm) -> f64 {
        match (&self.family, model.emission()) {
            (EmissionFamily::Regularized { penalty, .. }, EmissionModel::Discrete(t)) if penalty.lambda() > 0.0 => {
                penalty.lambda() * (0..t.k()).map(|j| penalty_value(&t.row(j), penalty)).sum::<f64>()
            }
            _ => 0.0,
        }
    }

    fn m_step(&self, model: &Hmm, estep: &EStep) -> Result<Hmm> {
        let post = estep.post();
        let transition = m_step_transition(post)?;
        let tau = post.tau();
        let emission = match (model.emission(), estep) {
            (EmissionModel::Discrete(_), _) => {
                let counts = self.counts();
                let mut rows = Vec::with_capacity(self.k);
                for j in 0..self.k {
                    let s = weighted_counts(counts, tau.column(j).iter().copied(), self.y_max);
                    let row = match &self.family {
                        EmissionFamily::Regularized { penalty, .. } => m_step_regularized(&s, penalty),
                        _ => m_step_np(&s),
                    };
                    rows.push(row.map_err(|_| Error::EmptyState { state: j })?);
                }
                EmissionModel::Discrete(DiscreteEmissionTable::from_rows(&rows)?)
            }
            (EmissionModel::NegBin(nb), _) => {
                let counts = self.counts();
                let mut params = Vec::with_capacity(self.k);
                for j in 0..self.k {
                    let w: Vec<f64> = tau.column(j).iter().copied().collect();
                    let fitted = match m_step_negbin(counts, &w) {
                        Ok(p) => p,
                        Err(Error::Underdispersed { mean, .. }) => NegBinParams::near_poisson(mean),
                        Err(Error::ZeroWeight) => return Err(Error::EmptyState { state: j }),
                        Err(e) => return Err(e),
                    };
                    // Keep the current parameters if the numerical search
                    // did not improve the weighted likelihood.
                    let current = nb.params()[j];
                    let better = negbin_weighted_ll(&fitted, counts, &w) >= negbin_weighted_ll(&current, counts, &w);
                    params.push(if better { fitted } else { current });
                }
                EmissionModel::NegBin(NegBinEmission::new(params)?)
            }
            (EmissionModel::Mixture(mix), EStep::Extended(ext, _)) => {
                let psi = m_step_psi(ext, tau)?;
                let xi = ext.xi();
                let mut components = Vec::with_capacity(mix.m());
                for (l, comp) in mix.components().iter().enumerate() {
                    let w: Vec<f64> = xi.column(l).iter().copied().collect();
                    let stats = sufficient_stats(self.obs, &w);
                    components.push(match m_step_expfam(comp, &stats) {
                        Ok(up) => up.component,
                        Err(Error::ZeroWeight) => comp.clone(),
                        Err(e) => return Err(e),
                    });
                }
                EmissionModel::Mixture(mix.with_parts(psi, components))
            }
            (EmissionModel::Kernel(ke), _) => {
                let setup = self.kernel.as_ref().expect("kernel context");
                let p = gem_emission_m_step(ke.weights(), tau, &setup.matrix, setup.inner_iters)?;
                EmissionModel::Kernel(ke.with_weights(p))
            }
            (EmissionModel::Mixture(_), EStep::Plain(_)) => unreachable!("mixture E-step is always extended"),
        };
        Hmm::new(transition, emission)
    }

    fn initial_model(&self, strategy: InitStrategy, seed: u64) -> Result<Hmm> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perturb = strategy == InitStrategy::RandomPerturb;
        let mut noise = move |rng: &mut ChaCha8Rng| if perturb { rng.random_range(0.5..1.5) } else { 1.0 };
        let k = self.k;
        let n = self.obs.len();
        let order = sorted_order(self.obs);
        let bands = band_slices(&order, k);

        let emission = match &self.family {
            EmissionFamily::NonParametric { .. } | EmissionFamily::Regularized { .. } => {
                let counts = self.counts();
                let pooled = weighted_counts(counts, std::iter::repeat(1.0 / n as f64), self.y_max);
                let mut rows = Vec::with_capacity(k);
                for band in &bands {
                    let mut s = vec![0.0; self.y_max as usize + 1];
                    for &i in band.iter() {
                        if counts[i] <= self.y_max {
                            s[counts[i] as usize] += 1.0 / band.len() as f64;
                        }
                    }
                    let mut row: Vec<f64> = s
                        .iter()
                        .zip(&pooled)
                        .map(|(b, p)| ((1.0 - BAND_BLEND) * b + BAND_BLEND * p) * noise(&mut rng))
                        .collect();
                    let total: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= total);
                    rows.push(row);
                }
                EmissionModel::Discrete(DiscreteEmissionTable::from_rows(&rows)?)
            }
            EmissionFamily::NegBin => {
                let counts = self.counts();
                let mut params = Vec::with_capacity(k);
                for band in &bands {
                    let y: Vec<u64> = band.iter().map(|&i| counts[i]).collect();
                    let w = vec![1.0; y.len()];
                    let p = match m_step_negbin(&y, &w) {
                        Ok(p) => p,
                        Err(Error::Underdispersed { mean, .. }) => NegBinParams::near_poisson(mean),
                        Err(e) => return Err(e),
                    };
                    let mean = (p.mean() * noise(&mut rng)).max(1e-3);
                    let r = (p.r * noise(&mut rng)).clamp(discrete::NEGBIN_R_MIN, discrete::NEGBIN_R_MAX);
                    params.push(NegBinParams::from_mean(r, mean)?);
                }
                EmissionModel::NegBin(NegBinEmission::new(params)?)
            }
            EmissionFamily::Mixture { components, family } => {
                EmissionModel::Mixture(self.initial_mixture(*components, *family, &order, &bands, &mut rng, &mut noise)?)
            }
            EmissionFamily::Kernel { .. } => {
                let setup = self.kernel.as_ref().expect("kernel context");
                let na = setup.anchors.len() / setup.dim;
                let mut anchor_order: Vec<usize> = (0..na).collect();
                anchor_order.sort_by(|&a, &b| setup.anchors[a * setup.dim].total_cmp(&setup.anchors[b * setup.dim]));
                let anchor_bands = band_slices(&anchor_order, k);
                let mut p = DMatrix::zeros(na, k);
                for (j, band) in anchor_bands.iter().enumerate() {
                    for u in 0..na {
                        p[(u, j)] = BAND_BLEND / na as f64;
                    }
                    for &u in band.iter() {
                        p[(u, j)] += (1.0 - BAND_BLEND) / band.len() as f64;
                    }
                    for u in 0..na {
                        p[(u, j)] *= noise(&mut rng);
                    }
                    let total = p.column(j).sum();
                    p.column_mut(j).scale_mut(1.0 / total);
                }
                EmissionModel::Kernel(KernelEmission::new(
                    setup.dim,
                    setup.anchors.clone(),
                    setup.bandwidth,
                    setup.kernel,
                    p,
                )?)
            }
        };
        Hmm::new(initial_transition(k)?, emission)
    }

    fn initial_mixture(
        &self,
        m: usize,
        family: ComponentFamily,
        order: &[usize],
        bands: &[&[usize]],
        rng: &mut ChaCha8Rng,
        noise: &mut impl FnMut(&mut ChaCha8Rng) -> f64,
    ) -> Result<MixtureEmission> {
        let k = self.k;
        let obs = self.obs;
        let band_mean = |band: &[usize]| band.iter().map(|&i| obs.sort_key(i)).sum::<f64>() / band.len() as f64;

        if family == ComponentFamily::ZeroInflatedPoisson {
            let mut q = Vec::with_capacity(k);
            let mut base = Vec::with_capacity(k);
            for band in bands {
                let rate = band_mean(band).max(0.05) * noise(rng);
                let zero_frac = band.iter().filter(|&&i| obs.sort_key(i) == 0.0).count() as f64 / band.len() as f64;
                q.push(((zero_frac - (-rate).exp()) * noise(rng)).clamp(0.02, 0.9));
                base.push(Component::Poisson { rate });
            }
            return make_zero_inflated(&q, base);
        }

        let comp_bands = band_slices(order, m);
        let components: Vec<Component> = match family {
            ComponentFamily::Poisson => comp_bands
                .iter()
                .enumerate()
                .map(|(l, b)| Component::Poisson { rate: (band_mean(b) + 1e-3 * l as f64).max(0.05) * noise(rng) })
                .collect(),
            ComponentFamily::Binomial { trials } => comp_bands
                .iter()
                .map(|b| Component::Binomial {
                    trials,
                    p: (band_mean(b) / trials as f64 * noise(rng)).clamp(1e-3, 1.0 - 1e-3),
                })
                .collect(),
            ComponentFamily::Gaussian => {
                let d = obs.dim();
                let mut total_var = 0.0;
                let (_, x) = obs.to_real_rows();
                let n = obs.len();
                for c in 0..d {
                    let mu = (0..n).map(|i| x[i * d + c]).sum::<f64>() / n as f64;
                    total_var += (0..n).map(|i| (x[i * d + c] - mu).powi(2)).sum::<f64>() / n as f64;
                }
                let var_floor = (total_var / d as f64 * 1e-3).max(1e-6);
                comp_bands
                    .iter()
                    .map(|b| {
                        let mean: Vec<f64> =
                            (0..d).map(|c| b.iter().map(|&i| x[i * d + c]).sum::<f64>() / b.len() as f64).collect();
                        let var: Vec<f64> = (0..d)
                            .map(|c| {
                                let v = b.iter().map(|&i| (x[i * d + c] - mean[c]).powi(2)).sum::<f64>() / b.len() as f64;
                                v.max(var_floor) * noise(rng)
                            })
                            .collect();
                        Component::Gaussian { mean, var }
                    })
                    .collect()
            }
            ComponentFamily::Triangular => triangular_sizes(self.y_max, m)
                .into_iter()
                .map(|size| Component::Triangular { size })
                .collect(),
            ComponentFamily::ZeroInflatedPoisson => unreachable!(),
        };
        let mut psi = DMatrix::zeros(k, m);
        for j in 0..k {
            for l in 0..m {
                let owner = l * k / m;
                let base = if owner == j { (1.0 - BAND_BLEND) * k as f64 / m as f64 } else { 0.0 };
                psi[(j, l)] = (base + BAND_BLEND / m as f64) * noise(rng);
            }
            let total = psi.row(j).sum();
            psi.row_mut(j).scale_mut(1.0 / total);
        }
        MixtureEmission::new(psi, components)
    }
}

/// Distinct triangular sizes from 1 up to at least `y_max + 1`, roughly
/// geometrically spaced.
pub fn triangular_sizes(y_max: u64, m: usize) -> Vec<u64> {
    let top = (y_max + 1).max(m as u64) as f64;
    let mut sizes = Vec::with_capacity(m);
    for l in 0..m {
        let target = if m == 1 { top } else { top.powf(l as f64 / (m - 1) as f64) };
        let prev = sizes.last().copied().unwrap_or(0);
        sizes.push((target.round() as u64).max(prev + 1));
    }
    sizes
}

fn initial_transition(k: usize) -> Result<TransitionModel> {
    let q = if k == 1 {
        DMatrix::from_element(1, 1, 1.0)
    } else {
        let off = (1.0 - INIT_DIAGONAL) / (k - 1) as f64;
        DMatrix::from_fn(k, k, |a, b| if a == b { INIT_DIAGONAL } else { off })
    };
    TransitionModel::new(q, vec![1.0 / k as f64; k])
}

fn sorted_order(obs: &ObservationSequence) -> Vec<usize> {
    let mut order: Vec<usize> = (0..obs.len()).collect();
    order.sort_by(|&a, &b| obs.sort_key(a).total_cmp(&obs.sort_key(b)));
    order
}

/// Splits a sorted index list into `parts` contiguous bands of near-equal size.
fn band_slices(order: &[usize], parts: usize) -> Vec<&[usize]> {
    let n = order.len();
    (0..parts)
        .map(|j| {
            let lo = j * n / parts;
            let hi = ((j + 1) * n / parts).max(lo + 1).min(n);
            &order[lo.min(n - 1)..hi]
        })
        .collect()
}

/// Starting model for one run.
pub fn initialize(
    obs: &ObservationSequence,
    k: usize,
    family: &EmissionFamily,
    strategy: InitStrategy,
    seed: u64,
) -> Result<Hmm> {
    FitContext::new(obs, k, family)?.initial_model(strategy, seed)
}

struct RunResult {
    model: Hmm,
    trace: Vec<f64>,
    converged: bool,
    iterations: usize,
    log_lik: f64,
}

fn run_em(ctx: &FitContext<'_>, mut model: Hmm, opts: &FitOptions) -> Result<RunResult> {
    let mut estep = ctx.e_step(&model)?;
    let mut trace = vec![estep.post().log_lik() - ctx.penalty(&model)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = ctx.m_step(&model, &estep)?;
        let next_e = ctx.e_step(&next)?;
        let obj = next_e.post().log_lik() - ctx.penalty(&next);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        model = next;
        estep = next_e;
        iterations += 1;
        if (obj - prev) / prev.abs().max(f64::MIN_POSITIVE) < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(RunResult { log_lik: estep.post().log_lik(), model, trace, converged, iterations })
}

/// Runs one EM from an explicit starting model; useful for tracing ascent.
pub fn fit_from(obs: &ObservationSequence, start: Hmm, opts: &FitOptions) -> Result<FitReport> {
    opts.validate()?;
    let ctx = FitContext::new(obs, start.k(), &opts.family)?;
    let run = run_em(&ctx, start, opts)?;
    Ok(FitReport {
        model: run.model,
        objective_trace: run.trace,
        converged: run.converged,
        iterations: run.iterations,
        best_start_index: 0,
        log_likelihood: run.log_lik,
    })
}

/// Fits a `k`-state HMM, keeping the best of `n_starts` runs. Start 0 uses
/// quantile initialization, the others random perturbations of it.
pub fn fit(obs: &ObservationSequence, k: usize, opts: &FitOptions) -> Result<FitReport> {
    opts.validate()?;
    let n = obs.len();
    if n < 3 {
        return Err(Error::SequenceTooShort { n, min: 3 });
    }
    let ctx = FitContext::new(obs, k, &opts.family)?;
    let runs: Vec<Result<RunResult>> = (0..opts.n_starts)
        .into_par_iter()
        .map(|s| {
            let strategy = if s == 0 { InitStrategy::Quantile } else { InitStrategy::RandomPerturb };
            let start = ctx.initial_model(strategy, derive_seed(opts.seed, s as u64))?;
            run_em(&ctx, start, opts)
        })
        .collect();

    let mut best: Option<(usize, RunResult)> = None;
    let mut last_err = None;
    for (s, run) in runs.into_iter().enumerate() {
        match run {
            Ok(r) => {
                let obj = *r.trace.last().unwrap();
                if best.as_ref().is_none_or(|(_, b)| obj > *b.trace.last().unwrap()) {
                    best = Some((s, r));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((s, r)) => Ok(FitReport {
            model: r.model,
            objective_trace: r.trace,
            converged: r.converged,
            iterations: r.iterations,
            best_start_index: s,
            log_likelihood: r.log_lik,
        }),
        None => Err(Error::FitFailed {
            starts: opts.n_starts,
            last: Box::new(last_err.unwrap_or(Error::ZeroWeight)),
        }),
    }
}
