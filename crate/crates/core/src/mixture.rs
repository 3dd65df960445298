//! Emissions that are finite mixtures over a shared component dictionary,
//! `μ_j = Σ_ℓ ψ_{jℓ} φ_ℓ`.
//!
//! Inference runs on the joint chain of pairs `(X_i, Z_i)`, where `Z_i` is
//! the component label drawn from row `ψ_{X_i}`. Component parameters are
//! global; only `ψ` depends on the state.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hmm::{self, log_sum_exp, LogDensities, PosteriorSet, TransitionModel};
use crate::linalg;
use crate::obs::{ObservationSequence, RowRef};

const VARIANCE_FLOOR: f64 = 1e-8;
const PROB_CLIP: f64 = 1e-8;
const RATE_FLOOR: f64 = 1e-8;

/// One dictionary entry `φ_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Poisson { rate: f64 },
    /// Diagonal Gaussian; `mean` and `var` have the data dimension.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    Binomial { trials: u64, p: f64 },
    DiracAtZero,
    /// Discrete triangular law on `{0, …, size-1}`.
    Triangular { size: u64 },
}

impl Component {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Component::Poisson { rate } => *rate > 0.0 && rate.is_finite(),
            Component::Gaussian { mean, var } => {
                !mean.is_empty()
                    && mean.len() == var.len()
                    && mean.iter().all(|m| m.is_finite())
                    && var.iter().all(|&v| v > 0.0 && v.is_finite())
            }
            Component::Binomial { trials, p } => *trials >= 1 && *p > 0.0 && *p < 1.0,
            Component::DiracAtZero => true,
            Component::Triangular { size } => *size >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("component parameters out of domain: {self:?}")))
        }
    }

    pub fn is_count(&self) -> bool {
        !matches!(self, Component::Gaussian { .. })
    }

    /// Log density at `y` (counting measure for count components, Lebesgue
    /// for Gaussian); `-inf` outside the support.
    pub fn ln_density(&self, y: RowRef<'_>) -> f64 {
        if let Component::Gaussian { mean, var } = self {
            return mean
                .iter()
                .zip(var)
                .enumerate()
                .map(|(d, (m, v))| -0.5 * (2.0 * PI * v).ln() - (y.coord(d) - m).powi(2) / (2.0 * v))
                .sum();
        }
        let x = y.coord(0);
        if x < 0.0 || x.fract() != 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            Component::Poisson { rate } => x * rate.ln() - rate - ln_gamma(x + 1.0),
            Component::Binomial { trials, p } => {
                let n = *trials as f64;
                if x > n {
                    return f64::NEG_INFINITY;
                }
                ln_gamma(n + 1.0) - ln_gamma(x + 1.0) - ln_gamma(n - x + 1.0) + x * p.ln() + (n - x) * (-p).ln_1p()
            }
            Component::DiracAtZero => {
                if x == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Component::Triangular { size } => {
                let l = *size as f64;
                if x >= l {
                    f64::NEG_INFINITY
                } else {
                    (2.0 * (l - x) / (l * (l + 1.0))).ln()
                }
            }
            Component::Gaussian { .. } => unreachable!(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Component::Poisson { rate } => vec![Poisson::new(*rate).map(|d| d.sample(rng)).unwrap_or(0.0)],
            Component::Gaussian { mean, var } => mean
                .iter()
                .zip(var)
                .map(|(&m, &v)| Normal::new(m, v.sqrt()).expect("validated variance").sample(rng))
                .collect(),
            Component::Binomial { trials, p } => {
                vec![Binomial::new(*trials, *p).expect("validated probability").sample(rng) as f64]
            }
            Component::DiracAtZero => vec![0.0],
            Component::Triangular { size } => {
                let pmf = triangular_component(*size);
                vec![sample_index(&pmf, rng) as f64]
            }
        }
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// `T_ℓ(y) = 2(ℓ - y) / (ℓ(ℓ + 1))` on `{0, …, ℓ-1}`.
pub fn triangular_component(size: u64) -> Vec<f64> {
    let l = size as f64;
    (0..size).map(|y| 2.0 * (l - y as f64) / (l * (l + 1.0))).collect()
}

/// State-specific proportions over a shared component dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureEmission {
    psi: DMatrix<f64>,
    components: Vec<Component>,
}

impl MixtureEmission {
    pub fn new(psi: DMatrix<f64>, components: Vec<Component>) -> Result<Self> {
        let (k, m) = psi.shape();
        if k == 0 || m != components.len() {
            return Err(Error::DimensionMismatch(format!(
                "psi is {k}x{m} but {} components were given",
                components.len()
            )));
        }
        if m < k {
            return Err(Error::InvalidModel(format!("need at least k={k} components, got {m}")));
        }
        for j in 0..k {
            let row: Vec<f64> = psi.row(j).iter().copied().collect();
            hmm::check_probability_vector(&row, &format!("psi row {j}"))
                .map_err(|_| Error::InvalidModel(format!("psi row {j} is not a probability vector")))?;
        }
        for c in &components {
            c.validate()?;
        }
        let gaussian_dims: Vec<usize> = components
            .iter()
            .filter_map(|c| match c {
                Component::Gaussian { mean, .. } => Some(mean.len()),
                _ => None,
            })
            .collect();
        if gaussian_dims.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::DimensionMismatch("Gaussian components differ in dimension".into()));
        }
        if !gaussian_dims.is_empty() && components.iter().any(Component::is_count) {
            return Err(Error::InvalidModel("cannot mix Gaussian and count components".into()));
        }
        check_binomial_guard(&components)?;
        Ok(Self { psi, components })
    }

    pub fn k(&self) -> usize {
        self.psi.nrows()
    }

    pub fn m(&self) -> usize {
        self.psi.ncols()
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_count(&self) -> bool {
        self.components.iter().all(Component::is_count)
    }

    pub fn check_compatible(&self, obs: &ObservationSequence) -> Result<()> {
        match (self.is_count(), obs) {
            (true, ObservationSequence::Counts(_)) => Ok(()),
            (true, _) => Err(Error::IncompatibleFamily("count components need count data".into())),
            (false, _) => {
                let d = match &self.components[0] {
                    Component::Gaussian { mean, .. } => mean.len(),
                    _ => 1,
                };
                if d == obs.dim() {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch(format!("components have dimension {d}, data {}", obs.dim())))
                }
            }
        }
    }

    /// `ln φ_ℓ(Y_i)` floored, `n × m`.
    pub fn component_log_densities(&self, obs: &ObservationSequence) -> LogDensities {
        LogDensities::from_log_densities(obs.len(), self.m(), |i, l| self.components[l].ln_density(obs.row(i)))
    }

    /// Marginal state densities `μ_j(Y_i)` built from the floored component
    /// densities, so that the `k`-state chain and the joint chain agree.
    pub fn log_densities(&self, obs: &ObservationSequence) -> LogDensities {
        let comp = self.component_log_densities(obs);
        let log_psi = self.psi.map(f64::ln);
        let mut buf = vec![0.0; self.m()];
        LogDensities::from_log_densities(obs.len(), self.k(), |i, j| {
            for (l, b) in buf.iter_mut().enumerate() {
                *b = log_psi[(j, l)] + comp.get(i, l);
            }
            log_sum_exp(&buf)
        })
    }

    /// Marginal density `Σ_ℓ ψ_{jℓ} φ_ℓ(y)` without flooring.
    pub fn density(&self, j: usize, y: RowRef<'_>) -> f64 {
        (0..self.m()).map(|l| self.psi[(j, l)] * self.components[l].ln_density(y).exp()).sum()
    }

    pub fn reordered(&self, order: &[usize]) -> Self {
        let psi = DMatrix::from_fn(self.k(), self.m(), |r, c| self.psi[(order[r], c)]);
        Self { psi, components: self.components.clone() }
    }

    pub(crate) fn with_parts(&self, psi: DMatrix<f64>, components: Vec<Component>) -> Self {
        Self { psi, components }
    }
}

fn check_binomial_guard(components: &[Component]) -> Result<()> {
    let mut by_trials = std::collections::BTreeMap::<u64, u64>::new();
    for c in components {
        if let Component::Binomial { trials, .. } = c {
            *by_trials.entry(*trials).or_default() += 1;
        }
    }
    for (trials, count) in by_trials {
        if trials + 1 < 2 * count {
            return Err(Error::InvalidModel(format!(
                "{count} binomial components with N={trials} are not linearly independent (need N >= {})",
                2 * count - 1
            )));
        }
    }
    Ok(())
}

/// Component and joint (state, component) posteriors.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPosteriorSet {
    k: usize,
    m: usize,
    xi: DMatrix<f64>,
    joint: Vec<f64>,
}

impl ExtendedPosteriorSet {
    /// `xi[(i, ℓ)] = P(Z_i = ℓ | Y)`.
    pub fn xi(&self) -> &DMatrix<f64> {
        &self.xi
    }

    /// `P(X_i = j, Z_i = ℓ | Y)`.
    pub fn joint_xz(&self, i: usize, j: usize, l: usize) -> f64 {
        self.joint[(i * self.k + j) * self.m + l]
    }

    pub fn n(&self) -> usize {
        self.xi.nrows()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Exact forward–backward on the joint chain of `k·m` pair states with
/// transition `(j, ℓ) → (j', ℓ')` equal to `Q_{jj'} ψ_{j'ℓ'}` and emission
/// `φ_ℓ`. Returns the extended posteriors and the marginal state posteriors.
pub fn e_step_extended(
    tm: &TransitionModel,
    mixture: &MixtureEmission,
    obs: &ObservationSequence,
) -> Result<(ExtendedPosteriorSet, PosteriorSet)> {
    let (k, m) = (mixture.k(), mixture.m());
    if tm.k() != k {
        return Err(Error::DimensionMismatch(format!("model has {} states, mixture {k}", tm.k())));
    }
    mixture.check_compatible(obs)?;
    let n = obs.len();
    let big = k * m;
    let comp = mixture.component_log_densities(obs);
    let dens = LogDensities::from_log_densities(n, big, |i, s| comp.get(i, s % m));
    let log_psi = mixture.psi.map(f64::ln);
    let log_q = tm.log_q();
    let log_init: Vec<f64> = (0..big).map(|s| tm.init()[s / m].ln() + log_psi[(s / m, s % m)]).collect();
    let mut log_q_big = vec![0.0; big * big];
    for s in 0..big {
        for t in 0..big {
            log_q_big[s * big + t] = log_q[(s / m) * k + t / m] + log_psi[(t / m, t % m)];
        }
    }
    let (alpha, ll) = hmm::forward(&log_init, &log_q_big, &dens);
    if !ll.is_finite() {
        return Err(Error::InvalidModel("sequence has zero probability under the model".into()));
    }
    let beta = hmm::backward(&log_q_big, &dens);

    let mut joint = vec![0.0; n * big];
    let mut xi = DMatrix::zeros(n, m);
    let mut tau = DMatrix::zeros(n, k);
    for i in 0..n {
        let row = &mut joint[i * big..(i + 1) * big];
        for s in 0..big {
            row[s] = (alpha[i * big + s] + beta[i * big + s] - ll).exp();
        }
        let total: f64 = row.iter().sum();
        for s in 0..big {
            row[s] /= total;
            tau[(i, s / m)] += row[s];
            xi[(i, s % m)] += row[s];
        }
    }

    // Pair state transitions factor through (X_i, X_{i+1}), so the X-level
    // pair posteriors only need per-state reductions of alpha and beta.
    let mut pairs = Vec::with_capacity(n.saturating_sub(1));
    let mut a_red = vec![0.0; k];
    let mut b_red = vec![0.0; k];
    let mut buf = vec![0.0; m];
    for i in 0..n.saturating_sub(1) {
        for j in 0..k {
            a_red[j] = log_sum_exp(&alpha[i * big + j * m..i * big + (j + 1) * m]);
            for l in 0..m {
                let t = j * m + l;
                buf[l] = log_psi[(j, l)] + dens.get(i + 1, t) + beta[(i + 1) * big + t];
            }
            b_red[j] = log_sum_exp(&buf);
        }
        let mut slice = DMatrix::from_fn(k, k, |a, b| (a_red[a] + log_q[a * k + b] + b_red[b] - ll).exp());
        let s = slice.sum();
        slice /= s;
        pairs.push(slice);
    }
    let post = PosteriorSet::new(tau, &pairs, ll)?;
    Ok((ExtendedPosteriorSet { k, m, xi, joint }, post))
}

/// `ψ_{jℓ} = Σ_i P(X_i=j, Z_i=ℓ | Y) / Σ_i τ_{ij}`.
pub fn m_step_psi(ext: &ExtendedPosteriorSet, tau: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (k, m, n) = (ext.k(), ext.m(), ext.n());
    if tau.shape() != (n, k) {
        return Err(Error::DimensionMismatch("tau does not match extended posteriors".into()));
    }
    let mut psi = DMatrix::zeros(k, m);
    for j in 0..k {
        let occupancy: f64 = tau.column(j).sum();
        if occupancy < 1e-12 {
            return Err(Error::EmptyState { state: j });
        }
        for l in 0..m {
            psi[(j, l)] = (0..n).map(|i| ext.joint_xz(i, j, l)).sum::<f64>();
        }
        let row_total: f64 = psi.row(j).sum();
        psi.row_mut(j).scale_mut(1.0 / row_total);
    }
    Ok(psi)
}

/// Weighted sufficient statistics of one component: `N = Σ w_i`,
/// `T = Σ w_i y_i` and `T2 = Σ w_i y_i²` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub weight: f64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

pub fn sufficient_stats(obs: &ObservationSequence, weights: &[f64]) -> SufficientStats {
    let d = obs.dim();
    let mut st = SufficientStats { weight: 0.0, first: vec![0.0; d], second: vec![0.0; d] };
    for (i, &w) in weights.iter().enumerate() {
        let row = obs.row(i);
        st.weight += w;
        for c in 0..d {
            let y = row.coord(c);
            st.first[c] += w * y;
            st.second[c] += w * y * y;
        }
    }
    st
}

/// Result of an exponential-family update.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamUpdate {
    pub component: Component,
    /// The Gaussian variance floor or the probability/rate clip was active.
    pub floored: bool,
}

/// Solves `b'(θ) = T / N` for the component's family. Dirac and triangular
/// components have no free parameter and are returned unchanged.
pub fn m_step_expfam(current: &Component, stats: &SufficientStats) -> Result<ExpFamUpdate> {
    if !(stats.weight > 1e-12) {
        return Err(Error::ZeroWeight);
    }
    let nw = stats.weight;
    Ok(match current {
        Component::Poisson { .. } => {
            let rate = stats.first[0] / nw;
            ExpFamUpdate { component: Component::Poisson { rate: rate.max(RATE_FLOOR) }, floored: rate < RATE_FLOOR }
        }
        Component::Gaussian { .. } => {
            let mean: Vec<f64> = stats.first.iter().map(|t| t / nw).collect();
            let raw: Vec<f64> = stats.second.iter().zip(&mean).map(|(t2, m)| t2 / nw - m * m).collect();
            let floored = raw.iter().any(|&v| !(v >= VARIANCE_FLOOR));
            let var = raw.into_iter().map(|v| if v >= VARIANCE_FLOOR { v } else { VARIANCE_FLOOR }).collect();
            ExpFamUpdate { component: Component::Gaussian { mean, var }, floored }
        }
        Component::Binomial { trials, .. } => {
            let p = stats.first[0] / (nw * *trials as f64);
            let clipped = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            ExpFamUpdate { component: Component::Binomial { trials: *trials, p: clipped }, floored: clipped != p }
        }
        Component::DiracAtZero | Component::Triangular { .. } => {
            ExpFamUpdate { component: current.clone(), floored: false }
        }
    })
}

/// `μ_j = q_j δ_0 + (1 - q_j) φ_j`: `k + 1` components, the last one a point
/// mass at zero, and `ψ = [diag(1 - q) | q]`.
pub fn make_zero_inflated(q: &[f64], base: Vec<Component>) -> Result<MixtureEmission> {
    let k = q.len();
    if base.len() != k {
        return Err(Error::DimensionMismatch(format!("{k} inflation weights, {} base components", base.len())));
    }
    if q.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InvalidModel("zero-inflation weights must lie in [0, 1]".into()));
    }
    if q.iter().filter(|&&v| v == 1.0).count() > 1 {
        return Err(Error::RankDeficient("more than one state is a pure point mass at zero".into()));
    }
    let mut psi = DMatrix::zeros(k, k + 1);
    for j in 0..k {
        psi[(j, j)] = 1.0 - q[j];
        psi[(j, k)] = q[j];
    }
    let mut components = base;
    components.push(Component::DiracAtZero);
    MixtureEmission::new(psi, components)
}

/// Whether `ψ` has rank `k`, judged by its `k`-th singular value.
pub fn check_psi_rank(psi: &DMatrix<f64>, tol: f64) -> (bool, f64) {
    let sigma = linalg::rth_singular_value(psi, psi.nrows());
    (sigma > tol, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangular_shapes() {
        assert_eq!(triangular_component(1), vec![1.0]);
        let t2 = triangular_component(2);
        assert_relative_eq!(t2[0], 2.0 / 3.0);
        assert_relative_eq!(t2[1], 1.0 / 3.0);
        for size in 1..40 {
            let t = triangular_component(size);
            assert_relative_eq!(t.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(t.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn triangular_density_matches_table() {
        let c = Component::Triangular { size: 4 };
        let t = triangular_component(4);
        for y in 0..4 {
            assert_relative_eq!(c.ln_density(RowRef::Count(y as f64)).exp(), t[y], epsilon = 1e-14);
        }
        assert_eq!(c.ln_density(RowRef::Count(4.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn zero_inflated_layout() {
        let base = vec![Component::Poisson { rate: 2.0 }, Component::Poisson { rate: 9.0 }];
        let z = make_zero_inflated(&[0.3, 0.6], base.clone()).unwrap();
        let expect = DMatrix::from_row_slice(2, 3, &[0.7, 0.0, 0.3, 0.0, 0.4, 0.6]);
        assert!((z.psi() - expect).abs().max() < 1e-15);
        assert_eq!(z.components()[2], Component::DiracAtZero);

        let none = make_zero_inflated(&[0.0, 0.0], base.clone()).unwrap();
        assert_eq!(none.psi().column(2).sum(), 0.0);
        assert_eq!(none.psi()[(0, 0)], 1.0);

        assert!(matches!(make_zero_inflated(&[1.0, 1.0], base), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn expfam_updates() {
        let obs = ObservationSequence::counts(vec![1, 2, 3]).unwrap();
        let st = sufficient_stats(&obs, &[1.0, 1.0, 1.0]);
        let up = m_step_expfam(&Component::Poisson { rate: 1.0 }, &st).unwrap();
        assert_eq!(up.component, Component::Poisson { rate: 2.0 });

        let obs = ObservationSequence::scalars(vec![-1.0, 1.0]).unwrap();
        let st = sufficient_stats(&obs, &[1.0, 1.0]);
        let g = Component::Gaussian { mean: vec![3.0], var: vec![1.0] };
        let up = m_step_expfam(&g, &st).unwrap();
        assert_eq!(up.component, Component::Gaussian { mean: vec![0.0], var: vec![1.0] });

        let obs = ObservationSequence::counts(vec![2, 4, 6]).unwrap();
        let st = sufficient_stats(&obs, &[0.5, 0.5, 1.0]);
        let up = m_step_expfam(&Component::Binomial { trials: 10, p: 0.5 }, &st).unwrap();
        match up.component {
            Component::Binomial { p, .. } => assert_relative_eq!(p, 0.45, epsilon = 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gaussian_variance_floor_is_reported() {
        let obs = ObservationSequence::scalars(vec![2.0, 2.0, 2.0]).unwrap();
        let st = sufficient_stats(&obs, &[1.0; 3]);
        let up = m_step_expfam(&Component::Gaussian { mean: vec![0.0], var: vec![1.0] }, &st).unwrap();
        assert!(up.floored);
        assert_eq!(up.component, Component::Gaussian { mean: vec![2.0], var: vec![VARIANCE_FLOOR] });
        assert_eq!(
            m_step_expfam(&Component::Poisson { rate: 1.0 }, &sufficient_stats(&obs, &[0.0; 3])),
            Err(Error::ZeroWeight)
        );
    }

    #[test]
    fn binomial_guard() {
        let comps = |trials| {
            vec![
                Component::Binomial { trials, p: 0.2 },
                Component::Binomial { trials, p: 0.5 },
                Component::Binomial { trials, p: 0.8 },
            ]
        };
        let psi = DMatrix::from_row_slice(2, 3, &[0.5, 0.5, 0.0, 0.0, 0.5, 0.5]);
        assert!(MixtureEmission::new(psi.clone(), comps(4)).is_err());
        assert!(MixtureEmission::new(psi, comps(5)).is_ok());
    }

    #[test]
    fn psi_rank() {
        let psi = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let (ok, s) = check_psi_rank(&psi, 1e-8);
        assert!(ok);
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        let psi = DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.3, 0.7]);
        let (ok, s) = check_psi_rank(&psi, 1e-8);
        assert!(!ok);
        assert!(s < 1e-12);
    }

    #[test]
    fn psi_m_step_diagonal() {
        let tm = TransitionModel::with_stationary_init(DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8])).unwrap();
        let mix = MixtureEmission::new(
            DMatrix::identity(2, 2),
            vec![Component::Triangular { size: 1 }, Component::Poisson { rate: 6.0 }],
        )
        .unwrap();
        let obs = ObservationSequence::counts(vec![0, 0, 5, 7, 0, 6]).unwrap();
        let (ext, post) = e_step_extended(&tm, &mix, &obs).unwrap();
        let psi = m_step_psi(&ext, post.tau()).unwrap();
        assert!((psi - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-12);
    }
}
