//! Nonparametric discrete emissions (free and penalized M-steps) and the
//! negative-binomial baseline.

use nalgebra::DMatrix;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::hmm::{self, LogDensities};

const ROW_TOL: f64 = 1e-10;
const ZERO_WEIGHT: f64 = 1e-12;

/// Per-state probability tables on `{0, …, y_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEmissionTable {
    probs: DMatrix<f64>,
}

impl DiscreteEmissionTable {
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        if probs.nrows() == 0 || probs.ncols() == 0 {
            return Err(Error::InvalidModel("empty emission table".into()));
        }
        for j in 0..probs.nrows() {
            let row = probs.row(j);
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidModel(format!("emission row {j} has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidModel(format!("emission row {j} sums to {s}")));
            }
        }
        Ok(Self { probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(hmm::matrix_from_rows(rows)?)
    }

    pub fn k(&self) -> usize {
        self.probs.nrows()
    }

    pub fn y_max(&self) -> u64 {
        self.probs.ncols() as u64 - 1
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        self.probs.row(j).iter().copied().collect()
    }

    /// `f_j(y)`; zero above the support.
    pub fn prob(&self, j: usize, y: u64) -> f64 {
        if y > self.y_max() {
            0.0
        } else {
            self.probs[(j, y as usize)]
        }
    }

    pub fn log_densities(&self, obs: &[u64]) -> LogDensities {
        LogDensities::from_densities(obs.len(), self.k(), |i, j| self.prob(j, obs[i]))
    }

    pub fn reordered(&self, order: &[usize]) -> Self {
        let probs = DMatrix::from_fn(self.k(), self.probs.ncols(), |r, c| self.probs[(order[r], c)]);
        Self { probs }
    }
}

/// Penalty `I(f) = Σ_y y^α f(y)` weighted by `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    lambda: f64,
    alpha: f64,
}

impl Default for PenaltySpec {
    fn default() -> Self {
        Self { lambda: 1.0, alpha: 2.0 }
    }
}

impl PenaltySpec {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be >= 0, got {lambda}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be > 0, got {alpha}")));
        }
        Ok(Self { lambda, alpha })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `m(y) = y^α`.
    pub fn weight(&self, y: usize) -> f64 {
        if y == 0 {
            0.0
        } else {
            (y as f64).powf(self.alpha)
        }
    }
}

/// `S(y) = Σ_i w_i 1{Y_i = y}` for `y ≤ y_max`; larger values are dropped.
pub fn weighted_counts(obs: &[u64], weights: impl IntoIterator<Item = f64>, y_max: u64) -> Vec<f64> {
    let mut s = vec![0.0; y_max as usize + 1];
    for (&y, w) in obs.iter().zip(weights) {
        if y <= y_max {
            s[y as usize] += w;
        }
    }
    s
}

/// Free M-step `f(y) = S(y) / N`.
pub fn m_step_np(s: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = s.iter().sum();
    if !(total > ZERO_WEIGHT) {
        return Err(Error::ZeroWeight);
    }
    Ok(s.iter().map(|&v| v / total).collect())
}

/// Normalizing constant `c` solving `Σ_y S(y) / (λ m(y) + c) = 1`.
///
/// The map is strictly decreasing in `c`. The search starts on
/// `(1e-12·ΣS, ΣS]`; when the sum is already below one at the lower end
/// (no mass where `m` vanishes) the bracket is pushed down toward
/// `-λ·min{m(y) : S(y) > 0}`, where the sum diverges.
pub fn regularized_normalizer(s: &[f64], penalty: &PenaltySpec) -> Result<f64> {
    let total: f64 = s.iter().sum();
    if !(total > ZERO_WEIGHT) {
        return Err(Error::ZeroWeight);
    }
    let lambda = penalty.lambda();
    let terms: Vec<(f64, f64)> = s
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(y, &v)| (v, lambda * penalty.weight(y)))
        .collect();
    let g = |c: f64| terms.iter().map(|&(v, lm)| v / (lm + c)).sum::<f64>();

    let mut hi = total;
    let eps = 1e-12 * total;
    let mut lo = eps;
    if g(lo) < 1.0 {
        let floor = -terms.iter().map(|&(_, lm)| lm).fold(f64::INFINITY, f64::min);
        hi = lo;
        let mut gap = eps - floor;
        loop {
            gap *= 0.5;
            lo = floor + gap;
            if g(lo) >= 1.0 {
                break;
            }
            hi = lo;
            if gap == 0.0 {
                return Err(Error::InvalidInput("normalizer bracket collapsed".into()));
            }
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Penalized M-step `f(y) = S(y) / (λ m(y) + c)`. With `λ = 0` this is
/// exactly [`m_step_np`].
pub fn m_step_regularized(s: &[f64], penalty: &PenaltySpec) -> Result<Vec<f64>> {
    if penalty.lambda() == 0.0 {
        return m_step_np(s);
    }
    let c = regularized_normalizer(s, penalty)?;
    let mut f: Vec<f64> = s
        .iter()
        .enumerate()
        .map(|(y, &v)| if v > 0.0 { v / (penalty.lambda() * penalty.weight(y) + c) } else { 0.0 })
        .collect();
    let total: f64 = f.iter().sum();
    f.iter_mut().for_each(|p| *p /= total);
    Ok(f)
}

/// `I(f) = Σ_y m(y) f(y)`.
pub fn penalty_value(f: &[f64], penalty: &PenaltySpec) -> f64 {
    f.iter().enumerate().map(|(y, &p)| penalty.weight(y) * p).sum()
}

/// Dispersion cap used when the data carry no overdispersion.
pub const NEGBIN_R_MAX: f64 = 1e6;
/// Lower end of the dispersion search bracket.
pub const NEGBIN_R_MIN: f64 = 1e-4;

/// Negative binomial with `P(y) = Γ(y+r)/(Γ(r) y!) p^r (1-p)^y`, mean `r(1-p)/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinParams {
    pub r: f64,
    pub p: f64,
}

impl NegBinParams {
    pub fn new(r: f64, p: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidModel(format!("negative binomial r must be > 0, got {r}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidModel(format!("negative binomial p must be in (0, 1), got {p}")));
        }
        Ok(Self { r, p })
    }

    pub fn from_mean(r: f64, mean: f64) -> Result<Self> {
        Self::new(r, r / (r + mean.max(1e-8)))
    }

    /// Near-Poisson fallback at the dispersion cap.
    pub fn near_poisson(mean: f64) -> Self {
        let mean = mean.max(1e-8);
        Self { r: NEGBIN_R_MAX, p: NEGBIN_R_MAX / (NEGBIN_R_MAX + mean) }
    }

    pub fn mean(&self) -> f64 {
        self.r * (1.0 - self.p) / self.p
    }

    pub fn ln_pmf(&self, y: u64) -> f64 {
        let y = y as f64;
        ln_gamma(y + self.r) - ln_gamma(self.r) - ln_gamma(y + 1.0) + self.r * self.p.ln() + y * (-self.p).ln_1p()
    }
}

/// Per-state negative-binomial emissions.
#[derive(Debug, Clone, PartialEq)]
pub struct NegBinEmission {
    params: Vec<NegBinParams>,
}

impl NegBinEmission {
    pub fn new(params: Vec<NegBinParams>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidModel("no states".into()));
        }
        for p in &params {
            NegBinParams::new(p.r, p.p)?;
        }
        Ok(Self { params })
    }

    pub fn k(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[NegBinParams] {
        &self.params
    }

    pub fn log_densities(&self, obs: &[u64]) -> LogDensities {
        LogDensities::from_log_densities(obs.len(), self.k(), |i, j| self.params[j].ln_pmf(obs[i]))
    }

    pub fn reordered(&self, order: &[usize]) -> Self {
        Self { params: order.iter().map(|&o| self.params[o]).collect() }
    }
}

/// Weighted observations collapsed onto their distinct values.
struct WeightedValues {
    values: Vec<(f64, f64)>,
    total: f64,
    mean: f64,
    variance: f64,
}

impl WeightedValues {
    fn new(obs: &[u64], weights: &[f64]) -> Result<Self> {
        let mut acc = std::collections::BTreeMap::<u64, f64>::new();
        for (&y, &w) in obs.iter().zip(weights) {
            *acc.entry(y).or_default() += w;
        }
        let values: Vec<(f64, f64)> = acc.into_iter().filter(|&(_, w)| w > 0.0).map(|(y, w)| (y as f64, w)).collect();
        let total: f64 = values.iter().map(|v| v.1).sum();
        if !(total > ZERO_WEIGHT) {
            return Err(Error::ZeroWeight);
        }
        let mean = values.iter().map(|&(y, w)| w * y).sum::<f64>() / total;
        let variance = values.iter().map(|&(y, w)| w * (y - mean).powi(2)).sum::<f64>() / total;
        Ok(Self { values, total, mean, variance })
    }

    fn profile_ll(&self, r: f64) -> f64 {
        let m = self.mean;
        let gam: f64 = self
            .values
            .iter()
            .map(|&(y, w)| w * (ln_gamma(y + r) - ln_gamma(r) - ln_gamma(y + 1.0)))
            .sum();
        let tail = if m > 0.0 { m * (m / (r + m)).ln() } else { 0.0 };
        gam + self.total * (r * (r / (r + m)).ln() + tail)
    }

    fn score(&self, r: f64) -> f64 {
        let dg = digamma(r);
        self.values.iter().map(|&(y, w)| w * (digamma(y + r) - dg)).sum::<f64>()
            + self.total * (r / (r + self.mean)).ln()
    }
}

/// Weighted negative-binomial log-likelihood `Σ_i w_i log P(Y_i)`.
pub fn negbin_weighted_ll(params: &NegBinParams, obs: &[u64], weights: &[f64]) -> f64 {
    obs.iter().zip(weights).map(|(&y, &w)| if w > 0.0 { w * params.ln_pmf(y) } else { 0.0 }).sum()
}

/// Profile log-likelihood in `r` (with `p` at its conditional optimum).
pub fn negbin_profile_ll(obs: &[u64], weights: &[f64], r: f64) -> Result<f64> {
    Ok(WeightedValues::new(obs, weights)?.profile_ll(r))
}

/// Weighted maximum likelihood for `(r, p)`.
///
/// Given `r`, the optimal `p` is `r / (r + ȳ)`. The profile score in `r` is
/// scanned on a log grid over `[1e-4, 1e6]` (including the moment estimate
/// `ȳ² / (s² - ȳ)`) and the sign change with the best profile value is
/// refined by bisection in `log r`.
pub fn m_step_negbin(obs: &[u64], weights: &[f64]) -> Result<NegBinParams> {
    if obs.len() != weights.len() {
        return Err(Error::LengthMismatch { left: obs.len(), right: weights.len() });
    }
    let wv = WeightedValues::new(obs, weights)?;
    if wv.variance <= wv.mean {
        return Err(Error::Underdispersed { mean: wv.mean, variance: wv.variance });
    }
    let r0 = (wv.mean * wv.mean / (wv.variance - wv.mean)).clamp(NEGBIN_R_MIN, NEGBIN_R_MAX);

    let (lmin, lmax) = (NEGBIN_R_MIN.ln(), NEGBIN_R_MAX.ln());
    let steps = 80;
    let mut grid: Vec<f64> = (0..=steps).map(|t| (lmin + (lmax - lmin) * t as f64 / steps as f64).exp()).collect();
    grid.push(r0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let scores: Vec<f64> = grid.iter().map(|&r| wv.score(r)).collect();

    let mut candidates = vec![grid[0], *grid.last().unwrap()];
    for t in 0..grid.len() - 1 {
        if scores[t] > 0.0 && scores[t + 1] <= 0.0 {
            let (mut lo, mut hi) = (grid[t].ln(), grid[t + 1].ln());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if wv.score(mid.exp()) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            candidates.push((0.5 * (lo + hi)).exp());
        }
    }
    let r = candidates
        .into_iter()
        .map(|r| (r, wv.profile_ll(r)))
        .fold((r0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
        .0;
    NegBinParams::from_mean(r, wv.mean)
}
