//! Kernel-weight emissions `f_j(y) = w^{-d} Σ_u p_{uj} R((y - y_u)/w)` and
//! the generalized-EM weight recursion.
//!
//! The weight update is the minorize/maximize step
//!
//! ```text
//! γ_{iuj} = p_{uj} R_{iu} / Σ_v p_{vj} R_{iv}
//! p'_{uj} = Σ_i τ_{ij} γ_{iuj} / Σ_{i,v} τ_{ij} γ_{ivj}
//! ```
//!
//! which never decreases `G(P) = Σ_{ij} τ_{ij} log(w^{-d} Σ_u p_{uj} R_{iu})`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hmm::{log_floor, LogDensities};
use crate::mixture::sample_index;
use crate::obs::ObservationSequence;

const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelId {
    /// `exp(-|z|²/2) / (2π)^{d/2}`
    GaussianSpherical,
    /// `Π_d (3/4)(1 - z_d²)₊`
    EpanechnikovProduct,
}

impl KernelId {
    pub fn name(&self) -> &'static str {
        match self {
            KernelId::GaussianSpherical => "gaussian-spherical",
            KernelId::EpanechnikovProduct => "epanechnikov-product",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gaussian-spherical" | "gaussian" => Ok(KernelId::GaussianSpherical),
            "epanechnikov-product" | "epanechnikov" => Ok(KernelId::EpanechnikovProduct),
            other => Err(Error::InvalidInput(format!("unknown kernel '{other}'"))),
        }
    }

    /// Kernel value at `(x - y) / w`.
    pub fn eval_scaled(&self, x: &[f64], y: &[f64], w: f64) -> f64 {
        match self {
            KernelId::GaussianSpherical => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| ((a - b) / w).powi(2)).sum();
                (-0.5 * sq).exp() / (2.0 * PI).powf(x.len() as f64 / 2.0)
            }
            KernelId::EpanechnikovProduct => x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let z = (a - b) / w;
                    if z.abs() < 1.0 {
                        0.75 * (1.0 - z * z)
                    } else {
                        0.0
                    }
                })
                .product(),
        }
    }

    pub fn at_zero(&self, d: usize) -> f64 {
        match self {
            KernelId::GaussianSpherical => (2.0 * PI).powf(-(d as f64) / 2.0),
            KernelId::EpanechnikovProduct => 0.75f64.powi(d as i32),
        }
    }

    fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            KernelId::GaussianSpherical => rng.sample(StandardNormal),
            KernelId::EpanechnikovProduct => {
                let u1: f64 = rng.random_range(-1.0..1.0);
                let u2: f64 = rng.random_range(-1.0..1.0);
                let u3: f64 = rng.random_range(-1.0..1.0);
                if u3.abs() >= u2.abs() && u3.abs() >= u1.abs() {
                    u2
                } else {
                    u3
                }
            }
        }
    }
}

/// `R_{iu} = R((Y_i - y_u) / w)` for observations `i` and anchors `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for u in 0..cols {
                data.push(f(i, u));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, u: usize) -> f64 {
        self.data[i * self.cols + u]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Square kernel matrix of the sequence against itself.
pub fn kernel_matrix(obs: &ObservationSequence, kernel: KernelId, w: f64) -> KernelMatrix {
    let (d, x) = obs.to_real_rows();
    cross_kernel_matrix(d, &x, &x, kernel, w)
}

/// Kernel matrix of row-major points `x` against anchors, both of dimension `d`.
pub fn cross_kernel_matrix(d: usize, x: &[f64], anchors: &[f64], kernel: KernelId, w: f64) -> KernelMatrix {
    let rows = x.len() / d;
    let cols = anchors.len() / d;
    KernelMatrix::from_fn(rows, cols, |i, u| {
        kernel.eval_scaled(&x[i * d..(i + 1) * d], &anchors[u * d..(u + 1) * d], w)
    })
}

/// Per-state weights over a shared set of anchor points.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEmission {
    dim: usize,
    anchors: Vec<f64>,
    bandwidth: f64,
    kernel: KernelId,
    weights: DMatrix<f64>,
}

impl KernelEmission {
    /// `anchors` is row-major `n_a × dim`; `weights` is `n_a × k` with
    /// columns summing to one.
    pub fn new(dim: usize, anchors: Vec<f64>, bandwidth: f64, kernel: KernelId, weights: DMatrix<f64>) -> Result<Self> {
        if dim == 0 || anchors.is_empty() || anchors.len() % dim != 0 {
            return Err(Error::DimensionMismatch("anchors must be a non-empty n x d array".into()));
        }
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidModel(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        if weights.nrows() != anchors.len() / dim || weights.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "weights are {}x{}, expected {} rows",
                weights.nrows(),
                weights.ncols(),
                anchors.len() / dim
            )));
        }
        for j in 0..weights.ncols() {
            let col = weights.column(j);
            if col.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidModel(format!("weight column {j} has an entry outside [0, 1]")));
            }
            if (col.sum() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidModel(format!("weight column {j} sums to {}", col.sum())));
            }
        }
        Ok(Self { dim, anchors, bandwidth, kernel, weights })
    }

    pub fn k(&self) -> usize {
        self.weights.ncols()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_anchors(&self) -> usize {
        self.weights.nrows()
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn anchor(&self, u: usize) -> &[f64] {
        &self.anchors[u * self.dim..(u + 1) * self.dim]
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kernel(&self) -> KernelId {
        self.kernel
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    fn scale(&self) -> f64 {
        self.bandwidth.powi(self.dim as i32)
    }

    /// `f_j(y)`.
    pub fn density_eval(&self, j: usize, y: &[f64]) -> f64 {
        let s: f64 = (0..self.n_anchors())
            .filter(|&u| self.weights[(u, j)] > 0.0)
            .map(|u| self.weights[(u, j)] * self.kernel.eval_scaled(y, self.anchor(u), self.bandwidth))
            .sum();
        s / self.scale()
    }

    pub fn matrix_for(&self, obs: &ObservationSequence) -> Result<KernelMatrix> {
        self.check_compatible(obs)?;
        let (_, x) = obs.to_real_rows();
        Ok(cross_kernel_matrix(self.dim, &x, &self.anchors, self.kernel, self.bandwidth))
    }

    pub fn check_compatible(&self, obs: &ObservationSequence) -> Result<()> {
        if obs.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("kernel emission has dimension {}, data {}", self.dim, obs.dim())));
        }
        Ok(())
    }

    /// Log densities from a precomputed observation-by-anchor kernel matrix.
    pub fn log_densities_from_matrix(&self, r: &KernelMatrix) -> LogDensities {
        let dens = mixture_sums(&self.weights, r);
        let scale = self.scale();
        let k = self.k();
        LogDensities::from_densities(r.rows(), k, |i, j| dens[i * k + j] / scale)
    }

    pub fn log_densities(&self, obs: &ObservationSequence) -> Result<LogDensities> {
        Ok(self.log_densities_from_matrix(&self.matrix_for(obs)?))
    }

    pub(crate) fn with_weights(&self, weights: DMatrix<f64>) -> Self {
        Self { weights, ..self.clone() }
    }

    pub fn reordered(&self, order: &[usize]) -> Self {
        let weights = DMatrix::from_fn(self.n_anchors(), self.k(), |u, j| self.weights[(u, order[j])]);
        self.with_weights(weights)
    }

    pub fn sample<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Vec<f64> {
        let col: Vec<f64> = self.weights.column(j).iter().copied().collect();
        let u = sample_index(&col, rng);
        self.anchor(u).iter().map(|&a| a + self.bandwidth * self.kernel.sample_unit(rng)).collect()
    }
}

/// `Σ_u p_{uj} R_{iu}` for all `(i, j)`, row-major `n × k`.
fn mixture_sums(p: &DMatrix<f64>, r: &KernelMatrix) -> Vec<f64> {
    let k = p.ncols();
    let support: Vec<Vec<(usize, f64)>> = (0..k)
        .map(|j| (0..p.nrows()).filter(|&u| p[(u, j)] > 0.0).map(|u| (u, p[(u, j)])).collect())
        .collect();
    let mut out = vec![0.0; r.rows() * k];
    for i in 0..r.rows() {
        let row = r.row(i);
        for (j, sup) in support.iter().enumerate() {
            out[i * k + j] = sup.iter().map(|&(u, pu)| pu * row[u]).sum();
        }
    }
    out
}

fn check_shapes(p: &DMatrix<f64>, tau: &DMatrix<f64>, r: &KernelMatrix) -> Result<()> {
    if r.cols() != p.nrows() || r.rows() != tau.nrows() || p.ncols() != tau.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "P is {}x{}, tau {}x{}, R {}x{}",
            p.nrows(),
            p.ncols(),
            tau.nrows(),
            tau.ncols(),
            r.rows(),
            r.cols()
        )));
    }
    Ok(())
}

/// `G(P) = Σ_{ij} τ_{ij} log(w^{-d} Σ_u p_{uj} R_{iu})`, with the emission
/// density floor applied inside the log and `0·log 0 = 0`.
pub fn gem_objective(p: &DMatrix<f64>, tau: &DMatrix<f64>, r: &KernelMatrix, w: f64, d: usize) -> Result<f64> {
    check_shapes(p, tau, r)?;
    let k = p.ncols();
    let sums = mixture_sums(p, r);
    let scale = w.powi(d as i32);
    let mut g = 0.0;
    for i in 0..r.rows() {
        for j in 0..k {
            let t = tau[(i, j)];
            if t > 0.0 {
                g += t * log_floor(sums[i * k + j] / scale);
            }
        }
    }
    Ok(g)
}

/// One application of the weight recursion. Rows whose denominator
/// `Σ_v p_{vj} R_{iv}` vanishes carry no responsibility and are skipped; a
/// column where every weighted row vanishes is an error. Weights below
/// 1e-12 are zeroed and the column renormalized.
pub fn gem_inner_update(p: &DMatrix<f64>, tau: &DMatrix<f64>, r: &KernelMatrix) -> Result<DMatrix<f64>> {
    check_shapes(p, tau, r)?;
    let (na, k) = p.shape();
    let sums = mixture_sums(p, r);
    let mut out = DMatrix::zeros(na, k);
    for j in 0..k {
        let coef: Vec<(usize, f64)> = (0..r.rows())
            .filter_map(|i| {
                let den = sums[i * k + j];
                let t = tau[(i, j)];
                (t > 0.0 && den > 0.0).then(|| (i, t / den))
            })
            .collect();
        if coef.is_empty() {
            return Err(Error::DegenerateDenominator { state: j });
        }
        let mut total = 0.0;
        for u in 0..na {
            let pu = p[(u, j)];
            if pu > 0.0 {
                let v = pu * coef.iter().map(|&(i, c)| c * r.get(i, u)).sum::<f64>();
                out[(u, j)] = v;
                total += v;
            }
        }
        if !(total > 0.0) {
            return Err(Error::DegenerateDenominator { state: j });
        }
        let mut kept = 0.0;
        for u in 0..na {
            let v = out[(u, j)] / total;
            let v = if v < WEIGHT_FLOOR { 0.0 } else { v };
            out[(u, j)] = v;
            kept += v;
        }
        for u in 0..na {
            out[(u, j)] /= kept;
        }
    }
    Ok(out)
}

/// Applies [`gem_inner_update`] `inner_iters` times.
pub fn gem_emission_m_step(
    p: &DMatrix<f64>,
    tau: &DMatrix<f64>,
    r: &KernelMatrix,
    inner_iters: usize,
) -> Result<DMatrix<f64>> {
    if inner_iters == 0 {
        return Err(Error::InvalidInput("inner_iters must be >= 1".into()));
    }
    let mut cur = gem_inner_update(p, tau, r)?;
    for _ in 1..inner_iters {
        cur = gem_inner_update(&cur, tau, r)?;
    }
    Ok(cur)
}

/// Leave-one-out log-likelihood of the pooled kernel density estimate.
pub fn loo_score(obs: &ObservationSequence, kernel: KernelId, w: f64) -> f64 {
    let (d, x) = obs.to_real_rows();
    let n = x.len() / d;
    let norm = (n as f64 - 1.0) * w.powi(d as i32);
    (0..n)
        .map(|i| {
            let xi = &x[i * d..(i + 1) * d];
            let s: f64 = (0..n).filter(|&u| u != i).map(|u| kernel.eval_scaled(xi, &x[u * d..(u + 1) * d], w)).sum();
            (s / norm).ln()
        })
        .sum()
}

/// Grid bandwidth maximizing [`loo_score`]; ties go to the larger bandwidth.
pub fn bandwidth_cv(obs: &ObservationSequence, kernel: KernelId, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidInput("bandwidths must be positive".into()));
    }
    if obs.len() < 2 {
        return Err(Error::SequenceTooShort { n: obs.len(), min: 2 });
    }
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for &w in grid {
        let s = loo_score(obs, kernel, w);
        if best.1.is_nan() || s > best.0 || (s == best.0 && w > best.1) {
            best = (s, w);
        }
    }
    Ok(best.1)
}

/// Twenty log-spaced bandwidths over `[0.05, 2] × sd · n^{-1/(4+d)}`, where
/// `sd` is the root mean per-coordinate variance.
pub fn default_bandwidth_grid(obs: &ObservationSequence) -> Vec<f64> {
    let (d, x) = obs.to_real_rows();
    let n = x.len() / d;
    let mut var_sum = 0.0;
    for c in 0..d {
        let mean = (0..n).map(|i| x[i * d + c]).sum::<f64>() / n as f64;
        var_sum += (0..n).map(|i| (x[i * d + c] - mean).powi(2)).sum::<f64>() / n as f64;
    }
    let sd = (var_sum / d as f64).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    let base = sd * (n as f64).powf(-1.0 / (4.0 + d as f64));
    let (lo, hi) = (0.05f64.ln(), 2.0f64.ln());
    (0..20).map(|t| base * (lo + (hi - lo) * t as f64 / 19.0).exp()).collect()
}
