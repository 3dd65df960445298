//! Exact inference for a fixed finite-state HMM.
//!
//! Every recursion runs in log space. Emission densities enter through a
//! [`LogDensities`] table (`n × k`, row-major), so the same routines serve
//! discrete, parametric, mixture and kernel emissions alike. Densities equal
//! to zero are floored at [`DENSITY_FLOOR`] before taking logs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest emission density admitted inside the recursions.
pub const DENSITY_FLOOR: f64 = 1e-300;

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

pub(crate) fn log_floor(density: f64) -> f64 {
    if density > DENSITY_FLOOR {
        density.ln()
    } else {
        DENSITY_FLOOR.ln()
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Row-stochastic transition matrix together with the law of the first state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    q: DMatrix<f64>,
    init: Vec<f64>,
    stationary: bool,
}

impl TransitionModel {
    pub fn new(q: DMatrix<f64>, init: Vec<f64>) -> Result<Self> {
        let k = q.nrows();
        if k == 0 || q.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix must be square and non-empty, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if init.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "initial distribution has length {}, expected {k}",
                init.len()
            )));
        }
        for r in 0..k {
            let row = q.row(r);
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidModel(format!("row {r} of Q has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidModel(format!("row {r} of Q sums to {s}")));
            }
        }
        check_probability_vector(&init, "initial distribution")?;
        let stationary = is_stationary(&q, &init);
        Ok(Self { q, init, stationary })
    }

    /// Builds the model with `init` set to the unique stationary law of `q`.
    pub fn with_stationary_init(q: DMatrix<f64>) -> Result<Self> {
        let pi = stationary_distribution(&q)?;
        Self::new(q, pi)
    }

    pub fn from_rows(rows: &[Vec<f64>], init: Vec<f64>) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?, init)
    }

    pub fn k(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    /// Whether `init · Q = init` holds within 1e-10.
    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    /// Relabels states so that new state `s` is old state `order[s]`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        let k = self.k();
        let q = DMatrix::from_fn(k, k, |a, b| self.q[(order[a], order[b])]);
        let init = order.iter().map(|&o| self.init[o]).collect();
        Self { q, init, stationary: self.stationary }
    }

    pub(crate) fn log_q(&self) -> Vec<f64> {
        let k = self.k();
        let mut out = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                out.push(self.q[(a, b)].ln());
            }
        }
        out
    }
}

pub(crate) fn check_probability_vector(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidModel(format!("{what} has an entry outside [0, 1]")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidModel(format!("{what} sums to {s}")));
    }
    Ok(())
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn is_stationary(q: &DMatrix<f64>, init: &[f64]) -> bool {
    let k = q.nrows();
    (0..k).all(|b| {
        let v: f64 = (0..k).map(|a| init[a] * q[(a, b)]).sum();
        (v - init[b]).abs() <= STATIONARY_TOL
    })
}

/// Solves `πQ = π`, `Σπ = 1`.
///
/// Returns [`Error::NonUniqueStationary`] when the stacked system is rank
/// deficient (smallest singular value below 1e-10), which is the case for
/// reducible chains with several closed classes.
pub fn stationary_distribution(q: &DMatrix<f64>) -> Result<Vec<f64>> {
    let k = q.nrows();
    if k == 0 || q.ncols() != k {
        return Err(Error::DimensionMismatch("transition matrix must be square".into()));
    }
    let mut a = DMatrix::<f64>::zeros(k + 1, k);
    for r in 0..k {
        for c in 0..k {
            a[(r, c)] = q[(c, r)] - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..k {
        a[(k, c)] = 1.0;
    }
    let svd = a.svd(true, true);
    let sigma_min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if sigma_min < STATIONARY_TOL {
        return Err(Error::NonUniqueStationary);
    }
    let mut b = DVector::<f64>::zeros(k + 1);
    b[k] = 1.0;
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidModel(format!("stationary solve failed: {e}")))?;
    let mut pi: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    Ok(pi)
}

/// Log emission densities, `n × k`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDensities {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl LogDensities {
    /// Builds the table from raw densities, applying the density floor.
    pub fn from_densities(n: usize, k: usize, mut density: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * k);
        for i in 0..n {
            for j in 0..k {
                data.push(log_floor(density(i, j)));
            }
        }
        Self { n, k, data }
    }

    /// Builds the table from log densities, flooring at `ln(DENSITY_FLOOR)`.
    pub fn from_log_densities(n: usize, k: usize, mut log_density: impl FnMut(usize, usize) -> f64) -> Self {
        let lo = DENSITY_FLOOR.ln();
        let mut data = Vec::with_capacity(n * k);
        for i in 0..n {
            for j in 0..k {
                let v = log_density(i, j);
                data.push(if v > lo { v } else { lo });
            }
        }
        Self { n, k, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }

    /// Restriction to positions `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Self {
        Self {
            n: len,
            k: self.k,
            data: self.data[start * self.k..(start + len) * self.k].to_vec(),
        }
    }
}

/// State posteriors and adjacent-pair posteriors for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSet {
    tau: DMatrix<f64>,
    pair: Vec<f64>,
    log_lik: f64,
}

impl PosteriorSet {
    /// Validates and wraps externally computed posteriors. `pair_joint[i]` is
    /// the `k × k` joint of positions `i` and `i + 1`.
    pub fn new(tau: DMatrix<f64>, pair_joint: &[DMatrix<f64>], log_lik: f64) -> Result<Self> {
        let (n, k) = tau.shape();
        if n == 0 || k == 0 {
            return Err(Error::DimensionMismatch("empty posterior matrix".into()));
        }
        if pair_joint.len() != n - 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} pair slices, got {}",
                n - 1,
                pair_joint.len()
            )));
        }
        for i in 0..n {
            let s: f64 = tau.row(i).iter().sum();
            if (s - 1.0).abs() > 1e-10 || tau.row(i).iter().any(|&t| t < 0.0) {
                return Err(Error::InvalidInput(format!("posterior row {i} is not a distribution")));
            }
        }
        let mut pair = Vec::with_capacity((n - 1) * k * k);
        for (i, slice) in pair_joint.iter().enumerate() {
            if slice.shape() != (k, k) {
                return Err(Error::DimensionMismatch(format!("pair slice {i} has wrong shape")));
            }
            if (slice.sum() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!("pair slice {i} does not sum to one")));
            }
            for a in 0..k {
                for b in 0..k {
                    pair.push(slice[(a, b)]);
                }
            }
        }
        Ok(Self { tau, pair, log_lik })
    }

    pub fn n(&self) -> usize {
        self.tau.nrows()
    }

    pub fn k(&self) -> usize {
        self.tau.ncols()
    }

    /// `tau[(i, j)] = P(X_i = j | Y)`.
    pub fn tau(&self) -> &DMatrix<f64> {
        &self.tau
    }

    pub fn log_lik(&self) -> f64 {
        self.log_lik
    }

    /// `P(X_i = a, X_{i+1} = b | Y)` for `i < n - 1`.
    pub fn pair(&self, i: usize, a: usize, b: usize) -> f64 {
        let k = self.k();
        self.pair[i * k * k + a * k + b]
    }

    pub fn pair_joint(&self, i: usize) -> DMatrix<f64> {
        let k = self.k();
        DMatrix::from_fn(k, k, |a, b| self.pair(i, a, b))
    }

    /// `Σ_i P(X_i = a, X_{i+1} = b | Y)`.
    pub fn pair_sum(&self) -> DMatrix<f64> {
        let k = self.k();
        let mut out = DMatrix::zeros(k, k);
        for slice in self.pair.chunks_exact(k * k) {
            for a in 0..k {
                for b in 0..k {
                    out[(a, b)] += slice[a * k + b];
                }
            }
        }
        out
    }
}

fn check_dims(model: &TransitionModel, dens: &LogDensities) -> Result<()> {
    if model.k() != dens.k() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} states, emission table has {}",
            model.k(),
            dens.k()
        )));
    }
    if dens.n() == 0 {
        return Err(Error::SequenceTooShort { n: 0, min: 1 });
    }
    Ok(())
}

pub(crate) fn forward(log_init: &[f64], log_q: &[f64], dens: &LogDensities) -> (Vec<f64>, f64) {
    let (n, k) = (dens.n(), dens.k());
    let mut alpha = vec![0.0; n * k];
    for j in 0..k {
        alpha[j] = log_init[j] + dens.get(0, j);
    }
    let mut buf = vec![0.0; k];
    for i in 1..n {
        let (prev, cur) = alpha.split_at_mut(i * k);
        let prev = &prev[(i - 1) * k..];
        for b in 0..k {
            for a in 0..k {
                buf[a] = prev[a] + log_q[a * k + b];
            }
            cur[b] = log_sum_exp(&buf) + dens.get(i, b);
        }
    }
    let ll = log_sum_exp(&alpha[(n - 1) * k..]);
    (alpha, ll)
}

pub(crate) fn backward(log_q: &[f64], dens: &LogDensities) -> Vec<f64> {
    let (n, k) = (dens.n(), dens.k());
    let mut beta = vec![0.0; n * k];
    let mut buf = vec![0.0; k];
    for i in (0..n - 1).rev() {
        let (cur, next) = beta.split_at_mut((i + 1) * k);
        let cur = &mut cur[i * k..];
        let next = &next[..k];
        for a in 0..k {
            for b in 0..k {
                buf[b] = log_q[a * k + b] + dens.get(i + 1, b) + next[b];
            }
            cur[a] = log_sum_exp(&buf);
        }
    }
    beta
}

fn log_init(model: &TransitionModel) -> Vec<f64> {
    model.init().iter().map(|p| p.ln()).collect()
}

/// Forward–backward posteriors and the exact log-likelihood.
pub fn forward_backward(model: &TransitionModel, dens: &LogDensities) -> Result<PosteriorSet> {
    check_dims(model, dens)?;
    let (n, k) = (dens.n(), dens.k());
    let log_q = model.log_q();
    let (alpha, ll) = forward(&log_init(model), &log_q, dens);
    if !ll.is_finite() {
        return Err(Error::InvalidModel("sequence has zero probability under the model".into()));
    }
    let beta = backward(&log_q, dens);

    let mut tau = DMatrix::zeros(n, k);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..k {
            let v = (alpha[i * k + j] + beta[i * k + j] - ll).exp();
            tau[(i, j)] = v;
            s += v;
        }
        for j in 0..k {
            tau[(i, j)] /= s;
        }
    }

    let mut pair = vec![0.0; n.saturating_sub(1) * k * k];
    for i in 0..n.saturating_sub(1) {
        let slice = &mut pair[i * k * k..(i + 1) * k * k];
        let mut s = 0.0;
        for a in 0..k {
            for b in 0..k {
                let v = (alpha[i * k + a] + log_q[a * k + b] + dens.get(i + 1, b) + beta[(i + 1) * k + b]
                    - ll)
                    .exp();
                slice[a * k + b] = v;
                s += v;
            }
        }
        slice.iter_mut().for_each(|v| *v /= s);
    }

    Ok(PosteriorSet { tau, pair, log_lik: ll })
}

/// Log of the marginal density of the whole sequence.
pub fn log_likelihood(model: &TransitionModel, dens: &LogDensities) -> Result<f64> {
    check_dims(model, dens)?;
    let (_, ll) = forward(&log_init(model), &model.log_q(), dens);
    Ok(ll)
}

/// Sum over consecutive triplets of the log triplet density, each triplet
/// started from the model's initial law.
pub fn pseudo_log_likelihood(model: &TransitionModel, dens: &LogDensities) -> Result<f64> {
    check_dims(model, dens)?;
    let n = dens.n();
    if n < 3 {
        return Err(Error::SequenceTooShort { n, min: 3 });
    }
    let li = log_init(model);
    let lq = model.log_q();
    Ok((0..n - 2).map(|i| forward(&li, &lq, &dens.window(i, 3)).1).sum())
}

/// Log density of a single triplet `(Y_i, Y_{i+1}, Y_{i+2})`.
pub fn log_triplet_density(model: &TransitionModel, dens: &LogDensities, i: usize) -> Result<f64> {
    check_dims(model, dens)?;
    if i + 3 > dens.n() {
        return Err(Error::SequenceTooShort { n: dens.n(), min: i + 3 });
    }
    Ok(forward(&log_init(model), &model.log_q(), &dens.window(i, 3)).1)
}

/// Most probable state path. Ties go to the lowest state index, both in the
/// final argmax and at every back-pointer.
pub fn viterbi(model: &TransitionModel, dens: &LogDensities) -> Result<Vec<usize>> {
    check_dims(model, dens)?;
    let (n, k) = (dens.n(), dens.k());
    let lq = model.log_q();
    let li = log_init(model);
    let mut delta: Vec<f64> = (0..k).map(|j| li[j] + dens.get(0, j)).collect();
    let mut next = vec![0.0; k];
    let mut back = vec![0u32; n * k];
    for i in 1..n {
        for b in 0..k {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for a in 0..k {
                let v = delta[a] + lq[a * k + b];
                if v > best {
                    best = v;
                    arg = a;
                }
            }
            next[b] = best + dens.get(i, b);
            back[i * k + b] = arg as u32;
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut state = argmax_lowest(&delta);
    let mut path = vec![0; n];
    path[n - 1] = state;
    for i in (1..n).rev() {
        state = back[i * k + state] as usize;
        path[i - 1] = state;
    }
    Ok(path)
}

pub(crate) fn argmax_lowest(xs: &[f64]) -> usize {
    let mut arg = 0;
    let mut best = f64::NEG_INFINITY;
    for (j, &x) in xs.iter().enumerate() {
        if x > best {
            best = x;
            arg = j;
        }
    }
    arg
}

/// Position-wise posterior argmax, ties toward the lowest state index.
pub fn map_decode(post: &PosteriorSet) -> Vec<usize> {
    let tau = post.tau();
    (0..tau.nrows())
        .map(|i| argmax_lowest(&tau.row(i).iter().copied().collect::<Vec<_>>()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q2() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.4, 0.6])
    }

    #[test]
    fn stationary_uniform_rows() {
        let q = DMatrix::from_element(2, 2, 0.5);
        let pi = stationary_distribution(&q).unwrap();
        assert_relative_eq!(pi[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(pi[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn stationary_two_state() {
        let pi = stationary_distribution(&q2()).unwrap();
        assert_relative_eq!(pi[0], 4.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(pi[1], 3.0 / 7.0, epsilon = 1e-12);
        let tm = TransitionModel::new(q2(), pi).unwrap();
        assert!(tm.is_stationary());
    }

    #[test]
    fn stationary_identity_is_not_unique() {
        let q = DMatrix::<f64>::identity(3, 3);
        assert_eq!(stationary_distribution(&q), Err(Error::NonUniqueStationary));
    }

    #[test]
    fn rejects_bad_rows() {
        let q = DMatrix::from_row_slice(2, 2, &[0.7, 0.4, 0.4, 0.6]);
        assert!(matches!(TransitionModel::new(q, vec![0.5, 0.5]), Err(Error::InvalidModel(_))));
        assert!(matches!(
            TransitionModel::new(q2(), vec![1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    fn table(n: usize, rows: &[[f64; 2]], obs: &[usize]) -> LogDensities {
        LogDensities::from_densities(n, rows.len(), |i, j| rows[j][obs[i]])
    }

    #[test]
    fn fair_coin_likelihood() {
        let tm = TransitionModel::with_stationary_init(DMatrix::from_element(2, 2, 0.5)).unwrap();
        let dens = table(3, &[[0.5, 0.5], [0.5, 0.5]], &[0, 1, 1]);
        assert_relative_eq!(log_likelihood(&tm, &dens).unwrap(), (1.0f64 / 8.0).ln(), epsilon = 1e-14);
    }

    #[test]
    fn two_path_enumeration() {
        let tm = TransitionModel::with_stationary_init(q2()).unwrap();
        let f = [[0.9, 0.1], [0.2, 0.8]];
        let dens = table(2, &f, &[0, 1]);
        let pi = tm.init().to_vec();
        let mut expected = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                expected += pi[a] * f[a][0] * q2()[(a, b)] * f[b][1];
            }
        }
        assert_relative_eq!(log_likelihood(&tm, &dens).unwrap(), expected.ln(), epsilon = 1e-12);
    }

    #[test]
    fn single_state_posteriors() {
        let tm = TransitionModel::new(DMatrix::from_element(1, 1, 1.0), vec![1.0]).unwrap();
        let dens = LogDensities::from_densities(5, 1, |i, _| 0.1 * (i + 1) as f64);
        let post = forward_backward(&tm, &dens).unwrap();
        assert!(post.tau().iter().all(|&t| (t - 1.0).abs() < 1e-15));
        let expected: f64 = (1..=5).map(|i| (0.1 * i as f64).ln()).sum();
        assert_relative_eq!(post.log_lik(), expected, epsilon = 1e-12);
        assert_eq!(viterbi(&tm, &dens).unwrap(), vec![0; 5]);
    }

    #[test]
    fn uninformative_emissions_give_stationary_posteriors() {
        let tm = TransitionModel::with_stationary_init(q2()).unwrap();
        let dens = LogDensities::from_densities(6, 2, |i, _| 0.05 + i as f64 * 0.01);
        let post = forward_backward(&tm, &dens).unwrap();
        for i in 0..6 {
            assert_relative_eq!(post.tau()[(i, 0)], 4.0 / 7.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pseudo_likelihood_on_three_points_is_likelihood() {
        let tm = TransitionModel::with_stationary_init(q2()).unwrap();
        let dens = table(3, &[[0.9, 0.1], [0.2, 0.8]], &[0, 1, 0]);
        assert_relative_eq!(
            pseudo_log_likelihood(&tm, &dens).unwrap(),
            log_likelihood(&tm, &dens).unwrap(),
            epsilon = 1e-13
        );
        assert_eq!(
            pseudo_log_likelihood(&tm, &dens.window(0, 2)),
            Err(Error::SequenceTooShort { n: 2, min: 3 })
        );
    }

    #[test]
    fn disjoint_supports_viterbi_is_deterministic() {
        let tm = TransitionModel::with_stationary_init(q2()).unwrap();
        let obs = [0, 1, 1, 0, 1, 0, 0];
        let dens = table(obs.len(), &[[1.0, 0.0], [0.0, 1.0]], &obs);
        assert_eq!(viterbi(&tm, &dens).unwrap(), obs.to_vec());
    }

    #[test]
    fn map_ties_go_low() {
        let tau = DMatrix::from_row_slice(2, 2, &[0.2, 0.8, 0.5, 0.5]);
        let pair = vec![DMatrix::from_row_slice(2, 2, &[0.1, 0.1, 0.4, 0.4])];
        let post = PosteriorSet::new(tau, &pair, 0.0).unwrap();
        assert_eq!(map_decode(&post), vec![1, 0]);
    }

    #[test]
    fn zero_density_is_floored() {
        let tm = TransitionModel::with_stationary_init(q2()).unwrap();
        let dens = LogDensities::from_densities(4, 2, |_, _| 0.0);
        let ll = log_likelihood(&tm, &dens).unwrap();
        assert!(ll.is_finite());
        assert_relative_eq!(ll, 4.0 * DENSITY_FLOOR.ln(), epsilon = 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let tm = TransitionModel::with_stationary_init(q2()).unwrap();
        let dens = LogDensities::from_densities(4, 3, |_, _| 0.5);
        assert!(matches!(forward_backward(&tm, &dens), Err(Error::DimensionMismatch(_))));
    }
}
