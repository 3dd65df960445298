//! Simulation of labeled sequences, clustering scores and the benchmark
//! harness comparing emission families on simulated data.

use std::fmt::{self, Write as _};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discrete::{NegBinParams, PenaltySpec};
use crate::em::{align_paths, derive_seed, fit, EmissionFamily, FitOptions};
use crate::error::{Error, Result};
use crate::mixture::sample_index;
use crate::model::Hmm;
use crate::obs::ObservationSequence;

/// Finite discrete law on the non-negative integers.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<u64>,
    probs: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(values: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidInput("distribution needs matching non-empty values and probabilities".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidInput("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        Ok(Self { values, probs })
    }

    /// Law with `pmf[y]` at value `y`.
    pub fn from_pmf(pmf: &[f64]) -> Result<Self> {
        Self::new((0..pmf.len() as u64).collect(), pmf.to_vec())
    }

    /// A single atom.
    pub fn point(value: u64) -> Self {
        Self { values: vec![value], probs: vec![1.0] }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        self.values[sample_index(&self.probs, rng)]
    }
}

/// Piecewise-constant state path with per-state emission laws.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionScheme {
    regions: Vec<(usize, usize)>,
    distributions: Vec<EmpiricalDistribution>,
}

impl RegionScheme {
    /// `regions` holds `(state, length)` pairs with 0-based states.
    pub fn new(regions: Vec<(usize, usize)>, distributions: Vec<EmpiricalDistribution>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidInput("at least one region is required".into()));
        }
        for &(state, len) in &regions {
            if state >= distributions.len() {
                return Err(Error::InvalidInput(format!("region state {state} has no distribution")));
            }
            if len == 0 {
                return Err(Error::InvalidInput("region lengths must be >= 1".into()));
            }
        }
        Ok(Self { regions, distributions })
    }

    pub fn regions(&self) -> &[(usize, usize)] {
        &self.regions
    }

    pub fn distributions(&self) -> &[EmpiricalDistribution] {
        &self.distributions
    }

    pub fn k(&self) -> usize {
        self.distributions.len()
    }

    pub fn len(&self) -> usize {
        self.regions.iter().map(|r| r.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Observations with an optional ground-truth state path.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub obs: ObservationSequence,
    pub truth: Option<Vec<usize>>,
}

pub fn simulate_regions(scheme: &RegionScheme, seed: u64) -> LabeledSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(scheme.len());
    let mut truth = Vec::with_capacity(scheme.len());
    for &(state, len) in &scheme.regions {
        for _ in 0..len {
            values.push(scheme.distributions[state].sample(&mut rng));
            truth.push(state);
        }
    }
    LabeledSequence { obs: ObservationSequence::Counts(values), truth: Some(truth) }
}

pub fn simulate_hmm(model: &Hmm, n: usize, seed: u64) -> Result<LabeledSequence> {
    if n == 0 {
        return Err(Error::SequenceTooShort { n, min: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tm = model.transition();
    let q = tm.q();
    let k = model.k();
    let rows: Vec<Vec<f64>> = (0..k).map(|a| q.row(a).iter().copied().collect()).collect();
    let mut truth = Vec::with_capacity(n);
    let mut state = sample_index(tm.init(), &mut rng);
    let mut raw = Vec::with_capacity(n * model.emission().dim());
    for i in 0..n {
        if i > 0 {
            state = sample_index(&rows[state], &mut rng);
        }
        truth.push(state);
        raw.extend(model.emission().sample(state, &mut rng));
    }
    let obs = if model.emission().is_count() {
        ObservationSequence::Counts(raw.into_iter().map(|v| v as u64).collect())
    } else {
        ObservationSequence::real(model.emission().dim(), raw)?
    };
    Ok(LabeledSequence { obs, truth: Some(truth) })
}

fn pairs(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

/// Share of position pairs on which both labelings agree about
/// same-cluster versus different-cluster membership.
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::SequenceTooShort { n, min: 2 });
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![0u64; ka * kb];
    let mut rows = vec![0u64; ka];
    let mut cols = vec![0u64; kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
        rows[x] += 1;
        cols[y] += 1;
    }
    let total = pairs(n as u64);
    let both_same: u64 = table.iter().map(|&c| pairs(c)).sum();
    let same_a: u64 = rows.iter().map(|&c| pairs(c)).sum();
    let same_b: u64 = cols.iter().map(|&c| pairs(c)).sum();
    // Concordant = total - (same in a only) - (same in b only).
    let concordant = total + 2 * both_same - same_a - same_b;
    Ok(concordant as f64 / total as f64)
}

/// Accuracy after the best relabeling of `pred` onto `truth`.
pub fn aligned_accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: pred.len() });
    }
    if truth.is_empty() {
        return Err(Error::SequenceTooShort { n: 0, min: 1 });
    }
    let k = truth.iter().chain(pred).max().unwrap() + 1;
    let perm = align_paths(truth, pred, k)?;
    let hits = truth.iter().zip(pred).filter(|(&t, &p)| perm[p] == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoder {
    Viterbi,
    Map,
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Viterbi => "viterbi",
            Decoder::Map => "map",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "viterbi" => Ok(Decoder::Viterbi),
            "map" => Ok(Decoder::Map),
            other => Err(Error::InvalidInput(format!("unknown decoder '{other}'"))),
        }
    }

    pub fn decode(&self, model: &Hmm, obs: &ObservationSequence) -> Result<Vec<usize>> {
        match self {
            Decoder::Viterbi => model.viterbi(obs),
            Decoder::Map => model.map_decode(obs),
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One model fitted to every replicate. The seed in `options` is replaced
/// by the replicate's fit seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub name: String,
    pub k: usize,
    pub options: FitOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Regions(RegionScheme),
    Hmm { model: Hmm, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub replicates: usize,
    pub design: Design,
    pub models: Vec<ModelConfig>,
    pub decoders: Vec<Decoder>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub replicate: usize,
    pub model: String,
    pub decoder: Decoder,
    pub lambda: Option<f64>,
    pub rand_index: f64,
    pub aligned_accuracy: f64,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the fit or decoding failed; scores are then NaN.
    pub error: Option<String>,
}

pub const CSV_HEADER: &str = "replicate,model,decoder,lambda,rand_index,aligned_accuracy,loglik,iterations,converged";

/// Seeds for simulating and fitting replicate `s`.
pub fn replicate_seeds(master: u64, s: usize) -> (u64, u64) {
    (derive_seed(master, 2 * s as u64), derive_seed(master, 2 * s as u64 + 1))
}

fn run_replicate(config: &BenchmarkConfig, s: usize) -> Vec<BenchmarkRow> {
    let (data_seed, fit_seed) = replicate_seeds(config.seed, s);
    let data = match &config.design {
        Design::Regions(scheme) => Ok(simulate_regions(scheme, data_seed)),
        Design::Hmm { model, n } => simulate_hmm(model, *n, data_seed),
    };
    let mut rows = Vec::new();
    for mc in &config.models {
        let lambda = mc.options.family.lambda();
        let failed = |decoder: Decoder, err: &Error| BenchmarkRow {
            replicate: s,
            model: mc.name.clone(),
            decoder,
            lambda,
            rand_index: f64::NAN,
            aligned_accuracy: f64::NAN,
            loglik: f64::NAN,
            iterations: 0,
            converged: false,
            error: Some(err.to_string()),
        };
        let data = match &data {
            Ok(d) => d,
            Err(e) => {
                rows.extend(config.decoders.iter().map(|&d| failed(d, e)));
                continue;
            }
        };
        let opts = FitOptions { seed: fit_seed, ..mc.options.clone() };
        let report = match fit(&data.obs, mc.k, &opts) {
            Ok(r) => r,
            Err(e) => {
                rows.extend(config.decoders.iter().map(|&d| failed(d, &e)));
                continue;
            }
        };
        for &decoder in &config.decoders {
            let scored = decoder.decode(&report.model, &data.obs).and_then(|path| match &data.truth {
                Some(t) => Ok((rand_index(t, &path)?, aligned_accuracy(t, &path)?)),
                None => Ok((f64::NAN, f64::NAN)),
            });
            match scored {
                Ok((ri, acc)) => rows.push(BenchmarkRow {
                    replicate: s,
                    model: mc.name.clone(),
                    decoder,
                    lambda,
                    rand_index: ri,
                    aligned_accuracy: acc,
                    loglik: report.log_likelihood,
                    iterations: report.iterations,
                    converged: report.converged,
                    error: None,
                }),
                Err(e) => rows.push(failed(decoder, &e)),
            }
        }
    }
    rows
}

/// Simulates, fits, decodes and scores every replicate. Rows come out in
/// replicate, model, decoder order whatever the scheduling.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    if config.replicates == 0 {
        return Err(Error::InvalidInput("replicates must be >= 1".into()));
    }
    if config.models.is_empty() || config.decoders.is_empty() {
        return Err(Error::InvalidInput("at least one model and one decoder are required".into()));
    }
    let per_replicate: Vec<Vec<BenchmarkRow>> =
        (0..config.replicates).into_par_iter().map(|s| run_replicate(config, s)).collect();
    Ok(per_replicate.into_iter().flatten().collect())
}

pub fn rows_to_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let lambda = r.lambda.map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.replicate + 1,
            r.model,
            r.decoder,
            lambda,
            r.rand_index,
            r.aligned_accuracy,
            r.loglik,
            r.iterations,
            r.converged
        );
    }
    out
}

/// Mean of a score over rows matching `model` (and `lambda` when given),
/// ignoring failed rows.
pub fn mean_score(rows: &[BenchmarkRow], model: &str, decoder: Decoder, lambda: Option<f64>, score: impl Fn(&BenchmarkRow) -> f64) -> f64 {
    let picked: Vec<f64> = rows
        .iter()
        .filter(|r| r.model == model && r.decoder == decoder && (lambda.is_none() || r.lambda == lambda))
        .map(&score)
        .filter(|v| v.is_finite())
        .collect();
    if picked.is_empty() {
        f64::NAN
    } else {
        picked.iter().sum::<f64>() / picked.len() as f64
    }
}

pub const DESK_LAMBDAS: [f64; 8] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
const DESK_LAYOUT: [(usize, usize); 14] = [
    (0, 120),
    (1, 60),
    (0, 90),
    (2, 70),
    (3, 40),
    (2, 50),
    (0, 110),
    (1, 80),
    (3, 60),
    (1, 50),
    (0, 100),
    (2, 60),
    (3, 45),
    (0, 65),
];
const DESK_MEANS: [f64; 4] = [0.3, 1.5, 5.0, 12.0];
const DESK_Y_MAX: u64 = 80;

/// `0.67·NB(μ, r=3) + 0.30·NB(3μ, r=30) + 0.03·NB(40, r=1)` truncated to
/// `0..=80`: a skewed bulk, a tight secondary mode and rare large outliers.
pub fn contaminated_negbin(mean: f64) -> EmpiricalDistribution {
    let parts = [(0.67, 3.0, mean), (0.30, 30.0, 3.0 * mean), (0.03, 1.0, 40.0)];
    let laws: Vec<(f64, NegBinParams)> = parts
        .iter()
        .map(|&(w, r, m)| (w, NegBinParams::from_mean(r, m).expect("positive mean")))
        .collect();
    let mut pmf: Vec<f64> =
        (0..=DESK_Y_MAX).map(|y| laws.iter().map(|(w, p)| w * p.ln_pmf(y).exp()).sum()).collect();
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    EmpiricalDistribution::from_pmf(&pmf).expect("normalized")
}

/// Four states, 1000 positions in 14 regions, contaminated negative
/// binomial emissions.
pub fn desk_region_scheme() -> RegionScheme {
    let distributions = DESK_MEANS.iter().map(|&m| contaminated_negbin(m)).collect();
    RegionScheme::new(DESK_LAYOUT.to_vec(), distributions).expect("valid layout")
}

/// The default study: NB and NP fits plus the regularized sweep.
pub fn desk_benchmark_config(replicates: usize, seed: u64) -> BenchmarkConfig {
    let mut models = vec![
        ModelConfig { name: "nb".into(), k: 4, options: FitOptions::with_family(EmissionFamily::NegBin) },
        ModelConfig {
            name: "np".into(),
            k: 4,
            options: FitOptions::with_family(EmissionFamily::NonParametric { y_max: None }),
        },
    ];
    for &lambda in &DESK_LAMBDAS {
        let penalty = PenaltySpec::new(lambda, 2.0).expect("valid penalty");
        models.push(ModelConfig {
            name: "np-reg".into(),
            k: 4,
            options: FitOptions::with_family(EmissionFamily::Regularized { penalty, y_max: None }),
        });
    }
    BenchmarkConfig {
        replicates,
        design: Design::Regions(desk_region_scheme()),
        models,
        decoders: vec![Decoder::Viterbi],
        seed,
    }
}
