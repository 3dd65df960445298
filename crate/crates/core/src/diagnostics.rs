//! Numerical checks of the identifiability conditions: full-rank
//! transitions and linearly independent emission laws.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::discrete::NegBinParams;
use crate::linalg::{normalize_rows, rth_singular_value};
use crate::mixture::{check_psi_rank, Component};
use crate::model::{EmissionModel, Hmm};
use crate::obs::RowRef;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

const GRID_1D: usize = 512;
const GRID_2D: usize = 64;
const PAD: f64 = 3.0;
/// Count supports are truncated where every state has less than this tail mass.
const COUNT_TAIL: f64 = 1e-12;
const COUNT_CAP: u64 = 100_000;

/// How much a positive independence verdict proves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evidence {
    /// Independence of the restrictions to a finite support implies
    /// independence of the laws themselves.
    Rigorous,
    /// Independence observed on a finite evaluation grid only.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentifiabilityReport {
    pub q_full_rank: bool,
    pub q_sigma_min: f64,
    pub emissions_independent: bool,
    pub emission_sigma_min: f64,
    pub tolerance: f64,
    pub evidence: Evidence,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub psi_full_rank: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub psi_sigma_min: Option<f64>,
    pub notes: Vec<String>,
}

impl IdentifiabilityReport {
    pub fn identifiable(&self) -> bool {
        self.q_full_rank && self.emissions_independent && self.psi_full_rank.unwrap_or(true)
    }
}

/// Points at which emission densities are compared.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalGrid {
    /// Integers `0..=hi`.
    Counts { hi: u64 },
    /// Row-major points of dimension `dim`.
    Points { dim: usize, points: Vec<f64> },
}

impl EvalGrid {
    pub fn len(&self) -> usize {
        match self {
            EvalGrid::Counts { hi } => *hi as usize + 1,
            EvalGrid::Points { dim, points } => points.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Emission densities of every state on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionProfile {
    pub grid: EvalGrid,
    /// `k × grid.len()` density values.
    pub values: DMatrix<f64>,
    /// Measure attached to each grid point (1 for counts).
    pub cell: f64,
}

impl EmissionProfile {
    /// Densities of another emission model on this profile's grid.
    pub fn evaluate(&self, emission: &EmissionModel) -> DMatrix<f64> {
        evaluate_on(&self.grid, emission)
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.grid, EvalGrid::Points { .. })
    }
}

fn density_at(emission: &EmissionModel, j: usize, y: &[f64]) -> f64 {
    match emission {
        EmissionModel::Discrete(t) => t.prob(j, y[0] as u64),
        EmissionModel::NegBin(nb) => nb.params()[j].ln_pmf(y[0] as u64).exp(),
        EmissionModel::Mixture(m) => {
            if y.len() == 1 {
                m.density(j, RowRef::Count(y[0]))
            } else {
                m.density(j, RowRef::Slice(y))
            }
        }
        EmissionModel::Kernel(ke) => ke.density_eval(j, y),
    }
}

fn evaluate_on(grid: &EvalGrid, emission: &EmissionModel) -> DMatrix<f64> {
    let k = emission.k();
    match grid {
        EvalGrid::Counts { hi } => {
            DMatrix::from_fn(k, *hi as usize + 1, |j, y| density_at(emission, j, &[y as f64]))
        }
        EvalGrid::Points { dim, points } => {
            let g = points.len() / dim;
            DMatrix::from_fn(k, g, |j, p| density_at(emission, j, &points[p * dim..(p + 1) * dim]))
        }
    }
}

fn negbin_upper(p: &NegBinParams) -> u64 {
    let mut cdf = 0.0;
    let mut y = 0;
    while y < COUNT_CAP {
        cdf += p.ln_pmf(y).exp();
        if cdf >= 1.0 - COUNT_TAIL {
            break;
        }
        y += 1;
    }
    y
}

fn component_upper(c: &Component) -> u64 {
    match c {
        Component::Poisson { rate } => (rate + 12.0 * rate.sqrt() + 30.0).ceil() as u64,
        Component::Binomial { trials, .. } => *trials,
        Component::DiracAtZero => 0,
        Component::Triangular { size } => size.saturating_sub(1),
        Component::Gaussian { .. } => 0,
    }
}

/// Per-coordinate `(low, high, spread)` for a continuous emission.
fn continuous_ranges(emission: &EmissionModel) -> Vec<(f64, f64, f64)> {
    let d = emission.dim();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY, 0.0f64); d];
    match emission {
        EmissionModel::Kernel(ke) => {
            for u in 0..ke.n_anchors() {
                for (c, &v) in ke.anchor(u).iter().enumerate() {
                    ranges[c].0 = ranges[c].0.min(v);
                    ranges[c].1 = ranges[c].1.max(v);
                }
            }
            for r in &mut ranges {
                r.2 = ke.bandwidth();
            }
        }
        EmissionModel::Mixture(m) => {
            for comp in m.components() {
                if let Component::Gaussian { mean, var } = comp {
                    for c in 0..d {
                        ranges[c].0 = ranges[c].0.min(mean[c]);
                        ranges[c].1 = ranges[c].1.max(mean[c]);
                        ranges[c].2 = ranges[c].2.max(var[c].sqrt());
                    }
                }
            }
        }
        _ => unreachable!("count emissions use an integer grid"),
    }
    ranges
}

/// Evaluation grid for an emission model. `refine` multiplies the
/// resolution of continuous grids.
pub fn emission_grid(emission: &EmissionModel, refine: usize) -> (EvalGrid, f64) {
    let refine = refine.max(1);
    if emission.is_count() {
        let hi = match emission {
            EmissionModel::Discrete(t) => t.y_max(),
            EmissionModel::NegBin(nb) => nb.params().iter().map(negbin_upper).max().unwrap_or(0),
            EmissionModel::Mixture(m) => m.components().iter().map(component_upper).max().unwrap_or(0),
            EmissionModel::Kernel(_) => unreachable!(),
        };
        return (EvalGrid::Counts { hi: hi.min(COUNT_CAP) }, 1.0);
    }
    let ranges = continuous_ranges(emission);
    let d = ranges.len();
    let axis = |(lo, hi, spread): (f64, f64, f64), points: usize| -> (Vec<f64>, f64) {
        let a = lo - PAD * spread;
        let b = hi + PAD * spread;
        let step = if points > 1 { (b - a) / (points - 1) as f64 } else { 1.0 };
        ((0..points).map(|i| a + step * i as f64).collect(), step.max(f64::MIN_POSITIVE))
    };
    match d {
        1 => {
            let (xs, step) = axis(ranges[0], GRID_1D * refine);
            (EvalGrid::Points { dim: 1, points: xs }, step)
        }
        2 => {
            let (xs, sx) = axis(ranges[0], GRID_2D * refine);
            let (ys, sy) = axis(ranges[1], GRID_2D * refine);
            let points = xs.iter().flat_map(|&x| ys.iter().flat_map(move |&y| [x, y])).collect();
            (EvalGrid::Points { dim: 2, points }, sx * sy)
        }
        _ => {
            // Higher dimensions: evaluate at the support points and their
            // axis-wise offsets by one spread unit.
            let mut centers: Vec<Vec<f64>> = Vec::new();
            match emission {
                EmissionModel::Kernel(ke) => centers.extend((0..ke.n_anchors()).map(|u| ke.anchor(u).to_vec())),
                EmissionModel::Mixture(m) => centers.extend(m.components().iter().filter_map(|c| match c {
                    Component::Gaussian { mean, .. } => Some(mean.clone()),
                    _ => None,
                })),
                _ => unreachable!(),
            }
            let mut points = Vec::new();
            for c in &centers {
                points.extend_from_slice(c);
                for axis in 0..d {
                    for step in 1..=refine {
                        for sign in [-1.0, 1.0] {
                            let mut p = c.clone();
                            p[axis] += sign * ranges[axis].2 * step as f64 / refine as f64;
                            points.extend_from_slice(&p);
                        }
                    }
                }
            }
            (EvalGrid::Points { dim: d, points }, 1.0)
        }
    }
}

pub fn emission_profile(emission: &EmissionModel, refine: usize) -> EmissionProfile {
    let (grid, cell) = emission_grid(emission, refine);
    let values = evaluate_on(&grid, emission);
    EmissionProfile { grid, values, cell }
}

/// Full rank of `Q`, judged by its smallest singular value.
pub fn check_transition_rank(q: &DMatrix<f64>, tol: f64) -> (bool, f64) {
    let sigma = rth_singular_value(q, q.nrows());
    (sigma > tol, sigma)
}

/// Linear independence of the emission laws with the default grid.
pub fn check_emission_independence(emission: &EmissionModel, tol: f64) -> (bool, f64) {
    check_emission_independence_refined(emission, tol, 1)
}

/// Count families: `k`-th singular value of the row-normalized table.
/// Continuous families: smallest eigenvalue of the normalized Gram matrix
/// of the densities on the evaluation grid.
pub fn check_emission_independence_refined(emission: &EmissionModel, tol: f64, refine: usize) -> (bool, f64) {
    let profile = emission_profile(emission, refine);
    let k = emission.k();
    let normalized = normalize_rows(&profile.values);
    let sigma = if profile.is_continuous() {
        let gram = &normalized * normalized.transpose();
        rth_singular_value(&gram, k)
    } else {
        rth_singular_value(&normalized, k)
    };
    (sigma > tol, sigma)
}

pub fn diagnose(model: &Hmm, tol: f64) -> IdentifiabilityReport {
    let (q_full_rank, q_sigma_min) = check_transition_rank(model.transition().q(), tol);
    let (emissions_independent, emission_sigma_min) = check_emission_independence(model.emission(), tol);
    let evidence = if model.emission().is_count() { Evidence::Rigorous } else { Evidence::Heuristic };
    let mut notes = Vec::new();
    if !q_full_rank {
        notes.push(format!("transition matrix is rank deficient (smallest singular value {q_sigma_min:.3e})"));
    }
    if !emissions_independent {
        notes.push(format!(
            "emission laws are linearly dependent (smallest singular value {emission_sigma_min:.3e})"
        ));
    }
    if evidence == Evidence::Heuristic {
        notes.push("emission independence assessed on a finite evaluation grid".to_string());
    }
    let (psi_full_rank, psi_sigma_min) = match model.emission() {
        EmissionModel::Mixture(m) => {
            let (ok, sigma) = check_psi_rank(m.psi(), tol);
            notes.push(if ok {
                format!("mixture proportion matrix has full row rank (k-th singular value {sigma:.3e})")
            } else {
                format!("mixture proportion matrix is rank deficient (k-th singular value {sigma:.3e})")
            });
            (Some(ok), Some(sigma))
        }
        _ => (None, None),
    };
    IdentifiabilityReport {
        q_full_rank,
        q_sigma_min,
        emissions_independent,
        emission_sigma_min,
        tolerance: tol,
        evidence,
        psi_full_rank,
        psi_sigma_min,
        notes,
    }
}
