//! A complete HMM: transition model plus one of the emission families.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::discrete::{DiscreteEmissionTable, NegBinEmission};
use crate::error::{Error, Result};
use crate::hmm::{self, LogDensities, PosteriorSet, TransitionModel};
use crate::kernel::KernelEmission;
use crate::mixture::{sample_index, Component, MixtureEmission};
use crate::obs::ObservationSequence;

#[derive(Debug, Clone, PartialEq)]
pub enum EmissionModel {
    Discrete(DiscreteEmissionTable),
    NegBin(NegBinEmission),
    Mixture(MixtureEmission),
    Kernel(KernelEmission),
}

impl EmissionModel {
    pub fn k(&self) -> usize {
        match self {
            EmissionModel::Discrete(t) => t.k(),
            EmissionModel::NegBin(nb) => nb.k(),
            EmissionModel::Mixture(m) => m.k(),
            EmissionModel::Kernel(ke) => ke.k(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            EmissionModel::Discrete(_) => "discrete",
            EmissionModel::NegBin(_) => "negbin",
            EmissionModel::Mixture(_) => "mixture",
            EmissionModel::Kernel(_) => "kernel",
        }
    }

    /// Whether the family lives on the non-negative integers.
    pub fn is_count(&self) -> bool {
        match self {
            EmissionModel::Discrete(_) | EmissionModel::NegBin(_) => true,
            EmissionModel::Mixture(m) => m.is_count(),
            EmissionModel::Kernel(_) => false,
        }
    }

    pub fn log_densities(&self, obs: &ObservationSequence) -> Result<LogDensities> {
        match self {
            EmissionModel::Discrete(t) => Ok(t.log_densities(counts_of(obs, "discrete")?)),
            EmissionModel::NegBin(nb) => Ok(nb.log_densities(counts_of(obs, "negative binomial")?)),
            EmissionModel::Mixture(m) => {
                m.check_compatible(obs)?;
                Ok(m.log_densities(obs))
            }
            EmissionModel::Kernel(ke) => ke.log_densities(obs),
        }
    }

    pub fn reordered(&self, order: &[usize]) -> Self {
        match self {
            EmissionModel::Discrete(t) => EmissionModel::Discrete(t.reordered(order)),
            EmissionModel::NegBin(nb) => EmissionModel::NegBin(nb.reordered(order)),
            EmissionModel::Mixture(m) => EmissionModel::Mixture(m.reordered(order)),
            EmissionModel::Kernel(ke) => EmissionModel::Kernel(ke.reordered(order)),
        }
    }

    /// Draws one observation from state `j`.
    pub fn sample<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Vec<f64> {
        match self {
            EmissionModel::Discrete(t) => vec![sample_index(&t.row(j), rng) as f64],
            EmissionModel::NegBin(nb) => {
                let p = nb.params()[j];
                let lambda = Gamma::new(p.r, (1.0 - p.p) / p.p).expect("validated parameters").sample(rng);
                let y = if lambda > 0.0 { Poisson::new(lambda).map(|d| d.sample(rng)).unwrap_or(0.0) } else { 0.0 };
                vec![y]
            }
            EmissionModel::Mixture(m) => {
                let row: Vec<f64> = m.psi().row(j).iter().copied().collect();
                m.components()[sample_index(&row, rng)].sample(rng)
            }
            EmissionModel::Kernel(ke) => ke.sample(j, rng),
        }
    }

    /// Observation dimension (1 for count families).
    pub fn dim(&self) -> usize {
        match self {
            EmissionModel::Kernel(ke) => ke.dim(),
            EmissionModel::Mixture(m) => match &m.components()[0] {
                Component::Gaussian { mean, .. } => mean.len(),
                _ => 1,
            },
            _ => 1,
        }
    }
}

fn counts_of<'a>(obs: &'a ObservationSequence, family: &str) -> Result<&'a [u64]> {
    obs.as_counts()
        .ok_or_else(|| Error::IncompatibleFamily(format!("{family} emissions require count data")))
}

/// Transition model and emissions with matching state count.
#[derive(Debug, Clone, PartialEq)]
pub struct Hmm {
    transition: TransitionModel,
    emission: EmissionModel,
}

impl Hmm {
    pub fn new(transition: TransitionModel, emission: EmissionModel) -> Result<Self> {
        if transition.k() != emission.k() {
            return Err(Error::DimensionMismatch(format!(
                "transition has {} states, emissions {}",
                transition.k(),
                emission.k()
            )));
        }
        Ok(Self { transition, emission })
    }

    pub fn k(&self) -> usize {
        self.transition.k()
    }

    pub fn transition(&self) -> &TransitionModel {
        &self.transition
    }

    pub fn emission(&self) -> &EmissionModel {
        &self.emission
    }

    pub fn log_densities(&self, obs: &ObservationSequence) -> Result<LogDensities> {
        self.emission.log_densities(obs)
    }

    pub fn forward_backward(&self, obs: &ObservationSequence) -> Result<PosteriorSet> {
        hmm::forward_backward(&self.transition, &self.log_densities(obs)?)
    }

    pub fn log_likelihood(&self, obs: &ObservationSequence) -> Result<f64> {
        hmm::log_likelihood(&self.transition, &self.log_densities(obs)?)
    }

    pub fn pseudo_log_likelihood(&self, obs: &ObservationSequence) -> Result<f64> {
        hmm::pseudo_log_likelihood(&self.transition, &self.log_densities(obs)?)
    }

    pub fn viterbi(&self, obs: &ObservationSequence) -> Result<Vec<usize>> {
        hmm::viterbi(&self.transition, &self.log_densities(obs)?)
    }

    pub fn map_decode(&self, obs: &ObservationSequence) -> Result<Vec<usize>> {
        Ok(hmm::map_decode(&self.forward_backward(obs)?))
    }

    /// Relabels states so that new state `s` is old state `order[s]`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self { transition: self.transition.reordered(order), emission: self.emission.reordered(order) }
    }
}
