//! JSON model files. Loading re-validates every parameter through the
//! library constructors.

use nalgebra::DMatrix;
use nphmm::discrete::{DiscreteEmissionTable, NegBinEmission, NegBinParams};
use nphmm::hmm::{matrix_from_rows, matrix_to_rows};
use nphmm::kernel::{KernelEmission, KernelId};
use nphmm::mixture::{Component, MixtureEmission};
use nphmm::{EmissionModel, Error, Hmm, TransitionModel};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub k: usize,
    pub transition: Vec<Vec<f64>>,
    pub init: Vec<f64>,
    pub emission: EmissionBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EmissionBlock {
    Discrete {
        probs: Vec<Vec<f64>>,
    },
    Negbin {
        params: Vec<NegBinBlock>,
    },
    Mixture {
        m: usize,
        psi: Vec<Vec<f64>>,
        components: Vec<ComponentBlock>,
    },
    Kernel {
        kernel: String,
        bandwidth: f64,
        dim: usize,
        /// One row per anchor.
        anchors: Vec<Vec<f64>>,
        /// One row per anchor, one column per state.
        weights: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegBinBlock {
    pub r: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ComponentBlock {
    Poisson { rate: f64 },
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    Binomial { trials: u64, p: f64 },
    DiracAtZero,
    Triangular { size: u64 },
}

impl From<&Component> for ComponentBlock {
    fn from(c: &Component) -> Self {
        match c {
            Component::Poisson { rate } => ComponentBlock::Poisson { rate: *rate },
            Component::Gaussian { mean, var } => ComponentBlock::Gaussian { mean: mean.clone(), var: var.clone() },
            Component::Binomial { trials, p } => ComponentBlock::Binomial { trials: *trials, p: *p },
            Component::DiracAtZero => ComponentBlock::DiracAtZero,
            Component::Triangular { size } => ComponentBlock::Triangular { size: *size },
        }
    }
}

impl From<&ComponentBlock> for Component {
    fn from(c: &ComponentBlock) -> Self {
        match c {
            ComponentBlock::Poisson { rate } => Component::Poisson { rate: *rate },
            ComponentBlock::Gaussian { mean, var } => Component::Gaussian { mean: mean.clone(), var: var.clone() },
            ComponentBlock::Binomial { trials, p } => Component::Binomial { trials: *trials, p: *p },
            ComponentBlock::DiracAtZero => Component::DiracAtZero,
            ComponentBlock::Triangular { size } => Component::Triangular { size: *size },
        }
    }
}

impl ModelFile {
    pub fn from_model(model: &Hmm) -> Self {
        let emission = match model.emission() {
            EmissionModel::Discrete(t) => EmissionBlock::Discrete { probs: matrix_to_rows(t.probs()) },
            EmissionModel::NegBin(nb) => EmissionBlock::Negbin {
                params: nb.params().iter().map(|p| NegBinBlock { r: p.r, p: p.p }).collect(),
            },
            EmissionModel::Mixture(mix) => EmissionBlock::Mixture {
                m: mix.m(),
                psi: matrix_to_rows(mix.psi()),
                components: mix.components().iter().map(ComponentBlock::from).collect(),
            },
            EmissionModel::Kernel(ke) => EmissionBlock::Kernel {
                kernel: ke.kernel().name().to_string(),
                bandwidth: ke.bandwidth(),
                dim: ke.dim(),
                anchors: ke.anchors().chunks(ke.dim()).map(<[f64]>::to_vec).collect(),
                weights: matrix_to_rows(ke.weights()),
            },
        };
        Self {
            schema_version: SCHEMA_VERSION,
            k: model.k(),
            transition: matrix_to_rows(model.transition().q()),
            init: model.transition().init().to_vec(),
            emission,
        }
    }

    pub fn to_model(&self) -> nphmm::Result<Hmm> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidModel(format!("unsupported schema version {}", self.schema_version)));
        }
        let transition = TransitionModel::from_rows(&self.transition, self.init.clone())?;
        if transition.k() != self.k {
            return Err(Error::DimensionMismatch(format!("k = {} but transition has {} rows", self.k, transition.k())));
        }
        let emission = match &self.emission {
            EmissionBlock::Discrete { probs } => EmissionModel::Discrete(DiscreteEmissionTable::from_rows(probs)?),
            EmissionBlock::Negbin { params } => EmissionModel::NegBin(NegBinEmission::new(
                params.iter().map(|b| NegBinParams::new(b.r, b.p)).collect::<nphmm::Result<_>>()?,
            )?),
            EmissionBlock::Mixture { m, psi, components } => {
                let psi = matrix_from_rows(psi)?;
                if psi.ncols() != *m {
                    return Err(Error::DimensionMismatch(format!("m = {m} but psi has {} columns", psi.ncols())));
                }
                EmissionModel::Mixture(MixtureEmission::new(psi, components.iter().map(Component::from).collect())?)
            }
            EmissionBlock::Kernel { kernel, bandwidth, dim, anchors, weights } => {
                if anchors.iter().any(|a| a.len() != *dim) {
                    return Err(Error::DimensionMismatch(format!("every anchor must have {dim} coordinates")));
                }
                let w: DMatrix<f64> = matrix_from_rows(weights)?;
                EmissionModel::Kernel(KernelEmission::new(
                    *dim,
                    anchors.concat(),
                    *bandwidth,
                    KernelId::from_name(kernel)?,
                    w,
                )?)
            }
        };
        Hmm::new(transition, emission)
    }
}
