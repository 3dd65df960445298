//! Emission family options shared by `fit` and benchmark configs, and the
//! JSON schemas of simulation and benchmark configuration files.

use nphmm::discrete::PenaltySpec;
use nphmm::em::{Bandwidth, ComponentFamily, EmissionFamily, FitOptions};
use nphmm::kernel::KernelId;
use nphmm::simeval::{
    desk_benchmark_config, desk_region_scheme, BenchmarkConfig, Decoder, Design, EmpiricalDistribution, ModelConfig,
    RegionScheme,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Context};
use crate::model_file::ModelFile;

/// Emission family and its options, named after the `fit` flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilySpec {
    pub emission: String,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub y_max: Option<u64>,
    #[serde(default)]
    pub components: Option<usize>,
    #[serde(default)]
    pub component_family: Option<String>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default)]
    pub bandwidth_cv: bool,
    #[serde(default)]
    pub kernel: Option<String>,
    #[serde(default)]
    pub inner_iters: Option<usize>,
    #[serde(default)]
    pub stride: Option<usize>,
}

pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_INNER_ITERS: usize = 5;

impl FamilySpec {
    pub fn named(emission: &str) -> Self {
        Self {
            emission: emission.to_string(),
            lambda: None,
            alpha: None,
            y_max: None,
            components: None,
            component_family: None,
            trials: None,
            bandwidth: None,
            bandwidth_cv: false,
            kernel: None,
            inner_iters: None,
            stride: None,
        }
    }

    /// Resolves the options; `max_count` fills in the default number of
    /// binomial trials.
    pub fn to_family(&self, k: usize, max_count: Option<u64>) -> CliResult<EmissionFamily> {
        match self.emission.as_str() {
            "np" => Ok(EmissionFamily::NonParametric { y_max: self.y_max }),
            "np-reg" => {
                let lambda = self.lambda.unwrap_or(DEFAULT_LAMBDA);
                let alpha = self.alpha.unwrap_or(DEFAULT_ALPHA);
                let penalty = PenaltySpec::new(lambda, alpha).ctx("--lambda/--alpha")?;
                Ok(EmissionFamily::Regularized { penalty, y_max: self.y_max })
            }
            "nb" => Ok(EmissionFamily::NegBin),
            "mixture" => {
                let name = self.component_family.as_deref().unwrap_or("poisson");
                let family = match name {
                    "poisson" => ComponentFamily::Poisson,
                    "gaussian" => ComponentFamily::Gaussian,
                    "triangular" => ComponentFamily::Triangular,
                    "zero-inflated" => ComponentFamily::ZeroInflatedPoisson,
                    "binomial" => {
                        let trials = self.trials.or(max_count).ok_or_else(|| {
                            CliError::input("--trials: required for binomial components on real-valued data")
                        })?;
                        ComponentFamily::Binomial { trials }
                    }
                    other => return Err(CliError::input(format!("--component-family: unknown family '{other}'"))),
                };
                let components = match (family, self.components) {
                    (ComponentFamily::ZeroInflatedPoisson, Some(m)) if m != k + 1 => {
                        return Err(CliError::input(format!(
                            "--components: zero-inflated mixtures use k + 1 = {} components",
                            k + 1
                        )))
                    }
                    (ComponentFamily::ZeroInflatedPoisson, _) => k + 1,
                    (_, Some(m)) => m,
                    (_, None) => return Err(CliError::input("--components: required for --emission mixture")),
                };
                if components < k {
                    return Err(CliError::input(format!("--components: need at least --states = {k}")));
                }
                Ok(EmissionFamily::Mixture { components, family })
            }
            "kernel" => {
                let kernel = KernelId::from_name(self.kernel.as_deref().unwrap_or("gaussian")).ctx("--kernel")?;
                let bandwidth = match (self.bandwidth, self.bandwidth_cv) {
                    (Some(_), true) => {
                        return Err(CliError::input("--bandwidth: cannot be combined with --bandwidth-cv"))
                    }
                    (Some(w), false) if w > 0.0 && w.is_finite() => Bandwidth::Fixed(w),
                    (Some(w), false) => return Err(CliError::input(format!("--bandwidth: must be > 0, got {w}"))),
                    (None, _) => Bandwidth::CrossValidated(None),
                };
                let inner_iters = self.inner_iters.unwrap_or(DEFAULT_INNER_ITERS);
                let stride = self.stride.unwrap_or(1);
                if inner_iters == 0 {
                    return Err(CliError::input("--inner-iters: must be >= 1"));
                }
                if stride == 0 {
                    return Err(CliError::input("--stride: must be >= 1"));
                }
                Ok(EmissionFamily::Kernel { kernel, bandwidth, inner_iters, stride })
            }
            other => Err(CliError::input(format!(
                "--emission: unknown family '{other}' (expected nb, np, np-reg, mixture or kernel)"
            ))),
        }
    }
}

/// Empirical law given either as a dense pmf or as value/probability lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Pmf { pmf: Vec<f64> },
    Values { values: Vec<u64>, probs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    /// 1-based state label.
    pub state: usize,
    pub length: usize,
}

/// Data-generating design of `simulate` and `bench`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DesignSpec {
    Preset { preset: String },
    Regions { regions: Vec<RegionSpec>, distributions: Vec<DistributionSpec> },
    Model { model: ModelFile, n: usize },
}

impl DesignSpec {
    pub fn to_design(&self, flag: &str) -> CliResult<Design> {
        match self {
            DesignSpec::Preset { preset } if preset == "desk" => Ok(Design::Regions(desk_region_scheme())),
            DesignSpec::Preset { preset } => Err(CliError::input(format!("{flag}: unknown preset '{preset}'"))),
            DesignSpec::Regions { regions, distributions } => {
                let dists = distributions
                    .iter()
                    .map(|d| match d {
                        DistributionSpec::Pmf { pmf } => EmpiricalDistribution::from_pmf(pmf),
                        DistributionSpec::Values { values, probs } => {
                            EmpiricalDistribution::new(values.clone(), probs.clone())
                        }
                    })
                    .collect::<nphmm::Result<Vec<_>>>()
                    .ctx(flag)?;
                let mut regs = Vec::with_capacity(regions.len());
                for r in regions {
                    if r.state == 0 {
                        return Err(CliError::input(format!("{flag}: region states are 1-based")));
                    }
                    regs.push((r.state - 1, r.length));
                }
                Ok(Design::Regions(RegionScheme::new(regs, dists).ctx(flag)?))
            }
            DesignSpec::Model { model, n } => Ok(Design::Hmm { model: model.to_model().ctx(flag)?, n: *n }),
        }
    }
}

/// One model of a benchmark: family options plus fit settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchModelSpec {
    pub name: String,
    pub states: usize,
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub starts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BenchConfigFile {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub replicates: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub design: Option<DesignSpec>,
    #[serde(default)]
    pub models: Vec<BenchModelSpec>,
    #[serde(default)]
    pub decoders: Vec<String>,
}

pub const DESK_REPLICATES: usize = 20;

impl BenchConfigFile {
    pub fn to_config(&self, flag: &str) -> CliResult<BenchmarkConfig> {
        let mut config = match self.preset.as_deref() {
            Some("desk") => desk_benchmark_config(self.replicates.unwrap_or(DESK_REPLICATES), self.seed),
            Some(other) => return Err(CliError::input(format!("{flag}: unknown preset '{other}'"))),
            None => {
                let design = self
                    .design
                    .as_ref()
                    .ok_or_else(|| CliError::input(format!("{flag}: 'design' is required without a preset")))?
                    .to_design(flag)?;
                BenchmarkConfig {
                    replicates: self.replicates.unwrap_or(1),
                    design,
                    models: Vec::new(),
                    decoders: vec![Decoder::Viterbi],
                    seed: self.seed,
                }
            }
        };
        if self.preset.is_some() {
            if let Some(design) = &self.design {
                config.design = design.to_design(flag)?;
            }
        }
        if !self.models.is_empty() {
            config.models = self
                .models
                .iter()
                .map(|m| m.to_model_config(&config.design))
                .collect::<CliResult<_>>()
                .map_err(|e| CliError { code: e.code, message: format!("{flag}: {}", e.message) })?;
        }
        if !self.decoders.is_empty() {
            config.decoders =
                self.decoders.iter().map(|d| Decoder::from_name(d)).collect::<nphmm::Result<_>>().ctx(flag)?;
        }
        if config.replicates == 0 {
            return Err(CliError::input(format!("{flag}: replicates must be >= 1")));
        }
        if config.models.is_empty() {
            return Err(CliError::input(format!("{flag}: at least one model is required")));
        }
        Ok(config)
    }
}

impl BenchModelSpec {
    fn to_model_config(&self, design: &Design) -> CliResult<ModelConfig> {
        let max_count = match design {
            Design::Regions(scheme) => scheme.distributions().iter().flat_map(|d| d.values().iter().copied()).max(),
            Design::Hmm { .. } => None,
        };
        let family = self.family.to_family(self.states, max_count)?;
        let defaults = FitOptions::default();
        Ok(ModelConfig {
            name: self.name.clone(),
            k: self.states,
            options: FitOptions {
                max_iter: self.max_iter.unwrap_or(defaults.max_iter),
                tol: self.tol.unwrap_or(defaults.tol),
                n_starts: self.starts.unwrap_or(defaults.n_starts),
                seed: 0,
                family,
            },
        })
    }
}
