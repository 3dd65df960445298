//! Hidden Markov models with nonparametric emission distributions.
//!
//! Inference (forward–backward, Viterbi, posterior decoding), EM fitting
//! for discrete, penalized discrete, negative binomial, mixture and kernel
//! emissions, simulation and scoring utilities, and identifiability
//! diagnostics.

pub mod diagnostics;
pub mod discrete;
pub mod em;
pub mod error;
pub mod hmm;
pub mod kernel;
pub mod linalg;
pub mod mixture;
pub mod model;
pub mod obs;
pub mod simeval;

pub use error::{Error, Result};
pub use hmm::{LogDensities, PosteriorSet, TransitionModel};
pub use model::{EmissionModel, Hmm};
pub use obs::ObservationSequence;
