//! Radial distance weighted discrimination.
//!
//! A binary classifier that separates a compact +1 class from a −1 class
//! spread in many radial directions using a hypersphere, trained by a
//! sequence of second-order cone programs.

pub mod baselines;
pub mod data;
pub mod model_io;
pub mod simlab;
pub mod socp;

pub use data::{
    l1_normalize, normalize_counts, DataError, FeatureVector, Label, Normalized, ScoredSample,
    Scorer, SimplexVector, TrainingSet,
};
pub mod rdwd;

pub use baselines::{md_fit, ldwd_fit, HyperplaneModel};
pub use model_io::{Model, ModelFile, ModelIoError};
pub use rdwd::{fit, DualCertificate, FitResult, RdwdConfig, RdwdError, SphereModel};
