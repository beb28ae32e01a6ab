//! Radial DWD: a hypersphere `(O, R)` placing the +1 class inside and the
//! −1 class outside, fitted by minimizing
//! `sum_i w(y_i) (1/r_i + C eps_i)` with `r_i = y_i (R - ||x_i - O||) + eps_i`.

mod certificate;
mod config;
mod fit;
mod reduce;
mod step;

use thiserror::Error;

use crate::data::{euclidean_distance, DataError, Scorer};
use crate::socp::{SocpError, SolveStatus};

pub use certificate::{
    dual_diagnostics, kkt_check, rho_sigma_from_dual, DualCertificate, DualDiagnostics, KktReport,
    StepSnapshot,
};
pub use config::{ClassWeights, InitMode, Penalty, RdwdConfig};
pub use fit::{
    default_penalty, default_weights, fit, initialize_center, objective, residual_loss, FitResult,
    OuterIterState, PENALTY_MARGIN,
};
pub use reduce::{reduce_qr, ReducedData};
pub use step::{build_step_problem, StepProblemLayout};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RdwdError {
    #[error("the +1 class is empty")]
    EmptyPositiveClass,
    #[error("a −1 training point coincides with the initial center")]
    DegenerateCenter,
    #[error("training point {index} coincides with the current center")]
    DegeneratePoint { index: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("classes are not separated by a proper sphere (y^T z = {ytz:e})")]
    NotSeparable { ytz: f64 },
    #[error("inner solver stopped with status {0:?}")]
    SolverStatus(SolveStatus),
    #[error(transparent)]
    Solver(#[from] SocpError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Fitted separating sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereModel {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Penalty `C` actually used.
    pub penalty: f64,
    /// `(w(+1), w(-1))` actually used.
    pub weights: (f64, f64),
    pub config: RdwdConfig,
    /// Number of outer steps taken.
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

impl SphereModel {
    /// A bare model, e.g. for scoring with a known sphere.
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self {
            center,
            radius,
            penalty: f64::NAN,
            weights: (1.0, 1.0),
            config: RdwdConfig::default(),
            iterations: 0,
            converged: true,
            objective: f64::NAN,
        }
    }
}

impl Scorer for SphereModel {
    fn dim(&self) -> usize {
        self.center.len()
    }

    /// `R - ||x - O||`.
    fn score_point(&self, x: &[f64]) -> f64 {
        self.radius - euclidean_distance(x, &self.center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Label, Normalized, TrainingSet};

    #[test]
    fn signed_distance_examples() {
        let m = SphereModel::new(vec![0.0, 0.0], 1.0);
        assert_eq!(m.signed_distance(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(m.signed_distance(&[3.0, 4.0]).unwrap(), -4.0);
        assert_eq!(
            m.signed_distance_of(&Normalized::Zero { dim: 2 }).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(matches!(
            m.signed_distance(&[1.0]),
            Err(DataError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let m = SphereModel::new(vec![0.5, 0.5], 0.3);
        assert_eq!(m.classify_point(&[0.5, 0.5]).unwrap().predicted, Label::Positive);
        assert_eq!(m.classify_point(&[1.0, 0.0]).unwrap().predicted, Label::Negative);
        // boundary tie
        let m = SphereModel::new(vec![0.0, 0.0], 5.0);
        let s = m.classify_point(&[3.0, 4.0]).unwrap();
        assert_eq!(s.signed_distance, 0.0);
        assert_eq!(s.predicted, Label::Positive);
        let z = m.classify(&Normalized::Zero { dim: 2 }).unwrap();
        assert_eq!(z.predicted, Label::Negative);
    }

    fn small_set() -> TrainingSet {
        TrainingSet::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![3.0, 0.0], vec![0.0, 6.0]],
            vec![Label::Positive, Label::Positive, Label::Negative, Label::Negative],
        )
        .unwrap()
    }

    #[test]
    fn initial_centers() {
        let set = small_set();
        assert_eq!(initialize_center(&set, &InitMode::MeanPlus).unwrap(), vec![0.5, 0.5]);
        let three = TrainingSet::new(
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![5.0; 3]],
            vec![Label::Positive, Label::Positive, Label::Positive, Label::Negative],
        )
        .unwrap();
        assert_eq!(
            initialize_center(&three, &InitMode::MedianPlus).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        assert_eq!(
            initialize_center(&set, &InitMode::Explicit(vec![0.2, 0.8])).unwrap(),
            vec![0.2, 0.8]
        );
    }

    #[test]
    fn penalty_rule() {
        // negatives at distance 2 and 5 from the origin
        let set = TrainingSet::new(
            vec![vec![0.1, 0.0], vec![2.0, 0.0], vec![0.0, 5.0]],
            vec![Label::Positive, Label::Negative, Label::Negative],
        )
        .unwrap();
        assert!((default_penalty(&set, &[0.0, 0.0]).unwrap() - 2.5).abs() < 1e-15);
        let single = TrainingSet::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![Label::Positive, Label::Negative],
        )
        .unwrap();
        assert_eq!(default_penalty(&single, &[0.0, 0.0]).unwrap(), 10.0);
        assert_eq!(
            default_penalty(&single, &[1.0, 0.0]),
            Err(RdwdError::DegenerateCenter)
        );
    }

    #[test]
    fn weight_defaults() {
        let make = |np: usize, nn: usize| {
            let mut pts = Vec::new();
            let mut labels = Vec::new();
            for i in 0..np + nn {
                pts.push(vec![i as f64]);
                labels.push(if i < np { Label::Positive } else { Label::Negative });
            }
            TrainingSet::new(pts, labels).unwrap()
        };
        assert_eq!(default_weights(&make(8, 24)), (0.75, 0.25));
        assert_eq!(default_weights(&make(5, 5)), (0.5, 0.5));
        let (a, b) = default_weights(&make(20, 50));
        assert!((a - 5.0 / 7.0).abs() < 1e-15 && (b - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn unit_weights_reduce_to_plain_objective() {
        let set = small_set();
        let (center, radius, c) = ([0.4, 0.3], 1.7, 3.0);
        let weighted = objective(set.points(), set.labels(), &center, radius, c, (1.0, 1.0));
        let plain: f64 = (0..set.n())
            .map(|i| {
                let r = set.label(i).sign() * (radius - euclidean_distance(set.point(i), &center));
                residual_loss(r, c)
            })
            .sum();
        assert_eq!(weighted, plain);
    }

    #[test]
    fn loss_is_continuous_at_the_kink() {
        let c: f64 = 4.0;
        let r = 1.0 / c.sqrt();
        assert!((residual_loss(r, c) - residual_loss(r - 1e-12, c)).abs() < 1e-9);
        assert_eq!(residual_loss(-1.0, c), 2.0 * 2.0 + 4.0);
    }
}
