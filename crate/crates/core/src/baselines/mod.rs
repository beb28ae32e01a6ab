//! Linear reference classifiers: mean difference and linear DWD.

mod cv;
mod ldwd;

use thiserror::Error;

use crate::data::{DataError, Scorer, TrainingSet};
use crate::socp::{SocpError, SolveStatus};

pub use cv::{cv_penalty, stratified_folds, CvResult};
pub use ldwd::{default_ldwd_penalty, ldwd_fit, ldwd_fit_with_solution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("class means coincide; no separating direction")]
    ZeroDirection,
    #[error("penalty must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("inner solver stopped with status {0:?}")]
    SolverStatus(SolveStatus),
    #[error(transparent)]
    Solver(#[from] SocpError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// How a hyperplane was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineMethod {
    MeanDifference,
    LinearDwd { penalty: f64 },
}

impl BaselineMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineMethod::MeanDifference => "md",
            BaselineMethod::LinearDwd { .. } => "ldwd",
        }
    }
}

/// Classifies by the sign of `w^T x + beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneModel {
    pub normal: Vec<f64>,
    pub intercept: f64,
    pub method: BaselineMethod,
}

impl Scorer for HyperplaneModel {
    fn dim(&self) -> usize {
        self.normal.len()
    }

    fn score_point(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.intercept
    }
}

fn class_mean(data: &TrainingSet, index: &[usize]) -> Vec<f64> {
    let mut mean = vec![0.0; data.dim()];
    for &i in index {
        for (m, x) in mean.iter_mut().zip(data.point(i)) {
            *m += x;
        }
    }
    let n = index.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// `w = mean_+ - mean_-`, boundary through the midpoint of the means.
pub fn md_fit(data: &TrainingSet) -> Result<HyperplaneModel, BaselineError> {
    let plus = class_mean(data, data.pos_index());
    let minus = class_mean(data, data.neg_index());
    let normal: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| p - m).collect();
    if normal.iter().all(|&w| w == 0.0) {
        return Err(BaselineError::ZeroDirection);
    }
    let intercept = -0.5
        * normal
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(w, (p, m))| w * (p + m))
            .sum::<f64>();
    Ok(HyperplaneModel {
        normal,
        intercept,
        method: BaselineMethod::MeanDifference,
    })
}
