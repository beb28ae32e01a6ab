//! Stratified k-fold grid search over the linear DWD penalty.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{DataError, Label, Scorer, TrainingSet};

use super::{ldwd_fit, BaselineError};

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_penalty: f64,
    /// `(C, mean held-out error)` for every grid value, in grid order.
    pub errors: Vec<(f64, f64)>,
    pub folds: usize,
}

/// Fold id for every sample. Each class is shuffled separately and dealt
/// round-robin, so every fold gets its share of both classes.
pub fn stratified_folds(data: &TrainingSet, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; data.n()];
    for index in [data.pos_index(), data.neg_index()] {
        let mut order = index.to_vec();
        order.shuffle(&mut rng);
        for (k, i) in order.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

fn subset(data: &TrainingSet, keep: impl Fn(usize) -> bool) -> Result<TrainingSet, DataError> {
    let (points, labels): (Vec<Vec<f64>>, Vec<Label>) = (0..data.n())
        .filter(|&i| keep(i))
        .map(|i| (data.point(i).to_vec(), data.label(i)))
        .unzip();
    TrainingSet::new(points, labels)
}

/// Picks the `C` with the lowest mean held-out misclassification rate; ties
/// go to the earlier grid entry. The fold count is capped at the smaller
/// class size.
pub fn cv_penalty(
    data: &TrainingSet,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<CvResult, BaselineError> {
    let folds = folds.min(data.n_pos()).min(data.n_neg());
    if folds < 2 {
        return Err(BaselineError::Data(DataError::EmptyClass(
            if data.n_pos() < data.n_neg() {
                Label::Positive
            } else {
                Label::Negative
            },
        )));
    }
    if let Some(&bad) = grid.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(BaselineError::InvalidPenalty(bad));
    }
    let assignment = stratified_folds(data, folds, seed);
    let mut errors = Vec::with_capacity(grid.len());
    for &c in grid {
        let mut total = 0.0;
        for f in 0..folds {
            let train = subset(data, |i| assignment[i] != f)?;
            let model = ldwd_fit(&train, c)?;
            let held: Vec<usize> = (0..data.n()).filter(|&i| assignment[i] == f).collect();
            let wrong = held
                .iter()
                .filter(|&&i| {
                    let predicted = if model.score_point(data.point(i)) >= 0.0 {
                        Label::Positive
                    } else {
                        Label::Negative
                    };
                    predicted != data.label(i)
                })
                .count();
            total += wrong as f64 / held.len() as f64;
        }
        errors.push((c, total / folds as f64));
    }
    let best_penalty = errors
        .iter()
        .fold(None::<(f64, f64)>, |best, &(c, e)| match best {
            Some((_, be)) if be <= e => best,
            _ => Some((c, e)),
        })
        .map(|(c, _)| c)
        .unwrap_or(f64::NAN);
    Ok(CvResult {
        best_penalty,
        errors,
        folds,
    })
}
