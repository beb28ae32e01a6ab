//! Labeled simplex data, L1 normalization and signed-distance classification.
//!
//! Raw coverage vectors are mapped to the unit simplex by dividing by their
//! L1 norm. All-zero vectors cannot be normalized; they are carried as an
//! explicit [`Normalized::Zero`] sentinel whose signed distance to any
//! boundary is `-inf`.

use thiserror::Error;

/// Tolerance on the entry sum of a [`SimplexVector`].
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("empty vector")]
    Empty,
    #[error("entries sum to {sum}, not 1")]
    NotOnSimplex { sum: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{count} labels for {points} points")]
    LabelCount { points: usize, count: usize },
    #[error("class {0} has no training samples")]
    EmptyClass(Label),
    #[error("zero vector in the +1 training class (sample {index})")]
    ZeroPositive { index: usize },
}

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn from_sign(value: f64) -> Option<Self> {
        if value == 1.0 {
            Some(Label::Positive)
        } else if value == -1.0 {
            Some(Label::Negative)
        } else {
            None
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Nonnegative raw feature vector (for example per-position read depth).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    entries: Vec<f64>,
    is_zero: bool,
}

impl FeatureVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, DataError> {
        if entries.is_empty() {
            return Err(DataError::Empty);
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(DataError::NonFinite { index });
            }
            if value < 0.0 {
                return Err(DataError::NegativeEntry { index, value });
            }
        }
        let is_zero = entries.iter().all(|&v| v == 0.0);
        Ok(Self { entries, is_zero })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// A point on the unit simplex: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    entries: Vec<f64>,
}

impl SimplexVector {
    /// Wraps entries that are already normalized, checking the simplex invariants.
    pub fn new(entries: Vec<f64>) -> Result<Self, DataError> {
        let fv = FeatureVector::new(entries)?;
        let sum = compensated_sum(fv.entries());
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(DataError::NotOnSimplex { sum });
        }
        Ok(Self { entries: fv.entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }
}

/// Result of L1 normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalized {
    Simplex(SimplexVector),
    /// The input was the zero vector; it sits at `-inf` and is always classified −1.
    Zero { dim: usize },
}

impl Normalized {
    pub fn dim(&self) -> usize {
        match self {
            Normalized::Simplex(v) => v.dim(),
            Normalized::Zero { dim } => *dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Normalized::Zero { .. })
    }
}

/// Text form of a real used in every output file: 17 significant digits,
/// `inf`/`-inf`/`NaN` spelled out.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Neumaier-compensated sum; exact for integer counts below 2^53.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Divides a feature vector by its L1 norm.
pub fn l1_normalize(v: &FeatureVector) -> Normalized {
    if v.is_zero() {
        return Normalized::Zero { dim: v.dim() };
    }
    let total = compensated_sum(v.entries());
    let entries = v.entries().iter().map(|&x| x / total).collect();
    Normalized::Simplex(SimplexVector { entries })
}

/// Validates raw counts and normalizes them in one step.
pub fn normalize_counts(entries: &[f64]) -> Result<Normalized, DataError> {
    Ok(l1_normalize(&FeatureVector::new(entries.to_vec())?))
}

/// Anything that assigns a real score to a point, positive meaning the +1 side.
pub trait Scorer {
    fn dim(&self) -> usize;

    /// Signed score of a finite point. Callers have checked the dimension.
    fn score_point(&self, x: &[f64]) -> f64;

    fn signed_distance(&self, x: &[f64]) -> Result<f64, DataError> {
        if x.len() != self.dim() {
            return Err(DataError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.score_point(x))
    }

    /// Signed distance of a normalized sample; the zero sentinel maps to `-inf`.
    fn signed_distance_of(&self, x: &Normalized) -> Result<f64, DataError> {
        match x {
            Normalized::Simplex(v) => self.signed_distance(v.entries()),
            Normalized::Zero { dim } if *dim != self.dim() => Err(DataError::DimensionMismatch {
                expected: self.dim(),
                found: *dim,
            }),
            Normalized::Zero { .. } => Ok(f64::NEG_INFINITY),
        }
    }

    fn classify(&self, x: &Normalized) -> Result<ScoredSample, DataError> {
        let sd = self.signed_distance_of(x)?;
        Ok(ScoredSample::from_distance(sd, None))
    }

    fn classify_point(&self, x: &[f64]) -> Result<ScoredSample, DataError> {
        let sd = self.signed_distance(x)?;
        Ok(ScoredSample::from_distance(sd, None))
    }
}

/// Score of one sample against a fitted boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSample {
    pub signed_distance: f64,
    pub predicted: Label,
    /// `y * signed_distance` when the true label is known.
    pub residual: Option<f64>,
}

impl ScoredSample {
    pub fn from_distance(signed_distance: f64, truth: Option<Label>) -> Self {
        // ties go to +1
        let predicted = if signed_distance >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        };
        Self {
            signed_distance,
            predicted,
            residual: truth.map(|y| y.sign() * signed_distance),
        }
    }

    pub fn with_truth(mut self, truth: Label) -> Self {
        self.residual = Some(truth.sign() * self.signed_distance);
        self
    }
}

/// Labeled training points: the columns of X with labels y.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    points: Vec<Vec<f64>>,
    labels: Vec<Label>,
    pos_index: Vec<usize>,
    neg_index: Vec<usize>,
    dim: usize,
    dropped_zero_negatives: usize,
}

impl TrainingSet {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self, DataError> {
        if points.len() != labels.len() {
            return Err(DataError::LabelCount {
                points: points.len(),
                count: labels.len(),
            });
        }
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(DataError::Empty);
        }
        for p in &points {
            if p.len() != dim {
                return Err(DataError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if let Some(index) = p.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFinite { index });
            }
        }
        let pos_index: Vec<usize> = (0..labels.len())
            .filter(|&i| labels[i] == Label::Positive)
            .collect();
        let neg_index: Vec<usize> = (0..labels.len())
            .filter(|&i| labels[i] == Label::Negative)
            .collect();
        if pos_index.is_empty() {
            return Err(DataError::EmptyClass(Label::Positive));
        }
        if neg_index.is_empty() {
            return Err(DataError::EmptyClass(Label::Negative));
        }
        Ok(Self {
            points,
            labels,
            pos_index,
            neg_index,
            dim,
            dropped_zero_negatives: 0,
        })
    }

    /// Builds a training set from normalized samples.
    ///
    /// Zero vectors in the −1 class sit at infinity and carry no weight in the
    /// fit, so they are dropped (and counted). A zero vector labeled +1 is an
    /// error.
    pub fn from_normalized(samples: Vec<(Normalized, Label)>) -> Result<Self, DataError> {
        let mut points = Vec::with_capacity(samples.len());
        let mut labels = Vec::with_capacity(samples.len());
        let mut dropped = 0;
        for (index, (sample, label)) in samples.into_iter().enumerate() {
            match sample {
                Normalized::Simplex(v) => {
                    points.push(v.into_entries());
                    labels.push(label);
                }
                Normalized::Zero { .. } => match label {
                    Label::Negative => dropped += 1,
                    Label::Positive => return Err(DataError::ZeroPositive { index }),
                },
            }
        }
        let mut set = Self::new(points, labels)?;
        set.dropped_zero_negatives = dropped;
        Ok(set)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn pos_index(&self) -> &[usize] {
        &self.pos_index
    }

    pub fn neg_index(&self) -> &[usize] {
        &self.neg_index
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn n_pos(&self) -> usize {
        self.pos_index.len()
    }

    pub fn n_neg(&self) -> usize {
        self.neg_index.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dropped_zero_negatives(&self) -> usize {
        self.dropped_zero_negatives
    }

    /// Labels as ±1 values.
    pub fn signs(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.sign()).collect()
    }

    /// The d×n data matrix with points as columns.
    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.n(), |r, c| self.points[c][r])
    }
}

pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simplex(entries: &[f64]) -> Vec<f64> {
        match normalize_counts(entries).unwrap() {
            Normalized::Simplex(v) => v.into_entries(),
            Normalized::Zero { .. } => panic!("zero"),
        }
    }

    #[test]
    fn normalizes_counts() {
        assert_eq!(simplex(&[2.0, 2.0, 0.0, 4.0]), vec![0.25, 0.25, 0.0, 0.5]);
        assert_eq!(simplex(&[1.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        assert_eq!(
            normalize_counts(&[0.0, 0.0, 0.0]).unwrap(),
            Normalized::Zero { dim: 3 }
        );
    }

    #[test]
    fn rejects_negative_entries() {
        assert_eq!(
            normalize_counts(&[1.0, -0.5]),
            Err(DataError::NegativeEntry {
                index: 1,
                value: -0.5
            })
        );
        assert!(matches!(
            SimplexVector::new(vec![0.5, 0.6]),
            Err(DataError::NotOnSimplex { .. })
        ));
    }

    #[test]
    fn zero_positive_rejected_zero_negative_dropped() {
        let a = normalize_counts(&[1.0, 1.0]).unwrap();
        let b = normalize_counts(&[0.0, 3.0]).unwrap();
        let z = Normalized::Zero { dim: 2 };
        let set = TrainingSet::from_normalized(vec![
            (a.clone(), Label::Positive),
            (b.clone(), Label::Negative),
            (z.clone(), Label::Negative),
        ])
        .unwrap();
        assert_eq!(set.n(), 2);
        assert_eq!(set.dropped_zero_negatives(), 1);
        let err = TrainingSet::from_normalized(vec![
            (a, Label::Positive),
            (z, Label::Positive),
            (b, Label::Negative),
        ])
        .unwrap_err();
        assert_eq!(err, DataError::ZeroPositive { index: 1 });
    }

    #[test]
    fn training_set_index_sets() {
        let set = TrainingSet::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![Label::Negative, Label::Positive, Label::Negative],
        )
        .unwrap();
        assert_eq!(set.pos_index(), &[1]);
        assert_eq!(set.neg_index(), &[0, 2]);
        assert_eq!((set.n_pos(), set.n_neg()), (1, 2));
        assert!(matches!(
            TrainingSet::new(vec![vec![0.0]], vec![Label::Negative]),
            Err(DataError::EmptyClass(Label::Positive))
        ));
    }

    proptest! {
        #[test]
        fn integer_counts_are_scale_invariant_exactly(
            counts in prop::collection::vec(0u32..10_000, 1..64),
            c in 1u32..1000,
        ) {
            prop_assume!(counts.iter().any(|&v| v > 0));
            let v: Vec<f64> = counts.iter().map(|&x| x as f64).collect();
            let cv: Vec<f64> = v.iter().map(|&x| x * c as f64).collect();
            prop_assert_eq!(normalize_counts(&v).unwrap(), normalize_counts(&cv).unwrap());
        }

        #[test]
        fn real_vectors_are_scale_invariant_to_rounding(
            v in prop::collection::vec(0.0f64..1e3, 1..64),
            c in 1e-6f64..1e6,
        ) {
            prop_assume!(v.iter().any(|&x| x > 0.0));
            let cv: Vec<f64> = v.iter().map(|&x| x * c).collect();
            let a = simplex(&v);
            let b = simplex(&cv);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON * x.max(*y));
            }
            let sum = compensated_sum(&a);
            prop_assert!((sum - 1.0).abs() <= SIMPLEX_SUM_TOL);
        }
    }
}
