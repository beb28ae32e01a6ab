//! Thin QR reduction of the data matrix.
//!
//! With `X = Q U`, every distance from a center `O = Q o` satisfies
//! `||x_i - O|| = ||u_i - o||`, so the fit can run on the columns of `U`
//! (dimension `n`) and the center is mapped back as `O = Q o`.

use nalgebra::{DMatrix, DVector};

use crate::data::TrainingSet;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedData {
    /// `d x r` with orthonormal columns.
    pub q_basis: DMatrix<f64>,
    /// `r x n`; column `i` holds the reduced coordinates of point `i`.
    pub reduced_points: DMatrix<f64>,
    pub reduced: bool,
}

impl ReducedData {
    /// Reduced training set over the columns of `U`, labels unchanged.
    pub fn training_set(&self, data: &TrainingSet) -> TrainingSet {
        let points = self
            .reduced_points
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect();
        TrainingSet::new(points, data.labels().to_vec())
            .expect("reduction preserves a valid training set")
    }

    /// `Q^T v`: coordinates of the projection of `v` onto span(X).
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        (self.q_basis.transpose() * DVector::from_column_slice(v))
            .iter()
            .copied()
            .collect()
    }

    /// `Q o`.
    pub fn lift(&self, o: &[f64]) -> Vec<f64> {
        (&self.q_basis * DVector::from_column_slice(o))
            .iter()
            .copied()
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.reduced_points.nrows()
    }
}

/// Thin QR of the `d x n` data matrix.
///
/// When `d <= n` nothing is gained; the identity basis is returned with
/// `reduced = false`.
pub fn reduce_qr(data: &TrainingSet) -> ReducedData {
    let x = data.matrix();
    if data.dim() <= data.n() {
        return ReducedData {
            q_basis: DMatrix::identity(data.dim(), data.dim()),
            reduced_points: x,
            reduced: false,
        };
    }
    let qr = x.qr();
    ReducedData {
        q_basis: qr.q(),
        reduced_points: qr.r(),
        reduced: true,
    }
}
