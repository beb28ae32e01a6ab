//! Assembly of the cone program solved at each outer step.
//!
//! Around the previous center `O'`, each distance is linearized as
//! `d_i(O) ~ d_i - w_i^T (O - O')` with `w_i = (x_i - O') / d_i`. The step
//! problem in the variables `(rho, sigma, Delta, R, eps)` is
//!
//! ```text
//! min  sum_i w(y_i) (rho_i + sigma_i) + C sum_i w(y_i) eps_i
//! s.t. sigma_i - rho_i + y_i R + y_i w_i^T Delta + eps_i = y_i d_i
//!      (rho_i; sigma_i, 1) in S_3,  (delta; Delta) in S_{d+1},  R >= 0,  eps >= 0
//! ```
//!
//! The constant 1 in each three-dimensional cone and the trust-region head
//! `delta` are auxiliary variables pinned by equality rows.

use nalgebra::{DMatrix, DVector};

use crate::socp::{ConeBlock, ConeSpec, ConicProgram};

use super::RdwdError;

/// Distances below this are treated as a point sitting on the center.
pub(crate) const DEGENERATE_DISTANCE: f64 = 1e-14;

/// Coordinates of the step variables inside the cone program.
///
/// Variable order: `n` blocks `(rho_i, sigma_i, t_i)`, then the trust block
/// `(h, Delta_1..Delta_d)`, then `R`, then `eps_1..eps_n`. Row order: `n`
/// residual rows, `n` rows pinning `t_i = 1`, one row pinning `h = delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProblemLayout {
    pub n: usize,
    pub dim: usize,
    /// Row `i` is the unit direction `w_i` from the previous center to point `i`.
    pub directions: DMatrix<f64>,
    pub distances: Vec<f64>,
    pub signs: Vec<f64>,
    pub step_length: f64,
}

impl StepProblemLayout {
    pub fn rho(&self, i: usize) -> usize {
        3 * i
    }

    pub fn sigma(&self, i: usize) -> usize {
        3 * i + 1
    }

    pub fn unit(&self, i: usize) -> usize {
        3 * i + 2
    }

    pub fn trust_head(&self) -> usize {
        3 * self.n
    }

    pub fn delta(&self, j: usize) -> usize {
        3 * self.n + 1 + j
    }

    pub fn radius(&self) -> usize {
        3 * self.n + self.dim + 1
    }

    pub fn slack(&self, i: usize) -> usize {
        3 * self.n + self.dim + 2 + i
    }

    pub fn nvar(&self) -> usize {
        4 * self.n + self.dim + 2
    }

    pub fn neq(&self) -> usize {
        2 * self.n + 1
    }

    /// Row of the residual equation for point `i`; its multiplier is `z_i`.
    pub fn residual_row(&self, i: usize) -> usize {
        i
    }
}

/// Distances and unit directions from `center` to every point.
pub(crate) fn linearize(
    points: &[Vec<f64>],
    center: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>), RdwdError> {
    let n = points.len();
    let dim = center.len();
    let mut distances = Vec::with_capacity(n);
    let mut directions = DMatrix::zeros(n, dim);
    for (i, x) in points.iter().enumerate() {
        let dist = crate::data::euclidean_distance(x, center);
        if dist <= DEGENERATE_DISTANCE * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            return Err(RdwdError::DegeneratePoint { index: i });
        }
        for j in 0..dim {
            directions[(i, j)] = (x[j] - center[j]) / dist;
        }
        distances.push(dist);
    }
    Ok((distances, directions))
}

/// Builds the linearized step program around `prev_center`.
///
/// `weights[i]` is `w(y_i)` for point `i`.
pub fn build_step_problem(
    points: &[Vec<f64>],
    signs: &[f64],
    weights: &[f64],
    prev_center: &[f64],
    penalty: f64,
    step_length: f64,
) -> Result<(ConicProgram, StepProblemLayout), RdwdError> {
    let (distances, directions) = linearize(points, prev_center)?;
    let layout = StepProblemLayout {
        n: points.len(),
        dim: prev_center.len(),
        directions,
        distances,
        signs: signs.to_vec(),
        step_length,
    };
    let n = layout.n;
    let mut c = DVector::zeros(layout.nvar());
    let mut a = DMatrix::zeros(layout.neq(), layout.nvar());
    let mut b = DVector::zeros(layout.neq());
    for i in 0..n {
        let y = signs[i];
        c[layout.rho(i)] = weights[i];
        c[layout.sigma(i)] = weights[i];
        c[layout.slack(i)] = penalty * weights[i];

        let row = layout.residual_row(i);
        a[(row, layout.sigma(i))] = 1.0;
        a[(row, layout.rho(i))] = -1.0;
        a[(row, layout.radius())] = y;
        for j in 0..layout.dim {
            a[(row, layout.delta(j))] = y * layout.directions[(i, j)];
        }
        a[(row, layout.slack(i))] = 1.0;
        b[row] = y * layout.distances[i];

        a[(n + i, layout.unit(i))] = 1.0;
        b[n + i] = 1.0;
    }
    a[(2 * n, layout.trust_head())] = 1.0;
    b[2 * n] = step_length;

    let mut cones = ConeSpec::default();
    for _ in 0..n {
        cones.push(ConeBlock::SecondOrder(3));
    }
    cones.push(ConeBlock::SecondOrder(layout.dim + 1));
    cones.push(ConeBlock::Nonneg(1));
    cones.push(ConeBlock::Nonneg(n));
    let program = ConicProgram::new(c, a, b, cones)?;
    Ok((program, layout))
}
