//! Linear DWD as a cone program:
//!
//! ```text
//! min  sum_i (rho_i + sigma_i) + C sum_i eps_i
//! s.t. sigma_i - rho_i + y_i (x_i^T w + beta) + eps_i = 0
//!      (rho_i; sigma_i, 1) in S_3,  (1; w) in S_{d+1},  eps >= 0
//! ```
//!
//! with the free intercept split as `beta = beta_+ - beta_-`. Both halves
//! carry a tiny cost so they cannot drift apart together.

use nalgebra::{DMatrix, DVector};

use crate::data::{euclidean_distance, TrainingSet};
use crate::rdwd::reduce_qr;
use crate::socp::{self, ConeBlock, ConeSpec, ConicProgram, ConicSolution, SolveStatus, SolverTolerances};

use super::{BaselineError, BaselineMethod, HyperplaneModel};

/// Residual and relative-gap bound for accepting a stalled solve.
const STALL_TOL: f64 = 1e-5;
/// Cost on `beta_+ + beta_-`; perturbs the objective by at most `tau |beta|`.
const INTERCEPT_COST: f64 = 1e-8;

/// `C = 100 / m^2` with `m` the median distance between points of opposite
/// classes.
pub fn default_ldwd_penalty(data: &TrainingSet) -> f64 {
    let mut dists: Vec<f64> = data
        .pos_index()
        .iter()
        .flat_map(|&i| {
            data.neg_index()
                .iter()
                .map(move |&j| euclidean_distance(data.point(i), data.point(j)))
        })
        .collect();
    dists.sort_by(f64::total_cmp);
    let k = dists.len();
    let median = if k % 2 == 1 {
        dists[k / 2]
    } else {
        0.5 * (dists[k / 2 - 1] + dists[k / 2])
    };
    if median > 0.0 {
        100.0 / (median * median)
    } else {
        100.0
    }
}

struct Layout {
    n: usize,
    dim: usize,
}

impl Layout {
    fn rho(&self, i: usize) -> usize {
        3 * i
    }
    fn sigma(&self, i: usize) -> usize {
        3 * i + 1
    }
    fn unit(&self, i: usize) -> usize {
        3 * i + 2
    }
    fn head(&self) -> usize {
        3 * self.n
    }
    fn w(&self, j: usize) -> usize {
        3 * self.n + 1 + j
    }
    fn beta_plus(&self) -> usize {
        3 * self.n + self.dim + 1
    }
    fn beta_minus(&self) -> usize {
        3 * self.n + self.dim + 2
    }
    fn slack(&self, i: usize) -> usize {
        3 * self.n + self.dim + 3 + i
    }
    fn nvar(&self) -> usize {
        4 * self.n + self.dim + 3
    }
}

fn build(points: &[Vec<f64>], signs: &[f64], penalty: f64) -> Result<(ConicProgram, Layout), BaselineError> {
    let layout = Layout {
        n: points.len(),
        dim: points[0].len(),
    };
    let n = layout.n;
    let neq = 2 * n + 1;
    let mut c = DVector::zeros(layout.nvar());
    let mut a = DMatrix::zeros(neq, layout.nvar());
    let mut b = DVector::zeros(neq);
    for (i, (x, &y)) in points.iter().zip(signs).enumerate() {
        c[layout.rho(i)] = 1.0;
        c[layout.sigma(i)] = 1.0;
        c[layout.slack(i)] = penalty;
        a[(i, layout.sigma(i))] = 1.0;
        a[(i, layout.rho(i))] = -1.0;
        for (j, &xj) in x.iter().enumerate() {
            a[(i, layout.w(j))] = y * xj;
        }
        a[(i, layout.beta_plus())] = y;
        a[(i, layout.beta_minus())] = -y;
        a[(i, layout.slack(i))] = 1.0;
        a[(n + i, layout.unit(i))] = 1.0;
        b[n + i] = 1.0;
    }
    c[layout.beta_plus()] = INTERCEPT_COST;
    c[layout.beta_minus()] = INTERCEPT_COST;
    a[(2 * n, layout.head())] = 1.0;
    b[2 * n] = 1.0;

    let mut cones = ConeSpec::default();
    for _ in 0..n {
        cones.push(ConeBlock::SecondOrder(3));
    }
    cones.push(ConeBlock::SecondOrder(layout.dim + 1));
    cones.push(ConeBlock::Nonneg(2));
    cones.push(ConeBlock::Nonneg(n));
    Ok((ConicProgram::new(c, a, b, cones)?, layout))
}

/// Fits linear DWD with penalty `C`, solving in QR-reduced coordinates when
/// `d > n`. Also returns the solution of the cone program.
pub fn ldwd_fit_with_solution(
    data: &TrainingSet,
    penalty: f64,
    tol: &SolverTolerances,
) -> Result<(HyperplaneModel, ConicSolution), BaselineError> {
    if !(penalty > 0.0) || !penalty.is_finite() {
        return Err(BaselineError::InvalidPenalty(penalty));
    }
    let reduction = (data.dim() > data.n()).then(|| reduce_qr(data));
    let working = match &reduction {
        Some(r) => r.training_set(data),
        None => data.clone(),
    };
    let (program, layout) = build(working.points(), &working.signs(), penalty)?;
    let solution = socp::solve(&program, tol)?;
    let usable = match solution.status {
        SolveStatus::Optimal => true,
        // large default penalties leave non-separable fits badly scaled
        SolveStatus::SlowProgress => {
            solution.primal_residual <= STALL_TOL
                && solution.dual_residual <= STALL_TOL
                && solution.gap <= STALL_TOL * solution.objective_value.abs().max(1.0)
        }
        _ => false,
    };
    if !usable {
        return Err(BaselineError::SolverStatus(solution.status));
    }
    let x = &solution.primal;
    let v: Vec<f64> = (0..layout.dim).map(|j| x[layout.w(j)]).collect();
    let mut normal = match &reduction {
        Some(r) => r.lift(&v),
        None => v,
    };
    let norm = normal.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm > 1.0 {
        normal.iter_mut().for_each(|w| *w /= norm);
    }
    let model = HyperplaneModel {
        normal,
        intercept: x[layout.beta_plus()] - x[layout.beta_minus()],
        method: BaselineMethod::LinearDwd { penalty },
    };
    Ok((model, solution))
}

pub fn ldwd_fit(data: &TrainingSet, penalty: f64) -> Result<HyperplaneModel, BaselineError> {
    ldwd_fit_with_solution(data, penalty, &SolverTolerances::default()).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Label, Scorer};

    #[test]
    fn one_dimensional_separable() {
        let data = TrainingSet::new(vec![vec![0.0], vec![2.0]], vec![Label::Negative, Label::Positive])
            .unwrap();
        let (m, sol) = ldwd_fit_with_solution(&data, 100.0, &SolverTolerances::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let boundary = -m.intercept / m.normal[0];
        assert!(boundary > 0.0 && boundary < 2.0, "{boundary}");
        // symmetric optimum at 1; the objective is flat there
        assert!((boundary - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mirrored_data_has_zero_intercept() {
        let pos = [vec![1.0, 0.3], vec![2.0, -0.5], vec![1.5, 1.0]];
        let mut points: Vec<Vec<f64>> = pos.to_vec();
        points.extend(pos.iter().map(|p| p.iter().map(|v| -v).collect::<Vec<_>>()));
        let labels = (0..6)
            .map(|i| if i < 3 { Label::Positive } else { Label::Negative })
            .collect();
        let data = TrainingSet::new(points, labels).unwrap();
        let m = ldwd_fit(&data, 10.0).unwrap();
        assert!(m.intercept.abs() <= 1e-6, "{}", m.intercept);
        let norm: f64 = m.normal.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm <= 1.0 + 1e-8);
        for i in 0..6 {
            assert!(data.label(i).sign() * m.score_point(data.point(i)) > 0.0);
        }
    }

    #[test]
    fn penalty_must_be_positive() {
        let data = TrainingSet::new(vec![vec![0.0], vec![2.0]], vec![Label::Negative, Label::Positive])
            .unwrap();
        assert_eq!(ldwd_fit(&data, 0.0), Err(BaselineError::InvalidPenalty(0.0)));
    }

    #[test]
    fn default_penalty_uses_between_class_median() {
        // between-class distances 1, 2, 3 → median 2
        let data = TrainingSet::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![Label::Positive, Label::Negative, Label::Negative, Label::Negative],
        )
        .unwrap();
        assert_eq!(default_ldwd_penalty(&data), 25.0);
    }
}
