//! The outer loop: linearize distances around the current center, solve the
//! step cone program inside a trust region, move, and repeat until the
//! objective settles.

use log::{debug, warn};

use crate::data::{euclidean_distance, Label, TrainingSet};
use crate::socp::{self, ConicSolution, SolveStatus};

use super::certificate::{self, DualCertificate, StepSnapshot};
use super::config::{ClassWeights, InitMode, Penalty, RdwdConfig};
use super::reduce::{reduce_qr, ReducedData};
use super::step::{build_step_problem, StepProblemLayout};
use super::{RdwdError, SphereModel};

/// Margin factor in the default penalty `C = PENALTY_MARGIN / min (d_i^0)^2`.
pub const PENALTY_MARGIN: f64 = 10.0;

/// Shift applied to the center when it lands exactly on a training point.
const DEGENERATE_NUDGE: f64 = 1e-8;

/// State after outer step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterIterState {
    pub step_index: usize,
    /// Center in the original coordinates.
    pub center: Vec<f64>,
    pub radius: f64,
    /// Objective at the new center with exact distances.
    pub objective: f64,
    /// Optimal value of the linearized step program.
    pub linearized_objective: f64,
    pub step_length: f64,
    /// `||O^k - O^{k-1}||`.
    pub center_shift: f64,
    /// False when the step raised the objective and was discarded.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: SphereModel,
    pub certificate: DualCertificate,
    pub history: Vec<OuterIterState>,
    pub warnings: Vec<String>,
}

/// Mean, coordinate-wise median, or an explicit vector.
pub fn initialize_center(data: &TrainingSet, mode: &InitMode) -> Result<Vec<f64>, RdwdError> {
    let pos = data.pos_index();
    if pos.is_empty() {
        return Err(RdwdError::EmptyPositiveClass);
    }
    let d = data.dim();
    match mode {
        InitMode::MeanPlus => {
            let mut center = vec![0.0; d];
            for &i in pos {
                for (c, x) in center.iter_mut().zip(data.point(i)) {
                    *c += x;
                }
            }
            let n = pos.len() as f64;
            center.iter_mut().for_each(|c| *c /= n);
            Ok(center)
        }
        InitMode::MedianPlus => {
            let mut column = Vec::with_capacity(pos.len());
            Ok((0..d)
                .map(|j| {
                    column.clear();
                    column.extend(pos.iter().map(|&i| data.point(i)[j]));
                    median(&mut column)
                })
                .collect())
        }
        InitMode::Explicit(center) => {
            if center.len() != d {
                return Err(RdwdError::Data(crate::DataError::DimensionMismatch {
                    expected: d,
                    found: center.len(),
                }));
            }
            Ok(center.clone())
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `C = 10 / min_{i in N} ||x_i - O^0||^2`, so that `C d_i^2 >= 10 > 1` for
/// every −1 point at the start.
pub fn default_penalty(data: &TrainingSet, center: &[f64]) -> Result<f64, RdwdError> {
    let min_sq = data
        .neg_index()
        .iter()
        .map(|&i| {
            let d = euclidean_distance(data.point(i), center);
            d * d
        })
        .fold(f64::INFINITY, f64::min);
    if !(min_sq > 0.0) {
        return Err(RdwdError::DegenerateCenter);
    }
    Ok(PENALTY_MARGIN / min_sq)
}

/// `(w(+1), w(-1)) = (n_- / n, n_+ / n)`.
pub fn default_weights(data: &TrainingSet) -> (f64, f64) {
    let n = data.n() as f64;
    (data.n_neg() as f64 / n, data.n_pos() as f64 / n)
}

/// Loss of one point given its signed residual: `1/r` for `r >= 1/sqrt(C)`,
/// continued linearly as `2 sqrt(C) - C r` below (the optimal slack absorbs
/// the rest).
pub fn residual_loss(residual: f64, penalty: f64) -> f64 {
    let root = penalty.sqrt();
    if residual * root >= 1.0 {
        1.0 / residual
    } else {
        2.0 * root - penalty * residual
    }
}

/// Weighted objective `sum_i w(y_i) (1/r_i + C eps_i)` at `(center, radius)`
/// with exact distances and optimal slacks.
pub fn objective(
    points: &[Vec<f64>],
    labels: &[Label],
    center: &[f64],
    radius: f64,
    penalty: f64,
    weights: (f64, f64),
) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let w = match y {
                Label::Positive => weights.0,
                Label::Negative => weights.1,
            };
            let r = y.sign() * (radius - euclidean_distance(x, center));
            w * residual_loss(r, penalty)
        })
        .sum()
}

struct Working {
    data: TrainingSet,
    reduction: Option<ReducedData>,
}

impl Working {
    fn new(data: &TrainingSet, config: &RdwdConfig) -> Self {
        if config.qr_reduction && data.dim() > data.n() {
            let red = reduce_qr(data);
            Working {
                data: red.training_set(data),
                reduction: Some(red),
            }
        } else {
            Working {
                data: data.clone(),
                reduction: None,
            }
        }
    }

    fn to_working(&self, v: &[f64]) -> Vec<f64> {
        match &self.reduction {
            Some(r) => r.project(v),
            None => v.to_vec(),
        }
    }

    fn to_original(&self, v: &[f64]) -> Vec<f64> {
        match &self.reduction {
            Some(r) => r.lift(v),
            None => v.to_vec(),
        }
    }
}

fn accept_solution(sol: &ConicSolution) -> bool {
    match sol.status {
        SolveStatus::Optimal => true,
        // stalled close to the optimum: good enough for one outer step
        SolveStatus::SlowProgress => {
            let scale = sol.objective_value.abs().max(1.0);
            sol.primal_residual <= 1e-6 && sol.dual_residual <= 1e-6 && sol.gap <= 1e-6 * scale
        }
        _ => false,
    }
}

struct StepOutcome {
    solution: ConicSolution,
    layout: StepProblemLayout,
    step_length: f64,
}

/// Fits the separating sphere.
pub fn fit(data: &TrainingSet, config: &RdwdConfig) -> Result<FitResult, RdwdError> {
    config.validate()?;
    let working = Working::new(data, config);
    let wdata = &working.data;
    let points = wdata.points();
    let signs = wdata.signs();

    let init = initialize_center(data, &config.init)?;
    let mut center = working.to_working(&init);
    let penalty = match config.penalty {
        Penalty::Auto => default_penalty(wdata, &center)?,
        Penalty::Fixed(c) => c,
    };
    let weights = match config.weights {
        ClassWeights::Auto => default_weights(data),
        ClassWeights::Fixed { plus, minus } => (plus, minus),
    };
    let point_weights: Vec<f64> = wdata
        .labels()
        .iter()
        .map(|l| match l {
            Label::Positive => weights.0,
            Label::Negative => weights.1,
        })
        .collect();

    let mut step_length = config.step_length;
    let mut prev_objective = -1.0;
    let mut history: Vec<OuterIterState> = Vec::new();
    let mut warnings = Vec::new();
    let mut best: Option<(f64, Vec<f64>, f64, StepOutcome)> = None;
    let mut last: Option<(Vec<f64>, f64, StepOutcome)> = None;
    let mut converged = false;

    for k in 1..=config.max_outer_iters {
        let outcome = solve_step(
            points,
            &signs,
            &point_weights,
            &mut center,
            penalty,
            &mut step_length,
            config,
        )?;
        let sol = &outcome.solution;
        let layout = &outcome.layout;
        let mut delta: Vec<f64> = (0..layout.dim).map(|j| sol.primal[layout.delta(j)]).collect();
        let shift = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if shift > outcome.step_length {
            let s = outcome.step_length / shift;
            delta.iter_mut().for_each(|v| *v *= s);
        }
        let radius = sol.primal[layout.radius()].max(0.0);
        let next: Vec<f64> = center.iter().zip(&delta).map(|(c, d)| c + d).collect();
        let obj = objective(points, wdata.labels(), &next, radius, penalty, weights);
        debug!("outer step {k}: objective {obj:.10e}, radius {radius:.6e}, shift {shift:.3e}");

        let done = (obj - prev_objective).abs() < config.stop_eps;
        if !done && k > 1 && config.shrink_on_increase && obj > prev_objective {
            debug!("outer step {k}: objective rose to {obj:.10e}; halving the step length");
            history.push(OuterIterState {
                step_index: k,
                center: working.to_original(&center),
                radius: history.last().map_or(radius, |s: &OuterIterState| s.radius),
                objective: prev_objective,
                linearized_objective: sol.objective_value,
                step_length: outcome.step_length,
                center_shift: 0.0,
                accepted: false,
            });
            step_length *= 0.5;
            continue;
        }
        history.push(OuterIterState {
            step_index: k,
            center: working.to_original(&next),
            radius,
            objective: obj,
            linearized_objective: sol.objective_value,
            step_length: outcome.step_length,
            center_shift: shift.min(outcome.step_length),
            accepted: true,
        });
        prev_objective = obj;
        center = next;
        if best.as_ref().is_none_or(|b| obj < b.0) {
            best = Some((obj, center.clone(), radius, clone_outcome(&outcome)));
        }
        last = Some((center.clone(), radius, outcome));
        if done {
            converged = true;
            break;
        }
    }

    let (center_w, radius, outcome) = if converged {
        last.expect("at least one outer step")
    } else {
        warnings.push(format!(
            "outer loop hit the cap of {} steps; returning the best iterate",
            config.max_outer_iters
        ));
        let (_, c, r, o) = best.expect("at least one outer step");
        (c, r, o)
    };
    if radius == 0.0 {
        warnings.push("fitted radius is zero; classes are not separated by a proper sphere".into());
    }
    for w in &warnings {
        warn!("{w}");
    }

    let model = SphereModel {
        center: working.to_original(&center_w),
        radius,
        penalty,
        weights,
        config: config.clone(),
        iterations: history.len(),
        converged,
        objective: objective(points, wdata.labels(), &center_w, radius, penalty, weights),
    };
    let certificate = make_certificate(outcome, point_weights, penalty, config.stop_eps);
    Ok(FitResult {
        model,
        certificate,
        history,
        warnings,
    })
}

fn clone_outcome(o: &StepOutcome) -> StepOutcome {
    StepOutcome {
        solution: o.solution.clone(),
        layout: o.layout.clone(),
        step_length: o.step_length,
    }
}

/// Solves one step, recovering from a center that sits on a data point and,
/// when enabled, from inner-solver stalls by halving the step length.
fn solve_step(
    points: &[Vec<f64>],
    signs: &[f64],
    weights: &[f64],
    center: &mut [f64],
    penalty: f64,
    step_length: &mut f64,
    config: &RdwdConfig,
) -> Result<StepOutcome, RdwdError> {
    let mut nudges = 0;
    let mut shrinks = 0;
    loop {
        match build_step_problem(points, signs, weights, center, penalty, *step_length) {
            Err(RdwdError::DegeneratePoint { index }) if nudges < 16 => {
                let j = index % center.len();
                center[j] += DEGENERATE_NUDGE;
                nudges += 1;
            }
            Err(e) => return Err(e),
            Ok((program, layout)) => {
                let solution = socp::solve(&program, &config.solver)?;
                if accept_solution(&solution) {
                    return Ok(StepOutcome {
                        solution,
                        layout,
                        step_length: *step_length,
                    });
                }
                if solution.status == SolveStatus::SlowProgress
                    && config.shrink_on_slow_progress
                    && shrinks < 20
                {
                    *step_length *= 0.5;
                    shrinks += 1;
                    continue;
                }
                return Err(RdwdError::SolverStatus(solution.status));
            }
        }
    }
}

fn make_certificate(
    outcome: StepOutcome,
    weights: Vec<f64>,
    penalty: f64,
    kkt_tol: f64,
) -> DualCertificate {
    let StepOutcome {
        solution, layout, ..
    } = outcome;
    let n = layout.n;
    let z: Vec<f64> = (0..n).map(|i| solution.dual_eq[layout.residual_row(i)]).collect();
    let mut delta: Vec<f64> = (0..layout.dim).map(|j| solution.primal[layout.delta(j)]).collect();
    let shift = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if shift > layout.step_length {
        let s = layout.step_length / shift;
        delta.iter_mut().for_each(|v| *v *= s);
    }
    let step = StepSnapshot {
        rho: (0..n).map(|i| solution.primal[layout.rho(i)]).collect(),
        sigma: (0..n).map(|i| solution.primal[layout.sigma(i)]).collect(),
        slack: (0..n).map(|i| solution.primal[layout.slack(i)]).collect(),
        radius: solution.primal[layout.radius()].max(0.0),
        delta,
        weights,
        penalty,
        layout,
    };
    let kkt_residuals = certificate::residuals(&step, &z, kkt_tol);
    let diag = certificate::diagnostics_from(&step, &z, kkt_tol).ok();
    DualCertificate {
        z_star: diag.as_ref().map(|d| d.z_star.clone()),
        eta_hat: diag.as_ref().map(|d| d.eta_hat),
        separability: diag.as_ref().map(|d| d.separability),
        z,
        kkt_residuals,
        step,
    }
}
