//! Dual certificates for the final outer step and the optimality checks
//! built on them.

use nalgebra::DVector;

use crate::data::TrainingSet;

use super::step::StepProblemLayout;
use super::{RdwdError, SphereModel};

/// Primal and problem data of the step that produced a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSnapshot {
    pub layout: StepProblemLayout,
    /// `w(y_i)` per point.
    pub weights: Vec<f64>,
    pub penalty: f64,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub slack: Vec<f64>,
    pub radius: f64,
    /// Center update `O^k - O^{k-1}` in working coordinates.
    pub delta: Vec<f64>,
}

/// Dual variables `z` of the final step plus derived diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub z: Vec<f64>,
    /// `z` rescaled so each class sums to one; `None` when not separable.
    pub z_star: Option<Vec<f64>>,
    pub eta_hat: Option<f64>,
    pub separability: Option<f64>,
    pub kkt_residuals: KktReport,
    pub step: StepSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Named, dimensionless residuals.
    pub residuals: Vec<(&'static str, f64)>,
    pub tolerance: f64,
    pub passed: bool,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }
}

/// `(rho_i, sigma_i)` implied by a dual value `z_i` and class weight `w_i`:
/// `rho = (z + w) / (2 sqrt(w z))`, `sigma = (z - w) / (2 sqrt(w z))`.
pub fn rho_sigma_from_dual(z: f64, weight: f64) -> (f64, f64) {
    let root = 2.0 * (weight * z).sqrt();
    ((z + weight) / root, (z - weight) / root)
}

/// `W^T Y z`: the signed, dual-weighted sum of unit directions.
fn weighted_direction(layout: &StepProblemLayout, z: &[f64]) -> DVector<f64> {
    let yz = DVector::from_iterator(z.len(), z.iter().zip(&layout.signs).map(|(z, y)| z * y));
    layout.directions.transpose() * yz
}

/// Evaluates the optimality conditions of the final step program.
pub fn kkt_check(
    data: &TrainingSet,
    model: &SphereModel,
    cert: &DualCertificate,
    tol: f64,
) -> KktReport {
    let mut report = residuals(&cert.step, &cert.z, tol);
    let mismatch = if data.n() != cert.z.len() || model.radius != cert.step.radius {
        1.0
    } else {
        0.0
    };
    report.residuals.push(("model_consistency", mismatch));
    report.passed = report.max_residual() <= tol;
    report
}

pub(crate) fn residuals(step: &StepSnapshot, z: &[f64], tol: f64) -> KktReport {
    let layout = &step.layout;
    let n = layout.n;
    let radius = step.radius;
    let delta = DVector::from_column_slice(&step.delta);
    let wd = &layout.directions * &delta;

    let mut primal_eq = 0.0f64;
    let mut primal_bounds = (-radius).max(0.0);
    let mut dual_bounds = 0.0f64;
    let mut slack_comp = 0.0f64;
    let mut cone_comp = 0.0f64;
    for i in 0..n {
        let y = layout.signs[i];
        let lhs = step.sigma[i] - step.rho[i] + radius * y + y * wd[i] + step.slack[i];
        let rhs = y * layout.distances[i];
        let scale = 1.0
            + step.rho[i].abs()
            + step.sigma[i].abs()
            + radius
            + step.slack[i].abs()
            + layout.distances[i];
        primal_eq = primal_eq.max((lhs - rhs).abs() / scale);
        primal_bounds = primal_bounds.max(-step.slack[i]);

        let upper = step.penalty * step.weights[i];
        let bound_violation = if z[i] <= 0.0 {
            1.0
        } else {
            (z[i] - upper).max(0.0) / (1.0 + upper)
        };
        dual_bounds = dual_bounds.max(bound_violation);
        slack_comp = slack_comp.max(((upper - z[i]) * step.slack[i]).abs() / (1.0 + upper));

        if z[i] > 0.0 {
            let (rho, sigma) = rho_sigma_from_dual(z[i], step.weights[i]);
            cone_comp = cone_comp
                .max((step.rho[i] - rho).abs() / (1.0 + rho.abs()))
                .max((step.sigma[i] - sigma).abs() / (1.0 + rho.abs()));
        } else {
            cone_comp = 1.0;
        }
    }

    let z_sum: f64 = z.iter().map(|v| v.abs()).sum();
    let ytz: f64 = z.iter().zip(&layout.signs).map(|(z, y)| z * y).sum();
    let radius_cond = ((radius * ytz).abs() / (1.0 + radius * z_sum))
        .max(ytz.max(0.0) / (1.0 + z_sum));

    // SOC complementarity of (delta; Delta) with the tight dual slack (|g|; -g)
    let g = weighted_direction(layout, z);
    let g_norm = g.norm();
    let step_len = layout.step_length;
    primal_bounds = primal_bounds.max((delta.norm() - step_len).max(0.0) / step_len);
    let trust = (step_len * g_norm - delta.dot(&g))
        .abs()
        .max((&delta * g_norm - &g * step_len).norm())
        / (1.0 + g_norm);

    let residuals = vec![
        ("primal_equality", primal_eq),
        ("primal_bounds", primal_bounds),
        ("dual_bounds", dual_bounds),
        ("slack_complementarity", slack_comp),
        ("radius_complementarity", radius_cond),
        ("trust_region", trust),
        ("cone_complementarity", cone_comp),
    ];
    let passed = residuals.iter().all(|&(_, v)| v <= tol);
    KktReport {
        residuals,
        tolerance: tol,
        passed,
    }
}

/// Scale and separability read off the dual solution.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDiagnostics {
    /// `e_+^T z_+`, the scale of `z = eta z*`.
    pub eta_hat: f64,
    /// Scale maximizing the dual objective along `z*`:
    /// `sqrt(eta) = sum_i sqrt(w_i z*_i) / separability`.
    pub eta_from_objective: f64,
    /// `-d^T Y z* + delta ||W^T Y z*||`.
    pub separability: f64,
    pub z_star: Vec<f64>,
}

/// Rescales the duals and evaluates the separability measure.
///
/// Requires `y^T z = 0` up to `tol` (relative to `sum z`); a clearly
/// negative `y^T z` means the radius hit zero and the decomposition does not
/// apply.
pub fn dual_diagnostics(cert: &DualCertificate, tol: f64) -> Result<DualDiagnostics, RdwdError> {
    diagnostics_from(&cert.step, &cert.z, tol)
}

pub(crate) fn diagnostics_from(
    step: &StepSnapshot,
    z: &[f64],
    tol: f64,
) -> Result<DualDiagnostics, RdwdError> {
    let layout = &step.layout;
    let z_sum: f64 = z.iter().sum();
    let ytz: f64 = z.iter().zip(&layout.signs).map(|(z, y)| z * y).sum();
    if ytz < -tol * z_sum || z_sum <= 0.0 {
        return Err(RdwdError::NotSeparable { ytz });
    }
    let pos: f64 = z
        .iter()
        .zip(&layout.signs)
        .filter(|(_, &y)| y > 0.0)
        .map(|(z, _)| z)
        .sum();
    let neg: f64 = z_sum - pos;
    let z_star: Vec<f64> = z
        .iter()
        .zip(&layout.signs)
        .map(|(&z, &y)| if y > 0.0 { z / pos } else { z / neg })
        .collect();
    let linear: f64 = z_star
        .iter()
        .zip(&layout.signs)
        .zip(&layout.distances)
        .map(|((z, y), d)| y * z * d)
        .sum();
    let spread = weighted_direction(layout, &z_star).norm();
    let separability = -linear + layout.step_length * spread;
    if separability <= 0.0 {
        return Err(RdwdError::NotSeparable { ytz });
    }
    let root_sum: f64 = z_star
        .iter()
        .zip(&step.weights)
        .map(|(z, w)| (z * w).sqrt())
        .sum();
    let root_eta = root_sum / separability;
    Ok(DualDiagnostics {
        eta_hat: pos,
        eta_from_objective: root_eta * root_eta,
        separability,
        z_star,
    })
}
