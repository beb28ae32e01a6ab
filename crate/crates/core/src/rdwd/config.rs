use crate::socp::SolverTolerances;

use super::RdwdError;

/// How the first center `O^0` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    /// Mean of the +1 class.
    MeanPlus,
    /// Coordinate-wise median of the +1 class.
    MedianPlus,
    Explicit(Vec<f64>),
}

impl InitMode {
    pub fn name(&self) -> &'static str {
        match self {
            InitMode::MeanPlus => "mean",
            InitMode::MedianPlus => "median",
            InitMode::Explicit(_) => "explicit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// `C = 10 / min_{i in N} (d_i^0)^2`, see [`super::default_penalty`].
    Auto,
    Fixed(f64),
}

/// Per-class weights `w(+1)`, `w(-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassWeights {
    /// `w(+1) = n_-/n`, `w(-1) = n_+/n`.
    Auto,
    Fixed { plus: f64, minus: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdwdConfig {
    pub penalty: Penalty,
    /// Outer loop stops once `|Obj^k - Obj^{k-1}| < stop_eps`.
    pub stop_eps: f64,
    /// Trust-region radius `delta_k` on each center update.
    pub step_length: f64,
    pub max_outer_iters: usize,
    pub weights: ClassWeights,
    pub init: InitMode,
    /// Solve in QR-reduced coordinates when `d > n`.
    pub qr_reduction: bool,
    /// Halve the step length when the inner solver stalls.
    pub shrink_on_slow_progress: bool,
    /// Reject a step that raises the objective and halve the step length.
    pub shrink_on_increase: bool,
    pub solver: SolverTolerances,
}

impl Default for RdwdConfig {
    fn default() -> Self {
        Self {
            penalty: Penalty::Auto,
            stop_eps: 1e-4,
            step_length: 1e-3,
            max_outer_iters: 500,
            weights: ClassWeights::Auto,
            init: InitMode::MeanPlus,
            qr_reduction: true,
            shrink_on_slow_progress: false,
            shrink_on_increase: true,
            solver: SolverTolerances::default(),
        }
    }
}

impl RdwdConfig {
    pub fn validate(&self) -> Result<(), RdwdError> {
        let bad = |msg: &str| Err(RdwdError::InvalidConfig(msg.to_string()));
        if !(self.stop_eps > 0.0) {
            return bad("stop_eps must be positive");
        }
        if !(self.step_length > 0.0) {
            return bad("step_length must be positive");
        }
        if self.max_outer_iters == 0 {
            return bad("max_outer_iters must be at least 1");
        }
        if let Penalty::Fixed(c) = self.penalty {
            if !(c > 0.0) || !c.is_finite() {
                return bad("penalty must be positive");
            }
        }
        if let ClassWeights::Fixed { plus, minus } = self.weights {
            if !(plus > 0.0 && minus > 0.0) || !plus.is_finite() || !minus.is_finite() {
                return bad("class weights must be positive");
            }
        }
        Ok(())
    }
}
