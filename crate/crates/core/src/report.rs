use serde::{Deserialize, Serialize};

use crate::accounting::{AuditVerdict, OpCounter, StepOps};
use crate::method::Method;

/// Why a solve stopped without meeting the termination criterion, or a
/// recoverable event that happened along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Breakdown {
    /// `(A p)^T (A p) = 0` or `A r = 0` with `r != 0`.
    Stagnation { iteration: usize },
    /// Residual grew beyond ten times its starting value.
    Diverged { iteration: usize },
    /// The monomial s-step basis lost independence.
    BasisCollapse { iteration: usize, detail: String },
    /// An s-step GMRES cycle was replaced by one standard GMRES cycle.
    Fallback { cycle: usize, detail: String },
    /// The projected least-squares problem lost rank.
    RankDeficient { iteration: usize },
    /// Iteration cap reached.
    MaxIterations { iterations: usize },
}

impl Breakdown {
    pub fn label(&self) -> String {
        match self {
            Breakdown::Stagnation { .. } => "stagnation".into(),
            Breakdown::Diverged { .. } => "diverged".into(),
            Breakdown::BasisCollapse { .. } => "basis_collapse".into(),
            Breakdown::Fallback { .. } => "fallback".into(),
            Breakdown::RankDeficient { .. } => "rank_deficient".into(),
            Breakdown::MaxIterations { .. } => "max_iterations".into(),
        }
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub converged: bool,
    /// Orthomin family: outer (block) iterations. GMRES family: inner
    /// Arnoldi steps summed over cycles (`s` per block for s-step GMRES).
    pub iterations: usize,
    /// Restart cycles (GMRES family only).
    pub cycles: usize,
    /// Residual 2-norms at every checkpoint; the last entry is the
    /// recomputed true residual `||f - A x||`.
    pub residual_history: Vec<f64>,
    /// True residual norms at the start of every cycle and at the end.
    pub cycle_residuals: Vec<f64>,
    pub final_residual: f64,
    pub op_counts: OpCounter,
    pub step_ops: Vec<StepOps>,
    /// Fatal stop reason, if any.
    pub breakdown: Option<Breakdown>,
    /// Recovered events (fallback cycles, reorthogonalizations).
    pub events: Vec<Breakdown>,
    /// Largest relative orthogonality defect seen (debug checks only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub orthogonality_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub audit: Option<AuditVerdict>,
    #[serde(skip)]
    pub solution: Vec<f64>,
}

impl SolveReport {
    /// `"DIV(iter)"`-style marker, or `None` if the solve converged.
    pub fn failure_marker(&self) -> Option<String> {
        if self.converged {
            return None;
        }
        Some(match &self.breakdown {
            Some(Breakdown::Diverged { iteration }) => format!("DIV({iteration})"),
            Some(Breakdown::MaxIterations { iterations }) => format!("MAX({iterations})"),
            Some(b) => format!("BRK({})", b.label()),
            None => "FAIL".into(),
        })
    }
}
