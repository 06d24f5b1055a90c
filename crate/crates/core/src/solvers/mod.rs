//! Iterative solvers.
//!
//! Every solver takes a [`System`] (the matrix and an optional right
//! preconditioner), the right-hand side `f`, a starting vector `x0` and a
//! [`SolverConfig`]. Invalid inputs are reported as `Err`; numerical
//! trouble (stagnation, divergence, basis collapse) ends the solve with a
//! [`SolveReport`] whose `breakdown` names the cause.

pub mod sstep;
pub mod standard;

use serde::{Deserialize, Serialize};

use crate::accounting::Meter;
use crate::error::{KrylovError, Result};
use crate::method::Method;
use crate::precond::System;
use crate::report::{Breakdown, SolveReport};
use crate::sparse::vector::{axpy, norm2};
use crate::sparse::LinearOperator;

/// Residual growth factor (relative to `||r_0||`) flagged as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Stop when `||f - A x||_2 < threshold`.
///
/// With `strict`, the threshold is applied to `(r^T r)^{1/4}` instead,
/// i.e. `||r||_2 < threshold^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub threshold: f64,
    #[serde(default)]
    pub strict: bool,
}

impl Default for Termination {
    fn default() -> Self {
        Self {
            threshold: 1e-6,
            strict: false,
        }
    }
}

impl Termination {
    pub fn absolute(threshold: f64) -> Self {
        Self {
            threshold,
            strict: false,
        }
    }

    /// Bound on the residual 2-norm.
    pub fn bound(&self) -> f64 {
        if self.strict {
            self.threshold * self.threshold
        } else {
            self.threshold
        }
    }

    #[inline]
    pub fn met(&self, residual_norm: f64) -> bool {
        residual_norm < self.bound()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    #[serde(default)]
    pub termination: Termination,
    /// Outer iterations (Orthomin family) or inner steps (GMRES family).
    pub max_iterations: usize,
    /// Compute orthogonality diagnostics (not charged to the op counts).
    #[serde(default)]
    pub debug_checks: bool,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            termination: Termination::default(),
            max_iterations: 10_000,
            debug_checks: false,
        }
    }

    pub fn with_tol(mut self, threshold: f64) -> Self {
        self.termination.threshold = threshold;
        self
    }

    pub fn with_termination(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_debug_checks(mut self, on: bool) -> Self {
        self.debug_checks = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        if !(self.termination.threshold > 0.0) {
            return Err(KrylovError::InvalidConfig(
                "termination threshold must be positive".into(),
            ));
        }
        if self.method.block_size() > 8 {
            return Err(KrylovError::InvalidConfig(
                "block size s is capped at 8".into(),
            ));
        }
        Ok(())
    }
}

/// Runs whichever solver `cfg.method` names.
pub fn solve(sys: &System, f: &[f64], x0: &[f64], cfg: &SolverConfig) -> Result<SolveReport> {
    match cfg.method {
        Method::Mr => standard::mr_solve(sys, f, x0, cfg),
        Method::Omin { .. } | Method::Gcr => standard::omin_solve(sys, f, x0, cfg),
        Method::Gmres { .. } => standard::gmres_solve(sys, f, x0, cfg),
        Method::Smr { .. } => sstep::smr_solve(sys, f, x0, cfg),
        Method::Somin { .. } | Method::Sgcr { .. } => sstep::somin_solve(sys, f, x0, cfg),
        Method::Sgmres { .. } => sstep::sgmres_solve(sys, f, x0, cfg),
    }
}

/// Bookkeeping shared by all solvers for one call.
pub(crate) struct Run<'a> {
    pub sys: &'a System<'a>,
    pub f: &'a [f64],
    pub x0: &'a [f64],
    pub cfg: &'a SolverConfig,
    pub meter: Meter,
    pub history: Vec<f64>,
    pub cycle_residuals: Vec<f64>,
    pub events: Vec<Breakdown>,
    pub iterations: usize,
    pub cycles: usize,
    pub ortho_defect: Option<f64>,
}

impl<'a> Run<'a> {
    pub fn start(
        sys: &'a System<'a>,
        f: &'a [f64],
        x0: &'a [f64],
        cfg: &'a SolverConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let n = sys.dim();
        for len in [f.len(), x0.len()] {
            if len != n {
                return Err(KrylovError::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(Self {
            sys,
            f,
            x0,
            cfg,
            meter: Meter::new(),
            history: Vec::new(),
            cycle_residuals: Vec::new(),
            events: Vec::new(),
            iterations: 0,
            cycles: 0,
            ortho_defect: None,
        })
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn term(&self) -> Termination {
        self.cfg.termination
    }

    /// `y = A K^{-1} x`, charged as one matvec.
    pub fn apply(&mut self, x: &[f64]) -> Vec<f64> {
        self.meter.matvecs(1);
        self.sys.apply_new(x)
    }

    /// `f - A x`, charged as one matvec.
    pub fn true_residual(&mut self, x: &[f64]) -> Vec<f64> {
        self.meter.matvecs(1);
        self.sys.residual(self.f, x)
    }

    /// Norm used only for a termination test.
    pub fn check_norm(&mut self, r: &[f64]) -> f64 {
        self.meter.check_dot();
        norm2(r)
    }

    /// `x0 + K^{-1} w`.
    pub fn recover(&self, w: &[f64]) -> Vec<f64> {
        let mut x = self.x0.to_vec();
        axpy(1.0, &self.sys.lift(w), &mut x);
        x
    }

    pub fn note_defect(&mut self, d: f64) {
        self.ortho_defect = Some(self.ortho_defect.map_or(d, |o: f64| o.max(d)));
    }

    pub fn finish(self, x: Vec<f64>, converged: bool, breakdown: Option<Breakdown>) -> SolveReport {
        let final_residual = *self.history.last().expect("history is never empty");
        let (op_counts, step_ops) = self.meter.into_parts();
        SolveReport {
            method: self.cfg.method,
            converged,
            iterations: self.iterations,
            cycles: self.cycles,
            residual_history: self.history,
            cycle_residuals: self.cycle_residuals,
            final_residual,
            op_counts,
            step_ops,
            breakdown,
            events: self.events,
            orthogonality_defect: self.ortho_defect,
            audit: None,
            solution: x,
        }
    }
}
