use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KrylovError, Result};

/// A solver together with its structural parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// Minimal residual steepest descent.
    Mr,
    /// s-step minimal residual.
    Smr { s: usize },
    /// Orthomin(k).
    Omin { k: usize },
    /// Generalized conjugate residual (unbounded Orthomin window).
    Gcr,
    /// Restarted GMRES(m).
    Gmres { m: usize },
    /// s-step Orthomin(k).
    Somin { s: usize, k: usize },
    /// s-step GCR.
    Sgcr { s: usize },
    /// Restarted s-step GMRES with `m` blocks of width `s` per cycle.
    Sgmres { s: usize, m: usize },
}

impl Method {
    pub fn block_size(&self) -> usize {
        match *self {
            Method::Smr { s }
            | Method::Somin { s, .. }
            | Method::Sgcr { s }
            | Method::Sgmres { s, .. } => s,
            _ => 1,
        }
    }

    /// `k` for the Orthomin family, `m` for the GMRES family.
    pub fn window_or_restart(&self) -> Option<usize> {
        match *self {
            Method::Omin { k } | Method::Somin { k, .. } => Some(k),
            Method::Gmres { m } | Method::Sgmres { m, .. } => Some(m),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Mr => "mr",
            Method::Smr { .. } => "smr",
            Method::Omin { .. } => "omin",
            Method::Gcr => "gcr",
            Method::Gmres { .. } => "gmres",
            Method::Somin { .. } => "somin",
            Method::Sgcr { .. } => "sgcr",
            Method::Sgmres { .. } => "sgmres",
        }
    }

    pub fn is_gmres_family(&self) -> bool {
        matches!(self, Method::Gmres { .. } | Method::Sgmres { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(KrylovError::InvalidConfig(format!("{self}: {msg}")));
        let s = self.block_size();
        if s == 0 {
            return bad("block size s must be at least 1");
        }
        match *self {
            Method::Omin { k } | Method::Somin { k, .. } if k == 0 => {
                bad("window k must be at least 1")
            }
            Method::Gmres { m } | Method::Sgmres { m, .. } if m == 0 => {
                bad("restart m must be at least 1")
            }
            _ => Ok(()),
        }
    }

    /// Builds a method from command-line style parts.
    pub fn from_parts(name: &str, s: usize, k: usize, m: usize) -> Result<Self> {
        let method = match name {
            "mr" if s <= 1 => Method::Mr,
            "mr" | "smr" => Method::Smr { s },
            "omin" if s <= 1 => Method::Omin { k },
            "gcr" if s <= 1 => Method::Gcr,
            "gmres" if s <= 1 => Method::Gmres { m },
            "omin" | "somin" => Method::Somin { s, k },
            "gcr" | "sgcr" => Method::Sgcr { s },
            "gmres" | "sgmres" => Method::Sgmres { s, m },
            other => {
                return Err(KrylovError::InvalidConfig(format!(
                    "unknown method {other}"
                )))
            }
        };
        method.validate()?;
        Ok(method)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Method::Mr => write!(f, "MR"),
            Method::Smr { s } => write!(f, "{s}-MR"),
            Method::Omin { k } => write!(f, "Omin({k})"),
            Method::Gcr => write!(f, "GCR"),
            Method::Gmres { m } => write!(f, "GMRES({m})"),
            Method::Somin { s, k } => write!(f, "{s}-Omin({k})"),
            Method::Sgcr { s } => write!(f, "{s}-GCR"),
            Method::Sgmres { s, m } => write!(f, "{s}-GMRES({m})"),
        }
    }
}
