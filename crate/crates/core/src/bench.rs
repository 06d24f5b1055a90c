//! Benchmark driver: JSON run configurations, parallel sweeps, iteration
//! and op-count tables, CSV and JSON reports.
//!
//! ```json
//! {
//!   "problem": { "nx": [64, 128], "beta": 1.0, "gamma": 50.0 },
//!   "precond": "ilu0",
//!   "methods": [ { "method": "omin", "k": 4 }, { "method": "sgmres", "s": 2, "m": 5 } ],
//!   "termination": { "threshold": 1e-6 },
//!   "max_iterations": 10000
//! }
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accounting::{audit, AuditMode};
use crate::error::{KrylovError, Result};
use crate::method::Method;
use crate::precond::{ilu0_factor, Ilu0Factors, System};
use crate::problem::{discretize, initial_guess, Coefficients, ProblemSpec};
use crate::report::SolveReport;
use crate::solvers::{solve, SolverConfig, Termination};
use crate::sparse::{matrix_market, LinearOperator, SparseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSizes {
    One(usize),
    Many(Vec<usize>),
}

impl GridSizes {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            GridSizes::One(n) => vec![*n],
            GridSizes::Many(v) => v.clone(),
        }
    }
}

fn default_beta() -> f64 {
    1.0
}

fn default_gamma() -> f64 {
    50.0
}

/// Where the linear system comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSource {
    Grid {
        nx: GridSizes,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    /// An external matrix. Without `rhs` the right-hand side is `A 1`;
    /// without `x0` the start vector is the grid problem's initial guess.
    MatrixMarket {
        matrix_market: PathBuf,
        #[serde(default)]
        rhs: Option<PathBuf>,
        #[serde(default)]
        x0: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    #[default]
    Ilu0,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    #[default]
    Iterations,
    Opcounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputSpec {
    /// JSON array of run records.
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub table: TableKind,
}

fn default_max_iterations() -> usize {
    10_000
}

fn default_audit() -> AuditMode {
    AuditMode::Off
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSource,
    #[serde(default)]
    pub precond: PrecondKind,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub termination: Termination,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_audit")]
    pub audit: AuditMode,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| KrylovError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(KrylovError::InvalidConfig("no methods given".into()));
        }
        if let ProblemSource::Grid { nx, .. } = &self.problem {
            if nx.to_vec().is_empty() {
                return Err(KrylovError::InvalidConfig("no grid sizes given".into()));
            }
        }
        for m in &self.methods {
            self.solver_config(*m).validate()?;
        }
        Ok(())
    }

    pub fn solver_config(&self, method: Method) -> SolverConfig {
        SolverConfig::new(method)
            .with_termination(self.termination)
            .with_max_iterations(self.max_iterations)
    }
}

/// A loaded linear system plus its (optional) ILU(0) factors.
pub struct Instance {
    pub label: String,
    pub nx: Option<usize>,
    pub a: SparseMatrix,
    pub f: Vec<f64>,
    pub x0: Vec<f64>,
    pub ilu: Option<Ilu0Factors>,
}

impl Instance {
    pub fn grid(spec: &ProblemSpec, precond: PrecondKind) -> Result<Self> {
        let p = discretize(spec)?;
        let ilu = match precond {
            PrecondKind::Ilu0 => Some(ilu0_factor(&p.a)?),
            PrecondKind::None => None,
        };
        Ok(Self {
            label: format!("nx={}", spec.nx),
            nx: Some(spec.nx),
            a: p.a,
            f: p.f,
            x0: p.x0,
            ilu,
        })
    }

    pub fn from_matrix_market(
        path: &Path,
        rhs: Option<&Path>,
        x0: Option<&Path>,
        precond: PrecondKind,
    ) -> Result<Self> {
        let a = matrix_market::read_matrix_file(path)?;
        if a.n_rows() != a.n_cols() {
            return Err(KrylovError::InvalidStructure("matrix is not square".into()));
        }
        let n = a.n_rows();
        let f = match rhs {
            Some(p) => matrix_market::read_vector(std::fs::File::open(p)?)?,
            None => a.apply_new(&vec![1.0; n]),
        };
        let x0 = match x0 {
            Some(p) => matrix_market::read_vector(std::fs::File::open(p)?)?,
            None => initial_guess(n),
        };
        for v in [&f, &x0] {
            if v.len() != n {
                return Err(KrylovError::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let ilu = match precond {
            PrecondKind::Ilu0 => Some(ilu0_factor(&a)?),
            PrecondKind::None => None,
        };
        Ok(Self {
            label: path.display().to_string(),
            nx: None,
            a,
            f,
            x0,
            ilu,
        })
    }

    pub fn system(&self) -> System<'_> {
        match &self.ilu {
            Some(k) => System::right_preconditioned(&self.a, k),
            None => System::new(&self.a),
        }
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }
}

/// One solve inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub nx: Option<usize>,
    pub n: usize,
    pub preconditioned: bool,
    pub report: SolveReport,
}

pub fn build_instances(cfg: &RunConfig) -> Result<Vec<Instance>> {
    match &cfg.problem {
        ProblemSource::Grid { nx, beta, gamma } => nx
            .to_vec()
            .into_iter()
            .map(|nx| {
                let spec = ProblemSpec {
                    nx,
                    beta: *beta,
                    gamma: *gamma,
                    coefficients: Coefficients::Standard,
                };
                Instance::grid(&spec, cfg.precond)
            })
            .collect(),
        ProblemSource::MatrixMarket {
            matrix_market,
            rhs,
            x0,
        } => Ok(vec![Instance::from_matrix_market(
            matrix_market,
            rhs.as_deref(),
            x0.as_deref(),
            cfg.precond,
        )?]),
    }
}

/// Solves one instance with one method, attaching an audit verdict when
/// requested.
pub fn run_one(inst: &Instance, cfg: &SolverConfig, audit_mode: AuditMode) -> Result<RunRecord> {
    let sys = inst.system();
    let mut report = solve(&sys, &inst.f, &inst.x0, cfg)?;
    if audit_mode != AuditMode::Off {
        report.audit = Some(audit(&report, audit_mode));
    }
    Ok(RunRecord {
        problem: inst.label.clone(),
        nx: inst.nx,
        n: inst.n(),
        preconditioned: inst.ilu.is_some(),
        report,
    })
}

/// Every (problem, method) pair, solved in parallel. Records come back in
/// problem-major, method-minor order regardless of scheduling.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let instances = build_instances(cfg)?;
    let jobs: Vec<(usize, Method)> = (0..instances.len())
        .flat_map(|i| cfg.methods.iter().map(move |m| (i, *m)))
        .collect();
    jobs.par_iter()
        .map(|&(i, m)| run_one(&instances[i], &cfg.solver_config(m), cfg.audit))
        .collect()
}

/// Column heading in the style `s=2,k=2` / `s=1,m=10`.
pub fn column_label(m: &Method) -> String {
    let s = m.block_size();
    match m {
        Method::Omin { k } | Method::Somin { k, .. } => format!("s={s},k={k}"),
        Method::Gmres { m } | Method::Sgmres { m, .. } => format!("s={s},m={m}"),
        Method::Gcr | Method::Sgcr { .. } => format!("s={s},gcr"),
        Method::Mr | Method::Smr { .. } => format!("s={s},mr"),
    }
}

fn cell(rec: &RunRecord, kind: TableKind) -> String {
    if let Some(mark) = rec.report.failure_marker() {
        return mark;
    }
    let ops = &rec.report.op_counts;
    match kind {
        TableKind::Iterations => rec.report.iterations.to_string(),
        TableKind::Opcounts => format!("{}/{}/{}", ops.matvecs, ops.dotprods, ops.vec_updates),
    }
}

/// Plain-text table: one row per problem, one column per method.
pub fn emit_table(records: &[RunRecord], kind: TableKind) -> String {
    let mut methods: Vec<Method> = Vec::new();
    let mut rows: Vec<String> = Vec::new();
    for r in records {
        if !methods.contains(&r.report.method) {
            methods.push(r.report.method);
        }
        let label = row_label(r);
        if !rows.contains(&label) {
            rows.push(label);
        }
    }
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("dimension".to_string())
        .chain(methods.iter().map(column_label))
        .collect()];
    for row in &rows {
        let mut line = vec![row.clone()];
        for m in &methods {
            let c = records
                .iter()
                .find(|r| &row_label(r) == row && r.report.method == *m)
                .map(|r| cell(r, kind))
                .unwrap_or_else(|| "-".into());
            line.push(c);
        }
        grid.push(line);
    }
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|j| grid.iter().map(|l| l[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, line) in grid.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    out.push('\n');
    match kind {
        TableKind::Iterations => out.push_str(
            "iterations: Omin family counts outer (block) iterations; GMRES family counts inner steps summed over cycles\n",
        ),
        TableKind::Opcounts => out.push_str("cells: matvecs/dot products/vector updates (termination checks excluded)\n"),
    }
    out.push_str("DIV(i): diverged at iteration i, MAX(i): iteration cap, BRK(kind): breakdown\n");
    out
}

fn row_label(r: &RunRecord) -> String {
    match r.nx {
        Some(nx) => nx.to_string(),
        None => r.problem.clone(),
    }
}

pub const CSV_HEADER: &str =
    "nx,method,s,k_or_m,preconditioned,iterations,matvecs,dotprods,updates,final_residual,converged,breakdown";

pub fn emit_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let rep = &r.report;
        let m = rep.method;
        let nx = r.nx.map(|v| v.to_string()).unwrap_or_default();
        let km = m
            .window_or_restart()
            .map(|v| v.to_string())
            .unwrap_or_default();
        let brk = rep
            .breakdown
            .as_ref()
            .map(|b| b.label())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{nx},{},{},{km},{},{},{},{},{},{:e},{},{brk}",
            m.name(),
            m.block_size(),
            r.preconditioned,
            rep.iterations,
            rep.op_counts.matvecs,
            rep.op_counts.dotprods,
            rep.op_counts.vec_updates,
            rep.final_residual,
            rep.converged,
        );
    }
    out
}

/// Writes `table.txt`, `results.csv` and `reports.json` into `dir`.
pub fn write_outputs(records: &[RunRecord], dir: impl AsRef<Path>, kind: TableKind) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("table.txt"), emit_table(records, kind))?;
    std::fs::write(dir.join("results.csv"), emit_csv(records))?;
    let json = serde_json::to_string_pretty(records).map_err(|e| KrylovError::Io(e.to_string()))?;
    std::fs::write(dir.join("reports.json"), json)?;
    Ok(())
}
