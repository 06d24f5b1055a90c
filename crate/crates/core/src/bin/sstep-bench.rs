use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sstep_krylov::bench::{self, Instance, PrecondKind, TableKind};
use sstep_krylov::{AuditMode, Method, ProblemSpec, SolverConfig, Termination};

#[derive(Parser)]
#[command(
    name = "sstep-bench",
    version,
    about = "Standard and s-step Krylov solver benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mr,
    Omin,
    Gcr,
    Gmres,
    Somin,
    Sgcr,
    Sgmres,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecondArg {
    Ilu0,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum AuditArg {
    Exact,
    Bounded,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    Iterations,
    Opcounts,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one problem with one method.
    Solve {
        /// Interior grid points per direction.
        #[arg(long, required_unless_present = "matrix")]
        nx: Option<usize>,
        /// Matrix Market file to solve instead of the grid problem.
        #[arg(long, conflicts_with = "nx")]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 50.0)]
        gamma: f64,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, value_enum, default_value = "none")]
        precond: PrecondArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long = "max-iter", default_value_t = 10_000)]
        max_iter: usize,
        /// Require `||r||_2 < tol^2`.
        #[arg(long)]
        strict_termination: bool,
        #[arg(long, value_enum, default_value = "off")]
        audit: AuditArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every (problem, method) pair of a JSON configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "iterations")]
        table: TableArg,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> sstep_krylov::Result<ExitCode> {
    match cli.cmd {
        Cmd::Solve {
            nx,
            matrix,
            beta,
            gamma,
            method,
            s,
            k,
            m,
            precond,
            tol,
            max_iter,
            strict_termination,
            audit,
            out,
        } => {
            let name = match method {
                MethodArg::Mr => "mr",
                MethodArg::Omin => "omin",
                MethodArg::Gcr => "gcr",
                MethodArg::Gmres => "gmres",
                MethodArg::Somin => "somin",
                MethodArg::Sgcr => "sgcr",
                MethodArg::Sgmres => "sgmres",
            };
            let method = Method::from_parts(name, s, k, m)?;
            let precond = match precond {
                PrecondArg::Ilu0 => PrecondKind::Ilu0,
                PrecondArg::None => PrecondKind::None,
            };
            let inst = match (nx, matrix) {
                (_, Some(path)) => Instance::from_matrix_market(&path, None, None, precond)?,
                (Some(nx), None) => {
                    let mut spec = ProblemSpec::standard(nx);
                    spec.beta = beta;
                    spec.gamma = gamma;
                    Instance::grid(&spec, precond)?
                }
                (None, None) => unreachable!("clap requires one of --nx/--matrix"),
            };
            let cfg = SolverConfig::new(method)
                .with_termination(Termination {
                    threshold: tol,
                    strict: strict_termination,
                })
                .with_max_iterations(max_iter);
            let mode = match audit {
                AuditArg::Exact => AuditMode::Exact,
                AuditArg::Bounded => AuditMode::Bounded,
                AuditArg::Off => AuditMode::Off,
            };
            let rec = bench::run_one(&inst, &cfg, mode)?;
            let rep = &rec.report;
            println!(
                "{} {} n={} converged={} iterations={} cycles={} final_residual={:.3e} matvecs={} dotprods={} updates={}",
                rec.problem,
                rep.method,
                rec.n,
                rep.converged,
                rep.iterations,
                rep.cycles,
                rep.final_residual,
                rep.op_counts.matvecs,
                rep.op_counts.dotprods,
                rep.op_counts.vec_updates
            );
            if let Some(b) = &rep.breakdown {
                println!("breakdown: {}", b.label());
            }
            let mut code = ExitCode::SUCCESS;
            if let Some(v) = &rep.audit {
                println!(
                    "audit ({:?}): {} ({} steps checked, {} mismatches)",
                    v.mode,
                    if v.passed { "pass" } else { "FAIL" },
                    v.checked_steps,
                    v.mismatches.len()
                );
                if !v.passed {
                    code = ExitCode::from(1);
                }
            }
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&rec)
                    .map_err(|e| sstep_krylov::KrylovError::Io(e.to_string()))?;
                std::fs::write(path, json)?;
            }
            Ok(code)
        }
        Cmd::Sweep {
            config,
            out_dir,
            table,
        } => {
            let cfg = bench::RunConfig::load(&config)?;
            let kind = match table {
                TableArg::Iterations => TableKind::Iterations,
                TableArg::Opcounts => TableKind::Opcounts,
            };
            let records = bench::run_sweep(&cfg)?;
            bench::write_outputs(&records, &out_dir, kind)?;
            print!("{}", bench::emit_table(&records, kind));
            Ok(ExitCode::SUCCESS)
        }
    }
}
