//! MR, Orthomin(k), GCR and restarted GMRES on the same system.

use sstep_krylov::{discretize, ilu0_factor, solve, Method, ProblemSpec, SolverConfig, System};

fn main() -> sstep_krylov::Result<()> {
    let p = discretize(&ProblemSpec::standard(24))?;
    let ilu = ilu0_factor(&p.a)?;
    let sys = System::right_preconditioned(&p.a, &ilu);

    println!(
        "{:<10} {:>6} {:>8} {:>12}",
        "method", "iters", "matvecs", "residual"
    );
    for method in [
        Method::Mr,
        Method::Omin { k: 1 },
        Method::Omin { k: 4 },
        Method::Gcr,
        Method::Gmres { m: 10 },
    ] {
        let rep = solve(&sys, &p.f, &p.x0, &SolverConfig::new(method))?;
        println!(
            "{:<10} {:>6} {:>8} {:>12.3e}{}",
            method.to_string(),
            rep.iterations,
            rep.op_counts.matvecs,
            rep.final_residual,
            rep.failure_marker()
                .map(|m| format!("  {m}"))
                .unwrap_or_default()
        );
    }
    Ok(())
}
