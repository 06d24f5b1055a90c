//! s-step Orthomin(k) for several block sizes next to standard Orthomin(k).
//!
//! Each s-step iteration spends `s` matvecs, so the iteration count drops
//! roughly by `s` while the matvec count stays comparable.

use sstep_krylov::{discretize, ilu0_factor, solve, Method, ProblemSpec, SolverConfig, System};

fn main() -> sstep_krylov::Result<()> {
    let p = discretize(&ProblemSpec::standard(32))?;
    let ilu = ilu0_factor(&p.a)?;
    let sys = System::right_preconditioned(&p.a, &ilu);

    println!(
        "{:<14} {:>6} {:>8} {:>9} {:>12}",
        "method", "iters", "matvecs", "dotprods", "residual"
    );
    for method in [
        Method::Omin { k: 4 },
        Method::Somin { s: 2, k: 2 },
        Method::Somin { s: 3, k: 2 },
        Method::Somin { s: 4, k: 1 },
        Method::Sgcr { s: 2 },
    ] {
        let rep = solve(
            &sys,
            &p.f,
            &p.x0,
            &SolverConfig::new(method).with_debug_checks(true),
        )?;
        println!(
            "{:<14} {:>6} {:>8} {:>9} {:>12.3e}  orthogonality {:.1e}",
            method.to_string(),
            rep.iterations,
            rep.op_counts.matvecs,
            rep.op_counts.dotprods,
            rep.final_residual,
            rep.orthogonality_defect.unwrap_or(0.0)
        );
    }
    Ok(())
}
