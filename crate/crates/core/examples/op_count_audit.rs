//! Counts vector operations during solves and checks them against the
//! closed-form per-iteration costs.

use sstep_krylov::accounting::{predicted_gmres, predicted_omin};
use sstep_krylov::{
    audit, discretize, ilu0_factor, solve, AuditMode, Method, ProblemSpec, SolverConfig, System,
};

fn main() -> sstep_krylov::Result<()> {
    let p = discretize(&ProblemSpec::standard(16))?;
    let ilu = ilu0_factor(&p.a)?;
    let sys = System::right_preconditioned(&p.a, &ilu);

    let omin = predicted_omin(10, 4, 1);
    println!(
        "Omin(4) steady state: {} dots, {} updates, {} matvec",
        omin.dotprods, omin.vec_updates, omin.matvecs
    );
    let g = predicted_gmres(5, 2);
    println!(
        "GMRES(10) cycle: {} dots, {} matvecs",
        g.standard.dotprods, g.standard.matvecs
    );
    println!(
        "2-GMRES(5) cycle: {} dots, {} matvecs\n",
        g.sstep.dotprods, g.sstep.matvecs
    );

    for method in [
        Method::Omin { k: 4 },
        Method::Somin { s: 2, k: 2 },
        Method::Gmres { m: 10 },
        Method::Sgmres { s: 2, m: 5 },
    ] {
        let rep = solve(&sys, &p.f, &p.x0, &SolverConfig::new(method))?;
        let v = audit(&rep, AuditMode::Exact);
        println!(
            "{:<14} totals {}/{}/{} (matvecs/dots/updates), audit {} over {} steps",
            method.to_string(),
            rep.op_counts.matvecs,
            rep.op_counts.dotprods,
            rep.op_counts.vec_updates,
            if v.passed { "pass" } else { "FAIL" },
            v.checked_steps
        );
        for m in v.mismatches.iter().take(3) {
            println!(
                "    step {}: {} counted {} predicted {}",
                m.step, m.counter, m.counted, m.predicted
            );
        }
    }
    Ok(())
}
