//! s-step GMRES(m) against GMRES(sm): the cycle-end residuals agree while
//! the s-step variant needs only block inner products.

use sstep_krylov::{
    discretize, ilu0_factor, sarnoldi, solve, Method, ProblemSpec, SolverConfig, System,
};

fn main() -> sstep_krylov::Result<()> {
    let p = discretize(&ProblemSpec::standard(32))?;
    let ilu = ilu0_factor(&p.a)?;
    let sys = System::right_preconditioned(&p.a, &ilu);

    let basis = sarnoldi(&sys, &p.f, 2, 4)?;
    basis.hess.check_structure()?;
    println!(
        "s-step Arnoldi, s = 2, 4 blocks: G is {}x{}, {} reorthogonalization passes",
        basis.hess.as_dense().rows(),
        basis.hess.as_dense().cols(),
        basis.reorthogonalized
    );

    for (s, m) in [(2, 5), (3, 3), (4, 2)] {
        let cfg = |method| SolverConfig::new(method).with_tol(1e-8);
        let ss = solve(&sys, &p.f, &p.x0, &cfg(Method::Sgmres { s, m }))?;
        let gm = solve(&sys, &p.f, &p.x0, &cfg(Method::Gmres { m: s * m }))?;
        println!("\n{}-GMRES({m}) vs GMRES({}):", s, s * m);
        println!(
            "  iterations {} vs {}, cycles {} vs {}",
            ss.iterations, gm.iterations, ss.cycles, gm.cycles
        );
        for (c, (a, b)) in ss
            .cycle_residuals
            .iter()
            .zip(&gm.cycle_residuals)
            .enumerate()
        {
            println!("  cycle {c}: {a:.6e}  {b:.6e}");
        }
        if !ss.events.is_empty() {
            println!("  events: {:?}", ss.events);
        }
    }
    Ok(())
}
