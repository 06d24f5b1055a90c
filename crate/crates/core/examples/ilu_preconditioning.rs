//! ILU(0) factors of the five-point matrix and their effect on GMRES.

use sstep_krylov::sparse::vector::norm2;
use sstep_krylov::{
    discretize, ilu0_apply, ilu0_factor, solve, Method, ProblemSpec, SolverConfig, System,
};

fn main() -> sstep_krylov::Result<()> {
    let p = discretize(&ProblemSpec::standard(32))?;
    let ilu = ilu0_factor(&p.a)?;
    println!(
        "A: {} nonzeros; L: {} strictly lower; U: {} upper",
        p.a.nnz(),
        ilu.l_unit().nnz(),
        ilu.u_upper().nnz()
    );

    let r = p.a.spmv(&p.x0)?;
    let z = ilu0_apply(&ilu, &r);
    let az = p.a.spmv(&z)?;
    let gap: Vec<f64> = az.iter().zip(&r).map(|(a, b)| a - b).collect();
    println!("||A K^-1 r - r|| / ||r|| = {:.3e}", norm2(&gap) / norm2(&r));

    let cfg = SolverConfig::new(Method::Gmres { m: 10 });
    let plain = solve(&System::new(&p.a), &p.f, &p.x0, &cfg)?;
    let pre = solve(&System::right_preconditioned(&p.a, &ilu), &p.f, &p.x0, &cfg)?;
    println!(
        "GMRES(10) without preconditioning: {} iterations",
        plain.iterations
    );
    println!(
        "GMRES(10) with ILU(0):             {} iterations",
        pre.iterations
    );
    Ok(())
}
