//! Assembles the convection-diffusion test problem and exports it as
//! Matrix Market files plus a JSON sidecar.
//!
//! ```text
//! cargo run --example generate_problem -- 16 /tmp/cd16
//! ```

use sstep_krylov::{discretize, ProblemSpec};

fn main() -> sstep_krylov::Result<()> {
    let mut args = std::env::args().skip(1);
    let nx: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let dir = args.next().unwrap_or_else(|| {
        std::env::temp_dir()
            .join("sstep-problem")
            .display()
            .to_string()
    });

    let p = discretize(&ProblemSpec::standard(nx))?;
    println!(
        "nx = {nx}, n = {}, nnz = {}, h = {:.4}",
        p.a.n_rows(),
        p.a.nnz(),
        p.spec.h()
    );

    let au = p.a.spmv(&p.u_true)?;
    let truncation = au
        .iter()
        .zip(&p.f)
        .map(|(a, f)| (a - f).abs())
        .fold(0.0, f64::max);
    println!("max |A u - f| at the exact solution: {truncation:.3e}");

    p.export(&dir, &format!("cd{nx}"))?;
    println!("wrote cd{nx}.mtx, cd{nx}_rhs.mtx, cd{nx}_x0.mtx and cd{nx}.json to {dir}");
    Ok(())
}
