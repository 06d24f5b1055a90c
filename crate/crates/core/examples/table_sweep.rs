//! Iteration-count table for Omin(4), 2-Omin(2), GMRES(10) and 2-GMRES(5)
//! with ILU(0) over several grid sizes.
//!
//! ```text
//! cargo run --release --example table_sweep
//! cargo run --release --example table_sweep -- --extended
//! ```

use sstep_krylov::bench::{emit_table, run_sweep, RunConfig, TableKind};

fn main() -> sstep_krylov::Result<()> {
    let extended = std::env::args().any(|a| a == "--extended");
    let sizes = if extended {
        "[64, 128, 192, 256]"
    } else {
        "[16, 32, 64]"
    };
    let cfg = RunConfig::from_json(&format!(
        r#"{{
            "problem": {{"nx": {sizes}, "beta": 1.0, "gamma": 50.0}},
            "precond": "ilu0",
            "methods": [
                {{"method": "omin", "k": 4}},
                {{"method": "somin", "s": 2, "k": 2}},
                {{"method": "gmres", "m": 10}},
                {{"method": "sgmres", "s": 2, "m": 5}}
            ]
        }}"#
    ))?;
    let records = run_sweep(&cfg)?;
    print!("{}", emit_table(&records, TableKind::Iterations));
    println!();
    print!("{}", emit_table(&records, TableKind::Opcounts));
    Ok(())
}
