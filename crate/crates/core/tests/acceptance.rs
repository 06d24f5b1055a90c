mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, DVector};
use sstep_krylov::dense::DenseMatrix;
use sstep_krylov::solvers::sstep::{smr_step, SArnoldi};
use sstep_krylov::{
    arnoldi, discretize, ilu0_factor, sarnoldi, solve, LinearOperator, Method, ProblemSpec,
    SolveReport, SolverConfig, SparseMatrix, System,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn run(sys: &System, p: &sstep_krylov::DiscretizedProblem, cfg: &SolverConfig) -> SolveReport {
    solve(sys, &p.f, &p.x0, cfg).expect("valid configuration")
}

/// Largest entrywise gap scaled by the initial residual, and the largest
/// plain relative gap.
fn history_gap(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    if a.len() != b.len() {
        return None;
    }
    let scale = a[0].abs().max(b[0].abs());
    let scaled = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max);
    let plain = a
        .iter()
        .zip(b)
        .map(|(x, y)| rel_diff(*x, *y))
        .fold(0.0, f64::max);
    Some((scaled, plain))
}

fn reductions() -> Outcome {
    let p = discretize(&ProblemSpec::standard(7)).unwrap();
    let ilu = ilu0_factor(&p.a).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_plain: f64 = 0.0;
    let mut notes = Vec::new();
    for (label, sys) in [
        ("plain", System::new(&p.a)),
        ("ilu0", System::right_preconditioned(&p.a, &ilu)),
    ] {
        let mut pairs = vec![(Method::Mr, Method::Smr { s: 1 })];
        for k in [1, 2, 4] {
            pairs.push((Method::Omin { k }, Method::Somin { s: 1, k }));
        }
        for m in [3, 6, 10] {
            pairs.push((Method::Gmres { m }, Method::Sgmres { s: 1, m }));
        }
        for (a, b) in pairs {
            let ra = run(&sys, &p, &SolverConfig::new(a));
            let rb = run(&sys, &p, &SolverConfig::new(b));
            match history_gap(&ra.residual_history, &rb.residual_history) {
                Some((g, plain)) if ra.converged && rb.converged => {
                    worst = worst.max(g);
                    worst_plain = worst_plain.max(plain);
                }
                _ => notes.push(format!(
                    "{label}: {a} ({} entries) vs {b} ({} entries)",
                    ra.residual_history.len(),
                    rb.residual_history.len()
                )),
            }
        }
    }
    let ok = notes.is_empty() && worst <= 1e-10;
    outcome(
        ok,
        format!(
            "max history gap relative to ||r0|| {worst:.2e} (limit 1e-10), entrywise {worst_plain:.2e} {}",
            notes.join("; ")
        ),
    )
}

fn restart_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for nx in [7, 24] {
        let p = discretize(&ProblemSpec::standard(nx)).unwrap();
        let ilu = ilu0_factor(&p.a).unwrap();
        let sys = System::right_preconditioned(&p.a, &ilu);
        let a = run(&sys, &p, &SolverConfig::new(Method::Sgmres { s: 2, m: 3 }));
        let b = run(&sys, &p, &SolverConfig::new(Method::Gmres { m: 6 }));
        let cycles = 5.min(a.cycles).min(b.cycles);
        if !(a.converged && b.converged) || (nx == 24 && cycles < 5) {
            return outcome(
                false,
                format!("nx={nx}: {} / {} cycles", a.cycles, b.cycles),
            );
        }
        for c in 1..=cycles {
            worst = worst.max(rel_diff(a.cycle_residuals[c], b.cycle_residuals[c]));
        }
        lines.push(format!(
            "nx={nx}: {:?} vs {:?}",
            short(&a.cycle_residuals[1..=cycles]),
            short(&b.cycle_residuals[1..=cycles])
        ));
    }
    outcome(
        worst <= 1e-6,
        format!(
            "cycle-end residuals {}, max relative gap {worst:.2e} (limit 1e-6)",
            lines.join("; ")
        ),
    )
}

fn short(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3e}")).collect()
}

fn oracle_optimality() -> Outcome {
    let mut worst: f64 = 0.0;
    for (seed, n) in [(1u64, 64usize), (2, 40), (3, 25)] {
        let a = random_sparse(n, 4, seed);
        let na = to_na(&a);
        let f = random_vec(n, seed + 100);
        let x0 = vec![0.0; n];
        let sys = System::new(&a);
        for m in [1, 2, 4, 8] {
            let cfg = SolverConfig::new(Method::Gmres { m })
                .with_tol(1e-300)
                .with_max_iterations(m);
            let rep = solve(&sys, &f, &x0, &cfg).unwrap();
            let attained = rep.cycle_residuals[1];
            let oracle = krylov_min_residual(&na, &f, m);
            worst = worst.max(rel_diff(attained, oracle));
        }
        for s in 1..=4 {
            let step = smr_step(&a, &x0, &f, s).unwrap();
            let attained = DVector::from_column_slice(&step.r).norm();
            let true_r = DVector::from_column_slice(&f) - &na * DVector::from_column_slice(&step.x);
            let oracle = krylov_min_residual(&na, &f, s);
            worst = worst
                .max(rel_diff(attained, oracle))
                .max(rel_diff(true_r.norm(), oracle));
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max relative gap to brute-force minimum {worst:.2e} (limit 1e-6)"),
    )
}

fn table_row_64() -> Outcome {
    let p = discretize(&ProblemSpec::standard(64)).unwrap();
    let ilu = ilu0_factor(&p.a).unwrap();
    let sys = System::right_preconditioned(&p.a, &ilu);
    let targets = [
        (Method::Omin { k: 4 }, 193.0),
        (Method::Somin { s: 2, k: 2 }, 98.0),
        (Method::Gmres { m: 10 }, 30.0),
        (Method::Sgmres { s: 2, m: 5 }, 30.0),
    ];
    let mut ok = true;
    let mut cells = Vec::new();
    let mut its = Vec::new();
    for (m, target) in targets {
        let rep = run(&sys, &p, &SolverConfig::new(m));
        let it = rep.iterations as f64;
        let inside = rep.converged && (it - target).abs() <= 0.2 * target;
        ok &= inside;
        its.push(rep.iterations);
        cells.push(format!(
            "{m}={}{} (target {target}, band [{:.0},{:.0}])",
            rep.iterations,
            if rep.converged { "" } else { " not converged" },
            0.8 * target,
            1.2 * target
        ));
    }
    let within_cycle = its[2].abs_diff(its[3]) <= 10;
    ok &= within_cycle;
    outcome(
        ok,
        format!(
            "{}; GMRES(10) vs 2-GMRES(5) within one cycle: {within_cycle}",
            cells.join(", ")
        ),
    )
}

fn op_count_audit() -> Outcome {
    let p = discretize(&ProblemSpec::standard(10)).unwrap();
    let ilu = ilu0_factor(&p.a).unwrap();
    let sys = System::right_preconditioned(&p.a, &ilu);
    let tight = |m| SolverConfig::new(m).with_tol(1e-10);
    let mut problems = Vec::new();
    for (s, k) in [(2, 1), (2, 2), (3, 2), (4, 1)] {
        let rep = run(&sys, &p, &tight(Method::Somin { s, k }));
        for (i, st) in rep
            .step_ops
            .iter()
            .enumerate()
            .filter(|(_, st)| st.complete)
        {
            if st.ops.matvecs != s as u64 {
                problems.push(format!(
                    "{s}-Omin({k}) iteration {i}: {} matvecs",
                    st.ops.matvecs
                ));
            }
        }
    }
    for (s, m) in [(2, 5), (3, 3), (2, 3)] {
        let rep = run(&sys, &p, &tight(Method::Sgmres { s, m }));
        for (i, st) in rep
            .step_ops
            .iter()
            .enumerate()
            .filter(|(_, st)| st.complete)
        {
            if st.size == m && st.ops.matvecs != (s * (m + 1)) as u64 {
                problems.push(format!(
                    "{s}-GMRES({m}) cycle {i}: {} matvecs",
                    st.ops.matvecs
                ));
            }
        }
        let rep = run(&sys, &p, &tight(Method::Gmres { m: s * m }));
        for (i, st) in rep
            .step_ops
            .iter()
            .enumerate()
            .filter(|(_, st)| st.complete)
        {
            if st.size == s * m && st.ops.matvecs != (s * m + 1) as u64 {
                problems.push(format!(
                    "GMRES({}) cycle {i}: {} matvecs",
                    s * m,
                    st.ops.matvecs
                ));
            }
        }
    }
    let mut checked = 0;
    for k in [1, 2, 4] {
        let rep = run(&sys, &p, &tight(Method::Omin { k }));
        for (i, st) in rep
            .step_ops
            .iter()
            .enumerate()
            .filter(|(i, st)| st.complete && *i >= k)
        {
            checked += 1;
            if st.ops.dotprods != k as u64 + 2 {
                problems.push(format!(
                    "Omin({k}) iteration {i}: {} dot products",
                    st.ops.dotprods
                ));
            }
        }
    }
    outcome(
        problems.is_empty() && checked > 0,
        if problems.is_empty() {
            format!("all matvec counts exact, {checked} steady-state Omin iterations at k+2 dot products")
        } else {
            problems.join("; ")
        },
    )
}

fn gram_defect(q: &[Vec<f64>]) -> f64 {
    let m = q.len();
    let mut g = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    (g - DMatrix::identity(m, m)).norm()
}

fn numerical_invariants() -> Outcome {
    let mut orth: f64 = 0.0;
    for seed in 0..3 {
        let a = random_dense(80, 2.0, 10 + seed);
        let v = random_vec(80, 20 + seed);
        for m in [5, 15, 30] {
            let basis = arnoldi(&a, &v, m).unwrap();
            orth = orth.max(gram_defect(&basis.q));
        }
    }
    let mut cross: f64 = 0.0;
    let mut relation: f64 = 0.0;
    for seed in 0..3 {
        let a = random_dense(30, 1.5, 30 + seed);
        let na = to_na(&a);
        let norm_a = na.norm();
        let v = random_vec(30, 40 + seed);
        for s in 1..=3 {
            for k in 1..=5 {
                let basis = sarnoldi(&a, &v, s, k).unwrap();
                let mut arn = SArnoldi::new(&a, &v, s).unwrap();
                for _ in 0..k {
                    arn.extend();
                }
                cross = cross.max(arn.cross_block_defect());
                let cols: Vec<&[f64]> = basis.blocks.iter().flat_map(|b| b.columns()).collect();
                let u = DMatrix::from_fn(30, (k + 1) * s, |i, j| cols[j][i]);
                let vk = u.columns(0, k * s).into_owned();
                let g = dense_to_na(basis.hess.as_dense());
                relation = relation.max((&na * vk - u * g).norm() / norm_a);
            }
        }
    }
    let ok = orth <= 1e-10 && cross <= 1e-8 && relation <= 1e-8;
    outcome(
        ok,
        format!(
            "||Q^T Q - I||_F = {orth:.2e} (1e-10), cross-block {cross:.2e} (1e-8), ||A V - U G||/||A|| = {relation:.2e} (1e-8)"
        ),
    )
}

fn generator() -> Outcome {
    let err = |nx: usize| {
        let p = discretize(&ProblemSpec::standard(nx)).unwrap();
        let a = to_na(&p.a);
        let u = a.lu().solve(&DVector::from_vec(p.f.clone())).unwrap();
        (u - DVector::from_vec(p.u_true.clone())).amax()
    };
    let (e7, e15) = (err(7), err(15));
    let ratio = e7 / e15;
    let mut ilu_gap: f64 = 0.0;
    for n in [1, 2, 5, 17, 40] {
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 3.0 + i as f64 * 0.1));
            if i > 0 {
                trip.push((i, i - 1, -1.0 - 0.01 * i as f64));
            }
            if i + 1 < n {
                trip.push((i, i + 1, -0.7));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let f = ilu0_factor(&a).unwrap();
        let l = to_na(&f.l_unit()) + DMatrix::identity(n, n);
        let prod = l * to_na(&f.u_upper());
        ilu_gap = ilu_gap.max((prod - to_na(&a)).norm() / to_na(&a).norm());
    }
    let ok = (3.0..=5.0).contains(&ratio) && ilu_gap <= 1e-12;
    outcome(
        ok,
        format!(
            "error ratio nx=7/nx=15 = {ratio:.3} (band [3,5]), tridiagonal ILU(0) ||LU - A||/||A|| = {ilu_gap:.2e}"
        ),
    )
}

fn nilpotent_fallback() -> Outcome {
    // I + N with N a sum of 3x3 shift blocks, so (A - I)^3 = 0
    let n = 12;
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, 1.0));
        if i % 3 != 2 {
            trip.push((i, i + 1, 1.0));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, &trip).unwrap();
    let mut dense = DenseMatrix::zeros(n, n);
    for (i, j, v) in trip {
        dense[(i, j)] = v;
    }
    let nil = dense.sub(&DenseMatrix::identity(n));
    let nil3 = nil.matmul(&nil).matmul(&nil);
    assert!(nil3.frobenius_norm() == 0.0 && nil.matmul(&nil).frobenius_norm() > 0.0);
    let f: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
    let x0 = vec![0.0; n];
    let sys = System::new(&a);
    let rep = solve(
        &sys,
        &f,
        &x0,
        &SolverConfig::new(Method::Sgmres { s: 6, m: 2 }),
    )
    .unwrap();
    let fell_back = rep
        .events
        .iter()
        .any(|e| matches!(e, sstep_krylov::Breakdown::Fallback { .. }));
    let res = {
        let mut r = a.apply_new(&rep.solution);
        for (ri, fi) in r.iter_mut().zip(&f) {
            *ri = fi - *ri;
        }
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    let ok = fell_back && rep.converged && res < 1e-6;
    outcome(
        ok,
        format!(
            "events {:?}, converged {} with ||f - A x|| = {res:.2e}",
            rep.events.iter().map(|e| e.label()).collect::<Vec<_>>(),
            rep.converged
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        (
            "s=1 reductions match the standard methods",
            reductions,
            Duration::from_secs(5),
        ),
        (
            "2-GMRES(3) and GMRES(6) restart equivalence",
            restart_equivalence,
            Duration::from_secs(5),
        ),
        (
            "brute-force least-squares optimality",
            oracle_optimality,
            Duration::from_secs(5),
        ),
        (
            "nx=64 iteration counts within 20%",
            table_row_64,
            Duration::from_secs(60),
        ),
        (
            "operation counts match the closed forms",
            op_count_audit,
            Duration::from_secs(5),
        ),
        (
            "orthogonality and Hessenberg relations",
            numerical_invariants,
            Duration::from_secs(5),
        ),
        (
            "discretization order and ILU(0) exactness",
            generator,
            Duration::from_secs(5),
        ),
        (
            "basis collapse falls back and converges",
            nilpotent_fallback,
            Duration::from_secs(5),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = check();
        let elapsed = t.elapsed();
        let in_time = elapsed <= *budget;
        let pass = out.passed && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {}. {name}: {} ({:.2}s of {}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!(
        "{} of {} acceptance checks passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
