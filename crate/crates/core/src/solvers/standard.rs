//! Minimal residual, Orthomin(k), GCR and restarted GMRES(m).

use std::collections::VecDeque;

use super::{Run, SolverConfig, DIVERGENCE_FACTOR};
use crate::dense::{DenseMatrix, GivensLsq};
use crate::error::{KrylovError, Result};
use crate::method::Method;
use crate::precond::System;
use crate::report::{Breakdown, SolveReport};
use crate::sparse::vector::{axpy, dot, norm2, scale};
use crate::sparse::LinearOperator;

/// `h_{j+1,j}` below this fraction of the column norm ends a GMRES cycle
/// early (the Krylov space is invariant).
pub const HAPPY_TOL: f64 = 1e-14;

/// Minimal residual: `x += a r` with `a = (r, A r) / (A r, A r)`.
pub fn mr_solve(sys: &System, f: &[f64], x0: &[f64], cfg: &SolverConfig) -> Result<SolveReport> {
    if cfg.method != Method::Mr {
        return Err(KrylovError::InvalidConfig(format!(
            "mr_solve cannot run {}",
            cfg.method
        )));
    }
    let mut run = Run::start(sys, f, x0, cfg)?;
    let term = run.term();
    let mut w = vec![0.0; run.n()];
    let mut r = run.true_residual(x0);
    let r0 = run.check_norm(&r);
    run.history.push(r0);
    run.meter.hold_vectors(3);
    if term.met(r0) {
        return Ok(run.finish(x0.to_vec(), true, None));
    }
    loop {
        if run.iterations >= cfg.max_iterations {
            let it = run.iterations;
            return Ok(finish_w(
                run,
                &w,
                false,
                Some(Breakdown::MaxIterations { iterations: it }),
            ));
        }
        let i = run.iterations;
        run.meter.begin_step();
        let ar = run.apply(&r);
        let rar = dot(&r, &ar);
        let arar = dot(&ar, &ar);
        run.meter.dots(2);
        if !(arar > 0.0) {
            run.meter.end_step(i, false);
            return Ok(finish_w(
                run,
                &w,
                false,
                Some(Breakdown::Stagnation { iteration: i + 1 }),
            ));
        }
        let a = rar / arar;
        axpy(a, &r, &mut w);
        axpy(-a, &ar, &mut r);
        run.meter.updates(2);
        run.iterations += 1;
        let rn = run.check_norm(&r);
        run.history.push(rn);
        if rn > DIVERGENCE_FACTOR * r0 {
            run.meter.end_step(i, true);
            return Ok(finish_w(
                run,
                &w,
                false,
                Some(Breakdown::Diverged { iteration: i + 1 }),
            ));
        }
        let prev = run.history[run.history.len() - 2];
        if !(rn < prev) && !term.met(rn) {
            run.meter.end_step(i, true);
            return Ok(finish_w(
                run,
                &w,
                false,
                Some(Breakdown::Stagnation { iteration: i + 1 }),
            ));
        }
        if term.met(rn) {
            let (done, tr) = confirm(&mut run, &w);
            run.meter.end_step(i, false);
            if done {
                return Ok(finish_w(run, &w, true, None));
            }
            r = tr;
            continue;
        }
        run.meter.end_step(i, true);
    }
}

/// Recomputes `f - A x` for the current correction and replaces the last
/// history entry with its norm.
fn confirm(run: &mut Run, w: &[f64]) -> (bool, Vec<f64>) {
    let x = run.recover(w);
    let r = run.true_residual(&x);
    let rn = run.check_norm(&r);
    *run.history.last_mut().unwrap() = rn;
    (run.term().met(rn), r)
}

fn finish_w(run: Run, w: &[f64], converged: bool, breakdown: Option<Breakdown>) -> SolveReport {
    let x = run.recover(w);
    run.finish(x, converged, breakdown)
}

struct Direction {
    p: Vec<f64>,
    ap: Vec<f64>,
    apap: f64,
}

/// Orthomin(k); with [`Method::Gcr`] the window is unbounded.
///
/// Each new direction is made `A^T A`-orthogonal to the last `k`
/// directions (the current one included).
pub fn omin_solve(sys: &System, f: &[f64], x0: &[f64], cfg: &SolverConfig) -> Result<SolveReport> {
    let window = match cfg.method {
        Method::Omin { k } => k,
        Method::Gcr => usize::MAX,
        other => {
            return Err(KrylovError::InvalidConfig(format!(
                "omin_solve cannot run {other}"
            )))
        }
    };
    let mut run = Run::start(sys, f, x0, cfg)?;
    let term = run.term();
    let mut w = vec![0.0; run.n()];
    let mut r = run.true_residual(x0);
    let r0 = run.check_norm(&r);
    run.history.push(r0);
    if term.met(r0) {
        return Ok(run.finish(x0.to_vec(), true, None));
    }
    let mut p = r.clone();
    let mut ap = run.apply(&p);
    let mut dirs: VecDeque<Direction> = VecDeque::new();
    loop {
        if run.iterations >= cfg.max_iterations {
            let it = run.iterations;
            return Ok(finish_w(
                run,
                &w,
                false,
                Some(Breakdown::MaxIterations { iterations: it }),
            ));
        }
        let i = run.iterations;
        run.meter.begin_step();
        let rap = dot(&r, &ap);
        let apap = dot(&ap, &ap);
        run.meter.dots(2);
        if !(apap > 0.0) {
            run.meter.end_step(i, false);
            return Ok(finish_w(
                run,
                &w,
                false,
                Some(Breakdown::Stagnation { iteration: i + 1 }),
            ));
        }
        let a = rap / apap;
        axpy(a, &p, &mut w);
        axpy(-a, &ap, &mut r);
        run.meter.updates(2);
        run.iterations += 1;
        let rn = run.check_norm(&r);
        run.history.push(rn);

        dirs.push_back(Direction { p, ap, apap });
        if dirs.len() > window {
            dirs.pop_front();
        }
        if rn > DIVERGENCE_FACTOR * r0 {
            run.meter.end_step(i, false);
            return Ok(finish_w(
                run,
                &w,
                false,
                Some(Breakdown::Diverged { iteration: i + 1 }),
            ));
        }
        let mut complete = true;
        if term.met(rn) {
            let (done, tr) = confirm(&mut run, &w);
            if done {
                run.meter.end_step(i, false);
                return Ok(finish_w(run, &w, true, None));
            }
            r = tr;
            complete = false;
        }

        let ar = run.apply(&r);
        let b: Vec<f64> = dirs.iter().map(|d| dot(&ar, &d.ap) / d.apap).collect();
        run.meter.dots(dirs.len());
        p = r.clone();
        ap = ar;
        for (d, &bj) in dirs.iter().zip(&b) {
            axpy(-bj, &d.p, &mut p);
            axpy(-bj, &d.ap, &mut ap);
        }
        run.meter.updates(2 * dirs.len());
        run.meter.hold_vectors(2 * dirs.len() + 4);
        if cfg.debug_checks {
            let apn = norm2(&ap);
            let defect = dirs
                .iter()
                .map(|d| dot(&ap, &d.ap).abs() / (apn * d.apap.sqrt()))
                .fold(0.0, f64::max);
            if apn > 0.0 {
                run.note_defect(defect);
            }
        }
        run.meter.end_step(i, complete);
    }
}

/// Modified Gram-Schmidt of `w` against `q`, returning the coefficients
/// with `||w||` appended. A second pass runs when the first one removed
/// more than half of the squared norm.
fn orthogonalize(q: &[Vec<f64>], w: &mut [f64]) -> (Vec<f64>, bool) {
    let j = q.len();
    let mut h = vec![0.0; j + 1];
    for i in 0..j {
        h[i] = dot(w, &q[i]);
        axpy(-h[i], &q[i], w);
    }
    let mut hn = norm2(w);
    let removed: f64 = h[..j].iter().map(|v| v * v).sum();
    let second = hn * hn < removed;
    if second {
        for i in 0..j {
            let c = dot(w, &q[i]);
            axpy(-c, &q[i], w);
            h[i] += c;
        }
        hn = norm2(w);
    }
    h[j] = hn;
    (h, second)
}

/// Orthonormal Krylov basis `Q` (`m + 1` columns) and the
/// `(m + 1) x m` Hessenberg `G` with `A Q_m = Q_{m+1} G`.
#[derive(Debug, Clone)]
pub struct ArnoldiBasis {
    pub q: Vec<Vec<f64>>,
    pub g: DenseMatrix,
}

/// Modified Gram-Schmidt Arnoldi (with a conditional second pass). Stops early (with fewer columns) if the
/// Krylov space becomes invariant.
pub fn arnoldi(op: &dyn LinearOperator, v: &[f64], m: usize) -> Result<ArnoldiBasis> {
    if v.len() != op.dim() {
        return Err(KrylovError::DimensionMismatch {
            expected: op.dim(),
            got: v.len(),
        });
    }
    let beta = norm2(v);
    if !(beta > 0.0) {
        return Err(KrylovError::InvalidConfig("starting vector is zero".into()));
    }
    let mut q1 = v.to_vec();
    scale(1.0 / beta, &mut q1);
    let mut q = vec![q1];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..m {
        let mut w = op.apply_new(&q[j]);
        let (h, _) = orthogonalize(&q, &mut w);
        let hn = h[j + 1];
        let colnorm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        cols.push(h);
        if hn <= HAPPY_TOL * colnorm {
            break;
        }
        scale(1.0 / hn, &mut w);
        q.push(w);
    }
    let k = cols.len();
    let mut g = DenseMatrix::zeros(k + 1, k);
    for (j, h) in cols.iter().enumerate() {
        for (i, &v) in h.iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    Ok(ArnoldiBasis { q, g })
}

pub(crate) struct CycleOutcome {
    pub steps: usize,
    pub rank_deficient: bool,
}

/// One GMRES cycle of at most `m` steps starting from residual `r`
/// (`||r|| = beta`); `x` is updated in place.
pub(crate) fn gmres_cycle(
    run: &mut Run,
    x: &mut [f64],
    r: &[f64],
    beta: f64,
    m: usize,
) -> CycleOutcome {
    let term = run.term();
    let mut q1 = r.to_vec();
    scale(1.0 / beta, &mut q1);
    run.meter.updates(1);
    let mut q = vec![q1];
    let mut lsq = GivensLsq::new(beta);
    let mut rank_deficient = false;
    for j in 0..m {
        let mut w = run.apply(&q[j]);
        let (h, second) = orthogonalize(&q, &mut w);
        run.meter.dots(j + 2);
        run.meter.updates(j + 1);
        if second {
            run.meter.reorth(j + 2, j + 1);
        }
        let hn = h[j + 1];
        let colnorm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        let happy = hn <= HAPPY_TOL * colnorm;
        let res = match lsq.push_column(&h) {
            Ok(res) => res,
            Err(_) => {
                rank_deficient = true;
                break;
            }
        };
        run.iterations += 1;
        run.history.push(res);
        if happy || term.met(res) || j + 1 == m {
            break;
        }
        scale(1.0 / hn, &mut w);
        run.meter.updates(1);
        q.push(w);
    }
    let steps = lsq.columns();
    run.meter.hold_vectors(q.len() + 3);
    if steps > 0 {
        let y = lsq.solve();
        let mut z = vec![0.0; x.len()];
        for (yi, qi) in y.iter().zip(&q) {
            axpy(*yi, qi, &mut z);
        }
        run.meter.updates(steps);
        axpy(1.0, &run.sys.lift(&z), x);
    }
    CycleOutcome {
        steps,
        rank_deficient,
    }
}

/// Restarted GMRES(m).
pub fn gmres_solve(sys: &System, f: &[f64], x0: &[f64], cfg: &SolverConfig) -> Result<SolveReport> {
    let m = match cfg.method {
        Method::Gmres { m } => m,
        other => {
            return Err(KrylovError::InvalidConfig(format!(
                "gmres_solve cannot run {other}"
            )))
        }
    };
    let mut run = Run::start(sys, f, x0, cfg)?;
    let term = run.term();
    let mut x = x0.to_vec();
    let mut r = run.true_residual(&x);
    let mut beta = run.check_norm(&r);
    run.history.push(beta);
    run.cycle_residuals.push(beta);
    if term.met(beta) {
        return Ok(run.finish(x, true, None));
    }
    loop {
        if run.iterations >= cfg.max_iterations {
            let it = run.iterations;
            return Ok(run.finish(x, false, Some(Breakdown::MaxIterations { iterations: it })));
        }
        run.meter.begin_step();
        let budget = m.min(cfg.max_iterations - run.iterations);
        let out = gmres_cycle(&mut run, &mut x, &r, beta, budget);
        run.cycles += 1;
        r = run.true_residual(&x);
        let prev = beta;
        beta = run.check_norm(&r);
        run.history.push(beta);
        run.cycle_residuals.push(beta);
        run.meter.end_step(out.steps, !out.rank_deficient);
        if term.met(beta) {
            return Ok(run.finish(x, true, None));
        }
        if out.rank_deficient {
            let it = run.iterations;
            return Ok(run.finish(x, false, Some(Breakdown::RankDeficient { iteration: it })));
        }
        if out.steps == m && !(beta < prev) {
            let it = run.iterations;
            return Ok(run.finish(x, false, Some(Breakdown::Stagnation { iteration: it })));
        }
    }
}
