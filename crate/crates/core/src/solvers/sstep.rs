//! s-step variants: s-MR, s-Orthomin(k), s-GCR and s-GMRES(m).
//!
//! Each iteration builds a monomial block `[v, A v, ..., A^{s-1} v]` with
//! `s` back-to-back matvecs and advances with one `s x s` Gram solve.

use std::collections::VecDeque;

use super::standard::gmres_cycle;
use super::{Run, SolverConfig, DIVERGENCE_FACTOR};
use crate::accounting::Meter;
use crate::dense::{
    block_cholesky, BlockHessenberg, DenseMatrix, GivensLsq, GramFactor, GramMatrix,
};
use crate::error::{KrylovError, Result};
use crate::method::Method;
use crate::precond::System;
use crate::report::{Breakdown, SolveReport};
use crate::sparse::vector::{axpy, dot, norm2, scale};
use crate::sparse::{block_gram, krylov_block, DirectionBlock, LinearOperator};

/// Relative cross-block inner product above which a new s-Arnoldi block is
/// orthogonalized a second time.
pub const REORTH_TOL: f64 = 1e-8;

/// `||v_hat||` below this fraction of `||A v||` means the Krylov space is
/// invariant.
pub const LUCKY_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SmrStep {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub coeffs: Vec<f64>,
}

/// One s-step minimal residual step: `x + R a`, `r - A R a` with
/// `R = [r, A r, ..., A^{s-1} r]` and `a` minimizing the new residual.
pub fn smr_step(op: &dyn LinearOperator, x: &[f64], r: &[f64], s: usize) -> Result<SmrStep> {
    if x.len() != op.dim() || r.len() != op.dim() {
        return Err(KrylovError::DimensionMismatch {
            expected: op.dim(),
            got: x.len().min(r.len()),
        });
    }
    if s == 0 {
        return Err(KrylovError::InvalidConfig("s must be at least 1".into()));
    }
    smr_step_metered(op, x, r, s, &mut Meter::new())
}

fn smr_step_metered(
    op: &dyn LinearOperator,
    x: &[f64],
    r: &[f64],
    s: usize,
    meter: &mut Meter,
) -> Result<SmrStep> {
    let kb = krylov_block(op, r, s + 1);
    meter.matvecs(s);
    let rb = kb.slice(0, s);
    let arb = kb.slice(1, s + 1);
    let w = arb.self_gram();
    meter.self_gram(s);
    let m: Vec<f64> = arb.columns().map(|c| dot(c, r)).collect();
    meter.dots(s);
    let a = w.factor()?.solve(&m);
    let mut x = x.to_vec();
    let mut r = r.to_vec();
    for l in 0..s {
        axpy(a[l], rb.col(l), &mut x);
        axpy(-a[l], arb.col(l), &mut r);
    }
    meter.updates(2 * s);
    Ok(SmrStep { x, r, coeffs: a })
}

fn finish_w(run: Run, w: &[f64], converged: bool, breakdown: Option<Breakdown>) -> SolveReport {
    let x = run.recover(w);
    run.finish(x, converged, breakdown)
}

fn confirm(run: &mut Run, w: &[f64]) -> (bool, Vec<f64>) {
    let x = run.recover(w);
    let r = run.true_residual(&x);
    let rn = run.check_norm(&r);
    *run.history.last_mut().unwrap() = rn;
    (run.term().met(rn), r)
}

/// Repeated [`smr_step`].
pub fn smr_solve(sys: &System, f: &[f64], x0: &[f64], cfg: &SolverConfig) -> Result<SolveReport> {
    let s = match cfg.method {
        Method::Smr { s } => s,
        other => {
            return Err(KrylovError::InvalidConfig(format!(
                "smr_solve cannot run {other}"
            )))
        }
    };
    let mut run = Run::start(sys, f, x0, cfg)?;
    let term = run.term();
    let mut w = vec![0.0; run.n()];
    let mut r = run.true_residual(x0);
    let r0 = run.check_norm(&r);
    run.history.push(r0);
    run.meter.hold_vectors(2 * s + 3);
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
        let step = match smr_step_metered(sys, &w, &r, s, &mut run.meter) {
            Ok(step) => step,
            Err(e) => {
                run.meter.end_step(i, false);
                let b = Breakdown::BasisCollapse {
                    iteration: i + 1,
                    detail: e.to_string(),
                };
                return Ok(finish_w(run, &w, false, Some(b)));
            }
        };
        w = step.x;
        r = step.r;
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

struct BlockDirection {
    p: DirectionBlock,
    ap: DirectionBlock,
    w: GramFactor,
}

/// s-Orthomin(k); with [`Method::Sgcr`] the window is unbounded.
pub fn somin_solve(sys: &System, f: &[f64], x0: &[f64], cfg: &SolverConfig) -> Result<SolveReport> {
    let (s, window) = match cfg.method {
        Method::Somin { s, k } => (s, k),
        Method::Sgcr { s } => (s, usize::MAX),
        other => {
            return Err(KrylovError::InvalidConfig(format!(
                "somin_solve cannot run {other}"
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
    let kb = krylov_block(sys, &r, s + 1);
    run.meter.matvecs(s);
    let mut p = kb.slice(0, s);
    let mut ap = kb.slice(1, s + 1);
    let mut dirs: VecDeque<BlockDirection> = VecDeque::new();
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
        let gram = ap.self_gram();
        run.meter.self_gram(s);
        let m: Vec<f64> = ap.columns().map(|c| dot(c, &r)).collect();
        run.meter.dots(s);
        let fac = match gram.factor() {
            Ok(fac) => fac,
            Err(e) => {
                run.meter.end_step(i, false);
                let b = Breakdown::BasisCollapse {
                    iteration: i + 1,
                    detail: e.to_string(),
                };
                return Ok(finish_w(run, &w, false, Some(b)));
            }
        };
        let a = fac.solve(&m);
        for l in 0..s {
            axpy(a[l], p.col(l), &mut w);
            axpy(-a[l], ap.col(l), &mut r);
        }
        run.meter.updates(2 * s);
        run.iterations += 1;
        let rn = run.check_norm(&r);
        run.history.push(rn);

        dirs.push_back(BlockDirection { p, ap, w: fac });
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

        let kb = krylov_block(sys, &r, s + 1);
        run.meter.matvecs(s);
        let rb = kb.slice(0, s);
        let arb = kb.slice(1, s + 1);
        let mut coeffs = Vec::with_capacity(dirs.len());
        for d in &dirs {
            let c = block_gram(&d.ap, &arb)?;
            coeffs.push(d.w.solve_matrix(&c).scaled(-1.0));
        }
        run.meter.dots(dirs.len() * s * s);
        p = rb;
        ap = arb;
        for (d, b) in dirs.iter().zip(&coeffs) {
            p.add_mul(&d.p, b)?;
            ap.add_mul(&d.ap, b)?;
        }
        run.meter.updates(2 * dirs.len() * s * s);
        run.meter.hold_vectors(2 * s * (dirs.len() + 1) + 2);
        if cfg.debug_checks {
            let apn = ap.self_gram().trace().sqrt();
            let mut defect: f64 = 0.0;
            for d in &dirs {
                let c = block_gram(&ap, &d.ap)?;
                let dn = d.ap.self_gram().trace().sqrt();
                defect = defect.max(c.frobenius_norm() / (apn * dn));
            }
            if apn > 0.0 {
                run.note_defect(defect);
            }
        }
        run.meter.end_step(i, complete);
    }
}

/// Result of extending an s-step Arnoldi basis by one block.
#[derive(Debug, Clone, PartialEq)]
pub enum Extension {
    /// A new block was appended.
    Block,
    /// `A v_k^s` lies in the current span: the last column of `G` has a
    /// zero subdiagonal and no new block exists.
    Invariant,
    /// The new block is numerically rank deficient. The columns of `G`
    /// for the existing blocks are still valid.
    Collapsed(String),
}

/// Incremental s-step Arnoldi process.
///
/// Keeps blocks `V_1, ..., V_{k+1}` that are mutually orthogonal (but not
/// orthonormal inside a block), their Gram matrices `W_i`, and the
/// block upper Hessenberg `G` with `A [V_1 .. V_k] = [V_1 .. V_{k+1}] G`.
pub struct SArnoldi<'a> {
    op: &'a dyn LinearOperator,
    s: usize,
    blocks: Vec<DirectionBlock>,
    grams: Vec<GramMatrix>,
    factors: Vec<GramFactor>,
    // column c of G, rows 0..=c+1
    cols: Vec<Vec<f64>>,
    last_nu: f64,
    reorthogonalized: usize,
    pending_gram: Option<GramMatrix>,
}

impl<'a> SArnoldi<'a> {
    /// First block `[v, A v, ..., A^{s-1} v]` with `v = v1 / ||v1||`.
    pub fn new(op: &'a dyn LinearOperator, v1: &[f64], s: usize) -> Result<Self> {
        Self::new_metered(op, v1, s, &mut Meter::new())
    }

    pub(crate) fn new_metered(
        op: &'a dyn LinearOperator,
        v1: &[f64],
        s: usize,
        meter: &mut Meter,
    ) -> Result<Self> {
        if s == 0 {
            return Err(KrylovError::InvalidConfig("s must be at least 1".into()));
        }
        if v1.len() != op.dim() {
            return Err(KrylovError::DimensionMismatch {
                expected: op.dim(),
                got: v1.len(),
            });
        }
        let beta = norm2(v1);
        if !(beta > 0.0) {
            return Err(KrylovError::InvalidConfig("starting vector is zero".into()));
        }
        let mut v = v1.to_vec();
        scale(1.0 / beta, &mut v);
        meter.updates(1);
        let block = krylov_block(op, &v, s);
        meter.matvecs(s - 1);
        let gram = block.self_gram();
        meter.self_gram(s);
        let mut this = Self {
            op,
            s,
            blocks: Vec::new(),
            grams: Vec::new(),
            factors: Vec::new(),
            cols: Vec::new(),
            last_nu: 0.0,
            reorthogonalized: 0,
            pending_gram: None,
        };
        let factor = gram.factor()?;
        // A v^j = v^{j+1} inside the first block
        for j in 0..s - 1 {
            let mut col = vec![0.0; j + 2];
            col[j + 1] = 1.0;
            this.cols.push(col);
        }
        this.blocks.push(block);
        this.grams.push(gram);
        this.factors.push(factor);
        Ok(this)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of blocks whose `G` columns are complete.
    pub fn completed_blocks(&self) -> usize {
        self.cols.len() / self.s
    }

    pub fn blocks(&self) -> &[DirectionBlock] {
        &self.blocks
    }

    pub fn grams(&self) -> &[GramMatrix] {
        &self.grams
    }

    /// How many blocks needed a second orthogonalization pass.
    pub fn reorthogonalized(&self) -> usize {
        self.reorthogonalized
    }

    /// Subdiagonal entry of the last completed block column.
    pub fn last_subdiagonal(&self) -> f64 {
        self.last_nu
    }

    /// `||v_{k+1}^1||^2`, the leading entry of the next block's Gram
    /// matrix (available even when that block collapsed).
    pub fn next_leading_gram(&self) -> Option<f64> {
        let k = self.completed_blocks();
        if let Some(g) = &self.pending_gram {
            return Some(g.as_dense()[(0, 0)]);
        }
        self.grams.get(k).map(|g| g.as_dense()[(0, 0)])
    }

    /// Column `c` of `G` (rows `0..=c+1`).
    pub fn g_column(&self, c: usize) -> &[f64] {
        &self.cols[c]
    }

    /// Dense `(k+1)s x ks` block Hessenberg for the completed blocks.
    pub fn hessenberg(&self) -> BlockHessenberg {
        let k = self.completed_blocks();
        let s = self.s;
        let mut g = DenseMatrix::zeros((k + 1) * s, k * s);
        for c in 0..k * s {
            for (r, &v) in self.cols[c].iter().enumerate() {
                g[(r, c)] = v;
            }
        }
        BlockHessenberg::from_dense(s, k, g).expect("shape is consistent")
    }

    /// Largest relative cross-block inner product
    /// `||V_i^T V_j||_F / (||V_i||_F ||V_j||_F)` over `i != j`.
    pub fn cross_block_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.blocks.len() {
            let nj = self.grams[j].trace().sqrt();
            for i in 0..j {
                let c = block_gram(&self.blocks[i], &self.blocks[j]).expect("same length");
                let ni = self.grams[i].trace().sqrt();
                worst = worst.max(c.frobenius_norm() / (ni * nj));
            }
        }
        worst
    }

    /// Appends block `k + 1`, completing column block `k` of `G`.
    pub fn extend(&mut self) -> Extension {
        self.extend_metered(&mut Meter::new())
    }

    pub(crate) fn extend_metered(&mut self, meter: &mut Meter) -> Extension {
        let s = self.s;
        let k = self.blocks.len();
        debug_assert_eq!(self.cols.len(), k * s - 1);
        let n = self.op.dim();

        let mut v = self.op.apply_new(self.blocks[k - 1].col(s - 1));
        meter.matvecs(1);
        let wnorm_bound = norm2(&v);
        meter.dots(1);
        let h: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let c: Vec<f64> = self.blocks[i].columns().map(|col| dot(col, &v)).collect();
                self.factors[i].solve(&c)
            })
            .collect();
        meter.dots(k * s);
        for i in 0..k {
            for (l, &hl) in h[i].iter().enumerate() {
                axpy(-hl, self.blocks[i].col(l), &mut v);
            }
        }
        meter.updates(k * s);
        let nu = norm2(&v);
        meter.dots(1);

        if !(nu > LUCKY_TOL * wnorm_bound) {
            let mut col = vec![0.0; k * s + 1];
            for i in 0..k {
                col[i * s..(i + 1) * s].copy_from_slice(&h[i]);
            }
            self.cols.push(col);
            self.last_nu = 0.0;
            return Extension::Invariant;
        }
        scale(1.0 / nu, &mut v);
        meter.updates(1);

        let kb = krylov_block(self.op, &v, s);
        meter.matvecs(s - 1);

        // T_i = W_i^{-1} V_i^T K with a zero first column
        let mut t: Vec<DenseMatrix> = Vec::with_capacity(k);
        for i in 0..k {
            let mut c = DenseMatrix::zeros(s, s);
            for l in 0..s {
                for j in 1..s {
                    c[(l, j)] = dot(self.blocks[i].col(l), kb.col(j));
                }
            }
            t.push(self.factors[i].solve_matrix(&c));
        }
        meter.dots(k * s * (s - 1));
        let mut nb = kb.clone();
        for i in 0..k {
            nb.add_mul(&self.blocks[i], &t[i].scaled(-1.0))
                .expect("same length");
        }
        meter.updates(k * s * (s - 1));

        // second pass when orthogonality was lost
        let nb_norm = nb.self_gram().trace().sqrt();
        let mut corr = Vec::with_capacity(k);
        let mut defect: f64 = 0.0;
        for i in 0..k {
            let c = block_gram(&self.blocks[i], &nb).expect("same length");
            defect = defect.max(c.frobenius_norm() / (self.grams[i].trace().sqrt() * nb_norm));
            corr.push(c);
        }
        meter.reorth(k * s * s + s, 0);
        if defect > REORTH_TOL {
            self.reorthogonalized += 1;
            for i in 0..k {
                let ti = self.factors[i].solve_matrix(&corr[i]);
                nb.add_mul(&self.blocks[i], &ti.scaled(-1.0))
                    .expect("same length");
                t[i] = add(&t[i], &ti);
            }
            meter.reorth(0, k * s * s);
        }
        let gram = nb.self_gram();
        meter.self_gram(s);

        // last column of block k
        let mut col = vec![0.0; k * s + 1];
        for i in 0..k {
            for r in 0..s {
                col[i * s + r] = h[i][r] + nu * t[i][(r, 0)];
            }
        }
        col[k * s] = nu;
        self.cols.push(col);
        self.last_nu = nu;

        let factor = match gram.factor() {
            Ok(f) => f,
            Err(e) => {
                self.pending_gram = Some(gram);
                return Extension::Collapsed(e.to_string());
            }
        };

        // A V_{k+1} e_j = K e_{j+1} - sum_i (A V_i) T_i e_j
        for j in 0..s - 1 {
            let len = k * s + j + 2;
            let mut col = vec![0.0; len];
            col[k * s + j + 1] = 1.0;
            for i in 0..k {
                for r in 0..s {
                    col[i * s + r] += t[i][(r, j + 1)];
                }
                for q in 0..s {
                    let coef = t[i][(q, j)];
                    if coef != 0.0 {
                        for (row, &g) in self.cols[i * s + q].iter().enumerate() {
                            col[row] -= coef * g;
                        }
                    }
                }
            }
            self.cols.push(col);
        }
        debug_assert_eq!(nb.n(), n);
        self.blocks.push(nb);
        self.grams.push(gram);
        self.factors.push(factor);
        Extension::Block
    }

    /// `V_k y` for the completed blocks.
    pub fn combine(&self, y: &[f64]) -> Vec<f64> {
        let s = self.s;
        let mut z = vec![0.0; self.op.dim()];
        for (idx, &yi) in y.iter().enumerate() {
            axpy(yi, self.blocks[idx / s].col(idx % s), &mut z);
        }
        z
    }
}

fn add(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.sub(&b.scaled(-1.0))
}

/// Blocks, Gram matrices and block Hessenberg of an s-step Arnoldi run.
#[derive(Debug, Clone)]
pub struct SStepBasis {
    /// `V_1, ..., V_{k+1}`.
    pub blocks: Vec<DirectionBlock>,
    pub grams: Vec<GramMatrix>,
    pub hess: BlockHessenberg,
    pub reorthogonalized: usize,
}

/// Runs `m_blocks` s-step Arnoldi iterations from `v1`.
pub fn sarnoldi(
    op: &dyn LinearOperator,
    v1: &[f64],
    s: usize,
    m_blocks: usize,
) -> Result<SStepBasis> {
    let mut arn = SArnoldi::new(op, v1, s)?;
    for k in 0..m_blocks {
        match arn.extend() {
            Extension::Block => {}
            Extension::Invariant => break,
            Extension::Collapsed(detail) => {
                return Err(KrylovError::InvalidStructure(format!(
                    "basis collapsed at block {}: {detail}",
                    k + 2
                )))
            }
        }
    }
    Ok(SStepBasis {
        hess: arn.hessenberg(),
        blocks: arn.blocks.clone(),
        grams: arn.grams.clone(),
        reorthogonalized: arn.reorthogonalized,
    })
}

/// Columns `R G e_c` for one completed block, where `D = R^T R`.
fn scaled_columns(arn: &SArnoldi, block: usize, trailing: f64) -> Result<Vec<Vec<f64>>> {
    let s = arn.s;
    let nblocks = block + 1;
    let chol = block_cholesky(&arn.grams[..nblocks], trailing)?;
    let mut out = Vec::with_capacity(s);
    for c in block * s..(block + 1) * s {
        let g = arn.g_column(c);
        let mut col = vec![0.0; c + 2];
        for (row, slot) in col.iter_mut().enumerate() {
            let b = row / s;
            if b >= nblocks {
                *slot = trailing.sqrt() * g.get(row).copied().unwrap_or(0.0);
                continue;
            }
            let r = chol.upper_block(b);
            let local = row - b * s;
            let mut acc = 0.0;
            for l in local..s {
                acc += r[(local, l)] * g.get(b * s + l).copied().unwrap_or(0.0);
            }
            *slot = acc;
        }
        out.push(col);
    }
    Ok(out)
}

enum SCycle {
    Done { blocks: usize },
    Invariant { blocks: usize },
    Collapsed { blocks: usize, detail: String },
    Rank { blocks: usize },
}

fn sgmres_cycle(run: &mut Run, x: &mut [f64], r: &[f64], beta: f64, s: usize, m: usize) -> SCycle {
    let term = run.term();
    let sys = run.sys;
    let mut meter = std::mem::take(&mut run.meter);
    let mut arn = match SArnoldi::new_metered(sys, r, s, &mut meter) {
        Ok(a) => a,
        Err(e) => {
            run.meter = meter;
            return SCycle::Collapsed {
                blocks: 0,
                detail: e.to_string(),
            };
        }
    };
    let r11 = arn.grams[0].as_dense()[(0, 0)].sqrt();
    let mut lsq = GivensLsq::new(beta * r11);
    let budget = m
        .min((run.cfg.max_iterations - run.iterations).div_ceil(s))
        .max(1);
    let mut outcome = None;
    for k in 0..budget {
        let ext = arn.extend_metered(&mut meter);
        let trailing = match ext {
            Extension::Invariant => 1.0,
            _ => arn.next_leading_gram().unwrap_or(1.0),
        };
        let cols = match scaled_columns(&arn, k, trailing) {
            Ok(c) => c,
            Err(e) => {
                outcome = Some(SCycle::Collapsed {
                    blocks: k,
                    detail: e.to_string(),
                });
                break;
            }
        };
        let mut rank = false;
        let mark = lsq.clone();
        for col in &cols {
            if lsq.push_column(col).is_err() {
                rank = true;
                break;
            }
        }
        if rank {
            lsq = mark;
            outcome = Some(SCycle::Rank { blocks: k });
            break;
        }
        run.iterations += s;
        run.history.push(lsq.residual());
        match ext {
            Extension::Block => {}
            Extension::Invariant => {
                outcome = Some(SCycle::Invariant { blocks: k + 1 });
                break;
            }
            Extension::Collapsed(detail) => {
                outcome = Some(if term.met(lsq.residual()) {
                    SCycle::Done { blocks: k + 1 }
                } else {
                    SCycle::Collapsed {
                        blocks: k + 1,
                        detail,
                    }
                });
                break;
            }
        }
        if term.met(lsq.residual()) {
            outcome = Some(SCycle::Done { blocks: k + 1 });
            break;
        }
    }
    let outcome = outcome.unwrap_or(SCycle::Done { blocks: budget });
    if lsq.columns() > 0 {
        let y = lsq.solve();
        let z = arn.combine(&y);
        meter.updates(y.len());
        axpy(1.0, &sys.lift(&z), x);
    }
    meter.hold_vectors(s * (arn.blocks.len() + 1) + 3);
    if run.cfg.debug_checks {
        run.note_defect(arn.cross_block_defect());
    }
    run.meter = meter;
    outcome
}

/// Restarted s-step GMRES(m): each cycle builds `m` blocks of width `s`.
///
/// If the monomial basis collapses before the residual target is in reach,
/// the rest of the cycle is abandoned and one standard GMRES(s m) cycle is
/// run from the current iterate before s-step cycles resume.
pub fn sgmres_solve(
    sys: &System,
    f: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let (s, m) = match cfg.method {
        Method::Sgmres { s, m } => (s, m),
        other => {
            return Err(KrylovError::InvalidConfig(format!(
                "sgmres_solve cannot run {other}"
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
        let out = sgmres_cycle(&mut run, &mut x, &r, beta, s, m);
        run.cycles += 1;
        r = run.true_residual(&x);
        let prev = beta;
        beta = run.check_norm(&r);
        run.history.push(beta);
        run.cycle_residuals.push(beta);
        let mut complete = true;
        let (blocks, trouble) = match out {
            SCycle::Done { blocks } => (blocks, None),
            SCycle::Invariant { blocks } => {
                complete = false;
                (blocks, None)
            }
            SCycle::Collapsed { blocks, detail } => (blocks, Some(detail)),
            SCycle::Rank { blocks } => (
                blocks,
                Some("projected least-squares problem lost rank".to_string()),
            ),
        };
        run.meter.end_step(blocks, complete && trouble.is_none());
        if term.met(beta) {
            return Ok(run.finish(x, true, None));
        }
        if let Some(detail) = trouble {
            run.events.push(Breakdown::Fallback {
                cycle: run.cycles,
                detail,
            });
            if run.iterations >= cfg.max_iterations {
                continue;
            }
            run.meter.begin_step();
            let budget = (s * m).min(cfg.max_iterations - run.iterations);
            let fb = gmres_cycle(&mut run, &mut x, &r, beta, budget);
            run.cycles += 1;
            r = run.true_residual(&x);
            beta = run.check_norm(&r);
            run.history.push(beta);
            run.cycle_residuals.push(beta);
            run.meter.end_fallback_step(fb.steps, !fb.rank_deficient);
            if term.met(beta) {
                return Ok(run.finish(x, true, None));
            }
            if fb.rank_deficient {
                let it = run.iterations;
                return Ok(run.finish(x, false, Some(Breakdown::RankDeficient { iteration: it })));
            }
        } else if blocks == m && !(beta < prev) {
            let it = run.iterations;
            return Ok(run.finish(x, false, Some(Breakdown::Stagnation { iteration: it })));
        }
    }
}
