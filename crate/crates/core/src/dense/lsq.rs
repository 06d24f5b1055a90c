//! Least squares `min_y || beta e_1 - G y ||` for upper Hessenberg `G`,
//! by Givens rotations applied one column at a time.

use crate::dense::DenseMatrix;
use crate::error::{KrylovError, Result};

/// Relative size of `|R_jj|` (against `||G||_F`) below which a column is
/// declared linearly dependent.
pub const RANK_TOL: f64 = 1e-14;

/// Incrementally QR-factored Hessenberg least-squares problem.
#[derive(Debug, Clone)]
pub struct GivensLsq {
    r: Vec<Vec<f64>>,
    rotations: Vec<(f64, f64)>,
    g: Vec<f64>,
    frob2: f64,
}

impl GivensLsq {
    pub fn new(beta: f64) -> Self {
        Self {
            r: Vec::new(),
            rotations: Vec::new(),
            g: vec![beta],
            frob2: 0.0,
        }
    }

    pub fn columns(&self) -> usize {
        self.r.len()
    }

    /// Appends column `j` (rows `0..=j+1`; anything below is ignored) and
    /// returns the new minimum residual norm.
    ///
    /// On rank deficiency the column is not committed.
    pub fn push_column(&mut self, col: &[f64]) -> Result<f64> {
        let j = self.r.len();
        if col.len() < j + 2 {
            return Err(KrylovError::DimensionMismatch {
                expected: j + 2,
                got: col.len(),
            });
        }
        debug_assert!(
            col[j + 2..].iter().all(|&v| v == 0.0),
            "column is not Hessenberg"
        );
        let mut c: Vec<f64> = col[..j + 2].to_vec();
        let frob2 = self.frob2 + c.iter().map(|v| v * v).sum::<f64>();
        for (i, &(cs, sn)) in self.rotations.iter().enumerate() {
            let (a, b) = (c[i], c[i + 1]);
            c[i] = cs * a + sn * b;
            c[i + 1] = -sn * a + cs * b;
        }
        let (a, b) = (c[j], c[j + 1]);
        let rho = a.hypot(b);
        if !(rho > RANK_TOL * frob2.sqrt()) {
            return Err(KrylovError::RankDeficient { column: j });
        }
        let (cs, sn) = (a / rho, b / rho);
        c[j] = rho;
        c.truncate(j + 1);
        self.r.push(c);
        self.rotations.push((cs, sn));
        self.frob2 = frob2;
        let gj = self.g[j];
        self.g[j] = cs * gj;
        self.g.push(-sn * gj);
        Ok(self.residual())
    }

    /// Current minimum of the objective.
    pub fn residual(&self) -> f64 {
        self.g[self.r.len()].abs()
    }

    /// Minimizer for the columns pushed so far.
    pub fn solve(&self) -> Vec<f64> {
        let k = self.r.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = self.g[i];
            for j in i + 1..k {
                acc -= self.r[j][i] * y[j];
            }
            y[i] = acc / self.r[i][i];
        }
        y
    }
}

/// One-shot `argmin_y || beta e_1 - G y ||` with the attained minimum.
pub fn hessenberg_lsq(g: &DenseMatrix, beta: f64) -> Result<(Vec<f64>, f64)> {
    if g.rows() < g.cols() + 1 {
        return Err(KrylovError::DimensionMismatch {
            expected: g.cols() + 1,
            got: g.rows(),
        });
    }
    for j in 0..g.cols() {
        for i in j + 2..g.rows() {
            if g[(i, j)] != 0.0 {
                return Err(KrylovError::InvalidStructure(format!(
                    "entry ({i}, {j}) below the subdiagonal is nonzero"
                )));
            }
        }
    }
    let mut lsq = GivensLsq::new(beta);
    for j in 0..g.cols() {
        let col = g.column(j);
        lsq.push_column(&col[..j + 2])?;
    }
    let res = lsq.residual();
    Ok((lsq.solve(), res))
}

/// The `(k+1)s x ks` matrix of the s-step Arnoldi relation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHessenberg {
    s: usize,
    k: usize,
    m: DenseMatrix,
}

impl BlockHessenberg {
    pub fn zeros(s: usize, k: usize) -> Self {
        Self {
            s,
            k,
            m: DenseMatrix::zeros((k + 1) * s, k * s),
        }
    }

    pub fn from_dense(s: usize, k: usize, m: DenseMatrix) -> Result<Self> {
        if m.rows() != (k + 1) * s || m.cols() != k * s {
            return Err(KrylovError::DimensionMismatch {
                expected: (k + 1) * s * k * s,
                got: m.rows() * m.cols(),
            });
        }
        Ok(Self { s, k, m })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn as_dense_mut(&mut self) -> &mut DenseMatrix {
        &mut self.m
    }

    /// Rows `0..=ks`: the part that multiplies `[V_k, v_{k+1}^1]`.
    pub fn leading(&self) -> DenseMatrix {
        self.m.top_left(self.k * self.s + 1, self.k * self.s)
    }

    /// Checks the Hessenberg pattern and that the appended block row holds
    /// a single structural nonzero at `(ks, ks-1)`.
    pub fn check_structure(&self) -> Result<()> {
        let (rows, cols) = (self.m.rows(), self.m.cols());
        for j in 0..cols {
            for i in j + 2..rows {
                if self.m[(i, j)] != 0.0 {
                    return Err(KrylovError::InvalidStructure(format!(
                        "nonzero ({i}, {j}) below the subdiagonal"
                    )));
                }
            }
        }
        let last = self.k * self.s;
        for i in last..rows {
            for j in 0..cols {
                let on_pos = i == last && j + 1 == last;
                if !on_pos && self.m[(i, j)] != 0.0 {
                    return Err(KrylovError::InvalidStructure(format!(
                        "appended block row has nonzero at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }
}
