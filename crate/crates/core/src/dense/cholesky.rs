use crate::dense::{DenseMatrix, GramMatrix};
use crate::error::{KrylovError, Result};

/// Factor of `D = diag(W_1, ..., W_k, tau)` as `D = R^T R` with each
/// diagonal block of `R` upper triangular.
///
/// With `R` upper triangular, `R e_1 = sqrt(D_11) e_1` and `R G` stays upper
/// Hessenberg whenever `G` is, which is what the block least-squares step
/// relies on.
#[derive(Debug, Clone)]
pub struct BlockCholesky {
    blocks: Vec<DenseMatrix>,
    trailing: f64,
}

/// Cholesky factor of every diagonal block plus the trailing scalar.
pub fn block_cholesky(blocks: &[GramMatrix], trailing: f64) -> Result<BlockCholesky> {
    let mut out = Vec::with_capacity(blocks.len());
    for (b, w) in blocks.iter().enumerate() {
        let s = w.order();
        let a = w.as_dense();
        let mut r = DenseMatrix::zeros(s, s);
        for j in 0..s {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= r[(k, j)] * r[(k, j)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(KrylovError::NotPositiveDefinite { block: b });
            }
            let rjj = d.sqrt();
            r[(j, j)] = rjj;
            for i in j + 1..s {
                let mut v = a[(j, i)];
                for k in 0..j {
                    v -= r[(k, j)] * r[(k, i)];
                }
                r[(j, i)] = v / rjj;
            }
        }
        out.push(r);
    }
    if !(trailing > 0.0) || !trailing.is_finite() {
        return Err(KrylovError::NotPositiveDefinite {
            block: blocks.len(),
        });
    }
    Ok(BlockCholesky {
        blocks: out,
        trailing: trailing.sqrt(),
    })
}

impl BlockCholesky {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.rows()).sum::<usize>() + 1
    }

    /// Upper factor `R_i` of block `i`.
    pub fn upper_block(&self, i: usize) -> &DenseMatrix {
        &self.blocks[i]
    }

    /// Lower factor `L_i = R_i^T` of block `i`, so `L_i L_i^T = W_i`.
    pub fn lower_block(&self, i: usize) -> DenseMatrix {
        self.blocks[i].transpose()
    }

    pub fn trailing(&self) -> f64 {
        self.trailing
    }

    /// `R z`.
    pub fn apply_upper(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.dim());
        let mut out = vec![0.0; z.len()];
        let mut off = 0;
        for r in &self.blocks {
            let s = r.rows();
            for i in 0..s {
                let mut acc = 0.0;
                for j in i..s {
                    acc += r[(i, j)] * z[off + j];
                }
                out[off + i] = acc;
            }
            off += s;
        }
        out[off] = self.trailing * z[off];
        out
    }

    /// `R G` for a matrix with `dim()` rows.
    pub fn apply_upper_matrix(&self, g: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(g.rows(), g.cols());
        for j in 0..g.cols() {
            out.set_column(j, &self.apply_upper(&g.column(j)));
        }
        out
    }

    /// Dense `R^T R`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        let mut r = DenseMatrix::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    r[(off + i, off + j)] = b[(i, j)];
                }
            }
            off += b.rows();
        }
        r[(off, off)] = self.trailing;
        r.transpose().matmul(&r)
    }
}
