//! Column blocks of `n`-vectors and the BLAS3-style kernels that act on them.

use crate::dense::{DenseMatrix, GramMatrix};
use crate::error::{KrylovError, Result};
use crate::sparse::vector::{axpy, dot};
use crate::sparse::LinearOperator;

/// An `n x s` block of column vectors stored column after column.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionBlock {
    n: usize,
    s: usize,
    data: Vec<f64>,
}

impl DirectionBlock {
    pub fn zeros(n: usize, s: usize) -> Self {
        assert!(s >= 1, "block width must be at least 1");
        Self {
            n,
            s,
            data: vec![0.0; n * s],
        }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(KrylovError::InvalidConfig("empty block".into()));
        };
        let n = first.len();
        let mut data = Vec::with_capacity(n * columns.len());
        for c in columns {
            if c.len() != n {
                return Err(KrylovError::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Self {
            n,
            s: columns.len(),
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n.max(1)).take(self.s)
    }

    /// Copy of columns `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start < end && end <= self.s);
        Self {
            n: self.n,
            s: end - start,
            data: self.data[start * self.n..end * self.n].to_vec(),
        }
    }

    /// `self += X C`, one pass over each column of `X` per target column.
    pub fn add_mul(&mut self, x: &DirectionBlock, c: &DenseMatrix) -> Result<()> {
        if x.n != self.n {
            return Err(KrylovError::DimensionMismatch {
                expected: self.n,
                got: x.n,
            });
        }
        if c.rows() != x.s || c.cols() != self.s {
            return Err(KrylovError::DimensionMismatch {
                expected: x.s * self.s,
                got: c.rows() * c.cols(),
            });
        }
        for l in 0..self.s {
            let target = &mut self.data[l * self.n..(l + 1) * self.n];
            for j in 0..x.s {
                let coef = c[(j, l)];
                if coef != 0.0 {
                    axpy(coef, x.col(j), target);
                }
            }
        }
        Ok(())
    }

    /// `X a` for a coefficient vector of length `s`.
    pub fn combine(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.s);
        let mut out = vec![0.0; self.n];
        for (j, &aj) in a.iter().enumerate() {
            axpy(aj, self.col(j), &mut out);
        }
        out
    }

    /// Symmetrized `X^T X`.
    pub fn self_gram(&self) -> GramMatrix {
        let g = block_gram(self, self).expect("same block");
        GramMatrix::symmetrized(g)
    }
}

/// Columns `v, A v, ..., A^{s-1} v`.
pub fn krylov_block(op: &dyn LinearOperator, v: &[f64], s: usize) -> DirectionBlock {
    assert!(s >= 1, "block width must be at least 1");
    let n = v.len();
    let mut block = DirectionBlock::zeros(n, s);
    block.col_mut(0).copy_from_slice(v);
    for j in 1..s {
        let (prev, next) = block.data.split_at_mut(j * n);
        op.apply(&prev[(j - 1) * n..], &mut next[..n]);
    }
    block
}

/// `U^T V` with entry `(j, l) = dot(U_j, V_l)`; both triangles are computed.
pub fn block_gram(u: &DirectionBlock, v: &DirectionBlock) -> Result<DenseMatrix> {
    if u.n != v.n {
        return Err(KrylovError::DimensionMismatch {
            expected: u.n,
            got: v.n,
        });
    }
    let mut g = DenseMatrix::zeros(u.s, v.s);
    for j in 0..u.s {
        for l in 0..v.s {
            g[(j, l)] = dot(u.col(j), v.col(l));
        }
    }
    Ok(g)
}

/// `Y + X C`.
pub fn block_axpy(
    y: &DirectionBlock,
    x: &DirectionBlock,
    c: &DenseMatrix,
) -> Result<DirectionBlock> {
    let mut out = y.clone();
    out.add_mul(x, c)?;
    Ok(out)
}
