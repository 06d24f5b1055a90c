//! Small dense kernels: `s x s` Gram solves, block-diagonal Cholesky and
//! Hessenberg least squares.

mod cholesky;
mod gram;
mod lsq;
mod matrix;

pub use cholesky::{block_cholesky, BlockCholesky};
pub use gram::{sym_solve, GramFactor, GramMatrix, SymSolve};
pub use lsq::{hessenberg_lsq, BlockHessenberg, GivensLsq};
pub use matrix::DenseMatrix;
