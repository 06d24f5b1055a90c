//! Sparse storage and the vector/block kernels shared by every solver.
//!
//! All reductions sum in ascending index order so that repeated runs are
//! bit-for-bit reproducible.

mod block;
mod csr;
pub mod matrix_market;
mod operator;
pub mod vector;

pub use block::{block_axpy, block_gram, krylov_block, DirectionBlock};
pub use csr::SparseMatrix;
pub use operator::{IdentityPreconditioner, LinearOperator, Preconditioner};
