//! Standard and s-step Krylov solvers for nonsymmetric sparse systems.
//!
//! The crate provides CSR storage and block kernels ([`sparse`]), small
//! dense Gram/Hessenberg solvers ([`dense`]), ILU(0) right
//! preconditioning ([`precond`]), a convection-diffusion test problem
//! ([`problem`]), Orthomin/GCR/GMRES and their s-step counterparts
//! ([`solvers`]), operation accounting ([`accounting`]) and a benchmark
//! driver ([`bench`]).
//!
//! ```
//! use sstep_krylov::{discretize, ilu0_factor, solve, Method, ProblemSpec, SolverConfig, System};
//!
//! let p = discretize(&ProblemSpec::standard(7)).unwrap();
//! let ilu = ilu0_factor(&p.a).unwrap();
//! let sys = System::right_preconditioned(&p.a, &ilu);
//! let cfg = SolverConfig::new(Method::Sgmres { s: 2, m: 3 });
//! let report = solve(&sys, &p.f, &p.x0, &cfg).unwrap();
//! assert!(report.converged);
//! ```

pub mod accounting;
pub mod bench;
pub mod dense;
pub mod error;
pub mod method;
pub mod precond;
pub mod problem;
pub mod report;
pub mod solvers;
pub mod sparse;

pub use accounting::{audit, AuditMode, AuditVerdict, OpCounter};
pub use error::{KrylovError, Result};
pub use method::Method;
pub use precond::{ilu0_apply, ilu0_factor, Ilu0Factors, System};
pub use problem::{discretize, DiscretizedProblem, ProblemSpec};
pub use report::{Breakdown, SolveReport};
pub use solvers::sstep::{sarnoldi, smr_step, SArnoldi, SStepBasis};
pub use solvers::standard::{arnoldi, ArnoldiBasis};
pub use solvers::{solve, SolverConfig, Termination};
pub use sparse::{
    block_axpy, block_gram, krylov_block, DirectionBlock, LinearOperator, SparseMatrix,
};
