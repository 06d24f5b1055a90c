//! ILU(0) and right preconditioning.
//!
//! Solvers iterate on `A K^{-1}` in the variable `w`, starting from
//! `w = 0` with right-hand side `r_0 = f - A x_0`, and recover
//! `x = x_0 + K^{-1} w`. The residual of the preconditioned system is then
//! the true residual `f - A x`.

use crate::error::{KrylovError, Result};
use crate::sparse::{LinearOperator, Preconditioner, SparseMatrix};

/// Pivots below `PIVOT_TOL * max|diag(A)|` are a breakdown.
pub const PIVOT_TOL: f64 = 1e-14;

/// Incomplete LU factors restricted to the pattern of `A`, stored in one
/// array: strictly lower part is `L` (unit diagonal implied), the rest `U`.
#[derive(Debug, Clone)]
pub struct Ilu0Factors {
    lu: SparseMatrix,
    diag: Vec<usize>,
}

/// Row-wise (IKJ) ILU(0).
pub fn ilu0_factor(a: &SparseMatrix) -> Result<Ilu0Factors> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(KrylovError::DimensionMismatch {
            expected: n,
            got: a.n_cols(),
        });
    }
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        diag.push(a.position(i, i).ok_or_else(|| {
            KrylovError::InvalidStructure(format!("row {i} has no diagonal entry"))
        })?);
    }
    let max_diag = diag.iter().fold(0.0f64, |m, &p| m.max(a.values()[p].abs()));
    let tiny = PIVOT_TOL * max_diag;

    let mut lu = a.clone();
    let offsets = a.row_offsets().to_vec();
    let cols = a.col_indices().to_vec();
    // slot[j] = position of (i, j) in the current row, usize::MAX if absent
    let mut slot = vec![usize::MAX; n];
    let vals = lu.values_mut();
    for i in 0..n {
        let (lo, hi) = (offsets[i], offsets[i + 1]);
        for p in lo..hi {
            slot[cols[p]] = p;
        }
        for p in lo..hi {
            let k = cols[p];
            if k >= i {
                break;
            }
            let pivot = vals[diag[k]];
            let lik = vals[p] / pivot;
            vals[p] = lik;
            for q in diag[k] + 1..offsets[k + 1] {
                let target = slot[cols[q]];
                if target != usize::MAX {
                    vals[target] -= lik * vals[q];
                }
            }
        }
        let pivot = vals[diag[i]];
        if !(pivot.abs() >= tiny) || pivot == 0.0 {
            return Err(KrylovError::ZeroPivot { row: i, pivot });
        }
        for p in lo..hi {
            slot[cols[p]] = usize::MAX;
        }
    }
    Ok(Ilu0Factors { lu, diag })
}

impl Ilu0Factors {
    pub fn dim(&self) -> usize {
        self.lu.n_rows()
    }

    /// Combined factor storage sharing the pattern of `A`.
    pub fn combined(&self) -> &SparseMatrix {
        &self.lu
    }

    /// Strictly lower part of `L` (its unit diagonal is implicit).
    pub fn l_unit(&self) -> SparseMatrix {
        self.part(|i, j| j < i)
    }

    pub fn u_upper(&self) -> SparseMatrix {
        self.part(|i, j| j >= i)
    }

    fn part(&self, keep: impl Fn(usize, usize) -> bool) -> SparseMatrix {
        let mut trip = Vec::new();
        for i in 0..self.dim() {
            let (c, v) = self.lu.row(i);
            trip.extend(
                c.iter()
                    .zip(v)
                    .filter(|(&j, _)| keep(i, j))
                    .map(|(&j, &x)| (i, j, x)),
            );
        }
        SparseMatrix::from_triplets(self.dim(), self.dim(), &trip).expect("valid pattern")
    }

    /// Solves `L U z = r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        self.apply_into(r, &mut z);
        z
    }

    pub fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let n = self.dim();
        assert_eq!(r.len(), n);
        let offsets = self.lu.row_offsets();
        let cols = self.lu.col_indices();
        let vals = self.lu.values();
        for i in 0..n {
            let mut acc = r[i];
            for p in offsets[i]..self.diag[i] {
                acc -= vals[p] * z[cols[p]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for p in self.diag[i] + 1..offsets[i + 1] {
                acc -= vals[p] * z[cols[p]];
            }
            z[i] = acc / vals[self.diag[i]];
        }
    }
}

/// Free-function form of [`Ilu0Factors::apply`].
pub fn ilu0_apply(f: &Ilu0Factors, r: &[f64]) -> Vec<f64> {
    f.apply(r)
}

impl Preconditioner for Ilu0Factors {
    fn dim(&self) -> usize {
        Ilu0Factors::dim(self)
    }

    fn apply_inv(&self, r: &[f64], z: &mut [f64]) {
        self.apply_into(r, z);
    }
}

/// A linear system `A x = f` seen through an optional right preconditioner.
///
/// As a [`LinearOperator`] it is `A K^{-1}` (or `A` when unpreconditioned).
#[derive(Clone, Copy)]
pub struct System<'a> {
    a: &'a dyn LinearOperator,
    precond: Option<&'a dyn Preconditioner>,
}

impl<'a> System<'a> {
    pub fn new(a: &'a dyn LinearOperator) -> Self {
        Self { a, precond: None }
    }

    pub fn right_preconditioned(a: &'a dyn LinearOperator, k: &'a dyn Preconditioner) -> Self {
        Self {
            a,
            precond: Some(k),
        }
    }

    pub fn with_precond(a: &'a dyn LinearOperator, k: Option<&'a dyn Preconditioner>) -> Self {
        Self { a, precond: k }
    }

    pub fn is_preconditioned(&self) -> bool {
        self.precond.is_some()
    }

    pub fn matrix(&self) -> &'a dyn LinearOperator {
        self.a
    }

    /// `K^{-1} w`.
    pub fn lift(&self, w: &[f64]) -> Vec<f64> {
        match self.precond {
            Some(k) => {
                let mut z = vec![0.0; w.len()];
                k.apply_inv(w, &mut z);
                z
            }
            None => w.to_vec(),
        }
    }

    /// `f - A x`.
    pub fn residual(&self, f: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = self.a.apply_new(x);
        for (ri, fi) in r.iter_mut().zip(f) {
            *ri = fi - *ri;
        }
        r
    }
}

impl LinearOperator for System<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self.precond {
            Some(k) => {
                let mut z = vec![0.0; x.len()];
                k.apply_inv(x, &mut z);
                self.a.apply(&z, y);
            }
            None => self.a.apply(x, y),
        }
    }
}

/// `v -> A K^{-1} v` for ILU(0) factors of `A`.
pub fn right_preconditioned<'a>(a: &'a SparseMatrix, f: &'a Ilu0Factors) -> System<'a> {
    System::right_preconditioned(a, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64 * 0.1));
            if i > 0 {
                t.push((i, i - 1, -1.0 - 0.05 * i as f64));
            }
            if i + 1 < n {
                t.push((i, i + 1, -2.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_factors() {
        let f = ilu0_factor(&SparseMatrix::identity(4)).unwrap();
        assert_eq!(f.l_unit().nnz(), 0);
        assert_eq!(f.u_upper(), SparseMatrix::identity(4));
        assert_eq!(f.apply(&[1.0, -2.0, 3.0, 0.5]), vec![1.0, -2.0, 3.0, 0.5]);
    }

    #[test]
    fn tridiagonal_is_exact() {
        let a = tridiag(12);
        let f = ilu0_factor(&a).unwrap();
        let r: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let z = f.apply(&r);
        let az = a.spmv(&z).unwrap();
        let err: f64 = az
            .iter()
            .zip(&r)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let rn: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * rn, "{err}");
    }

    #[test]
    fn zero_pivot_names_row() {
        let a = SparseMatrix::from_dense(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        match ilu0_factor(&a) {
            Err(KrylovError::ZeroPivot { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected zero pivot, got {other:?}"),
        }
    }

    #[test]
    fn missing_diagonal_is_rejected() {
        let a = SparseMatrix::from_dense(2, 2, &[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            ilu0_factor(&a),
            Err(KrylovError::InvalidStructure(_))
        ));
    }

    #[test]
    fn identity_preconditioner_leaves_operator() {
        let a = tridiag(5);
        let i5 = SparseMatrix::identity(5);
        let f = ilu0_factor(&i5).unwrap();
        let op = right_preconditioned(&a, &f);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(op.apply_new(&x), a.spmv(&x).unwrap());
    }
}
