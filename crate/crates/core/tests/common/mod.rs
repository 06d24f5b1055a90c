#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sstep_krylov::dense::DenseMatrix;
use sstep_krylov::SparseMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(a: &SparseMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.n_rows(), a.n_cols());
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            m[(i, j)] += v;
        }
    }
    m
}

pub fn dense_to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// Dense random matrix `shift I + N(0,1)/sqrt(n)`.
pub fn random_dense(n: usize, shift: f64, seed: u64) -> SparseMatrix {
    let mut r = rng(seed);
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let g: f64 = r.gen_range(-1.0..1.0) * (3.0f64).sqrt();
            data[i * n + j] = g / (n as f64).sqrt() + if i == j { shift } else { 0.0 };
        }
    }
    SparseMatrix::from_dense(n, n, &data).unwrap()
}

/// Sparse random matrix with a dominant diagonal.
pub fn random_sparse(n: usize, per_row: usize, seed: u64) -> SparseMatrix {
    let mut r = rng(seed);
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, 4.0 + r.gen_range(0.0..1.0)));
        for _ in 0..per_row {
            let j = r.gen_range(0..n);
            trip.push((i, j, r.gen_range(-1.0..1.0)));
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).unwrap()
}

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

/// `min_c || r - [A r, ..., A^m r] c ||` by normal equations on the
/// explicitly formed (column-normalized) Krylov basis.
pub fn krylov_min_residual(a: &DMatrix<f64>, r0: &[f64], m: usize) -> f64 {
    let n = r0.len();
    let r = DVector::from_column_slice(r0);
    let mut k = DMatrix::zeros(n, m);
    let mut v = r.clone();
    for j in 0..m {
        v = a * &v;
        let nv = v.norm();
        v /= nv;
        k.set_column(j, &v);
    }
    let lu = (k.transpose() * &k).lu();
    let mut c = lu
        .solve(&(k.transpose() * &r))
        .expect("normal equations are solvable");
    // refinement on the normal equations recovers what squaring the
    // condition number loses
    for _ in 0..4 {
        let res = &r - &k * &c;
        c += lu
            .solve(&(k.transpose() * res))
            .expect("normal equations are solvable");
    }
    (r - k * c).norm()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
