mod common;

use common::*;
use proptest::prelude::*;
use sstep_krylov::dense::DenseMatrix;
use sstep_krylov::sparse::matrix_market;
use sstep_krylov::{
    block_axpy, block_gram, discretize, krylov_block, DirectionBlock, LinearOperator, ProblemSpec,
    SparseMatrix,
};

#[test]
fn spmv_hand_cases() {
    let i3 = SparseMatrix::identity(3);
    assert_eq!(i3.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    let a = SparseMatrix::from_dense(2, 2, &[2.0, 0.0, 1.0, 3.0]).unwrap();
    assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![2.0, 4.0]);
    assert!(a.spmv(&[1.0]).is_err());
}

#[test]
fn laplacian_times_ones_matches_dense() {
    let p = discretize(&ProblemSpec::laplacian(3)).unwrap();
    let ones = vec![1.0; 9];
    let y = p.a.spmv(&ones).unwrap();
    let oracle = to_na(&p.a) * nalgebra::DVector::from_element(9, 1.0);
    let h2 = 16.0;
    // corners keep two neighbours, edges three, the centre four
    let expect = [2.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 2.0];
    for i in 0..9 {
        assert!((y[i] - oracle[i]).abs() < 1e-12);
        assert!((y[i] - expect[i] * h2).abs() < 1e-9);
    }
}

#[test]
fn krylov_block_examples() {
    let i2 = SparseMatrix::identity(2);
    let b = krylov_block(&i2, &[1.0, 2.0], 3);
    for c in b.columns() {
        assert_eq!(c, &[1.0, 2.0]);
    }
    let two = SparseMatrix::from_dense(2, 2, &[2.0, 0.0, 0.0, 2.0]).unwrap();
    let b = krylov_block(&two, &[1.0, 0.0], 3);
    assert_eq!(b.col(1), &[2.0, 0.0]);
    assert_eq!(b.col(2), &[4.0, 0.0]);

    let p = discretize(&ProblemSpec::standard(3)).unwrap();
    let mut e1 = vec![0.0; 9];
    e1[0] = 1.0;
    let b = krylov_block(&p.a, &e1, 2);
    assert_eq!(b.col(0), &e1[..]);
    assert_eq!(b.col(1), &p.a.spmv(&e1).unwrap()[..]);
}

#[test]
fn gram_and_axpy_examples() {
    let u = DirectionBlock::from_columns(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
    let g = block_gram(&u, &u).unwrap();
    assert_eq!(g.data(), &[1.0, 2.0, 2.0, 4.0]);

    let y = DirectionBlock::from_columns(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
    let x = DirectionBlock::from_columns(&[vec![7.0, 8.0, 9.0], vec![1.0, 1.0, 1.0]]).unwrap();
    assert_eq!(block_axpy(&y, &x, &DenseMatrix::zeros(2, 2)).unwrap(), y);
    let neg =
        DirectionBlock::from_columns(&[vec![-1.0, -2.0, -3.0], vec![-4.0, -5.0, -6.0]]).unwrap();
    let z = block_axpy(&y, &neg, &DenseMatrix::identity(2)).unwrap();
    assert!(z.columns().all(|c| c.iter().all(|&v| v == 0.0)));

    let short = DirectionBlock::zeros(2, 2);
    assert!(block_gram(&short, &y).is_err());
    assert!(block_axpy(&short, &y, &DenseMatrix::identity(2)).is_err());
}

#[test]
fn matrix_market_round_trip_of_generated_problem() {
    let p = discretize(&ProblemSpec::standard(5)).unwrap();
    let mut buf = Vec::new();
    matrix_market::write_matrix(&p.a, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    let back = matrix_market::read_matrix(&buf[..]).unwrap();
    assert_eq!(back.nnz(), p.a.nnz());
    assert!(back.sub(&p.a).unwrap().frobenius_norm() <= 1e-15 * p.a.frobenius_norm());
}

fn triplets(n: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..n, 0..n, -10.0f64..10.0), 0..4 * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spmv_agrees_with_dense((n, trip) in (1usize..200).prop_flat_map(|n| (Just(n), triplets(n))), seed in 0u64..1000) {
        let a = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let x = random_vec(n, seed);
        let y = a.spmv(&x).unwrap();
        let oracle = to_na(&a) * nalgebra::DVector::from_vec(x.clone());
        let scale: f64 = oracle.amax().max(1.0);
        for i in 0..n {
            prop_assert!((y[i] - oracle[i]).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn csr_structure_is_valid((n, trip) in (1usize..40).prop_flat_map(|n| (Just(n), triplets(n)))) {
        let a = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let off = a.row_offsets();
        prop_assert_eq!(off[0], 0);
        prop_assert_eq!(off[n], a.values().len());
        prop_assert_eq!(a.col_indices().len(), a.values().len());
        for i in 0..n {
            prop_assert!(off[i] <= off[i + 1]);
            let (cols, _) = a.row(i);
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(cols.iter().all(|&c| c < n));
        }
        prop_assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn krylov_columns_follow_the_recurrence(n in 1usize..30, s in 1usize..6, seed in 0u64..1000) {
        let a = random_sparse(n, 3, seed);
        let v = random_vec(n, seed + 1);
        let b = krylov_block(&a, &v, s);
        prop_assert_eq!(b.col(0), &v[..]);
        for j in 1..s {
            prop_assert_eq!(b.col(j).to_vec(), a.apply_new(b.col(j - 1)));
        }
    }

    #[test]
    fn gram_matches_dot_oracle_and_is_psd(n in 3usize..20, s in 1usize..5, seed in 0u64..1000) {
        let cols: Vec<Vec<f64>> = (0..s).map(|j| random_vec(n, seed * 7 + j as u64)).collect();
        let u = DirectionBlock::from_columns(&cols).unwrap();
        let g = block_gram(&u, &u).unwrap();
        for j in 0..s {
            for l in 0..s {
                let oracle: f64 = (0..n).map(|i| cols[j][i] * cols[l][i]).sum();
                prop_assert!((g[(j, l)] - oracle).abs() <= 1e-14 * oracle.abs().max(1.0));
            }
        }
        let w = u.self_gram();
        let dense = dense_to_na(w.as_dense());
        prop_assert_eq!(dense.clone(), dense.transpose());
        let trace = w.trace();
        for ev in dense.symmetric_eigenvalues().iter() {
            prop_assert!(*ev >= -1e-12 * trace);
        }
    }

    #[test]
    fn block_axpy_matches_columnwise_saxpy(n in 1usize..12, s in 1usize..4, seed in 0u64..1000) {
        let y = DirectionBlock::from_columns(&(0..s).map(|j| random_vec(n, seed + j as u64)).collect::<Vec<_>>()).unwrap();
        let x = DirectionBlock::from_columns(&(0..s).map(|j| random_vec(n, seed + 50 + j as u64)).collect::<Vec<_>>()).unwrap();
        let cv = random_vec(s * s, seed + 99);
        let c = DenseMatrix::from_row_major(s, s, cv);
        let z = block_axpy(&y, &x, &c).unwrap();
        for l in 0..s {
            for i in 0..n {
                let mut oracle = y.col(l)[i];
                for j in 0..s {
                    oracle += x.col(j)[i] * c[(j, l)];
                }
                prop_assert!((z.col(l)[i] - oracle).abs() <= 1e-14 * oracle.abs().max(1.0));
            }
        }
    }

    #[test]
    fn matrix_market_round_trips((n, trip) in (1usize..30).prop_flat_map(|n| (Just(n), triplets(n)))) {
        let a = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let mut buf = Vec::new();
        matrix_market::write_matrix(&a, &mut buf).unwrap();
        let back = matrix_market::read_matrix(&buf[..]).unwrap();
        prop_assert_eq!(back.n_rows(), n);
        prop_assert_eq!(back.to_dense(), a.to_dense());
    }
}
