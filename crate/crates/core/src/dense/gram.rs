//! Symmetric Gram systems `W x = b` (the "Scalar1"/"Scalar2" solves).
//!
//! `W` is equilibrated by exact power-of-two diagonal scaling before
//! factoring so that pivot-ratio thresholds do not depend on how the
//! monomial basis columns happen to be scaled.

use crate::dense::DenseMatrix;
use crate::error::{KrylovError, Result};

/// Cholesky pivots at or below `CHOLESKY_EPS * trace/s` switch to LDL^T.
pub const CHOLESKY_EPS: f64 = 1e-13;
/// Pivot ratios below this are treated as loss of basis independence.
pub const SINGULAR_RATIO: f64 = 1e-15;

/// Symmetric `s x s` matrix of inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    m: DenseMatrix,
}

impl GramMatrix {
    /// Accepts a matrix that is symmetric to `1e-12` relative.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() || m.rows() == 0 {
            return Err(KrylovError::InvalidStructure(
                "Gram matrix must be square".into(),
            ));
        }
        let asym = m.sub(&m.transpose()).frobenius_norm();
        if asym > 1e-12 * m.frobenius_norm() {
            return Err(KrylovError::InvalidStructure(format!(
                "Gram matrix not symmetric (defect {asym:e})"
            )));
        }
        Ok(Self { m })
    }

    /// `(W + W^T) / 2`.
    pub fn symmetrized(m: DenseMatrix) -> Self {
        assert_eq!(m.rows(), m.cols());
        let mut out = m.clone();
        for i in 0..m.rows() {
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Self { m: out }
    }

    pub fn order(&self) -> usize {
        self.m.rows()
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.order()).map(|i| self.m[(i, i)]).sum()
    }

    pub fn factor(&self) -> Result<GramFactor> {
        GramFactor::new(self)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Cholesky {
        l: DenseMatrix,
    },
    Ldlt {
        perm: Vec<usize>,
        l: DenseMatrix,
        d: Vec<f64>,
    },
}

/// Factorization of an equilibrated Gram matrix.
#[derive(Debug, Clone)]
pub struct GramFactor {
    scale: Vec<f64>,
    kind: Kind,
    pivot_ratio: f64,
}

fn pow2_scale(diag: f64) -> f64 {
    if diag > 0.0 && diag.is_finite() {
        let e = (0.5 * diag.log2()).round() as i32;
        2f64.powi(-e)
    } else {
        1.0
    }
}

impl GramFactor {
    fn new(w: &GramMatrix) -> Result<Self> {
        let s = w.order();
        let scale: Vec<f64> = (0..s).map(|i| pow2_scale(w.m[(i, i)])).collect();
        let mut a = DenseMatrix::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                a[(i, j)] = scale[i] * w.m[(i, j)] * scale[j];
            }
        }
        let mean_diag = (0..s).map(|i| a[(i, i)]).sum::<f64>() / s as f64;
        if !(mean_diag > 0.0) || !mean_diag.is_finite() {
            return Err(KrylovError::SingularGram { ratio: 0.0 });
        }
        if let Some((l, ratio)) = cholesky(&a, CHOLESKY_EPS * mean_diag) {
            return Ok(Self {
                scale,
                kind: Kind::Cholesky { l },
                pivot_ratio: ratio,
            });
        }
        let (perm, l, d) = pivoted_ldlt(&a);
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dmin = d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let ratio = if dmax > 0.0 { dmin / dmax } else { 0.0 };
        if ratio < SINGULAR_RATIO || !ratio.is_finite() {
            return Err(KrylovError::SingularGram { ratio });
        }
        Ok(Self {
            scale,
            kind: Kind::Ldlt { perm, l, d },
            pivot_ratio: ratio,
        })
    }

    /// Smallest over largest pivot of the equilibrated factorization.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn used_ldlt(&self) -> bool {
        matches!(self.kind, Kind::Ldlt { .. })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let s = self.scale.len();
        assert_eq!(rhs.len(), s);
        let b: Vec<f64> = rhs.iter().zip(&self.scale).map(|(r, c)| r * c).collect();
        let y = match &self.kind {
            Kind::Cholesky { l } => {
                let mut y = b;
                for i in 0..s {
                    let mut acc = y[i];
                    for k in 0..i {
                        acc -= l[(i, k)] * y[k];
                    }
                    y[i] = acc / l[(i, i)];
                }
                for i in (0..s).rev() {
                    let mut acc = y[i];
                    for k in i + 1..s {
                        acc -= l[(k, i)] * y[k];
                    }
                    y[i] = acc / l[(i, i)];
                }
                y
            }
            Kind::Ldlt { perm, l, d } => {
                let mut y: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
                for i in 0..s {
                    for k in 0..i {
                        y[i] -= l[(i, k)] * y[k];
                    }
                }
                for i in 0..s {
                    y[i] /= d[i];
                }
                for i in (0..s).rev() {
                    for k in i + 1..s {
                        y[i] -= l[(k, i)] * y[k];
                    }
                }
                let mut out = vec![0.0; s];
                for (i, &p) in perm.iter().enumerate() {
                    out[p] = y[i];
                }
                out
            }
        };
        y.iter().zip(&self.scale).map(|(v, c)| v * c).collect()
    }

    /// Solves for every column of `rhs`.
    pub fn solve_matrix(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rhs.rows(), rhs.cols());
        for j in 0..rhs.cols() {
            out.set_column(j, &self.solve(&rhs.column(j)));
        }
        out
    }
}

fn cholesky(a: &DenseMatrix, tiny: f64) -> Option<(DenseMatrix, f64)> {
    let s = a.rows();
    let mut l = DenseMatrix::zeros(s, s);
    let (mut pmin, mut pmax) = (f64::INFINITY, 0.0f64);
    for j in 0..s {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tiny) {
            return None;
        }
        pmin = pmin.min(d);
        pmax = pmax.max(d);
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..s {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Some((l, pmin / pmax))
}

/// `P A P^T = L D L^T` choosing the largest remaining diagonal as pivot.
fn pivoted_ldlt(a: &DenseMatrix) -> (Vec<usize>, DenseMatrix, Vec<f64>) {
    let s = a.rows();
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..s).collect();
    let mut l = DenseMatrix::identity(s);
    let mut d = vec![0.0; s];
    for k in 0..s {
        let p = (k..s)
            .max_by(|&x, &y| work[(x, x)].abs().total_cmp(&work[(y, y)].abs()))
            .unwrap();
        if p != k {
            perm.swap(k, p);
            for j in 0..s {
                let t = work[(k, j)];
                work[(k, j)] = work[(p, j)];
                work[(p, j)] = t;
            }
            for i in 0..s {
                let t = work[(i, k)];
                work[(i, k)] = work[(i, p)];
                work[(i, p)] = t;
            }
            for j in 0..k {
                let t = l[(k, j)];
                l[(k, j)] = l[(p, j)];
                l[(p, j)] = t;
            }
        }
        let dk = work[(k, k)];
        d[k] = dk;
        if dk == 0.0 {
            continue;
        }
        for i in k + 1..s {
            l[(i, k)] = work[(i, k)] / dk;
        }
        for i in k + 1..s {
            for j in k + 1..s {
                work[(i, j)] -= l[(i, k)] * dk * l[(j, k)];
            }
        }
    }
    (perm, l, d)
}

/// Solution of `W X = B` plus diagnostics.
#[derive(Debug, Clone)]
pub struct SymSolve {
    pub x: DenseMatrix,
    pub pivot_ratio: f64,
    pub used_ldlt: bool,
}

/// Solves `W X = B` for every column of `B`.
pub fn sym_solve(w: &GramMatrix, rhs: &DenseMatrix) -> Result<SymSolve> {
    if rhs.rows() != w.order() {
        return Err(KrylovError::DimensionMismatch {
            expected: w.order(),
            got: rhs.rows(),
        });
    }
    let f = w.factor()?;
    Ok(SymSolve {
        x: f.solve_matrix(rhs),
        pivot_ratio: f.pivot_ratio(),
        used_ldlt: f.used_ldlt(),
    })
}
