//! Convection-diffusion test problem on the unit square:
//!
//! ```text
//! -(b u_x)_x - (c u_y)_y + (d u)_x + (e u)_y + f u = g   on (0,1)^2
//! b = exp(-xy), c = exp(xy), d = beta (x+y), e = gamma (x+y), f = 1/(1+xy)
//! ```
//!
//! with Dirichlet data and `g` manufactured from
//! `u = x exp(xy) sin(pi x) sin(pi y)`.
//!
//! The grid has `nx` interior points per direction, `h = 1/(nx+1)`, and
//! unknowns are numbered row by row (`x` fastest). Diffusion uses the
//! conservative five-point form with coefficients at cell-face midpoints,
//! convection uses central differences of the products `d u` and `e u`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{KrylovError, Result};
use crate::sparse::{matrix_market, SparseMatrix};

/// Which terms of the operator are active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficients {
    /// All five coefficient functions.
    #[default]
    Standard,
    /// `b = c = 1`, no convection or reaction: the five-point Laplacian.
    Laplacian,
    /// Only the diffusion terms with the standard `b` and `c`.
    DiffusionOnly,
    /// Only convection, with constant `d` and `e`.
    ConstantConvection { d: f64, e: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub nx: usize,
    pub beta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub coefficients: Coefficients,
}

impl ProblemSpec {
    /// `beta = 1`, `gamma = 50`, all terms active.
    pub fn standard(nx: usize) -> Self {
        Self {
            nx,
            beta: 1.0,
            gamma: 50.0,
            coefficients: Coefficients::Standard,
        }
    }

    pub fn laplacian(nx: usize) -> Self {
        Self {
            nx,
            beta: 0.0,
            gamma: 0.0,
            coefficients: Coefficients::Laplacian,
        }
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.nx + 1) as f64
    }

    pub fn n(&self) -> usize {
        self.nx * self.nx
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 1 {
            return Err(KrylovError::InvalidConfig("nx must be at least 1".into()));
        }
        if !self.beta.is_finite() || !self.gamma.is_finite() {
            return Err(KrylovError::InvalidConfig(
                "beta and gamma must be finite".into(),
            ));
        }
        Ok(())
    }

    fn eval(&self, x: f64, y: f64) -> CoefficientValues {
        match self.coefficients {
            Coefficients::Standard => {
                let ep = (x * y).exp();
                let em = (-x * y).exp();
                CoefficientValues {
                    b: em,
                    c: ep,
                    d: self.beta * (x + y),
                    e: self.gamma * (x + y),
                    f: 1.0 / (1.0 + x * y),
                    b_x: -y * em,
                    c_y: x * ep,
                    d_x: self.beta,
                    e_y: self.gamma,
                }
            }
            Coefficients::Laplacian => CoefficientValues {
                b: 1.0,
                c: 1.0,
                ..CoefficientValues::ZERO
            },
            Coefficients::DiffusionOnly => {
                let ep = (x * y).exp();
                let em = (-x * y).exp();
                CoefficientValues {
                    b: em,
                    c: ep,
                    b_x: -y * em,
                    c_y: x * ep,
                    ..CoefficientValues::ZERO
                }
            }
            Coefficients::ConstantConvection { d, e } => CoefficientValues {
                d,
                e,
                ..CoefficientValues::ZERO
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct CoefficientValues {
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    b_x: f64,
    c_y: f64,
    d_x: f64,
    e_y: f64,
}

impl CoefficientValues {
    const ZERO: Self = Self {
        b: 0.0,
        c: 0.0,
        d: 0.0,
        e: 0.0,
        f: 0.0,
        b_x: 0.0,
        c_y: 0.0,
        d_x: 0.0,
        e_y: 0.0,
    };
}

/// Coefficient functions `(b, c, d, e, f)` of the standard operator.
pub fn coefficients(x: f64, y: f64, beta: f64, gamma: f64) -> (f64, f64, f64, f64, f64) {
    let v = ProblemSpec {
        nx: 1,
        beta,
        gamma,
        coefficients: Coefficients::Standard,
    }
    .eval(x, y);
    (v.b, v.c, v.d, v.e, v.f)
}

/// `u(x, y) = x exp(xy) sin(pi x) sin(pi y)`.
pub fn exact_solution(x: f64, y: f64) -> f64 {
    x * (x * y).exp() * (PI * x).sin() * (PI * y).sin()
}

/// `(u, u_x, u_y, u_xx, u_yy)` in closed form.
fn solution_derivatives(x: f64, y: f64) -> (f64, f64, f64, f64, f64) {
    let ex = (x * y).exp();
    let (sx, cx) = (PI * x).sin_cos();
    let (sy, cy) = (PI * y).sin_cos();
    let u = x * ex * sx * sy;
    // u_x = e sy [ (1 + xy) sx + pi x cx ]
    let bracket = (1.0 + x * y) * sx + PI * x * cx;
    let u_x = ex * sy * bracket;
    let d_bracket = y * sx + (1.0 + x * y) * PI * cx + PI * cx - PI * PI * x * sx;
    let u_xx = ex * sy * (y * bracket + d_bracket);
    // u_y = x e sx (x sy + pi cy)
    let u_y = x * ex * sx * (x * sy + PI * cy);
    let u_yy = x * ex * sx * (x * x * sy + 2.0 * PI * x * cy - PI * PI * sy);
    (u, u_x, u_y, u_xx, u_yy)
}

/// Right-hand side `g` obtained by applying the continuous operator to the
/// manufactured solution.
pub fn source_term(spec: &ProblemSpec, x: f64, y: f64) -> f64 {
    let k = spec.eval(x, y);
    let (u, u_x, u_y, u_xx, u_yy) = solution_derivatives(x, y);
    -k.b_x * u_x - k.b * u_xx - k.c_y * u_y - k.c * u_yy
        + k.d_x * u
        + k.d * u_x
        + k.e_y * u
        + k.e * u_y
        + k.f * u
}

/// `x_i = 0.05 * (i mod 50)` with 1-based `i`.
pub fn initial_guess(n: usize) -> Vec<f64> {
    (1..=n).map(|i| 0.05 * (i % 50) as f64).collect()
}

/// Assembled system with its manufactured solution and starting vector.
#[derive(Debug, Clone)]
pub struct DiscretizedProblem {
    pub spec: ProblemSpec,
    pub a: SparseMatrix,
    pub f: Vec<f64>,
    pub u_true: Vec<f64>,
    pub x0: Vec<f64>,
}

pub fn discretize(spec: &ProblemSpec) -> Result<DiscretizedProblem> {
    spec.validate()?;
    let nx = spec.nx;
    let n = spec.n();
    let h = spec.h();
    let h2 = h * h;
    let coord = |i: usize| i as f64 * h;
    let index = |i: usize, j: usize| (j - 1) * nx + (i - 1);

    let mut trip = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    let mut u_true = vec![0.0; n];
    for j in 1..=nx {
        for i in 1..=nx {
            let (x, y) = (coord(i), coord(j));
            let row = index(i, j);
            let here = spec.eval(x, y);
            let b_e = spec.eval(x + 0.5 * h, y).b;
            let b_w = spec.eval(x - 0.5 * h, y).b;
            let c_n = spec.eval(x, y + 0.5 * h).c;
            let c_s = spec.eval(x, y - 0.5 * h).c;
            let d_e = spec.eval(x + h, y).d;
            let d_w = spec.eval(x - h, y).d;
            let e_n = spec.eval(x, y + h).e;
            let e_s = spec.eval(x, y - h).e;

            let diag = (b_e + b_w + c_n + c_s) / h2 + here.f;
            let neighbours = [
                (i + 1, j, -b_e / h2 + d_e / (2.0 * h)),
                (i - 1, j, -b_w / h2 - d_w / (2.0 * h)),
                (i, j + 1, -c_n / h2 + e_n / (2.0 * h)),
                (i, j - 1, -c_s / h2 - e_s / (2.0 * h)),
            ];
            // ordered by column: south, west, diag, east, north
            let mut g = source_term(spec, x, y);
            trip.push((row, row, diag));
            for (ii, jj, coef) in neighbours {
                if ii == 0 || jj == 0 || ii == nx + 1 || jj == nx + 1 {
                    g -= coef * exact_solution(coord(ii), coord(jj));
                } else {
                    trip.push((row, index(ii, jj), coef));
                }
            }
            rhs[row] = g;
            u_true[row] = exact_solution(x, y);
        }
    }
    let a = SparseMatrix::from_triplets(n, n, &trip)?;
    Ok(DiscretizedProblem {
        spec: *spec,
        a,
        f: rhs,
        u_true,
        x0: initial_guess(n),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    nx: usize,
    n: usize,
    h: f64,
    beta: f64,
    gamma: f64,
    coefficients: Coefficients,
    scheme: String,
    ordering: String,
}

impl DiscretizedProblem {
    /// Writes `<stem>.mtx` (matrix), `<stem>_rhs.mtx`, `<stem>_x0.mtx` and a
    /// `<stem>.json` sidecar into `dir`.
    pub fn export(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        matrix_market::write_matrix_file(&self.a, dir.join(format!("{stem}.mtx")))?;
        matrix_market::write_vector(
            &self.f,
            std::fs::File::create(dir.join(format!("{stem}_rhs.mtx")))?,
        )?;
        matrix_market::write_vector(
            &self.x0,
            std::fs::File::create(dir.join(format!("{stem}_x0.mtx")))?,
        )?;
        let meta = Sidecar {
            nx: self.spec.nx,
            n: self.spec.n(),
            h: self.spec.h(),
            beta: self.spec.beta,
            gamma: self.spec.gamma,
            coefficients: self.spec.coefficients,
            scheme: "five-point; conservative diffusion with midpoint coefficients; central differences of d*u and e*u; Dirichlet lifting".into(),
            ordering: "natural row-major, x fastest, index = (j-1)*nx + (i-1)".into(),
        };
        let json =
            serde_json::to_string_pretty(&meta).map_err(|e| KrylovError::Io(e.to_string()))?;
        std::fs::write(dir.join(format!("{stem}.json")), json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_at_origin_and_corner() {
        assert_eq!(coefficients(0.0, 0.0, 1.0, 50.0), (1.0, 1.0, 0.0, 0.0, 1.0));
        let (b, c, d, e, f) = coefficients(1.0, 1.0, 1.0, 50.0);
        assert!((b - (-1f64).exp()).abs() < 1e-15);
        assert!((c - 1f64.exp()).abs() < 1e-15);
        assert_eq!((d, e, f), (2.0, 100.0, 0.5));
        let (b, c, d, e, f) = coefficients(0.5, 0.5, 1.0, 50.0);
        assert!((b - (-0.25f64).exp()).abs() < 1e-15);
        assert!((c - 0.25f64.exp()).abs() < 1e-15);
        assert_eq!(d, 1.0);
        assert_eq!(e, 50.0);
        assert!((f - 0.8).abs() < 1e-15);
    }

    #[test]
    fn initial_guess_wraps() {
        let x = initial_guess(60);
        assert!((x[0] - 0.05).abs() < 1e-15);
        assert!((x[1] - 0.10).abs() < 1e-15);
        assert!((x[2] - 0.15).abs() < 1e-15);
        assert_eq!(x[49], 0.0);
        assert!((x[50] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_grid() {
        assert!(discretize(&ProblemSpec::standard(0)).is_err());
    }

    #[test]
    fn laplacian_stencil() {
        let p = discretize(&ProblemSpec::laplacian(3)).unwrap();
        let h2 = 1.0 / 16.0;
        let a = &p.a;
        for i in 0..9 {
            assert!((a.get(i, i) - 4.0 / h2).abs() < 1e-12);
        }
        assert!((a.get(4, 3) + 1.0 / h2).abs() < 1e-12);
        assert!((a.get(4, 1) + 1.0 / h2).abs() < 1e-12);
        assert_eq!(a.get(2, 3), 0.0, "row-boundary truncation");
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let (x, y, d) = (0.37, 0.61, 1e-5);
        let (_, ux, uy, uxx, uyy) = solution_derivatives(x, y);
        let u = exact_solution;
        let fx = (u(x + d, y) - u(x - d, y)) / (2.0 * d);
        let fy = (u(x, y + d) - u(x, y - d)) / (2.0 * d);
        let fxx = (u(x + d, y) - 2.0 * u(x, y) + u(x - d, y)) / (d * d);
        let fyy = (u(x, y + d) - 2.0 * u(x, y) + u(x, y - d)) / (d * d);
        assert!((ux - fx).abs() < 1e-8);
        assert!((uy - fy).abs() < 1e-8);
        assert!((uxx - fxx).abs() < 1e-4);
        assert!((uyy - fyy).abs() < 1e-4);
    }
}
