//! Sparse convex QP solver for
//!
//! ```text
//!     minimize    ½ xᵀ P x + qᵀ x
//!     subject to  l <= A x <= u
//! ```
//!
//! Equalities are rows with `l = u`; one-sided rows use the `±1e30` sentinel.
//! The solver is an operator-splitting (ADMM) method that factors the
//! quasi-definite KKT matrix once per step size and supports warm starts.
//!
//! Dual sign convention: stationarity reads `P x + q + Aᵀ y = 0`, so a row
//! active at its upper bound has `y > 0` and one active at its lower bound
//! has `y < 0`.

mod admm;
pub mod dump;
pub mod ldl;
pub mod scaling;
pub mod sparse;

use thiserror::Error;

pub use admm::{solve, Settings, Solver};
pub use ldl::LdlError;
pub use sparse::CscMatrix;

use crate::scalar::Real;

/// Magnitude at or beyond which a bound counts as infinite.
pub const INFINITY_THRESHOLD: f64 = 1e20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid sparse matrix {name}: {reason}")]
    InvalidMatrix { name: &'static str, reason: String },
    #[error("row {row}: lower bound {lower} exceeds upper bound {upper}")]
    InvalidBounds { row: usize, lower: f64, upper: f64 },
    #[error("non-finite problem data in {0}")]
    NonFinite(&'static str),
    #[error("KKT factorization failed (objective not convex?): {0}")]
    Factorization(#[from] LdlError),
}

/// Problem data. `p` holds only the upper triangle of the symmetric cost.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem<T> {
    pub p: CscMatrix<T>,
    pub q: Vec<T>,
    pub a: CscMatrix<T>,
    pub l: Vec<T>,
    pub u: Vec<T>,
}

impl<T: Real> QpProblem<T> {
    pub fn new(p: CscMatrix<T>, q: Vec<T>, a: CscMatrix<T>, l: Vec<T>, u: Vec<T>) -> Result<Self, QpError> {
        let prob = Self { p, q, a, l, u };
        prob.validate()?;
        Ok(prob)
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.l.len()
    }

    pub fn validate(&self) -> Result<(), QpError> {
        let n = self.q.len();
        let m = self.l.len();
        if self.p.nrows != n || self.p.ncols != n {
            return Err(QpError::Dimension(format!(
                "P is {}x{}, expected {n}x{n}",
                self.p.nrows, self.p.ncols
            )));
        }
        if self.a.ncols != n || self.a.nrows != m || self.u.len() != m {
            return Err(QpError::Dimension(format!(
                "A is {}x{}, l has {m}, u has {}; expected A {m}x{n}",
                self.a.nrows,
                self.a.ncols,
                self.u.len()
            )));
        }
        self.p
            .check()
            .map_err(|reason| QpError::InvalidMatrix { name: "P", reason })?;
        if !self.p.is_upper_triangular() {
            return Err(QpError::InvalidMatrix {
                name: "P",
                reason: "entries below the diagonal; store the upper triangle only".into(),
            });
        }
        self.a
            .check()
            .map_err(|reason| QpError::InvalidMatrix { name: "A", reason })?;
        if !self.p.nzval.iter().all(|v| v.is_finite()) {
            return Err(QpError::NonFinite("P"));
        }
        if !self.a.nzval.iter().all(|v| v.is_finite()) {
            return Err(QpError::NonFinite("A"));
        }
        if !self.q.iter().all(|v| v.is_finite()) {
            return Err(QpError::NonFinite("q"));
        }
        for i in 0..m {
            let (lo, hi) = (self.l[i], self.u[i]);
            if lo.is_nan() || hi.is_nan() {
                return Err(QpError::NonFinite("bounds"));
            }
            if lo > hi {
                return Err(QpError::InvalidBounds {
                    row: i,
                    lower: lo.to_f64_lossy(),
                    upper: hi.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// `½ xᵀ P x + qᵀ x`
    pub fn objective(&self, x: &[T]) -> T {
        let mut px = vec![T::zero(); x.len()];
        self.p.sym_upper_mul_vec(x, &mut px);
        let half = T::of(0.5);
        x.iter().zip(&px).map(|(&a, &b)| half * a * b).sum::<T>() + x.iter().zip(&self.q).map(|(&a, &b)| a * b).sum()
    }
}

pub(crate) fn is_inf_upper<T: Real>(u: T) -> bool {
    u >= T::of(INFINITY_THRESHOLD)
}

pub(crate) fn is_inf_lower<T: Real>(l: T) -> bool {
    l <= -T::of(INFINITY_THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Solved,
    MaxIterations,
    PrimalInfeasible,
    DualInfeasible,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Solved => "solved",
            Status::MaxIterations => "max_iterations",
            Status::PrimalInfeasible => "primal_infeasible",
            Status::DualInfeasible => "dual_infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution<T> {
    pub primal: Vec<T>,
    pub dual: Vec<T>,
    pub status: Status,
    pub iterations: usize,
    pub primal_residual: T,
    pub dual_residual: T,
    pub objective: T,
    /// Whether the active-set refinement replaced the ADMM iterate.
    pub polished: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals<T> {
    /// `‖violation of l <= Ax <= u‖∞`
    pub primal: T,
    /// `‖Px + q + Aᵀy‖∞`
    pub dual: T,
    /// Largest complementary-slackness violation. A multiplier with the wrong
    /// sign for an infinite bound counts with its own magnitude.
    pub complementarity: T,
}

/// Optimality residuals of a candidate primal/dual pair.
pub fn kkt_residuals<T: Real>(problem: &QpProblem<T>, primal: &[T], dual: &[T]) -> Result<KktResiduals<T>, QpError> {
    let n = problem.num_vars();
    let m = problem.num_constraints();
    if primal.len() != n || dual.len() != m {
        return Err(QpError::Dimension(format!(
            "primal has {}, dual has {}; expected {n} and {m}",
            primal.len(),
            dual.len()
        )));
    }
    let mut ax = vec![T::zero(); m];
    problem.a.mul_vec(primal, &mut ax);
    let mut grad = vec![T::zero(); n];
    problem.p.sym_upper_mul_vec(primal, &mut grad);
    let mut aty = vec![T::zero(); n];
    problem.a.tmul_vec(dual, &mut aty);

    let mut r_prim = T::zero();
    let mut comp = T::zero();
    for i in 0..m {
        let (lo, hi) = (problem.l[i], problem.u[i]);
        if !is_inf_upper(hi) {
            r_prim = r_prim.max(ax[i] - hi);
        }
        if !is_inf_lower(lo) {
            r_prim = r_prim.max(lo - ax[i]);
        }
        let y = dual[i];
        let viol = if y > T::zero() {
            if is_inf_upper(hi) {
                y
            } else {
                y * (hi - ax[i]).abs()
            }
        } else if y < T::zero() {
            if is_inf_lower(lo) {
                -y
            } else {
                -y * (ax[i] - lo).abs()
            }
        } else {
            T::zero()
        };
        comp = comp.max(viol);
    }
    let r_dual = (0..n).fold(T::zero(), |acc, j| acc.max((grad[j] + problem.q[j] + aty[j]).abs()));
    Ok(KktResiduals {
        primal: r_prim,
        dual: r_dual,
        complementarity: comp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn projection_onto_line() -> QpProblem<f64> {
        // min x² + y² s.t. x + y = 1
        QpProblem::new(
            CscMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 2.0)]),
            vec![0.0, 0.0],
            CscMatrix::from_dense(&[vec![1.0, 1.0]]),
            vec![1.0],
            vec![1.0],
        )
        .unwrap()
    }

    fn clipped() -> QpProblem<f64> {
        // min (x - 2)² s.t. x <= 1, written as ½·2x² - 4x + const
        QpProblem::new(
            CscMatrix::from_triplets(1, 1, &[(0, 0, 2.0)]),
            vec![-4.0],
            CscMatrix::identity(1),
            vec![-1e30],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn equality_projection_solution_and_dual_sign() {
        let prob = projection_onto_line();
        let settings = Settings {
            polish: true,
            ..Settings::default()
        };
        let sol = solve(&prob, None, &settings).unwrap();
        assert_eq!(sol.status, Status::Solved);
        assert!((sol.primal[0] - 0.5).abs() < 1e-5);
        assert!((sol.primal[1] - 0.5).abs() < 1e-5);
        assert!((sol.dual[0] + 1.0).abs() < 1e-4);
        let r = kkt_residuals(&prob, &sol.primal, &sol.dual).unwrap();
        assert!(r.primal <= 1e-6 && r.dual <= 1e-6 && r.complementarity <= 1e-6, "{r:?}");
    }

    #[test]
    fn clipped_unconstrained_optimum() {
        let prob = clipped();
        let sol = solve(&prob, None, &Settings::default()).unwrap();
        assert_eq!(sol.status, Status::Solved);
        assert!((sol.primal[0] - 1.0).abs() < 1e-5);
        // active upper bound: positive multiplier, -(2·1 - 4) = 2
        assert!((sol.dual[0] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn residuals_at_origin() {
        let prob = clipped();
        let r = kkt_residuals(&prob, &[0.0], &[0.0]).unwrap();
        assert_eq!(r.dual, 4.0);
        assert_eq!(r.primal, 0.0);
        assert_eq!(r.complementarity, 0.0);
    }

    #[test]
    fn residuals_for_inactive_feasible_point() {
        let prob = projection_onto_line();
        let r = kkt_residuals(&prob, &[0.25, 0.75], &[0.0]).unwrap();
        assert_eq!(r.primal, 0.0);
        assert_eq!(r.complementarity, 0.0);
    }

    #[test]
    fn rejects_bad_dimensions_and_bounds() {
        let p = CscMatrix::<f64>::identity(2);
        let a = CscMatrix::identity(2);
        assert!(matches!(
            QpProblem::new(p.clone(), vec![0.0; 3], a.clone(), vec![0.0; 2], vec![1.0; 2]),
            Err(QpError::Dimension(_))
        ));
        assert!(matches!(
            QpProblem::new(p.clone(), vec![0.0; 2], a.clone(), vec![0.0, 2.0], vec![1.0, 1.0]),
            Err(QpError::InvalidBounds { row: 1, .. })
        ));
        let lower = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(
            QpProblem::new(lower, vec![0.0; 2], a, vec![0.0; 2], vec![1.0; 2]),
            Err(QpError::InvalidMatrix { name: "P", .. })
        ));
        assert!(kkt_residuals(&projection_onto_line(), &[0.0], &[0.0]).is_err());
    }
}
