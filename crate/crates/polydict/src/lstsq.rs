//! Least-squares kernels behind the dictionary update and the coefficient
//! refit.
//!
//! Both reduce to minimizing a Euclidean residual against a dense design
//! matrix. The production path factorizes the design matrix with QR
//! instead of forming and inverting the Gram matrix; the normal-equations
//! formulas are the contract, not the algorithm. When the Gram matrix is
//! numerically singular (condition estimate above [`GRAM_COND_LIMIT`],
//! e.g. an atom that received no support), the solve falls back to a
//! small ridge and reports `rank_deficient` instead of aborting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polymat::PolyMatrix;

/// Gram-matrix condition estimate above which the ridge fallback engages.
pub const GRAM_COND_LIMIT: f64 = 1e12;

/// Result of the polynomial dictionary-update solve.
#[derive(Clone, Debug)]
pub struct RightSolve {
    /// The minimizer of the squared F-norm residual.
    pub solution: PolyMatrix,
    /// F-norm of the residual at the solution.
    pub residual_fnorm: f64,
    /// Set when the ridge fallback was used.
    pub rank_deficient: bool,
}

/// Result of the stacked coefficient solve.
#[derive(Clone, Debug)]
pub struct StackedSolve {
    /// The minimizer of the Euclidean residual.
    pub solution: DVector<f64>,
    /// Euclidean norm of the residual at the solution.
    pub residual_norm: f64,
    /// Set when the ridge fallback was used.
    pub rank_deficient: bool,
}

/// Solves `min_D || Y(z) - D(z) X ||_F^2` for the polynomial matrix `D(z)`.
///
/// The objective separates over lags, and every lag shares the same `X`,
/// so one factorization of `X^T` serves all lags; lag `l` of the solution
/// is the least-squares fit of `Y(l)` against `X`.
pub fn solve_right(y: &PolyMatrix, x: &DMatrix<f64>) -> Result<RightSolve> {
    if x.ncols() != y.cols() {
        return Err(Error::ShapeMismatch(format!(
            "coefficient matrix has {} columns, training matrix has {}",
            x.ncols(),
            y.cols()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficient matrix".into()));
    }
    let (p, n, lags) = (y.rows(), y.cols(), y.lags());
    let k = x.nrows();

    // One right-hand-side column per (lag, dictionary row).
    let design = x.transpose();
    let rhs = DMatrix::from_fn(n, p * lags, |s, c| y.get(c / p, c % p, s));
    let (sol, rank_deficient) = ls_solve_multi(&design, &rhs);

    let solution = PolyMatrix::from_fn(p, k, lags, |l, i, a| sol[(a, l * p + i)])?;
    let residual_fnorm = y.sub(&solution.mul_scalar_right(x)?)?.fnorm();
    Ok(RightSolve {
        solution,
        residual_fnorm,
        rank_deficient,
    })
}

/// Solves `min_x || y - D x ||_2` for stacked quantities.
pub fn solve_stacked(y: &DVector<f64>, d: &DMatrix<f64>) -> Result<StackedSolve> {
    if d.ncols() == 0 {
        return Err(Error::ShapeMismatch("design matrix has no columns".into()));
    }
    if d.nrows() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "design matrix has {} rows, right-hand side has {}",
            d.nrows(),
            y.len()
        )));
    }
    let rhs = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
    let (sol, rank_deficient) = ls_solve_multi(d, &rhs);
    let solution = DVector::from_column_slice(sol.column(0).as_slice());
    let residual_norm = (y - d * &solution).norm();
    Ok(StackedSolve {
        solution,
        residual_norm,
        rank_deficient,
    })
}

/// Shared multi-right-hand-side least-squares core. Returns the solution
/// matrix and whether the ridge fallback engaged.
fn ls_solve_multi(design: &DMatrix<f64>, rhs: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let k = design.ncols();
    if design.nrows() >= k {
        let qr = design.clone().qr();
        let r = qr.r();
        let mut dmin = f64::INFINITY;
        let mut dmax = 0.0f64;
        for i in 0..k {
            let d = r[(i, i)].abs();
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        // cond(X X^T) = cond(R^T R) ~ (dmax / dmin)^2
        let cond_ok = dmin > 0.0 && (dmax / dmin) * (dmax / dmin) <= GRAM_COND_LIMIT;
        if cond_ok {
            let qtb = qr.q().transpose() * rhs;
            if let Some(sol) = r.solve_upper_triangular(&qtb) {
                return (sol, false);
            }
        }
    }
    (ridge_solve(design, rhs), true)
}

/// Normal equations with a trace-scaled ridge. The multiplier escalates
/// deterministically until the shifted Gram matrix factorizes.
fn ridge_solve(design: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let k = design.ncols();
    let gram = design.transpose() * design;
    let atb = design.transpose() * rhs;
    let trace: f64 = (0..k).map(|i| gram[(i, i)]).sum();
    if trace <= 0.0 {
        // All-zero design: every solution is a minimizer; return the
        // minimum-norm one.
        return DMatrix::zeros(k, rhs.ncols());
    }
    let mut lambda = 1e-10 * trace / k as f64;
    for _ in 0..40 {
        let shifted = &gram + DMatrix::from_diagonal_element(k, k, lambda);
        if let Some(chol) = shifted.cholesky() {
            return chol.solve(&atb);
        }
        lambda *= 100.0;
    }
    DMatrix::zeros(k, rhs.ncols())
}
