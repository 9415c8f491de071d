//! Numerical EP location: 2-D Newton iteration on F(lambda, omega) = 0.
//!
//! F is complex, the unknowns are real, so the two real equations are
//! (Re F, Im F) = (0, 0) with the analytic Jacobian of the affine model.
//! This is the numeric cross-check for the analytic `ep_locations` formula.

use thiserror::Error;

use crate::model::{discriminant, ModelError, ModelParams, ParamPoint};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("Newton iteration did not converge within {iters} iterations (|F| = {f_abs:e})")]
    NoConvergence { iters: usize, f_abs: f64 },
    #[error("singular Jacobian at ({lambda}, {omega})")]
    SingularJacobian { lambda: f64, omega: f64 },
    #[error("non-finite seed")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpSearchResult {
    pub point: ParamPoint,
    /// |F| at the converged point.
    pub f_abs: f64,
    pub iters: usize,
}

/// Newton search for a root of F from `seed`.
///
/// Requires b1 != b2 and gamma1 != gamma2 (otherwise no EP pair exists).
pub fn find_ep(
    params: &ModelParams,
    seed: ParamPoint,
    max_iters: usize,
    tol: f64,
) -> Result<EpSearchResult, SearchError> {
    if !seed.is_finite() {
        return Err(SearchError::NonFinite);
    }
    if params.b1 == params.b2 {
        return Err(ModelError::ParallelLevels.into());
    }
    if params.gamma1 == params.gamma2 {
        return Err(ModelError::DegenerateToDP.into());
    }

    let db = params.b1 - params.b2;
    let mut p = seed;
    for iter in 0..max_iters {
        let f = discriminant(params, p);
        if f.norm() < tol {
            return Ok(EpSearchResult {
                point: p,
                f_abs: f.norm(),
                iters: iter,
            });
        }
        // dF/dlambda = 2 ((e1-e2) - (i/2)(g1-g2)) (b1-b2), dF/domega = 8 omega.
        let w = num_complex::Complex64::new(
            params.e1(p.lambda) - params.e2(p.lambda),
            -0.5 * (params.gamma1 - params.gamma2),
        );
        let df_dl = 2.0 * w * db;
        let df_dw = 8.0 * p.omega;
        // Real 2x2 system: [Re df_dl, Re df_dw; Im df_dl, Im df_dw] * step = -(Re F, Im F).
        // df/domega is purely real, so j11 = 0.
        let j00 = df_dl.re;
        let j01 = df_dw;
        let j10 = df_dl.im;
        let j11 = 0.0;
        let jdet = j00 * j11 - j01 * j10;
        if jdet.abs() < 1e-300 {
            return Err(SearchError::SingularJacobian {
                lambda: p.lambda,
                omega: p.omega,
            });
        }
        let dl = (-f.re * j11 + f.im * j01) / jdet;
        let dw = (f.re * j10 - f.im * j00) / jdet;
        p = ParamPoint::new(p.lambda + dl, p.omega + dw);
        if !p.is_finite() {
            return Err(SearchError::NoConvergence {
                iters: iter + 1,
                f_abs: f64::INFINITY,
            });
        }
    }
    let f_abs = discriminant(params, p).norm();
    if f_abs < tol {
        return Ok(EpSearchResult {
            point: p,
            f_abs,
            iters: max_iters,
        });
    }
    Err(SearchError::NoConvergence {
        iters: max_iters,
        f_abs,
    })
}
