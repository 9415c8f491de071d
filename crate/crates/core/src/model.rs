//! Parametrized Hamiltonian family and its closed-form spectral data.
//!
//! The model is the complex symmetric matrix
//!
//! ```text
//! H(lambda, omega) = [ e1(lambda) - (i/2) gamma1        omega             ]
//!                    [        omega              e2(lambda) - (i/2) gamma2 ]
//! ```
//!
//! with affine unperturbed energies `e_k(lambda) = a_k + b_k * lambda` and
//! lambda-independent widths and coupling. The discriminant
//! `F = ((e1 - e2) - (i/2)(gamma1 - gamma2))^2 + 4 omega^2` controls
//! everything: its zeros in the real (lambda, omega) plane are the
//! exceptional points, and the sign of `Re F` at the level crossing
//! separates the overcritical and subcritical coupling regimes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 2x2 complex matrix, row-major.
pub type CMatrix2 = [[Complex64; 2]; 2];

/// Default tolerance on `Re F` (squared energy units) for the critical-regime band.
pub const REGIME_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ModelError {
    /// b1 == b2: the unperturbed levels never cross (or coincide identically).
    #[error("parallel unperturbed levels (b1 == b2): no finite crossing lambda")]
    ParallelLevels,
    /// gamma1 == gamma2: the two exceptional points merge into the diabolic
    /// point at (lambda_cr, 0).
    #[error("gamma1 == gamma2: degeneracy is a diabolic point, not an EP pair")]
    DegenerateToDP,
    #[error("model parameters invalid: {0}")]
    InvalidParams(&'static str),
}

/// Coefficients of the two-level family: `e_k(lambda) = a_k + b_k * lambda`
/// plus the nonnegative widths `gamma_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl ModelParams {
    pub fn new(
        a1: f64,
        b1: f64,
        a2: f64,
        b2: f64,
        gamma1: f64,
        gamma2: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            a1,
            b1,
            a2,
            b2,
            gamma1,
            gamma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [self.a1, self.b1, self.a2, self.b2, self.gamma1, self.gamma2];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(ModelError::InvalidParams("non-finite coefficient"));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(ModelError::InvalidParams("widths must be nonnegative"));
        }
        Ok(())
    }

    /// Reference parameter set used by the presets: a1 = a2 = 0, b1 = 1,
    /// b2 = -1, gamma1 = 1, gamma2 = 0. Crossing at lambda = 0, EPs at
    /// (0, +-1/4).
    pub fn reference() -> Self {
        Self {
            a1: 0.0,
            b1: 1.0,
            a2: 0.0,
            b2: -1.0,
            gamma1: 1.0,
            gamma2: 0.0,
        }
    }

    /// Reference diabolic-point slice: equal widths, so the only degeneracy
    /// is the DP at (lambda_cr, 0).
    pub fn reference_dp() -> Self {
        Self {
            a1: 0.0,
            b1: 1.0,
            a2: 0.0,
            b2: -1.0,
            gamma1: 0.5,
            gamma2: 0.5,
        }
    }

    pub fn e1(&self, lambda: f64) -> f64 {
        self.a1 + self.b1 * lambda
    }

    pub fn e2(&self, lambda: f64) -> f64 {
        self.a2 + self.b2 * lambda
    }
}

/// A point (lambda, omega) in the real two-parameter control plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub lambda: f64,
    pub omega: f64,
}

impl ParamPoint {
    pub fn new(lambda: f64, omega: f64) -> Self {
        Self { lambda, omega }
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite() && self.omega.is_finite()
    }
}

/// The two complex energies E - (i/2) Gamma, ordered by the principal branch
/// of sqrt(F): `e_plus` carries +sqrt(F)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEnergyPair {
    pub e_plus: Complex64,
    pub e_minus: Complex64,
}

/// Coupling regime at the level crossing, decided by the sign of Re F there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Overcritical,
    Critical,
    Subcritical,
}

impl Regime {
    /// Short tag used in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Overcritical => "over",
            Regime::Critical => "crit",
            Regime::Subcritical => "sub",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Overcritical => "overcritical",
            Regime::Critical => "critical",
            Regime::Subcritical => "subcritical",
        };
        f.write_str(s)
    }
}

/// Assemble H(lambda, omega). Complex symmetric by construction.
pub fn hamiltonian(params: &ModelParams, p: ParamPoint) -> CMatrix2 {
    let h11 = Complex64::new(params.e1(p.lambda), -0.5 * params.gamma1);
    let h22 = Complex64::new(params.e2(p.lambda), -0.5 * params.gamma2);
    let w = Complex64::new(p.omega, 0.0);
    [[h11, w], [w, h22]]
}

/// F = ((e1 - e2) - (i/2)(gamma1 - gamma2))^2 + 4 omega^2.
///
/// Identically equal to (H11 - H22)^2 + 4 H12 H21 for the assembled matrix.
pub fn discriminant(params: &ModelParams, p: ParamPoint) -> Complex64 {
    let d = Complex64::new(
        params.e1(p.lambda) - params.e2(p.lambda),
        -0.5 * (params.gamma1 - params.gamma2),
    );
    d * d + 4.0 * p.omega * p.omega
}

/// Closed-form eigenvalues: (1/2) trace(H) +- (1/2) sqrt(F), principal branch.
pub fn eigenvalues_closed_form(params: &ModelParams, p: ParamPoint) -> ComplexEnergyPair {
    let h = hamiltonian(params, p);
    let tr = h[0][0] + h[1][1];
    let s = discriminant(params, p).sqrt();
    ComplexEnergyPair {
        e_plus: 0.5 * (tr + s),
        e_minus: 0.5 * (tr - s),
    }
}

/// The unique lambda with e1(lambda) = e2(lambda).
pub fn crossing_lambda(params: &ModelParams) -> Result<f64, ModelError> {
    if params.b1 == params.b2 {
        return Err(ModelError::ParallelLevels);
    }
    Ok((params.a2 - params.a1) / (params.b1 - params.b2))
}

/// The critical coupling |gamma1 - gamma2| / 4 at which F vanishes at the crossing.
pub fn critical_omega(params: &ModelParams) -> f64 {
    0.25 * (params.gamma1 - params.gamma2).abs()
}

/// The two real-(lambda, omega) roots of F = 0: (lambda_cr, +-|gamma1 - gamma2|/4).
///
/// Returned with the positive-omega point first.
pub fn ep_locations(params: &ModelParams) -> Result<[ParamPoint; 2], ModelError> {
    let lcr = crossing_lambda(params)?;
    if params.gamma1 == params.gamma2 {
        return Err(ModelError::DegenerateToDP);
    }
    let wcr = critical_omega(params);
    Ok([ParamPoint::new(lcr, wcr), ParamPoint::new(lcr, -wcr)])
}

/// Regime at the crossing for the given coupling, default tolerance.
pub fn classify_regime(params: &ModelParams, omega: f64) -> Result<Regime, ModelError> {
    classify_regime_with_tol(params, omega, REGIME_TOL)
}

/// Regime at the crossing: sign of F_R = 4 omega^2 - (gamma1 - gamma2)^2 / 4
/// against `tol` (squared energy units).
pub fn classify_regime_with_tol(
    params: &ModelParams,
    omega: f64,
    tol: f64,
) -> Result<Regime, ModelError> {
    let lcr = crossing_lambda(params)?;
    let f_r = discriminant(params, ParamPoint::new(lcr, omega)).re;
    Ok(if f_r > tol {
        Regime::Overcritical
    } else if f_r < -tol {
        Regime::Subcritical
    } else {
        Regime::Critical
    })
}
