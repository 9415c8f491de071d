//! Closed loops in the (lambda, omega) plane and their eigenbranch monodromy.
//!
//! A loop is traced with the c-parallel-transported branch continuation from
//! [`crate::tracker`]; the monodromy matrix expresses the end-of-loop branches
//! in the c-normalized start basis via c-products. The permutation, unit
//! phase factors and geometric phases are derived from the matrix. The four
//! headline experiments (EP once / twice / reversed, DP once) ship as presets
//! with verdict records against their expected transformation patterns.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{crossing_lambda, ep_locations, ModelParams, ParamPoint};
use crate::tracker::{c_product, trace_path, Permutation, TrackError, TrackOptions, TrackedPath};

/// Entry-magnitude tolerance for the permutation classification.
pub const PERM_TOL: f64 = 1e-6;
/// Verdict tolerance on matrix-entry checks.
pub const VERDICT_TOL: f64 = 1e-6;
/// Verdict tolerance on geometric phases (radians).
pub const PHASE_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum LoopError {
    #[error("invalid loop spec: {0}")]
    BadSpec(&'static str),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error("start branches near-self-orthogonal: base point too close to the EP")]
    DegenerateBasis,
    #[error("monodromies have different base points")]
    GaugeMismatch,
    #[error("branch does not return to itself over this path")]
    BranchNotClosed,
    #[error("preset precondition violated: {0}")]
    PresetPreconditionViolated(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

/// Discretized ellipse in the (lambda, omega) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub center: ParamPoint,
    pub radius_lambda: f64,
    pub radius_omega: f64,
    pub steps: usize,
    pub orientation: Orientation,
    pub windings: usize,
}

impl LoopSpec {
    pub fn circle(center: ParamPoint, radius: f64, steps: usize) -> Self {
        Self {
            center,
            radius_lambda: radius,
            radius_omega: radius,
            steps,
            orientation: Orientation::Ccw,
            windings: 1,
        }
    }

    fn validate(&self) -> Result<(), LoopError> {
        if !self.center.is_finite() {
            return Err(LoopError::BadSpec("non-finite center"));
        }
        if !(self.radius_lambda > 0.0 && self.radius_lambda.is_finite()) {
            return Err(LoopError::BadSpec(
                "radius_lambda must be positive and finite",
            ));
        }
        if !(self.radius_omega > 0.0 && self.radius_omega.is_finite()) {
            return Err(LoopError::BadSpec(
                "radius_omega must be positive and finite",
            ));
        }
        if self.steps < 4 {
            return Err(LoopError::BadSpec("steps must be at least 4"));
        }
        if self.windings < 1 {
            return Err(LoopError::BadSpec("windings must be at least 1"));
        }
        Ok(())
    }
}

/// Sample the closed ellipse path: steps * windings + 1 points, first = last.
pub fn make_loop(spec: &LoopSpec) -> Result<Vec<ParamPoint>, LoopError> {
    spec.validate()?;
    let sign = match spec.orientation {
        Orientation::Ccw => 1.0,
        Orientation::Cw => -1.0,
    };
    let total = spec.steps * spec.windings;
    let mut pts = Vec::with_capacity(total + 1);
    for k in 0..=total {
        let theta = sign * 2.0 * PI * (k % spec.steps) as f64 / spec.steps as f64;
        pts.push(ParamPoint::new(
            spec.center.lambda + spec.radius_lambda * theta.cos(),
            spec.center.omega + spec.radius_omega * theta.sin(),
        ));
    }
    Ok(pts)
}

/// End-of-loop branches expressed in the start basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyResult {
    /// matrix[i][j] = c-product of start-branch i's vector with end-branch j's vector.
    pub matrix: [[Complex64; 2]; 2],
    pub permutation: Permutation,
    /// Dominant entry per returning branch, normalized to unit modulus.
    pub phase_factors: [Complex64; 2],
    /// Per returning branch, in (-pi, pi]. For swap loops: half the argument
    /// of the corresponding diagonal of M^2 (convention-dependent attribution).
    pub geometric_phases: [f64; 2],
    /// Largest magnitude among the suppressed entries.
    pub residual_off_diagonal: f64,
    /// Base point (loop seam) the gauge is anchored at.
    pub base: ParamPoint,
}

/// Argument in (-pi, pi], nudging the -pi boundary up to +pi.
fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a < -PI + 1e-9 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn mat_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::from(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn classify(matrix: [[Complex64; 2]; 2], base: ParamPoint) -> MonodromyResult {
    let diag = matrix[0][0].norm() + matrix[1][1].norm();
    let off = matrix[0][1].norm() + matrix[1][0].norm();
    let permutation = if diag >= off {
        Permutation::Identity
    } else {
        Permutation::Swap
    };

    let (dominant, residual) = match permutation {
        Permutation::Identity => (
            [matrix[0][0], matrix[1][1]],
            matrix[0][1].norm().max(matrix[1][0].norm()),
        ),
        Permutation::Swap => {
            // End-branch j lands on start-branch sigma(j).
            (
                [matrix[1][0], matrix[0][1]],
                matrix[0][0].norm().max(matrix[1][1].norm()),
            )
        }
    };
    let phase_factors = [
        dominant[0] / dominant[0].norm(),
        dominant[1] / dominant[1].norm(),
    ];

    let geometric_phases = match permutation {
        Permutation::Identity => [principal_arg(matrix[0][0]), principal_arg(matrix[1][1])],
        Permutation::Swap => {
            let m2 = mat_mul(&matrix, &matrix);
            [0.5 * principal_arg(m2[0][0]), 0.5 * principal_arg(m2[1][1])]
        }
    };

    MonodromyResult {
        matrix,
        permutation,
        phase_factors,
        geometric_phases,
        residual_off_diagonal: residual,
        base,
    }
}

/// Trace the loop and extract its monodromy, default tracker options.
pub fn monodromy(params: &ModelParams, spec: &LoopSpec) -> Result<MonodromyResult, LoopError> {
    monodromy_with_opts(params, spec, &TrackOptions::default())
}

pub fn monodromy_with_opts(
    params: &ModelParams,
    spec: &LoopSpec,
    opts: &TrackOptions,
) -> Result<MonodromyResult, LoopError> {
    let path = make_loop(spec)?;
    let tracked = trace_path(params, &path, opts)?;
    let start = tracked.first();
    if start[0].self_orthogonal || start[1].self_orthogonal {
        return Err(LoopError::DegenerateBasis);
    }
    let end = tracked.last();
    let mut matrix = [[Complex64::from(0.0); 2]; 2];
    for (i, s) in start.iter().enumerate() {
        for (j, e) in end.iter().enumerate() {
            matrix[i][j] = c_product(&s.vec, &e.vec);
        }
    }
    Ok(classify(matrix, path[0]))
}

/// Apply `m1` then `m2` (same base point and gauge required).
pub fn compose(m1: &MonodromyResult, m2: &MonodromyResult) -> Result<MonodromyResult, LoopError> {
    let db = (m1.base.lambda - m2.base.lambda)
        .abs()
        .max((m1.base.omega - m2.base.omega).abs());
    if db > 1e-12 {
        return Err(LoopError::GaugeMismatch);
    }
    Ok(classify(mat_mul(&m2.matrix, &m1.matrix), m1.base))
}

/// Holonomy phase of one branch over a path that returns it to itself.
pub fn geometric_phase(tracked: &TrackedPath, branch_index: usize) -> Result<f64, LoopError> {
    assert!(branch_index < 2, "branch index must be 0 or 1");
    if tracked.net_permutation() != Permutation::Identity {
        return Err(LoopError::BranchNotClosed);
    }
    let first = &tracked.first()[branch_index];
    let last = &tracked.last()[branch_index];
    Ok(principal_arg(c_product(&first.vec, &last.vec)))
}

/// The four headline encircling experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preset {
    EpOnce,
    EpTwice,
    EpReversed,
    DpOnce,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::EpOnce,
        Preset::EpTwice,
        Preset::EpReversed,
        Preset::DpOnce,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::EpOnce => "EpOnce",
            Preset::EpTwice => "EpTwice",
            Preset::EpReversed => "EpReversed",
            Preset::DpOnce => "DpOnce",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.to_ascii_lowercase().as_str() {
            "eponce" => Ok(Preset::EpOnce),
            "eptwice" => Ok(Preset::EpTwice),
            "epreversed" => Ok(Preset::EpReversed),
            "dponce" => Ok(Preset::DpOnce),
            _ => Err(format!(
                "unknown preset `{s}` (expected EpOnce, EpTwice, EpReversed or DpOnce)"
            )),
        }
    }
}

/// One named check of a preset verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictCheck {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl VerdictCheck {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

/// Monodromy of a preset loop plus the verdict against its expected pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetReport {
    pub preset: Preset,
    pub spec: LoopSpec,
    pub result: MonodromyResult,
    pub expected: &'static str,
    pub checks: Vec<VerdictCheck>,
    pub passed: bool,
}

fn max_entry_dev(m: &[[Complex64; 2]; 2], target: &[[Complex64; 2]; 2]) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            dev = dev.max((m[i][j] - target[i][j]).norm());
        }
    }
    dev
}

fn identity_matrix() -> [[Complex64; 2]; 2] {
    [
        [Complex64::from(1.0), Complex64::from(0.0)],
        [Complex64::from(0.0), Complex64::from(1.0)],
    ]
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d = 2.0 * PI - d;
    }
    d
}

fn ep_preset_spec(
    params: &ModelParams,
    steps: usize,
    orientation: Orientation,
    windings: usize,
) -> Result<LoopSpec, LoopError> {
    let eps = ep_locations(params).map_err(|_| {
        LoopError::PresetPreconditionViolated("EP presets need b1 != b2 and gamma1 != gamma2")
    })?;
    let center = eps[0]; // positive-omega EP
    let omega_cr = center.omega.abs();
    // Keep clear of the mirror EP and the DP: 0.4 of the distance down to omega = 0.
    let radius = 0.4 * omega_cr;
    Ok(LoopSpec {
        center,
        radius_lambda: radius,
        radius_omega: radius,
        steps,
        orientation,
        windings,
    })
}

/// Run one preset experiment at `steps` points per winding.
pub fn run_preset(
    params: &ModelParams,
    which: Preset,
    steps: usize,
) -> Result<PresetReport, LoopError> {
    match which {
        Preset::EpOnce => {
            let spec = ep_preset_spec(params, steps, Orientation::Ccw, 1)?;
            let result = monodromy(params, &spec)?;
            let m = &result.matrix;
            let trace = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let checks = vec![
                VerdictCheck::new(
                    "permutation_is_swap",
                    if result.permutation == Permutation::Swap {
                        0.0
                    } else {
                        1.0
                    },
                    0.5,
                ),
                VerdictCheck::new("abs_trace", trace.norm(), VERDICT_TOL),
                VerdictCheck::new("abs_det_plus_one", (det + 1.0).norm(), VERDICT_TOL),
            ];
            let passed = checks.iter().all(|c| c.passed);
            Ok(PresetReport {
                preset: which,
                spec,
                result,
                expected:
                    "swap with trace(M) = 0 and det(M) = -1 (psi1 -> -i psi2, psi2 -> +i psi1)",
                checks,
                passed,
            })
        }
        Preset::EpTwice => {
            let spec = ep_preset_spec(params, steps, Orientation::Ccw, 2)?;
            let result = monodromy(params, &spec)?;
            let checks = vec![VerdictCheck::new(
                "max_dev_from_identity",
                max_entry_dev(&result.matrix, &identity_matrix()),
                VERDICT_TOL,
            )];
            let passed = checks.iter().all(|c| c.passed);
            Ok(PresetReport {
                preset: which,
                spec,
                result,
                expected: "M = I (two surroundings restore the wave functions including phases)",
                checks,
                passed,
            })
        }
        Preset::EpReversed => {
            let spec = ep_preset_spec(params, steps, Orientation::Cw, 1)?;
            let result = monodromy(params, &spec)?;
            let ccw_spec = ep_preset_spec(params, steps, Orientation::Ccw, 1)?;
            let ccw = monodromy(params, &ccw_spec)?;
            let product = mat_mul(&result.matrix, &ccw.matrix);
            let checks = vec![VerdictCheck::new(
                "max_dev_cw_times_ccw_from_identity",
                max_entry_dev(&product, &identity_matrix()),
                VERDICT_TOL,
            )];
            let passed = checks.iter().all(|c| c.passed);
            Ok(PresetReport {
                preset: which,
                spec,
                result,
                expected: "inverse of the CCW monodromy (psi1 -> +i psi2, psi2 -> -i psi1)",
                checks,
                passed,
            })
        }
        Preset::DpOnce => {
            if params.gamma1 != params.gamma2 {
                return Err(LoopError::PresetPreconditionViolated(
                    "DpOnce needs gamma1 == gamma2",
                ));
            }
            let lcr = crossing_lambda(params)
                .map_err(|_| LoopError::PresetPreconditionViolated("DpOnce needs b1 != b2"))?;
            let spec = LoopSpec::circle(ParamPoint::new(lcr, 0.0), 0.1, steps);
            let result = monodromy(params, &spec)?;
            let minus_i = [
                [Complex64::from(-1.0), Complex64::from(0.0)],
                [Complex64::from(0.0), Complex64::from(-1.0)],
            ];
            let checks = vec![
                VerdictCheck::new(
                    "max_dev_from_minus_identity",
                    max_entry_dev(&result.matrix, &minus_i),
                    VERDICT_TOL,
                ),
                VerdictCheck::new(
                    "geometric_phase_1_dev_from_pi",
                    angular_distance(result.geometric_phases[0], PI),
                    PHASE_TOL,
                ),
                VerdictCheck::new(
                    "geometric_phase_2_dev_from_pi",
                    angular_distance(result.geometric_phases[1], PI),
                    PHASE_TOL,
                ),
            ];
            let passed = checks.iter().all(|c| c.passed);
            Ok(PresetReport {
                preset: which,
                spec,
                result,
                expected: "M = -I with geometric (Berry) phase pi on both branches",
                checks,
                passed,
            })
        }
    }
}
