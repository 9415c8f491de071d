//! Direct 2x2 non-Hermitian eigensolver and adiabatic branch continuation.
//!
//! Eigenvectors carry the c-product (bilinear, unconjugated) normalization
//! v.v = 1 wherever that is possible; near an exceptional point, where the
//! eigenvector becomes self-orthogonal (v.v -> 0), the solver falls back to
//! Euclidean normalization and flags the branch. Continuation along a path
//! matches branches by complex-energy distance, fixes phases by c-parallel
//! transport (overlap with the previous vector real and positive) and
//! refines steps adaptively near the branch point.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{discriminant, hamiltonian, CMatrix2, ModelParams, ParamPoint};

/// |v.v| below this (for Euclidean-normalized v) marks a branch self-orthogonal.
pub const SELF_ORTH_THRESHOLD: f64 = 1e-8;
/// Off-diagonal asymmetry tolerance for `solve_eigen` input.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Energy-total tie tolerance in `match_branches`.
pub const MATCH_TIE_TOL: f64 = 1e-14;
/// Minimum |prev.v . next.v| for a transport step.
pub const TRANSPORT_MIN_OVERLAP: f64 = 1e-12;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TrackError {
    #[error("matrix is not complex symmetric within tolerance")]
    NotSymmetric,
    #[error("non-finite matrix entry or path point")]
    NonFinite,
    #[error("branch matching ambiguous: step lands too close to the EP")]
    AmbiguousMatch,
    #[error("transport overlap below threshold: step too large")]
    OrthogonalStep,
    #[error("cannot phase-transport onto a self-orthogonal branch")]
    SelfOrthogonalBranch,
    #[error("path passes numerically through the branch point")]
    PathThroughEp,
    #[error("invalid path: {0}")]
    BadPath(&'static str),
}

/// One eigenpair with its normalization bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub energy: Complex64,
    pub vec: [Complex64; 2],
    /// v.v (bilinear, no conjugation) of the stored vector.
    pub c_norm: Complex64,
    /// True when the eigenvector is (numerically) self-orthogonal and the
    /// stored vector is Euclidean-normalized instead of c-normalized.
    pub self_orthogonal: bool,
}

/// Pairing of two branch lists across a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Permutation {
    Identity,
    Swap,
}

impl Permutation {
    pub fn apply(self, pair: [Branch; 2]) -> [Branch; 2] {
        match self {
            Permutation::Identity => pair,
            Permutation::Swap => [pair[1], pair[0]],
        }
    }

    pub fn compose(self, other: Permutation) -> Permutation {
        if self == other {
            Permutation::Identity
        } else {
            Permutation::Swap
        }
    }
}

/// Per-step record: the change of branch pairing relative to the previous
/// step (so the composition over a path is the net branch exchange) and the
/// unit phase factors applied by parallel transport.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportStep {
    pub permutation: Permutation,
    pub phases: [Complex64; 2],
}

/// Result of tracing both eigenbranches along a (possibly refined) path.
#[derive(Debug, Clone)]
pub struct TrackedPath {
    pub points: Vec<ParamPoint>,
    pub branches: Vec<[Branch; 2]>,
    pub transport_log: Vec<TransportStep>,
}

impl TrackedPath {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &[Branch; 2] {
        &self.branches[0]
    }

    pub fn last(&self) -> &[Branch; 2] {
        self.branches.last().expect("tracked path is never empty")
    }

    /// Net branch pairing accumulated over all steps.
    pub fn net_permutation(&self) -> Permutation {
        self.transport_log
            .iter()
            .fold(Permutation::Identity, |acc, s| acc.compose(s.permutation))
    }
}

/// Adaptive-refinement knobs for `trace_path`.
#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    /// Refine (and ultimately fail) when |F| at a step endpoint is below this.
    pub ep_guard: f64,
    /// Maximum per-step energy jump relative to the local matrix scale.
    pub max_jump: f64,
    /// Maximum midpoint-insertion depth before PathThroughEp.
    pub max_depth: u32,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            ep_guard: 1e-6,
            max_jump: 0.1,
            max_depth: 20,
        }
    }
}

/// Bilinear c-product a.b (no conjugation).
pub fn c_product(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1]
}

fn euclid_norm_sqr(v: &[Complex64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn matrix_scale(m: &CMatrix2) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0_f64, f64::max)
}

/// |v.v| / (v*.v): 1 for real vectors, 0 at the exceptional point.
pub fn self_orthogonality_measure(branch: &Branch) -> f64 {
    let v = &branch.vec;
    c_product(v, v).norm() / euclid_norm_sqr(v)
}

/// Solve the complex symmetric 2x2 eigenproblem.
///
/// Energies come from the characteristic quadratic with the numerically
/// stable split (larger root directly, the other via the product identity);
/// eigenvectors are the larger column of the adjugate of (H - E I).
pub fn solve_eigen(m: &CMatrix2) -> Result<[Branch; 2], TrackError> {
    if m.iter()
        .flatten()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(TrackError::NonFinite);
    }
    let scale = matrix_scale(m);
    if (m[0][1] - m[1][0]).norm() > SYMMETRY_TOL * scale.max(1.0) {
        return Err(TrackError::NotSymmetric);
    }

    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let mut s = (tr * tr - 4.0 * det).sqrt();
    // Sign choice avoids cancellation in tr + s.
    if (tr.conj() * s).re < 0.0 {
        s = -s;
    }
    let e1 = 0.5 * (tr + s);
    let e2 = if e1.norm() > 0.0 { det / e1 } else { tr - e1 };

    let b1 = make_branch(m, e1, 0);
    let b2 = make_branch(m, e2, 1);
    Ok([b1, b2])
}

fn make_branch(m: &CMatrix2, energy: Complex64, index: usize) -> Branch {
    let a = [[m[0][0] - energy, m[0][1]], [m[1][0], m[1][1] - energy]];
    // adj(A) columns span the nullspace of A when det(A) = 0.
    let col1 = [a[1][1], -a[1][0]];
    let col2 = [-a[0][1], a[0][0]];
    let n1 = euclid_norm_sqr(&col1);
    let n2 = euclid_norm_sqr(&col2);
    let mut v = if n1 >= n2 { col1 } else { col2 };
    if n1.max(n2) == 0.0 {
        // H is a multiple of the identity: any basis works.
        v = [Complex64::from(0.0), Complex64::from(0.0)];
        v[index] = Complex64::from(1.0);
    }

    let eu2 = euclid_norm_sqr(&v);
    let cn = c_product(&v, &v);
    let self_orthogonal = cn.norm() < SELF_ORTH_THRESHOLD * eu2;
    let denom = if self_orthogonal {
        Complex64::from(eu2.sqrt())
    } else {
        cn.sqrt()
    };
    let v = [v[0] / denom, v[1] / denom];
    Branch {
        energy,
        vec: v,
        c_norm: c_product(&v, &v),
        self_orthogonal,
    }
}

/// Pairing of `next` against `prev` minimizing total complex-energy distance,
/// with the summed |c-product overlap| as tie-break.
pub fn match_branches(prev: &[Branch; 2], next: &[Branch; 2]) -> Result<Permutation, TrackError> {
    let d_id = (next[0].energy - prev[0].energy).norm() + (next[1].energy - prev[1].energy).norm();
    let d_sw = (next[1].energy - prev[0].energy).norm() + (next[0].energy - prev[1].energy).norm();
    if (d_id - d_sw).abs() >= MATCH_TIE_TOL {
        return Ok(if d_id < d_sw {
            Permutation::Identity
        } else {
            Permutation::Swap
        });
    }
    let o_id =
        c_product(&prev[0].vec, &next[0].vec).norm() + c_product(&prev[1].vec, &next[1].vec).norm();
    let o_sw =
        c_product(&prev[0].vec, &next[1].vec).norm() + c_product(&prev[1].vec, &next[0].vec).norm();
    if (o_id - o_sw).abs() < MATCH_TIE_TOL {
        return Err(TrackError::AmbiguousMatch);
    }
    Ok(if o_id > o_sw {
        Permutation::Identity
    } else {
        Permutation::Swap
    })
}

/// Multiply `next.vec` by the unit-modulus factor making prev.vec . next.vec
/// real and positive.
pub fn transport_phase(prev: &Branch, next: &Branch) -> Result<(Branch, Complex64), TrackError> {
    if next.self_orthogonal {
        return Err(TrackError::SelfOrthogonalBranch);
    }
    let p = c_product(&prev.vec, &next.vec);
    if p.norm() < TRANSPORT_MIN_OVERLAP {
        return Err(TrackError::OrthogonalStep);
    }
    let phase = p.conj() / p.norm();
    let vec = [next.vec[0] * phase, next.vec[1] * phase];
    let out = Branch {
        energy: next.energy,
        vec,
        c_norm: c_product(&vec, &vec),
        self_orthogonal: false,
    };
    Ok((out, phase))
}

enum Advance {
    Step(Box<([Branch; 2], TransportStep)>),
    Refine,
}

fn advance(
    params: &ModelParams,
    cur: &[Branch; 2],
    target: ParamPoint,
    opts: &TrackOptions,
    align: &mut Permutation,
) -> Result<Advance, TrackError> {
    let h = hamiltonian(params, target);
    let next = solve_eigen(&h)?;
    // `perm` aligns the raw solver output with the continuation order; the
    // logged entry is its change relative to the previous step, so that the
    // composition over the whole path is the net branch exchange.
    let perm = match match_branches(cur, &next) {
        Ok(p) => p,
        Err(TrackError::AmbiguousMatch) => return Ok(Advance::Refine),
        Err(e) => return Err(e),
    };
    let ordered = perm.apply(next);

    let scale = matrix_scale(&h).max(1.0);
    for k in 0..2 {
        if (ordered[k].energy - cur[k].energy).norm() > opts.max_jump * scale {
            return Ok(Advance::Refine);
        }
    }

    let mut out = [ordered[0], ordered[1]];
    let mut phases = [Complex64::from(1.0); 2];
    for k in 0..2 {
        match transport_phase(&cur[k], &ordered[k]) {
            Ok((b, phase)) => {
                out[k] = b;
                phases[k] = phase;
            }
            Err(TrackError::OrthogonalStep) | Err(TrackError::SelfOrthogonalBranch) => {
                return Ok(Advance::Refine)
            }
            Err(e) => return Err(e),
        }
    }
    let delta = align.compose(perm);
    *align = perm;
    Ok(Advance::Step(Box::new((
        out,
        TransportStep {
            permutation: delta,
            phases,
        },
    ))))
}

#[allow(clippy::too_many_arguments)]
fn step_into(
    params: &ModelParams,
    target: ParamPoint,
    opts: &TrackOptions,
    depth: u32,
    points: &mut Vec<ParamPoint>,
    branches: &mut Vec<[Branch; 2]>,
    log: &mut Vec<TransportStep>,
    align: &mut Permutation,
) -> Result<(), TrackError> {
    let cur_pt = *points.last().expect("path starts non-empty");
    let near_ep = discriminant(params, cur_pt).norm() < opts.ep_guard
        || discriminant(params, target).norm() < opts.ep_guard;

    if !near_ep {
        let cur = *branches.last().expect("branches start non-empty");
        match advance(params, &cur, target, opts, align)? {
            Advance::Step(step) => {
                let (new_branches, entry) = *step;
                points.push(target);
                branches.push(new_branches);
                log.push(entry);
                return Ok(());
            }
            Advance::Refine => {}
        }
    }

    if depth >= opts.max_depth {
        return Err(TrackError::PathThroughEp);
    }
    let mid = ParamPoint::new(
        0.5 * (cur_pt.lambda + target.lambda),
        0.5 * (cur_pt.omega + target.omega),
    );
    if mid == cur_pt || mid == target {
        // No representable midpoint left.
        return Err(TrackError::PathThroughEp);
    }
    step_into(params, mid, opts, depth + 1, points, branches, log, align)?;
    step_into(
        params,
        target,
        opts,
        depth + 1,
        points,
        branches,
        log,
        align,
    )
}

/// Follow both eigenbranches along `path`, inserting midpoints adaptively.
pub fn trace_path(
    params: &ModelParams,
    path: &[ParamPoint],
    opts: &TrackOptions,
) -> Result<TrackedPath, TrackError> {
    if path.len() < 2 {
        return Err(TrackError::BadPath("path needs at least 2 points"));
    }
    for p in path {
        if !p.is_finite() {
            return Err(TrackError::NonFinite);
        }
    }
    for w in path.windows(2) {
        if w[0] == w[1] {
            return Err(TrackError::BadPath(
                "consecutive path points must be distinct",
            ));
        }
    }

    let first = solve_eigen(&hamiltonian(params, path[0]))?;
    let mut points = vec![path[0]];
    let mut branches = vec![first];
    let mut log = Vec::with_capacity(path.len() - 1);
    let mut align = Permutation::Identity;
    for target in &path[1..] {
        step_into(
            params,
            *target,
            opts,
            0,
            &mut points,
            &mut branches,
            &mut log,
            &mut align,
        )?;
    }
    Ok(TrackedPath {
        points,
        branches,
        transport_log: log,
    })
}
