//! Numerical laboratory for a two-level non-Hermitian model: closed-form
//! spectral data and regime classification, a direct 2x2 eigensolver with
//! adaptive branch tracking, and monodromy / geometric-phase computation
//! for closed loops in the (lambda, omega) control plane.

pub use num_complex;

pub mod loops;
pub mod model;
pub mod search;
pub mod tracker;

pub use loops::{
    compose, geometric_phase, make_loop, monodromy, monodromy_with_opts, run_preset, LoopError,
    LoopSpec, MonodromyResult, Orientation, Preset, PresetReport, VerdictCheck,
};
pub use model::{
    classify_regime, crossing_lambda, discriminant, eigenvalues_closed_form, ep_locations,
    hamiltonian, CMatrix2, ComplexEnergyPair, ModelError, ModelParams, ParamPoint, Regime,
};
pub use search::{find_ep, EpSearchResult, SearchError};
pub use tracker::{
    match_branches, self_orthogonality_measure, solve_eigen, trace_path, transport_phase, Branch,
    Permutation, TrackError, TrackOptions, TrackedPath,
};
