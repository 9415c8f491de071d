//! Run configuration: one JSON document per run, strictly parsed
//! (unknown keys rejected, every numeric field finite by construction of
//! JSON itself).

use std::path::Path;

use serde::Deserialize;

use branchpoint_core::{ModelParams, Orientation, ParamPoint};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<ModelParamsConfig>,
    /// Couplings to classify (cmd classify).
    pub omegas: Option<Vec<f64>>,
    /// Newton seed (cmd find-ep).
    pub seed: Option<PointConfig>,
    /// Newton iteration cap (cmd find-ep).
    pub max_iters: Option<usize>,
    #[serde(rename = "loop")]
    pub loop_spec: Option<LoopConfig>,
    pub segment: Option<SegmentConfig>,
    pub sweep: Option<SweepConfig>,
    pub tracker: Option<TrackerConfig>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParamsConfig {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub lambda: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub center_lambda: f64,
    pub center_omega: f64,
    pub radius_lambda: f64,
    pub radius_omega: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_orientation")]
    pub orientation: Orientation,
    #[serde(default = "default_windings")]
    pub windings: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub omega: f64,
    #[serde(default = "default_segment_steps")]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_lambda: usize,
    pub n_omega: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    pub ep_guard: Option<f64>,
    pub max_jump: Option<f64>,
    pub max_depth: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub format: Option<String>,
}

fn default_steps() -> usize {
    2000
}

fn default_orientation() -> Orientation {
    Orientation::Ccw
}

fn default_windings() -> usize {
    1
}

fn default_segment_steps() -> usize {
    400
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| format!("invalid config {}: {e}", p.display()))
            }
        }
    }

    pub fn model_params(&self) -> Result<ModelParams, String> {
        match &self.model {
            None => Ok(ModelParams::reference()),
            Some(m) => ModelParams::new(m.a1, m.b1, m.a2, m.b2, m.gamma1, m.gamma2)
                .map_err(|e| format!("invalid model block: {e}")),
        }
    }

    pub fn seed_point(&self) -> ParamPoint {
        match &self.seed {
            Some(s) => ParamPoint::new(s.lambda, s.omega),
            None => ParamPoint::new(0.1, 0.3),
        }
    }

    pub fn tracker_options(&self) -> branchpoint_core::TrackOptions {
        let mut opts = branchpoint_core::TrackOptions::default();
        if let Some(t) = &self.tracker {
            if let Some(g) = t.ep_guard {
                opts.ep_guard = g;
            }
            if let Some(j) = t.max_jump {
                opts.max_jump = j;
            }
            if let Some(d) = t.max_depth {
                opts.max_depth = d;
            }
        }
        opts
    }
}
