use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use serde_json::{json, Value};

use branchpoint_core::model::{classify_regime_with_tol, critical_omega, REGIME_TOL};
use branchpoint_core::{
    crossing_lambda, discriminant, eigenvalues_closed_form, ep_locations,
    find_ep as newton_find_ep, make_loop, monodromy_with_opts, run_preset, trace_path, LoopSpec,
    ModelError, MonodromyResult, ParamPoint, Preset, PresetReport,
};

use crate::config::Config;
use crate::{CliError, CommonOpts, Format, FORMAT_VERSION};

pub type CommandFn = fn(&Config, &CommonOpts) -> Result<u8, CliError>;

fn out_dir(config: &Config, opts: &CommonOpts) -> PathBuf {
    if let Some(dir) = &opts.out {
        return dir.clone();
    }
    if let Some(o) = &config.output {
        if let Some(dir) = &o.dir {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

fn chosen_format(config: &Config, opts: &CommonOpts, default: Format) -> Result<Format, CliError> {
    if let Some(f) = opts.format {
        return Ok(f);
    }
    if let Some(o) = &config.output {
        if let Some(tag) = &o.format {
            return match tag.as_str() {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                other => Err(CliError::Config(format!(
                    "output.format must be \"csv\" or \"json\", got \"{other}\""
                ))),
            };
        }
    }
    Ok(default)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    info!("wrote {}", path.display());
    Ok(path)
}

fn json_complex(z: branchpoint_core::num_complex::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn json_point(p: ParamPoint) -> Value {
    json!({ "lambda": p.lambda, "omega": p.omega })
}

pub fn classify(config: &Config, opts: &CommonOpts) -> Result<u8, CliError> {
    let params = config.model_params().map_err(CliError::Config)?;
    let format = chosen_format(config, opts, Format::Csv)?;
    let lambda_cr = crossing_lambda(&params)?;
    let omega_cr = critical_omega(&params);
    let eps = match ep_locations(&params) {
        Ok(pair) => Some(pair),
        Err(ModelError::DegenerateToDP) => None,
        Err(e) => return Err(e.into()),
    };
    let omegas = config.omegas.clone().unwrap_or_default();
    let mut regimes = Vec::with_capacity(omegas.len());
    for &w in &omegas {
        regimes.push((w, classify_regime_with_tol(&params, w, REGIME_TOL)?));
    }

    if format == Format::Json {
        let report = json!({
            "lambda_cr": lambda_cr,
            "critical_omega": omega_cr,
            "exceptional_points": eps.map(|[p1, p2]| vec![json_point(p1), json_point(p2)]),
            "diabolic_point": if eps.is_none() { Some(json_point(ParamPoint::new(lambda_cr, 0.0))) } else { None },
            "regimes": regimes.iter().map(|(w, r)| json!({ "omega": w, "regime": r.to_string() })).collect::<Vec<_>>(),
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!("lambda_cr = {lambda_cr}");
        println!("critical_omega = {omega_cr}");
        match eps {
            Some([p1, p2]) => {
                println!("EP1 = ({}, {})", p1.lambda, p1.omega);
                println!("EP2 = ({}, {})", p2.lambda, p2.omega);
            }
            None => {
                println!("DegenerateToDP: gamma1 == gamma2, diabolic point at ({lambda_cr}, 0)")
            }
        }
        for (w, r) in &regimes {
            println!("omega = {w}: {r}");
        }
    }
    Ok(0)
}

pub fn find_ep(config: &Config, opts: &CommonOpts) -> Result<u8, CliError> {
    let params = config.model_params().map_err(CliError::Config)?;
    let format = chosen_format(config, opts, Format::Csv)?;
    let seed = config.seed_point();
    let max_iters = config.max_iters.unwrap_or(100);

    let numeric = newton_find_ep(&params, seed, max_iters, 1e-14)?;
    if numeric.f_abs >= 1e-10 {
        return Err(CliError::NoConvergence(format!(
            "|F| = {:e} at numeric optimum exceeds 1e-10",
            numeric.f_abs
        )));
    }
    let analytic = ep_locations(&params)?;
    // Nearest analytic EP to the converged point.
    let dist = |a: ParamPoint, b: ParamPoint| {
        ((a.lambda - b.lambda).powi(2) + (a.omega - b.omega).powi(2)).sqrt()
    };
    let nearest = if dist(numeric.point, analytic[0]) <= dist(numeric.point, analytic[1]) {
        analytic[0]
    } else {
        analytic[1]
    };
    let distance = dist(numeric.point, nearest);

    if format == Format::Json {
        let report = json!({
            "seed": json_point(seed),
            "numeric": json_point(numeric.point),
            "analytic": json_point(nearest),
            "distance": distance,
            "abs_f_at_numeric": numeric.f_abs,
            "iterations": numeric.iters,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!("seed = ({}, {})", seed.lambda, seed.omega);
        println!(
            "numeric EP = ({}, {})",
            numeric.point.lambda, numeric.point.omega
        );
        println!("analytic EP = ({}, {})", nearest.lambda, nearest.omega);
        println!("distance = {distance}");
        println!("|F| at numeric optimum = {}", numeric.f_abs);
        println!("iterations = {}", numeric.iters);
    }
    Ok(0)
}

pub fn trace(config: &Config, opts: &CommonOpts) -> Result<u8, CliError> {
    let params = config.model_params().map_err(CliError::Config)?;
    let track_opts = config.tracker_options();
    let path: Vec<ParamPoint> = match (&config.segment, &config.loop_spec) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "config must contain exactly one of `segment` or `loop`, not both".into(),
            ))
        }
        (Some(seg), None) => {
            if seg.lambda_min >= seg.lambda_max {
                return Err(CliError::Config(
                    "segment needs lambda_min < lambda_max".into(),
                ));
            }
            let steps = opts.steps.unwrap_or(seg.steps).max(1);
            (0..=steps)
                .map(|k| {
                    let t = k as f64 / steps as f64;
                    ParamPoint::new(
                        seg.lambda_min + t * (seg.lambda_max - seg.lambda_min),
                        seg.omega,
                    )
                })
                .collect()
        }
        (None, Some(lp)) => {
            let spec = LoopSpec {
                center: ParamPoint::new(lp.center_lambda, lp.center_omega),
                radius_lambda: lp.radius_lambda,
                radius_omega: lp.radius_omega,
                steps: opts.steps.unwrap_or(lp.steps),
                orientation: lp.orientation,
                windings: lp.windings,
            };
            make_loop(&spec)?
        }
        (None, None) => {
            return Err(CliError::Config(
                "trace needs a `segment` or `loop` block in the config".into(),
            ))
        }
    };

    let tracked = trace_path(&params, &path, &track_opts)?;
    let mut csv = String::new();
    csv.push_str(FORMAT_VERSION);
    csv.push('\n');
    csv.push_str(
        "step,lambda,omega,reE1,imE1,reE2,imE2,rev1a,imv1a,rev1b,imv1b,rev2a,imv2a,rev2b,imv2b,selfOrth1,selfOrth2\n",
    );
    for (k, (pt, pair)) in tracked.points.iter().zip(&tracked.branches).enumerate() {
        let [b1, b2] = pair;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            k,
            pt.lambda,
            pt.omega,
            b1.energy.re,
            b1.energy.im,
            b2.energy.re,
            b2.energy.im,
            b1.vec[0].re,
            b1.vec[0].im,
            b1.vec[1].re,
            b1.vec[1].im,
            b2.vec[0].re,
            b2.vec[0].im,
            b2.vec[1].re,
            b2.vec[1].im,
            u8::from(b1.self_orthogonal),
            u8::from(b2.self_orthogonal),
        )
        .expect("string write cannot fail");
    }
    write_file(&out_dir(config, opts), "trace.csv", &csv)?;
    Ok(0)
}

fn monodromy_json(result: &MonodromyResult) -> Value {
    json!({
        "matrix": result.matrix.iter()
            .map(|row| row.iter().copied().map(json_complex).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "permutation": match result.permutation {
            branchpoint_core::Permutation::Identity => "identity",
            branchpoint_core::Permutation::Swap => "swap",
        },
        "phase_factors": result.phase_factors.iter().copied().map(json_complex).collect::<Vec<_>>(),
        "geometric_phases": result.geometric_phases,
        "residual_off_diagonal": result.residual_off_diagonal,
        "base": json_point(result.base),
    })
}

fn preset_json(report: &PresetReport) -> Value {
    json!({
        "preset": report.preset.name(),
        "loop": {
            "center": json_point(report.spec.center),
            "radius_lambda": report.spec.radius_lambda,
            "radius_omega": report.spec.radius_omega,
            "steps": report.spec.steps,
            "windings": report.spec.windings,
        },
        "monodromy": monodromy_json(&report.result),
        "verdict": {
            "expected": report.expected,
            "checks": report.checks.iter().map(|c| json!({
                "name": c.name,
                "value": c.value,
                "tolerance": c.tolerance,
                "passed": c.passed,
            })).collect::<Vec<_>>(),
            "passed": report.passed,
        },
    })
}

pub fn monodromy(config: &Config, opts: &CommonOpts) -> Result<u8, CliError> {
    let params = config.model_params().map_err(CliError::Config)?;
    let track_opts = config.tracker_options();

    let (report, exit) = if let Some(name) = &opts.preset {
        let preset: Preset = name.parse().map_err(CliError::Config)?;
        let steps = opts.steps.unwrap_or(2000);
        let preset_report = run_preset(&params, preset, steps)?;
        let exit = u8::from(!preset_report.passed);
        (preset_json(&preset_report), exit)
    } else {
        let lp = config.loop_spec.as_ref().ok_or_else(|| {
            CliError::Config("monodromy needs --preset or a `loop` block in the config".into())
        })?;
        let spec = LoopSpec {
            center: ParamPoint::new(lp.center_lambda, lp.center_omega),
            radius_lambda: lp.radius_lambda,
            radius_omega: lp.radius_omega,
            steps: opts.steps.unwrap_or(lp.steps),
            orientation: lp.orientation,
            windings: lp.windings,
        };
        let result = monodromy_with_opts(&params, &spec, &track_opts)?;
        (monodromy_json(&result), 0)
    };

    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    if opts.out.is_some() || config.output.as_ref().is_some_and(|o| o.dir.is_some()) {
        write_file(&out_dir(config, opts), "monodromy.json", &text)?;
    }
    Ok(exit)
}

pub fn sweep(config: &Config, opts: &CommonOpts) -> Result<u8, CliError> {
    let params = config.model_params().map_err(CliError::Config)?;
    let grid = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a `sweep` block in the config".into()))?;
    if !(grid.lambda_min < grid.lambda_max && grid.omega_min < grid.omega_max) {
        return Err(CliError::Config(
            "sweep grid needs min < max on both axes".into(),
        ));
    }
    if grid.n_lambda < 2 || grid.n_omega < 2 {
        return Err(CliError::Config(
            "sweep grid needs at least 2 points per axis".into(),
        ));
    }

    let mut csv = String::new();
    csv.push_str(FORMAT_VERSION);
    csv.push('\n');
    csv.push_str("lambda,omega,reF,imF,reEplus,imEplus,reEminus,imEminus,regime\n");
    // Row-major, omega fastest.
    for i in 0..grid.n_lambda {
        let lam = grid.lambda_min
            + i as f64 * (grid.lambda_max - grid.lambda_min) / (grid.n_lambda - 1) as f64;
        for j in 0..grid.n_omega {
            let om = grid.omega_min
                + j as f64 * (grid.omega_max - grid.omega_min) / (grid.n_omega - 1) as f64;
            let p = ParamPoint::new(lam, om);
            let f = discriminant(&params, p);
            let pair = eigenvalues_closed_form(&params, p);
            let regime = if f.re > REGIME_TOL {
                "over"
            } else if f.re < -REGIME_TOL {
                "sub"
            } else {
                "crit"
            };
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                lam,
                om,
                f.re,
                f.im,
                pair.e_plus.re,
                pair.e_plus.im,
                pair.e_minus.re,
                pair.e_minus.im,
                regime
            )
            .expect("string write cannot fail");
        }
    }
    write_file(&out_dir(config, opts), "sweep.csv", &csv)?;
    Ok(0)
}
