// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ftps_core::buffer::{
    distill_chain, prep_error, required_capacity, target_magic_error, Capacity, DistillationSpec, Distilled,
    ALG_CONSTANT,
};
use ftps_core::exec::Execution;
use ftps_core::experiment::{
    breakeven, curves_csv, default_kappa_grid, diagnostics_csv, eer_curve, estimate_threshold, gap_sector_boundaries,
    run_trials_on, score_diagnostics, signed_gap_eer, trials_jsonl, write_text, ThresholdEstimate,
};
use ftps_core::geometry::{build_block, validate_block, BlockKind, BlockParams};
use ftps_core::noise::{ErrorModel, ErrorRay};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{CalibrationConfig, NoisePlan, RunConfig};
use crate::failure::{Failure, FailureKind};

/// Prints to stdout, ignoring a closed pipe.
fn print_stdout(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn progress(msg: &str) {
    eprintln!("ftps: {msg}");
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = flag
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| Failure::config("no output directory: pass --out or set `out`"))?;
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(FailureKind::Io, e))?;
    text.push('\n');
    write_text(path, &text)?;
    Ok(())
}

fn threshold_csv(est: &ThresholdEstimate) -> String {
    let mut s = String::from("ray,distance,x,rate,stderr,n\n");
    for scan in &est.scans {
        for p in &scan.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                est.ray, scan.distance, p.x, p.rate, p.stderr, p.n
            );
        }
    }
    s
}

fn run_calibration(
    ray: ErrorRay,
    cal: &CalibrationConfig,
    seed: u64,
    exec: Execution,
) -> Result<ThresholdEstimate, Failure> {
    progress(&format!(
        "calibrating {ray} on sizes {:?}, {} points x {} trials",
        cal.sizes,
        cal.grid.len(),
        cal.n_per_point
    ));
    Ok(estimate_threshold(
        &cal.sizes,
        ray,
        &cal.grid,
        cal.n_per_point,
        seed,
        exec,
    )?)
}

pub fn calibrate(config: &Path, seed: Option<u64>, out: Option<PathBuf>, exec: Execution) -> Result<(), Failure> {
    let cfg = RunConfig::load(config)?;
    let (ray, cal) = cfg
        .calibration()?
        .ok_or_else(|| Failure::config("calibrate needs a [calibration] table"))?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let dir = out_dir(out, &cfg)?;
    let est = run_calibration(ray, &cal, seed, exec)?;
    write_json(&dir.join("threshold.json"), &est)?;
    write_text(&dir.join("threshold.csv"), &threshold_csv(&est))?;
    write_json(
        &dir.join("summary.json"),
        &json!({
            "command": "calibrate",
            "config": cfg,
            "master_seed": seed,
            "ray": ray,
            "threshold": est.p_star,
            "crossings": est.crossings,
            "spread": est.spread,
            "stable": est.stable,
        }),
    )?;
    match est.p_star {
        Some(p) => progress(&format!("threshold {p:.6} (stable: {})", est.stable)),
        None => progress("no crossing found in the grid"),
    }
    Ok(())
}

/// One error point of a run.
struct Point {
    fraction: Option<f64>,
    x: Option<f64>,
    model: ErrorModel,
}

pub fn run(
    config: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    kappa_flag: Option<Vec<f64>>,
    exec: Execution,
) -> Result<(), Failure> {
    let cfg = RunConfig::load(config)?;
    let params = cfg.block()?;
    let n_trials = cfg.n_trials.ok_or_else(|| Failure::config("missing `n_trials`"))?;
    if cfg.rules.is_empty() {
        return Err(Failure::config("no [[rules]] given"));
    }
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let kappa_grid = kappa_flag.or_else(|| cfg.kappa_grid.clone());
    if let Some(p) = cfg.p_init {
        if !(0.0..=1.0).contains(&p) {
            return Err(Failure::config(format!("p_init {p} is not a probability")));
        }
    }
    let plan = cfg.noise_plan()?;

    // Resolve the threshold before any preparation trials run.
    let mut threshold = serde_json::Value::Null;
    let points = match &plan {
        NoisePlan::Explicit(m) => vec![Point {
            fraction: None,
            x: None,
            model: *m,
        }],
        NoisePlan::Fractions {
            ray,
            fractions,
            threshold: inline,
        } => {
            let x_star = match (inline, cfg.calibration()?) {
                (Some(t), _) => {
                    threshold = json!({ "source": "inline", "value": t, "ray": ray });
                    *t
                }
                (None, Some((cal_ray, cal))) => {
                    let est = run_calibration(cal_ray, &cal, seed, exec)?;
                    let t = est.p_star.ok_or_else(|| {
                        Failure::new(
                            FailureKind::MissingThreshold,
                            "calibration found no threshold crossing in its grid",
                        )
                    })?;
                    threshold = json!({ "source": "calibration", "value": t, "ray": ray, "estimate": est });
                    t
                }
                (None, None) => {
                    return Err(Failure::new(
                        FailureKind::MissingThreshold,
                        "fraction mode needs a threshold: set noise.threshold or add a [calibration] table",
                    ))
                }
            };
            fractions
                .iter()
                .map(|&f| {
                    Ok(Point {
                        fraction: Some(f),
                        x: Some(f * x_star),
                        model: ray.model(f * x_star).map_err(Failure::config)?,
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?
        }
    };

    let dir = out_dir(out, &cfg)?;
    let graphs = build_block(params)?;
    validate_block(&graphs)
        .into_result()
        .map_err(|e| Failure::new(FailureKind::Validation, e))?;

    let mut breakeven_rows = String::from("rule,x,p_error,p_erasure,kappa_star,overhead\n");
    let mut point_summaries = Vec::new();
    for (i, point) in points.iter().enumerate() {
        progress(&format!(
            "point {}/{}: p_error {} p_erasure {}, {n_trials} trials",
            i + 1,
            points.len(),
            point.model.p_error,
            point.model.p_erasure
        ));
        let table = run_trials_on(&graphs, point.model, &cfg.rules, n_trials, seed, exec)?;
        let grid = match &kappa_grid {
            Some(g) => g.clone(),
            None => default_kappa_grid(table.n_trials(), &gap_sector_boundaries(&table)),
        };
        let curves = (0..cfg.rules.len())
            .map(|r| eer_curve(&table, r, &grid))
            .collect::<Result<Vec<_>, _>>()?;
        let diags: Vec<_> = (0..cfg.rules.len()).map(|r| score_diagnostics(&table, r)).collect();

        let point_dir = if points.len() == 1 {
            dir.clone()
        } else {
            dir.join(format!("point_{i:03}"))
        };
        fs::create_dir_all(&point_dir)?;
        write_text(&point_dir.join("trials.jsonl"), &trials_jsonl(&table))?;
        write_text(&point_dir.join("curves.csv"), &curves_csv(&curves))?;
        write_text(&point_dir.join("diagnostics.csv"), &diagnostics_csv(&diags))?;

        let p_init = cfg.p_init.unwrap_or(point.model.p_error);
        let rules: Vec<_> = curves
            .iter()
            .map(|c| {
                let b = breakeven(c, p_init);
                let x = point.x.unwrap_or(point.model.p_error);
                let _ = writeln!(
                    breakeven_rows,
                    "{},{x},{},{},{},{}",
                    c.rule,
                    point.model.p_error,
                    point.model.p_erasure,
                    b.map_or(String::new(), |b| b.kappa.to_string()),
                    b.map_or(String::new(), |b| b.overhead.to_string()),
                );
                json!({ "rule": c.rule, "breakeven": b })
            })
            .collect();
        point_summaries.push(json!({
            "index": i,
            "fraction": point.fraction,
            "x": point.x,
            "model": point.model,
            "p_init": p_init,
            "dir": point_dir.strip_prefix(&dir).unwrap_or(&point_dir),
            "eer": table.eer(),
            "signed_gap_eer": signed_gap_eer(&table),
            "rules": rules,
        }));
    }
    write_text(&dir.join("breakeven.csv"), &breakeven_rows)?;
    write_json(
        &dir.join("summary.json"),
        &json!({
            "command": "run",
            "config": cfg,
            "master_seed": seed,
            "n_trials": n_trials,
            "block": params,
            "kappa_grid": kappa_grid,
            "threshold": threshold,
            "points": point_summaries,
        }),
    )?;
    progress(&format!("wrote {}", dir.display()));
    Ok(())
}

/// Input of the `buffer` subcommand.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BufferRequest {
    pub kappa: f64,
    pub p_flush: f64,
    /// Defaults to the protocol's input count.
    #[serde(default)]
    pub m_in: Option<u64>,
    #[serde(default)]
    pub distillation: Option<DistillationSpec>,
    #[serde(default = "one")]
    pub rounds: usize,
    #[serde(default)]
    pub p_init: Option<f64>,
    #[serde(default)]
    pub p_enc: Option<f64>,
    #[serde(default)]
    pub n_t: Option<u64>,
    #[serde(default)]
    pub n_q: Option<u64>,
    #[serde(default)]
    pub eps_total: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Serialize)]
struct BufferReport {
    request: BufferRequest,
    capacity: Capacity,
    assumptions: [&'static str; 3],
    p_prep: Option<f64>,
    rounds: Vec<Distilled>,
    target: Option<Target>,
}

#[derive(Debug, Serialize)]
struct Target {
    p_target: f64,
    alg_constant: f64,
    /// First round whose output meets the target, counted from 1.
    rounds_needed: Option<usize>,
}

pub fn buffer(config: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let text =
        fs::read_to_string(config).map_err(|e| Failure::config(format!("cannot read {}: {e}", config.display())))?;
    let req: BufferRequest = serde_json::from_str(&text).map_err(Failure::config)?;
    let spec = req.distillation.unwrap_or(DistillationSpec::FIFTEEN_TO_ONE);
    let capacity = required_capacity(req.m_in.unwrap_or(spec.m_in), req.kappa, req.p_flush)?;
    let p_prep = match (req.p_init, req.p_enc) {
        (Some(i), Some(e)) => Some(prep_error(i, e)?),
        (None, None) => None,
        _ => return Err(Failure::config("p_init and p_enc must be given together")),
    };
    let rounds = match p_prep {
        Some(p) => distill_chain(p, &spec, req.rounds)?,
        None => Vec::new(),
    };
    let target = match (req.n_t, req.n_q, req.eps_total) {
        (Some(t), Some(q), Some(e)) => {
            let p_target = target_magic_error(t, q, e)?;
            Some(Target {
                p_target,
                alg_constant: ALG_CONSTANT,
                rounds_needed: rounds
                    .iter()
                    .position(|d| d.in_regime && d.p_out <= p_target)
                    .map(|i| i + 1),
            })
        }
        (None, None, None) => None,
        _ => return Err(Failure::config("n_t, n_q and eps_total must be given together")),
    };
    let report = BufferReport {
        request: req,
        capacity,
        assumptions: [
            "free routing between factories and the buffer",
            "negligible classical latency",
            "independent factories",
        ],
        p_prep,
        rounds,
        target,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::new(FailureKind::Io, e))?;
    print_stdout(&text);
    if let Some(dir) = out {
        fs::create_dir_all(&dir)?;
        write_text(&dir.join("buffer.json"), &format!("{text}\n"))?;
    }
    Ok(())
}

pub fn validate(
    config: Option<PathBuf>,
    distance: Option<usize>,
    depth: Option<usize>,
    kind: BlockKind,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let params = match (config, distance) {
        (Some(path), _) => RunConfig::load(&path)?.block()?,
        (None, Some(l)) => BlockParams::new(l, depth.unwrap_or(l), kind).map_err(Failure::config)?,
        (None, None) => {
            return Err(Failure::new(
                FailureKind::Usage,
                "validate needs --config or --distance",
            ));
        }
    };
    let graphs = build_block(params).map_err(Failure::config)?;
    let report = validate_block(&graphs);
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::new(FailureKind::Io, e))?;
    print_stdout(&text);
    if let Some(dir) = out {
        fs::create_dir_all(&dir)?;
        write_text(&dir.join("validation.json"), &format!("{text}\n"))?;
        write_json(&dir.join("primal.json"), &graphs.primal)?;
        write_json(&dir.join("dual.json"), &graphs.dual)?;
    }
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::new(FailureKind::Validation, report.failures.join("; ")))
    }
}
