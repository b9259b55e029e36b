//! `run`, `verify` and `sweep`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde_json::{json, Value};
use sleeve_core::export::{write_csv_artifacts, write_report_json};
use sleeve_core::geometry::{verify_separation, SeparationSettings};
use sleeve_core::learner::{approximate_sleeve, SleeveConfig};
use sleeve_core::step::{inexact_feasibility, max_feasible_epsilon};

use crate::config::{ConfigLayer, RunConfig, DEFAULT_OUTPUT_DIR, OUT_ENV};
use crate::ConfigArgs;

/// Exit codes: pipeline or check failure, rejected configuration.
const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Debug)]
pub struct Outcome {
    pub output_dir: PathBuf,
    /// `None` on success, otherwise `(stage, message)`.
    pub failure: Option<(String, String)>,
    pub report: Value,
}

fn error_report(stage: &str, message: &str, config: Option<Value>) -> Value {
    json!({
        "status": "error",
        "stage": stage,
        "error": message,
        "config": config,
    })
}

/// Runs the pipeline and writes all artifacts. The report is written even on failure.
pub fn execute(cfg: &RunConfig) -> Outcome {
    let oracle = cfg.oracle();
    let mut sc = SleeveConfig::new(cfg.rho, cfg.target_error, cfg.sigma, cfg.x0.clone());
    sc.epsilon = cfg.epsilon;
    sc.force = cfg.force;
    sc.endpoint_tol = cfg.endpoint_tol;
    sc.max_steps = cfg.max_steps;
    sc.evaluation.enabled = cfg.eval_points > 0;
    sc.evaluation.points = cfg.eval_points;

    let started = Instant::now();
    let result = approximate_sleeve(&oracle, &sc);
    let runtime = started.elapsed().as_secs_f64();

    let (mut report, mut failure) = match &result {
        Ok(a) => {
            let r = &a.report;
            let report = json!({
                "status": "ok",
                "stage": Value::Null,
                "error": Value::Null,
                "config": cfg.to_json(),
                "hausdorff": r.hausdorff.map(|h| h.distance),
                "hausdorff_sampling_bias": r.hausdorff.map(|h| h.sampling_bias),
                "sup_error": r.sup_error,
                "budget": r.budget.bound,
                "queries": {
                    "value": r.queries.total.value_queries,
                    "gradient": r.queries.total.gradient_queries,
                },
                "vertices": r.vertices,
                "feasibility": a.trace.feasibility,
                "warnings": r.trace_warnings,
                "runtime_seconds": runtime,
                "details": r,
            });
            (report, None)
        }
        Err(e) => {
            let stage = e.stage.to_string();
            let msg = e.source.to_string();
            let mut report = error_report(&stage, &msg, Some(cfg.to_json()));
            report["runtime_seconds"] = json!(runtime);
            (report, Some((stage, msg)))
        }
    };
    if let Ok(a) = &result {
        if let Err(e) =
            write_csv_artifacts(&cfg.output_dir, &a.chain, &a.spline, &a.trace.steps, &a.error_grid)
        {
            let msg = format!("writing CSV files to {}: {e}", cfg.output_dir.display());
            report["status"] = json!("error");
            report["stage"] = json!("export");
            report["error"] = json!(msg);
            failure = Some(("export".into(), msg));
        }
    }
    if let Err(e) = write_report_json(&cfg.output_dir, &report) {
        let msg = format!("writing report to {}: {e}", cfg.output_dir.display());
        failure.get_or_insert(("export".into(), msg));
    }
    Outcome {
        output_dir: cfg.output_dir.clone(),
        failure,
        report,
    }
}

fn output_dir_hint(layer: &ConfigLayer) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or_else(|| layer.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Writes a config-stage error report where the run would have put its outputs.
fn reject(dir: &Path, message: &str) -> u8 {
    eprintln!("error [config]: {message}");
    if let Err(e) = write_report_json(dir, &error_report("config", message, None)) {
        eprintln!("error [export]: {e}");
    }
    EXIT_CONFIG
}

pub fn run_command(args: &ConfigArgs) -> u8 {
    let layer = match args.layer() {
        Ok(l) => l,
        Err(e) => return reject(&output_dir_hint(&ConfigLayer::default()), &e.to_string()),
    };
    let cfg = match layer.resolve() {
        Ok(c) => c,
        Err(e) => return reject(&output_dir_hint(&layer), &e.to_string()),
    };
    let out = execute(&cfg);
    match out.failure {
        None => {
            let r = &out.report;
            println!(
                "{}: {} vertices, hausdorff {}, sup error {} (budget {}), {} value / {} gradient queries -> {}",
                cfg.name,
                r["vertices"],
                r["hausdorff"],
                r["sup_error"],
                r["budget"],
                r["queries"]["value"],
                r["queries"]["gradient"],
                out.output_dir.display()
            );
            for w in r["warnings"].as_array().into_iter().flatten() {
                eprintln!("warning: {}", w.as_str().unwrap_or_default());
            }
            0
        }
        Some((stage, msg)) => {
            eprintln!("error [{stage}]: {msg}");
            EXIT_FAILED
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify(cfg: &RunConfig) -> anyhow::Result<bool> {
    let rep = verify_separation(cfg.curve.as_ref(), cfg.rho, &SeparationSettings::default())
        .context("separation check")?;
    let w = rep.worst_pair;
    println!("{} at rho = {}", cfg.name, cfg.rho);
    println!(
        "separation: {} (worst margin {:.6e} at t = {:.6}, nearest s = {:.6}; tolerance {:e}, {} balls)",
        verdict(rep.passed),
        w.margin,
        w.t,
        w.s,
        rep.tolerance,
        rep.samples_used
    );
    println!(
        "curvature: {} (max {:.6}, limit 1/rho = {:.6})",
        verdict(rep.curvature_ok),
        rep.max_curvature,
        1.0 / cfg.rho
    );
    let mut ok = rep.passed;
    match max_feasible_epsilon(cfg.rho, cfg.target_error) {
        Ok(m) => println!("max feasible epsilon at E = {}: {:.6e}", cfg.target_error, m),
        Err(e) => println!("max feasible epsilon: {e}"),
    }
    if cfg.epsilon > 0.0 {
        let f = inexact_feasibility(cfg.rho, cfg.target_error, cfg.epsilon)
            .context("feasibility check")?;
        println!(
            "inexact feasibility: {} (epsilon = {:e}, lhs {:.6e}, rhs {:.6e}, margin {:.6e})",
            verdict(f.feasible),
            cfg.epsilon,
            f.lhs,
            f.rhs,
            f.lhs - f.rhs
        );
        ok &= f.feasible;
    }
    Ok(ok)
}

pub fn verify_command(args: &ConfigArgs) -> u8 {
    let cfg = match args.layer().and_then(|l| l.resolve()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error [config]: {e}");
            return EXIT_CONFIG;
        }
    };
    match verify(&cfg) {
        Ok(true) => 0,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error [verify]: {e:#}");
            EXIT_FAILED
        }
    }
}

/// Labels are made unique by suffixing `-2`, `-3`, ….
fn unique_labels(labels: Vec<String>) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    labels
        .into_iter()
        .map(|l| {
            let n = seen.entry(l.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                l
            } else {
                format!("{l}-{n}")
            }
        })
        .collect()
}

pub fn sweep_command(
    files: &[PathBuf],
    cases: &[String],
    jobs: Option<usize>,
    common: &ConfigArgs,
) -> u8 {
    let base_layer = match common.layer() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error [config]: {e}");
            return EXIT_CONFIG;
        }
    };
    let base_dir = output_dir_hint(&base_layer);
    let mut entries: Vec<(String, Result<ConfigLayer, String>)> = Vec::new();
    for f in files {
        let label = f.file_stem().map_or("config".into(), |s| s.to_string_lossy().into_owned());
        let layer = ConfigLayer::from_file(f)
            .map(|l| l.overlay(&base_layer))
            .map_err(|e| e.to_string());
        entries.push((label, layer));
    }
    for c in cases {
        let mut l = base_layer.clone();
        l.case = Some(c.clone());
        entries.push((c.clone(), Ok(l)));
    }
    if entries.is_empty() {
        eprintln!("error [config]: sweep needs config files or --cases");
        return EXIT_CONFIG;
    }
    let labels = unique_labels(entries.iter().map(|e| e.0.clone()).collect());

    let work = |(label, layer): (&String, &Result<ConfigLayer, String>)| -> (String, Option<(String, String)>) {
        let dir = base_dir.join(label);
        let cfg = layer.clone().and_then(|l| l.resolve().map_err(|e| e.to_string()));
        match cfg {
            Ok(mut cfg) => {
                cfg.output_dir = dir;
                let out = execute(&cfg);
                let summary = match &out.failure {
                    None => format!(
                        "ok: hausdorff {}, sup error {}",
                        out.report["hausdorff"], out.report["sup_error"]
                    ),
                    Some((stage, msg)) => format!("FAILED [{stage}]: {msg}"),
                };
                (summary, out.failure)
            }
            Err(msg) => {
                if let Err(e) = write_report_json(&dir, &error_report("config", &msg, None)) {
                    eprintln!("error [export]: {e}");
                }
                (format!("FAILED [config]: {msg}"), Some(("config".into(), msg)))
            }
        }
    };
    let items: Vec<_> = labels.iter().zip(entries.iter().map(|e| &e.1)).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build();
    let results: Vec<_> = match pool {
        Ok(pool) => pool.install(|| items.into_par_iter().map(work).collect()),
        Err(e) => {
            eprintln!("error [config]: worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut failed = 0;
    for (label, (summary, failure)) in labels.iter().zip(results) {
        println!("{label}: {summary}");
        failed += usize::from(failure.is_some());
    }
    println!("{} of {} runs succeeded -> {}", labels.len() - failed, labels.len(), base_dir.display());
    if failed > 0 {
        EXIT_FAILED
    } else {
        0
    }
}
