//! Subcommand implementations.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use urnlab::export::{boundaries_csv, crossings_csv, parse_matrix, phase_csv, trajectory_csv, trajectory_json};
use urnlab::montecarlo::{limit_candidates, simulate_ensemble, summarize, EnsembleConfig};
use urnlab::phase::{
    boundary_curves, grid_crossings, linspace_step, overlay_empirical, sweep_cyclic,
    sweep_symmetric, CurveId, CurvePoint, GridKind, PhaseGrid,
};
use urnlab::stationary::{
    asymmetric_threshold, beta0, beta1, cyclic_center_stability, cyclic_threshold,
    enumerate_stationary_points, grid_stationary_search, phase_symmetric, two_type_root,
    two_type_stationary_points,
};
use urnlab::verify::{run_all, VerifyOptions};
use urnlab::{find_positive_roots, ModelSpec, PolyParams, SimplexPoint, UrnState};

use crate::config::{Cli, Format, ModelConfig, ModelKind, PhaseKind, RunConfig};
use crate::output::{ensure_out_dir, OutputSet, Provenance};

pub const EXIT_OK: i32 = 0;
/// A reproduction criterion failed.
pub const EXIT_FAILED: i32 = 1;
/// Bad arguments, bad input files or I/O failure.
pub const EXIT_USAGE: i32 = 2;

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    configure_threads()?;
    let config = RunConfig::from_command(&cli.command)?;
    match config.subcommand {
        crate::config::Action::Simulate => simulate(&config),
        crate::config::Action::Analyze => analyze(&config),
        crate::config::Action::Phase => phase(&config),
        crate::config::Action::Verify => verify(&config),
    }
}

/// `URNLAB_THREADS` caps the worker pool; 0 or unset means one per core.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("URNLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow!("URNLAB_THREADS must be a nonnegative integer, got {raw:?}"))?;
    if n > 0 {
        // A pool may already exist when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn build_model(cfg: &ModelConfig) -> Result<ModelSpec> {
    let a = || cfg.a.ok_or_else(|| anyhow!("missing -a"));
    Ok(match cfg.kind {
        ModelKind::Symmetric | ModelKind::TwoType => ModelSpec::symmetric(cfg.d, a()?, cfg.beta)?,
        ModelKind::Cyclic => ModelSpec::cyclic(a()?, cfg.beta)?,
        ModelKind::General => {
            let path = cfg.matrix.as_deref().ok_or_else(|| anyhow!("missing --matrix"))?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading matrix file {}", path.display()))?;
            let rows = parse_matrix(&text).with_context(|| format!("in matrix file {}", path.display()))?;
            ModelSpec::new(rows, cfg.beta)?
        }
    })
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn simulate(config: &RunConfig) -> Result<i32> {
    let out = config.out.as_deref().unwrap_or(Path::new("."));
    ensure_out_dir(out)?;
    let model = build_model(config.model.as_ref().expect("validated"))?;
    let cfg = EnsembleConfig {
        trajectories: config.trajectories.expect("validated"),
        steps: config.steps.expect("validated"),
        base_seed: config.seed.expect("validated"),
        thinning: config.thinning.expect("validated"),
        initial: UrnState::uniform(model.d()),
        tolerances: config.tolerances.expect("validated"),
    };
    let records = simulate_ensemble(&model, &cfg)?;
    let candidates = limit_candidates(&model)?;
    let summary = summarize(&model, &cfg, &records, &candidates)?;

    let mut files = OutputSet::default();
    let width = (cfg.trajectories.max(2) - 1).to_string().len().max(4);
    for (i, r) in records.iter().enumerate() {
        match config.format.unwrap_or(Format::Csv) {
            Format::Csv => files.add(format!("traj_{i:0width$}.csv"), trajectory_csv(r)),
            Format::Json => files.add(format!("traj_{i:0width$}.json"), trajectory_json(r)?),
        }
    }
    files.add_json("summary.json", &summary)?;
    let mut names = files.names();
    names.push("provenance.json".into());
    files.add_json("provenance.json", &Provenance::new(config, cfg.seeds(), names))?;
    files.commit(out)?;

    print_json(&json!({
        "model": summary.model,
        "trajectories": summary.trajectories,
        "steps": summary.steps,
        "base_seed": summary.base_seed,
        "tolerances": summary.tolerances,
        "hits": summary.hits,
        "center_hits": summary.center_hits(),
        "noncenter_hits": summary.noncenter_hits(),
        "cycling": summary.cycling,
        "undetermined": summary.undetermined,
        "output_dir": out,
    }))?;
    Ok(EXIT_OK)
}

fn analyze(config: &RunConfig) -> Result<i32> {
    let mc = config.model.as_ref().expect("validated");
    let model = build_model(mc)?;
    let resolution = config.resolution.expect("validated");
    let beta = mc.beta;
    let mut report = json!({ "model": model, "kind": mc.kind });
    let obj = report.as_object_mut().expect("object");
    match mc.kind {
        ModelKind::Symmetric if mc.d == 3 => {
            let a = mc.a.expect("validated");
            let roots = find_positive_roots(&PolyParams::three_type(a, beta)?)?;
            obj.insert("roots".into(), serde_json::to_value(&roots)?);
            obj.insert("stationary_points".into(), serde_json::to_value(enumerate_stationary_points(a, beta)?)?);
            obj.insert("phase".into(), serde_json::to_value(phase_symmetric(a, beta)?)?);
            if a < 1.0 {
                obj.insert("beta0".into(), json!(beta0(a)?));
                obj.insert("beta1".into(), json!(beta1(a)?));
                obj.insert("center_instability_beta".into(), json!(asymmetric_threshold(a)));
            }
        }
        ModelKind::Symmetric => {
            obj.insert("stationary_points".into(), json!([SimplexPoint::center(mc.d)]));
            obj.insert(
                "note".into(),
                json!("root and stability analysis is available for three colours; the centre is always stationary"),
            );
        }
        ModelKind::TwoType => {
            let a = mc.a.expect("validated");
            let root = two_type_root(a, beta)?;
            obj.insert("criterion".into(), json!((1.0 - a) / (1.0 + a) * beta));
            obj.insert("root".into(), json!(root));
            if let Some(r) = root {
                obj.insert("residual".into(), json!(PolyParams::two_type(a, beta)?.value(r).abs()));
            }
            obj.insert("stationary_points".into(), serde_json::to_value(two_type_stationary_points(a, beta)?)?);
        }
        ModelKind::Cyclic => {
            let a = mc.a.expect("validated");
            obj.insert("center_stability".into(), serde_json::to_value(cyclic_center_stability(a, beta)?)?);
            obj.insert("center_threshold_beta".into(), json!(cyclic_threshold(a)));
            obj.insert("search".into(), serde_json::to_value(grid_stationary_search(&model, resolution)?)?);
        }
        ModelKind::General => {
            if model.d() != 3 {
                bail!("numerical stationary-point search needs a 3x3 matrix, got {0}x{0}", model.d());
            }
            obj.insert("search".into(), serde_json::to_value(grid_stationary_search(&model, resolution)?)?);
        }
    }
    if let Some(out) = config.out.as_deref() {
        ensure_out_dir(out)?;
        let mut files = OutputSet::default();
        files.add_json("analysis.json", &report)?;
        files.add_json(
            "provenance.json",
            &Provenance::new(config, Vec::new(), vec!["analysis.json".into(), "provenance.json".into()]),
        )?;
        files.commit(out)?;
    }
    print_json(&report)?;
    Ok(EXIT_OK)
}

fn cyclic_curve(a_grid: &[f64]) -> Vec<CurvePoint> {
    a_grid
        .iter()
        .filter_map(|a| {
            cyclic_threshold(*a).map(|beta| CurvePoint {
                a: *a,
                beta,
                curve: CurveId::CenterInstability,
            })
        })
        .collect()
}

fn phase(config: &RunConfig) -> Result<i32> {
    let out = config.out.as_deref().unwrap_or(Path::new("."));
    ensure_out_dir(out)?;
    let g = config.grid.as_ref().expect("validated");
    let a_grid = linspace_step(g.a[0], g.a[1], g.a[2])?;
    let beta_grid = linspace_step(g.beta[0], g.beta[1], g.beta[2])?;
    let mut grid: PhaseGrid = match g.kind {
        PhaseKind::Symmetric => sweep_symmetric(&a_grid, &beta_grid)?,
        PhaseKind::Cyclic => sweep_cyclic(&a_grid, &beta_grid, g.search)?,
    };
    let crossings = grid_crossings(&grid)?;
    let curves = match grid.kind {
        GridKind::Symmetric => {
            let sub: Vec<f64> = a_grid.iter().copied().filter(|a| *a < 1.0).collect();
            if sub.is_empty() {
                Vec::new()
            } else {
                boundary_curves(&sub)?
            }
        }
        GridKind::Cyclic => cyclic_curve(&a_grid),
    };
    let mut seeds = Vec::new();
    if g.empirical {
        let cells: Vec<(usize, usize)> = (0..a_grid.len())
            .flat_map(|i| (0..beta_grid.len()).map(move |j| (i, j)))
            .collect();
        let (traj, steps, seed) = (
            config.trajectories.expect("validated"),
            config.steps.expect("validated"),
            config.seed.expect("validated"),
        );
        overlay_empirical(&mut grid, &cells, traj, steps, seed)?;
        seeds = EnsembleConfig::new(3, traj, steps, seed).seeds();
    }

    let mut files = OutputSet::default();
    files.add("phase.csv", phase_csv(&grid));
    files.add("boundaries.csv", boundaries_csv(&curves));
    files.add("crossings.csv", crossings_csv(&crossings));
    let meta = json!({
        "grid": grid,
        "boundary_margin": grid.margin,
        "crossing_tolerance": urnlab::phase::BOUNDARY_TOL,
        "search_resolution": g.search.then_some(urnlab::phase::SWEEP_SEARCH_RESOLUTION),
        "curves": curves,
        "crossings": crossings,
        "seeds": seeds,
    });
    files.add_json("phase.json", &meta)?;
    let mut names = files.names();
    names.push("provenance.json".into());
    files.add_json("provenance.json", &Provenance::new(config, seeds, names.clone()))?;
    files.commit(out)?;

    let mut counts = serde_json::Map::new();
    for c in &grid.cells {
        let key = c.label_text().to_string();
        let n = counts.get(&key).and_then(Value::as_u64).unwrap_or(0);
        counts.insert(key, json!(n + 1));
    }
    print_json(&json!({
        "cells": grid.cells.len(),
        "labels": counts,
        "crossings": crossings,
        "files": names,
        "output_dir": out,
    }))?;
    Ok(EXIT_OK)
}

fn verify(config: &RunConfig) -> Result<i32> {
    if let Some(out) = config.out.as_deref() {
        ensure_out_dir(out)?;
    }
    let opts = VerifyOptions {
        seed: config.seed.expect("validated"),
        quick: config.quick,
    };
    let reports = run_all(&opts);
    for r in &reports {
        println!("{}", r.line());
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", reports.len());
    if let Some(out) = config.out.as_deref() {
        let mut files = OutputSet::default();
        files.add_json("verify.json", &reports)?;
        files.add_json(
            "provenance.json",
            &Provenance::new(config, vec![opts.seed], vec!["verify.json".into(), "provenance.json".into()]),
        )?;
        files.commit(out)?;
    }
    Ok(if passed == reports.len() { EXIT_OK } else { EXIT_FAILED })
}
