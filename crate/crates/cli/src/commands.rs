use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use equimap::checks::{run_suite, CheckResult};
use equimap::energy::energy_split;
use equimap::flow::run;
use equimap::gauge::{gauge_field_anchored, nls_residual, q_norm2_rdr, ResidualWindow, Snapshot};
use equimap::geometry::harmonic_profile;
use equimap::io::{read_profile, write_gauge, write_profile, write_records, write_rows};
use equimap::linops::{cosine_dy, spectrum_h};
use equimap::projection::{project_with, ProjectionOptions};
use equimap::{FlowConfig, GridSpec, HarmonicParams, RadialGrid};
use serde::Serialize;

use crate::manifest::{file_entry, RunManifest, MANIFEST_NAME};
use crate::{CliResult, Failure, EXIT_ABORT, EXIT_CHECK_FAILED, EXIT_REGIME};

pub const SEED_ENV: &str = "EQUIMAP_SEED";

pub fn harmonic(spec: GridSpec, s: f64, alpha: f64, out: &Path) -> CliResult<()> {
    let grid = RadialGrid::from_spec(spec)?.shared();
    let p = HarmonicParams::new(s, alpha)?;
    write_profile(out, &harmonic_profile(grid, p), None)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ProjectOutput {
    pub s: f64,
    pub alpha: f64,
    pub log_s: f64,
    pub dist: f64,
    pub excess: f64,
    pub orth1: f64,
    pub orth2_residual: f64,
    pub z_norm: f64,
    pub certified: bool,
    pub gate_delta: f64,
}

/// Fits the profile; a non-certified fit is still returned alongside exit code 3.
pub fn project(file: &Path, gate: f64) -> CliResult<(ProjectOutput, u8)> {
    let (profile, _) = read_profile(file)?;
    let opts = ProjectionOptions { gate_delta: gate, ..ProjectionOptions::default() };
    let fit = project_with(&profile, &opts)?;
    let out = ProjectOutput {
        s: fit.params.s,
        alpha: fit.params.alpha,
        log_s: fit.params.log_s(),
        dist: fit.dist,
        excess: fit.excess,
        orth1: fit.orth1,
        orth2_residual: fit.orth2_residual,
        z_norm: fit.z_norm,
        certified: fit.certified,
        gate_delta: gate,
    };
    let code = if fit.certified { 0 } else { EXIT_REGIME };
    Ok((out, code))
}

#[derive(Debug, Serialize)]
pub struct GaugeOutput {
    pub pi_q_norm2: f64,
    pub excess: f64,
    pub anchor_angle: f64,
}

pub fn gauge(file: &Path, out: &Path, anchor_angle: f64) -> CliResult<GaugeOutput> {
    let (profile, _) = read_profile(file)?;
    let report = energy_split(&profile)?;
    let g = gauge_field_anchored(&profile, anchor_angle)?;
    write_gauge(out, &g)?;
    Ok(GaugeOutput {
        pi_q_norm2: std::f64::consts::PI * q_norm2_rdr(profile.grid(), &g.q),
        excess: report.excess,
        anchor_angle,
    })
}

#[derive(Debug, Serialize)]
pub struct SpectrumOutput {
    pub grid: GridSpec,
    pub eigenvalues: Vec<f64>,
    /// Cosine similarity of the ground state with `sech y`.
    pub ground_state_cosine: f64,
}

pub fn spectrum(spec: GridSpec, k: usize) -> CliResult<SpectrumOutput> {
    let grid = RadialGrid::from_spec(spec)?;
    let pairs = spectrum_h(&grid, k)?;
    let sech: Vec<f64> = grid.y().iter().map(|y| 1.0 / y.cosh()).collect();
    Ok(SpectrumOutput {
        grid: spec,
        eigenvalues: pairs.iter().map(|p| p.lambda).collect(),
        ground_state_cosine: cosine_dy(&grid, &pairs[0].vector, &sech),
    })
}

#[derive(Debug, Serialize)]
pub struct CheckOutput {
    pub suite: String,
    pub pass: bool,
    pub results: Vec<CheckResult>,
}

pub fn check(suite: &str) -> CliResult<(CheckOutput, u8)> {
    let results = run_suite(suite)?;
    let pass = results.iter().all(|r| r.pass);
    let code = if pass { 0 } else { EXIT_CHECK_FAILED };
    Ok((CheckOutput { suite: suite.to_string(), pass, results }, code))
}

/// Reads a flow config and applies the `EQUIMAP_SEED` override.
pub fn load_config(path: &Path, seed_env: Option<&str>) -> CliResult<(FlowConfig, &'static str)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)?;
    let mut cfg: FlowConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::usage)?;
    let mut source = "config";
    if let Some(s) = seed_env {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| Failure::usage(anyhow!("{SEED_ENV} must be an unsigned integer, got '{s}'")))?;
        source = "env";
    }
    cfg.validate()?;
    Ok((cfg, source))
}

/// Longest prefix of snapshots with a uniform spacing (the last one may be short).
fn equispaced_prefix(history: &[Snapshot]) -> &[Snapshot] {
    if history.len() < 3 {
        return history;
    }
    let tau = history[1].t - history[0].t;
    let end = history
        .windows(2)
        .position(|w| ((w[1].t - w[0].t) - tau).abs() > 1e-9 * tau.max(1.0))
        .map_or(history.len(), |i| i + 1);
    &history[..end]
}

pub fn flow(config: &Path, out: &Path, seed_env: Option<&str>) -> CliResult<RunManifest> {
    let (cfg, seed_source) = load_config(config, seed_env)?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(Failure::usage)?;
    let started = chrono::Utc::now().to_rfc3339();
    let result = run(&cfg)?;

    let mut names = Vec::new();
    for (k, snap) in result.history.iter().enumerate() {
        let name = format!("snap_{k}.csv");
        write_profile(&out.join(&name), &snap.profile, Some(snap.t))?;
        names.push(name.clone());
        names.push(name.replace(".csv", ".json"));
    }
    write_records(&out.join("records.csv"), &result.records)?;
    names.push("records.csv".into());

    let usable = equispaced_prefix(&result.history);
    if cfg.diagnostics.gauge && usable.len() >= 3 {
        let window = ResidualWindow::default_for(usable[0].profile.grid());
        let samples = nls_residual(usable, &window)?;
        write_rows(&out.join("residual.csv"), &samples)?;
        names.push("residual.csv".into());
    }

    let files = names.iter().map(|n| file_entry(out, n)).collect::<anyhow::Result<Vec<_>>>().map_err(Failure::usage)?;
    let manifest = RunManifest {
        tool: "equimap".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        seed_source: seed_source.into(),
        config: cfg,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        aborted: result.abort.clone(),
        files,
    };
    equimap::io::write_json(&out.join(MANIFEST_NAME), &manifest)?;
    if let Some(reason) = result.abort {
        return Err(Failure::new(EXIT_ABORT, anyhow!("run aborted: {reason}")));
    }
    Ok(manifest)
}
