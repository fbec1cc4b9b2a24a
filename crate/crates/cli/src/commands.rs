//! Config-file driven runs behind the subcommands.

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};

use floquet_tfim::config::ConfigFile;
use floquet_tfim::evolution::{evolve_terms, EvolveOptions};
use floquet_tfim::model::{assemble_hamiltonian, DriveSchedule, Model};

use crate::error::{CliError, Result};
use crate::output::{write_trajectory, OutputDir, TimeUnit};
use crate::scenarios::{local_run, magnus_run, strobe_run, tolerances, write_sweep};
use crate::sweep::{omega_grid, sweep_switch, SweepSettings};

/// Reads a config file and applies `--override` pairs and explicit
/// `--dt` / `--t-final` values.
pub fn load_config(path: &Path, overrides: &[String], dt: Option<f64>, t_final: Option<f64>) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut file = ConfigFile::from_json(&text)?.with_overrides(overrides)?;
    if let Some(dt) = dt {
        file.dt = dt;
    }
    if let Some(t) = t_final {
        file.t_final = t;
    }
    Ok(file)
}

fn finish(out: OutputDir, command: &str, file: &ConfigFile, started: Instant, summary: &Value) -> Result<()> {
    let mut manifest = Map::new();
    manifest.insert("command".into(), json!(command));
    manifest.insert("config".into(), serde_json::to_value(file).expect("config serializes"));
    manifest.insert("wall_time_s".into(), json!(started.elapsed().as_secs_f64()));
    manifest.insert("tolerances".into(), tolerances());
    manifest.insert("summary".into(), summary.clone());
    out.finish(manifest)?;
    Ok(())
}

/// Plain lab-frame evolution of a config file.
pub fn simulate(file: &ConfigFile, out_dir: &Path) -> Result<Value> {
    let started = Instant::now();
    let (config, run) = file.into_parts()?;
    let mut options = EvolveOptions::new(run.dt, run.t_final, run.record_stride);
    options.step.scheme = run.scheme;
    let traj = evolve_terms(&assemble_hamiltonian(&config)?, config.initial_state()?, &options)?;
    let mut out = OutputDir::create(out_dir)?;
    write_trajectory(&mut out, "", &traj, TimeUnit::inverse_g())?;
    let per_bond: Vec<f64> = (1..config.sites).map(|j| traj.max_abs_correlation(j)).collect();
    let summary = json!({
        "samples": traj.len(),
        "matvecs": traj.matvecs,
        "renormalizations": traj.renormalizations,
        "max_norm_deviation": traj.max_norm_deviation(),
        "parity_drift": traj.parity_drift(),
        "max_abs_correlation_per_bond": per_bond,
    });
    out.write_json("summary.json", &summary)?;
    finish(out, "simulate", file, started, &summary)?;
    Ok(summary)
}

pub struct SweepGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub d_omega: f64,
    pub threshold: f64,
    pub workers: usize,
}

/// Frequency sweep of bond `L/2` on top of a bond-driven config file.
pub fn sweep(file: &ConfigFile, grid: &SweepGrid, out_dir: &Path) -> Result<Value> {
    let started = Instant::now();
    let (config, run) = file.into_parts()?;
    let j0 = match &config.model {
        Model::BondDriven { bonds } => bonds[config.sites / 2 - 1].amplitude(),
        Model::LocalDriven { .. } => return Err(CliError::Usage("sweep needs a bond-driven config".into())),
    };
    let settings = SweepSettings { base: config, j0, dt: run.dt, t_final: run.t_final, threshold: grid.threshold };
    let omegas = omega_grid(grid.omega_min, grid.omega_max, grid.d_omega)?;
    let result = sweep_switch(&settings, &omegas, grid.workers)?;
    let mut out = OutputDir::create(out_dir)?;
    write_sweep(&mut out, &result)?;
    let summary = json!({
        "points": result.rows.len(),
        "failures": result.rows.iter().filter(|r| r.error.is_some()).count(),
        "workers": grid.workers,
    });
    finish(out, "sweep", file, started, &summary)?;
    Ok(summary)
}

fn period_or_drive(file: &ConfigFile, period: Option<f64>) -> Result<f64> {
    if let Some(p) = period {
        return if p > 0.0 { Ok(p) } else { Err(CliError::Usage(format!("period must be positive, got {p}"))) };
    }
    // single cosine drive: its own period
    let (config, _) = file.into_parts()?;
    let freqs: Vec<f64> = match &config.model {
        Model::BondDriven { bonds } => bonds
            .iter()
            .filter_map(|b| match b {
                DriveSchedule::Cosine { frequency, .. } if *frequency > 0.0 => Some(*frequency),
                _ => None,
            })
            .collect(),
        Model::LocalDriven { drives, .. } => drives.iter().map(|d| d.nu).filter(|nu| *nu > 0.0).collect(),
    };
    match freqs.as_slice() {
        [w] => Ok(2.0 * std::f64::consts::PI / w),
        _ => Err(CliError::Usage("cannot infer the drive period; pass --period".into())),
    }
}

pub fn strobe(file: &ConfigFile, period: Option<f64>, periods: usize, out_dir: &Path) -> Result<Value> {
    let started = Instant::now();
    let (config, run) = file.into_parts()?;
    let period = period_or_drive(file, period)?;
    let mut out = OutputDir::create(out_dir)?;
    let (summary, _) = strobe_run(&config, period, run.dt, periods, run.record_stride, &mut out)?;
    out.write_json("summary.json", &summary)?;
    finish(out, "strobe", file, started, &summary)?;
    Ok(summary)
}

pub fn magnus(file: &ConfigFile, period: Option<f64>, nodes: usize, out_dir: &Path) -> Result<Value> {
    let started = Instant::now();
    let config = file.lattice()?;
    let period = period_or_drive(file, period)?;
    let mut out = OutputDir::create(out_dir)?;
    let (summary, _) = magnus_run(&config, period, nodes, &mut out)?;
    out.write_json("summary.json", &summary)?;
    finish(out, "magnus", file, started, &summary)?;
    Ok(summary)
}

/// Locally driven chain: `dt` is the integration step and every
/// `record_stride` steps one sample is written.
pub fn local(file: &ConfigFile, out_dir: &Path) -> Result<Value> {
    let started = Instant::now();
    let (config, run) = file.into_parts()?;
    let mut out = OutputDir::create(out_dir)?;
    let sample = run.dt * run.record_stride as f64;
    let (summary, _) = local_run(&config, sample, run.record_stride, run.t_final, &mut out)?;
    out.write_json("summary.json", &summary)?;
    finish(out, "local", file, started, &summary)?;
    Ok(summary)
}
