//! Named, parameterized experiment catalogue.
//!
//! Every scenario owns a table of numeric parameters with defaults that can
//! be overridden by `key=value` pairs. Running a scenario writes its data
//! files and a `manifest.json` into the output directory.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use floquet_tfim::config::{ConfigFile, RunParams};
use floquet_tfim::evolution::{self, evolve, evolve_terms, EvolveOptions, Trajectory};
use floquet_tfim::floquet::bessel::bessel_j0;
use floquet_tfim::floquet::control::ControlFunction;
use floquet_tfim::floquet::{self, analytic_hf0, magnus, rwa_local_effective};
use floquet_tfim::model::{assemble_hamiltonian, presets, LatticeConfig};
use floquet_tfim::observables::{classify_switch, dominant_period, front_fit, SWITCH_THRESHOLD};

use crate::error::{CliError, Result};
use crate::output::{fmt_f64, matrix_rows, write_trajectory, OutputDir, TimeUnit};
use crate::sweep::{omega_grid, sweep_switch, with_extra_points, SweepSettings};

/// Integration steps per recorded sample in the locally driven runs.
pub const LOCAL_SUBSTEPS: f64 = 32.0;

pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// `(key, default, meaning)`.
    pub params: &'static [(&'static str, f64, &'static str)],
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "blocked",
        description: "edge bonds driven at 4g and 2g: subharmonic pair dynamics blocking the third spin",
        params: &[
            ("L", 16.0, "sites"),
            ("J0", 0.1, "bond amplitude [g]"),
            ("omega1", 4.0, "bond 1 frequency [g]"),
            ("omega2", 2.0, "bond 2 frequency [g]"),
            ("dt", 5e-3, "time step [T = pi/g]"),
            ("t_final", 200.0, "duration [T]"),
            ("record_stride", 1.0, "steps per sample"),
        ],
    },
    ScenarioInfo {
        name: "unblocked",
        description: "bond 2 left static: a correlation front crosses the chain; linear front fit",
        params: &[
            ("L", 16.0, "sites"),
            ("J0", 0.1, "bond amplitude [g]"),
            ("omega1", 4.0, "bond 1 frequency [g]"),
            ("dt", 5e-3, "time step [T = pi/g]"),
            ("t_final", 10.0, "duration [1/J0]"),
            ("record_stride", 1.0, "steps per sample"),
            ("fit_first", 1.0, "first bond in the front fit"),
            ("fit_last", 0.0, "last bond in the front fit (0: L-3, before the boundary reflection)"),
        ],
    },
    ScenarioInfo {
        name: "switch_sweep",
        description: "max |C_{L/2,L/2+1}| versus the mid-bond drive frequency",
        params: &[
            ("L", 6.0, "sites (even)"),
            ("J0", 0.1, "bond amplitude [g]"),
            ("omega_min", 0.0, "first frequency [g]"),
            ("omega_max", 3.0, "last frequency [g]"),
            ("d_omega", 0.0151, "frequency step [g]"),
            ("dt", 5e-3, "time step [T = pi/g]"),
            ("t_final", 100.0, "duration [1/J0]"),
            ("threshold", SWITCH_THRESHOLD, "switch-off threshold on max |C|"),
        ],
    },
    ScenarioInfo {
        name: "switch_onoff",
        description: "correlation dynamics of the mid-bond switch in its on and off modes",
        params: &[
            ("L", 6.0, "sites (even)"),
            ("J0", 0.1, "bond amplitude [g]"),
            ("omega_on", 0.15, "switch-on frequency [g]"),
            ("omega_off", 2.0, "switch-off frequency [g]"),
            ("dt", 5e-3, "time step [T = pi/g]"),
            ("t_final", 100.0, "duration [1/J0]"),
            ("threshold", SWITCH_THRESHOLD, "switch-off threshold on max |C|"),
        ],
    },
    ScenarioInfo {
        name: "double_drive",
        description: "bond 1 creates excitations at 4g while bond L/2 at 2g blocks them",
        params: &[
            ("L", 6.0, "sites (even)"),
            ("J0", 0.1, "bond amplitude [g]"),
            ("omega1", 4.0, "bond 1 frequency [g]"),
            ("omega_mid", 2.0, "bond L/2 frequency [g]"),
            ("dt", 5e-3, "time step [T = pi/g]"),
            ("t_final", 100.0, "duration [1/J0]"),
            ("threshold", SWITCH_THRESHOLD, "switch-off threshold on max |C|"),
        ],
    },
    ScenarioInfo {
        name: "stroboscopic",
        description: "powers of the one-period propagator of the mid-bond switch",
        params: &[
            ("L", 6.0, "sites (even)"),
            ("J0", 0.1, "bond amplitude [g]"),
            ("omega", 2.0, "mid-bond frequency [g]"),
            ("dt", 1.25e-5, "propagator step [T = 2 pi/omega]"),
            ("periods", 10000.0, "number of periods"),
            ("record_stride", 1.0, "periods per sample"),
        ],
    },
    ScenarioInfo {
        name: "magnus",
        description: "first two Magnus terms of the mid-bond switch and the analytic zeroth order",
        params: &[
            ("L", 6.0, "sites (even, at most 8)"),
            ("J0", 0.1, "bond amplitude [g]"),
            ("omega", 2.0, "mid-bond frequency [g]"),
            ("nodes", floquet::DEFAULT_QUADRATURE_POINTS as f64, "quadrature intervals"),
        ],
    },
    ScenarioInfo {
        name: "local_drive",
        description: "uniform chain with one locally driven spin tuned to the first Bessel zero",
        params: &[
            ("L", 9.0, "sites"),
            ("k", 5.0, "driven site"),
            ("nu", 3.0, "drive frequency [g]"),
            ("x0", floquet::bessel::J0_FIRST_ROOT, "drive strength 2 epsilon/nu"),
            ("lambda0", 0.01, "bond coupling [g]"),
            ("dt", 5e-3, "sampling interval [1/lambda0]"),
            ("substeps", LOCAL_SUBSTEPS, "integration steps per sample"),
            ("t_final", 20.0, "duration [1/lambda0]"),
        ],
    },
    ScenarioInfo {
        name: "control_function",
        description: "zero-average Bessel control J0(F(t, omega)) at two frequencies",
        params: &[
            ("omega1", 2.0, "first frequency [g]"),
            ("omega2", 4.0, "second frequency [g]"),
            ("periods", 2.0, "trace length [T = pi/g]"),
            ("samples", 2001.0, "trace samples per frequency"),
            ("nodes", 4096.0, "quadrature intervals for the average"),
        ],
    },
];

pub fn scenario_info(name: &str) -> Result<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| CliError::UnknownScenario(name.to_string()))
}

/// Resolved numeric parameters of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn defaults(info: &ScenarioInfo) -> Self {
        Params(info.params.iter().map(|(k, v, _)| (k.to_string(), *v)).collect())
    }

    pub fn resolve<S: AsRef<str>>(info: &ScenarioInfo, overrides: &[S]) -> Result<Self> {
        let mut params = Self::defaults(info);
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override {item:?} is not of the form key=value")))?;
            params.set(info, key.trim(), value.trim())?;
        }
        Ok(params)
    }

    pub fn set(&mut self, info: &ScenarioInfo, key: &str, value: &str) -> Result<()> {
        let slot = self.0.get_mut(key).ok_or_else(|| {
            let known: Vec<&str> = info.params.iter().map(|p| p.0).collect();
            CliError::Usage(format!("scenario {} has no parameter {key:?} (known: {})", info.name, known.join(", ")))
        })?;
        *slot = value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("parameter {key}: {value:?} is not a finite number")))?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    pub fn count(&self, key: &str) -> Result<usize> {
        let v = self.get(key);
        if v < 0.0 || v.fract() != 0.0 || v > 1e12 {
            return Err(CliError::Usage(format!("parameter {key} must be a non-negative integer, got {v}")));
        }
        Ok(v as usize)
    }

    pub fn positive(&self, key: &str) -> Result<f64> {
        let v = self.get(key);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("parameter {key} must be positive, got {v}")))
        }
    }
}

/// What a scenario run produced.
#[derive(Debug)]
pub struct ScenarioReport {
    pub summary: Value,
    pub manifest: std::path::PathBuf,
}

pub fn run_scenario<S: AsRef<str>>(name: &str, overrides: &[S], out_dir: &Path, workers: usize) -> Result<ScenarioReport> {
    let info = scenario_info(name)?;
    let params = Params::resolve(info, overrides)?;
    let started = Instant::now();
    let mut out = OutputDir::create(out_dir)?;
    let (summary, extra) = match name {
        "blocked" => blocked(&params, &mut out),
        "unblocked" => unblocked(&params, &mut out),
        "switch_sweep" => switch_sweep(&params, &mut out, workers),
        "switch_onoff" => switch_onoff(&params, &mut out),
        "double_drive" => double_drive(&params, &mut out),
        "stroboscopic" => stroboscopic(&params, &mut out),
        "magnus" => magnus_terms(&params, &mut out),
        "local_drive" => local_drive(&params, &mut out),
        "control_function" => control_function(&params, &mut out),
        _ => unreachable!("names come from the catalogue"),
    }
    .map_err(|e| e.context(format!("scenario {name}")))?;
    out.write_json("summary.json", &summary)?;
    let mut manifest = Map::new();
    manifest.insert("scenario".into(), json!(name));
    manifest.insert("parameters".into(), serde_json::to_value(&params).expect("params serialize"));
    for (k, v) in extra {
        manifest.insert(k, v);
    }
    manifest.insert("wall_time_s".into(), json!(started.elapsed().as_secs_f64()));
    manifest.insert("tolerances".into(), tolerances());
    let manifest = out.finish(manifest)?;
    Ok(ScenarioReport { summary, manifest })
}

pub fn tolerances() -> Value {
    json!({
        "taylor_remainder_per_step": evolution::StepOptions::default().taylor_tolerance,
        "renormalize_threshold": evolution::RENORMALIZE_THRESHOLD,
        "unitarity": evolution::UNITARITY_TOLERANCE,
        "switch_threshold": SWITCH_THRESHOLD,
    })
}

type Outcome = Result<(Value, Vec<(String, Value)>)>;

fn config_record(config: &LatticeConfig, dt: f64, t_final: f64, record_stride: usize) -> (String, Value) {
    let file = ConfigFile::from_parts(config, &RunParams { dt, t_final, record_stride, scheme: evolution::Scheme::default() });
    ("config".into(), serde_json::to_value(file).expect("config serializes"))
}

fn sites(params: &Params) -> Result<usize> {
    params.count("L")
}

/// Steps of size `dt` covering `t_final`, adjusted so that `dt` divides it.
fn commensurate(dt: f64, t_final: f64) -> (f64, f64) {
    let steps = (t_final / dt).round().max(1.0);
    (t_final / steps, t_final)
}

fn blocked(params: &Params, out: &mut OutputDir) -> Outcome {
    let period = PI;
    let config = presets::edge_driven(sites(params)?, params.get("J0"), params.get("omega1"), params.get("omega2"))?;
    let (dt, t_final) = commensurate(params.positive("dt")? * period, params.positive("t_final")? * period);
    let stride = params.count("record_stride")?;
    let traj = evolve(&config, dt, t_final, stride)?;
    write_trajectory(out, "", &traj, TimeUnit::periods(period))?;
    let peak = dominant_period(&traj.magnetization_series(1), dt * stride as f64);
    let minima: Vec<f64> = (1..=config.sites).map(|j| traj.min_magnetization(j)).collect();
    let floor = minima.iter().skip(2).copied().fold(f64::INFINITY, f64::min);
    let summary = json!({
        "dominant_period_T": peak.map(|p| p.period / period),
        "spectral_bin": peak.map(|p| p.bin),
        "min_magnetization": minima,
        "min_magnetization_beyond_site_2": if floor.is_finite() { Some(floor) } else { None },
        "max_norm_deviation": traj.max_norm_deviation(),
        "parity_drift": traj.parity_drift(),
        "renormalizations": traj.renormalizations,
    });
    Ok((summary, vec![config_record(&config, dt, t_final, stride)]))
}

fn unblocked(params: &Params, out: &mut OutputDir) -> Outcome {
    let j0 = params.positive("J0")?;
    let l = sites(params)?;
    let config = presets::edge_driven(l, j0, params.get("omega1"), 0.0)?;
    let (dt, t_final) = commensurate(params.positive("dt")? * PI, params.positive("t_final")? / j0);
    let stride = params.count("record_stride")?;
    let terms = assemble_hamiltonian(&config)?;
    let options = EvolveOptions::new(dt, t_final, stride).with_amplitudes();
    let traj = evolve_terms(&terms, config.initial_state()?, &options)?;
    let unit = TimeUnit::inverse_coupling(j0);
    write_trajectory(out, "", &traj, unit)?;
    write_ansatz(out, &traj, unit)?;

    let first = params.count("fit_first")?.max(1);
    let last = match params.count("fit_last")? {
        0 => l.saturating_sub(3),
        n => n,
    };
    let bonds: Vec<usize> = (first..=last).collect();
    let fit = front_fit(&traj, &bonds, j0)?;
    out.write_json("front_fit.json", &fit)?;
    let summary = json!({
        "front_fit": fit,
        "lieb_robinson_velocity": floquet_tfim::LIEB_ROBINSON_VELOCITY,
        "ansatz_residual_max": traj.amplitudes.as_ref().map(|a| a.iter().map(|x| x.residual).fold(0.0, f64::max)),
        "max_norm_deviation": traj.max_norm_deviation(),
    });
    Ok((summary, vec![config_record(&config, dt, t_final, stride)]))
}

fn write_ansatz(out: &mut OutputDir, traj: &Trajectory, unit: TimeUnit) -> Result<()> {
    let Some(amps) = &traj.amplitudes else { return Ok(()) };
    let mut rows = Vec::new();
    for (t, a) in traj.times.iter().zip(amps) {
        let time = fmt_f64(unit.convert(*t));
        rows.push(vec![time.clone(), "1".into(), "alpha_abs".into(), fmt_f64(a.alpha.norm())]);
        for (i, b) in a.beta.iter().enumerate() {
            rows.push(vec![time.clone(), (i + 2).to_string(), "beta_abs".into(), fmt_f64(b.norm())]);
        }
        rows.push(vec![time, "0".into(), "residual".into(), fmt_f64(a.residual)]);
    }
    out.write_csv("ansatz.csv", &[unit.header().as_str(), "site_or_bond", "observable", "value"], rows)?;
    Ok(())
}

fn switch_sweep(params: &Params, out: &mut OutputDir, workers: usize) -> Outcome {
    let j0 = params.positive("J0")?;
    let base = presets::mid_bond_switch(sites(params)?, j0, 0.0)?;
    let (omega_min, omega_max) = (params.get("omega_min"), params.get("omega_max"));
    let grid = omega_grid(omega_min, omega_max, params.get("d_omega"))?;
    // the two frequencies singled out for the on/off comparison
    let extra: Vec<f64> = [0.15, 2.0].into_iter().filter(|w| (omega_min..=omega_max).contains(w)).collect();
    let grid = with_extra_points(grid, &extra);
    let (dt, t_final) = commensurate(params.positive("dt")? * PI, params.positive("t_final")? / j0);
    let settings = SweepSettings { base, j0, dt, t_final, threshold: params.get("threshold") };
    let result = sweep_switch(&settings, &grid, workers)?;
    write_sweep(out, &result)?;
    let failures = result.rows.iter().filter(|r| r.error.is_some()).count();
    let summary = json!({
        "points": result.rows.len(),
        "failures": failures,
        "bond": result.bond,
        "off_points": result.rows.iter().filter(|r| r.mode == Some(floquet_tfim::observables::SwitchMode::Off)).count(),
        "at_0.15": result.row_at(0.15),
        "at_2": result.row_at(2.0),
    });
    Ok((summary, vec![config_record(&settings.base, dt, t_final, 1), ("workers".into(), json!(workers))]))
}

pub fn write_sweep(out: &mut OutputDir, result: &crate::sweep::SweepResult) -> Result<()> {
    let rows = result.rows.iter().map(|r| {
        vec![
            fmt_f64(r.omega),
            r.max_abs_corr.map(fmt_f64).unwrap_or_default(),
            r.mode.map(|m| format!("{m:?}").to_lowercase()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ]
    });
    out.write_csv("sweep.csv", &["omega [g]", "max_abs_C", "mode", "error"], rows)?;
    out.write_json("sweep.json", result)?;
    Ok(())
}

fn switch_onoff(params: &Params, out: &mut OutputDir) -> Outcome {
    let j0 = params.positive("J0")?;
    let l = sites(params)?;
    let (dt, t_final) = commensurate(params.positive("dt")? * PI, params.positive("t_final")? / j0);
    let threshold = params.get("threshold");
    let unit = TimeUnit::inverse_coupling(j0);
    let mut verdicts = Map::new();
    let mut configs = Vec::new();
    for (label, key) in [("on", "omega_on"), ("off", "omega_off")] {
        let config = presets::mid_bond_switch(l, j0, params.get(key))?;
        let traj = evolve(&config, dt, t_final, 1)?;
        write_trajectory(out, &format!("{label}_"), &traj, unit)?;
        let per_bond: Vec<f64> = (1..l).map(|j| traj.max_abs_correlation(j)).collect();
        verdicts.insert(
            label.into(),
            json!({
                "omega": params.get(key),
                "verdict": classify_switch(&traj, l / 2, threshold)?,
                "max_abs_correlation_per_bond": per_bond,
            }),
        );
        configs.push((format!("config_{label}"), config_record(&config, dt, t_final, 1).1));
    }
    out.write_json("verdicts.json", &verdicts)?;
    Ok((Value::Object(verdicts), configs))
}

fn double_drive(params: &Params, out: &mut OutputDir) -> Outcome {
    let j0 = params.positive("J0")?;
    let l = sites(params)?;
    let config = presets::double_drive(l, j0, params.get("omega1"), params.get("omega_mid"))?;
    let (dt, t_final) = commensurate(params.positive("dt")? * PI, params.positive("t_final")? / j0);
    let traj = evolve(&config, dt, t_final, 1)?;
    write_trajectory(out, "", &traj, TimeUnit::inverse_coupling(j0))?;
    let per_bond: Vec<f64> = (1..l).map(|j| traj.max_abs_correlation(j)).collect();
    let summary = json!({
        "verdict": classify_switch(&traj, l / 2, params.get("threshold"))?,
        "max_abs_correlation_per_bond": per_bond,
    });
    Ok((summary, vec![config_record(&config, dt, t_final, 1)]))
}

fn stroboscopic(params: &Params, out: &mut OutputDir) -> Outcome {
    let omega = params.positive("omega")?;
    let period = 2.0 * PI / omega;
    let config = presets::mid_bond_switch(sites(params)?, params.get("J0"), omega)?;
    let dt = period / (1.0 / params.positive("dt")?).round();
    let n = params.count("periods")?;
    let stride = params.count("record_stride")?;
    strobe_run(&config, period, dt, n, stride, out)
}

/// Stroboscopic trajectory of an arbitrary configuration.
pub fn strobe_run(config: &LatticeConfig, period: f64, dt: f64, n: usize, stride: usize, out: &mut OutputDir) -> Outcome {
    let l = config.sites;
    let (traj, defect) = if l <= evolution::MAX_DENSE_SITES {
        let u = evolution::one_period_propagator(config, period, dt)?;
        let traj = evolution::stroboscopic_evolve(&u, config.initial_state()?, n, stride)?;
        (traj, Some(u.unitarity_defect))
    } else {
        (evolution::stroboscopic(config, period, dt, n, stride)?, None)
    };
    write_trajectory(out, "", &traj, TimeUnit::periods(period))?;
    let per_bond: Vec<f64> = (1..l).map(|j| traj.max_abs_correlation(j)).collect();
    let summary = json!({
        "period": period,
        "unitarity_defect": defect,
        "max_abs_correlation_per_bond": per_bond,
        "renormalizations": traj.renormalizations,
    });
    Ok((summary, vec![config_record(config, dt, n as f64 * period, stride)]))
}

fn magnus_terms(params: &Params, out: &mut OutputDir) -> Outcome {
    let omega = params.positive("omega")?;
    let config = presets::mid_bond_switch(sites(params)?, params.get("J0"), omega)?;
    magnus_run(&config, 2.0 * PI / omega, params.count("nodes")?, out)
}

pub fn magnus_run(config: &LatticeConfig, period: f64, nodes: usize, out: &mut OutputDir) -> Outcome {
    let result = magnus(config, period, nodes)?;
    let header = ["row", "col", "re", "im", "abs"];
    out.write_csv("magnus_order0.csv", &header, matrix_rows(&result.order0))?;
    out.write_csv("magnus_order1.csv", &header, matrix_rows(&result.order1))?;
    let max0 = floquet::max_abs(&result.order0);
    let max1 = floquet::max_abs(&result.order1);
    let analytic_diff = match analytic_hf0(config) {
        Ok(op) => Some(floquet::max_abs(&(&result.order0 - op.to_dense()))),
        Err(e) => {
            log::info!("no analytic zeroth order for this configuration: {e}");
            None
        }
    };
    let summary = json!({
        "period": period,
        "quadrature_points": nodes,
        "periodic": result.periodic,
        "max_abs_order0": max0,
        "max_abs_order1": max1,
        "order_ratio": max1 / max0,
        "analytic_order0_max_deviation": analytic_diff,
    });
    Ok((summary, vec![config_record(config, period / nodes as f64, period, 1)]))
}

fn local_drive(params: &Params, out: &mut OutputDir) -> Outcome {
    let lambda0 = params.positive("lambda0")?;
    let nu = params.positive("nu")?;
    let config = presets::local_switch(
        sites(params)?,
        params.count("k")?,
        lambda0,
        params.get("x0") * nu / 2.0,
        nu,
    )?;
    let sample = params.positive("dt")? / lambda0;
    let substeps = params.count("substeps")?.max(1);
    let t_final = params.positive("t_final")? / lambda0;
    local_run(&config, sample, substeps, t_final, out)
}

/// Lab-frame run of a locally driven chain sampled every `sample` time
/// units with `substeps` integration steps per sample, plus its
/// rotating-wave effective couplings.
pub fn local_run(config: &LatticeConfig, sample: f64, substeps: usize, t_final: f64, out: &mut OutputDir) -> Outcome {
    let floquet_tfim::model::Model::LocalDriven { lambda0, .. } = config.model else {
        return Err(CliError::Usage("local runs need a locally driven chain".into()));
    };
    let (sample, t_final) = commensurate(sample, t_final);
    let dt = sample / substeps as f64;
    let terms = assemble_hamiltonian(config)?;
    let traj = evolve_terms(&terms, config.initial_state()?, &EvolveOptions::new(dt, t_final, substeps))?;
    write_trajectory(out, "", &traj, TimeUnit::inverse_lambda(lambda0))?;
    let effective = rwa_local_effective(config)?;
    out.write_json(
        "rwa.json",
        &json!({
            "renormalized_coupling": effective.renormalized_coupling,
            "relative_coupling": effective.renormalized_coupling / lambda0,
            "warnings": effective.warnings,
        }),
    )?;
    let per_bond: Vec<f64> = (1..config.sites).map(|j| traj.max_abs_correlation(j)).collect();
    let summary = json!({
        "max_abs_correlation_per_bond": per_bond,
        "renormalized_coupling": effective.renormalized_coupling,
        "rwa_warnings": effective.warnings,
        "max_norm_deviation": traj.max_norm_deviation(),
    });
    Ok((summary, vec![config_record(config, dt, t_final, substeps)]))
}

fn control_function(params: &Params, out: &mut OutputDir) -> Outcome {
    let t_end = params.positive("periods")? * PI;
    let samples = params.count("samples")?.max(2);
    let nodes = params.count("nodes")?;
    if nodes < 1024 {
        return Err(CliError::Usage(format!("the control average needs at least 1024 nodes, got {nodes}")));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for key in ["omega1", "omega2"] {
        let cf = ControlFunction::new(params.positive(key)?);
        for (t, f, j) in cf.trace(t_end, samples) {
            rows.push(vec![fmt_f64(cf.omega), fmt_f64(t), fmt_f64(f), fmt_f64(j)]);
        }
        let period = cf.period();
        let periodicity = (0..samples)
            .map(|i| {
                let t = t_end * i as f64 / (samples - 1) as f64;
                (cf.value(t + period) - cf.value(t)).abs()
            })
            .fold(0.0, f64::max);
        records.push(json!({
            "omega": cf.omega,
            "average": cf.average(1.0, nodes),
            "periodicity_defect": periodicity,
            "F(0)": cf.value(0.0),
            "F(pi/omega)": cf.value(PI / cf.omega),
            "J0(F(0))": bessel_j0(cf.value(0.0)),
        }));
    }
    out.write_csv("control.csv", &["omega [g]", "time [1/g]", "F", "J0(F)"], rows)?;
    Ok((json!({ "control": records }), Vec::new()))
}
