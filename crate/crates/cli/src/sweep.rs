//! Drive-frequency sweep of the mid-bond switch.

use serde::Serialize;

use floquet_tfim::evolution::evolve;
use floquet_tfim::model::{DriveSchedule, LatticeConfig, Model};
use floquet_tfim::observables::{classify_switch, SwitchMode};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Serialize)]
pub struct SweepSettings {
    /// Configuration whose bond `L/2` is replaced by `J0 cos(Ω t)` at each point.
    pub base: LatticeConfig,
    pub j0: f64,
    pub dt: f64,
    /// In units of `1/g`.
    pub t_final: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub max_abs_corr: Option<f64>,
    pub mode: Option<SwitchMode>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub sites: usize,
    pub bond: usize,
    pub threshold: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row_at(&self, omega: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| (r.omega - omega).abs() < 1e-9)
    }
}

/// `Ω_min + i δΩ` for every `i` with the node at most `Ω_max`.
pub fn omega_grid(omega_min: f64, omega_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Usage(format!("frequency step must be positive, got {step}")));
    }
    if !(omega_max >= omega_min && omega_min >= 0.0) {
        return Err(CliError::Usage(format!("need 0 <= omega_min <= omega_max, got [{omega_min}, {omega_max}]")));
    }
    let count = ((omega_max - omega_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| omega_min + i as f64 * step).collect())
}

/// Adds explicitly requested frequencies to a grid, keeping it strictly
/// increasing.
pub fn with_extra_points(mut grid: Vec<f64>, extra: &[f64]) -> Vec<f64> {
    for &w in extra {
        if !grid.iter().any(|g| (g - w).abs() < 1e-9) {
            grid.push(w);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid
}

fn point_config(settings: &SweepSettings, omega: f64) -> Result<LatticeConfig> {
    let mut config = settings.base.clone();
    let mid = config.sites / 2;
    let Model::BondDriven { bonds } = &mut config.model else {
        return Err(CliError::Usage("the switch sweep needs a bond-driven chain".into()));
    };
    if config.sites % 2 != 0 {
        return Err(CliError::Usage(format!("the switch sweep needs even L, got {}", config.sites)));
    }
    bonds[mid - 1] = if omega == 0.0 { DriveSchedule::constant(settings.j0) } else { DriveSchedule::cosine(settings.j0, omega) };
    Ok(config)
}

fn run_point(settings: &SweepSettings, omega: f64) -> SweepRow {
    let outcome = point_config(settings, omega).and_then(|config| {
        let traj = evolve(&config, settings.dt, settings.t_final, 1)?;
        Ok(classify_switch(&traj, config.sites / 2, settings.threshold)?)
    });
    match outcome {
        Ok(v) => SweepRow { omega, max_abs_corr: Some(v.max_abs_corr), mode: Some(v.mode), error: None },
        Err(e) => {
            log::warn!("sweep point Ω = {omega}: {e}");
            SweepRow { omega, max_abs_corr: None, mode: None, error: Some(e.to_string()) }
        }
    }
}

/// Runs every grid point on a pool of `workers` threads; rows come back in
/// grid order whatever the completion order. Failed points become error
/// rows.
pub fn sweep_switch(settings: &SweepSettings, grid: &[f64], workers: usize) -> Result<SweepResult> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("frequency grid must be strictly increasing".into()));
    }
    let rows = run_all(settings, grid, workers.max(1))?;
    Ok(SweepResult { sites: settings.base.sites, bond: settings.base.sites / 2, threshold: settings.threshold, rows })
}

#[cfg(feature = "parallel")]
fn run_all(settings: &SweepSettings, grid: &[f64], workers: usize) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    // each point is a strictly sequential trajectory
    Ok(pool.install(|| {
        grid.par_iter().map(|&w| floquet_tfim::par::sequential(|| run_point(settings, w))).collect()
    }))
}

#[cfg(not(feature = "parallel"))]
fn run_all(settings: &SweepSettings, grid: &[f64], _workers: usize) -> Result<Vec<SweepRow>> {
    Ok(grid.iter().map(|&w| run_point(settings, w)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use floquet_tfim::model::presets;

    #[test]
    fn grid_spacing_and_bounds() {
        let grid = omega_grid(0.0, 3.0, 0.0151).unwrap();
        assert_eq!(grid.len(), 199);
        assert_eq!(grid[0], 0.0);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(*grid.last().unwrap() <= 3.0);
        assert_eq!(omega_grid(1.0, 1.0, 0.1).unwrap(), vec![1.0]);
        assert!(omega_grid(0.0, 1.0, 0.0).is_err());
        assert!(omega_grid(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn extra_points_are_merged_in_order() {
        let grid = with_extra_points(vec![0.0, 1.0, 2.0], &[1.5, 1.0]);
        assert_eq!(grid, vec![0.0, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn failing_points_become_error_rows() {
        let settings = SweepSettings {
            base: presets::mid_bond_switch(4, 0.1, 1.0).unwrap(),
            j0: 0.1,
            dt: 0.05,
            t_final: 0.01,
            threshold: 0.05,
        };
        let result = sweep_switch(&settings, &[0.5, 1.0], 2).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert!(result.rows.iter().all(|r| r.error.is_some() && r.mode.is_none()));
    }
}
