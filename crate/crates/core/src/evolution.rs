//! Time-ordered evolution by exponential integrators, one-period
//! propagators and stroboscopic iteration.
//!
//! A step from `t` to `t + dt` applies either the midpoint exponential
//! `exp(-i dt H(t + dt/2))` or a fourth-order commutator-free pair of
//! exponentials (see [`Scheme`]). Every exponential acts on the vector through a truncated Taylor series of the
//! shifted operator `H - μ`, with `μ = <ψ|H|ψ>` removed as an exact global
//! phase. Truncation stops once the rigorous tail bound
//! `‖T_k‖ · x/(k+1) · e^x` (with `x ≥ |dt| ‖H - μ‖`) drops below the step
//! tolerance; steps with `x > 1` are split into equal sub-exponentials.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{inner, l2_norm, HilbertSpace, QuantumState};
use crate::kernel::{CompiledHamiltonian, Snapshot};
use crate::model::{assemble_hamiltonian, LatticeConfig, TermList};
use crate::observables::{ansatz_amplitudes, z_profile, AnsatzAmplitudes};
use crate::par;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Norm drift that triggers a renormalization.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-10;

/// Largest dense propagator, `L <= 10`.
pub const MAX_DENSE_SITES: usize = 10;

/// Tolerance on `max |U^dag U - I|` for accepted propagators.
pub const UNITARITY_TOLERANCE: f64 = 1e-9;

const MAX_TAYLOR_TERMS: usize = 80;
const MAX_SUBSTEP_NORM: f64 = 1.0;

/// Time-ordering rule of one step from `t` to `t + dt`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `exp(-i dt H(t + dt/2))`, second order.
    Midpoint,
    /// Two exponentials of Gauss-node combinations, fourth order:
    /// `exp(-i dt (a H_1 + b H_2)) exp(-i dt (b H_1 + a H_2))` with
    /// `H_{1,2} = H(t + (1/2 ∓ √3/6) dt)`, `a = 1/4 - √3/6`, `b = 1/4 + √3/6`.
    #[default]
    CommutatorFree4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    /// Bound on the Taylor remainder per step.
    pub taylor_tolerance: f64,
    pub scheme: Scheme,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { taylor_tolerance: 1e-12, scheme: Scheme::default() }
    }
}

impl StepOptions {
    pub fn midpoint(taylor_tolerance: f64) -> Self {
        Self { taylor_tolerance, scheme: Scheme::Midpoint }
    }
}

/// Recorded observables of one run; times in units of `1/g`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `[time][site]` of `<σ^z_j>`.
    pub magnetizations: Vec<Vec<f64>>,
    /// `[time][bond]` of `C_{j,j+1}`.
    pub correlations: Vec<Vec<f64>>,
    pub parity: Vec<f64>,
    pub norms: Vec<f64>,
    pub amplitudes: Option<Vec<AnsatzAmplitudes>>,
    pub final_state: QuantumState,
    /// Number of steps whose norm drift exceeded [`RENORMALIZE_THRESHOLD`].
    pub renormalizations: usize,
    pub matvecs: usize,
}

impl Trajectory {
    fn start(state: &QuantumState, record_amplitudes: bool) -> Self {
        let mut traj = Self {
            times: Vec::new(),
            magnetizations: Vec::new(),
            correlations: Vec::new(),
            parity: Vec::new(),
            norms: Vec::new(),
            amplitudes: record_amplitudes.then(Vec::new),
            final_state: state.clone(),
            renormalizations: 0,
            matvecs: 0,
        };
        traj.record(0.0, state);
        traj
    }

    fn record(&mut self, t: f64, state: &QuantumState) {
        let profile = z_profile(state);
        self.times.push(t);
        self.magnetizations.push(profile.magnetizations);
        self.correlations.push(profile.correlations);
        self.parity.push(profile.parity);
        self.norms.push(profile.norm);
        if let Some(amps) = self.amplitudes.as_mut() {
            amps.push(ansatz_amplitudes(state));
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time series of `<σ^z_j>` on 1-based site `j`.
    pub fn magnetization_series(&self, j: usize) -> Vec<f64> {
        self.magnetizations.iter().map(|row| row[j - 1]).collect()
    }

    /// Time series of `C_{j,j+1}` on 1-based bond `j`.
    pub fn correlation_series(&self, j: usize) -> Vec<f64> {
        self.correlations.iter().map(|row| row[j - 1]).collect()
    }

    pub fn max_abs_correlation(&self, j: usize) -> f64 {
        self.correlations.iter().map(|row| row[j - 1].abs()).fold(0.0, f64::max)
    }

    pub fn min_magnetization(&self, j: usize) -> f64 {
        self.magnetizations.iter().map(|row| row[j - 1]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn parity_drift(&self) -> f64 {
        let p0 = self.parity.first().copied().unwrap_or(0.0);
        self.parity.iter().map(|p| (p - p0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    pub record_amplitudes: bool,
    pub step: StepOptions,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_final: f64, record_stride: usize) -> Self {
        Self { dt, t_final, record_stride, record_amplitudes: false, step: StepOptions::default() }
    }

    pub fn with_amplitudes(mut self) -> Self {
        self.record_amplitudes = true;
        self
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::config(format!("t_final {} shorter than one step {}", self.t_final, self.dt)));
        }
        if self.record_stride == 0 {
            return Err(Error::config("record_stride must be at least 1"));
        }
        Ok((self.t_final / self.dt + 1e-9).floor() as usize)
    }
}

struct Workspace {
    hpsi: Vec<C64>,
    term: Vec<C64>,
    next: Vec<C64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Self { hpsi: vec![ZERO; dim], term: vec![ZERO; dim], next: vec![ZERO; dim] }
    }
}

/// Exponential stepper over a compiled term list.
pub struct Integrator {
    hamiltonian: CompiledHamiltonian,
    options: StepOptions,
    work: Workspace,
    matvecs: usize,
}

impl Integrator {
    pub fn new(terms: &TermList, options: StepOptions) -> Self {
        let hamiltonian = CompiledHamiltonian::new(terms);
        let dim = hamiltonian.space().dim();
        Self { hamiltonian, options, work: Workspace::new(dim), matvecs: 0 }
    }

    pub fn space(&self) -> HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn matvecs(&self) -> usize {
        self.matvecs
    }

    /// Advances `psi` from `t` to `t + dt`; negative `dt` runs backwards.
    pub fn step(&mut self, psi: &mut [C64], t: f64, dt: f64) -> Result<()> {
        match self.options.scheme {
            Scheme::Midpoint => {
                let snapshot = self.hamiltonian.snapshot(t + 0.5 * dt);
                self.exp_step(&snapshot, psi, dt, self.options.taylor_tolerance)
            }
            Scheme::CommutatorFree4 => {
                let offset = 3f64.sqrt() / 6.0;
                let (t1, t2) = (t + (0.5 - offset) * dt, t + (0.5 + offset) * dt);
                // weights 2a and 2b sum to one; each exponential spans dt/2
                let (wa, wb) = (0.5 - 2.0 * offset, 0.5 + 2.0 * offset);
                let first = self.hamiltonian.snapshot_mix(&[(t1, wb), (t2, wa)]);
                let tolerance = 0.5 * self.options.taylor_tolerance;
                self.exp_step(&first, psi, 0.5 * dt, tolerance)?;
                let second = self.hamiltonian.snapshot_mix(&[(t1, wa), (t2, wb)]);
                self.exp_step(&second, psi, 0.5 * dt, tolerance)
            }
        }
    }

    fn exp_step(&mut self, snapshot: &Snapshot, psi: &mut [C64], dt: f64, tolerance: f64) -> Result<()> {
        let h = &self.hamiltonian;
        let Workspace { hpsi, term, next } = &mut self.work;

        h.apply_into(snapshot, 0.0, psi, hpsi);
        self.matvecs += 1;
        let norm_sq: f64 = psi.iter().map(C64::norm_sqr).sum();
        let shift = if norm_sq > 0.0 { inner(psi, hpsi).re / norm_sq } else { 0.0 };

        let x_total = dt.abs() * h.norm_bound(snapshot, shift);
        let substeps = (x_total / MAX_SUBSTEP_NORM).ceil().max(1.0) as usize;
        let tau = dt / substeps as f64;
        let x = x_total / substeps as f64;
        let tolerance = tolerance / substeps as f64;
        let tail_factor = x * x.exp();

        for sub in 0..substeps {
            // first Taylor term: (-i τ)(H - μ)ψ
            if sub == 0 {
                for ((t, hp), p) in term.iter_mut().zip(hpsi.iter()).zip(psi.iter()) {
                    *t = C64::new(0.0, -tau) * (hp - shift * p);
                }
            } else {
                h.apply_into(snapshot, shift, psi, term);
                self.matvecs += 1;
                term.iter_mut().for_each(|t| *t *= C64::new(0.0, -tau));
            }
            psi.iter_mut().zip(term.iter()).for_each(|(p, t)| *p += t);
            let mut k = 1;
            loop {
                let size = l2_norm(term);
                if size * tail_factor / (k + 1) as f64 <= tolerance || size == 0.0 {
                    break;
                }
                if k >= MAX_TAYLOR_TERMS {
                    return Err(Error::Numerical {
                        step: 0,
                        message: format!("Taylor series did not converge (x = {x:.3e})"),
                    });
                }
                k += 1;
                h.apply_into(snapshot, shift, term, next);
                self.matvecs += 1;
                let factor = C64::new(0.0, -tau / k as f64);
                next.iter_mut().for_each(|v| *v *= factor);
                psi.iter_mut().zip(next.iter()).for_each(|(p, v)| *p += v);
                std::mem::swap(term, next);
            }
        }
        let phase = C64::from_polar(1.0, -dt * shift);
        psi.iter_mut().for_each(|p| *p *= phase);
        Ok(())
    }
}

/// Checks a state after a step; renormalizes on drift. Returns whether it did.
fn settle(psi: &mut [C64], step: usize) -> Result<bool> {
    let norm = l2_norm(psi);
    if !norm.is_finite() {
        return Err(Error::Numerical { step, message: "non-finite amplitudes".into() });
    }
    if (norm - 1.0).abs() > RENORMALIZE_THRESHOLD {
        psi.iter_mut().for_each(|p| *p /= norm);
        return Ok(true);
    }
    Ok(false)
}

/// Integrates the lab-frame Schrödinger equation of `config` from its
/// initial state.
pub fn evolve(config: &LatticeConfig, dt: f64, t_final: f64, record_stride: usize) -> Result<Trajectory> {
    let terms = assemble_hamiltonian(config)?;
    evolve_terms(&terms, config.initial_state()?, &EvolveOptions::new(dt, t_final, record_stride))
}

/// Integrates `i dψ/dt = H(t) ψ` for an arbitrary term list from `t = 0`.
pub fn evolve_terms(terms: &TermList, initial: QuantumState, options: &EvolveOptions) -> Result<Trajectory> {
    terms.space().check_same(&initial.space())?;
    let steps = options.steps()?;
    let mut integrator = Integrator::new(terms, options.step);
    let mut traj = Trajectory::start(&initial, options.record_amplitudes);
    let mut state = initial;
    for k in 0..steps {
        let t = k as f64 * options.dt;
        integrator.step(state.amplitudes_mut(), t, options.dt).map_err(|e| with_step(e, k + 1))?;
        if settle(state.amplitudes_mut(), k + 1)? {
            traj.renormalizations += 1;
        }
        if (k + 1) % options.record_stride == 0 {
            traj.record((k + 1) as f64 * options.dt, &state);
        }
    }
    traj.matvecs = integrator.matvecs();
    traj.final_state = state;
    Ok(traj)
}

fn with_step(err: Error, step: usize) -> Error {
    match err {
        Error::Numerical { message, .. } => Error::Numerical { step, message },
        other => other,
    }
}

/// Dense one-period evolution operator.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub space: HilbertSpace,
    pub matrix: DMatrix<C64>,
    pub period: f64,
    /// `max |U^dag U - I|`.
    pub unitarity_defect: f64,
}

impl Propagator {
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = psi.len();
        let mut out = vec![ZERO; n];
        for (c, p) in psi.iter().enumerate() {
            if *p == ZERO {
                continue;
            }
            let col = self.matrix.column(c);
            for (o, u) in out.iter_mut().zip(col.iter()) {
                *o += u * p;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Propagator) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let prod = u.adjoint() * u;
    prod.iter()
        .enumerate()
        .map(|(k, v)| {
            let (r, c) = (k % prod.nrows(), k / prod.nrows());
            if r == c { (v - 1.0).norm() } else { v.norm() }
        })
        .fold(0.0, f64::max)
}

/// Steps per period; `dt` must divide `period` to one part in 1e9.
fn steps_per_period(period: f64, dt: f64) -> Result<usize> {
    if !(period > 0.0 && dt > 0.0) {
        return Err(Error::config("period and dt must be positive"));
    }
    let n = (period / dt).round();
    if n < 1.0 || (n * dt - period).abs() > 1e-9 * period {
        return Err(Error::config(format!("dt {dt} does not divide the period {period}")));
    }
    Ok(n as usize)
}

/// `U(T)` of the lab-frame Hamiltonian of `config`.
pub fn one_period_propagator(config: &LatticeConfig, period: f64, dt: f64) -> Result<Propagator> {
    propagator_for_terms(&assemble_hamiltonian(config)?, period, dt, StepOptions::midpoint(1e-15))
}

/// Evolves every basis column over one period; columns run concurrently.
pub fn propagator_for_terms(terms: &TermList, period: f64, dt: f64, options: StepOptions) -> Result<Propagator> {
    let space = terms.space();
    if space.sites() > MAX_DENSE_SITES {
        return Err(Error::Unsupported(format!(
            "dense propagators are limited to L <= {MAX_DENSE_SITES}"
        )));
    }
    let steps = steps_per_period(period, dt)?;
    let dt = period / steps as f64;
    let dim = space.dim();
    let columns = par::map_indices(dim, |c| -> Result<Vec<C64>> {
        let mut integrator = Integrator::new(terms, options);
        let mut psi = vec![ZERO; dim];
        psi[c] = C64::new(1.0, 0.0);
        for k in 0..steps {
            integrator.step(&mut psi, k as f64 * dt, dt).map_err(|e| with_step(e, k + 1))?;
            if psi.iter().any(|p| !p.is_finite()) {
                return Err(Error::Numerical { step: k + 1, message: "non-finite amplitudes".into() });
            }
        }
        Ok(psi)
    });
    let mut matrix = DMatrix::from_element(dim, dim, ZERO);
    for (c, column) in columns.into_iter().enumerate() {
        matrix.set_column(c, &nalgebra::DVector::from_vec(column?));
    }
    let defect = unitarity_defect(&matrix);
    if defect > UNITARITY_TOLERANCE {
        return Err(Error::Unitarity { deviation: defect, tolerance: UNITARITY_TOLERANCE });
    }
    Ok(Propagator { space, matrix, period, unitarity_defect: defect })
}

/// Applies `U(T)^n` to `state0`, recording observables every
/// `record_stride` periods.
pub fn stroboscopic_evolve(
    propagator: &Propagator,
    state0: QuantumState,
    n_periods: usize,
    record_stride: usize,
) -> Result<Trajectory> {
    propagator.space.check_same(&state0.space())?;
    if record_stride == 0 {
        return Err(Error::config("record_stride must be at least 1"));
    }
    let mut traj = Trajectory::start(&state0, false);
    let mut psi = state0.into_amplitudes();
    for n in 1..=n_periods {
        psi = propagator.apply(&psi);
        if settle(&mut psi, n)? {
            traj.renormalizations += 1;
        }
        if n % record_stride == 0 {
            traj.record(n as f64 * propagator.period, &QuantumState::from_evolved(propagator.space, psi.clone()));
        }
    }
    traj.final_state = QuantumState::from_evolved(propagator.space, psi);
    Ok(traj)
}

/// Stroboscopic observables of `config`: dense propagator powers for
/// `L <= 10`, direct integration sampled at period multiples otherwise.
pub fn stroboscopic(
    config: &LatticeConfig,
    period: f64,
    dt: f64,
    n_periods: usize,
    record_stride: usize,
) -> Result<Trajectory> {
    if config.sites <= MAX_DENSE_SITES {
        let u = one_period_propagator(config, period, dt)?;
        return stroboscopic_evolve(&u, config.initial_state()?, n_periods, record_stride);
    }
    let steps = steps_per_period(period, dt)?;
    let dt = period / steps as f64;
    let terms = assemble_hamiltonian(config)?;
    let options = EvolveOptions::new(dt, n_periods as f64 * period, steps * record_stride);
    evolve_terms(&terms, config.initial_state()?, &options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{product_state, Spin};
    use crate::model::{presets, DriveSchedule, Model};
    use std::f64::consts::PI;

    fn rabi_config(j0: f64) -> LatticeConfig {
        LatticeConfig::new(2, 1.0, Model::BondDriven { bonds: vec![DriveSchedule::constant(j0)] }, vec![Spin::Up; 2])
            .unwrap()
    }

    #[test]
    fn uncoupled_all_up_is_stationary() {
        let config = presets::edge_driven(5, 0.0, 4.0, 2.0).unwrap();
        let traj = evolve(&config, 5e-3 * PI, 20.0, 5).unwrap();
        for row in &traj.magnetizations {
            assert!(row.iter().all(|m| (m - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn two_spin_rabi_oscillation() {
        let (j0, g) = (0.1, 1.0);
        let config = rabi_config(j0);
        let traj = evolve(&config, 5e-3 * PI, 100.0, 10).unwrap();
        let omega = (j0 * j0 + 4.0 * g * g).sqrt();
        for (t, m) in traj.times.iter().zip(&traj.magnetizations) {
            let p_down = j0 * j0 / (omega * omega) * (omega * t).sin().powi(2);
            // <σ^z_1> = 1 - 2 P(↓↓)
            assert!((m[0] - (1.0 - 2.0 * p_down)).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_options() {
        let config = rabi_config(0.1);
        assert!(matches!(evolve(&config, 0.0, 1.0, 1), Err(Error::Config(_))));
        assert!(matches!(evolve(&config, 0.1, 0.05, 1), Err(Error::Config(_))));
        assert!(matches!(evolve(&config, 0.1, 1.0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn record_stride_sampling() {
        let traj = evolve(&rabi_config(0.1), 0.01, 1.0, 10).unwrap();
        assert_eq!(traj.len(), 11);
        assert!((traj.times[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_propagator_is_signed_identity() {
        for l in [3, 4] {
            let config = presets::edge_driven(l, 0.0, 4.0, 2.0).unwrap();
            let u = one_period_propagator(&config, PI, PI / 400.0).unwrap();
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let expected = DMatrix::from_diagonal_element(1 << l, 1 << l, C64::new(sign, 0.0));
            assert!((&u.matrix - expected).iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn propagator_requires_commensurate_step() {
        let config = presets::mid_bond_switch(4, 0.1, 2.0).unwrap();
        assert!(matches!(one_period_propagator(&config, PI, 0.3), Err(Error::Config(_))));
    }

    #[test]
    fn propagator_step_halving() {
        let config = presets::mid_bond_switch(4, 0.1, 2.0).unwrap();
        let dt = 1.25e-5 * PI * 8.0;
        let coarse = one_period_propagator(&config, PI, dt).unwrap();
        let fine = one_period_propagator(&config, PI, dt / 2.0).unwrap();
        assert!(coarse.max_abs_diff(&fine) < 1e-8, "{:e}", coarse.max_abs_diff(&fine));
        assert!(coarse.unitarity_defect < UNITARITY_TOLERANCE);
    }

    #[test]
    fn stroboscopic_zero_periods() {
        let config = presets::mid_bond_switch(4, 0.1, 2.0).unwrap();
        let u = one_period_propagator(&config, PI, PI / 200.0).unwrap();
        let traj = stroboscopic_evolve(&u, config.initial_state().unwrap(), 0, 1).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.times[0], 0.0);
    }

    #[test]
    fn stroboscopic_matches_direct_evolution() {
        let config = presets::mid_bond_switch(4, 0.1, 2.0).unwrap();
        let dt = PI / 400.0;
        let u = one_period_propagator(&config, PI, dt).unwrap();
        let strobe = stroboscopic_evolve(&u, config.initial_state().unwrap(), 100, 1).unwrap();
        // same step rule as the propagator
        let mut options = EvolveOptions::new(dt, 100.0 * PI, 400);
        options.step.scheme = Scheme::Midpoint;
        let terms = assemble_hamiltonian(&config).unwrap();
        let direct = evolve_terms(&terms, config.initial_state().unwrap(), &options).unwrap();
        assert_eq!(strobe.len(), direct.len());
        for (a, b) in strobe.correlations.iter().zip(&direct.correlations) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn dense_limit_enforced() {
        let config = presets::mid_bond_switch(12, 0.1, 2.0).unwrap();
        assert!(matches!(one_period_propagator(&config, PI, PI / 10.0), Err(Error::Unsupported(_))));
    }

    fn final_state_with(config: &LatticeConfig, dt: f64, t_final: f64, scheme: Scheme) -> Vec<C64> {
        let terms = assemble_hamiltonian(config).unwrap();
        let mut options = EvolveOptions::new(dt, t_final, 1_000_000);
        options.step.scheme = scheme;
        evolve_terms(&terms, config.initial_state().unwrap(), &options).unwrap().final_state.into_amplitudes()
    }

    #[test]
    fn convergence_orders() {
        let config = presets::edge_driven(3, 0.3, 4.0, 2.0).unwrap();
        let t_final = 6.0;
        let reference = final_state_with(&config, 1e-3, t_final, Scheme::CommutatorFree4);
        for (scheme, order) in [(Scheme::Midpoint, 2.0), (Scheme::CommutatorFree4, 4.0)] {
            let err = |dt: f64| {
                let psi = final_state_with(&config, dt, t_final, scheme);
                psi.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
            };
            let observed = (err(0.1) / err(0.05)).log2();
            assert!((observed - order).abs() < 0.3, "{scheme:?}: observed order {observed}");
        }
    }

    #[test]
    fn backward_steps_undo_forward_steps() {
        let config = presets::edge_driven(6, 0.1, 4.0, 0.0).unwrap();
        let terms = assemble_hamiltonian(&config).unwrap();
        let psi0 = product_state(config.space(), &config.initial).unwrap();
        let mut integrator = Integrator::new(&terms, StepOptions::default());
        let mut psi = psi0.amplitudes().to_vec();
        let dt = 5e-3 * PI;
        let n = 2000;
        for k in 0..n {
            integrator.step(&mut psi, k as f64 * dt, dt).unwrap();
        }
        for k in (0..n).rev() {
            integrator.step(&mut psi, (k + 1) as f64 * dt, -dt).unwrap();
        }
        let fidelity = inner(psi0.amplitudes(), &psi).norm_sqr();
        assert!(fidelity > 1.0 - 1e-10, "{fidelity}");
    }
}
