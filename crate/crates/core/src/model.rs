//! Drive schedules, lattice configurations and their term-list Hamiltonians.
//!
//! Units: `hbar = 1`, rates in units of the transverse field `g`, times in
//! units of `1/g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::bessel::bessel_j0;
use crate::floquet::control::ControlFunction;
use crate::hilbert::{
    product_state, site_operator, two_site_coupling, z_field_diagonal, Axis, Coupling,
    HilbertSpace, QuantumState, SparseOperator, Spin,
};
use crate::C64;

/// Scalar time-dependent coefficient multiplying a coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveSchedule {
    Constant { value: f64 },
    Cosine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `base * J0(F(t, omega))` with the zero-average control function `F`.
    BesselControlled { base: f64, x1: f64, x2: f64, omega: f64 },
}

impl DriveSchedule {
    pub fn constant(value: f64) -> Self {
        DriveSchedule::Constant { value }
    }

    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        DriveSchedule::Cosine { amplitude, frequency, phase: 0.0 }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match *self {
            DriveSchedule::Constant { value } => value,
            DriveSchedule::Cosine { amplitude, frequency, phase } => {
                amplitude * (frequency * t + phase).cos()
            }
            DriveSchedule::BesselControlled { base, x1, x2, omega } => {
                base * bessel_j0(ControlFunction { x1, x2, omega }.value(t))
            }
        }
    }

    /// Upper bound on `|value_at(t)|`.
    pub fn bound(&self) -> f64 {
        match *self {
            DriveSchedule::Constant { value } => value.abs(),
            DriveSchedule::Cosine { amplitude, .. } => amplitude.abs(),
            DriveSchedule::BesselControlled { base, .. } => base.abs(),
        }
    }

    /// Characteristic amplitude (the `J0` of a bond).
    pub fn amplitude(&self) -> f64 {
        match *self {
            DriveSchedule::Constant { value } => value,
            DriveSchedule::Cosine { amplitude, .. } => amplitude,
            DriveSchedule::BesselControlled { base, .. } => base,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DriveSchedule::Constant { value } => value.is_finite(),
            DriveSchedule::Cosine { amplitude, frequency, phase } => {
                amplitude.is_finite() && frequency.is_finite() && frequency >= 0.0 && phase.is_finite()
            }
            DriveSchedule::BesselControlled { base, x1, x2, omega } => {
                base.is_finite() && x1.is_finite() && x2.is_finite() && omega.is_finite() && omega >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid drive schedule {self:?}")))
        }
    }
}

/// Local field modulation `g_k(t) = g + epsilon cos(nu t)` on 1-based site `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalDrive {
    pub site: usize,
    pub epsilon: f64,
    pub nu: f64,
}

impl LocalDrive {
    /// `F(t) = (epsilon/nu) sin(nu t)`, the integrated field modulation.
    pub fn integrated_phase(&self, t: f64) -> f64 {
        if self.nu == 0.0 {
            self.epsilon * t
        } else {
            self.epsilon / self.nu * (self.nu * t).sin()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// `g Σ σ^z_j + Σ J_j(t) σ^x_j σ^x_{j+1}`
    BondDriven { bonds: Vec<DriveSchedule> },
    /// `Σ g_j(t) σ^z_j + λ0 Σ σ^x_j σ^x_{j+1}`
    LocalDriven { lambda0: f64, drives: Vec<LocalDrive> },
}

/// A driven chain together with its initial product state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub sites: usize,
    pub g: f64,
    pub model: Model,
    pub initial: Vec<Spin>,
}

impl LatticeConfig {
    pub fn new(sites: usize, g: f64, model: Model, initial: Vec<Spin>) -> Result<Self> {
        let config = Self { sites, g, model, initial };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let space = HilbertSpace::new(self.sites)?;
        if !self.g.is_finite() {
            return Err(Error::config("transverse field g must be finite"));
        }
        if self.initial.len() != self.sites {
            return Err(Error::config(format!(
                "initial state has {} spins for {} sites",
                self.initial.len(),
                self.sites
            )));
        }
        match &self.model {
            Model::BondDriven { bonds } => {
                if bonds.len() + 1 != self.sites {
                    return Err(Error::config(format!(
                        "{} sites need {} bond schedules, got {}",
                        self.sites,
                        self.sites - 1,
                        bonds.len()
                    )));
                }
                bonds.iter().try_for_each(DriveSchedule::validate)
            }
            Model::LocalDriven { lambda0, drives } => {
                if !lambda0.is_finite() {
                    return Err(Error::config("lambda0 must be finite"));
                }
                let mut seen = vec![false; self.sites];
                for d in drives {
                    let bit = space.site_bit(d.site)?;
                    if seen[bit] {
                        return Err(Error::config(format!("site {} driven twice", d.site)));
                    }
                    seen[bit] = true;
                    if !(d.epsilon.is_finite() && d.nu.is_finite() && d.nu >= 0.0) {
                        return Err(Error::config(format!("invalid local drive {d:?}")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(self.sites).expect("validated site count")
    }

    pub fn initial_state(&self) -> Result<QuantumState> {
        product_state(HilbertSpace::new(self.sites)?, &self.initial)
    }

    /// Coupling amplitude of 1-based bond `j` as a schedule.
    pub fn bond_schedule(&self, j: usize) -> DriveSchedule {
        match &self.model {
            Model::BondDriven { bonds } => bonds[j - 1].clone(),
            Model::LocalDriven { lambda0, .. } => DriveSchedule::constant(*lambda0),
        }
    }

    /// Integrated field `∫_0^t g_j(s) ds` on 1-based site `j`.
    pub fn integrated_field(&self, j: usize, t: f64) -> f64 {
        let drive = match &self.model {
            Model::LocalDriven { drives, .. } => {
                drives.iter().find(|d| d.site == j).map_or(0.0, |d| d.integrated_phase(t))
            }
            Model::BondDriven { .. } => 0.0,
        };
        self.g * t + drive
    }
}

/// Common configurations of the bond-driven and locally driven chains.
pub mod presets {
    use super::*;

    fn all_up(sites: usize) -> Vec<Spin> {
        vec![Spin::Up; sites]
    }

    /// All up except the last site.
    pub fn last_down(sites: usize) -> Vec<Spin> {
        let mut spins = all_up(sites);
        if let Some(s) = spins.last_mut() {
            *s = Spin::Down;
        }
        spins
    }

    fn cosine_or_constant(j0: f64, omega: f64) -> DriveSchedule {
        if omega == 0.0 {
            DriveSchedule::constant(j0)
        } else {
            DriveSchedule::cosine(j0, omega)
        }
    }

    /// Bonds 1 and 2 modulated at `omega1`, `omega2` (constant when zero),
    /// remaining bonds constant, all spins up.
    pub fn edge_driven(sites: usize, j0: f64, omega1: f64, omega2: f64) -> Result<LatticeConfig> {
        let bonds = (1..sites)
            .map(|j| match j {
                1 => cosine_or_constant(j0, omega1),
                2 => cosine_or_constant(j0, omega2),
                _ => DriveSchedule::constant(j0),
            })
            .collect();
        LatticeConfig::new(sites, 1.0, Model::BondDriven { bonds }, all_up(sites))
    }

    /// Single cosine bond at `L/2` with all other bonds constant; the last
    /// spin starts down.
    pub fn mid_bond_switch(sites: usize, j0: f64, omega: f64) -> Result<LatticeConfig> {
        if sites < 2 || sites % 2 != 0 {
            return Err(Error::config("mid-bond switch needs an even site count"));
        }
        let bonds = (1..sites)
            .map(|j| if j == sites / 2 { DriveSchedule::cosine(j0, omega) } else { DriveSchedule::constant(j0) })
            .collect();
        LatticeConfig::new(sites, 1.0, Model::BondDriven { bonds }, last_down(sites))
    }

    /// First bond at `omega1` creating excitations, bond `L/2` at `omega_mid`
    /// acting as the switch, all spins up.
    pub fn double_drive(sites: usize, j0: f64, omega1: f64, omega_mid: f64) -> Result<LatticeConfig> {
        if sites < 4 || sites % 2 != 0 {
            return Err(Error::config("double drive needs an even site count >= 4"));
        }
        let bonds = (1..sites)
            .map(|j| match j {
                1 => cosine_or_constant(j0, omega1),
                j if j == sites / 2 => cosine_or_constant(j0, omega_mid),
                _ => DriveSchedule::constant(j0),
            })
            .collect();
        LatticeConfig::new(sites, 1.0, Model::BondDriven { bonds }, all_up(sites))
    }

    /// Uniform `lambda0` chain with site `k` driven by `epsilon cos(nu t)`;
    /// the last spin starts down.
    pub fn local_switch(sites: usize, k: usize, lambda0: f64, epsilon: f64, nu: f64) -> Result<LatticeConfig> {
        LatticeConfig::new(
            sites,
            1.0,
            Model::LocalDriven { lambda0, drives: vec![LocalDrive { site: k, epsilon, nu }] },
            last_down(sites),
        )
    }
}

/// Phase `θ(t) = rate·t + Σ a sin(ω t)` of a rotating-frame factor `e^{iθ(t)}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub rate: f64,
    /// `(amplitude, frequency)` pairs.
    pub sinusoids: Vec<(f64, f64)>,
}

impl Phase {
    pub fn value(&self, t: f64) -> f64 {
        self.rate * t + self.sinusoids.iter().map(|(a, w)| a * (w * t).sin()).sum::<f64>()
    }

    fn plus(&self, other: &Phase) -> Phase {
        let mut sinusoids = self.sinusoids.clone();
        sinusoids.extend_from_slice(&other.sinusoids);
        Phase { rate: self.rate + other.rate, sinusoids }.simplified()
    }

    fn negated(&self) -> Phase {
        Phase { rate: -self.rate, sinusoids: self.sinusoids.iter().map(|(a, w)| (-a, *w)).collect() }
    }

    fn simplified(mut self) -> Phase {
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, w) in self.sinusoids.drain(..) {
            match merged.iter_mut().find(|(_, w2)| *w2 == w) {
                Some(entry) => entry.0 += a,
                None => merged.push((a, w)),
            }
        }
        merged.retain(|(a, w)| *a != 0.0 && *w != 0.0);
        Phase { rate: self.rate, sinusoids: merged }
    }
}

/// Coefficient tag attached to an operator in a [`TermList`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFunction {
    Drive(DriveSchedule),
    /// `drive(t) · e^{i phase(t)}`, evaluated in closed form.
    Phased { drive: DriveSchedule, phase: Phase },
}

impl TimeFunction {
    pub fn value(&self, t: f64) -> C64 {
        match self {
            TimeFunction::Drive(d) => C64::new(d.value_at(t), 0.0),
            TimeFunction::Phased { drive, phase } => C64::from_polar(drive.value_at(t), phase.value(t)),
        }
    }

    pub fn bound(&self) -> f64 {
        match self {
            TimeFunction::Drive(d) | TimeFunction::Phased { drive: d, .. } => d.bound(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub label: String,
    pub coefficient: TimeFunction,
    pub operator: SparseOperator,
}

/// Hamiltonian as `Σ static_k + Σ c_k(t) A_k`.
#[derive(Clone, Debug)]
pub struct TermList {
    space: HilbertSpace,
    static_terms: Vec<SparseOperator>,
    terms: Vec<Term>,
}

impl TermList {
    pub fn new(space: HilbertSpace, static_terms: Vec<SparseOperator>, terms: Vec<Term>) -> Result<Self> {
        for op in static_terms.iter().chain(terms.iter().map(|t| &t.operator)) {
            space.check_same(&op.space())?;
        }
        Ok(Self { space, static_terms, terms })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn static_terms(&self) -> &[SparseOperator] {
        &self.static_terms
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Sum of all time-independent pieces.
    pub fn static_part(&self) -> SparseOperator {
        SparseOperator::linear_combination(self.space, self.static_terms.iter().map(|op| (C64::new(1.0, 0.0), op)))
            .expect("spaces checked at construction")
    }

    pub fn coefficients_at(&self, t: f64) -> Vec<C64> {
        self.terms.iter().map(|term| term.coefficient.value(t)).collect()
    }

    pub fn hamiltonian_at(&self, t: f64) -> SparseOperator {
        let one = C64::new(1.0, 0.0);
        let coeffs = self.coefficients_at(t);
        SparseOperator::linear_combination(
            self.space,
            self.static_terms
                .iter()
                .map(|op| (one, op))
                .chain(coeffs.into_iter().zip(self.terms.iter().map(|t| &t.operator))),
        )
        .expect("spaces checked at construction")
    }
}

/// Lab-frame Hamiltonian of `config` as a term list.
pub fn assemble_hamiltonian(config: &LatticeConfig) -> Result<TermList> {
    config.validate()?;
    let space = config.space();
    let field = SparseOperator::diagonal(
        space,
        z_field_diagonal(space, &vec![config.g; config.sites]).into_iter().map(C64::from).collect(),
        true,
    );
    let mut static_terms = vec![field];
    let mut terms = Vec::new();
    match &config.model {
        Model::BondDriven { bonds } => {
            for (i, schedule) in bonds.iter().enumerate() {
                terms.push(Term {
                    label: format!("xx_{}", i + 1),
                    coefficient: TimeFunction::Drive(schedule.clone()),
                    operator: two_site_coupling(space, i + 1, Coupling::Xx)?,
                });
            }
        }
        Model::LocalDriven { lambda0, drives } => {
            for j in 1..config.sites {
                static_terms.push(two_site_coupling(space, j, Coupling::Xx)?.scale(C64::new(*lambda0, 0.0)));
            }
            for d in drives {
                terms.push(Term {
                    label: format!("z_{}", d.site),
                    coefficient: TimeFunction::Drive(DriveSchedule::cosine(d.epsilon, d.nu)),
                    operator: site_operator(space, d.site, Axis::Z)?,
                });
            }
        }
    }
    TermList::new(space, static_terms, terms)
}

/// Rotating-frame phase of `σ^+_j`: `e^{iθ_j(t)}` with `θ_j = 2∫g_j`.
fn raising_phase(config: &LatticeConfig, j: usize) -> Phase {
    let mut phase = Phase { rate: 2.0 * config.g, sinusoids: Vec::new() };
    if let Model::LocalDriven { drives, .. } = &config.model {
        if let Some(d) = drives.iter().find(|d| d.site == j) {
            if d.nu == 0.0 {
                phase.rate += 2.0 * d.epsilon;
            } else {
                phase.sinusoids.push((2.0 * d.epsilon / d.nu, d.nu));
            }
        }
    }
    phase
}

/// Hamiltonian in the interaction picture with respect to the (possibly
/// locally modulated) transverse field. Each bond contributes four terms,
/// `σ^+σ^+`, `σ^+σ^-`, `σ^-σ^+`, `σ^-σ^-`, carrying the closed-form phases
/// picked up by the ladder operators.
pub fn interaction_picture_terms(config: &LatticeConfig) -> Result<TermList> {
    config.validate()?;
    let space = config.space();
    let mut terms = Vec::with_capacity(4 * (config.sites - 1));
    for j in 1..config.sites {
        let left = raising_phase(config, j);
        let right = raising_phase(config, j + 1);
        let drive = config.bond_schedule(j);
        let pieces = [
            (Coupling::DoubleRaise, "pp", left.plus(&right)),
            (Coupling::RaiseLower, "pm", left.plus(&right.negated())),
            (Coupling::LowerRaise, "mp", left.negated().plus(&right)),
            (Coupling::DoubleLower, "mm", left.plus(&right).negated()),
        ];
        for (kind, tag, phase) in pieces {
            terms.push(Term {
                label: format!("{tag}_{j}"),
                coefficient: TimeFunction::Phased { drive: drive.clone(), phase },
                operator: two_site_coupling(space, j, kind)?,
            });
        }
    }
    TermList::new(space, Vec::new(), terms)
}

/// Diagonal of the frame rotation `exp(-i ∫_0^t H_0)` that maps
/// interaction-picture states back to the lab frame.
pub fn frame_rotation(config: &LatticeConfig, t: f64) -> Vec<C64> {
    let space = config.space();
    let fields: Vec<f64> = (1..=config.sites).map(|j| config.integrated_field(j, t)).collect();
    z_field_diagonal(space, &fields).into_iter().map(|e| C64::from_polar(1.0, -e)).collect()
}
