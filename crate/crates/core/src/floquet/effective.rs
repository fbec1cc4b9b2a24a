//! Closed-form effective Hamiltonians.

use crate::error::{Error, Result};
use crate::floquet::bessel::bessel_j;
use crate::hilbert::{two_site_coupling, Coupling, SparseOperator};
use crate::model::{DriveSchedule, LatticeConfig, Model};
use crate::C64;

/// Smallest `ν/λ0` for which the rotating-wave reduction is trusted.
pub const RWA_MIN_RATIO: f64 = 100.0;

fn flip_flop_chain(config: &LatticeConfig, coupling: impl Fn(usize) -> f64) -> Result<SparseOperator> {
    let space = config.space();
    let mut out = SparseOperator::zero(space);
    for j in 1..config.sites {
        let c = coupling(j);
        if c != 0.0 {
            out = out.add(&two_site_coupling(space, j, Coupling::FlipFlop)?.scale(C64::new(c, 0.0)))?;
        }
    }
    Ok(out)
}

/// Zeroth Magnus term of a chain whose middle bond carries `J cos(Ωt + φ)`
/// while every other bond is constant: the cosine bond averages out and so
/// do all `σ^±σ^±` pieces, leaving two decoupled flip-flop chains.
///
/// Requires even `L` and `4g/Ω` an integer of at least 2, so that one drive
/// period is also a period of the rotating frame and no `σ^±σ^±` term is
/// resonant.
pub fn analytic_hf0(config: &LatticeConfig) -> Result<SparseOperator> {
    config.validate()?;
    let Model::BondDriven { bonds } = &config.model else {
        return Err(Error::Unsupported("analytic H_F^(0) needs a bond-driven chain".into()));
    };
    let l = config.sites;
    if l % 2 != 0 || l < 4 {
        return Err(Error::Unsupported(format!("analytic H_F^(0) needs even L >= 4, got {l}")));
    }
    let mid = l / 2;
    let omega = match &bonds[mid - 1] {
        DriveSchedule::Cosine { frequency, .. } if *frequency > 0.0 => *frequency,
        other => return Err(Error::Unsupported(format!("bond {mid} must carry a cosine drive, found {other:?}"))),
    };
    let ratio = 4.0 * config.g / omega;
    if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 2.0 {
        return Err(Error::Unsupported(format!("4g/Ω = {ratio} must be an integer >= 2")));
    }
    let mut values = Vec::with_capacity(l - 1);
    for (i, b) in bonds.iter().enumerate() {
        if i + 1 == mid {
            values.push(0.0);
            continue;
        }
        match b {
            DriveSchedule::Constant { value } => values.push(*value),
            other => {
                return Err(Error::Unsupported(format!("bond {} must be constant, found {other:?}", i + 1)));
            }
        }
    }
    flip_flop_chain(config, |j| values[j - 1])
}

#[derive(Clone, Debug)]
pub struct RwaEffective {
    pub operator: SparseOperator,
    /// Renormalized coupling `λ0 J0(2ε/ν)` on the two bonds at the driven site.
    pub renormalized_coupling: f64,
    pub warnings: Vec<String>,
}

/// Rotating-wave effective Hamiltonian of a chain with one locally driven
/// spin: flip-flop couplings `λ0` everywhere except on the two bonds touching
/// the driven site, which carry `λ0 J0(2ε/ν)`.
pub fn rwa_local_effective(config: &LatticeConfig) -> Result<RwaEffective> {
    config.validate()?;
    let Model::LocalDriven { lambda0, drives } = &config.model else {
        return Err(Error::Unsupported("RWA effective model needs a locally driven chain".into()));
    };
    let [drive] = drives.as_slice() else {
        return Err(Error::Unsupported(format!("RWA effective model needs exactly one driven site, got {}", drives.len())));
    };
    let mut warnings = Vec::new();
    if drive.nu <= 0.0 {
        return Err(Error::Unsupported("drive frequency must be positive".into()));
    }
    let m = drive.nu / config.g;
    let m_int = m.round();
    if (m - m_int).abs() > 1e-9 || m_int < 3.0 || m_int as i64 % 2 == 0 {
        warnings.push(format!("ν/g = {m} is not an odd integer >= 3; counter-rotating terms may be resonant"));
    }
    if drive.nu / lambda0.abs() < RWA_MIN_RATIO {
        warnings.push(format!("ν/λ0 = {:.1} is below {RWA_MIN_RATIO}", drive.nu / lambda0.abs()));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let renormalized = lambda0 * bessel_j(0, 2.0 * drive.epsilon / drive.nu)?;
    let k = drive.site;
    let operator = flip_flop_chain(config, |j| if j + 1 == k || j == k { renormalized } else { *lambda0 })?;
    Ok(RwaEffective { operator, renormalized_coupling: renormalized, warnings })
}
