//! Magnetizations, nearest-neighbour connected correlations and the
//! quantities derived from them: correlation-front fits, switch verdicts,
//! single-flip amplitudes and spectral peaks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::hilbert::QuantumState;
use crate::C64;

/// Switch-off threshold on `max |C|` at the switching bond.
pub const SWITCH_THRESHOLD: f64 = 0.05;

/// `σ^z` data of one state, computed in a single pass over the probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ZProfile {
    /// `<σ^z_j>`, index `j-1`.
    pub magnetizations: Vec<f64>,
    /// `C_{j,j+1}`, index `j-1`.
    pub correlations: Vec<f64>,
    /// `<Π_j σ^z_j>`.
    pub parity: f64,
    pub norm: f64,
}

pub fn z_profile(state: &QuantumState) -> ZProfile {
    let sites = state.space().sites();
    let p: Vec<f64> = state.amplitudes().iter().map(C64::norm_sqr).collect();
    let total: f64 = p.iter().sum();
    // weight with site j down: odd blocks of 2^j
    let down: Vec<f64> = (0..sites)
        .map(|j| p.chunks(1 << j).skip(1).step_by(2).map(|c| c.iter().sum::<f64>()).sum())
        .collect();
    // weight with bond j anti-aligned: blocks of 2^j whose index is 1 or 2 mod 4
    let flipped: Vec<f64> = (0..sites.saturating_sub(1))
        .map(|j| {
            p.chunks(1 << j)
                .enumerate()
                .filter(|(i, _)| matches!(i & 3, 1 | 2))
                .map(|(_, c)| c.iter().sum::<f64>())
                .sum()
        })
        .collect();
    let odd: f64 = p.iter().enumerate().filter(|(b, _)| b.count_ones() % 2 == 1).map(|(_, w)| w).sum();
    let magnetizations: Vec<f64> = down.iter().map(|w| total - 2.0 * w).collect();
    let correlations = flipped
        .iter()
        .enumerate()
        .map(|(j, w)| (total - 2.0 * w) - magnetizations[j] * magnetizations[j + 1])
        .collect();
    ZProfile { magnetizations, correlations, parity: total - 2.0 * odd, norm: total.sqrt() }
}

/// `<σ^z_j>` on 1-based site `j`.
pub fn magnetization(state: &QuantumState, j: usize) -> Result<f64> {
    let bit = state.space().site_bit(j)?;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| if b >> bit & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum())
}

/// `C_{j,j+1} = <σ^z_j σ^z_{j+1}> - <σ^z_j><σ^z_{j+1}>` on 1-based bond `j`.
pub fn connected_correlation(state: &QuantumState, j: usize) -> Result<f64> {
    let bit = state.space().bond_bit(j)?;
    let zz: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| if (b >> bit ^ b >> (bit + 1)) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum();
    Ok(zz - magnetization(state, j)? * magnetization(state, j + 1)?)
}

/// Amplitudes of the single-excitation-pair ansatz: all up (`alpha`) and
/// site 1 plus site `j` flipped (`beta[j-2]`, `j = 2..=L`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzAmplitudes {
    pub alpha: C64,
    pub beta: Vec<C64>,
    /// `1 - |alpha|^2 - Σ |beta_j|^2`, the weight outside the ansatz.
    pub residual: f64,
}

pub fn ansatz_amplitudes(state: &QuantumState) -> AnsatzAmplitudes {
    let amps = state.amplitudes();
    let sites = state.space().sites();
    let alpha = amps[0];
    let beta: Vec<C64> = (2..=sites).map(|j| amps[1 | (1 << (j - 1))]).collect();
    let captured = alpha.norm_sqr() + beta.iter().map(C64::norm_sqr).sum::<f64>();
    AnsatzAmplitudes { alpha, beta, residual: 1.0 - captured }
}

/// Linear fit of the correlation-maximum arrival times versus bond index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontFit {
    /// `(bond, t·J0 at the maximum, max |C|)`.
    pub maxima: Vec<(usize, f64, f64)>,
    /// In `1/J0` per bond.
    pub slope: f64,
    /// In `1/J0`.
    pub intercept: f64,
    /// `1/slope`, in units of `J0`.
    pub v_group: f64,
    pub rms_residual: f64,
    /// One standard error of `v_group` from the fit residuals.
    pub v_group_stderr: f64,
}

/// Locates the global maximum of `|C_{j,j+1}|` for each selected bond
/// (earliest sample on ties) and fits `t·J0 = slope·bond + intercept`.
pub fn front_fit(trajectory: &Trajectory, bonds: &[usize], j0: f64) -> Result<FrontFit> {
    let n_bonds = trajectory.correlations.first().map_or(0, Vec::len);
    if bonds.len() < 2 {
        return Err(Error::config("front fit needs at least two bonds"));
    }
    if trajectory.times.len() < 2 {
        return Err(Error::config("front fit needs at least two time samples"));
    }
    let last = trajectory.times.len() - 1;
    let mut maxima = Vec::with_capacity(bonds.len());
    for &bond in bonds {
        if bond == 0 || bond > n_bonds {
            return Err(Error::Index { what: "bond", index: bond, max: n_bonds });
        }
        let (k, peak) = trajectory
            .correlations
            .iter()
            .map(|row| row[bond - 1].abs())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
        if k == last {
            return Err(Error::FrontNotCaptured { bond });
        }
        maxima.push((bond, trajectory.times[k] * j0, peak));
    }
    let n = maxima.len() as f64;
    let mean_x = maxima.iter().map(|m| m.0 as f64).sum::<f64>() / n;
    let mean_y = maxima.iter().map(|m| m.1).sum::<f64>() / n;
    let sxx: f64 = maxima.iter().map(|m| (m.0 as f64 - mean_x).powi(2)).sum();
    let sxy: f64 = maxima.iter().map(|m| (m.0 as f64 - mean_x) * (m.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = maxima.iter().map(|m| (m.1 - slope * m.0 as f64 - intercept).powi(2)).sum();
    let slope_stderr = if maxima.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(FrontFit {
        maxima,
        slope,
        intercept,
        v_group: 1.0 / slope,
        rms_residual: (sse / n).sqrt(),
        v_group_stderr: slope_stderr / (slope * slope),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchMode {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchVerdict {
    pub max_abs_corr: f64,
    pub threshold: f64,
    pub mode: SwitchMode,
}

impl SwitchVerdict {
    pub fn from_max(max_abs_corr: f64, threshold: f64) -> Self {
        let mode = if max_abs_corr <= threshold { SwitchMode::Off } else { SwitchMode::On };
        Self { max_abs_corr, threshold, mode }
    }
}

/// Switch state from the largest recorded `|C|` at 1-based `bond`.
pub fn classify_switch(trajectory: &Trajectory, bond: usize, threshold: f64) -> Result<SwitchVerdict> {
    let n_bonds = trajectory.correlations.first().map_or(0, Vec::len);
    if bond == 0 || bond > n_bonds {
        return Err(Error::Index { what: "bond", index: bond, max: n_bonds });
    }
    let max = trajectory.correlations.iter().map(|row| row[bond - 1].abs()).fold(0.0, f64::max);
    Ok(SwitchVerdict::from_max(max, threshold))
}

/// Dominant non-zero frequency of a uniformly sampled real series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPeak {
    pub bin: usize,
    /// Width of one frequency bin (cycles per time unit).
    pub bin_width: f64,
    pub frequency: f64,
    pub period: f64,
}

/// Mean-subtracted discrete Fourier transform; returns the bin of largest
/// magnitude among `1..=N/2`.
pub fn dominant_period(series: &[f64], sample_spacing: f64) -> Option<SpectralPeak> {
    let n = series.len();
    if n < 4 || sample_spacing <= 0.0 {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let power = |k: usize| {
        let w = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in centered.iter().enumerate() {
            let (s, c) = (w * i as f64).sin_cos();
            re += v * c;
            im += v * s;
        }
        re * re + im * im
    };
    let powers = crate::par::map_indices(n / 2, |i| power(i + 1));
    let (idx, _) = powers
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if *p > best.1 { (i, *p) } else { best });
    let bin = idx + 1;
    let bin_width = 1.0 / (n as f64 * sample_spacing);
    let frequency = bin as f64 * bin_width;
    Some(SpectralPeak { bin, bin_width, frequency, period: 1.0 / frequency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{product_state, HilbertSpace, Spin};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn sp(l: usize) -> HilbertSpace {
        HilbertSpace::new(l).unwrap()
    }

    fn synthetic(times: Vec<f64>, corr: Vec<Vec<f64>>) -> Trajectory {
        let l = corr[0].len() + 1;
        Trajectory {
            magnetizations: vec![vec![1.0; l]; times.len()],
            parity: vec![1.0; times.len()],
            norms: vec![1.0; times.len()],
            times,
            correlations: corr,
            amplitudes: None,
            final_state: product_state(sp(l), &vec![Spin::Up; l]).unwrap(),
            renormalizations: 0,
            matvecs: 0,
        }
    }

    #[test]
    fn product_states_have_no_correlation() {
        let s = product_state(sp(4), &Spin::parse_chain("udud").unwrap()).unwrap();
        for j in 1..4 {
            assert!(connected_correlation(&s, j).unwrap().abs() < 1e-12);
        }
        let p = z_profile(&s);
        assert_eq!(p.magnetizations, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(p.parity, 1.0);
    }

    #[test]
    fn bell_pair_correlations() {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        let aligned = QuantumState::new(sp(2), vec![h, z, z, h]).unwrap();
        let anti = QuantumState::new(sp(2), vec![z, h, h, z]).unwrap();
        assert!((connected_correlation(&aligned, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((connected_correlation(&anti, 1).unwrap() + 1.0).abs() < 1e-12);
        assert!((z_profile(&anti).correlations[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bond_index_checked() {
        let s = product_state(sp(3), &[Spin::Up; 3]).unwrap();
        assert!(matches!(connected_correlation(&s, 3), Err(Error::Index { .. })));
        assert!(matches!(connected_correlation(&s, 0), Err(Error::Index { .. })));
    }

    #[test]
    fn ansatz_on_basis_states() {
        let a = ansatz_amplitudes(&product_state(sp(5), &[Spin::Up; 5]).unwrap());
        assert_eq!(a.alpha, C64::new(1.0, 0.0));
        assert!(a.beta.iter().all(|b| *b == C64::new(0.0, 0.0)));
        assert_eq!(a.residual, 0.0);

        let a = ansatz_amplitudes(&product_state(sp(6), &Spin::parse_chain("dudu uu").unwrap()).unwrap());
        assert_eq!(a.beta[1], C64::new(1.0, 0.0)); // beta_3
        assert_eq!(a.beta.iter().filter(|b| b.norm() > 0.0).count(), 1);
        assert_eq!(a.alpha, C64::new(0.0, 0.0));
    }

    #[test]
    fn exact_linear_front() {
        let bonds: Vec<usize> = (1..=5).collect();
        let times: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
        let corr = times
            .iter()
            .map(|t| bonds.iter().map(|b| if (t - (0.5 * *b as f64 + 1.0)).abs() < 1e-9 { 0.8 } else { 0.1 }).collect())
            .collect();
        let fit = front_fit(&synthetic(times, corr), &bonds, 1.0).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.v_group - 2.0).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn front_at_final_sample_is_rejected() {
        let times = vec![0.0, 1.0, 2.0];
        let corr = vec![vec![0.0, 0.0], vec![0.5, 0.1], vec![0.1, 0.9]];
        let err = front_fit(&synthetic(times, corr), &[1, 2], 1.0).unwrap_err();
        assert!(matches!(err, Error::FrontNotCaptured { bond: 2 }));
    }

    #[test]
    fn ties_resolve_to_earliest() {
        let times = vec![0.0, 1.0, 2.0, 3.0];
        let corr = vec![vec![0.0, 0.0], vec![0.5, 0.2], vec![0.5, 0.7], vec![0.1, 0.7]];
        let fit = front_fit(&synthetic(times, corr), &[1, 2], 0.5).unwrap();
        assert_eq!(fit.maxima[0].1, 0.5);
        assert_eq!(fit.maxima[1].1, 1.0);
    }

    #[test]
    fn switch_classification() {
        let zero = synthetic(vec![0.0, 1.0], vec![vec![0.0; 3]; 2]);
        let v = classify_switch(&zero, 2, SWITCH_THRESHOLD).unwrap();
        assert_eq!(v.mode, SwitchMode::Off);
        assert_eq!(v.max_abs_corr, 0.0);

        let on = synthetic(vec![0.0, 1.0], vec![vec![0.0; 3], vec![0.0, -0.3, 0.0]]);
        assert_eq!(classify_switch(&on, 2, SWITCH_THRESHOLD).unwrap().mode, SwitchMode::On);
        assert!(classify_switch(&on, 4, SWITCH_THRESHOLD).is_err());
    }

    #[test]
    fn spectral_peak_of_pure_tone() {
        let spacing = 0.05;
        let series: Vec<f64> = (0..4000).map(|k| 0.3 + (2.0 * std::f64::consts::PI * k as f64 * spacing / 20.0).cos()).collect();
        let peak = dominant_period(&series, spacing).unwrap();
        assert_eq!(peak.bin, 10);
        assert!((peak.period - 20.0).abs() < 1e-9);
    }

    fn random_state(l: usize, seed: &[f64]) -> QuantumState {
        let amps = (0..1usize << l)
            .map(|k| {
                let a = seed[k % seed.len()];
                C64::new((a * (k as f64 + 0.5)).sin(), (a * a * k as f64).cos() * 0.5)
            })
            .collect();
        QuantumState::normalized(sp(l), amps).unwrap()
    }

    proptest! {
        #[test]
        fn correlation_bounded(l in 2usize..7, seed in proptest::collection::vec(-4.0f64..4.0, 5)) {
            let s = random_state(l, &seed);
            let profile = z_profile(&s);
            for j in 1..l {
                let c = connected_correlation(&s, j).unwrap();
                prop_assert!(c.abs() <= 1.0 + 1e-12);
                prop_assert!((c - profile.correlations[j - 1]).abs() < 1e-12);
            }
        }

        #[test]
        fn ansatz_weight_bounded(l in 2usize..7, seed in proptest::collection::vec(-4.0f64..4.0, 5)) {
            let a = ansatz_amplitudes(&random_state(l, &seed));
            prop_assert!(a.residual >= -1e-10);
        }

        #[test]
        fn raising_threshold_never_switches_on(max in 0.0f64..1.0, t1 in 0.0f64..1.0, dt in 0.0f64..1.0) {
            let low = SwitchVerdict::from_max(max, t1);
            let high = SwitchVerdict::from_max(max, t1 + dt);
            prop_assert!(!(low.mode == SwitchMode::Off && high.mode == SwitchMode::On));
        }

        #[test]
        fn linear_fronts_recovered(slope in 0.2f64..2.0, intercept in 0.0f64..3.0) {
            let bonds: Vec<usize> = (1..=6).collect();
            let dt = 1e-3;
            let n = ((slope * 6.0 + intercept) / dt) as usize + 10;
            let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
            let targets: Vec<usize> = bonds.iter().map(|b| ((slope * *b as f64 + intercept) / dt).round() as usize).collect();
            let corr = (0..n).map(|k| targets.iter().map(|t| if *t == k { 0.9 } else { 0.0 }).collect()).collect();
            let fit = front_fit(&synthetic(times.clone(), corr), &bonds, 1.0).unwrap();
            let exact_slope: f64 = {
                let xs: Vec<f64> = bonds.iter().map(|b| *b as f64).collect();
                let ys: Vec<f64> = targets.iter().map(|k| times[*k]).collect();
                let mx = xs.iter().sum::<f64>() / 6.0;
                let my = ys.iter().sum::<f64>() / 6.0;
                xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
                    / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
            };
            prop_assert!((fit.slope - exact_slope).abs() < 1e-12);
        }
    }
}
