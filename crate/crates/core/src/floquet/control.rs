//! Zero-average control function for Bessel-renormalized couplings.
//!
//! `F(t, ω) = x1 cos(ωt) + ((x1 + x2)/2)(1 - cos(ωt))` sweeps the Bessel
//! argument between `x1` and `x2` around the first zero of `J0`, so that the
//! renormalized coupling `J0(F)` oscillates with (nearly) zero mean.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::bessel::bessel_j0;

pub const DEFAULT_X1: f64 = 2.0;
pub const DEFAULT_X2: f64 = 2.847_876_95;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlFunction {
    pub x1: f64,
    pub x2: f64,
    pub omega: f64,
}

impl ControlFunction {
    pub fn new(omega: f64) -> Self {
        Self { x1: DEFAULT_X1, x2: DEFAULT_X2, omega }
    }

    pub fn value(&self, t: f64) -> f64 {
        let c = (self.omega * t).cos();
        self.x1 * c + 0.5 * (self.x1 + self.x2) * (1.0 - c)
    }

    pub fn coupling(&self, t: f64) -> f64 {
        bessel_j0(self.value(t))
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `(1/T) ∫_0^T J0(F(t)) dt` with `T = π/g`, composite trapezoid on
    /// `nodes + 1` points.
    pub fn average(&self, g: f64, nodes: usize) -> f64 {
        assert!(nodes >= 1, "need at least one quadrature interval");
        let span = PI / g;
        let h = span / nodes as f64;
        let interior: f64 = (1..nodes).map(|k| self.coupling(k as f64 * h)).sum();
        let ends = 0.5 * (self.coupling(0.0) + self.coupling(span));
        (interior + ends) / nodes as f64
    }

    /// Samples `(t, F(t), J0(F(t)))` on `samples` uniform points of `[0, t_end]`.
    pub fn trace(&self, t_end: f64, samples: usize) -> Vec<(f64, f64, f64)> {
        let n = samples.max(2);
        (0..n)
            .map(|k| {
                let t = t_end * k as f64 / (n - 1) as f64;
                let f = self.value(t);
                (t, f, bessel_j0(f))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_values() {
        let cf = ControlFunction::new(2.0);
        assert_eq!(cf.value(0.0), 2.0);
        assert!((cf.value(PI / 2.0) - DEFAULT_X2).abs() < 1e-14);
    }

    #[test]
    fn periodic() {
        for omega in [2.0, 4.0, 1.3] {
            let cf = ControlFunction::new(omega);
            for k in 0..50 {
                let t = 0.173 * k as f64;
                assert!((cf.value(t) - cf.value(t + cf.period())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn average_vanishes_at_resonances() {
        for omega in [2.0, 4.0] {
            let avg = ControlFunction::new(omega).average(1.0, 1 << 12);
            assert!(avg.abs() < 1e-7, "omega={omega} avg={avg:e}");
        }
    }

    #[test]
    fn trace_covers_interval() {
        let tr = ControlFunction::new(4.0).trace(2.0 * PI, 101);
        assert_eq!(tr.len(), 101);
        assert_eq!(tr[0].0, 0.0);
        assert!((tr[100].0 - 2.0 * PI).abs() < 1e-15);
        assert!(tr.iter().all(|(_, f, _)| (2.0 - 1e-12..=DEFAULT_X2 + 1e-12).contains(f)));
    }
}
