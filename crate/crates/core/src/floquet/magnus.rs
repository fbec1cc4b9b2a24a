//! First two Magnus terms of the rotating-frame Hamiltonian.
//!
//! `H_I(t) = Σ_k c_k(t) A_k` with closed-form coefficients, so both terms
//! reduce to scalar quadratures followed by a handful of sparse products:
//!
//! * order 0: `Σ_k <c_k> A_k` with `<c_k>` the trapezoid mean over one period;
//! * order 1: `(1/2iT) Σ_{k<l} (c_kl - c_lk) [A_k, A_l]` where
//!   `c_kl = ∫_0^T c_k(t) S_l(t) dt` and `S_l(t) = ∫_0^t c_l`.
//!
//! `S_l` is the cumulative trapezoid on the same nodes as the outer rule.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::SparseOperator;
use crate::model::{interaction_picture_terms, LatticeConfig, TermList};
use crate::par;
use crate::C64;

pub const DEFAULT_QUADRATURE_POINTS: usize = 4096;

/// Magnus matrices are dense; beyond 8 sites they stop being useful.
pub const MAX_MAGNUS_SITES: usize = 8;

const PERIODICITY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MagnusResult {
    pub order0: DMatrix<C64>,
    pub order1: DMatrix<C64>,
    pub quadrature_points: usize,
    pub period: f64,
    /// False when `H_I(0)` and `H_I(T)` differ by more than 1e-8.
    pub periodic: bool,
}

impl MagnusResult {
    /// `max |order1| / max |order0|`.
    pub fn order_ratio(&self) -> f64 {
        max_abs(&self.order1) / max_abs(&self.order0)
    }
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Coefficient samples `c_k(t_i)` on `n + 1` uniform nodes.
struct Samples {
    h: f64,
    values: Vec<Vec<C64>>,
}

impl Samples {
    fn new(terms: &TermList, period: f64, n: usize) -> Self {
        let h = period / n as f64;
        let values = par::map_indices(n + 1, |i| terms.coefficients_at(i as f64 * h));
        Self { h, values }
    }

    fn trapezoid(&self, f: impl Fn(usize) -> C64) -> C64 {
        let n = self.values.len() - 1;
        let interior: C64 = (1..n).map(&f).sum();
        (interior + 0.5 * (f(0) + f(n))) * self.h
    }

    fn mismatch(&self, terms: &TermList) -> f64 {
        let (first, last) = (&self.values[0], &self.values[self.values.len() - 1]);
        terms
            .terms()
            .iter()
            .zip(first.iter().zip(last))
            .map(|(term, (a, b))| (a - b).norm() * term.operator.max_abs())
            .fold(0.0, f64::max)
    }
}

fn check_inputs(config: &LatticeConfig, period: f64, n: usize) -> Result<TermList> {
    if config.sites > MAX_MAGNUS_SITES {
        return Err(Error::Unsupported(format!("Magnus matrices are limited to L <= {MAX_MAGNUS_SITES}")));
    }
    if n < 64 || n % 2 != 0 {
        return Err(Error::config(format!("quadrature needs an even number of intervals >= 64, got {n}")));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::config(format!("period must be positive, got {period}")));
    }
    interaction_picture_terms(config)
}

fn warn_if_aperiodic(samples: &Samples, terms: &TermList) -> bool {
    let mismatch = samples.mismatch(terms);
    if mismatch > PERIODICITY_TOLERANCE {
        log::warn!("H_I(0) and H_I(T) differ by {mismatch:.3e}; the trapezoid rule assumes a periodic integrand");
        return false;
    }
    true
}

fn order0_from(terms: &TermList, samples: &Samples, period: f64) -> DMatrix<C64> {
    let dim = terms.space().dim();
    let mut out = terms.static_part().to_dense();
    for (k, term) in terms.terms().iter().enumerate() {
        let mean = samples.trapezoid(|i| samples.values[i][k]) / period;
        accumulate(&mut out, &term.operator, mean);
    }
    debug_assert_eq!(out.nrows(), dim);
    out
}

fn order1_from(terms: &TermList, samples: &Samples, period: f64) -> Result<DMatrix<C64>> {
    let space = terms.space();
    let mut ops: Vec<&SparseOperator> = terms.terms().iter().map(|t| &t.operator).collect();
    let mut coeff: Vec<Vec<C64>> = samples.values.to_vec();
    let static_part = terms.static_part();
    if static_part.nnz() > 0 {
        ops.push(&static_part);
        coeff.iter_mut().for_each(|row| row.push(C64::new(1.0, 0.0)));
    }
    let nk = ops.len();
    let nodes = coeff.len();

    // running integrals S_l(t_i)
    let mut prefix = vec![vec![C64::new(0.0, 0.0); nk]; nodes];
    for i in 1..nodes {
        for l in 0..nk {
            prefix[i][l] = prefix[i - 1][l] + 0.5 * samples.h * (coeff[i - 1][l] + coeff[i][l]);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..nk).flat_map(|k| (k + 1..nk).map(move |l| (k, l))).collect();
    let weights = par::map_indices(pairs.len(), |p| {
        let (k, l) = pairs[p];
        let ckl = samples.trapezoid(|i| coeff[i][k] * prefix[i][l]);
        let clk = samples.trapezoid(|i| coeff[i][l] * prefix[i][k]);
        (ckl - clk) / C64::new(0.0, 2.0 * period)
    });

    let mut out = DMatrix::from_element(space.dim(), space.dim(), C64::new(0.0, 0.0));
    for (&(k, l), w) in pairs.iter().zip(weights) {
        if w.norm() == 0.0 {
            continue;
        }
        let comm = ops[k].commutator(ops[l])?;
        accumulate(&mut out, &comm, w);
    }
    Ok(out)
}

fn accumulate(out: &mut DMatrix<C64>, op: &SparseOperator, weight: C64) {
    for (r, c, v) in op.triplets() {
        out[(r, c)] += weight * v;
    }
}

/// `(1/T) ∫_0^T H_I(t) dt` by the composite trapezoid on `n + 1` nodes.
pub fn magnus_order0(config: &LatticeConfig, period: f64, n: usize) -> Result<DMatrix<C64>> {
    let terms = check_inputs(config, period, n)?;
    let samples = Samples::new(&terms, period, n);
    warn_if_aperiodic(&samples, &terms);
    Ok(order0_from(&terms, &samples, period))
}

/// `(1/2iT) ∫_0^T dt1 ∫_0^t1 dt2 [H_I(t1), H_I(t2)]`.
pub fn magnus_order1(config: &LatticeConfig, period: f64, n: usize) -> Result<DMatrix<C64>> {
    let terms = check_inputs(config, period, n)?;
    let samples = Samples::new(&terms, period, n);
    warn_if_aperiodic(&samples, &terms);
    order1_from(&terms, &samples, period)
}

/// Both Magnus terms from one set of coefficient samples.
pub fn magnus(config: &LatticeConfig, period: f64, n: usize) -> Result<MagnusResult> {
    let terms = check_inputs(config, period, n)?;
    let samples = Samples::new(&terms, period, n);
    let periodic = warn_if_aperiodic(&samples, &terms);
    Ok(MagnusResult {
        order0: order0_from(&terms, &samples, period),
        order1: order1_from(&terms, &samples, period)?,
        quadrature_points: n,
        period,
        periodic,
    })
}
