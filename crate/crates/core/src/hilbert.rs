//! Product basis, Pauli/ladder operators and state arithmetic for an
//! `L`-site spin-1/2 chain.
//!
//! Basis index `b` in `0..2^L` stores site `j` (1-based) in bit `j-1`. A
//! cleared bit is spin up (`sigma^z = +1`), a set bit is spin down.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const MAX_SITES: usize = 20;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    sites: usize,
}

impl HilbertSpace {
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 || sites > MAX_SITES {
            return Err(Error::config(format!(
                "site count {sites} outside 1..={MAX_SITES}"
            )));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    /// Bit position of 1-based site `j`.
    pub fn site_bit(&self, j: usize) -> Result<usize> {
        if j == 0 || j > self.sites {
            return Err(Error::Index { what: "site", index: j, max: self.sites });
        }
        Ok(j - 1)
    }

    /// Bit position of the left site of 1-based bond `j` (sites `j`, `j+1`).
    pub fn bond_bit(&self, j: usize) -> Result<usize> {
        if j == 0 || j + 1 > self.sites {
            return Err(Error::Index { what: "bond", index: j, max: self.sites.saturating_sub(1) });
        }
        Ok(j - 1)
    }

    pub fn basis_index(&self, spins: &[Spin]) -> Result<usize> {
        if spins.len() != self.sites {
            return Err(Error::config(format!(
                "expected {} spins, got {}",
                self.sites,
                spins.len()
            )));
        }
        Ok(spins
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Spin::Down)
            .fold(0, |acc, (bit, _)| acc | (1 << bit)))
    }

    pub fn spins_of(&self, index: usize) -> Vec<Spin> {
        (0..self.sites)
            .map(|bit| if index >> bit & 1 == 0 { Spin::Up } else { Spin::Down })
            .collect()
    }

    pub(crate) fn check_same(&self, other: &HilbertSpace) -> Result<()> {
        if self != other {
            return Err(Error::Dimension { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Parse a chain written as a string of `u`/`d` (or `↑`/`↓`) characters,
    /// site 1 first.
    pub fn parse_chain(s: &str) -> Result<Vec<Spin>> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'u' | 'U' | '↑' | '0' => Ok(Spin::Up),
                'd' | 'D' | '↓' | '1' => Ok(Spin::Down),
                other => Err(Error::config(format!("invalid spin character {other:?}"))),
            })
            .collect()
    }

    pub fn format_chain(spins: &[Spin]) -> String {
        spins.iter().map(|s| if *s == Spin::Up { 'u' } else { 'd' }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl Axis {
    /// 2x2 matrix in the (up, down) basis, row-major.
    fn matrix(self) -> [[C64; 2]; 2] {
        match self {
            Axis::X => [[ZERO, ONE], [ONE, ZERO]],
            Axis::Y => [[ZERO, -I], [I, ZERO]],
            Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
            // sigma^+ |down> = |up>
            Axis::Plus => [[ZERO, ONE], [ZERO, ZERO]],
            Axis::Minus => [[ZERO, ZERO], [ONE, ZERO]],
        }
    }

    fn is_hermitian(self) -> bool {
        matches!(self, Axis::X | Axis::Y | Axis::Z)
    }
}

/// Nearest-neighbour two-site operators acting on sites `j`, `j+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `sigma^x_j sigma^x_{j+1}`
    Xx,
    /// `sigma^+_j sigma^-_{j+1} + sigma^-_j sigma^+_{j+1}`
    FlipFlop,
    /// `sigma^+_j sigma^+_{j+1}`
    DoubleRaise,
    /// `sigma^-_j sigma^-_{j+1}`
    DoubleLower,
    /// `sigma^+_j sigma^-_{j+1}`
    RaiseLower,
    /// `sigma^-_j sigma^+_{j+1}`
    LowerRaise,
}

impl Coupling {
    fn factors(self) -> &'static [(Axis, Axis)] {
        match self {
            Coupling::Xx => &[(Axis::X, Axis::X)],
            Coupling::FlipFlop => &[(Axis::Plus, Axis::Minus), (Axis::Minus, Axis::Plus)],
            Coupling::DoubleRaise => &[(Axis::Plus, Axis::Plus)],
            Coupling::DoubleLower => &[(Axis::Minus, Axis::Minus)],
            Coupling::RaiseLower => &[(Axis::Plus, Axis::Minus)],
            Coupling::LowerRaise => &[(Axis::Minus, Axis::Plus)],
        }
    }

    fn is_hermitian(self) -> bool {
        matches!(self, Coupling::Xx | Coupling::FlipFlop)
    }
}

/// Normalized state vector over the product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: HilbertSpace,
    amplitudes: Vec<C64>,
}

impl QuantumState {
    pub const NORM_TOLERANCE: f64 = 1e-8;

    pub fn new(space: HilbertSpace, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::Dimension { expected: space.dim(), found: amplitudes.len() });
        }
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::config(format!("state norm {norm} is not 1")));
        }
        Ok(Self { space, amplitudes })
    }

    /// Normalizes `amplitudes`; fails on a zero or non-finite vector.
    pub fn normalized(space: HilbertSpace, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::Dimension { expected: space.dim(), found: amplitudes.len() });
        }
        let norm = l2_norm(&amplitudes);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::config("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { space, amplitudes })
    }

    /// Wraps amplitudes produced by a norm-preserving map.
    pub(crate) fn from_evolved(space: HilbertSpace, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), space.dim());
        Self { space, amplitudes }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        self.space.check_same(&other.space)?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Computational basis state for the given spin configuration.
pub fn product_state(space: HilbertSpace, spins: &[Spin]) -> Result<QuantumState> {
    let index = space.basis_index(spins)?;
    let mut amplitudes = vec![ZERO; space.dim()];
    amplitudes[index] = ONE;
    Ok(QuantumState { space, amplitudes })
}

pub(crate) fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Operator supported on at most two sites, kept alongside the CSR form so
/// that evolution kernels can apply it without touching index arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalForm {
    /// Bit positions, strictly ascending.
    pub bits: Vec<usize>,
    /// Row-major `2^k x 2^k` matrix; local bit `i` corresponds to `bits[i]`.
    pub matrix: Vec<C64>,
}

impl LocalForm {
    pub fn local_dim(&self) -> usize {
        1 << self.bits.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.local_dim() + col]
    }

    pub fn global_mask(&self, local: usize) -> usize {
        self.bits
            .iter()
            .enumerate()
            .filter(|(i, _)| local >> i & 1 == 1)
            .fold(0, |acc, (_, b)| acc | (1 << b))
    }

    pub fn local_bits_of(&self, index: usize) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, b)| acc | ((index >> b & 1) << i))
    }

    fn scaled(&self, c: C64) -> Self {
        Self { bits: self.bits.clone(), matrix: self.matrix.iter().map(|v| v * c).collect() }
    }

    fn added(&self, other: &LocalForm) -> Option<Self> {
        (self.bits == other.bits).then(|| Self {
            bits: self.bits.clone(),
            matrix: self.matrix.iter().zip(&other.matrix).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Complex sparse matrix in compressed-row form with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    space: HilbertSpace,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
    local: Option<LocalForm>,
}

impl SparseOperator {
    pub fn zero(space: HilbertSpace) -> Self {
        Self {
            space,
            row_ptr: vec![0; space.dim() + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            hermitian: true,
            local: None,
        }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Self::diagonal(space, vec![ONE; space.dim()], true)
    }

    /// Diagonal operator; zero entries are dropped.
    pub fn diagonal(space: HilbertSpace, diag: Vec<C64>, hermitian: bool) -> Self {
        let mut row_ptr = Vec::with_capacity(space.dim() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (r, v) in diag.into_iter().enumerate() {
            if v != ZERO {
                cols.push(r);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { space, row_ptr, cols, vals, hermitian, local: None }
    }

    /// Builds a CSR matrix from `(row, col, value)` triplets, summing
    /// duplicates and dropping exact zeros.
    pub fn from_triplets(
        space: HilbertSpace,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
        hermitian: bool,
    ) -> Result<Self> {
        let dim = space.dim();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::Dimension { expected: dim, found: r.max(c) + 1 });
            }
            rows[r].push((c, v));
        }
        Ok(Self::from_rows(space, rows, hermitian, None))
    }

    fn from_rows(
        space: HilbertSpace,
        rows: Vec<Vec<(usize, C64)>>,
        hermitian: bool,
        local: Option<LocalForm>,
    ) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { space, row_ptr, cols, vals, hermitian, local }
    }

    /// Embeds a local operator into the full chain.
    pub fn from_local(space: HilbertSpace, local: LocalForm, hermitian: bool) -> Self {
        let k = local.local_dim();
        let support = local.global_mask(k - 1);
        let rows = (0..space.dim())
            .map(|r| {
                let a = local.local_bits_of(r);
                (0..k)
                    .filter_map(|b| {
                        let v = local.entry(a, b);
                        (v != ZERO).then(|| ((r & !support) | local.global_mask(b), v))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(space, rows, hermitian, Some(local))
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn local_form(&self) -> Option<&LocalForm> {
        self.local.as_ref()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// Maximum absolute row sum; bounds the spectral norm of a Hermitian matrix.
    pub fn one_norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, state: &QuantumState) -> Result<Vec<C64>> {
        self.space.check_same(&state.space)?;
        self.apply_vec(&state.amplitudes)
    }

    pub fn apply_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: x.len() });
        }
        let mut y = vec![ZERO; self.dim()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x`; lengths must equal the dimension.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        const CHUNK: usize = 4096;
        crate::par::for_each_chunk_mut(y, CHUNK, |ci, out| {
            let r0 = ci * CHUNK;
            for (i, yi) in out.iter_mut().enumerate() {
                *yi = self.row(r0 + i).map(|(c, v)| v * x[c]).sum();
            }
        });
    }

    /// `<psi|A|psi>`.
    pub fn expectation(&self, state: &QuantumState) -> Result<C64> {
        let applied = self.apply(state)?;
        Ok(inner(&state.amplitudes, &applied))
    }

    pub fn adjoint(&self) -> Self {
        let rows = {
            let mut rows = vec![Vec::new(); self.dim()];
            for (r, c, v) in self.triplets() {
                rows[c].push((r, v.conj()));
            }
            rows
        };
        let local = self.local.as_ref().map(|l| {
            let k = l.local_dim();
            let matrix = (0..k * k).map(|i| l.entry(i % k, i / k).conj()).collect();
            LocalForm { bits: l.bits.clone(), matrix }
        });
        Self::from_rows(self.space, rows, self.hermitian, local)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            space: self.space,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * c).collect(),
            hermitian: self.hermitian && c.im == 0.0,
            local: self.local.as_ref().map(|l| l.scaled(c)),
        }
        .pruned()
    }

    fn pruned(mut self) -> Self {
        if self.vals.iter().all(|v| *v != ZERO) {
            return self;
        }
        let rows = (0..self.dim()).map(|r| self.row(r).collect()).collect();
        let local = self.local.take();
        Self::from_rows(self.space, rows, self.hermitian, local)
    }

    /// `self + other`.
    pub fn add(&self, other: &SparseOperator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let rows = (0..self.dim()).map(|r| self.row(r).chain(other.row(r)).collect()).collect();
        let local = match (&self.local, &other.local) {
            (Some(a), Some(b)) => a.added(b),
            _ => None,
        };
        Ok(Self::from_rows(self.space, rows, self.hermitian && other.hermitian, local))
    }

    /// `Σ c_k A_k` over operators sharing one space.
    pub fn linear_combination<'a>(
        space: HilbertSpace,
        parts: impl IntoIterator<Item = (C64, &'a SparseOperator)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); space.dim()];
        let mut hermitian = true;
        for (c, op) in parts {
            space.check_same(&op.space)?;
            hermitian &= op.hermitian && c.im == 0.0;
            for (r, col, v) in op.triplets() {
                rows[r].push((col, c * v));
            }
        }
        Ok(Self::from_rows(space, rows, hermitian, None))
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &SparseOperator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let rows = (0..self.dim())
            .map(|r| {
                self.row(r)
                    .flat_map(|(k, a)| other.row(k).map(move |(c, b)| (c, a * b)))
                    .collect()
            })
            .collect();
        Ok(Self::from_rows(self.space, rows, false, None))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &SparseOperator) -> Result<Self> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        ab.add(&ba.scale(-ONE))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim(), self.dim(), ZERO);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SparseOperator) -> Result<f64> {
        self.space.check_same(&other.space)?;
        let d = self.add(&other.scale(-ONE))?;
        Ok(d.vals.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseOperator(dim={}, nnz={})", self.dim(), self.nnz())
    }
}

/// Single-site Pauli or ladder operator on 1-based site `j`.
pub fn site_operator(space: HilbertSpace, j: usize, axis: Axis) -> Result<SparseOperator> {
    let bit = space.site_bit(j)?;
    let m = axis.matrix();
    let local = LocalForm { bits: vec![bit], matrix: vec![m[0][0], m[0][1], m[1][0], m[1][1]] };
    Ok(SparseOperator::from_local(space, local, axis.is_hermitian()))
}

/// Two-site coupling on bond `j`, i.e. sites `j` and `j+1`.
pub fn two_site_coupling(space: HilbertSpace, j: usize, kind: Coupling) -> Result<SparseOperator> {
    let bit = space.bond_bit(j)?;
    let mut matrix = vec![ZERO; 16];
    for &(left, right) in kind.factors() {
        let (a, b) = (left.matrix(), right.matrix());
        for row in 0..4 {
            for col in 0..4 {
                matrix[row * 4 + col] += a[row & 1][col & 1] * b[row >> 1][col >> 1];
            }
        }
    }
    let local = LocalForm { bits: vec![bit, bit + 1], matrix };
    Ok(SparseOperator::from_local(space, local, kind.is_hermitian()))
}

/// Diagonal of `Σ_j c_j sigma^z_j` without building each site operator.
pub fn z_field_diagonal(space: HilbertSpace, fields: &[f64]) -> Vec<f64> {
    (0..space.dim())
        .map(|b| {
            fields
                .iter()
                .enumerate()
                .map(|(bit, h)| if b >> bit & 1 == 0 { *h } else { -*h })
                .sum()
        })
        .collect()
}

/// Global spin-flip parity `Π_j sigma^z_j` as a diagonal operator.
pub fn parity_operator(space: HilbertSpace) -> SparseOperator {
    let diag = (0..space.dim())
        .map(|b| if (b as u64).count_ones() % 2 == 0 { ONE } else { -ONE })
        .collect();
    SparseOperator::diagonal(space, diag, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(l: usize) -> HilbertSpace {
        HilbertSpace::new(l).unwrap()
    }

    fn up(l: usize) -> Vec<Spin> {
        vec![Spin::Up; l]
    }

    #[test]
    fn product_state_encoding() {
        let s = product_state(space(3), &up(3)).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);

        let s = product_state(space(2), &[Spin::Down, Spin::Up]).unwrap();
        assert_eq!(s.amplitudes()[1], ONE);

        let mut spins = up(6);
        spins[5] = Spin::Down;
        let s = product_state(space(6), &spins).unwrap();
        assert_eq!(s.amplitudes()[32], ONE);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_length_mismatch() {
        assert!(matches!(product_state(space(3), &up(2)), Err(Error::Config(_))));
    }

    #[test]
    fn space_limits() {
        assert!(HilbertSpace::new(0).is_err());
        assert!(HilbertSpace::new(21).is_err());
        assert_eq!(HilbertSpace::new(20).unwrap().dim(), 1 << 20);
    }

    #[test]
    fn pauli_z_single_site() {
        let z = site_operator(space(1), 1, Axis::Z).unwrap();
        assert_eq!(z.get(0, 0), ONE);
        assert_eq!(z.get(1, 1), -ONE);
        assert_eq!(z.nnz(), 2);
    }

    #[test]
    fn raising_operator_action() {
        let sp = space(1);
        let plus = site_operator(sp, 1, Axis::Plus).unwrap();
        let down = product_state(sp, &[Spin::Down]).unwrap();
        let upst = product_state(sp, &[Spin::Up]).unwrap();
        assert_eq!(plus.apply(&down).unwrap(), upst.amplitudes().to_vec());
        assert_eq!(plus.apply(&upst).unwrap(), vec![ZERO, ZERO]);
    }

    #[test]
    fn sigma_x_flips_site_one() {
        let sp = space(2);
        let x1 = site_operator(sp, 1, Axis::X).unwrap();
        let uu = sp.basis_index(&[Spin::Up, Spin::Up]).unwrap();
        let du = sp.basis_index(&[Spin::Down, Spin::Up]).unwrap();
        assert_eq!(x1.get(du, uu), ONE);
    }

    #[test]
    fn nonzero_counts() {
        let sp = space(5);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            assert_eq!(site_operator(sp, 3, axis).unwrap().nnz(), 32);
        }
        for axis in [Axis::Plus, Axis::Minus] {
            assert_eq!(site_operator(sp, 3, axis).unwrap().nnz(), 16);
        }
    }

    #[test]
    fn site_index_errors() {
        let sp = space(3);
        assert!(matches!(site_operator(sp, 0, Axis::X), Err(Error::Index { .. })));
        assert!(matches!(site_operator(sp, 4, Axis::X), Err(Error::Index { .. })));
        assert!(matches!(two_site_coupling(sp, 3, Coupling::Xx), Err(Error::Index { .. })));
        assert!(matches!(two_site_coupling(sp, 0, Coupling::Xx), Err(Error::Index { .. })));
    }

    #[test]
    fn xx_decomposes_into_ladder_terms() {
        let sp = space(4);
        for j in 1..4 {
            let xx = two_site_coupling(sp, j, Coupling::Xx).unwrap();
            let sum = two_site_coupling(sp, j, Coupling::FlipFlop)
                .unwrap()
                .add(&two_site_coupling(sp, j, Coupling::DoubleRaise).unwrap())
                .unwrap()
                .add(&two_site_coupling(sp, j, Coupling::DoubleLower).unwrap())
                .unwrap();
            assert_eq!(xx.max_abs_diff(&sum).unwrap(), 0.0);
        }
    }

    #[test]
    fn flipflop_exchange_action() {
        let sp = space(2);
        let ff = two_site_coupling(sp, 1, Coupling::FlipFlop).unwrap();
        let ud = sp.basis_index(&[Spin::Up, Spin::Down]).unwrap();
        let du = sp.basis_index(&[Spin::Down, Spin::Up]).unwrap();
        assert_eq!(ff.get(du, ud), ONE);
        for b in 0..4 {
            assert_eq!(ff.get(b, b), ZERO);
        }
    }

    #[test]
    fn double_raise_action() {
        let sp = space(2);
        let dr = two_site_coupling(sp, 1, Coupling::DoubleRaise).unwrap();
        assert_eq!(dr.nnz(), 1);
        assert_eq!(dr.get(0, 3), ONE);
    }

    #[test]
    fn flagged_operators_are_hermitian() {
        let sp = space(3);
        for kind in [Coupling::Xx, Coupling::FlipFlop] {
            let op = two_site_coupling(sp, 2, kind).unwrap();
            assert!(op.is_flagged_hermitian());
            assert!(op.hermiticity_defect() < 1e-12);
        }
        for kind in [Coupling::DoubleRaise, Coupling::RaiseLower] {
            assert!(!two_site_coupling(sp, 2, kind).unwrap().is_flagged_hermitian());
        }
    }

    #[test]
    fn apply_trivial_operators() {
        let sp = space(3);
        let v: Vec<C64> = (0..8).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
        let s = QuantumState::normalized(sp, v).unwrap();
        assert_eq!(SparseOperator::identity(sp).apply(&s).unwrap(), s.amplitudes().to_vec());
        assert!(SparseOperator::zero(sp).apply(&s).unwrap().iter().all(|a| *a == ZERO));

        let all_up = product_state(sp, &up(3)).unwrap();
        let z1 = site_operator(sp, 1, Axis::Z).unwrap();
        assert_eq!(z1.apply(&all_up).unwrap(), all_up.amplitudes().to_vec());
    }

    #[test]
    fn apply_dimension_mismatch() {
        let op = SparseOperator::identity(space(2));
        let s = product_state(space(3), &up(3)).unwrap();
        assert!(matches!(op.apply(&s), Err(Error::Dimension { .. })));
        assert!(matches!(op.expectation(&s), Err(Error::Dimension { .. })));
    }

    #[test]
    fn expectation_values() {
        let sp = space(4);
        let s = product_state(sp, &up(4)).unwrap();
        for j in 1..=4 {
            let z = site_operator(sp, j, Axis::Z).unwrap().expectation(&s).unwrap();
            let x = site_operator(sp, j, Axis::X).unwrap().expectation(&s).unwrap();
            assert_eq!(z, ONE);
            assert_eq!(x, ZERO);
        }

        let sp = space(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::new(sp, vec![h.into(), ZERO, ZERO, h.into()]).unwrap();
        let zz = site_operator(sp, 1, Axis::Z)
            .unwrap()
            .matmul(&site_operator(sp, 2, Axis::Z).unwrap())
            .unwrap();
        assert!((zz.expectation(&bell).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn state_norm_enforced() {
        let sp = space(1);
        assert!(QuantumState::new(sp, vec![ONE, ONE]).is_err());
        assert!(QuantumState::normalized(sp, vec![ZERO, ZERO]).is_err());
    }

    #[test]
    fn spin_chain_parsing() {
        let spins = Spin::parse_chain("uuud").unwrap();
        assert_eq!(spins[3], Spin::Down);
        assert_eq!(Spin::format_chain(&spins), "uuud");
        assert!(Spin::parse_chain("uxd").is_err());
    }

    fn axis_strategy() -> impl Strategy<Value = Axis> {
        prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z), Just(Axis::Plus), Just(Axis::Minus)]
    }

    fn random_vec(dim: usize, seed: &[f64]) -> Vec<C64> {
        (0..dim)
            .map(|k| {
                let a = seed[k % seed.len()];
                C64::new((a * (k as f64 + 1.3)).sin(), (a * 0.7 * k as f64 + 0.2).cos())
            })
            .collect()
    }

    proptest! {
        #[test]
        fn paulis_square_to_identity(l in 1usize..6, j in 1usize..6, pick in 0usize..3) {
            prop_assume!(j <= l);
            let sp = space(l);
            let axis = [Axis::X, Axis::Y, Axis::Z][pick];
            let op = site_operator(sp, j, axis).unwrap();
            let sq = op.matmul(&op).unwrap();
            prop_assert!(sq.max_abs_diff(&SparseOperator::identity(sp)).unwrap() < 1e-12);
        }

        #[test]
        fn distinct_sites_commute(l in 2usize..6, j in 1usize..6, k in 1usize..6,
                                  a in axis_strategy(), b in axis_strategy()) {
            prop_assume!(j <= l && k <= l && j != k);
            let sp = space(l);
            let c = site_operator(sp, j, a).unwrap().commutator(&site_operator(sp, k, b).unwrap()).unwrap();
            prop_assert_eq!(c.max_abs(), 0.0);
        }

        #[test]
        fn plus_is_adjoint_of_minus(l in 1usize..6, j in 1usize..6) {
            prop_assume!(j <= l);
            let sp = space(l);
            let plus = site_operator(sp, j, Axis::Plus).unwrap();
            let minus_dag = site_operator(sp, j, Axis::Minus).unwrap().adjoint();
            prop_assert_eq!(plus.max_abs_diff(&minus_dag).unwrap(), 0.0);
        }

        #[test]
        fn apply_is_linear(l in 1usize..5, j in 1usize..5, a in axis_strategy(),
                           seed in proptest::collection::vec(-3.0f64..3.0, 4),
                           alpha_re in -2.0f64..2.0, alpha_im in -2.0f64..2.0,
                           beta_re in -2.0f64..2.0, beta_im in -2.0f64..2.0) {
            prop_assume!(j <= l);
            let sp = space(l);
            let op = site_operator(sp, j, a).unwrap();
            let v = random_vec(sp.dim(), &seed);
            let w: Vec<C64> = random_vec(sp.dim(), &seed).iter().rev().map(|z| z * C64::new(0.3, 1.1)).collect();
            let (alpha, beta) = (C64::new(alpha_re, alpha_im), C64::new(beta_re, beta_im));
            let combo: Vec<C64> = v.iter().zip(&w).map(|(x, y)| alpha * x + beta * y).collect();
            let lhs = op.apply_vec(&combo).unwrap();
            let av = op.apply_vec(&v).unwrap();
            let aw = op.apply_vec(&w).unwrap();
            for k in 0..sp.dim() {
                prop_assert!((lhs[k] - (alpha * av[k] + beta * aw[k])).norm() < 1e-12);
            }
        }
    }
}
