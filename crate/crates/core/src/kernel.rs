//! Matrix-free application of a [`TermList`] Hamiltonian.
//!
//! Every operator built from [`site_operator`](crate::hilbert::site_operator)
//! or [`two_site_coupling`](crate::hilbert::two_site_coupling) carries a
//! local form on at most two sites. Such a local matrix splits into XOR
//! classes: entry `(a, a ^ f)` for a fixed local flip pattern `f`. Operators
//! sharing support and flip pattern are merged into one *group* whose four
//! row-dependent values are recombined at every time step from the term
//! coefficients. Applying a group is a streaming `y[r] += c * x[r ^ mask]`
//! over aligned runs of rows where the support bits are constant.
//!
//! Operators without a local form go through their CSR rows instead.

use crate::hilbert::{HilbertSpace, LocalForm, SparseOperator};
use crate::model::TermList;
use crate::par;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ROW_CHUNK: usize = 1 << 10;

#[derive(Clone, Debug, PartialEq, Eq)]
struct GroupShape {
    bits: Vec<usize>,
    local_flip: usize,
    global_flip: usize,
    low_bit: usize,
}

impl GroupShape {
    #[inline(always)]
    fn local_bits(&self, r: usize) -> usize {
        match self.bits.as_slice() {
            [b0] => r >> b0 & 1,
            [b0, b1] => (r >> b0 & 1) | ((r >> b1 & 1) << 1),
            _ => unreachable!("groups have one or two sites"),
        }
    }
}

#[derive(Clone, Debug)]
enum TermPart {
    Local(Vec<(usize, [C64; 4])>),
    Generic(usize),
}

/// Coefficients of a [`CompiledHamiltonian`] frozen at one time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    tables: Vec<[C64; 4]>,
    /// Groups with a nonzero table.
    active: Vec<usize>,
    generic: Vec<C64>,
    offdiag_bound: f64,
}

/// Term list compiled for fast repeated matrix-vector products.
#[derive(Clone, Debug)]
pub struct CompiledHamiltonian {
    space: HilbertSpace,
    static_diag: Vec<C64>,
    diag_re: (f64, f64),
    diag_im: f64,
    groups: Vec<GroupShape>,
    static_tables: Vec<[C64; 4]>,
    static_generic: Option<SparseOperator>,
    static_generic_norm: f64,
    parts: Vec<TermPart>,
    generic_ops: Vec<SparseOperator>,
    generic_norms: Vec<f64>,
    coefficient_source: Vec<crate::model::TimeFunction>,
}

impl CompiledHamiltonian {
    pub fn new(terms: &TermList) -> Self {
        let space = terms.space();
        let mut compiled = Self {
            space,
            static_diag: vec![ZERO; space.dim()],
            diag_re: (0.0, 0.0),
            diag_im: 0.0,
            groups: Vec::new(),
            static_tables: Vec::new(),
            static_generic: None,
            static_generic_norm: 0.0,
            parts: Vec::new(),
            generic_ops: Vec::new(),
            generic_norms: Vec::new(),
            coefficient_source: terms.terms().iter().map(|t| t.coefficient.clone()).collect(),
        };

        let mut leftover = Vec::new();
        for op in terms.static_terms() {
            if let Some(local) = op.local_form() {
                for (g, table) in compiled.split_local(local) {
                    if g.local_flip == 0 {
                        for (r, d) in compiled.static_diag.iter_mut().enumerate() {
                            *d += table[g.local_bits(r)];
                        }
                    } else {
                        let idx = compiled.group_index(g);
                        add_table(&mut compiled.static_tables[idx], &table, C64::new(1.0, 0.0));
                    }
                }
            } else if is_diagonal(op) {
                for (r, c, v) in op.triplets() {
                    debug_assert_eq!(r, c);
                    compiled.static_diag[r] += v;
                }
            } else {
                leftover.push(op.clone());
            }
        }
        if !leftover.is_empty() {
            let one = C64::new(1.0, 0.0);
            let op = SparseOperator::linear_combination(space, leftover.iter().map(|o| (one, o)))
                .expect("term list spaces agree");
            compiled.static_generic_norm = op.one_norm_bound();
            compiled.static_generic = Some(op);
        }

        for term in terms.terms() {
            let part = match term.operator.local_form() {
                Some(local) => {
                    let pieces = compiled
                        .split_local(local)
                        .into_iter()
                        .map(|(g, table)| (compiled.group_index(g), table))
                        .collect();
                    TermPart::Local(pieces)
                }
                None => {
                    compiled.generic_norms.push(term.operator.one_norm_bound());
                    compiled.generic_ops.push(term.operator.clone());
                    TermPart::Generic(compiled.generic_ops.len() - 1)
                }
            };
            compiled.parts.push(part);
        }

        let re = compiled.static_diag.iter().map(|d| d.re);
        compiled.diag_re = re.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        compiled.diag_im = compiled.static_diag.iter().map(|d| d.im.abs()).fold(0.0, f64::max);
        compiled
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    fn split_local(&self, local: &LocalForm) -> Vec<(GroupShape, [C64; 4])> {
        let k = local.local_dim();
        (0..k)
            .filter_map(|flip| {
                let mut table = [ZERO; 4];
                for (a, slot) in table.iter_mut().enumerate().take(k) {
                    *slot = local.entry(a, a ^ flip);
                }
                table.iter().any(|v| *v != ZERO).then(|| {
                    let shape = GroupShape {
                        bits: local.bits.clone(),
                        local_flip: flip,
                        global_flip: local.global_mask(flip),
                        low_bit: local.bits[0],
                    };
                    (shape, table)
                })
            })
            .collect()
    }

    fn group_index(&mut self, shape: GroupShape) -> usize {
        match self.groups.iter().position(|g| *g == shape) {
            Some(i) => i,
            None => {
                self.groups.push(shape);
                self.static_tables.push([ZERO; 4]);
                self.groups.len() - 1
            }
        }
    }

    /// Freezes all coefficients at time `t`.
    pub fn snapshot(&self, t: f64) -> Snapshot {
        self.snapshot_mix(&[(t, 1.0)])
    }

    /// Coefficients of `Σ_i w_i H(t_i)` for weights summing to one, so that
    /// the static part enters once.
    pub fn snapshot_mix(&self, nodes: &[(f64, f64)]) -> Snapshot {
        debug_assert!((nodes.iter().map(|n| n.1).sum::<f64>() - 1.0).abs() < 1e-12);
        let mut tables = self.static_tables.clone();
        let mut generic = vec![ZERO; self.generic_ops.len()];
        for (part, source) in self.parts.iter().zip(&self.coefficient_source) {
            let c: C64 = nodes.iter().map(|&(t, w)| source.value(t) * w).sum();
            match part {
                TermPart::Local(pieces) => {
                    for (g, table) in pieces {
                        add_table(&mut tables[*g], table, c);
                    }
                }
                TermPart::Generic(i) => generic[*i] += c,
            }
        }
        let offdiag_bound = tables
            .iter()
            .map(|t| t.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .sum::<f64>()
            + generic.iter().zip(&self.generic_norms).map(|(c, n)| c.norm() * n).sum::<f64>()
            + self.static_generic_norm;
        let active = (0..tables.len()).filter(|&i| tables[i].iter().any(|v| *v != ZERO)).collect();
        Snapshot { tables, active, generic, offdiag_bound }
    }

    /// Bound on `‖H - μ‖` (row-sum norm) for the frozen coefficients.
    pub fn norm_bound(&self, snapshot: &Snapshot, shift: f64) -> f64 {
        let diag = (self.diag_re.1 - shift).abs().max((self.diag_re.0 - shift).abs()) + self.diag_im;
        diag + snapshot.offdiag_bound
    }

    /// `y = (H - shift) x`.
    pub fn apply_into(&self, snapshot: &Snapshot, shift: f64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.space.dim());
        debug_assert_eq!(y.len(), self.space.dim());
        par::for_each_chunk_mut(y, ROW_CHUNK, |ci, out| self.apply_rows(snapshot, shift, x, ci * ROW_CHUNK, out));
    }

    /// Sequential variant of [`apply_into`](Self::apply_into), always on the
    /// calling thread.
    pub fn apply_into_sequential(&self, snapshot: &Snapshot, shift: f64, x: &[C64], y: &mut [C64]) {
        par::sequential(|| self.apply_into(snapshot, shift, x, y));
    }

    fn apply_rows(&self, snapshot: &Snapshot, shift: f64, x: &[C64], r0: usize, out: &mut [C64]) {
        let n = out.len();
        let diag = &self.static_diag[r0..r0 + n];
        for ((o, d), xi) in out.iter_mut().zip(diag).zip(&x[r0..r0 + n]) {
            *o = (d - shift) * xi;
        }
        for &gi in &snapshot.active {
            let (shape, table) = (&self.groups[gi], &snapshot.tables[gi]);
            if let Some(c) = uniform_value(table, shape.bits.len()) {
                apply_uniform(c, shape.global_flip, x, r0, out);
                continue;
            }
            let run = (1usize << shape.low_bit).min(n);
            let mut start = 0;
            while start < n {
                let r = r0 + start;
                let c = table[shape.local_bits(r)];
                if c != ZERO {
                    let src = r ^ shape.global_flip;
                    for (o, xi) in out[start..start + run].iter_mut().zip(&x[src..src + run]) {
                        *o += c * xi;
                    }
                }
                start += run;
            }
        }
        if let Some(op) = &self.static_generic {
            for (i, o) in out.iter_mut().enumerate() {
                *o += op.row(r0 + i).map(|(c, v)| v * x[c]).sum::<C64>();
            }
        }
        for (op, c) in self.generic_ops.iter().zip(&snapshot.generic) {
            if *c == ZERO {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += c * op.row(r0 + i).map(|(col, v)| v * x[col]).sum::<C64>();
            }
        }
    }
}

/// The common value of a table whose entries all agree.
#[inline]
fn uniform_value(table: &[C64; 4], sites: usize) -> Option<C64> {
    let k = 1 << sites;
    table[1..k].iter().all(|v| *v == table[0]).then_some(table[0])
}

/// `out[i] += c * x[(r0 + i) ^ mask]`. Within aligned blocks of
/// `2^trailing_zeros(mask)` rows the source is contiguous.
fn apply_uniform(c: C64, mask: usize, x: &[C64], r0: usize, out: &mut [C64]) {
    let n = out.len();
    let block = if mask == 0 { n } else { (1usize << mask.trailing_zeros()).min(n) };
    if block == 1 {
        if c.im == 0.0 {
            for (i, o) in out.iter_mut().enumerate() {
                *o += x[(r0 + i) ^ mask] * c.re;
            }
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o += c * x[(r0 + i) ^ mask];
            }
        }
        return;
    }
    for (b, dst) in out.chunks_mut(block).enumerate() {
        let src = (r0 + b * block) ^ mask;
        let src = &x[src..src + dst.len()];
        if c.im == 0.0 {
            for (o, xi) in dst.iter_mut().zip(src) {
                *o += xi * c.re;
            }
        } else {
            for (o, xi) in dst.iter_mut().zip(src) {
                *o += c * xi;
            }
        }
    }
}

fn add_table(dst: &mut [C64; 4], src: &[C64; 4], c: C64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += c * s;
    }
}

fn is_diagonal(op: &SparseOperator) -> bool {
    op.triplets().all(|(r, c, _)| r == c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{site_operator, two_site_coupling, Axis, Coupling};
    use crate::model::{assemble_hamiltonian, interaction_picture_terms, presets, Term, TimeFunction, DriveSchedule};

    fn random_vec(dim: usize) -> Vec<C64> {
        (0..dim).map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 1.91 + 0.3).cos())).collect()
    }

    fn check_against_csr(terms: &TermList, t: f64) {
        let compiled = CompiledHamiltonian::new(terms);
        let x = random_vec(terms.space().dim());
        let mut y = vec![ZERO; x.len()];
        compiled.apply_into(&compiled.snapshot(t), 0.7, &x, &mut y);
        let h = terms.hamiltonian_at(t);
        let reference = h.apply_vec(&x).unwrap();
        for k in 0..x.len() {
            let expected = reference[k] - 0.7 * x[k];
            assert!((y[k] - expected).norm() < 1e-12, "row {k}");
        }
        let bound = compiled.norm_bound(&compiled.snapshot(t), 0.7);
        let exact = h.add(&SparseOperator::identity(terms.space()).scale((-0.7).into())).unwrap().one_norm_bound();
        assert!(bound >= exact - 1e-12);
    }

    #[test]
    fn matches_csr_for_both_frames() {
        let configs = [
            presets::edge_driven(7, 0.1, 4.0, 2.0).unwrap(),
            presets::local_switch(7, 4, 0.05, 3.6, 3.0).unwrap(),
        ];
        for config in &configs {
            for t in [0.0, 0.45, 3.1] {
                check_against_csr(&assemble_hamiltonian(config).unwrap(), t);
                check_against_csr(&interaction_picture_terms(config).unwrap(), t);
            }
        }
    }

    #[test]
    fn mixed_snapshot_is_weighted_sum() {
        let terms = assemble_hamiltonian(&presets::edge_driven(5, 0.1, 4.0, 2.0).unwrap()).unwrap();
        let compiled = CompiledHamiltonian::new(&terms);
        let x = random_vec(terms.space().dim());
        let mut y = vec![ZERO; x.len()];
        compiled.apply_into(&compiled.snapshot_mix(&[(0.2, 0.3), (1.1, 0.7)]), 0.0, &x, &mut y);
        let a = terms.hamiltonian_at(0.2).apply_vec(&x).unwrap();
        let b = terms.hamiltonian_at(1.1).apply_vec(&x).unwrap();
        for k in 0..x.len() {
            assert!((y[k] - (0.3 * a[k] + 0.7 * b[k])).norm() < 1e-12);
        }
    }

    #[test]
    fn large_space_spans_several_chunks() {
        let config = presets::edge_driven(14, 0.1, 4.0, 0.0).unwrap();
        check_against_csr(&assemble_hamiltonian(&config).unwrap(), 0.3);
    }

    #[test]
    fn generic_operators_fall_back_to_csr() {
        let sp = HilbertSpace::new(4).unwrap();
        let product = site_operator(sp, 1, Axis::Y)
            .unwrap()
            .matmul(&two_site_coupling(sp, 3, Coupling::FlipFlop).unwrap())
            .unwrap();
        let terms = TermList::new(
            sp,
            vec![product.clone()],
            vec![Term {
                label: "generic".into(),
                coefficient: TimeFunction::Drive(DriveSchedule::cosine(0.3, 1.0)),
                operator: product,
            }],
        )
        .unwrap();
        check_against_csr(&terms, 0.2);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let config = presets::edge_driven(13, 0.1, 4.0, 2.0).unwrap();
        let compiled = CompiledHamiltonian::new(&assemble_hamiltonian(&config).unwrap());
        let snap = compiled.snapshot(1.3);
        let x = random_vec(1 << 13);
        let mut a = vec![ZERO; x.len()];
        let mut b = vec![ZERO; x.len()];
        compiled.apply_into(&snap, 0.0, &x, &mut a);
        compiled.apply_into_sequential(&snap, 0.0, &x, &mut b);
        assert_eq!(a, b);
    }
}
