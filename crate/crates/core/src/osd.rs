//! Ordered statistics post-processing (OSD4-0 and OSD4-w).
//!
//! Bits are sorted by ascending reliability, the check matrix `HΛ` is
//! column-permuted accordingly and eliminated so that the least reliable
//! independent columns become pivots:
//!
//! ```text
//! μ(R(π(HΛ))) = [ I  A ]
//!               [ 0  0 ]
//! ```
//!
//! The reliable part `e^R` is taken from the BP hard decision and the
//! unreliable part is solved as `e^U = s' ⊕ A e^R`. Order-w OSD then walks all
//! flip patterns of weight at most `w` on `e^R` depth-first, updating the
//! candidate by one column of `A` per step.

use serde::{Deserialize, Serialize};

use crate::bp::{BeliefState, Component};
use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::{invert_permutation, BitVec, Gf2Matrix};
use crate::symplectic::{Syndrome, SymplecticVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityMetric {
    /// `η` first, soft reliability `φ` second.
    #[default]
    HardThenSoft,
    /// `φ` only.
    Marginal,
    /// Quaternary entropy of `q_i`, most uncertain qubit first.
    Entropy,
    /// `max(q_i)`, smallest first.
    Max,
}

impl std::str::FromStr for ReliabilityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard_then_soft" => Ok(Self::HardThenSoft),
            "marginal" => Ok(Self::Marginal),
            "entropy" => Ok(Self::Entropy),
            "max" => Ok(Self::Max),
            other => Err(Error::Config(format!("unknown reliability metric {other:?}"))),
        }
    }
}

/// Bits in ascending reliability (least reliable first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliabilityOrder {
    pub metric: ReliabilityMetric,
    pub order: Vec<usize>,
}

fn entropy4(q: &[f64; 4]) -> f64 {
    q.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Sorts `bits` (indices into `0..2n`) by ascending reliability.
/// Ties keep ascending bit order, X-bit before Z-bit of the same qubit.
pub fn sort_bits_by_reliability(belief: &BeliefState, metric: ReliabilityMetric, bits: &mut [usize]) {
    let n = belief.num_qubits();
    let qubit = |b: usize| if b < n { b } else { b - n };
    let tie = |a: usize, b: usize| (qubit(a), a >= n).cmp(&(qubit(b), b >= n));
    match metric {
        ReliabilityMetric::HardThenSoft => bits.sort_by(|&a, &b| {
            belief.eta[qubit(a)]
                .cmp(&belief.eta[qubit(b)])
                .then(belief.bit_soft_reliability(a).total_cmp(&belief.bit_soft_reliability(b)))
                .then(a.cmp(&b))
        }),
        ReliabilityMetric::Marginal => bits.sort_by(|&a, &b| {
            belief
                .bit_soft_reliability(a)
                .total_cmp(&belief.bit_soft_reliability(b))
                .then(a.cmp(&b))
        }),
        ReliabilityMetric::Entropy => bits.sort_by(|&a, &b| {
            let (ha, hb) = (entropy4(&belief.q[qubit(a)]), entropy4(&belief.q[qubit(b)]));
            hb.total_cmp(&ha).then(tie(a, b))
        }),
        ReliabilityMetric::Max => bits.sort_by(|&a, &b| {
            let mx = |q: &[f64; 4]| q.iter().copied().fold(0.0, f64::max);
            mx(&belief.q[qubit(a)])
                .total_cmp(&mx(&belief.q[qubit(b)]))
                .then(tie(a, b))
        }),
    }
}

pub fn build_order(belief: &BeliefState, metric: ReliabilityMetric) -> ReliabilityOrder {
    let mut order: Vec<usize> = (0..2 * belief.num_qubits()).collect();
    sort_bits_by_reliability(belief, metric, &mut order);
    ReliabilityOrder { metric, order }
}

/// A point of the solution space: `[e^U | e^R]` in pivot-first coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub unreliable: BitVec,
    pub reliable: BitVec,
}

/// An eliminated syndrome system ready for OSD.
///
/// Columns of the system are local indices `0..cols`; `labels[c]` gives the
/// error bit (in `0..2n`) of local column `c`. Bits outside the system are
/// held fixed in `offset`.
#[derive(Clone, Debug)]
pub struct OsdSystem {
    n: usize,
    cols: usize,
    rank: usize,
    /// `π`: permuted position -> local column.
    pi: Vec<usize>,
    /// `μ`: pivot-first position -> permuted position.
    mu: Vec<usize>,
    /// Column `j` of `A`, `rank` bits each.
    a_cols: Vec<BitVec>,
    s_prime: BitVec,
    /// Error bit of each pivot row / reliable column.
    unreliable_bits: Vec<usize>,
    reliable_bits: Vec<usize>,
    hard_reliable: BitVec,
    offset: SymplecticVector,
}

impl OsdSystem {
    /// Eliminates `rows` (sparse, over local columns) with syndrome `s`.
    ///
    /// `order` lists local columns least reliable first, `labels` maps local
    /// columns to error bits and `hard` supplies the reliable part. Fails
    /// with [`Error::InconsistentSyndrome`] when `s` is not in the column
    /// space.
    pub fn new(
        rows: &[&[usize]],
        s: &BitVec,
        order: &[usize],
        labels: &[usize],
        hard: &SymplecticVector,
        offset: SymplecticVector,
    ) -> Result<Self> {
        let cols = labels.len();
        if order.len() != cols {
            return Err(Error::LengthMismatch {
                expected: cols,
                actual: order.len(),
            });
        }
        if s.len() != rows.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                actual: s.len(),
            });
        }
        let n = offset.num_qubits();
        let pinv = invert_permutation(order);
        let mut mat = Gf2Matrix::zeros(0, cols + 1);
        for (r, support) in rows.iter().enumerate() {
            let mut v = BitVec::zeros(cols + 1);
            for &c in support.iter() {
                v.toggle(pinv[c]);
            }
            if s.get(r) {
                v.set(cols, true);
            }
            mat.push_row(v);
        }
        let pivots = mat.eliminate_in_place(cols, None);
        let rank = pivots.len();
        if (rank..mat.rows()).any(|r| mat.get(r, cols)) {
            return Err(Error::InconsistentSyndrome);
        }
        let mu = crate::gf2::pivot_first_permutation(cols, &pivots);
        let mut s_prime = BitVec::zeros(rank);
        for r in 0..rank {
            if mat.get(r, cols) {
                s_prime.set(r, true);
            }
        }
        let reliable_len = cols - rank;
        let mut a_cols = vec![BitVec::zeros(rank); reliable_len];
        for r in 0..rank {
            let row = mat.row(r);
            for (j, &t) in mu[rank..].iter().enumerate() {
                if row.get(t) {
                    a_cols[j].set(r, true);
                }
            }
        }
        let bit_of = |t: usize| labels[order[t]];
        let unreliable_bits: Vec<usize> = mu[..rank].iter().map(|&t| bit_of(t)).collect();
        let reliable_bits: Vec<usize> = mu[rank..].iter().map(|&t| bit_of(t)).collect();
        let mut hard_reliable = BitVec::zeros(reliable_len);
        for (j, &b) in reliable_bits.iter().enumerate() {
            if hard.get(b) {
                hard_reliable.set(j, true);
            }
        }
        Ok(OsdSystem {
            n,
            cols,
            rank,
            pi: order.to_vec(),
            mu,
            a_cols,
            s_prime,
            unreliable_bits,
            reliable_bits,
            hard_reliable,
            offset,
        })
    }

    /// The full `HΛ e^T = s` system of a code.
    pub fn for_code(
        code: &StabilizerCode,
        s: &Syndrome,
        order: &ReliabilityOrder,
        hard: &SymplecticVector,
    ) -> Result<Self> {
        let rows: Vec<&[usize]> = code.lambda_supports().iter().map(Vec::as_slice).collect();
        let labels: Vec<usize> = (0..2 * code.n()).collect();
        Self::new(
            &rows,
            s.bits(),
            &order.order,
            &labels,
            hard,
            SymplecticVector::zeros(code.n()),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Number of columns (effective length).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Length of `e^R`.
    pub fn reliable_len(&self) -> usize {
        self.cols - self.rank
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn mu(&self) -> &[usize] {
        &self.mu
    }

    pub fn s_prime(&self) -> &BitVec {
        &self.s_prime
    }

    /// Column `j` of `A`.
    pub fn a_column(&self, j: usize) -> &BitVec {
        &self.a_cols[j]
    }

    /// `A` as a `rank x reliable_len` matrix.
    pub fn a_matrix(&self) -> Gf2Matrix {
        let mut a = Gf2Matrix::zeros(self.rank, self.reliable_len());
        for (j, col) in self.a_cols.iter().enumerate() {
            for r in col.iter_ones() {
                a.set(r, j, true);
            }
        }
        a
    }

    /// Error bit addressed by pivot row `p`.
    pub fn unreliable_bit(&self, p: usize) -> usize {
        self.unreliable_bits[p]
    }

    /// Error bit addressed by reliable column `j`.
    pub fn reliable_bit(&self, j: usize) -> usize {
        self.reliable_bits[j]
    }

    pub fn hard_reliable(&self) -> &BitVec {
        &self.hard_reliable
    }

    pub fn offset(&self) -> &SymplecticVector {
        &self.offset
    }

    /// Solves `e^U = s' ⊕ A e^R` from scratch (row-wise).
    pub fn solve(&self, reliable: &BitVec) -> Result<Candidate> {
        if reliable.len() != self.reliable_len() {
            return Err(Error::LengthMismatch {
                expected: self.reliable_len(),
                actual: reliable.len(),
            });
        }
        let a = self.a_matrix();
        let mut unreliable = self.s_prime.clone();
        for r in 0..self.rank {
            if a.row(r).dot(reliable) {
                unreliable.toggle(r);
            }
        }
        Ok(Candidate {
            unreliable,
            reliable: reliable.clone(),
        })
    }

    /// OSD-0 candidate: reliable part from the hard decision.
    pub fn base_candidate(&self) -> Candidate {
        let mut unreliable = self.s_prime.clone();
        for j in self.hard_reliable.iter_ones() {
            unreliable.xor_assign(&self.a_cols[j]);
        }
        Candidate {
            unreliable,
            reliable: self.hard_reliable.clone(),
        }
    }

    /// `base ⊕ [A_j^T | unit_j]`.
    pub fn flip_candidate(&self, base: &Candidate, j: usize) -> Result<Candidate> {
        let mut c = base.clone();
        self.flip_in_place(&mut c, j)?;
        Ok(c)
    }

    pub fn flip_in_place(&self, c: &mut Candidate, j: usize) -> Result<()> {
        if j >= self.reliable_len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.reliable_len(),
            });
        }
        c.unreliable.xor_assign(&self.a_cols[j]);
        c.reliable.toggle(j);
        Ok(())
    }

    /// Maps a candidate back to error-bit coordinates (`offset` included).
    pub fn reconstruct(&self, c: &Candidate) -> SymplecticVector {
        let mut e = self.offset.clone();
        for p in c.unreliable.iter_ones() {
            e.toggle(self.unreliable_bits[p]);
        }
        for j in c.reliable.iter_ones() {
            e.toggle(self.reliable_bits[j]);
        }
        e
    }

    /// The vector `[A_j^T | unit_j]` in error-bit coordinates, without offset.
    pub fn flip_vector(&self, j: usize) -> SymplecticVector {
        let mut g = SymplecticVector::zeros(self.n);
        for p in self.a_cols[j].iter_ones() {
            g.toggle(self.unreliable_bits[p]);
        }
        g.toggle(self.reliable_bits[j]);
        g
    }
}

/// Steps 1-4 of OSD4-0 on the full system.
pub fn osd0(
    code: &StabilizerCode,
    s: &Syndrome,
    order: &ReliabilityOrder,
    hard: &SymplecticVector,
) -> Result<(SymplecticVector, OsdSystem)> {
    let system = OsdSystem::for_code(code, s, order, hard)?;
    let expected = code.n() - code.k();
    if system.rank() != expected {
        return Err(Error::RankDeficient {
            expected,
            actual: system.rank(),
        });
    }
    let e = system.reconstruct(&system.base_candidate());
    Ok((e, system))
}

/// `Σ_{i=0}^{w} C(len, i)`, saturating.
pub fn candidate_count(len: usize, w: usize) -> u64 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for i in 0..=w.min(len) {
        total = total.saturating_add(c);
        c = c.saturating_mul((len - i) as u128) / (i as u128 + 1);
    }
    total.min(u64::MAX as u128) as u64
}

/// Candidates tested by OSD-2 on `reliable_len` bits: `1 + L + C(L, 2)`.
pub fn osd2_budget(reliable_len: usize) -> u64 {
    candidate_count(reliable_len, 2)
}

/// Largest `w` with `Σ_{i=0}^{w} C(reliable_len, i) <= budget`.
pub fn order_from_budget(reliable_len: usize, budget: u64) -> usize {
    let mut w = 0;
    while w < reliable_len && candidate_count(reliable_len, w + 1) <= budget {
        w += 1;
    }
    w
}

/// Result of order-w search.
#[derive(Clone, Debug)]
pub struct OsdResult {
    pub estimate: SymplecticVector,
    pub weight: usize,
    /// Candidates examined, including the OSD-0 root.
    pub candidates: u64,
    pub order: usize,
}

/// Candidate evaluation state in error-bit coordinates.
struct Walker<'a> {
    system: &'a OsdSystem,
    current: SymplecticVector,
    weight: usize,
    best: SymplecticVector,
    best_weight: usize,
    count: u64,
    budget: u64,
    allowed: Option<&'a [bool]>,
}

impl Walker<'_> {
    #[inline]
    fn toggle(&mut self, b: usize) {
        let n = self.system.n;
        let q = if b < n { b } else { b - n };
        let before = self.current.x().get(q) | self.current.z().get(q);
        self.current.toggle(b);
        let after = self.current.x().get(q) | self.current.z().get(q);
        match (before, after) {
            (false, true) => self.weight += 1,
            (true, false) => self.weight -= 1,
            _ => {}
        }
    }

    #[inline]
    fn flip(&mut self, j: usize) {
        let sys = self.system;
        for p in sys.a_cols[j].iter_ones() {
            self.toggle(sys.unreliable_bits[p]);
        }
        self.toggle(sys.reliable_bits[j]);
    }

    /// Children of a node flip positions strictly after its last set bit.
    fn dfs(&mut self, start: usize, depth: usize) -> bool {
        for j in start..self.system.reliable_len() {
            if self.allowed.is_some_and(|a| !a[j]) {
                continue;
            }
            if self.count >= self.budget {
                return false;
            }
            self.flip(j);
            self.count += 1;
            if self.weight < self.best_weight {
                self.best_weight = self.weight;
                self.best.clone_from(&self.current);
            }
            if depth > 1 && !self.dfs(j + 1, depth - 1) {
                self.flip(j);
                return false;
            }
            self.flip(j);
        }
        true
    }
}

/// Order-w OSD under the minimum-weight criterion.
///
/// Enumerates flip patterns of weight `<= w` depth-first, at most `budget`
/// candidates in total (OSD-0 included). Ties keep the first candidate found.
pub fn osd_w(system: &OsdSystem, w: usize, budget: u64) -> OsdResult {
    osd_w_filtered(system, w, budget, None)
}

/// As [`osd_w`], flipping only reliable columns with `allowed[j]` set.
pub fn osd_w_filtered(system: &OsdSystem, w: usize, budget: u64, allowed: Option<&[bool]>) -> OsdResult {
    let base = system.reconstruct(&system.base_candidate());
    let weight = base.weight();
    let mut walker = Walker {
        system,
        current: base.clone(),
        weight,
        best: base,
        best_weight: weight,
        count: 1,
        budget: budget.max(1),
        allowed,
    };
    if w > 0 {
        walker.dfs(0, w);
    }
    OsdResult {
        estimate: walker.best,
        weight: walker.best_weight,
        candidates: walker.count,
        order: w,
    }
}

/// Visits every flip pattern of weight `<= w` over `len` positions in the
/// same depth-first order used by [`osd_w`], up to `budget` patterns.
pub fn dfs_patterns(len: usize, w: usize, budget: u64, mut visit: impl FnMut(&[usize])) -> u64 {
    fn rec(
        len: usize,
        start: usize,
        depth: usize,
        stack: &mut Vec<usize>,
        count: &mut u64,
        budget: u64,
        visit: &mut dyn FnMut(&[usize]),
    ) -> bool {
        for j in start..len {
            if *count >= budget {
                return false;
            }
            stack.push(j);
            *count += 1;
            visit(stack);
            let go_on = depth <= 1 || rec(len, j + 1, depth - 1, stack, count, budget, visit);
            stack.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    if budget == 0 {
        return 0;
    }
    let mut count = 1;
    visit(&[]);
    let mut stack = Vec::new();
    if w > 0 {
        rec(len, 0, w, &mut stack, &mut count, budget, &mut visit);
    }
    count
}

/// Which soft reliability a bit uses.
pub fn bit_component(n: usize, b: usize) -> (usize, Component) {
    if b < n {
        (b, Component::X)
    } else {
        (b - n, Component::Z)
    }
}
