//! Highly reliable subset reduction (HRSR) and approximate degenerate OSD.
//!
//! Bits whose BP hard decision never moved and whose soft reliability clears
//! `θ` are fixed. Checks touching only fixed bits are verified and dropped;
//! the remaining checks form a shorter system
//!
//! ```text
//! τ(σ(HΛ)) = [ H̃  B ]     s̃ = s'' ⊕ B (e^H)^T
//!            [ 0  C ]
//! ```
//!
//! solved by OSD. When every column of the reduced `Ã` is lighter than
//! `d - 1`, every flip is a stabilizer and OSD-0 already picks the coset.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bp::BeliefState;
use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};
use crate::osd::{
    build_order, order_from_budget, osd2_budget, osd_w, osd_w_filtered, sort_bits_by_reliability,
    OsdSystem, ReliabilityMetric,
};
use crate::symplectic::{Syndrome, SymplecticVector};

/// Default soft reliability threshold.
pub const DEFAULT_THETA: f64 = 0.999995;

#[derive(Clone, Debug, PartialEq)]
pub struct HighlyReliableMask {
    /// Over the `2n` error bits.
    pub selected: BitVec,
    pub v: usize,
    pub theta: f64,
}

impl HighlyReliableMask {
    /// Bit `(i, a)` is selected iff `η_i ∈ {T, T+1}` and `φ^a(i) >= θ`.
    pub fn from_belief(belief: &BeliefState, theta: f64) -> Self {
        let n = belief.num_qubits();
        let t = belief.max_iter as u32;
        let mut selected = BitVec::zeros(2 * n);
        for b in 0..2 * n {
            let i = if b < n { b } else { b - n };
            let eta = belief.eta[i];
            if (eta == t || eta == t + 1) && belief.bit_soft_reliability(b) >= theta {
                selected.set(b, true);
            }
        }
        let v = selected.count_ones();
        HighlyReliableMask { selected, v, theta }
    }
}

/// Why HRSR gave up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HrsrFailure {
    /// `s^H != C (e^H)^T`.
    Verification,
    /// `s̃` is outside the column space of `H̃`.
    Unsolvable,
}

/// Output of HRSR, with the reduced OSD system already eliminated.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub mask: HighlyReliableMask,
    /// `σ`: the `2n - v` kept bits (ascending), then the `v` fixed bits.
    pub sigma: Vec<usize>,
    /// `τ`: the `m'` kept checks, then the `m - m'` dropped ones.
    pub tau: Vec<usize>,
    pub m_prime: usize,
    /// Rows of `H̃` over local columns `0..2n-v`.
    pub h_tilde_rows: Vec<Vec<usize>>,
    pub s_tilde: BitVec,
    /// Fixed bits in `σ` order (length `v`).
    pub e_h: BitVec,
    pub osd: OsdSystem,
    n: usize,
    m: usize,
}

impl ReducedSystem {
    /// Number of free columns `2n - v`.
    pub fn cols(&self) -> usize {
        self.sigma.len() - self.mask.v
    }

    pub fn h_tilde(&self) -> Gf2Matrix {
        let rows = self
            .h_tilde_rows
            .iter()
            .map(|r| BitVec::from_indices(self.cols(), r))
            .collect();
        Gf2Matrix::from_rows(self.cols(), rows)
    }

    fn block(&self, code: &StabilizerCode, rows: &[usize], col_range: std::ops::Range<usize>) -> Gf2Matrix {
        let local = crate::gf2::invert_permutation(&self.sigma);
        let width = col_range.len();
        let out = rows
            .iter()
            .map(|&r| {
                let mut v = BitVec::zeros(width);
                for &b in code.lambda_support(r) {
                    let c = local[b];
                    if col_range.contains(&c) {
                        v.toggle(c - col_range.start);
                    }
                }
                v
            })
            .collect();
        Gf2Matrix::from_rows(width, out)
    }

    /// Kept checks on the fixed bits.
    pub fn b_matrix(&self, code: &StabilizerCode) -> Gf2Matrix {
        self.block(code, &self.tau[..self.m_prime], self.cols()..self.sigma.len())
    }

    /// Dropped checks on the fixed bits.
    pub fn c_matrix(&self, code: &StabilizerCode) -> Gf2Matrix {
        self.block(code, &self.tau[self.m_prime..], self.cols()..self.sigma.len())
    }

    /// Dropped checks on the free bits (all zero by construction).
    pub fn zero_block(&self, code: &StabilizerCode) -> Gf2Matrix {
        self.block(code, &self.tau[self.m_prime..], 0..self.cols())
    }

    /// Reassembles `τ(σ(HΛ))`.
    pub fn assembled(&self, code: &StabilizerCode) -> Gf2Matrix {
        self.block(code, &self.tau, 0..self.sigma.len())
    }

    /// Effective dimensions `(m'/m, (2n-v)/2n)`.
    pub fn dimension_fractions(&self) -> (f64, f64) {
        (
            self.m_prime as f64 / self.m as f64,
            self.cols() as f64 / (2 * self.n) as f64,
        )
    }

    /// `σ^{-1}([ê' | e^H])` after checking `H̃ ê'^T = s̃`.
    pub fn lift(&self, e_prime: &BitVec) -> Result<SymplecticVector> {
        if e_prime.len() != self.cols() {
            return Err(Error::LengthMismatch {
                expected: self.cols(),
                actual: e_prime.len(),
            });
        }
        let mismatches = self
            .h_tilde_rows
            .iter()
            .enumerate()
            .filter(|(r, row)| row.iter().fold(false, |p, &c| p ^ e_prime.get(c)) != self.s_tilde.get(*r))
            .count();
        if mismatches > 0 {
            return Err(Error::ResidualSyndrome { mismatches });
        }
        let mut e = SymplecticVector::zeros(self.n);
        for c in e_prime.iter_ones() {
            e.set(self.sigma[c], true);
        }
        for c in self.e_h.iter_ones() {
            e.set(self.sigma[self.cols() + c], true);
        }
        Ok(e)
    }

    /// Restricts a full estimate to the free bits, in `σ` order.
    pub fn restrict(&self, e: &SymplecticVector) -> BitVec {
        let mut v = BitVec::zeros(self.cols());
        for c in 0..self.cols() {
            if e.get(self.sigma[c]) {
                v.set(c, true);
            }
        }
        v
    }
}

/// Steps 1-4 of HRSR, then elimination of the reduced system in reliability
/// order. The solvability test is the consistency check of that elimination.
pub fn hrsr(
    code: &StabilizerCode,
    s: &Syndrome,
    belief: &BeliefState,
    hard: &SymplecticVector,
    theta: f64,
    metric: ReliabilityMetric,
) -> std::result::Result<ReducedSystem, HrsrFailure> {
    let mask = HighlyReliableMask::from_belief(belief, theta);
    hrsr_with_mask(code, s, belief, hard, mask, metric)
}

pub fn hrsr_with_mask(
    code: &StabilizerCode,
    s: &Syndrome,
    belief: &BeliefState,
    hard: &SymplecticVector,
    mask: HighlyReliableMask,
    metric: ReliabilityMetric,
) -> std::result::Result<ReducedSystem, HrsrFailure> {
    let n = code.n();
    let m = code.m();
    let selected = &mask.selected;

    let mut sigma: Vec<usize> = Vec::with_capacity(2 * n);
    let mut fixed = Vec::with_capacity(mask.v);
    let mut local = vec![usize::MAX; 2 * n];
    for b in 0..2 * n {
        if selected.get(b) {
            fixed.push(b);
        } else {
            local[b] = sigma.len();
            sigma.push(b);
        }
    }
    let cols = sigma.len();
    sigma.extend_from_slice(&fixed);
    let mut e_h = BitVec::zeros(fixed.len());
    for (t, &b) in fixed.iter().enumerate() {
        if hard.get(b) {
            e_h.set(t, true);
        }
    }

    let mut top = Vec::new();
    let mut bottom = Vec::new();
    let mut h_tilde_rows = Vec::new();
    let mut s_tilde_bits = Vec::new();
    for (r, support) in code.lambda_supports().iter().enumerate() {
        let mut row = Vec::new();
        let mut fixed_parity = false;
        for &b in support {
            if selected.get(b) {
                fixed_parity ^= hard.get(b);
            } else {
                row.push(local[b]);
            }
        }
        if row.is_empty() {
            if fixed_parity != s.get(r) {
                return Err(HrsrFailure::Verification);
            }
            bottom.push(r);
        } else {
            top.push(r);
            h_tilde_rows.push(row);
            s_tilde_bits.push(s.get(r) ^ fixed_parity);
        }
    }
    let m_prime = top.len();
    let s_tilde = BitVec::from_bools(&s_tilde_bits);

    let mut order: Vec<usize> = sigma[..cols].to_vec();
    sort_bits_by_reliability(belief, metric, &mut order);
    let order_local: Vec<usize> = order.iter().map(|&b| local[b]).collect();

    let mut offset = SymplecticVector::zeros(n);
    for (t, &b) in fixed.iter().enumerate() {
        if e_h.get(t) {
            offset.set(b, true);
        }
    }
    let rows: Vec<&[usize]> = h_tilde_rows.iter().map(Vec::as_slice).collect();
    let osd = OsdSystem::new(&rows, &s_tilde, &order_local, &sigma[..cols], hard, offset)
        .map_err(|_| HrsrFailure::Unsolvable)?;

    let mut tau = top;
    tau.extend(bottom);
    Ok(ReducedSystem {
        mask,
        sigma,
        tau,
        m_prime,
        h_tilde_rows,
        s_tilde,
        e_h,
        osd,
        n,
        m,
    })
}

/// True iff every column of `Ã` has weight below `d - 1`.
pub fn corollary_check(system: &OsdSystem, d: usize) -> bool {
    let limit = d.saturating_sub(1);
    (0..system.reliable_len()).all(|j| system.a_column(j).count_ones() < limit)
}

/// As [`corollary_check`] on an explicit matrix `Ã`.
pub fn corollary_check_matrix(a: &Gf2Matrix, d: usize) -> bool {
    let limit = d.saturating_sub(1);
    let mut weights = vec![0usize; a.cols()];
    for r in 0..a.rows() {
        for c in a.row(r).iter_ones() {
            weights[c] += 1;
        }
    }
    weights.iter().all(|&w| w < limit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipClass {
    Stabilizer,
    NontrivialLogical,
}

/// Columns `b` of `LΛ` (column `b` of `LΛ` is column `b + n mod 2n` of `L`).
#[derive(Clone, Debug)]
pub struct LogicalColumns {
    cols: Vec<BitVec>,
}

impl LogicalColumns {
    pub fn new(code: &StabilizerCode) -> Self {
        let l = code.logical_matrix();
        let n = code.n();
        let cols = (0..2 * n).map(|b| l.column((b + n) % (2 * n))).collect();
        LogicalColumns { cols }
    }

    /// `LΛ g^T` for a sparse `g`.
    pub fn apply(&self, bits: impl IntoIterator<Item = usize>) -> BitVec {
        let mut out = BitVec::zeros(self.cols.first().map_or(0, BitVec::len));
        for b in bits {
            out.xor_assign(&self.cols[b]);
        }
        out
    }
}

/// Classifies the flip `g = [A_j^T | unit_j]` via `μ(π(LΛ)) g^T`.
pub fn stabilizer_flip_check(system: &OsdSystem, logicals: &LogicalColumns, j: usize) -> Result<FlipClass> {
    if j >= system.reliable_len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: system.reliable_len(),
        });
    }
    let bits = system
        .a_column(j)
        .iter_ones()
        .map(|p| system.unreliable_bit(p))
        .chain(std::iter::once(system.reliable_bit(j)));
    Ok(if logicals.apply(bits).is_zero() {
        FlipClass::Stabilizer
    } else {
        FlipClass::NontrivialLogical
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub all_columns_light: bool,
    pub per_column_is_stabilizer: Option<Vec<bool>>,
    /// Columns whose flip acts as a nontrivial logical.
    pub u: Option<usize>,
}

pub fn degeneracy_report(
    system: &OsdSystem,
    d: Option<usize>,
    logicals: Option<&LogicalColumns>,
) -> Result<DegeneracyReport> {
    let all_columns_light = d.is_some_and(|d| corollary_check(system, d));
    let per_column = match logicals {
        Some(lc) => Some(
            (0..system.reliable_len())
                .map(|j| stabilizer_flip_check(system, lc, j).map(|c| c == FlipClass::Stabilizer))
                .collect::<Result<Vec<bool>>>()?,
        ),
        None => None,
    };
    let u = per_column.as_ref().map(|v| v.iter().filter(|s| !**s).count());
    Ok(DegeneracyReport {
        all_columns_light,
        per_column_is_stabilizer: per_column,
        u,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdosdConfig {
    pub theta: f64,
    /// Candidate budget `Γ`; `None` uses the OSD-2 count of the full code.
    pub gamma: Option<u64>,
    pub w_backup: usize,
    pub metric: ReliabilityMetric,
    /// Distance for the light-column test; `None` uses the code's declared `d`.
    pub distance_override: Option<usize>,
    /// Flip only columns that act as nontrivial logicals.
    pub logical_flip_filter: bool,
}

impl Default for AdosdConfig {
    fn default() -> Self {
        AdosdConfig {
            theta: DEFAULT_THETA,
            gamma: None,
            w_backup: 2,
            metric: ReliabilityMetric::HardThenSoft,
            distance_override: None,
            logical_flip_filter: false,
        }
    }
}

impl AdosdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.5 && self.theta <= 1.0 + 1e-9) {
            return Err(Error::Config(format!("theta must lie in (0.5, 1], got {}", self.theta)));
        }
        if self.gamma == Some(0) {
            return Err(Error::Config("gamma must be at least 1".into()));
        }
        Ok(())
    }

    pub fn budget(&self, code: &StabilizerCode) -> u64 {
        self.gamma.unwrap_or_else(|| osd2_budget(code.n() + code.k()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdosdStage {
    /// Reduced system solved at order 0.
    Osd0,
    /// Reduced system solved at order `>= 1`.
    HigherOrder,
    /// HRSR failed; full-size OSD.
    Fallback,
}

#[derive(Clone, Debug)]
pub struct AdosdOutcome {
    pub estimate: SymplecticVector,
    pub stage: AdosdStage,
    pub order: usize,
    pub corollary: bool,
    pub failure: Option<HrsrFailure>,
    pub candidates: u64,
    /// `m'` and `2n - v` (full sizes on fallback).
    pub m_reduced: usize,
    pub cols_reduced: usize,
    pub v: usize,
}

/// ADOSD4: HRSR, light-column test, OSD-w on the reduced system, lift.
/// Falls back to full OSD with order `w_backup` when HRSR fails.
pub fn adosd(
    code: &StabilizerCode,
    s: &Syndrome,
    belief: &BeliefState,
    cfg: &AdosdConfig,
) -> Result<AdosdOutcome> {
    let hard = belief.hard_vector();
    let budget = cfg.budget(code);
    let logicals = cfg.logical_flip_filter.then(|| LogicalColumns::new(code));
    match hrsr(code, s, belief, &hard, cfg.theta, cfg.metric) {
        Ok(reduced) => {
            let d = cfg.distance_override.or(code.d());
            let corollary = d.is_some_and(|d| corollary_check(&reduced.osd, d));
            let w = if corollary {
                0
            } else {
                order_from_budget(reduced.osd.reliable_len(), budget)
            };
            let result = run_osd(&reduced.osd, w, budget, logicals.as_ref())?;
            debug_assert_eq!(code.syndrome(&result.estimate), *s);
            Ok(AdosdOutcome {
                estimate: result.estimate,
                stage: if w == 0 { AdosdStage::Osd0 } else { AdosdStage::HigherOrder },
                order: w,
                corollary,
                failure: None,
                candidates: result.candidates,
                m_reduced: reduced.m_prime,
                cols_reduced: reduced.cols(),
                v: reduced.mask.v,
            })
        }
        Err(failure) => {
            let order = build_order(belief, cfg.metric);
            let system = OsdSystem::for_code(code, s, &order, &hard)?;
            let result = run_osd(&system, cfg.w_backup, budget, logicals.as_ref())?;
            Ok(AdosdOutcome {
                estimate: result.estimate,
                stage: AdosdStage::Fallback,
                order: cfg.w_backup,
                corollary: false,
                failure: Some(failure),
                candidates: result.candidates,
                m_reduced: code.m(),
                cols_reduced: 2 * code.n(),
                v: 0,
            })
        }
    }
}

fn run_osd(
    system: &OsdSystem,
    w: usize,
    budget: u64,
    logicals: Option<&LogicalColumns>,
) -> Result<crate::osd::OsdResult> {
    match logicals {
        None => Ok(osd_w(system, w, budget)),
        Some(lc) => {
            let allowed = (0..system.reliable_len())
                .map(|j| stabilizer_flip_check(system, lc, j).map(|c| c == FlipClass::NontrivialLogical))
                .collect::<Result<Vec<bool>>>()?;
            Ok(osd_w_filtered(system, w, budget, Some(&allowed)))
        }
    }
}

/// Times one ADOSD call, returning the outcome and elapsed seconds.
pub fn adosd_timed(
    code: &StabilizerCode,
    s: &Syndrome,
    belief: &BeliefState,
    cfg: &AdosdConfig,
) -> Result<(AdosdOutcome, f64)> {
    let t = Instant::now();
    let out = adosd(code, s, belief, cfg)?;
    Ok((out, t.elapsed().as_secs_f64()))
}
