//! Quaternary belief propagation (BP4/MBP4) with hard-decision reliability.
//!
//! Messages are scalars: each edge `(check j, qubit i)` carries the
//! log-likelihood ratio that the error on qubit `i` commutes with the Pauli
//! `S_ji` of check `j`. Qubit beliefs are kept as three log ratios
//! `Γ^W = ln(q^I / q^W)` for `W ∈ {X, Y, Z}`.
//!
//! MBP's step-size `α` scales the check-to-qubit contributions by `1/α`
//! when beliefs are aggregated; the outgoing edge's own message is then
//! removed at unit weight. `α = 1` is plain BP4.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};
use crate::symplectic::{Pauli, Syndrome, SymplecticVector};

/// Messages and log ratios are clamped to `±LLR_CLAMP`.
pub const LLR_CLAMP: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    #[default]
    Parallel,
    Serial,
    SerialRandomOrder,
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(Schedule::Parallel),
            "serial" => Ok(Schedule::Serial),
            "serial_random_order" | "serial-random" => Ok(Schedule::SerialRandomOrder),
            other => Err(Error::Config(format!("unknown schedule {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    /// Maximum number of iterations `T`.
    pub max_iter: usize,
    /// MBP step size; `1.0` is plain BP4.
    pub alpha: f64,
    /// Depolarizing rate used for the channel prior.
    pub epsilon: f64,
    pub schedule: Schedule,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            max_iter: 100,
            alpha: 1.0,
            epsilon: 0.01,
            schedule: Schedule::Parallel,
        }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.75) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 3/4), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Which bit of a qubit: the X or the Z component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    X,
    Z,
}

/// Per-qubit belief after BP: distributions, hard decisions and `η`.
#[derive(Clone, Debug)]
pub struct BeliefState {
    /// `(q^I, q^X, q^Y, q^Z)` per qubit.
    pub q: Vec<[f64; 4]>,
    pub hard: Vec<Pauli>,
    /// Length of the final constant run of hard decisions, `1..=T+1`.
    pub eta: Vec<u32>,
    pub iterations: usize,
    /// `T` of the run that produced this state.
    pub max_iter: usize,
}

impl BeliefState {
    pub fn num_qubits(&self) -> usize {
        self.q.len()
    }

    pub fn hard_vector(&self) -> SymplecticVector {
        SymplecticVector::from_paulis(&self.hard)
    }

    /// `φ^X(i) = max(q^X + q^Y, q^I + q^Z)`, `φ^Z(i) = max(q^Z + q^Y, q^I + q^X)`.
    #[inline]
    pub fn soft_reliability(&self, i: usize, a: Component) -> f64 {
        soft_reliability(&self.q[i], a)
    }

    /// Soft reliability of error bit `b` (`b < n` is X, otherwise Z).
    #[inline]
    pub fn bit_soft_reliability(&self, b: usize) -> f64 {
        let n = self.q.len();
        if b < n {
            self.soft_reliability(b, Component::X)
        } else {
            self.soft_reliability(b - n, Component::Z)
        }
    }
}

#[inline]
pub fn soft_reliability(q: &[f64; 4], a: Component) -> f64 {
    let [qi, qx, qy, qz] = *q;
    match a {
        Component::X => (qx + qy).max(qi + qz),
        Component::Z => (qz + qy).max(qi + qx),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpStatus {
    Success,
    Failure,
}

#[derive(Clone, Debug)]
pub struct BpOutcome {
    pub status: BpStatus,
    /// `φ(h)` on success.
    pub estimate: Option<SymplecticVector>,
    pub belief: BeliefState,
    /// Step size of the run that produced this outcome.
    pub alpha: f64,
    /// Iterations summed over every run (more than one for adaptive decoding).
    pub total_iterations: usize,
    /// Per-iteration hard decisions, when recording is enabled.
    pub history: Option<Vec<Vec<Pauli>>>,
}

impl BpOutcome {
    pub fn is_success(&self) -> bool {
        self.status == BpStatus::Success
    }
}

/// Tanner graph of a check matrix in `(qubit, Pauli)` form.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n: usize,
    m: usize,
    edge_qubit: Vec<usize>,
    edge_pauli: Vec<Pauli>,
    /// Edges of check `j` are `check_start[j]..check_start[j+1]`.
    check_start: Vec<usize>,
    /// Edges of qubit `i` are `qubit_edges[qubit_start[i]..qubit_start[i+1]]`.
    qubit_start: Vec<usize>,
    qubit_edges: Vec<usize>,
    edge_check: Vec<usize>,
}

impl TannerGraph {
    pub fn from_checks(n: usize, checks: &[Vec<(usize, Pauli)>]) -> Self {
        let mut edge_qubit = Vec::new();
        let mut edge_pauli = Vec::new();
        let mut edge_check = Vec::new();
        let mut check_start = vec![0];
        for (j, check) in checks.iter().enumerate() {
            for &(q, p) in check {
                debug_assert!(p != Pauli::I);
                edge_qubit.push(q);
                edge_pauli.push(p);
                edge_check.push(j);
            }
            check_start.push(edge_qubit.len());
        }
        let mut degree = vec![0usize; n];
        for &q in &edge_qubit {
            degree[q] += 1;
        }
        let mut qubit_start = vec![0usize; n + 1];
        for i in 0..n {
            qubit_start[i + 1] = qubit_start[i] + degree[i];
        }
        let mut fill = qubit_start.clone();
        let mut qubit_edges = vec![0usize; edge_qubit.len()];
        for (e, &q) in edge_qubit.iter().enumerate() {
            qubit_edges[fill[q]] = e;
            fill[q] += 1;
        }
        TannerGraph {
            n,
            m: checks.len(),
            edge_qubit,
            edge_pauli,
            check_start,
            qubit_start,
            qubit_edges,
            edge_check,
        }
    }

    /// From any `m x 2n` symplectic matrix (need not be a stabilizer code).
    pub fn from_matrix(h: &Gf2Matrix) -> Self {
        let n = h.cols() / 2;
        let checks: Vec<Vec<(usize, Pauli)>> = (0..h.rows())
            .map(|r| {
                (0..n)
                    .filter_map(|q| {
                        let p = Pauli::from_bits(h.get(r, q), h.get(r, n + q));
                        (p != Pauli::I).then_some((q, p))
                    })
                    .collect()
            })
            .collect();
        TannerGraph::from_checks(n, &checks)
    }

    pub fn for_code(code: &StabilizerCode) -> Self {
        TannerGraph::from_checks(code.n(), code.checks())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_checks(&self) -> usize {
        self.m
    }

    pub fn num_edges(&self) -> usize {
        self.edge_qubit.len()
    }

    /// Syndrome of a per-qubit hard decision.
    pub fn syndrome_of_paulis(&self, hard: &[Pauli]) -> BitVec {
        let mut s = BitVec::zeros(self.m);
        for j in 0..self.m {
            if self.check_parity(j, hard) {
                s.set(j, true);
            }
        }
        s
    }

    #[inline]
    fn check_parity(&self, j: usize, hard: &[Pauli]) -> bool {
        let mut parity = false;
        for e in self.check_start[j]..self.check_start[j + 1] {
            parity ^= hard[self.edge_qubit[e]].anticommutes(self.edge_pauli[e]);
        }
        parity
    }

    fn matches(&self, hard: &[Pauli], s: &BitVec) -> bool {
        (0..self.m).all(|j| self.check_parity(j, hard) == s.get(j))
    }
}

/// `(W index in X,Y,Z) -> anticommutes with S`, indexed `[S][W]`.
const ANTI: [[bool; 3]; 4] = [
    [false, false, false], // I
    [false, true, true],   // X anticommutes with Y, Z
    [true, false, true],   // Y anticommutes with X, Z
    [true, true, false],   // Z anticommutes with X, Y
];

/// `(S, W1, W2)` component indices for an edge Pauli `S`, where `W1`, `W2`
/// are the two Paulis anticommuting with `S`.
#[inline]
fn components(s: Pauli) -> (usize, usize, usize) {
    match s {
        Pauli::X => (0, 1, 2),
        Pauli::Y => (1, 0, 2),
        Pauli::Z => (2, 0, 1),
        Pauli::I => unreachable!("identity edge"),
    }
}

/// Keeps `exp(-Γ)` finite for extreme step sizes.
const GAMMA_GUARD: f64 = 600.0;

/// `tanh(λ/2)` for `λ = ln(num/den)` clamped to `±LLR_CLAMP`.
#[inline]
fn commute_tanh(num: f64, den: f64, ratio_max: f64) -> f64 {
    let r = (num / den).clamp(1.0 / ratio_max, ratio_max);
    (r - 1.0) / (r + 1.0)
}

/// Message from a check whose other edges carry `tanh` values with product `p`.
#[inline]
fn check_message(p: f64, flip: bool) -> f64 {
    let llr = ((1.0 + p) / (1.0 - p)).ln().clamp(-LLR_CLAMP, LLR_CLAMP);
    if flip {
        -llr
    } else {
        llr
    }
}

#[inline]
fn hard_decision(gamma: &[f64; 3]) -> Pauli {
    // argmax of (0, -Γ^X, -Γ^Y, -Γ^Z), ties resolved I < X < Y < Z
    let mut best = Pauli::I;
    let mut best_v = 0.0;
    for (w, &g) in gamma.iter().enumerate() {
        if -g > best_v {
            best_v = -g;
            best = Pauli::from_index(w + 1);
        }
    }
    best
}

#[inline]
fn distribution(gamma: &[f64; 3]) -> [f64; 4] {
    let v = [0.0, -gamma[0], -gamma[1], -gamma[2]];
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = v.map(|x| (x - mx).exp());
    let z: f64 = e.iter().sum();
    e.map(|x| x / z)
}

/// Reusable BP4 decoder for one Tanner graph.
pub struct Bp4Decoder {
    graph: TannerGraph,
    /// `tanh(λ/2)` of each qubit-to-check message.
    to_check: Vec<f64>,
    /// Check-to-qubit LLRs `Δ`.
    to_qubit: Vec<f64>,
    gamma: Vec<[f64; 3]>,
    ratio_max: f64,
    order: Vec<usize>,
    record_history: bool,
}

impl Bp4Decoder {
    pub fn new(graph: TannerGraph) -> Self {
        let e = graph.num_edges();
        let n = graph.num_qubits();
        Bp4Decoder {
            graph,
            to_check: vec![0.0; e],
            to_qubit: vec![0.0; e],
            gamma: vec![[0.0; 3]; n],
            ratio_max: LLR_CLAMP.exp(),
            order: (0..n).collect(),
            record_history: false,
        }
    }

    pub fn for_code(code: &StabilizerCode) -> Self {
        Bp4Decoder::new(TannerGraph::for_code(code))
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    /// Keep every iteration's hard decision in [`BpOutcome::history`].
    pub fn set_record_history(&mut self, on: bool) {
        self.record_history = on;
    }

    /// Decodes with a fixed internal RNG (only used by the random-order schedule).
    pub fn decode(&mut self, s: &Syndrome, cfg: &BpConfig) -> BpOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.decode_with_rng(s, cfg, &mut rng)
    }

    pub fn decode_with_rng(&mut self, s: &Syndrome, cfg: &BpConfig, rng: &mut dyn RngCore) -> BpOutcome {
        self.run(s, cfg, rng, true, cfg.max_iter)
    }

    /// Runs exactly `iterations` rounds without stopping on success and
    /// returns the final belief.
    pub fn run_iterations(&mut self, s: &Syndrome, cfg: &BpConfig, iterations: usize) -> BeliefState {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.run(s, cfg, &mut rng, false, iterations).belief
    }

    /// Tries each step size in turn and returns the first success, or the
    /// failure of the last one.
    pub fn decode_adaptive(
        &mut self,
        s: &Syndrome,
        cfg: &BpConfig,
        alphas: &[f64],
        rng: &mut dyn RngCore,
    ) -> BpOutcome {
        assert!(!alphas.is_empty(), "alpha sequence must be nonempty");
        let mut total = 0;
        let mut last = None;
        for &alpha in alphas {
            let c = BpConfig { alpha, ..*cfg };
            let mut out = self.decode_with_rng(s, &c, rng);
            total += out.total_iterations;
            out.total_iterations = total;
            if out.is_success() {
                return out;
            }
            last = Some(out);
        }
        last.expect("nonempty")
    }

    fn run(
        &mut self,
        s: &Syndrome,
        cfg: &BpConfig,
        rng: &mut dyn RngCore,
        stop_on_success: bool,
        iterations: usize,
    ) -> BpOutcome {
        let g = &self.graph;
        assert_eq!(s.len(), g.m, "syndrome length must equal the number of checks");
        let n = g.n;
        let eps = cfg.epsilon;
        let prior = ((1.0 - eps) / (eps / 3.0)).ln();
        let prior = [prior; 3];
        let inv_alpha = 1.0 / cfg.alpha;

        let ex = (-prior[0]).exp();
        let t0 = commute_tanh(1.0 + ex, 2.0 * ex, self.ratio_max);
        self.to_check.fill(t0);
        self.to_qubit.fill(0.0);
        for gm in self.gamma.iter_mut() {
            *gm = prior;
        }
        let mut hard = vec![Pauli::I; n];
        let mut eta = vec![1u32; n];
        let mut history = self.record_history.then(Vec::new);

        for (i, o) in self.order.iter_mut().enumerate() {
            *o = i;
        }
        if cfg.schedule == Schedule::SerialRandomOrder {
            self.order.shuffle(rng);
        }

        let mut done = 0;
        let mut success = false;
        for _ in 0..iterations {
            match cfg.schedule {
                Schedule::Parallel => self.parallel_round(s.bits(), &prior, inv_alpha),
                Schedule::Serial | Schedule::SerialRandomOrder => {
                    self.serial_round(s.bits(), &prior, inv_alpha)
                }
            }
            done += 1;
            for i in 0..n {
                let h = hard_decision(&self.gamma[i]);
                if h == hard[i] {
                    eta[i] += 1;
                } else {
                    hard[i] = h;
                    eta[i] = 1;
                }
            }
            if let Some(hist) = history.as_mut() {
                hist.push(hard.clone());
            }
            if stop_on_success && self.graph.matches(&hard, s.bits()) {
                success = true;
                break;
            }
        }

        let belief = BeliefState {
            q: self.gamma.iter().map(distribution).collect(),
            hard: hard.clone(),
            eta,
            iterations: done,
            max_iter: iterations,
        };
        BpOutcome {
            status: if success { BpStatus::Success } else { BpStatus::Failure },
            estimate: success.then(|| SymplecticVector::from_paulis(&hard)),
            belief,
            alpha: cfg.alpha,
            total_iterations: done,
            history,
        }
    }

    fn parallel_round(&mut self, s: &BitVec, prior: &[f64; 3], inv_alpha: f64) {
        let g = &self.graph;
        // check -> qubit: product of the other edges via prefix/suffix products
        for j in 0..g.m {
            let (lo, hi) = (g.check_start[j], g.check_start[j + 1]);
            let flip = s.get(j);
            let mut prefix = 1.0;
            for e in lo..hi {
                self.to_qubit[e] = prefix;
                prefix *= self.to_check[e];
            }
            let mut suffix = 1.0;
            for e in (lo..hi).rev() {
                let p = self.to_qubit[e] * suffix;
                suffix *= self.to_check[e];
                self.to_qubit[e] = check_message(p, flip);
            }
        }
        for i in 0..g.n {
            self.update_qubit(i, prior, inv_alpha);
        }
    }

    fn serial_round(&mut self, s: &BitVec, prior: &[f64; 3], inv_alpha: f64) {
        for idx in 0..self.graph.n {
            let i = self.order[idx];
            let g = &self.graph;
            for &e in &g.qubit_edges[g.qubit_start[i]..g.qubit_start[i + 1]] {
                let j = g.edge_check[e];
                let mut p = 1.0;
                for f in g.check_start[j]..g.check_start[j + 1] {
                    if f != e {
                        p *= self.to_check[f];
                    }
                }
                self.to_qubit[e] = check_message(p, s.get(j));
            }
            self.update_qubit(i, prior, inv_alpha);
        }
    }

    /// `Γ_i = Λ + (1/α) Σ Δ`, then each outgoing message from `Γ_i` with the
    /// edge's own `Δ` removed at unit weight.
    #[inline]
    fn update_qubit(&mut self, i: usize, prior: &[f64; 3], inv_alpha: f64) {
        let g = &self.graph;
        let edges = &g.qubit_edges[g.qubit_start[i]..g.qubit_start[i + 1]];
        let mut gamma = *prior;
        for &e in edges {
            let anti = &ANTI[g.edge_pauli[e].index()];
            let d = inv_alpha * self.to_qubit[e];
            for w in 0..3 {
                if anti[w] {
                    gamma[w] += d;
                }
            }
        }
        self.gamma[i] = gamma;
        let ex = gamma.map(|x| (-x.clamp(-GAMMA_GUARD, GAMMA_GUARD)).exp());
        for &e in edges {
            let (si, w1, w2) = components(g.edge_pauli[e]);
            // exp(-(Γ^W - Δ)) = exp(-Γ^W) exp(Δ) on the anticommuting W
            let num = 1.0 + ex[si];
            let den = (ex[w1] + ex[w2]) * self.to_qubit[e].exp();
            self.to_check[e] = commute_tanh(num, den, self.ratio_max);
        }
    }
}

/// One-shot BP4 decode.
pub fn bp4_decode(code: &StabilizerCode, s: &Syndrome, cfg: &BpConfig) -> BpOutcome {
    Bp4Decoder::for_code(code).decode(s, cfg)
}

/// One-shot adaptive (AMBP4) decode.
pub fn bp4_decode_adaptive(
    code: &StabilizerCode,
    s: &Syndrome,
    cfg: &BpConfig,
    alphas: &[f64],
    rng: &mut dyn RngCore,
) -> BpOutcome {
    Bp4Decoder::for_code(code).decode_adaptive(s, cfg, alphas, rng)
}

/// Empirical step-size schedule `α(ε) = -0.16 log10(ε) - 0.48`, clamped to
/// `[0.5, 2.0]`.
pub fn alpha_of_epsilon(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok((-0.16 * epsilon.log10() - 0.48).clamp(0.5, 2.0))
}

/// Arithmetic sequence `start, start+step, ..., stop` (inclusive), e.g.
/// `(1.6, -0.01, 0.5)` gives the 111 values `1.60, 1.59, ..., 0.50`.
pub fn alpha_sequence(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if step == 0.0 || !step.is_finite() || (stop - start) * step < 0.0 {
        return Err(Error::Config(format!(
            "step {step} does not move from {start} towards {stop}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let v = start + i as f64 * step;
            (v * 1e10).round() / 1e10
        })
        .filter(|&v| v > 0.0)
        .collect())
}
