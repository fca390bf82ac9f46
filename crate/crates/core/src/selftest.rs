//! Deterministic invariant suites behind `qosd selftest`.
//!
//! Each suite checks a core layer against an independent oracle and reports
//! the number of cases examined and the first failure, if any.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bp::{Bp4Decoder, BpConfig};
use crate::codes::{bb_preset, rotated_surface, rotated_toric, StabilizerCode};
use crate::gf2::{gauss_eliminate, BitVec, Gf2Matrix};
use crate::osd::{build_order, candidate_count, dfs_patterns, OsdSystem, ReliabilityMetric};
use crate::reduction::{hrsr, stabilizer_flip_check, FlipClass, LogicalColumns, DEFAULT_THETA};
use crate::symplectic::{symplectic_product, Pauli, Syndrome, SymplecticVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: u64,
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

struct Suite {
    name: &'static str,
    cases: u64,
    failure: Option<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, cases: 0, failure: None }
    }

    /// Records one case; keeps only the first failure.
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn done(self) -> SuiteResult {
        SuiteResult {
            name: self.name.to_string(),
            cases: self.cases,
            failure: self.failure,
        }
    }
}

fn random_pauli(n: usize, rng: &mut ChaCha8Rng) -> SymplecticVector {
    let paulis: Vec<Pauli> = (0..n).map(|_| Pauli::from_index(rng.random_range(0..4))).collect();
    SymplecticVector::from_paulis(&paulis)
}

fn small_codes() -> Vec<StabilizerCode> {
    let mut codes = Vec::new();
    for d in [3, 5] {
        codes.push(rotated_surface(d).expect("surface code"));
    }
    codes.push(rotated_toric(4).expect("toric code"));
    codes.push(bb_preset("72-12-6").expect("bb preset"));
    codes
}

/// Symplectic product against qubit-wise Pauli anticommutation counting, and
/// pairwise commutation of every generator pair.
pub fn commutation_oracle(seed: u64) -> SuiteResult {
    let mut suite = Suite::new("symplectic commutation oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2000 {
        let n = rng.random_range(1..40);
        let a = random_pauli(n, &mut rng);
        let b = random_pauli(n, &mut rng);
        let pa = a.paulis();
        let pb = b.paulis();
        let count = pa.iter().zip(&pb).filter(|(x, y)| x.anticommutes(**y)).count();
        let got = symplectic_product(&a, &b).ok();
        suite.check(got == Some(count % 2 == 1), || format!("{a} vs {b}: {got:?}, {count} anticommuting sites"));
    }
    for code in small_codes() {
        let gens: Vec<SymplecticVector> = (0..code.m())
            .map(|r| code.stabilizer(r))
            .chain((0..code.logical_matrix().rows()).map(|r| code.logical(r)))
            .collect();
        let m = code.m();
        let k = code.k();
        for i in 0..gens.len() {
            for j in i..gens.len() {
                let got = symplectic_product(&gens[i], &gens[j]).unwrap_or(true);
                // Logicals pair X̄_t with Z̄_t; everything else commutes.
                let expect = i >= m && j >= m && (j - m) == (i - m) + k;
                suite.check(got == expect, || format!("{}: rows {i} and {j}", code.name()));
            }
        }
    }
    suite.done()
}

/// `syndrome(e) == syndrome(e + g)` for random stabilizers `g`, and the
/// syndrome agrees with pairwise symplectic products against each check.
pub fn syndrome_invariance(seed: u64) -> SuiteResult {
    let mut suite = Suite::new("syndrome stabilizer-invariance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for code in small_codes() {
        let n = code.n();
        for _ in 0..200 {
            let e = random_pauli(n, &mut rng);
            let mut g = SymplecticVector::zeros(n);
            for r in 0..code.m() {
                if rng.random::<bool>() {
                    g.xor_assign(&code.stabilizer(r));
                }
            }
            let s = code.syndrome(&e);
            suite.check(code.syndrome(&e.xor(&g)) == s, || format!("{}: syndrome changed by a stabilizer", code.name()));
            suite.check(code.is_stabilizer(&g), || format!("{}: product of generators not a stabilizer", code.name()));
            let direct = (0..code.m()).all(|r| s.get(r) == symplectic_product(&code.stabilizer(r), &e).unwrap_or(!s.get(r)));
            suite.check(direct, || format!("{}: syndrome disagrees with symplectic products", code.name()));
        }
    }
    suite.done()
}

/// Replays the recorded row operations and column permutation and checks
/// the reduced form, plus `R(M x) = μ(R(M)) μ^{-1}(x)` on random `x`.
pub fn elimination_replay(seed: u64) -> SuiteResult {
    let mut suite = Suite::new("Gaussian-elimination replay");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrices: Vec<Gf2Matrix> = small_codes().iter().map(StabilizerCode::h_lambda).collect();
    for _ in 0..200 {
        let rows = rng.random_range(1..20);
        let cols = rng.random_range(1..30);
        let density = rng.random_range(0.05..0.6);
        let data: Vec<BitVec> = (0..rows)
            .map(|_| BitVec::from_bools(&(0..cols).map(|_| rng.random_bool(density)).collect::<Vec<_>>()))
            .collect();
        matrices.push(Gf2Matrix::from_rows(cols, data));
    }
    for m in &matrices {
        let el = gauss_eliminate(m);
        suite.check(el.replay(m) == el.reduced, || format!("replay mismatch on {}x{}", m.rows(), m.cols()));
        let identity_ok = (0..m.rows()).all(|r| {
            (0..el.rank).all(|c| el.reduced.get(r, c) == (r == c)) && (r < el.rank || el.reduced.row(r).is_zero())
        });
        suite.check(identity_ok, || format!("reduced form not [I A; 0 0] on {}x{}", m.rows(), m.cols()));
        suite.check(el.rank == m.rank(), || "rank disagrees with reference".into());
        for _ in 0..5 {
            let x = BitVec::from_bools(&(0..m.cols()).map(|_| rng.random::<bool>()).collect::<Vec<_>>());
            let mut lhs = m.mul_vec(&x);
            el.apply_row_ops(&mut lhs);
            let mut xp = BitVec::zeros(m.cols());
            for (t, &c) in el.mu.iter().enumerate() {
                if x.get(c) {
                    xp.set(t, true);
                }
            }
            suite.check(el.reduced.mul_vec(&xp) == lhs, || "row operations disagree with replayed matrix".into());
        }
    }
    suite.done()
}

/// Reduced OSD-0 solutions lift to estimates that reproduce the full
/// syndrome, and the reassembled block structure matches `HΛ`.
pub fn hrsr_lift_soundness(seed: u64) -> SuiteResult {
    let mut suite = Suite::new("HRSR lift soundness");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (d, eps) in [(5, 0.05), (7, 0.08)] {
        let code = rotated_surface(d).expect("surface code");
        let mut bp = Bp4Decoder::for_code(&code);
        let cfg = BpConfig { epsilon: eps, ..BpConfig::default() };
        let full = code.h_lambda();
        for t in 0..300 {
            let mut e = SymplecticVector::zeros(code.n());
            for q in 0..code.n() {
                if rng.random::<f64>() < eps {
                    e.set_pauli(q, Pauli::from_index(rng.random_range(1..4)));
                }
            }
            let s = code.syndrome(&e);
            let iters = 1 + t % 12;
            let belief = bp.run_iterations(&s, &cfg, iters);
            let hard = belief.hard_vector();
            let Ok(red) = hrsr(&code, &s, &belief, &hard, DEFAULT_THETA, ReliabilityMetric::HardThenSoft) else {
                continue;
            };
            let est = red.osd.reconstruct(&red.osd.base_candidate());
            suite.check(code.syndrome(&est) == s, || format!("d={d}: lifted estimate misses the syndrome"));
            let via_lift = red.lift(&red.restrict(&est));
            suite.check(via_lift.as_ref().ok() == Some(&est), || format!("d={d}: lift disagrees with reconstruction"));
            let expected = full.permute_rows(&red.tau).permute_columns(&red.sigma);
            suite.check(red.assembled(&code) == expected, || format!("d={d}: block assembly differs from τ(σ(HΛ))"));
            suite.check(red.zero_block(&code).is_zero(), || format!("d={d}: dropped rows touch free bits"));
            let fixed_ok = (0..red.mask.v).all(|c| est.get(red.sigma[red.cols() + c]) == hard.get(red.sigma[red.cols() + c]));
            suite.check(fixed_ok, || format!("d={d}: fixed bits changed"));
        }
    }
    suite.done()
}

/// DFS enumeration visits exactly `Σ_{i<=w} C(len, i)` distinct patterns,
/// each strictly increasing, and stops at the budget.
pub fn dfs_counts(_seed: u64) -> SuiteResult {
    let mut suite = Suite::new("DFS candidate counts");
    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }
    for len in 0..=14usize {
        for w in 0..=4usize {
            let expect: u64 = (0..=w.min(len)).map(|i| binom(len as u64, i as u64)).sum();
            let mut seen = std::collections::HashSet::new();
            let mut sorted = true;
            let got = dfs_patterns(len, w, u64::MAX, |p| {
                sorted &= p.windows(2).all(|x| x[0] < x[1]) && p.len() <= w;
                seen.insert(p.to_vec());
            });
            suite.check(got == expect && seen.len() as u64 == expect && sorted, || {
                format!("len={len} w={w}: visited {got}, distinct {}, expected {expect}", seen.len())
            });
            suite.check(candidate_count(len, w) == expect, || format!("candidate_count({len}, {w}) != {expect}"));
            for budget in [1u64, 3, 7] {
                let got = dfs_patterns(len, w, budget, |_| {});
                suite.check(got == budget.min(expect), || format!("len={len} w={w} budget={budget}: {got}"));
            }
        }
    }
    suite.done()
}

/// All stabilizers of a code, by enumerating generator products.
fn stabilizer_group(code: &StabilizerCode) -> std::collections::HashSet<Vec<bool>> {
    let n = code.n();
    let gens: Vec<SymplecticVector> = (0..code.m()).map(|r| code.stabilizer(r)).collect();
    let mut out = std::collections::HashSet::new();
    for mask in 0u64..(1 << gens.len()) {
        let mut g = SymplecticVector::zeros(n);
        for (i, s) in gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g.xor_assign(s);
            }
        }
        out.insert(g.to_bits().to_bools());
    }
    out
}

/// On `[[9,1,3]]`: for every syndrome, the flip `[A_j^T | unit_j]` of each
/// reliable column is classified as a stabilizer exactly when it belongs to
/// the enumerated stabilizer group. Also sweeps the whole null space of `HΛ`.
pub fn proposition_oracle(seed: u64) -> SuiteResult {
    let mut suite = Suite::new("degenerate-coset exhaustive oracle");
    let code = rotated_surface(3).expect("surface code");
    let group = stabilizer_group(&code);
    let logicals = LogicalColumns::new(&code);
    let n = code.n();
    let mut bp = Bp4Decoder::for_code(&code);
    let cfg = BpConfig { epsilon: 0.05, ..BpConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for sbits in 0u32..(1 << code.m()) {
        let s = Syndrome(BitVec::from_bools(&(0..code.m()).map(|i| sbits >> i & 1 == 1).collect::<Vec<_>>()));
        let belief = bp.run_iterations(&s, &cfg, 1 + (sbits as usize % 5));
        let mut orders = vec![build_order(&belief, ReliabilityMetric::HardThenSoft)];
        let mut shuffled = orders[0].clone();
        for i in (1..shuffled.order.len()).rev() {
            let j = rng.random_range(0..=i);
            shuffled.order.swap(i, j);
        }
        orders.push(shuffled);
        for order in orders {
            let Ok(system) = OsdSystem::for_code(&code, &s, &order, &belief.hard_vector()) else {
                suite.check(false, || format!("syndrome {sbits:08b}: elimination failed"));
                continue;
            };
            for j in 0..system.reliable_len() {
                let g = system.flip_vector(j);
                let in_group = group.contains(&g.to_bits().to_bools());
                let class = stabilizer_flip_check(&system, &logicals, j).ok();
                suite.check(code.syndrome(&g).is_zero(), || format!("syndrome {sbits:08b}: flip {j} has a syndrome"));
                suite.check(class == Some(if in_group { FlipClass::Stabilizer } else { FlipClass::NontrivialLogical }), || {
                    format!("syndrome {sbits:08b}: flip {j} classified {class:?}, group membership {in_group}")
                });
            }
        }
    }
    let basis = code.h_lambda().null_space();
    for mask in 0u64..(1 << basis.len()) {
        let mut v = BitVec::zeros(2 * n);
        for (i, b) in basis.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v.xor_assign(b);
            }
        }
        let g = SymplecticVector::from_bits(&v).expect("length 2n");
        let by_logicals = logicals.apply(v.iter_ones()).is_zero();
        let in_group = group.contains(&g.to_bits().to_bools());
        suite.check(by_logicals == in_group, || format!("null-space element {g}: LΛ test {by_logicals}, group {in_group}"));
    }
    suite.done()
}

pub const SUITES: [(&str, fn(u64) -> SuiteResult); 6] = [
    ("commutation", commutation_oracle),
    ("syndrome", syndrome_invariance),
    ("elimination", elimination_replay),
    ("hrsr", hrsr_lift_soundness),
    ("dfs", dfs_counts),
    ("proposition", proposition_oracle),
];

/// Runs every suite with a fixed seed.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    SUITES.iter().map(|(_, f)| f(seed)).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_suites_pass() {
        for r in super::run_all(2024) {
            assert!(r.passed(), "{}: {:?}", r.name, r.failure);
            assert!(r.cases > 0, "{}", r.name);
        }
    }
}
