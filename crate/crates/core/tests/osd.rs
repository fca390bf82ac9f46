use std::time::Instant;

use proptest::prelude::*;
use qosd::bp::{Bp4Decoder, BpConfig};
use qosd::codes::{rotated_surface, StabilizerCode};
use qosd::gf2::BitVec;
use qosd::osd::{
    build_order, candidate_count, dfs_patterns, order_from_budget, osd0, osd2_budget, osd_w, OsdSystem,
    ReliabilityMetric, ReliabilityOrder,
};
use qosd::sim::{sample_error, trial_seed};
use qosd::symplectic::{Syndrome, SymplecticVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    code: StabilizerCode,
    s: Syndrome,
    order: ReliabilityOrder,
    hard: SymplecticVector,
}

fn instance(d: usize, eps: f64, seed: u64, iters: usize, metric: ReliabilityMetric) -> Instance {
    let code = rotated_surface(d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = sample_error(eps, code.n(), &mut rng);
    let s = code.syndrome(&e);
    let belief = Bp4Decoder::for_code(&code).run_iterations(&s, &BpConfig { epsilon: eps, ..BpConfig::default() }, iters);
    let order = build_order(&belief, metric);
    let hard = belief.hard_vector();
    Instance { code, s, order, hard }
}

#[test]
fn budget_examples() {
    let len = 25 + 1;
    assert_eq!(order_from_budget(len, 1 + len as u64 + (len * (len - 1) / 2) as u64), 2);
    assert_eq!(order_from_budget(len, osd2_budget(len)), 2);
    assert_eq!(order_from_budget(4, 11), 2);
    assert_eq!(order_from_budget(4, 10), 1);
    assert_eq!(order_from_budget(0, 100), 0);
    assert_eq!(candidate_count(4, 2), 11);
}

#[test]
fn hard_then_soft_order_invariant() {
    let code = rotated_surface(7).unwrap();
    let mut bp = Bp4Decoder::for_code(&code);
    for t in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(2, t));
        let s = code.syndrome(&sample_error(0.08, code.n(), &mut rng));
        let belief = bp.run_iterations(&s, &BpConfig { epsilon: 0.08, ..BpConfig::default() }, 1 + (t as usize % 20));
        let order = build_order(&belief, ReliabilityMetric::HardThenSoft).order;
        let mut seen = vec![false; 2 * code.n()];
        for &b in &order {
            assert!(!seen[b]);
            seen[b] = true;
        }
        let n = code.n();
        for w in order.windows(2) {
            let (ei, ej) = (belief.eta[w[0] % n], belief.eta[w[1] % n]);
            assert!(
                ei < ej || (ei == ej && belief.bit_soft_reliability(w[0]) <= belief.bit_soft_reliability(w[1])),
                "bits {} then {}",
                w[0],
                w[1]
            );
        }
    }
}

#[test]
fn zero_a_column_toggles_only_its_bit() {
    // One check X0 X1 on two qubits; bits 2 and 3 (the Z part) appear nowhere.
    let rows: [&[usize]; 1] = [&[0, 1]];
    let s = BitVec::from_bools(&[true]);
    let hard = SymplecticVector::zeros(2);
    let sys = OsdSystem::new(&rows, &s, &[0, 1, 2, 3], &[0, 1, 2, 3], &hard, SymplecticVector::zeros(2)).unwrap();
    assert_eq!(sys.rank(), 1);
    let base = sys.base_candidate();
    let mut zero_cols = 0;
    for j in 0..sys.reliable_len() {
        if sys.a_column(j).is_zero() {
            zero_cols += 1;
            let f = sys.flip_candidate(&base, j).unwrap();
            assert_eq!(f.unreliable, base.unreliable);
            let diff = sys.reconstruct(&base).xor(&sys.reconstruct(&f));
            assert_eq!(diff.to_bits().ones(), vec![sys.reliable_bit(j)]);
        }
    }
    assert_eq!(zero_cols, 2);
}

#[test]
fn enumerated_candidates_are_valid() {
    for seed in 0..30 {
        let inst = instance(5, 0.06, seed, 5, ReliabilityMetric::HardThenSoft);
        let (_, sys) = osd0(&inst.code, &inst.s, &inst.order, &inst.hard).unwrap();
        let base = sys.base_candidate();
        let mut best = usize::MAX;
        let visited = dfs_patterns(sys.reliable_len(), 2, u64::MAX, |p| {
            let mut c = base.clone();
            for &j in p {
                sys.flip_in_place(&mut c, j).unwrap();
            }
            let e = sys.reconstruct(&c);
            assert_eq!(inst.code.syndrome(&e), inst.s);
            best = best.min(e.weight());
        });
        assert_eq!(visited, candidate_count(sys.reliable_len(), 2));
        let r = osd_w(&sys, 2, u64::MAX);
        assert_eq!(r.weight, best);
        assert_eq!(r.candidates, visited);
        assert_eq!(inst.code.syndrome(&r.estimate), inst.s);
    }
}

#[test]
fn binding_budget_returns_best_so_far() {
    let inst = instance(5, 0.06, 3, 5, ReliabilityMetric::HardThenSoft);
    let (e0, sys) = osd0(&inst.code, &inst.s, &inst.order, &inst.hard).unwrap();
    let r = osd_w(&sys, 3, 1);
    assert_eq!(r.candidates, 1);
    assert_eq!(r.estimate, e0);
    let r = osd_w(&sys, 2, 17);
    assert_eq!(r.candidates, 17);
    assert!(r.weight <= e0.weight());
}

#[test]
fn per_candidate_cost_does_not_grow_with_order() {
    let inst = instance(11, 0.03, 7, 10, ReliabilityMetric::HardThenSoft);
    let (_, sys) = osd0(&inst.code, &inst.s, &inst.order, &inst.hard).unwrap();
    let per_candidate = |w: usize| {
        (0..5)
            .map(|_| {
                let t = Instant::now();
                let r = osd_w(&sys, w, u64::MAX);
                t.elapsed().as_secs_f64() / r.candidates as f64
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (t1, t2) = (per_candidate(1), per_candidate(2));
    assert!(t2 < 2.0 * t1, "w=1: {t1:e}s, w=2: {t2:e}s per candidate");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn incremental_flip_matches_resolve(seed in any::<u64>(), big in any::<bool>(), flips in 1usize..5, metric in 0usize..4) {
        let d = if big { 5 } else { 3 };
        let metric = [ReliabilityMetric::HardThenSoft, ReliabilityMetric::Marginal, ReliabilityMetric::Entropy, ReliabilityMetric::Max][metric];
        let inst = instance(d, 0.08, seed, 1 + (seed % 7) as usize, metric);
        let (e0, sys) = osd0(&inst.code, &inst.s, &inst.order, &inst.hard).unwrap();
        prop_assert_eq!(inst.code.syndrome(&e0), inst.s.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let mut c = sys.base_candidate();
        let mut hard = inst.hard.clone();
        let mut reliable: BitVec = sys.hard_reliable().clone();
        for _ in 0..flips {
            let j = rng.random_range(0..sys.reliable_len());
            sys.flip_in_place(&mut c, j).unwrap();
            hard.toggle(sys.reliable_bit(j));
            reliable.toggle(j);
        }
        // from-scratch row-wise solve
        prop_assert_eq!(sys.solve(&reliable).unwrap(), c.clone());
        // full re-run of OSD-0 with the toggled hard decision
        let (e_rerun, _) = osd0(&inst.code, &inst.s, &inst.order, &hard).unwrap();
        prop_assert_eq!(sys.reconstruct(&c), e_rerun);
    }

    #[test]
    fn flip_is_an_involution(seed in any::<u64>()) {
        let inst = instance(5, 0.05, seed, 4, ReliabilityMetric::HardThenSoft);
        let (_, sys) = osd0(&inst.code, &inst.s, &inst.order, &inst.hard).unwrap();
        let base = sys.base_candidate();
        let j = (seed % sys.reliable_len() as u64) as usize;
        let twice = sys.flip_candidate(&sys.flip_candidate(&base, j).unwrap(), j).unwrap();
        prop_assert_eq!(twice, base);
    }

    #[test]
    fn osd0_with_zero_reliable_part_uses_pivots_only(seed in any::<u64>()) {
        let inst = instance(5, 0.05, seed, 2, ReliabilityMetric::HardThenSoft);
        let sys = OsdSystem::for_code(&inst.code, &inst.s, &inst.order, &SymplecticVector::zeros(inst.code.n())).unwrap();
        let e = sys.reconstruct(&sys.base_candidate());
        let pivots: Vec<usize> = (0..sys.rank()).map(|p| sys.unreliable_bit(p)).collect();
        for b in e.to_bits().iter_ones() {
            prop_assert!(pivots.contains(&b));
        }
        prop_assert_eq!(inst.code.syndrome(&e), inst.s);
    }
}
