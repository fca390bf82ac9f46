use proptest::prelude::*;
use qosd::bp::{BeliefState, Bp4Decoder, BpConfig};
use qosd::codes::{rotated_surface, StabilizerCode};
use qosd::gf2::{BitVec, Gf2Matrix};
use qosd::osd::{build_order, osd_w, OsdSystem, ReliabilityMetric};
use qosd::reduction::{
    adosd, corollary_check, hrsr, hrsr_with_mask, stabilizer_flip_check, AdosdConfig, AdosdStage, FlipClass,
    HighlyReliableMask, LogicalColumns, DEFAULT_THETA,
};
use qosd::sim::{sample_error, trial_seed};
use qosd::symplectic::{Pauli, SymplecticVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn in_row_space(code: &StabilizerCode, g: &SymplecticVector) -> bool {
    let h = code.check_matrix();
    let mut rows = h.row_vecs().to_vec();
    rows.push(g.to_bits());
    Gf2Matrix::from_rows(h.cols(), rows).rank() == h.rank()
}

#[test]
fn nearly_converged_instance_takes_the_osd0_path() {
    let code = rotated_surface(5).unwrap();
    let n = code.n();
    let q = 12;
    let mut e = SymplecticVector::zeros(n);
    e.set_pauli(q, Pauli::X);
    let s = code.syndrome(&e);
    let residual: Vec<usize> = (0..code.m()).filter(|&r| s.get(r)).collect();
    assert!(!residual.is_empty());
    let mut shaky = vec![false; n];
    for &r in &residual {
        for &(qq, _) in code.check(r) {
            shaky[qq] = true;
        }
    }
    let t = 100;
    let belief = BeliefState {
        q: (0..n)
            .map(|i| if shaky[i] { [0.7, 0.1, 0.1, 0.1] } else { [1.0, 0.0, 0.0, 0.0] })
            .collect(),
        hard: vec![Pauli::I; n],
        eta: (0..n).map(|i| if shaky[i] { 1 } else { t as u32 }).collect(),
        iterations: t,
        max_iter: t,
    };
    let out = adosd(&code, &s, &belief, &AdosdConfig::default()).unwrap();
    assert!(out.corollary);
    assert_eq!(out.stage, AdosdStage::Osd0);
    let red = hrsr(&code, &s, &belief, &belief.hard_vector(), DEFAULT_THETA, ReliabilityMetric::HardThenSoft).unwrap();
    assert_eq!(out.estimate, red.osd.reconstruct(&red.osd.base_candidate()));
    assert!(!code.is_logical_error(&e, Some(&out.estimate)).unwrap());
}

#[test]
fn nothing_selected_matches_plain_osd() {
    let code = rotated_surface(5).unwrap();
    let mut bp = Bp4Decoder::for_code(&code);
    let cfg = AdosdConfig { theta: 1.0 + 1e-10, ..AdosdConfig::default() };
    let budget = cfg.budget(&code);
    let mut compared = 0;
    for t in 0..400 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(12, t));
        let s = code.syndrome(&sample_error(0.06, code.n(), &mut rng));
        let belief = bp.decode(&s, &BpConfig { epsilon: 0.06, ..BpConfig::default() }).belief;
        let out = adosd(&code, &s, &belief, &cfg).unwrap();
        assert_eq!(out.v, 0);
        let order = build_order(&belief, cfg.metric);
        let sys = OsdSystem::for_code(&code, &s, &order, &belief.hard_vector()).unwrap();
        assert_eq!(out.estimate, osd_w(&sys, out.order, budget).estimate);
        compared += 1;
    }
    assert_eq!(compared, 400);
}

#[test]
fn adosd_and_osd2_agree_on_logical_verdicts() {
    let code = rotated_surface(5).unwrap();
    let eps = 0.05;
    let mut bp = Bp4Decoder::for_code(&code);
    let bp_cfg = BpConfig { epsilon: eps, ..BpConfig::default() };
    let cfg = AdosdConfig::default();
    let (mut failed, mut agree) = (0u32, 0u32);
    let mut t = 0;
    while failed < 10_000 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(99, t));
        t += 1;
        let e = sample_error(eps, code.n(), &mut rng);
        let s = code.syndrome(&e);
        let out = bp.decode(&s, &bp_cfg);
        if out.is_success() {
            continue;
        }
        failed += 1;
        let a = adosd(&code, &s, &out.belief, &cfg).unwrap();
        let order = build_order(&out.belief, cfg.metric);
        let sys = OsdSystem::for_code(&code, &s, &order, &out.belief.hard_vector()).unwrap();
        let b = osd_w(&sys, 2, u64::MAX);
        let va = code.is_logical_error(&e, Some(&a.estimate)).unwrap();
        let vb = code.is_logical_error(&e, Some(&b.estimate)).unwrap();
        agree += u32::from(va == vb);
    }
    let rate = agree as f64 / failed as f64;
    assert!(rate >= 0.99, "agreement {rate}");
}

/// Where the light-column test fires, every order-2 output lies in the
/// coset of the order-0 output.
#[test]
fn light_columns_imply_same_coset() {
    for (d, eps, want) in [(5, 0.03, 1000), (7, 0.05, 1000)] {
        let code = rotated_surface(d).unwrap();
        let mut bp = Bp4Decoder::for_code(&code);
        let cfg = BpConfig { epsilon: eps, ..BpConfig::default() };
        let (mut fired, mut t) = (0, 0);
        while fired < want {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(d as u64, t));
            t += 1;
            let s = code.syndrome(&sample_error(eps, code.n(), &mut rng));
            let out = bp.decode(&s, &cfg);
            if out.is_success() {
                continue;
            }
            let Ok(red) = hrsr(&code, &s, &out.belief, &out.belief.hard_vector(), DEFAULT_THETA, ReliabilityMetric::HardThenSoft) else {
                continue;
            };
            if !corollary_check(&red.osd, d) {
                continue;
            }
            fired += 1;
            let e0 = red.osd.reconstruct(&red.osd.base_candidate());
            for w in [1, 2] {
                let ew = osd_w(&red.osd, w, u64::MAX).estimate;
                assert!(code.is_stabilizer(&e0.xor(&ew)), "d={d} trial {t} w={w}");
            }
        }
    }
}

#[test]
fn logical_filter_still_valid() {
    let code = rotated_surface(5).unwrap();
    let mut bp = Bp4Decoder::for_code(&code);
    let cfg = AdosdConfig { logical_flip_filter: true, ..AdosdConfig::default() };
    for t in 0..300 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(4, t));
        let s = code.syndrome(&sample_error(0.07, code.n(), &mut rng));
        let out = bp.decode(&s, &BpConfig { epsilon: 0.07, ..BpConfig::default() });
        if out.is_success() {
            continue;
        }
        let a = adosd(&code, &s, &out.belief, &cfg).unwrap();
        assert_eq!(code.syndrome(&a.estimate), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lift_is_sound_for_any_mask(seed in any::<u64>(), density in 0.0f64..0.9, d in prop::sample::select(vec![3usize, 5, 7])) {
        let code = rotated_surface(d).unwrap();
        let n = code.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = sample_error(0.08, n, &mut rng);
        let s = code.syndrome(&e);
        let belief = Bp4Decoder::for_code(&code).run_iterations(&s, &BpConfig { epsilon: 0.08, ..BpConfig::default() }, 1 + (seed % 9) as usize);
        // fix a random subset to the true error so verification can pass
        let hard = e.clone();
        let mut selected = BitVec::zeros(2 * n);
        for b in 0..2 * n {
            if rng.random_bool(density) {
                selected.set(b, true);
            }
        }
        let mask = HighlyReliableMask { v: selected.count_ones(), selected, theta: DEFAULT_THETA };
        let red = hrsr_with_mask(&code, &s, &belief, &hard, mask, ReliabilityMetric::HardThenSoft);
        prop_assert!(red.is_ok());
        let red = red.unwrap();
        let reliable = BitVec::from_bools(&(0..red.osd.reliable_len()).map(|_| rng.random::<bool>()).collect::<Vec<_>>());
        let c = red.osd.solve(&reliable).unwrap();
        let est = red.osd.reconstruct(&c);
        prop_assert_eq!(code.syndrome(&est), s.clone());
        prop_assert_eq!(red.lift(&red.restrict(&est)).unwrap(), est);
        let h_tilde = red.h_tilde();
        prop_assert_eq!(h_tilde.rows(), red.m_prime);
    }

    #[test]
    fn flip_classification_matches_row_space(seed in any::<u64>()) {
        let code = rotated_surface(5).unwrap();
        let lc = LogicalColumns::new(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = code.syndrome(&sample_error(0.1, code.n(), &mut rng));
        let belief = Bp4Decoder::for_code(&code).run_iterations(&s, &BpConfig { epsilon: 0.1, ..BpConfig::default() }, 3);
        let order = build_order(&belief, ReliabilityMetric::HardThenSoft);
        let sys = OsdSystem::for_code(&code, &s, &order, &belief.hard_vector()).unwrap();
        for j in 0..sys.reliable_len() {
            let g = sys.flip_vector(j);
            let expect = if in_row_space(&code, &g) { FlipClass::Stabilizer } else { FlipClass::NontrivialLogical };
            prop_assert_eq!(stabilizer_flip_check(&sys, &lc, j).unwrap(), expect);
        }
    }
}
