use proptest::prelude::*;
use qosd::codes::{bb_preset, bb_preset_names, parse_qcode, rotated_surface, rotated_toric, to_qcode_string, StabilizerCode};
use qosd::gf2::{gauss_eliminate, BitVec, Gf2Matrix};
use qosd::sim::sample_error;
use qosd::symplectic::{Pauli, SymplecticVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn pauli_matrix(p: Pauli) -> [[C; 2]; 2] {
    let (o, z, i) = ((1.0, 0.0), (0.0, 0.0), (0.0, 1.0));
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, (0.0, -1.0)], [i, z]],
        Pauli::Z => [[o, z], [z, (-1.0, 0.0)]],
    }
}

/// Dense tensor product of single-qubit Paulis.
fn dense(ps: &[Pauli]) -> Vec<Vec<C>> {
    let mut m = vec![vec![(1.0, 0.0)]];
    for &p in ps {
        let q = pauli_matrix(p);
        let size = m.len();
        let mut next = vec![vec![(0.0, 0.0); 2 * size]; 2 * size];
        for r in 0..size {
            for c in 0..size {
                for a in 0..2 {
                    for b in 0..2 {
                        next[2 * r + a][2 * c + b] = cmul(m[r][c], q[a][b]);
                    }
                }
            }
        }
        m = next;
    }
    m
}

fn matmul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    (0..n).fold((0.0, 0.0), |acc, k| {
                        let p = cmul(a[r][k], b[k][c]);
                        (acc.0 + p.0, acc.1 + p.1)
                    })
                })
                .collect()
        })
        .collect()
}

fn commute_directly(a: &[Pauli], b: &[Pauli]) -> bool {
    let (ma, mb) = (dense(a), dense(b));
    let (ab, ba) = (matmul(&ma, &mb), matmul(&mb, &ma));
    ab.iter().flatten().zip(ba.iter().flatten()).all(|(x, y)| (x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12)
}

fn family(which: usize) -> StabilizerCode {
    match which {
        0 => rotated_surface(3).unwrap(),
        1 => rotated_surface(5).unwrap(),
        2 => rotated_surface(7).unwrap(),
        3 => rotated_toric(4).unwrap(),
        4 => rotated_toric(6).unwrap(),
        _ => bb_preset("72-12-6").unwrap(),
    }
}

fn pauli() -> impl Strategy<Value = Pauli> {
    (0usize..4).prop_map(Pauli::from_index)
}

#[test]
fn every_family_member_satisfies_the_code_invariants() {
    let mut codes: Vec<StabilizerCode> = (3..=15).step_by(2).map(|d| rotated_surface(d).unwrap()).collect();
    codes.extend((2..=10).step_by(2).map(|d| rotated_toric(d).unwrap()));
    codes.extend(bb_preset_names().iter().map(|p| bb_preset(p).unwrap()));
    for code in &codes {
        let report = code.verify();
        assert!(report.passed(), "{code:?}: {:?}", report.failures);
        assert_eq!(code.check_matrix().rank(), code.n() - code.k(), "{code:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn symplectic_product_matches_matrix_commutation(
        a in prop::collection::vec(pauli(), 1..=3),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<Pauli> = (0..a.len()).map(|_| Pauli::from_index(rng.random_range(0..4))).collect();
        let va = SymplecticVector::from_paulis(&a);
        let vb = SymplecticVector::from_paulis(&b);
        prop_assert_eq!(!va.symplectic_product(&vb).unwrap(), commute_directly(&a, &b));
    }

    #[test]
    fn stabilizers_do_not_change_the_syndrome(which in 0usize..6, seed in any::<u64>()) {
        let code = family(which);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = sample_error(0.2, code.n(), &mut rng);
        let mut shifted = e.clone();
        for r in 0..code.m() {
            if rng.random::<bool>() {
                shifted.xor_assign(&code.stabilizer(r));
            }
        }
        prop_assert_eq!(code.syndrome(&shifted), code.syndrome(&e));
        prop_assert!(!code.is_logical_error(&e, Some(&shifted)).unwrap());
    }

    #[test]
    fn export_then_load_is_the_identity(which in 0usize..6) {
        let code = family(which);
        let back = parse_qcode(&to_qcode_string(&code), code.name()).unwrap();
        prop_assert_eq!(back.check_matrix(), code.check_matrix());
        prop_assert_eq!(back.logical_matrix(), code.logical_matrix());
        prop_assert_eq!((back.n(), back.k(), back.d()), (code.n(), code.k(), code.d()));
    }

    #[test]
    fn elimination_replays_from_its_log(rows in 1usize..30, cols in 1usize..100, density in 0.05f64..0.6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Gf2Matrix::from_rows(
            cols,
            (0..rows)
                .map(|_| BitVec::from_bools(&(0..cols).map(|_| rng.random_bool(density)).collect::<Vec<_>>()))
                .collect(),
        );
        let e = gauss_eliminate(&m);
        prop_assert_eq!(e.replay(&m), e.reduced.clone());
        prop_assert_eq!(e.rank, m.rank());
        for r in 0..rows {
            for c in 0..e.rank {
                prop_assert_eq!(e.reduced.get(r, c), r == c);
            }
            if r >= e.rank {
                prop_assert!(e.reduced.row(r).is_zero());
            }
        }
        // the log maps M x to the reduced right-hand side
        let x = BitVec::from_bools(&(0..cols).map(|_| rng.random::<bool>()).collect::<Vec<_>>());
        let mut s = m.mul_vec(&x);
        e.apply_row_ops(&mut s);
        let xp = BitVec::from_bools(&e.mu.iter().map(|&c| x.get(c)).collect::<Vec<_>>());
        prop_assert_eq!(e.reduced.mul_vec(&xp), s);
    }
}
