//! Stabilizer codes: the check/logical matrix pair, invariant verification,
//! logical-error classification, and the benchmark code families.

mod bicycle;
mod io;
mod surface;

pub use bicycle::{bb_preset, bb_preset_names, bivariate_bicycle, BbPreset, Monomial};
pub use io::{
    load_code, load_qcode, parse_qcode, parse_qcode_unchecked, to_qcode_string, write_qcode,
    CodeFileBundle,
};
pub use surface::{rotated_surface, rotated_toric};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};
use crate::symplectic::{matrix_row, symplectic_gram, Pauli, Syndrome, SymplecticVector};

/// Which family a code came from; used for labels and CLI parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeSpec {
    RotatedSurface { d: usize },
    RotatedToric { d: usize },
    BivariateBicycle { preset: String },
    FromFile(CodeFileBundle),
}

impl CodeSpec {
    pub fn build(&self) -> Result<StabilizerCode> {
        match self {
            CodeSpec::RotatedSurface { d } => rotated_surface(*d),
            CodeSpec::RotatedToric { d } => rotated_toric(*d),
            CodeSpec::BivariateBicycle { preset } => bb_preset(preset),
            CodeSpec::FromFile(bundle) => load_code(bundle),
        }
    }
}

/// An `[[n, k, d]]` stabilizer code.
///
/// `h` is the `m x 2n` check matrix (rows may be dependent, `m >= n - k`),
/// `l` the `2k x 2n` logical matrix with rows `X̄_1..X̄_k, Z̄_1..Z̄_k`.
/// Construction through [`StabilizerCode::new`] verifies every invariant.
#[derive(Clone)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    k: usize,
    d: Option<usize>,
    h: Gf2Matrix,
    l: Gf2Matrix,
    checks: Vec<Vec<(usize, Pauli)>>,
    lambda_supports: Vec<Vec<usize>>,
}

impl fmt::Debug for StabilizerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "StabilizerCode({} [[{}, {}, {}]], m={})",
            self.name,
            self.n,
            self.k,
            self.d.map_or("?".to_string(), |d| d.to_string()),
            self.h.rows()
        )
    }
}

/// Outcome of [`StabilizerCode::verify_matrices`]: one entry per violated invariant.
#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub rank_h: usize,
    pub rank_logical_gram: usize,
    /// Stabilizer weight -> number of generators with that weight.
    pub weight_histogram: BTreeMap<usize, usize>,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl StabilizerCode {
    /// Builds and verifies a code. `d` is metadata and is not recomputed.
    pub fn new(name: impl Into<String>, h: Gf2Matrix, l: Gf2Matrix, d: Option<usize>) -> Result<Self> {
        let report = Self::verify_matrices(&h, &l);
        if let Some(first) = report.failures.first() {
            return Err(Error::InvariantViolation(first.clone()));
        }
        Ok(Self::assemble(name.into(), h, l, d))
    }

    fn assemble(name: String, h: Gf2Matrix, l: Gf2Matrix, d: Option<usize>) -> Self {
        let n = h.cols() / 2;
        let k = l.rows() / 2;
        let mut checks = Vec::with_capacity(h.rows());
        let mut lambda_supports = Vec::with_capacity(h.rows());
        for r in 0..h.rows() {
            let row = matrix_row(&h, r);
            let mut check = Vec::new();
            let mut support = Vec::new();
            for q in 0..n {
                let p = row.pauli(q);
                if p != Pauli::I {
                    check.push((q, p));
                }
            }
            // Column j of HΛ is column (j + n) mod 2n of H.
            for q in row.z().iter_ones() {
                support.push(q);
            }
            for q in row.x().iter_ones() {
                support.push(n + q);
            }
            checks.push(check);
            lambda_supports.push(support);
        }
        StabilizerCode {
            name,
            n,
            k,
            d,
            h,
            l,
            checks,
            lambda_supports,
        }
    }

    /// Checks every invariant and lists each failure individually.
    pub fn verify_matrices(h: &Gf2Matrix, l: &Gf2Matrix) -> VerificationReport {
        let mut report = VerificationReport::default();
        if h.cols() % 2 != 0 || h.cols() == 0 {
            report
                .failures
                .push(format!("check matrix has {} columns, expected an even positive count", h.cols()));
            return report;
        }
        if l.cols() != h.cols() {
            report.failures.push(format!(
                "logical matrix has {} columns, check matrix has {}",
                l.cols(),
                h.cols()
            ));
            return report;
        }
        if l.rows() % 2 != 0 {
            report
                .failures
                .push(format!("logical matrix has {} rows, expected 2k", l.rows()));
            return report;
        }
        let n = h.cols() / 2;
        let k = l.rows() / 2;
        report.n = n;
        report.k = k;
        report.m = h.rows();
        for r in 0..h.rows() {
            *report.weight_histogram.entry(matrix_row(h, r).weight()).or_default() += 1;
        }
        let hh = symplectic_gram(h, h);
        for i in 0..h.rows() {
            for j in (i + 1)..h.rows() {
                if hh.get(i, j) {
                    report
                        .failures
                        .push(format!("stabilizer rows {i} and {j} anticommute"));
                }
            }
        }
        let hl = symplectic_gram(h, l);
        for i in 0..h.rows() {
            for j in 0..l.rows() {
                if hl.get(i, j) {
                    report.failures.push(format!(
                        "stabilizer row {i} anticommutes with logical row {j}"
                    ));
                }
            }
        }
        report.rank_h = h.rank();
        if report.rank_h + k != n {
            report.failures.push(format!(
                "rank(H) = {} but n - k = {}",
                report.rank_h,
                n as isize - k as isize
            ));
        }
        report.rank_logical_gram = symplectic_gram(l, l).rank();
        if report.rank_logical_gram != 2 * k {
            report.failures.push(format!(
                "rank(L Λ L^T) = {} but 2k = {}",
                report.rank_logical_gram,
                2 * k
            ));
        }
        report
    }

    pub fn verify(&self) -> VerificationReport {
        Self::verify_matrices(&self.h, &self.l)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Declared minimum distance, if known.
    #[inline]
    pub fn d(&self) -> Option<usize> {
        self.d
    }

    /// Number of check-matrix rows.
    #[inline]
    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn check_matrix(&self) -> &Gf2Matrix {
        &self.h
    }

    pub fn logical_matrix(&self) -> &Gf2Matrix {
        &self.l
    }

    /// Non-identity entries `(qubit, pauli)` of check `r`.
    #[inline]
    pub fn check(&self, r: usize) -> &[(usize, Pauli)] {
        &self.checks[r]
    }

    pub fn checks(&self) -> &[Vec<(usize, Pauli)>] {
        &self.checks
    }

    /// Set columns of row `r` of `HΛ`, i.e. the error bits check `r` reads.
    #[inline]
    pub fn lambda_support(&self, r: usize) -> &[usize] {
        &self.lambda_supports[r]
    }

    pub fn stabilizer(&self, r: usize) -> SymplecticVector {
        matrix_row(&self.h, r)
    }

    pub fn logical(&self, r: usize) -> SymplecticVector {
        matrix_row(&self.l, r)
    }

    /// Supports of every row of `HΛ`.
    pub fn lambda_supports(&self) -> &[Vec<usize>] {
        &self.lambda_supports
    }

    /// Dense `HΛ` (`m x 2n`).
    pub fn h_lambda(&self) -> Gf2Matrix {
        let rows = self
            .lambda_supports
            .iter()
            .map(|s| BitVec::from_indices(2 * self.n, s))
            .collect();
        Gf2Matrix::from_rows(2 * self.n, rows)
    }

    /// `H Λ e^T`, evaluated over the sparse check supports.
    pub fn syndrome(&self, e: &SymplecticVector) -> Syndrome {
        debug_assert_eq!(e.num_qubits(), self.n);
        let mut s = BitVec::zeros(self.m());
        for (r, support) in self.lambda_supports.iter().enumerate() {
            let mut parity = false;
            for &b in support {
                parity ^= e.get(b);
            }
            if parity {
                s.set(r, true);
            }
        }
        Syndrome(s)
    }

    /// `L Λ e^T` (one bit per logical row).
    pub fn logical_syndrome(&self, e: &SymplecticVector) -> BitVec {
        let el = e.lambda_bits();
        self.l.mul_vec(&el)
    }

    /// True iff `e` is a stabilizer: zero syndrome and no logical action.
    pub fn is_stabilizer(&self, e: &SymplecticVector) -> bool {
        self.syndrome(e).is_zero() && self.logical_syndrome(e).is_zero()
    }

    /// Classifies a decoding outcome. `estimate = None` means the decoder
    /// failed, which always counts as a logical error. An estimate whose
    /// residual has a nonzero syndrome is reported as an error.
    pub fn is_logical_error(
        &self,
        error: &SymplecticVector,
        estimate: Option<&SymplecticVector>,
    ) -> Result<bool> {
        let Some(estimate) = estimate else {
            return Ok(true);
        };
        let residual = error.xor(estimate);
        let s = self.syndrome(&residual);
        if !s.is_zero() {
            return Err(Error::ResidualSyndrome {
                mismatches: s.bits().count_ones(),
            });
        }
        Ok(!self.logical_syndrome(&residual).is_zero())
    }

    /// Renames the code (labels only).
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Overrides the declared distance.
    pub fn with_distance(mut self, d: Option<usize>) -> Self {
        self.d = d;
        self
    }
}

/// Free-function form of [`StabilizerCode::is_logical_error`].
pub fn is_logical_error(
    code: &StabilizerCode,
    error: &SymplecticVector,
    estimate: Option<&SymplecticVector>,
) -> Result<bool> {
    code.is_logical_error(error, estimate)
}

/// Computes a logical matrix for the stabilizer group generated by `h`.
///
/// Takes a basis of the normalizer `{v : H Λ v^T = 0}`, keeps the vectors
/// that are independent of the row space of `h`, then pairs them up by
/// symplectic Gram-Schmidt so that `X̄_i` anticommutes exactly with `Z̄_i`.
pub fn compute_logicals(h: &Gf2Matrix) -> Result<Gf2Matrix> {
    let two_n = h.cols();
    let normalizer = crate::symplectic::times_lambda(h).null_space();

    // Echelon basis of rowspace(H), extended greedily by normalizer vectors.
    let mut basis: Vec<(usize, BitVec)> = Vec::new();
    let reduce = |basis: &[(usize, BitVec)], v: &BitVec| {
        let mut v = v.clone();
        for (p, b) in basis {
            if v.get(*p) {
                v.xor_assign(b);
            }
        }
        v
    };
    let insert = |basis: &mut Vec<(usize, BitVec)>, v: &BitVec| -> bool {
        let r = reduce(basis, v);
        match r.first_one_from(0) {
            Some(p) => {
                for (_, b) in basis.iter_mut() {
                    if b.get(p) {
                        b.xor_assign(&r);
                    }
                }
                basis.push((p, r));
                true
            }
            None => false,
        }
    };
    for row in h.row_vecs() {
        insert(&mut basis, row);
    }
    let mut pool: Vec<BitVec> = normalizer
        .iter()
        .filter(|v| insert(&mut basis, v))
        .cloned()
        .collect();

    let product = |a: &BitVec, b: &BitVec| {
        let va = SymplecticVector::from_bits(a).expect("even length");
        let vb = SymplecticVector::from_bits(b).expect("even length");
        va.symplectic_product(&vb).expect("same length")
    };

    let mut xs = Vec::new();
    let mut zs = Vec::new();
    while !pool.is_empty() {
        let u = pool.remove(0);
        let Some(pos) = pool.iter().position(|v| product(&u, v)) else {
            return Err(Error::InvariantViolation(
                "normalizer complement has no symplectic partner".into(),
            ));
        };
        let v = pool.remove(pos);
        for w in pool.iter_mut() {
            let a = product(w, &v);
            let b = product(w, &u);
            if a {
                w.xor_assign(&u);
            }
            if b {
                w.xor_assign(&v);
            }
        }
        xs.push(u);
        zs.push(v);
    }
    xs.extend(zs);
    Ok(Gf2Matrix::from_rows(two_n, xs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::pauli_to_bits;

    #[test]
    fn five_qubit_code_logicals() {
        let rows = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"];
        let h = Gf2Matrix::from_rows(10, rows.iter().map(|r| pauli_to_bits(r).unwrap().to_bits()).collect());
        let l = compute_logicals(&h).unwrap();
        assert_eq!(l.rows(), 2);
        let code = StabilizerCode::new("five", h, l, Some(3)).unwrap();
        assert_eq!(code.n(), 5);
        assert_eq!(code.k(), 1);
        assert_eq!(code.m(), 4);
    }

    #[test]
    fn anticommuting_rows_are_rejected() {
        let h = Gf2Matrix::from_rows(
            4,
            vec![pauli_to_bits("XI").unwrap().to_bits(), pauli_to_bits("ZI").unwrap().to_bits()],
        );
        let l = Gf2Matrix::zeros(0, 4);
        let report = StabilizerCode::verify_matrices(&h, &l);
        assert!(report
            .failures
            .iter()
            .any(|f| f.contains("rows 0 and 1 anticommute")));
        assert!(StabilizerCode::new("bad", h, l, None).is_err());
    }

    #[test]
    fn logical_error_classification() {
        let code = rotated_surface(3).unwrap();
        let e = pauli_to_bits("XIIIIIIII").unwrap();
        assert!(!code.is_logical_error(&e, Some(&e)).unwrap());
        let degenerate = e.xor(&code.stabilizer(0));
        assert!(!code.is_logical_error(&e, Some(&degenerate)).unwrap());
        for r in 0..2 {
            let wrong = e.xor(&code.logical(r));
            assert!(code.is_logical_error(&e, Some(&wrong)).unwrap());
        }
        assert!(code.is_logical_error(&e, None).unwrap());
        let mismatched = SymplecticVector::zeros(9);
        assert!(matches!(
            code.is_logical_error(&e, Some(&mismatched)),
            Err(Error::ResidualSyndrome { .. })
        ));
    }

    #[test]
    fn stabilizer_shift_preserves_syndrome() {
        let code = rotated_surface(5).unwrap();
        let e = pauli_to_bits("XIYIIZIIIIIIXIIIIIIZIIIIY").unwrap();
        let s = code.syndrome(&e);
        for r in 0..code.m() {
            assert_eq!(code.syndrome(&e.xor(&code.stabilizer(r))), s);
        }
        assert_eq!(crate::symplectic::syndrome_of(code.check_matrix(), &e).unwrap(), s);
    }
}
