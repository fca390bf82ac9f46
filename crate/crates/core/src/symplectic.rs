//! Binary symplectic representation of Pauli operators (phases dropped).
//!
//! An `n`-qubit Pauli is stored as two packed halves `[x | z]`. Bit index
//! `b < n` addresses the X part of qubit `b`, bit `n + i` the Z part of
//! qubit `i`. The symplectic form `Λ` is never materialized: products swap
//! halves instead.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `(x, z)` bits.
    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Index into `(I, X, Y, Z)` arrays.
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i]
    }

    /// True iff the two single-qubit Paulis anticommute.
    #[inline]
    pub fn anticommutes(self, other: Pauli) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax & bz) ^ (az & bx)
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' | 'i' | '_' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauli(other)),
        }
    }
}

/// An `n`-qubit Pauli operator as a length-`2n` bit vector `[e^X | e^Z]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymplecticVector {
    x: BitVec,
    z: BitVec,
}

impl SymplecticVector {
    pub fn zeros(n: usize) -> Self {
        SymplecticVector {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    pub fn from_halves(x: BitVec, z: BitVec) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                actual: z.len(),
            });
        }
        Ok(SymplecticVector { x, z })
    }

    /// Splits a length-`2n` vector into its halves.
    pub fn from_bits(bits: &BitVec) -> Result<Self> {
        if bits.len() % 2 != 0 {
            return Err(Error::LengthMismatch {
                expected: bits.len() + 1,
                actual: bits.len(),
            });
        }
        let n = bits.len() / 2;
        let mut v = SymplecticVector::zeros(n);
        for b in bits.iter_ones() {
            v.toggle(b);
        }
        Ok(v)
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut v = SymplecticVector::zeros(paulis.len());
        for (i, p) in paulis.iter().enumerate() {
            v.set_pauli(i, *p);
        }
        v
    }

    /// Number of qubits.
    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    /// Number of bits, `2n`.
    #[inline]
    pub fn len(&self) -> usize {
        2 * self.x.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[inline]
    pub fn x(&self) -> &BitVec {
        &self.x
    }

    #[inline]
    pub fn z(&self) -> &BitVec {
        &self.z
    }

    #[inline]
    pub fn get(&self, bit: usize) -> bool {
        let n = self.x.len();
        if bit < n {
            self.x.get(bit)
        } else {
            self.z.get(bit - n)
        }
    }

    #[inline]
    pub fn set(&mut self, bit: usize, value: bool) {
        let n = self.x.len();
        if bit < n {
            self.x.set(bit, value)
        } else {
            self.z.set(bit - n, value)
        }
    }

    #[inline]
    pub fn toggle(&mut self, bit: usize) {
        let n = self.x.len();
        if bit < n {
            self.x.toggle(bit)
        } else {
            self.z.toggle(bit - n)
        }
    }

    #[inline]
    pub fn pauli(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    #[inline]
    pub fn set_pauli(&mut self, qubit: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(qubit, x);
        self.z.set(qubit, z);
    }

    /// Pauli weight: qubits where the X or Z bit is set.
    #[inline]
    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &SymplecticVector) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn xor(&self, other: &SymplecticVector) -> SymplecticVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// The `2n` bits as one vector `[x | z]`.
    pub fn to_bits(&self) -> BitVec {
        let n = self.x.len();
        let mut out = BitVec::zeros(2 * n);
        for i in self.x.iter_ones() {
            out.set(i, true);
        }
        for i in self.z.iter_ones() {
            out.set(n + i, true);
        }
        out
    }

    /// `Λ v^T` as a bit vector: `[z | x]`.
    pub fn lambda_bits(&self) -> BitVec {
        let n = self.x.len();
        let mut out = BitVec::zeros(2 * n);
        for i in self.z.iter_ones() {
            out.set(i, true);
        }
        for i in self.x.iter_ones() {
            out.set(n + i, true);
        }
        out
    }

    /// `a Λ b^T mod 2`; one iff the operators anticommute.
    pub fn symplectic_product(&self, other: &SymplecticVector) -> Result<bool> {
        if self.x.len() != other.x.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    pub fn paulis(&self) -> Vec<Pauli> {
        (0..self.num_qubits()).map(|i| self.pauli(i)).collect()
    }
}

impl fmt::Display for SymplecticVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.num_qubits() {
            write!(f, "{}", self.pauli(i).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for SymplecticVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymplecticVector({self})")
    }
}

impl FromStr for SymplecticVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        pauli_to_bits(s)
    }
}

/// Maps a Pauli string such as `"XIZY"` to its symplectic vector.
pub fn pauli_to_bits(pauli_string: &str) -> Result<SymplecticVector> {
    let paulis = pauli_string
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(Pauli::try_from)
        .collect::<Result<Vec<_>>>()?;
    if paulis.is_empty() {
        return Err(Error::EmptyPauli);
    }
    Ok(SymplecticVector::from_paulis(&paulis))
}

pub fn symplectic_product(a: &SymplecticVector, b: &SymplecticVector) -> Result<bool> {
    a.symplectic_product(b)
}

/// A syndrome: one bit per check-matrix row.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Syndrome(pub BitVec);

impl Syndrome {
    pub fn zeros(m: usize) -> Self {
        Syndrome(BitVec::zeros(m))
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0.get(i)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `s = H Λ e^T` for a check matrix `H` with `2n` columns.
pub fn syndrome_of(h: &Gf2Matrix, e: &SymplecticVector) -> Result<Syndrome> {
    if h.cols() != e.len() {
        return Err(Error::LengthMismatch {
            expected: h.cols(),
            actual: e.len(),
        });
    }
    let el = e.lambda_bits();
    Ok(Syndrome(h.mul_vec(&el)))
}

/// Converts row `r` of a symplectic matrix into a [`SymplecticVector`].
pub fn matrix_row(h: &Gf2Matrix, r: usize) -> SymplecticVector {
    SymplecticVector::from_bits(h.row(r)).expect("symplectic matrices have an even column count")
}

/// `M Λ N^T` for two symplectic matrices with `2n` columns.
pub fn symplectic_gram(m: &Gf2Matrix, n: &Gf2Matrix) -> Gf2Matrix {
    let lam: Vec<BitVec> = (0..n.rows())
        .map(|r| matrix_row(n, r).lambda_bits())
        .collect();
    m.mul_transpose(&Gf2Matrix::from_rows(m.cols(), lam))
}

/// `M Λ`: column `j` of the result is column `(j + n) mod 2n` of `M`.
pub fn times_lambda(m: &Gf2Matrix) -> Gf2Matrix {
    let half = m.cols() / 2;
    let perm: Vec<usize> = (0..m.cols()).map(|j| (j + half) % m.cols()).collect();
    m.permute_columns(&perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// 2x2 complex matrices for a direct commutation oracle.
    type C = (f64, f64);
    type M2 = [[C; 2]; 2];

    fn cmul(a: C, b: C) -> C {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn matrix_of(p: Pauli) -> M2 {
        let z = (0.0, 0.0);
        let o = (1.0, 0.0);
        match p {
            Pauli::I => [[o, z], [z, o]],
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, (0.0, -1.0)], [(0.0, 1.0), z]],
            Pauli::Z => [[o, z], [z, (-1.0, 0.0)]],
        }
    }

    /// Kronecker product of single-qubit matrices as a dense matrix.
    fn kron_all(ps: &[Pauli]) -> Vec<Vec<C>> {
        let mut acc = vec![vec![(1.0, 0.0)]];
        for &p in ps {
            let m = matrix_of(p);
            let d = acc.len();
            let mut next = vec![vec![(0.0, 0.0); 2 * d]; 2 * d];
            for i in 0..d {
                for j in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * i + a][2 * j + b] = cmul(acc[i][j], m[a][b]);
                        }
                    }
                }
            }
            acc = next;
        }
        acc
    }

    fn matmul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
        let d = a.len();
        let mut out = vec![vec![(0.0, 0.0); d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut s = (0.0, 0.0);
                for k in 0..d {
                    let t = cmul(a[i][k], b[k][j]);
                    s = (s.0 + t.0, s.1 + t.1);
                }
                out[i][j] = s;
            }
        }
        out
    }

    fn commute_directly(a: &[Pauli], b: &[Pauli]) -> bool {
        let (ma, mb) = (kron_all(a), kron_all(b));
        let (ab, ba) = (matmul(&ma, &mb), matmul(&mb, &ma));
        ab.iter()
            .flatten()
            .zip(ba.iter().flatten())
            .all(|(x, y)| (x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12)
    }

    #[test]
    fn mapping_table() {
        let v = pauli_to_bits("XZ").unwrap();
        assert_eq!(v.to_bits(), BitVec::from_bytes(&[1, 0, 0, 1]));
        let y = pauli_to_bits("Y").unwrap();
        assert_eq!(y.to_bits(), BitVec::from_bytes(&[1, 1]));
        assert!(pauli_to_bits("IIIII").unwrap().is_zero());
        assert_eq!(pauli_to_bits(""), Err(Error::EmptyPauli));
        assert_eq!(pauli_to_bits("XQ"), Err(Error::InvalidPauli('Q')));
    }

    #[test]
    fn small_products() {
        let x = pauli_to_bits("X").unwrap();
        let z = pauli_to_bits("Z").unwrap();
        assert!(symplectic_product(&x, &z).unwrap());
        let xi = pauli_to_bits("XI").unwrap();
        let iz = pauli_to_bits("IZ").unwrap();
        assert!(!symplectic_product(&xi, &iz).unwrap());
        assert!(symplectic_product(&x, &xi).is_err());
    }

    #[test]
    fn commutation_oracle_single_qubit() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let va = SymplecticVector::from_paulis(&[a]);
                let vb = SymplecticVector::from_paulis(&[b]);
                assert_eq!(
                    !va.symplectic_product(&vb).unwrap(),
                    commute_directly(&[a], &[b]),
                    "{a:?} {b:?}"
                );
            }
        }
    }

    #[test]
    fn commutation_oracle_three_qubits_exhaustive() {
        let all: Vec<Vec<Pauli>> = (0..64)
            .map(|c| (0..3).map(|q| Pauli::from_index((c >> (2 * q)) & 3)).collect())
            .collect();
        for a in &all {
            for b in &all {
                let va = SymplecticVector::from_paulis(a);
                let vb = SymplecticVector::from_paulis(b);
                assert_eq!(!va.symplectic_product(&vb).unwrap(), commute_directly(a, b));
            }
        }
    }

    #[test]
    fn weight_counts_qubit_support() {
        assert_eq!(pauli_to_bits("XIYZI").unwrap().weight(), 3);
        let mut big = SymplecticVector::zeros(200);
        big.set_pauli(0, Pauli::Y);
        big.set_pauli(150, Pauli::Z);
        big.set_pauli(199, Pauli::X);
        assert_eq!(big.weight(), 3);
        assert_eq!(big.to_string().len(), 200);
    }

    fn arb_pauli_string(n: usize) -> impl Strategy<Value = Vec<Pauli>> {
        proptest::collection::vec((0usize..4).prop_map(Pauli::from_index), n)
    }

    proptest! {
        #[test]
        fn product_is_symmetric_and_self_orthogonal(a in arb_pauli_string(70), b in arb_pauli_string(70)) {
            let va = SymplecticVector::from_paulis(&a);
            let vb = SymplecticVector::from_paulis(&b);
            prop_assert_eq!(va.symplectic_product(&vb).unwrap(), vb.symplectic_product(&va).unwrap());
            prop_assert!(!va.symplectic_product(&va).unwrap());
            // per-qubit anticommutation count parity
            let count = a.iter().zip(&b).filter(|(p, q)| p.anticommutes(**q)).count();
            prop_assert_eq!(va.symplectic_product(&vb).unwrap(), count % 2 == 1);
        }

        #[test]
        fn bits_round_trip(a in arb_pauli_string(37)) {
            let v = SymplecticVector::from_paulis(&a);
            prop_assert_eq!(SymplecticVector::from_bits(&v.to_bits()).unwrap(), v.clone());
            prop_assert_eq!(v.paulis(), a);
        }
    }
}
