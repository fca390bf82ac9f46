//! Bit-packed GF(2) vectors and matrices.
//!
//! Rows are stored as `u64` words; all arithmetic is word-level XOR/AND with
//! population counts. Gaussian elimination can record its row operations as a
//! replayable log so that the same transform can later be applied to a
//! syndrome without touching the matrix again.

use std::fmt;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from a `0`/`1` slice; any nonzero byte counts as one.
    pub fn from_bytes(bits: &[u8]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of length `len` with ones at `indices`.
    ///
    /// Repeated indices toggle, which is what a sum over GF(2) means.
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = BitVec::zeros(len);
        for &i in indices {
            v.toggle(i);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    /// `self ^= other`. Panics on length mismatch.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of `self & other`, i.e. the GF(2) dot product.
    #[inline]
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + t)
                }
            })
        })
    }

    pub fn ones(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// First set bit at or after `from`.
    pub fn first_one_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / WORD;
        let mut w = self.words[wi] & (!0u64 << (from % WORD));
        loop {
            if w != 0 {
                let i = wi * WORD + w.trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
            wi += 1;
            if wi >= self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// One elementary row operation recorded during elimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOp {
    Swap(usize, usize),
    /// `row[dst] ^= row[src]`
    Add { src: usize, dst: usize },
}

/// Replays a row-operation log on a column vector (one bit per row).
pub fn apply_row_ops(ops: &[RowOp], v: &mut BitVec) {
    for op in ops {
        match *op {
            RowOp::Swap(a, b) => {
                let (x, y) = (v.get(a), v.get(b));
                v.set(a, y);
                v.set(b, x);
            }
            RowOp::Add { src, dst } => {
                if v.get(src) {
                    v.toggle(dst);
                }
            }
        }
    }
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Gf2Matrix {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Gf2Matrix::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of equal length. `cols` is needed for the
    /// zero-row case.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        Gf2Matrix {
            rows: rows.len(),
            cols,
            data: rows,
        }
    }

    /// Builds a matrix from `0`/`1` byte rows.
    pub fn from_dense(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Gf2Matrix::from_rows(cols, rows.iter().map(|r| BitVec::from_bytes(r)).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut BitVec {
        &mut self.data[r]
    }

    pub fn row_vecs(&self) -> &[BitVec] {
        &self.data
    }

    pub fn into_rows(self) -> Vec<BitVec> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value)
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.push(row);
        self.rows += 1;
    }

    pub fn column(&self, c: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            if row.get(c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for c in row.iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// `M v^T`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        let mut out = BitVec::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            if row.dot(v) {
                out.set(r, true);
            }
        }
        out
    }

    /// `self * other^T`, i.e. pairwise row dot products.
    pub fn mul_transpose(&self, other: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.cols, other.cols, "dimension mismatch");
        let mut out = Gf2Matrix::zeros(self.rows, other.rows);
        for (i, a) in self.data.iter().enumerate() {
            for (j, b) in other.data.iter().enumerate() {
                if a.dot(b) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    /// New matrix whose column `t` is column `perm[t]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Gf2Matrix {
        assert_eq!(perm.len(), self.cols, "permutation length mismatch");
        let mut out = Gf2Matrix::zeros(self.rows, self.cols);
        for (r, row) in self.data.iter().enumerate() {
            for (t, &c) in perm.iter().enumerate() {
                if row.get(c) {
                    out.set(r, t, true);
                }
            }
        }
        out
    }

    /// New matrix whose row `t` is row `perm[t]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Gf2Matrix {
        Gf2Matrix::from_rows(self.cols, perm.iter().map(|&r| self.data[r].clone()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVec::is_zero)
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.eliminate_in_place(self.cols, None).len()
    }

    /// Reduces the matrix to reduced row echelon form in place, pivoting on
    /// the first `pivot_cols` columns only. Columns beyond that (e.g. an
    /// augmented syndrome) are carried along.
    ///
    /// Pivot rule: columns are scanned left to right; the pivot row is the
    /// lowest-index row at or below the current rank with a one in that
    /// column. Columns with no such row are skipped. Returns the pivot
    /// columns; pivot `i` sits in row `i`.
    pub fn eliminate_in_place(
        &mut self,
        pivot_cols: usize,
        mut log: Option<&mut Vec<RowOp>>,
    ) -> Vec<usize> {
        assert!(pivot_cols <= self.cols);
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..pivot_cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.data[r].get(c)) else {
                continue;
            };
            if p != rank {
                self.data.swap(p, rank);
                if let Some(log) = log.as_deref_mut() {
                    log.push(RowOp::Swap(p, rank));
                }
            }
            let (head, tail) = self.data.split_at_mut(rank);
            let (pivot_row, tail) = tail.split_first_mut().expect("rank < rows");
            for (r, row) in head.iter_mut().enumerate() {
                if row.get(c) {
                    row.xor_assign(pivot_row);
                    if let Some(log) = log.as_deref_mut() {
                        log.push(RowOp::Add { src: rank, dst: r });
                    }
                }
            }
            for (off, row) in tail.iter_mut().enumerate() {
                if row.get(c) {
                    row.xor_assign(pivot_row);
                    if let Some(log) = log.as_deref_mut() {
                        log.push(RowOp::Add {
                            src: rank,
                            dst: rank + 1 + off,
                        });
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    /// Basis of the right null space `{v : M v^T = 0}`.
    pub fn null_space(&self) -> Vec<BitVec> {
        let mut work = self.clone();
        let pivots = work.eliminate_in_place(self.cols, None);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (i, &p) in pivots.iter().enumerate() {
                if work.get(i, free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for row in &self.data {
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

/// Result of [`gauss_eliminate`].
#[derive(Clone, Debug)]
pub struct Elimination {
    /// `μ(R(M))`: identity block on the first `rank` columns, zero rows below.
    pub reduced: Gf2Matrix,
    /// Row operations `R` in the order they were applied.
    pub row_ops: Vec<RowOp>,
    /// Column permutation `μ`: column `t` of `reduced` is column `mu[t]` of `R(M)`.
    pub mu: Vec<usize>,
    /// Pivot columns of the input, in pivot-row order.
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl Elimination {
    /// Applies the recorded `R` to a vector indexed by row, e.g. `s' = R(s)`.
    pub fn apply_row_ops(&self, v: &mut BitVec) {
        apply_row_ops(&self.row_ops, v);
    }

    /// Recomputes `μ(R(M))` from the logs alone.
    pub fn replay(&self, original: &Gf2Matrix) -> Gf2Matrix {
        let mut m = original.clone();
        for op in &self.row_ops {
            match *op {
                RowOp::Swap(a, b) => m.data.swap(a, b),
                RowOp::Add { src, dst } => {
                    let src_row = m.data[src].clone();
                    m.data[dst].xor_assign(&src_row);
                }
            }
        }
        m.permute_columns(&self.mu)
    }
}

/// Gaussian elimination with a recorded row-operation log and the pivot
/// column permutation `μ` that moves pivots to the front (remaining columns
/// keep their relative order).
pub fn gauss_eliminate(m: &Gf2Matrix) -> Elimination {
    let mut work = m.clone();
    let mut row_ops = Vec::new();
    let pivots = work.eliminate_in_place(m.cols, Some(&mut row_ops));
    let mu = pivot_first_permutation(m.cols, &pivots);
    let reduced = work.permute_columns(&mu);
    Elimination {
        reduced,
        row_ops,
        mu,
        rank: pivots.len(),
        pivots,
    }
}

/// `[pivots..., non-pivots in ascending order...]`.
pub(crate) fn pivot_first_permutation(cols: usize, pivots: &[usize]) -> Vec<usize> {
    let mut is_pivot = vec![false; cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    let mut mu = pivots.to_vec();
    mu.extend((0..cols).filter(|&c| !is_pivot[c]));
    mu
}

/// Inverse of a permutation given as `position -> element`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (pos, &e) in perm.iter().enumerate() {
        inv[e] = pos;
    }
    inv
}

pub fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &e in perm {
        if e >= perm.len() || seen[e] {
            return false;
        }
        seen[e] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitvec_basics() {
        let mut v = BitVec::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.ones(), vec![0, 64, 129]);
        assert_eq!(v.first_one_from(1), Some(64));
        assert_eq!(v.first_one_from(65), Some(129));
        v.toggle(64);
        assert_eq!(v.first_one_from(1), Some(129));
        let w = BitVec::from_indices(130, &[0, 5]);
        assert!(v.dot(&w));
        assert_eq!(BitVec::from_indices(4, &[1, 1]).count_ones(), 0);
    }

    #[test]
    fn identity_eliminates_to_itself() {
        let id = Gf2Matrix::identity(7);
        let e = gauss_eliminate(&id);
        assert_eq!(e.rank, 7);
        assert_eq!(e.reduced, id);
        assert_eq!(e.mu, (0..7).collect::<Vec<_>>());
        assert!(e.row_ops.is_empty());
    }

    #[test]
    fn duplicate_rows_leave_a_zero_row() {
        let m = Gf2Matrix::from_dense(&[&[1, 1, 0, 1], &[0, 1, 1, 0], &[1, 1, 0, 1]]);
        let e = gauss_eliminate(&m);
        assert_eq!(e.rank, 2);
        assert!(e.reduced.row(2).is_zero());
        assert_eq!(e.replay(&m), e.reduced);
    }

    #[test]
    fn reduced_form_has_leading_identity() {
        let m = Gf2Matrix::from_dense(&[
            &[0, 0, 1, 1, 0],
            &[1, 0, 1, 0, 1],
            &[1, 0, 0, 1, 1],
        ]);
        let e = gauss_eliminate(&m);
        assert_eq!(e.rank, 2);
        for i in 0..e.rank {
            for j in 0..e.rank {
                assert_eq!(e.reduced.get(i, j), i == j);
            }
        }
        assert_eq!(e.replay(&m), e.reduced);
    }

    #[test]
    fn row_ops_transform_syndromes_consistently() {
        let m = Gf2Matrix::from_dense(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        let x = BitVec::from_bytes(&[1, 0, 1]);
        let mut s = m.mul_vec(&x);
        let e = gauss_eliminate(&m);
        e.apply_row_ops(&mut s);
        // R(M) x = R(s)
        let mut rm = m.clone();
        rm.eliminate_in_place(3, None);
        assert_eq!(rm.mul_vec(&x), s);
    }

    #[test]
    fn null_space_is_annihilated() {
        let m = Gf2Matrix::from_dense(&[&[1, 1, 0, 1, 0], &[0, 1, 1, 0, 1]]);
        let ns = m.null_space();
        assert_eq!(ns.len(), 3);
        for v in &ns {
            assert!(m.mul_vec(v).is_zero());
        }
        assert_eq!(Gf2Matrix::from_rows(5, ns).rank(), 3);
    }

    #[test]
    fn permutation_helpers() {
        let p = vec![2, 0, 1];
        assert!(is_permutation(&p));
        assert_eq!(invert_permutation(&p), vec![1, 2, 0]);
        assert!(!is_permutation(&[0, 0, 1]));
    }
}
