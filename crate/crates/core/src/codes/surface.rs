//! Rotated surface and rotated toric codes on a `d x d` grid of qubits.
//!
//! Qubit `(r, c)` has index `r * d + c`. Face `(r, c)` covers the corners
//! `(r, c), (r, c+1), (r+1, c), (r+1, c+1)`; it is X-type when `r + c` is even.

use super::{compute_logicals, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};
use crate::symplectic::{Pauli, SymplecticVector};

fn face_row(n: usize, qubits: &[usize], p: Pauli) -> BitVec {
    let mut v = SymplecticVector::zeros(n);
    for &q in qubits {
        v.set_pauli(q, p);
    }
    v.to_bits()
}

/// `[[d^2, 1, d]]` rotated surface code, `d` odd and at least 3.
///
/// Bulk faces carry weight-4 checks in a checkerboard; the top and bottom
/// boundaries carry weight-2 X checks, the left and right boundaries weight-2
/// Z checks. `X̄` runs down the first column, `Z̄` along the first row.
pub fn rotated_surface(d: usize) -> Result<StabilizerCode> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::InvalidCode(format!(
            "rotated surface code needs odd d >= 3, got {d}"
        )));
    }
    let n = d * d;
    let q = |r: isize, c: isize| -> Option<usize> {
        (r >= 0 && c >= 0 && r < d as isize && c < d as isize).then(|| r as usize * d + c as usize)
    };
    let mut rows = Vec::with_capacity(n - 1);
    let di = d as isize;
    for r in -1..di {
        for c in -1..di {
            let corners: Vec<usize> = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
                .iter()
                .filter_map(|&(a, b)| q(a, b))
                .collect();
            let x_type = (r + c).rem_euclid(2) == 0;
            let keep = match corners.len() {
                4 => true,
                // top/bottom boundary keeps X faces, left/right keeps Z faces
                2 if r == -1 || r == di - 1 => x_type,
                2 => !x_type,
                _ => false,
            };
            if keep {
                rows.push(face_row(n, &corners, if x_type { Pauli::X } else { Pauli::Z }));
            }
        }
    }
    debug_assert_eq!(rows.len(), n - 1);
    let h = Gf2Matrix::from_rows(2 * n, rows);

    let column: Vec<usize> = (0..d).map(|r| r * d).collect();
    let row: Vec<usize> = (0..d).collect();
    let l = Gf2Matrix::from_rows(
        2 * n,
        vec![face_row(n, &column, Pauli::X), face_row(n, &row, Pauli::Z)],
    );
    StabilizerCode::new(format!("rotated_surface_d{d}"), h, l, Some(d))
}

/// `[[d^2, 2, d]]` rotated toric code (periodic checkerboard), `d` even.
///
/// All `d^2` faces are kept, so the check matrix has two dependent rows.
pub fn rotated_toric(d: usize) -> Result<StabilizerCode> {
    if d < 2 || d % 2 == 1 {
        return Err(Error::InvalidCode(format!(
            "rotated toric code needs even d >= 2, got {d}"
        )));
    }
    let n = d * d;
    let q = |r: usize, c: usize| (r % d) * d + (c % d);
    let mut rows = Vec::with_capacity(n);
    for r in 0..d {
        for c in 0..d {
            let corners = [q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1)];
            let p = if (r + c) % 2 == 0 { Pauli::X } else { Pauli::Z };
            let mut v = SymplecticVector::zeros(n);
            for &qq in &corners {
                // d = 2 repeats corners; the checkerboard still commutes.
                v.set_pauli(qq, p);
            }
            rows.push(v.to_bits());
        }
    }
    let h = Gf2Matrix::from_rows(2 * n, rows);
    let l = compute_logicals(&h)?;
    StabilizerCode::new(format!("rotated_toric_d{d}"), h, l, Some(d))
}
