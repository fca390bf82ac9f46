//! Bivariate bicycle codes.
//!
//! With `x = S_l ⊗ I_m` and `y = I_l ⊗ S_m` (`S` the cyclic shift), two
//! polynomials `A`, `B` in `x, y` give `H_X = [A | B]` and
//! `H_Z = [B^T | A^T]`. Both halves are kept, so `m = n` rows.

use std::str::FromStr;

use super::{compute_logicals, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};

/// `x^x_pow y^y_pow`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub x_pow: usize,
    pub y_pow: usize,
}

impl FromStr for Monomial {
    type Err = Error;

    /// Parses `1`, `x3`, `y2`, `x1y4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCode(format!("bad monomial {s:?}"));
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial { x_pow: 0, y_pow: 0 });
        }
        let mut mono = Monomial { x_pow: 0, y_pow: 0 };
        let mut rest = s;
        let mut seen = false;
        while !rest.is_empty() {
            let var = rest.as_bytes()[0];
            rest = &rest[1..];
            let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
            if digits == 0 {
                return Err(bad());
            }
            let pow: usize = rest[..digits].parse().map_err(|_| bad())?;
            rest = &rest[digits..];
            match var {
                b'x' => mono.x_pow += pow,
                b'y' => mono.y_pow += pow,
                _ => return Err(bad()),
            }
            seen = true;
        }
        if seen {
            Ok(mono)
        } else {
            Err(bad())
        }
    }
}

fn parse_poly(s: &str) -> Result<Vec<Monomial>> {
    s.split('+').map(str::parse).collect()
}

/// `l*m x l*m` matrix of the polynomial.
fn poly_matrix(l: usize, m: usize, terms: &[Monomial]) -> Gf2Matrix {
    let size = l * m;
    let mut mat = Gf2Matrix::zeros(size, size);
    for r1 in 0..l {
        for r2 in 0..m {
            let row = r1 * m + r2;
            for t in terms {
                let col = ((r1 + t.x_pow) % l) * m + (r2 + t.y_pow) % m;
                let v = mat.get(row, col);
                mat.set(row, col, !v);
            }
        }
    }
    mat
}

/// Builds the BB code for `A = Σ a_terms`, `B = Σ b_terms` over `Z_l × Z_m`.
pub fn bivariate_bicycle(
    l: usize,
    m: usize,
    a_terms: &[Monomial],
    b_terms: &[Monomial],
    d: Option<usize>,
) -> Result<StabilizerCode> {
    if l == 0 || m == 0 {
        return Err(Error::InvalidCode("cycle sizes must be positive".into()));
    }
    if a_terms.len() != 3 || b_terms.len() != 3 {
        return Err(Error::InvalidCode(format!(
            "A and B need 3 terms each, got {} and {}",
            a_terms.len(),
            b_terms.len()
        )));
    }
    let half = l * m;
    let n = 2 * half;
    let a = poly_matrix(l, m, a_terms);
    let b = poly_matrix(l, m, b_terms);
    let (at, bt) = (a.transpose(), b.transpose());

    let mut rows = Vec::with_capacity(n);
    // X checks: X part [A | B]
    for r in 0..half {
        let mut v = BitVec::zeros(2 * n);
        for c in a.row(r).iter_ones() {
            v.set(c, true);
        }
        for c in b.row(r).iter_ones() {
            v.set(half + c, true);
        }
        rows.push(v);
    }
    // Z checks: Z part [B^T | A^T]
    for r in 0..half {
        let mut v = BitVec::zeros(2 * n);
        for c in bt.row(r).iter_ones() {
            v.set(n + c, true);
        }
        for c in at.row(r).iter_ones() {
            v.set(n + half + c, true);
        }
        rows.push(v);
    }
    let h = Gf2Matrix::from_rows(2 * n, rows);
    let rank = h.rank();
    if rank == n {
        return Err(Error::InvalidCode("polynomials give k = 0".into()));
    }
    let logicals = compute_logicals(&h)?;
    let k = logicals.rows() / 2;
    let name = match d {
        Some(d) => format!("bb_{n}_{k}_{d}"),
        None => format!("bb_{n}_{k}"),
    };
    StabilizerCode::new(name, h, logicals, d)
}

/// A named parameter set from the bundled preset table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BbPreset {
    pub name: String,
    pub l: usize,
    pub m: usize,
    pub a: Vec<Monomial>,
    pub b: Vec<Monomial>,
    pub d: usize,
}

const PRESETS: &str = include_str!("../../data/bb_presets.txt");

fn presets() -> Result<Vec<BbPreset>> {
    let mut out = Vec::new();
    for line in PRESETS.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(Error::InvalidCode(format!("bad preset line {line:?}")));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidCode(format!("bad number {s:?}")))
        };
        out.push(BbPreset {
            name: f[0].to_string(),
            l: num(f[1])?,
            m: num(f[2])?,
            a: parse_poly(f[3])?,
            b: parse_poly(f[4])?,
            d: num(f[5])?,
        });
    }
    Ok(out)
}

pub fn bb_preset_names() -> Vec<String> {
    presets()
        .map(|p| p.into_iter().map(|p| p.name).collect())
        .unwrap_or_default()
}

/// Builds a preset such as `"144-12-12"`.
pub fn bb_preset(name: &str) -> Result<StabilizerCode> {
    let preset = presets()?
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| {
            Error::InvalidCode(format!(
                "unknown BB preset {name:?}; known: {}",
                bb_preset_names().join(", ")
            ))
        })?;
    let code = bivariate_bicycle(preset.l, preset.m, &preset.a, &preset.b, Some(preset.d))?;
    Ok(code.with_name(format!("bb_{}", preset.name)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials_parse() {
        assert_eq!("1".parse::<Monomial>().unwrap(), Monomial { x_pow: 0, y_pow: 0 });
        assert_eq!("x3".parse::<Monomial>().unwrap(), Monomial { x_pow: 3, y_pow: 0 });
        assert_eq!("x1y4".parse::<Monomial>().unwrap(), Monomial { x_pow: 1, y_pow: 4 });
        assert!("z2".parse::<Monomial>().is_err());
        assert!("x".parse::<Monomial>().is_err());
    }

    #[test]
    fn presets_have_published_dimensions() {
        for (name, n, k) in [("72-12-6", 72, 12), ("90-8-10", 90, 8), ("108-8-10", 108, 8)] {
            let code = bb_preset(name).unwrap();
            assert_eq!((code.n(), code.k()), (n, k), "{name}");
            assert_eq!(code.m(), n);
            assert!(code.verify().passed());
        }
        assert!(bb_preset("1-2-3").is_err());
    }

    #[test]
    fn gross_code() {
        let code = bb_preset("144-12-12").unwrap();
        assert_eq!((code.n(), code.k(), code.d()), (144, 12, Some(12)));
        assert_eq!(code.check_matrix().rank(), 132);
        assert!(code.verify().weight_histogram.keys().all(|w| *w == 6));
    }

    #[test]
    fn degenerate_polynomials_rejected() {
        let one = Monomial { x_pow: 0, y_pow: 0 };
        let x = Monomial { x_pow: 1, y_pow: 0 };
        // A = B = 1 + 1 + x = x on a 1x1 torus: every row is full rank.
        let r = bivariate_bicycle(1, 1, &[one, one, x], &[one, one, x], None);
        assert!(r.is_err());
    }
}
