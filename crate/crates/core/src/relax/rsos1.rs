//! The first-order SOS relaxation of the real reformulation of a quaternion
//! QCQP, written through the matrix identity
//!
//! ```text
//! Λ(Q) − λ·Λ(E₀₀) = X + Σ aᵢ·Λ(Dᵢ) + Σ bⱼ·Λ(Fⱼ),   X ⪰ 0, aᵢ ≥ 0
//! ```
//!
//! imposed entrywise on the upper triangle.

use super::QPOP;
use crate::error::{Error, Result};
use crate::poly::SymPoly;
use crate::quaternion::{lambda_embed, HermitianQMatrix, QMatrix};
use crate::sdp::{Entry, RealSDP};

/// The Hermitian `A` with `p = [q]₁*·A·[q]₁`, where `[q]₁ = (1, q₁, …, qₙ)`.
pub fn quadratic_form(p: &SymPoly) -> Result<HermitianQMatrix> {
    let n = p.n();
    let mut a = QMatrix::zeros(n + 1, n + 1);
    for (u, c) in p.terms() {
        let not_qcqp = || Error::Unsupported(format!("monomial {u} is not of the form w_l·w_k* over (1, q)"));
        let tail = u.tail();
        let moduli: Vec<usize> = u.alpha().iter().enumerate().filter(|(_, a)| **a > 0).map(|(i, _)| i).collect();
        let (k, l) = match (moduli.as_slice(), tail) {
            ([], []) => (0, 0),
            ([i], []) if u.alpha()[*i] == 1 => (i + 1, i + 1),
            ([], [x]) if !x.conj => (0, x.var + 1),
            ([], [x]) => (x.var + 1, 0),
            ([], [x, y]) if !x.conj && y.conj => (y.var + 1, x.var + 1),
            _ => return Err(not_qcqp()),
        };
        if k == l {
            a[(k, k)] = *c;
        } else {
            a[(k, l)] = *c;
            a[(l, k)] = c.conj();
        }
    }
    HermitianQMatrix::new(a, 1e-12)
}

/// Real SDP: one `4(n+1)` PSD block `X` and a diagonal block holding
/// `λ⁺, λ⁻, a₁..a_t, b₁⁺, b₁⁻, …`.
pub fn build_rsos1(p: &QPOP) -> Result<RealSDP> {
    let q = lambda_embed(quadratic_form(&p.objective)?.matrix())?;
    let n1 = p.n + 1;
    let dim = 4 * n1;
    let mut e00 = QMatrix::zeros(n1, n1);
    e00[(0, 0)] = crate::quaternion::Quaternion::ONE;
    let e00 = lambda_embed(&e00)?;
    let d: Vec<_> = p.ineqs.iter().map(|g| quadratic_form(g).and_then(|a| lambda_embed(a.matrix()))).collect::<Result<_>>()?;
    let f: Vec<_> = p.eqs.iter().map(|h| quadratic_form(h).and_then(|a| lambda_embed(a.matrix()))).collect::<Result<_>>()?;

    let nt = d.len();
    let lp = 2 + nt + 2 * f.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in 0..dim {
        for c in r..dim {
            let mut row = vec![Entry::new(0, r, c, if r == c { 1.0 } else { 0.5 })];
            let mut lin = |idx: usize, v: f64| {
                if v != 0.0 {
                    row.push(Entry::new(1, idx, idx, v));
                }
            };
            lin(0, e00[(r, c)]);
            lin(1, -e00[(r, c)]);
            for (i, di) in d.iter().enumerate() {
                lin(2 + i, di[(r, c)]);
            }
            for (j, fj) in f.iter().enumerate() {
                lin(2 + nt + 2 * j, fj[(r, c)]);
                lin(3 + nt + 2 * j, -fj[(r, c)]);
            }
            a.push(row);
            b.push(q[(r, c)]);
        }
    }
    let c = vec![Entry::new(1, 0, 0, 1.0), Entry::new(1, 1, 1, -1.0)];
    RealSDP::new(vec![dim as i64, -(lp as i64)], c, a, b)
}
