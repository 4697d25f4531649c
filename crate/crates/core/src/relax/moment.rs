use std::collections::BTreeMap;

use super::{QPOP, RelaxOptions};
use crate::error::{Error, Result};
use crate::poly::RealPoly;
use crate::qsdp::QSDP;
use crate::quaternion::{hermitian_part, HermitianQMatrix, QMatrix, Quaternion};
use crate::words::{basis, canonical_rep, eval_word, involution, word_mul, Word};

/// A pseudo-moment sequence stored on canonical representatives, with
/// `y_{u*} = ȳ_u` implied.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Moments {
    values: BTreeMap<Word, Quaternion>,
}

impl Moments {
    pub fn new() -> Self {
        Moments::default()
    }

    /// Sets `y_u`, storing the conjugate when `u` is not its pair representative.
    pub fn insert(&mut self, u: &Word, y: Quaternion) {
        let (rep, conjugated) = canonical_rep(u);
        let y = if rep.is_self_adjoint() {
            Quaternion::real(y.r)
        } else if conjugated {
            y.conj()
        } else {
            y
        };
        self.values.insert(rep, y);
    }

    pub fn get(&self, u: &Word) -> Result<Quaternion> {
        let (rep, conjugated) = canonical_rep(u);
        let y = *self.values.get(&rep).ok_or_else(|| Error::MissingMoment(u.to_string()))?;
        Ok(if conjugated { y.conj() } else { y })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Moments of the point mass at `point`: `y_u = val(u*)`, so that
    /// `M = v·v*` with `v` the basis values.
    pub fn dirac(point: &[Quaternion], words: &[Word]) -> Self {
        let mut m = Moments::new();
        for u in words {
            m.insert(u, eval_word(&involution(u), point));
        }
        m
    }

    /// Moments read off the multipliers `z_u` of a relaxation's equations.
    ///
    /// A non-self-adjoint word appears in its equation through both halves
    /// of the pair, so its moment is `z_u / 2`.
    pub fn from_multipliers(q: &QSDP, z: &[Quaternion]) -> Result<Self> {
        if z.len() != q.constraints.len() {
            return Err(Error::Dimension(format!("{} multipliers for {} equations", z.len(), q.constraints.len())));
        }
        let mut m = Moments::new();
        for (c, zu) in q.constraints.iter().zip(z) {
            let u = c.word.as_ref().ok_or_else(|| Error::Solution("equation without a word index".into()))?;
            let y = if u.is_self_adjoint() { *zu } else { zu.scale(0.5) };
            m.insert(u, y);
        }
        Ok(m)
    }

    /// `Σ ℛ(c̄_u·y_u)`-style pairing with a polynomial's stored coefficients,
    /// i.e. the value `L(f)` of the linear functional on `f`.
    pub fn apply(&self, f: &crate::poly::SymPoly) -> Result<f64> {
        let mut s = 0.0;
        for (u, c) in f.terms() {
            let v = (*c * self.get(u)?.conj()).r;
            s += if u.is_self_adjoint() { v } else { 2.0 * v };
        }
        Ok(s)
    }
}

/// `[M]_{k,l} = y_{w_l·w_k*}`.
pub fn moment_matrix(y: &Moments, w: &[Word]) -> Result<HermitianQMatrix> {
    let stars: Vec<Word> = w.iter().map(involution).collect();
    let mut m = QMatrix::zeros(w.len(), w.len());
    for (k, sk) in stars.iter().enumerate() {
        for (l, wl) in w.iter().enumerate() {
            m[(k, l)] = y.get(&word_mul(wl, sk)?)?;
        }
    }
    hermitian_part(&m)
}

/// `[M(g·y)]_{k,l} = ½ Σ_t g_t (y_{t·w_l·w_k*} + y_{w_l·w_k*·t*})`.
pub fn localizing_matrix(y: &Moments, g: &RealPoly, w: &[Word]) -> Result<HermitianQMatrix> {
    let stars: Vec<Word> = w.iter().map(involution).collect();
    let terms = g.full_terms();
    let mut m = QMatrix::zeros(w.len(), w.len());
    for (k, sk) in stars.iter().enumerate() {
        for (l, wl) in w.iter().enumerate() {
            let base = word_mul(wl, sk)?;
            let mut acc = Quaternion::ZERO;
            for (gt, t) in &terms {
                let a = y.get(&word_mul(t, &base)?)?;
                let b = y.get(&word_mul(&base, &involution(t))?)?;
                acc += (a + b).scale(0.5 * gt);
            }
            m[(k, l)] = acc;
        }
    }
    hermitian_part(&m)
}

/// Moment matrix, inequality localizing matrices and equality blocks of the
/// dense relaxation described by `opts`.
pub fn build_moment_matrices(
    y: &Moments,
    p: &QPOP,
    opts: &RelaxOptions,
) -> Result<(HermitianQMatrix, Vec<HermitianQMatrix>, Vec<HermitianQMatrix>)> {
    let d = opts.order;
    let m = moment_matrix(y, &basis(p.n, d, opts.basis, None))?;
    let loc = |c: &crate::poly::SymPoly| -> Result<HermitianQMatrix> {
        let r = c.degree().div_ceil(2);
        let order = d.checked_sub(r).ok_or_else(|| Error::InvalidOptions(format!("order {d} below constraint half degree {r}")))?;
        localizing_matrix(y, &RealPoly::new(c.clone())?, &basis(p.n, order, opts.basis, None))
    };
    let ineq = p.ineqs.iter().map(loc).collect::<Result<Vec<_>>>()?;
    let eq = p.eqs.iter().map(loc).collect::<Result<Vec<_>>>()?;
    Ok((m, ineq, eq))
}
