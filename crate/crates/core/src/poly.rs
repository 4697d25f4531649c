//! Real-valued (symmetric) quaternion polynomials.
//!
//! A [`SymPoly`] keeps one coefficient per involution pair `{u, u*}`, stored
//! on the smaller word `u`. The polynomial it represents is
//!
//! ```text
//! f = Σ_{u = u*} ℛ(c_u)·u  +  Σ_{u ≠ u*} 2ℛ(c_u·u)
//! ```
//!
//! which is the same as `Σ_w ℛ(c_w·w)` over all words once the partner
//! coefficient `c_{u*} = c̄_u` is filled in. Every sandwich `w_i*·Q·w_j` is
//! turned into the front form `ℛ(Q·w_j w_i*)` before it is stored.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quaternion::{HermitianQMatrix, Quaternion};
use crate::words::{canonical_rep, eval_word, involution, normalize, word_mul, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymPoly {
    n: usize,
    terms: BTreeMap<Word, Quaternion>,
}

impl SymPoly {
    pub fn zero(n: usize) -> Self {
        SymPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = SymPoly::zero(n);
        p.add_term(Quaternion::real(c), &Word::one(n));
        p.prune();
        p
    }

    /// Collects terms `ℛ(a·x)` given for arbitrary words `x`.
    pub fn from_terms<'a>(n: usize, terms: impl IntoIterator<Item = (Quaternion, &'a Word)>) -> Result<Self> {
        let mut p = SymPoly::zero(n);
        for (a, w) in terms {
            if w.n() != n {
                return Err(Error::Dimension(format!("word over {} variables in a polynomial over {n}", w.n())));
            }
            p.add_term(a, w);
        }
        p.prune();
        Ok(p)
    }

    /// Adds the term `ℛ(a·x)`.
    pub fn add_term(&mut self, a: Quaternion, x: &Word) {
        let (rep, conjugated) = canonical_rep(x);
        let c = if rep.is_self_adjoint() {
            Quaternion::real(a.r)
        } else if conjugated {
            a.conj().scale(0.5)
        } else {
            a.scale(0.5)
        };
        *self.terms.entry(rep).or_insert(Quaternion::ZERO) += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Canonical `(u, c_u)` pairs in word order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Quaternion)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, u: &Word) -> Quaternion {
        let (rep, conjugated) = canonical_rep(u);
        let c = self.terms.get(&rep).copied().unwrap_or(Quaternion::ZERO);
        if conjugated {
            c.conj()
        } else {
            c
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every term with its partner spelled out: `f = Σ ℛ(a·x)` over the result.
    pub fn full_terms(&self) -> Vec<(Quaternion, Word)> {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for (u, c) in &self.terms {
            out.push((*c, u.clone()));
            if !u.is_self_adjoint() {
                out.push((c.conj(), involution(u)));
            }
        }
        out
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.get(&Word::one(self.n)).map_or(0.0, |c| c.r)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.degree()).max().unwrap_or(0)
    }

    /// Sorted list of variables that occur.
    pub fn vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().flat_map(|w| w.vars()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.imag_abs() == 0.0)
    }

    /// True when every monomial is a product of moduli `|qᵢ|²`.
    pub fn is_modulus_only(&self) -> bool {
        self.terms.keys().all(|w| w.tail().is_empty())
    }

    pub fn eval(&self, point: &[Quaternion]) -> f64 {
        self.terms
            .iter()
            .map(|(u, c)| {
                let v = (*c * eval_word(u, point)).r;
                if u.is_self_adjoint() {
                    v
                } else {
                    2.0 * v
                }
            })
            .sum()
    }

    pub fn add(&self, other: &SymPoly) -> Result<SymPoly> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("polynomials over {} and {} variables", self.n, other.n)));
        }
        let mut out = self.clone();
        for (u, c) in &other.terms {
            *out.terms.entry(u.clone()).or_insert(Quaternion::ZERO) += *c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &SymPoly) -> Result<SymPoly> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> SymPoly {
        let mut out = SymPoly { n: self.n, terms: self.terms.iter().map(|(u, c)| (u.clone(), c.scale(s))).collect() };
        out.prune();
        out
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (u, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if u.is_self_adjoint() {
                write!(f, "{}·{u}", c.r)?;
            } else {
                write!(f, "2ℛ(({c})·{u})")?;
            }
        }
        Ok(())
    }
}

/// A symmetric polynomial whose coefficients are all real.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPoly(SymPoly);

impl RealPoly {
    pub fn new(p: SymPoly) -> Result<Self> {
        if !p.has_real_coefficients() {
            return Err(Error::NonReal(p.to_string()));
        }
        Ok(RealPoly(p))
    }

    pub fn poly(&self) -> &SymPoly {
        &self.0
    }

    /// Real pairs `(g_t, t)` over all words, partners included.
    pub fn full_terms(&self) -> Vec<(f64, Word)> {
        self.0.full_terms().into_iter().map(|(c, w)| (c.r, w)).collect()
    }
}

/// `ℛ(w*·Q·w)` expanded into coefficients.
pub fn from_gram(w: &[Word], q: &HermitianQMatrix) -> Result<SymPoly> {
    if q.dim() != w.len() {
        return Err(Error::Dimension(format!("{} basis words for a {}x{} Gram matrix", w.len(), q.dim(), q.dim())));
    }
    let n = w.first().map_or(0, |x| x.n());
    let stars: Vec<Word> = w.iter().map(involution).collect();
    let mut p = SymPoly::zero(n);
    for (i, wi_star) in stars.iter().enumerate() {
        for (j, wj) in w.iter().enumerate() {
            let qij = q[(i, j)];
            if qij.is_zero() {
                continue;
            }
            p.add_term(qij, &word_mul(wj, wi_star)?);
        }
    }
    p.prune();
    Ok(p)
}

/// Coefficients of `p` laid out along `basis`.
///
/// A word whose pair representative carries `c_u` gets `c_u`, its involute
/// gets `c̄_u`; every term's representative must be present.
pub fn coe(p: &SymPoly, basis: &[Word]) -> Result<Vec<Quaternion>> {
    let index: BTreeMap<&Word, usize> = basis.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut out = vec![Quaternion::ZERO; basis.len()];
    for (u, c) in p.terms() {
        let Some(&i) = index.get(u) else {
            return Err(Error::BasisMismatch(u.to_string()));
        };
        out[i] = *c;
        if !u.is_self_adjoint() {
            if let Some(&k) = index.get(&involution(u)) {
                out[k] = c.conj();
            }
        }
    }
    Ok(out)
}

/// `g·p` for a real-coefficient `g`, each term `g_t·t` multiplied on the left.
pub fn real_poly_mul(g: &RealPoly, p: &SymPoly) -> Result<SymPoly> {
    if g.poly().n() != p.n() {
        return Err(Error::Dimension("polynomials over different variable counts".into()));
    }
    let mut out = SymPoly::zero(p.n());
    let pt = p.full_terms();
    for (gt, t) in g.full_terms() {
        for (c, u) in &pt {
            out.add_term(c.scale(gt), &word_mul(&t, u)?);
        }
    }
    out.prune();
    Ok(out)
}

/// `Σᵢ |qᵢ|²` over the given variables.
pub fn sum_of_moduli(n: usize, vars: &[usize]) -> SymPoly {
    let mut p = SymPoly::zero(n);
    for &v in vars {
        let mut alpha = vec![0; n];
        alpha[v] = 1;
        p.add_term(Quaternion::ONE, &Word::new(alpha, &[]).expect("valid exponent"));
    }
    p.prune();
    p
}

/// The word `normalize(seq)` as a one-term helper.
pub fn monomial(n: usize, seq: &[crate::words::Letter]) -> Word {
    normalize(seq, n)
}
