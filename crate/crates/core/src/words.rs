//! Noncommutative monomials in `q₁..qₙ` and their conjugates.
//!
//! A [`Word`] is stored in normal form: every adjacent `qᵢq̄ᵢ` or `q̄ᵢqᵢ`
//! pair is real, central and equal to `|qᵢ|²`, so it is pulled out into the
//! exponent vector `alpha`, leaving a reduced tail.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// A variable `qᵢ` (`conj = false`) or its conjugate `q̄ᵢ`; `var` is 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub var: usize,
    pub conj: bool,
}

impl Letter {
    pub fn q(var: usize) -> Self {
        Letter { var, conj: false }
    }

    pub fn qbar(var: usize) -> Self {
        Letter { var, conj: true }
    }

    pub fn bar(self) -> Self {
        Letter { var: self.var, conj: !self.conj }
    }

    fn key(self) -> usize {
        2 * self.var + self.conj as usize
    }

    fn cancels(self, other: Letter) -> bool {
        self.var == other.var && self.conj != other.conj
    }

    /// Signed 1-based encoding: `+i` for `qᵢ`, `−i` for `q̄ᵢ`.
    pub fn to_signed(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.conj {
            -v
        } else {
            v
        }
    }

    pub fn from_signed(s: i64) -> Result<Self> {
        if s == 0 {
            return Err(Error::Instance("letter index 0 is not a variable".into()));
        }
        Ok(Letter { var: s.unsigned_abs() as usize - 1, conj: s < 0 })
    }

    pub fn eval(self, point: &[Quaternion]) -> Quaternion {
        let p = point[self.var];
        if self.conj {
            p.conj()
        } else {
            p
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conj {
            write!(f, "q̄{}", self.var + 1)
        } else {
            write!(f, "q{}", self.var + 1)
        }
    }
}

/// A monomial `∏|qᵢ|^{2αᵢ} · tail` in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    alpha: Vec<u32>,
    tail: Vec<Letter>,
}

impl Word {
    /// The empty word `1` over `n` variables.
    pub fn one(n: usize) -> Self {
        Word { alpha: vec![0; n], tail: vec![] }
    }

    /// Builds a word from an exponent vector and an arbitrary letter sequence.
    pub fn new(alpha: Vec<u32>, letters: &[Letter]) -> Result<Self> {
        let n = alpha.len();
        if let Some(l) = letters.iter().find(|l| l.var >= n) {
            return Err(Error::Dimension(format!("letter {l} outside {n} variables")));
        }
        let mut w = normalize(letters, n);
        for (a, b) in w.alpha.iter_mut().zip(&alpha) {
            *a += b;
        }
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    pub fn tail(&self) -> &[Letter] {
        &self.tail
    }

    pub fn degree(&self) -> usize {
        2 * self.alpha.iter().map(|a| *a as usize).sum::<usize>() + self.tail.len()
    }

    pub fn is_one(&self) -> bool {
        self.tail.is_empty() && self.alpha.iter().all(|a| *a == 0)
    }

    /// Variables (0-based) that occur in the word.
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        let mut v: Vec<usize> = self
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > 0)
            .map(|(i, _)| i)
            .chain(self.tail.iter().map(|l| l.var))
            .collect();
        v.sort_unstable();
        v.dedup();
        v.into_iter()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.tail.iter().rev().map(|l| l.bar()).eq(self.tail.iter().copied())
    }

    /// Same word viewed over a larger number of variables.
    pub fn with_n(&self, n: usize) -> Word {
        let mut alpha = self.alpha.clone();
        alpha.resize(n, 0);
        Word { alpha, tail: self.tail.clone() }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.alpha.cmp(&other.alpha))
            .then_with(|| self.tail.cmp(&other.tail))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, a) in self.alpha.iter().enumerate() {
            if *a > 0 {
                if !first {
                    write!(f, "·")?;
                }
                first = false;
                write!(f, "|q{}|^{}", i + 1, 2 * a)?;
            }
        }
        for l in &self.tail {
            if !first {
                write!(f, "·")?;
            }
            first = false;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Reduces a letter sequence to normal form.
///
/// Cancelling pairs are removed with a stack, which finds every pair that
/// any reduction order would find.
pub fn normalize(seq: &[Letter], n: usize) -> Word {
    let mut alpha = vec![0u32; n];
    let mut tail: Vec<Letter> = Vec::with_capacity(seq.len());
    for &l in seq {
        match tail.last() {
            Some(&top) if top.cancels(l) => {
                tail.pop();
                alpha[l.var] += 1;
            }
            _ => tail.push(l),
        }
    }
    Word { alpha, tail }
}

/// Product of two words.
pub fn word_mul(a: &Word, b: &Word) -> Result<Word> {
    if a.n() != b.n() {
        return Err(Error::Dimension(format!("words over {} and {} variables", a.n(), b.n())));
    }
    let mut w = normalize(&[a.tail.as_slice(), b.tail.as_slice()].concat(), a.n());
    for ((x, y), z) in w.alpha.iter_mut().zip(&a.alpha).zip(&b.alpha) {
        *x += y + z;
    }
    Ok(w)
}

/// Product of several words, left to right.
pub fn word_product(words: &[&Word]) -> Result<Word> {
    let n = words.first().map_or(0, |w| w.n());
    words.iter().try_fold(Word::one(n), |acc, w| word_mul(&acc, w))
}

/// `w*`: the tail reversed with every letter conjugated.
pub fn involution(w: &Word) -> Word {
    Word { alpha: w.alpha.clone(), tail: w.tail.iter().rev().map(|l| l.bar()).collect() }
}

/// Representative of the pair `{w, w*}` and whether it differs from `w`.
pub fn canonical_rep(w: &Word) -> (Word, bool) {
    let s = involution(w);
    if s < *w {
        (s, true)
    } else {
        (w.clone(), false)
    }
}

pub fn eval_word(w: &Word, point: &[Quaternion]) -> Quaternion {
    let scale: f64 = w
        .alpha
        .iter()
        .enumerate()
        .map(|(i, a)| point[i].norm_sqr().powi(*a as i32))
        .product();
    w.tail.iter().fold(Quaternion::ONE, |acc, l| acc * l.eval(point)).scale(scale)
}

/// Monomial alphabet of a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    /// `[q]_d`: products of the variables only.
    #[serde(rename = "q")]
    VarsOnly,
    /// `[q, q̄]_d`: products of variables and conjugates.
    #[serde(rename = "mixed")]
    Mixed,
}

/// All normalized words of degree `≤ d` over the chosen alphabet, sorted.
///
/// `support` restricts the variables (0-based); `None` means all `n`.
pub fn basis(n: usize, d: usize, kind: BasisKind, support: Option<&[usize]>) -> Vec<Word> {
    let vars: Vec<usize> = match support {
        Some(s) => s.to_vec(),
        None => (0..n).collect(),
    };
    let letters: Vec<Letter> = match kind {
        BasisKind::VarsOnly => vars.iter().map(|&v| Letter::q(v)).collect(),
        BasisKind::Mixed => vars.iter().flat_map(|&v| [Letter::q(v), Letter::qbar(v)]).collect(),
    };
    let mut out = Vec::new();
    let mut tails: Vec<Vec<Letter>> = vec![vec![]];
    for len in 0..=d {
        if len > 0 {
            tails = tails
                .iter()
                .flat_map(|t| {
                    letters.iter().filter(move |l| t.last().is_none_or(|p| !p.cancels(**l))).map(move |l| {
                        let mut t2 = t.clone();
                        t2.push(*l);
                        t2
                    })
                })
                .collect();
        }
        let alpha_budget = if kind == BasisKind::Mixed { (d - len) / 2 } else { 0 };
        for alpha in alphas(n, &vars, alpha_budget) {
            for t in &tails {
                out.push(Word { alpha: alpha.clone(), tail: t.clone() });
            }
        }
    }
    out.sort();
    out
}

/// Exponent vectors supported on `vars` with total at most `budget`.
fn alphas(n: usize, vars: &[usize], budget: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    for &v in vars {
        let mut next = Vec::new();
        for a in &out {
            let used: u32 = a.iter().sum();
            for e in 0..=(budget as u32 - used) {
                let mut b = a.clone();
                b[v] = e;
                next.push(b);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rpoint(rng: &mut ChaCha8Rng, n: usize) -> Vec<Quaternion> {
        (0..n)
            .map(|_| Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn raw_product(seq: &[Letter], p: &[Quaternion]) -> Quaternion {
        seq.iter().fold(Quaternion::ONE, |acc, l| acc * l.eval(p))
    }

    fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs())
    }

    #[test]
    fn normalize_examples() {
        let w = normalize(&[Letter::q(0), Letter::qbar(0)], 2);
        assert_eq!(w.alpha(), &[1, 0]);
        assert!(w.tail().is_empty());
        let w = normalize(&[Letter::q(0), Letter::q(1)], 2);
        assert_eq!(w.alpha(), &[0, 0]);
        assert_eq!(w.tail(), &[Letter::q(0), Letter::q(1)]);
        let seq = [Letter::q(0), Letter::qbar(0), Letter::q(0)];
        let w = normalize(&seq, 2);
        assert_eq!(w.alpha(), &[1, 0]);
        assert_eq!(w.tail(), &[Letter::q(0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = rpoint(&mut rng, 2);
            assert!(close(eval_word(&w, &p), raw_product(&seq, &p), 1e-13));
        }
    }

    /// Every maximal sequence of single-pair reductions, by brute force.
    fn all_reductions(alpha: Vec<u32>, tail: Vec<Letter>, out: &mut Vec<Word>) {
        let mut reduced = false;
        for i in 0..tail.len().saturating_sub(1) {
            if tail[i].cancels(tail[i + 1]) {
                reduced = true;
                let mut a = alpha.clone();
                a[tail[i].var] += 1;
                let mut t = tail.clone();
                t.drain(i..i + 2);
                all_reductions(a, t, out);
            }
        }
        if !reduced {
            out.push(Word { alpha, tail });
        }
    }

    #[test]
    fn normal_form_is_confluent() {
        let letters = [Letter::q(0), Letter::qbar(0), Letter::q(1), Letter::qbar(1)];
        let mut seqs: Vec<Vec<Letter>> = vec![vec![]];
        for _ in 0..6 {
            seqs = seqs.iter().flat_map(|s| letters.iter().map(move |l| [s.clone(), vec![*l]].concat())).collect();
            for s in &seqs {
                let mut outs = vec![];
                all_reductions(vec![0, 0], s.clone(), &mut outs);
                let nf = normalize(s, 2);
                assert!(outs.iter().all(|w| *w == nf));
            }
        }
    }

    #[test]
    fn word_mul_examples() {
        let w = Word::new(vec![0, 1], &[Letter::q(1), Letter::qbar(0)]).unwrap();
        assert_eq!(word_mul(&Word::one(2), &w).unwrap(), w);
        let a = Word::new(vec![0, 0], &[Letter::q(0)]).unwrap();
        let b = Word::new(vec![0, 0], &[Letter::qbar(0)]).unwrap();
        let ab = word_mul(&a, &b).unwrap();
        assert_eq!(ab.alpha(), &[1, 0]);
        assert!(ab.tail().is_empty());
        assert!(word_mul(&Word::one(2), &Word::one(3)).is_err());
    }

    #[test]
    fn involution_examples() {
        let w = Word::new(vec![0, 0], &[Letter::q(0), Letter::q(1)]).unwrap();
        assert_eq!(involution(&w).tail(), &[Letter::qbar(1), Letter::qbar(0)]);
        assert_eq!(involution(&Word::one(2)), Word::one(2));
        let (r1, c1) = canonical_rep(&w);
        let (r2, c2) = canonical_rep(&involution(&w));
        assert_eq!(r1, r2);
        assert_ne!(c1, c2);
        let sa = Word::new(vec![1, 0], &[Letter::q(1), Letter::qbar(1)]).unwrap();
        assert!(sa.is_self_adjoint());
        assert_eq!(canonical_rep(&sa), (sa.clone(), false));
    }

    #[test]
    fn canonical_rep_pairs_exhaustive() {
        for w in basis(2, 3, BasisKind::Mixed, None) {
            let s = involution(&w);
            assert_eq!(canonical_rep(&w).0, canonical_rep(&s).0);
            assert_eq!(canonical_rep(&w).1, canonical_rep(&w).0 != w);
        }
    }

    #[test]
    fn basis_examples() {
        let b = basis(2, 1, BasisKind::VarsOnly, None);
        assert_eq!(b.iter().map(|w| w.to_string()).collect::<Vec<_>>(), ["1", "q1", "q2"]);
        let b = basis(1, 1, BasisKind::Mixed, None);
        assert_eq!(b.iter().map(|w| w.to_string()).collect::<Vec<_>>(), ["1", "q1", "q̄1"]);
        let b = basis(2, 2, BasisKind::VarsOnly, None);
        assert_eq!(
            b.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            ["1", "q1", "q2", "q1·q1", "q1·q2", "q2·q1", "q2·q2"]
        );
        let b = basis(3, 2, BasisKind::VarsOnly, Some(&[0, 2]));
        assert_eq!(b.len(), 7);
        assert!(b.iter().all(|w| w.vars().all(|v| v != 1)));
    }

    #[test]
    fn mixed_basis_matches_brute_force() {
        for (n, d) in [(1, 3), (2, 2), (2, 3), (3, 2)] {
            let letters: Vec<Letter> = (0..n).flat_map(|v| [Letter::q(v), Letter::qbar(v)]).collect();
            let mut seqs: Vec<Vec<Letter>> = vec![vec![]];
            let mut all = vec![Word::one(n)];
            for _ in 0..d {
                seqs = seqs.iter().flat_map(|s| letters.iter().map(move |l| [s.clone(), vec![*l]].concat())).collect();
                all.extend(seqs.iter().map(|s| normalize(s, n)));
            }
            all.sort();
            all.dedup();
            assert_eq!(basis(n, d, BasisKind::Mixed, None), all);
        }
    }

    #[test]
    fn basis_sorted_and_nested() {
        for kind in [BasisKind::VarsOnly, BasisKind::Mixed] {
            for d in 0..3 {
                let b = basis(2, d, kind, None);
                let b1 = basis(2, d + 1, kind, None);
                assert!(b.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(&b1[..b.len()], &b[..]);
                assert!(b[0].is_one());
            }
        }
    }

    fn arb_seq(n: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0..n, any::<bool>()).prop_map(|(var, conj)| Letter { var, conj }), 0..max)
    }

    proptest! {
        #[test]
        fn eval_of_normal_form_matches_raw(seq in arb_seq(3, 8), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = rpoint(&mut rng, 3);
            let w = normalize(&seq, 3);
            prop_assert!(close(eval_word(&w, &p), raw_product(&seq, &p), 1e-13));
            prop_assert_eq!(w.degree(), seq.len());
        }

        #[test]
        fn mul_and_involution_laws(s1 in arb_seq(2, 6), s2 in arb_seq(2, 6), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = rpoint(&mut rng, 2);
            let (a, b) = (normalize(&s1, 2), normalize(&s2, 2));
            let ab = word_mul(&a, &b).unwrap();
            prop_assert!(close(eval_word(&ab, &p), eval_word(&a, &p) * eval_word(&b, &p), 1e-12));
            prop_assert_eq!(ab.degree() % 2, (a.degree() + b.degree()) % 2);
            prop_assert!(ab.degree() <= a.degree() + b.degree());
            prop_assert_eq!(involution(&involution(&a)), a.clone());
            prop_assert_eq!(involution(&ab), word_mul(&involution(&b), &involution(&a)).unwrap());
            prop_assert!(close(eval_word(&involution(&a), &p), eval_word(&a, &p).conj(), 1e-13));
            prop_assert_eq!(involution(&a).degree(), a.degree());
        }
    }
}
