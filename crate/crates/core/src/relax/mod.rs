//! QSOS relaxations of quaternion polynomial optimization problems.
//!
//! A relaxation of order `d` looks for the largest `λ` such that
//!
//! ```text
//! f − λ = w₀*·G₀·w₀ + Σᵢ wᵢ*·Gᵢ·gᵢ·wᵢ + Σⱼ vⱼ*·Hⱼ·hⱼ·vⱼ,   G ⪰ 0, H Hermitian
//! ```
//!
//! and writes the identity as one quaternion equation per canonical word.
//! The builders here only assemble that standard-form [`QSDP`]; solving is
//! the business of [`crate::realize`] and [`crate::sdp`].

mod chordal;
mod moment;
mod rsos1;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use chordal::{assign_constraints, chordal_cliques, csp_graph, Assignment, Graph};
pub use moment::{build_moment_matrices, localizing_matrix, moment_matrix, Moments};
pub use rsos1::{build_rsos1, quadratic_form};

use crate::error::{Error, Result};
use crate::poly::{from_gram, RealPoly, SymPoly};
use crate::qsdp::{BlockRole, QBlock, QConstraint, QEntry, QSDP};
use crate::quaternion::{HermitianQMatrix, Quaternion};
use crate::words::{basis, canonical_rep, involution, normalize, word_mul, BasisKind, Letter, Word};

/// Which validity case the constraint data falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// Objective and constraints all have real coefficients.
    RealCoeff,
    /// Constraints are polynomials in the moduli `|qᵢ|²` only.
    ModulusOnly,
    Other,
}

/// An objective given as `w*·Q·w` over a standard basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GramForm {
    pub kind: BasisKind,
    pub k: usize,
    pub q: HermitianQMatrix,
}

impl GramForm {
    pub fn basis(&self, n: usize) -> Vec<Word> {
        basis(n, self.k, self.kind, None)
    }
}

/// `inf f  s.t.  gᵢ ≥ 0, hⱼ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QPOP {
    pub n: usize,
    pub objective: SymPoly,
    /// The Gram form the objective came from, when known.
    pub gram: Option<GramForm>,
    pub ineqs: Vec<SymPoly>,
    pub eqs: Vec<SymPoly>,
    pub case_tag: CaseTag,
    /// Build relaxations even when neither validity case holds.
    pub case_override: bool,
}

impl QPOP {
    pub fn new(objective: SymPoly, ineqs: Vec<SymPoly>, eqs: Vec<SymPoly>) -> Result<Self> {
        let n = objective.n();
        if let Some(c) = ineqs.iter().chain(&eqs).find(|c| c.n() != n) {
            return Err(Error::Dimension(format!("constraint over {} variables in a problem over {n}", c.n())));
        }
        let mut p = QPOP { n, objective, gram: None, ineqs, eqs, case_tag: CaseTag::Other, case_override: false };
        p.case_tag = p.classify();
        Ok(p)
    }

    /// Problem with objective `w*·Q·w`, `w = basis(n, k, kind)`.
    pub fn from_gram(n: usize, gram: GramForm, ineqs: Vec<SymPoly>, eqs: Vec<SymPoly>) -> Result<Self> {
        let w = gram.basis(n);
        let objective = from_gram(&w, &gram.q)?;
        let objective = if objective.n() == n { objective } else { SymPoly::zero(n).add(&objective)? };
        let mut p = QPOP::new(objective, ineqs, eqs)?;
        p.gram = Some(gram);
        Ok(p)
    }

    fn classify(&self) -> CaseTag {
        let cons = || self.ineqs.iter().chain(&self.eqs);
        if self.objective.has_real_coefficients() && cons().all(|c| c.has_real_coefficients()) {
            CaseTag::RealCoeff
        } else if cons().all(|c| c.is_modulus_only() && c.has_real_coefficients()) {
            CaseTag::ModulusOnly
        } else {
            CaseTag::Other
        }
    }

    /// `Ok` when a validity case holds or the override is set.
    pub fn check_case(&self) -> Result<CaseTag> {
        if self.case_tag == CaseTag::Other && !self.case_override {
            return Err(Error::Unsupported(
                "constraints are neither real-coefficient nor polynomials in the moduli; set the case override to build anyway"
                    .into(),
            ));
        }
        Ok(self.case_tag)
    }

    /// `max(⌈deg f/2⌉, ⌈deg gᵢ/2⌉, ⌈deg hⱼ/2⌉)`.
    pub fn d_min(&self) -> usize {
        std::iter::once(&self.objective).chain(&self.ineqs).chain(&self.eqs).map(|p| p.degree().div_ceil(2)).max().unwrap_or(0)
    }

    /// Largest constraint violation at `point`.
    pub fn violation(&self, point: &[Quaternion]) -> f64 {
        let g = self.ineqs.iter().map(|g| (-g.eval(point)).max(0.0));
        let h = self.eqs.iter().map(|h| h.eval(point).abs());
        g.chain(h).fold(0.0, f64::max)
    }

    pub fn eval(&self, point: &[Quaternion]) -> f64 {
        self.objective.eval(point)
    }
}

/// How the chordal extension is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chordal {
    #[default]
    GreedyMinDegree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxOptions {
    pub order: usize,
    pub basis: BasisKind,
    pub sparse: bool,
    pub strengthen: bool,
    pub real_gram: bool,
    pub chordal: Chordal,
}

impl RelaxOptions {
    pub fn new(order: usize) -> Self {
        RelaxOptions { order, basis: BasisKind::VarsOnly, sparse: false, strengthen: false, real_gram: false, chordal: Chordal::GreedyMinDegree }
    }

    pub fn basis(mut self, kind: BasisKind) -> Self {
        self.basis = kind;
        self
    }

    pub fn sparse(mut self, on: bool) -> Self {
        self.sparse = on;
        self
    }

    pub fn strengthen(mut self, on: bool) -> Self {
        self.strengthen = on;
        self
    }

    pub fn real_gram(mut self, on: bool) -> Self {
        self.real_gram = on;
        self
    }
}

/// One PSD block of the certificate: `basis*·G·m·basis` for a multiplier `m`.
struct Piece {
    role: BlockRole,
    basis: Vec<Word>,
    mult: Vec<(f64, Word)>,
    sign: f64,
}

fn half_degree(p: &SymPoly) -> usize {
    p.degree().div_ceil(2)
}

fn multiplier(p: &SymPoly, what: &str) -> Result<Vec<(f64, Word)>> {
    let r = RealPoly::new(p.clone()).map_err(|_| {
        Error::Unsupported(format!("{what} has non-real coefficients; only real multipliers can be matched"))
    })?;
    Ok(r.full_terms())
}

fn reduced_order(d: usize, r: usize, what: &str) -> Result<usize> {
    d.checked_sub(r).ok_or_else(|| Error::InvalidOptions(format!("order {d} is below the half degree {r} of {what}")))
}

/// Pieces for `f − λ = Σ` over the given cliques (a single clique of all
/// variables for the dense relaxation).
fn pieces(p: &QPOP, opts: &RelaxOptions, cliques: &[Vec<usize>], assign: &Assignment) -> Result<Vec<Piece>> {
    let d = opts.order;
    let one = vec![(1.0, Word::one(p.n))];
    let mut out = Vec::new();
    for (j, c) in cliques.iter().enumerate() {
        let support = (c.len() < p.n).then_some(c.as_slice());
        out.push(Piece { role: BlockRole::Gram { clique: j }, basis: basis(p.n, d, opts.basis, support), mult: one.clone(), sign: 1.0 });
    }
    for (j, c) in cliques.iter().enumerate() {
        let support = (c.len() < p.n).then_some(c.as_slice());
        for &i in &assign.0[j] {
            let g = &p.ineqs[i];
            let what = format!("inequality {}", i + 1);
            let b = basis(p.n, reduced_order(d, half_degree(g), &what)?, opts.basis, support);
            out.push(Piece { role: BlockRole::Ineq(i), basis: b, mult: multiplier(g, &what)?, sign: 1.0 });
        }
    }
    for (j, c) in cliques.iter().enumerate() {
        let support = (c.len() < p.n).then_some(c.as_slice());
        for &l in &assign.1[j] {
            let h = &p.eqs[l];
            let what = format!("equality {}", l + 1);
            let b = basis(p.n, reduced_order(d, half_degree(h), &what)?, opts.basis, support);
            let m = multiplier(h, &what)?;
            out.push(Piece { role: BlockRole::EqPlus(l), basis: b.clone(), mult: m.clone(), sign: 1.0 });
            out.push(Piece { role: BlockRole::EqMinus(l), basis: b, mult: m, sign: -1.0 });
        }
    }
    if opts.strengthen {
        let base = basis(p.n, d, BasisKind::VarsOnly, None);
        for i in 0..p.n {
            let b: Vec<Word> = base.iter().map(|w| normalize(&[&[Letter::qbar(i)], &expand(w)[..]].concat(), p.n)).collect();
            out.push(Piece { role: BlockRole::Strengthen(i), basis: b, mult: one.clone(), sign: 1.0 });
        }
    }
    Ok(out)
}

/// Letters of a word with its moduli written out as `qᵢq̄ᵢ`.
fn expand(w: &Word) -> Vec<Letter> {
    let mut out = Vec::new();
    for (i, &a) in w.alpha().iter().enumerate() {
        for _ in 0..a {
            out.push(Letter::q(i));
            out.push(Letter::qbar(i));
        }
    }
    out.extend_from_slice(w.tail());
    out
}

type Coeffs = BTreeMap<Word, BTreeMap<(usize, usize, usize), f64>>;

/// Adds the contribution of `ℛ(G[k,l]·m·w_l·w_k*)` for one block.
fn match_piece(acc: &mut Coeffs, block: usize, piece: &Piece) -> Result<()> {
    let stars: Vec<Word> = piece.basis.iter().map(involution).collect();
    for (k, wk_star) in stars.iter().enumerate() {
        for (l, wl) in piece.basis.iter().enumerate() {
            let base = word_mul(wl, wk_star)?;
            for (g, t) in &piece.mult {
                let x = word_mul(t, &base)?;
                let (rep, conjugated) = canonical_rep(&x);
                let v = 0.5 * g * piece.sign;
                let row = acc.entry(rep.clone()).or_default();
                if rep.is_self_adjoint() {
                    *row.entry((block, k, l)).or_insert(0.0) += v;
                    *row.entry((block, l, k)).or_insert(0.0) += v;
                } else if conjugated {
                    *row.entry((block, l, k)).or_insert(0.0) += v;
                } else {
                    *row.entry((block, k, l)).or_insert(0.0) += v;
                }
            }
        }
    }
    Ok(())
}

fn assemble(p: &QPOP, opts: &RelaxOptions, pieces: Vec<Piece>) -> Result<QSDP> {
    p.check_case()?;
    let mut blocks = vec![
        QBlock { dim: 1, role: BlockRole::LambdaPlus, real: true, basis: vec![] },
        QBlock { dim: 1, role: BlockRole::LambdaMinus, real: true, basis: vec![] },
    ];
    let mut acc: Coeffs = BTreeMap::new();
    let one = Word::one(p.n);
    acc.entry(one.clone()).or_default().insert((0, 0, 0), 1.0);
    acc.entry(one).or_default().insert((1, 0, 0), -1.0);
    for piece in pieces {
        let b = blocks.len();
        match_piece(&mut acc, b, &piece)?;
        let dim = piece.basis.len();
        blocks.push(QBlock { dim, role: piece.role, real: opts.real_gram || dim == 1, basis: piece.basis });
    }
    for (u, _) in p.objective.terms() {
        if !acc.contains_key(u) {
            return Err(Error::DegreeOverflow(format!(
                "objective monomial {u} is not produced by the order-{} {} basis",
                opts.order,
                match opts.basis {
                    BasisKind::VarsOnly => "q",
                    BasisKind::Mixed => "mixed",
                }
            )));
        }
    }
    let constraints = acc
        .into_iter()
        .map(|(u, row)| {
            let entries = row
                .into_iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|((block, r, c), v)| QEntry { block, row: r, col: c, coef: Quaternion::real(v) })
                .collect();
            let rhs = p.objective.coefficient(&u);
            QConstraint { word: Some(u), entries, rhs }
        })
        .collect();
    let objective = vec![
        QEntry { block: 0, row: 0, col: 0, coef: Quaternion::ONE },
        QEntry { block: 1, row: 0, col: 0, coef: -Quaternion::ONE },
    ];
    Ok(QSDP { blocks, constraints, objective })
}

fn check_order(p: &QPOP, opts: &RelaxOptions) -> Result<()> {
    let dm = p.d_min();
    if opts.order < dm {
        return Err(Error::InvalidOptions(format!("relaxation order {} is below the minimum order {dm}", opts.order)));
    }
    Ok(())
}

/// The dense QSOS relaxation.
pub fn build_qsos(p: &QPOP, opts: &RelaxOptions) -> Result<QSDP> {
    check_order(p, opts)?;
    let all = vec![(0..p.n).collect::<Vec<_>>()];
    let assign = (vec![(0..p.ineqs.len()).collect()], vec![(0..p.eqs.len()).collect()]);
    let opts = RelaxOptions { strengthen: false, ..*opts };
    assemble(p, &opts, pieces(p, &opts, &all, &assign)?)
}

/// The clique-wise relaxation over the chordal extension of the CSP graph.
pub fn build_sparse_qsos(p: &QPOP, opts: &RelaxOptions) -> Result<QSDP> {
    check_order(p, opts)?;
    let cliques = chordal_cliques(&csp_graph(p));
    let assign = assign_constraints(&cliques, p)?;
    let opts = RelaxOptions { strengthen: false, ..*opts };
    assemble(p, &opts, pieces(p, &opts, &cliques, &assign)?)
}

/// The dense relaxation plus one Gram block over `q̄ᵢ·[q]_d` per variable.
pub fn build_strengthened(p: &QPOP, opts: &RelaxOptions) -> Result<QSDP> {
    check_order(p, opts)?;
    let all = vec![(0..p.n).collect::<Vec<_>>()];
    let assign = (vec![(0..p.ineqs.len()).collect()], vec![(0..p.eqs.len()).collect()]);
    let opts = RelaxOptions { strengthen: true, ..*opts };
    assemble(p, &opts, pieces(p, &opts, &all, &assign)?)
}

/// Dispatches on the `sparse` and `strengthen` flags.
pub fn build(p: &QPOP, opts: &RelaxOptions) -> Result<QSDP> {
    match (opts.sparse, opts.strengthen) {
        (true, true) => Err(Error::InvalidOptions("sparse and strengthened relaxations cannot be combined".into())),
        (true, false) => build_sparse_qsos(p, opts),
        (false, true) => build_strengthened(p, opts),
        (false, false) => build_qsos(p, opts),
    }
}

/// Marks every certificate block as real symmetric.
pub fn real_gram_restrict(q: &QSDP) -> Result<QSDP> {
    let real = |x: Quaternion| x.imag_abs() == 0.0;
    let data_real = q.constraints.iter().all(|c| real(c.rhs) && c.entries.iter().all(|e| real(e.coef)))
        && q.objective.iter().all(|e| real(e.coef));
    if !data_real {
        return Err(Error::NonReal("real Gram blocks need real relaxation data".into()));
    }
    let mut out = q.clone();
    for b in &mut out.blocks {
        b.real = true;
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
