//! JSON exchange format for problems.
//!
//! ```json
//! {
//!   "n": 2,
//!   "terms": [ { "coeff": [1, 0, 0, 0], "alpha": [0, 0], "tail": [1, -2] } ],
//!   "gram": { "basis_kind": "q", "k": 1, "Q": [[[1, 0, 0, 0]]] },
//!   "ineqs": [ [ ... ] ],
//!   "eqs": [],
//!   "meta": { "family": "ne1_ball", "seed": 7 }
//! }
//! ```
//!
//! A term is the canonical coefficient `c_u` of the monomial
//! `u = ∏|qᵢ|^{2αᵢ}·tail`, where a positive letter `i` stands for `qᵢ` and a
//! negative one for `q̄ᵢ` (both one-based). Listing a word and its involution
//! is the same as listing one of them with the sum of coefficients.

use serde::{Deserialize, Serialize};

use crate::apps::{Extra, Family, Instance, InstanceSpec, Meta};
use crate::error::{Error, Result};
use crate::poly::SymPoly;
use crate::quaternion::{HermitianQMatrix, QMatrix, Quaternion};
use crate::relax::{GramForm, QPOP};
use crate::words::{canonical_rep, BasisKind, Letter, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: [f64; 4],
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub tail: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramJson {
    pub basis_kind: BasisKind,
    pub k: usize,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<[f64; 4]>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_used: Option<u64>,
    #[serde(default, skip_serializing_if = "is_default_extra")]
    pub extra: Extra,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cliques: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<[f64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisKind>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub case_override: bool,
}

fn is_default_extra(e: &Extra) -> bool {
    *e == Extra::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<GramJson>,
    #[serde(default)]
    pub ineqs: Vec<Vec<TermJson>>,
    #[serde(default)]
    pub eqs: Vec<Vec<TermJson>>,
    #[serde(default)]
    pub meta: MetaJson,
}

fn q_to(q: Quaternion) -> [f64; 4] {
    [q.r, q.i, q.j, q.k]
}

fn q_from(a: [f64; 4]) -> Quaternion {
    Quaternion::new(a[0], a[1], a[2], a[3])
}

fn terms_to(p: &SymPoly) -> Vec<TermJson> {
    p.terms()
        .map(|(u, c)| TermJson { coeff: q_to(*c), alpha: u.alpha().to_vec(), tail: u.tail().iter().map(|l| l.to_signed()).collect() })
        .collect()
}

fn terms_from(n: usize, terms: &[TermJson]) -> Result<SymPoly> {
    let mut p = SymPoly::zero(n);
    for t in terms {
        if t.alpha.len() != n {
            return Err(Error::Instance(format!("alpha of length {} in a problem over {n} variables", t.alpha.len())));
        }
        if t.coeff.iter().any(|v| !v.is_finite()) {
            return Err(Error::Instance("non-finite coefficient".into()));
        }
        let letters = t.tail.iter().map(|&s| Letter::from_signed(s)).collect::<Result<Vec<_>>>()?;
        let u = Word::new(t.alpha.clone(), &letters)?;
        let c = q_from(t.coeff);
        // A stored coefficient c_u contributes ℛ(2·c_u·u) unless u is self-adjoint.
        let (rep, _) = canonical_rep(&u);
        let a = if rep.is_self_adjoint() { c } else { c.scale(2.0) };
        p.add_term(a, &u);
    }
    SymPoly::zero(n).add(&p)
}

impl InstanceJson {
    pub fn from_instance(inst: &Instance) -> Self {
        let p = &inst.qpop;
        let gram = p.gram.as_ref().map(|g| {
            let m = g.q.matrix();
            GramJson { basis_kind: g.kind, k: g.k, q: (0..m.rows()).map(|r| (0..m.cols()).map(|c| q_to(m[(r, c)])).collect()).collect() }
        });
        let spec = inst.spec.as_ref();
        let meta = MetaJson {
            family: spec.map(|s| s.family),
            seed: spec.map(|s| s.seed),
            seed_used: spec.filter(|s| s.seed != inst.meta.seed_used).map(|_| inst.meta.seed_used),
            extra: spec.map(|s| s.extra.clone()).unwrap_or_default(),
            cliques: inst.meta.cliques.clone(),
            truth: inst.meta.truth.as_ref().map(|t| t.iter().map(|q| q_to(*q)).collect()),
            edges: inst.meta.edges.clone(),
            oracle: inst.meta.oracle,
            basis: inst.meta.basis,
            case_override: p.case_override,
        };
        InstanceJson {
            n: p.n,
            terms: terms_to(&p.objective),
            gram,
            ineqs: p.ineqs.iter().map(terms_to).collect(),
            eqs: p.eqs.iter().map(terms_to).collect(),
            meta,
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Instance("n must be positive".into()));
        }
        let objective = terms_from(n, &self.terms)?;
        let ineqs = self.ineqs.iter().map(|t| terms_from(n, t)).collect::<Result<Vec<_>>>()?;
        let eqs = self.eqs.iter().map(|t| terms_from(n, t)).collect::<Result<Vec<_>>>()?;
        let mut qpop = QPOP::new(objective, ineqs, eqs)?;
        if let Some(g) = &self.gram {
            let dim = g.q.len();
            if g.q.iter().any(|r| r.len() != dim) {
                return Err(Error::Instance("Gram matrix is not square".into()));
            }
            let q = HermitianQMatrix::new(QMatrix::from_fn(dim, dim, |r, c| q_from(g.q[r][c])), 1e-9)?;
            let form = GramForm { kind: g.basis_kind, k: g.k, q };
            if form.basis(n).len() != dim {
                return Err(Error::Instance(format!("Gram matrix of size {dim} does not match the basis")));
            }
            let from_q = QPOP::from_gram(n, form.clone(), vec![], vec![])?.objective;
            let diff = from_q.sub(&qpop.objective)?;
            if diff.terms().any(|(_, c)| c.abs() > 1e-9 * (1.0 + c.abs())) {
                return Err(Error::Instance("Gram matrix disagrees with the listed terms".into()));
            }
            qpop.gram = Some(form);
        }
        qpop.case_override = self.meta.case_override;
        let m = &self.meta;
        let spec = match (m.family, m.seed) {
            (Some(family), Some(seed)) => Some(InstanceSpec { family, n, seed, extra: m.extra.clone() }),
            _ => None,
        };
        let meta = Meta {
            cliques: m.cliques.clone(),
            truth: m.truth.as_ref().map(|t| t.iter().map(|a| q_from(*a)).collect()),
            edges: m.edges.clone(),
            oracle: m.oracle,
            seed_used: m.seed_used.or(m.seed).unwrap_or(0),
            basis: m.basis,
        };
        Ok(Instance { spec, qpop, meta })
    }
}

pub fn to_json(inst: &Instance) -> Result<String> {
    serde_json::to_string_pretty(&InstanceJson::from_instance(inst)).map_err(|e| Error::Instance(e.to_string()))
}

pub fn from_json(s: &str) -> Result<Instance> {
    let j: InstanceJson = serde_json::from_str(s).map_err(|e| Error::Instance(e.to_string()))?;
    j.to_instance()
}
