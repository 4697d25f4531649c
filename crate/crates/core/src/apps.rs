//! Seeded instance generators for the experiment families and applications.
//!
//! Every generator draws from [`ChaCha8Rng`] seeded with the instance seed.
//! Separate quantities use separate ChaCha streams so that, for instance,
//! changing the edge probability of a synchronization instance does not
//! change its ground truth:
//!
//! | stream | contents |
//! |---|---|
//! | 0 | objective data (`Q`, `Qᵢ`, class samples) |
//! | 1 | ground truth |
//! | 2 | measurement graph |
//! | 3 | measurement noise |
//!
//! A synchronization draw with no edges is repeated with seed `seed + 1`,
//! then `seed + 2`, and so on.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{from_gram, sum_of_moduli, SymPoly};
use crate::quaternion::{eig_hermitian, hermitian_part, HermitianQMatrix, QMatrix, Quaternion};
use crate::relax::{GramForm, QPOP};
use crate::words::{basis, BasisKind, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ne1Ball,
    Ne1Norm,
    Ne1Quat,
    Ne2Ball,
    Ne2Norm,
    Ne3Ball,
    Ne3Norm,
    Ne5,
    Ne6,
    Qmmc,
    Sync,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Ne1Ball,
        Family::Ne1Norm,
        Family::Ne1Quat,
        Family::Ne2Ball,
        Family::Ne2Norm,
        Family::Ne3Ball,
        Family::Ne3Norm,
        Family::Ne5,
        Family::Ne6,
        Family::Qmmc,
        Family::Sync,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ne1Ball => "ne1_ball",
            Family::Ne1Norm => "ne1_norm",
            Family::Ne1Quat => "ne1_quat",
            Family::Ne2Ball => "ne2_ball",
            Family::Ne2Norm => "ne2_norm",
            Family::Ne3Ball => "ne3_ball",
            Family::Ne3Norm => "ne3_norm",
            Family::Ne5 => "ne5",
            Family::Ne6 => "ne6",
            Family::Qmmc => "qmmc",
            Family::Sync => "sync",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| Error::Instance(format!("unknown family '{s}'")))
    }

    /// Basis used for relaxations of this family unless overridden.
    pub fn default_basis(self) -> BasisKind {
        match self {
            Family::Ne2Ball | Family::Ne2Norm => BasisKind::Mixed,
            _ => BasisKind::VarsOnly,
        }
    }

    /// Smallest relaxation order.
    pub fn default_order(self) -> usize {
        match self {
            Family::Ne3Ball | Family::Ne3Norm | Family::Ne6 => 2,
            _ => 1,
        }
    }
}

/// Family-specific parameters; `None` means the default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Extra {
    /// Clique size for `ne5`/`ne6` (default 5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clique: Option<usize>,
    /// Number of classes for `qmmc` (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    /// Samples per class for `qmmc` (default 5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class: Option<usize>,
    /// Trade-off `λ` for `qmmc` (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Edge probability for `sync` (default 0.2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Noise level for `sync` (default 0.2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub extra: Extra,
}

impl InstanceSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        InstanceSpec { family, n, seed, extra: Extra::default() }
    }
}

/// Generator side information.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Meta {
    pub cliques: Option<Vec<Vec<usize>>>,
    pub truth: Option<Vec<Quaternion>>,
    pub edges: Option<Vec<(usize, usize)>>,
    /// Known optimal value, when the family has one.
    pub oracle: Option<f64>,
    /// Seed actually used (differs from the spec when a draw was repeated).
    pub seed_used: u64,
    /// Preferred relaxation basis, when it differs from the family default.
    pub basis: Option<BasisKind>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub spec: Option<InstanceSpec>,
    pub qpop: QPOP,
    pub meta: Meta,
}

impl Instance {
    /// Basis used for relaxations unless the caller overrides it.
    pub fn preferred_basis(&self) -> BasisKind {
        self.meta.basis.or(self.spec.as_ref().map(|s| s.family.default_basis())).unwrap_or(BasisKind::VarsOnly)
    }
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(s);
    r
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn normal_q(rng: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng))
}

fn unit_q(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = normal_q(rng);
        if q.abs() > 1e-12 {
            return q.scale(1.0 / q.abs());
        }
    }
}

/// `(A + Aᵀ)/2` with standard normal `A`.
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat<f64> {
    let a = Mat::from_fn(n, n, |_, _| normal(rng));
    Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Hermitian part of a standard normal quaternion matrix.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianQMatrix {
    hermitian_part(&QMatrix::from_fn(n, n, |_, _| normal_q(rng))).expect("square")
}

fn ball(n: usize) -> SymPoly {
    SymPoly::constant(n, 1.0).sub(&sum_of_moduli(n, &(0..n).collect::<Vec<_>>())).expect("same n")
}

fn unit_norms(n: usize) -> Vec<SymPoly> {
    (0..n).map(|i| sum_of_moduli(n, &[i]).sub(&SymPoly::constant(n, 1.0)).expect("same n")).collect()
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    if spec.n == 0 {
        return Err(Error::Instance("n must be positive".into()));
    }
    let (qpop, meta) = match spec.family {
        Family::Ne1Ball | Family::Ne1Norm | Family::Ne1Quat | Family::Ne2Ball | Family::Ne2Norm => gen_qcqp(spec)?,
        Family::Ne3Ball | Family::Ne3Norm => gen_quartic(spec)?,
        Family::Ne5 | Family::Ne6 => gen_clique(spec)?,
        Family::Qmmc => gen_qmmc(spec)?,
        Family::Sync => gen_sync(spec)?,
    };
    Ok(Instance { spec: Some(spec.clone()), qpop, meta })
}

fn constraints(ball_variant: bool, n: usize) -> (Vec<SymPoly>, Vec<SymPoly>) {
    if ball_variant {
        (vec![ball(n)], vec![])
    } else {
        (vec![], unit_norms(n))
    }
}

/// Random quadratic objectives `[q]₁*Q[q]₁` (or over `[q, q̄]₁`).
pub fn gen_qcqp(spec: &InstanceSpec) -> Result<(QPOP, Meta)> {
    let n = spec.n;
    let mut rng = stream(spec.seed, 0);
    let (kind, ball_variant, quat) = match spec.family {
        Family::Ne1Ball => (BasisKind::VarsOnly, true, false),
        Family::Ne1Norm => (BasisKind::VarsOnly, false, false),
        Family::Ne1Quat => (BasisKind::VarsOnly, true, true),
        Family::Ne2Ball => (BasisKind::Mixed, true, false),
        Family::Ne2Norm => (BasisKind::Mixed, false, false),
        f => return Err(Error::Instance(format!("{} is not a quadratic family", f.name()))),
    };
    let dim = basis(n, 1, kind, None).len();
    let q = if quat { random_hermitian(&mut rng, dim) } else { HermitianQMatrix::from_real_symmetric(&random_symmetric(&mut rng, dim))? };
    let (ineqs, eqs) = constraints(ball_variant, n);
    let p = QPOP::from_gram(n, GramForm { kind, k: 1, q }, ineqs, eqs)?;
    Ok((p, Meta { seed_used: spec.seed, ..Meta::default() }))
}

/// Random quartic objectives `[q]₂*Q[q]₂`.
pub fn gen_quartic(spec: &InstanceSpec) -> Result<(QPOP, Meta)> {
    let n = spec.n;
    let mut rng = stream(spec.seed, 0);
    let dim = basis(n, 2, BasisKind::VarsOnly, None).len();
    let q = HermitianQMatrix::from_real_symmetric(&random_symmetric(&mut rng, dim))?;
    let (ineqs, eqs) = constraints(spec.family == Family::Ne3Ball, n);
    let p = QPOP::from_gram(n, GramForm { kind: BasisKind::VarsOnly, k: 2, q }, ineqs, eqs)?;
    Ok((p, Meta { seed_used: spec.seed, ..Meta::default() }))
}

/// Block-separable objectives over disjoint cliques with one norm equation each.
pub fn gen_clique(spec: &InstanceSpec) -> Result<(QPOP, Meta)> {
    let n = spec.n;
    let size = spec.extra.clique.unwrap_or(5);
    if size == 0 || n % size != 0 {
        return Err(Error::Instance(format!("clique size {size} does not partition n = {n}")));
    }
    let k = if spec.family == Family::Ne6 { 2 } else { 1 };
    let mut rng = stream(spec.seed, 0);
    let cliques: Vec<Vec<usize>> = (0..n / size).map(|c| (c * size..(c + 1) * size).collect()).collect();
    let mut f = SymPoly::zero(n);
    let mut eqs = Vec::new();
    for c in &cliques {
        let w = basis(n, k, BasisKind::VarsOnly, Some(c));
        let q = HermitianQMatrix::from_real_symmetric(&random_symmetric(&mut rng, w.len()))?;
        f = f.add(&from_gram(&w, &q)?)?;
        eqs.push(sum_of_moduli(n, c).sub(&SymPoly::constant(n, 1.0))?);
    }
    let p = QPOP::new(f, vec![], eqs)?;
    Ok((p, Meta { cliques: Some(cliques), seed_used: spec.seed, ..Meta::default() }))
}

/// Scatter matrices of the quaternion maximum margin criterion.
#[derive(Clone, Debug)]
pub struct Scatter {
    pub between: HermitianQMatrix,
    pub within: HermitianQMatrix,
}

/// `S_B` and `S_W` of labelled samples.
pub fn scatter(classes: &[Vec<Vec<Quaternion>>]) -> Result<Scatter> {
    let n = classes.iter().flatten().next().map_or(0, |x| x.len());
    let mean = |xs: &[&Vec<Quaternion>]| -> Vec<Quaternion> {
        let m = xs.len() as f64;
        (0..n).map(|i| xs.iter().fold(Quaternion::ZERO, |a, x| a + x[i]).scale(1.0 / m)).collect()
    };
    let all: Vec<&Vec<Quaternion>> = classes.iter().flatten().collect();
    let mu = mean(&all);
    let mut sb = QMatrix::zeros(n, n);
    let mut sw = QMatrix::zeros(n, n);
    for c in classes {
        let refs: Vec<&Vec<Quaternion>> = c.iter().collect();
        let muc = mean(&refs);
        let d: Vec<Quaternion> = muc.iter().zip(&mu).map(|(a, b)| *a - *b).collect();
        sb = sb.add(&QMatrix::outer(&d, &d).scale(c.len() as f64))?;
        for x in c {
            let e: Vec<Quaternion> = x.iter().zip(&muc).map(|(a, b)| *a - *b).collect();
            sw = sw.add(&QMatrix::outer(&e, &e))?;
        }
    }
    Ok(Scatter { between: hermitian_part(&sb)?, within: hermitian_part(&sw)? })
}

/// `min v*Qv s.t. ‖v‖ = 1` with `Q = −(S_B − λ·S_W)`; the oracle is `λ_min(Q)`.
pub fn gen_qmmc(spec: &InstanceSpec) -> Result<(QPOP, Meta)> {
    let n = spec.n;
    let nc = spec.extra.classes.unwrap_or(2);
    let per = spec.extra.per_class.unwrap_or(5);
    let lam = spec.extra.lambda.unwrap_or(1.0);
    if nc == 0 || per == 0 {
        return Err(Error::Instance("qmmc needs at least one class and one sample per class".into()));
    }
    let mut rng = stream(spec.seed, 0);
    let classes: Vec<Vec<Vec<Quaternion>>> =
        (0..nc).map(|_| (0..per).map(|_| (0..n).map(|_| normal_q(&mut rng)).collect()).collect()).collect();
    let s = scatter(&classes)?;
    let q = qmmc_matrix(&s, lam)?;
    let oracle = eig_hermitian(&q, 1e-9)?.values[0];
    let mut g = QMatrix::zeros(n + 1, n + 1);
    for a in 0..n {
        for b in 0..n {
            g[(a + 1, b + 1)] = q[(a, b)];
        }
    }
    let gram = GramForm { kind: BasisKind::VarsOnly, k: 1, q: HermitianQMatrix::new(g, 1e-12)? };
    let h = sum_of_moduli(n, &(0..n).collect::<Vec<_>>()).sub(&SymPoly::constant(n, 1.0))?;
    let p = QPOP::from_gram(n, gram, vec![], vec![h])?;
    Ok((p, Meta { oracle: Some(oracle), seed_used: spec.seed, ..Meta::default() }))
}

/// `−(S_B − λ·S_W)`.
pub fn qmmc_matrix(s: &Scatter, lambda: f64) -> Result<HermitianQMatrix> {
    hermitian_part(&s.within.matrix().scale(lambda).sub(s.between.matrix())?)
}

/// `−Σ_{(i,j)∈E} ℛ(Q̄ᵢⱼ·qᵢ·q̄ⱼ)` for the given measurements.
pub fn sync_objective(n: usize, measurements: &[((usize, usize), Quaternion)]) -> Result<SymPoly> {
    let mut f = SymPoly::zero(n);
    for ((i, j), qij) in measurements {
        let w = Word::new(vec![0; n], &[Letter::q(*i), Letter::qbar(*j)])?;
        f.add_term(-qij.conj(), &w);
    }
    Ok(f)
}

/// Synchronization from `Qᵢⱼ = qᵢq̄ⱼ + noise·εᵢⱼ` on a `G(n, p)` graph.
pub fn gen_sync(spec: &InstanceSpec) -> Result<(QPOP, Meta)> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::Instance("synchronization needs at least two nodes".into()));
    }
    let p = spec.extra.p.unwrap_or(0.2);
    let noise = spec.extra.noise.unwrap_or(0.2);
    if !(0.0..=1.0).contains(&p) || p == 0.0 {
        return Err(Error::Instance(format!("edge probability {p} must lie in (0, 1]")));
    }
    for attempt in 0..10_000u64 {
        let seed = spec.seed.wrapping_add(attempt);
        let mut truth_rng = stream(seed, 1);
        let truth: Vec<Quaternion> = (0..n).map(|_| unit_q(&mut truth_rng)).collect();
        let mut graph_rng = stream(seed, 2);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if graph_rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let mut noise_rng = stream(seed, 3);
        let meas: Vec<((usize, usize), Quaternion)> =
            edges.iter().map(|&(i, j)| ((i, j), truth[i] * truth[j].conj() + unit_q(&mut noise_rng).scale(noise))).collect();
        let f = sync_objective(n, &meas)?;
        let qpop = QPOP::new(f, vec![], unit_norms(n))?;
        let meta = Meta { truth: Some(truth), edges: Some(edges), seed_used: seed, ..Meta::default() };
        return Ok((qpop, meta));
    }
    Err(Error::Instance("could not draw a nonempty measurement graph".into()))
}

/// `min q₁²+q̄₁²+q₂²+q̄₂²+q₁q₂+q̄₂q̄₁+q₁q̄₂+q₂q̄₁  s.t.  |q₁|²+|q₂|² ≤ 1`.
///
/// The optimal value is `−2`, while the relaxations over `[q, q̄]_d` stall
/// at `−2√2` for every order.
pub fn table1() -> Instance {
    let w = |s: &[i64]| Word::new(vec![0, 0], &s.iter().map(|&x| Letter::from_signed(x).expect("valid letter")).collect::<Vec<_>>()).expect("two variables");
    let mut f = SymPoly::zero(2);
    for s in [&[1i64, 1][..], &[2, 2], &[1, 2], &[1, -2]] {
        f.add_term(Quaternion::real(2.0), &w(s));
    }
    let qpop = QPOP::new(f, vec![ball(2)], vec![]).expect("two variables");
    Instance { spec: None, qpop, meta: Meta { basis: Some(BasisKind::Mixed), ..Meta::default() } }
}

/// A constraint `±(1 − Σ_{i∈S}|qᵢ|²)` recognised by [`sample_feasible`].
fn modulus_set(c: &SymPoly, sign: f64) -> Option<Vec<usize>> {
    if (c.constant_term() - sign).abs() > 1e-14 {
        return None;
    }
    let mut set = Vec::new();
    for (u, coef) in c.terms() {
        if u.is_one() {
            continue;
        }
        let single: Vec<usize> = u.alpha().iter().enumerate().filter(|(_, a)| **a > 0).map(|(i, _)| i).collect();
        if !u.tail().is_empty() || single.len() != 1 || u.alpha()[single[0]] != 1 || (coef.r + sign).abs() > 1e-14 || coef.imag_abs() > 0.0 {
            return None;
        }
        set.push(single[0]);
    }
    Some(set)
}

/// Random feasible points of a problem whose constraints are unit balls
/// `Σ_{i∈S}|qᵢ|² ≤ 1` and unit spheres `Σ_{i∈S}|qᵢ|² = 1` over disjoint sets.
///
/// Balls are sampled uniformly; spheres uniformly on the sphere.
pub fn sample_feasible(p: &QPOP, count: usize, seed: u64) -> Result<Vec<Vec<Quaternion>>> {
    let unsupported = || Error::Unsupported("sampling needs ball or sphere constraints over disjoint variable sets".into());
    let mut sets: Vec<(Vec<usize>, bool)> = Vec::new();
    for g in &p.ineqs {
        sets.push((modulus_set(g, 1.0).ok_or_else(unsupported)?, false));
    }
    for h in &p.eqs {
        let s = modulus_set(h, -1.0).or_else(|| modulus_set(h, 1.0)).ok_or_else(unsupported)?;
        sets.push((s, true));
    }
    let mut seen = vec![false; p.n];
    for i in sets.iter().flat_map(|(s, _)| s) {
        if std::mem::replace(&mut seen[*i], true) {
            return Err(unsupported());
        }
    }
    let mut rng = stream(seed, 7);
    Ok((0..count)
        .map(|_| {
            let mut x: Vec<Quaternion> = (0..p.n).map(|_| normal_q(&mut rng)).collect();
            for (set, sphere) in &sets {
                let r = set.iter().map(|&i| x[i].norm_sqr()).sum::<f64>().sqrt();
                let radius = if *sphere { 1.0 } else { rng.random_range(0.0f64..1.0).powf(1.0 / (4.0 * set.len() as f64)) };
                for &i in set {
                    x[i] = x[i].scale(radius / r);
                }
            }
            x
        })
        .collect())
}
