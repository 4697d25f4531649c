//! Solving relaxations end to end, reading moment matrices off the duals,
//! and recovering and certifying minimizers.

use crate::error::{Error, Result};
use crate::qsdp::{BlockRole, QSDP};
use crate::quaternion::{eig_hermitian, vec_norm, HermitianQMatrix, QMatrix, Quaternion};
use crate::realize::{recover_multipliers, recover_quaternion, to_real_economical, to_real_naive, Mode, RealizationMap};
use crate::relax::{moment_matrix, Moments, QPOP};
use crate::sdp::{backend_from_env, solve_with, RealSDP, Solution, SolverOptions, Status};
use crate::words::{Letter, Word};

/// Default numerical rank-one threshold on `λ₂/λ_max`.
pub const RANK_ONE_TOL: f64 = 1e-6;

/// A relaxation after realization and solving.
#[derive(Clone, Debug)]
pub struct Solved {
    pub qsdp: QSDP,
    pub real: RealSDP,
    pub map: RealizationMap,
    pub solution: Solution,
}

impl Solved {
    pub fn status(&self) -> Status {
        self.solution.status
    }

    /// The lower bound `λ`.
    pub fn bound(&self) -> f64 {
        self.solution.value()
    }

    /// Pseudo-moments recombined from the dual vector.
    pub fn moments(&self) -> Result<Moments> {
        require_usable(&self.solution)?;
        Moments::from_multipliers(&self.qsdp, &recover_multipliers(&self.solution.y, &self.map))
    }

    /// Quaternion values of all certificate blocks.
    pub fn blocks(&self) -> Result<Vec<HermitianQMatrix>> {
        recover_quaternion(&self.solution, &self.map)
    }

    /// Basis of the first Gram block of clique `j`.
    pub fn gram_basis(&self, clique: usize) -> Option<&[Word]> {
        self.qsdp.blocks.iter().find(|b| b.role == BlockRole::Gram { clique }).map(|b| b.basis.as_slice())
    }
}

fn require_usable(sol: &Solution) -> Result<()> {
    if !sol.status.is_usable() {
        return Err(Error::Solution(format!("solver status {}: {}", sol.status.as_str(), sol.message)));
    }
    Ok(())
}

/// Realizes `q` in the given mode and solves it with the configured backend.
pub fn solve_qsdp(q: QSDP, mode: Mode, tol: f64) -> Result<Solved> {
    let (real, map) = match mode {
        Mode::Economical => to_real_economical(&q)?,
        Mode::Naive => to_real_naive(&q)?,
    };
    let backend = backend_from_env()?;
    let solution = solve_with(backend.as_ref(), &real, &SolverOptions { tol, ..SolverOptions::default() });
    Ok(Solved { qsdp: q, real, map, solution })
}

/// The moment matrix over `basis` from a solved relaxation.
pub fn assemble_moment(q: &QSDP, sol: &Solution, map: &RealizationMap, basis: &[Word]) -> Result<HermitianQMatrix> {
    require_usable(sol)?;
    let y = Moments::from_multipliers(q, &recover_multipliers(&sol.y, map))?;
    moment_matrix(&y, basis)
}

/// Spectral summary used to judge numerical rank.
#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    /// Number of eigenvalues above `tol·λ_max`.
    pub rank: usize,
    /// Eigenvalues divided by the largest one, descending.
    pub ratios: Vec<f64>,
}

impl RankReport {
    pub fn of(m: &HermitianQMatrix, tol: f64) -> Result<Self> {
        let e = eig_hermitian(m, 1e-6)?;
        let max = e.values.last().copied().unwrap_or(0.0);
        let ratios: Vec<f64> = if max > 0.0 { e.values.iter().rev().map(|v| v / max).collect() } else { vec![] };
        let rank = ratios.iter().filter(|r| **r > tol).count();
        Ok(RankReport { rank, ratios })
    }

    /// `λ₂/λ_max`, zero for `1×1` matrices.
    pub fn second_ratio(&self) -> f64 {
        self.ratios.get(1).copied().unwrap_or(0.0).max(0.0)
    }
}

/// `v` with `M ≈ v·v*` and `v₀ = 1`, if `M` is numerically rank one.
pub fn rank_one_extract(m: &HermitianQMatrix, tol: f64) -> Result<Option<Vec<Quaternion>>> {
    let n = m.dim();
    if n == 0 {
        return Ok(None);
    }
    let e = eig_hermitian(m, 1e-6)?;
    let lmax = e.values[n - 1];
    if lmax <= 0.0 {
        return Ok(None);
    }
    if n > 1 && e.values[n - 2] / lmax > tol {
        return Ok(None);
    }
    let v: Vec<Quaternion> = e.vectors[n - 1].iter().map(|x| x.scale(lmax.sqrt())).collect();
    let v0 = v[0];
    if v0.abs() < 1e-6 {
        return Err(Error::Extraction(format!("leading entry {:.3e} of the rank-one factor is too small", v0.abs())));
    }
    let unit = v0.conj().scale(1.0 / v0.abs());
    let v: Vec<Quaternion> = v.iter().map(|x| *x * unit).collect();
    let resid = m.matrix().sub(&QMatrix::outer(&v, &v))?.norm() / m.matrix().norm();
    if resid > 10.0 * tol.max(1e-9) {
        return Ok(None);
    }
    let s = 1.0 / v[0].r;
    Ok(Some(v.iter().map(|x| x.scale(s)).collect()))
}

/// The point `(q₁, …, qₙ)` read off a vector indexed by `basis`.
pub fn point_from_vector(v: &[Quaternion], basis: &[Word], n: usize) -> Result<Vec<Quaternion>> {
    (0..n)
        .map(|i| {
            let w = Word::new(vec![0; n], &[Letter::q(i)])?;
            let k = basis.iter().position(|b| *b == w).ok_or_else(|| Error::Extraction(format!("basis lacks q{}", i + 1)))?;
            Ok(v[k])
        })
        .collect()
}

/// Evaluation of a candidate against a bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub bound: f64,
    pub candidate: Option<Vec<Quaternion>>,
    pub objective_at_candidate: f64,
    /// `max(0, −gᵢ)` for inequalities followed by `|hⱼ|` for equalities.
    pub constraint_residuals: Vec<f64>,
    pub gap: f64,
    pub rank_report: Option<RankReport>,
    pub tight: bool,
}

pub fn certify(p: &QPOP, bound: f64, candidate: &[Quaternion], tol: f64) -> Result<Certificate> {
    if candidate.len() != p.n {
        return Err(Error::Dimension(format!("candidate has {} entries for {} variables", candidate.len(), p.n)));
    }
    let obj = p.eval(candidate);
    let mut res: Vec<f64> = p.ineqs.iter().map(|g| (-g.eval(candidate)).max(0.0)).collect();
    res.extend(p.eqs.iter().map(|h| h.eval(candidate).abs()));
    let gap = obj - bound;
    let tight = gap <= tol * (1.0 + bound.abs()) && res.iter().all(|r| *r <= tol);
    Ok(Certificate {
        bound,
        candidate: Some(candidate.to_vec()),
        objective_at_candidate: obj,
        constraint_residuals: res,
        gap,
        rank_report: None,
        tight,
    })
}

/// Outcome of [`extract_minimizer`].
#[derive(Clone, Debug)]
pub struct Extraction {
    /// The moment matrix the candidate was read from.
    pub moment: HermitianQMatrix,
    /// Rank test of the matrix the candidate was read from: the full moment
    /// matrix, or its degree-one block when `completed` is set.
    pub rank_report: RankReport,
    /// True when the first-order moments were re-chosen (see [`extract_minimizer`]).
    pub completed: bool,
    pub certificate: Option<Certificate>,
}

/// Rank-one extraction from the dense Gram block's moment matrix, then
/// certification.
///
/// When every monomial of the problem has even degree, moments of odd degree
/// do not enter the relaxation and interior-point solutions leave them at
/// the centre of their range, which hides a rank-one optimum. In that case
/// the degree-one block is tested instead and, if it is rank one, the odd
/// moments are replaced by those of the extracted point.
pub fn extract_minimizer(p: &QPOP, solved: &Solved, tol: f64) -> Result<Extraction> {
    let basis = solved.gram_basis(0).ok_or_else(|| Error::Extraction("no Gram block".into()))?.to_vec();
    if solved.qsdp.blocks.iter().any(|b| b.role == BlockRole::Gram { clique: 1 }) {
        return Err(Error::Extraction("extraction needs a dense relaxation".into()));
    }
    let y = solved.moments()?;
    let m = moment_matrix(&y, &basis)?;
    let report = RankReport::of(&m, tol)?;
    if let Some(v) = rank_one_extract(&m, tol)? {
        let point = point_from_vector(&v, &basis, p.n)?;
        let mut cert = certify(p, solved.bound(), &point, 10.0 * tol)?;
        cert.rank_report = Some(report.clone());
        return Ok(Extraction { moment: m, rank_report: report, completed: false, certificate: Some(cert) });
    }
    if even_problem(p) {
        let idx: Vec<usize> = (0..p.n)
            .map(|i| Word::new(vec![0; p.n], &[Letter::q(i)]).map(|w| basis.iter().position(|b| *b == w)))
            .collect::<Result<Option<Vec<_>>>>()?
            .ok_or_else(|| Error::Extraction("basis lacks the degree-one words".into()))?;
        let sub = HermitianQMatrix::new(QMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]), 1e-6)?;
        let sub_report = RankReport::of(&sub, tol)?;
        if sub_report.rank == 1 {
            let e = eig_hermitian(&sub, 1e-6)?;
            let top = e.values[p.n - 1];
            let u: Vec<Quaternion> = e.vectors[p.n - 1].iter().map(|x| x.scale(top.sqrt())).collect();
            let k = (0..p.n).max_by(|a, b| u[*a].abs().total_cmp(&u[*b].abs())).unwrap_or(0);
            let unit = u[k].conj().scale(1.0 / u[k].abs());
            let point: Vec<Quaternion> = u.iter().map(|x| *x * unit).collect();
            let w = Moments::dirac(&point, &basis_words_for(&basis)?);
            let completed = moment_matrix(&w, &basis)?;
            let mut cert = certify(p, solved.bound(), &point, 10.0 * tol)?;
            cert.rank_report = Some(sub_report.clone());
            return Ok(Extraction { moment: completed, rank_report: sub_report, completed: true, certificate: Some(cert) });
        }
    }
    Ok(Extraction { moment: m, rank_report: report, completed: false, certificate: None })
}

fn basis_words_for(basis: &[Word]) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for a in basis {
        for b in basis {
            out.push(crate::words::word_mul(b, &crate::words::involution(a))?);
        }
    }
    Ok(out)
}

/// True when every monomial of the objective and constraints has even degree.
pub fn even_problem(p: &QPOP) -> bool {
    std::iter::once(&p.objective).chain(&p.ineqs).chain(&p.eqs).all(|f| f.terms().all(|(u, _)| u.degree() % 2 == 0))
}

/// `‖v‖`-normalized alignment error `min_u ‖a − b·u‖` over unit quaternions `u`.
pub fn gauge_distance(a: &[Quaternion], b: &[Quaternion]) -> f64 {
    let c = crate::quaternion::inner(b, a);
    let u = if c.abs() > 0.0 { c.scale(1.0 / c.abs()) } else { Quaternion::ONE };
    let diff: Vec<Quaternion> = a.iter().zip(b).map(|(x, y)| *x - *y * u).collect();
    vec_norm(&diff)
}
