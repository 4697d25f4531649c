//! Infeasible primal-dual interior-point method (HKM direction, Mehrotra
//! predictor-corrector) for block SDPs with PSD and diagonal blocks.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::prelude::*;
use faer::{Accum, Mat, Par, Side};

use super::model::{BlockValue, RealSDP};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    NearOptimal,
    InfeasibleOrUnbounded,
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::NearOptimal => "near_optimal",
            Status::InfeasibleOrUnbounded => "infeasible_or_unbounded",
            Status::NumericalFailure => "numerical_failure",
        }
    }

    pub fn is_usable(self) -> bool {
        matches!(self, Status::Optimal | Status::NearOptimal)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// `‖b − 𝒜(X)‖ / (1 + ‖b‖)`.
    pub primal_feas: f64,
    /// `‖𝒜ᵀy − Z − C‖ / (1 + ‖C‖)`.
    pub dual_feas: f64,
    /// `|p − d| / (1 + |p|)`.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<BlockValue>,
    pub y: Vec<f64>,
    pub z: Vec<BlockValue>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, max_iter: 120 }
    }
}

/// A solver for [`RealSDP`] problems.
pub trait SdpBackend {
    fn name(&self) -> &'static str;
    fn solve(&self, p: &RealSDP, opts: &SolverOptions) -> Solution;
}

/// The embedded interior-point backend.
#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorPoint;

impl SdpBackend for InteriorPoint {
    fn name(&self) -> &'static str {
        "ipm"
    }

    fn solve(&self, p: &RealSDP, opts: &SolverOptions) -> Solution {
        Ipm::new(p).run(opts)
    }
}

/// Picks the backend named by `QSOSKIT_SOLVER` (default `ipm`).
pub fn backend_from_env() -> Result<Box<dyn SdpBackend>> {
    match std::env::var("QSOSKIT_SOLVER").ok().as_deref() {
        None | Some("") | Some("ipm") => Ok(Box::new(InteriorPoint)),
        Some(other) => Err(Error::InvalidOptions(format!("unknown solver backend '{other}' (available: ipm)"))),
    }
}

/// Solves with the embedded backend at tolerance `tol`.
pub fn solve(p: &RealSDP, tol: f64) -> Solution {
    InteriorPoint.solve(p, &SolverOptions { tol, ..Default::default() })
}

pub fn solve_with(backend: &dyn SdpBackend, p: &RealSDP, opts: &SolverOptions) -> Solution {
    backend.solve(p, opts)
}

/// A constraint's restriction to one PSD block.
struct PsdCon {
    k: usize,
    entries: Vec<(usize, usize, f64)>,
    support: Vec<usize>,
    dense: Mat<f64>,
}

enum Block {
    Psd { n: usize, cons: Vec<PsdCon>, c: Mat<f64> },
    Diag { n: usize, cols: Vec<Vec<(usize, f64)>>, c: Vec<f64> },
}

struct Ipm {
    m: usize,
    b: Vec<f64>,
    /// Row scaling: constraint `k` was divided by `scale[k]`.
    scale: Vec<f64>,
    blocks: Vec<Block>,
    nu: f64,
    norm_b_orig: f64,
    norm_c: f64,
}

type Vals = Vec<BlockValue>;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sym(m: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn frob_inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s
}

fn mat_mul(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), 1.0, Par::Seq);
    out
}

/// Largest step `α` with `X + α·dX ⪰ 0` given the Cholesky factor of `X`.
fn max_step_psd(l: MatRef<'_, f64>, dx: &Mat<f64>) -> f64 {
    let mut w = dx.clone();
    solve_lower_triangular_in_place(l, w.as_mut(), Par::Seq);
    let mut wt = w.transpose().to_owned();
    solve_lower_triangular_in_place(l, wt.as_mut(), Par::Seq);
    let w = sym(&wt);
    match w.self_adjoint_eigenvalues(Side::Lower) {
        Ok(ev) => {
            let min = ev.first().copied().unwrap_or(0.0);
            if min < 0.0 {
                -1.0 / min
            } else {
                f64::INFINITY
            }
        }
        Err(_) => 0.0,
    }
}

impl Ipm {
    fn new(p: &RealSDP) -> Self {
        let m = p.m();
        let mut scale = vec![0.0f64; m];
        for (k, es) in p.a.iter().enumerate() {
            let s: f64 = es.iter().map(|e| if e.i == e.j { e.v * e.v } else { 2.0 * e.v * e.v }).sum();
            scale[k] = if s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let mut blocks = Vec::new();
        for (bi, &d) in p.block_struct.iter().enumerate() {
            let n = d.unsigned_abs() as usize;
            if d > 0 {
                let mut c = Mat::zeros(n, n);
                for e in p.c.iter().filter(|e| e.blk == bi) {
                    c[(e.i, e.j)] += e.v;
                    if e.i != e.j {
                        c[(e.j, e.i)] += e.v;
                    }
                }
                let mut cons = Vec::new();
                for (k, es) in p.a.iter().enumerate() {
                    let entries: Vec<(usize, usize, f64)> =
                        es.iter().filter(|e| e.blk == bi).map(|e| (e.i, e.j, e.v / scale[k])).collect();
                    if entries.is_empty() {
                        continue;
                    }
                    let mut support: Vec<usize> = entries.iter().flat_map(|e| [e.0, e.1]).collect();
                    support.sort_unstable();
                    support.dedup();
                    let pos = |x: usize| support.binary_search(&x).unwrap();
                    let mut dense = Mat::zeros(support.len(), support.len());
                    for &(i, j, v) in &entries {
                        let (a, b) = (pos(i), pos(j));
                        dense[(a, b)] += v;
                        if a != b {
                            dense[(b, a)] += v;
                        }
                    }
                    cons.push(PsdCon { k, entries, support, dense });
                }
                blocks.push(Block::Psd { n, cons, c });
            } else {
                let mut c = vec![0.0; n];
                for e in p.c.iter().filter(|e| e.blk == bi) {
                    c[e.i] += e.v;
                }
                let mut cols = vec![Vec::new(); n];
                for (k, es) in p.a.iter().enumerate() {
                    for e in es.iter().filter(|e| e.blk == bi) {
                        cols[e.i].push((k, e.v / scale[k]));
                    }
                }
                blocks.push(Block::Diag { n, cols, c });
            }
        }
        let b: Vec<f64> = p.b.iter().zip(&scale).map(|(b, s)| b / s).collect();
        let norm_c = p.c.iter().map(|e| if e.i == e.j { e.v * e.v } else { 2.0 * e.v * e.v }).sum::<f64>().sqrt();
        Ipm { m, b, scale, blocks, nu: p.cone_dim().max(1) as f64, norm_b_orig: norm(&p.b), norm_c }
    }

    /// `𝒜(V)` for possibly nonsymmetric block values.
    fn a_op(&self, v: &Vals) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (blk, val) in self.blocks.iter().zip(v) {
            match (blk, val) {
                (Block::Psd { cons, .. }, BlockValue::Psd(x)) => {
                    for con in cons {
                        let mut s = 0.0;
                        for &(i, j, w) in &con.entries {
                            s += if i == j { w * x[(i, i)] } else { w * (x[(i, j)] + x[(j, i)]) };
                        }
                        out[con.k] += s;
                    }
                }
                (Block::Diag { cols, .. }, BlockValue::Diag(x)) => {
                    for (l, col) in cols.iter().enumerate() {
                        for &(k, w) in col {
                            out[k] += w * x[l];
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        out
    }

    /// `𝒜ᵀ(y)`.
    fn at_op(&self, y: &[f64]) -> Vals {
        self.blocks
            .iter()
            .map(|blk| match blk {
                Block::Psd { n, cons, .. } => {
                    let mut s = Mat::zeros(*n, *n);
                    for con in cons {
                        let yk = y[con.k];
                        if yk == 0.0 {
                            continue;
                        }
                        for &(i, j, w) in &con.entries {
                            s[(i, j)] += w * yk;
                            if i != j {
                                s[(j, i)] += w * yk;
                            }
                        }
                    }
                    BlockValue::Psd(s)
                }
                Block::Diag { n, cols, .. } => {
                    let mut s = vec![0.0; *n];
                    for (l, col) in cols.iter().enumerate() {
                        s[l] = col.iter().map(|&(k, w)| w * y[k]).sum();
                    }
                    BlockValue::Diag(s)
                }
            })
            .collect()
    }

    fn c_vals(&self) -> Vals {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Psd { c, .. } => BlockValue::Psd(c.clone()),
                Block::Diag { c, .. } => BlockValue::Diag(c.clone()),
            })
            .collect()
    }

    fn inner(a: &Vals, b: &Vals) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| match (x, y) {
                (BlockValue::Psd(x), BlockValue::Psd(y)) => frob_inner(x, y),
                (BlockValue::Diag(x), BlockValue::Diag(y)) => dot(x, y),
                _ => unreachable!(),
            })
            .sum()
    }

    fn initial_point(&self) -> (Vals, Vec<f64>, Vals) {
        let mut x = Vec::new();
        let mut z = Vec::new();
        for blk in &self.blocks {
            let (n, anorm_max, cnorm, b_ratio) = match blk {
                Block::Psd { n, cons, c } => {
                    let an: Vec<(usize, f64)> = cons
                        .iter()
                        .map(|con| (con.k, con.entries.iter().map(|e| if e.0 == e.1 { e.2 * e.2 } else { 2.0 * e.2 * e.2 }).sum::<f64>().sqrt()))
                        .collect();
                    let amax = an.iter().map(|a| a.1).fold(0.0, f64::max);
                    let ratio = an.iter().map(|&(k, a)| (1.0 + self.b[k].abs()) / (1.0 + a)).fold(0.0, f64::max);
                    (*n, amax, frob_inner(c, c).sqrt(), ratio)
                }
                Block::Diag { n, cols, c } => {
                    let mut an = vec![0.0f64; self.m];
                    for col in cols {
                        for &(k, w) in col {
                            an[k] += w * w;
                        }
                    }
                    let amax = an.iter().fold(0.0f64, |a, v| a.max(v.sqrt()));
                    let ratio = an
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| **a > 0.0)
                        .map(|(k, a)| (1.0 + self.b[k].abs()) / (1.0 + a.sqrt()))
                        .fold(0.0, f64::max);
                    (*n, amax, norm(c), ratio)
                }
            };
            let sn = (n as f64).sqrt();
            let xi = 10f64.max(sn).max(sn * b_ratio);
            let eta = 10f64.max(sn).max(anorm_max).max(cnorm);
            match blk {
                Block::Psd { .. } => {
                    x.push(BlockValue::Psd(Mat::from_fn(n, n, |i, j| if i == j { xi } else { 0.0 })));
                    z.push(BlockValue::Psd(Mat::from_fn(n, n, |i, j| if i == j { eta } else { 0.0 })));
                }
                Block::Diag { .. } => {
                    x.push(BlockValue::Diag(vec![xi; n]));
                    z.push(BlockValue::Diag(vec![eta; n]));
                }
            }
        }
        (x, vec![0.0; self.m], z)
    }

    /// Schur complement `M_ij = ⟨A_i, X A_j Z⁻¹⟩`.
    fn schur(&self, x: &Vals, zinv: &Vals) -> Mat<f64> {
        let mut mm = Mat::<f64>::zeros(self.m, self.m);
        for (blk, (xv, ziv)) in self.blocks.iter().zip(x.iter().zip(zinv)) {
            match (blk, xv, ziv) {
                (Block::Psd { n, cons, .. }, BlockValue::Psd(xm), BlockValue::Psd(zi)) => {
                    let n = *n;
                    let mut p = Mat::<f64>::zeros(n, n);
                    for (jpos, cj) in cons.iter().enumerate() {
                        let r = cj.support.len();
                        let zr = Mat::from_fn(r, n, |a, b| zi[(cj.support[a], b)]);
                        let xr = Mat::from_fn(n, r, |a, b| xm[(a, cj.support[b])]);
                        let g = mat_mul(&cj.dense, &zr);
                        matmul(p.as_mut(), Accum::Replace, xr.as_ref(), g.as_ref(), 1.0, Par::Seq);
                        for ci in &cons[jpos..] {
                            let mut s = 0.0;
                            for &(a, b, w) in &ci.entries {
                                s += if a == b { w * p[(a, a)] } else { w * (p[(a, b)] + p[(b, a)]) };
                            }
                            mm[(ci.k, cj.k)] += s;
                            if ci.k != cj.k {
                                mm[(cj.k, ci.k)] += s;
                            }
                        }
                    }
                }
                (Block::Diag { cols, .. }, BlockValue::Diag(xd), BlockValue::Diag(zd)) => {
                    for (l, col) in cols.iter().enumerate() {
                        let f = xd[l] * zd[l];
                        for &(ki, wi) in col {
                            for &(kj, wj) in col {
                                mm[(ki, kj)] += wi * wj * f;
                            }
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        mm
    }

    fn residuals(&self, x: &Vals, y: &[f64], z: &Vals) -> (Vec<f64>, Vals, f64, f64) {
        let ax = self.a_op(x);
        let rp: Vec<f64> = self.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = self.at_op(y);
        let c = self.c_vals();
        let rd: Vals = c
            .iter()
            .zip(z.iter().zip(&aty))
            .map(|(cv, (zv, av))| match (cv, zv, av) {
                (BlockValue::Psd(c), BlockValue::Psd(z), BlockValue::Psd(a)) => {
                    BlockValue::Psd(Mat::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)] + z[(i, j)] - a[(i, j)]))
                }
                (BlockValue::Diag(c), BlockValue::Diag(z), BlockValue::Diag(a)) => {
                    BlockValue::Diag((0..c.len()).map(|i| c[i] + z[i] - a[i]).collect())
                }
                _ => unreachable!(),
            })
            .collect();
        let pobj = Self::inner(&c, x);
        let dobj = dot(&self.b, y);
        (rp, rd, pobj, dobj)
    }

    fn measure(&self, rp: &[f64], rd: &Vals, pobj: f64, dobj: f64) -> Residuals {
        let rp_orig: Vec<f64> = rp.iter().zip(&self.scale).map(|(r, s)| r * s).collect();
        Residuals {
            primal_feas: norm(&rp_orig) / (1.0 + self.norm_b_orig),
            dual_feas: Self::inner(rd, rd).sqrt() / (1.0 + self.norm_c),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        }
    }

    fn unscale_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.scale).map(|(y, s)| y / s).collect()
    }

    fn run(&self, opts: &SolverOptions) -> Solution {
        let tol = opts.tol;
        let (mut x, mut y, mut z) = self.initial_point();
        let mut iterations = 0;
        let mut stalls = 0;
        let mut message = String::new();
        let near = |r: &Residuals| r.primal_feas.max(r.dual_feas).max(r.gap) <= 1e3 * tol;
        let scale_ref = 1.0 + self.norm_b_orig + self.norm_c;
        let mut best: Option<(f64, Vals, Vec<f64>, Vals)> = None;

        let status = loop {
            let (rp, rd, pobj, dobj) = self.residuals(&x, &y, &z);
            let res = self.measure(&rp, &rd, pobj, dobj);
            let merit = res.primal_feas.max(res.dual_feas).max(res.gap);
            if best.as_ref().is_none_or(|b| merit < b.0) {
                best = Some((merit, x.clone(), y.clone(), z.clone()));
            }
            if merit <= tol {
                break Status::Optimal;
            }
            if iterations >= opts.max_iter {
                message = "iteration limit reached".into();
                break Status::NumericalFailure;
            }
            if pobj.abs().max(dobj.abs()) > 1e10 * scale_ref || Self::inner(&x, &x).sqrt() > 1e12 * scale_ref {
                message = "iterates diverged".into();
                if best.as_ref().is_some_and(|b| b.0 <= 1e3 * tol) {
                    break Status::NumericalFailure;
                }
                break Status::InfeasibleOrUnbounded;
            }
            let mu = Self::inner(&x, &z) / self.nu;

            let mut zchol = Vec::new();
            let mut xchol = Vec::new();
            let mut zinv = Vec::new();
            let mut ok = true;
            for (xv, zv) in x.iter().zip(&z) {
                match (xv, zv) {
                    (BlockValue::Psd(xm), BlockValue::Psd(zm)) => match (xm.llt(Side::Lower), zm.llt(Side::Lower)) {
                        (Ok(lx), Ok(lz)) => {
                            zinv.push(BlockValue::Psd(sym(&lz.inverse())));
                            xchol.push(Some(lx.L().to_owned()));
                            zchol.push(Some(lz.L().to_owned()));
                        }
                        _ => {
                            ok = false;
                            break;
                        }
                    },
                    (BlockValue::Diag(_), BlockValue::Diag(zd)) => {
                        zinv.push(BlockValue::Diag(zd.iter().map(|v| 1.0 / v).collect()));
                        xchol.push(None);
                        zchol.push(None);
                    }
                    _ => unreachable!(),
                }
            }
            if !ok {
                message = "lost positive definiteness".into();
                break Status::NumericalFailure;
            }

            let mut mm = self.schur(&x, &zinv);
            let maxdiag = (0..self.m).map(|i| mm[(i, i)]).fold(0.0f64, f64::max).max(1e-300);
            let mut fact = None;
            for reg in [0.0, 1e-14, 1e-12, 1e-10, 1e-8] {
                if reg > 0.0 {
                    for i in 0..self.m {
                        mm[(i, i)] += reg * maxdiag;
                    }
                }
                if let Ok(f) = mm.llt(Side::Lower) {
                    fact = Some(f);
                    break;
                }
            }
            let Some(fact) = fact else {
                message = "Schur complement is singular".into();
                break Status::NumericalFailure;
            };

            // X·Rd·Z⁻¹ is shared by both directions.
            let xrdz: Vals = x
                .iter()
                .zip(rd.iter().zip(&zinv))
                .map(|(xv, (rv, zv))| match (xv, rv, zv) {
                    (BlockValue::Psd(x), BlockValue::Psd(r), BlockValue::Psd(zi)) => BlockValue::Psd(mat_mul(&mat_mul(x, r), zi)),
                    (BlockValue::Diag(x), BlockValue::Diag(r), BlockValue::Diag(zi)) => {
                        BlockValue::Diag((0..x.len()).map(|i| x[i] * r[i] * zi[i]).collect())
                    }
                    _ => unreachable!(),
                })
                .collect();

            let direction = |sigma: f64, corr: Option<(&Vals, &Vals)>| -> (Vals, Vec<f64>, Vals) {
                let rhs_mat: Vals = (0..x.len())
                    .map(|b| match (&zinv[b], &xrdz[b]) {
                        (BlockValue::Psd(zi), BlockValue::Psd(xr)) => {
                            let mut t = Mat::from_fn(zi.nrows(), zi.ncols(), |i, j| sigma * mu * zi[(i, j)] + xr[(i, j)]);
                            if let Some((dxp, dzp)) = corr {
                                if let (BlockValue::Psd(a), BlockValue::Psd(bz)) = (&dxp[b], &dzp[b]) {
                                    let q = mat_mul(&mat_mul(a, bz), zi);
                                    t = Mat::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] - q[(i, j)]);
                                }
                            }
                            BlockValue::Psd(t)
                        }
                        (BlockValue::Diag(zi), BlockValue::Diag(xr)) => {
                            let mut t: Vec<f64> = (0..zi.len()).map(|i| sigma * mu * zi[i] + xr[i]).collect();
                            if let Some((dxp, dzp)) = corr {
                                if let (BlockValue::Diag(a), BlockValue::Diag(bz)) = (&dxp[b], &dzp[b]) {
                                    for i in 0..t.len() {
                                        t[i] -= a[i] * bz[i] * zi[i];
                                    }
                                }
                            }
                            BlockValue::Diag(t)
                        }
                        _ => unreachable!(),
                    })
                    .collect();
                let mut rhs = self.a_op(&rhs_mat);
                for (r, b) in rhs.iter_mut().zip(&self.b) {
                    *r -= b;
                }
                let rhs_m = Mat::from_fn(self.m, 1, |i, _| rhs[i]);
                let sol = fact.solve(&rhs_m);
                let dy: Vec<f64> = (0..self.m).map(|i| sol[(i, 0)]).collect();
                let atdy = self.at_op(&dy);
                let mut dz = Vec::with_capacity(x.len());
                let mut dx = Vec::with_capacity(x.len());
                for b in 0..x.len() {
                    match (&atdy[b], &rd[b], &x[b], &zinv[b]) {
                        (BlockValue::Psd(a), BlockValue::Psd(r), BlockValue::Psd(xm), BlockValue::Psd(zi)) => {
                            let dzb = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - r[(i, j)]);
                            let mut t = mat_mul(xm, &dzb);
                            if let Some((dxp, dzp)) = corr {
                                if let (BlockValue::Psd(p), BlockValue::Psd(q)) = (&dxp[b], &dzp[b]) {
                                    let pq = mat_mul(p, q);
                                    t = Mat::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] + pq[(i, j)]);
                                }
                            }
                            let t = mat_mul(&t, zi);
                            let dxb = Mat::from_fn(t.nrows(), t.ncols(), |i, j| {
                                sigma * mu * zi[(i, j)] - xm[(i, j)] - 0.5 * (t[(i, j)] + t[(j, i)])
                            });
                            dz.push(BlockValue::Psd(dzb));
                            dx.push(BlockValue::Psd(dxb));
                        }
                        (BlockValue::Diag(a), BlockValue::Diag(r), BlockValue::Diag(xd), BlockValue::Diag(zi)) => {
                            let dzb: Vec<f64> = (0..a.len()).map(|i| a[i] - r[i]).collect();
                            let dxb: Vec<f64> = (0..a.len())
                                .map(|i| {
                                    let mut t = xd[i] * dzb[i];
                                    if let Some((dxp, dzp)) = corr {
                                        if let (BlockValue::Diag(p), BlockValue::Diag(q)) = (&dxp[b], &dzp[b]) {
                                            t += p[i] * q[i];
                                        }
                                    }
                                    sigma * mu * zi[i] - xd[i] - t * zi[i]
                                })
                                .collect();
                            dz.push(BlockValue::Diag(dzb));
                            dx.push(BlockValue::Diag(dxb));
                        }
                        _ => unreachable!(),
                    }
                }
                (dx, dy, dz)
            };

            let steps = |dx: &Vals, dz: &Vals| -> (f64, f64) {
                let mut ap = f64::INFINITY;
                let mut ad = f64::INFINITY;
                for b in 0..x.len() {
                    match (&dx[b], &dz[b], &x[b], &z[b]) {
                        (BlockValue::Psd(dxm), BlockValue::Psd(dzm), _, _) => {
                            ap = ap.min(max_step_psd(xchol[b].as_ref().unwrap().as_ref(), dxm));
                            ad = ad.min(max_step_psd(zchol[b].as_ref().unwrap().as_ref(), dzm));
                        }
                        (BlockValue::Diag(dxd), BlockValue::Diag(dzd), BlockValue::Diag(xd), BlockValue::Diag(zd)) => {
                            for i in 0..dxd.len() {
                                if dxd[i] < 0.0 {
                                    ap = ap.min(-xd[i] / dxd[i]);
                                }
                                if dzd[i] < 0.0 {
                                    ad = ad.min(-zd[i] / dzd[i]);
                                }
                            }
                        }
                        _ => unreachable!(),
                    }
                }
                (ap, ad)
            };

            let (dxp, _, dzp) = direction(0.0, None);
            let (ap, ad) = steps(&dxp, &dzp);
            let (ap1, ad1) = (ap.min(1.0), ad.min(1.0));
            let xn = axpy(&x, ap1, &dxp);
            let zn = axpy(&z, ad1, &dzp);
            let ratio = (Self::inner(&xn, &zn) / (mu * self.nu)).max(0.0);
            let expon = if mu > 1e-6 { 1f64.max(3.0 * ap1.min(ad1).powi(2)) } else { 1.0 };
            let sigma = ratio.powf(expon).min(1.0);

            let (dx, dy, dz) = direction(sigma, Some((&dxp, &dzp)));
            let (ap, ad) = steps(&dx, &dz);
            let gamma = 0.9 + 0.09 * ap1.min(ad1);
            let ap = (gamma * ap).min(1.0);
            let ad = (gamma * ad).min(1.0);
            if ap < 1e-10 && ad < 1e-10 {
                stalls += 1;
                if stalls > 3 {
                    message = "step length collapsed".into();
                    break Status::NumericalFailure;
                }
            }
            x = axpy(&x, ap, &dx);
            z = axpy(&z, ad, &dz);
            for (yi, d) in y.iter_mut().zip(&dy) {
                *yi += ad * d;
            }
            iterations += 1;
        };

        let (mut x, mut y, mut z) = (x, y, z);
        let mut status = status;
        if status != Status::Optimal {
            if let Some((_, bx, by, bz)) = best {
                x = bx;
                y = by;
                z = bz;
            }
        }
        let (rp, rd, pobj, dobj) = self.residuals(&x, &y, &z);
        let residuals = self.measure(&rp, &rd, pobj, dobj);
        if status == Status::NumericalFailure && near(&residuals) {
            status = Status::NearOptimal;
        }
        Solution {
            status,
            x,
            y: self.unscale_y(&y),
            z,
            primal_obj: pobj,
            dual_obj: dobj,
            residuals,
            iterations,
            message,
        }
    }
}

fn axpy(x: &Vals, a: f64, d: &Vals) -> Vals {
    x.iter()
        .zip(d)
        .map(|(xv, dv)| match (xv, dv) {
            (BlockValue::Psd(x), BlockValue::Psd(d)) => {
                BlockValue::Psd(Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] + a * d[(i, j)]))
            }
            (BlockValue::Diag(x), BlockValue::Diag(d)) => BlockValue::Diag(x.iter().zip(d).map(|(x, d)| x + a * d).collect()),
            _ => unreachable!(),
        })
        .collect()
}

impl Solution {
    /// The objective reported as the optimal value (primal side).
    pub fn value(&self) -> f64 {
        self.primal_obj
    }
}

#[cfg(test)]
fn objective(p: &RealSDP, x: &[BlockValue]) -> f64 {
    RealSDP::apply(&p.c, x)
}
