//! Real reformulations of quaternion SDPs.
//!
//! The economical form replaces every quaternion block `H` of size `n` by a
//! real PSD block `X` of size `4n`, partitioned into 4×4 blocks `X_pq`, and
//! reads `H` back through the selectors
//!
//! ```text
//! R_X = X₁₁ + X₂₂ + X₃₃ + X₄₄
//! I_X = X₂₁ − X₂₁ᵀ + X₄₃ − X₄₃ᵀ
//! J_X = X₃₁ − X₃₁ᵀ − X₄₂ + X₄₂ᵀ
//! K_X = X₄₁ − X₄₁ᵀ + X₃₂ − X₃₂ᵀ
//! ```
//!
//! The naive form uses `Y = Λ(H)` directly and adds the linear equalities
//! that force the Λ block pattern.

use faer::Mat;

use crate::error::{Error, Result};
use crate::qsdp::{QEntry, QSDP};
use crate::quaternion::{HermitianQMatrix, QMatrix, Quaternion};
use crate::sdp::{BlockValue, Entry, RealSDP, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Naive,
    Economical,
}

/// Where a quaternion block lives in the real problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    /// A 1×1 real block stored as entry `index` of the diagonal block.
    Scalar { index: usize },
    /// A real symmetric `n×n` block.
    Real { blk: usize },
    /// A `4n×4n` block.
    Quaternion { blk: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizationMap {
    pub mode: Mode,
    pub placements: Vec<Placement>,
    pub dims: Vec<usize>,
    /// Index of the shared diagonal block, if any scalars exist.
    pub diag_blk: Option<usize>,
    /// For each quaternion constraint, the real rows of its `r, i, j, k` parts.
    pub rows: Vec<[Option<usize>; 4]>,
    /// Number of rows enforcing the Λ pattern (naive mode only).
    pub structure_rows: usize,
}

/// `(component, sign)` of each 4×4 block of `Λ(H)`.
const LAYOUT: [[(usize, f64); 4]; 4] = [
    [(0, 1.0), (1, -1.0), (2, -1.0), (3, -1.0)],
    [(1, 1.0), (0, 1.0), (3, -1.0), (2, 1.0)],
    [(2, 1.0), (3, 1.0), (0, 1.0), (1, -1.0)],
    [(3, 1.0), (2, -1.0), (1, 1.0), (0, 1.0)],
];

/// Matrix of left multiplication by `q` on `(r, i, j, k)` coordinates.
fn left_mul(q: Quaternion) -> [[f64; 4]; 4] {
    [
        [q.r, -q.i, -q.j, -q.k],
        [q.i, q.r, -q.k, q.j],
        [q.j, q.k, q.r, -q.i],
        [q.k, -q.j, q.i, q.r],
    ]
}

/// Real entries `(sign, row, col)` whose signed sum is component `d` of `H[a,b]`.
fn selector(mode: Mode, n: usize, d: usize, a: usize, b: usize) -> Vec<(f64, usize, usize)> {
    match mode {
        Mode::Naive => vec![(1.0, d * n + a, b)],
        Mode::Economical => {
            let blk = |p: usize, q: usize, x: usize, y: usize| (p * n + x, q * n + y);
            let pair = |s: f64, p: usize, q: usize| {
                let (r1, c1) = blk(p, q, a, b);
                let (r2, c2) = blk(p, q, b, a);
                [(s, r1, c1), (-s, r2, c2)]
            };
            match d {
                0 => (0..4).map(|p| (1.0, p * n + a, p * n + b)).collect(),
                1 => [pair(1.0, 1, 0), pair(1.0, 3, 2)].concat(),
                2 => [pair(1.0, 2, 0), pair(-1.0, 3, 1)].concat(),
                _ => [pair(1.0, 3, 0), pair(1.0, 2, 1)].concat(),
            }
        }
    }
}

struct Realizer<'a> {
    q: &'a QSDP,
    mode: Mode,
    placements: Vec<Placement>,
    diag_blk: Option<usize>,
}

impl Realizer<'_> {
    /// Adds `coef · (component d of H_block[a,b])` to `out`.
    fn push_component(&self, out: &mut Vec<Entry>, block: usize, d: usize, a: usize, b: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let n = self.q.blocks[block].dim;
        let mut add = |blk: usize, r: usize, c: usize, v: f64| {
            if r == c {
                out.push(Entry::new(blk, r, r, v));
            } else {
                out.push(Entry::new(blk, r, c, 0.5 * v));
            }
        };
        match self.placements[block] {
            Placement::Scalar { index } => {
                if d == 0 {
                    add(self.diag_blk.expect("diagonal block"), index, index, coef);
                }
            }
            Placement::Real { blk } => {
                if d == 0 {
                    add(blk, a, b, coef);
                }
            }
            Placement::Quaternion { blk } => {
                for (s, r, c) in selector(self.mode, n, d, a, b) {
                    add(blk, r, c, s * coef);
                }
            }
        }
    }

    /// Real functionals for the four components of `⟨A, H⟩`.
    fn functionals(&self, entries: &[QEntry]) -> [Vec<Entry>; 4] {
        let mut out: [Vec<Entry>; 4] = Default::default();
        for e in entries {
            let t = left_mul(e.coef.conj());
            for (c, row) in t.iter().enumerate() {
                for (d, &v) in row.iter().enumerate() {
                    self.push_component(&mut out[c], e.block, d, e.row, e.col, v);
                }
            }
        }
        out.map(prune)
    }
}

/// Merges duplicates and drops coefficients that cancelled to roundoff.
fn prune(es: Vec<Entry>) -> Vec<Entry> {
    let es = crate::sdp::model::canonical_entries(es);
    let max = es.iter().fold(0.0f64, |m, e| m.max(e.v.abs()));
    es.into_iter().filter(|e| e.v.abs() > 1e-14 * max).collect()
}

fn realize(q: &QSDP, mode: Mode) -> Result<(RealSDP, RealizationMap)> {
    q.check_dims()?;
    let mut block_struct = Vec::new();
    let mut placements = Vec::new();
    let mut scalars = 0;
    for b in &q.blocks {
        if b.dim == 1 && b.real {
            placements.push(Placement::Scalar { index: scalars });
            scalars += 1;
        } else if b.real {
            placements.push(Placement::Real { blk: block_struct.len() });
            block_struct.push(b.dim as i64);
        } else {
            placements.push(Placement::Quaternion { blk: block_struct.len() });
            block_struct.push(4 * b.dim as i64);
        }
    }
    let diag_blk = (scalars > 0).then(|| {
        block_struct.push(-(scalars as i64));
        block_struct.len() - 1
    });
    let r = Realizer { q, mode, placements, diag_blk };

    let mut a = Vec::new();
    let mut rhs = Vec::new();
    let mut rows = Vec::new();
    for con in &q.constraints {
        let f = r.functionals(&con.entries);
        let mut idx = [None; 4];
        for (c, row) in f.into_iter().enumerate() {
            let b = con.rhs.component(c);
            if row.is_empty() {
                if b.abs() > 1e-12 * (1.0 + con.rhs.abs()) {
                    return Err(Error::Unsupported(format!(
                        "constraint has a zero left-hand side but right-hand side component {b}"
                    )));
                }
                continue;
            }
            idx[c] = Some(a.len());
            a.push(row);
            rhs.push(b);
        }
        rows.push(idx);
    }
    let objective = r.functionals(&q.objective)[0].clone();

    let mut structure_rows = 0;
    if mode == Mode::Naive {
        for (t, b) in q.blocks.iter().enumerate() {
            let Placement::Quaternion { blk } = r.placements[t] else { continue };
            let n = b.dim;
            let mut eq = |terms: &[(f64, usize, usize)]| {
                let row: Vec<Entry> = terms
                    .iter()
                    .map(|&(s, i, j)| if i == j { Entry::new(blk, i, i, s) } else { Entry::new(blk, i, j, 0.5 * s) })
                    .collect();
                a.push(crate::sdp::model::canonical_entries(row));
                rhs.push(0.0);
                structure_rows += 1;
            };
            // The I, J, K parts read from block column 1 are skew.
            for c in 1..4 {
                for x in 0..n {
                    for y in x..n {
                        eq(&[(1.0, c * n + x, y), (1.0, c * n + y, x)]);
                    }
                }
            }
            // Diagonal blocks repeat H_R.
            for p in 1..4 {
                for x in 0..n {
                    for y in x..n {
                        eq(&[(1.0, p * n + x, p * n + y), (-1.0, x, y)]);
                    }
                }
            }
            // Upper off-diagonal blocks outside block column 1.
            for p in 1..4 {
                for qq in (p + 1)..4 {
                    let (comp, sign) = LAYOUT[p][qq];
                    for x in 0..n {
                        for y in 0..n {
                            eq(&[(1.0, p * n + x, qq * n + y), (-sign, comp * n + x, y)]);
                        }
                    }
                }
            }
        }
    }

    let dims = q.blocks.iter().map(|b| b.dim).collect();
    let sdp = RealSDP::new(block_struct, objective, a, rhs)?;
    Ok((sdp, RealizationMap { mode, placements: r.placements, dims, diag_blk, rows, structure_rows }))
}

/// The selector-based reformulation without auxiliary equalities.
pub fn to_real_economical(q: &QSDP) -> Result<(RealSDP, RealizationMap)> {
    realize(q, Mode::Economical)
}

/// The `Y = Λ(H)` reformulation with explicit structure equalities.
pub fn to_real_naive(q: &QSDP) -> Result<(RealSDP, RealizationMap)> {
    realize(q, Mode::Naive)
}

/// Quaternion block values `H` from real block values.
pub fn recover_blocks(x: &[BlockValue], map: &RealizationMap) -> Result<Vec<HermitianQMatrix>> {
    let mut out = Vec::with_capacity(map.dims.len());
    for (t, &n) in map.dims.iter().enumerate() {
        let h = match map.placements[t] {
            Placement::Scalar { index } => {
                let d = x[map.diag_blk.expect("diagonal block")].get(index, index);
                QMatrix::from_fn(1, 1, |_, _| Quaternion::real(d))
            }
            Placement::Real { blk } => QMatrix::from_fn(n, n, |a, b| Quaternion::real(x[blk].get(a, b))),
            Placement::Quaternion { blk } => {
                let xb = x[blk].psd().ok_or_else(|| Error::Solution("expected a PSD block".into()))?;
                QMatrix::from_fn(n, n, |a, b| {
                    let mut c = [0.0; 4];
                    for (d, cd) in c.iter_mut().enumerate() {
                        *cd = selector(map.mode, n, d, a, b).iter().map(|&(s, r, k)| s * xb[(r, k)]).sum();
                    }
                    Quaternion::from_array(c)
                })
            }
        };
        let scale = 1.0 + h.norm();
        let res = h.hermitian_residual();
        if res > 1e-4 * scale {
            return Err(Error::Solution(format!("recovered block {t} is not Hermitian (residual {res:.3e})")));
        }
        out.push(crate::quaternion::hermitian_part(&h)?);
    }
    Ok(out)
}

/// `H*` for every quaternion block of a solved realization.
pub fn recover_quaternion(sol: &Solution, map: &RealizationMap) -> Result<Vec<HermitianQMatrix>> {
    recover_blocks(&sol.x, map)
}

/// Quaternion multipliers `z_u` recombined from the real dual vector.
pub fn recover_multipliers(y: &[f64], map: &RealizationMap) -> Vec<Quaternion> {
    map.rows
        .iter()
        .map(|r| {
            let mut c = [0.0; 4];
            for (d, idx) in r.iter().enumerate() {
                if let Some(k) = idx {
                    c[d] = y[*k];
                }
            }
            Quaternion::from_array(c)
        })
        .collect()
}

/// Economical block `X = Λ(H)/4`, a point that recovers to `H`.
pub fn economical_point(h: &HermitianQMatrix) -> Result<Mat<f64>> {
    let l = crate::quaternion::lambda_embed(h.matrix())?;
    Ok(Mat::from_fn(l.nrows(), l.ncols(), |i, j| 0.25 * l[(i, j)]))
}
