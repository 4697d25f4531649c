use std::collections::BTreeMap;
use std::fmt;

use faer::Mat;

use crate::error::{Error, Result};

/// One stored coefficient of a symmetric block matrix, upper triangle
/// (`i ≤ j`), 0-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub blk: usize,
    pub i: usize,
    pub j: usize,
    pub v: f64,
}

impl Entry {
    pub fn new(blk: usize, i: usize, j: usize, v: f64) -> Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        Entry { blk, i, j, v }
    }

    fn key(&self) -> (usize, usize, usize) {
        (self.blk, self.i, self.j)
    }
}

/// `maximize ⟨C,X⟩ s.t. ⟨A_k,X⟩ = b_k, X ⪰ 0` over a block-diagonal `X`.
///
/// Positive entries of `block_struct` are PSD blocks, negative entries are
/// diagonal (nonnegative orthant) blocks of the absolute size.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSDP {
    pub block_struct: Vec<i64>,
    pub c: Vec<Entry>,
    pub a: Vec<Vec<Entry>>,
    pub b: Vec<f64>,
}

/// A single validation finding.
#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    /// Constraint index: 0 for the objective, `k+1` for constraint `k`.
    pub matrix: usize,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "matrix {}: {}", self.matrix, self.message)
    }
}

/// Sorts entries and merges duplicates, dropping exact zeros.
pub(crate) fn canonical_entries(mut es: Vec<Entry>) -> Vec<Entry> {
    for e in es.iter_mut() {
        *e = Entry::new(e.blk, e.i, e.j, e.v);
    }
    es.sort_by_key(|e| e.key());
    let mut out: Vec<Entry> = Vec::with_capacity(es.len());
    for e in es {
        match out.last_mut() {
            Some(last) if last.key() == e.key() => last.v += e.v,
            _ => out.push(e),
        }
    }
    out.retain(|e| e.v != 0.0);
    out
}

impl RealSDP {
    /// Builds a problem, canonicalizing every coefficient list.
    pub fn new(block_struct: Vec<i64>, c: Vec<Entry>, a: Vec<Vec<Entry>>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension(format!("{} constraint matrices but {} right-hand sides", a.len(), b.len())));
        }
        let p = RealSDP {
            block_struct,
            c: canonical_entries(c),
            a: a.into_iter().map(canonical_entries).collect(),
            b,
        };
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn block_dim(&self, blk: usize) -> usize {
        self.block_struct[blk].unsigned_abs() as usize
    }

    pub fn is_diag(&self, blk: usize) -> bool {
        self.block_struct[blk] < 0
    }

    /// Total PSD dimension plus the number of diagonal entries.
    pub fn cone_dim(&self) -> usize {
        self.block_struct.iter().map(|d| d.unsigned_abs() as usize).sum()
    }

    /// `⟨A,X⟩` for a coefficient list and block values.
    pub fn apply(entries: &[Entry], x: &[BlockValue]) -> f64 {
        entries
            .iter()
            .map(|e| match &x[e.blk] {
                BlockValue::Psd(m) => {
                    if e.i == e.j {
                        e.v * m[(e.i, e.i)]
                    } else {
                        e.v * (m[(e.i, e.j)] + m[(e.j, e.i)])
                    }
                }
                BlockValue::Diag(d) => e.v * d[e.i],
            })
            .sum()
    }

    /// Structural checks; an empty list means the problem is well formed.
    pub fn validate(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        let nb = self.block_struct.len();
        for (bi, d) in self.block_struct.iter().enumerate() {
            if *d == 0 {
                out.push(Finding { matrix: 0, message: format!("block {} has size 0", bi + 1) });
            }
        }
        for (k, b) in self.b.iter().enumerate() {
            if !b.is_finite() {
                out.push(Finding { matrix: k + 1, message: "right-hand side is not finite".into() });
            }
        }
        let mats = std::iter::once(&self.c).chain(self.a.iter());
        for (idx, es) in mats.enumerate() {
            let mut seen = BTreeMap::new();
            for e in es {
                let at = format!("(blk {}, {}, {})", e.blk + 1, e.i + 1, e.j + 1);
                if e.blk >= nb {
                    out.push(Finding { matrix: idx, message: format!("block index out of range at {at}") });
                    continue;
                }
                let dim = self.block_dim(e.blk);
                if e.i >= dim || e.j >= dim {
                    out.push(Finding { matrix: idx, message: format!("row/column out of range at {at}") });
                }
                if e.i > e.j {
                    out.push(Finding { matrix: idx, message: format!("lower-triangle entry at {at}") });
                }
                if self.is_diag(e.blk) && e.i != e.j {
                    out.push(Finding { matrix: idx, message: format!("off-diagonal entry in a diagonal block at {at}") });
                }
                if !e.v.is_finite() {
                    out.push(Finding { matrix: idx, message: format!("non-finite value at {at}") });
                }
                if seen.insert((e.blk, e.i.min(e.j), e.i.max(e.j)), ()).is_some() {
                    out.push(Finding { matrix: idx, message: format!("duplicate entry at {at}") });
                }
            }
            if idx > 0 && es.iter().all(|e| e.v == 0.0) {
                out.push(Finding { matrix: idx, message: "constraint matrix is zero".into() });
            }
        }
        out
    }
}

/// Value of one block of a primal or dual matrix variable.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Psd(Mat<f64>),
    Diag(Vec<f64>),
}

impl BlockValue {
    pub fn zeros_like(block_dim: i64) -> Self {
        let n = block_dim.unsigned_abs() as usize;
        if block_dim < 0 {
            BlockValue::Diag(vec![0.0; n])
        } else {
            BlockValue::Psd(Mat::zeros(n, n))
        }
    }

    pub fn psd(&self) -> Option<&Mat<f64>> {
        match self {
            BlockValue::Psd(m) => Some(m),
            BlockValue::Diag(_) => None,
        }
    }

    pub fn diag(&self) -> Option<&[f64]> {
        match self {
            BlockValue::Diag(d) => Some(d),
            BlockValue::Psd(_) => None,
        }
    }

    /// Entry `(i, j)`; off-diagonal entries of diagonal blocks are zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            BlockValue::Psd(m) => m[(i, j)],
            BlockValue::Diag(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> RealSDP {
        RealSDP::new(
            vec![2, -1],
            vec![Entry::new(0, 0, 0, 1.0), Entry::new(1, 0, 0, -1.0)],
            vec![vec![Entry::new(0, 0, 1, 1.0), Entry::new(1, 0, 0, 2.0)]],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn well_formed_problem_has_no_findings() {
        assert!(toy().validate().is_empty());
    }

    #[test]
    fn out_of_range_block_is_reported() {
        let mut p = toy();
        p.a[0].push(Entry { blk: 5, i: 0, j: 0, v: 1.0 });
        let f = p.validate();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].matrix, 1);
        assert!(f[0].message.contains("blk 6"));
    }

    #[test]
    fn duplicate_entry_is_reported() {
        let mut p = toy();
        p.c.push(Entry::new(0, 0, 0, 3.0));
        let f = p.validate();
        assert!(f.iter().any(|x| x.matrix == 0 && x.message.contains("duplicate")));
    }

    #[test]
    fn zero_row_and_storage_discipline_are_reported() {
        let mut p = toy();
        p.a.push(vec![]);
        p.b.push(0.0);
        p.a[0].push(Entry { blk: 0, i: 1, j: 0, v: 1.0 });
        p.a[0].push(Entry { blk: 1, i: 0, j: 1, v: 1.0 });
        let msgs: Vec<String> = p.validate().iter().map(|f| f.to_string()).collect();
        assert!(msgs.iter().any(|m| m.contains("zero")));
        assert!(msgs.iter().any(|m| m.contains("lower-triangle")));
        assert!(msgs.iter().any(|m| m.contains("off-diagonal")));
    }

    #[test]
    fn canonicalization_merges_and_sorts() {
        let es = canonical_entries(vec![
            Entry { blk: 1, i: 0, j: 0, v: 1.0 },
            Entry { blk: 0, i: 1, j: 0, v: 2.0 },
            Entry { blk: 0, i: 0, j: 1, v: 3.0 },
            Entry { blk: 0, i: 0, j: 0, v: 0.0 },
        ]);
        assert_eq!(es, vec![Entry::new(0, 0, 1, 5.0), Entry::new(1, 0, 0, 1.0)]);
    }
}
