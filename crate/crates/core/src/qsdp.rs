//! Standard-form quaternion semidefinite programs.
//!
//! ```text
//! maximize ℛ⟨C, H⟩  s.t.  ⟨A_u, H⟩ = b_u,  H = diag(H_1, …, H_N) ⪰ 0
//! ```
//!
//! with `⟨A, H⟩ = Tr(A*H)` and every `H_t` Hermitian.

use crate::error::{Error, Result};
use crate::quaternion::{hermitian_part, HermitianQMatrix, QMatrix, Quaternion};
use crate::words::Word;

/// What a block stands for in a relaxation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockRole {
    LambdaPlus,
    LambdaMinus,
    /// Gram matrix of the SOS part, one per clique.
    Gram { clique: usize },
    /// Multiplier of inequality constraint `i`.
    Ineq(usize),
    EqPlus(usize),
    EqMinus(usize),
    /// Extra Gram block over `q̄ᵢ·[q]_d`.
    Strengthen(usize),
    /// A block without relaxation meaning.
    Plain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QBlock {
    pub dim: usize,
    pub role: BlockRole,
    /// Entries are restricted to real numbers.
    pub real: bool,
    /// Monomials indexing the rows, when the block comes from a relaxation.
    pub basis: Vec<Word>,
}

impl QBlock {
    pub fn plain(dim: usize) -> Self {
        QBlock { dim, role: BlockRole::Plain, real: false, basis: vec![] }
    }
}

/// A coefficient `A[row, col]` of one block of a constraint matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub coef: Quaternion,
}

/// One quaternion equation `⟨A_u, H⟩ = b_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct QConstraint {
    /// Canonical word indexing the equation, for relaxations.
    pub word: Option<Word>,
    pub entries: Vec<QEntry>,
    pub rhs: Quaternion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QSDP {
    pub blocks: Vec<QBlock>,
    pub constraints: Vec<QConstraint>,
    pub objective: Vec<QEntry>,
}

impl QSDP {
    /// `⟨A, H⟩` for a sparse coefficient list.
    pub fn apply(entries: &[QEntry], h: &[HermitianQMatrix]) -> Quaternion {
        entries.iter().fold(Quaternion::ZERO, |acc, e| acc + e.coef.conj() * h[e.block][(e.row, e.col)])
    }

    pub fn objective_value(&self, h: &[HermitianQMatrix]) -> f64 {
        QSDP::apply(&self.objective, h).r
    }

    /// `‖𝒜(H) − b‖` over all equations.
    pub fn residual(&self, h: &[HermitianQMatrix]) -> f64 {
        self.constraints
            .iter()
            .map(|c| (QSDP::apply(&c.entries, h) - c.rhs).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_dims(&self) -> Result<()> {
        for (u, c) in self.constraints.iter().enumerate() {
            for e in c.entries.iter().chain(self.objective.iter()) {
                let Some(b) = self.blocks.get(e.block) else {
                    return Err(Error::Dimension(format!("constraint {u} references block {}", e.block)));
                };
                if e.row >= b.dim || e.col >= b.dim {
                    return Err(Error::Dimension(format!("constraint {u} entry outside block {}", e.block)));
                }
            }
        }
        Ok(())
    }

    /// `ℋ(Σᵤ A_u y_u)` for every block.
    pub fn adjoint_apply(&self, y: &[Quaternion]) -> Result<Vec<HermitianQMatrix>> {
        if y.len() != self.constraints.len() {
            return Err(Error::Dimension(format!("{} multipliers for {} constraints", y.len(), self.constraints.len())));
        }
        let mut acc: Vec<QMatrix> = self.blocks.iter().map(|b| QMatrix::zeros(b.dim, b.dim)).collect();
        for (c, yu) in self.constraints.iter().zip(y) {
            if yu.is_zero() {
                continue;
            }
            for e in &c.entries {
                acc[e.block][(e.row, e.col)] += e.coef * *yu;
            }
        }
        acc.iter().map(hermitian_part).collect()
    }

    /// Objective matrix blocks as Hermitian matrices.
    pub fn objective_blocks(&self) -> Vec<HermitianQMatrix> {
        let mut acc: Vec<QMatrix> = self.blocks.iter().map(|b| QMatrix::zeros(b.dim, b.dim)).collect();
        for e in &self.objective {
            acc[e.block][(e.row, e.col)] += e.coef;
        }
        acc.iter().map(|m| hermitian_part(m).expect("square")).collect()
    }

    /// Total number of quaternion coefficients stored in the constraints.
    pub fn nnz(&self) -> usize {
        self.constraints.iter().map(|c| c.entries.len()).sum()
    }
}

/// Adjoint-apply as a free function.
pub fn adjoint_apply(q: &QSDP, y: &[Quaternion]) -> Result<Vec<HermitianQMatrix>> {
    q.adjoint_apply(y)
}
