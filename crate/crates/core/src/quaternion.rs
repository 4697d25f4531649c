//! Quaternion scalars, dense quaternion matrices and the real Λ-embedding.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real quaternion `r + i𝐢 + j𝐣 + k𝐤`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub r: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(r: f64, i: f64, j: f64, k: f64) -> Self {
        Quaternion { r, i, j, k }
    }

    pub const fn real(r: f64) -> Self {
        Quaternion::new(r, 0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.r, self.i, self.j, self.k]
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.r, -self.i, -self.j, -self.k)
    }

    pub fn norm_sqr(self) -> f64 {
        self.r * self.r + self.i * self.i + self.j * self.j + self.k * self.k
    }

    pub fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.r * s, self.i * s, self.j * s, self.k * s)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self) -> Option<Self> {
        let n = self.norm_sqr();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    /// Largest magnitude among the three imaginary components.
    pub fn imag_abs(self) -> f64 {
        (self.i * self.i + self.j * self.j + self.k * self.k).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self == Quaternion::ZERO
    }

    /// Component `c` with `0 = r, 1 = i, 2 = j, 3 = k`.
    pub fn component(self, c: usize) -> f64 {
        self.to_array()[c]
    }
}

/// The full quaternion product `a·b`.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.r * b.r - a.i * b.i - a.j * b.j - a.k * b.k,
        a.r * b.i + a.i * b.r + a.j * b.k - a.k * b.j,
        a.r * b.j - a.i * b.k + a.j * b.r + a.k * b.i,
        a.r * b.k + a.i * b.j - a.j * b.i + a.k * b.r,
    )
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r + o.r, self.i + o.i, self.j + o.j, self.k + o.k)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r - o.r, self.i - o.i, self.j - o.j, self.k - o.k)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        qmul(self, o)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

impl From<f64> for Quaternion {
    fn from(r: f64) -> Self {
        Quaternion::real(r)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.r)?;
        for (v, u) in [(self.i, "i"), (self.j, "j"), (self.k, "k")] {
            if v != 0.0 {
                let sign = if v < 0.0 { '-' } else { '+' };
                write!(f, " {sign} {}{u}", v.abs())?;
            }
        }
        Ok(())
    }
}

/// Real inner product `ℛ(u*v)` of two quaternion vectors.
pub fn inner_real(u: &[Quaternion], v: &[Quaternion]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.r * b.r + a.i * b.i + a.j * b.j + a.k * b.k)
        .sum()
}

/// Quaternion inner product `u*v`.
pub fn inner(u: &[Quaternion], v: &[Quaternion]) -> Quaternion {
    u.iter().zip(v).fold(Quaternion::ZERO, |acc, (a, b)| acc + a.conj() * *b)
}

pub fn vec_norm(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense row-major quaternion matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        QMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(QMatrix { rows, cols, data })
    }

    /// Real matrix promoted to a quaternion matrix.
    pub fn from_real(m: &Mat<f64>) -> Self {
        QMatrix::from_fn(m.nrows(), m.ncols(), |r, c| Quaternion::real(m[(r, c)]))
    }

    /// Assembles `R + I𝐢 + J𝐣 + K𝐤` from four real parts.
    pub fn from_parts(parts: [&Mat<f64>; 4]) -> Self {
        let (rows, cols) = (parts[0].nrows(), parts[0].ncols());
        QMatrix::from_fn(rows, cols, |r, c| {
            Quaternion::new(parts[0][(r, c)], parts[1][(r, c)], parts[2][(r, c)], parts[3][(r, c)])
        })
    }

    /// Real component matrix (`0 = R, 1 = I, 2 = J, 3 = K`).
    pub fn part(&self, c: usize) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |r, k| self[(r, k)].component(c))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Quaternion] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose `A*`.
    pub fn adjoint(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Plain transpose `Aᵀ`.
    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    pub fn matmul(&self, o: &QMatrix) -> Result<QMatrix> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = QMatrix::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    out[(r, c)] += a * o[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Quaternion]) -> Result<Vec<Quaternion>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).fold(Quaternion::ZERO, |acc, (a, b)| acc + *a * *b))
            .collect())
    }

    fn zip_with(&self, o: &QMatrix, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> Result<QMatrix> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let data = self.data.iter().zip(&o.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(QMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, o: &QMatrix) -> Result<QMatrix> {
        self.zip_with(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &QMatrix) -> Result<QMatrix> {
        self.zip_with(o, |a, b| a - b)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `A − A*`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                s += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn trace(&self) -> Quaternion {
        (0..self.rows.min(self.cols)).fold(Quaternion::ZERO, |acc, i| acc + self[(i, i)])
    }

    /// Outer product `u v*`.
    pub fn outer(u: &[Quaternion], v: &[Quaternion]) -> QMatrix {
        QMatrix::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        &mut self.data[r * self.cols + c]
    }
}

/// Trace inner product `⟨A,B⟩ = Tr(A*B)`.
pub fn trace_inner(a: &QMatrix, b: &QMatrix) -> Result<Quaternion> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Dimension("trace inner product of differently sized matrices".into()));
    }
    Ok(a.data.iter().zip(&b.data).fold(Quaternion::ZERO, |acc, (x, y)| acc + x.conj() * *y))
}

/// Real trace inner product `ℛ Tr(A*B)`.
pub fn trace_inner_real(a: &QMatrix, b: &QMatrix) -> Result<f64> {
    Ok(trace_inner(a, b)?.r)
}

/// A quaternion matrix known to equal its conjugate transpose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianQMatrix(QMatrix);

impl HermitianQMatrix {
    /// Accepts `m` when `‖m − m*‖ ≤ tol·(1+‖m‖)` and stores its Hermitian part.
    pub fn new(m: QMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        let residual = m.hermitian_residual();
        if residual > tol * (1.0 + m.norm()) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(hermitian_part(&m)?)
    }

    pub fn identity(n: usize) -> Self {
        HermitianQMatrix(QMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianQMatrix(QMatrix::zeros(n, n))
    }

    pub fn from_real_symmetric(m: &Mat<f64>) -> Result<Self> {
        HermitianQMatrix::new(QMatrix::from_real(m), 1e-12)
    }

    /// Diagonal matrix with the given real entries.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = QMatrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Quaternion::real(*v);
        }
        HermitianQMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> QMatrix {
        self.0
    }

    /// Real quadratic form `v*Hv`.
    pub fn quad_form(&self, v: &[Quaternion]) -> Result<f64> {
        let hv = self.0.mul_vec(v)?;
        Ok(inner_real(v, &hv))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let e = eig_hermitian(self, tol)?;
        Ok(e.values.first().map_or(true, |v| *v >= -tol))
    }
}

impl Index<(usize, usize)> for HermitianQMatrix {
    type Output = Quaternion;
    fn index(&self, idx: (usize, usize)) -> &Quaternion {
        &self.0[idx]
    }
}

/// `ℋ(A) = ½(A + A*)`.
pub fn hermitian_part(a: &QMatrix) -> Result<HermitianQMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let mut h = QMatrix::from_fn(a.rows, a.cols, |r, c| (a[(r, c)] + a[(c, r)].conj()).scale(0.5));
    for i in 0..a.rows {
        let d = h[(i, i)].r;
        h[(i, i)] = Quaternion::real(d);
    }
    Ok(HermitianQMatrix(h))
}

/// The real `4n×4n` representation
/// `[[R,−I,−J,−K],[I,R,−K,J],[J,K,R,−I],[K,−J,I,R]]`.
pub fn lambda_embed(a: &QMatrix) -> Result<Mat<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    // (component, sign) for each of the 4×4 blocks.
    const LAYOUT: [[(usize, f64); 4]; 4] = [
        [(0, 1.0), (1, -1.0), (2, -1.0), (3, -1.0)],
        [(1, 1.0), (0, 1.0), (3, -1.0), (2, 1.0)],
        [(2, 1.0), (3, 1.0), (0, 1.0), (1, -1.0)],
        [(3, 1.0), (2, -1.0), (1, 1.0), (0, 1.0)],
    ];
    Ok(Mat::from_fn(4 * n, 4 * n, |r, c| {
        let (comp, sign) = LAYOUT[r / n][c / n];
        sign * a[(r % n, c % n)].component(comp)
    }))
}

/// Stacks `[v_R; v_I; v_J; v_K]`.
pub fn x_embed(v: &[Quaternion]) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; 4 * n];
    for (t, q) in v.iter().enumerate() {
        for c in 0..4 {
            out[c * n + t] = q.component(c);
        }
    }
    out
}

/// Inverse of [`x_embed`].
pub fn x_unembed(x: &[f64]) -> Result<Vec<Quaternion>> {
    if x.len() % 4 != 0 {
        return Err(Error::Dimension(format!("length {} is not a multiple of 4", x.len())));
    }
    let n = x.len() / 4;
    Ok((0..n).map(|t| Quaternion::new(x[t], x[n + t], x[2 * n + t], x[3 * n + t])).collect())
}

/// Spectral data of a Hermitian quaternion matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending real eigenvalues, one per quaternion dimension.
    pub values: Vec<f64>,
    /// Orthonormal quaternion eigenvectors, aligned with `values`.
    pub vectors: Vec<Vec<Quaternion>>,
}

/// Removes the components of `v` along the right-ℍ lines spanned by `basis`.
fn project_out(v: &mut [Quaternion], basis: &[Vec<Quaternion>]) {
    for u in basis {
        let c = inner(u, v);
        for (x, b) in v.iter_mut().zip(u) {
            *x -= *b * c;
        }
    }
}

/// Eigen-decomposition via the symmetric eigenproblem of `Λ(H)`.
///
/// `tol` bounds the accepted Hermitian residual of the input.
pub fn eig_hermitian(h: &HermitianQMatrix, tol: f64) -> Result<HermitianEigen> {
    let m = h.matrix();
    let residual = m.hermitian_residual();
    if residual > tol.max(1e-12) * (1.0 + m.norm()) {
        return Err(Error::NotHermitian { residual });
    }
    let n = h.dim();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: vec![] });
    }
    let lam = lambda_embed(m)?;
    let eig = lam
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solution(format!("eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let real_vals: Vec<f64> = (0..4 * n).map(|i| s[i]).collect();
    let radius = real_vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let gap = 1e-8 * (1.0 + radius);

    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < 4 * n {
        let mut end = start + 1;
        while end < 4 * n && real_vals[end] - real_vals[end - 1] <= gap {
            end += 1;
        }
        // Clusters shorter than a full quadruple can only come from roundoff;
        // absorb the rest of the quadruple.
        let size = end - start;
        let mult = size.div_ceil(4).min(n - values.len());
        let end = (start + 4 * mult).min(4 * n).max(end);
        let mean = real_vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        let mut chosen: Vec<Vec<Quaternion>> = Vec::new();
        let mut candidates: Vec<Vec<Quaternion>> = (start..end)
            .map(|c| x_unembed(&(0..4 * n).map(|r| u[(r, c)]).collect::<Vec<_>>()).unwrap())
            .collect();
        while chosen.len() < mult {
            for cand in candidates.iter_mut() {
                project_out(cand, &chosen);
            }
            let best = candidates
                .iter()
                .enumerate()
                .max_by(|a, b| vec_norm(a.1).total_cmp(&vec_norm(b.1)))
                .map(|(i, _)| i)
                .expect("nonempty cluster");
            let v = candidates.swap_remove(best);
            let nv = vec_norm(&v);
            chosen.push(v.iter().map(|q| q.scale(1.0 / nv)).collect());
        }
        for v in chosen {
            values.push(mean);
            vectors.push(v);
        }
        start = end;
    }
    Ok(HermitianEigen { values, vectors })
}

/// Factor a PSD Hermitian `G` as `C*C`; the rows of `C` are the vectors of a
/// sum-of-squares decomposition.
pub fn gram_factorize(g: &HermitianQMatrix, tol: f64) -> Result<QMatrix> {
    let e = eig_hermitian(g, tol)?;
    let n = g.dim();
    let scale = 1.0 + g.matrix().norm();
    if let Some(&min) = e.values.first() {
        if min < -tol * scale {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    let mut c = QMatrix::zeros(n, n);
    for (row, (lam, v)) in e.values.iter().zip(&e.vectors).enumerate() {
        let s = lam.max(0.0).sqrt();
        for col in 0..n {
            c[(row, col)] = v[col].conj().scale(s);
        }
    }
    Ok(c)
}
