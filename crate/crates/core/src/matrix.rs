//! Dense symmetric matrix algebra on small square matrices.
//!
//! Everything here works on row-major `p × p` storage. The SPD wrapper
//! enforces exact symmetry at construction and rejects matrices whose
//! Cholesky pivots fall below `p · ε · max|a_ii|`.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 50;
/// Off-diagonal Frobenius norm (relative to `‖a‖_F`) at which Jacobi stops.
pub const JACOBI_REL_TOL: f64 = 1e-12;

/// Square row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.dim, other.dim)?;
        let p = self.dim;
        let mut out = Matrix::zeros(p);
        for i in 0..p {
            for k in 0..p {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..p {
                    out.data[i * p + j] += a * other.data[k * p + j];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Replaces the matrix by `(M + M′)/2` with exactly mirrored entries.
    pub fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for j in 0..i {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// `g · self · g′` for an arbitrary square `g`.
    pub fn congruence_by(&self, g: &Matrix) -> Result<Matrix> {
        g.matmul(self)?.matmul(&g.transpose())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Symmetric positive definite matrix.
#[derive(Clone, PartialEq, Serialize)]
pub struct SpdMatrix(Matrix);

impl SpdMatrix {
    /// Symmetrizes `m` and verifies positive definiteness through Cholesky.
    pub fn new(mut m: Matrix) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        m.symmetrize();
        cholesky_raw(&m)?;
        Ok(SpdMatrix(m))
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix(Matrix::identity(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(diag))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn scale(&self, c: f64) -> Result<SpdMatrix> {
        if !(c > 0.0) {
            return Err(Error::domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(SpdMatrix(self.0.scale(c)))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Determinant as the product of Iwasawa pivots.
    pub fn det(&self) -> f64 {
        cholesky_raw(&self.0)
            .map(|l| l.diagonal().iter().map(|d| d * d).product())
            .unwrap_or(0.0)
    }

    pub fn inverse(&self) -> Result<SpdMatrix> {
        let l = cholesky(self)?;
        let linv = l.inverse();
        SpdMatrix::new(linv.transpose().matmul(&linv)?)
    }
}

impl Index<(usize, usize)> for SpdMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Spd{:?}", self.0)
    }
}

/// Lower-triangular factor with a strictly positive diagonal.
#[derive(Clone, PartialEq, Serialize)]
pub struct LowerTriangular(Matrix);

impl LowerTriangular {
    /// Validates shape and positivity of the diagonal.
    pub fn new(m: Matrix) -> Result<Self> {
        let p = m.dim();
        for i in 0..p {
            for j in (i + 1)..p {
                if m[(i, j)] != 0.0 {
                    return Err(Error::domain(format!(
                        "entry ({i},{j}) above the diagonal is nonzero"
                    )));
                }
            }
            if !(m[(i, i)] > 0.0) {
                return Err(Error::domain(format!("diagonal entry {i} is not positive")));
            }
        }
        Ok(LowerTriangular(m))
    }

    pub(crate) fn from_trusted(m: Matrix) -> Self {
        debug_assert!((0..m.dim()).all(|i| m[(i, i)] > 0.0));
        LowerTriangular(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }

    /// `T T′`.
    pub fn gram(&self) -> Matrix {
        let p = self.dim();
        let t = &self.0;
        let mut out = Matrix::zeros(p);
        for i in 0..p {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..=j {
                    s += t[(i, k)] * t[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// `T T′` wrapped as SPD; the product of a positive-diagonal triangular factor is
    /// always SPD in exact arithmetic, the check guards against underflow.
    pub fn gram_spd(&self) -> Result<SpdMatrix> {
        SpdMatrix::new(self.gram())
    }

    /// Product of two lower-triangular factors.
    pub fn mul(&self, other: &LowerTriangular) -> LowerTriangular {
        let p = self.dim();
        let mut out = Matrix::zeros(p);
        for i in 0..p {
            for j in 0..=i {
                let mut s = 0.0;
                for k in j..=i {
                    s += self.0[(i, k)] * other.0[(k, j)];
                }
                out[(i, j)] = s;
            }
        }
        LowerTriangular(out)
    }

    /// Rescales row `i`'s diagonal entry by `factors[i]`, leaving the strict lower part alone.
    pub fn with_scaled_diagonal(&self, factors: &[f64]) -> Result<LowerTriangular> {
        check_dim(self.dim(), factors.len())?;
        let mut m = self.0.clone();
        for (i, &f) in factors.iter().enumerate() {
            if !(f > 0.0) {
                return Err(Error::domain(format!("diagonal factor {i} must be positive")));
            }
            m[(i, i)] *= f;
        }
        Ok(LowerTriangular(m))
    }

    /// Solves `T x = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim();
        let mut x = vec![0.0; p];
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.0[(i, k)] * x[k];
            }
            x[i] = s / self.0[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let p = self.dim();
        let mut inv = Matrix::zeros(p);
        let mut e = vec![0.0; p];
        for j in 0..p {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve_lower(&e);
            for i in 0..p {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

impl Index<(usize, usize)> for LowerTriangular {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for LowerTriangular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lower{:?}", self.0)
    }
}

fn pd_threshold(m: &Matrix) -> f64 {
    let max_diag = (0..m.dim()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    m.dim() as f64 * f64::EPSILON * max_diag
}

fn cholesky_raw(a: &Matrix) -> Result<Matrix> {
    let p = a.dim();
    let tol = pd_threshold(a);
    let mut l = Matrix::zeros(p);
    for j in 0..p {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..p {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Cholesky factor `T` with `a = T T′`.
pub fn cholesky(a: &SpdMatrix) -> Result<LowerTriangular> {
    cholesky_raw(a.matrix()).map(LowerTriangular)
}

/// Pivots and elimination vectors of the full Iwasawa (repeated Schur complement) reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IwasawaResult {
    /// `a_(k)11` for `k = 1..p`.
    pub pivots: Vec<f64>,
    /// `−A_(k)21 / a_(k)11`, of length `p − k` at step `k`.
    pub eliminations: Vec<Vec<f64>>,
}

impl IwasawaResult {
    /// Undoes the eliminations: `A_(k) = [[a, −a e′], [−a e, A_(k+1) + a e e′]]`.
    pub fn reconstruct(&self) -> Matrix {
        let p = self.pivots.len();
        let mut m = Matrix::zeros(p);
        for k in (0..p).rev() {
            let a = self.pivots[k];
            let e = &self.eliminations[k];
            m[(k, k)] = a;
            for (r, &er) in e.iter().enumerate() {
                let i = k + 1 + r;
                m[(i, k)] = -a * er;
                m[(k, i)] = -a * er;
                for (c, &ec) in e.iter().enumerate() {
                    let j = k + 1 + c;
                    m[(i, j)] += a * er * ec;
                }
            }
        }
        m
    }

    pub fn diagonal_matrix(&self) -> Result<SpdMatrix> {
        SpdMatrix::from_diagonal(&self.pivots)
    }
}

/// Reduces `a` to `Diag(a_(1)11, …, a_(p)11)` by successive Schur complements.
pub fn iwasawa_full(a: &SpdMatrix) -> Result<IwasawaResult> {
    let p = a.dim();
    let mut block: Vec<f64> = a.matrix().as_slice().to_vec();
    let mut size = p;
    let mut pivots = Vec::with_capacity(p);
    let mut eliminations = Vec::with_capacity(p);
    for k in 0..p {
        let a11 = block[0];
        if !(a11 > 0.0) {
            return Err(Error::NotPositiveDefinite { index: k, pivot: a11 });
        }
        let a21: Vec<f64> = (1..size).map(|i| block[i * size]).collect();
        let next = size - 1;
        let mut schur = vec![0.0; next * next];
        for i in 0..next {
            for j in 0..next {
                schur[i * next + j] = block[(i + 1) * size + (j + 1)] - a21[i] * a21[j] / a11;
            }
        }
        pivots.push(a11);
        eliminations.push(a21.iter().map(|x| -x / a11).collect());
        block = schur;
        size = next;
    }
    Ok(IwasawaResult {
        pivots,
        eliminations,
    })
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    /// `U diag(values) U′` with this decomposition's eigenvectors.
    pub fn recompose(&self, values: &[f64]) -> Result<Matrix> {
        let p = self.eigenvectors.dim();
        check_dim(p, values.len())?;
        let u = &self.eigenvectors;
        let mut out = Matrix::zeros(p);
        for i in 0..p {
            for j in 0..=i {
                let s: f64 = (0..p).map(|k| u[(i, k)] * values[k] * u[(j, k)]).sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        Ok(out)
    }
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
pub fn eigh(a: &SpdMatrix) -> Result<EigenDecomposition> {
    eigh_symmetric(a.matrix())
}

/// Jacobi on any symmetric matrix (only the lower triangle is trusted).
pub fn eigh_symmetric(a: &Matrix) -> Result<EigenDecomposition> {
    let p = a.dim();
    let mut m = a.clone();
    m.symmetrize();
    let mut v = Matrix::identity(p);
    let scale = m.frobenius_norm();
    let target = JACOBI_REL_TOL * scale;

    let off_norm = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..i {
                s += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= target || scale == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for q in 1..p {
            for r in 0..q {
                let apq = m[(r, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(r, r)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let mkr = m[(k, r)];
                    let mkq = m[(k, q)];
                    m[(k, r)] = c * mkr - s * mkq;
                    m[(k, q)] = s * mkr + c * mkq;
                }
                for k in 0..p {
                    let mrk = m[(r, k)];
                    let mqk = m[(q, k)];
                    m[(r, k)] = c * mrk - s * mqk;
                    m[(q, k)] = s * mrk + c * mqk;
                }
                m[(r, q)] = 0.0;
                m[(q, r)] = 0.0;
                for k in 0..p {
                    let vkr = v[(k, r)];
                    let vkq = v[(k, q)];
                    v[(k, r)] = c * vkr - s * vkq;
                    v[(k, q)] = s * vkr + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..p).collect();
    // stable: equal eigenvalues keep solver order
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let eigenvectors = Matrix::from_fn(p, |row, col| v[(row, order[col])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `g a g′`, re-symmetrized.
pub fn congruence(a: &SpdMatrix, g: &Matrix) -> Result<SpdMatrix> {
    check_dim(a.dim(), g.dim())?;
    SpdMatrix::new(a.matrix().congruence_by(g)?)
}

/// Eigenvalues of `Σ⁻¹ φ` (descending), computed as those of `L⁻¹ φ L⁻ᵀ` where `Σ = L L′`.
pub fn generalized_eigenvalues(sigma: &SpdMatrix, phi: &SpdMatrix) -> Result<Vec<f64>> {
    check_dim(sigma.dim(), phi.dim())?;
    let l = cholesky(sigma)?;
    let p = sigma.dim();
    // W = L⁻¹ φ, column by column; then M = W L⁻ᵀ = (L⁻¹ W′)′.
    let mut w = Matrix::zeros(p);
    let mut col = vec![0.0; p];
    for j in 0..p {
        for i in 0..p {
            col[i] = phi[(i, j)];
        }
        let x = l.solve_lower(&col);
        for i in 0..p {
            w[(i, j)] = x[i];
        }
    }
    let mut m = Matrix::zeros(p);
    for i in 0..p {
        let row: Vec<f64> = w.row(i).to_vec();
        let x = l.solve_lower(&row);
        for j in 0..p {
            m[(i, j)] = x[j];
        }
    }
    m.symmetrize();
    Ok(eigh_symmetric(&m)?.eigenvalues)
}
