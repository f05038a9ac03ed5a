//! Dense complex and real linear algebra for the small matrices that appear
//! in this crate (dimensions up to a few dozen).
//!
//! Complex numbers are `num_complex::Complex64`; serialized forms use
//! `[re, im]` pairs. Hermitian matrices are validated and symmetrized at
//! construction so that downstream code can rely on exact conjugate
//! symmetry.

pub mod dense;
mod eigen;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

pub use eigen::{eig_hermitian, eig_symmetric, is_psd, real_embedding, HermitianEigen};

pub type C64 = num_complex::Complex64;

/// Relative asymmetry accepted (and averaged away) by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// General dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return validation("matrix dimensions must be positive");
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return validation("at least one column is required");
        }
        let rows = columns[0].len();
        if columns.iter().any(|c| c.len() != rows) {
            return validation("columns have unequal lengths");
        }
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m.data[i * cols + j] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    m.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(m)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Complex Hermitian matrix `M = M†`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Validates conjugate symmetry and replaces `M` by `(M + M†)/2`.
    ///
    /// Asymmetry is measured entrywise relative to the larger magnitude of
    /// the two mirrored entries (and at least 1).
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return validation("Hermitian matrix dimension must be positive");
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return validation("matrix has non-finite entries");
        }
        let mut m = Self { dim, data };
        for j in 0..dim {
            for k in j..dim {
                let a = m.data[j * dim + k];
                let b = m.data[k * dim + j].conj();
                let scale = a.norm().max(b.norm()).max(1.0);
                if (a - b).norm() > HERMITIAN_TOL * scale {
                    return validation(format!(
                        "matrix is not Hermitian: entry ({j},{k}) = {a} vs conj of ({k},{j}) = {b}"
                    ));
                }
                let avg = (a + b) * 0.5;
                m.data[j * dim + k] = avg;
                m.data[k * dim + j] = avg.conj();
            }
        }
        Ok(m)
    }

    /// Builds a Hermitian matrix from its upper triangle; `f(j, k)` is only
    /// called for `j <= k` and the imaginary part of diagonal entries is dropped.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for j in 0..dim {
            data[j * dim + j] = C64::new(f(j, j).re, 0.0);
            for k in j + 1..dim {
                let v = f(j, k);
                data[j * dim + k] = v;
                data[k * dim + j] = v.conj();
            }
        }
        Self { dim, data }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend(r.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * dim + i] = C64::new(v, 0.0);
        }
        m
    }

    /// Rank-one operator `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::from_upper(v.len(), |j, k| v[j] * v[k].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.data[j * self.dim + k]
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix { rows: self.dim, cols: self.dim, data: self.data.clone() }
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    /// `tr(self · other)`, real because both factors are Hermitian.
    pub fn trace_product(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = 0.0;
        for j in 0..d {
            for k in 0..d {
                let a = self.data[j * d + k];
                let b = other.data[k * d + j];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for k in 0..d {
                row += self.data[j * d + k] * v[k];
            }
            acc += v[j].conj() * row;
        }
        acc.re
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * alpha).collect() }
    }

    /// Linear combination `Σ coef_i · M_i` of equally sized matrices.
    pub fn combination<'a>(dim: usize, terms: impl IntoIterator<Item = (f64, &'a Self)>) -> Self {
        let mut acc = Self::zeros(dim);
        for (c, m) in terms {
            if c != 0.0 {
                acc.add_scaled(c, m);
            }
        }
        acc
    }

    /// `A · self · A†` for a general square `A`.
    pub fn congruence(&self, a: &ComplexMatrix) -> Result<Self> {
        let prod = a.matmul(&self.to_complex())?.matmul(&a.adjoint())?;
        Ok(Self::from_upper(self.dim, |j, k| prod.get(j, k)))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(self).values[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *eig_hermitian(self).values.last().expect("dimension is positive")
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Self {
        let eig = eig_hermitian(self);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for (idx, &lam) in eig.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            let v = eig.vectors.column(idx);
            for j in 0..d {
                for k in j..d {
                    out.data[j * d + k] += v[j] * v[k].conj() * fl;
                }
            }
        }
        Self::from_upper(d, |j, k| out.data[j * d + k])
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            data: Vec<C64>,
        }
        let raw = Raw::deserialize(de)?;
        HermitianMatrix::new(raw.dim, raw.data).map_err(serde::de::Error::custom)
    }
}

/// Inner product `⟨u|v⟩`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
