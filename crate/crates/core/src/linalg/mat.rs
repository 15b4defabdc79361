//! Dense square matrices and the structured newtypes built on them.

use std::fmt;
use std::ops::{Add, Deref, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Tolerance on `‖M·Mᵀ − I‖₂` accepted by [`RotMat::new`].
pub const ORTHOGONALITY_TOL: f64 = 1e-13;

/// Tolerance on `max |S_ij − S_ji|` accepted by [`SpdMat::new`].
pub const SYMMETRY_TOL: f64 = 1e-13;

const POWER_ITERATION_CAP: usize = 100;

/// A dense `n × n` real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::from_vec(N, rows.iter().flatten().copied().collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// `self · otherᵀ` without materialising the transpose.
    pub fn mul_t(&self, other: &Mat) -> Mat {
        let n = self.check_dim(other);
        Mat::from_fn(n, |i, j| {
            let (r, s) = (&self.data[i * n..(i + 1) * n], &other.data[j * n..(j + 1) * n]);
            r.iter().zip(s).map(|(a, b)| a * b).sum()
        })
    }

    /// `selfᵀ · other` without materialising the transpose.
    pub fn t_mul(&self, other: &Mat) -> Mat {
        let n = self.check_dim(other);
        let mut out = Mat::zeros(n);
        for k in 0..n {
            for i in 0..n {
                let a = self.data[k * n + i];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Mat {
        Mat {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// `self += factor · other`.
    pub fn axpy(&mut self, factor: f64, other: &Mat) {
        self.check_dim(other);
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += factor * y;
        }
    }

    /// Frobenius inner product `tr(self · otherᵀ)`.
    pub fn frob_inner(&self, other: &Mat) -> f64 {
        self.check_dim(other);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn symmetrize(&self) -> Mat {
        Mat::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    /// Induced 2-norm, estimated by power iteration on `selfᵀ · self`.
    pub fn spectral_norm(&self) -> f64 {
        let gram = self.t_mul(self);
        if gram.max_abs() == 0.0 {
            return 0.0;
        }
        let n = self.n;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + 0.37 * i as f64)).collect();
        normalize(&mut v);
        let mut w = vec![0.0; n];
        let mut lambda = 0.0_f64;
        for _ in 0..POWER_ITERATION_CAP {
            gram.mul_vec_into(&v, &mut w);
            let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
            let settled = (rayleigh - lambda).abs() <= 1e-15 * rayleigh;
            lambda = rayleigh;
            if settled {
                break;
            }
        }
        lambda.max(0.0).sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(v, &mut out);
        out
    }

    fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert_eq!(v.len(), n, "vector length must match matrix dimension");
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.data[i * n..(i + 1) * n]
                .iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    pub fn determinant(&self) -> f64 {
        match Lu::factor(self.n, self.data.clone()) {
            Ok(lu) => lu.determinant(),
            Err(_) => 0.0,
        }
    }

    pub fn inverse(&self) -> Result<Mat> {
        let lu = Lu::factor(self.n, self.data.clone())?;
        let n = self.n;
        let mut out = Mat::zeros(n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|x| *x = 0.0);
            col[j] = 1.0;
            lu.solve_in_place(&mut col);
            for i in 0..n {
                out.data[i * n + j] = col[i];
            }
        }
        Ok(out)
    }

    fn check_dim(&self, other: &Mat) -> usize {
        assert_eq!(self.n, other.n, "matrix dimensions must agree");
        self.n
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.n.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<'a> Add<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        self.check_dim(rhs);
        Mat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        self.check_dim(rhs);
        Mat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        let n = self.check_dim(rhs);
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Mul<f64> for &Mat {
    type Output = Mat;
    fn mul(self, rhs: f64) -> Mat {
        self.scale(rhs)
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

/// LU factorisation with partial pivoting, shared by inversion and the
/// dense Sylvester solve.
pub(crate) struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub(crate) fn factor(n: usize, mut lu: Vec<f64>) -> Result<Self> {
        let scale = lu.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Err(Error::SingularInput);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (pivot_row, pivot) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= 1e-14 * scale {
                return Err(Error::SingularInput);
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for r in k + 1..n {
                let factor = lu[r * n + k] / d;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        lu[r * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub(crate) fn determinant(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i]).product::<f64>() * self.sign
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let permuted: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * b[j]).sum();
            b[i] = (b[i] - s) / self.lu[i * n + i];
        }
    }
}

/// An element of `sk(n)`; antisymmetry holds exactly in storage.
#[derive(Clone, PartialEq)]
pub struct SkewMat(Mat);

impl SkewMat {
    pub fn zeros(n: usize) -> Self {
        Self(Mat::zeros(n))
    }

    /// Builds a skew matrix from its strict upper triangle, row by row.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        let expected = n * (n.saturating_sub(1)) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: upper.len(),
            });
        }
        let mut m = Mat::zeros(n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = *it.next().expect("length checked");
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Ok(Self(m))
    }

    /// Strict upper triangle, row by row; inverse of [`SkewMat::from_upper`].
    pub fn upper(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Accepts `m` only if it is exactly antisymmetric.
    pub fn try_from_mat(m: Mat) -> Result<Self> {
        let n = m.dim();
        for i in 0..n {
            for j in i..n {
                if m[(i, j)] != -m[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i},{j}) breaks antisymmetry"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Nearest skew matrix `(m − mᵀ)/2`.
    pub fn project(m: &Mat) -> Self {
        let n = m.dim();
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (m[(i, j)] - m[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = -v;
            }
        }
        Self(out)
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn scale(&self, factor: f64) -> SkewMat {
        SkewMat(self.0.scale(factor))
    }

    /// `⟨self, other⟩ = Σ_{i<j} self_ij other_ij`.
    pub fn inner(&self, other: &SkewMat) -> f64 {
        0.5 * self.0.frob_inner(&other.0)
    }

    /// Norm induced by [`SkewMat::inner`]; the Euclidean norm of `vee` for `n = 3`.
    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn axpy(&mut self, factor: f64, other: &SkewMat) {
        self.0.axpy(factor, &other.0);
    }
}

impl Deref for SkewMat {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl fmt::Debug for SkewMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SkewMat({:?})", self.0)
    }
}

impl<'a> Add<&'a SkewMat> for &'a SkewMat {
    type Output = SkewMat;
    fn add(self, rhs: &SkewMat) -> SkewMat {
        SkewMat(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a SkewMat> for &'a SkewMat {
    type Output = SkewMat;
    fn sub(self, rhs: &SkewMat) -> SkewMat {
        SkewMat(&self.0 - &rhs.0)
    }
}

impl Neg for &SkewMat {
    type Output = SkewMat;
    fn neg(self) -> SkewMat {
        SkewMat(-&self.0)
    }
}

/// An element of `SO(n)`.
#[derive(Clone, PartialEq)]
pub struct RotMat(Mat);

impl RotMat {
    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n))
    }

    /// Validates orthogonality to [`ORTHOGONALITY_TOL`] and a positive determinant.
    pub fn new(m: Mat) -> Result<Self> {
        let err = orthogonality_error(&m);
        if !(err <= ORTHOGONALITY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthogonal (‖MMᵀ − I‖₂ = {err:e})"
            )));
        }
        if m.determinant() <= 0.0 {
            return Err(Error::NegativeDeterminant);
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: Mat) -> Self {
        Self(m)
    }

    pub fn transpose(&self) -> RotMat {
        RotMat(self.0.transpose())
    }

    /// Group product; closed in `SO(n)` up to round-off.
    pub fn compose(&self, other: &RotMat) -> RotMat {
        RotMat(&self.0 * &other.0)
    }

    /// `selfᵀ · other`.
    pub fn relative_to(&self, other: &RotMat) -> RotMat {
        RotMat(self.0.t_mul(&other.0))
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    /// `‖M·Mᵀ − I‖₂`.
    pub fn orthogonality_error(&self) -> f64 {
        orthogonality_error(&self.0)
    }
}

pub fn orthogonality_error(m: &Mat) -> f64 {
    let mut gram = m.mul_t(m);
    for i in 0..m.dim() {
        gram[(i, i)] -= 1.0;
    }
    gram.spectral_norm()
}

impl Deref for RotMat {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl fmt::Debug for RotMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RotMat({:?})", self.0)
    }
}

/// A symmetric positive-definite matrix.
#[derive(Clone, PartialEq)]
pub struct SpdMat(Mat);

impl SpdMat {
    pub fn new(m: Mat) -> Result<Self> {
        let n = m.dim();
        let scale = m.max_abs().max(1.0);
        for i in 0..n {
            for j in i + 1..n {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidArgument("matrix is not symmetric".into()));
                }
            }
        }
        let (values, _) = super::eigen::symmetric_eigen(&m.symmetrize());
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: Mat) -> Self {
        Self(m)
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }
}

impl Deref for SpdMat {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl fmt::Debug for SpdMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpdMat({:?})", self.0)
    }
}
