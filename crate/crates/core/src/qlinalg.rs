//! Right-linear operators on ℍᴺ stored as quaternionic matrices.
//!
//! Inversion, operator norms and eigenvalue spheres go through the complex
//! adjoint: splitting `T = A + B·e₂` with `A, B` over `C_{e₁}` gives the
//! `2N×2N` complex matrix `[[A, B], [−conj(B), conj(A)]]`, a multiplicative
//! and norm-preserving representation.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quaternion::{Quaternion, Sphere};

/// Relative threshold below which the smallest singular value of the
/// complex adjoint marks a matrix as singular.
pub const SINGULAR_RCOND: f64 = 1e-13;

/// A column vector in ℍᴺ with right scalar multiplication.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QVector(pub Vec<Quaternion>);

impl QVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Quaternion::ZERO; n])
    }

    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[j] = Quaternion::ONE;
        v
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![Quaternion::ONE; n])
    }

    /// A random vector of unit ℓ² norm.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        loop {
            let v = Self((0..n).map(|_| Quaternion::random_gaussian(rng)).collect());
            let norm = v.norm();
            if norm > 0.0 {
                return v.scale(1.0 / norm);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|q| q.norm_sqr()).sum()
    }

    /// The quaternionic ℓ² norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|q| *q == Quaternion::ZERO)
    }

    /// `v·s`, multiplying every entry from the right.
    pub fn right_mul(&self, s: Quaternion) -> Self {
        Self(self.0.iter().map(|&q| q * s).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.iter().map(|&q| q.scale(c)).collect())
    }

    /// `Re Σ conj(u_j)·v_j`, the Euclidean inner product on ℝ⁴ᴺ.
    pub fn real_dot(&self, other: &QVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.real_dot(*b)).sum()
    }

    /// `self += c·other`.
    pub fn axpy(&mut self, c: f64, other: &QVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b.scale(c);
        }
    }

    pub fn max_abs_diff(&self, other: &QVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<Quaternion>> for QVector {
    fn from(v: Vec<Quaternion>) -> Self {
        Self(v)
    }
}

impl Add<&QVector> for &QVector {
    type Output = QVector;
    fn add(self, o: &QVector) -> QVector {
        QVector(self.0.iter().zip(&o.0).map(|(a, b)| *a + *b).collect())
    }
}

impl Sub<&QVector> for &QVector {
    type Output = QVector;
    fn sub(self, o: &QVector) -> QVector {
        QVector(self.0.iter().zip(&o.0).map(|(a, b)| *a - *b).collect())
    }
}

/// Square quaternionic matrix acting by left matrix-vector product, so that
/// `T(v·s) = (Tv)·s`. Row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    n: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Quaternion::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Quaternion::ONE; n])
    }

    pub fn diagonal(entries: &[Quaternion]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n);
        for (j, &q) in entries.iter().enumerate() {
            m[(j, j)] = q;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                data.push(f(j, k));
            }
        }
        Self { n, data }
    }

    pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        Self::from_fn(n, |_, _| Quaternion::random_gaussian(rng))
    }

    /// A random unitary matrix (`U^H U = I`), from Gram–Schmidt on Gaussian
    /// columns with the quaternionic inner product `⟨u, v⟩ = Σ conj(u_j) v_j`.
    pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mut cols: Vec<QVector> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut v = QVector((0..n).map(|_| Quaternion::random_gaussian(rng)).collect());
            // two passes keep the columns orthogonal to working precision
            for _ in 0..2 {
                for u in &cols {
                    let c: Quaternion = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * *b).sum();
                    v = &v - &u.right_mul(c);
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                cols.push(v.scale(1.0 / norm));
            }
        }
        Self::from_fn(n, |j, k| cols[k].0[j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|j| (0..self.n).all(|k| j == k || self[(j, k)] == Quaternion::ZERO))
    }

    pub fn diagonal_entries(&self) -> Vec<Quaternion> {
        (0..self.n).map(|j| self[(j, j)]).collect()
    }

    pub fn matvec(&self, v: &QVector) -> Result<QVector> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(self.apply(v))
    }

    /// Unchecked matrix-vector product; `v` must have length `dim()`.
    pub(crate) fn apply(&self, v: &QVector) -> QVector {
        let n = self.n;
        QVector(
            (0..n)
                .map(|j| {
                    let row = &self.data[j * n..(j + 1) * n];
                    row.iter().zip(&v.0).map(|(a, b)| *a * *b).sum()
                })
                .collect(),
        )
    }

    /// Conjugate transpose, the adjoint for the real inner product on ℍᴺ.
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.n, |j, k| self[(k, j)].conj())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|q| q.scale(c)).collect(),
        }
    }

    /// Multiplies every entry by `s` from the right (the matrix `T·(sI)`).
    pub fn right_scalar(&self, s: Quaternion) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&q| q * s).collect(),
        }
    }

    pub fn add_identity(&self, c: Quaternion) -> Self {
        let mut m = self.clone();
        for j in 0..self.n {
            m[(j, j)] += c;
        }
        m
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn complex_adjoint(&self) -> ComplexAdjoint {
        let n = self.n;
        let mut m = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let (a, b) = split(self[(j, k)]);
                m[(j, k)] = a;
                m[(j, k + n)] = b;
                m[(j + n, k)] = -b.conj();
                m[(j + n, k + n)] = a.conj();
            }
        }
        ComplexAdjoint(m)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.n == 0 {
            return Ok(self.clone());
        }
        let chi = self.complex_adjoint();
        if chi.rcond() <= SINGULAR_RCOND {
            return Err(Error::Singular);
        }
        let inv = chi.0.lu().try_inverse().ok_or(Error::Singular)?;
        Ok(ComplexAdjoint(inv).to_qmatrix())
    }

    /// Solves `self · X = rhs` for a matrix right-hand side.
    pub fn solve_matrix(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if rhs.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: rhs.n,
            });
        }
        if self.n == 0 {
            return Ok(rhs.clone());
        }
        let chi = self.complex_adjoint();
        if chi.rcond() <= SINGULAR_RCOND {
            return Err(Error::Singular);
        }
        let sol = chi.0.lu().solve(&rhs.complex_adjoint().0).ok_or(Error::Singular)?;
        Ok(ComplexAdjoint(sol).to_qmatrix())
    }

    /// Solves `self · b = rhs`.
    pub fn solve(&self, rhs: &QVector) -> Result<QVector> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        let chi = self.complex_adjoint().0;
        // v = v1 + v2·e₂ is represented by the column [v1; −conj(v2)].
        let mut col = nalgebra::DVector::<Complex64>::zeros(2 * n);
        for (j, &q) in rhs.iter().enumerate() {
            let (a, b) = split(q);
            col[j] = a;
            col[j + n] = -b.conj();
        }
        let sol = chi.lu().solve(&col).ok_or(Error::Singular)?;
        Ok(QVector((0..n).map(|j| join(sol[j], -sol[j + n].conj())).collect()))
    }

    /// Induced ℓ² operator norm, the largest singular value of the complex adjoint.
    pub fn op_norm(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        if self.is_diagonal() {
            return self.diagonal_entries().iter().map(|q| q.norm()).fold(0.0, f64::max);
        }
        self.complex_adjoint().singular_values().into_iter().fold(0.0, f64::max)
    }

    /// The spheres `[λ]` generated by the eigenvalues of the complex adjoint,
    /// deduplicated and sorted by `(Re, |Im|)`.
    pub fn eigen_spheres(&self) -> Vec<Sphere> {
        if self.n == 0 {
            return Vec::new();
        }
        let spheres: Vec<Sphere> = if self.is_diagonal() {
            self.diagonal_entries().iter().map(|q| q.sphere()).collect()
        } else {
            let eig = self
                .complex_adjoint()
                .0
                .schur()
                .eigenvalues()
                .expect("complex Schur form is triangular");
            eig.iter().map(|l| Sphere::new(l.re, l.im.abs())).collect()
        };
        let scale = spheres.iter().map(|s| s.modulus()).fold(1.0, f64::max);
        dedup_spheres(spheres, 1e-8 * scale)
    }
}

/// Merges spheres that agree within `tol`, snaps near-zero parts to zero and
/// sorts by `(Re, |Im|)`, treating real parts within `tol` as equal.
pub(crate) fn dedup_spheres(spheres: Vec<Sphere>, tol: f64) -> Vec<Sphere> {
    let snap = |v: f64| if v.abs() <= tol { 0.0 } else { v };
    let mut spheres: Vec<Sphere> = spheres
        .into_iter()
        .map(|s| Sphere::new(snap(s.re), snap(s.radius)))
        .collect();
    spheres.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut keyed: Vec<(f64, Sphere)> = Vec::with_capacity(spheres.len());
    for s in spheres {
        if keyed.iter().any(|(_, o)| o.approx_eq(s, tol)) {
            continue;
        }
        let key = match keyed.last() {
            Some(&(k, last)) if s.re - last.re <= tol => k,
            _ => s.re,
        };
        keyed.push((key, s));
    }
    keyed.sort_by(|(ka, a), (kb, b)| ka.total_cmp(kb).then(a.radius.total_cmp(&b.radius)));
    keyed.into_iter().map(|(_, s)| s).collect()
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    fn index(&self, (j, k): (usize, usize)) -> &Quaternion {
        &self.data[j * self.n + k]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut Quaternion {
        &mut self.data[j * self.n + k]
    }
}

impl Mul<&QMatrix> for &QMatrix {
    type Output = QMatrix;
    fn mul(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.n, o.n, "matrix dimensions must agree");
        let n = self.n;
        let mut out = QMatrix::zeros(n);
        for j in 0..n {
            for l in 0..n {
                let a = self[(j, l)];
                if a == Quaternion::ZERO {
                    continue;
                }
                for k in 0..n {
                    out.data[j * n + k] += a * o.data[l * n + k];
                }
            }
        }
        out
    }
}

impl Add<&QMatrix> for &QMatrix {
    type Output = QMatrix;
    fn add(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.n, o.n, "matrix dimensions must agree");
        QMatrix {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl Sub<&QMatrix> for &QMatrix {
    type Output = QMatrix;
    fn sub(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.n, o.n, "matrix dimensions must agree");
        QMatrix {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

/// `q = a + b·e₂` with `a = w + x·i`, `b = y + z·i` in `C_{e₁}`.
#[inline]
fn split(q: Quaternion) -> (Complex64, Complex64) {
    (Complex64::new(q.w, q.x), Complex64::new(q.y, q.z))
}

#[inline]
fn join(a: Complex64, b: Complex64) -> Quaternion {
    Quaternion::new(a.re, a.im, b.re, b.im)
}

/// The `2N×2N` complex adjoint of a quaternionic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexAdjoint(pub DMatrix<Complex64>);

impl ComplexAdjoint {
    pub fn to_qmatrix(&self) -> QMatrix {
        let n = self.0.nrows() / 2;
        QMatrix::from_fn(n, |j, k| join(self.0[(j, k)], self.0[(j, k + n)]))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    }

    /// `σ_min / σ_max` (zero for the zero matrix).
    pub fn rcond(&self) -> f64 {
        let sv = self.singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }
}

impl Mul<&ComplexAdjoint> for &ComplexAdjoint {
    type Output = ComplexAdjoint;
    fn mul(self, o: &ComplexAdjoint) -> ComplexAdjoint {
        ComplexAdjoint(&self.0 * &o.0)
    }
}
