//! Dense complex matrix pencils `A + xB`.
//!
//! Both coefficients are stored as `n x n` complex matrices. Real pencils use
//! the same storage with every imaginary part equal to zero; the [`Field`] tag
//! records which group (unitary or orthogonal) the optimizer must stay in.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Scalar field of a pencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Complex,
    Real,
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "complex" => Ok(Field::Complex),
            "real" => Ok(Field::Real),
            other => Err(Error::Format(format!("unknown field `{other}`"))),
        }
    }
}

/// A square pencil `A + xB`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    a: CMatrix,
    b: CMatrix,
    field: Field,
}

impl Pencil {
    pub fn new(a: CMatrix, b: CMatrix, field: Field) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::SizeMismatch { expected: n, actual: a.ncols() });
        }
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::SizeMismatch { expected: n, actual: b.nrows().max(b.ncols()) });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("pencil size must be positive".into()));
        }
        if field == Field::Real {
            for m in [&a, &b] {
                if let Some((idx, _)) = m.iter().enumerate().find(|(_, z)| z.im != 0.0) {
                    return Err(Error::NotReal { row: idx % n, col: idx / n });
                }
            }
        }
        Ok(Pencil { a, b, field })
    }

    /// Complex pencil from two matrices.
    pub fn complex(a: CMatrix, b: CMatrix) -> Result<Self> {
        Self::new(a, b, Field::Complex)
    }

    /// Real pencil from real matrices.
    pub fn real(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Self> {
        Self::new(a.map(|x| Complex64::new(x, 0.0)), b.map(|x| Complex64::new(x, 0.0)), Field::Real)
    }

    /// Real pencil from row-major slices.
    pub fn from_real_rows(n: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != n * n || b.len() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, actual: a.len().min(b.len()) });
        }
        Self::real(&DMatrix::from_row_slice(n, n, a), &DMatrix::from_row_slice(n, n, b))
    }

    pub fn zeros(n: usize, field: Field) -> Self {
        Pencil { a: CMatrix::zeros(n, n), b: CMatrix::zeros(n, n), field }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn into_parts(self) -> (CMatrix, CMatrix, Field) {
        (self.a, self.b, self.field)
    }

    /// `(i, i)` entry as a scalar pencil.
    pub fn diag(&self, i: usize) -> ScalarPencil {
        ScalarPencil::new(self.a[(i, i)], self.b[(i, i)])
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `Q (A + xB) Z`.
    pub fn transform(&self, q: &CMatrix, z: &CMatrix) -> Pencil {
        Pencil { a: q * &self.a * z, b: q * &self.b * z, field: self.field }
    }

    /// Coefficient-wise difference. Panics on size mismatch.
    pub fn sub(&self, other: &Pencil) -> Pencil {
        assert_eq!(self.n(), other.n(), "pencil size mismatch");
        Pencil {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            field: join_field(self.field, other.field),
        }
    }

    /// Largest modulus among strictly-lower entries of either coefficient.
    pub fn max_strictly_lower(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                m = m.max(self.a[(i, j)].norm()).max(self.b[(i, j)].norm());
            }
        }
        m
    }
}

fn join_field(x: Field, y: Field) -> Field {
    if x == Field::Real && y == Field::Real {
        Field::Real
    } else {
        Field::Complex
    }
}

/// A single diagonal entry `a + xb`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarPencil {
    pub a: Complex64,
    pub b: Complex64,
}

impl ScalarPencil {
    pub const ZERO: ScalarPencil = ScalarPencil {
        a: Complex64::new(0.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64) -> Self {
        ScalarPencil { a, b }
    }

    pub fn real(a: f64, b: f64) -> Self {
        ScalarPencil::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    /// Real 4-vector `(Re a, Im a, Re b, Im b)`.
    pub fn to_r4(self) -> [f64; 4] {
        [self.a.re, self.a.im, self.b.re, self.b.im]
    }

    pub fn from_r4(v: [f64; 4]) -> Self {
        ScalarPencil::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
    }

    pub fn norm_sq(self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        ScalarPencil::new(self.a * s, self.b * s)
    }

    pub fn is_finite(self) -> bool {
        self.to_r4().iter().all(|x| x.is_finite())
    }
}

impl std::ops::Add for ScalarPencil {
    type Output = ScalarPencil;
    fn add(self, o: ScalarPencil) -> ScalarPencil {
        ScalarPencil::new(self.a + o.a, self.b + o.b)
    }
}

impl std::ops::Sub for ScalarPencil {
    type Output = ScalarPencil;
    fn sub(self, o: ScalarPencil) -> ScalarPencil {
        ScalarPencil::new(self.a - o.a, self.b - o.b)
    }
}

/// Classification of the root of a diagonal entry `a + xb`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum EigenKind {
    Finite(Complex64),
    Infinite,
    /// `a = b = 0`: the pencil is singular.
    Indeterminate,
}

/// An eigenvalue on the Riemann sphere, kept in homogeneous form `(a, b)`
/// with root `-a/b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedEigenvalue {
    pub a: Complex64,
    pub b: Complex64,
    pub kind: EigenKind,
}

impl GeneralizedEigenvalue {
    /// Classify `(a, b)`; entries with `max(|a|, |b|) <= zero_tol` are
    /// indeterminate.
    pub fn classify(a: Complex64, b: Complex64, zero_tol: f64) -> Self {
        let kind = if a.norm().max(b.norm()) <= zero_tol {
            EigenKind::Indeterminate
        } else if b.norm() > 0.0 {
            EigenKind::Finite(-a / b)
        } else {
            EigenKind::Infinite
        };
        GeneralizedEigenvalue { a, b, kind }
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self.kind, EigenKind::Indeterminate)
    }
}

/// Chordal distance between two homogeneous eigenvalue representations.
pub fn chordal_distance(x: (Complex64, Complex64), y: (Complex64, Complex64)) -> f64 {
    let num = (x.0 * y.1 - x.1 * y.0).norm();
    let den = (x.0.norm_sqr() + x.1.norm_sqr()).sqrt() * (y.0.norm_sqr() + y.1.norm_sqr()).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `||A + xB||_F^2`, the sum of squared moduli of all entries.
pub fn norm_sq(p: &Pencil) -> f64 {
    p.a.iter().chain(p.b.iter()).map(|z| z.norm_sqr()).sum()
}

/// Frobenius distance between two pencils of equal size.
pub fn distance(p: &Pencil, r: &Pencil) -> Result<f64> {
    if p.n() != r.n() {
        return Err(Error::SizeMismatch { expected: p.n(), actual: r.n() });
    }
    Ok(norm_sq(&p.sub(r)).sqrt())
}

/// Eigenvalues read off the diagonal of an upper-triangular pencil.
///
/// `tol` is relative to `||P||_F`: strictly-lower entries above `tol * ||P||`
/// are rejected, and diagonal entries with both parts below it are reported
/// as [`EigenKind::Indeterminate`].
pub fn triangular_eigenvalues(p: &Pencil, tol: f64) -> Result<Vec<GeneralizedEigenvalue>> {
    let bound = tol * p.norm();
    let max_lower = p.max_strictly_lower();
    if max_lower > bound {
        return Err(Error::NotTriangular { max_lower, bound });
    }
    Ok((0..p.n())
        .map(|i| GeneralizedEigenvalue::classify(p.a[(i, i)], p.b[(i, i)], bound))
        .collect())
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values strictly greater than `tol`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    singular_values(m).into_iter().filter(|&s| s > tol).count()
}

/// Real part of `trace(X^* Y)`.
pub fn real_inner(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(u, v)| u.re * v.re + u.im * v.im).sum()
}

pub(crate) fn frob_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}
