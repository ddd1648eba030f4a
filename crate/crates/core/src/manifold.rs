//! Geometry of `U(n) x U(n)` and `O(n) x O(n)` as embedded submanifolds of
//! `C^{n x n} x C^{n x n}` with the metric `Re tr(X^* Y)`.
//!
//! Tangent vectors are stored in ambient form: `X_Q = Q W` with `W`
//! skew-Hermitian (skew-symmetric for the orthogonal group).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pencil::{frob_sq, real_inner, CMatrix, Field};

/// Tolerance on `||Q^* Q - I||_F / sqrt(n)` accepted for a group element.
pub const UNITARY_TOL: f64 = 1e-10;

/// A point `(Q, Z)` of the product group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPair {
    pub q: CMatrix,
    pub z: CMatrix,
    pub field: Field,
}

/// A tangent vector `(X_Q, X_Z)` in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub xq: CMatrix,
    pub xz: CMatrix,
}

impl GroupPair {
    /// Validating constructor.
    pub fn new(q: CMatrix, z: CMatrix, field: Field) -> Result<Self> {
        let g = GroupPair { q, z, field };
        g.validate()?;
        Ok(g)
    }

    pub fn identity(n: usize, field: Field) -> Self {
        GroupPair { q: CMatrix::identity(n, n), z: CMatrix::identity(n, n), field }
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    /// Largest of `||Q^*Q - I||_F` and `||Z^*Z - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.q).max(unitarity_defect(&self.z))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.nrows();
        if self.q.ncols() != n {
            return Err(Error::SizeMismatch { expected: n, actual: self.q.ncols() });
        }
        if self.z.nrows() != n || self.z.ncols() != n {
            return Err(Error::SizeMismatch { expected: n, actual: self.z.nrows() });
        }
        let bound = UNITARY_TOL * (n as f64).sqrt();
        for (which, m) in [("Q", &self.q), ("Z", &self.z)] {
            let deviation = unitarity_defect(m);
            if !(deviation <= bound) {
                return Err(Error::NotUnitary { which, deviation });
            }
            if self.field == Field::Real && m.iter().any(|x| x.im != 0.0) {
                return Err(Error::InvalidArgument(format!("{which} must be real in real mode")));
            }
        }
        Ok(())
    }

    /// Re-orthonormalize when rounding has pushed either factor past
    /// [`UNITARY_TOL`]. Returns whether a repair happened.
    pub fn repair_drift(&mut self) -> bool {
        if self.unitarity_defect() <= UNITARY_TOL {
            return false;
        }
        if let (Ok(q), Ok(z)) = (qr_unique(&self.q, self.field), qr_unique(&self.z, self.field)) {
            self.q = q;
            self.z = z;
        }
        true
    }
}

impl TangentPair {
    pub fn zeros(n: usize) -> Self {
        TangentPair { xq: CMatrix::zeros(n, n), xz: CMatrix::zeros(n, n) }
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        TangentPair { xq: &self.xq * Complex64::new(s, 0.0), xz: &self.xz * Complex64::new(s, 0.0) }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &TangentPair) {
        let s = Complex64::new(s, 0.0);
        self.xq.zip_apply(&other.xq, |x, y| *x += s * y);
        self.xz.zip_apply(&other.xz, |x, y| *x += s * y);
    }
}

pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut g = m.adjoint() * m;
    for i in 0..n {
        g[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    frob_sq(&g).sqrt()
}

/// `(M - M^*) / 2`
pub fn skew_h(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `(M + M^*) / 2`
pub fn sym_h(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Orthogonal projection of an ambient pair onto the tangent space at `base`.
pub fn tangent_project(base: &GroupPair, eq: &CMatrix, ez: &CMatrix) -> TangentPair {
    TangentPair {
        xq: &base.q * skew_h(&(base.q.adjoint() * eq)),
        xz: &base.z * skew_h(&(base.z.adjoint() * ez)),
    }
}

/// Metric `Re tr(X_Q^* Y_Q) + Re tr(X_Z^* Y_Z)`.
pub fn inner(x: &TangentPair, y: &TangentPair) -> f64 {
    real_inner(&x.xq, &y.xq) + real_inner(&x.xz, &y.xz)
}

/// Q factor of `m` with the diagonal of R real and positive. Imaginary parts
/// are cleared in real mode.
pub fn qr_unique(m: &CMatrix, field: Field) -> Result<CMatrix> {
    let n = m.ncols();
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let scale = frob_sq(m).sqrt().max(f64::MIN_POSITIVE);
    for j in 0..n {
        let d = r[(j, j)];
        let mag = d.norm();
        if !(mag > 1e-14 * scale) {
            return Err(Error::RankDeficient);
        }
        let phase = d / mag;
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    if field == Field::Real {
        q.iter_mut().for_each(|x| x.im = 0.0);
    }
    Ok(q)
}

/// QR retraction: `qf(Q + t X_Q)`, `qf(Z + t X_Z)`.
pub fn retract(base: &GroupPair, x: &TangentPair, t: f64) -> Result<GroupPair> {
    let t = Complex64::new(t, 0.0);
    Ok(GroupPair {
        q: qr_unique(&(&base.q + &x.xq * t), base.field)?,
        z: qr_unique(&(&base.z + &x.xz * t), base.field)?,
        field: base.field,
    })
}

/// Riemannian gradient from the Euclidean one.
pub fn egrad_to_rgrad(base: &GroupPair, gq: &CMatrix, gz: &CMatrix) -> TangentPair {
    tangent_project(base, gq, gz)
}

/// Riemannian Hessian applied to `x`, from the Euclidean gradient and the
/// Euclidean Hessian-vector product along `x`.
pub fn ehess_to_rhess(
    base: &GroupPair,
    egrad: (&CMatrix, &CMatrix),
    ehess: (&CMatrix, &CMatrix),
    x: &TangentPair,
) -> TangentPair {
    let cq = ehess.0 - &x.xq * sym_h(&(base.q.adjoint() * egrad.0));
    let cz = ehess.1 - &x.xz * sym_h(&(base.z.adjoint() * egrad.1));
    tangent_project(base, &cq, &cz)
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> CMatrix {
    // column-major fill order, fixed for reproducibility
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = match field {
            Field::Complex => rng.sample(StandardNormal),
            Field::Real => 0.0,
        };
        Complex64::new(re, im)
    })
}

/// Haar-distributed point of the product group.
pub fn random_point<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> GroupPair {
    loop {
        let q = qr_unique(&gaussian_matrix(n, field, rng), field);
        let z = qr_unique(&gaussian_matrix(n, field, rng), field);
        if let (Ok(q), Ok(z)) = (q, z) {
            return GroupPair { q, z, field };
        }
    }
}

/// Unit-norm random tangent vector at `base`.
pub fn random_tangent<R: Rng + ?Sized>(base: &GroupPair, rng: &mut R) -> TangentPair {
    let n = base.n();
    let eq = gaussian_matrix(n, base.field, rng);
    let ez = gaussian_matrix(n, base.field, rng);
    let x = tangent_project(base, &eq, &ez);
    let norm = x.norm();
    x.scale(1.0 / norm)
}
