//! The Schur-form residual objective
//!
//! `f(Q, Z) = ||QAZ + xQBZ - T(QAZ + xQBZ)||_F^2`
//!
//! together with its Euclidean gradient and Hessian-vector products with
//! respect to `(Q, Z)`. An [`ObjectiveEvaluation`] holds every intermediate
//! product for one point, so the gradient and Hessian at that point reuse the
//! same triangular target.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::GroupPair;
use crate::pencil::{frob_sq, CMatrix, Pencil, ScalarPencil};
use crate::projection::{dproject, dproject_lenient, project, ProjectionResult, StabilityRegion};

/// `T(P)`: the nearest pencil in the closure of the stable upper-triangular
/// pencils.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularTarget {
    pub t0: CMatrix,
    pub t1: CMatrix,
    pub diag_results: Vec<ProjectionResult>,
}

impl TriangularTarget {
    pub fn to_pencil(&self, field: crate::pencil::Field) -> Pencil {
        Pencil::new(self.t0.clone(), self.t1.clone(), field).expect("target inherits a valid field")
    }
}

pub fn triangular_target(region: StabilityRegion, p: &Pencil) -> TriangularTarget {
    let n = p.n();
    let mut t0 = p.a().upper_triangle();
    let mut t1 = p.b().upper_triangle();
    let diag_results: Vec<ProjectionResult> = (0..n).map(|i| project(region, p.diag(i))).collect();
    for (i, r) in diag_results.iter().enumerate() {
        t0[(i, i)] = r.projected.a;
        t1[(i, i)] = r.projected.b;
    }
    TriangularTarget { t0, t1, diag_results }
}

/// How the Hessian treats diagonal entries where the projection is not
/// differentiable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianMode {
    /// Fail with [`Error::MedialAxis`].
    Strict,
    /// Differentiate the tie-break branch.
    Lenient,
}

/// Everything computed at one point `(Q, Z)`.
#[derive(Debug, Clone)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    pub rotated: Pencil,
    pub target: TriangularTarget,
    pub residual: Pencil,
    q: CMatrix,
    z: CMatrix,
    az: CMatrix,
    bz: CMatrix,
    qa: CMatrix,
    qb: CMatrix,
}

/// Evaluate `f` at a validated group element.
pub fn evaluate(region: StabilityRegion, p: &Pencil, g: &GroupPair) -> Result<ObjectiveEvaluation> {
    if g.n() != p.n() {
        return Err(Error::SizeMismatch { expected: p.n(), actual: g.n() });
    }
    g.validate()?;
    Ok(evaluate_ambient(region, p, &g.q, &g.z))
}

/// Evaluate the ambient extension of `f` at arbitrary square `(Q, Z)`.
pub fn evaluate_ambient(region: StabilityRegion, p: &Pencil, q: &CMatrix, z: &CMatrix) -> ObjectiveEvaluation {
    let az = p.a() * z;
    let bz = p.b() * z;
    let qa = q * p.a();
    let qb = q * p.b();
    let rotated = Pencil::new(q * &az, q * &bz, p.field()).unwrap_or_else(|_| {
        // ambient (non-real) perturbations of a real pencil
        Pencil::complex(q * &az, q * &bz).expect("square matrices")
    });
    let target = triangular_target(region, &rotated);
    let r0 = rotated.a() - &target.t0;
    let r1 = rotated.b() - &target.t1;
    let value = frob_sq(&r0) + frob_sq(&r1);
    let residual = Pencil::new(r0, r1, rotated.field()).expect("same shape as rotated");
    ObjectiveEvaluation { value, rotated, target, residual, q: q.clone(), z: z.clone(), az, bz, qa, qb }
}

fn two() -> Complex64 {
    Complex64::new(2.0, 0.0)
}

impl ObjectiveEvaluation {
    /// Euclidean gradient `(grad_Q f, grad_Z f)` with respect to the real inner
    /// product `Re tr(X^* Y)`.
    pub fn gradient(&self) -> (CMatrix, CMatrix) {
        let r0 = self.residual.a();
        let r1 = self.residual.b();
        let gq = (r0 * self.az.adjoint() + r1 * self.bz.adjoint()) * two();
        let gz = (self.qa.adjoint() * r0 + self.qb.adjoint() * r1) * two();
        (gq, gz)
    }

    /// Directional derivative of the Euclidean gradient along `(dq, dz)`.
    pub fn hessian_vec(
        &self,
        region: StabilityRegion,
        p: &Pencil,
        dq: &CMatrix,
        dz: &CMatrix,
        mode: HessianMode,
    ) -> Result<(CMatrix, CMatrix)> {
        let n = p.n();
        let dq_az = dq * &self.az;
        let dq_bz = dq * &self.bz;
        let qa_dz = &self.qa * dz;
        let qb_dz = &self.qb * dz;
        // derivative of the rotated coefficients
        let mut d0 = dq_az + qa_dz;
        let mut d1 = dq_bz + qb_dz;
        for i in 0..n {
            let s = self.rotated.diag(i);
            let ds = ScalarPencil::new(d0[(i, i)], d1[(i, i)]);
            let dh = match mode {
                HessianMode::Strict => dproject(region, s, ds)?,
                HessianMode::Lenient => dproject_lenient(region, s, ds),
            };
            d0[(i, i)] -= dh.a;
            d1[(i, i)] -= dh.b;
        }
        // L: drop the strictly upper part
        let dr0 = d0.lower_triangle();
        let dr1 = d1.lower_triangle();

        let r0 = self.residual.a();
        let r1 = self.residual.b();
        let a_dz = p.a() * dz;
        let b_dz = p.b() * dz;
        let dq_a = dq * p.a();
        let dq_b = dq * p.b();

        let hq = (&dr0 * self.az.adjoint() + r0 * a_dz.adjoint() + &dr1 * self.bz.adjoint() + r1 * b_dz.adjoint()) * two();
        let hz = (dq_a.adjoint() * r0 + self.qa.adjoint() * &dr0 + dq_b.adjoint() * r1 + self.qb.adjoint() * &dr1) * two();
        Ok((hq, hz))
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn z(&self) -> &CMatrix {
        &self.z
    }
}

pub fn euclidean_gradient(region: StabilityRegion, p: &Pencil, g: &GroupPair) -> Result<(CMatrix, CMatrix)> {
    Ok(evaluate(region, p, g)?.gradient())
}

/// Euclidean Hessian-vector product; fails on medial-axis diagonal entries.
pub fn euclidean_hessian_vec(
    region: StabilityRegion,
    p: &Pencil,
    g: &GroupPair,
    dq: &CMatrix,
    dz: &CMatrix,
) -> Result<(CMatrix, CMatrix)> {
    evaluate(region, p, g)?.hessian_vec(region, p, dq, dz, HessianMode::Strict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{gaussian_matrix, random_point, random_tangent};
    use crate::pencil::{real_inner, Field};
    use crate::projection::is_stable_scalar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use StabilityRegion::{Hurwitz, Schur};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn random_pencil(n: usize, rng: &mut ChaCha8Rng) -> Pencil {
        Pencil::complex(gaussian_matrix(n, Field::Complex, rng), gaussian_matrix(n, Field::Complex, rng)).unwrap()
    }

    /// Upper triangular with `b_ii = 2 a_ii`, strictly stable for both regions.
    fn stable_triangular(n: usize, rng: &mut ChaCha8Rng) -> Pencil {
        let p = random_pencil(n, rng);
        let a = p.a().upper_triangle();
        let mut b = p.b().upper_triangle();
        for i in 0..n {
            b[(i, i)] = a[(i, i)] * 2.0;
        }
        Pencil::complex(a, b).unwrap()
    }

    #[test]
    fn worked_two_by_two_example() {
        let p = Pencil::from_real_rows(2, &[2.0, 0.0, 1.0, 0.0], &[-1.0, 0.0, 0.0, 1.0]).unwrap();
        let t = triangular_target(Hurwitz, &p);
        let expect_t0 = CMatrix::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(0.0)]);
        let expect_t1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        assert!(frob_sq(&(&t.t0 - expect_t0)) < 1e-28);
        assert!(frob_sq(&(&t.t1 - expect_t1)) < 1e-28);
        let e = evaluate(Hurwitz, &p, &GroupPair::identity(2, Field::Real)).unwrap();
        assert!((e.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn stable_triangular_has_zero_objective_and_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for region in [Hurwitz, Schur] {
            let p = stable_triangular(4, &mut rng);
            let t = triangular_target(region, &p);
            assert_eq!(t.t0, p.a().clone());
            assert_eq!(t.t1, p.b().clone());
            let e = evaluate(region, &p, &GroupPair::identity(4, Field::Complex)).unwrap();
            assert_eq!(e.value, 0.0);
            let (gq, gz) = e.gradient();
            assert_eq!(frob_sq(&gq) + frob_sq(&gz), 0.0);
        }
    }

    #[test]
    fn target_beats_random_stable_triangular_pencils() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for region in [Hurwitz, Schur] {
            let p = random_pencil(4, &mut rng);
            let t = triangular_target(region, &p);
            let best = frob_sq(&(p.a() - &t.t0)) + frob_sq(&(p.b() - &t.t1));
            for _ in 0..10_000 {
                // perturb the target and re-stabilize the diagonal
                let mut s0 = t.t0.clone();
                let mut s1 = t.t1.clone();
                for j in 0..4 {
                    for i in 0..=j {
                        s0[(i, j)] += c(rng.random_range(-0.3..0.3));
                        s1[(i, j)] += c(rng.random_range(-0.3..0.3));
                    }
                }
                for i in 0..4 {
                    let d = ScalarPencil::new(s0[(i, i)], s1[(i, i)]);
                    if !is_stable_scalar(region, d, 0.0) {
                        let pr = project(region, d).projected;
                        s0[(i, i)] = pr.a;
                        s1[(i, i)] = pr.b;
                    }
                }
                let d = frob_sq(&(p.a() - s0)) + frob_sq(&(p.b() - s1));
                assert!(best <= d + 1e-12);
            }
        }
    }

    #[test]
    fn scalar_objective_is_projection_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for region in [Hurwitz, Schur] {
            let p = random_pencil(1, &mut rng);
            for _ in 0..5 {
                let g = random_point(1, Field::Complex, &mut rng);
                let e = evaluate(region, &p, &g).unwrap();
                let rot = ScalarPencil::new(g.q[(0, 0)] * p.a()[(0, 0)] * g.z[(0, 0)], g.q[(0, 0)] * p.b()[(0, 0)] * g.z[(0, 0)]);
                let q = project(region, rot).residual_distance;
                assert!((e.value - q * q).abs() < 1e-13);
                // the 1x1 objective does not depend on the rotation
                let q0 = project(region, p.diag(0)).residual_distance;
                assert!((e.value - q0 * q0).abs() < 1e-12);

                let (gq, _) = e.gradient();
                let (qs, zs) = (g.q[(0, 0)], g.z[(0, 0)]);
                let pr = project(region, rot).projected;
                let (a, b) = (p.a()[(0, 0)], p.b()[(0, 0)]);
                let hand = two() * (qs * a * zs - pr.a) * (a * zs).conj() + two() * (qs * b * zs - pr.b) * (b * zs).conj();
                assert!((gq[(0, 0)] - hand).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn value_matches_residual_norm_and_residual_is_lower() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let p = random_pencil(5, &mut rng);
        let g = random_point(5, Field::Complex, &mut rng);
        for region in [Hurwitz, Schur] {
            let e = evaluate(region, &p, &g).unwrap();
            assert!((e.value - e.residual.norm_sq()).abs() <= 1e-12 * e.value);
            for j in 0..5 {
                for i in 0..j {
                    assert_eq!(e.residual.a()[(i, j)].norm(), 0.0);
                    assert_eq!(e.residual.b()[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn unitary_reparametrization_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let p = random_pencil(4, &mut rng);
        let g = random_point(4, Field::Complex, &mut rng);
        let uv = random_point(4, Field::Complex, &mut rng);
        let (u, v) = (&uv.q, &uv.z);
        let p2 = p.transform(u, v);
        let g2 = GroupPair::new(&g.q * u.adjoint(), v.adjoint() * &g.z, Field::Complex).unwrap();
        for region in [Hurwitz, Schur] {
            let f1 = evaluate(region, &p, &g).unwrap().value;
            let f2 = evaluate(region, &p2, &g2).unwrap().value;
            assert!((f1 - f2).abs() <= 1e-12 * f1.max(1.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let h = 1e-6;
        for region in [Hurwitz, Schur] {
            let p = random_pencil(5, &mut rng);
            let g = random_point(5, Field::Complex, &mut rng);
            let e = evaluate(region, &p, &g).unwrap();
            let (gq, gz) = e.gradient();
            for _ in 0..5 {
                let eq = gaussian_matrix(5, Field::Complex, &mut rng);
                let ez = gaussian_matrix(5, Field::Complex, &mut rng);
                let hh = c(h);
                let fp = evaluate_ambient(region, &p, &(&g.q + &eq * hh), &(&g.z + &ez * hh)).value;
                let fm = evaluate_ambient(region, &p, &(&g.q - &eq * hh), &(&g.z - &ez * hh)).value;
                let fd = (fp - fm) / (2.0 * h);
                let an = real_inner(&gq, &eq) + real_inner(&gz, &ez);
                assert!((fd - an).abs() <= 1e-6 * an.abs(), "{region}: fd {fd} an {an}");
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences_and_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let h = 1e-5;
        for region in [Hurwitz, Schur] {
            let p = random_pencil(4, &mut rng);
            let g = random_point(4, Field::Complex, &mut rng);
            let e = evaluate(region, &p, &g).unwrap();
            let d1 = random_tangent(&g, &mut rng);
            let d2 = random_tangent(&g, &mut rng);
            let (hq, hz) = e.hessian_vec(region, &p, &d1.xq, &d1.xz, HessianMode::Strict).unwrap();

            let hh = c(h);
            let (pq, pz) = evaluate_ambient(region, &p, &(&g.q + &d1.xq * hh), &(&g.z + &d1.xz * hh)).gradient();
            let (mq, mz) = evaluate_ambient(region, &p, &(&g.q - &d1.xq * hh), &(&g.z - &d1.xz * hh)).gradient();
            let fq = (pq - mq) / c(2.0 * h);
            let fz = (pz - mz) / c(2.0 * h);
            let err = (frob_sq(&(&fq - &hq)) + frob_sq(&(&fz - &hz))).sqrt();
            let scale = (frob_sq(&hq) + frob_sq(&hz)).sqrt();
            assert!(err <= 1e-4 * scale, "{region}: {err} vs {scale}");

            let (h2q, h2z) = e.hessian_vec(region, &p, &d2.xq, &d2.xz, HessianMode::Strict).unwrap();
            let lhs = real_inner(&hq, &d2.xq) + real_inner(&hz, &d2.xz);
            let rhs = real_inner(&h2q, &d1.xq) + real_inner(&h2z, &d1.xz);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()), "{lhs} vs {rhs}");

            let zero = CMatrix::zeros(4, 4);
            let (zq, zz) = e.hessian_vec(region, &p, &zero, &zero, HessianMode::Strict).unwrap();
            assert_eq!(frob_sq(&zq) + frob_sq(&zz), 0.0);
        }
    }

    #[test]
    fn strict_hessian_rejects_medial_axis() {
        // diagonal (1, -1) sits on the Hurwitz medial axis
        let p = Pencil::from_real_rows(1, &[1.0], &[-1.0]).unwrap();
        let g = GroupPair::identity(1, Field::Real);
        let d = CMatrix::from_element(1, 1, c(1.0));
        assert!(matches!(euclidean_hessian_vec(Hurwitz, &p, &g, &d, &d), Err(Error::MedialAxis)));
        let e = evaluate(Hurwitz, &p, &g).unwrap();
        assert!(e.hessian_vec(Hurwitz, &p, &d, &d, HessianMode::Lenient).is_ok());
    }
}
