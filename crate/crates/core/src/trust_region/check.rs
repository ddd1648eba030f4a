//! Finite-difference checks of the analytic gradient and Hessian.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::manifold::{egrad_to_rgrad, random_tangent, GroupPair};
use crate::objective::{evaluate, evaluate_ambient, HessianMode};
use crate::pencil::{real_inner, CMatrix, Pencil};
use crate::projection::StabilityRegion;

const GRAD_STEP: f64 = 1e-6;
const HESS_STEP: f64 = 1e-5;

/// Magnitude below which a difference quotient carries no information.
fn noise_floor(p: &Pencil) -> f64 {
    1e-9 * p.norm_sq().max(1.0)
}

fn relative(err: f64, a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.max(b);
    if scale <= floor {
        0.0
    } else {
        err / scale
    }
}

fn shifted(m: &CMatrix, d: &CMatrix, h: f64) -> CMatrix {
    m + d * num_complex::Complex64::new(h, 0.0)
}

/// Worst relative error between `<grad f, E>` and a central difference of
/// the ambient objective along `num_dirs` random tangent directions `E`,
/// measured against the scale `||rgrad f|| ||E||` of the directional
/// derivative. Quotients below the noise floor `1e-9 max(1, ||P||^2)` count
/// as exact.
pub fn gradient_check(
    region: StabilityRegion,
    p: &Pencil,
    point: &GroupPair,
    num_dirs: usize,
    seed: u64,
) -> Result<f64> {
    let eval = evaluate(region, p, point)?;
    let (gq, gz) = eval.gradient();
    let rgrad_norm = egrad_to_rgrad(point, &gq, &gz).norm();
    let floor = noise_floor(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..num_dirs {
        let e = random_tangent(point, &mut rng);
        let analytic = real_inner(&gq, &e.xq) + real_inner(&gz, &e.xz);
        let h = GRAD_STEP;
        let fp = evaluate_ambient(region, p, &shifted(&point.q, &e.xq, h), &shifted(&point.z, &e.xz, h)).value;
        let fm = evaluate_ambient(region, p, &shifted(&point.q, &e.xq, -h), &shifted(&point.z, &e.xz, -h)).value;
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max(relative((fd - analytic).abs(), rgrad_norm * e.norm(), fd.abs(), floor));
    }
    Ok(worst)
}

/// Worst relative error (in Frobenius norm) between the Euclidean
/// Hessian-vector product and a central difference of the Euclidean
/// gradient along `num_dirs` random tangent directions.
pub fn hessian_check(
    region: StabilityRegion,
    p: &Pencil,
    point: &GroupPair,
    num_dirs: usize,
    seed: u64,
) -> Result<f64> {
    let eval = evaluate(region, p, point)?;
    let floor = noise_floor(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..num_dirs {
        let e = random_tangent(point, &mut rng);
        let (hq, hz) = eval.hessian_vec(region, p, &e.xq, &e.xz, HessianMode::Lenient)?;
        let h = HESS_STEP;
        let gp = evaluate_ambient(region, p, &shifted(&point.q, &e.xq, h), &shifted(&point.z, &e.xz, h)).gradient();
        let gm = evaluate_ambient(region, p, &shifted(&point.q, &e.xq, -h), &shifted(&point.z, &e.xz, -h)).gradient();
        let inv = num_complex::Complex64::new(1.0 / (2.0 * h), 0.0);
        let fdq = (gp.0 - gm.0) * inv;
        let fdz = (gp.1 - gm.1) * inv;
        let err = ((&fdq - &hq).norm_squared() + (&fdz - &hz).norm_squared()).sqrt();
        let an = (hq.norm_squared() + hz.norm_squared()).sqrt();
        let fd = (fdq.norm_squared() + fdz.norm_squared()).sqrt();
        worst = worst.max(relative(err, an, fd, floor));
    }
    Ok(worst)
}
