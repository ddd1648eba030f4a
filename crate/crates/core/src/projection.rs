//! Projection of a scalar pencil `a + xb` onto the closure of the stable set.
//!
//! * Hurwitz: eigenvalue `-a/b` in the closed left half-plane or at infinity,
//!   i.e. `Re(a conj(b)) >= 0`.
//! * Schur: eigenvalue in the closed unit disc, i.e. `|a| <= |b|`.
//!
//! For the Hurwitz region the projection comes from a Lagrange system with
//! multiplier `lambda` solving `lambda^2 - 2 alpha lambda + 1 = 0`, where
//! `alpha = ||s||^2 / (2 Re(a conj(b)))`. Every quantity below is evaluated
//! through `||a + b||` and `||a - b||`, which removes the cancellation in
//! `alpha + 1`, `sqrt(alpha^2 - 1)` and `1 - lambda^2` near the medial axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pencil::ScalarPencil;

/// Threshold on `|alpha + 1|` below which a Hurwitz input is treated as lying
/// on the medial axis.
pub const MEDIAL_AXIS_TOL: f64 = 1e-10;

/// Closed stability region on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityRegion {
    /// Closed left half-plane together with the point at infinity.
    Hurwitz,
    /// Closed unit disc.
    Schur,
}

impl std::str::FromStr for StabilityRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hurwitz" => Ok(StabilityRegion::Hurwitz),
            "schur" => Ok(StabilityRegion::Schur),
            other => Err(Error::Format(format!("unknown region `{other}`"))),
        }
    }
}

impl std::fmt::Display for StabilityRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilityRegion::Hurwitz => "hurwitz",
            StabilityRegion::Schur => "schur",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub projected: ScalarPencil,
    /// Distance from the input to the stable set.
    pub residual_distance: f64,
    pub on_medial_axis: bool,
    /// Hurwitz Lagrange multiplier, when the non-degenerate branch fired.
    pub lambda: Option<f64>,
    /// Hurwitz ratio `alpha`, for unstable Hurwitz inputs.
    pub alpha: Option<f64>,
}

impl ProjectionResult {
    fn identity(s: ScalarPencil) -> Self {
        ProjectionResult {
            projected: s,
            residual_distance: 0.0,
            on_medial_axis: false,
            lambda: None,
            alpha: None,
        }
    }
}

/// `Re(a conj(b)) = a1 a3 + a2 a4`.
#[inline]
fn pairing(s: ScalarPencil) -> f64 {
    s.a.re * s.b.re + s.a.im * s.b.im
}

pub fn is_stable_scalar(region: StabilityRegion, s: ScalarPencil, tol: f64) -> bool {
    match region {
        StabilityRegion::Hurwitz => pairing(s) >= -tol,
        StabilityRegion::Schur => s.a.norm() <= s.b.norm() + tol,
    }
}

/// Quantities shared by the Hurwitz projection and its derivative, for an
/// input with `Re(a conj b) < 0` off the medial axis.
struct HurwitzParts {
    c: f64,
    alpha: f64,
    /// `sqrt(alpha^2 - 1)`
    root: f64,
    lambda: f64,
    /// `1 - lambda^2`
    one_minus_l2: f64,
}

impl HurwitzParts {
    fn new(s: ScalarPencil) -> Self {
        let c = pairing(s);
        let nsq = s.norm_sq();
        let plus = (s.a + s.b).norm();
        let minus = (s.a - s.b).norm();
        let den = nsq + plus * minus;
        let lambda = 2.0 * c / den;
        let one_minus_l2 = minus * (minus + plus) / den * (plus * (plus + minus) / den);
        HurwitzParts {
            c,
            alpha: nsq / (2.0 * c),
            root: plus * minus / (2.0 * c.abs()),
            lambda,
            one_minus_l2,
        }
    }
}

/// `alpha + 1 = ||a + b||^2 / (2 Re(a conj b))`, without cancellation.
fn hurwitz_alpha_plus_one(s: ScalarPencil) -> f64 {
    (s.a + s.b).norm_sqr() / (2.0 * pairing(s))
}

/// Nearest point of the closed stable set. Ties on the medial axis are broken
/// deterministically: Hurwitz returns `(a, 0)`, Schur returns `(a/2, a/2)`.
pub fn project(region: StabilityRegion, s: ScalarPencil) -> ProjectionResult {
    if is_stable_scalar(region, s, 0.0) {
        return ProjectionResult::identity(s);
    }
    match region {
        StabilityRegion::Hurwitz => {
            if hurwitz_alpha_plus_one(s).abs() <= MEDIAL_AXIS_TOL {
                let projected = ScalarPencil::new(s.a, Complex64::new(0.0, 0.0));
                return ProjectionResult {
                    projected,
                    residual_distance: (s - projected).norm(),
                    on_medial_axis: true,
                    lambda: Some(-1.0),
                    alpha: Some(pairing_alpha(s)),
                };
            }
            let h = HurwitzParts::new(s);
            let scale = 1.0 / h.one_minus_l2;
            let projected = ScalarPencil::new((s.a - s.b * h.lambda) * scale, (s.b - s.a * h.lambda) * scale);
            ProjectionResult {
                projected,
                residual_distance: (h.c * h.lambda).sqrt(),
                on_medial_axis: false,
                lambda: Some(h.lambda),
                alpha: Some(h.alpha),
            }
        }
        StabilityRegion::Schur => {
            let (na, nb) = (s.a.norm(), s.b.norm());
            if nb == 0.0 {
                let half = s.a * 0.5;
                return ProjectionResult {
                    projected: ScalarPencil::new(half, half),
                    residual_distance: std::f64::consts::FRAC_1_SQRT_2 * na,
                    on_medial_axis: true,
                    lambda: None,
                    alpha: None,
                };
            }
            let r = 0.5 * (na + nb);
            ProjectionResult {
                projected: ScalarPencil::new(s.a * (r / na), s.b * (r / nb)),
                residual_distance: std::f64::consts::FRAC_1_SQRT_2 * (na - nb),
                on_medial_axis: false,
                lambda: None,
                alpha: None,
            }
        }
    }
}

fn pairing_alpha(s: ScalarPencil) -> f64 {
    s.norm_sq() / (2.0 * pairing(s))
}

/// Whether the projection is non-unique at `s`.
pub fn on_medial_axis(region: StabilityRegion, s: ScalarPencil) -> bool {
    if is_stable_scalar(region, s, 0.0) {
        return false;
    }
    match region {
        StabilityRegion::Hurwitz => hurwitz_alpha_plus_one(s).abs() <= MEDIAL_AXIS_TOL,
        StabilityRegion::Schur => s.b.norm() == 0.0,
    }
}

/// Directional derivative of [`project`] at `s` in direction `ds`.
///
/// Stable inputs (including the boundary) use the identity derivative, since
/// the projection coincides with the identity on the stable side. Medial-axis
/// inputs are rejected with [`Error::MedialAxis`].
pub fn dproject(region: StabilityRegion, s: ScalarPencil, ds: ScalarPencil) -> Result<ScalarPencil> {
    if is_stable_scalar(region, s, 0.0) {
        return Ok(ds);
    }
    if on_medial_axis(region, s) {
        return Err(Error::MedialAxis);
    }
    Ok(match region {
        StabilityRegion::Hurwitz => dproject_hurwitz(s, ds),
        StabilityRegion::Schur => dproject_schur(s, ds),
    })
}

/// Like [`dproject`], but differentiates the tie-break map on the medial axis
/// instead of failing.
pub fn dproject_lenient(region: StabilityRegion, s: ScalarPencil, ds: ScalarPencil) -> ScalarPencil {
    match dproject(region, s, ds) {
        Ok(d) => d,
        Err(_) => match region {
            StabilityRegion::Hurwitz => ScalarPencil::new(ds.a, Complex64::new(0.0, 0.0)),
            StabilityRegion::Schur => ScalarPencil::new(ds.a * 0.5, ds.a * 0.5),
        },
    }
}

fn dproject_hurwitz(s: ScalarPencil, ds: ScalarPencil) -> ScalarPencil {
    let h = HurwitzParts::new(s);
    let x = s.to_r4();
    let d = ds.to_r4();
    let swapped = [x[2], x[3], x[0], x[1]];
    let dot = |u: &[f64; 4], v: &[f64; 4]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();

    let dalpha = dot(&x, &d) / h.c - s.norm_sq() / (2.0 * h.c * h.c) * dot(&swapped, &d);
    // d(lambda)/d(alpha) = 1 + alpha / sqrt(alpha^2 - 1) = lambda / sqrt(alpha^2 - 1)
    let dlambda = h.lambda / h.root * dalpha;

    let inv = 1.0 / h.one_minus_l2;
    let outer = 2.0 * h.lambda * dlambda * inv * inv;
    let l = h.lambda;
    let da = (ds.a - ds.b * l - s.b * dlambda) * inv + (s.a - s.b * l) * outer;
    let db = (ds.b - ds.a * l - s.a * dlambda) * inv + (s.b - s.a * l) * outer;
    ScalarPencil::new(da, db)
}

fn dproject_schur(s: ScalarPencil, ds: ScalarPencil) -> ScalarPencil {
    let re_inner = |x: Complex64, y: Complex64| x.re * y.re + x.im * y.im;
    let (a, b, c, d) = (s.a, s.b, ds.a, ds.b);
    let (na, nb) = (a.norm(), b.norm());
    let ac = re_inner(a, c);
    let bd = re_inner(b, d);
    let da = (c + a * (bd / (na * nb)) - a * (ac * nb / (na * na * na)) + c * (nb / na)) * 0.5;
    let db = (d + b * (ac / (na * nb)) - b * (bd * na / (nb * nb * nb)) + d * (na / nb)) * 0.5;
    ScalarPencil::new(da, db)
}
