//! Post-processing of an optimizer output: the nearest pencil in the
//! original basis, its eigenvalues, a stability verdict, Jordan-chain
//! detection and regularization of singular minimizers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::GroupPair;
use crate::objective::evaluate;
use crate::pencil::{
    chordal_distance, distance, numerical_rank, triangular_eigenvalues, EigenKind, GeneralizedEigenvalue,
    Pencil,
};
use crate::projection::{is_stable_scalar, StabilityRegion};

/// Relative tolerance for reading eigenvalues off the triangular form.
pub const EIGEN_TOL: f64 = 1e-12;
/// Chordal distance below which two eigenvalues are treated as equal.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Relative tolerance used by [`verify_stability`] in reports.
pub const VERIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MinimizerResult {
    /// `Q^* T(QAZ + xQBZ) Z^*`.
    pub pencil: Pencil,
    /// `T(QAZ + xQBZ)`.
    pub triangular: Pencil,
    pub transforms: GroupPair,
    pub squared_distance: f64,
    pub eigenvalues: Vec<GeneralizedEigenvalue>,
    pub is_singular: bool,
}

impl MinimizerResult {
    fn from_triangular(triangular: Pencil, transforms: GroupPair, squared_distance: f64, tol: f64) -> Result<Self> {
        let pencil = triangular.transform(&transforms.q.adjoint(), &transforms.z.adjoint());
        let eigenvalues = triangular_eigenvalues(&triangular, tol)?;
        let is_singular = eigenvalues.iter().any(GeneralizedEigenvalue::is_indeterminate);
        Ok(MinimizerResult { pencil, triangular, transforms, squared_distance, eigenvalues, is_singular })
    }
}

/// Nearest pencil associated with the transforms `g`, with eigenvalues read
/// at the relative tolerance [`EIGEN_TOL`].
pub fn recover_minimizer(region: StabilityRegion, p: &Pencil, g: &GroupPair) -> Result<MinimizerResult> {
    recover_minimizer_with_tol(region, p, g, EIGEN_TOL)
}

pub fn recover_minimizer_with_tol(
    region: StabilityRegion,
    p: &Pencil,
    g: &GroupPair,
    tol: f64,
) -> Result<MinimizerResult> {
    let eval = evaluate(region, p, g)?;
    let triangular = eval.target.to_pencil(eval.rotated.field());
    MinimizerResult::from_triangular(triangular, g.clone(), eval.value, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    Stable,
    /// Every determinate diagonal entry is stable and at least one is `0 + x0`.
    SingularClosurePoint,
    Violation,
}

/// Check every diagonal entry of the triangular form. `tol` is relative to
/// the entry: Hurwitz entries need `Re(a conj b) >= -tol |s|^2`, Schur
/// entries `|a| <= |b| + tol |s|`.
pub fn verify_stability(region: StabilityRegion, result: &MinimizerResult, tol: f64) -> StabilityVerdict {
    let mut singular = false;
    for (i, ev) in result.eigenvalues.iter().enumerate() {
        if ev.is_indeterminate() {
            singular = true;
            continue;
        }
        let s = result.triangular.diag(i);
        let scaled_tol = match region {
            StabilityRegion::Hurwitz => tol * s.norm_sq(),
            StabilityRegion::Schur => tol * s.norm(),
        };
        if !is_stable_scalar(region, s, scaled_tol) {
            return StabilityVerdict::Violation;
        }
    }
    if singular {
        StabilityVerdict::SingularClosurePoint
    } else {
        StabilityVerdict::Stable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanCluster {
    pub eigenvalue: GeneralizedEigenvalue,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanReport {
    pub clusters: Vec<JordanCluster>,
    pub has_nontrivial_chain: bool,
    /// Relative rank tolerance.
    pub tol: f64,
    pub cluster_tol: f64,
}

/// Cluster the determinate eigenvalues (chordal distance `<= CLUSTER_TOL`,
/// single linkage) and compare each cluster size with the nullity of
/// `bA - aB` at the cluster representative, computed at rank tolerance
/// `tol ||P||`.
pub fn jordan_structure(result: &MinimizerResult, tol: f64) -> JordanReport {
    jordan_structure_with(result, tol, CLUSTER_TOL)
}

pub fn jordan_structure_with(result: &MinimizerResult, tol: f64, cluster_tol: f64) -> JordanReport {
    let tri = &result.triangular;
    let n = tri.n();
    let skipped = result.eigenvalues.iter().filter(|e| e.is_indeterminate()).count();
    if skipped > 0 {
        log::warn!("{skipped} indeterminate diagonal entries excluded from Jordan analysis");
    }
    let evs: Vec<&GeneralizedEigenvalue> = result.eigenvalues.iter().filter(|e| !e.is_indeterminate()).collect();

    // single-linkage clustering via union-find
    let mut parent: Vec<usize> = (0..evs.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..evs.len() {
        for j in 0..i {
            if chordal_distance((evs[i].a, evs[i].b), (evs[j].a, evs[j].b)) <= cluster_tol {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for i in 0..evs.len() {
        let r = root(&mut parent, i);
        match groups.iter_mut().find(|(rep, _)| *rep == r) {
            Some(g) => g.1 += 1,
            None => groups.push((r, 1)),
        }
    }

    let rank_tol = tol * tri.norm();
    let clusters: Vec<JordanCluster> = groups
        .into_iter()
        .map(|(rep, algebraic)| {
            let ev = *evs[rep];
            let scale = (ev.a.norm_sqr() + ev.b.norm_sqr()).sqrt();
            let (a, b) = (ev.a / scale, ev.b / scale);
            let m = tri.a() * b - tri.b() * a;
            let geometric = (n - numerical_rank(&m, rank_tol)).max(1);
            JordanCluster { eigenvalue: ev, algebraic_multiplicity: algebraic, geometric_multiplicity: geometric }
        })
        .collect();
    let has_nontrivial_chain = clusters.iter().any(|c| c.algebraic_multiplicity > c.geometric_multiplicity);
    JordanReport { clusters, has_nontrivial_chain, tol, cluster_tol }
}

/// Default regularization size `1e-10 ||P||`.
pub fn default_delta(p: &Pencil) -> f64 {
    1e-10 * p.norm()
}

/// Replace every indeterminate diagonal entry of the triangular form by
/// `0 + x delta` (eigenvalue 0, inside both regions) and map back to the
/// original basis. `squared_distance` is measured from `input`.
pub fn regularize_singular(input: &Pencil, result: &MinimizerResult, delta: f64) -> Result<MinimizerResult> {
    if !result.is_singular {
        return Err(Error::NotSingular);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let (mut a, mut b, field) = result.triangular.clone().into_parts();
    for (i, ev) in result.eigenvalues.iter().enumerate() {
        if ev.is_indeterminate() {
            a[(i, i)] = Complex64::new(0.0, 0.0);
            b[(i, i)] = Complex64::new(delta, 0.0);
        }
    }
    let triangular = Pencil::new(a, b, field)?;
    let pencil = triangular.transform(&result.transforms.q.adjoint(), &result.transforms.z.adjoint());
    let d = distance(input, &pencil)?;
    // keep the eigenvalue threshold below delta so the new entries read as finite
    let tol = (EIGEN_TOL).min(0.5 * delta / triangular.norm());
    let mut out = MinimizerResult::from_triangular(triangular, result.transforms.clone(), d * d, tol)?;
    out.pencil = pencil;
    Ok(out)
}

/// Number of eigenvalues of the given kind, for reporting.
pub fn count_kind(result: &MinimizerResult, pred: impl Fn(&EigenKind) -> bool) -> usize {
    result.eigenvalues.iter().filter(|e| pred(&e.kind)).count()
}
