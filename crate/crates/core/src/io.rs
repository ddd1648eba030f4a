//! JSON pencil and result files, and whitespace `.dat` plot rows.
//!
//! Matrices are stored row-major as flat arrays of real and imaginary parts.
//! Floats are written in the shortest form that parses back to the same
//! `f64`, so files round-trip bitwise.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    jordan_structure, verify_stability, JordanReport, MinimizerResult, StabilityVerdict, EIGEN_TOL, VERIFY_TOL,
};
use crate::error::{Error, Result};
use crate::manifold::GroupPair;
use crate::pencil::{distance, triangular_eigenvalues, CMatrix, Field, GeneralizedEigenvalue, Pencil};
use crate::projection::StabilityRegion;
use crate::trust_region::{SolveReport, StopReason, TraceEntry};

fn row_major(m: &CMatrix, part: fn(&Complex64) -> f64) -> Vec<f64> {
    let n = m.nrows();
    (0..n * m.ncols()).map(|k| part(&m[(k / m.ncols(), k % m.ncols())])).collect()
}

fn from_row_major(n: usize, re: &[f64], im: Option<&[f64]>, name: &str) -> Result<CMatrix> {
    let len = n * n;
    if re.len() != len {
        return Err(Error::Format(format!("{name}_re has {} entries, expected {len}", re.len())));
    }
    if let Some(im) = im {
        if im.len() != len {
            return Err(Error::Format(format!("{name}_im has {} entries, expected {len}", im.len())));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let k = i * n + j;
        Complex64::new(re[k], im.map_or(0.0, |v| v[k]))
    }))
}

/// A square complex matrix as row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix, field: Field) -> Self {
        MatrixFile {
            n: m.nrows(),
            re: row_major(m, |z| z.re),
            im: (field == Field::Complex).then(|| row_major(m, |z| z.im)),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        from_row_major(self.n, &self.re, self.im.as_deref(), "matrix")
    }
}

/// On-disk pencil: `A_im` and `B_im` are omitted for real pencils.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilFile {
    pub n: usize,
    pub field: Field,
    #[serde(rename = "A_re")]
    pub a_re: Vec<f64>,
    #[serde(rename = "A_im", default, skip_serializing_if = "Option::is_none")]
    pub a_im: Option<Vec<f64>>,
    #[serde(rename = "B_re")]
    pub b_re: Vec<f64>,
    #[serde(rename = "B_im", default, skip_serializing_if = "Option::is_none")]
    pub b_im: Option<Vec<f64>>,
}

impl PencilFile {
    pub fn from_pencil(p: &Pencil) -> Self {
        let complex = p.field() == Field::Complex;
        PencilFile {
            n: p.n(),
            field: p.field(),
            a_re: row_major(p.a(), |z| z.re),
            a_im: complex.then(|| row_major(p.a(), |z| z.im)),
            b_re: row_major(p.b(), |z| z.re),
            b_im: complex.then(|| row_major(p.b(), |z| z.im)),
        }
    }

    pub fn to_pencil(&self) -> Result<Pencil> {
        if self.n == 0 {
            return Err(Error::Format("n must be positive".into()));
        }
        if self.field == Field::Real && (self.a_im.is_some() || self.b_im.is_some()) {
            let nonzero = |v: &Option<Vec<f64>>| v.as_ref().is_some_and(|v| v.iter().any(|&x| x != 0.0));
            if nonzero(&self.a_im) || nonzero(&self.b_im) {
                return Err(Error::Format("real pencil file carries nonzero imaginary parts".into()));
            }
        }
        let a = from_row_major(self.n, &self.a_re, self.a_im.as_deref(), "A")?;
        let b = from_row_major(self.n, &self.b_re, self.b_im.as_deref(), "B")?;
        if a.iter().chain(b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("non-finite entry".into()));
        }
        Pencil::new(a, b, self.field)
    }
}

pub fn pencil_to_json(p: &Pencil) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PencilFile::from_pencil(p))?)
}

pub fn pencil_from_json(s: &str) -> Result<Pencil> {
    serde_json::from_str::<PencilFile>(s)?.to_pencil()
}

pub fn read_pencil(path: impl AsRef<Path>) -> Result<Pencil> {
    pencil_from_json(&fs::read_to_string(path)?)
}

pub fn write_pencil(path: impl AsRef<Path>, p: &Pencil) -> Result<()> {
    fs::write(path, pencil_to_json(p)? + "\n")?;
    Ok(())
}

/// Solver summary stored alongside a minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub stop_reason: StopReason,
    pub objective_value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub wall_time_secs: f64,
    pub max_unitarity_defect: f64,
    pub trace: Vec<TraceEntry>,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        SolveSummary {
            stop_reason: r.stop_reason,
            objective_value: r.objective_value,
            grad_norm: r.grad_norm,
            iterations: r.iterations,
            wall_time_secs: r.wall_time.as_secs_f64(),
            max_unitarity_defect: r.max_unitarity_defect,
            trace: r.trace.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedFile {
    pub delta: f64,
    pub pencil: PencilFile,
    pub triangular: PencilFile,
    pub squared_distance: f64,
    pub stability: StabilityVerdict,
}

/// Everything the `solve` command reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub region: StabilityRegion,
    pub input: PencilFile,
    pub pencil: PencilFile,
    pub triangular: PencilFile,
    pub q: MatrixFile,
    pub z: MatrixFile,
    pub squared_distance: f64,
    pub distance: f64,
    pub eigenvalues: Vec<GeneralizedEigenvalue>,
    pub is_singular: bool,
    pub stability: StabilityVerdict,
    pub jordan: JordanReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularized: Option<RegularizedFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
}

/// Values recomputed from a parsed [`ResultFile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recheck {
    pub squared_distance: f64,
    pub stability: StabilityVerdict,
}

impl ResultFile {
    pub fn new(
        region: StabilityRegion,
        input: &Pencil,
        result: &MinimizerResult,
        tol: f64,
        regularized: Option<(f64, &MinimizerResult)>,
        solve: Option<&SolveReport>,
    ) -> Self {
        let field = input.field();
        ResultFile {
            region,
            input: PencilFile::from_pencil(input),
            pencil: PencilFile::from_pencil(&result.pencil),
            triangular: PencilFile::from_pencil(&result.triangular),
            q: MatrixFile::from_matrix(&result.transforms.q, field),
            z: MatrixFile::from_matrix(&result.transforms.z, field),
            squared_distance: result.squared_distance,
            distance: result.squared_distance.sqrt(),
            eigenvalues: result.eigenvalues.clone(),
            is_singular: result.is_singular,
            stability: verify_stability(region, result, VERIFY_TOL),
            jordan: jordan_structure(result, tol),
            regularized: regularized.map(|(delta, r)| RegularizedFile {
                delta,
                pencil: PencilFile::from_pencil(&r.pencil),
                triangular: PencilFile::from_pencil(&r.triangular),
                squared_distance: r.squared_distance,
                stability: verify_stability(region, r, VERIFY_TOL),
            }),
            solve: solve.map(SolveSummary::from),
        }
    }

    /// Rebuild the minimizer from the stored triangular form and transforms.
    pub fn minimizer(&self) -> Result<MinimizerResult> {
        let triangular = self.triangular.to_pencil()?;
        let field = triangular.field();
        let transforms = GroupPair::new(self.q.to_matrix()?, self.z.to_matrix()?, field)?;
        let eigenvalues = triangular_eigenvalues(&triangular, EIGEN_TOL)?;
        let is_singular = eigenvalues.iter().any(GeneralizedEigenvalue::is_indeterminate);
        Ok(MinimizerResult {
            pencil: self.pencil.to_pencil()?,
            triangular,
            transforms,
            squared_distance: self.squared_distance,
            eigenvalues,
            is_singular,
        })
    }

    /// Recompute the distance from the stored input and the stability
    /// verdict from the stored triangular form.
    pub fn recheck(&self) -> Result<Recheck> {
        let input = self.input.to_pencil()?;
        let m = self.minimizer()?;
        let d = distance(&input, &m.pencil)?;
        Ok(Recheck { squared_distance: d * d, stability: verify_stability(self.region, &m, VERIFY_TOL) })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Plot rows `<index> <value>` with 17 significant digits.
pub fn format_dat(rows: &[(usize, f64)]) -> String {
    let mut out = String::new();
    for (i, v) in rows {
        let _ = writeln!(out, "{i} {v:.16e}");
    }
    out
}

pub fn parse_dat(s: &str) -> Result<Vec<(usize, f64)>> {
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut parts = l.split_whitespace();
            let (Some(i), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Format(format!("bad .dat line `{l}`")));
            };
            let i = i.parse().map_err(|_| Error::Format(format!("bad index `{i}`")))?;
            let v = v.parse().map_err(|_| Error::Format(format!("bad value `{v}`")))?;
            Ok((i, v))
        })
        .collect()
}
