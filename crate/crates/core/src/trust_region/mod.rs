//! Riemannian trust-region minimization of the Schur-form objective.

mod check;
mod tcg;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use check::{gradient_check, hessian_check};
pub use tcg::{tcg_subproblem, TangentVector, TcgOutcome, TcgParams, TcgStop};

use crate::error::{Error, Result};
use crate::manifold::{self, egrad_to_rgrad, ehess_to_rhess, retract, GroupPair, TangentPair};
use crate::objective::{evaluate, HessianMode, ObjectiveEvaluation};
use crate::pencil::{CMatrix, Field, Pencil};
use crate::projection::StabilityRegion;

/// Starting point of the optimization.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Identity,
    Random,
    Provided(GroupPair),
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub max_time: Duration,
    /// Stop once the Riemannian gradient norm drops to this value.
    pub grad_tol: f64,
    /// Largest trust radius.
    pub delta_bar: f64,
    pub delta0: f64,
    /// Acceptance threshold on the actual/predicted reduction ratio.
    pub rho_prime: f64,
    pub tcg_max_inner: usize,
    pub tcg_kappa: f64,
    pub tcg_theta: f64,
    pub seed: u64,
    pub init: Init,
}

impl SolveOptions {
    /// Defaults scaled to the pencil: `delta_bar = sqrt(2n)`,
    /// `delta0 = delta_bar / 8`, `grad_tol = 1e-8 max(1, ||P||)`.
    pub fn for_pencil(p: &Pencil) -> Self {
        let n = p.n();
        let delta_bar = (2.0 * n as f64).sqrt();
        let dim = match p.field() {
            Field::Complex => 2 * n * n,
            Field::Real => n * n.saturating_sub(1),
        };
        SolveOptions {
            max_iter: 1000,
            max_time: Duration::from_secs(3600),
            grad_tol: 1e-8 * p.norm().max(1.0),
            delta_bar,
            delta0: delta_bar / 8.0,
            rho_prime: 0.1,
            tcg_max_inner: dim.max(1),
            tcg_kappa: 0.1,
            tcg_theta: 1.0,
            seed: 0,
            init: Init::Identity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOptions(m.to_string()));
        if !(self.delta0 > 0.0 && self.delta0 <= self.delta_bar) {
            return bad("require 0 < delta0 <= delta_bar");
        }
        if !(self.rho_prime >= 0.0 && self.rho_prime < 0.25) {
            return bad("require 0 <= rho_prime < 1/4");
        }
        if !(self.grad_tol > 0.0) {
            return bad("require grad_tol > 0");
        }
        if !(self.tcg_kappa > 0.0 && self.tcg_theta >= 0.0) {
            return bad("require tcg_kappa > 0 and tcg_theta >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradTol,
    MaxIter,
    MaxTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Objective at the current iterate (after the accept/reject decision).
    pub f: f64,
    pub grad_norm: f64,
    /// Trust radius used for the next iteration.
    pub radius: f64,
    pub step_accepted: bool,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub minimizer: GroupPair,
    pub objective_value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub wall_time: Duration,
    pub trace: Vec<TraceEntry>,
    pub stop_reason: StopReason,
    /// Largest unitarity defect over all iterates.
    pub max_unitarity_defect: f64,
}

struct Iterate {
    point: GroupPair,
    eval: ObjectiveEvaluation,
    egrad: (CMatrix, CMatrix),
    rgrad: TangentPair,
}

impl Iterate {
    fn new(region: StabilityRegion, p: &Pencil, point: GroupPair) -> Result<Self> {
        let eval = evaluate(region, p, &point)?;
        let egrad = eval.gradient();
        let rgrad = egrad_to_rgrad(&point, &egrad.0, &egrad.1);
        Ok(Iterate { point, eval, egrad, rgrad })
    }

    fn hess(&self, region: StabilityRegion, p: &Pencil, x: &TangentPair) -> TangentPair {
        let (hq, hz) = self
            .eval
            .hessian_vec(region, p, &x.xq, &x.xz, HessianMode::Lenient)
            .expect("lenient Hessian never fails");
        ehess_to_rhess(&self.point, (&self.egrad.0, &self.egrad.1), (&hq, &hz), x)
    }
}

fn initial_point(p: &Pencil, opts: &SolveOptions) -> Result<GroupPair> {
    let n = p.n();
    let field = p.field();
    match &opts.init {
        Init::Identity => Ok(GroupPair::identity(n, field)),
        Init::Random => Ok(manifold::random_point(n, field, &mut ChaCha8Rng::seed_from_u64(opts.seed))),
        Init::Provided(g) => {
            if g.n() != n {
                return Err(Error::SizeMismatch { expected: n, actual: g.n() });
            }
            if field == Field::Real && g.field != Field::Real {
                return Err(Error::InvalidOptions("real pencils need an orthogonal starting point".into()));
            }
            g.validate()?;
            Ok(g.clone())
        }
    }
}

/// Minimize `f(Q, Z)` over the unitary (orthogonal, for real pencils) group
/// pair.
pub fn solve(region: StabilityRegion, p: &Pencil, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let start = Instant::now();
    let params = TcgParams { max_inner: opts.tcg_max_inner, kappa: opts.tcg_kappa, theta: opts.tcg_theta };

    let mut cur = Iterate::new(region, p, initial_point(p, opts)?)?;
    let mut grad_norm = cur.rgrad.norm();
    let mut delta = opts.delta0;
    let mut max_defect = cur.point.unitarity_defect();
    let mut trace = vec![TraceEntry { iteration: 0, f: cur.eval.value, grad_norm, radius: delta, step_accepted: true }];
    let mut iter = 0;

    let stop_reason = loop {
        if grad_norm <= opts.grad_tol {
            break StopReason::GradTol;
        }
        if iter >= opts.max_iter {
            break StopReason::MaxIter;
        }
        if start.elapsed() >= opts.max_time {
            break StopReason::MaxTime;
        }
        iter += 1;

        let out = tcg_subproblem(&cur.rgrad, |x| cur.hess(region, p, x), delta, params);
        let mut step = out.step.clone();
        let candidate = loop {
            match retract(&cur.point, &step, 1.0) {
                Ok(g) => break g,
                Err(Error::RankDeficient) => step = step.scale(0.5),
                Err(e) => return Err(e),
            }
        };
        let f = cur.eval.value;
        let next = Iterate::new(region, p, candidate)?;

        let predicted = -out.model_value(&cur.rgrad);
        let reg = 1e-15 * f.abs().max(1.0);
        let rho = (f - next.eval.value + reg) / (predicted + reg);
        let model_decreased = predicted >= 0.0;

        let hit_boundary = matches!(out.stop, TcgStop::NegativeCurvature | TcgStop::ExceededRadius);
        if rho.is_nan() || rho < 0.25 || !model_decreased {
            delta /= 4.0;
        } else if rho > 0.75 && hit_boundary {
            delta = (2.0 * delta).min(opts.delta_bar);
        }

        let accept = model_decreased && rho > opts.rho_prime && next.eval.value <= f;
        if accept {
            cur = next;
            if cur.point.repair_drift() {
                cur = Iterate::new(region, p, cur.point)?;
            }
            grad_norm = cur.rgrad.norm();
            max_defect = max_defect.max(cur.point.unitarity_defect());
        }
        trace.push(TraceEntry { iteration: iter, f: cur.eval.value, grad_norm, radius: delta, step_accepted: accept });
    };

    log::debug!("solve stopped after {iter} iterations: {stop_reason:?}, f = {:e}", cur.eval.value);
    Ok(SolveReport {
        objective_value: cur.eval.value,
        minimizer: cur.point,
        grad_norm,
        iterations: iter,
        wall_time: start.elapsed(),
        trace,
        stop_reason,
        max_unitarity_defect: max_defect,
    })
}

/// Run `restarts` random-start solves with seeds `opts.seed + k` (in
/// parallel on the current rayon pool) and keep the lowest objective. The
/// first run uses `opts.init`; later runs start at random points.
pub fn solve_multistart(
    region: StabilityRegion,
    p: &Pencil,
    opts: &SolveOptions,
    restarts: usize,
) -> Result<SolveReport> {
    let runs = restarts.max(1);
    let reports: Vec<Result<SolveReport>> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let mut o = opts.clone();
            o.seed = opts.seed.wrapping_add(k as u64);
            if k > 0 && !matches!(o.init, Init::Random) {
                o.init = Init::Random;
            }
            solve(region, p, &o)
        })
        .collect();
    let mut best: Option<SolveReport> = None;
    for r in reports {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.objective_value < b.objective_value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one run"))
}
