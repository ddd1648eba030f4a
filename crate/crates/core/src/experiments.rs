//! Batch experiments on random pencils: distance versus size, distance
//! versus rank of the leading coefficient, and the frequency of nontrivial
//! Jordan chains in computed minimizers.
//!
//! Sample `k` draws its pencil (and random start) from a generator seeded
//! with `seed + k`. Samples run in parallel on a pool capped by the
//! `OMEGA_STAB_THREADS` environment variable; results are aggregated in
//! sample order.

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{jordan_structure, recover_minimizer, EIGEN_TOL};
use crate::error::{Error, Result};
use crate::generators::{gen_gaussian, truncate_rank};
use crate::pencil::{Field, Pencil};
use crate::projection::StabilityRegion;
use crate::trust_region::{solve, Init, SolveOptions, SolveReport};

pub const THREADS_ENV: &str = "OMEGA_STAB_THREADS";

/// Settings shared by every sample of an experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub region: StabilityRegion,
    pub field: Field,
    /// Start from the identity (`false`) or a random point (`true`).
    pub random_init: bool,
    pub budget: Duration,
    pub max_iter: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(region: StabilityRegion, field: Field, budget: Duration, seed: u64) -> Self {
        ExperimentConfig { region, field, random_init: false, budget, max_iter: usize::MAX, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    /// Size or rank.
    pub index: usize,
    pub mean_distance: f64,
    /// Mean of `distance / ||P||`.
    pub mean_relative_distance: f64,
    pub sample_count: usize,
    pub failures: usize,
    pub mean_wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanStats {
    pub n: usize,
    pub samples: usize,
    pub nontrivial: usize,
    pub failures: usize,
    /// `nontrivial / (samples - failures)`.
    pub fraction: f64,
}

/// Worker pool honoring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(k.max(1));
    }
    builder.build().map_err(|e| Error::InvalidArgument(e.to_string()))
}

struct Sample {
    distance: f64,
    relative: f64,
    wall_time: f64,
}

fn solve_sample(cfg: &ExperimentConfig, p: &Pencil, seed: u64) -> Result<SolveReport> {
    let mut opts = SolveOptions::for_pencil(p);
    opts.max_time = cfg.budget;
    opts.max_iter = cfg.max_iter;
    opts.seed = seed;
    opts.init = if cfg.random_init { Init::Random } else { Init::Identity };
    solve(cfg.region, p, &opts)
}

fn run_samples<F>(cfg: &ExperimentConfig, samples: usize, make: F) -> Result<Vec<Result<(Pencil, SolveReport)>>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Pencil> + Sync,
{
    let pool = thread_pool()?;
    Ok(pool.install(|| {
        (0..samples)
            .into_par_iter()
            .map(|k| {
                let seed = cfg.seed.wrapping_add(k as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = make(&mut rng)?;
                let r = solve_sample(cfg, &p, seed)?;
                Ok((p, r))
            })
            .collect()
    }))
}

fn aggregate(index: usize, outcomes: Vec<Result<(Pencil, SolveReport)>>) -> ExperimentRow {
    let mut ok = Vec::new();
    let mut failures = 0;
    for o in outcomes {
        match o {
            Ok((p, r)) => {
                let d = r.objective_value.max(0.0).sqrt();
                ok.push(Sample { distance: d, relative: d / p.norm(), wall_time: r.wall_time.as_secs_f64() });
            }
            Err(e) => {
                log::warn!("sample failed: {e}");
                failures += 1;
            }
        }
    }
    let m = ok.len().max(1) as f64;
    ExperimentRow {
        index,
        mean_distance: ok.iter().map(|s| s.distance).sum::<f64>() / m,
        mean_relative_distance: ok.iter().map(|s| s.relative).sum::<f64>() / m,
        sample_count: ok.len(),
        failures,
        mean_wall_time: ok.iter().map(|s| s.wall_time).sum::<f64>() / m,
    }
}

/// Mean distance of scaled Gaussian pencils for each size.
pub fn experiment_size_sweep(sizes: &[usize], samples: usize, cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes
        .into_iter()
        .map(|n| {
            let out = run_samples(cfg, samples, |rng| gen_gaussian(n, cfg.field, rng))?;
            Ok(aggregate(n, out))
        })
        .collect()
}

/// Mean distance of scaled Gaussian `n x n` pencils whose `B` is truncated to
/// each rank.
pub fn experiment_rank_sweep(
    n: usize,
    ranks: &[usize],
    samples: usize,
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentRow>> {
    let mut ranks = ranks.to_vec();
    ranks.sort_unstable();
    ranks
        .into_iter()
        .map(|r| {
            if r > n {
                return Err(Error::InvalidArgument(format!("rank {r} exceeds size {n}")));
            }
            let out = run_samples(cfg, samples, |rng| truncate_rank(&gen_gaussian(n, cfg.field, rng)?, r))?;
            Ok(aggregate(r, out))
        })
        .collect()
}

/// Fraction of computed minimizers with a nontrivial Jordan chain.
pub fn experiment_jordan_stats(n: usize, samples: usize, cfg: &ExperimentConfig) -> Result<JordanStats> {
    let out = run_samples(cfg, samples, |rng| gen_gaussian(n, cfg.field, rng))?;
    let mut nontrivial = 0;
    let mut failures = 0;
    for o in out {
        let chain = o.and_then(|(p, r)| {
            let m = recover_minimizer(cfg.region, &p, &r.minimizer)?;
            Ok(jordan_structure(&m, EIGEN_TOL).has_nontrivial_chain)
        });
        match chain {
            Ok(true) => nontrivial += 1,
            Ok(false) => {}
            Err(e) => {
                log::warn!("sample failed: {e}");
                failures += 1;
            }
        }
    }
    let done = samples - failures;
    Ok(JordanStats {
        n,
        samples,
        nontrivial,
        failures,
        fraction: if done == 0 { 0.0 } else { nontrivial as f64 / done as f64 },
    })
}

/// `(index, mean_distance)` pairs for a `.dat` file.
pub fn dat_rows(rows: &[ExperimentRow]) -> Vec<(usize, f64)> {
    rows.iter().map(|r| (r.index, r.mean_distance)).collect()
}
