use std::path::Path;
use std::time::Duration;

use nearstab_core::analysis::{default_delta, recover_minimizer_with_tol, regularize_singular};
use nearstab_core::experiments::{dat_rows, thread_pool};
use nearstab_core::io::{format_dat, pencil_to_json, read_pencil, write_pencil};
use nearstab_core::{
    experiment_jordan_stats, experiment_rank_sweep, experiment_size_sweep, gen_gaussian, gen_grcar, gen_oscillator,
    project, solve_multistart, truncate_rank, Error, ExperimentConfig, Field, Init, Pencil, ResultFile,
    ScalarPencil, SolveOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Cli, Command, ExperimentArgs, ExperimentKind, GenerateArgs, GenerateKind, InitKind, ProjectArgs, SolveArgs};

pub type Result<T> = nearstab_core::Result<T>;

pub const EXIT_IO: u8 = 3;
pub const EXIT_PARSE: u8 = 4;
pub const EXIT_INVALID: u8 = 5;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Json(_) | Error::Format(_) => EXIT_PARSE,
        _ => EXIT_INVALID,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Project(a) => run_project(a),
        Command::Generate(a) => run_generate(a),
        Command::Experiment(a) => run_experiment(a),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| Error::InvalidArgument(format!("bad time budget {s}")))
}

fn with_field(p: Pencil, field: Option<Field>) -> Result<Pencil> {
    match field {
        None => Ok(p),
        Some(f) if f == p.field() => Ok(p),
        Some(f) => {
            let (a, b, _) = p.into_parts();
            Pencil::new(a, b, f)
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<()> {
    let p = with_field(read_pencil(&args.input)?, args.field)?;
    let mut opts = SolveOptions::for_pencil(&p);
    if let Some(k) = args.max_iter {
        opts.max_iter = k;
    }
    if let Some(t) = args.max_time {
        opts.max_time = seconds(t)?;
    }
    if let Some(g) = args.grad_tol {
        opts.grad_tol = g;
    }
    opts.seed = args.seed;
    opts.init = match args.init {
        InitKind::Identity => Init::Identity,
        InitKind::Random => Init::Random,
    };
    if !(args.tol >= 0.0) {
        return Err(Error::InvalidArgument("tol must be nonnegative".into()));
    }

    let pool = thread_pool()?;
    let report = pool.install(|| solve_multistart(args.region, &p, &opts, args.restarts))?;
    let result = recover_minimizer_with_tol(args.region, &p, &report.minimizer, args.tol)?;
    let delta = args.delta.unwrap_or_else(|| default_delta(&p));
    let regularized = if result.is_singular { Some(regularize_singular(&p, &result, delta)?) } else { None };
    let file = ResultFile::new(
        args.region,
        &p,
        &result,
        args.tol,
        regularized.as_ref().map(|r| (delta, r)),
        Some(&report),
    );
    eprintln!(
        "squared distance {:.12e} ({:?} after {} iterations, {:.2} s)",
        result.squared_distance,
        report.stop_reason,
        report.iterations,
        report.wall_time.as_secs_f64()
    );
    emit(args.output.as_deref(), &(file.to_json()? + "\n"))
}

fn run_project(args: ProjectArgs) -> Result<()> {
    let s = ScalarPencil::new(
        num_complex::Complex64::new(args.a_re, args.a_im),
        num_complex::Complex64::new(args.b_re, args.b_im),
    );
    if !s.is_finite() {
        return Err(Error::InvalidArgument("scalar pencil must be finite".into()));
    }
    let r = project(args.region, s);
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let p = match args.kind {
        GenerateKind::Grcar { n } => gen_grcar(n)?,
        GenerateKind::Oscillator { n, eps } => gen_oscillator(n, eps)?,
        GenerateKind::Gaussian { n, field, seed, rank } => {
            let p = gen_gaussian(n, field, &mut ChaCha8Rng::seed_from_u64(seed))?;
            match rank {
                Some(r) => truncate_rank(&p, r)?,
                None => p,
            }
        }
    };
    match args.output {
        Some(path) => write_pencil(path, &p),
        None => {
            println!("{}", pencil_to_json(&p)?);
            Ok(())
        }
    }
}

fn run_experiment(args: ExperimentArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::new(args.region, args.field, seconds(args.max_time)?, args.seed);
    cfg.random_init = args.init == InitKind::Random;
    if let Some(k) = args.max_iter {
        cfg.max_iter = k;
    }
    if args.samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let text = match args.kind {
        ExperimentKind::Size { sizes } => {
            let rows = experiment_size_sweep(&sizes, args.samples, &cfg)?;
            for r in &rows {
                eprintln!("n = {:3}: mean distance {:.6} over {} samples ({} failed)", r.index, r.mean_distance, r.sample_count, r.failures);
            }
            format_dat(&dat_rows(&rows))
        }
        ExperimentKind::Rank { n, ranks } => {
            let ranks = if ranks.is_empty() { (1..n).collect() } else { ranks };
            let rows = experiment_rank_sweep(n, &ranks, args.samples, &cfg)?;
            for r in &rows {
                eprintln!("r = {:3}: mean distance {:.6} over {} samples ({} failed)", r.index, r.mean_distance, r.sample_count, r.failures);
            }
            format_dat(&dat_rows(&rows))
        }
        ExperimentKind::Jordan { n } => {
            let stats = experiment_jordan_stats(n, args.samples, &cfg)?;
            eprintln!("{} of {} minimizers have a nontrivial Jordan chain", stats.nontrivial, stats.samples - stats.failures);
            serde_json::to_string_pretty(&stats)? + "\n"
        }
    };
    emit(args.output.as_deref(), &text)
}
