//! `qcqp-admm`: generate instances, solve them, and run Monte-Carlo sweeps.
//!
//! Exit codes: 0 success, 1 a trial ended infeasible, 2 usage or I/O error.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use qcqp_admm::admm::{Engine, SolverConfig, TraceRow};
use qcqp_admm::apps::generate::PrNoise;
use qcqp_admm::apps::phase_retrieval::is_resolved;
use qcqp_admm::apps::{fpp_solve, gen_instance, mb_secondary, pr_solve, GenSpec, Instance, PrInit};
use qcqp_admm::instance::{read_instance, write_instance};
use qcqp_admm::rank1::PriorSpec;
use qcqp_admm::rootfind::RootMethod;
use qcqp_admm::{Field, SolveReport};

#[derive(Parser)]
#[command(name = "qcqp-admm", version, about = "Consensus-ADMM solver for non-convex QCQPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance file.
    Generate(GenerateArgs),
    /// Solve an instance file, one CSV row per trial.
    Solve(SolveArgs),
    /// Sweep over numbers of constraints and write one aggregate row per value.
    Campaign(CampaignArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Feasible point pursuit
    Fpp,
    /// Multicast beamforming
    Mb,
    /// Phase retrieval
    Pr,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Noiseless,
    Quantized,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum RootArg {
    Bisection,
    Newton,
}

#[derive(Args, Clone)]
struct GenParams {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = FieldArg::Complex, value_enum)]
    field: FieldArg,
    /// Phase retrieval measurement noise.
    #[arg(long, default_value_t = NoiseArg::Noiseless, value_enum)]
    noise: NoiseArg,
    #[arg(long, default_value_t = 20.0)]
    snr_db: f64,
    /// Primary users to protect (beamforming).
    #[arg(long, default_value_t = 0)]
    l: usize,
    /// SNR target (beamforming).
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Interference cap at primary users (beamforming).
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
}

impl GenParams {
    fn spec(&self, kind: Kind, m: usize) -> GenSpec {
        let n = self.n;
        match kind {
            Kind::Fpp => {
                let field = match self.field {
                    FieldArg::Real => Field::Real,
                    FieldArg::Complex => Field::Complex,
                };
                GenSpec::Fpp { n, m, field }
            }
            Kind::Mb => GenSpec::Beamforming { n, m, l: self.l, tau: self.tau, eta: self.eta },
            Kind::Pr => {
                let noise = match self.noise {
                    NoiseArg::Noiseless => PrNoise::Noiseless,
                    NoiseArg::Quantized => PrNoise::Quantized,
                    NoiseArg::Gaussian => PrNoise::Gaussian { snr_db: self.snr_db },
                };
                GenSpec::PhaseRetrieval { n, m, noise }
            }
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[command(flatten)]
    params: GenParams,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().rho)]
    rho: f64,
    /// Iteration cap of the optimization phase.
    #[arg(long, default_value_t = SolverConfig::default().max_iter_phase2)]
    max_iter: usize,
    /// Stop when successive iterates differ by less than this.
    #[arg(long, default_value_t = SolverConfig::default().tol_successive)]
    tol: f64,
    #[arg(long, default_value_t = RootArg::Bisection, value_enum)]
    root_method: RootArg,
    /// Re-initializations of the feasibility phase.
    #[arg(long, default_value_t = SolverConfig::default().restarts_phase1)]
    restarts: usize,
    /// Worker threads; trials run in parallel when above 1.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// First trial seed; trial k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            max_iter_phase2: self.max_iter,
            tol_successive: self.tol,
            restarts_phase1: self.restarts,
            root_method: match self.root_method {
                RootArg::Bisection => RootMethod::Bisection,
                RootArg::Newton => RootMethod::Newton,
            },
            seed,
            threads: 1,
            ..SolverConfig::default()
        }
    }

    fn seeds(&self) -> Vec<u64> {
        (0..self.trials).map(|k| self.seed + k).collect()
    }

    /// Runs `f` once per seed, in parallel when asked to, keeping seed order.
    fn map_trials<T: Send>(&self, f: impl Fn(u64) -> T + Sync + Send) -> Result<Vec<T>, String> {
        let seeds = self.seeds();
        if self.threads <= 1 {
            return Ok(seeds.into_iter().map(f).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(self.threads).build().map_err(|e| e.to_string())?;
        Ok(pool.install(|| seeds.into_par_iter().map(f).collect()))
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Per-iteration trace of the first trial (general and FPP instances).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Append rows to this CSV file instead of writing to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[command(flatten)]
    params: GenParams,
    /// Comma-separated numbers of constraints.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One solver run.
#[derive(Debug, Serialize)]
struct TrialRow {
    seed: u64,
    phase1_iters: usize,
    phase2_iters: usize,
    objective: f64,
    max_violation: f64,
    kkt_stationarity: f64,
    mse_db: Option<f64>,
    wall_time: f64,
}

impl TrialRow {
    fn new(seed: u64, r: &SolveReport) -> Self {
        TrialRow {
            seed,
            phase1_iters: r.iterations_phase1,
            phase2_iters: r.iterations_phase2,
            objective: r.objective,
            max_violation: r.max_violation,
            kkt_stationarity: r.kkt_stationarity,
            mse_db: r.mse_db,
            wall_time: r.wall_time,
        }
    }
}

/// One point of a sweep.
#[derive(Debug, Serialize)]
struct CampaignRow {
    n: usize,
    m: usize,
    trials: usize,
    feasible_rate: f64,
    /// Phase retrieval only.
    resolved_rate: Option<f64>,
    mean_objective: f64,
    mean_mse_db: Option<f64>,
    mean_phase1_iters: f64,
    mean_phase2_iters: f64,
    mean_wall_time: f64,
}


#[derive(Debug, Serialize)]
struct TraceCsvRow {
    iteration: usize,
    phase: u8,
    consensus: f64,
    successive: f64,
    objective: f64,
    max_violation: f64,
}

impl From<&TraceRow> for TraceCsvRow {
    fn from(t: &TraceRow) -> Self {
        TraceCsvRow {
            iteration: t.iteration,
            phase: t.phase,
            consensus: t.consensus,
            successive: t.successive,
            objective: t.objective,
            max_violation: t.max_violation,
        }
    }
}

enum Failure {
    Usage(String),
    Infeasible,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Solve(a) => solve(&a),
        Command::Campaign(a) => campaign(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn generate(a: &GenerateArgs) -> Result<(), Failure> {
    let inst = gen_instance(&a.params.spec(a.kind, a.m), a.seed)?;
    match &inst {
        Instance::Fpp(f) => {
            if let Some(x) = &f.x_feas {
                eprintln!("x_feas norm: {}", x.norm());
            }
        }
        Instance::PhaseRetrieval(p) => {
            if let Some(s) = &p.truth {
                eprintln!("s energy: {}", s.norm_squared());
            }
        }
        _ => {}
    }
    match &a.out {
        Some(path) => write_instance(path, &inst)?,
        None => println!("{}", qcqp_admm::instance::to_json(&inst)?),
    }
    Ok(())
}

fn solve_one(inst: &Instance, cfg: &SolverConfig) -> qcqp_admm::Result<SolveReport> {
    match inst {
        Instance::Generic(p) => qcqp_admm::admm::run(p, cfg),
        Instance::Fpp(f) => fpp_solve(f, cfg),
        Instance::Beamforming(b) => mb_secondary(b, cfg),
        Instance::PhaseRetrieval(p) => pr_solve(p, cfg, PriorSpec::None, &PrInit::Spectral),
    }
}

fn write_trace(inst: &Instance, cfg: &SolverConfig, path: &Path) -> Result<(), Failure> {
    let problem = match inst {
        Instance::Generic(p) => p.clone(),
        Instance::Fpp(f) => f.problem()?,
        _ => return Err(Failure::Usage("--trace is available for general and FPP instances".into())),
    };
    let mut w = csv::Writer::from_path(path)?;
    let mut err = None;
    Engine::new(&problem, cfg.clone())?.run_traced(&mut |row| {
        if err.is_none() {
            err = w.serialize(TraceCsvRow::from(row)).err();
        }
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    w.flush()?;
    Ok(())
}

/// CSV writer to stdout, or appending to `path` with a header only when the
/// file is new or empty.
fn row_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let (sink, header): (Box<dyn Write>, bool) = match path {
        Some(p) => {
            let f: File = OpenOptions::new().create(true).append(true).open(p)?;
            let empty = f.metadata()?.len() == 0;
            (Box::new(f), empty)
        }
        None => (Box::new(io::stdout()), true),
    };
    Ok(csv::WriterBuilder::new().has_headers(header).from_writer(sink))
}

fn solve(a: &SolveArgs) -> Result<(), Failure> {
    let inst = read_instance(&a.instance)?;
    if let Some(path) = &a.trace {
        write_trace(&inst, &a.solver.config(a.solver.seed), path)?;
    }
    let reports = a.solver.map_trials(|seed| solve_one(&inst, &a.solver.config(seed)).map(|r| (seed, r)))?;
    let mut w = row_writer(a.out.as_deref())?;
    let mut infeasible = 0;
    for rep in reports {
        let (seed, r) = rep?;
        infeasible += usize::from(!r.feasible);
        w.serialize(TrialRow::new(seed, &r))?;
    }
    w.flush()?;
    if infeasible > 0 {
        eprintln!("{infeasible} of {} trials infeasible", a.solver.trials);
        return Err(Failure::Infeasible);
    }
    Ok(())
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = v.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}

/// Four significant digits, for human-facing dB values.
fn significant4(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let decimals = (3 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn campaign(a: &CampaignArgs) -> Result<(), Failure> {
    let mut w = row_writer(a.out.as_deref())?;
    for &m in &a.m {
        let spec = a.params.spec(a.kind, m);
        // instance and solver share the trial seed
        let runs = a.solver.map_trials(|seed| {
            let inst = gen_instance(&spec, seed)?;
            let r = solve_one(&inst, &a.solver.config(seed))?;
            let resolved = match &inst {
                Instance::PhaseRetrieval(p) => p.truth.as_ref().map(|s| is_resolved(&r.x, s)),
                _ => None,
            };
            Ok::<_, qcqp_admm::Error>((r, resolved))
        })?;
        let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
        let k = runs.len() as f64;
        let mses: Vec<f64> = runs.iter().filter_map(|(r, _)| r.mse_db).collect();
        let row = CampaignRow {
            n: a.params.n,
            m,
            trials: runs.len(),
            feasible_rate: runs.iter().filter(|(r, _)| r.feasible).count() as f64 / k,
            resolved_rate: matches!(a.kind, Kind::Pr)
                .then(|| runs.iter().filter(|(_, ok)| *ok == Some(true)).count() as f64 / k),
            mean_objective: mean(runs.iter().map(|(r, _)| r.objective)),
            mean_mse_db: (!mses.is_empty()).then(|| mean(mses.iter().copied())),
            mean_phase1_iters: mean(runs.iter().map(|(r, _)| r.iterations_phase1 as f64)),
            mean_phase2_iters: mean(runs.iter().map(|(r, _)| r.iterations_phase2 as f64)),
            mean_wall_time: mean(runs.iter().map(|(r, _)| r.wall_time)),
        };
        match row.mean_mse_db {
            Some(db) => eprintln!("m = {m}: feasible {:.3}, mean MSE {} dB", row.feasible_rate, significant4(db)),
            None => eprintln!("m = {m}: feasible {:.3}", row.feasible_rate),
        }
        w.serialize(row)?;
        w.flush()?;
    }
    Ok(())
}
