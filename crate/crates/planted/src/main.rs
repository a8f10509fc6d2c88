use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use planted::experiment::{generate, run_error_experiment, run_solver, ExperimentConfig, Pipeline, SolverName, SolverSpec};
use planted::io::{self, Instance, SolverInput};
use planted::schedule::{param_schedule, Theorem};
use planted::sweep::{self, phase_sweep, GridPoint};
use planted::validate::{run_check, CHECKS};
use planted_core::{Hypothesis, Problem, ProblemParams, RandomStream};
use serde::Serialize;

const SEED_ENV: &str = "PLANTED_SEED";

#[derive(Parser)]
#[command(name = "planted", version, about = "Planted-problem generators, reductions, solvers and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one instance and print it as JSON.
    Generate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_parser = parse_hypothesis, default_value = "H1")]
        hypothesis: Hypothesis,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a source graph and map it through a reduction.
    Reduce {
        #[arg(long, value_parser = parse_problem)]
        from: Problem,
        #[arg(long, value_parser = parse_problem)]
        to: Problem,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        ell: u32,
        /// Planted-density excess for dense-subgraph sources: `p = 1/2 + rho`.
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        /// Rotation padding factor (defaults to max(2, ⌈ln k⌉)).
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, value_parser = parse_hypothesis, default_value = "H1")]
        hypothesis: Hypothesis,
        /// Include the latent trace of the planted structure.
        #[arg(long)]
        trace: bool,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a solver on an instance or reduction output file.
    Solve {
        #[arg(long, value_enum)]
        algorithm: SolverName,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        overrides: SolverArgs,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate Type I and Type II error from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run built-in distributional checks.
    Validate {
        /// Check name, or `all`.
        #[arg(long, default_value = "all")]
        check: String,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a hardness-theorem parameter schedule.
    Schedule {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run a config over an (alpha, beta) grid and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        betas: Vec<f64>,
        /// Size at every grid point (defaults to the config's n).
        #[arg(long)]
        n: Option<usize>,
        /// JSON list of grid points, used instead of alphas × betas.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, value_parser = parse_problem)]
    problem: Problem,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 0.1)]
    delta_ssbm: f64,
    #[arg(long, default_value_t = 0.1)]
    delta_bspca: f64,
}

impl ParamArgs {
    fn params(&self) -> ProblemParams {
        ProblemParams {
            problem: self.problem,
            n: self.n,
            k: self.k,
            d: self.d,
            p: self.p,
            q: self.q,
            rho: self.rho,
            mu: self.mu,
            theta: self.theta,
            delta_ssbm: self.delta_ssbm,
            delta_bspca: self.delta_bspca,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    c_ratio: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    scan_subgraphs: bool,
    #[arg(long, value_enum)]
    recover: Option<SolverName>,
}

fn parse_problem(s: &str) -> Result<Problem, String> {
    s.parse().map_err(|e: planted_core::Error| e.to_string())
}

fn parse_hypothesis(s: &str) -> Result<Hypothesis, String> {
    match s.to_ascii_uppercase().as_str() {
        "H0" => Ok(Hypothesis::H0),
        "H1" => Ok(Hypothesis::H1),
        _ => Err(format!("hypothesis must be H0 or H1, got `{s}`")),
    }
}

fn emit<T: Serialize>(value: &T, output: Option<&PathBuf>) -> anyhow::Result<()> {
    match output {
        Some(path) => io::save(path, value).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{}", io::to_json(value)?),
    }
    Ok(())
}

fn seed_override(seed: u64) -> anyhow::Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}={v} is not an unsigned integer")),
        Err(_) => Ok(seed),
    }
}

fn load_config(path: &PathBuf) -> anyhow::Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = io::load(path).with_context(|| format!("reading config {}", path.display()))?;
    cfg.seed = seed_override(cfg.seed)?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate { params, hypothesis, seed, output } => {
            let mut rng = RandomStream::new(seed).rng();
            let inst = generate(&params.params(), hypothesis, &mut rng)?;
            emit(&inst, output.as_ref())?;
        }
        Command::Reduce { from, to, n, k, ell, rho, tau, hypothesis, trace, seed, output } => {
            let tau = tau.unwrap_or_else(|| ((k as f64).ln().ceil() as usize).max(2));
            let pipeline = Pipeline::between(from, to, ell, rho, tau)?;
            let source = match from {
                Problem::PC => ProblemParams::pc(n, k, 0.5),
                Problem::PDS => ProblemParams::pds(n, k, 0.5 + rho, 0.5),
                other => bail!("reductions start from PC or PDS, not {other}"),
            };
            let root = RandomStream::new(seed);
            let mut rng = root.split(0).rng();
            let Instance::Graph(g) = generate(&source, hypothesis, &mut rng)? else { unreachable!() };
            let support = if trace { g.support.as_ref() } else { None };
            let mut rng = root.split(1).rng();
            let out = pipeline.apply(&g.graph, k, support, &mut rng)?;
            emit(&out, output.as_ref())?;
        }
        Command::Solve { algorithm, input, overrides: o, seed } => {
            let data: SolverInput = io::load(&input).with_context(|| format!("reading {}", input.display()))?;
            let (obs, params) = data.parts();
            let spec = SolverSpec {
                name: algorithm,
                k: o.k,
                mu: o.mu,
                p: o.p,
                q: o.q,
                c_ratio: o.c_ratio,
                theta: o.theta,
                delta: o.delta,
                rho: o.rho,
                c1: o.c1,
                scan_subgraphs: o.scan_subgraphs,
                recover: o.recover,
            };
            let mut rng = RandomStream::new(seed).rng();
            let out = run_solver(&spec, &obs, params, &mut rng)?;
            emit(&out, None)?;
        }
        Command::Experiment { config, output } => {
            let cfg = load_config(&config)?;
            let report = run_error_experiment(&cfg)?;
            emit(&report, output.as_ref().or(cfg.output.as_ref()))?;
        }
        Command::Validate { check, seed } => {
            let names: Vec<&str> = if check == "all" { CHECKS.iter().map(|c| c.0).collect() } else { vec![check.as_str()] };
            let mut reports = Vec::new();
            for name in names {
                let r = run_check(name, seed)?;
                eprintln!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.summary);
                reports.push(r);
            }
            let ok = reports.iter().all(|r| r.pass);
            emit(&reports, None)?;
            if !ok {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Schedule { theorem, alpha, beta, n, eps } => {
            emit(&param_schedule(theorem, alpha, beta, n, eps)?, None)?;
        }
        Command::Sweep { config, alphas, betas, n, grid, output } => {
            let cfg = load_config(&config)?;
            let points: Vec<GridPoint> = match grid {
                Some(path) => io::load(&path).with_context(|| format!("reading grid {}", path.display()))?,
                None => {
                    if alphas.is_empty() || betas.is_empty() {
                        bail!("give --alphas and --betas, or --grid");
                    }
                    sweep::grid(&alphas, &betas, n.unwrap_or(cfg.params.n))
                }
            };
            let rows = phase_sweep(&cfg, &points);
            match output.as_ref().or(cfg.output.as_ref()) {
                Some(path) => {
                    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                    sweep::write_csv(&rows, f)?;
                }
                None => sweep::write_csv(&rows, std::io::stdout().lock())?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
