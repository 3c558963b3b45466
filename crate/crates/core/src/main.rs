use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use path_assign::geometry::{mc_validate, write_mc_csv, McGrid};
use path_assign::harness::{
    default_suite, generate_synthetic, noisy_yaw_suite, read_scenario_file, run_pipeline, sweep_parameters,
    write_roc_csv, write_run_csv, write_scenario, Method, PipelineConfig, Scenario, ScenarioKind, SweepAxis,
    SynthSpec,
};
use path_assign::{Error, Result};

#[derive(Parser)]
#[command(name = "path-assign", version, about = "Host-vehicle-path assignment filters and evaluation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method over a scenario file and emit per-frame assignments.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Discrete)]
        method: MethodArg,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep epsilon (discrete) and/or sigma_nu (continuous) and emit ROC points.
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepMethod::Both)]
        method: SweepMethod,
        /// Synthetic suite used when no scenario files are given.
        #[arg(long, value_enum, default_value_t = Suite::Default)]
        suite: Suite,
        /// Scenario files; replaces the synthetic suite.
        #[arg(long = "scenario")]
        scenarios: Vec<PathBuf>,
        /// Comma-separated epsilon grid.
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
        /// Comma-separated sigma_nu grid, m/s.
        #[arg(long, value_delimiter = ',')]
        sigma_nu: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        eta_gain: f64,
        #[arg(long, default_value_t = path_assign::estimator::DEFAULT_P_MIN)]
        p_min: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write synthetic scenario files.
    Synth {
        /// Scenario kind; all kinds when omitted.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare sampled path offsets with the Taylor Gaussian over a grid.
    McValidate {
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    eta_gain: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_nu: f64,
    #[arg(long, default_value_t = path_assign::estimator::DEFAULT_P_MIN)]
    p_min: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Discrete,
    Continuous,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Discrete => Method::Discrete,
            MethodArg::Continuous => Method::Continuous,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMethod {
    Discrete,
    Continuous,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Default,
    #[value(name = "noisy_yaw")]
    NoisyYaw,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InputDomain(format!("--{name} must lie in [0, 1], got {p}")))
    }
}

fn synthesize(specs: &[SynthSpec]) -> Result<Vec<Scenario>> {
    specs.par_iter().map(generate_synthetic).collect()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scenario, method, filter, out } => {
            check_probability("p-min", filter.p_min)?;
            let sc = read_scenario_file(&scenario)?;
            let config = PipelineConfig {
                method: method.into(),
                epsilon: filter.epsilon,
                eta_gain: filter.eta_gain,
                sigma_nu: filter.sigma_nu,
                p_min: filter.p_min,
                ..Default::default()
            };
            let run = run_pipeline(&sc.frames, &config)?;
            write_run_csv(&run, output(out.as_deref())?)
        }
        Command::Sweep { method, suite, scenarios, epsilon, sigma_nu, eta_gain, p_min, seed, step, out } => {
            check_probability("p-min", p_min)?;
            let scenarios = if scenarios.is_empty() {
                let specs = match suite {
                    Suite::Default => default_suite(seed, step),
                    Suite::NoisyYaw => noisy_yaw_suite(seed, step),
                };
                synthesize(&specs)?
            } else {
                scenarios.iter().map(|p| read_scenario_file(p)).collect::<Result<_>>()?
            };
            let base = PipelineConfig { eta_gain, p_min, ..Default::default() };
            let eps = if epsilon.is_empty() { SweepAxis::default_epsilon() } else { SweepAxis::Epsilon(epsilon) };
            let sig = if sigma_nu.is_empty() { SweepAxis::default_sigma_nu() } else { SweepAxis::SigmaNu(sigma_nu) };
            let axes = match method {
                SweepMethod::Discrete => vec![eps],
                SweepMethod::Continuous => vec![sig],
                SweepMethod::Both => vec![eps, sig],
            };
            let mut points = Vec::new();
            for axis in &axes {
                points.extend(sweep_parameters(&scenarios, &base, axis)?);
            }
            write_roc_csv(&points, output(out.as_deref())?)
        }
        Command::Synth { kind, duration, seed, step, out } => {
            let kinds = match kind {
                Some(k) => vec![k.parse::<ScenarioKind>()?],
                None => ScenarioKind::ALL.to_vec(),
            };
            std::fs::create_dir_all(&out)?;
            for kind in kinds {
                let mut spec = SynthSpec { step, ..SynthSpec::new(kind, seed) };
                if let Some(d) = duration {
                    spec.duration = d;
                }
                let sc = generate_synthetic(&spec)?;
                let path = out.join(format!("{}.jsonl", sc.name));
                write_scenario(&sc.frames, BufWriter::new(File::create(&path)?))?;
                eprintln!("wrote {} ({} frames)", path.display(), sc.frames.len());
            }
            Ok(())
        }
        Command::McValidate { samples, bins, seed, out } => {
            let points = mc_validate(&McGrid::default(), samples, bins, seed)?;
            write_mc_csv(&points, output(out.as_deref())?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
