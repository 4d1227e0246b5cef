use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};
use convex_bandit::harness::{
    self, Algorithm, ExperimentConfig, FunctionSpec, HarnessError, Mode,
};

#[derive(Parser)]
#[command(name = "convex-bandit", version, about = "Stochastic convex optimization with bandit feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    #[value(name = "1d")]
    OneD,
    Nd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theory,
    Practical,
    PaperLiteral,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment over one or more seeds.
    Run {
        /// TOML configuration; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        algorithm: Option<AlgorithmArg>,
        #[arg(long = "T")]
        horizon: Option<u64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        doubling: bool,
    },
    /// Print the one-dimensional regret bound.
    Bound {
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// Monte-Carlo check of the cap-in-cone construction and the cut update.
    VerifyGeometry {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn base_config(algorithm: Algorithm, d: usize) -> ExperimentConfig {
    let function = match algorithm {
        Algorithm::OneD => FunctionSpec::Quadratic1d { minimizer: 0.3, curvature: 1.0 },
        Algorithm::Nd => FunctionSpec::QuadraticNd { minimizer: vec![0.0; d], curvature: 1.0 },
    };
    ExperimentConfig {
        algorithm,
        function,
        domain: None,
        d,
        horizon: 100_000,
        sigma: 0.1,
        noise: Default::default(),
        c1: None,
        c2: None,
        mode: Mode::default(),
        seeds: vec![0],
        out: None,
        logging: None,
        doubling: false,
        initial_horizon: None,
        gamma_floor: None,
    }
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { config, algorithm, horizon, sigma, d, c1, c2, mode, seeds, out, doubling } => {
            let algorithm = algorithm.map(|a| match a {
                AlgorithmArg::OneD => Algorithm::OneD,
                AlgorithmArg::Nd => Algorithm::Nd,
            });
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => {
                    let a = algorithm.ok_or_else(|| {
                        HarnessError::Config("either --config or --algorithm is required".into())
                    })?;
                    let d = d.unwrap_or(if a == Algorithm::OneD { 1 } else { 2 });
                    base_config(a, d)
                }
            };
            if let Some(a) = algorithm {
                cfg.algorithm = a;
            }
            if let Some(d) = d {
                cfg.d = d;
            }
            if let Some(t) = horizon {
                cfg.horizon = t;
            }
            if let Some(s) = sigma {
                cfg.sigma = s;
            }
            if c1.is_some() {
                cfg.c1 = c1;
            }
            if c2.is_some() {
                cfg.c2 = c2;
            }
            if let Some(m) = mode {
                cfg.mode = match m {
                    ModeArg::Theory => Mode::Theory,
                    ModeArg::Practical => Mode::Practical,
                    ModeArg::PaperLiteral => Mode::PaperLiteral,
                };
            }
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            if out.is_some() {
                cfg.out = out;
            }
            cfg.doubling |= doubling;

            let (summary, _) = harness::run_experiment(&cfg)?;
            println!("{:>8} {:>16} {:>8} {:>12} {:>10}", "seed", "regret", "epochs", "regret/bound", "seconds");
            for s in &summary.seeds {
                let ratio = s.bound_ratio.map_or("-".to_string(), |r| format!("{r:.4e}"));
                println!(
                    "{:>8} {:>16.6} {:>8} {:>12} {:>10.3}",
                    s.seed, s.regret, s.epochs, ratio, s.wall_seconds
                );
            }
            if let Some(b) = summary.regret_bound {
                println!("regret bound {b:.6e}");
            }
            if let Some(b) = summary.epoch_bound {
                println!("epoch bound {b:.4}");
            }
            Ok(())
        }
        Command::Bound { horizon, sigma } => {
            println!("{}", harness::theoretical_bound_1d(horizon, sigma)?);
            Ok(())
        }
        Command::VerifyGeometry { d, trials, samples, seed } => {
            if d < 2 || trials == 0 || samples == 0 {
                return Err(HarnessError::Config("need d ≥ 2, trials ≥ 1 and samples ≥ 1".into()));
            }
            let check = harness::verify_geometry(d, trials, samples, seed)?;
            println!("{}", serde_json::to_string_pretty(&check)?);
            if check.passed() {
                Ok(())
            } else {
                Err(HarnessError::CheckFailed(format!("geometry check failed for d = {d}")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
