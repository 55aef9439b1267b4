use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mimo_scaling::asymptotics::Side;
use mimo_scaling::harness::acceptance::{self, AcceptanceReport};
use mimo_scaling::harness::{
    emit, parse_grid, run_experiment, Ensemble, Experiment, ExperimentConfig, Format, HarnessError, OutputSpec,
};

/// Capacity scaling of large MIMO channels: closed forms and Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "mimo-scaling", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ergodic mutual information and multiplexing rate of a small system
    /// before and after antenna removal, over an SNR grid.
    LossCurve(Flags),
    /// Ergodic loss against the binary entropy loss for growing sizes.
    LossConvergence(Flags),
    /// Deviation from linear growth against its closed form.
    DeviationSweep(Flags),
    /// Deviation of product channels against the sum over their factors.
    ProductAdditivity(Flags),
    /// Ergodic loss over an SNR grid with a nondecreasing flag per row.
    Monotonicity(Flags),
    /// Tabulated transforms of a spectral family (set in the config file).
    Transforms(Flags),
    /// Run the acceptance suite.
    Verify(VerifyFlags),
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON config file; flags given here override its parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// SNR grid in dB, as start:step:stop or a comma-separated list.
    #[arg(long, value_parser = grid)]
    gamma_db: Option<Grid>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Retained antenna fractions.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Antenna ratio T/R.
    #[arg(long)]
    phi: Option<f64>,
    /// Receive antenna counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    ensemble: Option<Ensemble>,
    /// Factor counts for product ensembles.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    variance: Option<f64>,
    #[arg(long, value_enum)]
    side: Option<SideArg>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; defaults to the file extension, then csv.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct VerifyFlags {
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated criterion ids; all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
    /// Report file (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SideArg {
    Receive,
    Transmit,
}

#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn grid(text: &str) -> Result<Grid, String> {
    parse_grid(text).map(Grid)
}

fn build_config(experiment: Experiment, f: Flags) -> Result<ExperimentConfig, HarnessError> {
    let mut config = match &f.config {
        Some(path) => {
            let c = ExperimentConfig::read(path)?;
            if c.experiment != experiment {
                return Err(HarnessError::Config(vec![format!(
                    "experiment: config is for {}, subcommand is {}",
                    c.experiment.name(),
                    experiment.name()
                )]));
            }
            c
        }
        None => ExperimentConfig::new(experiment),
    };
    let p = &mut config.parameters;
    if let Some(Grid(g)) = f.gamma_db {
        p.gamma_db = Some(g);
    }
    if f.trials.is_some() {
        p.trials = f.trials;
    }
    if f.seed.is_some() {
        p.master_seed = f.seed;
    }
    if f.beta.is_some() {
        p.beta = f.beta;
    }
    if f.phi.is_some() {
        p.phi = f.phi;
    }
    if f.n.is_some() {
        p.n = f.n;
    }
    if f.ensemble.is_some() {
        p.ensemble = f.ensemble;
    }
    if f.m.is_some() {
        p.m = f.m;
    }
    if f.variance.is_some() {
        p.variance = f.variance;
    }
    if let Some(s) = f.side {
        p.side = Some(match s {
            SideArg::Receive => Side::Receive,
            SideArg::Transmit => Side::Transmit,
        });
    }
    match (f.out, config.output.take()) {
        (Some(path), _) => {
            let format = f.format.unwrap_or_else(|| Format::from_path(&path));
            config.output = Some(OutputSpec { path, format });
        }
        (None, Some(mut out)) => {
            if let Some(format) = f.format {
                out.format = format;
            }
            config.output = Some(out);
        }
        (None, None) => return Err(HarnessError::MissingFlag("--out")),
    }
    Ok(config)
}

fn run_table(experiment: Experiment, flags: Flags) -> Result<(), HarnessError> {
    let config = build_config(experiment, flags)?;
    let table = run_experiment(&config)?;
    let out = config.output.as_ref().expect("output resolved");
    emit(&table, &out.path, out.format)?;
    eprintln!(
        "{}: {} rows -> {} ({:.1} s)",
        experiment.name(),
        table.rows.len(),
        out.path.display(),
        table.metadata.wall_clock_seconds
    );
    Ok(())
}

fn run_verify(flags: VerifyFlags) -> Result<(), HarnessError> {
    let out = flags.out.ok_or(HarnessError::MissingFlag("--out"))?;
    let seed = flags.seed.unwrap_or_else(acceptance::default_seed);
    let report: AcceptanceReport = acceptance::run_all(seed, flags.only.as_deref().unwrap_or(&[]), |c| println!("{c}"));
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| HarnessError::Table(e.to_string()))?;
    text.push('\n');
    std::fs::write(&out, text).map_err(|source| HarnessError::Io { path: out.clone(), source })?;
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(HarnessError::Acceptance { failed });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::LossCurve(f) => run_table(Experiment::LossCurve, f),
        Command::LossConvergence(f) => run_table(Experiment::LossConvergence, f),
        Command::DeviationSweep(f) => run_table(Experiment::DeviationSweep, f),
        Command::ProductAdditivity(f) => run_table(Experiment::ProductAdditivity, f),
        Command::Monotonicity(f) => run_table(Experiment::Monotonicity, f),
        Command::Transforms(f) => run_table(Experiment::Transforms, f),
        Command::Verify(f) => run_verify(f),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
