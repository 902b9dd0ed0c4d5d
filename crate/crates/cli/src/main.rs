//! `aggint`: aggregate-interference densities, Monte Carlo campaigns,
//! detector curves and the validation report, from the command line.

// `!(x > 0.0)` guards are written that way so NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use aggint::analytic::FadingKind;
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

const MODEL_KEYS: &str = "\
Config file keys (TOML; flags override file values):
  seed                      RNG seed [integer]; else $AGGINT_SEED, else 1
  workers                   worker threads [count]; never changes results
  [model]
  alpha                     path-loss exponent [dimensionless, >= 2]
  k                         stable-law constant K [power^(2/alpha)]
  lambda                    node density [nodes per unit area]
  [model.region]
  r_max                     network disk radius [distance]
  r_p                       protection radius around the primary [distance]
  r_dec                     victim-to-primary distance [distance]
  epsilon                   truncation factor; enforces 1 - r_max^(2-alpha) > 1 - epsilon [dimensionless]
  [model.fading]
  kind                      \"rayleigh\" or \"none\"
  mean_power                mean fading power gain [linear]
  [inversion]
  method                    \"talbot\" or \"euler\"
  node_count                contour / series terms [count]
  precision_target          relative accuracy target [dimensionless]
  cross_check               compare against the other method [bool]";

const GRID_KEYS: &str = "\
  [grid]
  values                    explicit evaluation points [power, or distance for `mean`]
  spec                      \"log:min:max:n\" or \"lin:min:max:n\"";

const CAMPAIGN_KEYS: &str = "\
  [campaign]
  n_trials                  Monte Carlo trials [count]
  tx_power                  transmit power of every node [power]";

const DETECTOR_KEYS: &str = "\
  [detector]
  n_samples                 samples per sensing window N [count]
  smoothing_factor          stacked time shifts L [count]
  target_pfa                false-alarm target [probability]
  delta                     interference uncertainty driving the threshold [nats]
  reference_delta           uncertainty at which the threshold is unchanged [nats]
  beta                      threshold sensitivity to delta [1/nats]
  inr_db                    interference-to-noise ratio at the median draw [dB]; -inf disables
  snr_grid_db               signal-to-noise grid [dB]
  trials                    H1 trials per SNR point [count]
  holdout_trials            fresh H0 trials for the achieved Pfa [count]
  calibration_trials        H0 trials used to set the threshold [count]
  seed                      overwritten by the top-level seed";

const EXIT_CODES: &str = "\
Exit codes: 0 ok, 1 i/o error, 2 configuration or geometry error,
3 validation failure, 4 numerical non-convergence.";

fn help_analytic() -> String {
    format!("{MODEL_KEYS}\n{GRID_KEYS}\n\n{EXIT_CODES}")
}

fn help_simulate() -> String {
    format!("{MODEL_KEYS}\n{CAMPAIGN_KEYS}\n\n{EXIT_CODES}")
}

fn help_detect() -> String {
    format!("{MODEL_KEYS}\n{DETECTOR_KEYS}\n\n{EXIT_CODES}")
}

fn help_validate() -> String {
    format!(
        "Config file keys: seed [integer], workers [count]. The check grid is fixed.\n\n{EXIT_CODES}"
    )
}

#[derive(Parser)]
#[command(name = "aggint", version, about = "Aggregate interference in finite-area secondary networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of the aggregate interference on a grid of levels.
    #[command(after_help = help_analytic())]
    Pdf(PdfArgs),
    /// CDF and CCDF (outage probability) on a grid of levels.
    #[command(after_help = help_analytic())]
    Cdf(AnalyticArgs),
    /// Mean of the interference truncated at r_max.
    #[command(after_help = help_analytic())]
    Mean(MeanArgs),
    /// Uncertainty δ = ∫ f ln f of the interference law.
    #[command(after_help = help_analytic())]
    Entropy(EntropyArgs),
    /// Monte Carlo campaign over Poisson networks.
    #[command(after_help = help_simulate())]
    Simulate(SimulateArgs),
    /// Detection probability curve of the eigenvalue detector.
    #[command(after_help = help_detect())]
    Detect(DetectArgs),
    /// Run the validation checks and write a JSON report.
    #[command(after_help = help_validate())]
    Validate(ValidateArgs),
}

#[derive(Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML config file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// RNG seed [integer]. Overrides the file and $AGGINT_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [count]. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file; stdout if omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
pub struct ModelArgs {
    /// Path-loss exponent alpha [dimensionless, >= 2].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Stable-law constant K [power^(2/alpha)]. Excludes the network flags.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Node density lambda [nodes per unit area].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Network disk radius r_max [distance].
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Protection radius r_p around the primary [distance].
    #[arg(long)]
    pub rp: Option<f64>,
    /// Victim-to-primary distance r_dec [distance].
    #[arg(long)]
    pub rdec: Option<f64>,
    /// Truncation factor epsilon; r_max must satisfy 1 - r_max^(2-alpha) > 1 - epsilon [dimensionless].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fading model: rayleigh or none.
    #[arg(long, value_parser = config::parse_fading)]
    pub fading: Option<FadingKind>,
    /// Mean fading power gain [linear].
    #[arg(long)]
    pub mean_power: Option<f64>,
}

#[derive(Args, Clone, Default)]
pub struct GridArgs {
    /// Comma-separated evaluation points [power].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub r: Option<Vec<f64>>,
    /// Grid spec log:min:max:n or lin:min:max:n [power].
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Args, Clone)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Clone)]
pub struct PdfArgs {
    #[command(flatten)]
    pub base: AnalyticArgs,
    /// Add the published density branch, evaluated as printed.
    #[arg(long)]
    pub paper_literal: bool,
    /// Add numerical Laplace inversion and fail (exit 3) if it disagrees.
    #[arg(long)]
    pub oracle: bool,
    /// Relative tolerance for --oracle [dimensionless].
    #[arg(long, default_value_t = 1e-6)]
    pub oracle_tol: f64,
}

#[derive(Args, Clone)]
pub struct MeanArgs {
    #[command(flatten)]
    pub base: AnalyticArgs,
    /// Add the published mean expression, evaluated as printed.
    #[arg(long)]
    pub paper_literal: bool,
}

#[derive(Args, Clone)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Solve for the K whose uncertainty equals this value [nats].
    #[arg(long, allow_negative_numbers = true)]
    pub target_delta: Option<f64>,
}

#[derive(Args, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Monte Carlo trials [count].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Transmit power of every node [power].
    #[arg(long)]
    pub tx_power: Option<f64>,
    /// Also write a JSON summary (parameters, summary, KS distance, samples).
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// False-alarm target [probability].
    #[arg(long)]
    pub pfa: Option<f64>,
    /// Interference uncertainty feeding the threshold [nats]. Without a
    /// model it also fixes K for alpha (default 4).
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Uncertainty at which the threshold is unchanged [nats].
    #[arg(long, allow_negative_numbers = true)]
    pub reference_delta: Option<f64>,
    /// Threshold sensitivity to delta [1/nats].
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// SNR grid start:stop:step [dB].
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
    /// H1 trials per SNR point [count].
    #[arg(long)]
    pub trials: Option<usize>,
    /// H0 trials used to set the threshold [count].
    #[arg(long)]
    pub calibration_trials: Option<usize>,
    /// Fresh H0 trials for the achieved Pfa [count].
    #[arg(long)]
    pub holdout_trials: Option<usize>,
    /// Samples per sensing window N [count].
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Stacked time shifts L [count].
    #[arg(long)]
    pub smoothing_factor: Option<usize>,
    /// Interference-to-noise ratio at the median draw [dB]; -inf disables.
    #[arg(long, allow_hyphen_values = true)]
    pub inr_db: Option<f64>,
    /// Also write a JSON document with the curve and calibration results.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Add the published-formula discrepancy section.
    #[arg(long)]
    pub paper_literal: bool,
    /// Deliberately corrupt the model to confirm the checks catch it.
    #[arg(long, value_enum)]
    pub inject_fault: Option<validate::Fault>,
    /// Monte Carlo trials for the campaign check [count].
    #[arg(long)]
    pub mc_trials: Option<usize>,
}

impl ModelArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.model;
        set(&mut m.alpha, self.alpha);
        set(&mut m.k, self.k);
        set(&mut m.lambda, self.lambda);
        set(&mut m.region.r_max, self.rmax);
        set(&mut m.region.r_p, self.rp);
        set(&mut m.region.r_dec, self.rdec);
        set(&mut m.region.epsilon, self.epsilon);
        if let Some(kind) = self.fading {
            m.fading.kind = kind;
        }
        if let Some(p) = self.mean_power {
            m.fading.mean_power = p;
        }
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        // a flag replaces whatever grid form the file used
        if self.r.is_some() || self.grid.is_some() {
            cfg.grid.values = self.r.clone();
            cfg.grid.spec = self.grid.clone();
        }
    }
}

fn set<T: Copy>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

/// Loads the file, applies the shared flags and starts the thread pool.
pub fn prepare(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    cfg.seed = Some(config::resolve_seed(common.seed, cfg.seed)?);
    set(&mut cfg.workers, common.workers);
    if let Some(n) = cfg.workers {
        if n == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Pdf(a) => {
            let mut cfg = prepare(&a.base.common)?;
            a.base.model.apply(&mut cfg);
            a.base.grid.apply(&mut cfg);
            commands::pdf(&cfg, &a)
        }
        Command::Cdf(a) => {
            let mut cfg = prepare(&a.common)?;
            a.model.apply(&mut cfg);
            a.grid.apply(&mut cfg);
            commands::cdf(&cfg, &a)
        }
        Command::Mean(a) => {
            let mut cfg = prepare(&a.base.common)?;
            a.base.model.apply(&mut cfg);
            a.base.grid.apply(&mut cfg);
            commands::mean(&cfg, &a)
        }
        Command::Entropy(a) => {
            let mut cfg = prepare(&a.common)?;
            a.model.apply(&mut cfg);
            commands::entropy(&cfg, &a)
        }
        Command::Simulate(a) => {
            let mut cfg = prepare(&a.common)?;
            a.model.apply(&mut cfg);
            if let Some(n) = a.trials {
                cfg.campaign.n_trials = n;
            }
            if let Some(p) = a.tx_power {
                cfg.campaign.tx_power = p;
            }
            commands::simulate(&cfg, &a)
        }
        Command::Detect(a) => {
            let mut cfg = prepare(&a.common)?;
            a.model.apply(&mut cfg);
            let d = &mut cfg.detector;
            if let Some(v) = a.pfa {
                d.target_pfa = v;
            }
            if a.delta.is_some() {
                d.delta = a.delta;
            }
            if let Some(v) = a.reference_delta {
                d.reference_delta = v;
            }
            if let Some(v) = a.beta {
                d.beta = v;
            }
            if let Some(v) = &a.snr {
                d.snr_grid_db = config::parse_range(v).map_err(CliError::Config)?;
            }
            if let Some(v) = a.trials {
                d.trials = v;
            }
            if let Some(v) = a.calibration_trials {
                d.calibration_trials = v;
            }
            if let Some(v) = a.holdout_trials {
                d.holdout_trials = v;
            }
            if let Some(v) = a.n_samples {
                d.n_samples = v;
            }
            if let Some(v) = a.smoothing_factor {
                d.smoothing_factor = v;
            }
            if let Some(v) = a.inr_db {
                d.inr_db = v;
            }
            d.seed = cfg.seed.unwrap_or(config::DEFAULT_SEED);
            commands::detect(&cfg, &a)
        }
        Command::Validate(a) => {
            let cfg = prepare(&a.common)?;
            validate::run(&cfg, &a)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aggint: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
