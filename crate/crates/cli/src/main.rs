use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod bounds;
mod config;
mod run;

use config::ConfigLayer;

/// Learn a sleeve function from value and gradient queries and trace its core curve.
#[derive(Parser)]
#[command(name = "sleeve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write CSV/JSON artifacts.
    Run(ConfigArgs),
    /// Check ρ-separation of the configured curve and inexact-mode feasibility.
    Verify(ConfigArgs),
    /// Print step and error-bound formula values.
    Bounds(bounds::BoundsArgs),
    /// Run several configurations in parallel, one output directory each.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
pub struct ConfigArgs {
    /// `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog case: spiral, knot3d, half-ellipse, half-ellipse-vanishing.
    #[arg(long)]
    case: Option<String>,
    /// Custom curve `name:params`, e.g. `circle-arc:0.3,0,3`.
    #[arg(long)]
    curve: Option<String>,
    /// Profile: identity, sine, tangent, square.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    /// Target Hausdorff error.
    #[arg(long = "target-error", visible_alias = "E")]
    target_error: Option<f64>,
    /// Projection noise level (inexact mode when positive).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Profile knot spacing.
    #[arg(long)]
    sigma: Option<f64>,
    /// Symmetric-difference step; implies `--gradient-mode fd`.
    #[arg(long)]
    tau: Option<f64>,
    /// exact or fd.
    #[arg(long)]
    gradient_mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (the SLEEVE_OUT variable takes precedence).
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Run inexact mode even when its termination hypothesis fails.
    #[arg(long)]
    force: bool,
    /// Number of error-grid points (0 skips the evaluation stage).
    #[arg(long)]
    eval_points: Option<usize>,
    /// Start point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long)]
    endpoint_tol: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
}

impl ConfigArgs {
    fn flags(&self) -> ConfigLayer {
        ConfigLayer {
            case: self.case.clone(),
            curve: self.curve.clone(),
            profile: self.profile.clone(),
            rho: self.rho,
            target_error: self.target_error,
            epsilon: self.epsilon,
            sigma: self.sigma,
            tau: self.tau,
            gradient_mode: self.gradient_mode.clone(),
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            force: self.force.then_some(true),
            eval_points: self.eval_points,
            x0: self.x0.clone(),
            endpoint_tol: self.endpoint_tol,
            max_steps: self.max_steps,
        }
    }

    /// File layer (if any) overlaid by the flags.
    pub fn layer(&self) -> Result<ConfigLayer, config::ConfigError> {
        let base = match &self.config {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        Ok(base.overlay(&self.flags()))
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Config files, one run each.
    files: Vec<PathBuf>,
    /// Additional catalog cases, comma separated.
    #[arg(long, value_delimiter = ',')]
    cases: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Settings applied on top of every configuration.
    #[command(flatten)]
    common: ConfigArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run::run_command(&args),
        Command::Verify(args) => run::verify_command(&args),
        Command::Bounds(args) => bounds::bounds_command(&args),
        Command::Sweep(args) => run::sweep_command(&args.files, &args.cases, args.jobs, &args.common),
    };
    ExitCode::from(code)
}
