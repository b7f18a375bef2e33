use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kernel_bounds::cli::{emit_report, load_config, run_scan, Command, Overrides};

#[derive(Parser)]
#[command(name = "kernel-bounds", version, about = "Bergman and Szegő kernel bounds on decoupled model domains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for the CSV, summary and log.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    t_min: Option<f64>,

    #[arg(long, global = true)]
    t_max: Option<f64>,

    #[arg(long, global = true)]
    points: Option<usize>,

    /// Assert that the boundary is convex near the origin.
    #[arg(long, global = true)]
    convex: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    KernelScan,
    MetricScan,
    SzegoScan,
    ProfileCheck,
    IntegralCheck,
    OracleValidate,
    ExtendedScan,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::KernelScan => Command::KernelScan,
            Cmd::MetricScan => Command::MetricScan,
            Cmd::SzegoScan => Command::SzegoScan,
            Cmd::ProfileCheck => Command::ProfileCheck,
            Cmd::IntegralCheck => Command::IntegralCheck,
            Cmd::OracleValidate => Command::OracleValidate,
            Cmd::ExtendedScan => Command::ExtendedScan,
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config <path> is required"))?;
    let overrides = Overrides {
        seed: cli.seed,
        t_min: cli.t_min,
        t_max: cli.t_max,
        points: cli.points,
        convex: cli.convex,
    };
    let config = load_config(path, &overrides)?;
    let output = run_scan(&config, cli.command.into())?;
    let bundle = emit_report(&cli.out, &output)?;
    for (name, v) in &output.summary.verdicts {
        println!("{name}: {:?} ({})", v.status, v.detail);
    }
    println!("wrote {}", bundle.csv_path.display());
    println!("wrote {}", bundle.summary_path.display());
    Ok(output.summary.all_pass())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
