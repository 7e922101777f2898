use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use deltabox::cli::{run_command, Options};

#[derive(Parser)]
#[command(name = "deltabox", version, about = "Free particle scattering off a particle in a box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and report outcome probabilities.
    Solve(Common),
    /// Sweep L k0 and emit probability tableaux.
    Sweep(Common),
    /// Refinement study over the truncation order T.
    Converge(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Memory budget in GiB.
    #[arg(long = "mem-budget")]
    mem_budget: Option<f64>,
    #[arg(long, overrides_with = "no_svg")]
    svg: bool,
    #[arg(long = "no-svg", overrides_with = "svg")]
    no_svg: bool,
    /// Reserved; the solvers are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (name, common) = match cli.command {
        Command::Solve(c) => ("solve", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Converge(c) => ("converge", c),
    };
    if let Some(seed) = common.seed {
        log::debug!("seed {seed} ignored");
    }
    let opts = Options {
        out: common.out,
        workers: common.workers,
        mem_budget_gib: common.mem_budget,
        svg: match (common.svg, common.no_svg) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        },
    };
    std::process::exit(run_command(name, &common.config, &opts));
}
