use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use jetsym_cli::problem::parse_seed;
use jetsym_cli::{render, run_file, Command, Format, Options};

/// Conditional symmetries and PDE Lie systems on jet bundles.
#[derive(Parser, Debug)]
#[command(name = "jetsym", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem file.
    problem: PathBuf,
    /// Jet order.
    #[arg(long)]
    order: Option<u32>,
    /// Sampling seed in hex.
    #[arg(long, value_parser = seed)]
    seed: Option<u64>,
    #[arg(long, value_parser = format)]
    format: Option<Format>,
    /// Skip rectification and check tangency directly.
    #[arg(long)]
    force_direct: bool,
    /// Bound on the Vessiot-Guldberg closure dimension.
    #[arg(long)]
    cap: Option<usize>,
}

fn seed(s: &str) -> Result<u64, String> {
    parse_seed(s).ok_or_else(|| format!("`{s}` is not a hex seed"))
}

fn format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let flags = Options {
        order: cli.order,
        seed: cli.seed,
        format: cli.format,
        cap: cli.cap,
        gauge: None,
        force_direct: cli.force_direct.then_some(true),
    };
    let report = run_file(cli.command, &cli.problem, &flags);
    log::debug!("{} finished with {:?}", cli.command, report.status);
    print!("{}", render(&report, &flags, &cli.problem));
    ExitCode::from(report.exit_code() as u8)
}
