//! `forch`: convergence and stability studies for generalized Forchheimer
//! flow with P1 finite elements.

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use forch_core::config::{InitialKind, Mode, ProblemKind, RunConfig};
use forch_core::Scheme;

use crate::commands::Outcome;
use crate::spec::RunSpec;

#[derive(Debug, Parser)]
#[command(
    name = "forch",
    version,
    about = "P1 Galerkin solver for generalized Forchheimer flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Error table over a doubling sequence of meshes.
    Convergence(RunArgs),
    /// Per-step norm histories; checks monotone decay for homogeneous data.
    Stability(RunArgs),
    /// One mesh, one run: final-time errors.
    Single(RunArgs),
    /// Run whatever `mode` the config file selects.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Dump the structured mesh as `v x y` / `t i j k` lines.
    Mesh {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone)]
struct RunArgs {
    /// 1, 2, patch or homogeneous.
    #[arg(long)]
    example: Option<ProblemKind>,
    /// Comma-separated subdivision counts.
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file; its settings override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Exponents of g, comma-separated (with --coeffs).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    /// Initial data for problems without an exact solution: bump, random or zero.
    #[arg(long)]
    initial: Option<InitialKind>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn to_config(&self, mode: Mode) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig {
            mode: Some(mode),
            example: self.example,
            n_list: self.n.clone(),
            dt: self.dt,
            t_end: self.t_end,
            scheme: self.scheme,
            alphas: self.alphas.clone(),
            coeffs: self.coeffs.clone(),
            output: self.out.as_ref().map(|p| p.display().to_string()),
            threads: self.threads,
            initial: self.initial,
            seed: self.seed,
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let file = RunConfig::parse(&text)?;
            cfg.overlay(&file);
            // the subcommand fixes the mode
            cfg.mode = Some(mode);
        }
        Ok(cfg)
    }
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let cfg = match cli.command {
        Command::Convergence(args) => args.to_config(Mode::Convergence)?,
        Command::Stability(args) => args.to_config(Mode::Stability)?,
        Command::Single(args) => args.to_config(Mode::Single)?,
        Command::Run { config, threads } => {
            let mut cfg = RunConfig::parse(&std::fs::read_to_string(config)?)?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            cfg
        }
        Command::Mesh { n, out } => {
            let mesh = forch_core::Mesh::unit_square(n)?;
            match out {
                Some(p) => mesh.write_text(std::io::BufWriter::new(std::fs::File::create(p)?))?,
                None => mesh.write_text(std::io::stdout().lock())?,
            }
            return Ok(Outcome::Success);
        }
    };
    configure_threads(cfg.threads)?;
    let spec = RunSpec::from_config(&cfg)?;
    commands::execute(&spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
