use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dhap_cli::decompose::{self, DecomposeKind, DecomposeParams};
use dhap_cli::gen::{self, GenKind};
use dhap_cli::render::{self, Picture};
use dhap_cli::{suites, RunConfig};
use dhap_core::GridConfig;

#[derive(Parser)]
#[command(name = "dhap", version, about = "Dyadic Haar analysis: verification suites, decompositions, rendering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite; exits nonzero if any check fails.
    Verify {
        /// core, norms, decompose, extrapolate, atoms, paraproduct, embed, t1, tb or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 4)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Accretivity threshold.
        #[arg(long, default_value_t = 0.5)]
        c_acc: f64,
        /// Directory for report.json, report.txt and timings.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose weights or a function given as JSON.
    Decompose {
        /// tree_slice, tree_select, mean_select or atoms.
        #[arg(long)]
        kind: DecomposeKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        /// Size bound of the input tree (default: max(size*, δ)).
        #[arg(long)]
        c0: Option<f64>,
        /// garnett or heavy-light.
        #[arg(long, default_value = "garnett")]
        algorithm: String,
        /// Selection level (default: smallest n with size* ≤ 2^n).
        #[arg(long, allow_negative_numbers = true)]
        n: Option<i32>,
        /// Hardy space exponent for atoms.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Output file; the measured constants go to <output>.measured.json.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a decomposition or tile set as SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Draw Whitney boxes in the upper half-plane instead of scale rows.
        #[arg(long)]
        half_plane: bool,
    },
    /// Print a seeded random instance as JSON.
    Gen {
        #[arg(long)]
        kind: GenKind,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify { suite, m, seed, trials, c_acc, out } => {
            let cfg = RunConfig { m, seed, trials, c_acc, out_dir: out, ..RunConfig::default() };
            let (report, timings) = suites::run(&suite, &cfg)?;
            print!("{}", report.to_text());
            if let Some(dir) = &cfg.out_dir {
                report.write(dir, &timings)?;
            }
            Ok(report.passed())
        }
        Command::Decompose { kind, input, delta, c0, algorithm, n, p, output } => {
            let params = DecomposeParams { delta, c0, algorithm: decompose::parse_algorithm(&algorithm)?, n, p };
            let out = decompose::run(kind, &read(&input)?, &params)?;
            let text = dhap_core::json::to_string(&out)?;
            match output {
                Some(path) => {
                    write(&path, &text)?;
                    let mut side = path.clone().into_os_string();
                    side.push(".measured.json");
                    write(&PathBuf::from(side), &dhap_core::json::to_string(out.measured())?)?;
                }
                None => println!("{text}"),
            }
            Ok(true)
        }
        Command::Render { input, output, half_plane } => {
            let picture = Picture::parse(&read(&input)?)?;
            write(&output, &render::render(&picture, half_plane))?;
            Ok(true)
        }
        Command::Gen { kind, m, seed } => {
            let grid = GridConfig::new(m)?;
            println!("{}", gen::generate(kind, grid, seed)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
