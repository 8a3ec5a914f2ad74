//! `cubeshift`: width dimension, mean dimension curves, castles and
//! certified embeddings from the command line.
//!
//! Exit status is 0 when the run succeeds and its checks pass, 2 when it
//! ran but a certificate or check failed, and 1 on usage, configuration or
//! I/O errors.

mod commands;
mod output;
mod plot;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::castle::CastleCmd;
use output::{Computed, Format};

#[derive(Parser, Debug)]
#[command(name = "cubeshift", version, about = "Width dimension, castles and cubical-shift embeddings for Z-actions")]
struct Cli {
    /// Output directory. The CUBESHIFT_OUT_DIR variable overrides a config
    /// file's `output_dir`; this flag overrides both.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Extra outputs beside the JSON report, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ε-width dimension of X under the dynamical metric of a window.
    Widim(commands::widim::WidimArgs),
    /// The curve n ↦ φ({0..n−1})/n.
    Mdim(commands::mdim::MdimArgs),
    /// Build or verify castles.
    #[command(subcommand)]
    Castle(CastleCmd),
    /// Run the embedding pipeline on a JSON config.
    Embed(commands::embed::EmbedArgs),
    /// Recompute a JSON report from its inputs and compare the results.
    Verify(commands::verify::VerifyArgs),
}

struct Job {
    name: &'static str,
    inputs: serde_json::Value,
    config_out_dir: Option<String>,
    default_formats: &'static [Format],
    computed: Computed,
}

fn job<I: Serialize>(
    name: &'static str,
    inputs: I,
    default_formats: &'static [Format],
    compute: impl FnOnce(&I) -> Result<Computed>,
) -> Result<Job> {
    let computed = compute(&inputs)?;
    Ok(Job { name, inputs: serde_json::to_value(&inputs)?, config_out_dir: None, default_formats, computed })
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    use commands::*;
    use Format::*;
    let start = Instant::now();
    let job = match &cli.command {
        Command::Widim(a) => job("widim", a.inputs()?, &[], widim::compute)?,
        Command::Mdim(a) => job("mdim", a.inputs()?, &[Csv, Svg], mdim::compute)?,
        Command::Castle(CastleCmd::Build(a)) => job("castle-build", a.inputs()?, &[], castle::build)?,
        Command::Castle(CastleCmd::Verify(a)) => job("castle-verify", a.inputs()?, &[], castle::verify)?,
        Command::Embed(a) => {
            let (inputs, out) = a.inputs()?;
            let mut j = job("embed", inputs, &[Csv, Txt], embed::compute)?;
            j.config_out_dir = out;
            j
        }
        Command::Verify(a) => job("verify", a.inputs()?, &[], verify::compute)?,
    };
    let elapsed = start.elapsed();
    let formats = cli.format.as_deref().unwrap_or(job.default_formats);
    let dir = output::resolve_out_dir(cli.out_dir.as_deref(), job.config_out_dir.as_deref());
    let c = &job.computed;
    let written = output::emit(job.name, job.inputs, c, &dir, formats)?;
    // A closed stdout (say, piped into `head`) must not turn a run into a failure.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", c.summary);
    for w in c.warnings.iter().filter(|w| !c.summary.contains(w.as_str())) {
        let _ = writeln!(out, "warning: {w}");
    }
    for path in written {
        let _ = writeln!(out, "wrote {}", path.display());
    }
    let _ = writeln!(out, "elapsed {:.3} s", elapsed.as_secs_f64());
    Ok(c.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
