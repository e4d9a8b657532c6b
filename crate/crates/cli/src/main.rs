//! Command-line driver for the hyperbolicity certification pipeline.
//!
//! Exit codes: 0 on success with a fully verified cone condition (where
//! applicable), 2 when verification left unverified vertices, 1 on error.

mod config;
mod pipeline;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::PipelineConfig;
use pipeline::{artifact_dirs, print_summary, StageOutcome};

#[derive(Parser)]
#[command(
    name = "conecert",
    about = "Rigorous certification of uniform hyperbolicity for explicit maps",
    version
)]
struct Cli {
    /// Force deterministic single-thread execution regardless of config.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Size of the worker pool for parallel mode.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the whole pipeline: enclose, cycles, refine, frames, verify,
    /// prove, rates.
    Run { config: PathBuf },
    /// Enclose the invariant set and write the box/vertex/edge lists.
    Enclose {
        config: PathBuf,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Find cycle vertex sets in the enclosure graph.
    Cycles {
        config: PathBuf,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Refine cycles to approximate periodic points.
    Refine {
        config: PathBuf,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Seed and spread coordinate frames over the graph.
    Frames {
        config: PathBuf,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Verify the cone conditions edge by edge.
    Verify {
        config: PathBuf,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Extract certified expansion rates after a clean verify.
    Rates {
        config: PathBuf,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Render a box list as an SVG of projected cells.
    ExportSvg {
        boxlist: PathBuf,
        /// Two projection axes, e.g. --axes 0,2
        #[arg(long)]
        axes: String,
        /// Output path (defaults to the box list with an .svg extension).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("building worker pool");
        return pool.install(f);
    }
    #[cfg(not(feature = "parallel"))]
    if threads.is_some() {
        eprintln!("warning: built without the 'parallel' feature; --threads ignored");
    }
    f()
}

fn load(config: &std::path::Path) -> Result<PipelineConfig> {
    PipelineConfig::load(config)
}

fn run_stage(outcome: Result<StageOutcome>) -> Result<Option<bool>> {
    let outcome = outcome?;
    print_summary(std::slice::from_ref(&outcome.row));
    Ok(outcome.all_verified)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let deterministic = cli.deterministic;
    match cli.cmd {
        Cmd::Run { config } => {
            let cfg = load(&config)?;
            let out = cfg.output_dir.clone();
            let verified =
                with_pool(cli.threads, || pipeline::run_all(&cfg, &out, deterministic))?;
            Ok(if verified {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification incomplete: unverified vertices remain");
                ExitCode::from(2)
            })
        }
        Cmd::Enclose { config, from } => {
            let cfg = load(&config)?;
            let (_, out) = artifact_dirs(&cfg, from);
            std::fs::create_dir_all(&out)?;
            with_pool(cli.threads, || {
                run_stage(pipeline::stage_enclose(&cfg, &out, deterministic))
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cycles { config, from } => {
            let cfg = load(&config)?;
            let (from, out) = artifact_dirs(&cfg, from);
            std::fs::create_dir_all(&out)?;
            run_stage(pipeline::stage_cycles(&cfg, &from, &out))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Refine { config, from } => {
            let cfg = load(&config)?;
            let (from, out) = artifact_dirs(&cfg, from);
            std::fs::create_dir_all(&out)?;
            with_pool(cli.threads, || {
                run_stage(pipeline::stage_refine(&cfg, &from, &out, deterministic))
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Frames { config, from } => {
            let cfg = load(&config)?;
            let (from, out) = artifact_dirs(&cfg, from);
            std::fs::create_dir_all(&out)?;
            with_pool(cli.threads, || {
                run_stage(pipeline::stage_frames(&cfg, &from, &out, deterministic))
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { config, from } => {
            let cfg = load(&config)?;
            let (from, out) = artifact_dirs(&cfg, from);
            std::fs::create_dir_all(&out)?;
            let verified = with_pool(cli.threads, || {
                run_stage(pipeline::stage_verify(&cfg, &from, &out, deterministic))
            })?;
            Ok(if verified.unwrap_or(false) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Cmd::Rates { config, from } => {
            let cfg = load(&config)?;
            let (from, out) = artifact_dirs(&cfg, from);
            std::fs::create_dir_all(&out)?;
            with_pool(cli.threads, || {
                run_stage(pipeline::stage_rates(&cfg, &from, &out, deterministic))
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ExportSvg {
            boxlist,
            axes,
            output,
        } => {
            let parts: Vec<usize> = axes
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .context("axes must be two comma-separated indices, e.g. 0,2")?;
            let [ax, ay] = parts.as_slice() else {
                anyhow::bail!("exactly two projection axes required");
            };
            let out_path = output.unwrap_or_else(|| boxlist.with_extension("svg"));
            let mut w = std::io::BufWriter::new(
                std::fs::File::create(&out_path)
                    .with_context(|| format!("creating {}", out_path.display()))?,
            );
            svg::export_svg(&boxlist, (*ax, *ay), &mut w)?;
            println!("wrote {}", out_path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
