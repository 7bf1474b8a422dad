//! Thin command-line front end over the library: `mask`, `run`, `compare`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsrec::cli::{cmd_compare, cmd_mask, cmd_run, MaskCmd};
use qsrec::config::RunConfig;
use qsrec::error::{Error, Result};
use qsrec::mask::MaskMode;

#[derive(Parser)]
#[command(
    name = "qsrec",
    about = "Quarter-sampling video simulation and recursive FSR reconstruction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate quarter-sampling masks (1 fixed or 4 dynamic PGMs plus a
    /// schedule manifest).
    Mask(MaskArgs),
    /// Reconstruct a frame sequence and write frames, report, and config
    /// echo.
    Run(RunArgs),
    /// Merge run reports into a comparison table, optionally with per-frame
    /// PSNR gains against a baseline run.
    Compare(CompareArgs),
}

#[derive(Args)]
struct MaskArgs {
    /// Mask dimensions as WIDTHxHEIGHT, e.g. 128x128.
    #[arg(long)]
    size: String,
    /// fixed or dynamic.
    #[arg(long, default_value = "dynamic")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for the mask PGMs and schedule manifest.
    #[arg(long, default_value = "masks")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (flat `key = value` lines); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of input frames (PGM sequence).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// single_fsr, rfsr, or dfsr.
    #[arg(long)]
    variant: Option<String>,
    /// none, rme, rmc, frmc, or nnc_frmc.
    #[arg(long)]
    check: Option<String>,
    /// fixed, dynamic, or file:<path>.
    #[arg(long)]
    mask: Option<String>,
    /// Number of reference frames.
    #[arg(long)]
    refs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Metric border exclusion in pixels.
    #[arg(long)]
    border: Option<usize>,
    /// Number of frames to process (0 = all).
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Run reports (report.txt files) to merge.
    reports: Vec<PathBuf>,
    /// Baseline report for the per-frame PSNR gain section.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_size(size: &str) -> Result<(usize, usize)> {
    let (w, h) = size
        .split_once('x')
        .ok_or_else(|| Error::Config(format!("--size expects WIDTHxHEIGHT, got '{size}'")))?;
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Config(format!("bad size component '{s}'")))
    };
    Ok((parse(w)?, parse(h)?))
}

fn run_command(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mask(args) => {
            let (width, height) = parse_size(&args.size)?;
            let mode: MaskMode = args.mode.parse()?;
            let artifacts = cmd_mask(&MaskCmd {
                width,
                height,
                mode,
                seed: args.seed,
                out_dir: args.out,
            })?;
            println!("wrote {}", artifacts.manifest.display());
            for path in artifacts.mask_files {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Run(args) => {
            let mut config = match &args.config {
                Some(path) => RunConfig::parse_file(path)?,
                None => RunConfig::default(),
            };
            if let Some(input) = args.input {
                config.input_dir = input;
            }
            if let Some(out) = args.out {
                config.output_dir = out;
            }
            if let Some(variant) = args.variant {
                config.set("variant", &variant)?;
            }
            if let Some(check) = args.check {
                config.set("check", &check)?;
            }
            if let Some(mask) = args.mask {
                if let Some(path) = mask.strip_prefix("file:") {
                    config.set("mask_mode", "file")?;
                    config.set("mask_file", path)?;
                } else {
                    config.set("mask_mode", &mask)?;
                }
            }
            if let Some(refs) = args.refs {
                config.refs = refs;
            }
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if let Some(threads) = args.threads {
                config.threads = threads;
            }
            if let Some(border) = args.border {
                config.eval_border = border;
            }
            if let Some(frames) = args.frames {
                config.frames = frames;
            }
            let artifacts = cmd_run(&config)?;
            println!(
                "frames: {}  avg_psnr_db: {:.4}  avg_ssim: {:.6}",
                artifacts.per_frame.len(),
                artifacts.summary.mean_psnr,
                artifacts.summary.mean_ssim
            );
            println!(
                "timings[s]  ME: {:.3}  CC: {:.3}  FSR: {:.3}  Total: {:.3}",
                artifacts.timings.me,
                artifacts.timings.cc,
                artifacts.timings.fsr,
                artifacts.timings.total
            );
            println!("report: {}", artifacts.report.display());
            Ok(())
        }
        Command::Compare(args) => {
            let table = cmd_compare(&args.reports, args.baseline.as_deref())?;
            match args.out {
                Some(path) => {
                    std::fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
                    println!("wrote {}", path.display());
                }
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
