//! File-level commands behind the command-line interface: mask generation,
//! reconstruction runs, and run comparison.
//!
//! A run consumes a frame directory and emits reconstructed frames, a
//! structured text report (`report.txt`: key-value and CSV sections), and a
//! re-runnable configuration echo (`config.echo`). Re-running the echo
//! reproduces the reconstructions byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{MaskSource, RunConfig};
use crate::consistency::CheckStats;
use crate::error::{Error, Result};
use crate::frame_io::{
    read_mask, read_sequence, write_frame, write_mask, Mask, NamePattern,
};
use crate::mask::{generate_dynamic_mask, generate_fixed_mask, MaskMode, MaskSchedule};
use crate::metrics::{psnr, sequence_summary, ssim, SequenceSummary};
use crate::pipeline::{run_sequence, PipelineConfig, StageTimings};

/// Arguments of the `mask` command.
#[derive(Debug, Clone)]
pub struct MaskCmd {
    pub width: usize,
    pub height: usize,
    pub mode: MaskMode,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct MaskArtifacts {
    pub manifest: PathBuf,
    pub mask_files: Vec<PathBuf>,
}

/// Generates a mask schedule and writes its masks plus a manifest.
pub fn cmd_mask(cmd: &MaskCmd) -> Result<MaskArtifacts> {
    let schedule = match cmd.mode {
        MaskMode::Fixed => generate_fixed_mask(cmd.width, cmd.height, cmd.seed)?,
        MaskMode::Dynamic => generate_dynamic_mask(cmd.width, cmd.height, cmd.seed)?,
    };
    std::fs::create_dir_all(&cmd.out_dir).map_err(|e| Error::io(&cmd.out_dir, e))?;
    let mut mask_files = Vec::new();
    let mut manifest = format!(
        "# qsrec mask schedule\nmode = {}\nwidth = {}\nheight = {}\nseed = {}\nperiod = {}\n",
        cmd.mode.as_str(),
        cmd.width,
        cmd.height,
        cmd.seed,
        schedule.period()
    );
    for (phase, mask) in schedule.masks().iter().enumerate() {
        let name = format!("mask_p{phase}.pgm");
        write_mask(mask, cmd.out_dir.join(&name))?;
        let _ = writeln!(manifest, "mask{phase} = {name}");
        mask_files.push(cmd.out_dir.join(name));
    }
    let manifest_path = cmd.out_dir.join("schedule.cfg");
    std::fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(MaskArtifacts {
        manifest: manifest_path,
        mask_files,
    })
}

/// Loads a schedule from a manifest written by [`cmd_mask`] or wraps a
/// single mask PGM as a fixed schedule.
pub fn load_schedule_file(path: &Path) -> Result<MaskSchedule> {
    if path.extension().is_some_and(|e| e == "pgm") {
        let mask = read_mask(path)?;
        return MaskSchedule::from_masks(MaskMode::Fixed, vec![mask], 0);
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut mode = None;
    let mut seed = 0u64;
    let mut mask_names: Vec<(usize, String)> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(path, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "mode" => mode = Some(value.parse::<MaskMode>()?),
            "seed" => {
                seed = value
                    .parse()
                    .map_err(|_| Error::format(path, "bad seed"))?
            }
            "width" | "height" | "period" => {}
            k if k.starts_with("mask") => {
                let phase: usize = k[4..]
                    .parse()
                    .map_err(|_| Error::format(path, format!("bad mask key '{k}'")))?;
                mask_names.push((phase, value.to_string()));
            }
            other => return Err(Error::format(path, format!("unknown key '{other}'"))),
        }
    }
    let mode = mode.ok_or_else(|| Error::format(path, "missing mode"))?;
    mask_names.sort();
    let masks: Vec<Mask> = mask_names
        .iter()
        .map(|(_, name)| read_mask(dir.join(name)))
        .collect::<Result<_>>()?;
    MaskSchedule::from_masks(mode, masks, seed)
}

fn build_schedule(config: &RunConfig, width: usize, height: usize) -> Result<MaskSchedule> {
    let schedule = match &config.mask_source {
        MaskSource::Generate(MaskMode::Fixed) => generate_fixed_mask(width, height, config.seed)?,
        MaskSource::Generate(MaskMode::Dynamic) => {
            generate_dynamic_mask(width, height, config.seed)?
        }
        MaskSource::File(path) => {
            if path.as_os_str().is_empty() {
                return Err(Error::Config(
                    "mask_mode = file requires mask_file".into(),
                ));
            }
            load_schedule_file(path)?
        }
    };
    if schedule.width() != width || schedule.height() != height {
        return Err(Error::Dimension(format!(
            "mask schedule {}x{} vs frames {width}x{height}",
            schedule.width(),
            schedule.height()
        )));
    }
    Ok(schedule)
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub report: PathBuf,
    pub config_echo: PathBuf,
    pub frame_files: Vec<PathBuf>,
    pub summary: SequenceSummary,
    pub timings: StageTimings,
    pub checks: CheckStats,
    pub per_frame: Vec<(f64, f64)>,
}

fn sequence_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into())
}

/// Runs the reconstruction chain described by `config` and writes all
/// artifacts into its output directory.
pub fn cmd_run(config: &RunConfig) -> Result<RunArtifacts> {
    if config.input_dir.as_os_str().is_empty() || config.output_dir.as_os_str().is_empty() {
        return Err(Error::Config("input_dir and output_dir are required".into()));
    }
    let pattern = NamePattern::parse(&config.pattern)?;
    let mut truth = read_sequence(&config.input_dir, &pattern)?;
    if config.frames > 0 {
        if config.frames > truth.len() {
            return Err(Error::Config(format!(
                "requested {} frames, found only {}",
                config.frames,
                truth.len()
            )));
        }
        truth.truncate(config.frames);
    }
    let (width, height) = (truth[0].width(), truth[0].height());
    let schedule = build_schedule(config, width, height)?;
    let mask_mode = schedule.mode;

    let mut pipeline_config = PipelineConfig::new(schedule);
    pipeline_config.fsr = config.fsr_params();
    pipeline_config.motion = config.motion_params();
    pipeline_config.check = config.check_mode();
    pipeline_config.refs = config.refs;
    pipeline_config.variant = config.variant;
    pipeline_config.threads = config.threads;

    let run = run_sequence(&truth, &pipeline_config)?;

    let eval = config.eval_config();
    let mut per_frame = Vec::with_capacity(truth.len());
    for (gt, rec) in truth.iter().zip(&run.frames) {
        per_frame.push((psnr(gt, rec, &eval)?, ssim(gt, rec, &eval)?));
    }
    let summary = sequence_summary(&per_frame)?;
    let timings = run.total_timings();
    let checks = run.total_checks();

    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let mut frame_files = Vec::new();
    if config.write_frames {
        for (t, frame) in run.frames.iter().enumerate() {
            let path = config.output_dir.join(pattern.format(t));
            write_frame(frame, &path)?;
            frame_files.push(path);
        }
    }

    let echo_path = config.output_dir.join("config.echo");
    std::fs::write(&echo_path, config.echo()).map_err(|e| Error::io(&echo_path, e))?;

    let mut report = String::new();
    report.push_str("[config]\n");
    report.push_str(&config.echo());
    let _ = write!(
        report,
        "\n[summary]\nsequence = {}\nframes = {}\nwidth = {}\nheight = {}\n\
         variant = {}\ncheck = {}\nmask_mode = {}\navg_psnr_db = {}\navg_ssim = {}\n\
         psnr_inf_excluded = {}\n",
        sequence_name(&config.input_dir),
        truth.len(),
        width,
        height,
        config.variant.as_str(),
        config.check_kind.as_str(),
        mask_mode.as_str(),
        summary.mean_psnr,
        summary.mean_ssim,
        summary.psnr_excluded_inf,
    );
    let _ = write!(
        report,
        "\n[timings]\nME,CC,FSR,Total\n{:.4},{:.4},{:.4},{:.4}\n",
        timings.me, timings.cc, timings.fsr, timings.total
    );
    let _ = write!(
        report,
        "\n[checks]\nmode,candidates,accepted,rejected,reverse_evals,nnc_rejected,acceptance_rate\n\
         {},{},{},{},{},{},{:.6}\n",
        config.check_kind.as_str(),
        checks.candidates,
        checks.accepted,
        checks.rejected,
        checks.reverse_evals,
        checks.nnc_rejected,
        checks.acceptance_rate(),
    );
    report.push_str("\n[frames]\nframe,psnr_db,ssim\n");
    for (t, (p, s)) in per_frame.iter().enumerate() {
        let _ = writeln!(report, "{t},{p},{s}");
    }
    let report_path = config.output_dir.join("report.txt");
    std::fs::write(&report_path, report).map_err(|e| Error::io(&report_path, e))?;

    Ok(RunArtifacts {
        report: report_path,
        config_echo: echo_path,
        frame_files,
        summary,
        timings,
        checks,
        per_frame,
    })
}

/// Parsed form of a run report.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub label: String,
    pub sequence: String,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub variant: String,
    pub check: String,
    pub mask_mode: String,
    pub avg_psnr: f64,
    pub avg_ssim: f64,
    pub timings: StageTimings,
    pub per_frame_psnr: Vec<f64>,
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut section = String::new();
    let mut summary = std::collections::HashMap::new();
    let mut timing_rows = Vec::new();
    let mut frame_rows = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].to_string();
            continue;
        }
        match section.as_str() {
            "summary" => {
                if let Some((k, v)) = line.split_once('=') {
                    summary.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            "timings" => timing_rows.push(line.to_string()),
            "frames" => frame_rows.push(line.to_string()),
            _ => {}
        }
    }
    let get = |key: &str| -> Result<String> {
        summary
            .get(key)
            .cloned()
            .ok_or_else(|| Error::format(path, format!("missing summary key '{key}'")))
    };
    let parse_f64 = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::format(path, format!("bad number '{s}'")))
    };
    let timings = if timing_rows.len() >= 2 {
        let cells: Vec<&str> = timing_rows[1].split(',').collect();
        if cells.len() != 4 {
            return Err(Error::format(path, "timings row needs 4 columns"));
        }
        StageTimings {
            me: parse_f64(cells[0])?,
            cc: parse_f64(cells[1])?,
            fsr: parse_f64(cells[2])?,
            total: parse_f64(cells[3])?,
        }
    } else {
        return Err(Error::format(path, "missing timings section"));
    };
    let mut per_frame_psnr = Vec::new();
    for row in frame_rows.iter().skip(1) {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::format(path, "frame row needs 3 columns"));
        }
        per_frame_psnr.push(parse_f64(cells[1])?);
    }
    let label = path
        .parent()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    Ok(RunReport {
        label,
        sequence: get("sequence")?,
        frames: get("frames")?.parse().map_err(|_| Error::format(path, "bad frames"))?,
        width: get("width")?.parse().map_err(|_| Error::format(path, "bad width"))?,
        height: get("height")?.parse().map_err(|_| Error::format(path, "bad height"))?,
        variant: get("variant")?,
        check: get("check")?,
        mask_mode: get("mask_mode")?,
        avg_psnr: parse_f64(&get("avg_psnr_db")?)?,
        avg_ssim: parse_f64(&get("avg_ssim")?)?,
        timings,
        per_frame_psnr,
    })
}

/// Merges completed run reports into a comparison table; with a baseline
/// report, also emits per-frame PSNR gains relative to it.
pub fn cmd_compare(report_paths: &[PathBuf], baseline: Option<&Path>) -> Result<String> {
    if report_paths.len() < 2 {
        return Err(Error::Config("compare needs at least two reports".into()));
    }
    let reports: Vec<RunReport> = report_paths
        .iter()
        .map(|p| read_report(p))
        .collect::<Result<_>>()?;
    let first = &reports[0];
    for r in &reports[1..] {
        if r.sequence != first.sequence
            || r.frames != first.frames
            || r.width != first.width
            || r.height != first.height
        {
            return Err(Error::Config(format!(
                "incompatible reports: {} ({}, {} frames, {}x{}) vs {} ({}, {} frames, {}x{})",
                first.label,
                first.sequence,
                first.frames,
                first.width,
                first.height,
                r.label,
                r.sequence,
                r.frames,
                r.width,
                r.height
            )));
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "[runs]");
    let _ = writeln!(out, "label,variant,check,mask_mode,avg_psnr_db,avg_ssim");
    for r in &reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.4},{:.6}",
            r.label, r.variant, r.check, r.mask_mode, r.avg_psnr, r.avg_ssim
        );
    }

    if let Some(baseline_path) = baseline {
        let base = read_report(baseline_path)?;
        if base.sequence != first.sequence || base.frames != first.frames {
            return Err(Error::Config("baseline report is incompatible".into()));
        }
        let _ = writeln!(out, "\n[gain_vs_baseline]");
        let _ = writeln!(out, "baseline = {}", base.label);
        let labels: Vec<&str> = reports.iter().map(|r| r.label.as_str()).collect();
        let _ = writeln!(out, "frame,{}", labels.join(","));
        for t in 0..base.frames {
            let mut row = format!("{t}");
            for r in &reports {
                let gain = r.per_frame_psnr[t] - base.per_frame_psnr[t];
                let _ = write!(row, ",{gain:.4}");
            }
            let _ = writeln!(out, "{row}");
        }
    }
    Ok(out)
}
