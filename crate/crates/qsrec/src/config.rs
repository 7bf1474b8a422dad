//! Flat `key = value` run configuration.
//!
//! A run is fully described by one configuration file: paths, mask schedule
//! parameters, pipeline variant, check mode, and all numeric knobs. Lines
//! starting with `#` are comments; unknown keys are errors; every key has a
//! documented default (see [`RunConfig::echo`], which prints the full set).
//! Re-running an echoed configuration reproduces a run bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::consistency::{CheckKind, CheckMode, DEFAULT_FRMC_OFFSETS};
use crate::error::{Error, Result};
use crate::fsr::FsrParams;
use crate::mask::MaskMode;
use crate::metrics::EvalConfig;
use crate::motion::{CostKind, MotionParams};
use crate::pipeline::Variant;

/// Where the masks come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskSource {
    Generate(MaskMode),
    /// External mask file: a single mask PGM or a schedule manifest.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_dir: PathBuf,
    pub pattern: String,
    /// Number of frames to process; 0 means all available.
    pub frames: usize,
    pub output_dir: PathBuf,
    pub write_frames: bool,
    pub mask_source: MaskSource,
    pub seed: u64,
    pub variant: Variant,
    pub check_kind: CheckKind,
    pub refs: usize,
    pub threads: usize,
    pub fsr_block_size: usize,
    pub fsr_border: usize,
    pub fsr_iterations: usize,
    pub fsr_spatial_decay: f64,
    pub fsr_freq_decay: f64,
    pub fsr_compensation: f64,
    pub fsr_proj_reliability: f64,
    pub search_range: i32,
    pub template_radius: i32,
    pub min_support: usize,
    pub cost: CostKind,
    pub frmc_offsets: Vec<i32>,
    pub nnc_threshold: i32,
    pub eval_border: usize,
    pub proj_weighting: String,
    pub nnc_pairwise: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input_dir: PathBuf::new(),
            pattern: "frame%04d.pgm".into(),
            frames: 0,
            output_dir: PathBuf::new(),
            write_frames: true,
            mask_source: MaskSource::Generate(MaskMode::Dynamic),
            seed: 1,
            variant: Variant::Dfsr,
            check_kind: CheckKind::NncFrmc,
            refs: 3,
            threads: 0,
            fsr_block_size: 4,
            fsr_border: 14,
            fsr_iterations: 100,
            fsr_spatial_decay: 0.7,
            fsr_freq_decay: 0.975,
            fsr_compensation: 0.5,
            fsr_proj_reliability: 1.0,
            search_range: 9,
            template_radius: 4,
            min_support: 8,
            cost: CostKind::Mad,
            frmc_offsets: DEFAULT_FRMC_OFFSETS.to_vec(),
            nnc_threshold: 1,
            eval_border: 40,
            proj_weighting: "uniform".into(),
            nnc_pairwise: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "key '{key}': expected a boolean, got '{value}'"
        ))),
    }
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "input_dir" => self.input_dir = PathBuf::from(value),
            "pattern" => self.pattern = value.to_string(),
            "frames" => self.frames = parse_num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "write_frames" => self.write_frames = parse_bool(key, value)?,
            "mask_mode" => {
                self.mask_source = match value {
                    "fixed" => MaskSource::Generate(MaskMode::Fixed),
                    "dynamic" => MaskSource::Generate(MaskMode::Dynamic),
                    "file" => MaskSource::File(PathBuf::new()),
                    other => {
                        return Err(Error::Config(format!(
                            "key 'mask_mode': expected fixed|dynamic|file, got '{other}'"
                        )))
                    }
                }
            }
            "mask_file" => {
                if !value.is_empty() {
                    self.mask_source = MaskSource::File(PathBuf::from(value));
                }
            }
            "seed" => self.seed = parse_num(key, value)?,
            "variant" => self.variant = value.parse()?,
            "check" => self.check_kind = value.parse()?,
            "refs" => self.refs = parse_num(key, value)?,
            "threads" => self.threads = parse_num(key, value)?,
            "fsr_block_size" => self.fsr_block_size = parse_num(key, value)?,
            "fsr_border" => self.fsr_border = parse_num(key, value)?,
            "fsr_iterations" => self.fsr_iterations = parse_num(key, value)?,
            "fsr_spatial_decay" => self.fsr_spatial_decay = parse_num(key, value)?,
            "fsr_freq_decay" => self.fsr_freq_decay = parse_num(key, value)?,
            "fsr_compensation" => self.fsr_compensation = parse_num(key, value)?,
            "fsr_proj_reliability" => self.fsr_proj_reliability = parse_num(key, value)?,
            "search_range" => self.search_range = parse_num(key, value)?,
            "template_radius" => self.template_radius = parse_num(key, value)?,
            "min_support" => self.min_support = parse_num(key, value)?,
            "cost" => {
                self.cost = match value {
                    "mad" => CostKind::Mad,
                    "msd" => CostKind::Msd,
                    other => {
                        return Err(Error::Config(format!(
                            "key 'cost': expected mad|msd, got '{other}'"
                        )))
                    }
                }
            }
            "frmc_offsets" => {
                self.frmc_offsets = value
                    .split(',')
                    .map(|s| parse_num::<i32>(key, s.trim()))
                    .collect::<Result<Vec<_>>>()?;
            }
            "nnc_threshold" => self.nnc_threshold = parse_num(key, value)?,
            "eval_border" => self.eval_border = parse_num(key, value)?,
            "proj_weighting" => match value {
                "uniform" => self.proj_weighting = value.to_string(),
                "recency" => {
                    return Err(Error::Config(
                        "proj_weighting = recency is reserved and not implemented".into(),
                    ))
                }
                other => {
                    return Err(Error::Config(format!(
                        "key 'proj_weighting': expected uniform|recency, got '{other}'"
                    )))
                }
            },
            "nnc_pairwise" => {
                if parse_bool(key, value)? {
                    return Err(Error::Config(
                        "nnc_pairwise = true is reserved and not implemented".into(),
                    ));
                }
                self.nnc_pairwise = false;
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn parse_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    /// Prints the complete configuration as a parseable `key = value` file.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let (mask_mode, mask_file) = match &self.mask_source {
            MaskSource::Generate(mode) => (mode.as_str().to_string(), String::new()),
            MaskSource::File(path) => ("file".to_string(), path.display().to_string()),
        };
        let offsets: Vec<String> = self.frmc_offsets.iter().map(|o| o.to_string()).collect();
        let _ = write!(
            s,
            "input_dir = {}\npattern = {}\nframes = {}\noutput_dir = {}\nwrite_frames = {}\n\
             mask_mode = {}\nmask_file = {}\nseed = {}\nvariant = {}\ncheck = {}\nrefs = {}\n\
             threads = {}\nfsr_block_size = {}\nfsr_border = {}\nfsr_iterations = {}\n\
             fsr_spatial_decay = {}\nfsr_freq_decay = {}\nfsr_compensation = {}\n\
             fsr_proj_reliability = {}\nsearch_range = {}\ntemplate_radius = {}\n\
             min_support = {}\ncost = {}\nfrmc_offsets = {}\nnnc_threshold = {}\n\
             eval_border = {}\nproj_weighting = {}\nnnc_pairwise = {}\n",
            self.input_dir.display(),
            self.pattern,
            self.frames,
            self.output_dir.display(),
            self.write_frames,
            mask_mode,
            mask_file,
            self.seed,
            self.variant.as_str(),
            self.check_kind.as_str(),
            self.refs,
            self.threads,
            self.fsr_block_size,
            self.fsr_border,
            self.fsr_iterations,
            self.fsr_spatial_decay,
            self.fsr_freq_decay,
            self.fsr_compensation,
            self.fsr_proj_reliability,
            self.search_range,
            self.template_radius,
            self.min_support,
            match self.cost {
                CostKind::Mad => "mad",
                CostKind::Msd => "msd",
            },
            offsets.join(","),
            self.nnc_threshold,
            self.eval_border,
            self.proj_weighting,
            self.nnc_pairwise,
        );
        s
    }

    pub fn fsr_params(&self) -> FsrParams {
        FsrParams {
            block_size: self.fsr_block_size,
            border: self.fsr_border,
            iterations: self.fsr_iterations,
            spatial_decay: self.fsr_spatial_decay,
            freq_decay: self.fsr_freq_decay,
            compensation: self.fsr_compensation,
            proj_reliability: self.fsr_proj_reliability,
        }
    }

    pub fn motion_params(&self) -> MotionParams {
        MotionParams {
            search_range: self.search_range,
            template_radius: self.template_radius,
            min_support: self.min_support,
            cost: self.cost,
        }
    }

    pub fn check_mode(&self) -> CheckMode {
        CheckMode {
            kind: self.check_kind,
            frmc_offsets: self.frmc_offsets.clone(),
            nnc_threshold: self.nnc_threshold,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            border: self.eval_border,
            ..EvalConfig::default()
        }
    }
}
