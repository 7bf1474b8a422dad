//! Causal recursive reconstruction of a quarter-sampled sequence.
//!
//! Per frame: sample with the scheduled mask, estimate motion for the missing
//! pixels against up to R reconstructed past frames, run the configured
//! consistency check on every field, project surviving vectors (using the
//! past frames' original measurements), and reconstruct with FSR. The
//! recursive overwrite variant copies projected values into the output; the
//! dynamic-mask variant treats them as support only.
//!
//! Frame t uses nothing from frames after t. Motion estimation toward each
//! of the R references is independent; contributions meet only in the
//! projection buffer, which is filled in ascending reference order.

use std::collections::VecDeque;
use std::time::Instant;

use crate::consistency::{apply_check, CheckMode, CheckStats};
use crate::error::{Error, Result};
use crate::frame_io::{Frame, SampledFrame};
use crate::fsr::{reconstruct_frame, FsrParams};
use crate::mask::MaskSchedule;
use crate::metrics::EvalConfig;
use crate::motion::{estimate, MotionParams};
use crate::projection::{project, ProjectionBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Per-frame FSR without any temporal support.
    SingleFsr,
    /// Recursive FSR that overwrites the model with measured and projected
    /// values.
    Rfsr,
    /// Recursive FSR that overwrites with measured values only.
    Dfsr,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::SingleFsr => "single_fsr",
            Variant::Rfsr => "rfsr",
            Variant::Dfsr => "dfsr",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_fsr" => Ok(Variant::SingleFsr),
            "rfsr" => Ok(Variant::Rfsr),
            "dfsr" => Ok(Variant::Dfsr),
            other => Err(Error::Config(format!(
                "unknown variant '{other}' (expected single_fsr|rfsr|dfsr)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub schedule: MaskSchedule,
    pub fsr: FsrParams,
    pub motion: MotionParams,
    pub check: CheckMode,
    /// Number of past frames used for motion estimation and projection.
    pub refs: usize,
    pub variant: Variant,
    /// Worker threads for the parallel sections (motion estimation and FSR
    /// blocks); 0 uses the default pool. Consistency checks always run
    /// single-threaded. Results are identical for any value.
    pub threads: usize,
}

impl PipelineConfig {
    pub fn new(schedule: MaskSchedule) -> Self {
        PipelineConfig {
            schedule,
            fsr: FsrParams::default(),
            motion: MotionParams::default(),
            check: CheckMode::default(),
            refs: 3,
            variant: Variant::Dfsr,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fsr.validate()?;
        self.motion.validate()?;
        self.check.validate(&self.motion)?;
        Ok(())
    }
}

/// Wall-clock seconds per stage, mirroring the usual runtime breakdown
/// (motion estimation, consistency check, reconstruction, total).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub me: f64,
    pub cc: f64,
    pub fsr: f64,
    pub total: f64,
}

impl StageTimings {
    pub fn merge(&mut self, other: &StageTimings) {
        self.me += other.me;
        self.cc += other.cc;
        self.fsr += other.fsr;
        self.total += other.total;
    }
}

#[derive(Debug, Clone, Default)]
pub struct FrameReport {
    pub t: usize,
    pub timings: StageTimings,
    pub check: CheckStats,
    /// Missing pixels that received at least one projection.
    pub projected_pixels: u64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub frames: Vec<Frame>,
    pub per_frame: Vec<FrameReport>,
}

impl RunOutput {
    pub fn total_timings(&self) -> StageTimings {
        let mut total = StageTimings::default();
        for report in &self.per_frame {
            total.merge(&report.timings);
        }
        total
    }

    pub fn total_checks(&self) -> CheckStats {
        let mut total = CheckStats::default();
        for report in &self.per_frame {
            total.merge(&report.check);
        }
        total
    }

    /// Frame-wise (PSNR, SSIM) against the ground truth.
    pub fn evaluate(&self, truth: &[Frame], cfg: &EvalConfig) -> Result<Vec<(f64, f64)>> {
        self.frames
            .iter()
            .zip(truth)
            .map(|(rec, gt)| {
                Ok((
                    crate::metrics::psnr(gt, rec, cfg)?,
                    crate::metrics::ssim(gt, rec, cfg)?,
                ))
            })
            .collect()
    }
}

struct HistoryEntry {
    reconstruction: Frame,
    sampled: SampledFrame,
}

/// Streaming reconstructor holding the last R reconstructed frames and their
/// original measurements.
pub struct Pipeline {
    config: PipelineConfig,
    history: VecDeque<HistoryEntry>,
    next_t: usize,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Pipeline {
            config,
            history: VecDeque::new(),
            next_t: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Reconstructs the next frame from its sampled measurements and pushes
    /// the result into the history ring.
    pub fn reconstruct_next(&mut self, sampled: SampledFrame) -> Result<(Frame, FrameReport)> {
        let start = Instant::now();
        let mut report = FrameReport {
            t: self.next_t,
            ..FrameReport::default()
        };
        let (w, h) = (sampled.width(), sampled.height());
        let mut buffer = ProjectionBuffer::new(w, h);

        let recursive = self.config.variant != Variant::SingleFsr && self.config.refs > 0;
        if recursive && !self.history.is_empty() {
            let targets = sampled.missing_positions();
            // History back is d = 1, one step further back is d = 2, ...
            for d in 1..=self.config.refs.min(self.history.len()) {
                let entry = &self.history[self.history.len() - d];

                let me_start = Instant::now();
                let mut field = estimate(
                    &sampled,
                    &entry.reconstruction,
                    &self.config.motion,
                    &targets,
                    d,
                )?;
                report.timings.me += me_start.elapsed().as_secs_f64();

                let cc_start = Instant::now();
                let stats = apply_check(
                    &self.config.check,
                    &mut field,
                    &sampled,
                    &entry.reconstruction,
                    &self.config.motion,
                );
                report.timings.cc += cc_start.elapsed().as_secs_f64();
                report.check.merge(&stats);

                project(&field, &entry.sampled, &mut buffer)?;
            }
            report.projected_pixels = buffer.filled() as u64;
        }

        let fsr_start = Instant::now();
        let overwrite_projected = self.config.variant == Variant::Rfsr;
        let mut reconstruction =
            reconstruct_frame(&sampled, &buffer, &self.config.fsr, overwrite_projected)?;
        reconstruction.t = self.next_t;
        report.timings.fsr = fsr_start.elapsed().as_secs_f64();

        self.history.push_back(HistoryEntry {
            reconstruction: reconstruction.clone(),
            sampled,
        });
        while self.history.len() > self.config.refs.max(1) {
            self.history.pop_front();
        }
        self.next_t += 1;
        report.timings.total = start.elapsed().as_secs_f64();
        Ok((reconstruction, report))
    }
}

/// Runs the full chain over a ground-truth sequence: mask, estimate, check,
/// project, reconstruct, frame by frame.
pub fn run_sequence(truth: &[Frame], config: &PipelineConfig) -> Result<RunOutput> {
    if truth.is_empty() {
        return Err(Error::Config("empty input sequence".into()));
    }
    let (w, h) = (truth[0].width(), truth[0].height());
    for f in truth {
        if f.width() != w || f.height() != h {
            return Err(Error::Dimension("sequence frames differ in size".into()));
        }
    }
    if config.schedule.width() != w || config.schedule.height() != h {
        return Err(Error::Dimension(format!(
            "mask schedule {}x{} vs frames {}x{}",
            config.schedule.width(),
            config.schedule.height(),
            w,
            h
        )));
    }

    let drive = |config: &PipelineConfig| -> Result<RunOutput> {
        let mut pipeline = Pipeline::new(config.clone())?;
        let mut frames = Vec::with_capacity(truth.len());
        let mut per_frame = Vec::with_capacity(truth.len());
        for (t, gt) in truth.iter().enumerate() {
            let sampled = crate::mask::apply_mask(gt, config.schedule.mask_for(t))?;
            let (frame, report) = pipeline.reconstruct_next(sampled)?;
            frames.push(frame);
            per_frame.push(report);
        }
        Ok(RunOutput { frames, per_frame })
    };

    if config.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(|| drive(config))
    } else {
        drive(config)
    }
}
