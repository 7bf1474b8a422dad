//! Reconstruction quality metrics: PSNR and mean SSIM with border exclusion,
//! plus sequence averaging.
//!
//! Boundary effects are not of interest, so a configurable border (default
//! 40 pixels) is excluded from both metrics. SSIM windows are evaluated only
//! where they lie fully inside the interior region; no padding is used.

use crate::error::{Error, Result};
use crate::frame_io::Frame;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Pixels excluded on every side.
    pub border: usize,
    pub peak: f64,
    pub ssim_window: usize,
    pub ssim_sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            border: 40,
            peak: 255.0,
            ssim_window: 11,
            ssim_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
        }
    }
}

fn check_dims(reference: &Frame, test: &Frame, cfg: &EvalConfig) -> Result<()> {
    if !reference.same_dims(test) {
        return Err(Error::Dimension(format!(
            "reference {}x{} vs test {}x{}",
            reference.width(),
            reference.height(),
            test.width(),
            test.height()
        )));
    }
    if 2 * cfg.border >= reference.width().min(reference.height()) {
        return Err(Error::Dimension(format!(
            "border {} too large for {}x{} frames",
            cfg.border,
            reference.width(),
            reference.height()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB over the interior region. Identical
/// interiors give +inf.
pub fn psnr(reference: &Frame, test: &Frame, cfg: &EvalConfig) -> Result<f64> {
    check_dims(reference, test, cfg)?;
    let (w, h, b) = (reference.width(), reference.height(), cfg.border);
    let mut sum = 0.0;
    for r in b..h - b {
        for c in b..w - b {
            let d = reference.get(r, c) - test.get(r, c);
            sum += d * d;
        }
    }
    let count = ((h - 2 * b) * (w - 2 * b)) as f64;
    let mse = sum / count;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (cfg.peak * cfg.peak / mse).log10())
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size as f64 - 1.0) / 2.0;
    let mut kernel = vec![0.0; size * size];
    let mut total = 0.0;
    for i in 0..size {
        for j in 0..size {
            let di = i as f64 - half;
            let dj = j as f64 - half;
            let v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            kernel[i * size + j] = v;
            total += v;
        }
    }
    for v in &mut kernel {
        *v /= total;
    }
    kernel
}

/// Mean structural similarity over Gaussian-weighted windows that lie fully
/// inside the interior region.
pub fn ssim(reference: &Frame, test: &Frame, cfg: &EvalConfig) -> Result<f64> {
    check_dims(reference, test, cfg)?;
    let (w, h, b) = (reference.width(), reference.height(), cfg.border);
    let win = cfg.ssim_window;
    let interior_w = w - 2 * b;
    let interior_h = h - 2 * b;
    if interior_w < win || interior_h < win {
        return Err(Error::Dimension(format!(
            "interior {interior_w}x{interior_h} cannot hold a {win}x{win} SSIM window"
        )));
    }
    let kernel = gaussian_kernel(win, cfg.ssim_sigma);
    let c1 = (cfg.k1 * cfg.peak) * (cfg.k1 * cfg.peak);
    let c2 = (cfg.k2 * cfg.peak) * (cfg.k2 * cfg.peak);

    let mut total = 0.0;
    let mut windows = 0usize;
    for top in b..=h - b - win {
        for left in b..=w - b - win {
            let mut mu_x = 0.0;
            let mut mu_y = 0.0;
            let mut xx = 0.0;
            let mut yy = 0.0;
            let mut xy = 0.0;
            for i in 0..win {
                for j in 0..win {
                    let k = kernel[i * win + j];
                    let x = reference.get(top + i, left + j);
                    let y = test.get(top + i, left + j);
                    mu_x += k * x;
                    mu_y += k * y;
                    xx += k * x * x;
                    yy += k * y * y;
                    xy += k * x * y;
                }
            }
            let var_x = xx - mu_x * mu_x;
            let var_y = yy - mu_y * mu_y;
            let cov = xy - mu_x * mu_y;
            let value = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2))
                / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
            total += value;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Sequence averages. Frames with infinite PSNR (exact reconstructions) are
/// excluded from the PSNR mean and counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceSummary {
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub psnr_excluded_inf: usize,
}

pub fn sequence_summary(per_frame: &[(f64, f64)]) -> Result<SequenceSummary> {
    if per_frame.is_empty() {
        return Err(Error::Config("cannot summarize an empty sequence".into()));
    }
    let finite: Vec<f64> = per_frame
        .iter()
        .map(|(p, _)| *p)
        .filter(|p| p.is_finite())
        .collect();
    let excluded = per_frame.len() - finite.len();
    let mean_psnr = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let mean_ssim = per_frame.iter().map(|(_, s)| *s).sum::<f64>() / per_frame.len() as f64;
    Ok(SequenceSummary {
        mean_psnr,
        mean_ssim,
        psnr_excluded_inf: excluded,
    })
}
