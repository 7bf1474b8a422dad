//! Frequency selective reconstruction (FSR) of a frame from incomplete
//! samples.
//!
//! The frame is divided into B x B blocks. Each block is modeled on a larger
//! L x L processing area (L = B + 2D) that also covers measurements from the
//! neighboring blocks. The model is a weighted sparse approximation in the
//! 2D DFT basis, built greedily: each iteration picks the basis function
//! with the largest frequency-weighted share of the weighted residual
//! spectrum, applies a compensated least-squares coefficient update, and
//! removes the contribution from the residual. Real output is maintained by
//! updating conjugate-symmetric coefficient pairs together.
//!
//! The selection runs on the residual spectrum, which is kept incrementally:
//! subtracting a basis function from the residual shifts the weight spectrum,
//! so one FFT of the weighted support and one FFT of the weights per block
//! suffice for any number of iterations.
//!
//! Blocks never see each other's reconstructions (concealed weighting is
//! zero), so all blocks can be processed in parallel with bit-identical
//! results to sequential processing.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::frame_io::{Frame, SampledFrame};
use crate::projection::ProjectionBuffer;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsrParams {
    /// Core block edge B.
    pub block_size: usize,
    /// Support margin D on each side of the block.
    pub border: usize,
    /// Greedy iterations per block.
    pub iterations: usize,
    /// Spatial weight decay rho, applied as rho^distance-from-center.
    pub spatial_decay: f64,
    /// Frequency prior decay rho_f over the centered frequency radius.
    pub freq_decay: f64,
    /// Compensation factor gamma on each least-squares coefficient step.
    pub compensation: f64,
    /// Extra multiplicative weight for projected (non-measured) support.
    pub proj_reliability: f64,
}

impl Default for FsrParams {
    fn default() -> Self {
        FsrParams {
            block_size: 4,
            border: 14,
            iterations: 100,
            spatial_decay: 0.7,
            freq_decay: 0.975,
            compensation: 0.5,
            proj_reliability: 1.0,
        }
    }
}

impl FsrParams {
    /// Processing area edge L = B + 2D.
    pub fn area_size(&self) -> usize {
        self.block_size + 2 * self.border
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size < 1 || self.iterations < 1 {
            return Err(Error::Config("fsr block size and iterations must be >= 1".into()));
        }
        if !(self.spatial_decay > 0.0 && self.spatial_decay < 1.0) {
            return Err(Error::Config("fsr spatial decay must lie in (0, 1)".into()));
        }
        if !(self.freq_decay > 0.0 && self.freq_decay <= 1.0) {
            return Err(Error::Config("fsr frequency decay must lie in (0, 1]".into()));
        }
        if !(self.compensation > 0.0 && self.compensation <= 1.0) {
            return Err(Error::Config("fsr compensation must lie in (0, 1]".into()));
        }
        if !(self.proj_reliability > 0.0 && self.proj_reliability <= 1.0) {
            return Err(Error::Config("fsr projection reliability must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// One block's processing area: values and per-pixel reliability weights.
/// Weight 0 marks unknown pixels; their values are never read.
#[derive(Debug, Clone)]
pub struct SupportArea {
    size: usize,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SupportArea {
    pub fn new(size: usize, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != size * size || weights.len() != size * size {
            return Err(Error::Dimension(format!(
                "support area buffers must be {size}x{size}"
            )));
        }
        Ok(SupportArea {
            size,
            values,
            weights,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// Spatial weights for one processing area: rho^distance-from-area-center at
/// measured positions, additionally scaled by the reliability factor at
/// projected-only positions, 0 elsewhere. Measured wins where both
/// indicators are set.
pub fn make_weight(measured: &[u8], projected: &[u8], params: &FsrParams) -> Vec<f64> {
    let l = params.area_size();
    debug_assert_eq!(measured.len(), l * l);
    debug_assert_eq!(projected.len(), l * l);
    let center = (l as f64 - 1.0) / 2.0;
    let mut weights = vec![0.0; l * l];
    for m in 0..l {
        for n in 0..l {
            let i = m * l + n;
            if measured[i] == 0 && projected[i] == 0 {
                continue;
            }
            let dist = ((m as f64 - center).powi(2) + (n as f64 - center).powi(2)).sqrt();
            let w = params.spatial_decay.powf(dist);
            weights[i] = if measured[i] == 1 {
                w
            } else {
                w * params.proj_reliability
            };
        }
    }
    weights
}

// Unnormalized 2D DFT pair on a square buffer. Forward uses
// exp(-j 2 pi (km + ln) / L); the inverse omits the 1/L^2 factor, so it
// evaluates a coefficient array directly as a sum of basis functions.
struct Fft2 {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    fn run(&self, data: &mut [Complex<f64>], fft: &Arc<dyn Fft<f64>>) {
        let n = self.size;
        let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        transpose_square(data, n);
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        transpose_square(data, n);
    }

    fn forward(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.fwd);
    }

    fn inverse(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.inv);
    }
}

fn transpose_square(data: &mut [Complex<f64>], n: usize) {
    for r in 0..n {
        for c in r + 1..n {
            data.swap(r * n + c, c * n + r);
        }
    }
}

#[inline]
fn conjugate_index(idx: usize, l: usize) -> usize {
    let (k, c) = (idx / l, idx % l);
    ((l - k) % l) * l + (l - c) % l
}

// Forces exact conjugate symmetry X(-k) = conj(X(k)) onto the spectrum of a
// real signal; FFT rounding otherwise breaks the exact ties the selection
// tie-break relies on.
fn symmetrize(spec: &mut [Complex<f64>], l: usize) {
    for idx in 0..spec.len() {
        let pair = conjugate_index(idx, l);
        if pair == idx {
            spec[idx].im = 0.0;
        } else if idx < pair {
            let m = (spec[idx] + spec[pair].conj()) * 0.5;
            spec[idx] = m;
            spec[pair] = m.conj();
        }
    }
}

/// Frequency prior rho_f^(radius of the centered frequency index).
fn frequency_prior(l: usize, decay: f64) -> Vec<f64> {
    let mut wf = vec![0.0; l * l];
    for k in 0..l {
        let kc = if k <= l / 2 { k as f64 } else { k as f64 - l as f64 };
        for c in 0..l {
            let cc = if c <= l / 2 { c as f64 } else { c as f64 - l as f64 };
            wf[k * l + c] = decay.powf((kc * kc + cc * cc).sqrt());
        }
    }
    wf
}

struct ModelRun {
    model: Vec<f64>,
    energies: Vec<f64>,
    selections: Vec<(usize, usize)>,
}

fn build_model_core(
    support: &SupportArea,
    params: &FsrParams,
    fft: &Fft2,
    traced: bool,
) -> Result<ModelRun> {
    let l = support.size;
    let n = l * l;
    if support.weights.iter().all(|w| *w == 0.0) {
        return Err(Error::EmptySupport);
    }

    // Weight spectrum W and weighted-residual spectrum Rw.
    let mut w_spec: Vec<Complex<f64>> =
        support.weights.iter().map(|w| Complex::new(*w, 0.0)).collect();
    fft.forward(&mut w_spec);
    symmetrize(&mut w_spec, l);
    let w_total = w_spec[0].re;

    let mut rw: Vec<Complex<f64>> = support
        .values
        .iter()
        .zip(&support.weights)
        .map(|(v, w)| Complex::new(v * w, 0.0))
        .collect();
    fft.forward(&mut rw);
    symmetrize(&mut rw, l);

    let wf = frequency_prior(l, params.freq_decay);
    let mut coeffs = vec![Complex::new(0.0, 0.0); n];
    let mut energies = Vec::new();
    let mut selections = Vec::new();
    if traced {
        energies.push(weighted_energy(support, &coeffs, fft));
    }

    for _ in 0..params.iterations {
        // Selection: largest frequency-weighted residual energy share; the
        // lowest linear index wins ties.
        let mut best = 0usize;
        let mut best_metric = -1.0;
        for idx in 0..n {
            let m = wf[idx] * rw[idx].norm_sqr();
            if m > best_metric {
                best_metric = m;
                best = idx;
            }
        }
        if best_metric <= 0.0 {
            break;
        }
        let delta = Complex::new(
            params.compensation * rw[best].re / w_total,
            params.compensation * rw[best].im / w_total,
        );
        let pair = conjugate_index(best, l);
        coeffs[best] += delta;
        if pair != best {
            coeffs[pair] += delta.conj();
        }
        subtract_from_spectrum(&mut rw, &w_spec, l, best, delta, pair != best);
        if traced {
            selections.push((best / l, best % l));
            energies.push(weighted_energy(support, &coeffs, fft));
        }
    }

    let mut g = coeffs;
    fft.inverse(&mut g);
    Ok(ModelRun {
        model: g.iter().map(|z| z.re).collect(),
        energies,
        selections,
    })
}

// Removes delta * phi_k (plus the conjugate term for paired frequencies)
// from the residual spectrum: the weight spectrum shifted by +-k.
fn subtract_from_spectrum(
    rw: &mut [Complex<f64>],
    w_spec: &[Complex<f64>],
    l: usize,
    k_idx: usize,
    delta: Complex<f64>,
    paired: bool,
) {
    let (kr, kc) = (k_idx / l, k_idx % l);
    let neg_r = (l - kr) % l;
    let neg_c = (l - kc) % l;
    let delta_conj = delta.conj();
    for row in 0..l {
        let row_minus = ((row + neg_r) % l) * l;
        let row_plus = ((row + kr) % l) * l;
        let base = row * l;
        let mut col_minus = neg_c;
        let mut col_plus = kc;
        for col in 0..l {
            let mut update = delta * w_spec[row_minus + col_minus];
            if paired {
                update += delta_conj * w_spec[row_plus + col_plus];
            }
            rw[base + col] -= update;
            col_minus += 1;
            if col_minus == l {
                col_minus = 0;
            }
            col_plus += 1;
            if col_plus == l {
                col_plus = 0;
            }
        }
    }
}

fn weighted_energy(support: &SupportArea, coeffs: &[Complex<f64>], fft: &Fft2) -> f64 {
    let mut g = coeffs.to_vec();
    fft.inverse(&mut g);
    support
        .values
        .iter()
        .zip(&support.weights)
        .zip(g.iter())
        .map(|((v, w), m)| w * (v - m.re) * (v - m.re))
        .sum()
}

/// Builds the sparse model of one processing area. Errors when no position
/// carries weight.
pub fn build_block_model(support: &SupportArea, params: &FsrParams) -> Result<Vec<f64>> {
    params.validate()?;
    let fft = Fft2::new(support.size);
    Ok(build_model_core(support, params, &fft, false)?.model)
}

/// Like [`build_block_model`], additionally reporting the weighted residual
/// energy before the first and after every iteration, and the selected
/// frequency indices.
pub fn build_block_model_traced(
    support: &SupportArea,
    params: &FsrParams,
) -> Result<(Vec<f64>, Vec<f64>, Vec<(usize, usize)>)> {
    params.validate()?;
    let fft = Fft2::new(support.size);
    let run = build_model_core(support, params, &fft, true)?;
    Ok((run.model, run.energies, run.selections))
}

/// Reconstructs a full frame from a sampled frame and (possibly empty)
/// projections.
///
/// Measured positions carry their measured values exactly. Positions covered
/// only by projections carry the projected value when `overwrite_projected`
/// is set (recursive overwrite behavior) and the block-model value otherwise
/// (projections then only support model generation). All remaining positions
/// carry the model value. Non-measured outputs are clamped to [0, 255].
pub fn reconstruct_frame(
    sampled: &SampledFrame,
    projected: &ProjectionBuffer,
    params: &FsrParams,
    overwrite_projected: bool,
) -> Result<Frame> {
    params.validate()?;
    let (w, h) = (sampled.width(), sampled.height());
    if projected.width() != w || projected.height() != h {
        return Err(Error::Dimension(format!(
            "projection buffer {}x{} vs frame {}x{}",
            projected.width(),
            projected.height(),
            w,
            h
        )));
    }
    let b = params.block_size;
    let d = params.border as i64;
    let l = params.area_size();
    let blocks_x = w.div_ceil(b);
    let blocks_y = h.div_ceil(b);
    let (proj_values, proj_ind) = projected.overlay();
    let fft = Fft2::new(l);

    let cores: Vec<Vec<f64>> = (0..blocks_y * blocks_x)
        .into_par_iter()
        .map(|block| {
            let (bi, bj) = (block / blocks_x, block % blocks_x);
            let r0 = (bi * b) as i64 - d;
            let c0 = (bj * b) as i64 - d;

            let mut values = vec![0.0; l * l];
            let mut measured = vec![0u8; l * l];
            let mut proj = vec![0u8; l * l];
            for i in 0..l {
                let r = r0 + i as i64;
                if r < 0 || r >= h as i64 {
                    continue;
                }
                for j in 0..l {
                    let c = c0 + j as i64;
                    if c < 0 || c >= w as i64 {
                        continue;
                    }
                    let (r, c) = (r as usize, c as usize);
                    let idx = i * l + j;
                    if sampled.is_measured(r, c) {
                        values[idx] = sampled.frame.get(r, c);
                        measured[idx] = 1;
                    } else if proj_ind[r * w + c] == 1 {
                        values[idx] = proj_values[r * w + c];
                        proj[idx] = 1;
                    }
                }
            }
            let weights = make_weight(&measured, &proj, params);
            let support = SupportArea {
                size: l,
                values,
                weights,
            };
            // A fully unobserved area has nothing to extrapolate from; its
            // model is zero.
            let model = match build_model_core(&support, params, &fft, false) {
                Ok(run) => run.model,
                Err(Error::EmptySupport) => vec![0.0; l * l],
                Err(e) => return Err(e),
            };
            let mut core = vec![0.0; b * b];
            for i in 0..b {
                for j in 0..b {
                    core[i * b + j] = model[(params.border + i) * l + params.border + j];
                }
            }
            Ok(core)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = vec![0.0; w * h];
    for (block, core) in cores.iter().enumerate() {
        let (bi, bj) = (block / blocks_x, block % blocks_x);
        for i in 0..b {
            let r = bi * b + i;
            if r >= h {
                continue;
            }
            for j in 0..b {
                let c = bj * b + j;
                if c >= w {
                    continue;
                }
                let idx = r * w + c;
                out[idx] = if sampled.is_measured(r, c) {
                    sampled.frame.get(r, c)
                } else if proj_ind[idx] == 1 && overwrite_projected {
                    proj_values[idx]
                } else {
                    core[i * b + j].clamp(0.0, 255.0)
                };
            }
        }
    }
    Frame::new(w, h, sampled.frame.t, out)
}
