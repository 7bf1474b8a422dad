//! Motion-vector consistency checks.
//!
//! Candidate vectors from template matching can be wrong: motion beyond the
//! search range, occlusions, or local optima, all aggravated by the sparse
//! measurements. Four checks are provided:
//!
//! * RME: full reverse motion estimation at the landing position; accept a
//!   vector only when the reverse argmin points straight back.
//! * RMC: reverse costs on the full (2S+1)^2 offset grid placed symmetrically
//!   around the back-pointing vector; accept when the zero offset ranks
//!   first. Same evaluation count as RME (361 at S = 9).
//! * FRMC: RMC restricted to offsets from {-7,-3,-1,0,1,3,7} per dimension,
//!   cutting the evaluations per vector from 361 to 49.
//! * NNC: no template matching at all; 3x3 component-wise median filtering of
//!   the field followed by a four-neighbor absolute-difference rule.
//!
//! The combined mode runs NNC first and passes only its survivors to FRMC,
//! so reverse costs are skipped wherever the cheap check already rejected.
//!
//! Checks only flip entry status from candidate to accepted or rejected; the
//! vector and its cost are never altered.

use crate::error::{Error, Result};
use crate::frame_io::{Frame, SampledFrame};
use crate::motion::{MotionField, MotionParams, MvStatus, ReverseScanner};

pub const DEFAULT_FRMC_OFFSETS: [i32; 7] = [-7, -3, -1, 0, 1, 3, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    None,
    Rme,
    Rmc,
    Frmc,
    NncFrmc,
}

impl CheckKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckKind::None => "none",
            CheckKind::Rme => "rme",
            CheckKind::Rmc => "rmc",
            CheckKind::Frmc => "frmc",
            CheckKind::NncFrmc => "nnc_frmc",
        }
    }
}

impl std::str::FromStr for CheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(CheckKind::None),
            "rme" => Ok(CheckKind::Rme),
            "rmc" => Ok(CheckKind::Rmc),
            "frmc" => Ok(CheckKind::Frmc),
            "nnc_frmc" => Ok(CheckKind::NncFrmc),
            other => Err(Error::Config(format!(
                "unknown check '{other}' (expected none|rme|rmc|frmc|nnc_frmc)"
            ))),
        }
    }
}

/// Which check to run and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckMode {
    pub kind: CheckKind,
    pub frmc_offsets: Vec<i32>,
    pub nnc_threshold: i32,
}

impl Default for CheckMode {
    fn default() -> Self {
        CheckMode {
            kind: CheckKind::NncFrmc,
            frmc_offsets: DEFAULT_FRMC_OFFSETS.to_vec(),
            nnc_threshold: 1,
        }
    }
}

impl CheckMode {
    pub fn validate(&self, params: &MotionParams) -> Result<()> {
        if !self.frmc_offsets.contains(&0) {
            return Err(Error::Config("frmc offsets must contain 0".into()));
        }
        if self
            .frmc_offsets
            .iter()
            .any(|o| o.abs() > params.search_range)
        {
            return Err(Error::Config(format!(
                "frmc offsets must lie within the search range {}",
                params.search_range
            )));
        }
        if self.nnc_threshold < 0 {
            return Err(Error::Config("nnc threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// Instrumentation for one check pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckStats {
    /// Valid candidate entries examined.
    pub candidates: u64,
    pub accepted: u64,
    pub rejected: u64,
    /// Total reverse-cost evaluations performed.
    pub reverse_evals: u64,
    /// Entries rejected by the NNC stage of the cascade (no reverse cost
    /// spent on them).
    pub nnc_rejected: u64,
}

impl CheckStats {
    pub fn merge(&mut self, other: &CheckStats) {
        self.candidates += other.candidates;
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.reverse_evals += other.reverse_evals;
        self.nnc_rejected += other.nnc_rejected;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            self.accepted as f64 / self.candidates as f64
        }
    }
}

/// Component-wise 3x3 median-filtered motion field.
///
/// A position carries a filtered vector exactly when its (frame-clipped) 3x3
/// window contains at least one valid entry; the median over an even count
/// is the lower median.
#[derive(Debug, Clone)]
pub struct FilteredField {
    width: usize,
    vectors: Vec<Option<(i32, i32)>>,
}

impl FilteredField {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<(i32, i32)> {
        self.vectors[row * self.width + col]
    }
}

fn lower_median(values: &mut Vec<i32>) -> i32 {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

pub fn median_filter_field(field: &MotionField) -> FilteredField {
    let (w, h) = (field.width(), field.height());
    let mut vectors = vec![None; w * h];
    let mut alphas = Vec::with_capacity(9);
    let mut betas = Vec::with_capacity(9);
    for r in 0..h {
        for c in 0..w {
            alphas.clear();
            betas.clear();
            for nr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
                for nc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                    let e = field.entry(nr, nc);
                    if e.valid {
                        alphas.push(e.dy);
                        betas.push(e.dx);
                    }
                }
            }
            if !alphas.is_empty() {
                vectors[r * w + c] = Some((lower_median(&mut alphas), lower_median(&mut betas)));
            }
        }
    }
    FilteredField { width: w, vectors }
}

/// Tie-break order shared with the forward estimator: cost, then |dy|+|dx|,
/// then dy, then dx.
#[inline]
fn reverse_better(cost: f64, dy: i32, dx: i32, best: &(f64, i32, i32)) -> bool {
    let (bc, bdy, bdx) = *best;
    if cost != bc {
        return cost < bc;
    }
    let l1 = dy.abs() + dx.abs();
    let bl1 = bdy.abs() + bdx.abs();
    (l1, dy, dx) < (bl1, bdy, bdx)
}

/// Reverse motion estimation check: a full reverse search at the landing
/// position p + v; the vector is accepted only when the reverse argmin is
/// exactly -v. Costs (2S+1)^2 reverse evaluations per entry.
pub fn check_rme(
    field: &mut MotionField,
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
) -> CheckStats {
    let s = params.search_range;
    run_reverse_check(field, current, past, params, |scanner, entry, stats| {
        let mut best: Option<(f64, i32, i32)> = None;
        for uy in -s..=s {
            for ux in -s..=s {
                let cost = scanner.cost((uy, ux));
                stats.reverse_evals += 1;
                if cost.is_finite() {
                    match &best {
                        Some(b) if !reverse_better(cost, uy, ux, b) => {}
                        _ => best = Some((cost, uy, ux)),
                    }
                }
            }
        }
        matches!(best, Some((_, uy, ux)) if (uy, ux) == (-entry.0, -entry.1))
    })
}

/// Reverse motion check: reverse costs on the full offset grid centered on
/// the back-pointing vector -v; accept when the zero offset ranks first
/// under the tie-break order. Same evaluation count as RME.
pub fn check_rmc(
    field: &mut MotionField,
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
) -> CheckStats {
    let s = params.search_range;
    let offsets: Vec<i32> = (-s..=s).collect();
    check_offset_grid(field, current, past, params, &offsets)
}

/// Fast reverse motion check: RMC restricted to the configured offsets per
/// dimension (49 evaluations per entry with the default set).
pub fn check_frmc(
    field: &mut MotionField,
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
    offsets: &[i32],
) -> CheckStats {
    check_offset_grid(field, current, past, params, offsets)
}

fn check_offset_grid(
    field: &mut MotionField,
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
    offsets: &[i32],
) -> CheckStats {
    run_reverse_check(field, current, past, params, |scanner, entry, stats| {
        let back = (-entry.0, -entry.1);
        let zero_cost = scanner.cost(back);
        stats.reverse_evals += 1;
        if !zero_cost.is_finite() {
            // An unverifiable back-pointing vector cannot pass the check.
            stats.reverse_evals += (offsets.len() * offsets.len() - 1) as u64;
            return false;
        }
        let mut accept = true;
        for &dy in offsets {
            for &dx in offsets {
                if (dy, dx) == (0, 0) {
                    continue;
                }
                let cost = scanner.cost((back.0 + dy, back.1 + dx));
                stats.reverse_evals += 1;
                // The zero offset wins every tie (its tie-break key is
                // minimal), so only a strictly smaller cost rejects.
                if cost < zero_cost {
                    accept = false;
                }
            }
        }
        accept
    })
}

fn run_reverse_check<F>(
    field: &mut MotionField,
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
    mut verdict: F,
) -> CheckStats
where
    F: FnMut(&ReverseScanner, (i32, i32), &mut CheckStats) -> bool,
{
    let mut stats = CheckStats::default();
    // Offsets queried by any check stay within 2S of the landing position.
    let max_disp = 2 * params.search_range as i64;
    let (w, h) = (field.width(), field.height());
    for r in 0..h {
        for c in 0..w {
            let e = *field.entry(r, c);
            if !e.valid || e.status != MvStatus::Candidate {
                continue;
            }
            stats.candidates += 1;
            let at = (r as i64 + e.dy as i64, c as i64 + e.dx as i64);
            let scanner = ReverseScanner::new(past, current, at, max_disp, params);
            let ok = verdict(&scanner, (e.dy, e.dx), &mut stats);
            field.entry_mut(r, c).status = if ok {
                stats.accepted += 1;
                MvStatus::Accepted
            } else {
                stats.rejected += 1;
                MvStatus::Rejected
            };
        }
    }
    stats
}

/// Nearest-neighbor check: median-filter the field, then require the sum of
/// absolute component differences between the filtered vector at each entry
/// and at each of its four nearest neighbors (where defined) to stay within
/// the threshold. Needs no template matching.
pub fn check_nnc(field: &mut MotionField, threshold: i32) -> CheckStats {
    let mut stats = CheckStats::default();
    let filtered = median_filter_field(field);
    let (w, h) = (field.width(), field.height());
    for r in 0..h {
        for c in 0..w {
            if !field.entry(r, c).valid {
                continue;
            }
            stats.candidates += 1;
            let center = filtered
                .get(r, c)
                .expect("valid entry always has a filtered vector");
            let mut ok = true;
            let neighbors = [
                (r.wrapping_sub(1), c),
                (r + 1, c),
                (r, c.wrapping_sub(1)),
                (r, c + 1),
            ];
            for (nr, nc) in neighbors {
                if nr >= h || nc >= w {
                    continue;
                }
                if let Some((na, nb)) = filtered.get(nr, nc) {
                    if (center.0 - na).abs() + (center.1 - nb).abs() > threshold {
                        ok = false;
                        break;
                    }
                }
            }
            field.entry_mut(r, c).status = if ok {
                stats.accepted += 1;
                MvStatus::Accepted
            } else {
                stats.rejected += 1;
                MvStatus::Rejected
            };
        }
    }
    stats
}

/// NNC followed by FRMC: entries rejected by NNC are final with no reverse
/// evaluation; NNC survivors go through FRMC, whose verdict stands.
pub fn check_nnc_frmc(
    field: &mut MotionField,
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
    offsets: &[i32],
    threshold: i32,
) -> CheckStats {
    let nnc = check_nnc(field, threshold);
    // Re-open NNC survivors for the FRMC stage.
    let (w, h) = (field.width(), field.height());
    for r in 0..h {
        for c in 0..w {
            let e = field.entry_mut(r, c);
            if e.valid && e.status == MvStatus::Accepted {
                e.status = MvStatus::Candidate;
            }
        }
    }
    let frmc = check_frmc(field, current, past, params, offsets);
    CheckStats {
        candidates: nnc.candidates,
        accepted: frmc.accepted,
        rejected: nnc.rejected + frmc.rejected,
        reverse_evals: frmc.reverse_evals,
        nnc_rejected: nnc.rejected,
    }
}

/// Runs the configured check. `CheckKind::None` accepts every valid
/// candidate without evaluations.
pub fn apply_check(
    mode: &CheckMode,
    field: &mut MotionField,
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
) -> CheckStats {
    match mode.kind {
        CheckKind::None => {
            let mut stats = CheckStats::default();
            let (w, h) = (field.width(), field.height());
            for r in 0..h {
                for c in 0..w {
                    let e = field.entry_mut(r, c);
                    if e.valid && e.status == MvStatus::Candidate {
                        e.status = MvStatus::Accepted;
                        stats.candidates += 1;
                        stats.accepted += 1;
                    }
                }
            }
            stats
        }
        CheckKind::Rme => check_rme(field, current, past, params),
        CheckKind::Rmc => check_rmc(field, current, past, params),
        CheckKind::Frmc => check_frmc(field, current, past, params, &mode.frmc_offsets),
        CheckKind::NncFrmc => check_nnc_frmc(
            field,
            current,
            past,
            params,
            &mode.frmc_offsets,
            mode.nnc_threshold,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{apply_mask, generate_fixed_mask};
    use crate::motion::estimate;
    use crate::testutil::{noise_frame, smooth_frame, translate_wrap};

    // Noise-free global translation pair: true current -> past vector is
    // (2, -3) everywhere.
    fn translation_fixture(size: usize) -> (SampledFrame, Frame) {
        let truth = smooth_frame(size, size, 42, 1.2);
        let past = translate_wrap(&truth, -2, 3);
        let schedule = generate_fixed_mask(size, size, 7).unwrap();
        let sampled = apply_mask(&truth, schedule.mask_for(0)).unwrap();
        (sampled, past)
    }

    fn estimated_field(sampled: &SampledFrame, past: &Frame) -> MotionField {
        let targets = sampled.missing_positions();
        estimate(sampled, past, &MotionParams::default(), &targets, 1).unwrap()
    }

    fn interior_true_entries(field: &MotionField, size: usize) -> (usize, usize) {
        let margin = 13;
        let mut total = 0;
        let mut accepted = 0;
        for (r, c, e) in field.valid_entries() {
            if r >= margin && c >= margin && r < size - margin && c < size - margin
                && (e.dy, e.dx) == (2, -3)
            {
                total += 1;
                if e.status == MvStatus::Accepted {
                    accepted += 1;
                }
            }
        }
        (total, accepted)
    }

    #[test]
    fn rme_accepts_true_translation_vectors() {
        let (sampled, past) = translation_fixture(48);
        let mut field = estimated_field(&sampled, &past);
        let params = MotionParams::default();
        let stats = check_rme(&mut field, &sampled, &past, &params);
        assert_eq!(stats.reverse_evals, stats.candidates * 361);
        let (total, accepted) = interior_true_entries(&field, 48);
        assert!(total > 50);
        assert_eq!(total, accepted, "{accepted}/{total} true vectors accepted");
    }

    #[test]
    fn rmc_and_frmc_accept_true_translation_vectors() {
        let (sampled, past) = translation_fixture(48);
        let params = MotionParams::default();

        let mut rmc_field = estimated_field(&sampled, &past);
        let stats = check_rmc(&mut rmc_field, &sampled, &past, &params);
        assert_eq!(stats.reverse_evals, stats.candidates * 361);
        let (total, accepted) = interior_true_entries(&rmc_field, 48);
        assert_eq!(total, accepted);

        let mut frmc_field = estimated_field(&sampled, &past);
        let stats = check_frmc(
            &mut frmc_field,
            &sampled,
            &past,
            &params,
            &DEFAULT_FRMC_OFFSETS,
        );
        assert_eq!(stats.reverse_evals, stats.candidates * 49);
        let (total, accepted) = interior_true_entries(&frmc_field, 48);
        assert_eq!(total, accepted);
    }

    #[test]
    fn rme_rejects_occluded_vectors() {
        // Past frame with a foreign block pasted over the center: entries
        // whose window content was overwritten cannot be confirmed.
        let size = 48;
        let truth = smooth_frame(size, size, 5, 1.2);
        let mut past = truth.clone();
        let foreign = noise_frame(size, size, 1234);
        for r in 16..32 {
            for c in 16..32 {
                past.set(r, c, foreign.get(r, c));
            }
        }
        let schedule = generate_fixed_mask(size, size, 3).unwrap();
        let sampled = apply_mask(&truth, schedule.mask_for(0)).unwrap();
        let params = MotionParams::default();
        // Targets whose true (zero-motion) correspondence is deep inside the
        // pasted block.
        let targets: Vec<(usize, usize)> = sampled
            .missing_positions()
            .into_iter()
            .filter(|&(r, c)| (21..27).contains(&r) && (21..27).contains(&c))
            .collect();
        let mut field = estimate(&sampled, &past, &params, &targets, 1).unwrap();
        let stats = check_rme(&mut field, &sampled, &past, &params);
        assert!(stats.candidates > 10);
        assert!(
            stats.rejected * 10 >= stats.candidates * 8,
            "only {}/{} rejected",
            stats.rejected,
            stats.candidates
        );
    }

    #[test]
    fn rmc_accepts_flat_region_ties() {
        // Constant content: every reverse cost is 0, and the zero offset
        // wins the tie.
        let size = 48;
        let truth = Frame::new(size, size, 0, vec![100.0; size * size]).unwrap();
        let past = truth.clone();
        let schedule = generate_fixed_mask(size, size, 1).unwrap();
        let sampled = apply_mask(&truth, schedule.mask_for(0)).unwrap();
        let params = MotionParams::default();
        let targets = vec![(24, 24), (20, 30)];
        let mut field = estimate(&sampled, &past, &params, &targets, 1).unwrap();
        let stats = check_rmc(&mut field, &sampled, &past, &params);
        assert_eq!(stats.accepted, stats.candidates);
    }

    #[test]
    fn frmc_accepts_whatever_rmc_accepts() {
        // The FRMC offsets are a subset of the RMC grid, so an RMC pass
        // implies an FRMC pass.
        for seed in 0..6 {
            let size = 40;
            let truth = noise_frame(size, size, 900 + seed);
            let past = noise_frame(size, size, 1800 + seed);
            let schedule = generate_fixed_mask(size, size, seed).unwrap();
            let sampled = apply_mask(&truth, schedule.mask_for(0)).unwrap();
            let params = MotionParams::default();
            let targets: Vec<_> = sampled
                .missing_positions()
                .into_iter()
                .filter(|&(r, c)| r >= 14 && c >= 14 && r < size - 14 && c < size - 14)
                .step_by(7)
                .collect();
            let base = estimate(&sampled, &past, &params, &targets, 1).unwrap();

            let mut rmc_field = base.clone();
            check_rmc(&mut rmc_field, &sampled, &past, &params);
            let mut frmc_field = base.clone();
            check_frmc(&mut frmc_field, &sampled, &past, &params, &DEFAULT_FRMC_OFFSETS);

            for &(r, c) in &targets {
                if rmc_field.entry(r, c).valid
                    && rmc_field.entry(r, c).status == MvStatus::Accepted
                {
                    assert_eq!(
                        frmc_field.entry(r, c).status,
                        MvStatus::Accepted,
                        "rmc accepted ({r},{c}) but frmc rejected"
                    );
                }
            }
        }
    }

    #[test]
    fn median_filter_examples() {
        // Uniform field passes through unchanged.
        let mut field = MotionField::new(5, 5, 1);
        for r in 0..5 {
            for c in 0..5 {
                field.set_candidate(r, c, 2, 1, 0.0);
            }
        }
        let filtered = median_filter_field(&field);
        assert_eq!(filtered.get(2, 2), Some((2, 1)));
        assert_eq!(filtered.get(0, 0), Some((2, 1)));

        // A single outlier among eight agreeing neighbors is removed.
        field.set_candidate(2, 2, 9, 9, 0.0);
        let filtered = median_filter_field(&field);
        assert_eq!(filtered.get(2, 2), Some((2, 1)));

        // Lower median for even counts: alpha values {1,2,4,7} -> 2.
        let mut sparse = MotionField::new(4, 2, 1);
        sparse.set_candidate(0, 0, 1, 0, 0.0);
        sparse.set_candidate(0, 1, 2, 0, 0.0);
        sparse.set_candidate(1, 0, 4, 0, 0.0);
        sparse.set_candidate(1, 1, 7, 0, 0.0);
        let filtered = median_filter_field(&sparse);
        assert_eq!(filtered.get(0, 0), Some((2, 0)));

        // No valid entry anywhere near: undefined.
        let empty = MotionField::new(4, 4, 1);
        let filtered = median_filter_field(&empty);
        assert_eq!(filtered.get(2, 2), None);
    }

    #[test]
    fn nnc_accepts_constant_field() {
        let mut field = MotionField::new(6, 6, 1);
        for r in 0..6 {
            for c in 0..6 {
                field.set_candidate(r, c, 3, -2, 0.0);
            }
        }
        let stats = check_nnc(&mut field, 1);
        assert_eq!(stats.accepted, 36);
        assert_eq!(stats.reverse_evals, 0);
    }

    #[test]
    fn nnc_rejects_step_edge() {
        // Left half (0,0), right half (3,0): the rule fails exactly across
        // the step.
        let mut field = MotionField::new(6, 6, 1);
        for r in 0..6 {
            for c in 0..6 {
                let dy = if c < 3 { 0 } else { 3 };
                field.set_candidate(r, c, dy, 0, 0.0);
            }
        }
        check_nnc(&mut field, 1);
        for r in 0..6 {
            for c in 0..6 {
                let status = field.entry(r, c).status;
                if c == 2 || c == 3 {
                    assert_eq!(status, MvStatus::Rejected, "({r},{c})");
                } else {
                    assert_eq!(status, MvStatus::Accepted, "({r},{c})");
                }
            }
        }
    }

    #[test]
    fn nnc_accepts_isolated_entry() {
        let mut field = MotionField::new(5, 5, 1);
        field.set_candidate(2, 2, 4, 4, 0.0);
        let stats = check_nnc(&mut field, 1);
        assert_eq!(stats.accepted, 1);
    }

    #[test]
    fn nnc_is_idempotent() {
        let mut field = MotionField::new(8, 8, 1);
        for r in 0..8 {
            for c in 0..8 {
                let dy = if c < 4 { 0 } else { 2 };
                field.set_candidate(r, c, dy, 0, 0.0);
            }
        }
        let first = check_nnc(&mut field, 1);
        let snapshot: Vec<_> = (0..8)
            .flat_map(|r| (0..8).map(move |c| (r, c)))
            .map(|(r, c)| *field.entry(r, c))
            .collect();
        let second = check_nnc(&mut field, 1);
        let after: Vec<_> = (0..8)
            .flat_map(|r| (0..8).map(move |c| (r, c)))
            .map(|(r, c)| *field.entry(r, c))
            .collect();
        assert_eq!(snapshot, after);
        assert_eq!(first.accepted, second.accepted);
    }

    #[test]
    fn cascade_skips_reverse_costs_for_nnc_rejections() {
        // A maximally inconsistent checkerboard field: NNC rejects all, so
        // the cascade performs zero reverse evaluations.
        let size = 48;
        let truth = noise_frame(size, size, 77);
        let schedule = generate_fixed_mask(size, size, 2).unwrap();
        let sampled = apply_mask(&truth, schedule.mask_for(0)).unwrap();
        let mut field = MotionField::new(size, size, 1);
        for (i, (r, c)) in sampled.missing_positions().into_iter().enumerate() {
            let v = if i % 2 == 0 { 5 } else { -5 };
            field.set_candidate(r, c, v, -v, 0.0);
        }
        let params = MotionParams::default();
        let stats = check_nnc_frmc(
            &mut field,
            &sampled,
            &truth,
            &params,
            &DEFAULT_FRMC_OFFSETS,
            1,
        );
        assert_eq!(stats.reverse_evals, 0);
        assert_eq!(stats.rejected, stats.candidates);
        assert_eq!(stats.nnc_rejected, stats.candidates);
    }

    #[test]
    fn cascade_equals_frmc_on_nnc_survivors() {
        let (sampled, past) = translation_fixture(48);
        let params = MotionParams::default();
        let base = estimated_field(&sampled, &past);

        let mut cascade_field = base.clone();
        let stats = check_nnc_frmc(
            &mut cascade_field,
            &sampled,
            &past,
            &params,
            &DEFAULT_FRMC_OFFSETS,
            1,
        );

        // Reference: NNC alone, then FRMC alone on the accepted subset.
        let mut reference = base.clone();
        let nnc = check_nnc(&mut reference, 1);
        for r in 0..48 {
            for c in 0..48 {
                let e = reference.entry_mut(r, c);
                if e.valid && e.status == MvStatus::Accepted {
                    e.status = MvStatus::Candidate;
                }
            }
        }
        let frmc = check_frmc(&mut reference, &sampled, &past, &params, &DEFAULT_FRMC_OFFSETS);

        for r in 0..48 {
            for c in 0..48 {
                assert_eq!(cascade_field.entry(r, c), reference.entry(r, c));
            }
        }
        assert_eq!(stats.reverse_evals, frmc.reverse_evals);
        assert_eq!(stats.reverse_evals, 49 * (nnc.accepted));
    }

    #[test]
    fn checks_do_not_alter_vectors_or_costs() {
        let (sampled, past) = translation_fixture(40);
        let params = MotionParams::default();
        let base = estimated_field(&sampled, &past);
        for kind in [CheckKind::Rme, CheckKind::Rmc, CheckKind::Frmc, CheckKind::NncFrmc] {
            let mut field = base.clone();
            let mode = CheckMode {
                kind,
                ..CheckMode::default()
            };
            apply_check(&mode, &mut field, &sampled, &past, &params);
            for (r, c, e) in base.valid_entries() {
                let after = field.entry(r, c);
                assert_eq!((after.dy, after.dx, after.cost), (e.dy, e.dx, e.cost));
                assert_ne!(after.status, MvStatus::Candidate);
            }
        }
    }

    #[test]
    fn check_mode_validation() {
        let params = MotionParams::default();
        let mut mode = CheckMode::default();
        assert!(mode.validate(&params).is_ok());
        mode.frmc_offsets = vec![-1, 1];
        assert!(mode.validate(&params).is_err());
        mode.frmc_offsets = vec![0, 12];
        assert!(mode.validate(&params).is_err());
    }
}
