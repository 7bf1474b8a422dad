//! Pixel-wise template-matching motion estimation against a reconstructed
//! past frame.
//!
//! For every missing pixel of the current sampled frame, all integer vectors
//! within the search range are tested. The cost of a vector is the mean
//! absolute difference over the measured template pixels around the target
//! whose displaced position stays inside the frame (mean squared difference
//! is available as an alternative). Ties are broken toward the smaller
//! vector: first by |dy| + |dx|, then by dy, then by dx, which keeps results
//! identical regardless of evaluation order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame_io::{Frame, SampledFrame};

/// Cost function for template matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostKind {
    /// Mean absolute difference.
    #[default]
    Mad,
    /// Mean squared difference.
    Msd,
}

impl CostKind {
    #[inline]
    fn accumulate(&self, a: f64, b: f64) -> f64 {
        match self {
            CostKind::Mad => (a - b).abs(),
            CostKind::Msd => {
                let d = a - b;
                d * d
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    /// Search range S: vectors span {-S..S} in both dimensions.
    pub search_range: i32,
    /// Template radius r: the window is (2r+1) x (2r+1).
    pub template_radius: i32,
    /// Minimum number of usable template pixels for a vector to count.
    pub min_support: usize,
    pub cost: CostKind,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            search_range: 9,
            template_radius: 4,
            min_support: 8,
            cost: CostKind::Mad,
        }
    }
}

impl MotionParams {
    pub fn validate(&self) -> Result<()> {
        if self.search_range < 1 || self.template_radius < 1 || self.min_support < 1 {
            return Err(Error::Config(
                "motion parameters must satisfy S >= 1, r >= 1, min_support >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvStatus {
    Candidate,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionEntry {
    pub valid: bool,
    /// Row component of the vector (alpha).
    pub dy: i32,
    /// Column component of the vector (beta).
    pub dx: i32,
    pub cost: f64,
    pub status: MvStatus,
}

impl MotionEntry {
    fn invalid() -> Self {
        MotionEntry {
            valid: false,
            dy: 0,
            dx: 0,
            cost: 0.0,
            status: MvStatus::Candidate,
        }
    }
}

/// Dense per-pixel motion field toward one reference frame.
#[derive(Debug, Clone)]
pub struct MotionField {
    width: usize,
    height: usize,
    /// Temporal distance to the reference frame (d = 1..R).
    pub ref_offset: usize,
    entries: Vec<MotionEntry>,
}

impl MotionField {
    pub fn new(width: usize, height: usize, ref_offset: usize) -> Self {
        MotionField {
            width,
            height,
            ref_offset,
            entries: vec![MotionEntry::invalid(); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> &MotionEntry {
        &self.entries[row * self.width + col]
    }

    #[inline]
    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut MotionEntry {
        &mut self.entries[row * self.width + col]
    }

    pub fn set_candidate(&mut self, row: usize, col: usize, dy: i32, dx: i32, cost: f64) {
        self.entries[row * self.width + col] = MotionEntry {
            valid: true,
            dy,
            dx,
            cost,
            status: MvStatus::Candidate,
        };
    }

    /// Valid entries with their positions, row-major.
    pub fn valid_entries(&self) -> impl Iterator<Item = (usize, usize, &MotionEntry)> {
        self.entries.iter().enumerate().filter_map(move |(i, e)| {
            if e.valid {
                Some((i / self.width, i % self.width, e))
            } else {
                None
            }
        })
    }

    pub fn valid_count(&self) -> usize {
        self.entries.iter().filter(|e| e.valid).count()
    }

    pub fn count_with_status(&self, status: MvStatus) -> usize {
        self.entries
            .iter()
            .filter(|e| e.valid && e.status == status)
            .count()
    }

    /// Debug dump: one CSV row per valid entry
    /// (`row,col,d,dy,dx,cost,status`).
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "row,col,d,alpha,beta,cost,status")?;
        for (r, c, e) in self.valid_entries() {
            let status = match e.status {
                MvStatus::Candidate => "candidate",
                MvStatus::Accepted => "accepted",
                MvStatus::Rejected => "rejected",
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r, c, self.ref_offset, e.dy, e.dx, e.cost, status
            )?;
        }
        Ok(())
    }
}

/// Tie-break key: smaller cost, then smaller |dy|+|dx|, then smaller dy,
/// then smaller dx.
#[inline]
fn better(cost: f64, dy: i32, dx: i32, best: &(f64, i32, i32)) -> bool {
    let (bc, bdy, bdx) = *best;
    if cost != bc {
        return cost < bc;
    }
    let l1 = dy.abs() + dx.abs();
    let bl1 = bdy.abs() + bdx.abs();
    (l1, dy, dx) < (bl1, bdy, bdx)
}

/// Estimates a candidate motion field from `current` toward `past` for the
/// given target positions (a subset of the missing pixels of `current`).
///
/// Every vector v in {-S..S}^2 is scored as the mean cost over measured
/// window pixels q around the target for which q + v stays inside the frame;
/// vectors with fewer than `min_support` usable pixels are skipped. The
/// argmin under the tie-break order becomes a candidate entry; targets with
/// no admissible vector stay invalid.
pub fn estimate(
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
    targets: &[(usize, usize)],
    ref_offset: usize,
) -> Result<MotionField> {
    params.validate()?;
    if current.width() != past.width() || current.height() != past.height() {
        return Err(Error::Dimension(format!(
            "current {}x{} vs past {}x{}",
            current.width(),
            current.height(),
            past.width(),
            past.height()
        )));
    }
    let mut field = MotionField::new(current.width(), current.height(), ref_offset);
    let results: Vec<Option<MotionEntry>> = targets
        .par_iter()
        .map(|&(r, c)| estimate_one(current, past, params, r, c))
        .collect();
    for (&(r, c), entry) in targets.iter().zip(results) {
        if let Some(e) = entry {
            field.entries[r * field.width + c] = e;
        }
    }
    Ok(field)
}

fn estimate_one(
    current: &SampledFrame,
    past: &Frame,
    params: &MotionParams,
    row: usize,
    col: usize,
) -> Option<MotionEntry> {
    let (w, h) = (current.width() as i64, current.height() as i64);
    let s = params.search_range as i64;
    let r = params.template_radius as i64;
    let (row, col) = (row as i64, col as i64);

    // Measured window pixels around the target, row-major.
    let mut template: Vec<(i64, i64, f64)> = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    for qr in row - r..=row + r {
        if qr < 0 || qr >= h {
            continue;
        }
        for qc in col - r..=col + r {
            if qc < 0 || qc >= w {
                continue;
            }
            if current.is_measured(qr as usize, qc as usize) {
                template.push((qr, qc, current.frame.get(qr as usize, qc as usize)));
            }
        }
    }
    if template.len() < params.min_support {
        return None;
    }

    // Fast path: all template positions plus every displacement stay inside
    // the frame, so the usable set is the whole template for every vector.
    let interior = row - r - s >= 0 && row + r + s < h && col - r - s >= 0 && col + r + s < w;

    let mut best: Option<(f64, i32, i32)> = None;
    let past_data = past.data();
    let pw = past.width() as i64;
    for dy in -s..=s {
        for dx in -s..=s {
            let mut sum = 0.0;
            let mut n = 0usize;
            if interior {
                for &(qr, qc, val) in &template {
                    let idx = ((qr + dy) * pw + qc + dx) as usize;
                    sum += params.cost.accumulate(val, past_data[idx]);
                }
                n = template.len();
            } else {
                for &(qr, qc, val) in &template {
                    let tr = qr + dy;
                    let tc = qc + dx;
                    if tr < 0 || tr >= h || tc < 0 || tc >= w {
                        continue;
                    }
                    sum += params.cost.accumulate(val, past_data[(tr * pw + tc) as usize]);
                    n += 1;
                }
            }
            if n < params.min_support {
                continue;
            }
            let cost = sum / n as f64;
            let (dy, dx) = (dy as i32, dx as i32);
            match &best {
                Some(b) if !better(cost, dy, dx, b) => {}
                _ => best = Some((cost, dy, dx)),
            }
        }
    }
    best.map(|(cost, dy, dx)| MotionEntry {
        valid: true,
        dy,
        dx,
        cost,
        status: MvStatus::Candidate,
    })
}

/// Cost of matching the template of `past` centered at `at` against the
/// measured pixels of `current` displaced by `v`: the mean cost over window
/// positions q where q stays inside the past frame, q + v stays inside the
/// current frame, and q + v is measured. Returns +inf when fewer than
/// `min_support` positions qualify.
pub fn reverse_cost(
    past: &Frame,
    current: &SampledFrame,
    at: (i64, i64),
    v: (i32, i32),
    params: &MotionParams,
) -> f64 {
    let (w, h) = (past.width() as i64, past.height() as i64);
    let r = params.template_radius as i64;
    let (ar, ac) = at;
    let (vy, vx) = (v.0 as i64, v.1 as i64);
    let mut sum = 0.0;
    let mut n = 0usize;
    for qr in ar - r..=ar + r {
        if qr < 0 || qr >= h {
            continue;
        }
        let tr = qr + vy;
        if tr < 0 || tr >= h {
            continue;
        }
        for qc in ac - r..=ac + r {
            if qc < 0 || qc >= w {
                continue;
            }
            let tc = qc + vx;
            if tc < 0 || tc >= w {
                continue;
            }
            if current.is_measured(tr as usize, tc as usize) {
                sum += params.cost.accumulate(
                    past.get(qr as usize, qc as usize),
                    current.frame.get(tr as usize, tc as usize),
                );
                n += 1;
            }
        }
    }
    if n < params.min_support {
        f64::INFINITY
    } else {
        sum / n as f64
    }
}

/// Shared state for evaluating many reverse costs around one center.
///
/// Collects the measured current pixels in the reachable neighborhood of
/// `at` once, bucketed by row offset, and then answers individual vector
/// queries in the same summation order as [`reverse_cost`], so results are
/// bit-identical to the plain routine.
pub(crate) struct ReverseScanner<'a> {
    past: &'a Frame,
    at: (i64, i64),
    radius: i64,
    min_support: usize,
    cost: CostKind,
    /// Reach of collected offsets in each direction.
    reach: i64,
    /// Per row offset (index 0 = -reach): measured (col offset, value) pairs.
    rows: Vec<Vec<(i64, f64)>>,
}

impl<'a> ReverseScanner<'a> {
    pub fn new(
        past: &'a Frame,
        current: &SampledFrame,
        at: (i64, i64),
        max_displacement: i64,
        params: &MotionParams,
    ) -> Self {
        let r = params.template_radius as i64;
        let reach = r + max_displacement;
        let (w, h) = (current.width() as i64, current.height() as i64);
        let mut rows = vec![Vec::new(); (2 * reach + 1) as usize];
        for dr in -reach..=reach {
            let cr = at.0 + dr;
            if cr < 0 || cr >= h {
                continue;
            }
            let bucket = &mut rows[(dr + reach) as usize];
            for dc in -reach..=reach {
                let cc = at.1 + dc;
                if cc < 0 || cc >= w {
                    continue;
                }
                if current.is_measured(cr as usize, cc as usize) {
                    bucket.push((dc, current.frame.get(cr as usize, cc as usize)));
                }
            }
        }
        ReverseScanner {
            past,
            at,
            radius: r,
            min_support: params.min_support,
            cost: params.cost,
            reach,
            rows,
        }
    }

    /// Equivalent of `reverse_cost(past, current, at, v, params)`.
    pub fn cost(&self, v: (i32, i32)) -> f64 {
        let (vy, vx) = (v.0 as i64, v.1 as i64);
        debug_assert!(vy.abs() <= self.reach - self.radius && vx.abs() <= self.reach - self.radius);
        let (w, h) = (self.past.width() as i64, self.past.height() as i64);
        let pw = self.past.width();
        let mut sum = 0.0;
        let mut n = 0usize;
        // Current position (at + o) pairs with past position (at + o - v);
        // the past position must lie in the template window, i.e. |o - v|
        // bounded by the radius, and inside the frame.
        for orow in vy - self.radius..=vy + self.radius {
            let qr = self.at.0 + orow - vy;
            if qr < 0 || qr >= h {
                continue;
            }
            let base = qr as usize * pw;
            for &(ocol, cur_val) in &self.rows[(orow + self.reach) as usize] {
                let dqc = ocol - vx;
                if dqc < -self.radius || dqc > self.radius {
                    continue;
                }
                let qc = self.at.1 + dqc;
                if qc < 0 || qc >= w {
                    continue;
                }
                sum += self.cost.accumulate(self.past.data()[base + qc as usize], cur_val);
                n += 1;
            }
        }
        if n < self.min_support {
            f64::INFINITY
        } else {
            sum / n as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_io::{Frame, Mask};
    use crate::mask::{apply_mask, generate_fixed_mask};
    use crate::testutil::{noise_frame, translate_wrap, TestRng};

    fn quarter_sample(frame: &Frame, seed: u64) -> SampledFrame {
        let schedule = generate_fixed_mask(frame.width(), frame.height(), seed).unwrap();
        apply_mask(frame, schedule.mask_for(0)).unwrap()
    }

    #[test]
    fn zero_motion_on_identical_content() {
        let truth = noise_frame(32, 32, 11);
        let sampled = quarter_sample(&truth, 5);
        let params = MotionParams::default();
        let targets = sampled.missing_positions();
        let field = estimate(&sampled, &truth, &params, &targets, 1).unwrap();
        let s = params.search_range + params.template_radius;
        for (r, c, e) in field.valid_entries() {
            let interior = r as i32 >= s
                && c as i32 >= s
                && (r as i32) < 32 - s
                && (c as i32) < 32 - s;
            if interior {
                assert_eq!((e.dy, e.dx), (0, 0), "at ({r},{c})");
                assert_eq!(e.cost, 0.0);
            }
        }
    }

    #[test]
    fn recovers_global_translation() {
        // True current -> past vector is (2, -3); at least 95% of interior
        // targets must find exactly that vector.
        let current_truth = noise_frame(64, 64, 21);
        let past = translate_wrap(&current_truth, -2, 3);
        let sampled = quarter_sample(&current_truth, 9);
        let params = MotionParams::default();
        let targets = sampled.missing_positions();
        let field = estimate(&sampled, &past, &params, &targets, 1).unwrap();
        let margin = (params.search_range + params.template_radius) as usize;
        let mut total = 0;
        let mut hits = 0;
        for (r, c, e) in field.valid_entries() {
            if r >= margin && c >= margin && r < 64 - margin && c < 64 - margin {
                total += 1;
                if (e.dy, e.dx) == (2, -3) {
                    hits += 1;
                }
            }
        }
        assert!(total > 100);
        assert!(
            hits as f64 >= 0.95 * total as f64,
            "only {hits}/{total} found the true vector"
        );
    }

    #[test]
    fn sparse_window_gives_invalid_entry() {
        // A single measured pixel cannot reach min_support for any vector.
        let frame = noise_frame(16, 16, 3);
        let mut bits = vec![0u8; 256];
        bits[8 * 16 + 8] = 1;
        let mask = Mask::new(16, 16, bits).unwrap();
        let sampled = SampledFrame::new(frame.clone(), mask).unwrap();
        let field = estimate(
            &sampled,
            &frame,
            &MotionParams::default(),
            &[(7, 7)],
            1,
        )
        .unwrap();
        assert!(!field.entry(7, 7).valid);
    }

    #[test]
    fn reverse_cost_zero_on_sampled_identity() {
        let truth = noise_frame(32, 32, 4);
        let sampled = quarter_sample(&truth, 4);
        let params = MotionParams::default();
        assert_eq!(reverse_cost(&truth, &sampled, (16, 16), (0, 0), &params), 0.0);
    }

    #[test]
    fn reverse_cost_translation_symmetry() {
        let current_truth = noise_frame(64, 64, 8);
        let past = translate_wrap(&current_truth, -2, 3);
        let sampled = quarter_sample(&current_truth, 2);
        let params = MotionParams::default();
        // Template of past at p + (2,-3) matches current measured pixels
        // displaced back by (-2, 3).
        assert_eq!(
            reverse_cost(&past, &sampled, (30 + 2, 30 - 3), (-2, 3), &params),
            0.0
        );
    }

    #[test]
    fn reverse_cost_without_support_is_infinite() {
        let frame = noise_frame(16, 16, 3);
        let mask = Mask::new(16, 16, vec![0; 256]).unwrap();
        let sampled = SampledFrame::new(frame.clone(), mask).unwrap();
        let cost = reverse_cost(&frame, &sampled, (8, 8), (0, 0), &MotionParams::default());
        assert!(cost.is_infinite());
    }

    #[test]
    fn scanner_matches_reverse_cost_bitwise() {
        let mut rng = TestRng::new(77);
        let params = MotionParams::default();
        for case in 0..40 {
            let truth = noise_frame(24, 24, 100 + case);
            let past = noise_frame(24, 24, 200 + case);
            let sampled = quarter_sample(&truth, case);
            let at = (
                (rng.next_u64() % 24) as i64,
                (rng.next_u64() % 24) as i64,
            );
            let scanner = ReverseScanner::new(&past, &sampled, at, 9, &params);
            for _ in 0..30 {
                let v = (
                    (rng.next_u64() % 19) as i32 - 9,
                    (rng.next_u64() % 19) as i32 - 9,
                );
                let a = reverse_cost(&past, &sampled, at, v, &params);
                let b = scanner.cost(v);
                assert!(
                    a == b || (a.is_infinite() && b.is_infinite()),
                    "mismatch at {at:?} v {v:?}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn enlarging_search_range_never_increases_min_cost() {
        for seed in 0..10 {
            let truth = noise_frame(16, 16, 50 + seed);
            let past = noise_frame(16, 16, 90 + seed);
            let sampled = quarter_sample(&truth, seed);
            let small = MotionParams {
                search_range: 4,
                ..MotionParams::default()
            };
            let large = MotionParams::default();
            let targets = vec![(8, 8)];
            let fs = estimate(&sampled, &past, &small, &targets, 1).unwrap();
            let fl = estimate(&sampled, &past, &large, &targets, 1).unwrap();
            match (fs.entry(8, 8).valid, fl.entry(8, 8).valid) {
                (true, true) => assert!(fl.entry(8, 8).cost <= fs.entry(8, 8).cost),
                (true, false) => panic!("larger range lost the entry"),
                _ => {}
            }
        }
    }

    #[test]
    fn estimate_is_deterministic_across_pools() {
        let truth = noise_frame(32, 32, 13);
        let past = translate_wrap(&truth, 1, 2);
        let sampled = quarter_sample(&truth, 1);
        let params = MotionParams::default();
        let targets = sampled.missing_positions();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate(&sampled, &past, &params, &targets, 1).unwrap());
        let multi = estimate(&sampled, &past, &params, &targets, 1).unwrap();
        for r in 0..32 {
            for c in 0..32 {
                assert_eq!(single.entry(r, c), multi.entry(r, c));
            }
        }
    }

    #[test]
    fn csv_dump_has_row_per_valid_entry() {
        let truth = noise_frame(16, 16, 2);
        let sampled = quarter_sample(&truth, 2);
        let targets = sampled.missing_positions();
        let field = estimate(&sampled, &truth, &MotionParams::default(), &targets, 2).unwrap();
        let mut out = Vec::new();
        field.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + field.valid_count());
        assert!(text.lines().nth(1).unwrap().contains(",2,"));
    }
}
