//! Quarter-sampling mask generation and sensor simulation.
//!
//! Each 2x2 block of the high-resolution grid carries exactly one measured
//! position per frame. A fixed schedule uses one mask forever; a dynamic
//! schedule cycles through four masks so that every position of every 2x2
//! block is read exactly once within four frames, after which the masks
//! repeat.
//!
//! Non-regularity comes from a seeded per-block choice: the fixed mode draws
//! one quadrant per block, the dynamic mode draws a permutation of the four
//! quadrants per block. The generator is a fixed, documented algorithm
//! (SplitMix64 finalizer chained over block coordinates and the seed) so the
//! same inputs give byte-identical masks on every platform. Externally
//! defined masks can be loaded through [`crate::frame_io::read_mask`] and
//! wrapped in a schedule with [`MaskSchedule::from_masks`].

use crate::error::{Error, Result};
use crate::frame_io::{Frame, Mask, SampledFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskMode {
    Fixed,
    Dynamic,
}

impl MaskMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MaskMode::Fixed => "fixed",
            MaskMode::Dynamic => "dynamic",
        }
    }
}

impl std::str::FromStr for MaskMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(MaskMode::Fixed),
            "dynamic" => Ok(MaskMode::Dynamic),
            other => Err(Error::Config(format!(
                "unknown mask mode '{other}' (expected fixed or dynamic)"
            ))),
        }
    }
}

/// A periodic sequence of quarter-sampling masks.
#[derive(Debug, Clone)]
pub struct MaskSchedule {
    pub mode: MaskMode,
    pub seed: u64,
    masks: Vec<Mask>,
}

impl MaskSchedule {
    /// Wraps externally supplied masks, validating the quarter-sampling
    /// invariants: one measurement per 2x2 block per mask, and for a period-4
    /// schedule exact-once coverage of every position across the period.
    pub fn from_masks(mode: MaskMode, masks: Vec<Mask>, seed: u64) -> Result<Self> {
        let expected = match mode {
            MaskMode::Fixed => 1,
            MaskMode::Dynamic => 4,
        };
        if masks.len() != expected {
            return Err(Error::Config(format!(
                "{} schedule needs {} mask(s), got {}",
                mode.as_str(),
                expected,
                masks.len()
            )));
        }
        let schedule = MaskSchedule { mode, seed, masks };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn period(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[Mask] {
        &self.masks
    }

    pub fn width(&self) -> usize {
        self.masks[0].width()
    }

    pub fn height(&self) -> usize {
        self.masks[0].height()
    }

    /// Mask for frame index `t`: `masks[t mod period]`.
    pub fn mask_for(&self, t: usize) -> &Mask {
        &self.masks[t % self.masks.len()]
    }

    fn validate(&self) -> Result<()> {
        let (w, h) = (self.width(), self.height());
        if w % 2 != 0 || h % 2 != 0 {
            return Err(Error::Dimension(format!(
                "mask dimensions {w}x{h} must be even"
            )));
        }
        for (p, mask) in self.masks.iter().enumerate() {
            if mask.width() != w || mask.height() != h {
                return Err(Error::Dimension("schedule masks differ in size".into()));
            }
            for br in 0..h / 2 {
                for bc in 0..w / 2 {
                    let ones: u8 = (0..4)
                        .map(|q| mask.get(br * 2 + q / 2, bc * 2 + q % 2))
                        .sum();
                    if ones != 1 {
                        return Err(Error::Dimension(format!(
                            "mask {p}: block ({br},{bc}) has {ones} measurements, expected 1"
                        )));
                    }
                }
            }
        }
        if self.mode == MaskMode::Dynamic {
            let mut sum = vec![0u8; w * h];
            for mask in &self.masks {
                for (s, b) in sum.iter_mut().zip(mask.bits()) {
                    *s += *b;
                }
            }
            if sum.iter().any(|s| *s != 1) {
                return Err(Error::Dimension(
                    "dynamic schedule does not cover every position exactly once".into(),
                ));
            }
        }
        Ok(())
    }
}

// SplitMix64 finalizer; chaining it over (seed, block row, block col) gives a
// stateless per-block hash that is identical across platforms.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn block_hash(seed: u64, block_row: u64, block_col: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ block_row) ^ block_col)
}

fn check_even(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || width % 2 != 0 || height % 2 != 0 {
        return Err(Error::Dimension(format!(
            "mask dimensions {width}x{height} must be even and nonzero"
        )));
    }
    Ok(())
}

/// Generates a period-1 schedule: one pseudo-randomly chosen quadrant per 2x2
/// block, constant over time. Deterministic in `(width, height, seed)`.
pub fn generate_fixed_mask(width: usize, height: usize, seed: u64) -> Result<MaskSchedule> {
    check_even(width, height)?;
    let mut bits = vec![0u8; width * height];
    for br in 0..height / 2 {
        for bc in 0..width / 2 {
            let q = (block_hash(seed, br as u64, bc as u64) % 4) as usize;
            bits[(br * 2 + q / 2) * width + bc * 2 + q % 2] = 1;
        }
    }
    Ok(MaskSchedule {
        mode: MaskMode::Fixed,
        seed,
        masks: vec![Mask::new(width, height, bits)?],
    })
}

/// Generates a period-4 schedule: per 2x2 block a seeded pseudo-random
/// permutation of the four quadrants decides which quadrant is measured at
/// phases 0..3. The four masks together cover every pixel exactly once.
pub fn generate_dynamic_mask(width: usize, height: usize, seed: u64) -> Result<MaskSchedule> {
    check_even(width, height)?;
    let mut bits = vec![vec![0u8; width * height]; 4];
    for br in 0..height / 2 {
        for bc in 0..width / 2 {
            let mut perm = [0usize, 1, 2, 3];
            let mut h = block_hash(seed, br as u64, bc as u64);
            // Fisher-Yates driven by successive SplitMix64 outputs.
            for i in (1..4).rev() {
                h = splitmix64(h);
                let j = (h % (i as u64 + 1)) as usize;
                perm.swap(i, j);
            }
            for (phase, q) in perm.iter().enumerate() {
                bits[phase][(br * 2 + q / 2) * width + bc * 2 + q % 2] = 1;
            }
        }
    }
    let masks = bits
        .into_iter()
        .map(|b| Mask::new(width, height, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(MaskSchedule {
        mode: MaskMode::Dynamic,
        seed,
        masks,
    })
}

/// Sensor simulation: elementwise product of frame and mask.
pub fn apply_mask(frame: &Frame, mask: &Mask) -> Result<SampledFrame> {
    SampledFrame::new(frame.clone(), mask.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_mask_density_and_block_rule() {
        let schedule = generate_fixed_mask(4, 4, 99).unwrap();
        let mask = schedule.mask_for(0);
        assert_eq!(mask.ones_count(), 4);
        for br in 0..2 {
            for bc in 0..2 {
                let ones: u8 = (0..4)
                    .map(|q| mask.get(br * 2 + q / 2, bc * 2 + q % 2))
                    .sum();
                assert_eq!(ones, 1);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_fixed_mask(64, 64, 7).unwrap();
        let b = generate_fixed_mask(64, 64, 7).unwrap();
        assert_eq!(a.mask_for(0), b.mask_for(0));
        let c = generate_dynamic_mask(64, 64, 7).unwrap();
        let d = generate_dynamic_mask(64, 64, 7).unwrap();
        for p in 0..4 {
            assert_eq!(c.mask_for(p), d.mask_for(p));
        }
    }

    // Regression fixture: digests of two seeds' outputs, pinned from a
    // reference run of this generator.
    fn fnv1a(bytes: &[u8]) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for b in bytes {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    #[test]
    fn seeds_differ_and_match_pinned_digests() {
        let a = generate_fixed_mask(64, 64, 1).unwrap();
        let b = generate_fixed_mask(64, 64, 2).unwrap();
        assert_ne!(a.mask_for(0), b.mask_for(0));
        assert_eq!(fnv1a(a.mask_for(0).bits()), 0x9e9e7e1438e4a1a5);
        assert_eq!(fnv1a(b.mask_for(0).bits()), 0x6ac1525d925a1f3f);
    }

    #[test]
    fn odd_dimensions_rejected() {
        assert!(generate_fixed_mask(127, 128, 0).is_err());
        assert!(generate_dynamic_mask(128, 127, 0).is_err());
    }

    #[test]
    fn dynamic_masks_cover_every_pixel_once() {
        let schedule = generate_dynamic_mask(32, 16, 3).unwrap();
        let (w, h) = (schedule.width(), schedule.height());
        let mut sum = vec![0u8; w * h];
        for p in 0..4 {
            let mask = schedule.mask_for(p);
            assert_eq!(mask.ones_count(), w * h / 4);
            for (s, b) in sum.iter_mut().zip(mask.bits()) {
                *s += *b;
            }
        }
        assert!(sum.iter().all(|s| *s == 1));
    }

    #[test]
    fn mask_for_wraps_by_period() {
        let schedule = generate_dynamic_mask(8, 8, 5).unwrap();
        assert_eq!(schedule.mask_for(7), schedule.mask_for(3));
        assert_eq!(schedule.mask_for(4), schedule.mask_for(0));
        let fixed = generate_fixed_mask(8, 8, 5).unwrap();
        assert_eq!(fixed.mask_for(13), fixed.mask_for(0));
    }

    #[test]
    fn apply_mask_is_elementwise_product() {
        let frame = Frame::new(2, 2, 0, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        let mask = Mask::new(2, 2, vec![1, 0, 0, 0]).unwrap();
        let sampled = apply_mask(&frame, &mask).unwrap();
        assert_eq!(sampled.frame.data(), &[10.0, 0.0, 0.0, 0.0]);

        let ones = Mask::new(2, 2, vec![1, 1, 1, 1]).unwrap();
        let all = apply_mask(&frame, &ones).unwrap();
        assert_eq!(all.frame.data(), frame.data());

        let zeros = Mask::new(2, 2, vec![0, 0, 0, 0]).unwrap();
        let none = apply_mask(&frame, &zeros).unwrap();
        assert_eq!(none.frame.data(), &[0.0; 4]);
    }

    #[test]
    fn apply_mask_dimension_mismatch() {
        let frame = Frame::zeros(2, 2, 0);
        let mask = Mask::new(4, 2, vec![1, 0, 0, 1, 1, 0, 0, 1]).unwrap();
        assert!(apply_mask(&frame, &mask).is_err());
    }

    #[test]
    fn from_masks_validates_quarter_invariant() {
        let good = generate_fixed_mask(4, 4, 0).unwrap().masks()[0].clone();
        assert!(MaskSchedule::from_masks(MaskMode::Fixed, vec![good], 0).is_ok());
        let bad = Mask::new(4, 4, vec![1; 16]).unwrap();
        assert!(MaskSchedule::from_masks(MaskMode::Fixed, vec![bad], 0).is_err());
    }
}
