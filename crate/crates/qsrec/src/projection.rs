//! Motion-compensated projection of measured past pixels into the current
//! frame.
//!
//! Each accepted motion vector is followed into its past frame; if the
//! landing position carries an original measurement, that raw value is
//! accumulated at the current position. Contributions from several past
//! frames are averaged. Only original measurements are projected, never
//! model-filled reconstruction values, so projection error stays independent
//! of past reconstruction error.

use crate::error::{Error, Result};
use crate::frame_io::SampledFrame;
use crate::motion::{MotionField, MvStatus};

/// Per-pixel accumulator of projected values and contribution counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBuffer {
    width: usize,
    height: usize,
    sum: Vec<f64>,
    count: Vec<u32>,
}

impl ProjectionBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        ProjectionBuffer {
            width,
            height,
            sum: vec![0.0; width * height],
            count: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn count_at(&self, row: usize, col: usize) -> u32 {
        self.count[row * self.width + col]
    }

    /// Averaged value at a position with at least one contribution.
    #[inline]
    pub fn value_at(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.width + col;
        if self.count[i] > 0 {
            Some(self.sum[i] / self.count[i] as f64)
        } else {
            None
        }
    }

    /// Adds one contribution directly. [`project`] is the usual source;
    /// this entry point serves custom projection schemes.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let i = row * self.width + col;
        self.sum[i] += value;
        self.count[i] += 1;
    }

    /// Number of positions holding at least one contribution.
    pub fn filled(&self) -> usize {
        self.count.iter().filter(|c| **c > 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count.iter().all(|c| *c == 0)
    }

    /// Averaged values and an indicator of where projections exist.
    /// Positions without contributions carry value 0 and indicator 0.
    pub fn overlay(&self) -> (Vec<f64>, Vec<u8>) {
        let mut values = vec![0.0; self.sum.len()];
        let mut indicator = vec![0u8; self.sum.len()];
        for i in 0..self.sum.len() {
            if self.count[i] > 0 {
                values[i] = self.sum[i] / self.count[i] as f64;
                indicator[i] = 1;
            }
        }
        (values, indicator)
    }
}

/// Projects measured pixels of `past` into `buffer` along the accepted
/// entries of `field`. `past` must be the sampled frame (original mask and
/// measurements) of the past frame the field refers to.
pub fn project(
    field: &MotionField,
    past: &SampledFrame,
    buffer: &mut ProjectionBuffer,
) -> Result<()> {
    if field.width() != buffer.width
        || field.height() != buffer.height
        || past.width() != buffer.width
        || past.height() != buffer.height
    {
        return Err(Error::Dimension(format!(
            "projection dimensions disagree: field {}x{}, past {}x{}, buffer {}x{}",
            field.width(),
            field.height(),
            past.width(),
            past.height(),
            buffer.width,
            buffer.height
        )));
    }
    let (w, h) = (buffer.width as i64, buffer.height as i64);
    for (r, c, entry) in field.valid_entries() {
        if entry.status != MvStatus::Accepted {
            continue;
        }
        let pr = r as i64 + entry.dy as i64;
        let pc = c as i64 + entry.dx as i64;
        if pr < 0 || pr >= h || pc < 0 || pc >= w {
            continue;
        }
        let (pr, pc) = (pr as usize, pc as usize);
        if past.is_measured(pr, pc) {
            let i = r * buffer.width + c;
            buffer.sum[i] += past.frame.get(pr, pc);
            buffer.count[i] += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_io::{Frame, Mask};
    use crate::motion::MotionField;

    fn field_with(entries: &[(usize, usize, i32, i32)], w: usize, h: usize) -> MotionField {
        let mut field = MotionField::new(w, h, 1);
        for &(r, c, dy, dx) in entries {
            field.set_candidate(r, c, dy, dx, 0.0);
            field.entry_mut(r, c).status = MvStatus::Accepted;
        }
        field
    }

    fn past_with(values: &[f64], bits: &[u8], w: usize, h: usize) -> SampledFrame {
        let frame = Frame::new(w, h, 0, values.to_vec()).unwrap();
        let mask = Mask::new(w, h, bits.to_vec()).unwrap();
        SampledFrame::new(frame, mask).unwrap()
    }

    #[test]
    fn unmeasured_landing_contributes_nothing() {
        let past = past_with(&[9.0, 0.0, 0.0, 0.0], &[1, 0, 0, 0], 2, 2);
        let field = field_with(&[(0, 0, 0, 1)], 2, 2);
        let mut buf = ProjectionBuffer::new(2, 2);
        project(&field, &past, &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn contributions_average() {
        let past1 = past_with(&[0.0, 10.0, 0.0, 0.0], &[0, 1, 0, 0], 2, 2);
        let past2 = past_with(&[0.0, 0.0, 20.0, 0.0], &[0, 0, 1, 0], 2, 2);
        let f1 = field_with(&[(0, 0, 0, 1)], 2, 2);
        let f2 = field_with(&[(0, 0, 1, 0)], 2, 2);
        let mut buf = ProjectionBuffer::new(2, 2);
        project(&f1, &past1, &mut buf).unwrap();
        project(&f2, &past2, &mut buf).unwrap();
        assert_eq!(buf.value_at(0, 0), Some(15.0));
        assert_eq!(buf.count_at(0, 0), 2);
    }

    #[test]
    fn rejected_entries_do_not_project() {
        let past = past_with(&[9.0, 0.0, 0.0, 0.0], &[1, 0, 0, 0], 2, 2);
        let mut field = MotionField::new(2, 2, 1);
        field.set_candidate(1, 1, -1, -1, 0.0);
        field.entry_mut(1, 1).status = MvStatus::Rejected;
        let mut buf = ProjectionBuffer::new(2, 2);
        project(&field, &past, &mut buf).unwrap();
        assert!(buf.is_empty());
        // Candidate (unchecked) entries do not project either.
        field.entry_mut(1, 1).status = MvStatus::Candidate;
        project(&field, &past, &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn overlay_reports_means_and_indicator() {
        let mut buf = ProjectionBuffer::new(2, 1);
        buf.sum[0] = 30.0;
        buf.count[0] = 3;
        let (values, indicator) = buf.overlay();
        assert_eq!(values, vec![10.0, 0.0]);
        assert_eq!(indicator, vec![1, 0]);

        let empty = ProjectionBuffer::new(2, 1);
        let (v, ind) = empty.overlay();
        assert_eq!(v, vec![0.0, 0.0]);
        assert_eq!(ind, vec![0, 0]);
    }

    #[test]
    fn out_of_frame_landing_is_skipped() {
        let past = past_with(&[9.0, 9.0, 9.0, 9.0], &[1, 1, 1, 1], 2, 2);
        let field = field_with(&[(0, 0, -1, 0)], 2, 2);
        let mut buf = ProjectionBuffer::new(2, 2);
        project(&field, &past, &mut buf).unwrap();
        assert!(buf.is_empty());
    }
}
