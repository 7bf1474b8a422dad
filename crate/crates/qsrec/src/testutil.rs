//! Shared fixture helpers for unit tests.

use crate::frame_io::Frame;

/// Small deterministic generator (SplitMix64 stream) so fixtures are
/// identical on every platform.
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Uniform noise frame with values in [0, 255].
pub fn noise_frame(width: usize, height: usize, seed: u64) -> Frame {
    let mut rng = TestRng::new(seed);
    let data = (0..width * height).map(|_| rng.next_f64() * 255.0).collect();
    Frame::new(width, height, 0, data).unwrap()
}

/// Band-limited noise: uniform noise blurred with a circular (wrap-around)
/// Gaussian, rescaled to span most of [0, 255]. Smooth at the kernel scale
/// and seamless under toroidal translation.
pub fn smooth_frame(width: usize, height: usize, seed: u64, sigma: f64) -> Frame {
    let mut rng = TestRng::new(seed);
    let raw: Vec<f64> = (0..width * height).map(|_| rng.next_f64()).collect();
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let ksum: f64 = kernel.iter().sum();

    let mut tmp = vec![0.0; raw.len()];
    for r in 0..height {
        for c in 0..width {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let cc = (c as i64 + i as i64 - radius).rem_euclid(width as i64) as usize;
                acc += k * raw[r * width + cc];
            }
            tmp[r * width + c] = acc / ksum;
        }
    }
    let mut out = vec![0.0; raw.len()];
    for r in 0..height {
        for c in 0..width {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let rr = (r as i64 + i as i64 - radius).rem_euclid(height as i64) as usize;
                acc += k * tmp[rr * width + c];
            }
            out[r * width + c] = acc / ksum;
        }
    }
    let min = out.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = if max > min { 250.0 / (max - min) } else { 0.0 };
    for v in &mut out {
        *v = 2.0 + (*v - min) * scale;
    }
    Frame::new(width, height, 0, out).unwrap()
}

/// Toroidal translation: output(r, c) = input(r + dy mod H, c + dx mod W).
pub fn translate_wrap(frame: &Frame, dy: i64, dx: i64) -> Frame {
    let (w, h) = (frame.width(), frame.height());
    let mut data = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            let sr = (r as i64 + dy).rem_euclid(h as i64) as usize;
            let sc = (c as i64 + dx).rem_euclid(w as i64) as usize;
            data[r * w + c] = frame.get(sr, sc);
        }
    }
    Frame::new(w, h, frame.t, data).unwrap()
}
