//! Grayscale frames, binary sampling masks, and their on-disk PGM form.
//!
//! Frames live on the high-resolution grid and keep real-valued luma so that
//! model generation, projection averaging, and the quality metrics run without
//! intermediate quantization. Quantization happens exactly once, when a frame
//! is written to disk. The only container is binary PGM (P5) with maxval 255;
//! sequences are numbered files (`frame0000.pgm`, `frame0001.pgm`, ...) in a
//! directory.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A single grayscale image on the high-resolution grid.
///
/// Pixel data is row-major; position `(m, n)` is `(row, column)`. Values are
/// real numbers in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    /// Frame index within its sequence.
    pub t: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, t: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "frame data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 255.0) {
            return Err(Error::Dimension(format!(
                "frame value {bad} outside [0, 255]"
            )));
        }
        Ok(Frame {
            width,
            height,
            t,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, t: usize) -> Self {
        Frame {
            width,
            height,
            t,
            data: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn same_dims(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Per-pixel binary measurement indicator for one time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Dimension(format!(
                "mask length {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::Dimension("mask entry outside {0, 1}".into()));
        }
        Ok(Mask {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.width + col]
    }

    pub fn ones_count(&self) -> usize {
        self.bits.iter().filter(|b| **b == 1).count()
    }
}

/// A frame whose values are defined only where the mask is 1 (sensor output).
///
/// Values at `mask = 0` positions are 0 and are never read as measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFrame {
    pub frame: Frame,
    pub mask: Mask,
}

impl SampledFrame {
    /// Pairs a frame with its mask. Values at unmeasured positions are forced
    /// to 0.
    pub fn new(mut frame: Frame, mask: Mask) -> Result<Self> {
        if frame.width != mask.width || frame.height != mask.height {
            return Err(Error::Dimension(format!(
                "frame {}x{} vs mask {}x{}",
                frame.width, frame.height, mask.width, mask.height
            )));
        }
        for (v, b) in frame.data.iter_mut().zip(mask.bits.iter()) {
            if *b == 0 {
                *v = 0.0;
            }
        }
        Ok(SampledFrame { frame, mask })
    }

    pub fn width(&self) -> usize {
        self.frame.width
    }

    pub fn height(&self) -> usize {
        self.frame.height
    }

    #[inline]
    pub fn is_measured(&self, row: usize, col: usize) -> bool {
        self.mask.get(row, col) == 1
    }

    /// Positions with no measurement, in row-major order.
    pub fn missing_positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.frame.data.len());
        for r in 0..self.frame.height {
            for c in 0..self.frame.width {
                if self.mask.get(r, c) == 0 {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

/// Numbered file-name pattern such as `frame%04d.pgm`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamePattern {
    prefix: String,
    digits: usize,
    suffix: String,
}

impl NamePattern {
    /// Parses a `printf`-style pattern holding exactly one `%d` or `%0Nd`
    /// placeholder.
    pub fn parse(pattern: &str) -> Result<Self> {
        let start = pattern
            .find('%')
            .ok_or_else(|| Error::Config(format!("pattern '{pattern}' has no % placeholder")))?;
        let rest = &pattern[start + 1..];
        let d_pos = rest
            .find('d')
            .ok_or_else(|| Error::Config(format!("pattern '{pattern}' placeholder lacks 'd'")))?;
        let width_spec = &rest[..d_pos];
        let digits = if width_spec.is_empty() {
            1
        } else {
            let spec = width_spec.strip_prefix('0').unwrap_or(width_spec);
            spec.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad width spec in pattern '{pattern}'")))?
        };
        Ok(NamePattern {
            prefix: pattern[..start].to_string(),
            digits,
            suffix: rest[d_pos + 1..].to_string(),
        })
    }

    pub fn format(&self, index: usize) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{}{:0width$}{}",
            self.prefix,
            index,
            self.suffix,
            width = self.digits
        );
        s
    }
}

impl Default for NamePattern {
    fn default() -> Self {
        NamePattern::parse("frame%04d.pgm").expect("default pattern is valid")
    }
}

// PGM (P5) parsing. The header is ASCII: magic, width, height, maxval,
// separated by whitespace, with '#' comments allowed between tokens.
struct PgmImage {
    width: usize,
    height: usize,
    bytes: Vec<u8>,
}

fn read_pgm(path: &Path) -> Result<PgmImage> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.len() < 2 {
        return Err(Error::format(path, "file too short for a PGM header"));
    }
    match &raw[..2] {
        b"P5" => {}
        b"P2" => {
            return Err(Error::format(
                path,
                "magic number P2 (ASCII PGM) unsupported, expected binary P5",
            ))
        }
        other => {
            return Err(Error::format(
                path,
                format!(
                    "magic number {:?} unsupported, expected P5",
                    String::from_utf8_lossy(other)
                ),
            ))
        }
    }

    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, name) in ["width", "height", "maxval"].iter().enumerate() {
        skip_separators(&raw, &mut pos);
        fields[i] = parse_header_number(&raw, &mut pos)
            .ok_or_else(|| Error::format(path, format!("invalid {name} field")))?;
    }
    // Exactly one whitespace byte separates the maxval from the pixel data.
    if pos >= raw.len() || !raw[pos].is_ascii_whitespace() {
        return Err(Error::format(path, "missing separator before pixel data"));
    }
    pos += 1;

    let (width, height, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(Error::format(
            path,
            format!("maxval {maxval} unsupported, expected 255"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::format(path, "zero width or height"));
    }
    let need = width * height;
    if raw.len() - pos < need {
        return Err(Error::format(
            path,
            format!("pixel data truncated: need {need} bytes, have {}", raw.len() - pos),
        ));
    }
    Ok(PgmImage {
        width,
        height,
        bytes: raw[pos..pos + need].to_vec(),
    })
}

fn skip_separators(raw: &[u8], pos: &mut usize) {
    loop {
        while *pos < raw.len() && raw[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < raw.len() && raw[*pos] == b'#' {
            while *pos < raw.len() && raw[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            return;
        }
    }
}

fn parse_header_number(raw: &[u8], pos: &mut usize) -> Option<usize> {
    let start = *pos;
    while *pos < raw.len() && raw[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return None;
    }
    std::str::from_utf8(&raw[start..*pos]).ok()?.parse().ok()
}

fn write_pgm(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut run = || -> std::io::Result<()> {
        write!(out, "P5\n{width} {height}\n255\n")?;
        out.write_all(bytes)?;
        out.flush()
    };
    run().map_err(|e| Error::io(path, e))
}

/// Reads a binary PGM frame. The frame index `t` is left at 0; sequence
/// readers overwrite it.
pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let img = read_pgm(path)?;
    let data = img.bytes.iter().map(|b| *b as f64).collect();
    Frame::new(img.width, img.height, 0, data)
}

/// Writes a frame as binary PGM. Values are rounded half away from zero and
/// clamped to `[0, 255]`; integer-valued frames round-trip exactly.
pub fn write_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = frame
        .data
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    write_pgm(path.as_ref(), frame.width, frame.height, &bytes)
}

/// Reads a numbered frame sequence with consecutive indices starting at 0.
///
/// Fails on an index gap (a matching file exists beyond a missing index) and
/// on a dimension change across frames. Each frame's `t` equals its index.
pub fn read_sequence(dir: impl AsRef<Path>, pattern: &NamePattern) -> Result<Vec<Frame>> {
    let dir = dir.as_ref();
    let mut frames = Vec::new();
    let mut index = 0;
    loop {
        let path = dir.join(pattern.format(index));
        if !path.exists() {
            break;
        }
        let mut frame = read_frame(&path)?;
        frame.t = index;
        if let Some(first) = frames.first() {
            if !frame.same_dims(first) {
                return Err(Error::Dimension(format!(
                    "frame {} is {}x{}, expected {}x{}",
                    index,
                    frame.width(),
                    frame.height(),
                    first.width(),
                    first.height()
                )));
            }
        }
        frames.push(frame);
        index += 1;
    }
    if frames.is_empty() {
        return Err(Error::format(
            dir,
            format!("no file matching '{}'", pattern.format(0)),
        ));
    }
    // Anything matching the pattern beyond the contiguous run means a gap.
    if let Ok(entries) = fs::read_dir(dir) {
        for entry in entries.flatten() {
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if let Some(i) = parse_pattern_index(pattern, &name) {
                if i >= index {
                    return Err(Error::format(
                        dir,
                        format!("gap in sequence: missing index {index}, found {name}"),
                    ));
                }
            }
        }
    }
    Ok(frames)
}

fn parse_pattern_index(pattern: &NamePattern, name: &str) -> Option<usize> {
    let rest = name.strip_prefix(pattern.prefix.as_str())?;
    let digits = rest.strip_suffix(pattern.suffix.as_str())?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Reads a mask stored as binary PGM where byte 255 means bit 1 and byte 0
/// means bit 0. Any other byte value is rejected.
pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let img = read_pgm(path)?;
    let mut bits = Vec::with_capacity(img.bytes.len());
    for (i, b) in img.bytes.iter().enumerate() {
        match b {
            0 => bits.push(0),
            255 => bits.push(1),
            other => {
                return Err(Error::format(
                    path,
                    format!("mask byte {other} at offset {i}, expected 0 or 255"),
                ))
            }
        }
    }
    Mask::new(img.width, img.height, bits)
}

pub fn write_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = mask.bits.iter().map(|b| if *b == 1 { 255 } else { 0 }).collect();
    write_pgm(path.as_ref(), mask.width, mask.height, &bytes)
}
