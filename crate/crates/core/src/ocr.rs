//! Plate reading.
//!
//! The glyph reader binarizes the crop with Otsu's threshold, cuts it into
//! seven equal cells and scores every cell against each 5x7 template on the
//! shared cell grid. The first three positions only consider letters, the
//! last four only digits; the merged `O`/`0` class prints as whichever
//! fits the position.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::font::{
    cell_span, cell_unit_ink, CELL_UNITS_H, CELL_UNITS_W, CLASSES, GLYPH_H, GLYPH_W, PLATE_CHARS,
};
use crate::frame::Frame;

/// Why no text came out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcrFailure {
    /// Crop smaller than 35x7 pixels.
    TooSmall,
    /// No threshold separates ink from plate.
    NoContrast,
    /// Box outside the frame.
    OutOfFrame,
    /// The backend returned no text.
    NoText,
}

impl fmt::Display for OcrFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OcrFailure::TooSmall => "crop too small",
            OcrFailure::NoContrast => "no glyph contrast",
            OcrFailure::OutOfFrame => "box outside frame",
            OcrFailure::NoText => "no text from backend",
        })
    }
}

pub trait PlateReader {
    fn read(&self, frame: &Frame, det: &Detection) -> Result<String, OcrFailure>;
}

/// Uses the text the detector attached to its detection.
#[derive(Debug, Clone, Copy, Default)]
pub struct DetectorText;

impl PlateReader for DetectorText {
    fn read(&self, _frame: &Frame, det: &Detection) -> Result<String, OcrFailure> {
        det.text.clone().ok_or(OcrFailure::NoText)
    }
}

/// Detector text when present, otherwise the glyph reader.
#[derive(Debug, Clone, Copy, Default)]
pub struct PreferDetectorText;

impl PlateReader for PreferDetectorText {
    fn read(&self, frame: &Frame, det: &Detection) -> Result<String, OcrFailure> {
        match &det.text {
            Some(t) => Ok(t.clone()),
            None => GlyphReader.read(frame, det),
        }
    }
}

/// Template matcher for the built-in font.
#[derive(Debug, Clone, Copy, Default)]
pub struct GlyphReader;

impl PlateReader for GlyphReader {
    fn read(&self, frame: &Frame, det: &Detection) -> Result<String, OcrFailure> {
        if !det.fits(frame.width(), frame.height()) {
            return Err(OcrFailure::OutOfFrame);
        }
        let (x0, y0, x1, y1) = (
            det.x0 as usize,
            det.y0 as usize,
            det.x1 as usize,
            det.y1 as usize,
        );
        read_crop(&frame.crop(x0, y0, x1, y1), x1 - x0, y1 - y0)
    }
}

/// Otsu threshold of 8-bit pixels, or `None` when all pixels are equal.
/// Pixels `<= t` form the dark class.
pub fn otsu_threshold(pixels: &[u8]) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &p in pixels {
        hist[p as usize] += 1;
    }
    let total = pixels.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();
    let (mut w0, mut sum0) = (0.0f64, 0.0f64);
    let mut best: Option<(f64, u8)> = None;
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(b, _)| between > b) {
            best = Some((between, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

fn cell_score(ink: &[bool], w: usize, h: usize, cx0: usize, cx1: usize, c: char) -> usize {
    let cw = cx1 - cx0;
    let mut score = 0;
    for py in 0..h {
        let gy = py * CELL_UNITS_H / h;
        for px in cx0..cx1 {
            let gx = (px - cx0) * CELL_UNITS_W / cw;
            if ink[py * w + px] == cell_unit_ink(c, gx, gy) {
                score += 1;
            }
        }
    }
    score
}

/// Reads a `w x h` grayscale plate crop.
pub fn read_crop(crop: &[u8], w: usize, h: usize) -> Result<String, OcrFailure> {
    if w < PLATE_CHARS * GLYPH_W || h < GLYPH_H {
        return Err(OcrFailure::TooSmall);
    }
    let t = otsu_threshold(crop).ok_or(OcrFailure::NoContrast)?;
    let ink: Vec<bool> = crop.iter().map(|&p| p <= t).collect();
    let mut text = String::with_capacity(PLATE_CHARS);
    for i in 0..PLATE_CHARS {
        let (cx0, cx1) = cell_span(i, w);
        let letters = i < 3;
        let best = CLASSES
            .iter()
            .copied()
            .filter(|c| {
                if letters {
                    c.is_ascii_uppercase()
                } else {
                    c.is_ascii_digit() || *c == 'O'
                }
            })
            .max_by_key(|&c| (cell_score(&ink, w, h, cx0, cx1, c), std::cmp::Reverse(c)))
            .expect("non-empty class set");
        text.push(if !letters && best == 'O' { '0' } else { best });
    }
    Ok(text)
}
