//! Plate detection backends and plate-to-event association.

use serde::{Deserialize, Serialize};

use crate::components::{label, Connectivity};
use crate::error::Result;
use crate::event::ExtractionEvent;
use crate::frame::Frame;
use crate::synth::Synthetic;

/// A plate candidate, `[x0,x1) x [y0,y1)` in frame pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
    pub confidence: f32,
    /// Text supplied by the detector itself, if it also reads plates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl Detection {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32, confidence: f32) -> Self {
        Detection {
            x0,
            y0,
            x1,
            y1,
            confidence,
            text: None,
        }
    }

    /// Twice the horizontal center, kept integral.
    fn cx2(&self) -> u64 {
        self.x0 as u64 + self.x1 as u64
    }

    fn cy2(&self) -> i64 {
        self.y0 as i64 + self.y1 as i64
    }

    /// Checks the box is non-empty and inside a `width x height` frame.
    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x0 < self.x1
            && self.y0 < self.y1
            && self.x1 as usize <= width
            && self.y1 as usize <= height
    }
}

/// Anything that finds plates in a frame.
pub trait PlateDetector {
    fn detect(&self, frame: &Frame) -> Result<Vec<Detection>>;
}

/// Reads plate boxes straight out of the synthetic scenario.
pub struct OracleDetector<'a> {
    video: &'a Synthetic,
}

impl<'a> OracleDetector<'a> {
    pub fn new(video: &'a Synthetic) -> Self {
        OracleDetector { video }
    }
}

impl PlateDetector for OracleDetector<'_> {
    fn detect(&self, frame: &Frame) -> Result<Vec<Detection>> {
        Ok(self
            .video
            .plate_boxes(frame.index)
            .into_iter()
            .map(|b| Detection::new(b.x0 as u32, b.y0 as u32, b.x1 as u32, b.y1 as u32, 1.0))
            .collect())
    }
}

/// Finds bright, plate-shaped rectangles that contain dark strokes.
#[derive(Debug, Clone, Copy)]
pub struct GlyphDetector {
    pub bright: u8,
    pub dark: u8,
    pub min_width: usize,
    pub min_height: usize,
    pub min_aspect: f32,
    pub max_aspect: f32,
    /// Bright pixels over box area.
    pub min_fill: f32,
    /// Dark pixels over box area.
    pub min_ink: f32,
}

impl Default for GlyphDetector {
    fn default() -> Self {
        GlyphDetector {
            bright: 220,
            dark: 80,
            min_width: 35,
            min_height: 9,
            min_aspect: 2.5,
            max_aspect: 10.0,
            min_fill: 0.5,
            min_ink: 0.05,
        }
    }
}

impl PlateDetector for GlyphDetector {
    fn detect(&self, frame: &Frame) -> Result<Vec<Detection>> {
        let mask: Vec<u8> = frame
            .pixels()
            .iter()
            .map(|&p| (p >= self.bright) as u8)
            .collect();
        let mut out = Vec::new();
        for b in label(&mask, frame.width(), frame.height(), Connectivity::Four) {
            let (w, h) = (b.width(), b.height());
            if w < self.min_width || h < self.min_height {
                continue;
            }
            let aspect = w as f32 / h as f32;
            let area = (w * h) as f32;
            let fill = b.area as f32 / area;
            if !(self.min_aspect..=self.max_aspect).contains(&aspect) || fill < self.min_fill {
                continue;
            }
            let ink = (b.y0..b.y1)
                .map(|y| {
                    frame.row(y)[b.x0..b.x1]
                        .iter()
                        .filter(|&&p| p <= self.dark)
                        .count()
                })
                .sum::<usize>() as f32
                / area;
            if ink < self.min_ink {
                continue;
            }
            out.push(Detection::new(
                b.x0 as u32,
                b.y0 as u32,
                b.x1 as u32,
                b.y1 as u32,
                fill.min(1.0),
            ));
        }
        Ok(out)
    }
}

/// Picks the detection belonging to `event`: its horizontal center must
/// fall inside the event's `[x0, x1)`, and among those the one whose center
/// is nearest the scan row wins. Ties go to higher confidence, then to the
/// leftmost box.
pub fn associate<'d>(
    detections: &'d [Detection],
    event: &ExtractionEvent,
    lambda: usize,
) -> Option<&'d Detection> {
    let (lo, hi) = (2 * event.x0 as u64, 2 * event.x1 as u64);
    let line2 = 2 * lambda as i64;
    detections
        .iter()
        .filter(|d| (lo..hi).contains(&d.cx2()))
        .min_by(|a, b| {
            let da = (a.cy2() - line2).unsigned_abs();
            let db = (b.cy2() - line2).unsigned_abs();
            da.cmp(&db)
                .then(b.confidence.total_cmp(&a.confidence))
                .then(a.x0.cmp(&b.x0))
                .then(a.y0.cmp(&b.y0))
                .then(a.x1.cmp(&b.x1))
                .then(a.y1.cmp(&b.y1))
        })
}
