//! Visual rhythm: time-spatial images built from one scan row per frame.
//!
//! Row `t` of a [`VrImage`] is row `lambda` of frame `segment_start + t`,
//! copied verbatim. A vehicle crossing the line leaves a mark as wide as the
//! vehicle and as tall as the number of frames it spends on the line; the
//! row just below a mark is the first frame after the vehicle has left.
//!
//! Marks are found by running the line background model down the image row
//! by row (each row is exactly the line the online model would have seen),
//! closing small horizontal gaps, and labeling 8-connected components.
//! Components narrower than `gamma` are dropped.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::bgsub::{close_gaps_in_place, BgsubConfig};
use crate::components::{label, Connectivity};
use crate::error::{Error, Result};
use crate::event::{interval_iou, ExtractionEvent, Method};
use crate::frame::Frame;
use crate::source::FrameSource;

/// Time-spatial image: `width` columns, one row per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrImage {
    pub segment_start: u64,
    width: usize,
    rows: usize,
    pixels: Vec<u8>,
}

impl VrImage {
    pub fn new(segment_start: u64, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || pixels.is_empty() || !pixels.len().is_multiple_of(width) {
            return Err(Error::InvalidParameter(format!(
                "{} bytes do not form rows of width {width}",
                pixels.len()
            )));
        }
        Ok(VrImage {
            segment_start,
            width,
            rows: pixels.len() / width,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Filled rows; equals the segment length except for a final partial
    /// segment.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, t: usize) -> &[u8] {
        &self.pixels[t * self.width..(t + 1) * self.width]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Saves as binary PGM, or PNG when the extension says so.
    pub fn save(&self, path: &Path) -> Result<()> {
        let png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if png {
            image::save_buffer(
                path,
                &self.pixels,
                self.width as u32,
                self.rows as u32,
                image::ExtendedColorType::L8,
            )
            .map_err(|e| Error::Image {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        } else {
            let mut w = BufWriter::new(File::create(path)?);
            write!(w, "P5\n{} {}\n255\n", self.width, self.rows)?;
            w.write_all(&self.pixels)?;
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentParams {
    pub lambda: usize,
    /// Rows per image (`T`).
    pub length: usize,
    /// Rows shared by consecutive images.
    pub overlap: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            lambda: 1000,
            length: 900,
            overlap: 150,
        }
    }
}

impl SegmentParams {
    pub fn validate(&self, height: usize) -> Result<()> {
        if self.lambda >= height {
            return Err(Error::LineOutOfBounds {
                lambda: self.lambda,
                height,
            });
        }
        if self.length == 0 {
            return Err(Error::InvalidParameter(
                "segment length must be at least 1".into(),
            ));
        }
        if self.overlap >= self.length {
            return Err(Error::InvalidParameter(format!(
                "overlap {} must be smaller than segment length {}",
                self.overlap, self.length
            )));
        }
        Ok(())
    }
}

/// Iterator of VR images over a frame stream. See [`build_vr`].
pub struct VrSegments<S> {
    source: S,
    params: SegmentParams,
    width: usize,
    buf: Vec<u8>,
    start: u64,
    /// Rows in `buf` that no earlier image contained.
    fresh: usize,
    done: bool,
}

/// Slices `source` into VR images of `params.length` rows, consecutive
/// images sharing `params.overlap` rows. The last image may be shorter; an
/// image is only emitted if it holds at least one row not already emitted.
pub fn build_vr<S: FrameSource>(source: S, params: SegmentParams) -> Result<VrSegments<S>> {
    let (width, height) = source.dimensions();
    params.validate(height)?;
    Ok(VrSegments {
        source,
        params,
        width,
        buf: Vec::with_capacity(width * params.length),
        start: 0,
        fresh: 0,
        done: false,
    })
}

impl<S: FrameSource> VrSegments<S> {
    fn take_image(&mut self) -> Result<VrImage> {
        let keep = self.params.overlap.min(self.buf.len() / self.width);
        let tail = self.buf[self.buf.len() - keep * self.width..].to_vec();
        let pixels = std::mem::replace(&mut self.buf, tail);
        let rows = pixels.len() / self.width;
        let img = VrImage::new(self.start, self.width, pixels)?;
        self.start += (rows - keep) as u64;
        self.fresh = 0;
        Ok(img)
    }

    fn push(&mut self, frame: &Frame) {
        if self.buf.is_empty() {
            self.start = frame.index;
        }
        self.buf.extend_from_slice(frame.row(self.params.lambda));
        self.fresh += 1;
    }
}

impl<S: FrameSource> Iterator for VrSegments<S> {
    type Item = Result<VrImage>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.source.next() {
                Some(Ok(frame)) => {
                    self.push(&frame);
                    if self.buf.len() == self.width * self.params.length {
                        return Some(self.take_image());
                    }
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                None => {
                    self.done = true;
                    if self.fresh > 0 {
                        return Some(self.take_image());
                    }
                    return None;
                }
            }
        }
    }
}

/// A detected region in VR coordinates: `[x0,x1) x [y0,y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
    pub area: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkParams {
    pub bgsub: BgsubConfig,
    /// Narrowest accepted mark, in pixels.
    pub gamma: usize,
}

impl Default for MarkParams {
    fn default() -> Self {
        MarkParams {
            bgsub: BgsubConfig::default(),
            gamma: 100,
        }
    }
}

/// Foreground mask of a VR image: each row through a fresh line
/// subtractor, in order, then closed.
pub fn binarize(vr: &VrImage, bgsub: &BgsubConfig) -> Result<Vec<u8>> {
    let mut sub = bgsub.build(vr.width())?;
    let mut mask = vec![0u8; vr.pixels().len()];
    let mut scratch = Vec::new();
    for (t, out) in mask.chunks_exact_mut(vr.width()).enumerate() {
        sub.update_into(vr.row(t), out)?;
        close_gaps_in_place(out, bgsub.close_radius, &mut scratch);
    }
    Ok(mask)
}

/// Finds vehicle marks in `vr`, sorted by bottom edge then left edge.
pub fn detect_marks(vr: &VrImage, params: &MarkParams) -> Result<Vec<Mark>> {
    let mask = binarize(vr, &params.bgsub)?;
    let mut marks: Vec<Mark> = label(&mask, vr.width(), vr.rows(), Connectivity::Eight)
        .into_iter()
        .filter(|b| b.width() >= params.gamma)
        .map(|b| Mark {
            x0: b.x0,
            x1: b.x1,
            y0: b.y0,
            y1: b.y1,
            area: b.area,
        })
        .collect();
    marks.sort_by_key(|m| (m.y1, m.x0));
    Ok(marks)
}

/// The frame just below the mark, clamped to the image. A clamped event is
/// flagged `truncated`: the vehicle may still have been on the line.
pub fn mark_to_event(mark: &Mark, vr: &VrImage) -> ExtractionEvent {
    let last = vr.rows() - 1;
    let truncated = mark.y1 > last;
    let row = mark.y1.min(last);
    ExtractionEvent {
        frame: vr.segment_start + row as u64,
        x0: mark.x0 as u32,
        x1: mark.x1 as u32,
        source: Method::Vr,
        truncated,
    }
}

/// Merges events closer than `max_dt` frames whose x-intervals overlap by
/// at least `min_iou`, keeping the earliest. Output is sorted by frame.
pub fn dedup_events(events: &[ExtractionEvent], max_dt: u64, min_iou: f64) -> Vec<ExtractionEvent> {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(|e| (e.frame, e.x0, e.x1));
    let mut kept: Vec<ExtractionEvent> = Vec::with_capacity(sorted.len());
    for e in sorted {
        let dup = kept
            .iter()
            .rev()
            .take_while(|k| e.frame - k.frame <= max_dt)
            .any(|k| interval_iou((k.x0, k.x1), (e.x0, e.x1)) >= min_iou);
        if !dup {
            kept.push(e);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VrParams {
    pub segment: SegmentParams,
    pub marks: MarkParams,
    pub dedup_frames: u64,
    pub dedup_iou: f64,
}

impl Default for VrParams {
    fn default() -> Self {
        VrParams {
            segment: SegmentParams::default(),
            marks: MarkParams::default(),
            dedup_frames: 2,
            dedup_iou: 0.5,
        }
    }
}

/// Events of one VR image, truncated ones dropped. Overlapping segments
/// report a vehicle cut by a segment end again in full in the next image.
pub fn segment_events(vr: &VrImage, params: &MarkParams) -> Result<Vec<ExtractionEvent>> {
    Ok(detect_marks(vr, params)?
        .iter()
        .map(|m| mark_to_event(m, vr))
        .filter(|e| !e.truncated)
        .collect())
}

/// The whole VR method over a stream: build, detect, map, dedup.
/// `on_image` sees every VR image before detection (for export).
pub fn run_vr<S, F>(source: S, params: &VrParams, mut on_image: F) -> Result<Vec<ExtractionEvent>>
where
    S: FrameSource,
    F: FnMut(&VrImage) -> Result<()>,
{
    let mut events = Vec::new();
    for img in build_vr(source, params.segment)? {
        let img = img?;
        on_image(&img)?;
        events.extend(segment_events(&img, &params.marks)?);
    }
    Ok(dedup_events(&events, params.dedup_frames, params.dedup_iou))
}
