//! Plate recognition for extraction events.

use crate::detect::{associate, PlateDetector};
use crate::error::Result;
use crate::event::ExtractionEvent;
use crate::frame::Frame;
use crate::ocr::PlateReader;
use crate::records::PlateReading;
use crate::source::FrameSource;

/// Detector, reader and scan row, applied to one event frame at a time.
pub struct Recognizer<'a> {
    pub detector: &'a dyn PlateDetector,
    pub reader: &'a dyn PlateReader,
    pub lambda: usize,
}

impl Recognizer<'_> {
    /// Detect, associate, read. Never fails: problems become a `FAILED`
    /// reading with a reason.
    pub fn recognize(&self, frame: &Frame, event: &ExtractionEvent) -> PlateReading {
        let dets = match self.detector.detect(frame) {
            Ok(d) => d,
            Err(e) => return PlateReading::failed(event, None, format!("detector: {e}")),
        };
        let Some(det) = associate(&dets, event, self.lambda) else {
            return PlateReading::failed(event, None, "no plate in event interval");
        };
        match self.reader.read(frame, det) {
            Ok(text) => PlateReading::read(event, det, text),
            Err(why) => PlateReading::failed(event, Some(det), why.to_string()),
        }
    }
}

/// Second pass over a stream: recognizes every event at its frame. Output
/// order follows `events`; an event whose frame never shows up fails.
pub fn recognize_events<S: FrameSource>(
    source: S,
    events: &[ExtractionEvent],
    recognizer: &Recognizer<'_>,
) -> Result<Vec<PlateReading>> {
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| events[i].frame);
    let mut out: Vec<Option<PlateReading>> = vec![None; events.len()];
    let mut next = 0;
    for frame in source {
        if next == order.len() {
            break;
        }
        let frame = frame?;
        while next < order.len() && events[order[next]].frame < frame.index {
            next += 1;
        }
        while next < order.len() && events[order[next]].frame == frame.index {
            let i = order[next];
            out[i] = Some(recognizer.recognize(&frame, &events[i]));
            next += 1;
        }
    }
    Ok(out
        .into_iter()
        .zip(events)
        .map(|(r, e)| {
            r.unwrap_or_else(|| PlateReading::failed(e, None, "event frame not in stream"))
        })
        .collect())
}
