use std::fmt;

use serde::{Deserialize, Serialize};

/// Which line method produced an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vr,
    Ala,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Vr => "vr",
            Method::Ala => "ala",
        })
    }
}

/// "A vehicle spanning `[x0, x1)` finished crossing the line at `frame`."
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionEvent {
    pub frame: u64,
    pub x0: u32,
    pub x1: u32,
    pub source: Method,
    /// The mark ran into the end of its segment and the frame was clamped.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl ExtractionEvent {
    pub fn new(frame: u64, x0: u32, x1: u32, source: Method) -> Self {
        debug_assert!(x0 < x1);
        ExtractionEvent {
            frame,
            x0,
            x1,
            source,
            truncated: false,
        }
    }
}

/// Intersection over union of two half-open intervals.
pub fn interval_iou(a: (u32, u32), b: (u32, u32)) -> f64 {
    let inter = a.1.min(b.1).saturating_sub(a.0.max(b.0)) as f64;
    let union = (a.1 - a.0) as f64 + (b.1 - b.0) as f64 - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou() {
        assert_eq!(interval_iou((0, 10), (0, 10)), 1.0);
        assert_eq!(interval_iou((0, 10), (10, 20)), 0.0);
        assert!((interval_iou((0, 10), (5, 15)) - 5.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn record_shape() {
        let e = ExtractionEvent::new(1035, 90, 210, Method::Vr);
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"frame":1035,"x0":90,"x1":210,"source":"vr"}"#
        );
    }
}
