//! `key = value` settings files.
//!
//! ```text
//! # scan row and width threshold
//! lambda = 1000
//! gamma = 100
//! bgsub.kind = mog2
//! bgsub.history = 1
//! bgsub.ksigma = 2.5
//! bgsub.var_min = 15
//! bgsub.close_radius = 5
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ala::AlaParams;
use crate::bgsub::BgsubConfig;
use crate::error::{Error, Result};
use crate::eval::MatchConfig;
use crate::vr::{MarkParams, SegmentParams, VrParams};

/// Every tunable of both extraction methods and the evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub lambda: usize,
    pub gamma: usize,
    pub bgsub: BgsubConfig,
    pub segment_length: usize,
    pub overlap: usize,
    pub dedup_frames: u64,
    pub dedup_iou: f64,
    pub matching: MatchConfig,
}

impl Default for Settings {
    fn default() -> Self {
        let vr = VrParams::default();
        Settings {
            lambda: 1000,
            gamma: 100,
            bgsub: BgsubConfig::default(),
            segment_length: vr.segment.length,
            overlap: vr.segment.overlap,
            dedup_frames: vr.dedup_frames,
            dedup_iou: vr.dedup_iou,
            matching: MatchConfig::default(),
        }
    }
}

/// Keys accepted by [`Settings::set`].
pub const KEYS: &[&str] = &[
    "lambda",
    "gamma",
    "bgsub.kind",
    "bgsub.history",
    "bgsub.components",
    "bgsub.ksigma",
    "bgsub.var_min",
    "bgsub.diff_threshold",
    "bgsub.close_radius",
    "vr.segment",
    "vr.overlap",
    "vr.dedup_frames",
    "vr.dedup_iou",
    "eval.delta",
    "eval.iou",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value `{value}` for `{key}`")))
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "lambda" => self.lambda = parse(key, v)?,
            "gamma" => self.gamma = parse(key, v)?,
            "bgsub.kind" => self.bgsub.kind = v.parse()?,
            "bgsub.history" => self.bgsub.history = parse(key, v)?,
            "bgsub.components" => self.bgsub.components = parse(key, v)?,
            "bgsub.ksigma" => self.bgsub.k_sigma = parse(key, v)?,
            "bgsub.var_min" => self.bgsub.var_min = parse(key, v)?,
            "bgsub.diff_threshold" => self.bgsub.diff_threshold = parse(key, v)?,
            "bgsub.close_radius" => self.bgsub.close_radius = parse(key, v)?,
            "vr.segment" => self.segment_length = parse(key, v)?,
            "vr.overlap" => self.overlap = parse(key, v)?,
            "vr.dedup_frames" => self.dedup_frames = parse(key, v)?,
            "vr.dedup_iou" => self.dedup_iou = parse(key, v)?,
            "eval.delta" => self.matching.frame_tolerance = parse(key, v)?,
            "eval.iou" => self.matching.min_iou = parse(key, v)?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown setting `{other}`"
                )))
            }
        }
        Ok(())
    }

    /// Applies every `key = value` line; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Record {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k, v).map_err(|e| Error::Record {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_str(&std::fs::read_to_string(path)?)
    }

    pub fn ala(&self) -> AlaParams {
        AlaParams {
            lambda: self.lambda,
            gamma: self.gamma,
            bgsub: self.bgsub,
        }
    }

    pub fn vr(&self) -> VrParams {
        VrParams {
            segment: SegmentParams {
                lambda: self.lambda,
                length: self.segment_length,
                overlap: self.overlap,
            },
            marks: MarkParams {
                bgsub: self.bgsub,
                gamma: self.gamma,
            },
            dedup_frames: self.dedup_frames,
            dedup_iou: self.dedup_iou,
        }
    }

    /// Checks everything that can be checked without knowing the frame
    /// size; the scan row is checked against the stream.
    pub fn validate(&self, frame_height: usize) -> Result<()> {
        self.bgsub.validate()?;
        self.vr().segment.validate(frame_height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgsub::SubtractorKind;

    #[test]
    fn parses_file() {
        let mut s = Settings::default();
        s.apply_str("# test\nlambda = 300\n\nbgsub.kind=diff  # baseline\nbgsub.ksigma = 3\nbgsub.close_radius = 0\n")
            .unwrap();
        assert_eq!(s.lambda, 300);
        assert_eq!(s.bgsub.kind, SubtractorKind::Diff);
        assert_eq!(s.bgsub.k_sigma, 3.0);
        assert_eq!(s.bgsub.close_radius, 0);
        assert_eq!(s.ala().lambda, 300);
        assert_eq!(s.vr().segment.lambda, 300);
    }

    #[test]
    fn errors_name_line() {
        let mut s = Settings::default();
        let e = s.apply_str("lambda = 3\nfoo = 1\n").unwrap_err();
        assert!(matches!(e, Error::Record { line: 2, .. }), "{e}");
        let e = s.apply_str("gamma 4\n").unwrap_err();
        assert!(matches!(e, Error::Record { line: 1, .. }), "{e}");
        assert!(s.set("gamma", "-1").is_err());
    }

    #[test]
    fn every_key_accepted() {
        let mut s = Settings::default();
        for k in KEYS {
            let v = if *k == "bgsub.kind" { "mog2" } else { "1" };
            s.set(k, v).unwrap();
        }
    }

    #[test]
    fn line_checked_against_height() {
        let s = Settings {
            lambda: 480,
            ..Settings::default()
        };
        assert!(matches!(
            s.validate(480),
            Err(Error::LineOutOfBounds { .. })
        ));
        assert!(s.validate(481).is_ok());
    }
}
