//! Scoring against ground truth.
//!
//! A predicted event and a ground-truth crossing match when their frames
//! differ by at most `frame_tolerance` and their x-intervals overlap with
//! IoU at least `min_iou`. Pairs are taken greedily by increasing frame
//! difference (ties: higher IoU, then lower indices), each side used once.
//! Unmatched predictions are false positives, unmatched ground truth false
//! negatives.
//!
//! Plate accuracy is counted per character: a ground-truth vehicle with no
//! matched reading, or whose reading failed, scores 0 of its 7 characters.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::event::{interval_iou, ExtractionEvent};
use crate::records::PlateReading;
use crate::synth::GroundTruthRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub frame_tolerance: u64,
    pub min_iou: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            frame_tolerance: 12,
            min_iou: 0.5,
        }
    }
}

/// Greedy one-to-one assignment; returns, per ground-truth entry, the index
/// of its matched prediction.
pub fn assign(
    pred: &[(u64, u32, u32)],
    gt: &[GroundTruthRecord],
    cfg: &MatchConfig,
) -> Vec<Option<usize>> {
    let mut cands: Vec<(u64, f64, usize, usize)> = Vec::new();
    for (i, &(frame, x0, x1)) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let dt = frame.abs_diff(g.frame);
            if dt > cfg.frame_tolerance {
                continue;
            }
            let iou = interval_iou((x0, x1), (g.x_left, g.x_right));
            if iou >= cfg.min_iou {
                cands.push((dt, iou, i, j));
            }
        }
    }
    cands.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.total_cmp(&a.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    let mut pred_used = vec![false; pred.len()];
    let mut out = vec![None; gt.len()];
    for (_, _, i, j) in cands {
        if !pred_used[i] && out[j].is_none() {
            pred_used[i] = true;
            out[j] = Some(i);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl DetectionScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        DetectionScore {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_score: f_score(precision, recall),
        }
    }

    /// Precision has no meaning without predictions; it is reported as 0.
    pub fn precision_defined(&self) -> bool {
        self.tp + self.fp > 0
    }

    pub fn recall_defined(&self) -> bool {
        self.tp + self.fn_ > 0
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn match_events(
    pred: &[ExtractionEvent],
    gt: &[GroundTruthRecord],
    cfg: &MatchConfig,
) -> DetectionScore {
    let keys: Vec<_> = pred.iter().map(|e| (e.frame, e.x0, e.x1)).collect();
    let tp = assign(&keys, gt, cfg).iter().flatten().count();
    DetectionScore::from_counts(tp, pred.len() - tp, gt.len() - tp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrScore {
    pub correct: usize,
    pub total: usize,
}

impl OcrScore {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

fn positional_matches(truth: &str, read: &str) -> usize {
    truth
        .chars()
        .zip(read.chars())
        .filter(|(a, b)| a == b)
        .count()
}

pub fn ocr_score(
    readings: &[PlateReading],
    gt: &[GroundTruthRecord],
    cfg: &MatchConfig,
) -> OcrScore {
    let keys: Vec<_> = readings.iter().map(|r| (r.frame, r.x0, r.x1)).collect();
    let matched = assign(&keys, gt, cfg);
    let total = gt.iter().map(|g| g.plate.chars().count()).sum();
    let correct = gt
        .iter()
        .zip(&matched)
        .filter_map(|(g, m)| {
            let text = readings[(*m)?].text.as_deref()?;
            Some(positional_matches(&g.plate, text))
        })
        .sum();
    OcrScore { correct, total }
}

/// Fraction of ground-truth plate characters read correctly.
pub fn ocr_accuracy(readings: &[PlateReading], gt: &[GroundTruthRecord], cfg: &MatchConfig) -> f64 {
    ocr_score(readings, gt, cfg).accuracy()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub match_config: MatchConfig,
    pub extraction: DetectionScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ocr: Option<OcrScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ocr_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn evaluate(
    events: &[ExtractionEvent],
    readings: Option<&[PlateReading]>,
    gt: &[GroundTruthRecord],
    cfg: &MatchConfig,
) -> EvalReport {
    let extraction = match_events(events, gt, cfg);
    let mut notes = Vec::new();
    if !extraction.precision_defined() {
        notes.push("no predictions: precision undefined, reported as 0".to_string());
    }
    if !extraction.recall_defined() {
        notes.push("no ground truth: recall undefined, reported as 0".to_string());
    }
    let ocr = readings.map(|r| ocr_score(r, gt, cfg));
    EvalReport {
        match_config: *cfg,
        extraction,
        ocr_accuracy: ocr.map(|o| o.accuracy()),
        ocr,
        notes,
    }
}

fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

impl EvalReport {
    /// Plain-text summary: one extraction row (P/R/F), then plate accuracy.
    pub fn to_table(&self, label: &str) -> String {
        let e = &self.extraction;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "Vehicle frame extraction (delta={} frames, IoU>={})",
            self.match_config.frame_tolerance, self.match_config.min_iou
        );
        let _ = writeln!(
            s,
            "| {:<10} | {:>4} | {:>4} | {:>4} | {:>7} | {:>7} | {:>7} |",
            "Video", "TP", "FP", "FN", "P", "R", "F"
        );
        let _ = writeln!(
            s,
            "| {:<10} | {:>4} | {:>4} | {:>4} | {:>7} | {:>7} | {:>7} |",
            label,
            e.tp,
            e.fp,
            e.fn_,
            pct(e.precision),
            pct(e.recall),
            pct(e.f_score)
        );
        if let Some(o) = &self.ocr {
            let _ = writeln!(s, "\nPlate OCR (per character)");
            let _ = writeln!(
                s,
                "| {:<10} | {:>9} | {:>8} |",
                "System", "Chars", "Accuracy"
            );
            let _ = writeln!(
                s,
                "| {:<10} | {:>9} | {:>8} |",
                label,
                format!("{}/{}", o.correct, o.total),
                format!("{:.2}%", 100.0 * o.accuracy())
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Method;
    use proptest::prelude::*;

    fn gt(id: u32, frame: u64, x0: u32, x1: u32, plate: &str) -> GroundTruthRecord {
        GroundTruthRecord {
            id,
            frame,
            x_left: x0,
            x_right: x1,
            plate: plate.into(),
        }
    }

    fn ev(frame: u64, x0: u32, x1: u32) -> ExtractionEvent {
        ExtractionEvent::new(frame, x0, x1, Method::Ala)
    }

    fn reading(frame: u64, x0: u32, x1: u32, text: Option<&str>) -> PlateReading {
        PlateReading {
            frame,
            x0,
            x1,
            bbox: None,
            text: text.map(String::from),
            reason: None,
        }
    }

    #[test]
    fn perfect() {
        let g = [gt(0, 10, 0, 100, "ABC1234"), gt(1, 50, 200, 300, "DEF5678")];
        let s = match_events(
            &[ev(10, 0, 100), ev(50, 200, 300)],
            &g,
            &MatchConfig::default(),
        );
        assert_eq!((s.precision, s.recall, s.f_score), (1.0, 1.0, 1.0));
    }

    #[test]
    fn half_recall() {
        let g = [gt(0, 10, 0, 100, "ABC1234"), gt(1, 50, 200, 300, "DEF5678")];
        let s = match_events(&[ev(11, 0, 100)], &g, &MatchConfig::default());
        assert_eq!((s.tp, s.fp, s.fn_), (1, 0, 1));
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 0.5);
        assert!((s.f_score - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn frame_tolerance_boundary() {
        let cfg = MatchConfig {
            frame_tolerance: 2,
            min_iou: 0.5,
        };
        let g = [gt(0, 100, 0, 100, "ABC1234")];
        let s = match_events(&[ev(103, 0, 100)], &g, &cfg);
        assert_eq!((s.tp, s.fp, s.fn_), (0, 1, 1));
        let s = match_events(&[ev(102, 0, 100)], &g, &cfg);
        assert_eq!(s.tp, 1);
    }

    #[test]
    fn closest_frame_wins() {
        let g = [gt(0, 100, 0, 100, "ABC1234")];
        let keys = [(97, 0, 100), (101, 0, 100)];
        assert_eq!(assign(&keys, &g, &MatchConfig::default()), vec![Some(1)]);
    }

    #[test]
    fn empty_predictions_note() {
        let r = evaluate(
            &[],
            None,
            &[gt(0, 1, 0, 10, "ABC1234")],
            &MatchConfig::default(),
        );
        assert_eq!(r.extraction.precision, 0.0);
        assert!(!r.extraction.precision_defined());
        assert!(r.notes[0].contains("precision undefined"));
    }

    #[test]
    fn f_score_of_rounded_row() {
        // P = 94.9 %, R = 97.4 % -> F = 96.1 %
        let f = f_score(0.949, 0.974);
        assert!((100.0 * f - 96.1).abs() <= 0.1, "{f}");
    }

    #[test]
    fn character_accuracy() {
        let g = [gt(0, 10, 0, 100, "ABC1234")];
        let cfg = MatchConfig::default();
        assert!(
            (ocr_accuracy(&[reading(10, 0, 100, Some("ABC1235"))], &g, &cfg) - 6.0 / 7.0).abs()
                < 1e-12
        );
        assert_eq!(ocr_accuracy(&[reading(10, 0, 100, None)], &g, &cfg), 0.0);
        assert_eq!(ocr_accuracy(&[], &g, &cfg), 0.0);
        assert_eq!(
            ocr_accuracy(&[reading(10, 0, 100, Some("ABC1234"))], &g, &cfg),
            1.0
        );
    }

    #[test]
    fn one_failure_among_k() {
        let k = 5;
        let g: Vec<_> = (0..k)
            .map(|i| gt(i, 100 * i as u64, 0, 100, "ABC1234"))
            .collect();
        let mut r: Vec<_> = (0..k)
            .map(|i| reading(100 * i as u64, 0, 100, Some("ABC1234")))
            .collect();
        r[2].text = None;
        let acc = ocr_accuracy(&r, &g, &MatchConfig::default());
        assert!((acc - (1.0 - 7.0 / (7.0 * k as f64))).abs() < 1e-12);
    }

    #[test]
    fn table_renders() {
        let g = [gt(0, 10, 0, 100, "ABC1234")];
        let r = [reading(10, 0, 100, Some("ABC1234"))];
        let t = evaluate(&[ev(10, 0, 100)], Some(&r), &g, &MatchConfig::default())
            .to_table("synthetic");
        assert!(t.contains("100.0%"));
        assert!(t.contains("7/7"));
    }

    proptest! {
        #[test]
        fn counts_consistent(
            preds in prop::collection::vec((0u64..200, 0u32..300, 1u32..200), 0..15),
            truths in prop::collection::vec((0u64..200, 0u32..300, 1u32..200), 0..15),
            tol in 0u64..20,
        ) {
            let p: Vec<_> = preds.iter().map(|&(f, x, w)| ev(f, x, x + w)).collect();
            let g: Vec<_> = truths.iter().enumerate().map(|(i, &(f, x, w))| gt(i as u32, f, x, x + w, "ABC1234")).collect();
            let s = match_events(&p, &g, &MatchConfig { frame_tolerance: tol, min_iou: 0.3 });
            prop_assert!(s.tp <= p.len().min(g.len()));
            prop_assert_eq!(s.tp + s.fp, p.len());
            prop_assert_eq!(s.tp + s.fn_, g.len());
        }

        #[test]
        fn ocr_order_invariant(
            items in prop::collection::vec((0u64..1000, any::<bool>()), 1..12),
            rot in 0usize..12,
        ) {
            let g: Vec<_> = items.iter().enumerate().map(|(i, &(f, _))| gt(i as u32, f * 50, 0, 100, "ABC1234")).collect();
            let r: Vec<_> = items.iter().map(|&(f, ok)| reading(f * 50, 0, 100, ok.then_some("ABC1230"))).collect();
            let mut r2 = r.clone();
            r2.rotate_left(rot % r.len());
            let cfg = MatchConfig { frame_tolerance: 0, min_iou: 0.5 };
            prop_assert_eq!(ocr_score(&r, &g, &cfg), ocr_score(&r2, &g, &cfg));
        }
    }
}
