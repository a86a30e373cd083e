//! Background subtraction over a single pixel row.
//!
//! [`LineModel`] is a per-position Gaussian mixture in the style of MOG2:
//! each position keeps up to `K` weighted components sorted by weight, a
//! pixel is background when it falls within `k_sigma` standard deviations
//! of a component that belongs to the background set, and every
//! observation updates the mixture with learning rate `alpha = 1/history`.
//! With `history = 1` the model forgets everything but the latest value and
//! behaves like thresholded frame differencing.
//!
//! [`DiffModel`] is the cheap baseline: absolute difference against the
//! previous line with a fixed threshold.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary foreground mask over one line, `1` = foreground.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ForegroundLine {
    pub bits: Vec<u8>,
}

impl ForegroundLine {
    pub fn zeros(width: usize) -> Self {
        ForegroundLine {
            bits: vec![0; width],
        }
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        ForegroundLine { bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubtractorKind {
    Mog2,
    Diff,
}

impl FromStr for SubtractorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mog2" => Ok(SubtractorKind::Mog2),
            "diff" => Ok(SubtractorKind::Diff),
            other => Err(Error::InvalidParameter(format!(
                "unknown background subtractor `{other}` (expected mog2 or diff)"
            ))),
        }
    }
}

/// Settings shared by both subtractors and the closing step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgsubConfig {
    pub kind: SubtractorKind,
    pub history: u32,
    pub components: usize,
    pub k_sigma: f32,
    pub var_min: f32,
    /// Threshold of the difference subtractor.
    pub diff_threshold: u8,
    pub close_radius: usize,
}

impl Default for BgsubConfig {
    fn default() -> Self {
        BgsubConfig {
            kind: SubtractorKind::Mog2,
            history: 1,
            components: 3,
            k_sigma: 2.5,
            var_min: 15.0,
            diff_threshold: 20,
            close_radius: 5,
        }
    }
}

impl BgsubConfig {
    pub fn validate(&self) -> Result<()> {
        if self.components == 0 || self.components > 255 {
            return Err(Error::InvalidParameter(
                "components must be in 1..=255".into(),
            ));
        }
        if !(self.k_sigma.is_finite() && self.k_sigma > 0.0) {
            return Err(Error::InvalidParameter("k_sigma must be positive".into()));
        }
        if !(self.var_min.is_finite() && self.var_min > 0.0) {
            return Err(Error::InvalidParameter("var_min must be positive".into()));
        }
        Ok(())
    }

    /// Builds a fresh subtractor for lines of `width` pixels.
    pub fn build(&self, width: usize) -> Result<Subtractor> {
        self.validate()?;
        Ok(match self.kind {
            SubtractorKind::Mog2 => Subtractor::Mog2(LineModel::new(width, self)),
            SubtractorKind::Diff => Subtractor::Diff(DiffModel::new(width, self.diff_threshold)),
        })
    }
}

/// Cumulative weight a prefix of components must exceed to count as
/// background.
const BACKGROUND_RATIO: f32 = 0.9;
/// Components whose weight drops below `alpha * PRUNE` are removed.
const PRUNE: f32 = 0.05;
/// Upper variance clamp, as a multiple of the floor.
const VAR_MAX_FACTOR: f32 = 5.0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Component {
    pub weight: f32,
    pub mean: f32,
    pub var: f32,
}

/// Per-position Gaussian mixture background model for one line.
#[derive(Debug, Clone)]
pub struct LineModel {
    width: usize,
    k: usize,
    alpha: f32,
    var_min: f32,
    var_max: f32,
    k_sigma_sq: f32,
    comps: Vec<Component>,
    modes: Vec<u8>,
    initialized: bool,
}

impl LineModel {
    pub fn new(width: usize, cfg: &BgsubConfig) -> Self {
        let k = cfg.components.max(1);
        LineModel {
            width,
            k,
            alpha: 1.0 / cfg.history.max(1) as f32,
            var_min: cfg.var_min,
            var_max: cfg.var_min * VAR_MAX_FACTOR,
            k_sigma_sq: cfg.k_sigma * cfg.k_sigma,
            comps: vec![Component::default(); width * k],
            modes: vec![0; width],
            initialized: false,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn alpha(&self) -> f32 {
        self.alpha
    }

    /// Live components at position `x`, strongest first.
    pub fn components(&self, x: usize) -> &[Component] {
        &self.comps[x * self.k..x * self.k + self.modes[x] as usize]
    }

    /// Classifies `line` against the model, then folds it into the model.
    pub fn update_and_classify(&mut self, line: &[u8]) -> Result<ForegroundLine> {
        let mut out = ForegroundLine::zeros(self.width);
        self.update_into(line, &mut out.bits)?;
        Ok(out)
    }

    /// Allocation-free form of [`update_and_classify`](Self::update_and_classify).
    pub fn update_into(&mut self, line: &[u8], mask: &mut [u8]) -> Result<()> {
        if line.len() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: line.len(),
            });
        }
        if mask.len() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                actual: mask.len(),
            });
        }
        if !self.initialized {
            // the first observation defines the background
            for (x, &v) in line.iter().enumerate() {
                self.comps[x * self.k] = Component {
                    weight: 1.0,
                    mean: v as f32,
                    var: self.var_min,
                };
                self.modes[x] = 1;
            }
            mask.fill(0);
            self.initialized = true;
            return Ok(());
        }
        for (x, (&v, m)) in line.iter().zip(mask.iter_mut()).enumerate() {
            let base = x * self.k;
            let n = self.modes[x] as usize;
            let modes = &mut self.comps[base..base + self.k];
            *m = update_pixel(
                modes,
                n,
                v as f32,
                self.alpha,
                self.k_sigma_sq,
                self.var_min,
                self.var_max,
                &mut self.modes[x],
            );
        }
        Ok(())
    }
}

/// One MOG2 step at one position. Returns 1 for foreground.
#[allow(clippy::too_many_arguments)]
#[inline]
fn update_pixel(
    modes: &mut [Component],
    n: usize,
    v: f32,
    alpha: f32,
    k_sigma_sq: f32,
    var_min: f32,
    var_max: f32,
    count: &mut u8,
) -> u8 {
    let k = modes.len();
    let mut matched = None;
    let mut background = false;
    let mut cum = 0.0f32;
    for (i, c) in modes[..n].iter().enumerate() {
        let d = v - c.mean;
        if d * d < k_sigma_sq * c.var {
            matched = Some(i);
            background = cum < BACKGROUND_RATIO;
            break;
        }
        cum += c.weight;
    }

    let mut n = n;
    for c in modes[..n].iter_mut() {
        c.weight *= 1.0 - alpha;
    }
    match matched {
        Some(i) => {
            let c = &mut modes[i];
            c.weight += alpha;
            let rho = alpha / c.weight;
            let d = v - c.mean;
            c.mean += rho * d;
            c.var = (c.var + rho * (d * d - c.var)).clamp(var_min, var_max);
            // restore descending weight order
            let mut j = i;
            while j > 0 && modes[j - 1].weight < modes[j].weight {
                modes.swap(j - 1, j);
                j -= 1;
            }
        }
        None => {
            let slot = if n < k {
                n += 1;
                n - 1
            } else {
                k - 1
            };
            modes[slot] = Component {
                weight: alpha,
                mean: v,
                var: var_min,
            };
            let mut j = slot;
            while j > 0 && modes[j - 1].weight < modes[j].weight {
                modes.swap(j - 1, j);
                j -= 1;
            }
        }
    }

    let total: f32 = modes[..n].iter().map(|c| c.weight).sum();
    if total > 0.0 {
        let inv = 1.0 / total;
        for c in modes[..n].iter_mut() {
            c.weight *= inv;
        }
    }
    let floor = alpha * PRUNE;
    while n > 1 && modes[n - 1].weight < floor {
        n -= 1;
    }
    *count = n as u8;
    (!background) as u8
}

/// Absolute difference against the previous line.
#[derive(Debug, Clone)]
pub struct DiffModel {
    prev: Vec<u8>,
    threshold: u8,
    initialized: bool,
}

impl DiffModel {
    pub fn new(width: usize, threshold: u8) -> Self {
        DiffModel {
            prev: vec![0; width],
            threshold,
            initialized: false,
        }
    }

    pub fn update_into(&mut self, line: &[u8], mask: &mut [u8]) -> Result<()> {
        if line.len() != self.prev.len() || mask.len() != self.prev.len() {
            return Err(Error::WidthMismatch {
                expected: self.prev.len(),
                actual: line.len(),
            });
        }
        if self.initialized {
            for ((m, &v), &p) in mask.iter_mut().zip(line).zip(&self.prev) {
                *m = (v.abs_diff(p) > self.threshold) as u8;
            }
        } else {
            mask.fill(0);
            self.initialized = true;
        }
        self.prev.copy_from_slice(line);
        Ok(())
    }
}

/// Either background subtractor, chosen by configuration.
#[derive(Debug, Clone)]
pub enum Subtractor {
    Mog2(LineModel),
    Diff(DiffModel),
}

impl Subtractor {
    pub fn update_into(&mut self, line: &[u8], mask: &mut [u8]) -> Result<()> {
        match self {
            Subtractor::Mog2(m) => m.update_into(line, mask),
            Subtractor::Diff(m) => m.update_into(line, mask),
        }
    }

    pub fn apply(&mut self, line: &[u8]) -> Result<ForegroundLine> {
        let mut out = ForegroundLine::zeros(line.len());
        self.update_into(line, &mut out.bits)?;
        Ok(out)
    }
}

/// 1-D morphological closing: dilation, then erosion, both with a window of
/// half-width `radius`, computed on the line extended with zeros on both
/// sides. Gaps up to `2 * radius` pixels wide between runs are filled.
pub fn close_gaps(mask: &ForegroundLine, radius: usize) -> ForegroundLine {
    let mut bits = mask.bits.clone();
    close_gaps_in_place(&mut bits, radius, &mut Vec::new());
    ForegroundLine { bits }
}

/// In-place closing with a caller-provided scratch buffer.
pub fn close_gaps_in_place(bits: &mut [u8], radius: usize, scratch: &mut Vec<u32>) {
    if radius == 0 || bits.is_empty() {
        return;
    }
    let n = bits.len();
    let ext = n + 2 * radius;
    // [0, n]: prefix sums of the input; then [n+1, n+1+ext]: prefix sums of
    // the dilation over extended positions x = j - radius.
    scratch.clear();
    scratch.reserve(n + ext + 2);
    scratch.push(0);
    let mut acc = 0u32;
    for &b in bits.iter() {
        acc += b as u32;
        scratch.push(acc);
    }
    let base = n + 1;
    scratch.push(0);
    let mut acc = 0u32;
    for j in 0..ext {
        // window [x - r, x + r] = [j - 2r, j] in input coordinates
        let lo = j.saturating_sub(2 * radius).min(n);
        let hi = (j + 1).min(n);
        acc += (scratch[hi] > scratch[lo]) as u32;
        scratch.push(acc);
    }
    let window = (2 * radius + 1) as u32;
    for (x, b) in bits.iter_mut().enumerate() {
        // erosion window [x - r, x + r] = extended [x, x + 2r]
        *b = (scratch[base + x + 2 * radius + 1] - scratch[base + x] == window) as u8;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mog(width: usize, history: u32) -> LineModel {
        LineModel::new(
            width,
            &BgsubConfig {
                history,
                ..Default::default()
            },
        )
    }

    #[test]
    fn stationary_line_is_background() {
        let mut m = mog(8, 1);
        for i in 0..10 {
            let fg = m.update_and_classify(&[100; 8]).unwrap();
            assert_eq!(fg.count(), 0, "frame {i}");
        }
    }

    #[test]
    fn first_frame_is_all_background() {
        let mut m = mog(5, 1);
        let fg = m.update_and_classify(&[0, 255, 3, 90, 7]).unwrap();
        assert_eq!(fg.bits, vec![0; 5]);
    }

    #[test]
    fn history_one_relearns_within_a_frame() {
        // Hand trace with alpha = 1:
        //   f0 100: model {100}
        //   f1 100: matched, model {100}
        //   f2 200 at 3..7: unmatched -> fg, model {200} (old weight 0, pruned)
        //   f3 100: unmatched against {200} -> fg, model {100}
        //   f4 100: matched -> bg
        let mut m = mog(10, 1);
        let base = [100u8; 10];
        let mut jump = base;
        jump[3..7].fill(200);
        assert_eq!(m.update_and_classify(&base).unwrap().count(), 0);
        assert_eq!(m.update_and_classify(&base).unwrap().count(), 0);
        let fg = m.update_and_classify(&jump).unwrap();
        assert_eq!(fg.bits, vec![0, 0, 0, 1, 1, 1, 1, 0, 0, 0]);
        let fg = m.update_and_classify(&base).unwrap();
        assert_eq!(fg.bits, vec![0, 0, 0, 1, 1, 1, 1, 0, 0, 0]);
        assert_eq!(m.update_and_classify(&base).unwrap().count(), 0);
        assert_eq!(m.components(4).len(), 1);
        assert_eq!(m.components(4)[0].mean, 100.0);
    }

    #[test]
    fn longer_history_keeps_old_background() {
        let mut m = mog(1, 50);
        for _ in 0..20 {
            m.update_and_classify(&[100]).unwrap();
        }
        assert_eq!(m.update_and_classify(&[200]).unwrap().bits, vec![1]);
        // the 100 component still dominates
        assert_eq!(m.update_and_classify(&[100]).unwrap().bits, vec![0]);
    }

    #[test]
    fn width_mismatch() {
        let mut m = mog(4, 1);
        assert!(matches!(
            m.update_and_classify(&[1, 2, 3]),
            Err(Error::WidthMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn diff_baseline() {
        let mut d = DiffModel::new(3, 20);
        let mut mask = [9u8; 3];
        d.update_into(&[10, 10, 10], &mut mask).unwrap();
        assert_eq!(mask, [0, 0, 0]);
        d.update_into(&[10, 31, 30], &mut mask).unwrap();
        assert_eq!(mask, [0, 1, 0]);
    }

    #[test]
    fn closing_examples() {
        let f = |v: &[u8], r| close_gaps(&ForegroundLine::from_bits(v.to_vec()), r).bits;
        assert_eq!(f(&[1, 1, 0, 1, 1], 1), vec![1, 1, 1, 1, 1]);
        assert_eq!(f(&[1, 0, 0, 0, 1], 1), vec![1, 0, 0, 0, 1]);
        assert_eq!(f(&[1, 0, 1, 0, 0, 1], 0), vec![1, 0, 1, 0, 0, 1]);
        assert_eq!(
            f(&[0, 1, 0, 0, 0, 0, 1, 0], 2),
            vec![0, 1, 1, 1, 1, 1, 1, 0]
        );
        assert_eq!(f(&[], 3), Vec::<u8>::new());
    }

    fn naive_close(bits: &[u8], r: usize) -> Vec<u8> {
        let n = bits.len() as isize;
        let r = r as isize;
        let at = |v: &[u8], i: isize, pad: u8| if i < 0 || i >= n { pad } else { v[i as usize] };
        let dil = |x: isize| (x - r..=x + r).map(|i| at(bits, i, 0)).max().unwrap();
        (0..n)
            .map(|x| (x - r..=x + r).map(dil).min().unwrap())
            .collect()
    }

    proptest! {
        #[test]
        fn closing_matches_naive(bits in prop::collection::vec(0u8..=1, 0..64), r in 0usize..6) {
            let got = close_gaps(&ForegroundLine::from_bits(bits.clone()), r).bits;
            prop_assert_eq!(got, naive_close(&bits, r));
        }

        #[test]
        fn closing_idempotent_and_extensive(bits in prop::collection::vec(0u8..=1, 0..64), r in 0usize..6) {
            let m = ForegroundLine::from_bits(bits.clone());
            let once = close_gaps(&m, r);
            prop_assert_eq!(close_gaps(&once, r), once.clone());
            for (a, b) in bits.iter().zip(&once.bits) {
                prop_assert!(a <= b);
            }
        }

        #[test]
        fn stationary_converges_in_two_frames(
            init in prop::collection::vec(any::<u8>(), 16),
            noise in prop::collection::vec(prop::collection::vec(any::<u8>(), 16), 0..5),
            scene in prop::collection::vec(any::<u8>(), 16),
        ) {
            let mut m = mog(16, 1);
            m.update_and_classify(&init).unwrap();
            for line in &noise {
                m.update_and_classify(line).unwrap();
            }
            m.update_and_classify(&scene).unwrap();
            prop_assert_eq!(m.update_and_classify(&scene).unwrap().count(), 0);
        }

        #[test]
        fn model_invariants(lines in prop::collection::vec(prop::collection::vec(any::<u8>(), 4), 1..30), history in 1u32..20) {
            let mut m = mog(4, history);
            for line in &lines {
                m.update_and_classify(line).unwrap();
                for x in 0..4 {
                    let cs = m.components(x);
                    prop_assert!(!cs.is_empty() && cs.len() <= 3);
                    let sum: f32 = cs.iter().map(|c| c.weight).sum();
                    prop_assert!(sum <= 1.0 + 1e-4);
                    for w in cs.windows(2) {
                        prop_assert!(w[0].weight >= w[1].weight);
                    }
                    prop_assert!(cs.iter().all(|c| c.var >= 15.0));
                }
            }
        }

        #[test]
        fn deterministic(lines in prop::collection::vec(prop::collection::vec(any::<u8>(), 6), 1..20)) {
            let mut a = mog(6, 3);
            let mut b = mog(6, 3);
            for line in &lines {
                prop_assert_eq!(a.update_and_classify(line).unwrap(), b.update_and_classify(line).unwrap());
            }
        }
    }
}
