//! Accumulative line analysis: an online crossing detector on one row.
//!
//! Per frame:
//!
//! 1. take the scan row and run it through the background subtractor,
//! 2. OR the foreground into the accumulator `line_or`,
//! 3. split `line_or` into maximal runs of ones (clusters `[l, r)`),
//! 4. for each cluster, clear it if it is narrower than `gamma`; otherwise,
//!    if the current foreground XOR the accumulator sums to `r - l` over the
//!    cluster, the vehicle has left the line: emit an event for this frame
//!    and clear the cluster.
//!
//! Because `line_or` is all ones inside a cluster, the XOR test holds
//! exactly when the current foreground is all zero there.
//!
//! Only the accumulator, the subtractor state and two line buffers are
//! kept; memory does not grow with the number of frames.

use crate::bgsub::{close_gaps_in_place, BgsubConfig, ForegroundLine, Subtractor};
use crate::error::{Error, Result};
use crate::event::{ExtractionEvent, Method};
use crate::source::FrameSource;

/// A maximal run of ones, half-open: `[l, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cluster {
    pub l: usize,
    pub r: usize,
}

impl Cluster {
    pub fn width(&self) -> usize {
        self.r - self.l
    }
}

/// Maximal runs of ones in `mask`, left to right.
pub fn get_clusters(mask: &[u8]) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut x = 0;
    while x < mask.len() {
        if mask[x] == 0 {
            x += 1;
            continue;
        }
        let l = x;
        while x < mask.len() && mask[x] != 0 {
            x += 1;
        }
        out.push(Cluster { l, r: x });
    }
    out
}

/// What one step did with a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterFate {
    /// Narrower than gamma; zeroed.
    NoiseCleared,
    /// The vehicle finished crossing; event emitted and zeroed.
    Emitted,
    /// Still accumulating.
    Alive,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub events: Vec<ExtractionEvent>,
    pub clusters: Vec<(Cluster, ClusterFate)>,
}

/// Accumulator state of the line analysis.
#[derive(Debug, Clone)]
pub struct AlaState {
    line_or: Vec<u8>,
    gamma: usize,
    frame: u64,
}

impl AlaState {
    /// A zeroed accumulator whose first step is reported as frame 0.
    pub fn new(width: usize, gamma: usize) -> Self {
        Self::starting_at(width, gamma, 0)
    }

    pub fn starting_at(width: usize, gamma: usize, frame: u64) -> Self {
        AlaState {
            line_or: vec![0; width],
            gamma,
            frame,
        }
    }

    pub fn line_or(&self) -> &[u8] {
        &self.line_or
    }

    /// Frame number the next step will be attributed to.
    pub fn frame(&self) -> u64 {
        self.frame
    }

    pub fn set_frame(&mut self, frame: u64) {
        self.frame = frame;
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// One iteration of the outer loop for foreground `fg`.
    pub fn step(&mut self, fg: &ForegroundLine) -> Result<StepOutcome> {
        self.step_bits(&fg.bits)
    }

    pub fn step_bits(&mut self, fg: &[u8]) -> Result<StepOutcome> {
        if fg.len() != self.line_or.len() {
            return Err(Error::WidthMismatch {
                expected: self.line_or.len(),
                actual: fg.len(),
            });
        }
        for (acc, &f) in self.line_or.iter_mut().zip(fg) {
            *acc |= f;
        }
        let mut out = StepOutcome::default();
        for c in get_clusters(&self.line_or) {
            let span = c.l..c.r;
            let xor_sum: usize = fg[span.clone()]
                .iter()
                .zip(&self.line_or[span.clone()])
                .map(|(&a, &b)| (a ^ b) as usize)
                .sum();
            let fate = if c.width() < self.gamma {
                self.line_or[span].fill(0);
                ClusterFate::NoiseCleared
            } else if xor_sum == c.width() {
                out.events.push(ExtractionEvent::new(
                    self.frame,
                    c.l as u32,
                    c.r as u32,
                    Method::Ala,
                ));
                self.line_or[span].fill(0);
                ClusterFate::Emitted
            } else {
                ClusterFate::Alive
            };
            out.clusters.push((c, fate));
        }
        self.frame += 1;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlaParams {
    pub lambda: usize,
    pub gamma: usize,
    pub bgsub: BgsubConfig,
}

impl Default for AlaParams {
    fn default() -> Self {
        AlaParams {
            lambda: 1000,
            gamma: 100,
            bgsub: BgsubConfig::default(),
        }
    }
}

/// Streaming driver: row extraction, background subtraction, closing, step.
pub struct AlaRunner {
    lambda: usize,
    close_radius: usize,
    subtractor: Subtractor,
    state: AlaState,
    mask: Vec<u8>,
    scratch: Vec<u32>,
}

impl AlaRunner {
    pub fn new(width: usize, height: usize, params: &AlaParams) -> Result<Self> {
        if params.lambda >= height {
            return Err(Error::LineOutOfBounds {
                lambda: params.lambda,
                height,
            });
        }
        Ok(AlaRunner {
            lambda: params.lambda,
            close_radius: params.bgsub.close_radius,
            subtractor: params.bgsub.build(width)?,
            state: AlaState::new(width, params.gamma),
            mask: vec![0; width],
            scratch: Vec::new(),
        })
    }

    /// Processes the scan row of frame `index`.
    pub fn push_line(&mut self, index: u64, line: &[u8]) -> Result<Vec<ExtractionEvent>> {
        self.subtractor.update_into(line, &mut self.mask)?;
        close_gaps_in_place(&mut self.mask, self.close_radius, &mut self.scratch);
        self.state.set_frame(index);
        Ok(self.state.step_bits(&self.mask)?.events)
    }

    pub fn push_frame(&mut self, frame: &crate::frame::Frame) -> Result<Vec<ExtractionEvent>> {
        if frame.height() <= self.lambda {
            return Err(Error::LineOutOfBounds {
                lambda: self.lambda,
                height: frame.height(),
            });
        }
        self.push_line(frame.index, frame.row(self.lambda))
    }

    pub fn state(&self) -> &AlaState {
        &self.state
    }
}

/// Runs the line analysis over a whole stream. `on_event` receives each
/// event together with the frame that triggered it.
pub fn run_ala<S, F>(source: S, params: &AlaParams, mut on_event: F) -> Result<Vec<ExtractionEvent>>
where
    S: FrameSource,
    F: FnMut(&ExtractionEvent, &crate::frame::Frame) -> Result<()>,
{
    let (w, h) = source.dimensions();
    let mut runner = AlaRunner::new(w, h, params)?;
    let mut events = Vec::new();
    for frame in source {
        let frame = frame?;
        for e in runner.push_frame(&frame)? {
            on_event(&e, &frame)?;
            events.push(e);
        }
    }
    Ok(events)
}
