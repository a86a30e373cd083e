//! Throughput of ALA, VR and full-frame background subtraction.
//!
//! Only processing time counts: time spent inside the source producing
//! frames (decoding, rendering) is measured separately and subtracted.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::ala::AlaRunner;
use crate::bgsub::BgsubConfig;
use crate::config::Settings;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::source::FrameSource;
use crate::vr::run_vr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMethod {
    Ala,
    Vr,
    /// The subtractor over every pixel of every frame.
    FullFrame,
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ala" => Ok(BenchMethod::Ala),
            "vr" => Ok(BenchMethod::Vr),
            "fullframe" => Ok(BenchMethod::FullFrame),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected ala, vr or fullframe)"
            ))),
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMethod::Ala => "ala",
            BenchMethod::Vr => "vr",
            BenchMethod::FullFrame => "fullframe",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub method: BenchMethod,
    pub frames: u64,
    pub seconds: f64,
    pub fps: f64,
}

/// Wraps a source and accumulates the time spent inside `next`.
struct Timed<S> {
    inner: S,
    spent: Duration,
    frames: u64,
}

impl<S: FrameSource> Iterator for Timed<S> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        let t = Instant::now();
        let f = self.inner.next();
        self.spent += t.elapsed();
        if matches!(f, Some(Ok(_))) {
            self.frames += 1;
        }
        f
    }
}

impl<S: FrameSource> FrameSource for Timed<S> {
    fn dimensions(&self) -> (usize, usize) {
        self.inner.dimensions()
    }

    fn frame_count(&self) -> Option<u64> {
        self.inner.frame_count()
    }
}

impl<S: FrameSource> FrameSource for &mut Timed<S> {
    fn dimensions(&self) -> (usize, usize) {
        (**self).dimensions()
    }

    fn frame_count(&self) -> Option<u64> {
        (**self).frame_count()
    }
}

/// Runs the subtractor over whole frames and returns the number of
/// foreground pixels seen, so the work cannot be optimized away.
pub fn run_fullframe<S: FrameSource>(source: S, bgsub: &BgsubConfig) -> Result<u64> {
    let (w, h) = source.dimensions();
    let mut sub = bgsub.build(w * h)?;
    let mut mask = vec![0u8; w * h];
    let mut fg = 0u64;
    for frame in source {
        let frame = frame?;
        sub.update_into(frame.pixels(), &mut mask)?;
        fg += mask.iter().map(|&b| b as u64).sum::<u64>();
    }
    Ok(fg)
}

/// One timed pass of `method` over `source`.
pub fn bench_once<S: FrameSource>(
    method: BenchMethod,
    source: S,
    settings: &Settings,
) -> Result<BenchResult> {
    let mut timed = Timed {
        inner: source,
        spent: Duration::ZERO,
        frames: 0,
    };
    let start = Instant::now();
    match method {
        BenchMethod::Ala => {
            let (w, h) = timed.dimensions();
            let mut runner = AlaRunner::new(w, h, &settings.ala())?;
            for frame in &mut timed {
                std::hint::black_box(runner.push_frame(&frame?)?);
            }
        }
        BenchMethod::Vr => {
            std::hint::black_box(run_vr(&mut timed, &settings.vr(), |_| Ok(()))?);
        }
        BenchMethod::FullFrame => {
            std::hint::black_box(run_fullframe(&mut timed, &settings.bgsub)?);
        }
    }
    let seconds = start
        .elapsed()
        .saturating_sub(timed.spent)
        .as_secs_f64()
        .max(1e-9);
    Ok(BenchResult {
        method,
        frames: timed.frames,
        seconds,
        fps: timed.frames as f64 / seconds,
    })
}

/// `reps` passes, each over a fresh source; returns the pass with the
/// median frame rate.
pub fn bench<S, F>(
    method: BenchMethod,
    mut make_source: F,
    settings: &Settings,
    reps: usize,
) -> Result<BenchResult>
where
    S: FrameSource,
    F: FnMut() -> Result<S>,
{
    if reps == 0 {
        return Err(Error::InvalidParameter("at least one repetition".into()));
    }
    let mut runs = (0..reps)
        .map(|_| bench_once(method, make_source()?, settings))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| a.fps.total_cmp(&b.fps));
    Ok(runs[reps / 2])
}
