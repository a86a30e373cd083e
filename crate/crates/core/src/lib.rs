//! Vehicle frame extraction from a single scan row, plus the plate
//! recognition and evaluation around it.
//!
//! Two extraction methods share one background subtractor:
//!
//! * [`vr`] stacks the scan row of consecutive frames into a visual rhythm
//!   image and finds vehicle marks in it;
//! * [`ala`] tracks foreground runs on the row frame by frame and fires when
//!   a run has fully left the line.
//!
//! ```
//! use linescan::synth::{generate_synthetic, random_traffic, TrafficParams};
//! use linescan::{ala::run_ala, config::Settings, eval::{match_events, MatchConfig}};
//!
//! let params = TrafficParams { vehicles: 3, ..TrafficParams::default() };
//! let scenario = random_traffic(&params, 7)?;
//! let g = generate_synthetic(&scenario, 7)?;
//! let settings = Settings { lambda: scenario.lambda, ..Settings::default() };
//! let events = run_ala(g.video.frames(), &settings.ala(), |_, _| Ok(()))?;
//! let score = match_events(&events, &g.truth, &MatchConfig { frame_tolerance: 2, min_iou: 0.8 });
//! assert_eq!((score.precision, score.recall), (1.0, 1.0));
//! # Ok::<(), linescan::Error>(())
//! ```

pub mod ala;
pub mod bench;
pub mod bgsub;
pub mod components;
pub mod config;
pub mod detect;
pub mod error;
pub mod eval;
pub mod event;
pub mod font;
pub mod frame;
pub mod ocr;
pub mod pipeline;
pub mod plugin;
pub mod records;
pub mod source;
pub mod synth;
pub mod vr;

pub use error::{Error, Result};
pub use event::{ExtractionEvent, Method};
pub use frame::Frame;
pub use source::FrameSource;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/bgsub.md")]
    mod bgsub {}
    #[doc = include_str!("../../../book/src/visual-rhythm.md")]
    mod visual_rhythm {}
    #[doc = include_str!("../../../book/src/ala.md")]
    mod ala {}
    #[doc = include_str!("../../../book/src/plates.md")]
    mod plates {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
