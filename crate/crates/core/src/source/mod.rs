//! Frame sources: uncompressed video files and numbered image sequences.
//!
//! Every source yields [`Frame`]s in index order and reports its frame size
//! up front, before any payload is read, so callers can validate the scan
//! row against the frame height without touching pixel data.
//!
//! Compressed video is not decoded here. Pipe it through a decoder that
//! writes y4m instead, e.g. `ffmpeg -i in.mp4 -pix_fmt gray -f yuv4mpegpipe out.y4m`.

mod imageseq;
mod raw;
mod y4m;

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frame::Frame;

pub use imageseq::ImageSequence;
pub use raw::{write_raw, RawReader, RawWriter, RAW_HEADER_LEN, RAW_MAGIC};
pub use y4m::{Y4mReader, Y4mWriter};

/// A stream of frames with a known, fixed frame size.
pub trait FrameSource: Iterator<Item = Result<Frame>> {
    /// `(width, height)` of every frame in the stream.
    fn dimensions(&self) -> (usize, usize);

    /// Total frame count, when the container declares it.
    fn frame_count(&self) -> Option<u64> {
        None
    }
}

impl<S: FrameSource + ?Sized> FrameSource for Box<S> {
    fn dimensions(&self) -> (usize, usize) {
        (**self).dimensions()
    }

    fn frame_count(&self) -> Option<u64> {
        (**self).frame_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    RawPlanar,
    Y4m,
    ImageSequence,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" | "raw-planar" | "lsrv" => Ok(InputFormat::RawPlanar),
            "y4m" => Ok(InputFormat::Y4m),
            "images" | "image-sequence" => Ok(InputFormat::ImageSequence),
            other => Err(Error::Unsupported(format!("input format `{other}`"))),
        }
    }
}

impl InputFormat {
    /// Guesses the format from the path: directories are image sequences,
    /// `.y4m` is y4m, anything else is raw-planar.
    pub fn infer(path: &Path) -> InputFormat {
        if path.is_dir() {
            return InputFormat::ImageSequence;
        }
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("y4m") => InputFormat::Y4m,
            _ => InputFormat::RawPlanar,
        }
    }
}

/// Opens `path` as a frame stream of the given format.
pub fn open_stream(path: &Path, format: InputFormat) -> Result<Box<dyn FrameSource + Send>> {
    Ok(match format {
        InputFormat::RawPlanar => Box::new(RawReader::open(path)?),
        InputFormat::Y4m => Box::new(Y4mReader::open(path)?),
        InputFormat::ImageSequence => Box::new(ImageSequence::open(path)?),
    })
}

/// Adapts any iterator of frames with a declared size into a [`FrameSource`].
pub struct IterSource<I> {
    inner: I,
    width: usize,
    height: usize,
}

impl<I> IterSource<I> {
    pub fn new(inner: I, width: usize, height: usize) -> Self {
        IterSource {
            inner,
            width,
            height,
        }
    }
}

impl<I: Iterator<Item = Result<Frame>>> Iterator for IterSource<I> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        self.inner.next()
    }
}

impl<I: Iterator<Item = Result<Frame>>> FrameSource for IterSource<I> {
    fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}
