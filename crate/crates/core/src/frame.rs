//! Grayscale frames and the single scan row taken from each of them.

use crate::error::{Error, Result};

/// One 8-bit grayscale video frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub index: u64,
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(index: u64, width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "frame buffer holds {} bytes, expected {}x{}={}",
                pixels.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Frame {
            index,
            width,
            height,
            pixels,
        })
    }

    /// A frame filled with a single value.
    pub fn filled(index: u64, width: usize, height: usize, value: u8) -> Self {
        Frame {
            index,
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixels of row `y`. Panics when `y` is out of bounds.
    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Copies row `lambda` out as a [`ScanLine`].
    pub fn scan_line(&self, lambda: usize) -> Result<ScanLine> {
        if lambda >= self.height {
            return Err(Error::LineOutOfBounds {
                lambda,
                height: self.height,
            });
        }
        Ok(ScanLine {
            index: self.index,
            pixels: self.row(lambda).to_vec(),
        })
    }

    /// Copies the rectangle `[x0,x1) x [y0,y1)` into a new buffer.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity((x1 - x0) * (y1 - y0));
        for y in y0..y1 {
            out.extend_from_slice(&self.row(y)[x0..x1]);
        }
        out
    }
}

/// The pixels of the scan row of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanLine {
    pub index: u64,
    pub pixels: Vec<u8>,
}

impl ScanLine {
    pub fn width(&self) -> usize {
        self.pixels.len()
    }
}

/// Integer BT.601 luma, rounded to nearest.
#[inline]
pub fn luma_bt601(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}
