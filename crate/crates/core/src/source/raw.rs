use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::FrameSource;
use crate::error::{Error, Result};
use crate::frame::Frame;

pub const RAW_MAGIC: &[u8; 4] = b"LSRV";
pub const RAW_HEADER_LEN: usize = 16;

/// Reader for the raw-planar container: a 16-byte little-endian header
/// (`"LSRV"`, width, height, frame count) followed by `width*height`-byte
/// grayscale frames.
pub struct RawReader<R> {
    inner: R,
    width: usize,
    height: usize,
    count: u64,
    next: u64,
    done: bool,
}

impl RawReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        RawReader::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> RawReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut header = [0u8; RAW_HEADER_LEN];
        read_full(&mut inner, &mut header)
            .and_then(|n| {
                if n == RAW_HEADER_LEN {
                    Ok(())
                } else {
                    Err(io::Error::new(io::ErrorKind::UnexpectedEof, "short header"))
                }
            })
            .map_err(|_| {
                Error::MalformedHeader("raw-planar header shorter than 16 bytes".into())
            })?;
        if &header[..4] != RAW_MAGIC {
            return Err(Error::MalformedHeader(format!(
                "bad magic {:?}, expected \"LSRV\"",
                String::from_utf8_lossy(&header[..4])
            )));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        let (width, height, count) = (word(4) as usize, word(8) as usize, word(12) as u64);
        if width == 0 || height == 0 {
            return Err(Error::MalformedHeader(format!(
                "zero frame size {width}x{height}"
            )));
        }
        Ok(RawReader {
            inner,
            width,
            height,
            count,
            next: 0,
            done: false,
        })
    }
}

impl<R: Read> Iterator for RawReader<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done || self.next >= self.count {
            return None;
        }
        let mut buf = vec![0u8; self.width * self.height];
        match read_full(&mut self.inner, &mut buf) {
            Ok(n) if n == buf.len() => {
                let frame = Frame::new(self.next, self.width, self.height, buf);
                self.next += 1;
                Some(frame)
            }
            Ok(_) => {
                self.done = true;
                Some(Err(Error::Truncated {
                    last_complete: self.next.checked_sub(1),
                }))
            }
            Err(e) => {
                self.done = true;
                Some(Err(e.into()))
            }
        }
    }
}

impl<R: Read> FrameSource for RawReader<R> {
    fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn frame_count(&self) -> Option<u64> {
        Some(self.count)
    }
}

/// Streaming raw-planar writer. The frame count in the header is fixed up
/// front, so the caller must know it.
pub struct RawWriter<W: Write> {
    inner: W,
    width: usize,
    height: usize,
    remaining: u64,
}

impl<W: Write> RawWriter<W> {
    pub fn new(mut inner: W, width: usize, height: usize, count: u64) -> Result<Self> {
        let dims = |v: usize| {
            u32::try_from(v)
                .map_err(|_| Error::InvalidParameter(format!("dimension {v} exceeds u32")))
        };
        let count32 = u32::try_from(count)
            .map_err(|_| Error::InvalidParameter(format!("frame count {count} exceeds u32")))?;
        inner.write_all(RAW_MAGIC)?;
        inner.write_all(&dims(width)?.to_le_bytes())?;
        inner.write_all(&dims(height)?.to_le_bytes())?;
        inner.write_all(&count32.to_le_bytes())?;
        Ok(RawWriter {
            inner,
            width,
            height,
            remaining: count,
        })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<()> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(Error::InvalidParameter(format!(
                "frame {}x{} does not match stream {}x{}",
                frame.width(),
                frame.height(),
                self.width,
                self.height
            )));
        }
        if self.remaining == 0 {
            return Err(Error::InvalidParameter("more frames than declared".into()));
        }
        self.inner.write_all(frame.pixels())?;
        self.remaining -= 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.remaining != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} declared frames never written",
                self.remaining
            )));
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Writes a whole frame stream to `path` in raw-planar form.
pub fn write_raw<I>(path: &Path, width: usize, height: usize, count: u64, frames: I) -> Result<()>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let mut w = RawWriter::new(BufWriter::new(File::create(path)?), width, height, count)?;
    for frame in frames {
        w.write_frame(&frame?)?;
    }
    w.finish()?;
    Ok(())
}

/// Like `read_exact`, but reports how many bytes arrived before EOF.
pub(crate) fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(width: u32, height: u32, count: u32, payload: &[u8]) -> Vec<u8> {
        let mut v = b"LSRV".to_vec();
        v.extend_from_slice(&width.to_le_bytes());
        v.extend_from_slice(&height.to_le_bytes());
        v.extend_from_slice(&count.to_le_bytes());
        v.extend_from_slice(payload);
        v
    }

    #[test]
    fn two_constant_frames() {
        let bytes = encode(4, 2, 2, &[7u8; 16]);
        let reader = RawReader::new(&bytes[..]).unwrap();
        assert_eq!(reader.dimensions(), (4, 2));
        let frames: Vec<Frame> = reader.collect::<Result<_>>().unwrap();
        assert_eq!(frames.len(), 2);
        for (i, f) in frames.iter().enumerate() {
            assert_eq!(f.index, i as u64);
            assert!(f.pixels().iter().all(|&p| p == 7));
        }
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode(4, 2, 1, &[0; 8]);
        bytes[0] = b'X';
        assert!(matches!(
            RawReader::new(&bytes[..]),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn short_header() {
        assert!(matches!(
            RawReader::new(&b"LSRV\x01\x00"[..]),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn truncated_payload_reports_last_complete() {
        let bytes = encode(4, 2, 3, &[1u8; 8 + 8 + 3]);
        let items: Vec<_> = RawReader::new(&bytes[..]).unwrap().collect();
        assert_eq!(items.len(), 3);
        assert!(items[0].is_ok() && items[1].is_ok());
        assert!(matches!(
            items[2],
            Err(Error::Truncated {
                last_complete: Some(1)
            })
        ));
    }

    #[test]
    fn truncated_first_frame() {
        let bytes = encode(4, 2, 1, &[1u8; 5]);
        let items: Vec<_> = RawReader::new(&bytes[..]).unwrap().collect();
        assert!(matches!(
            items[0],
            Err(Error::Truncated {
                last_complete: None
            })
        ));
    }

    #[test]
    fn writer_checks_count() {
        let w = RawWriter::new(Vec::new(), 2, 2, 2).unwrap();
        assert!(w.finish().is_err());
    }
}
