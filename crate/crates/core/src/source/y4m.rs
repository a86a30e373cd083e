use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::raw::read_full;
use super::FrameSource;
use crate::error::{Error, Result};
use crate::frame::Frame;

const MAX_HEADER: usize = 1024;

/// YUV4MPEG2 reader. Only the luma plane is kept; chroma is skipped.
pub struct Y4mReader<R> {
    inner: R,
    width: usize,
    height: usize,
    chroma_len: usize,
    next: u64,
    done: bool,
}

impl Y4mReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        Y4mReader::new(BufReader::new(File::open(path)?))
    }
}

fn chroma_len(colorspace: &str, w: usize, h: usize) -> Result<usize> {
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    Ok(match colorspace {
        "420" | "420jpeg" | "420paldv" | "420mpeg2" => 2 * cw * ch,
        "422" => 2 * cw * h,
        "444" => 2 * w * h,
        "444alpha" => 3 * w * h,
        "mono" => 0,
        other => {
            return Err(Error::Unsupported(format!(
                "y4m colorspace `{other}` (only 8-bit formats are read)"
            )))
        }
    })
}

fn read_line<R: BufRead>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    let n = std::io::Read::take(&mut *r, MAX_HEADER as u64).read_until(b'\n', &mut line)?;
    if n == 0 {
        return Ok(None);
    }
    Ok(Some(line))
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let line = read_line(&mut inner)?
            .ok_or_else(|| Error::MalformedHeader("empty y4m stream".into()))?;
        if line.last() != Some(&b'\n') {
            return Err(Error::MalformedHeader("unterminated y4m header".into()));
        }
        let text = std::str::from_utf8(&line[..line.len() - 1])
            .map_err(|_| Error::MalformedHeader("y4m header is not ASCII".into()))?;
        let mut tokens = text.split(' ');
        if tokens.next() != Some("YUV4MPEG2") {
            return Err(Error::MalformedHeader("missing YUV4MPEG2 signature".into()));
        }
        let (mut width, mut height, mut colorspace) = (None, None, "420jpeg".to_string());
        for tok in tokens.filter(|t| !t.is_empty()) {
            let (tag, val) = tok.split_at(1);
            match tag {
                "W" => width = val.parse::<usize>().ok(),
                "H" => height = val.parse::<usize>().ok(),
                "C" => colorspace = val.to_string(),
                _ => {}
            }
        }
        let (width, height) = match (width, height) {
            (Some(w), Some(h)) if w > 0 && h > 0 => (w, h),
            _ => return Err(Error::MalformedHeader("y4m header lacks valid W/H".into())),
        };
        let chroma_len = chroma_len(&colorspace, width, height)?;
        Ok(Y4mReader {
            inner,
            width,
            height,
            chroma_len,
            next: 0,
            done: false,
        })
    }

    fn read_frame(&mut self) -> Result<Option<Frame>> {
        let truncated = Error::Truncated {
            last_complete: self.next.checked_sub(1),
        };
        let line = match read_line(&mut self.inner)? {
            None => return Ok(None),
            Some(l) => l,
        };
        if !line.starts_with(b"FRAME") {
            return Err(Error::MalformedHeader(format!(
                "expected FRAME marker before frame {}",
                self.next
            )));
        }
        if line.last() != Some(&b'\n') {
            return Err(truncated);
        }
        let mut luma = vec![0u8; self.width * self.height];
        if read_full(&mut self.inner, &mut luma)? != luma.len() {
            return Err(truncated);
        }
        let mut rest = self.chroma_len as u64;
        while rest > 0 {
            let buf = self.inner.fill_buf()?;
            if buf.is_empty() {
                return Err(truncated);
            }
            let n = buf.len().min(rest as usize);
            self.inner.consume(n);
            rest -= n as u64;
        }
        let frame = Frame::new(self.next, self.width, self.height, luma)?;
        self.next += 1;
        Ok(Some(frame))
    }
}

impl<R: BufRead> Iterator for Y4mReader<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_frame() {
            Ok(Some(f)) => Some(Ok(f)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

impl<R: BufRead> FrameSource for Y4mReader<R> {
    fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Writes grayscale frames as `C mono` YUV4MPEG2.
pub struct Y4mWriter<W: Write> {
    inner: W,
    width: usize,
    height: usize,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut inner: W, width: usize, height: usize, fps: u32) -> Result<Self> {
        writeln!(inner, "YUV4MPEG2 W{width} H{height} F{fps}:1 Ip A1:1 Cmono")?;
        Ok(Y4mWriter {
            inner,
            width,
            height,
        })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<()> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(Error::InvalidParameter(
                "frame size differs from stream".into(),
            ));
        }
        self.inner.write_all(b"FRAME\n")?;
        self.inner.write_all(frame.pixels())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}
