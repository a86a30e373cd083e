//! External detector process speaking a line protocol over stdio.
//!
//! Request, engine to plugin:
//!
//! ```text
//! DETECT <width> <height>\n
//! <width*height raw grayscale bytes>
//! ```
//!
//! Reply, one detection per line, then an empty line:
//!
//! ```text
//! <x0> <y0> <x1> <y1> <confidence> [text]\n
//! ...
//! \n
//! ```
//!
//! Requests are serialized: one is written only after the previous reply
//! has been read in full.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crate::detect::{Detection, PlateDetector};
use crate::error::{Error, Result};
use crate::frame::Frame;

/// Environment variable naming the plugin executable.
pub const PLUGIN_ENV: &str = "LINESCAN_PLUGIN";

/// Bytes of a `DETECT` request for `frame`.
pub fn encode_request(frame: &Frame) -> Vec<u8> {
    let mut out = format!("DETECT {} {}\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.pixels());
    out
}

/// Parses one reply line against a `width x height` frame.
pub fn parse_reply_line(line: &str, width: usize, height: usize) -> Result<Detection> {
    let bad = |why: &str| Error::Plugin(format!("malformed reply `{line}`: {why}"));
    let fields: Vec<&str> = line.split_whitespace().collect();
    if !(5..=6).contains(&fields.len()) {
        return Err(bad("expected `x0 y0 x1 y1 confidence [text]`"));
    }
    let coord = |s: &str| {
        s.parse::<u32>()
            .map_err(|_| bad("coordinate is not an unsigned integer"))
    };
    let (x0, y0, x1, y1) = (
        coord(fields[0])?,
        coord(fields[1])?,
        coord(fields[2])?,
        coord(fields[3])?,
    );
    let confidence: f32 = fields[4]
        .parse()
        .map_err(|_| bad("confidence is not a number"))?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(bad("confidence outside [0,1]"));
    }
    let det = Detection {
        x0,
        y0,
        x1,
        y1,
        confidence,
        text: fields.get(5).map(|s| s.to_string()),
    };
    if !det.fits(width, height) {
        return Err(bad("box empty or outside the frame"));
    }
    Ok(det)
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    broken: Option<String>,
}

/// A running plugin. Calls from several threads queue on an internal lock.
pub struct PluginDetector {
    proc: Mutex<Process>,
    timeout: Duration,
}

impl PluginDetector {
    pub fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Plugin(format!("cannot start `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let end = line.is_err();
                if tx.send(line).is_err() || end {
                    break;
                }
            }
        });
        Ok(PluginDetector {
            proc: Mutex::new(Process {
                child,
                stdin,
                lines: rx,
                broken: None,
            }),
            timeout,
        })
    }

    fn exchange(p: &mut Process, frame: &Frame, timeout: Duration) -> Result<Vec<Detection>> {
        if let Some(why) = &p.broken {
            return Err(Error::Plugin(format!("plugin unavailable: {why}")));
        }
        if let Err(e) = p
            .stdin
            .write_all(&encode_request(frame))
            .and_then(|_| p.stdin.flush())
        {
            p.broken = Some(format!("write failed: {e}"));
            return Err(Error::Plugin(format!("write failed: {e}")));
        }
        let deadline = Instant::now() + timeout;
        let mut dets = Vec::new();
        let mut first_error = None;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match p.lines.recv_timeout(left) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => {
                    p.broken = Some(format!("read failed: {e}"));
                    return Err(Error::Plugin(format!("read failed: {e}")));
                }
                Err(RecvTimeoutError::Timeout) => {
                    // a late reply would be attributed to the next request
                    let _ = p.child.kill();
                    p.broken = Some("timed out".into());
                    return Err(Error::Plugin(format!("no reply within {timeout:?}")));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    p.broken = Some("exited".into());
                    return Err(Error::Plugin("plugin closed its output".into()));
                }
            };
            if line.trim().is_empty() {
                break;
            }
            match parse_reply_line(&line, frame.width(), frame.height()) {
                Ok(d) => dets.push(d),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(dets),
        }
    }
}

impl PlateDetector for PluginDetector {
    fn detect(&self, frame: &Frame) -> Result<Vec<Detection>> {
        let mut p = self.proc.lock().unwrap_or_else(|e| e.into_inner());
        Self::exchange(&mut p, frame, self.timeout)
    }
}

impl Drop for PluginDetector {
    fn drop(&mut self) {
        let p = self.proc.get_mut().unwrap_or_else(|e| e.into_inner());
        let _ = p.child.kill();
        let _ = p.child.wait();
    }
}
