//! Line-delimited JSON records: ground truth, events, plate readings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::event::ExtractionEvent;

/// Literal stored in `text` when no plate could be read.
pub const FAILED: &str = "FAILED";

/// Outcome of steps (d)-(f) for one extraction event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateReading {
    pub frame: u64,
    pub x0: u32,
    pub x1: u32,
    /// Chosen plate box `[x0, y0, x1, y1]`, if any.
    #[serde(rename = "box")]
    pub bbox: Option<[u32; 4]>,
    #[serde(with = "failed_text")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl PlateReading {
    pub fn failed(
        event: &ExtractionEvent,
        bbox: Option<&Detection>,
        reason: impl Into<String>,
    ) -> Self {
        PlateReading {
            frame: event.frame,
            x0: event.x0,
            x1: event.x1,
            bbox: bbox.map(|d| [d.x0, d.y0, d.x1, d.y1]),
            text: None,
            reason: Some(reason.into()),
        }
    }

    pub fn read(event: &ExtractionEvent, det: &Detection, text: String) -> Self {
        PlateReading {
            frame: event.frame,
            x0: event.x0,
            x1: event.x1,
            bbox: Some([det.x0, det.y0, det.x1, det.y1]),
            text: Some(text),
            reason: None,
        }
    }
}

mod failed_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::FAILED;

    pub fn serialize<S: Serializer>(v: &Option<String>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.as_deref().unwrap_or(FAILED))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
        let s = String::deserialize(d)?;
        Ok((s != FAILED).then_some(s))
    }
}

pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one record per non-blank line. Errors carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(r: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Record {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn save_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write_jsonl(BufWriter::new(File::create(path)?), items)
}

pub fn load_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_jsonl(BufReader::new(File::open(path)?))
}
