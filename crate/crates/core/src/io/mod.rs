//! Line-delimited JSON wire formats: calibration, detection frames, tracker
//! output and ground truth.
//!
//! Every record is one JSON object per line; blank lines are skipped.
//! Timestamps are written as decimal numbers with at least six fractional
//! digits and read from either numbers or strings. Every format survives
//! write → read → write byte for byte.

mod calibration;
mod stream;
mod truth;

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use calibration::{read_calibration, write_calibration, CameraRecord};
pub use stream::{
    read_frames, read_tracks, write_frames, AssociationRecord, DetectionRecord, FrameRecord, TargetRecord, TrackRecord,
};
pub use truth::{read_truth, write_truth, TruthPerson, TruthRecord};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate camera id `{id}`")]
    DuplicateCamera { line: usize, id: String },
    #[error("line {line}: projection matrix of camera `{id}` is rank deficient")]
    RankDeficientP { line: usize, id: String },
    #[error("line {line}: unknown camera `{id}`")]
    UnknownCamera { line: usize, id: String },
}

impl IoError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Seconds on the wire.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Time(pub f64);

/// Six fractional digits when they represent `t` exactly, the shortest
/// exact decimal otherwise.
pub fn format_time(t: f64) -> String {
    let fixed = format!("{t:.6}");
    if fixed.parse::<f64>() == Ok(t) {
        fixed
    } else {
        format!("{t}")
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite timestamp"));
        }
        let raw = serde_json::value::RawValue::from_string(format_time(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        let t = match Repr::deserialize(d)? {
            Repr::Number(t) => t,
            Repr::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("invalid timestamp `{s}`")))?,
        };
        if t.is_finite() {
            Ok(Time(t))
        } else {
            Err(serde::de::Error::custom("non-finite timestamp"))
        }
    }
}

/// Parses every non-blank line of `reader` as a `T`, tagged with its
/// 1-based line number.
pub fn read_records<T: DeserializeOwned>(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, T), IoError>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(IoError::Io(e))),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(
            serde_json::from_str(&line)
                .map(|r| (i + 1, r))
                .map_err(|e| IoError::parse(i + 1, e.to_string())),
        )
    })
}

pub fn write_record<T: Serialize>(mut writer: impl Write, record: &T) -> Result<(), IoError> {
    serde_json::to_writer(&mut writer, record).map_err(|e| IoError::Io(e.into()))?;
    writer.write_all(b"\n")?;
    Ok(())
}
