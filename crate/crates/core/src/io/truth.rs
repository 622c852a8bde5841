use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{read_records, write_record, IoError, Time};
use crate::geometry::{Calibration, Point3};
use crate::simulator::{time_key, DetectionLabel, GroundTruth, TruthFrame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthPerson {
    pub id: usize,
    pub joints: Vec<[f64; 3]>,
}

/// A ground-truth file mixes true poses per instant with the identity of
/// every emitted detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthRecord {
    Pose {
        timestamp: Time,
        people: Vec<TruthPerson>,
    },
    Label {
        camera_id: String,
        timestamp: Time,
        detection: usize,
        person: usize,
    },
}

/// Writes all pose records, then all labels.
pub fn write_truth(mut writer: impl Write, truth: &GroundTruth, calib: &Calibration) -> Result<(), IoError> {
    for f in &truth.frames {
        let rec = TruthRecord::Pose {
            timestamp: Time(f.timestamp),
            people: f
                .people
                .iter()
                .map(|(id, joints)| TruthPerson {
                    id: *id,
                    joints: joints.iter().map(|x| [x.x, x.y, x.z]).collect(),
                })
                .collect(),
        };
        write_record(&mut writer, &rec)?;
    }
    for l in &truth.labels {
        let rec = TruthRecord::Label {
            camera_id: calib.camera(l.camera).id().to_string(),
            timestamp: Time(l.timestamp_us as f64 / 1e6),
            detection: l.detection,
            person: l.person,
        };
        write_record(&mut writer, &rec)?;
    }
    Ok(())
}

pub fn read_truth(reader: impl BufRead, calib: &Calibration) -> Result<GroundTruth, IoError> {
    let mut truth = GroundTruth::default();
    for rec in read_records::<TruthRecord>(reader) {
        match rec? {
            (_, TruthRecord::Pose { timestamp, people }) => truth.frames.push(TruthFrame {
                timestamp: timestamp.0,
                people: people
                    .into_iter()
                    .map(|p| (p.id, p.joints.into_iter().map(Point3::from).collect()))
                    .collect(),
            }),
            (
                line,
                TruthRecord::Label {
                    camera_id,
                    timestamp,
                    detection,
                    person,
                },
            ) => {
                let camera = calib
                    .index_of(&camera_id)
                    .ok_or(IoError::UnknownCamera { line, id: camera_id })?;
                truth.labels.push(DetectionLabel {
                    camera,
                    timestamp_us: time_key(timestamp.0),
                    detection,
                    person,
                });
            }
        }
    }
    truth.frames.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(truth)
}
