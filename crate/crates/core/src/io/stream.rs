use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{read_records, write_record, IoError, Time};
use crate::evaluation::EstimateFrame;
use crate::geometry::{Calibration, Point3};
use crate::pose::{Frame, Keypoint};
use crate::tracker::{Association, StepOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    /// `[x, y, confidence]` per joint, `null` when missed.
    pub joints: Vec<Option<[f64; 3]>>,
}

/// All detections of one camera frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub camera_id: String,
    pub timestamp: Time,
    pub detections: Vec<DetectionRecord>,
}

impl FrameRecord {
    pub fn from_frame(frame: &Frame, calib: &Calibration) -> Self {
        FrameRecord {
            camera_id: calib.camera(frame.camera).id().to_string(),
            timestamp: Time(frame.timestamp),
            detections: frame
                .detections
                .iter()
                .map(|d| DetectionRecord {
                    joints: d
                        .joints
                        .iter()
                        .map(|j| j.map(|kp| [kp.position.x, kp.position.y, kp.confidence]))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Resolves the camera and checks every detection has `n_joints`
    /// finite joints with confidences in `[0, 1]`.
    pub fn to_frame(&self, calib: &Calibration, n_joints: usize, line: usize) -> Result<Frame, IoError> {
        let camera = calib.index_of(&self.camera_id).ok_or_else(|| IoError::UnknownCamera {
            line,
            id: self.camera_id.clone(),
        })?;
        let mut poses = Vec::with_capacity(self.detections.len());
        for (i, d) in self.detections.iter().enumerate() {
            if d.joints.len() != n_joints {
                return Err(IoError::parse(
                    line,
                    format!("detection {i}: expected {n_joints} joints, got {}", d.joints.len()),
                ));
            }
            let mut joints = Vec::with_capacity(n_joints);
            for (k, j) in d.joints.iter().enumerate() {
                joints.push(match *j {
                    None => None,
                    Some([x, y, c]) => {
                        if !(x.is_finite() && y.is_finite() && (0.0..=1.0).contains(&c)) {
                            return Err(IoError::parse(
                                line,
                                format!("detection {i} joint {k}: invalid keypoint"),
                            ));
                        }
                        Some(Keypoint::new(x, y, c))
                    }
                });
            }
            poses.push(joints);
        }
        Ok(Frame::new(camera, self.timestamp.0, poses))
    }
}

pub fn read_frames(reader: impl BufRead, calib: &Calibration, n_joints: usize) -> Result<Vec<Frame>, IoError> {
    read_records::<FrameRecord>(reader)
        .map(|r| r.and_then(|(line, rec)| rec.to_frame(calib, n_joints, line)))
        .collect()
}

pub fn write_frames(mut writer: impl Write, frames: &[Frame], calib: &Calibration) -> Result<(), IoError> {
    for f in frames {
        write_record(&mut writer, &FrameRecord::from_frame(f, calib))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetRecord {
    pub id: u64,
    /// `[X, Y, Z]` in meters per joint, `null` when unknown.
    pub joints: Vec<Option<[f64; 3]>>,
    /// Time of each joint's last solve.
    pub updated: Vec<Option<Time>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssociationRecord {
    /// Index of the detection within the input frame.
    pub detection: usize,
    pub target: u64,
}

/// Tracker state after one input frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackRecord {
    pub timestamp: Time,
    pub camera_id: String,
    pub targets: Vec<TargetRecord>,
    pub associations: Vec<AssociationRecord>,
}

impl TrackRecord {
    pub fn from_output(out: &StepOutput, calib: &Calibration) -> Self {
        TrackRecord {
            timestamp: Time(out.timestamp),
            camera_id: calib.camera(out.camera).id().to_string(),
            targets: out
                .targets
                .iter()
                .map(|t| TargetRecord {
                    id: t.id,
                    joints: t.joints.iter().map(|j| j.map(|(x, _)| [x.x, x.y, x.z])).collect(),
                    updated: t.joints.iter().map(|j| j.map(|(_, at)| Time(at))).collect(),
                })
                .collect(),
            associations: out
                .associations
                .iter()
                .map(|a| AssociationRecord {
                    detection: a.detection,
                    target: a.target,
                })
                .collect(),
        }
    }

    pub fn to_estimate(&self, camera: usize) -> EstimateFrame {
        EstimateFrame {
            timestamp: self.timestamp.0,
            camera: Some(camera),
            poses: self
                .targets
                .iter()
                .map(|t| (t.id, t.joints.iter().map(|j| j.map(Point3::from)).collect()))
                .collect(),
        }
    }

    pub fn to_associations(&self, camera: usize) -> Vec<Association> {
        self.associations
            .iter()
            .map(|a| Association {
                camera,
                timestamp: self.timestamp.0,
                detection: a.detection,
                target: a.target,
            })
            .collect()
    }
}

/// Reads a track stream into per-frame estimates and the flattened
/// detection-to-target assignments.
pub fn read_tracks(
    reader: impl BufRead,
    calib: &Calibration,
) -> Result<(Vec<EstimateFrame>, Vec<Association>), IoError> {
    let mut estimates = Vec::new();
    let mut associations = Vec::new();
    for rec in read_records::<TrackRecord>(reader) {
        let (line, rec) = rec?;
        let camera = calib.index_of(&rec.camera_id).ok_or_else(|| IoError::UnknownCamera {
            line,
            id: rec.camera_id.clone(),
        })?;
        estimates.push(rec.to_estimate(camera));
        associations.extend(rec.to_associations(camera));
    }
    Ok((estimates, associations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{generate, ScenarioSpec};
    use crate::skeleton::JOINT_COUNT;
    use crate::tracker::Tracker;

    fn noisy_scene() -> crate::simulator::Scenario {
        generate(&ScenarioSpec {
            duration: 1.0,
            pixel_noise: 1.5,
            dropout: 0.2,
            jitter: 0.002,
            ..ScenarioSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn frames_round_trip_byte_identical() {
        let s = noisy_scene();
        let mut first = Vec::new();
        write_frames(&mut first, &s.frames, &s.calibration).unwrap();
        let back = read_frames(first.as_slice(), &s.calibration, JOINT_COUNT).unwrap();
        assert_eq!(back, s.frames);
        let mut second = Vec::new();
        write_frames(&mut second, &back, &s.calibration).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn tracks_round_trip_byte_identical() {
        let s = noisy_scene();
        let mut tracker = Tracker::new(s.calibration.clone(), crate::simulator::scene_config(), JOINT_COUNT).unwrap();
        let mut first = Vec::new();
        for f in &s.frames {
            write_record(
                &mut first,
                &TrackRecord::from_output(&tracker.step(f).unwrap(), &s.calibration),
            )
            .unwrap();
        }
        let mut second = Vec::new();
        for r in read_records::<TrackRecord>(first.as_slice()) {
            write_record(&mut second, &r.unwrap().1).unwrap();
        }
        assert_eq!(first, second);
    }

    #[test]
    fn frame_validation() {
        let s = noisy_scene();
        let ok = r#"{"camera_id":"cam1","timestamp":"0.5","detections":[{"joints":[[1,2,0.5],null]}]}"#;
        let f = read_frames(ok.as_bytes(), &s.calibration, 2).unwrap();
        assert_eq!((f[0].camera, f[0].timestamp), (1, 0.5));
        assert!(f[0].detections[0].joints[1].is_none());
        assert!(matches!(
            read_frames(ok.as_bytes(), &s.calibration, 3),
            Err(IoError::Parse { line: 1, .. })
        ));
        let unknown = ok.replace("cam1", "cam9");
        assert!(matches!(
            read_frames(unknown.as_bytes(), &s.calibration, 2),
            Err(IoError::UnknownCamera { line: 1, .. })
        ));
        let bad_conf = ok.replace("0.5]", "1.5]");
        assert!(read_frames(bad_conf.as_bytes(), &s.calibration, 2).is_err());
    }
}
