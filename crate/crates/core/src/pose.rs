//! 2D detection records shared by the tracker, simulator and file formats.

use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub position: Point2,
    pub confidence: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Keypoint {
            position: Point2::new(x, y),
            confidence,
        }
    }
}

/// One person's 2D joints seen by one camera at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Camera index within the calibration.
    pub camera: usize,
    pub timestamp: f64,
    /// Position of the detection inside its frame.
    pub index: usize,
    /// Fixed-length joint slots; `None` marks a missed joint.
    pub joints: Vec<Option<Keypoint>>,
}

impl Detection {
    /// The joint if present and at least `min_confidence` confident.
    pub fn joint(&self, k: usize, min_confidence: f64) -> Option<&Keypoint> {
        self.joints[k].as_ref().filter(|kp| kp.confidence >= min_confidence)
    }
}

/// All detections of one camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub camera: usize,
    pub timestamp: f64,
    pub detections: Vec<Detection>,
}

impl Frame {
    pub fn new(camera: usize, timestamp: f64, poses: Vec<Vec<Option<Keypoint>>>) -> Self {
        let detections = poses
            .into_iter()
            .enumerate()
            .map(|(index, joints)| Detection {
                camera,
                timestamp,
                index,
                joints,
            })
            .collect();
        Frame {
            camera,
            timestamp,
            detections,
        }
    }
}
