use std::collections::VecDeque;

use crate::affinity::MotionState;
use crate::geometry::{Point2, Point3};

/// Last matched 2D position of a joint in one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation2d {
    pub position: Point2,
    pub confidence: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    /// `None` until the joint has been triangulated from two views.
    pub motion: Option<MotionState>,
    /// Indexed by camera.
    pub views: Vec<Option<Observation2d>>,
    /// Recent solved positions, oldest first.
    pub history: VecDeque<(f64, Point3)>,
}

/// One tracked person.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub id: u64,
    pub joints: Vec<JointState>,
    pub created: f64,
    pub last_matched: f64,
    pub camera_matched: Vec<Option<f64>>,
}

impl Target {
    pub fn new(id: u64, n_joints: usize, n_cameras: usize, time: f64) -> Self {
        Target {
            id,
            joints: (0..n_joints)
                .map(|_| JointState {
                    motion: None,
                    views: vec![None; n_cameras],
                    history: VecDeque::new(),
                })
                .collect(),
            created: time,
            last_matched: time,
            camera_matched: vec![None; n_cameras],
        }
    }
}
