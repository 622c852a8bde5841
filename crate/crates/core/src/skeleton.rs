//! The 14-joint body model shared by the simulator and the PCP metric.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geometry::Point3;

pub const JOINT_COUNT: usize = 14;

pub const HEAD: usize = 0;
pub const NECK: usize = 1;
pub const L_SHOULDER: usize = 2;
pub const R_SHOULDER: usize = 3;
pub const L_ELBOW: usize = 4;
pub const R_ELBOW: usize = 5;
pub const L_WRIST: usize = 6;
pub const R_WRIST: usize = 7;
pub const L_HIP: usize = 8;
pub const R_HIP: usize = 9;
pub const L_KNEE: usize = 10;
pub const R_KNEE: usize = 11;
pub const L_ANKLE: usize = 12;
pub const R_ANKLE: usize = 13;

pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "head",
    "neck",
    "l_shoulder",
    "r_shoulder",
    "l_elbow",
    "r_elbow",
    "l_wrist",
    "r_wrist",
    "l_hip",
    "r_hip",
    "l_knee",
    "r_knee",
    "l_ankle",
    "r_ankle",
];

/// Rigid segments between joints; their lengths never change.
pub const BONES: [(usize, usize); 11] = [
    (HEAD, NECK),
    (NECK, L_SHOULDER),
    (NECK, R_SHOULDER),
    (L_SHOULDER, L_ELBOW),
    (R_SHOULDER, R_ELBOW),
    (L_ELBOW, L_WRIST),
    (R_ELBOW, R_WRIST),
    (L_HIP, L_KNEE),
    (R_HIP, R_KNEE),
    (L_KNEE, L_ANKLE),
    (R_KNEE, R_ANKLE),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartCategory {
    Head,
    Torso,
    UpperArm,
    LowerArm,
    UpperLeg,
    LowerLeg,
}

impl PartCategory {
    pub const ALL: [PartCategory; 6] = [
        PartCategory::Head,
        PartCategory::Torso,
        PartCategory::UpperArm,
        PartCategory::LowerArm,
        PartCategory::UpperLeg,
        PartCategory::LowerLeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartCategory::Head => "head",
            PartCategory::Torso => "torso",
            PartCategory::UpperArm => "upper_arm",
            PartCategory::LowerArm => "lower_arm",
            PartCategory::UpperLeg => "upper_leg",
            PartCategory::LowerLeg => "lower_leg",
        }
    }
}

/// A part endpoint: a joint, or the midpoint of the two hips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Joint(usize),
    MidHip,
}

impl Endpoint {
    pub fn resolve(self, pose: &[Option<Point3>]) -> Option<Point3> {
        match self {
            Endpoint::Joint(k) => pose[k],
            Endpoint::MidHip => Some(pose[L_HIP]?.coords.lerp(&pose[R_HIP]?.coords, 0.5).into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Part {
    pub name: &'static str,
    pub category: PartCategory,
    pub ends: (Endpoint, Endpoint),
}

const fn part(name: &'static str, category: PartCategory, a: usize, b: usize) -> Part {
    Part {
        name,
        category,
        ends: (Endpoint::Joint(a), Endpoint::Joint(b)),
    }
}

/// The ten parts scored by PCP.
pub const PARTS: [Part; 10] = [
    part("head", PartCategory::Head, HEAD, NECK),
    Part {
        name: "torso",
        category: PartCategory::Torso,
        ends: (Endpoint::Joint(NECK), Endpoint::MidHip),
    },
    part("l_upper_arm", PartCategory::UpperArm, L_SHOULDER, L_ELBOW),
    part("r_upper_arm", PartCategory::UpperArm, R_SHOULDER, R_ELBOW),
    part("l_lower_arm", PartCategory::LowerArm, L_ELBOW, L_WRIST),
    part("r_lower_arm", PartCategory::LowerArm, R_ELBOW, R_WRIST),
    part("l_upper_leg", PartCategory::UpperLeg, L_HIP, L_KNEE),
    part("r_upper_leg", PartCategory::UpperLeg, R_HIP, R_KNEE),
    part("l_lower_leg", PartCategory::LowerLeg, L_KNEE, L_ANKLE),
    part("r_lower_leg", PartCategory::LowerLeg, R_KNEE, R_ANKLE),
];

/// Segment lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyDimensions {
    pub hip_height: f64,
    pub hip_width: f64,
    pub torso: f64,
    pub head: f64,
    pub shoulder_width: f64,
    pub upper_arm: f64,
    pub lower_arm: f64,
    pub upper_leg: f64,
    pub lower_leg: f64,
}

impl Default for BodyDimensions {
    fn default() -> Self {
        BodyDimensions {
            hip_height: 0.95,
            hip_width: 0.26,
            torso: 0.55,
            head: 0.25,
            shoulder_width: 0.38,
            upper_arm: 0.30,
            lower_arm: 0.27,
            upper_leg: 0.45,
            lower_leg: 0.45,
        }
    }
}

impl BodyDimensions {
    /// Uniformly scaled copy.
    pub fn scaled(&self, s: f64) -> Self {
        BodyDimensions {
            hip_height: self.hip_height * s,
            hip_width: self.hip_width * s,
            torso: self.torso * s,
            head: self.head * s,
            shoulder_width: self.shoulder_width * s,
            upper_arm: self.upper_arm * s,
            lower_arm: self.lower_arm * s,
            upper_leg: self.upper_leg * s,
            lower_leg: self.lower_leg * s,
        }
    }
}

/// Limb angles in radians, measured in the body's sagittal plane from
/// straight down (positive swings forward).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LimbAngles {
    pub l_shoulder: f64,
    pub r_shoulder: f64,
    /// Forward flexion of the forearm relative to the upper arm.
    pub l_elbow: f64,
    pub r_elbow: f64,
    pub l_hip: f64,
    pub r_hip: f64,
    /// Backward flexion of the shin relative to the thigh.
    pub l_knee: f64,
    pub r_knee: f64,
}

/// Forward kinematics: pelvis on the ground-plane point `(x, y)`, facing
/// `heading` (radians from +x, counter-clockwise). World z is up.
pub fn pose(dims: &BodyDimensions, x: f64, y: f64, heading: f64, a: &LimbAngles) -> [Point3; JOINT_COUNT] {
    let up = Vector3::z();
    let fwd = Vector3::new(heading.cos(), heading.sin(), 0.0);
    let left = up.cross(&fwd);
    let limb = |theta: f64| fwd * theta.sin() - up * theta.cos();

    let pelvis = Point3::new(x, y, dims.hip_height);
    let neck = pelvis + up * dims.torso;
    let head = neck + up * dims.head;
    let l_shoulder = neck + left * (dims.shoulder_width / 2.0);
    let r_shoulder = neck - left * (dims.shoulder_width / 2.0);
    let l_elbow = l_shoulder + limb(a.l_shoulder) * dims.upper_arm;
    let r_elbow = r_shoulder + limb(a.r_shoulder) * dims.upper_arm;
    let l_wrist = l_elbow + limb(a.l_shoulder + a.l_elbow) * dims.lower_arm;
    let r_wrist = r_elbow + limb(a.r_shoulder + a.r_elbow) * dims.lower_arm;
    let l_hip = pelvis + left * (dims.hip_width / 2.0);
    let r_hip = pelvis - left * (dims.hip_width / 2.0);
    let l_knee = l_hip + limb(a.l_hip) * dims.upper_leg;
    let r_knee = r_hip + limb(a.r_hip) * dims.upper_leg;
    let l_ankle = l_knee + limb(a.l_hip - a.l_knee) * dims.lower_leg;
    let r_ankle = r_knee + limb(a.r_hip - a.r_knee) * dims.lower_leg;
    [
        head, neck, l_shoulder, r_shoulder, l_elbow, r_elbow, l_wrist, r_wrist, l_hip, r_hip, l_knee, r_knee, l_ankle,
        r_ankle,
    ]
}

/// Mean of the two hips, if both are present.
pub fn root(pose: &[Option<Point3>]) -> Option<Point3> {
    Endpoint::MidHip.resolve(pose)
}
