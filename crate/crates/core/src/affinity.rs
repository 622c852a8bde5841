//! Geometric affinities between tracked targets and new detections, and the
//! epipolar affinity used to cluster unmatched detections across views.
//!
//! Scores are positive when the pair is likely the same person and negative
//! otherwise. `f64::NEG_INFINITY` marks an impossible pairing.

use nalgebra::Vector3;
use thiserror::Error;

use crate::config::TrackerConfig;
use crate::geometry::{epipolar_line, point_to_ray_distance, CameraView, FundamentalMatrix, Point2, Point3, Ray3};
use crate::pose::Detection;
use crate::tracker::Target;

/// Tolerated same-camera timestamp regression, in seconds.
pub const CLOCK_EPSILON: f64 = 1e-3;

/// Minimum time span of the samples in a velocity fit.
const MIN_VELOCITY_SPAN: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AffinityError {
    #[error("observation at {now} precedes the previous one at {previous}")]
    ChronologyViolation { previous: f64, now: f64 },
    #[error("joint has never been triangulated")]
    NoState,
    #[error("epipolar affinity needs detections from two different cameras")]
    SameCamera,
}

/// Last solved 3D position of a joint with its velocity, if one could be fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub position: Point3,
    pub time: f64,
    pub velocity: Option<Vector3<f64>>,
}

impl MotionState {
    /// Linear-motion prediction at `time`.
    pub fn predict(&self, time: f64) -> Point3 {
        match self.velocity {
            Some(v) => self.position + v * (time - self.time),
            None => self.position,
        }
    }
}

/// In-camera displacement affinity between the last matched joint
/// (`prev` at `prev_time`) and a newly detected joint.
pub fn affinity_2d(
    prev: &Point2,
    prev_time: f64,
    det: &Point2,
    time: f64,
    cfg: &TrackerConfig,
) -> Result<f64, AffinityError> {
    let dt = time - prev_time;
    if dt < -CLOCK_EPSILON {
        return Err(AffinityError::ChronologyViolation {
            previous: prev_time,
            now: time,
        });
    }
    let dist = (det - prev).norm();
    if dt <= 0.0 {
        return Ok(if dist == 0.0 { cfg.w_2d } else { f64::NEG_INFINITY });
    }
    Ok(cfg.w_2d * (1.0 - dist / (cfg.alpha_2d * dt)) * (-cfg.lambda_a * dt).exp())
}

/// 3D affinity of a joint state against the back-projected detection ray.
///
/// A detection older than the state still predicts along the velocity, but
/// its time penalty is clamped at zero.
pub fn affinity_3d_ray(state: &MotionState, ray: &Ray3, time: f64, cfg: &TrackerConfig) -> f64 {
    let predicted = state.predict(time);
    let dt = (time - state.time).max(0.0);
    cfg.w_3d * (1.0 - point_to_ray_distance(&predicted, ray) / cfg.alpha_3d) * (-cfg.lambda_a * dt).exp()
}

pub fn affinity_3d(
    state: Option<&MotionState>,
    det: &Point2,
    time: f64,
    cam: &CameraView,
    cfg: &TrackerConfig,
) -> Result<f64, AffinityError> {
    let state = state.ok_or(AffinityError::NoState)?;
    Ok(affinity_3d_ray(state, &cam.back_project(det), time, cfg))
}

/// Least-squares slope of each coordinate against time over the newest
/// `window` samples. Returns `(0, false)` when fewer than two samples exist
/// or they span less than a millisecond.
pub fn estimate_velocity(history: &[(f64, Point3)], window: usize) -> (Vector3<f64>, bool) {
    let recent = &history[history.len().saturating_sub(window)..];
    if recent.len() < 2 {
        return (Vector3::zeros(), false);
    }
    let span = recent[recent.len() - 1].0 - recent[0].0;
    if span < MIN_VELOCITY_SPAN {
        return (Vector3::zeros(), false);
    }
    let n = recent.len() as f64;
    let mean_t = recent.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_x = recent.iter().map(|(_, x)| x.coords).sum::<Vector3<f64>>() / n;
    let (mut sxx, mut sxy) = (0.0, Vector3::zeros());
    for (t, x) in recent {
        let dt = t - mean_t;
        sxx += dt * dt;
        sxy += (x.coords - mean_x) * dt;
    }
    (sxy / sxx, true)
}

/// Back-projected ray per joint of a detection; `None` for missing or
/// low-confidence joints.
pub fn detection_rays(det: &Detection, cam: &CameraView, cfg: &TrackerConfig) -> Vec<Option<Ray3>> {
    (0..det.joints.len())
        .map(|k| {
            det.joint(k, cfg.min_joint_confidence)
                .map(|kp| cam.back_project(&kp.position))
        })
        .collect()
}

/// Body affinity with precomputed detection rays (see [`detection_rays`]).
///
/// Sums, over joints, the 2D term when the target has a previous observation
/// of that joint in the detection's camera and the 3D term when the joint
/// has a 3D state. Absent terms contribute zero.
pub fn body_affinity_with_rays(
    target: &Target,
    det: &Detection,
    rays: &[Option<Ray3>],
    cfg: &TrackerConfig,
) -> Result<f64, AffinityError> {
    let mut total = 0.0;
    for (k, joint) in target.joints.iter().enumerate() {
        let Some(kp) = det.joint(k, cfg.min_joint_confidence) else {
            continue;
        };
        if cfg.w_2d > 0.0 {
            if let Some(prev) = &joint.views[det.camera] {
                total += affinity_2d(&prev.position, prev.time, &kp.position, det.timestamp, cfg)?;
            }
        }
        if cfg.w_3d > 0.0 {
            if let (Some(state), Some(ray)) = (&joint.motion, &rays[k]) {
                total += affinity_3d_ray(state, ray, det.timestamp, cfg);
            }
        }
    }
    Ok(total)
}

pub fn body_affinity(
    target: &Target,
    det: &Detection,
    cam: &CameraView,
    cfg: &TrackerConfig,
) -> Result<f64, AffinityError> {
    body_affinity_with_rays(target, det, &detection_rays(det, cam, cfg), cfg)
}

/// Mean epipolar agreement over the joints visible in both detections.
///
/// `f` maps points of `d1`'s camera to lines in `d2`'s camera. Returns
/// `NEG_INFINITY` when fewer than `min_shared_joints` joints are shared.
pub fn epipolar_affinity(
    d1: &Detection,
    d2: &Detection,
    f: &FundamentalMatrix,
    cfg: &TrackerConfig,
) -> Result<f64, AffinityError> {
    if d1.camera == d2.camera {
        return Err(AffinityError::SameCamera);
    }
    let ft = f.transpose();
    let (mut sum, mut shared) = (0.0, 0usize);
    for k in 0..d1.joints.len().min(d2.joints.len()) {
        let (Some(a), Some(b)) = (
            d1.joint(k, cfg.min_joint_confidence),
            d2.joint(k, cfg.min_joint_confidence),
        ) else {
            continue;
        };
        // A point sitting on the epipole constrains nothing: zero residual.
        let in_second = epipolar_line(f, &a.position).map_or(0.0, |l| l.distance(&b.position));
        let in_first = epipolar_line(&ft, &b.position).map_or(0.0, |l| l.distance(&a.position));
        sum += 1.0 - (in_first + in_second) / (2.0 * cfg.alpha_2d_epi);
        shared += 1;
    }
    if shared < cfg.min_shared_joints.max(1) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(sum / shared as f64)
}
