//! The cross-view tracking loop.
//!
//! Every call to [`Tracker::step`] consumes one camera frame: detections are
//! matched against the 3D targets, matched targets are re-triangulated from
//! each camera's latest view of every joint, leftovers go to the unmatched
//! pool, and the pool is clustered across cameras to start new targets.

mod state;

use thiserror::Error;

pub use state::{JointState, Observation2d, Target};

use crate::affinity::{
    body_affinity_with_rays, detection_rays, epipolar_affinity, estimate_velocity, AffinityError, MotionState,
    CLOCK_EPSILON,
};
use crate::assignment::{filter_matches, hungarian_max, partition_cycle_consistent, AffinityMatrix};
use crate::config::{ConfigError, TrackerConfig};
use crate::geometry::{Calibration, Point3};
use crate::pose::{Detection, Frame};
use crate::reconstruction::{NormalEquations, RowWeighting};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackerError {
    #[error("camera {camera}: frame at {now} arrived after one at {previous}")]
    ChronologyViolation { camera: usize, previous: f64, now: f64 },
    #[error("unknown camera {0}")]
    UnknownCamera(String),
    #[error("detection has {got} joints, the tracker expects {expected}")]
    JointCount { expected: usize, got: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Affinity(#[from] AffinityError),
}

/// A detection tied to a target, either by matching or by initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub camera: usize,
    pub timestamp: f64,
    pub detection: usize,
    pub target: u64,
}

/// Current 3D joints of one target; each present joint carries the time of
/// its last solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPose {
    pub id: u64,
    pub joints: Vec<Option<(Point3, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub camera: usize,
    pub timestamp: f64,
    /// Every live target after the step, in creation order.
    pub targets: Vec<TargetPose>,
    pub associations: Vec<Association>,
    pub created: Vec<u64>,
    pub retired: Vec<u64>,
}

/// Running counters; `staleness_*` accumulate `t − t_i` of every non-newest
/// view entering a triangulation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrackerStats {
    pub steps: u64,
    pub triangulations: u64,
    pub staleness_sum: f64,
    pub staleness_count: u64,
}

impl TrackerStats {
    pub fn mean_staleness(&self) -> f64 {
        if self.staleness_count == 0 {
            0.0
        } else {
            self.staleness_sum / self.staleness_count as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    calib: Calibration,
    cfg: TrackerConfig,
    n_joints: usize,
    targets: Vec<Target>,
    /// Per camera: unmatched detections of its newest frame.
    pool: Vec<Vec<Detection>>,
    last_frame: Vec<Option<f64>>,
    next_id: u64,
    stats: TrackerStats,
}

impl Tracker {
    pub fn new(calib: Calibration, cfg: TrackerConfig, n_joints: usize) -> Result<Self, TrackerError> {
        cfg.validate()?;
        let n = calib.len();
        Ok(Tracker {
            calib,
            cfg,
            n_joints,
            targets: Vec::new(),
            pool: vec![Vec::new(); n],
            last_frame: vec![None; n],
            next_id: 1,
            stats: TrackerStats::default(),
        })
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calib
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn pool(&self, camera: usize) -> &[Detection] {
        &self.pool[camera]
    }

    pub fn stats(&self) -> &TrackerStats {
        &self.stats
    }

    /// Processes one camera frame.
    pub fn step(&mut self, frame: &Frame) -> Result<StepOutput, TrackerError> {
        let (c, t) = (frame.camera, frame.timestamp);
        if c >= self.calib.len() {
            return Err(TrackerError::UnknownCamera(c.to_string()));
        }
        if let Some(det) = frame.detections.iter().find(|d| d.joints.len() != self.n_joints) {
            return Err(TrackerError::JointCount {
                expected: self.n_joints,
                got: det.joints.len(),
            });
        }
        if let Some(prev) = self.last_frame[c] {
            if t < prev - CLOCK_EPSILON {
                return Err(TrackerError::ChronologyViolation {
                    camera: c,
                    previous: prev,
                    now: t,
                });
            }
        }
        self.last_frame[c] = Some(self.last_frame[c].map_or(t, |p| p.max(t)));
        self.stats.steps += 1;
        self.pool[c].clear();

        let mut associations = Vec::new();

        // Cross-view association.
        let cam = self.calib.camera(c);
        let rays: Vec<_> = frame
            .detections
            .iter()
            .map(|d| detection_rays(d, cam, &self.cfg))
            .collect();
        let mut a = AffinityMatrix::new(self.targets.len(), frame.detections.len());
        for (i, target) in self.targets.iter().enumerate() {
            for (j, det) in frame.detections.iter().enumerate() {
                a.set(i, j, body_affinity_with_rays(target, det, &rays[j], &self.cfg)?);
            }
        }
        let matches = filter_matches(&hungarian_max(&a), &a, self.cfg.match_threshold);

        // Target update.
        for &(i, j) in &matches.accepted {
            let det = &frame.detections[j];
            self.update_target(i, det);
            associations.push(Association {
                camera: c,
                timestamp: t,
                detection: det.index,
                target: self.targets[i].id,
            });
        }

        // Target initialization.
        self.pool[c].extend(matches.unmatched_cols.iter().map(|&j| frame.detections[j].clone()));
        let created = self.initialize_targets(t, &mut associations);

        let retired = self.retire_targets(t);
        Ok(StepOutput {
            camera: c,
            timestamp: t,
            targets: self.poses(),
            associations,
            created,
            retired,
        })
    }

    pub fn poses(&self) -> Vec<TargetPose> {
        self.targets
            .iter()
            .map(|target| TargetPose {
                id: target.id,
                joints: target
                    .joints
                    .iter()
                    .map(|j| j.motion.map(|m| (m.position, m.time)))
                    .collect(),
            })
            .collect()
    }

    fn update_target(&mut self, i: usize, det: &Detection) {
        let (c, t) = (det.camera, det.timestamp);
        let cfg = &self.cfg;
        let calib = &self.calib;
        let stats = &mut self.stats;
        let target = &mut self.targets[i];
        target.last_matched = target.last_matched.max(t);
        target.camera_matched[c] = Some(t);
        for (k, joint) in target.joints.iter_mut().enumerate() {
            let Some(kp) = det.joint(k, cfg.min_joint_confidence) else {
                continue;
            };
            joint.views[c] = Some(Observation2d {
                position: kp.position,
                confidence: kp.confidence,
                time: t,
            });
            let weighting = if cfg.weighted_triangulation {
                RowWeighting::Temporal {
                    t_now: t,
                    lambda_t: cfg.lambda_t,
                    use_confidence: cfg.confidence_weighting,
                }
            } else {
                RowWeighting::Plain
            };
            let mut eq = NormalEquations::new(weighting);
            let mut staleness = (0.0, 0u64);
            for (cam_index, view) in joint.views.iter().enumerate() {
                let Some(view) = view else { continue };
                if t - view.time > cfg.retire_after {
                    continue;
                }
                eq.add(calib.camera(cam_index), &view.position, view.time, view.confidence);
                if cam_index != c {
                    staleness.0 += t - view.time;
                    staleness.1 += 1;
                }
            }
            let Ok(position) = eq.solve() else { continue };
            stats.triangulations += 1;
            stats.staleness_sum += staleness.0;
            stats.staleness_count += staleness.1;
            joint.record(position, t, cfg.velocity_window);
        }
    }

    fn initialize_targets(&mut self, now: f64, associations: &mut Vec<Association>) -> Vec<u64> {
        let cameras_in_pool = self.pool.iter().filter(|p| !p.is_empty()).count();
        if cameras_in_pool < self.cfg.min_views_init {
            return Vec::new();
        }
        let items: Vec<Detection> = self.pool.iter().flatten().cloned().collect();
        let n = items.len();
        let mut a = AffinityMatrix::new(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let (di, dj) = (&items[i], &items[j]);
                let score = match self.calib.fundamental(di.camera, dj.camera) {
                    Some(f) if di.camera != dj.camera => {
                        epipolar_affinity(di, dj, f, &self.cfg).unwrap_or(f64::NEG_INFINITY)
                    }
                    _ => f64::NEG_INFINITY,
                };
                a.set(i, j, score);
                a.set(j, i, score);
            }
        }
        let partition = partition_cycle_consistent(&a, self.cfg.max_exact_partition);

        let mut consumed: Vec<(usize, usize)> = Vec::new();
        let mut created = Vec::new();
        for cluster in partition.clusters() {
            if cluster.len() < self.cfg.min_views_init {
                continue;
            }
            let members: Vec<&Detection> = cluster.iter().map(|&i| &items[i]).collect();
            let Some(target) = self.build_target(&members, now) else {
                continue;
            };
            for d in &members {
                associations.push(Association {
                    camera: d.camera,
                    timestamp: d.timestamp,
                    detection: d.index,
                    target: target.id,
                });
                consumed.push((d.camera, d.index));
            }
            created.push(target.id);
            self.targets.push(target);
        }
        for pool in self.pool.iter_mut() {
            pool.retain(|d| !consumed.contains(&(d.camera, d.index)));
        }
        created
    }

    /// A new target from clustered pool detections, or `None` if too few
    /// joints triangulate.
    fn build_target(&mut self, members: &[&Detection], now: f64) -> Option<Target> {
        let mut target = Target::new(self.next_id, self.n_joints, self.calib.len(), now);
        let mut solved = 0;
        for k in 0..self.n_joints {
            let mut eq = NormalEquations::new(RowWeighting::Plain);
            let mut newest = f64::NEG_INFINITY;
            for d in members {
                if let Some(kp) = d.joint(k, self.cfg.min_joint_confidence) {
                    eq.add(self.calib.camera(d.camera), &kp.position, d.timestamp, kp.confidence);
                    newest = newest.max(d.timestamp);
                    target.joints[k].views[d.camera] = Some(Observation2d {
                        position: kp.position,
                        confidence: kp.confidence,
                        time: d.timestamp,
                    });
                }
            }
            if let Ok(position) = eq.solve() {
                target.joints[k].record(position, newest, self.cfg.velocity_window);
                solved += 1;
            }
        }
        if solved < self.cfg.min_shared_joints.max(1) {
            return None;
        }
        for d in members {
            target.camera_matched[d.camera] = Some(d.timestamp);
        }
        self.next_id += 1;
        Some(target)
    }

    /// Drops targets unmatched for longer than `retire_after`.
    pub fn retire_targets(&mut self, now: f64) -> Vec<u64> {
        let limit = self.cfg.retire_after;
        let mut retired = Vec::new();
        self.targets.retain(|target| {
            let keep = now - target.last_matched <= limit;
            if !keep {
                retired.push(target.id);
            }
            keep
        });
        retired
    }
}

impl JointState {
    /// Stores a freshly solved position and refits the velocity.
    fn record(&mut self, position: Point3, time: f64, window: usize) {
        if self.history.len() == window {
            self.history.pop_front();
        }
        self.history.push_back((time, position));
        let (velocity, valid) = estimate_velocity(self.history.make_contiguous(), window);
        self.motion = Some(MotionState {
            position,
            time,
            velocity: valid.then_some(velocity),
        });
    }
}
