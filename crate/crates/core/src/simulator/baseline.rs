//! Stateless per-frame reconstruction: match every camera pair by epipolar
//! agreement, partition, triangulate each cluster.

use crate::affinity::epipolar_affinity;
use crate::assignment::{partition_cycle_consistent, AffinityMatrix};
use crate::config::TrackerConfig;
use crate::geometry::{Calibration, Point3};
use crate::pose::{Detection, Frame};
use crate::reconstruction::{NormalEquations, RowWeighting};

/// One reconstructed person with the `(camera, detection index)` pairs it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePose {
    pub joints: Vec<Option<Point3>>,
    pub members: Vec<(usize, usize)>,
}

/// Splits a time-ordered stream into runs whose timestamps lie within
/// `tolerance` of the run's first frame.
pub fn group_synchronized(frames: &[Frame], tolerance: f64) -> Vec<&[Frame]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=frames.len() {
        if i == frames.len() || frames[i].timestamp - frames[start].timestamp > tolerance {
            groups.push(&frames[start..i]);
            start = i;
        }
    }
    groups
}

/// Reconstructs every person seen in one synchronized set of frames.
pub fn baseline_per_frame(frames: &[Frame], calib: &Calibration, cfg: &TrackerConfig) -> Vec<BaselinePose> {
    let items: Vec<&Detection> = frames.iter().flat_map(|f| f.detections.iter()).collect();
    let n = items.len();
    let mut a = AffinityMatrix::new(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let (di, dj) = (items[i], items[j]);
            let score = match calib.fundamental(di.camera, dj.camera) {
                Some(f) if di.camera != dj.camera => epipolar_affinity(di, dj, f, cfg).unwrap_or(f64::NEG_INFINITY),
                _ => f64::NEG_INFINITY,
            };
            a.set(i, j, score);
            a.set(j, i, score);
        }
    }
    let n_joints = items.first().map_or(0, |d| d.joints.len());
    partition_cycle_consistent(&a, cfg.max_exact_partition)
        .clusters()
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|cluster| {
            let joints = (0..n_joints)
                .map(|k| {
                    let mut eq = NormalEquations::new(RowWeighting::Plain);
                    for &i in &cluster {
                        if let Some(kp) = items[i].joint(k, cfg.min_joint_confidence) {
                            eq.add(
                                calib.camera(items[i].camera),
                                &kp.position,
                                items[i].timestamp,
                                kp.confidence,
                            );
                        }
                    }
                    eq.solve().ok()
                })
                .collect();
            BaselinePose {
                joints,
                members: cluster.iter().map(|&i| (items[i].camera, items[i].index)).collect(),
            }
        })
        .collect()
}
