use std::collections::BTreeMap;

use serde::Serialize;

use super::{eligible, observable_since, EstimateFrame, Tally};
use crate::geometry::Point3;
use crate::simulator::{time_key, GroundTruth};
use crate::skeleton::{PartCategory, PARTS};

/// Estimates farther than this (mean joint distance, meters) from every
/// person stay unmatched.
const MATCH_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcpReport {
    pub alpha: f64,
    /// Evaluated estimate frames.
    pub frames: usize,
    pub categories: BTreeMap<PartCategory, Tally>,
    /// Whole-body tally per person id.
    pub people: BTreeMap<usize, Tally>,
    pub whole: Tally,
}

impl PcpReport {
    pub fn whole_percent(&self) -> f64 {
        self.whole.percent()
    }

    pub fn category(&self, c: PartCategory) -> Tally {
        self.categories.get(&c).copied().unwrap_or_default()
    }
}

fn mean_distance(est: &[Option<Point3>], truth: &[Point3]) -> Option<f64> {
    let (sum, n) = est
        .iter()
        .zip(truth)
        .filter_map(|(e, t)| e.map(|e| (e - t).norm()))
        .fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Greedy one-to-one pairing by mean joint distance, nearest first, within
/// 0.5 m. Returns `(estimate index, truth index)` pairs.
pub fn match_people(estimates: &[&[Option<Point3>]], truth: &[&[Point3]]) -> Vec<(usize, usize)> {
    let mut candidates = Vec::new();
    for (i, e) in estimates.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            if let Some(d) = mean_distance(e, t).filter(|d| *d <= MATCH_RADIUS) {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let (mut used_e, mut used_t) = (vec![false; estimates.len()], vec![false; truth.len()]);
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_e[i] && !used_t[j] {
            used_e[i] = true;
            used_t[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

/// Percentage of correctly estimated parts: a part is correct when the mean
/// distance of its two estimated endpoints to the true ones is at most
/// `alpha` times its true length. Every observable person in every
/// estimate frame contributes all ten parts; unmatched people score zero.
pub fn pcp(estimates: &[EstimateFrame], truth: &GroundTruth, alpha: f64) -> PcpReport {
    let since = observable_since(truth);
    let mut report = PcpReport {
        alpha,
        frames: 0,
        categories: PartCategory::ALL.iter().map(|&c| (c, Tally::default())).collect(),
        people: BTreeMap::new(),
        whole: Tally::default(),
    };
    for frame in estimates {
        let Some(tf) = truth.at(frame.timestamp) else { continue };
        let key = time_key(frame.timestamp);
        let people: Vec<_> = tf.people.iter().filter(|(id, _)| eligible(&since, *id, key)).collect();
        report.frames += 1;
        let est: Vec<&[Option<Point3>]> = frame.poses.iter().map(|(_, j)| j.as_slice()).collect();
        let gts: Vec<&[Point3]> = people.iter().map(|(_, j)| j.as_slice()).collect();
        let mut assigned = vec![None; people.len()];
        for (i, j) in match_people(&est, &gts) {
            assigned[j] = Some(i);
        }
        for (j, (id, joints)) in people.iter().enumerate() {
            let truth_pose: Vec<Option<Point3>> = joints.iter().copied().map(Some).collect();
            for part in &PARTS {
                let ok = assigned[j].is_some_and(|i| {
                    let (a, b) = part.ends;
                    let (ta, tb) = (a.resolve(&truth_pose).unwrap(), b.resolve(&truth_pose).unwrap());
                    match (a.resolve(est[i]), b.resolve(est[i])) {
                        (Some(ea), Some(eb)) => ((ea - ta).norm() + (eb - tb).norm()) / 2.0 <= alpha * (ta - tb).norm(),
                        _ => false,
                    }
                });
                report.categories.get_mut(&part.category).unwrap().add(ok);
                report.people.entry(*id).or_default().add(ok);
                report.whole.add(ok);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{DetectionLabel, TruthFrame};
    use crate::skeleton::{pose, BodyDimensions, LimbAngles, JOINT_COUNT, L_ELBOW, L_WRIST};

    fn scene(poses: Vec<Vec<Point3>>) -> GroundTruth {
        let labels = (0..poses.len())
            .flat_map(|p| {
                (0..2).map(move |c| DetectionLabel {
                    camera: c,
                    timestamp_us: 0,
                    detection: p,
                    person: p,
                })
            })
            .collect();
        GroundTruth {
            frames: vec![TruthFrame {
                timestamp: 0.0,
                people: poses.into_iter().enumerate().collect(),
            }],
            labels,
        }
    }

    fn body(x: f64) -> Vec<Point3> {
        pose(&BodyDimensions::default(), x, 0.0, 0.0, &LimbAngles::default()).to_vec()
    }

    fn estimate(poses: Vec<Vec<Option<Point3>>>) -> Vec<EstimateFrame> {
        vec![EstimateFrame {
            timestamp: 0.0,
            camera: None,
            poses: poses.into_iter().enumerate().map(|(i, p)| (i as u64 + 1, p)).collect(),
        }]
    }

    #[test]
    fn perfect_estimates() {
        let truth = scene(vec![body(0.0), body(2.0)]);
        let est = estimate(vec![
            body(2.0).into_iter().map(Some).collect(),
            body(0.0).into_iter().map(Some).collect(),
        ]);
        let r = pcp(&est, &truth, 0.5);
        assert_eq!(r.whole, Tally { correct: 20, total: 20 });
        assert_eq!(r.whole_percent(), 100.0);
        assert_eq!(r.category(PartCategory::UpperArm).total, 4);
    }

    #[test]
    fn threshold_arithmetic() {
        // A 0.4 m lower arm with both endpoints 0.25 m off fails; 0.15 m passes.
        let dims = BodyDimensions {
            lower_arm: 0.4,
            ..BodyDimensions::default()
        };
        let t = pose(&dims, 0.0, 0.0, 0.0, &LimbAngles::default()).to_vec();
        for (offset, expected) in [(0.25, false), (0.15, true)] {
            let mut e: Vec<Option<Point3>> = t.iter().copied().map(Some).collect();
            for k in [L_ELBOW, L_WRIST] {
                e[k] = Some(t[k] + nalgebra::Vector3::new(0.0, offset, 0.0));
            }
            let r = pcp(&estimate(vec![e]), &scene(vec![t.clone()]), 0.5);
            let lower = r.category(PartCategory::LowerArm);
            assert_eq!(lower.correct, if expected { 2 } else { 1 });
        }
    }

    #[test]
    fn missing_people_score_zero() {
        let truth = scene(vec![body(0.0)]);
        let r = pcp(&estimate(vec![]), &truth, 0.5);
        assert_eq!(r.whole, Tally { correct: 0, total: 10 });
        let far: Vec<Option<Point3>> = body(3.0).into_iter().map(Some).collect();
        assert_eq!(pcp(&estimate(vec![far]), &truth, 0.5).whole.correct, 0);
        let empty = vec![None; JOINT_COUNT];
        assert_eq!(pcp(&estimate(vec![empty]), &truth, 0.5).whole.correct, 0);
    }

    #[test]
    fn single_view_people_are_not_scored() {
        let mut truth = scene(vec![body(0.0)]);
        truth.labels.retain(|l| l.camera == 0);
        assert_eq!(pcp(&estimate(vec![]), &truth, 0.5).whole.total, 0);
    }

    #[test]
    fn noise_never_helps() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let truth = scene(vec![body(0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let noisy: Vec<Option<Point3>> = body(0.0)
                .into_iter()
                .map(|p| {
                    Some(p + nalgebra::Vector3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), 0.0))
                })
                .collect();
            let noisier: Vec<Option<Point3>> = noisy
                .iter()
                .zip(body(0.0))
                .map(|(n, t)| Some(t + (n.unwrap() - t) * 2.0))
                .collect();
            let a = pcp(&estimate(vec![noisy]), &truth, 0.5).whole.correct;
            let b = pcp(&estimate(vec![noisier]), &truth, 0.5).whole.correct;
            assert!(b <= a);
        }
    }
}
