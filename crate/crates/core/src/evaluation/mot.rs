use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::{eligible, observable_since, EstimateFrame};
use crate::geometry::{Calibration, Point2};
use crate::simulator::{time_key, GroundTruth};
use crate::skeleton::root;

/// Simplified CLEAR-MOT and identity scores for one camera.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MotCameraReport {
    pub mota: f64,
    pub idf1: f64,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ids: usize,
    /// Ground-truth objects over all frames.
    pub gt: usize,
    pub matches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotReport {
    pub dist_threshold: f64,
    pub per_camera: BTreeMap<usize, MotCameraReport>,
}

/// Per-frame tracking scores after projecting 3D roots (hip midpoints) into
/// each camera.
///
/// The frames of camera `c` are the estimate frames produced by `c` plus
/// every instant with a ground-truth label in `c`. Truth objects are the
/// labeled, observable people; estimates are targets whose root projects
/// inside the image. A truth keeps last frame's estimate while it stays
/// within `dist_threshold` pixels; the rest are paired greedily, nearest
/// first. IDF1 uses a greedy one-to-one mapping between truth and estimate
/// ids ranked by how many frames they lie within the threshold. With no
/// ground truth at all, MOTA is `100·(1 − FP)`.
pub fn mot_metrics(
    estimates: &[EstimateFrame],
    truth: &GroundTruth,
    calib: &Calibration,
    dist_threshold: f64,
) -> MotReport {
    let since = observable_since(truth);
    let mut truth_at: BTreeMap<(usize, i64), Vec<usize>> = BTreeMap::new();
    for l in &truth.labels {
        if eligible(&since, l.person, l.timestamp_us) {
            truth_at.entry((l.camera, l.timestamp_us)).or_default().push(l.person);
        } else {
            truth_at.entry((l.camera, l.timestamp_us)).or_default();
        }
    }
    let mut est_at: HashMap<(usize, i64), &EstimateFrame> = HashMap::new();
    for e in estimates {
        if let Some(c) = e.camera {
            est_at.insert((c, time_key(e.timestamp)), e);
            truth_at.entry((c, time_key(e.timestamp))).or_default();
        }
    }

    let mut per_camera = BTreeMap::new();
    let mut state: HashMap<usize, CameraState> = HashMap::new();
    for (&(c, key), people) in &truth_at {
        let cam = calib.camera(c);
        let st = state.entry(c).or_default();
        let t = key as f64 / 1e6;
        let gt: Vec<(usize, Point2)> = match truth.at(t) {
            Some(tf) => people
                .iter()
                .filter_map(|&p| {
                    let joints = &tf.people.iter().find(|(id, _)| *id == p)?.1;
                    let pose: Vec<_> = joints.iter().copied().map(Some).collect();
                    Some((p, cam.project(&root(&pose)?).ok()?))
                })
                .collect(),
            None => Vec::new(),
        };
        let est: Vec<(u64, Point2)> = est_at
            .get(&(c, key))
            .map(|e| {
                e.poses
                    .iter()
                    .filter_map(|(id, joints)| {
                        let x = cam.project(&root(joints)?).ok()?;
                        cam.contains(&x).then_some((*id, x))
                    })
                    .collect()
            })
            .unwrap_or_default();
        st.frame(&gt, &est, dist_threshold);
    }
    for (c, st) in state {
        per_camera.insert(c, st.finish());
    }
    MotReport {
        dist_threshold,
        per_camera,
    }
}

#[derive(Debug, Default)]
struct CameraState {
    current: HashMap<usize, u64>,
    last_id: HashMap<usize, u64>,
    near: BTreeMap<(usize, u64), usize>,
    est_total: usize,
    report: MotCameraReport,
}

impl CameraState {
    fn frame(&mut self, gt: &[(usize, Point2)], est: &[(u64, Point2)], threshold: f64) {
        let dist = |g: &Point2, e: &Point2| (g - e).norm();
        self.report.gt += gt.len();
        self.est_total += est.len();
        for (g, gp) in gt {
            for (h, ep) in est {
                if dist(gp, ep) <= threshold {
                    *self.near.entry((*g, *h)).or_default() += 1;
                }
            }
        }

        let mut matched: HashMap<usize, u64> = HashMap::new();
        let mut taken: BTreeSet<u64> = BTreeSet::new();
        for (g, gp) in gt {
            if let Some(h) = self.current.get(g) {
                if let Some((_, ep)) = est.iter().find(|(id, _)| id == h) {
                    if dist(gp, ep) <= threshold && !taken.contains(h) {
                        matched.insert(*g, *h);
                        taken.insert(*h);
                    }
                }
            }
        }
        let mut candidates = Vec::new();
        for (g, gp) in gt.iter().filter(|(g, _)| !matched.contains_key(g)) {
            for (h, ep) in est.iter().filter(|(h, _)| !taken.contains(h)) {
                let d = dist(gp, ep);
                if d <= threshold {
                    candidates.push((d, *g, *h));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        for (_, g, h) in candidates {
            if !matched.contains_key(&g) && !taken.contains(&h) {
                matched.insert(g, h);
                taken.insert(h);
            }
        }

        for (&g, &h) in &matched {
            if self.last_id.get(&g).is_some_and(|&prev| prev != h) {
                self.report.ids += 1;
            }
            self.last_id.insert(g, h);
        }
        self.report.matches += matched.len();
        self.report.fn_ += gt.len() - matched.len();
        self.report.fp += est.len() - matched.len();
        self.current = matched;
    }

    fn finish(mut self) -> MotCameraReport {
        let r = &mut self.report;
        let errors = (r.fp + r.fn_ + r.ids) as f64;
        r.mota = 100.0 * (1.0 - errors / r.gt.max(1) as f64);

        let mut pairs: Vec<_> = self.near.iter().map(|(&(g, h), &n)| (n, g, h)).collect();
        pairs.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let (mut used_g, mut used_h) = (BTreeSet::new(), BTreeSet::new());
        let mut idtp = 0;
        for (n, g, h) in pairs {
            if used_g.insert(g) {
                if used_h.insert(h) {
                    idtp += n;
                } else {
                    used_g.remove(&g);
                }
            }
        }
        let denom = r.gt + self.est_total;
        r.idf1 = if denom == 0 {
            100.0
        } else {
            100.0 * 2.0 * idtp as f64 / denom as f64
        };
        self.report
    }
}
