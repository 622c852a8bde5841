use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{eligible, observable_since, Tally};
use crate::simulator::{time_key, GroundTruth};
use crate::tracker::Association;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationReport {
    pub per_camera: BTreeMap<usize, Tally>,
    pub overall: Tally,
}

impl AssociationReport {
    /// The lowest per-camera percentage; 100 with no cameras.
    pub fn worst_camera(&self) -> f64 {
        self.per_camera.values().map(Tally::percent).fold(100.0, f64::min)
    }
}

/// Agreement between the tracker's detection-to-target assignment and the
/// true identities.
///
/// Every target is labeled with the true person most of its detections
/// came from (ties to the lower id); a detection is correct when its target
/// carries its own person's label. Unassigned detections are errors.
/// Detections made before their person was visible in two cameras are not
/// scored. A detection assigned more than once keeps its last assignment.
pub fn association_accuracy(associations: &[Association], truth: &GroundTruth) -> AssociationReport {
    let since = observable_since(truth);
    let assigned: HashMap<(usize, i64, usize), u64> = associations
        .iter()
        .map(|a| ((a.camera, time_key(a.timestamp), a.detection), a.target))
        .collect();

    let mut votes: HashMap<u64, BTreeMap<usize, usize>> = HashMap::new();
    for l in &truth.labels {
        if let Some(&target) = assigned.get(&(l.camera, l.timestamp_us, l.detection)) {
            *votes.entry(target).or_default().entry(l.person).or_default() += 1;
        }
    }
    let majority: HashMap<u64, usize> = votes
        .into_iter()
        .map(|(target, v)| {
            let best = v
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&p, _)| p)
                .unwrap();
            (target, best)
        })
        .collect();

    let mut report = AssociationReport {
        per_camera: BTreeMap::new(),
        overall: Tally::default(),
    };
    for l in &truth.labels {
        if !eligible(&since, l.person, l.timestamp_us) {
            continue;
        }
        let ok = assigned
            .get(&(l.camera, l.timestamp_us, l.detection))
            .is_some_and(|t| majority[t] == l.person);
        report.per_camera.entry(l.camera).or_default().add(ok);
        report.overall.add(ok);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::DetectionLabel;

    fn label(camera: usize, ts: i64, detection: usize, person: usize) -> DetectionLabel {
        DetectionLabel {
            camera,
            timestamp_us: ts,
            detection,
            person,
        }
    }

    fn assoc(camera: usize, ts: i64, detection: usize, target: u64) -> Association {
        Association {
            camera,
            timestamp: ts as f64 / 1e6,
            detection,
            target,
        }
    }

    fn truth() -> GroundTruth {
        GroundTruth {
            frames: Vec::new(),
            labels: vec![
                label(0, 0, 0, 0),
                label(0, 0, 1, 1),
                label(1, 10, 0, 1),
                label(1, 10, 1, 0),
                label(0, 40, 0, 0),
                label(0, 40, 1, 1),
            ],
        }
    }

    #[test]
    fn perfect_and_empty() {
        let t = truth();
        let good = vec![
            assoc(0, 0, 0, 5),
            assoc(0, 0, 1, 6),
            assoc(1, 10, 0, 6),
            assoc(1, 10, 1, 5),
            assoc(0, 40, 0, 5),
            assoc(0, 40, 1, 6),
        ];
        let r = association_accuracy(&good, &t);
        // Camera 0's first frame precedes the second view of anyone.
        assert_eq!(r.overall, Tally { correct: 4, total: 4 });
        assert_eq!(r.worst_camera(), 100.0);
        let r = association_accuracy(&[], &t);
        assert_eq!(r.overall.correct, 0);
        assert_eq!(r.worst_camera(), 0.0);
    }

    #[test]
    fn minority_detections_are_errors() {
        let t = truth();
        let mixed = vec![
            assoc(0, 0, 0, 5),
            assoc(1, 10, 1, 5),
            assoc(0, 40, 0, 5),
            // Person 1 pieces all land in target 5 as well.
            assoc(1, 10, 0, 5),
            assoc(0, 40, 1, 7),
        ];
        let r = association_accuracy(&mixed, &t);
        // Target 5 is person 0 (3 votes vs 1); target 7 is person 1.
        assert_eq!(r.per_camera[&1], Tally { correct: 1, total: 2 });
        assert_eq!(r.per_camera[&0], Tally { correct: 2, total: 2 });
    }

    #[test]
    fn last_assignment_wins() {
        let t = truth();
        let a = vec![assoc(1, 10, 0, 9), assoc(1, 10, 0, 6), assoc(0, 40, 1, 6)];
        let r = association_accuracy(&a, &t);
        assert_eq!(r.per_camera[&1].correct, 1);
    }
}
