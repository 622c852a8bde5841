//! Scores tracker output against simulator ground truth.
//!
//! A person only counts once two distinct cameras have detected them: until
//! then no multi-view method can know they exist.

mod association;
mod mot;
mod pcp;
mod sweep;

use serde::Serialize;

pub use association::{association_accuracy, AssociationReport};
pub use mot::{mot_metrics, MotCameraReport, MotReport};
pub use pcp::{match_people, pcp, PcpReport};
pub use sweep::{framerate_sweep, run_tracker, subsample, SweepRow, TrackerRun};

use crate::geometry::Point3;
use crate::simulator::{BaselinePose, GroundTruth};
use crate::tracker::StepOutput;

/// Estimated 3D poses at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateFrame {
    pub timestamp: f64,
    /// The camera whose frame produced the estimate, when known.
    pub camera: Option<usize>,
    pub poses: Vec<(u64, Vec<Option<Point3>>)>,
}

impl From<&StepOutput> for EstimateFrame {
    fn from(out: &StepOutput) -> Self {
        EstimateFrame {
            timestamp: out.timestamp,
            camera: Some(out.camera),
            poses: out
                .targets
                .iter()
                .map(|t| (t.id, t.joints.iter().map(|j| j.map(|(x, _)| x)).collect()))
                .collect(),
        }
    }
}

impl EstimateFrame {
    /// Stateless reconstructions; ids are cluster positions, not identities.
    pub fn from_baseline(timestamp: f64, poses: &[BaselinePose]) -> Self {
        EstimateFrame {
            timestamp,
            camera: None,
            poses: poses
                .iter()
                .enumerate()
                .map(|(i, p)| (i as u64, p.joints.clone()))
                .collect(),
        }
    }
}

/// `(correct, total)` as a percentage; 100 for an empty tally.
pub fn percent(correct: usize, total: usize) -> f64 {
    if total == 0 {
        100.0
    } else {
        100.0 * correct as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Serialize for Tally {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Tally", 3)?;
        st.serialize_field("correct", &self.correct)?;
        st.serialize_field("total", &self.total)?;
        st.serialize_field("percent", &self.percent())?;
        st.end()
    }
}

impl Tally {
    pub fn percent(&self) -> f64 {
        percent(self.correct, self.total)
    }

    pub fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += ok as usize;
    }
}

/// Per person: the first time, in microseconds, at which detections from
/// two distinct cameras exist. `None` for people never seen twice.
pub fn observable_since(truth: &GroundTruth) -> Vec<Option<i64>> {
    let people = truth.labels.iter().map(|l| l.person + 1).max().unwrap_or(0);
    let mut first: Vec<Option<(usize, i64)>> = vec![None; people];
    let mut since = vec![None; people];
    let mut labels: Vec<_> = truth.labels.iter().collect();
    labels.sort_by_key(|l| (l.timestamp_us, l.camera));
    for l in labels {
        match first[l.person] {
            None => first[l.person] = Some((l.camera, l.timestamp_us)),
            Some((c, _)) if c != l.camera && since[l.person].is_none() => since[l.person] = Some(l.timestamp_us),
            _ => {}
        }
    }
    since
}

pub fn eligible(since: &[Option<i64>], person: usize, timestamp_us: i64) -> bool {
    since.get(person).copied().flatten().is_some_and(|s| timestamp_us >= s)
}
