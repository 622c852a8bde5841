use serde::Serialize;

use super::{pcp, EstimateFrame};
use crate::config::TrackerConfig;
use crate::geometry::Calibration;
use crate::pose::Frame;
use crate::simulator::GroundTruth;
use crate::tracker::{Association, Tracker, TrackerError, TrackerStats};

/// Everything one tracker pass over a stream produced.
#[derive(Debug, Clone)]
pub struct TrackerRun {
    pub estimates: Vec<EstimateFrame>,
    pub associations: Vec<Association>,
    pub stats: TrackerStats,
}

pub fn run_tracker(
    calib: &Calibration,
    frames: &[Frame],
    cfg: &TrackerConfig,
    n_joints: usize,
) -> Result<TrackerRun, TrackerError> {
    let mut tracker = Tracker::new(calib.clone(), cfg.clone(), n_joints)?;
    let mut estimates = Vec::with_capacity(frames.len());
    let mut associations = Vec::new();
    for f in frames {
        let out = tracker.step(f)?;
        associations.extend_from_slice(&out.associations);
        estimates.push(EstimateFrame::from(&out));
    }
    Ok(TrackerRun {
        estimates,
        associations,
        stats: *tracker.stats(),
    })
}

/// Keeps every `n`-th frame of each camera. The `r`-th of `C` cameras
/// starts with its frame `⌊r·n/C⌋`, so the thinned cameras stay spread over
/// the longer frame period instead of firing in a burst.
pub fn subsample(frames: &[Frame], n: usize) -> Vec<Frame> {
    let n = n.max(1);
    let mut cameras: Vec<usize> = frames.iter().map(|f| f.camera).collect();
    cameras.sort_unstable();
    cameras.dedup();
    let rank = |c: usize| cameras.binary_search(&c).unwrap();
    let mut seen = vec![0usize; cameras.len()];
    frames
        .iter()
        .filter(|f| {
            let r = rank(f.camera);
            let i = seen[r];
            seen[r] += 1;
            i >= r * n / cameras.len() && (i - r * n / cameras.len()).is_multiple_of(n)
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub weighted_pcp: f64,
    pub plain_pcp: f64,
    /// Mean age, seconds, of the older views entering each triangulation.
    pub mean_time_difference: f64,
}

/// Whole-body PCP@0.5 of time-weighted against plain re-triangulation on
/// streams thinned to every `n`-th frame per camera.
pub fn framerate_sweep(
    calib: &Calibration,
    frames: &[Frame],
    truth: &GroundTruth,
    ns: &[usize],
    cfg: &TrackerConfig,
    n_joints: usize,
) -> Result<Vec<SweepRow>, TrackerError> {
    ns.iter()
        .map(|&n| {
            let thin = subsample(frames, n);
            let weighted = TrackerConfig {
                weighted_triangulation: true,
                ..cfg.clone()
            };
            let plain = TrackerConfig {
                weighted_triangulation: false,
                ..cfg.clone()
            };
            let w = run_tracker(calib, &thin, &weighted, n_joints)?;
            let p = run_tracker(calib, &thin, &plain, n_joints)?;
            Ok(SweepRow {
                n,
                weighted_pcp: pcp(&w.estimates, truth, 0.5).whole_percent(),
                plain_pcp: pcp(&p.estimates, truth, 0.5).whole_percent(),
                mean_time_difference: w.stats.mean_staleness(),
            })
        })
        .collect()
}
