//! Throughput and latency measurement of the tracker, optionally against the
//! stateless per-frame baseline, on preloaded synthetic streams.
//!
//! A "frame" is one update of every camera, so frames per second equals
//! tracker steps per second divided by the camera count.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::config::TrackerConfig;
use crate::simulator::{baseline_per_frame, generate, group_synchronized, PhaseSpec, RigSpec, ScenarioSpec, SimError};
use crate::skeleton::JOINT_COUNT;
use crate::tracker::{Tracker, TrackerError};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
}

/// Camera layout used for a given camera count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RigLayout {
    /// Cameras on a 5 m ring, 2.5 m high.
    Ring,
    /// Ceiling cameras 3 m high over an 8 × 6 m room, in the squarest grid
    /// with exactly the requested count.
    Grid,
}

impl RigLayout {
    pub fn rig(self, cameras: usize) -> RigSpec {
        match self {
            RigLayout::Ring => RigSpec::Ring {
                cameras,
                radius: 5.0,
                height: 2.5,
                look_at: [0.0, 0.0, 1.0],
                focal_px: 800.0,
                image_size: [1280, 720],
            },
            RigLayout::Grid => {
                let rows = (1..=cameras)
                    .filter(|r| cameras.is_multiple_of(*r) && r * r <= cameras)
                    .max()
                    .unwrap_or(1);
                RigSpec::CeilingGrid {
                    rows,
                    cols: cameras / rows.max(1),
                    width: 8.0,
                    depth: 6.0,
                    height: 3.0,
                    focal_px: 800.0,
                    image_size: [1280, 720],
                }
            }
        }
    }
}

/// Random-waypoint walkers at 25 Hz per camera with 1 px noise.
pub fn bench_scenario(layout: RigLayout, cameras: usize, people: usize, duration: f64, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        seed,
        duration,
        people,
        rig: layout.rig(cameras),
        pixel_noise: 1.0,
        ..ScenarioSpec::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub layout: RigLayout,
    pub cameras: usize,
    pub people: usize,
    pub steps: usize,
    /// All-camera frames processed.
    pub frames: f64,
    pub tracker_ms_per_frame: f64,
    pub fps: f64,
    pub step_p50_us: f64,
    pub step_p90_us: f64,
    pub step_p99_us: f64,
    /// Per synchronized frame, when the baseline ran.
    pub baseline_ms_per_frame: Option<f64>,
}

/// Nearest-rank percentile of sorted durations, in microseconds.
fn percentile_us(sorted: &[Duration], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1].as_secs_f64() * 1e6
}

/// Times the tracker over `spec`'s stream and, with `baseline`, the
/// per-frame baseline over the synchronized version of the same scene.
pub fn run_case(
    spec: &ScenarioSpec,
    layout: RigLayout,
    cfg: &TrackerConfig,
    baseline: bool,
) -> Result<BenchRow, BenchError> {
    let scene = generate(spec)?;
    let cameras = scene.calibration.len();
    let mut tracker = Tracker::new(scene.calibration.clone(), cfg.clone(), JOINT_COUNT)?;
    let mut steps = Vec::with_capacity(scene.frames.len());
    let start = Instant::now();
    for f in &scene.frames {
        let t0 = Instant::now();
        std::hint::black_box(tracker.step(f)?);
        steps.push(t0.elapsed());
    }
    let total = start.elapsed().as_secs_f64();
    steps.sort_unstable();
    let frames = scene.frames.len() as f64 / cameras.max(1) as f64;

    let baseline_ms_per_frame = if baseline {
        let synced = generate(&ScenarioSpec {
            phase: PhaseSpec::Synchronized,
            ..spec.clone()
        })?;
        let groups = group_synchronized(&synced.frames, 1e-4);
        let start = Instant::now();
        for g in &groups {
            std::hint::black_box(baseline_per_frame(g, &synced.calibration, cfg));
        }
        Some(start.elapsed().as_secs_f64() * 1e3 / groups.len().max(1) as f64)
    } else {
        None
    };

    Ok(BenchRow {
        layout,
        cameras,
        people: spec.people,
        steps: scene.frames.len(),
        frames,
        tracker_ms_per_frame: if frames > 0.0 { total * 1e3 / frames } else { 0.0 },
        fps: if total > 0.0 { frames / total } else { 0.0 },
        step_p50_us: percentile_us(&steps, 50.0),
        step_p90_us: percentile_us(&steps, 90.0),
        step_p99_us: percentile_us(&steps, 99.0),
        baseline_ms_per_frame,
    })
}

/// One row per (camera count, person count) pair, cameras varying fastest
/// within each person count.
pub fn run_bench(
    layout: RigLayout,
    cameras: &[usize],
    people: &[usize],
    duration: f64,
    seed: u64,
    cfg: &TrackerConfig,
    baseline: bool,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &p in people {
        for &c in cameras {
            rows.push(run_case(
                &bench_scenario(layout, c, p, duration, seed),
                layout,
                cfg,
                baseline,
            )?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let d: Vec<Duration> = (1..=10).map(Duration::from_micros).collect();
        assert_eq!(percentile_us(&d, 50.0), 5.0);
        assert_eq!(percentile_us(&d, 90.0), 9.0);
        assert_eq!(percentile_us(&d, 99.0), 10.0);
        assert_eq!(percentile_us(&[], 50.0), 0.0);
    }

    #[test]
    fn grid_layout_uses_exact_count() {
        for n in [1, 4, 6, 12, 7] {
            assert_eq!(RigLayout::Grid.rig(n).camera_count(), n);
        }
        assert!(matches!(
            RigLayout::Grid.rig(12),
            RigSpec::CeilingGrid { rows: 3, cols: 4, .. }
        ));
    }

    #[test]
    fn rows_cover_every_pair() {
        let rows = run_bench(
            RigLayout::Ring,
            &[2, 3],
            &[1],
            0.4,
            0,
            &crate::simulator::scene_config(),
            true,
        )
        .unwrap();
        assert_eq!(rows.iter().map(|r| r.cameras).collect::<Vec<_>>(), vec![2, 3]);
        assert!(rows.iter().all(|r| r.baseline_ms_per_frame.is_some() && r.steps > 0));
        assert!((rows[0].frames - 10.0).abs() < 1e-9);
    }
}
