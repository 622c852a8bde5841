//! Synthetic scenes: walking skeletons, camera rigs and noisy,
//! unsynchronized 2D detection streams with their ground truth.

mod baseline;
mod motion;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::{baseline_per_frame, group_synchronized, BaselinePose};
pub use motion::{PathSpec, PersonSpec, SwingSpec};

use crate::config::TrackerConfig;
use crate::geometry::{Calibration, CameraView, GeometryError, Point3};
use crate::pose::{Frame, Keypoint};
use crate::skeleton::{BodyDimensions, JOINT_COUNT, L_HIP, R_HIP};
use motion::Walker;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RigSpec {
    /// Cameras evenly spaced on a horizontal circle, all aimed at `look_at`.
    Ring {
        cameras: usize,
        radius: f64,
        height: f64,
        #[serde(default = "default_look_at")]
        look_at: [f64; 3],
        #[serde(default = "default_focal")]
        focal_px: f64,
        #[serde(default = "default_image")]
        image_size: [u32; 2],
    },
    /// `rows × cols` ceiling cameras spread over a `width × depth` area
    /// centered at the origin, each tilted towards the middle of the room.
    CeilingGrid {
        rows: usize,
        cols: usize,
        width: f64,
        depth: f64,
        height: f64,
        #[serde(default = "default_focal")]
        focal_px: f64,
        #[serde(default = "default_image")]
        image_size: [u32; 2],
    },
}

fn default_look_at() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_focal() -> f64 {
    800.0
}

fn default_image() -> [u32; 2] {
    [1280, 720]
}

impl RigSpec {
    pub fn camera_count(&self) -> usize {
        match *self {
            RigSpec::Ring { cameras, .. } => cameras,
            RigSpec::CeilingGrid { rows, cols, .. } => rows * cols,
        }
    }

    pub fn build(&self) -> Result<Calibration, SimError> {
        let mut cams = Vec::new();
        match *self {
            RigSpec::Ring {
                cameras,
                radius,
                height,
                look_at,
                focal_px,
                image_size,
            } => {
                for i in 0..cameras {
                    let a = i as f64 / cameras as f64 * std::f64::consts::TAU;
                    cams.push(CameraView::look_at(
                        format!("cam{i}"),
                        Point3::new(radius * a.cos(), radius * a.sin(), height),
                        Point3::from(look_at),
                        focal_px,
                        (image_size[0], image_size[1]),
                    )?);
                }
            }
            RigSpec::CeilingGrid {
                rows,
                cols,
                width,
                depth,
                height,
                focal_px,
                image_size,
            } => {
                let cell = |i: usize, n: usize, extent: f64| (i as f64 + 0.5) / n as f64 * extent - extent / 2.0;
                for r in 0..rows {
                    for c in 0..cols {
                        let (x, y) = (cell(c, cols, width), cell(r, rows, depth));
                        cams.push(CameraView::look_at(
                            format!("cam{}", r * cols + c),
                            Point3::new(x, y, height),
                            Point3::new(x * 0.4, y * 0.4, 1.0),
                            focal_px,
                            (image_size[0], image_size[1]),
                        )?);
                    }
                }
            }
        }
        Ok(Calibration::new(cams)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "offsets", rename_all = "snake_case")]
pub enum PhaseSpec {
    /// Camera `c` starts at `c / (cameras · frame_rate)`.
    Staggered,
    Synchronized,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    /// Seconds.
    pub duration: f64,
    /// Random-waypoint walkers generated when `persons` is empty.
    pub people: usize,
    pub persons: Vec<PersonSpec>,
    /// Walking area `[x_min, x_max, y_min, y_max]` in meters.
    pub area: [f64; 4],
    /// Root speed of random-waypoint walkers, m/s.
    pub walk_speed: f64,
    pub swing: SwingSpec,
    pub body: BodyDimensions,
    /// Per-person body scale drawn uniformly from `1 ± body_scale_jitter`.
    pub body_scale_jitter: f64,
    pub rig: RigSpec,
    /// Hz, shared by every camera unless `frame_rates` is given.
    pub frame_rate: f64,
    pub frame_rates: Vec<f64>,
    pub phase: PhaseSpec,
    /// Standard deviation of per-frame timestamp jitter, seconds.
    pub jitter: f64,
    /// Standard deviation of isotropic pixel noise.
    pub pixel_noise: f64,
    /// Independent per-joint miss probability.
    pub dropout: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 0,
            duration: 10.0,
            people: 2,
            persons: Vec::new(),
            area: [-2.0, 2.0, -2.0, 2.0],
            walk_speed: 1.0,
            swing: SwingSpec::default(),
            body: BodyDimensions::default(),
            body_scale_jitter: 0.05,
            rig: RigSpec::Ring {
                cameras: 4,
                radius: 5.0,
                height: 2.5,
                look_at: default_look_at(),
                focal_px: default_focal(),
                image_size: default_image(),
            },
            frame_rate: 25.0,
            frame_rates: Vec::new(),
            phase: PhaseSpec::Staggered,
            jitter: 0.0,
            pixel_noise: 0.0,
            dropout: 0.0,
        }
    }
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::InvalidSpec(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidSpec(m.to_string()));
        let cams = self.rig.camera_count();
        if cams == 0 {
            return bad("rig has no cameras");
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be positive");
        }
        if !(self.frame_rate > 0.0) || self.frame_rates.iter().any(|r| !(*r > 0.0)) {
            return bad("frame rates must be positive");
        }
        if !self.frame_rates.is_empty() && self.frame_rates.len() != cams {
            return bad("frame_rates needs one entry per camera");
        }
        if let PhaseSpec::Explicit(p) = &self.phase {
            if p.len() != cams || p.iter().any(|x| !(*x >= 0.0)) {
                return bad("explicit phases need one non-negative entry per camera");
            }
        }
        if !(self.pixel_noise >= 0.0) || !(self.jitter >= 0.0) {
            return bad("noise levels must be non-negative");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.body_scale_jitter) {
            return bad("body_scale_jitter must lie in [0, 1)");
        }
        let [x0, x1, y0, y1] = self.area;
        if !(x1 > x0 && y1 > y0) {
            return bad("area must have positive extent");
        }
        if self.persons.is_empty() && self.people > 0 && !(self.walk_speed >= 0.0) {
            return bad("walk_speed must be non-negative");
        }
        for p in &self.persons {
            p.validate().map_err(SimError::InvalidSpec)?;
        }
        Ok(())
    }

    pub fn camera_rate(&self, camera: usize) -> f64 {
        self.frame_rates.get(camera).copied().unwrap_or(self.frame_rate)
    }

    fn camera_phase(&self, camera: usize, cameras: usize) -> f64 {
        match &self.phase {
            PhaseSpec::Staggered => camera as f64 / (cameras as f64 * self.frame_rate),
            PhaseSpec::Synchronized => 0.0,
            PhaseSpec::Explicit(p) => p[camera],
        }
    }
}

/// Image-velocity bound suited to simulated rigs. A walker at 1 m/s, 5 m
/// from an 800 px focal-length camera, moves about 160 px/s, and limbs and
/// closer people several times that.
pub const SCENE_ALPHA_2D: f64 = 500.0;

/// Ray-distance bound suited to simulated rigs; also absorbs the lag of
/// views a few hundred milliseconds old.
pub const SCENE_ALPHA_3D: f64 = 0.3;

/// Default tracker parameters with the distance bounds widened to
/// [`SCENE_ALPHA_2D`] and [`SCENE_ALPHA_3D`].
pub fn scene_config() -> TrackerConfig {
    TrackerConfig {
        alpha_2d: SCENE_ALPHA_2D,
        alpha_3d: SCENE_ALPHA_3D,
        ..TrackerConfig::default()
    }
}

/// True joints of every present person at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthFrame {
    pub timestamp: f64,
    /// `(person id, joints)` in person order.
    pub people: Vec<(usize, Vec<Point3>)>,
}

/// Which person produced a detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionLabel {
    pub camera: usize,
    /// Microseconds, matching the frame timestamp exactly.
    pub timestamp_us: i64,
    pub detection: usize,
    pub person: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    /// One entry per distinct frame timestamp, ascending.
    pub frames: Vec<TruthFrame>,
    pub labels: Vec<DetectionLabel>,
}

impl GroundTruth {
    /// Truth frame at `timestamp` (within half a microsecond).
    pub fn at(&self, timestamp: f64) -> Option<&TruthFrame> {
        let i = self.frames.partition_point(|f| f.timestamp < timestamp - 5e-7);
        self.frames.get(i).filter(|f| (f.timestamp - timestamp).abs() <= 5e-7)
    }
}

/// Seconds rounded to whole microseconds, the resolution of the wire format.
pub fn quantize_time(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

pub fn time_key(t: f64) -> i64 {
    (t * 1e6).round() as i64
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub calibration: Calibration,
    /// Ordered by `(timestamp, camera)`.
    pub frames: Vec<Frame>,
    pub truth: GroundTruth,
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario, SimError> {
    spec.validate()?;
    let calibration = spec.rig.build()?;
    let cams = calibration.len();
    let mut scene_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    noise_rng.set_stream(1);

    let walkers = Walker::build_all(spec, &mut scene_rng);

    let mut schedule: Vec<(i64, usize)> = Vec::new();
    let jitter = (spec.jitter > 0.0).then(|| Normal::new(0.0, spec.jitter).unwrap());
    for c in 0..cams {
        let (rate, phase) = (spec.camera_rate(c), spec.camera_phase(c, cams));
        let mut last = i64::MIN;
        for i in 0.. {
            let nominal = phase + i as f64 / rate;
            if nominal >= spec.duration {
                break;
            }
            let dt = jitter.map_or(0.0, |n| scene_rng.sample(n));
            let mut key = time_key((nominal + dt).max(0.0));
            // Jitter never reorders one camera's frames.
            if key <= last {
                key = last + 1;
            }
            last = key;
            schedule.push((key, c));
        }
    }
    schedule.sort_unstable();

    let noise = Normal::new(0.0, spec.pixel_noise.max(f64::MIN_POSITIVE)).unwrap();
    let mut frames = Vec::with_capacity(schedule.len());
    let mut truth = GroundTruth::default();
    for &(key, c) in &schedule {
        let t = key as f64 / 1e6;
        if truth.frames.last().is_none_or(|f| time_key(f.timestamp) != key) {
            truth.frames.push(TruthFrame {
                timestamp: t,
                people: walkers
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| w.present(t))
                    .map(|(id, w)| (id, w.pose(t).to_vec()))
                    .collect(),
            });
        }
        let people = &truth.frames.last().unwrap().people;
        let cam = calibration.camera(c);
        let mut poses = Vec::new();
        for (id, joints) in people {
            let hips = Point3::from(joints[L_HIP].coords.lerp(&joints[R_HIP].coords, 0.5));
            match cam.project(&hips) {
                Ok(x) if cam.contains(&x) => {}
                _ => continue,
            }
            let mut det = Vec::with_capacity(JOINT_COUNT);
            for joint in joints {
                let dropped = spec.dropout > 0.0 && noise_rng.random::<f64>() < spec.dropout;
                let (dx, dy) = if spec.pixel_noise > 0.0 {
                    (noise_rng.sample(noise), noise_rng.sample(noise))
                } else {
                    (0.0, 0.0)
                };
                let confidence = 0.5 + 0.5 * noise_rng.random::<f64>();
                det.push(match cam.project(joint) {
                    Ok(x) if !dropped && cam.contains(&x) => Some(Keypoint::new(x.x + dx, x.y + dy, confidence)),
                    _ => None,
                });
            }
            poses.push((*id, det));
        }
        poses.shuffle(&mut noise_rng);
        for (index, (person, _)) in poses.iter().enumerate() {
            truth.labels.push(DetectionLabel {
                camera: c,
                timestamp_us: key,
                detection: index,
                person: *person,
            });
        }
        frames.push(Frame::new(c, t, poses.into_iter().map(|(_, d)| d).collect()));
    }
    Ok(Scenario {
        calibration,
        frames,
        truth,
    })
}

#[cfg(test)]
mod tests;
