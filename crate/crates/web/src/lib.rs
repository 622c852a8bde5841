//! Browser bindings. Every export takes and returns JSON strings; the plain
//! Rust functions underneath are what the native tests exercise.

use crossview::affinity::{affinity_2d, affinity_3d_ray, MotionState};
use crossview::config::TrackerConfig;
use crossview::evaluation::{association_accuracy, framerate_sweep, pcp, run_tracker, EstimateFrame, SweepRow};
use crossview::geometry::{Point2, Point3, Ray3};
use crossview::simulator::{generate, scene_config, time_key, ScenarioSpec};
use crossview::skeleton::{BONES, JOINT_COUNT};
use nalgebra::{Unit, Vector3};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Longest scene the page may request, seconds.
const MAX_DURATION: f64 = 60.0;

fn config(text: &str) -> Result<TrackerConfig, String> {
    if text.trim().is_empty() {
        Ok(scene_config())
    } else {
        TrackerConfig::parse(text).map_err(|e| e.to_string())
    }
}

fn spec(text: &str) -> Result<ScenarioSpec, String> {
    let spec = ScenarioSpec::parse(text).map_err(|e| e.to_string())?;
    if spec.duration > MAX_DURATION {
        return Err(format!("duration is limited to {MAX_DURATION} s here"));
    }
    Ok(spec)
}

type Joints = Vec<Option<[f64; 3]>>;

#[derive(Serialize)]
struct CameraOut {
    id: String,
    center: [f64; 3],
}

#[derive(Serialize)]
struct InstantOut {
    t: f64,
    truth: Vec<(usize, Joints)>,
    targets: Vec<(u64, Joints)>,
}

#[derive(Serialize)]
struct SceneOut {
    area: [f64; 4],
    bones: Vec<(usize, usize)>,
    cameras: Vec<CameraOut>,
    instants: Vec<InstantOut>,
    pcp: f64,
    association: f64,
    /// Distinct target ids ever reported.
    targets: usize,
}

fn joints(j: impl IntoIterator<Item = Option<Point3>>) -> Joints {
    j.into_iter().map(|p| p.map(|p| [p.x, p.y, p.z])).collect()
}

/// Simulates a scene, tracks it and returns, for every distinct timestamp,
/// the true poses next to the tracker's state after that timestamp's last
/// frame.
pub fn track_scene(spec_json: &str, config_json: &str) -> Result<String, String> {
    let spec = spec(spec_json)?;
    let cfg = config(config_json)?;
    let scene = generate(&spec).map_err(|e| e.to_string())?;
    let run = run_tracker(&scene.calibration, &scene.frames, &cfg, JOINT_COUNT).map_err(|e| e.to_string())?;

    let mut latest: Vec<&EstimateFrame> = Vec::new();
    for e in &run.estimates {
        match latest.last_mut() {
            Some(last) if time_key(last.timestamp) == time_key(e.timestamp) => *last = e,
            _ => latest.push(e),
        }
    }
    let instants = latest
        .iter()
        .map(|e| InstantOut {
            t: e.timestamp,
            truth: scene
                .truth
                .at(e.timestamp)
                .map(|f| {
                    f.people
                        .iter()
                        .map(|(id, j)| (*id, joints(j.iter().copied().map(Some))))
                        .collect()
                })
                .unwrap_or_default(),
            targets: e.poses.iter().map(|(id, j)| (*id, joints(j.iter().copied()))).collect(),
        })
        .collect();

    let out = SceneOut {
        area: spec.area,
        bones: BONES.to_vec(),
        cameras: scene
            .calibration
            .cameras()
            .iter()
            .map(|c| CameraOut {
                id: c.id().to_string(),
                center: [c.center().x, c.center().y, c.center().z],
            })
            .collect(),
        instants,
        pcp: pcp(&run.estimates, &scene.truth, 0.5).whole_percent(),
        association: association_accuracy(&run.associations, &scene.truth).overall.percent(),
        targets: run
            .estimates
            .iter()
            .flat_map(|e| e.poses.iter().map(|(id, _)| *id))
            .collect::<std::collections::BTreeSet<_>>()
            .len(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// PCP of time-weighted against plain triangulation when each camera keeps
/// only every n-th frame.
pub fn sweep(spec_json: &str, config_json: &str, ns: &[usize]) -> Result<String, String> {
    if ns.is_empty() || ns.contains(&0) {
        return Err("frame steps must be positive".into());
    }
    let spec = spec(spec_json)?;
    let cfg = config(config_json)?;
    let scene = generate(&spec).map_err(|e| e.to_string())?;
    let rows: Vec<SweepRow> = framerate_sweep(&scene.calibration, &scene.frames, &scene.truth, ns, &cfg, JOINT_COUNT)
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CurvesOut {
    dt: f64,
    /// `(pixel displacement, 2D affinity)`.
    pixel: Vec<(f64, f64)>,
    /// `(point-to-ray distance in meters, 3D affinity)`.
    ray: Vec<(f64, f64)>,
}

/// Affinity of one joint as a function of its 2D displacement and of its
/// distance to a detection ray, `dt` seconds after the last observation.
pub fn affinity_curves(config_json: &str, dt: f64, samples: usize) -> Result<String, String> {
    let cfg = config(config_json)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err("dt must be positive".into());
    }
    let samples = samples.clamp(2, 1000);
    let step = |max: f64, i: usize| max * i as f64 / (samples - 1) as f64;

    let max_px = 2.0 * cfg.alpha_2d * dt;
    let pixel = (0..samples)
        .map(|i| {
            let d = step(max_px, i);
            let a = affinity_2d(&Point2::origin(), 0.0, &Point2::new(d, 0.0), dt, &cfg).map_err(|e| e.to_string())?;
            Ok((d, a))
        })
        .collect::<Result<_, String>>()?;

    let ray = Ray3 {
        origin: Point3::origin(),
        direction: Unit::new_normalize(Vector3::z()),
    };
    let max_m = 2.0 * cfg.alpha_3d;
    let ray_curve = (0..samples)
        .map(|i| {
            let d = step(max_m, i);
            let state = MotionState {
                position: Point3::new(d, 0.0, 2.0),
                time: 0.0,
                velocity: None,
            };
            (d, affinity_3d_ray(&state, &ray, dt, &cfg))
        })
        .collect();

    serde_json::to_string(&CurvesOut {
        dt,
        pixel,
        ray: ray_curve,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = trackScene)]
pub fn track_scene_js(spec_json: &str, config_json: &str) -> Result<String, JsError> {
    track_scene(spec_json, config_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = framerateSweep)]
pub fn sweep_js(spec_json: &str, config_json: &str, ns: Vec<u32>) -> Result<String, JsError> {
    let ns: Vec<usize> = ns.into_iter().map(|n| n as usize).collect();
    sweep(spec_json, config_json, &ns).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = affinityCurves)]
pub fn affinity_curves_js(config_json: &str, dt: f64, samples: u32) -> Result<String, JsError> {
    affinity_curves(config_json, dt, samples as usize).map_err(|e| JsError::new(&e))
}

/// The tracker parameters used when a page leaves the config box empty.
#[wasm_bindgen(js_name = defaultConfig)]
pub fn default_config_js() -> String {
    serde_json::to_string_pretty(&scene_config()).unwrap_or_default()
}
