use super::*;
use crate::config::TrackerConfig;
use crate::reconstruction::{triangulate, JointObservationSet, ViewObservation};
use crate::skeleton::BONES;
use crate::tracker::Tracker;

fn still(x: f64, y: f64) -> PersonSpec {
    PersonSpec {
        path: PathSpec::Static {
            at: [x, y],
            heading: 0.0,
        },
        enter: 0.0,
        leave: None,
        head_start: 0.0,
        phase: None,
    }
}

fn ring(cameras: usize) -> RigSpec {
    RigSpec::Ring {
        cameras,
        radius: 5.0,
        height: 2.5,
        look_at: [0.0, 0.0, 1.0],
        focal_px: 800.0,
        image_size: [1280, 720],
    }
}

fn quiet() -> SwingSpec {
    SwingSpec {
        arm_amplitude: 0.0,
        leg_amplitude: 0.0,
        elbow_amplitude: 0.0,
        ..SwingSpec::default()
    }
}

#[test]
fn noiseless_static_person_triangulates_exactly() {
    let spec = ScenarioSpec {
        duration: 0.2,
        persons: vec![still(0.3, -0.2)],
        swing: quiet(),
        rig: ring(2),
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let truth = &s.truth.frames[0].people[0].1;
    let (f0, f1) = (&s.frames[0], &s.frames[1]);
    assert_ne!(f0.camera, f1.camera);
    for k in 0..JOINT_COUNT {
        let views = [f0, f1]
            .iter()
            .map(|f| ViewObservation {
                camera: f.camera,
                position: f.detections[0].joints[k].unwrap().position,
                time: f.timestamp,
                confidence: 1.0,
            })
            .collect();
        let x = triangulate(&JointObservationSet::new(views).unwrap(), &s.calibration).unwrap();
        assert!((x.position - truth[k]).norm() < 1e-8);
    }
}

#[test]
fn fixed_seed_is_reproducible() {
    let spec = ScenarioSpec {
        seed: 9,
        people: 3,
        pixel_noise: 2.0,
        dropout: 0.2,
        jitter: 0.002,
        duration: 3.0,
        ..ScenarioSpec::default()
    };
    let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
    assert_eq!(a.frames, b.frames);
    assert_eq!(a.truth, b.truth);
    let c = generate(&ScenarioSpec { seed: 10, ..spec }).unwrap();
    assert_ne!(a.frames, c.frames);
}

#[test]
fn ceiling_grid_stream_counts() {
    let spec = ScenarioSpec {
        people: 4,
        duration: 2.0,
        rig: RigSpec::CeilingGrid {
            rows: 3,
            cols: 4,
            width: 8.0,
            depth: 6.0,
            height: 3.2,
            focal_px: 600.0,
            image_size: [1280, 720],
        },
        area: [-3.0, 3.0, -2.0, 2.0],
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    assert_eq!(s.calibration.len(), 12);
    // 25 Hz for 2 s from each of 12 cameras.
    assert_eq!(s.frames.len(), 12 * 50);
    for c in 0..12 {
        let times: Vec<f64> = s.frames.iter().filter(|f| f.camera == c).map(|f| f.timestamp).collect();
        for w in times.windows(2) {
            assert!((w[1] - w[0] - 0.04).abs() <= 1e-6);
        }
    }
    for w in s.frames.windows(2) {
        assert!((w[0].timestamp, w[0].camera) < (w[1].timestamp, w[1].camera));
    }
    let seen: usize = s.frames.iter().map(|f| f.detections.len()).sum();
    assert!(seen > 12 * 50, "ceiling cameras should see most people, saw {seen}");
}

#[test]
fn bones_keep_their_length() {
    let spec = ScenarioSpec {
        people: 3,
        duration: 5.0,
        swing: SwingSpec {
            arm_amplitude: 1.0,
            frequency: 2.0,
            ..SwingSpec::default()
        },
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    for id in 0..3 {
        let first = &s.truth.frames[0].people[id].1;
        let base: Vec<f64> = BONES.iter().map(|&(a, b)| (first[a] - first[b]).norm()).collect();
        for f in &s.truth.frames {
            let p = &f.people[id].1;
            for (&(a, b), l) in BONES.iter().zip(&base) {
                assert!(((p[a] - p[b]).norm() - l).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn detections_are_noisy_projections() {
    let spec = ScenarioSpec {
        people: 2,
        duration: 4.0,
        pixel_noise: 2.0,
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let (mut sum, mut n) = (0.0, 0);
    for label in &s.truth.labels {
        let frame = s
            .frames
            .iter()
            .find(|f| f.camera == label.camera && time_key(f.timestamp) == label.timestamp_us)
            .unwrap();
        let truth = s.truth.at(frame.timestamp).unwrap();
        let joints = &truth.people.iter().find(|p| p.0 == label.person).unwrap().1;
        let cam = s.calibration.camera(label.camera);
        for (k, kp) in frame.detections[label.detection].joints.iter().enumerate() {
            if let Some(kp) = kp {
                let d = kp.position - cam.project(&joints[k]).unwrap();
                sum += d.norm_squared();
                n += 2;
            }
        }
    }
    let sigma = (sum / n as f64).sqrt();
    assert!((sigma - 2.0).abs() < 0.05, "{sigma}");
}

#[test]
fn dropout_rate_is_respected() {
    let spec = ScenarioSpec {
        people: 2,
        duration: 4.0,
        dropout: 0.25,
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let slots: Vec<bool> = s
        .frames
        .iter()
        .flat_map(|f| f.detections.iter().flat_map(|d| d.joints.iter().map(Option::is_none)))
        .collect();
    let rate = slots.iter().filter(|&&m| m).count() as f64 / slots.len() as f64;
    assert!((rate - 0.25).abs() < 0.02, "{rate}");
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = [
        ScenarioSpec {
            dropout: 1.0,
            ..ScenarioSpec::default()
        },
        ScenarioSpec {
            frame_rate: 0.0,
            ..ScenarioSpec::default()
        },
        ScenarioSpec {
            pixel_noise: -1.0,
            ..ScenarioSpec::default()
        },
        ScenarioSpec {
            frame_rates: vec![25.0],
            ..ScenarioSpec::default()
        },
        ScenarioSpec {
            rig: ring(0),
            ..ScenarioSpec::default()
        },
    ];
    for spec in bad {
        assert!(matches!(generate(&spec), Err(SimError::InvalidSpec(_))));
    }
    assert!(ScenarioSpec::parse(r#"{"unknown": 1}"#).is_err());
    let parsed =
        ScenarioSpec::parse(r#"{"seed": 4, "rig": {"kind": "ring", "cameras": 3, "radius": 4, "height": 2}}"#).unwrap();
    assert_eq!(parsed.rig.camera_count(), 3);
    assert_eq!(parsed.seed, 4);
}

#[test]
fn baseline_single_person_is_exact() {
    let spec = ScenarioSpec {
        duration: 0.1,
        persons: vec![still(0.0, 0.5)],
        rig: ring(3),
        phase: PhaseSpec::Synchronized,
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let groups = group_synchronized(&s.frames, 1e-3);
    assert_eq!(groups.len(), 3);
    let poses = baseline_per_frame(groups[0], &s.calibration, &TrackerConfig::default());
    assert_eq!(poses.len(), 1);
    assert_eq!(poses[0].members.len(), 3);
    let truth = &s.truth.frames[0].people[0].1;
    for (est, t) in poses[0].joints.iter().zip(truth) {
        assert!((est.unwrap() - t).norm() < 1e-8);
    }
}

#[test]
fn baseline_separates_two_people() {
    let spec = ScenarioSpec {
        duration: 0.5,
        persons: vec![still(-1.0, 0.0), still(1.0, 0.0)],
        rig: ring(4),
        phase: PhaseSpec::Synchronized,
        pixel_noise: 1.0,
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    for group in group_synchronized(&s.frames, 1e-3) {
        let poses = baseline_per_frame(group, &s.calibration, &TrackerConfig::default());
        assert_eq!(poses.len(), 2);
        for p in &poses {
            let persons: Vec<usize> = p
                .members
                .iter()
                .map(|&(c, d)| {
                    let key = time_key(group[0].timestamp);
                    s.truth
                        .labels
                        .iter()
                        .find(|l| l.camera == c && l.detection == d && l.timestamp_us == key)
                        .unwrap()
                        .person
                })
                .collect();
            assert!(persons.iter().all(|&x| x == persons[0]), "mixed cluster {persons:?}");
        }
    }
}

fn tracking_config() -> TrackerConfig {
    scene_config()
}

#[test]
fn tracker_static_person_round_robin() {
    let spec = ScenarioSpec {
        duration: 1.0,
        persons: vec![still(0.2, 0.1)],
        swing: quiet(),
        rig: ring(4),
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let mut tr = Tracker::new(s.calibration.clone(), tracking_config(), JOINT_COUNT).unwrap();
    for (i, f) in s.frames.iter().enumerate() {
        let out = tr.step(f).unwrap();
        if i >= 3 {
            assert_eq!(out.targets.len(), 1);
        }
    }
    let truth = &s.truth.frames.last().unwrap().people[0].1;
    for (est, t) in tr.poses()[0].joints.iter().zip(truth) {
        assert!((est.unwrap().0 - t).norm() <= 5e-3);
    }
}

#[test]
fn initialization_from_three_noiseless_views() {
    let spec = ScenarioSpec {
        duration: 0.04,
        persons: vec![still(0.0, 0.0)],
        swing: quiet(),
        rig: ring(3),
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let mut tr = Tracker::new(s.calibration.clone(), tracking_config(), JOINT_COUNT).unwrap();
    let created: Vec<u64> = s.frames.iter().flat_map(|f| tr.step(f).unwrap().created).collect();
    assert_eq!(created, vec![1]);
    let truth = &s.truth.frames[0].people[0].1;
    for (est, t) in tr.poses()[0].joints.iter().zip(truth) {
        assert!((est.unwrap().0 - t).norm() <= 1e-6);
    }
}

#[test]
fn two_people_two_cameras_two_targets() {
    let spec = ScenarioSpec {
        duration: 0.04,
        persons: vec![still(-1.0, 0.0), still(1.0, 0.0)],
        rig: ring(2),
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let mut tr = Tracker::new(s.calibration.clone(), tracking_config(), JOINT_COUNT).unwrap();
    let mut owner = std::collections::HashMap::new();
    for f in &s.frames {
        for a in tr.step(f).unwrap().associations {
            let key = time_key(a.timestamp);
            let person = s
                .truth
                .labels
                .iter()
                .find(|l| l.camera == a.camera && l.detection == a.detection && l.timestamp_us == key)
                .unwrap()
                .person;
            assert_eq!(*owner.entry(a.target).or_insert(person), person);
        }
    }
    assert_eq!(tr.targets().len(), 2);
    assert_eq!(owner.len(), 2);
}

#[test]
fn departed_person_retires_promptly() {
    let leave = 1.5;
    let spec = ScenarioSpec {
        duration: 4.0,
        persons: vec![PersonSpec {
            leave: Some(leave),
            ..still(0.0, 0.0)
        }],
        rig: ring(4),
        ..ScenarioSpec::default()
    };
    let s = generate(&spec).unwrap();
    let cfg = tracking_config();
    let mut tr = Tracker::new(s.calibration.clone(), cfg.clone(), JOINT_COUNT).unwrap();
    let mut retired_at = None;
    for f in &s.frames {
        if !tr.step(f).unwrap().retired.is_empty() {
            retired_at = Some(f.timestamp);
        }
    }
    let t = retired_at.expect("target never retired");
    assert!(
        t > leave && t <= leave + cfg.retire_after + 1.0 / spec.frame_rate,
        "{t}"
    );
}

#[test]
fn joints_move_continuously() {
    let patrol = PersonSpec {
        path: PathSpec::Patrol {
            from: [-1.5, 0.0],
            to: [1.5, 0.5],
            speed: 1.2,
        },
        ..still(0.0, 0.0)
    };
    for spec in [
        ScenarioSpec {
            people: 3,
            duration: 20.0,
            ..ScenarioSpec::default()
        },
        ScenarioSpec {
            persons: vec![patrol],
            duration: 20.0,
            ..ScenarioSpec::default()
        },
    ] {
        let walkers = motion::Walker::build_all(&spec, &mut ChaCha8Rng::seed_from_u64(1));
        for w in &walkers {
            let mut prev = w.pose(0.0);
            for i in 1..20_000 {
                let p = w.pose(i as f64 * 1e-3);
                let fastest = p.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                // 8 m/s bounds walking plus limb swing and turning.
                assert!(fastest < 8e-3, "joint jumped {fastest} m at step {i}");
                prev = p;
            }
        }
    }
}
