use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ScenarioSpec;
use crate::geometry::Point3;
use crate::skeleton::{pose, BodyDimensions, LimbAngles, JOINT_COUNT};

/// Ground-plane route of one person's pelvis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Static {
        at: [f64; 2],
        #[serde(default)]
        heading: f64,
    },
    /// Back and forth between two points.
    Patrol { from: [f64; 2], to: [f64; 2], speed: f64 },
    /// Through the points in order, then standing still at the last one.
    Waypoints { points: Vec<[f64; 2]>, speed: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonSpec {
    pub path: PathSpec,
    /// Seconds; the person exists on `[enter, leave)`.
    #[serde(default)]
    pub enter: f64,
    #[serde(default)]
    pub leave: Option<f64>,
    /// Seconds of the route already walked at `enter`.
    #[serde(default)]
    pub head_start: f64,
    /// Gait phase in radians; drawn at random when absent.
    #[serde(default)]
    pub phase: Option<f64>,
}

impl PersonSpec {
    pub fn validate(&self) -> Result<(), String> {
        match &self.path {
            PathSpec::Static { .. } => {}
            PathSpec::Patrol { speed, .. } | PathSpec::Waypoints { speed, .. } if !(*speed >= 0.0) => {
                return Err("path speed must be non-negative".into())
            }
            PathSpec::Waypoints { points, .. } if points.is_empty() => {
                return Err("waypoint path needs at least one point".into())
            }
            _ => {}
        }
        if !(self.head_start >= 0.0 && self.head_start.is_finite()) {
            return Err("head_start must be non-negative".into());
        }
        if self.leave.is_some_and(|l| !(l > self.enter)) {
            return Err("leave must come after enter".into());
        }
        Ok(())
    }
}

/// Sinusoidal limb motion shared by every person.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwingSpec {
    /// Shoulder swing, radians.
    pub arm_amplitude: f64,
    /// Hip swing, radians.
    pub leg_amplitude: f64,
    /// Gait cycles per second.
    pub frequency: f64,
    /// Mean elbow flexion, radians.
    pub elbow: f64,
    /// Peak-to-peak elbow flexion change, radians.
    pub elbow_amplitude: f64,
}

impl Default for SwingSpec {
    fn default() -> Self {
        SwingSpec {
            arm_amplitude: 0.35,
            leg_amplitude: 0.3,
            frequency: 0.9,
            elbow: 0.3,
            elbow_amplitude: 0.3,
        }
    }
}

/// Arc length over which the body turns at a path corner, each side.
const TURN_RADIUS: f64 = 0.3;

#[derive(Debug, Clone)]
enum Route {
    Still {
        at: [f64; 2],
        heading: f64,
    },
    /// Polyline walked at `speed`; a `cyclic` one starts over at the end
    /// (its last point equals its first).
    Line {
        points: Vec<[f64; 2]>,
        /// Cumulative length at each point.
        arc: Vec<f64>,
        /// Direction of each segment.
        theta: Vec<f64>,
        speed: f64,
        cyclic: bool,
    },
}

/// `b − a` wrapped to `(−π, π]`.
fn angle_diff(a: f64, b: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let d = (b - a).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

impl Route {
    fn line(mut points: Vec<[f64; 2]>, speed: f64, bounce: bool) -> Route {
        points.dedup();
        if points.len() < 2 {
            return Route::Still {
                at: points[0],
                heading: 0.0,
            };
        }
        if bounce {
            let back: Vec<_> = points.iter().rev().skip(1).copied().collect();
            points.extend(back);
        }
        let mut arc = vec![0.0];
        let mut theta = Vec::new();
        for w in points.windows(2) {
            let (dx, dy) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
            arc.push(arc.last().unwrap() + (dx * dx + dy * dy).sqrt());
            theta.push(dy.atan2(dx));
        }
        Route::Line {
            points,
            arc,
            theta,
            speed,
            cyclic: bounce,
        }
    }

    /// `(x, y, heading)` after walking for `elapsed` seconds. The heading
    /// turns linearly in arc length across each corner.
    fn at(&self, elapsed: f64) -> (f64, f64, f64) {
        match self {
            Route::Still { at, heading } => (at[0], at[1], *heading),
            Route::Line {
                points,
                arc,
                theta,
                speed,
                cyclic,
            } => {
                let n = theta.len();
                let total = arc[n];
                let mut s = speed * elapsed.max(0.0);
                s = if *cyclic { s % total } else { s.min(total) };
                let seg = (arc.partition_point(|&a| a <= s).max(1) - 1).min(n - 1);
                let (a, b) = (points[seg], points[seg + 1]);
                let u = ((s - arc[seg]) / (arc[seg + 1] - arc[seg])).clamp(0.0, 1.0);

                let len = |i: usize| arc[i + 1] - arc[i];
                // Corner `j` joins segment `j − 1` (cyclically) to segment `j`.
                let corner = |j: usize| -> Option<(f64, f64, f64)> {
                    let prev = match j {
                        0 if *cyclic => n - 1,
                        0 => return None,
                        j if j == n && !*cyclic => return None,
                        j => (j - 1) % n,
                    };
                    let next = j % n;
                    let r = TURN_RADIUS.min(len(prev) / 2.0).min(len(next) / 2.0);
                    Some((r, theta[prev], theta[next]))
                };
                let mut heading = theta[seg];
                if let Some((r, from, to)) = corner(seg) {
                    let d = s - arc[seg];
                    if d < r {
                        heading = from + angle_diff(from, to) * (0.5 + d / (2.0 * r));
                    }
                }
                if let Some((r, from, to)) = corner(seg + 1) {
                    let d = arc[seg + 1] - s;
                    if d < r {
                        heading = from + angle_diff(from, to) * (0.5 - d / (2.0 * r));
                    }
                }
                (a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]), heading)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct Walker {
    dims: BodyDimensions,
    route: Route,
    enter: f64,
    leave: f64,
    head_start: f64,
    phase: f64,
    swing: SwingSpec,
}

impl Walker {
    pub(super) fn build_all(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Vec<Walker> {
        let scale = |rng: &mut ChaCha8Rng| {
            if spec.body_scale_jitter > 0.0 {
                rng.random_range(1.0 - spec.body_scale_jitter..1.0 + spec.body_scale_jitter)
            } else {
                1.0
            }
        };
        if spec.persons.is_empty() {
            let [x0, x1, y0, y1] = spec.area;
            (0..spec.people)
                .map(|_| {
                    let dims = spec.body.scaled(scale(rng));
                    let phase = rng.random_range(0.0..std::f64::consts::TAU);
                    let mut points = vec![[rng.random_range(x0..x1), rng.random_range(y0..y1)]];
                    let mut length = 0.0;
                    while length < spec.walk_speed * spec.duration + 1.0 {
                        let p = [rng.random_range(x0..x1), rng.random_range(y0..y1)];
                        let q = points.last().unwrap();
                        length += ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                        points.push(p);
                    }
                    Walker {
                        dims,
                        route: Route::line(points, spec.walk_speed, false),
                        enter: 0.0,
                        leave: f64::INFINITY,
                        head_start: 0.0,
                        phase,
                        swing: spec.swing,
                    }
                })
                .collect()
        } else {
            spec.persons
                .iter()
                .map(|p| {
                    let dims = spec.body.scaled(scale(rng));
                    let drawn = rng.random_range(0.0..std::f64::consts::TAU);
                    let route = match &p.path {
                        PathSpec::Static { at, heading } => Route::Still {
                            at: *at,
                            heading: *heading,
                        },
                        PathSpec::Patrol { from, to, speed } => Route::line(vec![*from, *to], *speed, true),
                        PathSpec::Waypoints { points, .. } if points.len() == 1 => Route::Still {
                            at: points[0],
                            heading: 0.0,
                        },
                        PathSpec::Waypoints { points, speed } => Route::line(points.clone(), *speed, false),
                    };
                    Walker {
                        dims,
                        route,
                        enter: p.enter,
                        leave: p.leave.unwrap_or(f64::INFINITY),
                        head_start: p.head_start,
                        phase: p.phase.unwrap_or(drawn),
                        swing: spec.swing,
                    }
                })
                .collect()
        }
    }

    pub(super) fn present(&self, t: f64) -> bool {
        t >= self.enter && t < self.leave
    }

    pub(super) fn pose(&self, t: f64) -> [Point3; JOINT_COUNT] {
        let (x, y, heading) = self.route.at(t - self.enter + self.head_start);
        let s = self.swing;
        let th = std::f64::consts::TAU * s.frequency * t + self.phase;
        let (sin, half) = (th.sin(), |v: f64| (1.0 + v) / 2.0);
        let angles = LimbAngles {
            l_shoulder: s.arm_amplitude * sin,
            r_shoulder: -s.arm_amplitude * sin,
            l_elbow: s.elbow + s.elbow_amplitude * half(sin),
            r_elbow: s.elbow + s.elbow_amplitude * half(-sin),
            l_hip: -s.leg_amplitude * sin,
            r_hip: s.leg_amplitude * sin,
            l_knee: s.leg_amplitude * half(sin),
            r_knee: s.leg_amplitude * half(-sin),
        };
        pose(&self.dims, x, y, heading, &angles)
    }
}
