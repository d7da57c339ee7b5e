//! Candidate path generation and file I/O.
//!
//! The sampler is a deliberately simple waypoint tree: random intermediate
//! waypoints between start and goal, rolled out with a curvature-clamped
//! steering model (each step turns by at most `max_curvature * step`, so
//! the bound holds by construction). It stands in for a full closed-loop
//! planner; the risk computation is agnostic to where paths come from.

use crate::geometry::{normalize_angle, Pose2};
use crate::risk::Obstacle;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path as FsPath;

/// Largest heading change allowed between consecutive stored poses.
pub const MAX_HEADING_STEP: f64 = 0.3;

/// Kinematic limits for the sampler.
#[derive(Debug, Clone, Copy)]
pub struct Kinematics {
    /// Curvature bound in 1/m.
    pub max_curvature: f64,
    /// Rollout step length in meters.
    pub step: f64,
}

impl Default for Kinematics {
    fn default() -> Self {
        Self {
            max_curvature: 0.2,
            step: 0.5,
        }
    }
}

/// Timestamped pose sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPose {
    pub t: f64,
    pub pose: Pose2,
}

/// Timed pose sequence with strictly increasing timestamps and bounded
/// per-step heading change.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub id: String,
    poses: Vec<TimedPose>,
}

impl Path {
    pub fn new(id: String, poses: Vec<TimedPose>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::InvalidInput(format!("path '{id}' has no poses")));
        }
        for tp in &poses {
            if !tp.t.is_finite() || !tp.pose.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "path '{id}' has a non-finite pose or timestamp"
                )));
            }
        }
        for w in poses.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::InvalidInput(format!(
                    "path '{id}': timestamps not strictly increasing ({} then {})",
                    w[0].t, w[1].t
                )));
            }
            let dtheta = normalize_angle(w[1].pose.theta - w[0].pose.theta).abs();
            if dtheta > MAX_HEADING_STEP + 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "path '{id}': heading step {dtheta:.3} rad exceeds {MAX_HEADING_STEP}"
                )));
            }
        }
        Ok(Self { id, poses })
    }

    pub fn timed_poses(&self) -> &[TimedPose] {
        &self.poses
    }

    pub fn poses(&self) -> Vec<Pose2> {
        self.poses.iter().map(|tp| tp.pose).collect()
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Polyline length of the pose positions.
    pub fn arc_length(&self) -> f64 {
        self.poses
            .windows(2)
            .map(|w| {
                let dx = w[1].pose.x - w[0].pose.x;
                let dy = w[1].pose.y - w[0].pose.y;
                (dx * dx + dy * dy).sqrt()
            })
            .sum()
    }
}

/// Generate `n` curvature-bounded candidate paths from `start` toward
/// `goal`.
///
/// Each attempt samples a few lateral waypoints along the corridor and
/// rolls a constant-step steering model through them. For planning only,
/// obstacles are treated as deterministic at their mean location: attempts
/// whose poses land inside a mean obstacle are resampled up to a retry
/// budget and then emitted regardless (tight paths are useful output).
pub fn generate_paths(
    start: Pose2,
    goal: Pose2,
    n: usize,
    kin: Kinematics,
    seed: u64,
    obstacles: &[Obstacle],
) -> Result<Vec<Path>> {
    if n == 0 {
        return Err(Error::InvalidInput("asked for zero paths".into()));
    }
    let dist = ((goal.x - start.x).powi(2) + (goal.y - start.y).powi(2)).sqrt();
    if dist < 1e-9 {
        return Err(Error::InvalidInput("start and goal coincide".into()));
    }
    if !(kin.max_curvature > 0.0 && kin.step > 0.0) {
        return Err(Error::InvalidInput("kinematic limits must be positive".into()));
    }
    let mean_polys: Vec<Vec<[f64; 2]>> = obstacles
        .iter()
        .map(|o| {
            let m = o.density.mean();
            o.shape.transformed(&Pose2::new(m[0], m[1], 0.0))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    const RETRIES: usize = 25;
    for i in 0..n {
        let mut emitted = None;
        let mut fallback = None;
        for _ in 0..RETRIES {
            let waypoints = sample_waypoints(&mut rng, start, goal, dist);
            let Some(poses) = rollout(start, goal, &waypoints, kin) else {
                continue;
            };
            let clean = !poses.iter().any(|p| {
                mean_polys
                    .iter()
                    .any(|poly| point_in_convex_or_ring(poly, [p.pose.x, p.pose.y]))
            });
            if clean {
                emitted = Some(poses);
                break;
            }
            fallback = Some(poses);
        }
        let poses = emitted.or(fallback).ok_or_else(|| {
            Error::GenerationFailed(format!(
                "no rollout reached the goal for path {i} after {RETRIES} attempts"
            ))
        })?;
        out.push(Path::new(format!("p{i:03}"), poses)?);
    }
    Ok(out)
}

fn sample_waypoints(rng: &mut ChaCha8Rng, start: Pose2, goal: Pose2, dist: f64) -> Vec<[f64; 2]> {
    let dir = [(goal.x - start.x) / dist, (goal.y - start.y) / dist];
    let lateral = [-dir[1], dir[0]];
    let spread = (0.08 * dist).max(0.5);
    let count = rng.random_range(1..=3usize);
    let mut fractions: Vec<f64> = (0..count).map(|_| rng.random_range(0.2..0.8)).collect();
    fractions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fractions
        .iter()
        .map(|&f| {
            let off: f64 = rng.random_range(-2.0..2.0) * spread;
            [
                start.x + f * dist * dir[0] + off * lateral[0],
                start.y + f * dist * dir[1] + off * lateral[1],
            ]
        })
        .collect()
}

/// Steer through the waypoints and then the goal; `None` when the rollout
/// orbits without reaching the goal.
fn rollout(start: Pose2, goal: Pose2, waypoints: &[[f64; 2]], kin: Kinematics) -> Option<Vec<TimedPose>> {
    const SPEED: f64 = 1.0;
    let max_turn = (kin.max_curvature * kin.step).min(MAX_HEADING_STEP);
    let mut targets: Vec<[f64; 2]> = waypoints.to_vec();
    targets.push([goal.x, goal.y]);
    let direct = ((goal.x - start.x).powi(2) + (goal.y - start.y).powi(2)).sqrt();
    let budget = ((6.0 * direct / kin.step) as usize).max(400);
    let mut poses = vec![TimedPose { t: 0.0, pose: start }];
    let mut cur = start;
    let mut t = 0.0;
    let mut target_idx = 0;
    for _ in 0..budget {
        let tgt = targets[target_idx];
        let dx = tgt[0] - cur.x;
        let dy = tgt[1] - cur.y;
        let d = (dx * dx + dy * dy).sqrt();
        let last = target_idx + 1 == targets.len();
        let accept = if last { kin.step } else { 3.0 * kin.step };
        if d <= accept {
            if last {
                return Some(poses);
            }
            target_idx += 1;
            continue;
        }
        let bearing = dy.atan2(dx);
        let turn = normalize_angle(bearing - cur.theta).clamp(-max_turn, max_turn);
        cur = Pose2::new(
            cur.x + kin.step * (cur.theta + turn).cos(),
            cur.y + kin.step * (cur.theta + turn).sin(),
            cur.theta + turn,
        );
        t += kin.step / SPEED;
        poses.push(TimedPose { t, pose: cur });
    }
    None
}

fn point_in_convex_or_ring(verts: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = verts.len();
    let mut inside = false;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[derive(Serialize, Deserialize)]
struct PathsFile {
    paths: Vec<PathJson>,
}

#[derive(Serialize, Deserialize)]
struct PathJson {
    id: String,
    /// `[t, x, y, theta]` rows, SI units and radians.
    poses: Vec<[f64; 4]>,
}

/// Load paths from the JSON path file format. An empty file yields an
/// empty list; invariant violations name the offending path id.
pub fn load_paths(file: &FsPath) -> Result<Vec<Path>> {
    let text = std::fs::read_to_string(file)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let parsed: PathsFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
    parsed
        .paths
        .into_iter()
        .map(|pj| {
            let poses = pj
                .poses
                .iter()
                .map(|row| TimedPose {
                    t: row[0],
                    pose: Pose2::new(row[1], row[2], row[3]),
                })
                .collect();
            Path::new(pj.id, poses)
        })
        .collect()
}

/// Serialize paths to the JSON path file format (atomically).
pub fn save_paths(paths: &[Path], file: &FsPath) -> Result<()> {
    let doc = PathsFile {
        paths: paths
            .iter()
            .map(|p| PathJson {
                id: p.id.clone(),
                poses: p
                    .poses
                    .iter()
                    .map(|tp| [tp.t, tp.pose.x, tp.pose.y, tp.pose.theta])
                    .collect(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    crate::render::write_atomic(file, text.as_bytes())
}
