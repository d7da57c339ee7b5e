//! Scene description: JSON schema, validation, automatic grid sizing, and
//! synthetic scene templates (car-park rows and random clutter).

use crate::fields::LocationDensity;
use crate::geometry::{GridSpec, Polygon, Pose2};
use crate::paths::Path;
use crate::risk::Obstacle;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path as FsPath;

/// Default grid resolution in meters per cell.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

/// On-disk scenario document. Field order is the serialization order, so
/// writes are byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub grid: GridJson,
    pub robot: RobotJson,
    pub obstacles: Vec<ObstacleJson>,
    /// `[x, y, theta]`
    pub start: [f64; 3],
    pub goal: [f64; 3],
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridJson {
    Auto(String),
    Fixed {
        origin: [f64; 2],
        resolution: f64,
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotJson {
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstacleJson {
    pub id: String,
    /// Body-frame shape with the mean orientation baked in.
    pub vertices: Vec<[f64; 2]>,
    pub mean: [f64; 2],
    /// 2x2 location covariance in m^2.
    pub cov: [[f64; 2]; 2],
    /// Optional outward shape expansion absorbing rotation uncertainty.
    #[serde(default)]
    pub inflation: f64,
}

/// Grid selection after validation.
#[derive(Debug, Clone)]
pub enum GridChoice {
    Auto,
    Fixed(GridSpec),
}

/// Validated in-memory scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridChoice,
    pub robot: Polygon,
    pub obstacles: Vec<Obstacle>,
    pub start: Pose2,
    pub goal: Pose2,
    pub seed: u64,
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<Scenario> {
        let grid = match &self.grid {
            GridJson::Auto(tag) if tag == "auto" => GridChoice::Auto,
            GridJson::Auto(tag) => {
                return Err(Error::Parse(format!(
                    "grid must be \"auto\" or an explicit spec, got \"{tag}\""
                )))
            }
            GridJson::Fixed {
                origin,
                resolution,
                width,
                height,
            } => GridChoice::Fixed(GridSpec::new(*origin, *resolution, *width, *height)?),
        };
        let robot = Polygon::new(self.robot.vertices.clone())
            .map_err(|e| Error::Parse(format!("robot: {e}")))?;
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for o in &self.obstacles {
            let shape = Polygon::new(o.vertices.clone())
                .map_err(|e| Error::Parse(format!("obstacle '{}': {e}", o.id)))?;
            let shape = if o.inflation > 0.0 {
                shape
                    .inflated(o.inflation)
                    .map_err(|e| Error::Parse(format!("obstacle '{}': {e}", o.id)))?
            } else {
                shape
            };
            let density = LocationDensity::gaussian(o.mean, o.cov)
                .map_err(|e| Error::Parse(format!("obstacle '{}': {e}", o.id)))?;
            obstacles.push(Obstacle::new(o.id.clone(), shape, density));
        }
        for (name, p) in [("start", self.start), ("goal", self.goal)] {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse(format!("{name} pose must be finite")));
            }
        }
        Ok(Scenario {
            grid,
            robot,
            obstacles,
            start: Pose2::new(self.start[0], self.start[1], self.start[2]),
            goal: Pose2::new(self.goal[0], self.goal[1], self.goal[2]),
            seed: self.seed,
        })
    }
}

pub fn load_scenario(file: &FsPath) -> Result<Scenario> {
    load_scenario_file(file)?.validate()
}

pub fn load_scenario_file(file: &FsPath) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(file)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", file.display())))
}

pub fn save_scenario_file(doc: &ScenarioFile, file: &FsPath) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::Parse(e.to_string()))?;
    crate::render::write_atomic(file, text.as_bytes())
}

/// Resolve the scenario grid: an explicit grid is used as-is; "auto" takes
/// the bounding box of all obstacle supports and path extents, padded by
/// `4 sigma` cells of ridge support plus three times the largest
/// positional standard deviation, and snaps the origin to the resolution
/// lattice.
pub fn resolve_grid(
    scn: &Scenario,
    paths: &[Path],
    resolution: f64,
    sigma_cells: f64,
) -> Result<GridSpec> {
    if let GridChoice::Fixed(spec) = &scn.grid {
        return Ok(spec.clone());
    }
    let mut lo = [f64::INFINITY, f64::INFINITY];
    let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY];
    let mut include = |p: [f64; 2], r: f64| {
        lo[0] = lo[0].min(p[0] - r);
        lo[1] = lo[1].min(p[1] - r);
        hi[0] = hi[0].max(p[0] + r);
        hi[1] = hi[1].max(p[1] + r);
    };
    let robot_radius = scn.robot.max_radius();
    include([scn.start.x, scn.start.y], robot_radius);
    include([scn.goal.x, scn.goal.y], robot_radius);
    let mut max_std = 0.0f64;
    for o in &scn.obstacles {
        let m = o.density.mean();
        include(m, o.shape.max_radius());
        let (_, hi_sigma) = o.density.sigma_range();
        max_std = max_std.max(hi_sigma);
    }
    for p in paths {
        for tp in p.timed_poses() {
            include([tp.pose.x, tp.pose.y], robot_radius);
        }
    }
    if !lo[0].is_finite() {
        return Err(Error::InvalidInput("auto grid has no content to bound".into()));
    }
    let pad = 4.0 * sigma_cells * resolution + 3.0 * max_std;
    let pad_cells = (pad / resolution).ceil() as i64;
    let x0 = (lo[0] / resolution).floor() as i64 - pad_cells;
    let y0 = (lo[1] / resolution).floor() as i64 - pad_cells;
    let x1 = (hi[0] / resolution).ceil() as i64 + pad_cells;
    let y1 = (hi[1] / resolution).ceil() as i64 + pad_cells;
    GridSpec::new(
        [x0 as f64 * resolution, y0 as f64 * resolution],
        resolution,
        (x1 - x0 + 1) as usize,
        (y1 - y0 + 1) as usize,
    )
}

/// Scene templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Carpark,
    Random,
}

impl Template {
    pub fn default_std(&self) -> f64 {
        match self {
            Template::Carpark => 0.3,
            Template::Random => 0.7,
        }
    }
}

const CAR_LENGTH: f64 = 4.0;
const CAR_WIDTH: f64 = 2.0;
/// Car slot pitch along a row and pitch between rows (car + aisle).
const SLOT_PITCH: f64 = 2.6;
const ROW_PITCH: f64 = 9.5;

fn car_vertices() -> Vec<[f64; 2]> {
    let hw = CAR_WIDTH / 2.0;
    let hl = CAR_LENGTH / 2.0;
    vec![[-hw, -hl], [hw, -hl], [hw, hl], [-hw, hl]]
}

/// Generate a scenario from a template with non-overlapping mean
/// placements. Deterministic for a given seed.
pub fn generate_scenario(template: Template, k: usize, std: f64, seed: u64) -> Result<ScenarioFile> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one obstacle".into()));
    }
    if !(std.is_finite() && std >= 0.0) {
        return Err(Error::InvalidInput(format!("invalid std {std}")));
    }
    match template {
        Template::Carpark => carpark_scenario(k, std, seed),
        Template::Random => random_scenario(k, std, seed),
    }
}

/// Rows of parked cars separated by driving aisles; start and goal sit at
/// the two ends of the middle aisle.
fn carpark_scenario(k: usize, std: f64, seed: u64) -> Result<ScenarioFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = ((k as f64 * ROW_PITCH / SLOT_PITCH).sqrt() / 2.0).ceil().max(3.0) as usize;
    let rows = k.div_ceil(cols);
    let mut obstacles = Vec::with_capacity(k);
    'fill: for row in 0..rows {
        for col in 0..cols {
            if obstacles.len() == k {
                break 'fill;
            }
            let jx: f64 = rng.random_range(-0.1..0.1);
            let jy: f64 = rng.random_range(-0.15..0.15);
            obstacles.push(ObstacleJson {
                id: format!("car{:03}", obstacles.len()),
                vertices: car_vertices(),
                mean: [
                    col as f64 * SLOT_PITCH + jx,
                    row as f64 * ROW_PITCH + jy,
                ],
                cov: [[std * std, 0.0], [0.0, std * std]],
                inflation: 0.0,
            });
        }
    }
    // Middle aisle, between car rows.
    let aisle_row = (rows / 2).max(1);
    let aisle_y = (aisle_row as f64 - 0.5) * ROW_PITCH;
    let x_max = (cols - 1) as f64 * SLOT_PITCH;
    Ok(ScenarioFile {
        grid: GridJson::Auto("auto".into()),
        robot: RobotJson {
            vertices: Polygon::rectangle(4.0, 2.0).unwrap().vertices().to_vec(),
        },
        obstacles,
        start: [-6.0, aisle_y, 0.0],
        goal: [x_max + 6.0, aisle_y, 0.0],
        seed,
    })
}

/// Randomly placed cars with random baked-in orientation in a fixed-margin
/// arena; placement retries until shapes stop overlapping.
fn random_scenario(k: usize, std: f64, seed: u64) -> Result<ScenarioFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = ((k as f64) * 30.0).sqrt().max(20.0);
    let mut placed: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut obstacles = Vec::with_capacity(k);
    for i in 0..k {
        let mut ok = false;
        for _ in 0..1000 {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let mean = [
                rng.random_range(0.0..side),
                rng.random_range(0.0..side),
            ];
            let pose = Pose2::new(0.0, 0.0, theta);
            let shape = Polygon::rectangle(CAR_LENGTH, CAR_WIDTH).unwrap();
            let verts = shape.transformed(&pose);
            // Separation enforced on the shape grown by half the desired
            // clearance, so mean placements keep a real gap.
            let grown = Polygon::new(verts.clone()).unwrap().inflated(0.2).unwrap();
            let world: Vec<[f64; 2]> = grown
                .vertices()
                .iter()
                .map(|v| [v[0] + mean[0], v[1] + mean[1]])
                .collect();
            let clear = placed
                .iter()
                .all(|other| !crate::geometry::convex_rings_intersect(&world, other));
            if clear {
                placed.push(world);
                obstacles.push(ObstacleJson {
                    id: format!("car{i:03}"),
                    vertices: verts,
                    mean,
                    cov: [[std * std, 0.0], [0.0, std * std]],
                    inflation: 0.0,
                });
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::PlacementFailed(format!(
                "could not place obstacle {i} of {k} after 1000 attempts"
            )));
        }
    }
    Ok(ScenarioFile {
        grid: GridJson::Auto("auto".into()),
        robot: RobotJson {
            vertices: Polygon::rectangle(4.0, 2.0).unwrap().vertices().to_vec(),
        },
        obstacles,
        start: [-5.0, side / 2.0, 0.0],
        goal: [side + 5.0, side / 2.0, 0.0],
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carpark_has_requested_cars() {
        let doc = generate_scenario(Template::Carpark, 35, 0.3, 1).unwrap();
        assert_eq!(doc.obstacles.len(), 35);
        let scn = doc.validate().unwrap();
        assert_eq!(scn.obstacles.len(), 35);
    }

    #[test]
    fn template_generation_is_deterministic() {
        let a = serde_json::to_string(&generate_scenario(Template::Carpark, 12, 0.3, 9).unwrap())
            .unwrap();
        let b = serde_json::to_string(&generate_scenario(Template::Carpark, 12, 0.3, 9).unwrap())
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_template_means_do_not_overlap() {
        let doc = generate_scenario(Template::Random, 20, 0.7, 3).unwrap();
        let scn = doc.validate().unwrap();
        for (i, a) in scn.obstacles.iter().enumerate() {
            for b in scn.obstacles.iter().skip(i + 1) {
                let ma = a.density.mean();
                let mb = b.density.mean();
                let d = ((ma[0] - mb[0]).powi(2) + (ma[1] - mb[1]).powi(2)).sqrt();
                assert!(d > 1.0, "means {ma:?} and {mb:?} too close");
            }
        }
    }

    #[test]
    fn scenario_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("scenario.json");
        let doc = generate_scenario(Template::Carpark, 8, 0.3, 5).unwrap();
        save_scenario_file(&doc, &file).unwrap();
        let loaded = load_scenario_file(&file).unwrap();
        assert_eq!(
            serde_json::to_string(&doc).unwrap(),
            serde_json::to_string(&loaded).unwrap()
        );
        loaded.validate().unwrap();
    }

    #[test]
    fn bad_grid_tag_rejected() {
        let mut doc = generate_scenario(Template::Carpark, 3, 0.3, 0).unwrap();
        doc.grid = GridJson::Auto("automatic".into());
        assert!(matches!(doc.validate(), Err(Error::Parse(_))));
    }

    #[test]
    fn auto_grid_covers_everything() {
        let doc = generate_scenario(Template::Carpark, 10, 0.3, 2).unwrap();
        let scn = doc.validate().unwrap();
        let spec = resolve_grid(&scn, &[], DEFAULT_RESOLUTION, 2.0).unwrap();
        for o in &scn.obstacles {
            let m = o.density.mean();
            let (ix, iy) = spec.nearest_cell(m);
            assert!(spec.contains_cell(ix, iy), "mean {m:?} outside grid");
        }
        let (sx, sy) = spec.nearest_cell([scn.start.x, scn.start.y]);
        assert!(spec.contains_cell(sx, sy));
    }

    #[test]
    fn explicit_grid_is_respected() {
        let mut doc = generate_scenario(Template::Carpark, 3, 0.3, 0).unwrap();
        doc.grid = GridJson::Fixed {
            origin: [-1.0, -1.0],
            resolution: 0.1,
            width: 50,
            height: 40,
        };
        let scn = doc.validate().unwrap();
        let spec = resolve_grid(&scn, &[], DEFAULT_RESOLUTION, 2.0).unwrap();
        assert_eq!((spec.width, spec.height), (50, 40));
        assert_eq!(spec.resolution, 0.1);
    }

    #[test]
    fn inflation_expands_obstacles() {
        let mut doc = generate_scenario(Template::Carpark, 1, 0.3, 0).unwrap();
        doc.obstacles[0].inflation = 0.25;
        let scn = doc.validate().unwrap();
        let inflated = scn.obstacles[0].shape.area();
        assert!(inflated > CAR_LENGTH * CAR_WIDTH + 2.0);
    }
}
