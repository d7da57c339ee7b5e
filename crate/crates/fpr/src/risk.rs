//! Collision-risk bounds and exact baselines.
//!
//! The precomputation folds all K obstacles into two grids:
//!
//! ```text
//! G    = sum_k (1 / area(B_k)) (I_{B_k} * p_k)      occupancy-rate field
//! dGs  = 1/2 sum_k (ridge(B_k, sigma) * p_k)        smoothed contour field
//! ```
//!
//! and each path then costs two windowed Riemann sums:
//!
//! ```text
//! F_D = integral(ridge(A, sigma) * dGs) + integral(I_A * G)
//! ```
//!
//! `F_D` bounds the expected number of colliding obstacles, hence the
//! collision probability; it is reported unclamped and may exceed 1. The
//! area weight `1 / area(B_k)` uses the rasterized cell count, which makes
//! the interior-overlap identity exact on the grid and pins the field mass
//! `integral(G) = K` up to kernel truncation.

use crate::fields::{
    convolve_density, density_field, gaussian_kernel, integrate, integrate_product, ridge,
    LocationDensity,
};
use crate::geometry::{
    minkowski_dilate, rasterize_polygon, swept_indicator, GridSpec, Polygon, Pose2, ScalarField,
};
use crate::oracle::{mc_total, McEstimate};
use crate::paths::Path;
use crate::{Error, Result};
use std::time::Instant;

/// Default smoothing scale for contour ridges, in grid cells.
pub const DEFAULT_SIGMA_CELLS: f64 = 2.0;

/// Obstacle of known shape and uncertain location. The shape is given in a
/// body frame with the mean orientation baked in; the density describes the
/// world location of the body origin.
#[derive(Debug, Clone)]
pub struct Obstacle {
    pub id: String,
    pub shape: Polygon,
    pub density: LocationDensity,
}

impl Obstacle {
    pub fn new(id: String, shape: Polygon, density: LocationDensity) -> Self {
        Self { id, shape, density }
    }
}

/// The precomputed field pair, reusable across all candidate paths.
/// Immutable after construction and safe to share between threads.
#[derive(Debug, Clone)]
pub struct RiskFields {
    g: ScalarField,
    dg_sigma: ScalarField,
    sigma_cells: f64,
    k_count: usize,
}

impl RiskFields {
    pub fn g(&self) -> &ScalarField {
        &self.g
    }

    pub fn dg_sigma(&self) -> &ScalarField {
        &self.dg_sigma
    }

    pub fn sigma_cells(&self) -> f64 {
        self.sigma_cells
    }

    pub fn obstacle_count(&self) -> usize {
        self.k_count
    }

    pub fn spec(&self) -> &GridSpec {
        self.g.spec()
    }
}

/// Accumulate the obstacle set into the `(G, dGs)` field pair.
///
/// Each obstacle is rasterized at its mean location on a padded patch
/// window, ridged there, convolved with its centered location density, and
/// accumulated in index order (fixed order keeps runs bit-reproducible).
pub fn precompute_fields(
    obstacles: &[Obstacle],
    spec: &GridSpec,
    sigma_cells: f64,
) -> Result<RiskFields> {
    if obstacles.is_empty() {
        return Err(Error::InvalidInput("no obstacles to precompute".into()));
    }
    let smooth = gaussian_kernel(sigma_cells)?;
    let ridge_radius = smooth.radius();
    let res = spec.resolution;
    let mut g = ScalarField::zeros(spec.clone());
    let mut dg = ScalarField::zeros(spec.clone());
    for obs in obstacles {
        if obs.shape.area() < spec.cell_area() {
            return Err(Error::PointObstacle(format!(
                "obstacle '{}' area {:.4} m^2 is below one grid cell; use point_bound",
                obs.id,
                obs.shape.area()
            )));
        }
        let mean = obs.density.mean();
        let centered = obs.density.centered();
        let (_, sigma_hi) = obs.density.sigma_range();
        let density_radius = ((4.0 * sigma_hi / res).ceil() as usize) + 1;
        let pad = ridge_radius + density_radius + 1;
        let patch_spec = patch_window(spec, &obs.shape, mean, pad)?;
        let mean_pose = Pose2::new(mean[0], mean[1], 0.0);
        let ind = rasterize_polygon(&obs.shape, &mean_pose, &patch_spec)?;
        let cell_count_area = integrate(&ind);
        if cell_count_area <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "obstacle '{}' does not rasterize on the grid",
                obs.id
            )));
        }
        let contour = ridge(&ind, sigma_cells)?;
        let occupancy = convolve_density(&ind, &centered)?;
        let contour_rate = convolve_density(&contour, &centered)?;
        g.add_scaled(&occupancy.field, 1.0 / cell_count_area)?;
        dg.add_scaled(&contour_rate.field, 0.5)?;
    }
    Ok(RiskFields {
        g,
        dg_sigma: dg,
        sigma_cells,
        k_count: obstacles.len(),
    })
}

/// Lattice-aligned window around a shape posed at `mean`, padded by `pad`
/// cells, independent of the parent grid extent.
fn patch_window(spec: &GridSpec, shape: &Polygon, mean: [f64; 2], pad: usize) -> Result<GridSpec> {
    let (lo, hi) = shape.bbox();
    let res = spec.resolution;
    let x0 = ((lo[0] + mean[0] - spec.origin[0]) / res).floor() as i64 - pad as i64;
    let y0 = ((lo[1] + mean[1] - spec.origin[1]) / res).floor() as i64 - pad as i64;
    let x1 = ((hi[0] + mean[0] - spec.origin[0]) / res).ceil() as i64 + pad as i64;
    let y1 = ((hi[1] + mean[1] - spec.origin[1]) / res).ceil() as i64 + pad as i64;
    GridSpec::new(
        [
            spec.origin[0] + x0 as f64 * res,
            spec.origin[1] + y0 as f64 * res,
        ],
        res,
        (x1 - x0 + 1) as usize,
        (y1 - y0 + 1) as usize,
    )
}

/// Evaluate the risk bound `F_D` for one swept indicator against the
/// precomputed fields. Integration is restricted to the swept bounding box
/// padded by the kernel radius, so the per-path cost does not depend on
/// the number of obstacles or the grid extent.
pub fn fpr_bound(swept: &ScalarField, rf: &RiskFields) -> Result<f64> {
    if swept.spec() != rf.g.spec() {
        return Err(Error::InvalidInput(
            "swept indicator is not on the risk-field grid".into(),
        ));
    }
    if !swept.is_indicator() {
        return Err(Error::InvalidInput("swept field must be an indicator".into()));
    }
    let Some((x0, y0, x1, y1)) = swept.support_bbox() else {
        return Ok(0.0);
    };
    let margin = gaussian_kernel(rf.sigma_cells)?.radius();
    let window = swept.crop(
        x0.saturating_sub(margin),
        y0.saturating_sub(margin),
        x1 + margin,
        y1 + margin,
    );
    let contour = ridge(&window, rf.sigma_cells)?;
    let near = integrate_product(&contour, &rf.dg_sigma)?;
    let overlap = integrate_product(&window, &rf.g)?;
    let f_d = near + overlap;
    if !f_d.is_finite() {
        return Err(Error::Numerical("non-finite risk bound".into()));
    }
    Ok(f_d)
}

/// Superposition of point-obstacle densities on a grid.
pub fn point_field(points: &[LocationDensity], spec: &GridSpec) -> ScalarField {
    let mut g = ScalarField::zeros(spec.clone());
    for p in points {
        let (f, _) = density_field(p, spec);
        g.add_scaled(&f, 1.0).expect("same spec");
    }
    g
}

/// Linear risk bound for point obstacles: the swept-area integral of the
/// summed densities. Equals the sum of per-point integrals exactly (up to
/// float reassociation) by linearity of the grid sum.
pub fn point_bound(points: &[LocationDensity], swept: &ScalarField) -> Result<f64> {
    let g = point_field(points, swept.spec());
    integrate_product(swept, &g)
}

/// Exact collision probability for one finite obstacle, with the fraction
/// of its density mass lost to the grid boundary.
#[derive(Debug, Clone, Copy)]
pub struct ExactRisk {
    pub probability: f64,
    pub truncated_mass: f64,
}

/// Exact (to grid resolution) collision probability: integrate the
/// location density over the swept area dilated by the reflected obstacle
/// shape.
///
/// The reflection matters for asymmetric shapes: the obstacle at location
/// `r` hits the swept set `A` exactly when `r` lies in `A ⊕ (-B)`.
pub fn laugier_exact(swept: &ScalarField, obs: &Obstacle) -> Result<ExactRisk> {
    let res = swept.spec().resolution;
    let reflected = obs.shape.reflected();
    // The support of a discrete correlation insets the true dilated region
    // by half a cell per side (the two cell-center roundings compound).
    // Growing the shape by half a cell before rasterizing cancels that
    // bias; convex obstacle shapes are the supported baseline geometry.
    let reflected = if reflected.is_convex() {
        reflected.inflated(res / 2.0)?
    } else {
        reflected
    };
    let (lo, hi) = reflected.bbox();
    let x0 = (lo[0] / res).floor() as i64 - 1;
    let y0 = (lo[1] / res).floor() as i64 - 1;
    let x1 = (hi[0] / res).ceil() as i64 + 1;
    let y1 = (hi[1] / res).ceil() as i64 + 1;
    let bspec = GridSpec::new(
        [x0 as f64 * res, y0 as f64 * res],
        res,
        (x1 - x0 + 1) as usize,
        (y1 - y0 + 1) as usize,
    )?;
    let refl_ind = rasterize_polygon(&reflected, &Pose2::identity(), &bspec)?;
    let dilated = minkowski_dilate(swept, &refl_ind)?;
    let (p_field, captured) = density_field(&obs.density, swept.spec());
    let p = integrate_product(&dilated, &p_field)?.clamp(0.0, 1.0);
    Ok(ExactRisk {
        probability: p,
        truncated_mass: (1.0 - captured).max(0.0),
    })
}

/// Combine per-obstacle collision probabilities into the exact total and
/// the linear union bound: `p_d = 1 - prod(1 - p_k)`, `p_d_bar = sum p_k`.
pub fn exact_total(per_obstacle: &[f64]) -> Result<(f64, f64)> {
    let mut product = 1.0;
    let mut sum = 0.0;
    for &p in per_obstacle {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        product *= 1.0 - p;
        sum += p;
    }
    let p_d = (1.0 - product).clamp(0.0, 1.0);
    Ok((p_d.min(sum), sum))
}

/// Per-path evaluation record.
#[derive(Debug, Clone)]
pub struct RiskReport {
    pub path_id: String,
    /// Unclamped risk bound; may exceed 1 (it bounds an expected count).
    pub f_d: f64,
    pub p_d_exact: Option<f64>,
    pub p_d_mc: Option<McEstimate>,
    /// Shared across the batch; the field pair is built once.
    pub precompute_ms: f64,
    pub eval_ms: f64,
    pub error: Option<String>,
}

impl RiskReport {
    /// The bound clamped to [0, 1] for display as a probability.
    pub fn f_d_prob(&self) -> f64 {
        self.f_d.clamp(0.0, 1.0)
    }
}

/// Evaluation options for a batch of paths.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub sigma_cells: f64,
    /// Also compute the exact per-obstacle baseline (slow path).
    pub exact: bool,
    /// Monte-Carlo sample count per path, when wanted.
    pub mc_samples: Option<u64>,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            sigma_cells: DEFAULT_SIGMA_CELLS,
            exact: false,
            mc_samples: None,
            seed: 0,
        }
    }
}

/// Batch output: the reports in input order plus the shared precompute
/// time.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub reports: Vec<RiskReport>,
    pub precompute_ms: f64,
}

/// Evaluate a batch of paths: precompute the field pair once, then rate
/// each path independently. Per-path failures are recorded in the report
/// rather than aborting the batch.
pub fn evaluate_paths(
    robot: &Polygon,
    obstacles: &[Obstacle],
    spec: &GridSpec,
    paths: &[Path],
    opts: &EvalOptions,
) -> Result<Evaluation> {
    let t0 = Instant::now();
    let rf = precompute_fields(obstacles, spec, opts.sigma_cells)?;
    let precompute_ms = t0.elapsed().as_secs_f64() * 1e3;
    let reports = paths
        .iter()
        .map(|path| {
            let t1 = Instant::now();
            match evaluate_one(robot, obstacles, &rf, path, opts) {
                Ok((f_d, p_d_exact, p_d_mc)) => RiskReport {
                    path_id: path.id.clone(),
                    f_d,
                    p_d_exact,
                    p_d_mc,
                    precompute_ms,
                    eval_ms: t1.elapsed().as_secs_f64() * 1e3,
                    error: None,
                },
                Err(e) => RiskReport {
                    path_id: path.id.clone(),
                    f_d: f64::NAN,
                    p_d_exact: None,
                    p_d_mc: None,
                    precompute_ms,
                    eval_ms: t1.elapsed().as_secs_f64() * 1e3,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(Evaluation {
        reports,
        precompute_ms,
    })
}

fn evaluate_one(
    robot: &Polygon,
    obstacles: &[Obstacle],
    rf: &RiskFields,
    path: &Path,
    opts: &EvalOptions,
) -> Result<(f64, Option<f64>, Option<McEstimate>)> {
    let poses = path.poses();
    let swept = swept_indicator(&poses, robot, rf.spec())?;
    let f_d = fpr_bound(&swept, rf)?;
    let p_d_exact = if opts.exact {
        let per: Vec<f64> = obstacles
            .iter()
            .map(|o| laugier_exact(&swept, o).map(|e| e.probability))
            .collect::<Result<_>>()?;
        let (p_d, _) = exact_total(&per)?;
        Some(p_d)
    } else {
        None
    };
    let p_d_mc = match opts.mc_samples {
        Some(n) => {
            let footprints =
                crate::geometry::swept_footprints(&poses, robot, rf.spec().resolution);
            Some(mc_total(&footprints, obstacles, n, opts.seed)?)
        }
        None => None,
    };
    Ok((f_d, p_d_exact, p_d_mc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(origin: [f64; 2], res: f64, w: usize, h: usize) -> GridSpec {
        GridSpec::new(origin, res, w, h).unwrap()
    }

    fn car_obstacle(id: &str, mean: [f64; 2], sigma: f64) -> Obstacle {
        Obstacle::new(
            id.into(),
            Polygon::rectangle(4.0, 2.0).unwrap(),
            LocationDensity::isotropic_gaussian(mean, sigma).unwrap(),
        )
    }

    #[test]
    fn g_field_mass_equals_obstacle_count() {
        // Fubini oracle: each term integrates to area / area = 1.
        let spec = grid([-12.0, -12.0], 0.05, 481, 481);
        let obstacles = vec![
            car_obstacle("a", [-4.0, -3.0], 0.3),
            car_obstacle("b", [4.0, 2.0], 0.5),
            Obstacle::new(
                "c".into(),
                Polygon::new(vec![[-1.0, -1.0], [2.0, -0.5], [0.5, 1.5]]).unwrap(),
                LocationDensity::isotropic_gaussian([0.0, 6.0], 0.2).unwrap(),
            ),
        ];
        let rf = precompute_fields(&obstacles, &spec, 2.0).unwrap();
        let mass = integrate(rf.g());
        assert!(
            (mass - 3.0).abs() / 3.0 < 0.01,
            "G mass {mass}, expected 3"
        );
    }

    #[test]
    fn dg_field_mass_is_half_perimeter() {
        // Near-delta density: contour field mass is half the perimeter.
        let side = 2.0;
        let spec = grid([-6.0, -6.0], 0.05, 241, 241);
        let obstacles = vec![Obstacle::new(
            "sq".into(),
            Polygon::rectangle(side, side).unwrap(),
            LocationDensity::delta([0.0, 0.0]).unwrap(),
        )];
        let rf = precompute_fields(&obstacles, &spec, 2.0).unwrap();
        let mass = integrate(rf.dg_sigma());
        let expect = 0.5 * 4.0 * side;
        assert!(
            (mass - expect).abs() / expect < 0.05,
            "dG mass {mass}, expected {expect}"
        );
    }

    #[test]
    fn duplicated_obstacles_double_fields() {
        let spec = grid([-8.0, -8.0], 0.05, 321, 321);
        let one = vec![car_obstacle("a", [0.5, -0.3], 0.3)];
        let two = vec![
            car_obstacle("a", [0.5, -0.3], 0.3),
            car_obstacle("a2", [0.5, -0.3], 0.3),
        ];
        let rf1 = precompute_fields(&one, &spec, 2.0).unwrap();
        let rf2 = precompute_fields(&two, &spec, 2.0).unwrap();
        for (a, b) in rf1.g().samples().iter().zip(rf2.g().samples()) {
            assert!((2.0 * a - b).abs() < 1e-9);
        }
        for (a, b) in rf1.dg_sigma().samples().iter().zip(rf2.dg_sigma().samples()) {
            assert!((2.0 * a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn sub_cell_obstacle_is_rejected() {
        let spec = grid([-2.0, -2.0], 0.05, 81, 81);
        let tiny = Obstacle::new(
            "dust".into(),
            Polygon::rectangle(0.02, 0.02).unwrap(),
            LocationDensity::delta([0.0, 0.0]).unwrap(),
        );
        assert!(matches!(
            precompute_fields(&[tiny], &spec, 2.0),
            Err(Error::PointObstacle(_))
        ));
    }

    #[test]
    fn empty_swept_area_scores_zero() {
        let spec = grid([-6.0, -6.0], 0.05, 241, 241);
        let rf =
            precompute_fields(&[car_obstacle("a", [0.0, 0.0], 0.3)], &spec, 2.0).unwrap();
        let swept = ScalarField::zeros(spec);
        assert_eq!(fpr_bound(&swept, &rf).unwrap(), 0.0);
    }

    #[test]
    fn distant_obstacle_bound_is_negligible() {
        // Density mass sits ~14 sigma from the path; Gaussian tails leave
        // well under 1e-4 of bound.
        let spec = grid([-5.0, -5.0], 0.05, 501, 301);
        let rf =
            precompute_fields(&[car_obstacle("far", [15.0, 6.0], 0.5)], &spec, 2.0).unwrap();
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let poses = [Pose2::identity(), Pose2::new(6.0, 0.0, 0.0)];
        let swept = swept_indicator(&poses, &robot, rf.spec()).unwrap();
        let f_d = fpr_bound(&swept, &rf).unwrap();
        assert!(f_d <= 1e-4, "F_D {f_d}");
    }

    #[test]
    fn contained_obstacle_bound_reaches_one() {
        let spec = grid([-8.0, -8.0], 0.05, 321, 321);
        let obstacles = vec![Obstacle::new(
            "in".into(),
            Polygon::rectangle(1.0, 1.0).unwrap(),
            LocationDensity::delta([1.0, 0.0]).unwrap(),
        )];
        let rf = precompute_fields(&obstacles, &spec, 2.0).unwrap();
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let poses = [Pose2::identity(), Pose2::new(2.0, 0.0, 0.0)];
        let swept = swept_indicator(&poses, &robot, rf.spec()).unwrap();
        let f_d = fpr_bound(&swept, &rf).unwrap();
        let exact = laugier_exact(&swept, &obstacles[0]).unwrap().probability;
        assert_relative_eq!(exact, 1.0, epsilon = 1e-9);
        assert!(f_d >= 1.0, "F_D {f_d} should reach 1");
    }

    #[test]
    fn bound_dominates_exact_risk() {
        let spec = grid([-6.0, -4.0], 0.05, 401, 201);
        let obstacles = vec![
            car_obstacle("a", [4.0, 2.4], 0.3),
            car_obstacle("b", [8.0, -2.2], 0.4),
        ];
        let rf = precompute_fields(&obstacles, &spec, 2.0).unwrap();
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let poses = [Pose2::identity(), Pose2::new(10.0, 0.0, 0.0)];
        let swept = swept_indicator(&poses, &robot, rf.spec()).unwrap();
        let f_d = fpr_bound(&swept, &rf).unwrap();
        let per: Vec<f64> = obstacles
            .iter()
            .map(|o| laugier_exact(&swept, o).unwrap().probability)
            .collect();
        let (p_d, p_d_bar) = exact_total(&per).unwrap();
        let eps = (0.02 * p_d).max(1e-4);
        assert!(p_d <= p_d_bar + 1e-12);
        assert!(
            f_d >= p_d_bar - eps,
            "chain violated: F_D {f_d} < sum bound {p_d_bar}"
        );
    }

    #[test]
    fn adding_an_obstacle_never_decreases_the_bound() {
        let spec = grid([-6.0, -4.0], 0.05, 401, 201);
        let base = vec![car_obstacle("a", [4.0, 2.0], 0.3)];
        let more = vec![
            car_obstacle("a", [4.0, 2.0], 0.3),
            car_obstacle("b", [7.0, -2.0], 0.5),
        ];
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let poses = [Pose2::identity(), Pose2::new(10.0, 0.0, 0.0)];
        let rf1 = precompute_fields(&base, &spec, 2.0).unwrap();
        let rf2 = precompute_fields(&more, &spec, 2.0).unwrap();
        let swept = swept_indicator(&poses, &robot, &spec).unwrap();
        let f1 = fpr_bound(&swept, &rf1).unwrap();
        let f2 = fpr_bound(&swept, &rf2).unwrap();
        assert!(f2 >= f1 - 1e-12);
    }

    #[test]
    fn shift_equivariance_integer_cells() {
        let res = 0.05;
        let shift = [37.0 * res, -12.0 * res];
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let spec0 = grid([-6.0, -4.0], res, 401, 201);
        let spec1 = grid(
            [-6.0 + shift[0], -4.0 + shift[1]],
            res,
            401,
            201,
        );
        let obs0 = vec![car_obstacle("a", [4.0, 2.2], 0.3)];
        let obs1 = vec![car_obstacle("a", [4.0 + shift[0], 2.2 + shift[1]], 0.3)];
        let poses0 = [Pose2::identity(), Pose2::new(9.0, 0.5, 0.1)];
        let poses1 = [
            Pose2::new(shift[0], shift[1], 0.0),
            Pose2::new(9.0 + shift[0], 0.5 + shift[1], 0.1),
        ];
        let rf0 = precompute_fields(&obs0, &spec0, 2.0).unwrap();
        let rf1 = precompute_fields(&obs1, &spec1, 2.0).unwrap();
        let f0 = fpr_bound(&swept_indicator(&poses0, &robot, &spec0).unwrap(), &rf0).unwrap();
        let f1 = fpr_bound(&swept_indicator(&poses1, &robot, &spec1).unwrap(), &rf1).unwrap();
        assert!((f0 - f1).abs() < 1e-9, "{f0} vs {f1}");
    }

    #[test]
    fn point_bound_is_linear() {
        let spec = grid([-4.0, -4.0], 0.05, 161, 161);
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let swept = swept_indicator(&[Pose2::identity()], &robot, &spec).unwrap();
        let points = vec![
            LocationDensity::isotropic_gaussian([1.5, 0.0], 0.4).unwrap(),
            LocationDensity::isotropic_gaussian([-2.0, 1.0], 0.3).unwrap(),
            LocationDensity::isotropic_gaussian([0.0, -2.5], 0.6).unwrap(),
        ];
        let all = point_bound(&points, &swept).unwrap();
        let sum: f64 = points
            .iter()
            .map(|p| point_bound(std::slice::from_ref(p), &swept).unwrap())
            .sum();
        assert!((all - sum).abs() < 1e-12, "{all} vs {sum}");
    }

    #[test]
    fn point_density_inside_swept_area_is_certain() {
        let spec = grid([-4.0, -4.0], 0.05, 161, 161);
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let swept = swept_indicator(&[Pose2::identity()], &robot, &spec).unwrap();
        let p = LocationDensity::isotropic_gaussian([0.0, 0.0], 0.15).unwrap();
        let v = point_bound(&[p], &swept).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn point_bound_matches_degenerate_laugier() {
        // Cross-check: a one-cell obstacle's Laugier integral equals the
        // point bound within a percent. The density mass sits interior to
        // the swept area; near the boundary a one-cell shape genuinely
        // differs from a point by the cell-wide dilation band.
        let res = 0.05;
        let spec = grid([-4.0, -4.0], res, 161, 161);
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let swept = swept_indicator(&[Pose2::identity()], &robot, &spec).unwrap();
        let density = LocationDensity::isotropic_gaussian([1.0, 0.1], 0.3).unwrap();
        let pb = point_bound(std::slice::from_ref(&density), &swept).unwrap();
        let cell_obs = Obstacle::new(
            "cell".into(),
            Polygon::rectangle(res, res).unwrap(),
            density,
        );
        let ex = laugier_exact(&swept, &cell_obs).unwrap().probability;
        assert!((pb - ex).abs() / ex.max(1e-12) < 0.01, "{pb} vs {ex}");
    }

    #[test]
    fn exact_total_arithmetic() {
        let (p, bar) = exact_total(&[0.5, 0.5]).unwrap();
        assert_relative_eq!(p, 0.75);
        assert_relative_eq!(bar, 1.0);
        let (p, bar) = exact_total(&[0.125]).unwrap();
        assert_relative_eq!(p, 0.125);
        assert_relative_eq!(bar, 0.125);
        let (p, bar) = exact_total(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!((p, bar), (0.0, 0.0));
        assert!(exact_total(&[1.2]).is_err());
        assert!(exact_total(&[-0.1]).is_err());
    }

    #[test]
    fn laugier_certain_and_negligible_cases() {
        let spec = grid([-6.0, -6.0], 0.05, 241, 241);
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let swept = swept_indicator(&[Pose2::identity()], &robot, &spec).unwrap();
        let inside = Obstacle::new(
            "in".into(),
            Polygon::rectangle(1.0, 1.0).unwrap(),
            LocationDensity::isotropic_gaussian([0.0, 0.0], 0.2).unwrap(),
        );
        let e = laugier_exact(&swept, &inside).unwrap();
        assert!((e.probability - 1.0).abs() < 1e-3);
        let outside = Obstacle::new(
            "out".into(),
            Polygon::rectangle(1.0, 1.0).unwrap(),
            LocationDensity::isotropic_gaussian([0.0, 5.0], 0.2).unwrap(),
        );
        let e = laugier_exact(&swept, &outside).unwrap();
        assert!(e.probability <= 1e-4);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let spec = grid([-6.0, -4.0], 0.05, 401, 201);
        let robot = Polygon::rectangle(4.0, 2.0).unwrap();
        let obstacles = vec![car_obstacle("a", [5.0, 2.0], 0.3)];
        let paths = crate::paths::generate_paths(
            Pose2::identity(),
            Pose2::new(12.0, 0.0, 0.0),
            3,
            crate::paths::Kinematics::default(),
            9,
            &obstacles,
        )
        .unwrap();
        let opts = EvalOptions {
            exact: true,
            mc_samples: Some(2000),
            seed: 4,
            ..Default::default()
        };
        let a = evaluate_paths(&robot, &obstacles, &spec, &paths, &opts).unwrap();
        let b = evaluate_paths(&robot, &obstacles, &spec, &paths, &opts).unwrap();
        for (ra, rb) in a.reports.iter().zip(&b.reports) {
            assert_eq!(ra.f_d.to_bits(), rb.f_d.to_bits());
            assert_eq!(ra.p_d_exact, rb.p_d_exact);
            assert_eq!(
                ra.p_d_mc.as_ref().map(|m| m.p_hat),
                rb.p_d_mc.as_ref().map(|m| m.p_hat)
            );
        }
    }
}
