//! Monte-Carlo ground truth for collision probabilities.
//!
//! Obstacle locations are drawn from their densities; a sample counts as a
//! collision when the displaced obstacle polygon intersects any footprint
//! polygon along the path (separating-axis test, convex shapes only).
//!
//! Sampling uses ChaCha8 with one stream per (obstacle slot, chunk), so
//! results are reproducible regardless of how rayon schedules the chunks.

use crate::fields::LocationDensity;
use crate::geometry::{convex_rings_separation, ScalarField};
use crate::risk::Obstacle;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Samples per RNG chunk; chunks are the unit of parallelism.
const CHUNK: u64 = 8192;

/// Monte-Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, n: u64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            p_hat: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            seed,
        }
    }
}

/// Estimate the collision probability against a single obstacle.
pub fn mc_single(
    footprints: &[Vec<[f64; 2]>],
    obs: &Obstacle,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    mc_run(footprints, std::slice::from_ref(obs), n, seed)
}

/// Estimate the total collision probability against all obstacles, drawn
/// independently per sample. With one obstacle this reduces exactly to
/// [`mc_single`] for the same seed.
pub fn mc_total(
    footprints: &[Vec<[f64; 2]>],
    obstacles: &[Obstacle],
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    mc_run(footprints, obstacles, n, seed)
}

fn mc_run(
    footprints: &[Vec<[f64; 2]>],
    obstacles: &[Obstacle],
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 samples, got {n}"
        )));
    }
    if obstacles.is_empty() {
        return Err(Error::InvalidInput("no obstacles to sample".into()));
    }
    for o in obstacles {
        if !o.shape.is_convex() {
            return Err(Error::UnsupportedShape(format!(
                "obstacle '{}' is not convex; the oracle only supports convex shapes",
                o.id
            )));
        }
    }
    for (i, f) in footprints.iter().enumerate() {
        if !is_convex_ring(f) {
            return Err(Error::UnsupportedShape(format!(
                "footprint {i} is not convex; the oracle only supports convex shapes"
            )));
        }
    }
    let samplers: Vec<Sampler> = obstacles.iter().map(|o| Sampler::new(&o.density)).collect();
    let geoms: Vec<ObstacleGeom> = obstacles.iter().map(|o| ObstacleGeom::of(&o.shape)).collect();
    let max_obstacle_radius = geoms.iter().map(|g| g.circumradius).fold(0.0, f64::max);
    let index = FootprintIndex::build(footprints, max_obstacle_radius);
    let chunks = n.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(n);
            let mut rngs: Vec<ChaCha8Rng> = (0..obstacles.len())
                .map(|slot| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((slot as u64) << 32) | chunk);
                    rng
                })
                .collect();
            let mut locations = vec![[0.0f64; 2]; obstacles.len()];
            let mut hits = 0u64;
            for _ in lo..hi {
                for (loc, (sampler, rng)) in locations
                    .iter_mut()
                    .zip(samplers.iter().zip(rngs.iter_mut()))
                {
                    *loc = sampler.draw(rng);
                }
                let hit = obstacles
                    .iter()
                    .zip(&geoms)
                    .zip(&locations)
                    .any(|((obs, geom), &r)| index.any_intersection(footprints, obs, geom, r));
                if hit {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(McEstimate::from_hits(hits, n, seed))
}

/// Precomputed obstacle bounds for fast accept/reject during sampling.
struct ObstacleGeom {
    centroid: [f64; 2],
    /// Radius of a disc around the centroid inscribed in the shape.
    inradius: f64,
    /// Largest vertex distance from the centroid.
    circumradius: f64,
}

impl ObstacleGeom {
    fn of(shape: &crate::geometry::Polygon) -> Self {
        let verts = shape.vertices();
        let centroid = ring_centroid(verts);
        let circumradius = verts
            .iter()
            .map(|v| ((v[0] - centroid[0]).powi(2) + (v[1] - centroid[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        Self {
            centroid,
            inradius: inscribed_radius(verts, centroid),
            circumradius,
        }
    }
}

/// Support extent of a vertex ring around `center` along a unit axis.
fn support(verts: &[[f64; 2]], center: [f64; 2], axis: [f64; 2]) -> f64 {
    verts
        .iter()
        .map(|v| (v[0] - center[0]) * axis[0] + (v[1] - center[1]) * axis[1])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn ring_centroid(verts: &[[f64; 2]]) -> [f64; 2] {
    let n = verts.len() as f64;
    [
        verts.iter().map(|v| v[0]).sum::<f64>() / n,
        verts.iter().map(|v| v[1]).sum::<f64>() / n,
    ]
}

/// Distance from an interior point to the nearest edge line.
fn inscribed_radius(verts: &[[f64; 2]], center: [f64; 2]) -> f64 {
    let n = verts.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len = (ab[0] * ab[0] + ab[1] * ab[1]).sqrt();
        if len > 0.0 {
            let d = ((center[0] - a[0]) * ab[1] - (center[1] - a[1]) * ab[0]).abs() / len;
            best = best.min(d);
        }
    }
    best
}

/// Draws locations from a [`LocationDensity`].
enum Sampler {
    Gaussian { mean: [f64; 2], sqrt: [[f64; 2]; 2] },
    Gridded {
        cdf: Vec<f64>,
        cells: Vec<(usize, usize)>,
        spec: crate::geometry::GridSpec,
    },
}

impl Sampler {
    fn new(p: &LocationDensity) -> Self {
        match p {
            LocationDensity::Gaussian { mean, cov } => Self::Gaussian {
                mean: *mean,
                sqrt: psd_sqrt(*cov),
            },
            LocationDensity::Gridded(f) => Self::from_grid(f),
        }
    }

    fn from_grid(f: &ScalarField) -> Self {
        let spec = f.spec().clone();
        let mut cdf = Vec::new();
        let mut cells = Vec::new();
        let mut acc = 0.0;
        for iy in 0..spec.height {
            for ix in 0..spec.width {
                let v = f.get(ix, iy);
                if v > 0.0 {
                    acc += v;
                    cdf.push(acc);
                    cells.push((ix, iy));
                }
            }
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Self::Gridded { cdf, cells, spec }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        match self {
            Self::Gaussian { mean, sqrt } => {
                let z0: f64 = StandardNormal.sample(rng);
                let z1: f64 = StandardNormal.sample(rng);
                [
                    mean[0] + sqrt[0][0] * z0 + sqrt[0][1] * z1,
                    mean[1] + sqrt[1][0] * z0 + sqrt[1][1] * z1,
                ]
            }
            Self::Gridded { cdf, cells, spec } => {
                let u: f64 = rng.random();
                let idx = cdf.partition_point(|&c| c < u).min(cells.len() - 1);
                let (ix, iy) = cells[idx];
                let c = spec.cell_center(ix, iy);
                let jx: f64 = rng.random_range(-0.5..0.5);
                let jy: f64 = rng.random_range(-0.5..0.5);
                [c[0] + jx * spec.resolution, c[1] + jy * spec.resolution]
            }
        }
    }
}

/// Symmetric square root of a PSD 2x2 matrix via its eigensystem; exact
/// point masses (zero covariance) map to the zero matrix.
fn psd_sqrt(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let half_tr = (m[0][0] + m[1][1]) / 2.0;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    let (l0, l1) = ((half_tr - disc).max(0.0), (half_tr + disc).max(0.0));
    let (s0, s1) = (l0.sqrt(), l1.sqrt());
    // Eigenvector for l1.
    let (vx, vy) = if m[0][1].abs() > 1e-30 {
        (l1 - m[1][1], m[0][1])
    } else if m[0][0] >= m[1][1] {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let norm = (vx * vx + vy * vy).sqrt();
    let (vx, vy) = if norm > 0.0 {
        (vx / norm, vy / norm)
    } else {
        (1.0, 0.0)
    };
    // sqrt(M) = s1 v v^T + s0 w w^T with w perpendicular to v.
    let (wx, wy) = (-vy, vx);
    [
        [s1 * vx * vx + s0 * wx * wx, s1 * vx * vy + s0 * wx * wy],
        [s1 * vy * vx + s0 * wy * wx, s1 * vy * vy + s0 * wy * wy],
    ]
}

/// Index over footprints. A coarse min-distance field classifies most
/// samples in O(1) (certainly clear of the sweep, or certainly deep
/// inside it). Boundary-band samples walk the footprint sequence with
/// conservative skips: footprints are the same polygon at consecutive
/// resampled poses, so distances to them change by at most `step` per
/// index, and a miss with separation margin `m` clears the next
/// `m / step` footprints.
struct FootprintIndex {
    footprint_radius: f64,
    footprint_inradius: f64,
    centers: Vec<[f64; 2]>,
    /// Upper bound on point movement between consecutive footprints.
    step: f64,
    coarse: DistanceField,
}

/// Min distance from each coarse cell center to any footprint center.
struct DistanceField {
    origin: [f64; 2],
    cell: f64,
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DistanceField {
    const CELL: f64 = 0.5;

    fn build(centers: &[[f64; 2]], pad: f64) -> Self {
        let mut lo = [f64::INFINITY, f64::INFINITY];
        let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY];
        for c in centers {
            lo[0] = lo[0].min(c[0]);
            lo[1] = lo[1].min(c[1]);
            hi[0] = hi[0].max(c[0]);
            hi[1] = hi[1].max(c[1]);
        }
        let cell = Self::CELL;
        let origin = [lo[0] - pad, lo[1] - pad];
        let width = ((hi[0] + pad - origin[0]) / cell).ceil() as usize + 1;
        let height = ((hi[1] + pad - origin[1]) / cell).ceil() as usize + 1;
        let mut values = vec![f64::INFINITY; width * height];
        for (iy, row) in values.chunks_mut(width).enumerate() {
            let y = origin[1] + iy as f64 * cell;
            for (ix, v) in row.iter_mut().enumerate() {
                let x = origin[0] + ix as f64 * cell;
                for c in centers {
                    let d2 = (c[0] - x).powi(2) + (c[1] - y).powi(2);
                    if d2 < *v {
                        *v = d2;
                    }
                }
            }
        }
        for v in &mut values {
            *v = v.sqrt();
        }
        Self {
            origin,
            cell,
            width,
            height,
            values,
        }
    }

    /// Lower and upper bounds on the distance from `p` to the nearest
    /// footprint center; `None` when `p` is outside the field.
    fn bounds(&self, p: [f64; 2]) -> Option<(f64, f64)> {
        let ix = ((p[0] - self.origin[0]) / self.cell).round();
        let iy = ((p[1] - self.origin[1]) / self.cell).round();
        if ix < 0.0 || iy < 0.0 || ix as usize >= self.width || iy as usize >= self.height {
            return None;
        }
        let v = self.values[iy as usize * self.width + ix as usize];
        let slack = self.cell * std::f64::consts::FRAC_1_SQRT_2;
        Some(((v - slack).max(0.0), v + slack))
    }
}

impl FootprintIndex {
    fn build(footprints: &[Vec<[f64; 2]>], obstacle_radius: f64) -> Self {
        let mut centers = Vec::with_capacity(footprints.len());
        let mut footprint_radius = 0.0f64;
        let mut footprint_inradius = f64::INFINITY;
        for f in footprints {
            let c = ring_centroid(f);
            let r = f
                .iter()
                .map(|v| ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)).sqrt())
                .fold(0.0, f64::max);
            footprint_radius = footprint_radius.max(r);
            footprint_inradius = footprint_inradius.min(inscribed_radius(f, c));
            centers.push(c);
        }
        // Convexity makes the max vertex displacement a bound on how far
        // any footprint point moves between consecutive poses.
        let mut step = 0.0f64;
        for pair in footprints.windows(2) {
            for (a, b) in pair[0].iter().zip(&pair[1]) {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                step = step.max(d);
            }
        }
        let reach = footprint_radius + obstacle_radius;
        let coarse = DistanceField::build(&centers, reach + 3.0);
        Self {
            footprint_radius,
            footprint_inradius,
            centers,
            step: step.max(1e-12),
            coarse,
        }
    }

    fn any_intersection(
        &self,
        footprints: &[Vec<[f64; 2]>],
        obs: &Obstacle,
        geom: &ObstacleGeom,
        r: [f64; 2],
    ) -> bool {
        let obs_center = [r[0] + geom.centroid[0], r[1] + geom.centroid[1]];
        let reach = self.footprint_radius + geom.circumradius;
        match self.coarse.bounds(obs_center) {
            // Certain miss: even the bounding circles cannot touch.
            Some((lb, _)) if lb > reach => return false,
            // Certain hit: the inscribed discs already overlap.
            Some((_, ub)) if ub <= self.footprint_inradius + geom.inradius => return true,
            _ => {}
        }
        let reach_sq = reach * reach;
        let inrad_sum_sq = (self.footprint_inradius + geom.inradius).powi(2);
        let mut moved: Vec<[f64; 2]> = Vec::new();
        let mut i = 0;
        while i < self.centers.len() {
            let c = self.centers[i];
            let dx = obs_center[0] - c[0];
            let dy = obs_center[1] - c[1];
            let d_sq = dx * dx + dy * dy;
            // Lower bound on the obstacle/footprint set distance; a
            // positive margin clears the next margin/step footprints.
            let margin;
            if d_sq > reach_sq {
                margin = d_sq.sqrt() - reach;
            } else if d_sq <= inrad_sum_sq {
                return true;
            } else {
                // Exact extents along the center axis decide most of the
                // annulus between the inscribed and bounding circles.
                let d = d_sq.sqrt();
                let axis = [dx / d, dy / d];
                let fp_extent = support(&footprints[i], c, axis);
                let obs_extent = obs
                    .shape
                    .vertices()
                    .iter()
                    .map(|v| {
                        (geom.centroid[0] - v[0]) * axis[0]
                            + (geom.centroid[1] - v[1]) * axis[1]
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let gap = d - fp_extent - obs_extent;
                if gap > 0.0 {
                    margin = gap;
                } else {
                    if moved.is_empty() {
                        moved = obs
                            .shape
                            .vertices()
                            .iter()
                            .map(|v| [v[0] + r[0], v[1] + r[1]])
                            .collect();
                    }
                    match convex_rings_separation(&moved, &footprints[i]) {
                        None => return true,
                        Some(sep) => margin = sep,
                    }
                }
            }
            let skip = ((margin / self.step) * (1.0 - 1e-9)).floor() as usize;
            i += 1 + skip;
        }
        false
    }
}

fn is_convex_ring(verts: &[[f64; 2]]) -> bool {
    let n = verts.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let c = verts[(i + 2) % n];
        let cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cr.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = cr;
        } else if sign * cr < 0.0 {
            return false;
        }
    }
    true
}
