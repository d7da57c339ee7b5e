//! Planar geometry: poses, simple polygons, uniform grids, rasterization of
//! polygons and swept areas, and grid-domain Minkowski dilation.
//!
//! All world quantities are SI (meters, radians). Grids are row-major with
//! cell `(0, 0)` at `GridSpec::origin`; a cell belongs to a set when its
//! center does (boundary inclusive), which keeps rasterized areas unbiased.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Absolute slack (meters) for boundary-inclusive point-in-polygon tests.
const EDGE_EPS: f64 = 1e-9;

/// Polygons with shoelace area below this are rejected as degenerate.
const MIN_POLYGON_AREA: f64 = 1e-12;

/// Wrap an angle to `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// SE(2) pose: position in meters, heading in radians, normalized to
/// `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Map a body-frame point into the world frame.
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [
            self.x + c * p[0] - s * p[1],
            self.y + s * p[0] + c * p[1],
        ]
    }
}

/// Simple polygon in counter-clockwise order, body frame, positive area.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    /// Validate and build a polygon. Clockwise input is reversed to
    /// counter-clockwise; degenerate or self-intersecting rings are
    /// rejected.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidShape(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidShape("non-finite vertex".into()));
        }
        let signed = shoelace(&vertices);
        if signed.abs() < MIN_POLYGON_AREA {
            return Err(Error::InvalidShape(format!(
                "degenerate polygon, area {:.3e} below {MIN_POLYGON_AREA:.0e}",
                signed.abs()
            )));
        }
        let mut vertices = vertices;
        if signed < 0.0 {
            vertices.reverse();
        }
        let poly = Self { vertices };
        if !poly.is_simple() {
            return Err(Error::InvalidShape("self-intersecting polygon".into()));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle centered on the body origin; `length` along x,
    /// `width` along y.
    pub fn rectangle(length: f64, width: f64) -> Result<Self> {
        let hl = length / 2.0;
        let hw = width / 2.0;
        Self::new(vec![[-hl, -hw], [hl, -hw], [hl, hw], [-hl, hw]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Shoelace area, strictly positive by construction.
    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Largest vertex distance from the body origin. Bounds how far any
    /// point of the shape moves under rotation.
    pub fn max_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        bbox_of(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            cross(sub(b, a), sub(c, b)) > -EDGE_EPS
        })
    }

    /// Point reflection through the body origin. In 2D this is a rotation
    /// by pi, so orientation and simplicity are preserved.
    pub fn reflected(&self) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| [-v[0], -v[1]]).collect(),
        }
    }

    /// Vertices after posing the polygon in the world frame.
    pub fn transformed(&self, pose: &Pose2) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| pose.apply(*v)).collect()
    }

    /// Boundary-inclusive containment test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        point_in_polygon(&self.vertices, p)
    }

    /// Outward offset of a convex polygon by `r` meters: every edge line is
    /// shifted along its outward normal and adjacent lines re-intersected
    /// (miter joins). The result contains the true rounded offset, so it is
    /// conservative for collision purposes.
    pub fn inflated(&self, r: f64) -> Result<Self> {
        if r < 0.0 || !r.is_finite() {
            return Err(Error::InvalidInput(format!("inflation radius {r} invalid")));
        }
        if r == 0.0 {
            return Ok(self.clone());
        }
        if !self.is_convex() {
            return Err(Error::InvalidShape(
                "inflation is only supported for convex polygons".into(),
            ));
        }
        let n = self.vertices.len();
        // Offset line for edge i: point a_i + r*n_i, direction d_i.
        let mut points = Vec::with_capacity(n);
        let mut dirs = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let d = sub(b, a);
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            let d = [d[0] / len, d[1] / len];
            // Outward normal for a CCW ring.
            let nrm = [d[1], -d[0]];
            points.push([a[0] + r * nrm[0], a[1] + r * nrm[1]]);
            dirs.push(d);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + n - 1) % n;
            // Intersect offset lines of edges j and i.
            let denom = cross(dirs[j], dirs[i]);
            if denom.abs() < 1e-12 {
                // Collinear neighbours: the shared vertex just shifts.
                out.push(points[i]);
                continue;
            }
            let t = cross(sub(points[i], points[j]), dirs[i]) / denom;
            out.push([
                points[j][0] + t * dirs[j][0],
                points[j][1] + t * dirs[j][1],
            ]);
        }
        Self::new(out)
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let a1 = self.vertices[i];
            let a2 = self.vertices[(i + 1) % n];
            for j in (i + 1)..n {
                // Skip adjacent edges (they share an endpoint).
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let b1 = self.vertices[j];
                let b2 = self.vertices[(j + 1) % n];
                if segments_intersect(a1, a2, b1, b2) {
                    return false;
                }
            }
        }
        true
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn shoelace(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    acc / 2.0
}

fn bbox_of(points: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY, f64::INFINITY];
    let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in points {
        lo[0] = lo[0].min(p[0]);
        lo[1] = lo[1].min(p[1]);
        hi[0] = hi[0].max(p[0]);
        hi[1] = hi[1].max(p[1]);
    }
    (lo, hi)
}

fn segments_intersect(a1: [f64; 2], a2: [f64; 2], b1: [f64; 2], b2: [f64; 2]) -> bool {
    let d1 = cross(sub(b2, b1), sub(a1, b1));
    let d2 = cross(sub(b2, b1), sub(a2, b1));
    let d3 = cross(sub(a2, a1), sub(b1, a1));
    let d4 = cross(sub(a2, a1), sub(b2, a1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |d: f64, p: [f64; 2], q1: [f64; 2], q2: [f64; 2]| {
        d == 0.0
            && p[0] >= q1[0].min(q2[0])
            && p[0] <= q1[0].max(q2[0])
            && p[1] >= q1[1].min(q2[1])
            && p[1] <= q1[1].max(q2[1])
    };
    on(d1, a1, b1, b2) || on(d2, a2, b1, b2) || on(d3, b1, a1, a2) || on(d4, b2, a1, a2)
}

/// Boundary-inclusive point-in-polygon: points within [`EDGE_EPS`] of an
/// edge count as inside, otherwise a crossing-number test decides.
fn point_in_polygon(vertices: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if dist_sq_point_segment(p, a, b) <= EDGE_EPS * EDGE_EPS {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn dist_sq_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len_sq = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len_sq > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    d[0] * d[0] + d[1] * d[1]
}

/// Uniform grid over the plane: `origin` is the world position of the
/// center of cell `(0, 0)`, cells are `resolution` meters square.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(origin: [f64; 2], resolution: f64, width: usize, height: usize) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid resolution must be positive, got {resolution}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "grid must be non-empty, got {width}x{height}"
            )));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(Error::InvalidInput("grid origin must be finite".into()));
        }
        Ok(Self {
            origin,
            resolution,
            width,
            height,
        })
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn cell_area(&self) -> f64 {
        self.resolution * self.resolution
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + ix as f64 * self.resolution,
            self.origin[1] + iy as f64 * self.resolution,
        ]
    }

    /// Nearest cell to a world point, unclamped (may be outside the grid).
    pub fn nearest_cell(&self, p: [f64; 2]) -> (i64, i64) {
        (
            ((p[0] - self.origin[0]) / self.resolution).round() as i64,
            ((p[1] - self.origin[1]) / self.resolution).round() as i64,
        )
    }

    pub fn contains_cell(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    /// Integer cell offset of `other`'s origin within this grid's lattice,
    /// or `None` when resolutions differ or origins are not lattice-aligned.
    pub fn offset_of(&self, other: &GridSpec) -> Option<(i64, i64)> {
        if (self.resolution - other.resolution).abs() > 1e-12 * self.resolution {
            return None;
        }
        let fx = (other.origin[0] - self.origin[0]) / self.resolution;
        let fy = (other.origin[1] - self.origin[1]) / self.resolution;
        let ix = fx.round();
        let iy = fy.round();
        if (fx - ix).abs() > 1e-6 || (fy - iy).abs() > 1e-6 {
            return None;
        }
        Some((ix as i64, iy as i64))
    }
}

/// Dense 2D field of real samples on a [`GridSpec`], row-major.
///
/// Carries indicators (values in `{0, 1}`), densities (non-negative,
/// 1/m^2), and the precomputed risk fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    samples: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(spec: GridSpec) -> Self {
        let samples = vec![0.0; spec.cells()];
        Self { spec, samples }
    }

    pub fn from_samples(spec: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != spec.cells() {
            return Err(Error::InvalidInput(format!(
                "sample count {} does not match {}x{} grid",
                samples.len(),
                spec.width,
                spec.height
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite field sample".into()));
        }
        Ok(Self { spec, samples })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.samples[self.spec.index(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: f64) {
        let i = self.spec.index(ix, iy);
        self.samples[i] = v;
    }

    /// True when every sample is exactly 0.0 or 1.0.
    pub fn is_indicator(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Inclusive cell bounding box of the nonzero support, or `None` for an
    /// all-zero field.
    pub fn support_bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let mut x0 = usize::MAX;
        let mut y0 = usize::MAX;
        let mut x1 = 0;
        let mut y1 = 0;
        let mut any = false;
        for iy in 0..self.spec.height {
            let row = &self.samples[iy * self.spec.width..(iy + 1) * self.spec.width];
            for (ix, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    any = true;
                    x0 = x0.min(ix);
                    x1 = x1.max(ix);
                    y0 = y0.min(iy);
                    y1 = y1.max(iy);
                }
            }
        }
        any.then_some((x0, y0, x1, y1))
    }

    /// Copy a cell window (inclusive, clamped to the grid) into a new field
    /// whose origin is shifted accordingly.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> ScalarField {
        let x1 = x1.min(self.spec.width - 1);
        let y1 = y1.min(self.spec.height - 1);
        let w = x1 + 1 - x0;
        let h = y1 + 1 - y0;
        let spec = GridSpec {
            origin: [
                self.spec.origin[0] + x0 as f64 * self.spec.resolution,
                self.spec.origin[1] + y0 as f64 * self.spec.resolution,
            ],
            resolution: self.spec.resolution,
            width: w,
            height: h,
        };
        let mut out = ScalarField::zeros(spec);
        for iy in 0..h {
            let src = (y0 + iy) * self.spec.width + x0;
            out.samples[iy * w..(iy + 1) * w].copy_from_slice(&self.samples[src..src + w]);
        }
        out
    }

    /// Accumulate `scale * patch` into this field. The patch must live on
    /// the same lattice; cells falling outside this grid are dropped.
    pub fn add_scaled(&mut self, patch: &ScalarField, scale: f64) -> Result<()> {
        let (ox, oy) = self.spec.offset_of(patch.spec()).ok_or_else(|| {
            Error::InvalidInput("patch is not aligned with the target grid".into())
        })?;
        for py in 0..patch.spec.height {
            let ty = oy + py as i64;
            if ty < 0 || ty as usize >= self.spec.height {
                continue;
            }
            let ty = ty as usize;
            for px in 0..patch.spec.width {
                let tx = ox + px as i64;
                if tx < 0 || tx as usize >= self.spec.width {
                    continue;
                }
                let v = patch.samples[py * patch.spec.width + px];
                if v != 0.0 {
                    self.samples[ty * self.spec.width + tx as usize] += scale * v;
                }
            }
        }
        Ok(())
    }
}

/// Rasterize a posed polygon: cells whose centers lie inside (boundary
/// inclusive) are set to 1. A polygon entirely outside the grid yields an
/// all-zero field, not an error.
pub fn rasterize_polygon(poly: &Polygon, pose: &Pose2, spec: &GridSpec) -> Result<ScalarField> {
    let mut field = ScalarField::zeros(spec.clone());
    rasterize_polygon_into(&mut field, poly, pose);
    Ok(field)
}

/// Union-rasterize into an existing indicator (cells are set, never
/// cleared). Scanline fill with the same inclusion semantics as
/// [`point_in_polygon`]: crossing parity plus [`EDGE_EPS`]-inclusive
/// boundaries.
fn rasterize_polygon_into(field: &mut ScalarField, poly: &Polygon, pose: &Pose2) {
    let verts = poly.transformed(pose);
    let (lo, hi) = bbox_of(&verts);
    let spec = field.spec().clone();
    let res = spec.resolution;
    let y0 = ((lo[1] - EDGE_EPS - spec.origin[1]) / res).floor().max(0.0) as i64;
    let y1 = ((hi[1] + EDGE_EPS - spec.origin[1]) / res).ceil() as i64;
    if y0 >= spec.height as i64 || y1 < 0 {
        return;
    }
    let y1 = (y1 as usize).min(spec.height - 1);
    let n = verts.len();
    let samples = field.samples_mut();
    let mut crossings: Vec<f64> = Vec::with_capacity(8);
    for iy in y0 as usize..=y1 {
        let y = spec.origin[1] + iy as f64 * res;
        crossings.clear();
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            if (a[1] > y) != (b[1] > y) {
                crossings.push(a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
            }
        }
        crossings.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let row = &mut samples[iy * spec.width..(iy + 1) * spec.width];
        for pair in crossings.chunks_exact(2) {
            let ix0 = ((pair[0] - EDGE_EPS - spec.origin[0]) / res).ceil().max(0.0) as usize;
            let ix1f = ((pair[1] + EDGE_EPS - spec.origin[0]) / res).floor();
            if ix1f < 0.0 || ix0 >= spec.width {
                continue;
            }
            let ix1 = (ix1f as usize).min(spec.width - 1);
            row[ix0..=ix1].fill(1.0);
        }
    }
    // Parity scanning is half-open in y, so centers sitting exactly on a
    // horizontal (or any) edge need the inclusive-boundary sweep.
    mark_on_edge_cells(&mut *field, &verts);
}

/// Mark cells whose center lies within [`EDGE_EPS`] of a polygon edge.
fn mark_on_edge_cells(field: &mut ScalarField, verts: &[[f64; 2]]) {
    let spec = field.spec().clone();
    let res = spec.resolution;
    let n = verts.len();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let steps = (len / (0.5 * res)).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let (cx, cy) = spec.nearest_cell(p);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (ix, iy) = (cx + dx, cy + dy);
                    if spec.contains_cell(ix, iy) {
                        let c = spec.cell_center(ix as usize, iy as usize);
                        if dist_sq_point_segment(c, a, b) <= EDGE_EPS * EDGE_EPS {
                            field.set(ix as usize, iy as usize, 1.0);
                        }
                    }
                }
            }
        }
    }
}

/// Densify a pose sequence so that no point of the footprint moves more
/// than `max_step` meters between consecutive poses (translation plus
/// `max_radius * |d theta|` rotation sweep).
///
/// Segment endpoints are ordered canonically before interpolation, so a
/// path and its reverse produce the same pose set (and therefore identical
/// swept indicators).
pub fn resample_poses(poses: &[Pose2], max_radius: f64, max_step: f64) -> Vec<Pose2> {
    let mut out = Vec::with_capacity(poses.len());
    if poses.is_empty() {
        return out;
    }
    out.push(poses[0]);
    for pair in poses.windows(2) {
        // Canonical endpoint order: the interior pose set is then identical
        // for a segment and its reverse (bit-exact), so reversed paths
        // sweep identical indicators.
        let (a, b) = canonical_pair(pair[0], pair[1]);
        let forward = a == pair[0];
        let dtheta = normalize_angle(b.theta - a.theta);
        let disp = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt() + max_radius * dtheta.abs();
        let steps = if disp <= max_step {
            1
        } else {
            (disp / max_step).ceil() as usize
        };
        for j in 1..steps {
            let j = if forward { j } else { steps - j };
            let t = j as f64 / steps as f64;
            out.push(Pose2::new(
                a.x * (1.0 - t) + b.x * t,
                a.y * (1.0 - t) + b.y * t,
                a.theta + t * dtheta,
            ));
        }
        out.push(pair[1]);
    }
    out
}

fn canonical_pair(a: Pose2, b: Pose2) -> (Pose2, Pose2) {
    let ka = (a.x, a.y, a.theta);
    let kb = (b.x, b.y, b.theta);
    if kb < ka {
        (b, a)
    } else {
        (a, b)
    }
}

/// Indicator of the union of footprints along a pose sequence, with the
/// sequence densified to half-cell steps so the union has no gaps at grid
/// scale.
pub fn swept_indicator(poses: &[Pose2], footprint: &Polygon, spec: &GridSpec) -> Result<ScalarField> {
    if poses.is_empty() {
        return Err(Error::InvalidInput("swept area of an empty path".into()));
    }
    let dense = resample_poses(poses, footprint.max_radius(), 0.5 * spec.resolution);
    let mut field = ScalarField::zeros(spec.clone());
    for pose in &dense {
        rasterize_polygon_into(&mut field, footprint, pose);
    }
    Ok(field)
}

/// World-frame footprint polygons at the same densified poses used by
/// [`swept_indicator`]; this is what the Monte-Carlo oracle tests against.
pub fn swept_footprints(
    poses: &[Pose2],
    footprint: &Polygon,
    resolution: f64,
) -> Vec<Vec<[f64; 2]>> {
    resample_poses(poses, footprint.max_radius(), 0.5 * resolution)
        .iter()
        .map(|p| footprint.transformed(p))
        .collect()
}

/// Grid Minkowski sum `A ⊕ B` of two indicator fields: the support of
/// their discrete convolution, on `a`'s grid. `b` is read as a set of cell
/// offsets from its own grid's world origin, so a body-frame structuring
/// element should be centered there. Cells of the sum falling outside
/// `a`'s grid are truncated.
pub fn minkowski_dilate(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    if !a.is_indicator() || !b.is_indicator() {
        return Err(Error::InvalidInput(
            "minkowski_dilate expects indicator fields".into(),
        ));
    }
    let bspec = b.spec();
    if (bspec.resolution - a.spec().resolution).abs() > 1e-12 * a.spec().resolution {
        return Err(Error::InvalidInput(
            "minkowski_dilate expects matching resolutions".into(),
        ));
    }
    // Cell offsets of b's support relative to b's world origin.
    let bx0 = (bspec.origin[0] / bspec.resolution).round() as i64;
    let by0 = (bspec.origin[1] / bspec.resolution).round() as i64;
    // Maximal horizontal runs of b per row: (dy, dx0, dx1).
    let mut runs: Vec<(i64, i64, i64)> = Vec::new();
    for iy in 0..bspec.height {
        let row = &b.samples()[iy * bspec.width..(iy + 1) * bspec.width];
        let mut ix = 0;
        while ix < bspec.width {
            if row[ix] != 0.0 {
                let start = ix;
                while ix < bspec.width && row[ix] != 0.0 {
                    ix += 1;
                }
                runs.push((
                    by0 + iy as i64,
                    bx0 + start as i64,
                    bx0 + (ix - 1) as i64,
                ));
            } else {
                ix += 1;
            }
        }
    }
    let spec = a.spec().clone();
    let mut out_rows = BitRows::new(spec.width, spec.height);
    if !runs.is_empty() {
        let a_rows = BitRows::from_field(a);
        let mut spread = vec![0u64; a_rows.words];
        for &(dy, dx0, dx1) in &runs {
            let len = (dx1 - dx0 + 1) as u32;
            for iy in 0..spec.height {
                if a_rows.row_empty(iy) {
                    continue;
                }
                let ty = iy as i64 + dy;
                if ty < 0 || ty as usize >= spec.height {
                    continue;
                }
                a_rows.window_or(iy, len, &mut spread);
                out_rows.or_shifted(ty as usize, &spread, dx0);
            }
        }
    }
    Ok(out_rows.to_field(spec))
}

/// Row-major bitset helper for fast dilation.
struct BitRows {
    words: usize,
    width: usize,
    height: usize,
    bits: Vec<u64>,
    nonempty: Vec<bool>,
}

impl BitRows {
    fn new(width: usize, height: usize) -> Self {
        let words = width.div_ceil(64);
        Self {
            words,
            width,
            height,
            bits: vec![0; words * height],
            nonempty: vec![false; height],
        }
    }

    fn from_field(f: &ScalarField) -> Self {
        let spec = f.spec();
        let mut rows = Self::new(spec.width, spec.height);
        for iy in 0..spec.height {
            let row = &f.samples()[iy * spec.width..(iy + 1) * spec.width];
            for (ix, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    rows.bits[iy * rows.words + ix / 64] |= 1u64 << (ix % 64);
                    rows.nonempty[iy] = true;
                }
            }
        }
        rows
    }

    fn row_empty(&self, iy: usize) -> bool {
        !self.nonempty[iy]
    }

    /// OR of the source row shifted left by 0..len-1 bits (window spread),
    /// by shift doubling.
    fn window_or(&self, iy: usize, len: u32, out: &mut [u64]) {
        out.copy_from_slice(&self.bits[iy * self.words..(iy + 1) * self.words]);
        let mut covered = 1u32;
        while covered < len {
            let shift = covered.min(len - covered);
            or_shift_left(out, shift as usize);
            covered += shift;
        }
    }

    /// `rows[iy] |= src << shift` with a signed cell shift.
    fn or_shifted(&mut self, iy: usize, src: &[u64], shift: i64) {
        let dst = &mut self.bits[iy * self.words..(iy + 1) * self.words];
        let mut any = false;
        if shift >= 0 {
            let (wsh, bsh) = ((shift / 64) as usize, (shift % 64) as u32);
            for w in (0..dst.len()).rev() {
                if w < wsh {
                    break;
                }
                let lo = src[w - wsh];
                let mut v = lo << bsh;
                if bsh > 0 && w > wsh {
                    v |= src[w - wsh - 1] >> (64 - bsh);
                }
                if v != 0 {
                    dst[w] |= v;
                    any = true;
                }
            }
        } else {
            let s = (-shift) as usize;
            let (wsh, bsh) = (s / 64, (s % 64) as u32);
            for w in 0..dst.len() {
                if w + wsh >= src.len() {
                    break;
                }
                let mut v = src[w + wsh] >> bsh;
                if bsh > 0 && w + wsh + 1 < src.len() {
                    v |= src[w + wsh + 1] << (64 - bsh);
                }
                if v != 0 {
                    dst[w] |= v;
                    any = true;
                }
            }
        }
        if any {
            self.nonempty[iy] = true;
        }
    }

    fn to_field(&self, spec: GridSpec) -> ScalarField {
        let mut out = ScalarField::zeros(spec);
        let width = self.width;
        let samples = out.samples_mut();
        for iy in 0..self.height {
            if !self.nonempty[iy] {
                continue;
            }
            for ix in 0..width {
                if self.bits[iy * self.words + ix / 64] >> (ix % 64) & 1 == 1 {
                    samples[iy * width + ix] = 1.0;
                }
            }
        }
        out
    }
}

/// Separating-axis intersection test for convex vertex rings; touching
/// counts as intersecting.
pub fn convex_rings_intersect(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
    convex_rings_separation(a, b).is_none()
}

/// `None` when convex rings intersect (or touch); otherwise the gap along
/// the first separating edge axis, a lower bound on their set distance.
pub fn convex_rings_separation(a: &[[f64; 2]], b: &[[f64; 2]]) -> Option<f64> {
    if let Some(gap) = separating_axis_gap(a, b) {
        return Some(gap);
    }
    separating_axis_gap(b, a)
}

fn separating_axis_gap(edges_of: &[[f64; 2]], other: &[[f64; 2]]) -> Option<f64> {
    let n = edges_of.len();
    for i in 0..n {
        let p = edges_of[i];
        let q = edges_of[(i + 1) % n];
        let axis = [q[1] - p[1], p[0] - q[0]];
        let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in edges_of {
            let d = v[0] * axis[0] + v[1] * axis[1];
            amin = amin.min(d);
            amax = amax.max(d);
        }
        let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in other {
            let d = v[0] * axis[0] + v[1] * axis[1];
            bmin = bmin.min(d);
            bmax = bmax.max(d);
        }
        if amax < bmin || bmax < amin {
            let gap = if amax < bmin { bmin - amax } else { amin - bmax };
            let len = (axis[0] * axis[0] + axis[1] * axis[1]).sqrt();
            if len > 0.0 {
                return Some(gap / len);
            }
        }
    }
    None
}

/// `dst |= dst << shift_bits` across the word array.
fn or_shift_left(dst: &mut [u64], shift_bits: usize) {
    let (wsh, bsh) = (shift_bits / 64, (shift_bits % 64) as u32);
    for w in (0..dst.len()).rev() {
        if w < wsh {
            break;
        }
        let mut v = dst[w - wsh] << bsh;
        if bsh > 0 && w > wsh {
            v |= dst[w - wsh - 1] >> (64 - bsh);
        }
        dst[w] |= v;
    }
}
