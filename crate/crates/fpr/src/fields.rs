//! Gaussian kernels, separable convolution, contour ridges, location
//! densities, and Riemann-sum integration on [`ScalarField`] grids.
//!
//! Kernels live in the cell domain (taps are dimensionless and sampled at
//! integer cell offsets); fields carry the meters-per-cell scale. All
//! convolutions zero-pad at the grid boundary — scenario grids are padded
//! so that boundary effects stay below test tolerances.

use crate::geometry::{GridSpec, ScalarField};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Kernel taps are truncated at this many sigmas and renormalized; the
/// discarded mass is below 1e-4.
const KERNEL_SUPPORT_SIGMAS: f64 = 4.0;

/// Raw density rasterization keeps a little more tail than the kernels:
/// exact Laugier integrals of near-certain collisions are compared against
/// an untruncated sampling oracle, so the sampled density should not be
/// missing measurable mass.
const DENSITY_SUPPORT_SIGMAS: f64 = 5.0;

/// Below this sigma (in cells) a Gaussian factor cannot be resolved on the
/// lattice and is treated as a delta at the nearest cell.
const DELTA_SIGMA_CELLS: f64 = 1e-2;

/// Densities narrower than half a cell are rasterized as single-cell
/// masses; wider ones are sampled at cell centers (aliasing is negligible
/// from ~0.7 cells up).
const POINT_MASS_SIGMA_CELLS: f64 = 0.5;

/// A density that lost more than this fraction of its mass to the grid
/// boundary gets a truncation warning.
pub const TRUNCATION_WARN_FRACTION: f64 = 1e-3;

/// Symmetric, normalized 1D Gaussian tap set.
#[derive(Debug, Clone)]
pub struct Kernel1D {
    taps: Vec<f64>,
    sigma_cells: f64,
}

impl Kernel1D {
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sigma_cells(&self) -> f64 {
        self.sigma_cells
    }

    /// Support radius in cells; taps cover `[-radius, radius]`.
    pub fn radius(&self) -> usize {
        self.taps.len() / 2
    }
}

/// Discretely normalized Gaussian smoothing kernel with support radius
/// `ceil(4 sigma)`.
pub fn gaussian_kernel(sigma_cells: f64) -> Result<Kernel1D> {
    if !(sigma_cells.is_finite() && sigma_cells > 0.0) {
        return Err(Error::InvalidInput(format!(
            "kernel sigma must be positive, got {sigma_cells}"
        )));
    }
    let radius = (KERNEL_SUPPORT_SIGMAS * sigma_cells).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|d| (-0.5 * (d as f64 / sigma_cells).powi(2)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    Ok(Kernel1D { taps, sigma_cells })
}

/// Analytic samples of the Gaussian derivative, scaled so the first moment
/// `sum d * k[d]` is exactly -1. With that normalization the absolute
/// response to a unit step sums to 1 per row, which makes ridge integrals
/// converge to contour length.
fn derivative_taps(sigma_cells: f64) -> Vec<f64> {
    let radius = (KERNEL_SUPPORT_SIGMAS * sigma_cells).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|d| {
            let d = d as f64;
            -d * (-0.5 * (d / sigma_cells).powi(2)).exp()
        })
        .collect();
    let moment: f64 = raw
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as i64 - radius) as f64 * v)
        .sum();
    raw.iter().map(|&v| -v / moment).collect()
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// 1D convolution along one axis with zero padding:
/// `out[i] = sum_t taps[t] * f[i - (lo + t)]`.
fn convolve_axis(f: &ScalarField, taps: &[f64], lo: i64, axis: Axis) -> ScalarField {
    let spec = f.spec().clone();
    let (w, h) = (spec.width, spec.height);
    let mut out = ScalarField::zeros(spec);
    let src = f.samples();
    let dst = out.samples_mut();
    match axis {
        Axis::X => {
            for iy in 0..h {
                let row = &src[iy * w..(iy + 1) * w];
                let orow = &mut dst[iy * w..(iy + 1) * w];
                for (ix, o) in orow.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (t, &k) in taps.iter().enumerate() {
                        let j = ix as i64 - lo - t as i64;
                        if j >= 0 && (j as usize) < w {
                            acc += k * row[j as usize];
                        }
                    }
                    *o = acc;
                }
            }
        }
        Axis::Y => {
            for iy in 0..h {
                let orow_start = iy * w;
                for (t, &k) in taps.iter().enumerate() {
                    let j = iy as i64 - lo - t as i64;
                    if j < 0 || (j as usize) >= h {
                        continue;
                    }
                    let srow = &src[(j as usize) * w..(j as usize + 1) * w];
                    let orow = &mut dst[orow_start..orow_start + w];
                    for (o, &s) in orow.iter_mut().zip(srow) {
                        *o += k * s;
                    }
                }
            }
        }
    }
    out
}

/// Separable 2D smoothing `f * g_sigma` with zero padding; the output spec
/// equals the input spec.
pub fn convolve_separable(f: &ScalarField, kernel: &Kernel1D) -> ScalarField {
    let lo = -(kernel.radius() as i64);
    let tmp = convolve_axis(f, kernel.taps(), lo, Axis::X);
    convolve_axis(&tmp, kernel.taps(), lo, Axis::Y)
}

/// Delta-function ridge of an indicator: `|grad(g_sigma) * I|`, in 1/m.
///
/// Uses analytic derivative-of-Gaussian taps rather than finite differences
/// of the smoothing kernel; for a straight boundary the ridge profile
/// integrates to 1 across the contour, so the field integral approximates
/// the contour length.
pub fn ridge(indicator: &ScalarField, sigma_cells: f64) -> Result<ScalarField> {
    if !indicator.is_indicator() {
        return Err(Error::InvalidInput("ridge expects an indicator field".into()));
    }
    let smooth = gaussian_kernel(sigma_cells)?;
    let deriv = derivative_taps(sigma_cells);
    let lo = -(smooth.radius() as i64);
    let dx = convolve_axis(
        &convolve_axis(indicator, &deriv, lo, Axis::X),
        smooth.taps(),
        lo,
        Axis::Y,
    );
    let mut dy = convolve_axis(
        &convolve_axis(indicator, smooth.taps(), lo, Axis::X),
        &deriv,
        lo,
        Axis::Y,
    );
    let inv_res = 1.0 / indicator.spec().resolution;
    for (gy, &gx) in dy.samples_mut().iter_mut().zip(dx.samples()) {
        *gy = (gx * gx + *gy * *gy).sqrt() * inv_res;
    }
    Ok(dy)
}

/// Probability density over planar locations.
#[derive(Debug, Clone)]
pub enum LocationDensity {
    /// Bivariate normal; the covariance may be singular (a point mass or a
    /// line mass) but not indefinite.
    Gaussian { mean: [f64; 2], cov: [[f64; 2]; 2] },
    /// Arbitrary density sampled on its own grid (values in 1/m^2,
    /// integrating to 1).
    Gridded(ScalarField),
}

impl LocationDensity {
    pub fn gaussian(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        if !(mean[0].is_finite() && mean[1].is_finite()) {
            return Err(Error::InvalidInput("density mean must be finite".into()));
        }
        let flat = [cov[0][0], cov[0][1], cov[1][0], cov[1][1]];
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("density covariance must be finite".into()));
        }
        let scale = flat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if (cov[0][1] - cov[1][0]).abs() > 1e-9 * scale.max(1e-30) {
            return Err(Error::InvalidInput("covariance must be symmetric".into()));
        }
        let (lo, _) = sym_eigenvalues(cov);
        if lo < -1e-12 * scale.max(1e-30) {
            return Err(Error::InvalidInput(
                "covariance must be positive semi-definite".into(),
            ));
        }
        Ok(Self::Gaussian { mean, cov })
    }

    pub fn delta(mean: [f64; 2]) -> Result<Self> {
        Self::gaussian(mean, [[0.0, 0.0], [0.0, 0.0]])
    }

    pub fn isotropic_gaussian(mean: [f64; 2], sigma: f64) -> Result<Self> {
        Self::gaussian(mean, [[sigma * sigma, 0.0], [0.0, sigma * sigma]])
    }

    pub fn gridded(field: ScalarField) -> Result<Self> {
        if field.samples().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("gridded density must be non-negative".into()));
        }
        let mass = integrate(&field);
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "gridded density integrates to {mass}, expected 1"
            )));
        }
        Ok(Self::Gridded(field))
    }

    /// Mean location: the Gaussian mean, or the gridded centroid.
    pub fn mean(&self) -> [f64; 2] {
        match self {
            Self::Gaussian { mean, .. } => *mean,
            Self::Gridded(f) => {
                let spec = f.spec();
                let mut mx = 0.0;
                let mut my = 0.0;
                let mut m = 0.0;
                for iy in 0..spec.height {
                    for ix in 0..spec.width {
                        let v = f.get(ix, iy);
                        if v > 0.0 {
                            let c = spec.cell_center(ix, iy);
                            mx += v * c[0];
                            my += v * c[1];
                            m += v;
                        }
                    }
                }
                if m > 0.0 {
                    [mx / m, my / m]
                } else {
                    [0.0, 0.0]
                }
            }
        }
    }

    /// Square roots of the covariance eigenvalues (min, max); a gridded
    /// density reports its grid half-extents as a conservative stand-in.
    pub fn sigma_range(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { cov, .. } => {
                let (lo, hi) = sym_eigenvalues(*cov);
                (lo.max(0.0).sqrt(), hi.max(0.0).sqrt())
            }
            Self::Gridded(f) => {
                let spec = f.spec();
                let hx = spec.width as f64 * spec.resolution / 2.0;
                let hy = spec.height as f64 * spec.resolution / 2.0;
                (hx.min(hy), hx.max(hy))
            }
        }
    }

    /// The same density recentered so its mean sits at the origin.
    pub fn centered(&self) -> LocationDensity {
        match self {
            Self::Gaussian { cov, .. } => Self::Gaussian {
                mean: [0.0, 0.0],
                cov: *cov,
            },
            Self::Gridded(f) => {
                let m = self.mean();
                let spec = f.spec();
                let shifted = GridSpec {
                    origin: [spec.origin[0] - m[0], spec.origin[1] - m[1]],
                    ..spec.clone()
                };
                Self::Gridded(
                    ScalarField::from_samples(shifted, f.samples().to_vec())
                        .expect("same sample count"),
                )
            }
        }
    }
}

/// Eigenvalues (lo, hi) of a symmetric 2x2 matrix.
fn sym_eigenvalues(m: [[f64; 2]; 2]) -> (f64, f64) {
    let half_tr = (m[0][0] + m[1][1]) / 2.0;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    (half_tr - disc, half_tr + disc)
}

/// Result of [`convolve_density`]: the convolved field plus the fraction of
/// input mass lost past the grid boundary.
#[derive(Debug, Clone)]
pub struct DensityConvolved {
    pub field: ScalarField,
    pub truncated_mass: f64,
}

impl DensityConvolved {
    pub fn truncation_warning(&self) -> bool {
        self.truncated_mass > TRUNCATION_WARN_FRACTION
    }
}

/// Gaussian taps sampled on the cell lattice at world offset `mean_m`,
/// normalized to sum 1. Returns `(taps, lo)` with tap `t` applying at cell
/// displacement `lo + t`. Collapses to a nearest-cell delta when sigma is
/// unresolvable.
fn shifted_gaussian_taps(mean_m: f64, sigma_m: f64, res: f64) -> (Vec<f64>, i64) {
    let nearest = (mean_m / res).round() as i64;
    if sigma_m < DELTA_SIGMA_CELLS * res {
        return (vec![1.0], nearest);
    }
    let lo = ((mean_m - KERNEL_SUPPORT_SIGMAS * sigma_m) / res).floor() as i64;
    let hi = ((mean_m + KERNEL_SUPPORT_SIGMAS * sigma_m) / res).ceil() as i64;
    let mut taps: Vec<f64> = (lo..=hi)
        .map(|d| (-0.5 * ((d as f64 * res - mean_m) / sigma_m).powi(2)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    if sum <= 0.0 {
        return (vec![1.0], nearest);
    }
    for t in &mut taps {
        *t /= sum;
    }
    (taps, lo)
}

/// Convolve a field with a location density: `f * p` on `f`'s grid.
///
/// Diagonal Gaussians run as two shifted separable passes (the mean enters
/// the tap sampling, so sub-cell offsets are exact). Correlated Gaussians
/// are rasterized to a normalized patch and convolved directly; gridded
/// densities convolve directly on their own lattice. Either route keeps
/// unit DC gain, so mass is preserved up to boundary truncation, which is
/// reported in the result.
pub fn convolve_density(f: &ScalarField, p: &LocationDensity) -> Result<DensityConvolved> {
    let res = f.spec().resolution;
    let field = match p {
        LocationDensity::Gaussian { mean, cov } => {
            let off_diag_sq = cov[0][1] * cov[0][1];
            if off_diag_sq <= 1e-12 * (cov[0][0] * cov[1][1]).max(1e-300) {
                let (tx, lox) = shifted_gaussian_taps(mean[0], cov[0][0].max(0.0).sqrt(), res);
                let (ty, loy) = shifted_gaussian_taps(mean[1], cov[1][1].max(0.0).sqrt(), res);
                let tmp = convolve_axis(f, &tx, lox, Axis::X);
                convolve_axis(&tmp, &ty, loy, Axis::Y)
            } else {
                let (taps, lox, loy) = correlated_gaussian_patch(*mean, *cov, res)?;
                scatter_convolve(f, &taps, lox, loy, 1.0)
            }
        }
        LocationDensity::Gridded(q) => {
            let qspec = q.spec();
            if (qspec.resolution - res).abs() > 1e-12 * res {
                return Err(Error::InvalidInput(
                    "gridded density resolution must match the field".into(),
                ));
            }
            let ox = (qspec.origin[0] / res).round() as i64;
            let oy = (qspec.origin[1] / res).round() as i64;
            let taps: Vec<Vec<f64>> = (0..qspec.height)
                .map(|iy| q.samples()[iy * qspec.width..(iy + 1) * qspec.width].to_vec())
                .collect();
            scatter_convolve(f, &taps, ox, oy, res * res)
        }
    };
    let mass_in = integrate(f);
    let mass_out = integrate(&field);
    let truncated_mass = if mass_in.abs() > 0.0 {
        ((mass_in - mass_out) / mass_in).max(0.0)
    } else {
        0.0
    };
    Ok(DensityConvolved {
        field,
        truncated_mass,
    })
}

/// Normalized 2D tap patch for a correlated Gaussian, sampled at cell
/// displacements. Near-singular covariances get their small eigenvalue
/// floored to half a cell so the patch stays resolvable.
fn correlated_gaussian_patch(
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
    res: f64,
) -> Result<(Vec<Vec<f64>>, i64, i64)> {
    let floor = (POINT_MASS_SIGMA_CELLS * res).powi(2);
    let (lo_eig, _) = sym_eigenvalues(cov);
    let bump = (floor - lo_eig).max(0.0);
    let cov = [
        [cov[0][0] + bump, cov[0][1]],
        [cov[1][0], cov[1][1] + bump],
    ];
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    if det <= 0.0 {
        return Err(Error::Numerical("covariance patch is singular".into()));
    }
    let inv = [
        [cov[1][1] / det, -cov[0][1] / det],
        [-cov[1][0] / det, cov[0][0] / det],
    ];
    let rx = KERNEL_SUPPORT_SIGMAS * cov[0][0].sqrt();
    let ry = KERNEL_SUPPORT_SIGMAS * cov[1][1].sqrt();
    let lox = ((mean[0] - rx) / res).floor() as i64;
    let hix = ((mean[0] + rx) / res).ceil() as i64;
    let loy = ((mean[1] - ry) / res).floor() as i64;
    let hiy = ((mean[1] + ry) / res).ceil() as i64;
    let mut taps = Vec::with_capacity((hiy - loy + 1) as usize);
    let mut sum = 0.0;
    for dy in loy..=hiy {
        let y = dy as f64 * res - mean[1];
        let mut row = Vec::with_capacity((hix - lox + 1) as usize);
        for dx in lox..=hix {
            let x = dx as f64 * res - mean[0];
            let q = inv[0][0] * x * x + 2.0 * inv[0][1] * x * y + inv[1][1] * y * y;
            let v = (-0.5 * q).exp();
            sum += v;
            row.push(v);
        }
        taps.push(row);
    }
    if sum <= 0.0 {
        return Err(Error::Numerical("covariance patch underflowed".into()));
    }
    for row in &mut taps {
        for v in row {
            *v /= sum;
        }
    }
    Ok((taps, lox, loy))
}

/// Direct convolution by scattering each nonzero source cell through a tap
/// patch; `tap[j][i]` applies at displacement `(lox + i, loy + j)`.
fn scatter_convolve(
    f: &ScalarField,
    taps: &[Vec<f64>],
    lox: i64,
    loy: i64,
    scale: f64,
) -> ScalarField {
    let spec = f.spec().clone();
    let (w, h) = (spec.width, spec.height);
    let mut out = ScalarField::zeros(spec);
    let dst = out.samples_mut();
    for uy in 0..h {
        for ux in 0..w {
            let v = f.samples()[uy * w + ux] * scale;
            if v == 0.0 {
                continue;
            }
            for (j, row) in taps.iter().enumerate() {
                let ty = uy as i64 + loy + j as i64;
                if ty < 0 || ty as usize >= h {
                    continue;
                }
                let trow = &mut dst[(ty as usize) * w..(ty as usize + 1) * w];
                for (i, &t) in row.iter().enumerate() {
                    if t == 0.0 {
                        continue;
                    }
                    let tx = ux as i64 + lox + i as i64;
                    if tx >= 0 && (tx as usize) < w {
                        trow[tx as usize] += v * t;
                    }
                }
            }
        }
    }
    out
}

/// Sample a density on a grid as values in 1/m^2. Returns the field and the
/// fraction of probability mass captured inside the grid.
///
/// Point masses (sigma below half a cell) land on the nearest cell as a
/// single-cell mass of `1 / cell_area`.
pub fn density_field(p: &LocationDensity, spec: &GridSpec) -> (ScalarField, f64) {
    let res = spec.resolution;
    match p {
        LocationDensity::Gaussian { mean, cov } => {
            let (_, sig_hi) = sym_eigenvalues(*cov);
            if sig_hi.max(0.0).sqrt() < POINT_MASS_SIGMA_CELLS * res {
                let mut out = ScalarField::zeros(spec.clone());
                let (ix, iy) = spec.nearest_cell(*mean);
                if spec.contains_cell(ix, iy) {
                    out.set(ix as usize, iy as usize, 1.0 / spec.cell_area());
                    return (out, 1.0);
                }
                return (out, 0.0);
            }
            let floor = (POINT_MASS_SIGMA_CELLS * res).powi(2);
            let (lo_eig, _) = sym_eigenvalues(*cov);
            let bump = (floor - lo_eig).max(0.0);
            let cov = [
                [cov[0][0] + bump, cov[0][1]],
                [cov[1][0], cov[1][1] + bump],
            ];
            let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
            let inv = [
                [cov[1][1] / det, -cov[0][1] / det],
                [-cov[1][0] / det, cov[0][0] / det],
            ];
            let norm = 1.0 / (2.0 * PI * det.sqrt());
            let rx = DENSITY_SUPPORT_SIGMAS * cov[0][0].sqrt() + res;
            let ry = DENSITY_SUPPORT_SIGMAS * cov[1][1].sqrt() + res;
            let x0 = (((mean[0] - rx - spec.origin[0]) / res).floor().max(0.0)) as usize;
            let y0 = (((mean[1] - ry - spec.origin[1]) / res).floor().max(0.0)) as usize;
            let x1 = ((mean[0] + rx - spec.origin[0]) / res).ceil().max(0.0) as usize;
            let y1 = ((mean[1] + ry - spec.origin[1]) / res).ceil().max(0.0) as usize;
            let mut out = ScalarField::zeros(spec.clone());
            let mut captured = Kahan::default();
            for iy in y0..=y1.min(spec.height.saturating_sub(1)) {
                for ix in x0..=x1.min(spec.width.saturating_sub(1)) {
                    let c = spec.cell_center(ix, iy);
                    let x = c[0] - mean[0];
                    let y = c[1] - mean[1];
                    let q = inv[0][0] * x * x + 2.0 * inv[0][1] * x * y + inv[1][1] * y * y;
                    let v = norm * (-0.5 * q).exp();
                    if v > 0.0 {
                        out.set(ix, iy, v);
                        captured.add(v * spec.cell_area());
                    }
                }
            }
            (out, captured.sum())
        }
        LocationDensity::Gridded(q) => {
            let qspec = q.spec();
            let mut out = ScalarField::zeros(spec.clone());
            let mut captured = Kahan::default();
            let q_cell_mass = qspec.cell_area();
            for iy in 0..qspec.height {
                for ix in 0..qspec.width {
                    let v = q.get(ix, iy);
                    if v <= 0.0 {
                        continue;
                    }
                    let (tx, ty) = spec.nearest_cell(qspec.cell_center(ix, iy));
                    if spec.contains_cell(tx, ty) {
                        let mass = v * q_cell_mass;
                        let idx = spec.index(tx as usize, ty as usize);
                        out.samples_mut()[idx] += mass / spec.cell_area();
                        captured.add(mass);
                    }
                }
            }
            (out, captured.sum())
        }
    }
}

/// Compensated (Kahan) accumulator; integration sums stay reproducible to
/// well below the 1e-12 tolerances the tests pin.
#[derive(Default, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }
}

/// Riemann sum of the field times cell area.
pub fn integrate(f: &ScalarField) -> f64 {
    let mut acc = Kahan::default();
    for &v in f.samples() {
        acc.add(v);
    }
    acc.sum() * f.spec().cell_area()
}

/// Riemann sum of the pointwise product `a * b` times cell area, visiting
/// only cells where `a` is nonzero. The grids must share a lattice but may
/// cover different windows; cells outside `b` read as zero.
pub fn integrate_product(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    let (ox, oy) = b.spec().offset_of(a.spec()).ok_or_else(|| {
        Error::InvalidInput("integrate_product requires lattice-aligned specs".into())
    })?;
    let (aw, ah) = (a.spec().width, a.spec().height);
    let (bw, bh) = (b.spec().width, b.spec().height);
    let mut acc = Kahan::default();
    for ay in 0..ah {
        let by = oy + ay as i64;
        if by < 0 || by as usize >= bh {
            continue;
        }
        let arow = &a.samples()[ay * aw..(ay + 1) * aw];
        let brow = &b.samples()[(by as usize) * bw..(by as usize + 1) * bw];
        for (ax, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let bx = ox + ax as i64;
            if bx >= 0 && (bx as usize) < bw {
                acc.add(av * brow[bx as usize]);
            }
        }
    }
    Ok(acc.sum() * a.spec().cell_area())
}

/// Numerically evaluate the crossing integral of two straight delta ridges
/// meeting at `theta`: build the two half-plane indicators on a grid sized
/// for the angle, ridge both, and integrate their product. For normalized
/// Gaussian profiles the exact value is `1 / sin(theta)`.
///
/// This is a test-support operation: the contour-convolution bound relies
/// on each contour crossing contributing at least 1.
pub fn ridge_crossing_integral(theta: f64, sigma_cells: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI / 2.0) {
        return Err(Error::InvalidInput(format!(
            "crossing angle must be in (0, pi/2], got {theta}"
        )));
    }
    if !(sigma_cells.is_finite() && sigma_cells > 0.0) {
        return Err(Error::InvalidInput("sigma must be positive".into()));
    }
    let radius = (KERNEL_SUPPORT_SIGMAS * sigma_cells).ceil() as usize;
    let band = 2 * radius + 2;
    let half = (5.0 * sigma_cells / theta.sin()
        + band as f64
        + KERNEL_SUPPORT_SIGMAS * sigma_cells)
        .ceil() as usize;
    let n = 2 * half + 1;
    if n > 2048 || theta.sin() < 4.0 / n as f64 {
        return Err(Error::InvalidInput(format!(
            "angle {theta} too shallow for the grid support"
        )));
    }
    let c = half as f64;
    let spec = GridSpec::new([-c, -c], 1.0, n, n)?;
    let mut ind_a = ScalarField::zeros(spec.clone());
    let mut ind_b = ScalarField::zeros(spec.clone());
    // Contour of A is a vertical line, contour of B crosses it at `theta`.
    // Both lines sit at sub-cell offsets: lattice-aligned lines are a
    // degenerate case of the cell-center rule (whole cell rows land
    // exactly on the boundary) and bias the integral.
    let (ax, bx, by) = (0.31, 0.13, -0.27);
    let nb = [theta.cos(), -theta.sin()];
    for iy in 0..n {
        for ix in 0..n {
            let p = spec.cell_center(ix, iy);
            if p[0] <= ax {
                ind_a.set(ix, iy, 1.0);
            }
            if nb[0] * (p[0] - bx) + nb[1] * (p[1] - by) <= 0.0 {
                ind_b.set(ix, iy, 1.0);
            }
        }
    }
    let mut ra = ridge(&ind_a, sigma_cells)?;
    let mut rb = ridge(&ind_b, sigma_cells)?;
    // The grid border is an artificial step under zero padding; blank a
    // band wide enough to swallow its ridge before integrating.
    for f in [&mut ra, &mut rb] {
        let samples = f.samples_mut();
        for iy in 0..n {
            for ix in 0..n {
                if ix < band || iy < band || ix >= n - band || iy >= n - band {
                    samples[iy * n + ix] = 0.0;
                }
            }
        }
    }
    integrate_product(&ra, &rb)
}
