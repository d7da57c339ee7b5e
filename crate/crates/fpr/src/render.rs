//! Deterministic PPM rendering: field heatmaps and path overlays colored
//! by log risk.

use crate::geometry::{resample_poses, GridSpec, Pose2, ScalarField};
use crate::paths::Path;
use crate::risk::Obstacle;
use crate::Result;
use std::collections::HashMap;
use std::io::Write;
use std::path::Path as FsPath;

/// Write bytes via a temp file and rename, so failures never leave a
/// partial output behind.
pub fn write_atomic(file: &FsPath, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = file.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = file.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, file)?;
    Ok(())
}

/// Binary PPM with the exact header `P6\n<w> <h>\n255\n`.
pub fn write_ppm(file: &FsPath, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut bytes = format!("P6\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(rgb);
    write_atomic(file, &bytes)
}

/// Black-red-yellow-white heat ramp for `t` in [0, 1].
fn heat_color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let r = (3.0 * t).min(1.0);
    let g = (3.0 * t - 1.0).clamp(0.0, 1.0);
    let b = (3.0 * t - 2.0).clamp(0.0, 1.0);
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8]
}

/// Blue-to-red ramp over `log10(f_d)` clamped to [-5, 0].
pub fn risk_color(f_d: f64) -> [u8; 3] {
    if !f_d.is_finite() {
        return GRAY;
    }
    let l = f_d.max(1e-30).log10().clamp(-5.0, 0.0);
    let t = (l + 5.0) / 5.0;
    let lerp = |a: u8, b: u8| (a as f64 + t * (b as f64 - a as f64)) as u8;
    [lerp(30, 225), lerp(60, 40), lerp(220, 35)]
}

const GRAY: [u8; 3] = [128, 128, 128];
const BACKGROUND: [u8; 3] = [18, 18, 24];
const OBSTACLE: [u8; 3] = [70, 70, 80];

/// Normalized heatmap of a field. Row 0 of the image is the top of the
/// world (largest y). An all-zero field renders as uniform background.
pub fn heatmap_rgb(field: &ScalarField) -> Vec<u8> {
    let spec = field.spec();
    let max = field.max_value();
    let mut rgb = Vec::with_capacity(spec.cells() * 3);
    for row in 0..spec.height {
        let iy = spec.height - 1 - row;
        for ix in 0..spec.width {
            let c = if max > 0.0 {
                heat_color(field.get(ix, iy) / max)
            } else {
                BACKGROUND
            };
            rgb.extend_from_slice(&c);
        }
    }
    rgb
}

pub fn save_heatmap(field: &ScalarField, file: &FsPath) -> Result<()> {
    let spec = field.spec();
    write_ppm(file, spec.width, spec.height, &heatmap_rgb(field))
}

/// Paths over the scene, colored by their risk bound; ids missing from the
/// risk map are drawn gray and reported back.
pub fn paths_rgb(
    spec: &GridSpec,
    obstacles: &[Obstacle],
    paths: &[Path],
    risk_by_id: &HashMap<String, f64>,
) -> (Vec<u8>, Vec<String>) {
    let mut cells = vec![BACKGROUND; spec.cells()];
    for obs in obstacles {
        let m = obs.density.mean();
        if let Ok(f) = crate::geometry::rasterize_polygon(
            &obs.shape,
            &Pose2::new(m[0], m[1], 0.0),
            spec,
        ) {
            for (i, &v) in f.samples().iter().enumerate() {
                if v != 0.0 {
                    cells[i] = OBSTACLE;
                }
            }
        }
    }
    let mut missing = Vec::new();
    for path in paths {
        let color = match risk_by_id.get(&path.id) {
            Some(&f_d) => risk_color(f_d),
            None => {
                missing.push(path.id.clone());
                GRAY
            }
        };
        let dense = resample_poses(&path.poses(), 0.0, 0.5 * spec.resolution);
        for pose in dense {
            let (ix, iy) = spec.nearest_cell([pose.x, pose.y]);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    if spec.contains_cell(ix + dx, iy + dy) {
                        cells[spec.index((ix + dx) as usize, (iy + dy) as usize)] = color;
                    }
                }
            }
        }
    }
    let mut rgb = Vec::with_capacity(spec.cells() * 3);
    for row in 0..spec.height {
        let iy = spec.height - 1 - row;
        for ix in 0..spec.width {
            rgb.extend_from_slice(&cells[iy * spec.width + ix]);
        }
    }
    (rgb, missing)
}
