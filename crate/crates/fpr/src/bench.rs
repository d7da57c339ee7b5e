//! Scaling benchmark: per-path evaluation cost of the precomputed-field
//! bound versus the exact per-obstacle baseline, across obstacle counts.
//!
//! The arena extent is fixed for every K and the candidate paths are
//! generated once (ignoring obstacles), so timing differences isolate the
//! dependence on K: the bound should hold per-path cost flat while the
//! exact baseline grows linearly.

use crate::geometry::{swept_indicator, GridSpec, Polygon, Pose2};
use crate::paths::{generate_paths, Kinematics, Path};
use crate::risk::{exact_total, fpr_bound, laugier_exact, precompute_fields, Obstacle};
use crate::scenario::{GridChoice, Scenario};
use crate::{Error, Result};
use std::time::Instant;

/// One measured configuration.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub k: usize,
    pub n: usize,
    pub method: &'static str,
    pub precompute_ms: f64,
    pub per_path_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub k_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub sigma_cells: f64,
    pub resolution: f64,
}

/// Arena margins for the fixed benchmark scene.
const ARENA_SIDE: f64 = 56.0;

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.k_list.is_empty() || cfg.n_list.is_empty() {
        return Err(Error::InvalidInput("bench lists must be non-empty".into()));
    }
    if cfg.repeats == 0 {
        return Err(Error::InvalidInput("bench needs at least one repeat".into()));
    }
    let robot = Polygon::rectangle(4.0, 2.0).unwrap();
    let start = Pose2::new(1.0, ARENA_SIDE / 2.0, 0.0);
    let goal = Pose2::new(ARENA_SIDE - 1.0, ARENA_SIDE / 2.0, 0.0);
    let max_n = *cfg.n_list.iter().max().unwrap();
    let all_paths = generate_paths(start, goal, max_n, Kinematics::default(), cfg.seed, &[])?;
    let mut rows = Vec::new();
    for &k in &cfg.k_list {
        let obstacles = arena_obstacles(k, cfg.seed)?;
        let scn = Scenario {
            grid: GridChoice::Auto,
            robot: robot.clone(),
            obstacles,
            start,
            goal,
            seed: cfg.seed,
        };
        let spec = crate::scenario::resolve_grid(&scn, &all_paths, cfg.resolution, cfg.sigma_cells)?;
        for &n in &cfg.n_list {
            let paths = &all_paths[..n.min(all_paths.len())];
            let (fpr_pre, fpr_path) =
                time_fpr(&robot, &scn.obstacles, &spec, paths, cfg)?;
            rows.push(BenchRow {
                k,
                n,
                method: "fpr",
                precompute_ms: fpr_pre,
                per_path_ms: fpr_path,
            });
            let exact_path = time_exact(&robot, &scn.obstacles, &spec, paths, cfg)?;
            rows.push(BenchRow {
                k,
                n,
                method: "exact",
                precompute_ms: 0.0,
                per_path_ms: exact_path,
            });
        }
    }
    Ok(rows)
}

/// Cars scattered over the fixed arena, non-overlapping at their means.
fn arena_obstacles(k: usize, seed: u64) -> Result<Vec<Obstacle>> {
    use crate::fields::LocationDensity;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let mut means: Vec<[f64; 2]> = Vec::new();
    let mut out = Vec::with_capacity(k);
    let margin = 6.0;
    for i in 0..k {
        let mut done = false;
        for _ in 0..2000 {
            let m = [
                rng.random_range(margin..ARENA_SIDE - margin),
                rng.random_range(margin..ARENA_SIDE - margin),
            ];
            if means
                .iter()
                .all(|o| ((o[0] - m[0]).powi(2) + (o[1] - m[1]).powi(2)).sqrt() > 5.0)
            {
                means.push(m);
                out.push(Obstacle::new(
                    format!("b{i:03}"),
                    Polygon::rectangle(4.0, 2.0).unwrap(),
                    LocationDensity::isotropic_gaussian(m, 0.3).unwrap(),
                ));
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::PlacementFailed(format!(
                "bench arena cannot hold {k} obstacles"
            )));
        }
    }
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

fn time_fpr(
    robot: &Polygon,
    obstacles: &[Obstacle],
    spec: &GridSpec,
    paths: &[Path],
    cfg: &BenchConfig,
) -> Result<(f64, f64)> {
    let mut pre_times = Vec::with_capacity(cfg.repeats);
    let mut path_times = Vec::new();
    // Warm up caches and allocators before measuring.
    let rf = precompute_fields(obstacles, spec, cfg.sigma_cells)?;
    let warm = swept_indicator(&paths[0].poses(), robot, spec)?;
    let _ = fpr_bound(&warm, &rf)?;
    for _ in 0..cfg.repeats {
        let t0 = Instant::now();
        let rf = precompute_fields(obstacles, spec, cfg.sigma_cells)?;
        pre_times.push(t0.elapsed().as_secs_f64() * 1e3);
        for path in paths {
            let t1 = Instant::now();
            let swept = swept_indicator(&path.poses(), robot, spec)?;
            let _ = fpr_bound(&swept, &rf)?;
            path_times.push(t1.elapsed().as_secs_f64() * 1e3);
        }
    }
    Ok((median(&mut pre_times), median(&mut path_times)))
}

fn time_exact(
    robot: &Polygon,
    obstacles: &[Obstacle],
    spec: &GridSpec,
    paths: &[Path],
    cfg: &BenchConfig,
) -> Result<f64> {
    let mut path_times = Vec::new();
    let warm = swept_indicator(&paths[0].poses(), robot, spec)?;
    let _ = laugier_exact(&warm, &obstacles[0])?;
    for _ in 0..cfg.repeats {
        for path in paths {
            let t1 = Instant::now();
            let swept = swept_indicator(&path.poses(), robot, spec)?;
            let per: Vec<f64> = obstacles
                .iter()
                .map(|o| laugier_exact(&swept, o).map(|e| e.probability))
                .collect::<Result<_>>()?;
            let _ = exact_total(&per)?;
            path_times.push(t1.elapsed().as_secs_f64() * 1e3);
        }
    }
    Ok(median(&mut path_times))
}

/// CSV rows in a fixed column order.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("k,n,method,precompute_ms,per_path_ms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k, r.n, r.method, r.precompute_ms, r.per_path_ms
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_produces_full_cross_product() {
        let cfg = BenchConfig {
            k_list: vec![2, 4],
            n_list: vec![3],
            repeats: 1,
            seed: 0,
            sigma_cells: 2.0,
            resolution: 0.1,
        };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 1 * 2);
        assert!(rows.iter().all(|r| r.per_path_ms > 0.0));
        let csv = bench_csv(&rows);
        assert!(csv.starts_with("k,n,method,precompute_ms,per_path_ms\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn empty_lists_rejected() {
        let cfg = BenchConfig {
            k_list: vec![],
            n_list: vec![1],
            repeats: 1,
            seed: 0,
            sigma_cells: 2.0,
            resolution: 0.1,
        };
        assert!(run_bench(&cfg).is_err());
    }
}
