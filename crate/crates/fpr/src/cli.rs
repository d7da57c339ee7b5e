//! Command-line workflows: evaluate, bench, render, gen-scenario.
//!
//! Exit codes: 0 ok, 1 input/schema error, 2 numerical failure,
//! 3 generation/placement failure. All commands are deterministic for a
//! fixed `--seed`; timing columns are opt-in (`--timings`) so default
//! outputs are byte-reproducible.

use crate::bench::{bench_csv, run_bench, BenchConfig};
use crate::paths::{generate_paths, load_paths, save_paths, Kinematics, Path};
use crate::render::{paths_rgb, save_heatmap, write_atomic, write_ppm};
use crate::risk::{evaluate_paths, EvalOptions, RiskReport};
use crate::scenario::{
    generate_scenario, load_scenario, resolve_grid, save_scenario_file, Scenario, Template,
    DEFAULT_RESOLUTION,
};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fpr",
    about = "Fast probabilistic collision-risk bounds for 2D robot paths",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate candidate paths against a scenario; writes risks.csv.
    Evaluate(EvaluateArgs),
    /// Time bound evaluation vs the exact baseline across obstacle counts.
    Bench(BenchArgs),
    /// Render field heatmaps and a risk-colored path overlay.
    Render(RenderArgs),
    /// Write a synthetic scenario file.
    GenScenario(GenScenarioArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Ridge smoothing scale in grid cells.
    #[arg(long, default_value_t = 2.0)]
    sigma_cells: f64,
    /// Grid resolution in meters per cell (auto grids only).
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: f64,
    /// Seed override; defaults to the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Path JSON file (or use --gen).
    paths: Option<PathBuf>,
    /// Generate this many candidate paths instead of loading a file.
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
    /// Also compute the exact per-obstacle baseline (slow).
    #[arg(long)]
    exact: bool,
    /// Also compute a Monte-Carlo estimate per path.
    #[arg(long)]
    mc: bool,
    /// Monte-Carlo samples per path.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Fill the eval_ms column (timings make output non-reproducible).
    #[arg(long)]
    timings: bool,
    /// Also render heatmaps and the path overlay into the output dir.
    #[arg(long)]
    render: bool,
    /// Save the evaluated paths (useful together with --gen).
    #[arg(long, value_name = "FILE")]
    save_paths: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Obstacle counts to sweep.
    #[arg(long, value_delimiter = ',', default_value = "10,35,100")]
    k_list: Vec<usize>,
    /// Path counts to sweep.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    n_list: Vec<usize>,
    /// Repeats per configuration; medians are reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    sigma_cells: f64,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Risk CSV produced by evaluate.
    risks: PathBuf,
    /// Path JSON file the CSV refers to (or use --gen).
    #[arg(long)]
    paths: Option<PathBuf>,
    /// Regenerate this many paths (same seed as evaluate --gen).
    #[arg(long, value_name = "N")]
    gen: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GenScenarioArgs {
    #[arg(long, value_enum)]
    template: TemplateArg,
    /// Number of obstacles.
    #[arg(long)]
    k: usize,
    /// Positional standard deviation in meters (template default if unset).
    #[arg(long)]
    std: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (or a directory to receive scenario.json).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TemplateArg {
    Carpark,
    Random,
}

impl From<TemplateArg> for Template {
    fn from(t: TemplateArg) -> Template {
        match t {
            TemplateArg::Carpark => Template::Carpark,
            TemplateArg::Random => Template::Random,
        }
    }
}

impl Cli {
    pub fn run(self) -> Result<()> {
        match self.command {
            Command::Evaluate(args) => cmd_evaluate(args),
            Command::Bench(args) => cmd_bench(args),
            Command::Render(args) => cmd_render(args),
            Command::GenScenario(args) => cmd_gen_scenario(args),
        }
    }
}

fn obtain_paths(
    scn: &Scenario,
    file: Option<&PathBuf>,
    gen: Option<usize>,
    seed: u64,
) -> Result<Vec<Path>> {
    match (file, gen) {
        (Some(f), None) => load_paths(f),
        (None, Some(n)) => generate_paths(
            scn.start,
            scn.goal,
            n,
            Kinematics::default(),
            seed,
            &scn.obstacles,
        ),
        (None, None) => Err(Error::InvalidInput(
            "provide a paths file or --gen N".into(),
        )),
        (Some(_), Some(_)) => Err(Error::InvalidInput(
            "provide either a paths file or --gen, not both".into(),
        )),
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let scn = load_scenario(&args.scenario)?;
    let seed = args.common.seed.unwrap_or(scn.seed);
    let paths = obtain_paths(&scn, args.paths.as_ref(), args.gen, seed)?;
    if let Some(file) = &args.save_paths {
        save_paths(&paths, file)?;
    }
    let spec = resolve_grid(&scn, &paths, args.common.resolution, args.common.sigma_cells)?;
    let opts = EvalOptions {
        sigma_cells: args.common.sigma_cells,
        exact: args.exact,
        mc_samples: args.mc.then_some(args.samples),
        seed,
    };
    let eval = evaluate_paths(&scn.robot, &scn.obstacles, &spec, &paths, &opts)?;
    for r in &eval.reports {
        if let Some(err) = &r.error {
            eprintln!("warning: path {}: {err}", r.path_id);
        }
    }
    let csv = risks_csv(&eval.reports, args.timings);
    std::fs::create_dir_all(&args.common.out)?;
    let csv_path = args.common.out.join("risks.csv");
    write_atomic(&csv_path, csv.as_bytes())?;
    eprintln!(
        "evaluated {} paths against {} obstacles (precompute {:.1} ms) -> {}",
        eval.reports.len(),
        scn.obstacles.len(),
        eval.precompute_ms,
        csv_path.display()
    );
    if args.render {
        let risk_map = risk_map_from_reports(&eval.reports);
        render_outputs(&scn, &spec, &paths, &risk_map, &args.common)?;
    }
    Ok(())
}

/// Risk CSV with a fixed column order; disabled columns stay empty.
fn risks_csv(reports: &[RiskReport], timings: bool) -> String {
    let mut out = String::from("path_id,f_d,p_d_exact,p_d_mc,mc_stderr,eval_ms\n");
    for r in reports {
        let f_d = if r.error.is_some() {
            String::new()
        } else {
            format!("{}", r.f_d)
        };
        let p_exact = r.p_d_exact.map(|v| format!("{v}")).unwrap_or_default();
        let (p_mc, mc_err) = match &r.p_d_mc {
            Some(m) => (format!("{}", m.p_hat), format!("{}", m.stderr)),
            None => (String::new(), String::new()),
        };
        let ms = if timings {
            format!("{}", r.eval_ms)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.path_id, f_d, p_exact, p_mc, mc_err, ms
        ));
    }
    out
}

fn risk_map_from_reports(reports: &[RiskReport]) -> HashMap<String, f64> {
    reports
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| (r.path_id.clone(), r.f_d))
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        k_list: args.k_list,
        n_list: args.n_list,
        repeats: args.repeats,
        seed: args.seed,
        sigma_cells: args.sigma_cells,
        resolution: args.resolution,
    };
    let rows = run_bench(&cfg)?;
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("bench.csv");
    write_atomic(&path, bench_csv(&rows).as_bytes())?;
    for r in &rows {
        eprintln!(
            "K={:<4} N={:<4} {:<6} precompute {:>10.3} ms  per-path {:>10.3} ms",
            r.k, r.n, r.method, r.precompute_ms, r.per_path_ms
        );
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let scn = load_scenario(&args.scenario)?;
    let seed = args.common.seed.unwrap_or(scn.seed);
    let paths = obtain_paths(&scn, args.paths.as_ref(), args.gen, seed)?;
    let risk_map = read_risk_csv(&args.risks)?;
    let spec = resolve_grid(&scn, &paths, args.common.resolution, args.common.sigma_cells)?;
    render_outputs(&scn, &spec, &paths, &risk_map, &args.common)
}

fn render_outputs(
    scn: &Scenario,
    spec: &crate::geometry::GridSpec,
    paths: &[Path],
    risk_map: &HashMap<String, f64>,
    common: &CommonArgs,
) -> Result<()> {
    std::fs::create_dir_all(&common.out)?;
    if scn.obstacles.is_empty() {
        // Nothing to precompute; emit uniform backgrounds of grid size.
        let empty = crate::geometry::ScalarField::zeros(spec.clone());
        save_heatmap(&empty, &common.out.join("g.ppm"))?;
        save_heatmap(&empty, &common.out.join("dg_sigma.ppm"))?;
    } else {
        let rf = crate::risk::precompute_fields(&scn.obstacles, spec, common.sigma_cells)?;
        save_heatmap(rf.g(), &common.out.join("g.ppm"))?;
        save_heatmap(rf.dg_sigma(), &common.out.join("dg_sigma.ppm"))?;
    }
    let (rgb, missing) = paths_rgb(spec, &scn.obstacles, paths, risk_map);
    for id in &missing {
        eprintln!("warning: path {id} missing from risk CSV; drawn gray");
    }
    write_ppm(&common.out.join("paths.ppm"), spec.width, spec.height, &rgb)?;
    eprintln!(
        "rendered g.ppm, dg_sigma.ppm, paths.ppm ({}x{}) into {}",
        spec.width,
        spec.height,
        common.out.display()
    );
    Ok(())
}

fn read_risk_csv(file: &PathBuf) -> Result<HashMap<String, f64>> {
    let text = std::fs::read_to_string(file)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty CSV", file.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    let id_col = cols.iter().position(|c| *c == "path_id").ok_or_else(|| {
        Error::Parse(format!("{}: missing path_id column", file.display()))
    })?;
    let fd_col = cols
        .iter()
        .position(|c| *c == "f_d")
        .ok_or_else(|| Error::Parse(format!("{}: missing f_d column", file.display())))?;
    let mut map = HashMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() <= fd_col.max(id_col) {
            return Err(Error::Parse(format!(
                "{}:{}: expected at least {} fields",
                file.display(),
                lineno + 2,
                fd_col.max(id_col) + 1
            )));
        }
        if fields[fd_col].is_empty() {
            continue;
        }
        let f_d: f64 = fields[fd_col].parse().map_err(|e| {
            Error::Parse(format!("{}:{}: bad f_d: {e}", file.display(), lineno + 2))
        })?;
        map.insert(fields[id_col].to_string(), f_d);
    }
    Ok(map)
}

fn cmd_gen_scenario(args: GenScenarioArgs) -> Result<()> {
    let template: Template = args.template.into();
    let std = args.std.unwrap_or_else(|| template.default_std());
    let doc = generate_scenario(template, args.k, std, args.seed)?;
    let file = if args.out.extension().is_some_and(|e| e == "json") {
        args.out.clone()
    } else {
        args.out.join("scenario.json")
    };
    save_scenario_file(&doc, &file)?;
    eprintln!("wrote {}", file.display());
    Ok(())
}
