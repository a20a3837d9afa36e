//! `glaeser`: scenario runner and artifact emitter.
//!
//! Exit codes: 0 feasible / success, 1 infeasible, 2 error or not stabilized.

mod config;
mod output;
mod pipeline;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use glaeser::bundle::build_initial_bundle;
use glaeser::convex2::BoundingBox;
use glaeser::counterexample::{
    boundary_scan, build_paper_system, feasibility_constant, paper_grid, ConstantData, ScanRange,
};
use glaeser::refine::{refine_to_stable, RefinementConfig, Verdict};
use serde::Serialize;

use crate::config::{Artifact, Scenario};
use crate::output::{csv_bytes, json_bytes, write_atomic};

#[derive(Parser)]
#[command(name = "glaeser", version, about = "Continuous solvability of A(x) F(x) <= f(x) by discretized Glaeser refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Nodes per grid axis (overrides `grid.resolution`).
    #[arg(long)]
    resolution: Option<usize>,
    /// Output directory (overrides `outputs.dir`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated artifacts (overrides `outputs.artifacts`).
    #[arg(long, value_delimiter = ',', value_parser = parse_artifact)]
    artifacts: Option<Vec<Artifact>>,
}

#[derive(Subcommand)]
enum Command {
    /// Refine the configured scenario and write the requested artifacts.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classify constant data over an (f2, f4) grid and extract the boundary.
    BoundaryScan {
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        f1: f64,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        f3: f64,
        /// `lo,hi` for f2.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 3.0], allow_negative_numbers = true)]
        f2_range: Vec<f64>,
        /// `lo,hi` for f4.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 3.0], allow_negative_numbers = true)]
        f4_range: Vec<f64>,
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        /// Verdict grid, columns `i, j, f2, f4, feasible`.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Draw the origin regions of the planar system with constant data.
    PlotRegions {
        /// `f1,f2,f3,f4`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        f: Vec<f64>,
        /// Half-width of the plotted square; default fits the data.
        #[arg(long)]
        window: Option<f64>,
        /// Grid resolution for the engine's origin fiber; 0 skips the engine.
        #[arg(long, default_value_t = 33)]
        resolution: usize,
        #[arg(long)]
        out_svg: PathBuf,
    },
    /// Build a selection for the configured scenario and check it on a finer grid.
    VerifySelection {
        config: PathBuf,
        /// Allowed constraint violation; default `2 ε(h)`.
        #[arg(long)]
        tol: Option<f64>,
        /// Selection values, columns `x1, x2, F1, F2, residual`.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn parse_artifact(s: &str) -> Result<Artifact, String> {
    match s {
        "feasibility-grid" => Ok(Artifact::FeasibilityGrid),
        "region-svg" => Ok(Artifact::RegionSvg),
        "selection-csv" => Ok(Artifact::SelectionCsv),
        "report" => Ok(Artifact::Report),
        _ => Err(format!("unknown artifact `{s}`")),
    }
}

fn load_scenario(path: &Path, o: Overrides) -> Result<Scenario> {
    let mut cfg = config::load(path)?;
    if let Some(r) = o.resolution {
        cfg.grid.resolution = Some(r);
    }
    if let Some(d) = o.out_dir {
        cfg.outputs.dir = Some(std::env::current_dir()?.join(d));
    }
    if let Some(a) = o.artifacts {
        cfg.outputs.artifacts = a;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve(base)
}

fn run(path: &Path, o: Overrides) -> Result<u8> {
    let s = load_scenario(path, o)?;
    let out = pipeline::execute(&s, None)?;
    let written = pipeline::write_artifacts(&s, &out)?;
    let r = &out.report;
    println!(
        "verdict: {:?} after {} iteration(s), {} empty node(s)",
        r.verdict,
        r.refinement.iterations_run,
        r.empty_nodes.len()
    );
    if let Some(a) = &r.analytic {
        println!("analytic: {}", serde_json::to_string(a)?);
    }
    if let Some(c) = r.sign_criterion {
        println!("sign criterion: {}", if c { "feasible" } else { "infeasible" });
    }
    if let Some(sel) = &r.selection {
        println!(
            "selection: max residual {:.3e}, fine-grid violation {:.3e} (tol {:.3e})",
            sel.max_residual, sel.verification.max_violation_fine, sel.verification.tol
        );
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(r.exit_code())
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    f1: f64,
    f3: f64,
    range: ScanRange,
    resolution: usize,
    feasible_nodes: usize,
    boundary_points: usize,
    hyperbola_fit: &'a Option<glaeser::counterexample::HyperbolaFit>,
    line_fit: &'a Option<glaeser::counterexample::LineFit>,
    collinearity: &'a glaeser::counterexample::CollinearityReport,
}

#[allow(clippy::too_many_arguments)]
fn scan_cmd(
    f1: f64,
    f3: f64,
    f2_range: &[f64],
    f4_range: &[f64],
    resolution: usize,
    out_csv: Option<&Path>,
    out_svg: Option<&Path>,
) -> Result<u8> {
    if f2_range.len() != 2 || f4_range.len() != 2 {
        bail!("--f2-range and --f4-range take `lo,hi`");
    }
    let range = ScanRange {
        f2: [f2_range[0], f2_range[1]],
        f4: [f4_range[0], f4_range[1]],
    };
    if !(f1.is_finite() && f3.is_finite()) || range.f2.iter().chain(&range.f4).any(|v| !v.is_finite()) {
        bail!("flags must be finite numbers");
    }
    let scan = boundary_scan(f1, f3, range, resolution).context("boundary scan")?;
    let n = scan.resolution;
    if let Some(p) = out_csv {
        let rows = (0..n * n).map(|k| {
            let (i, j) = (k % n, k / n);
            let [f2, f4] = scan.node(i, j);
            (i, j, f2, f4, scan.is_feasible(i, j))
        });
        write_atomic(p, &csv_bytes(&["i", "j", "f2", "f4", "feasible"], rows)?)?;
    }
    if let Some(p) = out_svg {
        write_atomic(p, svg::boundary_heatmap(&scan).as_bytes())?;
    }
    let summary = ScanSummary {
        f1,
        f3,
        range,
        resolution: n,
        feasible_nodes: scan.feasible.iter().filter(|&&v| v).count(),
        boundary_points: scan.boundary.len(),
        hyperbola_fit: &scan.hyperbola_fit,
        line_fit: &scan.line_fit,
        collinearity: &scan.collinearity,
    };
    print!("{}", String::from_utf8(json_bytes(&summary)?)?);
    Ok(0)
}

fn plot_cmd(f: &[f64], window: Option<f64>, resolution: usize, out_svg: &Path) -> Result<u8> {
    if f.len() != 4 {
        bail!("--f takes four values `f1,f2,f3,f4`, got {}", f.len());
    }
    if f.iter().any(|v| !v.is_finite()) {
        bail!("--f entries must be finite");
    }
    let data = ConstantData::new(f[0], f[1], f[2], f[3]);
    let half = match window {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => bail!("--window must be positive, got {w}"),
        None => 1.5 * f.iter().fold(0.0f64, |a, v| a.max(v.abs())) + 1.0,
    };
    let engine = if resolution > 0 {
        let b = build_initial_bundle(&build_paper_system(&data), &paper_grid(resolution)?)?;
        let m = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let cfg = RefinementConfig::new(BoundingBox::square(8.0 * (1.0 + m)), 0.0);
        let (stable, report) = refine_to_stable(&b, &cfg)?;
        println!("engine verdict: {:?}", report.verdict);
        Some(stable.fibers()[0].clone())
    } else {
        None
    };
    let svg = svg::origin_regions(&data, BoundingBox::square(half), engine.as_ref());
    write_atomic(out_svg, svg.as_bytes())?;
    println!("analytic: {}", serde_json::to_string(&feasibility_constant(&data))?);
    println!("wrote {}", out_svg.display());
    Ok(0)
}

fn verify_cmd(path: &Path, tol: Option<f64>, out_csv: Option<&Path>, o: Overrides) -> Result<u8> {
    if let Some(t) = tol {
        if !(t >= 0.0 && t.is_finite()) {
            bail!("--tol must be a nonnegative number, got {t}");
        }
    }
    let s = load_scenario(path, o)?;
    let out = pipeline::execute(&s, tol)?;
    match out.report.verdict {
        Verdict::Feasible => {}
        Verdict::Infeasible => {
            println!("no selection: refinement emptied {} node(s)", out.report.empty_nodes.len());
            return Ok(1);
        }
        Verdict::NotStabilized => {
            println!("no selection: refinement did not stabilize");
            return Ok(2);
        }
    }
    let (Some(sel), Some(summary)) = (&out.selection, &out.report.selection) else {
        bail!("feasible verdict without a selection");
    };
    if let Some(p) = out_csv {
        write_atomic(p, &pipeline::selection_csv(sel)?)?;
    }
    print!("{}", String::from_utf8(json_bytes(&summary.verification)?)?);
    Ok(if summary.verification.pass { 0 } else { 1 })
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run { config, overrides } => run(&config, overrides),
        Command::BoundaryScan {
            f1,
            f3,
            f2_range,
            f4_range,
            resolution,
            out_csv,
            out_svg,
        } => scan_cmd(f1, f3, &f2_range, &f4_range, resolution, out_csv.as_deref(), out_svg.as_deref()),
        Command::PlotRegions {
            f,
            window,
            resolution,
            out_svg,
        } => plot_cmd(&f, window, resolution, &out_svg),
        Command::VerifySelection {
            config,
            tol,
            out_csv,
            overrides,
        } => verify_cmd(&config, tol, out_csv.as_deref(), overrides),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
