use anyhow::{Context, Result};
use glaeser::bundle::{build_initial_bundle, Bundle};
use glaeser::convex2::{is_empty, BoundingBox, FiberDim};
use glaeser::counterexample::{feasibility_constant, feasibility_pointwise, intro_1d_feasible, ConstantData, Feasibility};
use glaeser::refine::{refine_to_stable, RefinementReport, Verdict};
use glaeser::selection::{
    construct_selection, modulus_of_continuity, verify_selection, Anchor, ModulusEntry, SelectionConfig,
    SelectionField, VerificationReport,
};
use serde::Serialize;

use crate::config::{Artifact, Scenario, ScenarioConfig};
use crate::output::{csv_bytes, json_bytes, write_atomic};
use crate::svg;

#[derive(Debug, Serialize)]
pub struct GridSummary {
    pub dim: usize,
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub resolution: usize,
    pub spacing: f64,
}

#[derive(Debug, Serialize)]
pub struct EmptyNode {
    pub node: usize,
    pub x: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct SelectionSummary {
    pub max_residual: f64,
    pub anchors: Vec<Anchor>,
    pub fallback_nodes: Vec<usize>,
    pub modulus: Vec<ModulusEntry>,
    pub verification: VerificationReport,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub grid: GridSummary,
    pub kappa: f64,
    pub window: BoundingBox,
    pub verdict: Verdict,
    pub refinement: RefinementReport,
    pub empty_nodes: Vec<EmptyNode>,
    /// Closed-form decision, planar system only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<Feasibility>,
    /// `f(0) = 0` and `f'(0) >= 0`, 1-D system only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_criterion: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionSummary>,
}

impl RunReport {
    pub fn exit_code(&self) -> u8 {
        match self.verdict {
            Verdict::Feasible => 0,
            Verdict::Infeasible => 1,
            Verdict::NotStabilized => 2,
        }
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub initial: Bundle,
    pub stable: Bundle,
    pub selection: Option<SelectionField>,
}

fn analytic_verdict(s: &Scenario) -> Option<Feasibility> {
    if s.system.name != "paper-2d" {
        return None;
    }
    if let Some(f) = &s.paper_constant {
        return Some(feasibility_constant(f));
    }
    let nodes: Vec<[f64; 2]> = (0..s.grid.node_count()).map(|i| s.grid.node(i)).collect();
    let data = &s.system.data;
    Some(feasibility_pointwise(
        |x| {
            let v = data.eval(x);
            ConstantData::new(v[0], v[1], v[2], v[3])
        },
        &nodes,
    ))
}

/// Refines to a stable bundle and, when every fiber survives, builds and
/// verifies a selection with tolerance `verify_tol` (default `2 ε(h)`).
pub fn execute(s: &Scenario, verify_tol: Option<f64>) -> Result<RunOutput> {
    let initial = build_initial_bundle(&s.system, &s.grid).context("building the initial bundle")?;
    let (stable, refinement) = refine_to_stable(&initial, &s.refinement).context("refining")?;
    let h = s.grid.h();
    let selection = if refinement.verdict == Verdict::Feasible {
        let cfg = SelectionConfig::new(s.refinement.window, s.refinement.kappa);
        Some(construct_selection(&stable, &cfg).context("constructing the selection")?)
    } else {
        None
    };
    let summary = selection.as_ref().map(|sel| {
        let tol = verify_tol.unwrap_or(2.0 * s.refinement.epsilon(h));
        SelectionSummary {
            max_residual: sel.max_residual(),
            anchors: sel.anchors().to_vec(),
            fallback_nodes: sel.fallback_nodes().to_vec(),
            modulus: modulus_of_continuity(sel),
            verification: verify_selection(sel, &s.system, tol),
        }
    });
    let empty_nodes = refinement
        .empty_nodes
        .iter()
        .map(|&node| EmptyNode {
            node,
            x: s.grid.node(node),
        })
        .collect();
    let report = RunReport {
        scenario: s.config.clone(),
        grid: GridSummary {
            dim: s.grid.dim(),
            min: s.grid.min(),
            max: s.grid.max(),
            resolution: s.grid.resolution(),
            spacing: h,
        },
        kappa: s.refinement.kappa,
        window: s.refinement.window,
        verdict: refinement.verdict,
        refinement,
        empty_nodes,
        analytic: analytic_verdict(s),
        sign_criterion: s
            .polynomial
            .as_ref()
            .map(|p| intro_1d_feasible(p.eval(0.0), p.derivative_at_zero())),
        selection: summary,
    };
    Ok(RunOutput {
        report,
        initial,
        stable,
        selection,
    })
}

/// Columns: `node, x1, x2, special, initial_nonempty, stable_nonempty`.
pub fn feasibility_grid_csv(out: &RunOutput) -> Result<Vec<u8>> {
    let grid = out.stable.grid();
    let rows = (0..grid.node_count()).map(|i| {
        let x = grid.node(i);
        (
            i,
            x[0],
            x[1],
            out.stable.is_special(i),
            !is_empty(&out.initial.fibers()[i]),
            !is_empty(&out.stable.fibers()[i]),
        )
    });
    csv_bytes(&["node", "x1", "x2", "special", "initial_nonempty", "stable_nonempty"], rows)
}

/// Columns: `x1, x2, F1, F2, residual` (`F2 = 0` for scalar fibers).
pub fn selection_csv(sel: &SelectionField) -> Result<Vec<u8>> {
    csv_bytes(
        &["x1", "x2", "F1", "F2", "residual"],
        sel.rows().into_iter().map(|r| (r[0], r[1], r[2], r[3], r[4])),
    )
}

fn region_svg(s: &Scenario, out: &RunOutput) -> String {
    let stable = &out.stable;
    let window = s.refinement.window;
    let special = stable.special_nodes();
    if let (Some(f), Some(&origin)) = (&s.paper_constant, special.first()) {
        let [c1, c2] = glaeser::counterexample::AnalyticH1::new(*f).corner();
        let reach = f.as_array().iter().fold(c1.abs().max(c2.abs()), |a, v| a.max(v.abs()));
        let view = BoundingBox::square(1.5 * reach + 1.0);
        return svg::origin_regions(f, view, Some(&stable.fibers()[origin]));
    }
    match stable.fiber_dim() {
        FiberDim::One => {
            let grid = stable.grid();
            let nodes: Vec<f64> = (0..grid.node_count()).map(|i| grid.node(i)[0]).collect();
            let intervals: Vec<Option<(f64, f64)>> = stable
                .fibers()
                .iter()
                .map(|k| {
                    let v = k.vertices(&window);
                    match v.as_slice() {
                        [] => None,
                        [p] => Some((p.x, p.x)),
                        [a, b, ..] => Some((a.x, b.x)),
                    }
                })
                .collect();
            let empty: Vec<f64> = out.report.empty_nodes.iter().map(|e| e.x[0]).collect();
            let values: Option<Vec<f64>> = out.selection.as_ref().map(|sel| sel.values().iter().map(|v| v.x).collect());
            svg::interval_bands(&nodes, &intervals, values.as_deref(), &window, &empty)
        }
        FiberDim::Two => {
            let mut picks = if special.is_empty() { vec![0] } else { special };
            let extra: Vec<usize> = out
                .report
                .empty_nodes
                .iter()
                .map(|e| e.node)
                .filter(|n| !picks.contains(n))
                .take(4)
                .collect();
            picks.extend(extra);
            let fibers: Vec<(String, _)> = picks
                .iter()
                .map(|&n| {
                    let x = stable.grid().node(n);
                    (format!("node {n} at ({}, {})", x[0], x[1]), &stable.fibers()[n])
                })
                .collect();
            svg::fiber_polygons(&fibers, &window)
        }
    }
}

/// Writes the artifacts requested by the config; returns the paths written.
pub fn write_artifacts(s: &Scenario, out: &RunOutput) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    for &a in &s.config.outputs.artifacts {
        let path = s.out_dir.join(a.file_name());
        let bytes = match a {
            Artifact::Report => json_bytes(&out.report)?,
            Artifact::FeasibilityGrid => feasibility_grid_csv(out)?,
            Artifact::SelectionCsv => match &out.selection {
                Some(sel) => selection_csv(sel)?,
                None => {
                    eprintln!("note: no selection (verdict {:?}); {} not written", out.report.verdict, path.display());
                    continue;
                }
            },
            Artifact::RegionSvg => region_svg(s, out).into_bytes(),
        };
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
