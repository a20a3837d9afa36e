//! Hand-written SVG: data coordinates in the viewBox, y flipped by a group
//! transform so that larger values are drawn higher.

use std::fmt::Write;

use glaeser::convex2::{BoundingBox, ConvexRegion, FiberDim, HalfPlane, Point};
use glaeser::counterexample::{AnalyticH1, BoundaryScan, ConstantData, Feasibility};

/// Samples per analytic curve.
pub const CURVE_SAMPLES: usize = 1024;
const WIDTH_PX: f64 = 640.0;

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn points_attr(pts: &[[f64; 2]]) -> String {
    pts.iter()
        .map(|p| format!("{},{}", num(p[0]), num(p[1])))
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct Svg {
    view: BoundingBox,
    body: String,
    labels: String,
}

impl Svg {
    pub fn new(view: BoundingBox) -> Self {
        Self {
            view,
            body: String::new(),
            labels: String::new(),
        }
    }

    /// Data units per output pixel.
    fn px(&self) -> f64 {
        (self.view.max[0] - self.view.min[0]) / WIDTH_PX
    }

    fn font(&self) -> f64 {
        0.035 * (self.view.max[1] - self.view.min[1])
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], fill: &str, opacity: f64, stroke: &str) {
        if pts.len() < 2 {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            points_attr(pts),
            num(opacity),
            num(self.px())
        );
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, width: f64, dashed: bool) {
        if pts.len() < 2 {
            return;
        }
        let px = self.px();
        let dash = if dashed {
            format!(r#" stroke-dasharray="{} {}""#, num(6.0 * px), num(4.0 * px))
        } else {
            String::new()
        };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            points_attr(pts),
            num(width * px)
        );
    }

    pub fn rect(&mut self, min: [f64; 2], size: [f64; 2], fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            num(min[0]),
            num(min[1]),
            num(size[0]),
            num(size[1])
        );
    }

    pub fn dot(&mut self, p: [f64; 2], radius: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            num(p[0]),
            num(p[1]),
            num(radius)
        );
    }

    /// Text anchored at data point `p`, `line` font heights below it.
    pub fn text(&mut self, p: [f64; 2], line: f64, s: &str, fill: &str) {
        let size = self.font();
        let _ = writeln!(
            self.labels,
            r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif" fill="{fill}">{}</text>"#,
            num(p[0]),
            num(-p[1] + (line + 1.0) * size),
            num(size),
            escape(s)
        );
    }

    /// Line of text in the top-left corner of the view.
    pub fn caption(&mut self, line: usize, s: &str, fill: &str) {
        let pad = 0.02 * (self.view.max[0] - self.view.min[0]);
        self.text([self.view.min[0] + pad, self.view.max[1]], line as f64 + 0.2, s, fill);
    }

    pub fn frame(&mut self, stroke: &str, width: f64) {
        let v = self.view;
        let pts = [
            [v.min[0], v.min[1]],
            [v.max[0], v.min[1]],
            [v.max[0], v.max[1]],
            [v.min[0], v.max[1]],
            [v.min[0], v.min[1]],
        ];
        self.polyline(&pts, stroke, width, false);
    }

    pub fn finish(self) -> String {
        let v = self.view;
        let (w, h) = (v.max[0] - v.min[0], v.max[1] - v.min[1]);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{WIDTH_PX}" height="{}">"#,
            num(v.min[0]),
            num(-v.max[1]),
            num(w),
            num(h),
            (WIDTH_PX * h / w).round()
        );
        let _ = writeln!(out, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, num(v.min[0]), num(-v.max[1]), num(w), num(h));
        out.push_str("<g transform=\"scale(1,-1)\">\n");
        out.push_str(&self.body);
        out.push_str("</g>\n");
        out.push_str(&self.labels);
        out.push_str("</svg>\n");
        out
    }
}

fn region_polygon(halfplanes: &[(f64, f64, f64)], view: &BoundingBox) -> Vec<[f64; 2]> {
    let hs = halfplanes
        .iter()
        .map(|&(a, b, c)| HalfPlane::from_coeffs(a, b, c).expect("axis-aligned rows"))
        .collect();
    ConvexRegion::new(FiberDim::Two, hs)
        .expect("planar rows")
        .vertices(view)
        .iter()
        .map(|p| [p.x, p.y])
        .collect()
}

fn to_arrays(pts: &[Point]) -> Vec<[f64; 2]> {
    pts.iter().map(|p| [p.x, p.y]).collect()
}

/// Points of `y₂ = M + M²/(y₁ − M)` inside `view`, for `y₁ ∈ (M, hi]`.
fn hyperbola_points(m: f64, hi: f64, view: &BoundingBox) -> Vec<[f64; 2]> {
    let top = view.max[1];
    let lo = if top > m { m + m * m / (top - m) } else { hi };
    let lo = lo.max(view.min[0]).max(m);
    let hi = hi.min(view.max[0]);
    if lo >= hi {
        return Vec::new();
    }
    (0..CURVE_SAMPLES)
        .map(|k| {
            let y1 = lo + (hi - lo) * k as f64 / (CURVE_SAMPLES - 1) as f64;
            [y1, m + m * m / (y1 - m)]
        })
        .filter(|p| p[1].is_finite() && p[1] <= top + 1e-9)
        .collect()
}

/// Origin regions of the planar system with constant data, the analytic
/// `H₁(0)`, and (optionally) the engine's origin fiber.
pub fn origin_regions(f: &ConstantData, view: BoundingBox, engine: Option<&ConvexRegion>) -> String {
    let mut svg = Svg::new(view);
    let r1 = region_polygon(&[(1.0, 0.0, f.f1), (0.0, 1.0, f.f1)], &view);
    let r2 = region_polygon(&[(1.0, 0.0, f.f2), (0.0, -1.0, f.f2)], &view);
    let r4 = region_polygon(&[(-1.0, 0.0, f.f4), (0.0, 1.0, f.f4)], &view);
    svg.polygon(&r1, "#4e79a7", 0.12, "#4e79a7");
    svg.polygon(&r2, "#59a14f", 0.12, "#59a14f");
    svg.polygon(&r4, "#edc948", 0.12, "#b09020");

    let h1 = AnalyticH1::new(*f);
    let [c1, c2] = h1.corner();
    match h1.m() {
        Some(m) => {
            let curve = hyperbola_points(m, view.max[0], &view);
            if let (Some(first), Some(last)) = (curve.first(), curve.last()) {
                let mut shade = curve.clone();
                shade.push([last[0], view.max[1]]);
                shade.push([first[0], view.max[1]]);
                svg.polygon(&shade, "#e15759", 0.12, "none");
            }
            svg.polyline(&curve, "#e15759", 2.0, false);
            svg.polyline(&[[m, view.min[1]], [m, view.max[1]]], "#e15759", 1.0, true);
            svg.polyline(&[[view.min[0], m], [view.max[0], m]], "#e15759", 1.0, true);
        }
        None => {
            let r3 = region_polygon(&[(-1.0, 0.0, f.f3), (0.0, -1.0, f.f3)], &view);
            svg.polygon(&r3, "#e15759", 0.12, "#e15759");
        }
    }

    let verdict = glaeser::counterexample::feasibility_constant(f);
    if let Feasibility::Feasible { .. } = verdict {
        let analytic: Vec<[f64; 2]> = match h1.m() {
            Some(m) => {
                let mut pts: Vec<[f64; 2]> = hyperbola_points(m, c1, &view)
                    .into_iter()
                    .filter(|p| p[1] <= c2)
                    .collect();
                pts.push([c1, c2]);
                pts
            }
            None => region_polygon(
                &[
                    (1.0, 0.0, c1),
                    (0.0, 1.0, c2),
                    (-1.0, 0.0, f.f4.min(f.f3)),
                    (0.0, -1.0, f.f2.min(f.f3)),
                ],
                &view,
            ),
        };
        svg.polygon(&analytic, "#76b7b2", 0.45, "#2f6f6a");
        svg.dot([c1, c2], 0.008 * (view.max[0] - view.min[0]), "black");
    }
    if let Some(k) = engine {
        let poly = to_arrays(&k.vertices(&view));
        if poly.len() >= 2 {
            let mut closed = poly.clone();
            closed.push(poly[0]);
            svg.polyline(&closed, "black", 1.5, true);
        }
    }

    svg.caption(0, &format!("f = ({}, {}, {}, {})", num(f.f1), num(f.f2), num(f.f3), num(f.f4)), "black");
    match verdict {
        Feasibility::Feasible { witness } => {
            svg.caption(1, &format!("feasible, corner ({}, {})", num(witness[0]), num(witness[1])), "black");
        }
        Feasibility::Infeasible { cause } => {
            svg.frame("#d62728", 6.0);
            svg.caption(1, &format!("infeasible: {cause:?}"), "#d62728");
        }
    }
    if engine.is_some() {
        svg.caption(2, "dashed: engine origin fiber", "black");
    }
    svg.finish()
}

/// Verdict heatmap of a boundary scan with the analytic curve and the
/// extracted boundary points.
pub fn boundary_heatmap(scan: &BoundaryScan) -> String {
    let view = BoundingBox {
        min: [scan.range.f2[0], scan.range.f4[0]],
        max: [scan.range.f2[1], scan.range.f4[1]],
    };
    let mut svg = Svg::new(view);
    let n = scan.resolution;
    let [h2, h4] = scan.spacing();
    for j in 0..n {
        for i in 0..n {
            let [x, y] = scan.node(i, j);
            let lo = [(x - 0.5 * h2).max(view.min[0]), (y - 0.5 * h4).max(view.min[1])];
            let hi = [(x + 0.5 * h2).min(view.max[0]), (y + 0.5 * h4).min(view.max[1])];
            let fill = if scan.is_feasible(i, j) { "#a6d96a" } else { "#d9d9d9" };
            svg.rect(lo, [hi[0] - lo[0], hi[1] - lo[1]], fill);
        }
    }
    if scan.f3 < 0.0 {
        svg.polyline(&hyperbola_points(-scan.f3, view.max[0], &view), "#d62728", 2.0, false);
    }
    let r = 0.25 * h2.min(h4);
    for p in &scan.boundary {
        svg.dot(*p, r, "black");
    }
    svg.caption(0, &format!("f1 = {}, f3 = {}, {n}x{n}", num(scan.f1), num(scan.f3)), "black");
    svg.finish()
}

/// Stable fibers of a 1-D bundle as vertical segments over the domain, with
/// the selection (if any) as a polyline. The value axis is rescaled so the
/// plot is 4:3; the caption gives the value range.
pub fn interval_bands(
    nodes: &[f64],
    intervals: &[Option<(f64, f64)>],
    selection: Option<&[f64]>,
    window: &BoundingBox,
    empty: &[f64],
) -> String {
    let lo = intervals.iter().flatten().map(|v| v.0).fold(f64::INFINITY, f64::min).max(window.min[0]);
    let hi = intervals.iter().flatten().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max).min(window.max[0]);
    let (lo, hi) = if lo.is_finite() && hi.is_finite() && lo < hi { (lo, hi) } else { (-1.0, 1.0) };
    let x0 = nodes.first().copied().unwrap_or(-1.0);
    let x1 = nodes.last().copied().unwrap_or(1.0);
    let scale = 0.75 * (x1 - x0) / (1.2 * (hi - lo));
    let y = |v: f64| (v - lo) * scale;
    let pad = 0.1 * (hi - lo) * scale;
    let view = BoundingBox {
        min: [x0, -pad],
        max: [x1, y(hi) + pad],
    };
    let mut svg = Svg::new(view);
    for (x, iv) in nodes.iter().zip(intervals) {
        if let Some((a, b)) = iv {
            let (a, b) = (a.max(lo), b.min(hi));
            svg.polyline(&[[*x, y(a)], [*x, y(b)]], "#4e79a7", 1.0, false);
        }
    }
    if let Some(vals) = selection {
        let pts: Vec<[f64; 2]> = nodes.iter().zip(vals).map(|(x, v)| [*x, y(*v)]).collect();
        svg.polyline(&pts, "black", 2.0, false);
    }
    for x in empty {
        svg.polyline(&[[*x, view.min[1]], [*x, view.max[1]]], "#d62728", 1.0, true);
    }
    svg.caption(0, &format!("F in [{}, {}] shown", num(lo), num(hi)), "black");
    if !empty.is_empty() {
        svg.frame("#d62728", 6.0);
        svg.caption(1, "infeasible: empty fibers marked", "#d62728");
    } else if selection.is_some() {
        svg.caption(1, "black: selection", "black");
    }
    svg.finish()
}

/// Stable fibers of a planar-fiber bundle at the listed nodes.
pub fn fiber_polygons(fibers: &[(String, &ConvexRegion)], window: &BoundingBox) -> String {
    let mut view: Option<BoundingBox> = None;
    let polys: Vec<(String, Vec<[f64; 2]>)> = fibers
        .iter()
        .map(|(name, k)| (name.clone(), to_arrays(&k.vertices(window))))
        .collect();
    for (_, p) in &polys {
        for q in p {
            let v = view.get_or_insert(BoundingBox { min: *q, max: *q });
            v.min = [v.min[0].min(q[0]), v.min[1].min(q[1])];
            v.max = [v.max[0].max(q[0]), v.max[1].max(q[1])];
        }
    }
    let mut view = view.unwrap_or(*window);
    let pad = 0.1 * (view.max[0] - view.min[0]).max(view.max[1] - view.min[1]).max(1e-3);
    view.min = [view.min[0] - pad, view.min[1] - pad];
    view.max = [view.max[0] + pad, view.max[1] + pad];
    let mut svg = Svg::new(view);
    let colours = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2"];
    let mut any_empty = false;
    for (k, (name, p)) in polys.iter().enumerate() {
        let c = colours[k % colours.len()];
        if p.is_empty() {
            any_empty = true;
            svg.caption(k, &format!("{name}: empty"), "#d62728");
        } else {
            svg.polygon(p, c, 0.25, c);
            svg.caption(k, name, c);
        }
    }
    if any_empty {
        svg.frame("#d62728", 6.0);
    }
    svg.finish()
}
