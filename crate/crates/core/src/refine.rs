//! Discretized C⁰ Glaeser refinement.
//!
//! One pass replaces every fiber by
//!
//! ```text
//! K̃(x) = K(x) ∩ ⋂_{y ∈ N(x)} dilate(K(y), ε(x, y))
//! ```
//!
//! where `N(x)` is the set of nodes within the current neighbor radius and
//! `ε(x, y) = κ |x - y| + σ(x, y)`. The first term is the ε-δ slack from the
//! definition; `σ` bounds how far `K(x)` can sit outside `K(y)` purely because
//! the constraint rows differ between the two nodes. At nodes where the
//! coefficient field is continuous, `σ → 0` as the grid is refined; at special
//! points (overrides) it is zero, and a non-special node never compares itself
//! against a special neighbor (their rows are not comparable). Bundles without
//! a row record use `σ = 0` everywhere.
//!
//! Every fiber is held clipped to the configuration window, so the engine
//! works with bounded polygons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{Bundle, Grid, NodeRows};
use crate::convex2::{
    clip_polygon, distance_to_hull, hausdorff_sampled, BoundingBox, ConvexRegion, FiberDim,
    HalfPlane, Point,
};
use crate::error::{Error, Result};

/// Neighbor radius per iteration, in units of the grid spacing `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RadiusSchedule {
    /// Radius `start · h / 2^k` at iteration `k`, never below `floor · h`.
    Ring { start: f64, floor: f64 },
    /// Same radius at every iteration (units of x, not of h).
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementConfig {
    pub schedule: RadiusSchedule,
    /// Slope of `ε(r) = κ r`.
    pub kappa: f64,
    pub max_iterations: usize,
    pub stabilization_tol: f64,
    pub window: BoundingBox,
    /// Boundary samples per fiber when measuring the change of a fiber.
    pub hausdorff_samples: usize,
}

impl RefinementConfig {
    /// Defaults: ring schedule 8h → h, `κ = 4 L + 1` for data Lipschitz bound
    /// `L`, eight iterations, tolerance `1e-9`.
    pub fn new(window: BoundingBox, data_lipschitz: f64) -> Self {
        Self {
            schedule: RadiusSchedule::Ring {
                start: 8.0,
                floor: 1.0,
            },
            kappa: 4.0 * data_lipschitz + 1.0,
            max_iterations: 8,
            stabilization_tol: 1e-9,
            window,
            hausdorff_samples: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa {} must be > 0", self.kappa)));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if !(self.stabilization_tol >= 0.0) {
            return Err(Error::InvalidArgument("stabilization_tol must be >= 0".into()));
        }
        match self.schedule {
            RadiusSchedule::Ring { start, floor } if !(floor > 0.0 && start >= floor) => Err(
                Error::InvalidArgument(format!("ring schedule needs start >= floor > 0, got {start}, {floor}")),
            ),
            RadiusSchedule::Fixed(r) if !(r > 0.0) => {
                Err(Error::InvalidArgument(format!("fixed radius {r} must be > 0")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn epsilon(&self, r: f64) -> f64 {
        self.kappa * r
    }

    pub fn radius_at(&self, iteration: usize, h: f64) -> f64 {
        match self.schedule {
            RadiusSchedule::Ring { start, floor } => {
                let halvings = iteration.min(60) as i32;
                (start * h / 2f64.powi(halvings)).max(floor * h)
            }
            RadiusSchedule::Fixed(r) => r,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Feasible,
    Infeasible,
    NotStabilized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub iterations_run: usize,
    pub stabilized: bool,
    pub empty_nodes: Vec<usize>,
    /// Max sampled-Hausdorff fiber change per iteration. A fiber that empties
    /// counts as a change of one window diagonal.
    pub per_iteration_change: Vec<f64>,
    /// Same, restricted to non-special nodes.
    pub per_iteration_change_off_special: Vec<f64>,
    pub per_iteration_radius: Vec<f64>,
    pub verdict: Verdict,
}

/// Outcome of one pass.
#[derive(Clone, Debug, PartialEq)]
pub struct StepStats {
    pub radius: f64,
    pub node_change: Vec<f64>,
}

impl StepStats {
    pub fn max_change(&self) -> f64 {
        self.node_change.iter().copied().fold(0.0, f64::max)
    }
}

/// `K ∩ window` with redundant halfplanes dropped.
fn windowed(fiber: &ConvexRegion, window: &BoundingBox) -> ConvexRegion {
    fiber.clipped(window).pruned_within(window)
}

/// Row-variation slack `σ(x, y)`; infinite when the two nodes are not comparable.
fn row_slack(rows: Option<&[NodeRows]>, x: usize, y: usize, reach: f64) -> f64 {
    let Some(rows) = rows else {
        return 0.0;
    };
    match (&rows[x], &rows[y]) {
        (NodeRows::Special, _) => 0.0,
        (_, NodeRows::Special) => f64::INFINITY,
        (NodeRows::Generic(a), NodeRows::Generic(b)) => {
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            a.iter()
                .zip(b)
                .map(|(ra, rb)| match (ra, rb) {
                    (None, None) => 0.0,
                    (Some(p), Some(q)) => {
                        (p.normal() - q.normal()).norm() * reach + (p.offset() - q.offset()).abs()
                    }
                    _ => f64::INFINITY,
                })
                .fold(0.0, f64::max)
        }
    }
}

/// One refinement pass at an explicit neighbor radius. Pure: the input bundle
/// is untouched and the output does not depend on node processing order.
pub fn refine_step(bundle: &Bundle, config: &RefinementConfig, radius: f64) -> Result<(Bundle, StepStats)> {
    config.validate()?;
    let window = &config.window;
    let grid = bundle.grid();
    let dim = bundle.fiber_dim();
    let work: Vec<ConvexRegion> = bundle
        .fibers()
        .par_iter()
        .map(|f| windowed(f, window))
        .collect();
    let polys: Vec<Vec<Point>> = work.par_iter().map(|f| f.vertices(window)).collect();
    let offsets = grid.offsets_within(radius);
    let reach = window.radius();
    let rows = bundle.node_rows();
    let diag = window.diagonal();

    let results: Vec<(ConvexRegion, f64)> = (0..grid.node_count())
        .into_par_iter()
        .map(|x| {
            if polys[x].is_empty() {
                return (ConvexRegion::empty(dim), 0.0);
            }
            let mut poly = polys[x].clone();
            let scale = poly.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let cut_tol = 1e-12 * scale;
            let mut added: Vec<HalfPlane> = Vec::new();
            for y in grid.neighbors_with_offsets(x, &offsets) {
                if polys[y].is_empty() {
                    return (ConvexRegion::empty(dim), diag);
                }
                let sigma = row_slack(rows, x, y, reach);
                if !sigma.is_finite() {
                    continue;
                }
                let eps = config.epsilon(grid.distance(x, y)) + sigma;
                for h in work[y].halfplanes() {
                    let hd = h.shifted(eps);
                    if poly.iter().any(|v| hd.value(v) > cut_tol) {
                        poly = clip_polygon(&poly, &hd);
                        added.push(hd);
                        if poly.is_empty() {
                            return (ConvexRegion::empty(dim), diag);
                        }
                    }
                }
            }
            if added.is_empty() {
                return (work[x].clone(), 0.0);
            }
            let mut refined = work[x].clone();
            for h in added {
                // dimensions match by construction
                let _ = refined.push(h);
            }
            let refined = refined.pruned_within(window);
            let change = hausdorff_sampled(&work[x], &refined, window, config.hausdorff_samples)
                .unwrap_or(diag);
            (refined, change)
        })
        .collect();
    let (fibers, node_change): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((bundle.with_fibers(fibers), StepStats { radius, node_change }))
}

/// One pass at the first radius of the schedule.
pub fn refine_once(bundle: &Bundle, config: &RefinementConfig) -> Result<Bundle> {
    let radius = config.radius_at(0, bundle.grid().h());
    refine_step(bundle, config, radius).map(|(b, _)| b)
}

fn empty_nodes(bundle: &Bundle, window: &BoundingBox) -> Vec<usize> {
    bundle
        .fibers()
        .par_iter()
        .enumerate()
        .filter_map(|(i, f)| f.vertices(window).is_empty().then_some(i))
        .collect()
}

/// Iterates [`refine_step`] along the radius schedule until the largest fiber
/// change drops to `stabilization_tol`, a fiber empties, or the iteration cap
/// is hit. Emptiness is decided on `fiber ∩ window`.
pub fn refine_to_stable(bundle: &Bundle, config: &RefinementConfig) -> Result<(Bundle, RefinementReport)> {
    config.validate()?;
    let window = config.window;
    let h = bundle.grid().h();
    let mut current = bundle.with_fibers(
        bundle
            .fibers()
            .par_iter()
            .map(|f| windowed(f, &window))
            .collect(),
    );
    let mut report = RefinementReport {
        iterations_run: 0,
        stabilized: false,
        empty_nodes: empty_nodes(&current, &window),
        per_iteration_change: Vec::new(),
        per_iteration_change_off_special: Vec::new(),
        per_iteration_radius: Vec::new(),
        verdict: Verdict::NotStabilized,
    };
    if !report.empty_nodes.is_empty() {
        report.verdict = Verdict::Infeasible;
        return Ok((current, report));
    }
    for k in 0..config.max_iterations {
        let radius = config.radius_at(k, h);
        let (next, stats) = refine_step(&current, config, radius)?;
        let off_special = stats
            .node_change
            .iter()
            .enumerate()
            .filter(|(i, _)| !current.is_special(*i))
            .map(|(_, c)| *c)
            .fold(0.0, f64::max);
        report.iterations_run = k + 1;
        report.per_iteration_change.push(stats.max_change());
        report.per_iteration_change_off_special.push(off_special);
        report.per_iteration_radius.push(radius);
        current = next;
        report.empty_nodes = empty_nodes(&current, &window);
        if !report.empty_nodes.is_empty() {
            report.verdict = Verdict::Infeasible;
            return Ok((current, report));
        }
        if stats.max_change() <= config.stabilization_tol {
            report.stabilized = true;
            report.verdict = Verdict::Feasible;
            break;
        }
    }
    Ok((current, report))
}

/// Point cloud of fiber samples that passed the brute-force ε-δ test.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleFiber {
    pub points: Vec<Point>,
}

impl OracleFiber {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Convex hull of the cloud as a region (empty region for an empty cloud).
    pub fn hull(&self, dim: FiberDim) -> ConvexRegion {
        if self.points.is_empty() {
            return ConvexRegion::empty(dim);
        }
        let hull = convex_hull(&self.points);
        let mut hs = Vec::new();
        match hull.len() {
            1 | 2 => {
                let a = hull[0];
                let b = *hull.last().unwrap_or(&a);
                let e = b - a;
                if e.norm() > 0.0 {
                    let n = Point::new(-e.y, e.x);
                    hs.extend(HalfPlane::new(n, n.dot(&a)));
                    hs.extend(HalfPlane::new(-n, -n.dot(&a)));
                    hs.extend(HalfPlane::new(e, e.dot(&b)));
                    hs.extend(HalfPlane::new(-e, -e.dot(&a)));
                } else {
                    for n in [Point::new(1.0, 0.0), Point::new(0.0, 1.0)] {
                        hs.extend(HalfPlane::new(n, n.dot(&a)));
                        hs.extend(HalfPlane::new(-n, -n.dot(&a)));
                    }
                }
            }
            m => {
                for i in 0..m {
                    let a = hull[i];
                    let b = hull[(i + 1) % m];
                    let e = b - a;
                    let n = Point::new(e.y, -e.x);
                    hs.extend(HalfPlane::new(n, n.dot(&a)));
                }
            }
        }
        if dim == FiberDim::One {
            hs.retain(|h| h.normal().y == 0.0);
        }
        ConvexRegion::new(dim, hs).unwrap_or_else(|_| ConvexRegion::empty(dim))
    }
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: &Point, a: &Point, b: &Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Node limit of [`brute_force_refine`].
pub const BRUTE_FORCE_MAX_NODES: usize = 33 * 33;

/// Test oracle: direct quantifier sweep of the refinement definition.
///
/// Each fiber `K(x) ∩ window` is sampled on a `samples × samples` lattice over
/// its bounding box (plus its vertices). A sample `z` survives when for every
/// `ε` in `eps_list` some `δ` in `delta_list` makes every node `y` with
/// `0 < |y - x| <= δ` satisfy `dist(z, K(y) ∩ window) < ε`. Distances are
/// computed directly, without dilation.
pub fn brute_force_refine(
    bundle: &Bundle,
    eps_list: &[f64],
    delta_list: &[f64],
    window: &BoundingBox,
    samples: usize,
) -> Result<Vec<OracleFiber>> {
    let grid: &Grid = bundle.grid();
    let nodes = grid.node_count();
    if nodes > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge {
            nodes,
            limit: BRUTE_FORCE_MAX_NODES,
        });
    }
    let polys: Vec<Vec<Point>> = bundle.fibers().iter().map(|f| f.vertices(window)).collect();
    let neighborhoods: Vec<Vec<Vec<usize>>> = (0..nodes)
        .map(|x| delta_list.iter().map(|&d| grid.neighbors_within(x, d)).collect())
        .collect();
    let out = (0..nodes)
        .into_par_iter()
        .map(|x| {
            let fiber = &bundle.fibers()[x];
            let candidates = sample_fiber(fiber, &polys[x], samples);
            let points = candidates
                .into_iter()
                .filter(|z| {
                    eps_list.iter().all(|&eps| {
                        neighborhoods[x].iter().any(|nb| {
                            nb.iter().all(|&y| {
                                !polys[y].is_empty() && distance_to_hull(&polys[y], z) < eps
                            })
                        })
                    })
                })
                .collect();
            OracleFiber { points }
        })
        .collect();
    Ok(out)
}

fn sample_fiber(fiber: &ConvexRegion, poly: &[Point], samples: usize) -> Vec<Point> {
    if poly.is_empty() {
        return Vec::new();
    }
    let mut out = poly.to_vec();
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for v in poly {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let n = samples.max(2);
    let steps = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / (n - 1) as f64;
    let rows = if fiber.dim() == FiberDim::One { 1 } else { n };
    for j in 0..rows {
        for i in 0..n {
            let p = Point::new(steps(lo.x, hi.x, i), if rows == 1 { 0.0 } else { steps(lo.y, hi.y, j) });
            if distance_to_hull(poly, &p) <= 1e-12 {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex2::{contains, is_empty};

    fn constant_bundle(res: usize) -> Bundle {
        let grid = Grid::new_2d([0.0, 0.0], [1.0, 1.0], res).unwrap();
        let k = ConvexRegion::from_box(&BoundingBox::new([-1.0, 0.0], [2.0, 1.0]).unwrap(), FiberDim::Two);
        Bundle::from_fibers(grid.clone(), FiberDim::Two, vec![k; grid.node_count()]).unwrap()
    }

    fn jump_bundle(res: usize) -> Bundle {
        let grid = Grid::new_1d(-1.0, 1.0, res).unwrap();
        let fibers = (0..grid.node_count())
            .map(|i| {
                let x = grid.node(i)[0];
                if x > 0.0 {
                    ConvexRegion::interval(1.0, 1.0).unwrap()
                } else if x < 0.0 {
                    ConvexRegion::interval(-1.0, -1.0).unwrap()
                } else {
                    ConvexRegion::interval(-1.0, 1.0).unwrap()
                }
            })
            .collect();
        Bundle::from_fibers(grid, FiberDim::One, fibers).unwrap()
    }

    #[test]
    fn constant_bundle_is_fixed() {
        let b = constant_bundle(9);
        let cfg = RefinementConfig::new(BoundingBox::square(8.0), 0.0);
        let r = refine_once(&b, &cfg).unwrap();
        for (old, new) in b.fibers().iter().zip(r.fibers()) {
            assert_eq!(hausdorff_sampled(old, new, &cfg.window, 16).unwrap(), 0.0);
        }
        let (_, report) = refine_to_stable(&b, &cfg).unwrap();
        assert!(report.stabilized);
        assert_eq!(report.iterations_run, 1);
        assert_eq!(report.per_iteration_change, vec![0.0]);
        assert_eq!(report.verdict, Verdict::Feasible);
    }

    #[test]
    fn jump_bundle_empties_at_origin() {
        // {sign(x)} has no continuous section: the two one-sided limits are
        // 2 apart, so K̃(0) = ∅ for every ε < 1.
        let b = jump_bundle(17);
        let cfg = RefinementConfig::new(BoundingBox::square(4.0), 0.0);
        let r = refine_once(&b, &cfg).unwrap();
        assert!(is_empty(&r.fibers()[8]));
        let (_, report) = refine_to_stable(&b, &cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Infeasible);
        assert!(report.empty_nodes.contains(&8));
    }

    #[test]
    fn oracle_agrees_on_jump_bundle() {
        let b = jump_bundle(17);
        let h = b.grid().h();
        let oracle = brute_force_refine(&b, &[0.5, 0.1], &[h, 2.0 * h], &BoundingBox::square(4.0), 41).unwrap();
        assert!(oracle[8].is_empty());
        // one-sided neighbors near ±1 agree with their own fibers
        assert!(!oracle[0].is_empty());
    }

    #[test]
    fn oracle_preserves_constant_bundle() {
        let b = constant_bundle(5);
        let w = BoundingBox::square(8.0);
        let oracle = brute_force_refine(&b, &[0.05], &[0.3], &w, 11).unwrap();
        for o in &oracle {
            assert_eq!(o.points.len(), 11 * 11 + 4);
            let hull = o.hull(FiberDim::Two);
            assert!(hausdorff_sampled(&hull, &b.fibers()[0], &w, 16).unwrap() < 1e-12);
        }
    }

    #[test]
    fn oracle_rejects_large_grids() {
        let b = constant_bundle(34);
        assert!(matches!(
            brute_force_refine(&b, &[0.1], &[0.1], &BoundingBox::square(4.0), 3),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn refinement_contracts_fibers() {
        // fibers sliding with x: K(x) = [x1, x1 + 1] × [0, 1]
        let grid = Grid::new_2d([0.0, 0.0], [1.0, 1.0], 9).unwrap();
        let fibers: Vec<_> = (0..grid.node_count())
            .map(|i| {
                let x = grid.node(i);
                ConvexRegion::from_box(&BoundingBox::new([x[0] * 4.0, 0.0], [x[0] * 4.0 + 1.0, 1.0]).unwrap(), FiberDim::Two)
            })
            .collect();
        let b = Bundle::from_fibers(grid, FiberDim::Two, fibers).unwrap();
        let cfg = RefinementConfig::new(BoundingBox::square(8.0), 0.0);
        let r = refine_once(&b, &cfg).unwrap();
        for (old, new) in b.fibers().iter().zip(r.fibers()) {
            for v in new.vertices(&cfg.window) {
                assert!(contains(old, &v, 1e-9));
            }
        }
    }

    #[test]
    fn radius_schedule_halves_to_floor() {
        let cfg = RefinementConfig::new(BoundingBox::square(1.0), 0.0);
        let r: Vec<f64> = (0..5).map(|k| cfg.radius_at(k, 0.5)).collect();
        assert_eq!(r, vec![4.0, 2.0, 1.0, 0.5, 0.5]);
        let mut bad = cfg.clone();
        bad.max_iterations = 0;
        assert!(bad.validate().is_err());
    }
}
