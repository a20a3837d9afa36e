//! Continuous selections from a refined bundle.
//!
//! Each node gets the Steiner point of its fiber. Near a special node `s`
//! the fiber is first intersected with a box of half-width `a |x - s|`
//! around an anchor value `z_s`, so the field converges to `z_s` as `x → s`
//! instead of jumping between the limits of differently shaped neighbor
//! fibers. The anchor is the Steiner point of
//! `K(s) ∩ ⋂_{y near s} dilate(K(y), t* |y - s|)` for the smallest `t*`
//! keeping that set nonempty; `t*` is negative (an erosion) when the
//! neighbor fibers share interior points. Values between nodes are bilinear (linear in
//! 1-D).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{Bundle, Grid, ScenarioSystem};
use crate::convex2::{
    clip_polygon, distance_to_hull, steiner_of_vertices, BoundingBox, FiberDim, HalfPlane, Point,
    DEFAULT_STEINER_DIRS,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub window: BoundingBox,
    pub n_dirs: usize,
    /// Slope `a` of the anchor box half-width `a |x - s|`.
    pub anchor_slope: f64,
    /// Neighbor radius for the anchor problem, in grid cells.
    pub anchor_radius_cells: f64,
}

impl SelectionConfig {
    /// Defaults: 720 Steiner directions, anchor slope `2κ`, anchor radius 8 cells.
    pub fn new(window: BoundingBox, kappa: f64) -> Self {
        Self {
            window,
            n_dirs: DEFAULT_STEINER_DIRS,
            anchor_slope: 2.0 * kappa,
            anchor_radius_cells: 8.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub node: usize,
    pub value: [f64; 2],
    /// Smallest slope `t*` with a common point of the dilated (eroded when
    /// negative) neighbor fibers.
    pub slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusEntry {
    pub distance: f64,
    pub max_jump: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionField {
    grid: Grid,
    fiber_dim: FiberDim,
    values: Vec<Point>,
    /// Distance from each node value to its (refined) fiber.
    residuals: Vec<f64>,
    anchors: Vec<Anchor>,
    /// Nodes whose anchor box missed the fiber; they use the plain Steiner point.
    fallback_nodes: Vec<usize>,
    modulus_table: Vec<ModulusEntry>,
}

impl SelectionField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fiber_dim(&self) -> FiberDim {
        self.fiber_dim
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn fallback_nodes(&self) -> &[usize] {
        &self.fallback_nodes
    }

    pub fn modulus_table(&self) -> &[ModulusEntry] {
        &self.modulus_table
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Bilinear (linear in 1-D) interpolation; points outside the domain are
    /// clamped to it.
    pub fn value_at(&self, x: &[f64; 2]) -> Point {
        let g = &self.grid;
        let n = g.resolution();
        let [hx, hy] = g.spacing();
        let (min, max) = (g.min(), g.max());
        let cell = |t: f64, lo: f64, hi: f64, h: f64| -> (usize, f64) {
            let u = (t.clamp(lo, hi) - lo) / h;
            let i = (u.floor() as usize).min(n - 2);
            (i, (u - i as f64).clamp(0.0, 1.0))
        };
        let (i, s) = cell(x[0], min[0], max[0], hx);
        if g.dim() == 1 {
            return self.values[i] * (1.0 - s) + self.values[i + 1] * s;
        }
        let (j, t) = cell(x[1], min[1], max[1], hy);
        let v = |a: usize, b: usize| self.values[g.index(a, b)];
        v(i, j) * ((1.0 - s) * (1.0 - t))
            + v(i + 1, j) * (s * (1.0 - t))
            + v(i, j + 1) * ((1.0 - s) * t)
            + v(i + 1, j + 1) * (s * t)
    }

    /// `(x₁, x₂, F₁, F₂, residual)` per node in index order.
    pub fn rows(&self) -> Vec<[f64; 5]> {
        (0..self.grid.node_count())
            .map(|i| {
                let x = self.grid.node(i);
                let v = self.values[i];
                [x[0], x[1], v.x, v.y, self.residuals[i]]
            })
            .collect()
    }
}

fn select(poly: &[Point], n_dirs: usize) -> Point {
    if poly.len() <= 2 {
        poly.iter().fold(Point::zeros(), |acc, v| acc + v) / poly.len() as f64
    } else {
        steiner_of_vertices(poly, n_dirs)
    }
}

fn anchor_polygon(bundle: &Bundle, polys: &[Vec<Point>], s: usize, neighbors: &[usize], t: f64) -> Vec<Point> {
    let grid = bundle.grid();
    let mut poly = polys[s].clone();
    for &y in neighbors {
        let eps = t * grid.distance(s, y);
        for h in bundle.fibers()[y].halfplanes() {
            poly = clip_polygon(&poly, &h.shifted(eps));
            if poly.is_empty() {
                return poly;
            }
        }
    }
    poly
}

fn compute_anchor(bundle: &Bundle, polys: &[Vec<Point>], s: usize, config: &SelectionConfig) -> Anchor {
    let grid = bundle.grid();
    let neighbors: Vec<usize> = grid
        .neighbors_within(s, config.anchor_radius_cells * grid.h())
        .into_iter()
        .filter(|&y| !polys[y].is_empty())
        .collect();
    // bracket t* between an empty (lo) and a nonempty (hi) slope; negative
    // slopes erode the neighbor fibers and push the anchor inward
    let mut hi = 0.0;
    let mut poly = anchor_polygon(bundle, polys, s, &neighbors, hi);
    let mut lo;
    if poly.is_empty() {
        lo = 0.0;
        hi = 1.0;
        loop {
            poly = anchor_polygon(bundle, polys, s, &neighbors, hi);
            if !poly.is_empty() || hi > 1e9 {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
    } else {
        lo = -1.0;
        while lo > -1e9 && !anchor_polygon(bundle, polys, s, &neighbors, lo).is_empty() {
            hi = lo;
            lo *= 2.0;
        }
        poly = anchor_polygon(bundle, polys, s, &neighbors, hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let p = anchor_polygon(bundle, polys, s, &neighbors, mid);
        if p.is_empty() {
            lo = mid;
        } else {
            hi = mid;
            poly = p;
        }
    }
    if poly.is_empty() {
        poly = polys[s].clone();
    }
    let v = select(&poly, config.n_dirs);
    Anchor {
        node: s,
        value: [v.x, v.y],
        slope: hi,
    }
}

/// Anchored Steiner selection of `stable ∩ window`. Fails with
/// [`Error::EmptyFiber`] on the first empty fiber.
pub fn construct_selection(stable: &Bundle, config: &SelectionConfig) -> Result<SelectionField> {
    if config.n_dirs < 8 {
        return Err(Error::InvalidArgument(format!("n_dirs {} < 8", config.n_dirs)));
    }
    if !(config.anchor_slope > 0.0) {
        return Err(Error::InvalidArgument(format!("anchor_slope {} must be > 0", config.anchor_slope)));
    }
    let grid = stable.grid();
    let dim = stable.fiber_dim();
    let window = &config.window;
    let polys: Vec<Vec<Point>> = stable.fibers().par_iter().map(|f| f.vertices(window)).collect();
    if let Some(node) = polys.iter().position(|p| p.is_empty()) {
        return Err(Error::EmptyFiber {
            node,
            location: grid.node(node),
        });
    }
    let anchors: Vec<Anchor> = stable
        .special_nodes()
        .into_iter()
        .map(|s| compute_anchor(stable, &polys, s, config))
        .collect();

    let picked: Vec<(Point, bool)> = (0..grid.node_count())
        .into_par_iter()
        .map(|x| {
            let nearest = anchors.iter().min_by(|a, b| {
                grid.distance(x, a.node).total_cmp(&grid.distance(x, b.node))
            });
            let Some(anchor) = nearest else {
                return (select(&polys[x], config.n_dirs), false);
            };
            if anchor.node == x {
                return (Point::new(anchor.value[0], anchor.value[1]), false);
            }
            let r = config.anchor_slope * grid.distance(x, anchor.node);
            let z = anchor.value;
            let mut poly = polys[x].clone();
            let mut sides = vec![
                HalfPlane::from_coeffs(1.0, 0.0, z[0] + r),
                HalfPlane::from_coeffs(-1.0, 0.0, -(z[0] - r)),
            ];
            if dim == FiberDim::Two {
                sides.push(HalfPlane::from_coeffs(0.0, 1.0, z[1] + r));
                sides.push(HalfPlane::from_coeffs(0.0, -1.0, -(z[1] - r)));
            }
            for h in sides.into_iter().flatten() {
                poly = clip_polygon(&poly, &h);
                if poly.is_empty() {
                    return (select(&polys[x], config.n_dirs), true);
                }
            }
            (select(&poly, config.n_dirs), false)
        })
        .collect();

    let values: Vec<Point> = picked.iter().map(|(v, _)| *v).collect();
    let fallback_nodes = picked
        .iter()
        .enumerate()
        .filter_map(|(i, (_, fb))| fb.then_some(i))
        .collect();
    let residuals = values
        .par_iter()
        .zip(polys.par_iter())
        .map(|(v, p)| distance_to_hull(p, v))
        .collect();
    let mut field = SelectionField {
        grid: grid.clone(),
        fiber_dim: dim,
        values,
        residuals,
        anchors,
        fallback_nodes,
        modulus_table: Vec::new(),
    };
    field.modulus_table = modulus_of_continuity(&field);
    Ok(field)
}

/// Largest normalized constraint violation `max_i (a_i · F - f_i)⁺ / |a_i|`
/// of the original system at `x`; a zero row contributes `(-f_i)⁺`.
pub fn violation_at(system: &ScenarioSystem, x: &[f64; 2], value: &Point) -> (f64, Option<usize>) {
    let data = system.data.eval(x);
    let mut worst = (0.0, None);
    for (k, row) in system.rows_at(x).iter().enumerate() {
        let fi = data.get(row.bound).copied().unwrap_or(f64::NAN);
        let norm = row.coeffs[0].hypot(row.coeffs[1]);
        let v = if norm == 0.0 {
            -fi
        } else {
            (row.coeffs[0] * value.x + row.coeffs[1] * value.y - fi) / norm
        };
        if v > worst.0 || v.is_nan() {
            worst = (if v.is_nan() { f64::INFINITY } else { v }, Some(k));
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tol: f64,
    pub max_violation_nodes: f64,
    pub max_violation_fine: f64,
    pub worst_location: [f64; 2],
    pub worst_row: Option<usize>,
    pub fine_points: usize,
    pub pass: bool,
}

/// Factor by which the verification grid is finer than the selection grid.
pub const VERIFY_REFINEMENT: usize = 4;

/// Re-evaluates the original constraints at every node and on a grid
/// `VERIFY_REFINEMENT` times finer, through interpolation.
pub fn verify_selection(sel: &SelectionField, system: &ScenarioSystem, tol: f64) -> VerificationReport {
    let g = sel.grid();
    let node_worst = (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let x = g.node(i);
            let (v, row) = violation_at(system, &x, &sel.values()[i]);
            (v, x, row)
        })
        .reduce(|| (0.0, [0.0; 2], None), pick_worse);
    let n = (g.resolution() - 1) * VERIFY_REFINEMENT + 1;
    let (min, max) = (g.min(), g.max());
    let coord = |k: usize, d: usize| {
        if k + 1 == n {
            max[d]
        } else {
            min[d] + (max[d] - min[d]) * k as f64 / (n - 1) as f64
        }
    };
    let rows = if g.dim() == 1 { 1 } else { n };
    let fine_worst = (0..n * rows)
        .into_par_iter()
        .map(|k| {
            let x = [coord(k % n, 0), if g.dim() == 1 { 0.0 } else { coord(k / n, 1) }];
            let (v, row) = violation_at(system, &x, &sel.value_at(&x));
            (v, x, row)
        })
        .reduce(|| (0.0, [0.0; 2], None), pick_worse);
    let worst = pick_worse(node_worst, fine_worst);
    VerificationReport {
        tol,
        max_violation_nodes: node_worst.0,
        max_violation_fine: fine_worst.0,
        worst_location: worst.1,
        worst_row: worst.2,
        fine_points: n * rows,
        pass: worst.0 <= tol,
    }
}

type Worst = (f64, [f64; 2], Option<usize>);

// total order (value, then location) keeps the parallel reduction deterministic
fn pick_worse(a: Worst, b: Worst) -> Worst {
    let key = |w: &Worst| (w.0, w.1[0], w.1[1]);
    let (ka, kb) = (key(&a), key(&b));
    let a_wins = ka.0.total_cmp(&kb.0).then(kb.1.total_cmp(&ka.1)).then(kb.2.total_cmp(&ka.2)).is_ge();
    if a_wins {
        a
    } else {
        b
    }
}

/// Largest node distance in the modulus table, in grid cells.
pub const MODULUS_MAX_CELLS: f64 = 32.0;

/// `max |F(x) - F(y)|` over node pairs with `|x - y| <= d` for
/// `d = h, 2h, 4h, …` up to `32h` or the domain diameter.
pub fn modulus_of_continuity(sel: &SelectionField) -> Vec<ModulusEntry> {
    let g = sel.grid();
    let h = g.h();
    let diam = {
        let (a, b) = (g.min(), g.max());
        (b[0] - a[0]).hypot(b[1] - a[1])
    };
    let mut distances = Vec::new();
    let mut d = h;
    while d <= MODULUS_MAX_CELLS * h * (1.0 + 1e-12) && d <= diam * (1.0 + 1e-12) {
        distances.push(d);
        d *= 2.0;
    }
    let Some(&dmax) = distances.last() else {
        return Vec::new();
    };
    let offsets = g.offsets_within(dmax);
    let jumps: Vec<f64> = (0..g.node_count())
        .into_par_iter()
        .map(|x| {
            let mut best = vec![0.0f64; distances.len()];
            for y in g.neighbors_with_offsets(x, &offsets) {
                let dist = g.distance(x, y);
                let jump = (sel.values()[x] - sel.values()[y]).norm();
                for (k, &dk) in distances.iter().enumerate() {
                    if dist <= dk * (1.0 + 1e-12) {
                        best[k] = best[k].max(jump);
                    }
                }
            }
            best
        })
        .reduce(
            || vec![0.0; distances.len()],
            |a, b| a.iter().zip(&b).map(|(p, q)| p.max(*q)).collect(),
        );
    distances
        .into_iter()
        .zip(jumps)
        .map(|(distance, max_jump)| ModulusEntry { distance, max_jump })
        .collect()
}
