//! Planar (and 1-D) convex regions in H-representation.
//!
//! A [`ConvexRegion`] is the intersection of finitely many closed halfplanes
//! `normal · y <= offset`, with unit normals. An empty list is all of `R^dim`.
//! One-dimensional regions reuse the same representation: normals are
//! `(±1, 0)` and points carry a zero second coordinate.
//!
//! Two evaluation paths are used:
//! - unbounded questions (emptiness, support, Chebyshev center) go through a
//!   deterministic incremental 2-D LP over a large bounding box;
//! - windowed geometry (Steiner point, sampled Hausdorff, pruning) clips the
//!   region against a [`BoundingBox`] and works on the resulting polygon.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Membership tolerance used by default predicates.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Feasibility tolerance of the LP.
pub const LP_TOL: f64 = 1e-10;
/// Default number of quadrature directions for the Steiner point.
pub const DEFAULT_STEINER_DIRS: usize = 720;
/// Half-width of the box that bounds every LP; regions are assumed to meet it.
pub const LP_BOX: f64 = 1e7;

const PARALLEL_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberDim {
    One,
    Two,
}

impl FiberDim {
    pub fn as_usize(self) -> usize {
        match self {
            FiberDim::One => 1,
            FiberDim::Two => 2,
        }
    }
}

/// Closed halfplane `normal · y <= offset` with `|normal| = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    normal: Point,
    offset: f64,
}

impl HalfPlane {
    /// Normalizes `normal` to unit length and rescales `offset` with it.
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let norm = normal.norm();
        if !(norm.is_finite() && norm > 0.0 && offset.is_finite()) {
            return Err(Error::DegenerateHalfPlane);
        }
        Ok(Self {
            normal: normal / norm,
            offset: offset / norm,
        })
    }

    pub fn from_coeffs(a: f64, b: f64, offset: f64) -> Result<Self> {
        Self::new(Point::new(a, b), offset)
    }

    #[inline]
    pub fn normal(&self) -> Point {
        self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed violation `normal · p - offset`; nonpositive inside.
    #[inline]
    pub fn value(&self, p: &Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    #[inline]
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.value(p) <= tol
    }

    /// Same normal, offset moved outward by `eps`.
    #[inline]
    pub fn shifted(&self, eps: f64) -> Self {
        Self {
            normal: self.normal,
            offset: self.offset + eps,
        }
    }

    fn project(&self, p: &Point) -> Point {
        p - self.normal * self.value(p)
    }
}

/// Axis-aligned window in fiber space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl BoundingBox {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        if !(min[0] <= max[0] && min[1] <= max[1])
            || min.iter().chain(max.iter()).any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "bad bounding box {min:?}..{max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    /// `[-half, half]^2`.
    pub fn square(half: f64) -> Self {
        Self {
            min: [-half, -half],
            max: [half, half],
        }
    }

    pub fn halfplanes(&self, dim: FiberDim) -> Vec<HalfPlane> {
        let mut out = vec![
            HalfPlane {
                normal: Point::new(1.0, 0.0),
                offset: self.max[0],
            },
            HalfPlane {
                normal: Point::new(-1.0, 0.0),
                offset: -self.min[0],
            },
        ];
        if dim == FiberDim::Two {
            out.push(HalfPlane {
                normal: Point::new(0.0, 1.0),
                offset: self.max[1],
            });
            out.push(HalfPlane {
                normal: Point::new(0.0, -1.0),
                offset: -self.min[1],
            });
        }
        out
    }

    /// Counter-clockwise corners.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.min[0], self.min[1]),
            Point::new(self.max[0], self.min[1]),
            Point::new(self.max[0], self.max[1]),
            Point::new(self.min[0], self.max[1]),
        ]
    }

    /// Largest distance from the origin to a point of the box.
    pub fn radius(&self) -> f64 {
        self.corners().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> f64 {
        (Point::new(self.max[0], self.max[1]) - Point::new(self.min[0], self.min[1])).norm()
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        p.x >= self.min[0] - tol
            && p.x <= self.max[0] + tol
            && p.y >= self.min[1] - tol
            && p.y <= self.max[1] + tol
    }
}

/// Finite intersection of halfplanes in `R^1` or `R^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexRegion {
    dim: FiberDim,
    halfplanes: Vec<HalfPlane>,
}

impl ConvexRegion {
    pub fn full(dim: FiberDim) -> Self {
        Self {
            dim,
            halfplanes: Vec::new(),
        }
    }

    pub fn new(dim: FiberDim, halfplanes: Vec<HalfPlane>) -> Result<Self> {
        if dim == FiberDim::One && halfplanes.iter().any(|h| h.normal.y != 0.0) {
            return Err(Error::DimMismatch(1, 2));
        }
        Ok(Self { dim, halfplanes })
    }

    /// A canonical empty region: `y1 <= -1` and `y1 >= 1`.
    pub fn empty(dim: FiberDim) -> Self {
        Self {
            dim,
            halfplanes: vec![
                HalfPlane {
                    normal: Point::new(1.0, 0.0),
                    offset: -1.0,
                },
                HalfPlane {
                    normal: Point::new(-1.0, 0.0),
                    offset: -1.0,
                },
            ],
        }
    }

    pub fn from_box(bbox: &BoundingBox, dim: FiberDim) -> Self {
        Self {
            dim,
            halfplanes: bbox.halfplanes(dim),
        }
    }

    /// Interval `[lo, hi]` in one dimension.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self {
            dim: FiberDim::One,
            halfplanes: vec![
                HalfPlane::from_coeffs(1.0, 0.0, hi)?,
                HalfPlane::from_coeffs(-1.0, 0.0, -lo)?,
            ],
        })
    }

    #[inline]
    pub fn dim(&self) -> FiberDim {
        self.dim
    }

    #[inline]
    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    pub fn push(&mut self, h: HalfPlane) -> Result<()> {
        if self.dim == FiberDim::One && h.normal.y != 0.0 {
            return Err(Error::DimMismatch(1, 2));
        }
        self.halfplanes.push(h);
        Ok(())
    }

    pub fn clipped(&self, window: &BoundingBox) -> Self {
        let mut hs = self.halfplanes.clone();
        hs.extend(window.halfplanes(self.dim));
        Self {
            dim: self.dim,
            halfplanes: hs,
        }
    }

    pub fn translated(&self, v: &Point) -> Self {
        Self {
            dim: self.dim,
            halfplanes: self
                .halfplanes
                .iter()
                .map(|h| HalfPlane {
                    normal: h.normal,
                    offset: h.offset + h.normal.dot(v),
                })
                .collect(),
        }
    }

    /// Interval endpoints `(lo, hi)` of a 1-D region (infinite when unbounded).
    pub fn interval_bounds(&self) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for h in &self.halfplanes {
            if h.normal.x > 0.0 {
                hi = hi.min(h.offset / h.normal.x);
            } else {
                lo = lo.max(h.offset / h.normal.x);
            }
        }
        (lo, hi)
    }

    /// Vertices of `self ∩ window`, counter-clockwise in 2-D; the two interval
    /// endpoints (or one point) in 1-D. Empty when the clipped set is empty.
    pub fn vertices(&self, window: &BoundingBox) -> Vec<Point> {
        match self.dim {
            FiberDim::One => {
                let (lo, hi) = self.interval_bounds();
                let lo = lo.max(window.min[0]);
                let hi = hi.min(window.max[0]);
                if lo > hi + MEMBERSHIP_TOL {
                    Vec::new()
                } else if (hi - lo).abs() <= MEMBERSHIP_TOL {
                    vec![Point::new(0.5 * (lo + hi), 0.0)]
                } else {
                    vec![Point::new(lo, 0.0), Point::new(hi, 0.0)]
                }
            }
            FiberDim::Two => {
                let mut poly: Vec<Point> = window.corners().to_vec();
                for h in &self.halfplanes {
                    poly = clip_polygon(&poly, h);
                    if poly.is_empty() {
                        break;
                    }
                }
                poly
            }
        }
    }

    /// Drops halfplanes that touch no vertex of `self ∩ window`. Set semantics
    /// of `self ∩ window` are preserved.
    pub fn pruned_within(&self, window: &BoundingBox) -> Self {
        let verts = self.vertices(window);
        if verts.is_empty() {
            return Self::empty(self.dim);
        }
        let scale = verts.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let touch = 1e-9 * scale;
        let mut hs: Vec<HalfPlane> = Vec::new();
        for h in &self.halfplanes {
            let touches = verts.iter().any(|v| h.value(v) >= -touch);
            let duplicate = hs
                .iter()
                .any(|k| (k.normal - h.normal).norm() < 1e-15 && k.offset <= h.offset);
            if touches && !duplicate {
                hs.push(*h);
            }
        }
        Self {
            dim: self.dim,
            halfplanes: hs,
        }
    }
}

/// Sutherland-Hodgman clip of a convex polygon by one halfplane. Points on the
/// boundary within a small tolerance count as inside, so degenerate (segment or
/// point) results survive.
pub(crate) fn clip_polygon(poly: &[Point], h: &HalfPlane) -> Vec<Point> {
    if poly.is_empty() {
        return Vec::new();
    }
    let scale = poly.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let va = h.value(&a);
        let vb = h.value(&b);
        let a_in = va <= tol;
        let b_in = vb <= tol;
        if a_in {
            out.push(a);
        }
        if (a_in && vb > tol && va < -tol) || (!a_in && b_in && vb < -tol) {
            let t = va / (va - vb);
            out.push(a + (b - a) * t);
        }
    }
    dedup_ring(out, 1e-13 * scale)
}

fn dedup_ring(mut pts: Vec<Point>, tol: f64) -> Vec<Point> {
    pts.dedup_by(|a, b| (*a - *b).norm() <= tol);
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= tol {
        pts.pop();
    }
    pts
}

/// Euclidean distance from `p` to the convex hull of `pts` (a polygon, a
/// segment, or a point). `pts` must be nonempty and in convex position.
pub(crate) fn distance_to_hull(pts: &[Point], p: &Point) -> f64 {
    match pts.len() {
        0 => f64::INFINITY,
        1 => (p - pts[0]).norm(),
        2 => segment_distance(&pts[0], &pts[1], p),
        n => {
            let area2: f64 = (0..n)
                .map(|i| {
                    let a = pts[i];
                    let b = pts[(i + 1) % n];
                    a.x * b.y - a.y * b.x
                })
                .sum();
            if area2.abs() > 1e-300 {
                let sign = area2.signum();
                let inside = (0..n).all(|i| {
                    let a = pts[i];
                    let b = pts[(i + 1) % n];
                    let e = b - a;
                    let w = p - a;
                    sign * (e.x * w.y - e.y * w.x) >= -1e-15 * e.norm().max(1.0)
                });
                if inside {
                    return 0.0;
                }
            }
            (0..n)
                .map(|i| segment_distance(&pts[i], &pts[(i + 1) % n], p))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn segment_distance(a: &Point, b: &Point, p: &Point) -> f64 {
    let e = b - a;
    let len2 = e.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&e) / len2).clamp(0.0, 1.0);
    (p - (a + e * t)).norm()
}

/// Closest point of the convex hull of `pts` to `p`.
pub(crate) fn project_to_hull(pts: &[Point], p: &Point) -> Point {
    if pts.len() >= 3 && distance_to_hull(pts, p) == 0.0 {
        return *p;
    }
    let n = pts.len();
    let mut best = pts[0];
    let mut best_d = f64::INFINITY;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let e = b - a;
        let len2 = e.norm_squared();
        let q = if len2 == 0.0 {
            a
        } else {
            a + e * ((p - a).dot(&e) / len2).clamp(0.0, 1.0)
        };
        let d = (p - q).norm();
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Deterministic incremental 2-D LP
// ---------------------------------------------------------------------------

/// Maximizes `objective · y` over the halfplanes intersected with `bbox`.
/// Ties are broken towards the lexicographically smallest point. Halfplanes are
/// inserted in the given order, so the result is a pure function of the input.
pub fn lp_maximize(
    halfplanes: &[HalfPlane],
    objective: &Point,
    bbox: &BoundingBox,
    tol: f64,
) -> Option<Point> {
    let box_hs = bbox.halfplanes(FiberDim::Two);
    let mut x = Point::new(
        box_coordinate(objective.x, bbox.min[0], bbox.max[0]),
        box_coordinate(objective.y, bbox.min[1], bbox.max[1]),
    );
    for (i, h) in halfplanes.iter().enumerate() {
        if h.value(&x) <= tol {
            continue;
        }
        x = lp_on_line(&halfplanes[..i], &box_hs, h, objective, tol)?;
    }
    Some(x)
}

fn box_coordinate(c: f64, lo: f64, hi: f64) -> f64 {
    if c > PARALLEL_EPS {
        hi
    } else {
        lo
    }
}

fn lp_on_line(
    earlier: &[HalfPlane],
    box_hs: &[HalfPlane],
    line: &HalfPlane,
    objective: &Point,
    tol: f64,
) -> Option<Point> {
    let base = line.normal * line.offset;
    let dir = Point::new(-line.normal.y, line.normal.x);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for h in earlier.iter().chain(box_hs.iter()) {
        let a = h.normal.dot(&dir);
        let r = h.offset - h.normal.dot(&base);
        if a.abs() <= PARALLEL_EPS {
            if r < -tol {
                return None;
            }
        } else if a > 0.0 {
            hi = hi.min(r / a);
        } else {
            lo = lo.max(r / a);
        }
    }
    if lo > hi + tol {
        return None;
    }
    let t = if lo > hi {
        0.5 * (lo + hi)
    } else {
        let slope = objective.dot(&dir);
        if slope > PARALLEL_EPS {
            hi
        } else if slope < -PARALLEL_EPS {
            lo
        } else if dir.x > PARALLEL_EPS {
            lo
        } else if dir.x < -PARALLEL_EPS {
            hi
        } else if dir.y > 0.0 {
            lo
        } else {
            hi
        }
    };
    Some(base + dir * t)
}

fn lp_box() -> BoundingBox {
    BoundingBox::square(LP_BOX)
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// True iff no point satisfies every halfplane (within [`LP_TOL`]).
pub fn is_empty(region: &ConvexRegion) -> bool {
    match region.dim {
        FiberDim::One => {
            let (lo, hi) = region.interval_bounds();
            lo > hi + LP_TOL
        }
        FiberDim::Two => {
            lp_maximize(&region.halfplanes, &Point::zeros(), &lp_box(), LP_TOL).is_none()
        }
    }
}

pub fn contains(region: &ConvexRegion, point: &Point, tol: f64) -> bool {
    region.halfplanes.iter().all(|h| h.contains(point, tol))
}

/// Euclidean distance to the region by active-set enumeration: the projection
/// is the point itself, a projection onto one boundary line, or a vertex.
pub fn distance(region: &ConvexRegion, point: &Point) -> Result<f64> {
    if is_empty(region) {
        return Err(Error::EmptyRegion);
    }
    if contains(region, point, 0.0) {
        return Ok(0.0);
    }
    let hs = &region.halfplanes;
    let feasible = |q: &Point| hs.iter().all(|h| h.contains(q, MEMBERSHIP_TOL));
    let mut best = f64::INFINITY;
    for h in hs {
        let q = h.project(point);
        if feasible(&q) {
            best = best.min((q - point).norm());
        }
    }
    if region.dim == FiberDim::Two {
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                if let Some(q) = line_intersection(&hs[i], &hs[j]) {
                    if feasible(&q) {
                        best = best.min((q - point).norm());
                    }
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::EmptyRegion)
    }
}

fn line_intersection(a: &HalfPlane, b: &HalfPlane) -> Option<Point> {
    let det = a.normal.x * b.normal.y - a.normal.y * b.normal.x;
    if det.abs() <= 1e-12 {
        return None;
    }
    Some(Point::new(
        (a.offset * b.normal.y - a.normal.y * b.offset) / det,
        (a.normal.x * b.offset - a.offset * b.normal.x) / det,
    ))
}

/// Distance from `point` to `region ∩ window`, through the clipped polygon.
pub fn distance_within(region: &ConvexRegion, window: &BoundingBox, point: &Point) -> Result<f64> {
    let verts = region.vertices(window);
    if verts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(distance_to_hull(&verts, point))
}

pub fn intersect(a: &ConvexRegion, b: &ConvexRegion) -> Result<ConvexRegion> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch(a.dim.as_usize(), b.dim.as_usize()));
    }
    let mut hs = a.halfplanes.clone();
    hs.extend_from_slice(&b.halfplanes);
    Ok(ConvexRegion {
        dim: a.dim,
        halfplanes: hs,
    })
}

/// Moves every offset out by `eps`. Exact for a single halfplane; a superset of
/// the true `eps`-neighborhood near vertices.
pub fn dilate(region: &ConvexRegion, eps: f64) -> Result<ConvexRegion> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("dilation {eps} < 0")));
    }
    Ok(ConvexRegion {
        dim: region.dim,
        halfplanes: region.halfplanes.iter().map(|h| h.shifted(eps)).collect(),
    })
}

/// Maximum of `direction · y` over `region ∩ window`.
pub fn support(region: &ConvexRegion, direction: &Point, window: &BoundingBox) -> Result<f64> {
    match region.dim {
        FiberDim::One => {
            let verts = region.vertices(window);
            verts
                .iter()
                .map(|v| v.x * direction.x)
                .reduce(f64::max)
                .ok_or(Error::EmptyRegion)
        }
        FiberDim::Two => lp_maximize(&region.halfplanes, direction, window, LP_TOL)
            .map(|p| direction.dot(&p))
            .ok_or(Error::EmptyRegion),
    }
}

/// Center of a largest inscribed disk of `region ∩ window`, found by bisection
/// on the inradius; the lexicographically smallest center wins ties.
pub fn chebyshev_center(region: &ConvexRegion, window: &BoundingBox) -> Result<Point> {
    let clipped = region.clipped(window);
    if region.dim == FiberDim::One {
        let verts = clipped.vertices(window);
        return match verts.len() {
            0 => Err(Error::EmptyRegion),
            1 => Ok(verts[0]),
            _ => Ok((verts[0] + verts[1]) * 0.5),
        };
    }
    let bbox = lp_box();
    let shrunk = |r: f64| -> Vec<HalfPlane> {
        clipped.halfplanes.iter().map(|h| h.shifted(-r)).collect()
    };
    let zero = Point::zeros();
    let mut best = lp_maximize(&clipped.halfplanes, &zero, &bbox, LP_TOL).ok_or(Error::EmptyRegion)?;
    let mut lo = 0.0;
    let mut hi = 0.5 * (window.max[0] - window.min[0]).min(window.max[1] - window.min[1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match lp_maximize(&shrunk(mid), &zero, &bbox, 0.0) {
            Some(p) => {
                lo = mid;
                best = p;
            }
            None => hi = mid,
        }
    }
    Ok(best)
}

/// Discretized Steiner point `(1/pi) * sum h(u_k) u_k dphi` of `region ∩ window`,
/// projected back onto the clipped region if quadrature drift leaves it.
pub fn steiner_point(region: &ConvexRegion, window: &BoundingBox, n_dirs: usize) -> Result<Point> {
    if n_dirs < 8 {
        return Err(Error::InvalidArgument(format!("n_dirs {n_dirs} < 8")));
    }
    let verts = region.vertices(window);
    if verts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if region.dim == FiberDim::One || verts.len() == 1 {
        let sum = verts.iter().fold(Point::zeros(), |acc, v| acc + v);
        return Ok(sum / verts.len() as f64);
    }
    Ok(steiner_of_vertices(&verts, n_dirs))
}

pub(crate) fn steiner_of_vertices(verts: &[Point], n_dirs: usize) -> Point {
    let dphi = 2.0 * PI / n_dirs as f64;
    let mut s = Point::zeros();
    for k in 0..n_dirs {
        let phi = k as f64 * dphi;
        let u = Point::new(phi.cos(), phi.sin());
        let h = verts.iter().map(|v| v.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
        s += u * h;
    }
    s *= dphi / PI;
    if verts.len() >= 3 && distance_to_hull(verts, &s) > 0.0 {
        s = project_to_hull(verts, &s);
    }
    s
}

/// Symmetric sampled Hausdorff distance between `a ∩ window` and `b ∩ window`.
/// Polygon vertices are always included among the samples, and `n` further
/// points are spread along each boundary.
pub fn hausdorff_sampled(
    a: &ConvexRegion,
    b: &ConvexRegion,
    window: &BoundingBox,
    n: usize,
) -> Result<f64> {
    let pa = a.vertices(window);
    let pb = b.vertices(window);
    if pa.is_empty() || pb.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let one_sided = |from: &[Point], to: &[Point]| -> f64 {
        boundary_samples(from, n)
            .iter()
            .map(|p| distance_to_hull(to, p))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(&pa, &pb).max(one_sided(&pb, &pa)))
}

/// Vertices plus `n` points spread uniformly by arc length along the boundary.
pub(crate) fn boundary_samples(poly: &[Point], n: usize) -> Vec<Point> {
    let mut out = poly.to_vec();
    if poly.len() < 2 || n == 0 {
        return out;
    }
    let m = poly.len();
    let closed = m >= 3;
    let edges: Vec<(Point, Point)> = if closed {
        (0..m).map(|i| (poly[i], poly[(i + 1) % m])).collect()
    } else {
        vec![(poly[0], poly[1])]
    };
    let perimeter: f64 = edges.iter().map(|(a, b)| (b - a).norm()).sum();
    if perimeter == 0.0 {
        return out;
    }
    let step = perimeter / n as f64;
    let mut edge = 0;
    let mut acc = 0.0;
    for k in 0..n {
        let s = (k as f64 + 0.5) * step;
        while edge + 1 < edges.len() && acc + (edges[edge].1 - edges[edge].0).norm() < s {
            acc += (edges[edge].1 - edges[edge].0).norm();
            edge += 1;
        }
        let (a, b) = edges[edge];
        let len = (b - a).norm();
        let t = if len > 0.0 { ((s - acc) / len).clamp(0.0, 1.0) } else { 0.0 };
        out.push(a + (b - a) * t);
    }
    out
}
