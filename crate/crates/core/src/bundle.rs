//! Domain grids, scenario systems `A(x) F <= f(x)`, and the initial bundle H₀.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::convex2::{ConvexRegion, FiberDim, HalfPlane, Point};
use crate::error::{Error, Result};

/// Uniform lattice over an interval or an axis-aligned rectangle, boundary
/// nodes included. Node `(i, j)` sits at `min + (i h₁, j h₂)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    min: [f64; 2],
    max: [f64; 2],
    resolution: usize,
}

impl Grid {
    pub fn new_2d(min: [f64; 2], max: [f64; 2], resolution: usize) -> Result<Self> {
        Self::build(2, min, max, resolution)
    }

    pub fn new_1d(lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        Self::build(1, [lo, 0.0], [hi, 0.0], resolution)
    }

    fn build(dim: usize, min: [f64; 2], max: [f64; 2], resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid resolution {resolution} < 2"
            )));
        }
        for k in 0..dim {
            if !(min[k].is_finite() && max[k].is_finite() && max[k] > min[k]) {
                return Err(Error::InvalidArgument(format!(
                    "degenerate grid axis {k}: [{}, {}]",
                    min[k], max[k]
                )));
            }
        }
        Ok(Self {
            dim,
            min,
            max,
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn min(&self) -> [f64; 2] {
        self.min
    }

    pub fn max(&self) -> [f64; 2] {
        self.max
    }

    pub fn spacing(&self) -> [f64; 2] {
        let n = (self.resolution - 1) as f64;
        let h0 = (self.max[0] - self.min[0]) / n;
        let h1 = if self.dim == 2 {
            (self.max[1] - self.min[1]) / n
        } else {
            0.0
        };
        [h0, h1]
    }

    /// Largest axis spacing.
    pub fn h(&self) -> f64 {
        let [a, b] = self.spacing();
        a.max(b)
    }

    pub fn node_count(&self) -> usize {
        if self.dim == 2 {
            self.resolution * self.resolution
        } else {
            self.resolution
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * self.resolution
    }

    pub fn ij(&self, index: usize) -> (usize, usize) {
        (index % self.resolution, index / self.resolution)
    }

    pub fn node(&self, index: usize) -> [f64; 2] {
        let (i, j) = self.ij(index);
        let [h0, h1] = self.spacing();
        let x0 = if i + 1 == self.resolution {
            self.max[0]
        } else {
            self.min[0] + i as f64 * h0
        };
        let x1 = if self.dim == 1 {
            0.0
        } else if j + 1 == self.resolution {
            self.max[1]
        } else {
            self.min[1] + j as f64 * h1
        };
        [x0, x1]
    }

    pub fn contains_point(&self, x: &[f64; 2]) -> bool {
        (0..self.dim).all(|k| x[k] >= self.min[k] && x[k] <= self.max[k])
    }

    /// Index of the node lying exactly at `x`, if any.
    pub fn find_node(&self, x: &[f64; 2]) -> Option<usize> {
        if !self.contains_point(x) {
            return None;
        }
        let [h0, h1] = self.spacing();
        let i = ((x[0] - self.min[0]) / h0).round() as usize;
        let j = if self.dim == 2 {
            ((x[1] - self.min[1]) / h1).round() as usize
        } else {
            0
        };
        if i >= self.resolution || j >= self.resolution {
            return None;
        }
        let idx = self.index(i, j);
        (self.node(idx) == *x).then_some(idx)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.node(a), self.node(b));
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    /// Lattice offsets `(di, dj) != 0` with `|(di h₁, dj h₂)| <= radius`, in a fixed order.
    pub fn offsets_within(&self, radius: f64) -> Vec<(isize, isize)> {
        let [h0, h1] = self.spacing();
        let ri = (radius / h0).floor() as isize;
        let rj = if self.dim == 2 {
            (radius / h1).floor() as isize
        } else {
            0
        };
        let mut out = Vec::new();
        for dj in -rj..=rj {
            for di in -ri..=ri {
                if di == 0 && dj == 0 {
                    continue;
                }
                let d = (di as f64 * h0).hypot(dj as f64 * h1);
                if d <= radius * (1.0 + 1e-12) {
                    out.push((di, dj));
                }
            }
        }
        out
    }

    /// Neighbors of `index` within `radius`, excluding `index` itself.
    pub fn neighbors_within(&self, index: usize, radius: f64) -> Vec<usize> {
        self.neighbors_with_offsets(index, &self.offsets_within(radius))
    }

    pub(crate) fn neighbors_with_offsets(&self, index: usize, offsets: &[(isize, isize)]) -> Vec<usize> {
        let (i, j) = self.ij(index);
        let n = self.resolution as isize;
        let jmax = if self.dim == 2 { n } else { 1 };
        offsets
            .iter()
            .filter_map(|&(di, dj)| {
                let a = i as isize + di;
                let b = j as isize + dj;
                (a >= 0 && a < n && b >= 0 && b < jmax).then(|| self.index(a as usize, b as usize))
            })
            .collect()
    }
}

/// One constraint row `coeffs · F <= f[bound]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub coeffs: [f64; 2],
    pub bound: usize,
}

impl Row {
    pub fn new(coeffs: [f64; 2], bound: usize) -> Self {
        Self { coeffs, bound }
    }
}

pub type RowField = Arc<dyn Fn(&[f64; 2]) -> Vec<Row> + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64; 2]) -> Vec<f64> + Send + Sync>;

/// Data values `f(x)`: stored once when constant, sampled otherwise.
#[derive(Clone)]
pub enum DataField {
    Constant(Vec<f64>),
    Field {
        eval: VectorField,
        /// Lipschitz bound of the data over the domain (units of f per unit x).
        lipschitz: f64,
    },
}

impl DataField {
    pub fn eval(&self, x: &[f64; 2]) -> Vec<f64> {
        match self {
            DataField::Constant(v) => v.clone(),
            DataField::Field { eval, .. } => eval(x),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            DataField::Constant(_) => 0.0,
            DataField::Field { lipschitz, .. } => *lipschitz,
        }
    }
}

impl fmt::Debug for DataField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataField::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            DataField::Field { lipschitz, .. } => f
                .debug_struct("Field")
                .field("lipschitz", lipschitz)
                .finish_non_exhaustive(),
        }
    }
}

/// A point where the generic rows are replaced by an override list.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialPoint {
    pub location: [f64; 2],
    pub rows: Vec<Row>,
}

/// Coefficient field, data field, and special-point overrides of a system
/// `A(x) F(x) <= f(x)`.
#[derive(Clone)]
pub struct ScenarioSystem {
    pub name: String,
    pub fiber_dim: FiberDim,
    pub domain_dim: usize,
    pub n_constraints: usize,
    pub rows: RowField,
    pub data: DataField,
    pub special_points: Vec<SpecialPoint>,
}

impl fmt::Debug for ScenarioSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScenarioSystem")
            .field("name", &self.name)
            .field("fiber_dim", &self.fiber_dim)
            .field("n_constraints", &self.n_constraints)
            .field("data", &self.data)
            .field("special_points", &self.special_points)
            .finish_non_exhaustive()
    }
}

/// Per-node record of the normalized constraint rows that produced the fiber.
/// Zero rows (`0 <= f_i`) are stored as `None`.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeRows {
    Special,
    Generic(Vec<Option<HalfPlane>>),
}

impl ScenarioSystem {
    pub fn special_at(&self, x: &[f64; 2]) -> Option<&SpecialPoint> {
        self.special_points.iter().find(|s| s.location == *x)
    }

    pub fn rows_at(&self, x: &[f64; 2]) -> Vec<Row> {
        match self.special_at(x) {
            Some(s) => s.rows.clone(),
            None => (self.rows)(x),
        }
    }

    /// Fiber `{y : A(x) y <= f(x)}` at a point, with its normalized row record.
    pub fn fiber_at_point(&self, x: &[f64; 2]) -> Result<(ConvexRegion, NodeRows)> {
        let data = self.data.eval(x);
        if data.len() != self.n_constraints || data.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadScenario(format!(
                "data at {x:?} must be {} finite values, got {data:?}",
                self.n_constraints
            )));
        }
        let special = self.special_at(x).is_some();
        let rows = self.rows_at(x);
        let mut region = ConvexRegion::full(self.fiber_dim);
        let mut record = Vec::with_capacity(rows.len());
        let mut empty = false;
        for row in &rows {
            let fi = *data.get(row.bound).ok_or_else(|| {
                Error::BadScenario(format!("row bound index {} out of range", row.bound))
            })?;
            let [a, b] = row.coeffs;
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::BadScenario(format!("non-finite row {row:?} at {x:?}")));
            }
            if self.fiber_dim == FiberDim::One && b != 0.0 {
                return Err(Error::BadScenario(format!(
                    "row {row:?} has a second coefficient in a 1-D fiber"
                )));
            }
            if a == 0.0 && b == 0.0 {
                // 0 · F <= f_i holds for every F or for none
                if fi < 0.0 {
                    empty = true;
                }
                record.push(None);
            } else {
                let h = HalfPlane::new(Point::new(a, b), fi)?;
                region.push(h)?;
                record.push(Some(h));
            }
        }
        if empty {
            region = ConvexRegion::empty(self.fiber_dim);
        }
        let rec = if special {
            NodeRows::Special
        } else {
            NodeRows::Generic(record)
        };
        Ok((region, rec))
    }
}

/// A grid plus one fiber per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    grid: Grid,
    fiber_dim: FiberDim,
    fibers: Vec<ConvexRegion>,
    rows: Option<Vec<NodeRows>>,
}

impl Bundle {
    /// Bundle with explicit fibers and no row record; every node is compared to
    /// its neighbors with pure distance-based slack during refinement.
    pub fn from_fibers(grid: Grid, fiber_dim: FiberDim, fibers: Vec<ConvexRegion>) -> Result<Self> {
        if fibers.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "{} fibers for {} nodes",
                fibers.len(),
                grid.node_count()
            )));
        }
        if let Some(f) = fibers.iter().find(|f| f.dim() != fiber_dim) {
            return Err(Error::DimMismatch(fiber_dim.as_usize(), f.dim().as_usize()));
        }
        Ok(Self {
            grid,
            fiber_dim,
            fibers,
            rows: None,
        })
    }

    pub(crate) fn with_fibers(&self, fibers: Vec<ConvexRegion>) -> Self {
        Self {
            grid: self.grid.clone(),
            fiber_dim: self.fiber_dim,
            fibers,
            rows: self.rows.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fiber_dim(&self) -> FiberDim {
        self.fiber_dim
    }

    pub fn fibers(&self) -> &[ConvexRegion] {
        &self.fibers
    }

    pub fn node_rows(&self) -> Option<&[NodeRows]> {
        self.rows.as_deref()
    }

    pub fn is_special(&self, index: usize) -> bool {
        matches!(self.rows.as_ref().map(|r| &r[index]), Some(NodeRows::Special))
    }

    pub fn special_nodes(&self) -> Vec<usize> {
        (0..self.fibers.len()).filter(|&i| self.is_special(i)).collect()
    }
}

/// Fiber at a node.
pub fn fiber_at(bundle: &Bundle, node: usize) -> Result<&ConvexRegion> {
    bundle.fibers.get(node).ok_or(Error::IndexOutOfRange {
        index: node,
        count: bundle.fibers.len(),
    })
}

/// H₀: the fiber `{y : A(x) y <= f(x)}` at every node, with overrides applied
/// at special points. Special points inside the domain must be grid nodes.
pub fn build_initial_bundle(system: &ScenarioSystem, grid: &Grid) -> Result<Bundle> {
    if grid.dim() != system.domain_dim {
        return Err(Error::BadScenario(format!(
            "{}-D grid for a {}-D domain",
            grid.dim(),
            system.domain_dim
        )));
    }
    for s in &system.special_points {
        if grid.contains_point(&s.location) && grid.find_node(&s.location).is_none() {
            return Err(Error::BadScenario(format!(
                "special point {:?} is not a grid node",
                s.location
            )));
        }
    }
    let built: Vec<(ConvexRegion, NodeRows)> = (0..grid.node_count())
        .into_par_iter()
        .map(|i| system.fiber_at_point(&grid.node(i)))
        .collect::<Result<_>>()?;
    let (fibers, rows): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    Ok(Bundle {
        grid: grid.clone(),
        fiber_dim: system.fiber_dim,
        fibers,
        rows: Some(rows),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_system() -> ScenarioSystem {
        ScenarioSystem {
            name: "box".into(),
            fiber_dim: FiberDim::Two,
            domain_dim: 2,
            n_constraints: 4,
            rows: Arc::new(|_| {
                vec![
                    Row::new([1.0, 0.0], 0),
                    Row::new([-1.0, 0.0], 1),
                    Row::new([0.0, 1.0], 2),
                    Row::new([0.0, -1.0], 3),
                ]
            }),
            data: DataField::Constant(vec![1.0, 1.0, 1.0, 1.0]),
            special_points: vec![],
        }
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], 5).unwrap();
        assert_eq!(g.node_count(), 25);
        assert_eq!(g.spacing(), [0.25, 0.25]);
        assert_eq!(g.node(g.index(4, 4)), [1.0, 1.0]);
        assert_eq!(g.find_node(&[0.5, 0.25]), Some(g.index(2, 1)));
        assert_eq!(g.find_node(&[0.3, 0.25]), None);
        assert!(Grid::new_2d([0.0, 0.0], [1.0, 1.0], 1).is_err());
        assert!(Grid::new_1d(1.0, 1.0, 4).is_err());
        let mut nb = g.neighbors_within(0, 0.26);
        nb.sort();
        assert_eq!(nb, vec![1, 5]);
        assert_eq!(g.neighbors_within(g.index(2, 2), 0.36).len(), 8);
    }

    #[test]
    fn one_d_grid() {
        let g = Grid::new_1d(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.node(2), [0.0, 0.0]);
        assert_eq!(g.find_node(&[0.0, 0.0]), Some(2));
        assert_eq!(g.neighbors_within(2, 1.0), vec![0, 1, 3, 4]);
    }

    #[test]
    fn fiber_count_and_lookup() {
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], 4).unwrap();
        let b = build_initial_bundle(&box_system(), &g).unwrap();
        assert_eq!(b.fibers().len(), 16);
        let (expected, _) = box_system().fiber_at_point(&g.node(0)).unwrap();
        assert_eq!(fiber_at(&b, 0).unwrap(), &expected);
        assert_eq!(
            fiber_at(&b, 16),
            Err(Error::IndexOutOfRange { index: 16, count: 16 })
        );
    }

    #[test]
    fn zero_rows_are_constant_conditions() {
        let mut sys = box_system();
        sys.rows = Arc::new(|_| vec![Row::new([0.0, 0.0], 0)]);
        sys.data = DataField::Constant(vec![-1.0, 0.0, 0.0, 0.0]);
        let (r, rec) = sys.fiber_at_point(&[0.5, 0.5]).unwrap();
        assert!(crate::convex2::is_empty(&r));
        assert_eq!(rec, NodeRows::Generic(vec![None]));
        sys.data = DataField::Constant(vec![0.0, 0.0, 0.0, 0.0]);
        let (r, _) = sys.fiber_at_point(&[0.5, 0.5]).unwrap();
        assert!(r.halfplanes().is_empty());
    }

    #[test]
    fn bad_rows_are_rejected() {
        let mut sys = box_system();
        sys.rows = Arc::new(|_| vec![Row::new([f64::NAN, 0.0], 0)]);
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], 3).unwrap();
        assert!(matches!(build_initial_bundle(&sys, &g), Err(Error::BadScenario(_))));
    }

    #[test]
    fn special_point_must_be_a_node() {
        let mut sys = box_system();
        sys.special_points = vec![SpecialPoint {
            location: [0.3, 0.3],
            rows: vec![],
        }];
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], 3).unwrap();
        assert!(matches!(build_initial_bundle(&sys, &g), Err(Error::BadScenario(_))));
    }
}
