//! Closed-form oracles for the planar system
//!
//! ```text
//! c⁴ F₁ + s⁴ F₂ <= f₁      s⁴ F₁ - c⁴ F₂ <= f₂
//! -c⁴ F₁ - s⁴ F₂ <= f₃     -s⁴ F₁ + c⁴ F₂ <= f₄
//! ```
//!
//! on `[0,1]²` with `(c, s) = (cos θ, sin θ)` the direction of `x ≠ 0`, and
//! the origin override `0 <= f₁, f₂, f₄`, `-10⁶ F₁ <= f₃`. Also the 1-D
//! scenario with cases `x² F <= f <= x F` for `x >= 0` and
//! `x F <= f <= x² F` for `x <= 0`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{DataField, Grid, Row, ScenarioSystem, SpecialPoint};
use crate::convex2::FiberDim;
use crate::error::{Error, Result};

/// Weight of the extra origin constraint `-ORIGIN_WEIGHT · F₁ <= f₃`.
pub const ORIGIN_WEIGHT: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantData {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

impl ConstantData {
    pub fn new(f1: f64, f2: f64, f3: f64, f4: f64) -> Self {
        Self { f1, f2, f3, f4 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new(lambda * self.f1, lambda * self.f2, lambda * self.f3, lambda * self.f4)
    }
}

impl From<[f64; 4]> for ConstantData {
    fn from(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&theta) {
        Ok(())
    } else {
        Err(Error::DomainError(format!("angle {theta} outside [0, π/2]")))
    }
}

/// `B(θ) = [[cos⁴θ, sin⁴θ], [sin⁴θ, -cos⁴θ]]`.
pub fn b_matrix(theta: f64) -> Result<Matrix2<f64>> {
    check_angle(theta)?;
    let c4 = theta.cos().powi(4);
    let s4 = theta.sin().powi(4);
    Ok(Matrix2::new(c4, s4, s4, -c4))
}

/// Operator 2-norm of `B(θ)⁻¹` (largest singular value of the inverse).
pub fn b_inverse_norm(theta: f64) -> Result<f64> {
    let inv = b_matrix(theta)?
        .try_inverse()
        .ok_or_else(|| Error::DomainError(format!("B({theta}) is singular")))?;
    Ok(inv.singular_values().max())
}

/// Nonemptiness of `H₀(x)`: unconditional at the origin, otherwise
/// `-f₃ <= f₁` and `-f₄ <= f₂`.
pub fn h0_nonempty(f: &ConstantData, x: [f64; 2]) -> bool {
    x == [0.0, 0.0] || (-f.f3 <= f.f1 && -f.f4 <= f.f2)
}

/// `V(y₁, a) = (M - (1-a)² y₁) / a²`.
pub fn v_value(y1: f64, a: f64, m: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::DomainError(format!("a = {a} outside (0, 1]")));
    }
    Ok((m - (1.0 - a).powi(2) * y1) / (a * a))
}

/// `W(y₁) = max_a V(y₁, a) = M + M² / (y₁ - M)`, attained at `a = 1 - M/y₁`.
pub fn w_value(y1: f64, m: f64) -> Result<f64> {
    if !(y1 > m) {
        return Err(Error::DomainError(format!("y1 = {y1} must exceed M = {m}")));
    }
    Ok(m + m * m / (y1 - m))
}

/// Closed form of `H₁(0)` for constant data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticH1 {
    pub f: ConstantData,
}

impl AnalyticH1 {
    pub fn new(f: ConstantData) -> Self {
        Self { f }
    }

    /// `M = -f₃` on the hyperbolic branch.
    pub fn m(&self) -> Option<f64> {
        (self.f.f3 < 0.0).then_some(-self.f.f3)
    }

    /// Largest admissible `(y₁, y₂)` from `R₁`, `R₂`, `R₄`.
    pub fn corner(&self) -> [f64; 2] {
        [self.f.f1.min(self.f.f2), self.f.f1.min(self.f.f4)]
    }

    /// Lower bound on `y₂` from `R₃` at a given `y₁` (`None` when `y₁` is
    /// excluded outright).
    pub fn r3_lower(&self, y1: f64) -> Option<f64> {
        match self.m() {
            Some(m) => (y1 > m).then(|| m + m * m / (y1 - m)),
            None => (y1 >= -self.f.f3).then_some(-self.f.f3),
        }
    }

    pub fn contains(&self, y: [f64; 2], tol: f64) -> bool {
        let f = &self.f;
        let [y1, y2] = y;
        let boxes = y1 >= -f.f3 / ORIGIN_WEIGHT - tol
            && y1 <= f.f1 + tol
            && y2 <= f.f1 + tol
            && y1 <= f.f2 + tol
            && y2 >= -f.f2 - tol
            && y1 >= -f.f4 - tol
            && y2 <= f.f4 + tol;
        if !boxes {
            return false;
        }
        match self.m() {
            // (y₁ - M)(y₂ - M) >= M², shifted by tol along both axes
            Some(m) => y1 + tol > m && (y1 - m + tol) * (y2 - m + tol) >= m * m,
            None => y1 >= -f.f3 - tol && y2 >= -f.f3 - tol,
        }
    }
}

pub fn h1_origin_contains(y: [f64; 2], f: &ConstantData, tol: f64) -> bool {
    AnalyticH1::new(*f).contains(y, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InfeasibilityCause {
    /// `H₀(x)` empty for `x ≠ 0` because `f₁ + f₃ < 0`.
    OffOriginR1R3,
    /// `H₀(x)` empty for `x ≠ 0` because `f₂ + f₄ < 0`.
    OffOriginR2R4,
    /// A constant origin row `0 <= f_i` fails (1-based index).
    OriginConstant { index: usize },
    /// Every origin fiber point is cut away by the first refinement.
    OriginRefinementEmpty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Feasibility {
    Feasible { witness: [f64; 2] },
    Infeasible { cause: InfeasibilityCause },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Decides whether the planar system with constant data has a continuous
/// solution. Every constraint of `H₁(0)` is either an upper bound on a
/// coordinate or upward closed, so `H₁(0)` is nonempty exactly when its
/// upper-right corner belongs to it; the corner is the witness.
pub fn feasibility_constant(f: &ConstantData) -> Feasibility {
    if f.f1 + f.f3 < 0.0 {
        return Feasibility::Infeasible {
            cause: InfeasibilityCause::OffOriginR1R3,
        };
    }
    if f.f2 + f.f4 < 0.0 {
        return Feasibility::Infeasible {
            cause: InfeasibilityCause::OffOriginR2R4,
        };
    }
    for (index, v) in [(1, f.f1), (2, f.f2), (4, f.f4)] {
        if v < 0.0 {
            return Feasibility::Infeasible {
                cause: InfeasibilityCause::OriginConstant { index },
            };
        }
    }
    let h1 = AnalyticH1::new(*f);
    let witness = h1.corner();
    if h1.contains(witness, 0.0) {
        Feasibility::Feasible { witness }
    } else {
        Feasibility::Infeasible {
            cause: InfeasibilityCause::OriginRefinementEmpty,
        }
    }
}

/// Pointwise decision for non-constant data: `H₀(x)` nonempty at every
/// sample `x ≠ 0`, plus the constant-data origin analysis at `f(0)`.
pub fn feasibility_pointwise<F>(f: F, samples: &[[f64; 2]]) -> Feasibility
where
    F: Fn(&[f64; 2]) -> ConstantData,
{
    for x in samples {
        if *x == [0.0, 0.0] {
            continue;
        }
        let v = f(x);
        if v.f1 + v.f3 < 0.0 {
            return Feasibility::Infeasible {
                cause: InfeasibilityCause::OffOriginR1R3,
            };
        }
        if v.f2 + v.f4 < 0.0 {
            return Feasibility::Infeasible {
                cause: InfeasibilityCause::OffOriginR2R4,
            };
        }
    }
    feasibility_constant(&f(&[0.0, 0.0]))
}

/// Axis-aligned parameter box in the `(f₂, f₄)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRange {
    pub f2: [f64; 2],
    pub f4: [f64; 2],
}

impl Default for ScanRange {
    fn default() -> Self {
        Self {
            f2: [1.0, 3.0],
            f4: [1.0, 3.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub rms: f64,
}

/// Fit of `f₄ - M = c / (f₂ - M)` (`c = M²` on the exact boundary).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolaFit {
    pub m: f64,
    pub c: f64,
    pub rms: f64,
    /// RMS distance to the curve with `c = M²`.
    pub analytic_rms: f64,
}

/// Deviation of boundary triples from a straight line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollinearityReport {
    pub min_span: f64,
    pub threshold: f64,
    pub triples_tested: usize,
    /// Triples whose middle point sits farther than `threshold` from the
    /// chord of the outer two.
    pub triples_noncollinear: usize,
    pub min_deviation: f64,
    pub max_deviation: f64,
    /// The most bent triple.
    pub best_triple: Option<[[f64; 2]; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScan {
    pub f1: f64,
    pub f3: f64,
    pub range: ScanRange,
    pub resolution: usize,
    /// Node `(i, j)` at `(f₂ᵢ, f₄ⱼ)` is stored at `i + j * resolution`.
    pub feasible: Vec<bool>,
    /// Midpoints of grid edges whose endpoints classify differently,
    /// sorted by `f₂` then `f₄`.
    pub boundary: Vec<[f64; 2]>,
    pub hyperbola_fit: Option<HyperbolaFit>,
    pub line_fit: Option<LineFit>,
    pub collinearity: CollinearityReport,
}

impl BoundaryScan {
    pub fn spacing(&self) -> [f64; 2] {
        let n = (self.resolution - 1) as f64;
        [
            (self.range.f2[1] - self.range.f2[0]) / n,
            (self.range.f4[1] - self.range.f4[0]) / n,
        ]
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let [h2, h4] = self.spacing();
        [
            self.range.f2[0] + i as f64 * h2,
            self.range.f4[0] + j as f64 * h4,
        ]
    }

    pub fn is_feasible(&self, i: usize, j: usize) -> bool {
        self.feasible[i + j * self.resolution]
    }
}

/// Minimum `f₂` span of a collinearity triple.
pub const COLLINEARITY_SPAN: f64 = 0.5;
const COLLINEARITY_MAX_POINTS: usize = 160;

/// Classifies an `(f₂, f₄)` grid by [`feasibility_constant`] with `f₁`, `f₃`
/// fixed and extracts the feasible/infeasible boundary.
pub fn boundary_scan(f1: f64, f3: f64, range: ScanRange, resolution: usize) -> Result<BoundaryScan> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!("resolution {resolution} < 16")));
    }
    if !(range.f2[0] < range.f2[1] && range.f4[0] < range.f4[1]) {
        return Err(Error::InvalidArgument(format!("empty scan range {range:?}")));
    }
    let n = resolution;
    let mut scan = BoundaryScan {
        f1,
        f3,
        range,
        resolution,
        feasible: Vec::new(),
        boundary: Vec::new(),
        hyperbola_fit: None,
        line_fit: None,
        collinearity: CollinearityReport {
            min_span: COLLINEARITY_SPAN,
            threshold: 0.0,
            triples_tested: 0,
            triples_noncollinear: 0,
            min_deviation: f64::INFINITY,
            max_deviation: 0.0,
            best_triple: None,
        },
    };
    scan.feasible = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let [f2, f4] = scan.node(k % n, k / n);
            feasibility_constant(&ConstantData::new(f1, f2, f3, f4)).is_feasible()
        })
        .collect();

    let mut boundary = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let here = scan.is_feasible(i, j);
            let p = scan.node(i, j);
            if i + 1 < n && scan.is_feasible(i + 1, j) != here {
                let q = scan.node(i + 1, j);
                boundary.push([0.5 * (p[0] + q[0]), p[1]]);
            }
            if j + 1 < n && scan.is_feasible(i, j + 1) != here {
                let q = scan.node(i, j + 1);
                boundary.push([p[0], 0.5 * (p[1] + q[1])]);
            }
        }
    }
    boundary.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    scan.boundary = boundary;
    scan.line_fit = fit_line(&scan.boundary);
    scan.hyperbola_fit = (f3 < 0.0)
        .then(|| fit_hyperbola(&scan.boundary, -f3))
        .flatten();
    let [h2, h4] = scan.spacing();
    scan.collinearity = collinearity(&scan.boundary, COLLINEARITY_SPAN, 3.0 * h2.max(h4));
    Ok(scan)
}

/// Ordinary least squares `f₄ = intercept + slope · f₂`.
pub fn fit_line(points: &[[f64; 2]]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p[0] - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| (p[1] - intercept - slope * p[0]).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(LineFit { intercept, slope, rms })
}

/// Least squares for `c` in `f₄ - M = c / (f₂ - M)` over points with `f₂ > M`.
pub fn fit_hyperbola(points: &[[f64; 2]], m: f64) -> Option<HyperbolaFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p[0] > m)
        .map(|p| (1.0 / (p[0] - m), p[1] - m))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let suu: f64 = pts.iter().map(|(u, _)| u * u).sum();
    let suv: f64 = pts.iter().map(|(u, v)| u * v).sum();
    let c = suv / suu;
    let n = pts.len() as f64;
    let rms_for = |c: f64| (pts.iter().map(|(u, v)| (v - c * u).powi(2)).sum::<f64>() / n).sqrt();
    Some(HyperbolaFit {
        m,
        c,
        rms: rms_for(c),
        analytic_rms: rms_for(m * m),
    })
}

/// Tests ordered triples `a < b < c` (by `f₂`) with `c₂ - a₂ >= min_span`:
/// deviation is the distance of `b` from the line through `a` and `c`.
/// Long point lists are thinned evenly to keep the sweep cubic but small.
pub fn collinearity(points: &[[f64; 2]], min_span: f64, threshold: f64) -> CollinearityReport {
    let pts: Vec<[f64; 2]> = if points.len() > COLLINEARITY_MAX_POINTS {
        let step = points.len() as f64 / COLLINEARITY_MAX_POINTS as f64;
        (0..COLLINEARITY_MAX_POINTS)
            .map(|k| points[(k as f64 * step) as usize])
            .collect()
    } else {
        points.to_vec()
    };
    let mut report = CollinearityReport {
        min_span,
        threshold,
        triples_tested: 0,
        triples_noncollinear: 0,
        min_deviation: f64::INFINITY,
        max_deviation: 0.0,
        best_triple: None,
    };
    let n = pts.len();
    for a in 0..n {
        for c in a + 2..n {
            if pts[c][0] - pts[a][0] < min_span {
                continue;
            }
            let (p, q) = (pts[a], pts[c]);
            let e = [q[0] - p[0], q[1] - p[1]];
            let len = e[0].hypot(e[1]);
            for b in a + 1..c {
                let r = pts[b];
                let dev = (e[0] * (r[1] - p[1]) - e[1] * (r[0] - p[0])).abs() / len;
                report.triples_tested += 1;
                if dev > threshold {
                    report.triples_noncollinear += 1;
                }
                report.min_deviation = report.min_deviation.min(dev);
                if dev > report.max_deviation {
                    report.max_deviation = dev;
                    report.best_triple = Some([p, r, q]);
                }
            }
        }
    }
    if report.triples_tested == 0 {
        report.min_deviation = 0.0;
    }
    report
}

/// Dense polynomial `a₀ + a₁ x + a₂ x² + …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a)
    }

    pub fn derivative_at_zero(&self) -> f64 {
        self.coeffs.get(1).copied().unwrap_or(0.0)
    }

    /// Lipschitz bound on `[-1, 1]`: `Σ k |a_k|`.
    pub fn lipschitz_unit(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| k as f64 * a.abs())
            .sum()
    }
}

/// The stated solvability criterion of the 1-D scenario: `f(0) = 0` and
/// `f'(0) >= 0`.
pub fn intro_1d_feasible(f0: f64, df0: f64) -> bool {
    f0 == 0.0 && df0 >= 0.0
}

fn paper_rows(x: &[f64; 2]) -> Vec<Row> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let c4 = x[0].powi(4) / (r2 * r2);
    let s4 = x[1].powi(4) / (r2 * r2);
    vec![
        Row::new([c4, s4], 0),
        Row::new([s4, -c4], 1),
        Row::new([-c4, -s4], 2),
        Row::new([-s4, c4], 3),
    ]
}

fn origin_override() -> SpecialPoint {
    SpecialPoint {
        location: [0.0, 0.0],
        rows: vec![
            Row::new([0.0, 0.0], 0),
            Row::new([0.0, 0.0], 1),
            Row::new([-ORIGIN_WEIGHT, 0.0], 2),
            Row::new([0.0, 0.0], 3),
        ],
    }
}

/// Planar system on `[0,1]²` with constant data.
pub fn build_paper_system(f: &ConstantData) -> ScenarioSystem {
    build_paper_system_with(DataField::Constant(f.as_array().to_vec()))
}

/// Planar system with arbitrary (e.g. affine) data.
pub fn build_paper_system_with(data: DataField) -> ScenarioSystem {
    ScenarioSystem {
        name: "paper-2d".into(),
        fiber_dim: FiberDim::Two,
        domain_dim: 2,
        n_constraints: 4,
        rows: Arc::new(paper_rows),
        data,
        special_points: vec![origin_override()],
    }
}

/// Default grid `[0,1]²` for the planar system (origin is node 0).
pub fn paper_grid(resolution: usize) -> Result<Grid> {
    Grid::new_2d([0.0, 0.0], [1.0, 1.0], resolution)
}

/// Rows of whichever case applies at `x`; both cases apply at the origin,
/// where every coefficient vanishes.
fn intro_rows(x: &[f64; 2]) -> Vec<Row> {
    let t = x[0];
    let mut rows = Vec::with_capacity(4);
    if t >= 0.0 {
        rows.push(Row::new([t * t, 0.0], 0));
        rows.push(Row::new([-t, 0.0], 1));
    }
    if t <= 0.0 {
        rows.push(Row::new([t, 0.0], 2));
        rows.push(Row::new([-t * t, 0.0], 3));
    }
    rows
}

/// 1-D system with data `(f, -f, f, -f)`; the origin is a special point
/// whose four rows vanish, leaving `f(0) = 0`.
pub fn build_intro_system(f: &Polynomial) -> ScenarioSystem {
    let p = f.clone();
    let eval = Arc::new(move |x: &[f64; 2]| {
        let v = p.eval(x[0]);
        vec![v, -v, v, -v]
    });
    ScenarioSystem {
        name: "intro-1d".into(),
        fiber_dim: FiberDim::One,
        domain_dim: 1,
        n_constraints: 4,
        rows: Arc::new(intro_rows),
        data: DataField::Field {
            eval,
            lipschitz: f.lipschitz_unit(),
        },
        special_points: vec![SpecialPoint {
            location: [0.0, 0.0],
            rows: intro_rows(&[0.0, 0.0]),
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{build_initial_bundle, NodeRows};
    use crate::convex2::{is_empty, BoundingBox};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn b_matrix_examples() {
        assert_eq!(b_matrix(0.0).unwrap(), Matrix2::new(1.0, 0.0, 0.0, -1.0));
        let b = b_matrix(FRAC_PI_4).unwrap();
        assert_relative_eq!(b, Matrix2::new(0.25, 0.25, 0.25, -0.25), epsilon = 1e-15);
        assert!(b_matrix(-0.1).is_err());
        assert!(b_matrix(2.0).is_err());
        let det = b.determinant();
        assert_relative_eq!(det, -(0.5f64.powi(4) * 2.0), epsilon = 1e-15);
    }

    #[test]
    fn b_inverse_norm_peaks_at_diagonal() {
        assert_relative_eq!(b_inverse_norm(0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(b_inverse_norm(FRAC_PI_4).unwrap(), 8f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn h0_examples() {
        let x = [0.3, 0.7];
        assert!(h0_nonempty(&ConstantData::new(3.0, 2.0, -1.0, 0.5), x));
        assert!(!h0_nonempty(&ConstantData::new(1.0, 1.0, -2.0, 0.0), x));
        assert!(h0_nonempty(&ConstantData::new(-9.0, -9.0, -9.0, -9.0), [0.0, 0.0]));
    }

    #[test]
    fn v_and_w_examples() {
        assert_eq!(v_value(5.0, 1.0, 1.3).unwrap(), 1.3);
        assert_eq!(v_value(2.0, 0.5, 1.0).unwrap(), 2.0);
        assert!(v_value(2.0, 0.0, 1.0).is_err());
        assert_eq!(w_value(2.0, 1.0).unwrap(), 2.0);
        assert_relative_eq!(w_value(101.0, 1.0).unwrap(), 1.01, epsilon = 1e-15);
        assert!(w_value(1.0, 1.0).is_err());
        for (m, y1) in [(0.3, 0.9), (2.0, 7.5), (1.0, 1.01)] {
            let a = 1.0 - m / y1;
            assert_relative_eq!(v_value(y1, a, m).unwrap(), w_value(y1, m).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn h1_examples() {
        let f = ConstantData::new(3.0, 2.0, -1.0, 2.0);
        assert!(h1_origin_contains([2.0, 2.0], &f, 0.0));
        assert!(!h1_origin_contains([1.5, 1.5], &f, 0.0));
        assert!(!h1_origin_contains([0.0, 0.0], &f, 0.0));
        // nonnegative f₃ uses the box branch
        let g = ConstantData::new(1.0, 1.0, 0.5, 1.0);
        assert!(h1_origin_contains([0.0, -0.5], &g, 0.0));
        assert!(!h1_origin_contains([0.0, -0.6], &g, 0.0));
    }

    #[test]
    fn feasibility_examples() {
        assert_eq!(
            feasibility_constant(&ConstantData::new(3.0, 2.0, -1.0, 2.0)),
            Feasibility::Feasible { witness: [2.0, 2.0] }
        );
        assert_eq!(
            feasibility_constant(&ConstantData::new(3.0, 1.5, -1.0, 1.5)),
            Feasibility::Infeasible {
                cause: InfeasibilityCause::OriginRefinementEmpty
            }
        );
        assert!(feasibility_constant(&ConstantData::new(0.0, 0.0, 0.0, 0.0)).is_feasible());
        assert_eq!(
            feasibility_constant(&ConstantData::new(1.0, 1.0, -2.0, 0.0)),
            Feasibility::Infeasible {
                cause: InfeasibilityCause::OffOriginR1R3
            }
        );
    }

    #[test]
    fn boundary_scan_examples() {
        let scan = boundary_scan(3.0, -1.0, ScanRange::default(), 33).unwrap();
        // (2,2) and (3,3) are nodes 16 and 32 on each axis
        assert!(scan.is_feasible(16, 16));
        assert!(scan.is_feasible(32, 32));
        assert!(!feasibility_constant(&ConstantData::new(3.0, 1.2, -1.0, 2.9)).is_feasible());
        assert!(!scan.boundary.is_empty());
        let fit = scan.hyperbola_fit.unwrap();
        assert!(fit.analytic_rms < 0.1);
        assert!(fit.rms < scan.line_fit.unwrap().rms);
        assert!(boundary_scan(3.0, -1.0, ScanRange::default(), 15).is_err());
    }

    #[test]
    fn collinear_points_have_zero_deviation() {
        let pts: Vec<[f64; 2]> = (0..20).map(|k| [k as f64 * 0.1, 1.0 - k as f64 * 0.05]).collect();
        let r = collinearity(&pts, 0.5, 1e-9);
        assert!(r.triples_tested > 0);
        assert_eq!(r.triples_noncollinear, 0);
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn polynomial_helpers() {
        let p = Polynomial::new(vec![0.0, 1.0, 1.0]);
        assert_eq!(p.eval(2.0), 6.0);
        assert_eq!(p.derivative_at_zero(), 1.0);
        assert_eq!(p.lipschitz_unit(), 3.0);
        assert_eq!(Polynomial::new(vec![]).eval(3.0), 0.0);
    }

    #[test]
    fn intro_criterion_examples() {
        assert!(intro_1d_feasible(0.0, 1.0));
        assert!(!intro_1d_feasible(0.0, -1.0));
        assert!(intro_1d_feasible(0.0, 0.0));
        assert!(!intro_1d_feasible(1.0, 0.0));
    }

    #[test]
    fn paper_rows_reduce_to_b_matrix() {
        let sys = build_paper_system(&ConstantData::new(3.0, 2.0, -1.0, 2.0));
        let rows = sys.rows_at(&[1.0, 0.0]);
        assert_eq!(rows[0].coeffs, [1.0, 0.0]);
        assert_eq!(rows[1].coeffs, [0.0, -1.0]);
        assert_eq!(rows[2].coeffs, [-1.0, 0.0]);
        assert_eq!(rows[3].coeffs, [0.0, 1.0]);
        let th = 0.4f64;
        for r in [0.1, 0.5, 0.9] {
            let near = sys.rows_at(&[r * th.cos(), r * th.sin()]);
            let far = sys.rows_at(&[th.cos(), th.sin()]);
            for (a, b) in near.iter().zip(&far) {
                assert_relative_eq!(a.coeffs[0], b.coeffs[0], epsilon = 1e-14);
                assert_relative_eq!(a.coeffs[1], b.coeffs[1], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn infeasible_data_empties_off_origin_fibers() {
        let sys = build_paper_system(&ConstantData::new(1.0, 1.0, -2.0, 0.0));
        let b = build_initial_bundle(&sys, &paper_grid(9).unwrap()).unwrap();
        let w = BoundingBox::square(20.0);
        for (i, k) in b.fibers().iter().enumerate() {
            assert_eq!(k.vertices(&w).is_empty(), i != 0, "node {i}");
        }
    }

    #[test]
    fn intro_origin_rows_vanish() {
        let sys = build_intro_system(&Polynomial::new(vec![0.0, 1.0]));
        assert!(sys.rows_at(&[0.0, 0.0]).iter().all(|r| r.coeffs == [0.0, 0.0]));
        let grid = Grid::new_1d(-1.0, 1.0, 9).unwrap();
        let b = build_initial_bundle(&sys, &grid).unwrap();
        assert!(b.is_special(4));
        assert!(matches!(b.node_rows().unwrap()[4], NodeRows::Special));
        assert!(!is_empty(&b.fibers()[4]));
        let one = build_intro_system(&Polynomial::new(vec![1.0]));
        let b = build_initial_bundle(&one, &grid).unwrap();
        assert!(is_empty(&b.fibers()[4]));
    }
}
