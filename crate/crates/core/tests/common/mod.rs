#![allow(dead_code)]

use glaeser::bundle::{build_initial_bundle, Bundle};
use glaeser::convex2::BoundingBox;
use glaeser::counterexample::{build_paper_system, feasibility_constant, paper_grid, AnalyticH1, ConstantData};
use glaeser::refine::{refine_to_stable, RefinementConfig, RefinementReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform constant data in `[-5, 5]⁴`, with `f₃ < -0.1` and rejection until
/// the analytic verdict is feasible.
pub fn random_feasible(rng: &mut ChaCha8Rng) -> ConstantData {
    loop {
        let f = ConstantData::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..-0.1),
            rng.gen_range(-5.0..5.0),
        );
        if feasibility_constant(&f).is_feasible() {
            return f;
        }
    }
}

pub fn default_window(f: &ConstantData) -> BoundingBox {
    let m = f.as_array().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    BoundingBox::square(8.0 * (1.0 + m))
}

pub fn stable_paper(f: &ConstantData, res: usize, window: BoundingBox) -> (Bundle, RefinementConfig, RefinementReport) {
    let sys = build_paper_system(f);
    let b = build_initial_bundle(&sys, &paper_grid(res).unwrap()).unwrap();
    let mut cfg = RefinementConfig::new(window, 0.0);
    cfg.window = window;
    let (out, report) = refine_to_stable(&b, &cfg).unwrap();
    (out, cfg, report)
}

/// Points of analytic H₁(0) for `f₃ < 0`: the part of the box
/// `[.., c₁] × [.., c₂]` (corner `c`) above the hyperbola branch, sampled on
/// its boundary (`n` per edge) and inside (`inner × inner`). Empty when H₁(0) is.
pub fn h1_samples(f: &ConstantData, n: usize, inner: usize) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let h1 = AnalyticH1::new(*f);
    let m = -f.f3;
    assert!(m > 0.0);
    let [c1, c2] = h1.corner();
    if !h1.contains([c1, c2], 0.0) {
        return (vec![], vec![]);
    }
    let w = |y1: f64| m + m * m / (y1 - m);
    // leftmost y₁ where the branch meets the top edge
    let y1_min = if c2 > m { (m + m * m / (c2 - m)).min(c1) } else { c1 };
    let mut boundary = Vec::new();
    for k in 0..=n {
        let t = k as f64 / n as f64;
        let y1 = y1_min + (c1 - y1_min) * t;
        boundary.push([y1, w(y1).min(c2)]);
        boundary.push([y1, c2]);
        let y2 = w(c1).min(c2) + (c2 - w(c1).min(c2)) * t;
        boundary.push([c1, y2]);
    }
    let mut interior = Vec::new();
    for i in 0..inner {
        for j in 0..inner {
            let y1 = y1_min + (c1 - y1_min) * (i as f64 + 0.5) / inner as f64;
            let lo = w(y1).min(c2);
            interior.push([y1, lo + (c2 - lo) * (j as f64 + 0.5) / inner as f64]);
        }
    }
    (boundary, interior)
}

/// Distance from `p` to analytic H₁(0) using a dense boundary sampling.
pub fn distance_to_h1(f: &ConstantData, p: [f64; 2], dense_boundary: &[[f64; 2]]) -> f64 {
    if AnalyticH1::new(*f).contains(p, 0.0) {
        return 0.0;
    }
    dense_boundary
        .iter()
        .map(|q| (q[0] - p[0]).hypot(q[1] - p[1]))
        .fold(f64::INFINITY, f64::min)
}
