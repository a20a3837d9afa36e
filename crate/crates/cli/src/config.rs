//! Scenario configuration (TOML, `schema_version = 1`).
//!
//! ```toml
//! schema_version = 1
//! scenario = "paper-2d"          # paper-2d | intro-1d | custom
//!
//! [data]                          # values of f, units of f
//! kind = "constant"               # constant | affine | poly
//! values = [3.0, 2.0, -1.0, 2.0]
//!
//! [grid]                          # domain box, units of x
//! min = [0.0, 0.0]
//! max = [1.0, 1.0]
//! resolution = 33                 # nodes per axis
//!
//! [refinement]
//! schedule = "ring"               # ring | fixed
//! ring_start = 8.0                # units of h
//! ring_floor = 1.0                # units of h
//! # fixed_radius = 0.1            # units of x
//! # kappa = 1.0                   # units of F per unit x; default 4 L + 1
//! max_iterations = 8
//! stabilization_tol = 1e-9        # units of F
//! # window = 32.0                 # fiber half-width, units of F
//!
//! [outputs]
//! dir = "out"
//! artifacts = ["report", "feasibility-grid", "selection-csv", "region-svg"]
//! ```
//!
//! `affine` data is `f_i(x) = base[i] + gradient[i] · x`; `poly` data is a
//! coefficient list `c0 + c1 x + ...` (intro-1d only). A `custom` scenario adds
//! a `[custom]` table with constant coefficient rows, one per data entry.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use glaeser::bundle::{DataField, Grid, Row, ScenarioSystem};
use glaeser::convex2::{BoundingBox, FiberDim};
use glaeser::counterexample::{build_intro_system, build_paper_system_with, ConstantData, Polynomial};
use glaeser::refine::{RadiusSchedule, RefinementConfig};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    #[serde(rename = "paper-2d")]
    Paper2d,
    #[serde(rename = "intro-1d")]
    Intro1d,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum DataSpec {
    Constant { values: Vec<f64> },
    Affine { base: Vec<f64>, gradient: Vec<[f64; 2]> },
    Poly { coeffs: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: Option<Vec<f64>>,
    pub max: Option<Vec<f64>>,
    pub resolution: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    #[default]
    Ring,
    Fixed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementSpec {
    #[serde(default)]
    pub schedule: ScheduleKind,
    pub ring_start: Option<f64>,
    pub ring_floor: Option<f64>,
    pub fixed_radius: Option<f64>,
    pub kappa: Option<f64>,
    pub max_iterations: Option<usize>,
    pub stabilization_tol: Option<f64>,
    pub window: Option<f64>,
    pub hausdorff_samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Artifact {
    FeasibilityGrid,
    RegionSvg,
    SelectionCsv,
    Report,
}

impl Artifact {
    pub fn file_name(self) -> &'static str {
        match self {
            Artifact::FeasibilityGrid => "feasibility_grid.csv",
            Artifact::RegionSvg => "regions.svg",
            Artifact::SelectionCsv => "selection.csv",
            Artifact::Report => "report.json",
        }
    }
}

fn default_artifacts() -> Vec<Artifact> {
    vec![Artifact::Report]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    #[serde(default = "default_artifacts")]
    pub artifacts: Vec<Artifact>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            artifacts: default_artifacts(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub fiber_dim: usize,
    /// One coefficient row per data entry; length `fiber_dim` each.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub scenario: ScenarioName,
    pub data: DataSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub refinement: RefinementSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    pub custom: Option<CustomSpec>,
}

/// Everything the pipeline needs, resolved from a config.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub system: ScenarioSystem,
    pub grid: Grid,
    pub refinement: RefinementConfig,
    /// Constant planar data, when the closed-form analysis applies.
    pub paper_constant: Option<ConstantData>,
    pub polynomial: Option<Polynomial>,
    pub out_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).context("config error")?;
    if cfg.schema_version != SCHEMA_VERSION {
        bail!(
            "config error: key `schema_version`: unsupported version {} (expected {SCHEMA_VERSION})",
            cfg.schema_version
        );
    }
    Ok(cfg)
}

fn finite(key: &str, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        bail!("config error: key `{key}`: entry {i} is not finite");
    }
    Ok(())
}

fn expect_len(key: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        bail!("config error: key `{key}`: expected {n} entries, got {}", v.len());
    }
    finite(key, v)
}

fn affine_field(base: Vec<f64>, gradient: Vec<[f64; 2]>) -> DataField {
    let lipschitz = gradient.iter().map(|g| g[0].hypot(g[1])).fold(0.0, f64::max);
    DataField::Field {
        eval: Arc::new(move |x: &[f64; 2]| {
            base.iter()
                .zip(&gradient)
                .map(|(b, g)| b + g[0] * x[0] + g[1] * x[1])
                .collect()
        }),
        lipschitz,
    }
}

fn data_field(data: &DataSpec, n: usize) -> Result<DataField> {
    match data {
        DataSpec::Constant { values } => {
            expect_len("data.values", values, n)?;
            Ok(DataField::Constant(values.clone()))
        }
        DataSpec::Affine { base, gradient } => {
            expect_len("data.base", base, n)?;
            if gradient.len() != n {
                bail!("config error: key `data.gradient`: expected {n} rows, got {}", gradient.len());
            }
            finite("data.gradient", &gradient.iter().flatten().copied().collect::<Vec<_>>())?;
            Ok(affine_field(base.clone(), gradient.clone()))
        }
        DataSpec::Poly { .. } => bail!("config error: key `data.kind`: `poly` data is only valid for intro-1d"),
    }
}

fn grid_from(spec: &GridSpec, dim: usize, default: (Vec<f64>, Vec<f64>, usize)) -> Result<Grid> {
    let min = spec.min.clone().unwrap_or(default.0);
    let max = spec.max.clone().unwrap_or(default.1);
    let res = spec.resolution.unwrap_or(default.2);
    expect_len("grid.min", &min, dim)?;
    expect_len("grid.max", &max, dim)?;
    let grid = if dim == 1 {
        Grid::new_1d(min[0], max[0], res)
    } else {
        Grid::new_2d([min[0], min[1]], [max[0], max[1]], res)
    };
    grid.map_err(|e| anyhow::anyhow!("config error: table `grid`: {e}"))
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("config error: key `{key}`: must be positive and finite, got {v}");
    }
    Ok(v)
}

impl ScenarioConfig {
    pub fn resolve(self, base_dir: &Path) -> Result<Scenario> {
        let mut paper_constant = None;
        let mut polynomial = None;
        let (system, grid) = match self.scenario {
            ScenarioName::Paper2d => {
                if self.custom.is_some() {
                    bail!("config error: table `custom` is only valid for scenario \"custom\"");
                }
                if let DataSpec::Constant { values } = &self.data {
                    expect_len("data.values", values, 4)?;
                    paper_constant = Some(ConstantData::new(values[0], values[1], values[2], values[3]));
                }
                let system = build_paper_system_with(data_field(&self.data, 4)?);
                let grid = grid_from(&self.grid, 2, (vec![0.0, 0.0], vec![1.0, 1.0], 33))?;
                if grid.find_node(&[0.0, 0.0]).is_none() {
                    bail!("config error: table `grid`: the origin must be a grid node");
                }
                (system, grid)
            }
            ScenarioName::Intro1d => {
                if self.custom.is_some() {
                    bail!("config error: table `custom` is only valid for scenario \"custom\"");
                }
                let coeffs = match &self.data {
                    DataSpec::Poly { coeffs } => coeffs.clone(),
                    DataSpec::Constant { values } => {
                        expect_len("data.values", values, 1)?;
                        values.clone()
                    }
                    DataSpec::Affine { .. } => {
                        bail!("config error: key `data.kind`: intro-1d takes `constant` or `poly` data")
                    }
                };
                if coeffs.is_empty() {
                    bail!("config error: key `data.coeffs`: at least one coefficient required");
                }
                finite("data.coeffs", &coeffs)?;
                let p = Polynomial::new(coeffs);
                let system = build_intro_system(&p);
                polynomial = Some(p);
                let grid = grid_from(&self.grid, 1, (vec![-1.0], vec![1.0], 257))?;
                if grid.find_node(&[0.0, 0.0]).is_none() {
                    bail!("config error: table `grid`: the origin must be a grid node");
                }
                (system, grid)
            }
            ScenarioName::Custom => {
                let Some(custom) = &self.custom else {
                    bail!("config error: scenario \"custom\" requires a `custom` table");
                };
                let fiber_dim = match custom.fiber_dim {
                    1 => FiberDim::One,
                    2 => FiberDim::Two,
                    d => bail!("config error: key `custom.fiber_dim`: must be 1 or 2, got {d}"),
                };
                let n = custom.rows.len();
                if n == 0 {
                    bail!("config error: key `custom.rows`: at least one row required");
                }
                let mut rows = Vec::with_capacity(n);
                for (i, r) in custom.rows.iter().enumerate() {
                    expect_len(&format!("custom.rows[{i}]"), r, custom.fiber_dim)?;
                    rows.push(Row::new([r[0], r.get(1).copied().unwrap_or(0.0)], i));
                }
                let domain_dim = self.grid.min.as_ref().map_or(2, Vec::len);
                if !(1..=2).contains(&domain_dim) {
                    bail!("config error: key `grid.min`: domain dimension must be 1 or 2");
                }
                let system = ScenarioSystem {
                    name: "custom".into(),
                    fiber_dim,
                    domain_dim,
                    n_constraints: n,
                    rows: Arc::new(move |_: &[f64; 2]| rows.clone()),
                    data: data_field(&self.data, n)?,
                    special_points: vec![],
                };
                let default = if domain_dim == 1 {
                    (vec![0.0], vec![1.0], 33)
                } else {
                    (vec![0.0, 0.0], vec![1.0, 1.0], 33)
                };
                let grid = grid_from(&self.grid, domain_dim, default)?;
                (system, grid)
            }
        };

        let r = &self.refinement;
        let window = match r.window {
            Some(w) => BoundingBox::square(positive("refinement.window", w)?),
            None => {
                let m = (0..grid.node_count())
                    .flat_map(|i| system.data.eval(&grid.node(i)))
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                BoundingBox::square(8.0 * (1.0 + m))
            }
        };
        let mut refinement = RefinementConfig::new(window, system.data.lipschitz());
        refinement.schedule = match r.schedule {
            ScheduleKind::Ring => {
                if r.fixed_radius.is_some() {
                    bail!("config error: key `refinement.fixed_radius`: only valid with schedule = \"fixed\"");
                }
                RadiusSchedule::Ring {
                    start: positive("refinement.ring_start", r.ring_start.unwrap_or(8.0))?,
                    floor: positive("refinement.ring_floor", r.ring_floor.unwrap_or(1.0))?,
                }
            }
            ScheduleKind::Fixed => {
                if r.ring_start.is_some() || r.ring_floor.is_some() {
                    bail!("config error: keys `refinement.ring_*`: only valid with schedule = \"ring\"");
                }
                let Some(radius) = r.fixed_radius else {
                    bail!("config error: key `refinement.fixed_radius`: required with schedule = \"fixed\"");
                };
                RadiusSchedule::Fixed(positive("refinement.fixed_radius", radius)?)
            }
        };
        if let Some(k) = r.kappa {
            refinement.kappa = positive("refinement.kappa", k)?;
        }
        if let Some(n) = r.max_iterations {
            refinement.max_iterations = n;
        }
        if let Some(t) = r.stabilization_tol {
            refinement.stabilization_tol = t;
        }
        if let Some(s) = r.hausdorff_samples {
            refinement.hausdorff_samples = s;
        }
        refinement
            .validate()
            .map_err(|e| anyhow::anyhow!("config error: table `refinement`: {e}"))?;

        let out_dir = match &self.outputs.dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => base_dir.join(d),
            None => base_dir.join("out"),
        };
        Ok(Scenario {
            config: self,
            system,
            grid,
            refinement,
            paper_constant,
            polynomial,
            out_dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER: &str = r#"
schema_version = 1
scenario = "paper-2d"
[data]
kind = "constant"
values = [3.0, 2.0, -1.0, 2.0]
"#;

    #[test]
    fn minimal_paper_config_resolves() {
        let s = parse(PAPER).unwrap().resolve(Path::new("/tmp")).unwrap();
        assert_eq!(s.grid.resolution(), 33);
        assert_eq!(s.paper_constant, Some(ConstantData::new(3.0, 2.0, -1.0, 2.0)));
        assert_eq!(s.refinement.window, BoundingBox::square(32.0));
        assert_eq!(s.config.outputs.artifacts, vec![Artifact::Report]);
        assert_eq!(s.out_dir, Path::new("/tmp/out"));
    }

    #[test]
    fn unknown_key_is_rejected_with_its_name() {
        let err = parse(&format!("{PAPER}colour = 3\n")).unwrap_err();
        assert!(format!("{err:#}").contains("colour"), "{err:#}");
        let err = parse(&PAPER.replace("kind = \"constant\"", "kind = \"constant\"\nextra = 1")).unwrap_err();
        assert!(format!("{err:#}").contains("extra"), "{err:#}");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let err = parse(&PAPER.replace("schema_version = 1", "schema_version = 2")).unwrap_err();
        assert!(format!("{err:#}").contains("schema_version"));
    }

    #[test]
    fn data_length_is_checked() {
        let cfg = parse(&PAPER.replace("[3.0, 2.0, -1.0, 2.0]", "[3.0, 2.0]")).unwrap();
        let err = cfg.resolve(Path::new(".")).err().unwrap();
        assert!(format!("{err:#}").contains("data.values"));
    }

    #[test]
    fn paper_grid_without_origin_is_rejected() {
        let text = format!("{PAPER}[grid]\nmin = [0.1, 0.0]\n");
        assert!(parse(&text).unwrap().resolve(Path::new(".")).is_err());
    }

    #[test]
    fn affine_data_sets_the_lipschitz_bound() {
        let text = r#"
schema_version = 1
scenario = "paper-2d"
[data]
kind = "affine"
base = [3.0, 2.0, -1.0, 2.0]
gradient = [[3.0, 4.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]]
"#;
        let s = parse(text).unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(s.system.data.lipschitz(), 5.0);
        assert_eq!(s.refinement.kappa, 21.0);
        assert_eq!(s.system.data.eval(&[1.0, 1.0]), vec![10.0, 2.0, 0.0, 2.0]);
        assert!(s.paper_constant.is_none());
    }

    #[test]
    fn intro_takes_polynomials() {
        let text = r#"
schema_version = 1
scenario = "intro-1d"
[data]
kind = "poly"
coeffs = [0.0, 1.0]
[grid]
resolution = 65
"#;
        let s = parse(text).unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(s.grid.dim(), 1);
        assert_eq!(s.polynomial.unwrap().eval(0.5), 0.5);
    }

    #[test]
    fn custom_rows_follow_fiber_dim() {
        let text = r#"
schema_version = 1
scenario = "custom"
[data]
kind = "constant"
values = [1.0, 1.0]
[custom]
fiber_dim = 1
rows = [[1.0], [-1.0]]
"#;
        let s = parse(text).unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(s.system.n_constraints, 2);
        let bad = text.replace("[[1.0], [-1.0]]", "[[1.0, 0.0], [-1.0]]");
        assert!(parse(&bad).unwrap().resolve(Path::new(".")).is_err());
    }

    #[test]
    fn fixed_schedule_needs_a_radius() {
        let text = format!("{PAPER}[refinement]\nschedule = \"fixed\"\n");
        assert!(parse(&text).unwrap().resolve(Path::new(".")).is_err());
        let text = format!("{PAPER}[refinement]\nschedule = \"fixed\"\nfixed_radius = 0.1\n");
        let s = parse(&text).unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(s.refinement.schedule, RadiusSchedule::Fixed(0.1));
    }
}
