//! TOML experiment configuration.
//!
//! ```toml
//! operation = "phaseshift"
//! seed = 7
//!
//! [potential]
//! family = "exponential"
//! strength = 1.0
//! range = 1.0
//!
//! [grid]
//! r_max = 40.0
//! n = 4000
//!
//! [kgrid]
//! k_min = 0.25
//! k_max = 12.5
//! n = 50
//! ```
//!
//! Every section is optional; missing ones take the defaults below.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use halfline::grid::{KGrid, RadialGrid, DEFAULT_GRADING};
use halfline::potential::{make_potential, Family, Potential};
use halfline::transforms::StieltjesMeasure;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Solve,
    Kernel,
    Transform,
    Bochner,
    Phaseshift,
    Verify,
}

impl Operation {
    /// Operations that draw random numbers and therefore need a seed.
    pub fn is_random(self) -> bool {
        matches!(self, Operation::Bochner | Operation::Verify)
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Operation::Solve => "solve",
            Operation::Kernel => "kernel",
            Operation::Transform => "transform",
            Operation::Bochner => "bochner",
            Operation::Phaseshift => "phaseshift",
            Operation::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub operation: Option<Operation>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub kgrid: KGridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub transform: TransformSpec,
    #[serde(default)]
    pub bochner: BochnerSpec,
    #[serde(default)]
    pub phaseshift: PhaseShiftSpec,
}

/// `family` plus the family's named parameters; `tabulated` reads `r,v`
/// columns from `file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: Family,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        let params = BTreeMap::from([("strength".to_string(), 1.0), ("range".to_string(), 1.0)]);
        Self { family: Family::Exponential, file: None, params }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    Graded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    /// Number of intervals.
    pub n: usize,
    #[serde(default = "uniform")]
    pub kind: GridKind,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn uniform() -> GridKind {
    GridKind::Uniform
}

fn default_ratio() -> f64 {
    DEFAULT_GRADING
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_max: 30.0, n: 3000, kind: GridKind::Uniform, ratio: DEFAULT_GRADING }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGridSpec {
    pub k_min: f64,
    pub k_max: f64,
    /// Number of nodes.
    pub n: usize,
}

impl Default for KGridSpec {
    fn default() -> Self {
        Self { k_min: 0.25, k_max: 12.5, n: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Step-doubling bound of the ODE solver.
    pub ode: f64,
    /// Sup-norm update at which the kernel iteration stops.
    pub kernel: f64,
    /// Gram eigenvalue tolerance relative to the trace.
    pub gram: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode: 1e-6, kernel: 1e-13, gram: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceShape {
    /// `e^{-t}`
    Exponential,
    /// `(1 + t)^{-4}`
    Power,
    /// `exp(-1/(1 - (t-2)²))` on `|t - 2| < 1`
    Bump,
}

impl SourceShape {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            SourceShape::Exponential => (-t).exp(),
            SourceShape::Power => (1.0 + t).powi(-4),
            SourceShape::Bump => {
                let x = t - 2.0;
                if x.abs() < 1.0 {
                    (-1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    /// Source term `g` of the construction `f'' - V f = g`.
    pub g: SourceShape,
    /// Optional measure file; when set its Stieltjes transform is written too.
    #[serde(default)]
    pub measure: Option<PathBuf>,
}

impl Default for TransformSpec {
    fn default() -> Self {
        Self { g: SourceShape::Exponential, measure: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BochnerSpec {
    pub s: usize,
    pub trials: usize,
    pub k_max: f64,
    /// Measure file; the default is the density `e^{-r}` on the grid.
    #[serde(default)]
    pub measure: Option<PathBuf>,
}

impl Default for BochnerSpec {
    fn default() -> Self {
        Self { s: 8, trials: 50, k_max: 10.0, measure: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseShiftSpec {
    pub t_step: f64,
    pub t_nodes: usize,
}

impl Default for PhaseShiftSpec {
    fn default() -> Self {
        Self { t_step: 0.25, t_nodes: 100 }
    }
}


/// Raised for anything wrong with the configuration itself (exit status 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything that can be checked without computing; `op` is the
    /// operation about to run.
    pub fn validate(&self, op: Operation) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        for (name, v) in [("ode", t.ode), ("kernel", t.kernel), ("gram", t.gram)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("tolerances.{name} must be > 0, got {v}")));
            }
        }
        if op.is_random() && self.seed.is_none() {
            return Err(bad(format!("`{op}` samples random points and needs a seed (config `seed` or --seed)")));
        }
        if self.phaseshift.t_nodes < 2 || !(self.phaseshift.t_step > 0.0) {
            return Err(bad("phaseshift needs t_nodes >= 2 and t_step > 0"));
        }
        if self.bochner.s < 2 || self.bochner.trials == 0 || !(self.bochner.k_max > 0.0) {
            return Err(bad("bochner needs s >= 2, trials >= 1 and k_max > 0"));
        }
        self.radial_grid()?;
        self.k_grid()?;
        self.potential()?;
        Ok(())
    }

    pub fn radial_grid(&self) -> Result<RadialGrid, ConfigError> {
        let g = &self.grid;
        let grid = match g.kind {
            GridKind::Uniform => RadialGrid::uniform(g.r_max, g.n),
            GridKind::Graded => RadialGrid::graded(g.r_max, g.n, g.ratio),
        };
        grid.map_err(|e| bad(format!("grid: {e}")))
    }

    pub fn k_grid(&self) -> Result<KGrid, ConfigError> {
        let k = &self.kgrid;
        if k.n < 3 {
            return Err(bad("kgrid.n must be at least 3"));
        }
        KGrid::uniform(k.k_min, k.k_max, k.n - 1).map_err(|e| bad(format!("kgrid: {e}")))
    }

    pub fn potential(&self) -> Result<Potential, ConfigError> {
        let p = &self.potential;
        if p.family == Family::Tabulated {
            let path = p.file.as_ref().ok_or_else(|| bad("tabulated potential needs `file`"))?;
            let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
            let table = halfline::io::read_csv(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
            if table.header.len() < 2 {
                return Err(bad("tabulated potential needs columns r,v"));
            }
            return Potential::tabulated(table.column(0), table.column(1)).map_err(|e| bad(e.to_string()));
        }
        make_potential(p.family, &p.params).map_err(|e| bad(format!("potential: {e}")))
    }

    pub fn measure(path: &Path) -> Result<StieltjesMeasure, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        StieltjesMeasure::from_text(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert!(c.validate(Operation::Solve).is_ok());
    }

    #[test]
    fn parses_sections() {
        let c = ExperimentConfig::from_toml(
            "operation = \"kernel\"\nseed = 3\n[potential]\nfamily = \"square_barrier\"\nheight = 2.0\nwidth = 0.5\n[grid]\nr_max = 5.0\nn = 50\n",
        )
        .unwrap();
        assert_eq!(c.operation, Some(Operation::Kernel));
        assert_eq!(c.potential.family, Family::SquareBarrier);
        assert_eq!(c.potential.params["height"], 2.0);
        assert_eq!(c.radial_grid().unwrap().len(), 51);
        assert_eq!(c.potential().unwrap().breakpoints(), vec![0.5]);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("[grid]\nr_max = 1.0").is_err());
        let c = ExperimentConfig::from_toml("[tolerances]\node = 0.0\nkernel = 1e-12\ngram = 1e-8").unwrap();
        assert!(c.validate(Operation::Solve).is_err());
        let c = ExperimentConfig::default();
        assert!(c.validate(Operation::Bochner).is_err());
        let c = ExperimentConfig { seed: Some(1), ..ExperimentConfig::default() };
        assert!(c.validate(Operation::Bochner).is_ok());
        let c = ExperimentConfig::from_toml("[potential]\nfamily = \"exponential\"\nstrength = 1.0").unwrap();
        assert!(c.validate(Operation::Solve).is_err());
    }
}
