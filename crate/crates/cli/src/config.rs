//! TOML experiment configurations. Each experiment has its own schema; keys
//! not in the schema are rejected.

use std::f64::consts::PI;
use std::fmt;

use clap::ValueEnum;
use qnpu_core::grid::{build_grid, GridSpec, PotentialSpec};
use qnpu_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ScanCost,
    SolveGpe,
    FitFidelity,
    MpsCompile,
    SamplingAnalysis,
    BurgersEvolve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ScanCost => "scan-cost",
            Experiment::SolveGpe => "solve-gpe",
            Experiment::FitFidelity => "fit-fidelity",
            Experiment::MpsCompile => "mps-compile",
            Experiment::SamplingAnalysis => "sampling-analysis",
            Experiment::BurgersEvolve => "burgers-evolve",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// 1-based line and column of a byte offset.
pub fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let start = before.rfind('\n').map_or(0, |i| i + 1);
    (line, before[start..].chars().count() + 1)
}

/// Parses `text` as `T`, turning syntax and schema errors into
/// `Error::Config` with a location.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        Error::Config {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })
}

fn default_b() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        build_grid(self.n, self.a, self.b)
    }
}

/// A single interaction strength or a list of them.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Couplings {
    One(f64),
    Many(Vec<f64>),
}

impl Couplings {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Couplings::One(g) => vec![*g],
            Couplings::Many(gs) => gs.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnsatzConfig {
    SingleParam,
    Brickwall { d: usize },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_end")]
    pub end: f64,
}

fn default_step() -> f64 {
    0.1
}

fn default_end() -> f64 {
    4.0 * PI
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            step: default_step(),
            end: default_end(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanCostConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub grid: GridConfig,
    pub potential: PotentialSpec,
    pub g: Couplings,
    /// Sampled instead of exact costs when set.
    pub shots: Option<usize>,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeSection {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
    #[serde(default)]
    pub restarts: usize,
}

fn default_budget() -> usize {
    200_000
}

fn default_scan_points() -> usize {
    16
}

impl Default for MinimizeSection {
    fn default() -> Self {
        Self {
            budget: default_budget(),
            scan_points: default_scan_points(),
            restarts: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolveGpeConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub grid: GridConfig,
    pub potential: PotentialSpec,
    pub g: Couplings,
    pub ansatz: Option<AnsatzConfig>,
    #[serde(default)]
    pub minimize: MinimizeSection,
}

fn default_ratio() -> f64 {
    2.0
}

fn default_fit_sweeps() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Lattice wavenumbers in units of `2 pi`.
    pub kappa_indices: Vec<f64>,
    /// `s1 / s2`.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    /// Lattice depth; defaults to `5000 (index / 16)^2`.
    pub s1: Option<f64>,
    pub depths: Vec<usize>,
    #[serde(default)]
    pub chis: Vec<usize>,
    #[serde(default = "default_fit_sweeps")]
    pub sweeps: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FitFidelityConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub grid: GridConfig,
    pub g: Couplings,
    pub fit: FitSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MpsSection {
    pub n: Vec<usize>,
    pub chi: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    10
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MpsCompileConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub mps: MpsSection,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub shots: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Qubit range scanned for the minimal grid size.
    pub nmin_range: Option<[u32; 2]>,
}

fn default_repeats() -> usize {
    500
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingAnalysisConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub grid: GridConfig,
    pub potential: PotentialSpec,
    pub g: Couplings,
    pub sampling: SamplingSection,
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_mode() -> u32 {
    1
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `amplitude sin(2 pi mode (x - a) / L) + offset`.
    Sine {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_mode")]
        mode: u32,
        #[serde(default)]
        offset: f64,
    },
    Values { values: Vec<f64> },
}

impl InitialCondition {
    pub fn values(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        match self {
            InitialCondition::Sine { amplitude, mode, offset } => Ok(grid
                .xs()
                .iter()
                .map(|x| amplitude * (2.0 * PI * *mode as f64 * (x - grid.a) / grid.length()).sin() + offset)
                .collect()),
            InitialCondition::Values { values } => {
                if values.len() != grid.points() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.points(),
                        actual: values.len(),
                    });
                }
                Ok(values.clone())
            }
        }
    }
}

fn default_burgers_sweeps() -> usize {
    400
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersSection {
    pub nu: f64,
    pub tau: f64,
    pub steps: usize,
    pub initial: InitialCondition,
    #[serde(default = "default_burgers_sweeps")]
    pub sweeps: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersEvolveConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub grid: GridConfig,
    /// Brick-wall template; the full staircase when absent.
    pub ansatz: Option<AnsatzConfig>,
    pub burgers: BurgersSection,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locations_are_one_based() {
        let text = "a = 1\nbb = 2\n";
        assert_eq!(line_column(text, 0), (1, 1));
        assert_eq!(line_column(text, 6), (2, 1));
        assert_eq!(line_column(text, 9), (2, 4));
    }

    #[test]
    fn unknown_key_is_located() {
        let text = "g = 1.0\npotential = { kind = \"harmonic\", center = 0.5, strength = 1.0 }\n[grid]\nn = 2\nbogus = 3\n";
        match parse::<ScanCostConfig>(text) {
            Err(Error::Config { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_key_is_named() {
        let text = "[grid]\nn = 2\n[potential]\nkind = \"harmonic\"\ncenter = 0.5\nstrength = 2000.0\n";
        match parse::<ScanCostConfig>(text) {
            Err(Error::Config { message, .. }) => assert!(message.contains("`g`"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn couplings_accept_scalar_and_list() {
        let base = "[grid]\nn = 2\n[potential]\nkind = \"harmonic\"\ncenter = 0.5\nstrength = 2000.0\n";
        let one: ScanCostConfig = parse(&format!("g = 10.0\n{base}")).unwrap();
        assert_eq!(one.g.values(), vec![10.0]);
        let many: ScanCostConfig = parse(&format!("g = [10.0, 1e4]\n{base}")).unwrap();
        assert_eq!(many.g.values(), vec![10.0, 1e4]);
        assert_eq!(many.scan.step, 0.1);
    }

    #[test]
    fn sine_initial_condition() {
        let grid = build_grid(3, 0.0, 2.0).unwrap();
        let f = InitialCondition::Sine {
            amplitude: 2.0,
            mode: 1,
            offset: 0.5,
        }
        .values(&grid)
        .unwrap();
        assert!((f[2] - 2.5).abs() < 1e-12);
        assert!((f[6] + 1.5).abs() < 1e-12);
    }
}
