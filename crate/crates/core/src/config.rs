//! Experiment configuration read from a TOML file.
//!
//! ```toml
//! group = "Z"
//! rho = "1/2"
//! depth = 2
//! mode = "exact"
//! seed = 7
//!
//! [schedule]
//! seed_a = 1
//! seed_b = 2
//! growth = "3"
//! levels = 400
//!
//! [polyhedron]
//! dim = 1
//!
//! [nets]
//! delta1 = "1/2"
//!
//! [verify]
//! nesting_elements = 100
//! max_cells = 10000
//! samples = 100
//!
//! [output]
//! schedule = "schedule.toml"
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use num::{One, Signed};
use serde::Deserialize;

use crate::construction::{ConstructionParams, Mode};
use crate::group::GroupId;
use crate::polyhedron::{halving_schedule, Polyhedron};
use crate::schedule::{generate_schedule, parse_rational, Growth, TilingSchedule};
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_group")]
    group: String,
    #[serde(default = "default_rho")]
    rho: String,
    #[serde(default = "default_depth")]
    depth: usize,
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    schedule: RawSchedule,
    #[serde(default)]
    polyhedron: RawPolyhedron,
    #[serde(default)]
    nets: RawNets,
    #[serde(default)]
    verify: VerifySettings,
    #[serde(default)]
    output: OutputPaths,
}

fn default_group() -> String {
    "Z".into()
}
fn default_rho() -> String {
    "1/2".into()
}
fn default_depth() -> usize {
    2
}
fn default_mode() -> String {
    "exact".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    #[serde(default = "one")]
    seed_a: u64,
    #[serde(default = "two")]
    seed_b: u64,
    /// One pair per axis, overrides `seed_a`/`seed_b`.
    seeds: Option<Vec<(u64, u64)>>,
    #[serde(default = "default_growth")]
    growth: String,
    #[serde(default = "default_levels")]
    levels: usize,
    /// A schedule file written by `gen-tilings`, used instead of generating.
    file: Option<PathBuf>,
}

fn one() -> u64 {
    1
}
fn two() -> u64 {
    2
}
fn default_growth() -> String {
    "3".into()
}
fn default_levels() -> usize {
    400
}

impl Default for RawSchedule {
    fn default() -> Self {
        RawSchedule {
            seed_a: 1,
            seed_b: 2,
            seeds: None,
            growth: default_growth(),
            levels: default_levels(),
            file: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolyhedron {
    #[serde(default = "default_dim")]
    dim: usize,
}

fn default_dim() -> usize {
    1
}

impl Default for RawPolyhedron {
    fn default() -> Self {
        RawPolyhedron { dim: 1 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNets {
    #[serde(default = "default_delta")]
    delta1: String,
}

fn default_delta() -> String {
    "1/2".into()
}

impl Default for RawNets {
    fn default() -> Self {
        RawNets {
            delta1: default_delta(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    #[serde(default = "default_nesting")]
    pub nesting_elements: u64,
    #[serde(default = "default_cells")]
    pub max_cells: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_nesting() -> u64 {
    100
}
fn default_cells() -> u64 {
    10_000
}
fn default_samples() -> usize {
    100
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            nesting_elements: 100,
            max_cells: 10_000,
            samples: 100,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub schedule: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub group: GroupId,
    pub rho: Rational,
    pub depth: usize,
    pub mode: Mode,
    pub seed: u64,
    pub seeds: Vec<(u64, u64)>,
    pub growth: Growth,
    pub levels: usize,
    pub schedule_file: Option<PathBuf>,
    pub dim: usize,
    pub delta1: Rational,
    pub verify: VerifySettings,
    pub output: OutputPaths,
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Parse(format!("field `{name}`: {e}")))
}

impl ExperimentConfig {
    pub fn parse(src: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_raw(raw, None)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig =
            toml::from_str(&src).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_raw(raw, path.parent())
    }

    fn from_raw(raw: RawConfig, base: Option<&Path>) -> Result<Self> {
        let group = field("group", GroupId::from_str(&raw.group))?;
        let rho = field("rho", parse_rational(&raw.rho))?;
        if !(rho.is_positive() && rho < Rational::one()) {
            return Err(Error::Parse(format!(
                "field `rho` must lie strictly between 0 and 1, got {rho}"
            )));
        }
        if raw.depth == 0 {
            return Err(Error::Parse("field `depth` must be at least 1".into()));
        }
        let mode = field("mode", Mode::from_str(&raw.mode))?;
        let seeds = match raw.schedule.seeds {
            Some(s) => s,
            None => vec![(raw.schedule.seed_a, raw.schedule.seed_b); group.rank()],
        };
        if seeds.len() != group.rank() {
            return Err(Error::Parse(format!(
                "field `schedule.seeds` needs {} pairs for group {group}",
                group.rank()
            )));
        }
        let growth = field("schedule.growth", Growth::from_str(&raw.schedule.growth))?;
        if raw.schedule.levels == 0 {
            return Err(Error::Parse(
                "field `schedule.levels` must be at least 1".into(),
            ));
        }
        if raw.polyhedron.dim == 0 {
            return Err(Error::Parse(
                "field `polyhedron.dim` must be at least 1".into(),
            ));
        }
        let delta1 = field("nets.delta1", parse_rational(&raw.nets.delta1))?;
        if !delta1.is_positive() {
            return Err(Error::Parse(format!(
                "field `nets.delta1` must be positive, got {delta1}"
            )));
        }
        let rebase = |p: PathBuf| match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        };
        Ok(ExperimentConfig {
            group,
            rho,
            depth: raw.depth,
            mode,
            seed: raw.seed,
            seeds,
            growth,
            levels: raw.schedule.levels,
            schedule_file: raw.schedule.file.map(rebase),
            dim: raw.polyhedron.dim,
            delta1,
            verify: raw.verify,
            output: raw.output,
        })
    }

    /// The built-in toy experiment.
    pub fn toy() -> Self {
        Self::parse("").expect("defaults are valid")
    }

    pub fn schedule(&self) -> Result<TilingSchedule> {
        match &self.schedule_file {
            Some(p) => {
                let src = std::fs::read_to_string(p)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
                let s = TilingSchedule::from_toml(&src)?;
                if s.group() != self.group {
                    return Err(Error::Parse(format!(
                        "field `schedule.file`: schedule is over {}, config says {}",
                        s.group(),
                        self.group
                    )));
                }
                Ok(s)
            }
            None => generate_schedule(self.group, &self.seeds, &self.growth, self.levels),
        }
    }

    /// Construction parameters at `depth`, planning one spare net level.
    pub fn params_at(&self, depth: usize) -> Result<ConstructionParams> {
        let params = ConstructionParams {
            rho: self.rho.clone(),
            schedule: self.schedule()?,
            polyhedron: Polyhedron::cube(self.dim)?,
            nets: halving_schedule(self.dim, &self.delta1, depth + 1)?,
            depth,
            mode: self.mode,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn params(&self) -> Result<ConstructionParams> {
        self.params_at(self.depth)
    }
}
