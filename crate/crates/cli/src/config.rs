//! Run configuration: TOML schema and kernel construction.
//!
//! Numeric parameters are strings so that rational mode parses them
//! exactly (`"0.3"` is 3/10, `"1/3"` a true third). Unknown fields are
//! rejected everywhere.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use papangelou::kernel::Kernel;
use papangelou::kernels::{
    InteractionKernel, LocalReinforcementKernel, PairDensity, PoissonKernel,
    PolyaDifferenceKernel, PolyaSumKernel, Reinforcement, DEFAULT_MASS_BOUND,
};
use papangelou::measure::Measure;
use papangelou::scalar::Scalar;
use papangelou::space::{SiteMap, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Rational,
    Float,
}

impl Default for Arithmetic {
    fn default() -> Self {
        Arithmetic::Rational
    }
}

impl Arithmetic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arithmetic::Rational => "rational",
            Arithmetic::Float => "float",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceSpec,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default)]
    pub truncation: TruncationSpec,
    #[serde(default = "default_probe_mass")]
    pub probe_mass: u32,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_map_budget")]
    pub map_budget: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_probe_mass() -> u32 {
    4
}

fn default_replicas() -> usize {
    1
}

fn default_map_budget() -> usize {
    64
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid run configuration")?;
        Ok(cfg)
    }

    pub fn space(&self) -> Result<Space> {
        Space::new(self.space.sites.clone()).map_err(|e| anyhow!(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub sites: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    pub max_mass: u32,
    pub tol: String,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        TruncationSpec {
            max_mass: 12,
            tol: "1e-10".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_path")]
    pub path: String,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_out_path() -> String {
    "out".to_string()
}

fn default_format() -> OutputFormat {
    OutputFormat::Json
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            path: default_out_path(),
            format: default_format(),
        }
    }
}

// ---------------------------------------------------------------------------
// Kernel specification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub name: String,
    #[serde(default)]
    pub z: Option<String>,
    #[serde(default)]
    pub rho: Option<Vec<String>>,
    /// Per-site reinforcement increment tables, keyed by site label.
    #[serde(default)]
    pub c: Option<BTreeMap<String, Vec<String>>>,
    /// Per-site constant increments, keyed by site label.
    #[serde(default)]
    pub c_constant: Option<BTreeMap<String, String>>,
    /// Pair density matrix in site order.
    #[serde(default)]
    pub f: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub mass_bound: Option<u32>,
}

fn parse_values<T: Scalar>(values: &[String]) -> Result<Vec<T>> {
    values
        .iter()
        .map(|s| T::parse(s).map_err(|e| anyhow!(e.to_string())))
        .collect()
}

impl KernelSpec {
    fn rho<T: Scalar>(&self, space: &Space) -> Result<Measure<T>> {
        let rho = self
            .rho
            .as_ref()
            .ok_or_else(|| anyhow!("kernel `{}` needs a `rho` vector", self.name))?;
        if rho.len() != space.len() {
            bail!(
                "`rho` has {} entries but the space has {} sites",
                rho.len(),
                space.len()
            );
        }
        Measure::new(parse_values(rho)?).map_err(|e| anyhow!(e.to_string()))
    }

    fn z<T: Scalar>(&self) -> Result<T> {
        let z = self
            .z
            .as_ref()
            .ok_or_else(|| anyhow!("kernel `{}` needs a `z` parameter", self.name))?;
        T::parse(z).map_err(|e| anyhow!(e.to_string()))
    }

    fn reinforcement<T: Scalar>(&self, space: &Space) -> Result<Reinforcement<T>> {
        if self.c.is_some() && self.c_constant.is_some() {
            bail!("give either `c` or `c_constant`, not both");
        }
        if let Some(constants) = &self.c_constant {
            for label in constants.keys() {
                space.index_of(label).map_err(|e| anyhow!(e.to_string()))?;
            }
            let values: Result<Vec<T>> = space
                .site_names()
                .iter()
                .map(|label| match constants.get(label) {
                    Some(s) => T::parse(s).map_err(|e| anyhow!(e.to_string())),
                    None => Ok(T::zero()),
                })
                .collect();
            return Ok(Reinforcement::PerSiteConstant(values?));
        }
        if let Some(tables) = &self.c {
            for label in tables.keys() {
                space.index_of(label).map_err(|e| anyhow!(e.to_string()))?;
            }
            let rows: Result<Vec<Vec<T>>> = space
                .site_names()
                .iter()
                .map(|label| match tables.get(label) {
                    Some(row) => parse_values(row),
                    None => Ok(Vec::new()),
                })
                .collect();
            return Ok(Reinforcement::Table(rows?));
        }
        Ok(Reinforcement::None)
    }

    pub fn pair_density<T: Scalar>(&self, space: &Space) -> Result<PairDensity<T>> {
        let f = self
            .f
            .as_ref()
            .ok_or_else(|| anyhow!("kernel `{}` needs a pair density matrix `f`", self.name))?;
        if f.len() != space.len() || f.iter().any(|row| row.len() != space.len()) {
            bail!("`f` must be a {0}x{0} matrix in site order", space.len());
        }
        let rows: Result<Vec<Vec<T>>> = f.iter().map(|row| parse_values(row)).collect();
        PairDensity::new(rows?).map_err(|e| anyhow!(e.to_string()))
    }

    /// Build the kernel for one arithmetic mode.
    pub fn build<T: Scalar>(&self, space: &Space) -> Result<Box<dyn Kernel<T>>> {
        let mass_bound = self.mass_bound.unwrap_or(DEFAULT_MASS_BOUND);
        let kernel: Box<dyn Kernel<T>> = match self.name.as_str() {
            "poisson" => Box::new(
                PoissonKernel::new(space.clone(), self.rho(space)?)
                    .map_err(|e| anyhow!(e.to_string()))?,
            ),
            "polya_sum" => Box::new(
                PolyaSumKernel::new(space.clone(), self.z()?, self.rho(space)?)
                    .map_err(|e| anyhow!(e.to_string()))?,
            ),
            "polya_difference" => Box::new(
                PolyaDifferenceKernel::new(space.clone(), self.z()?, self.rho(space)?)
                    .map_err(|e| anyhow!(e.to_string()))?,
            ),
            "local_reinforcement" => Box::new(
                LocalReinforcementKernel::new(
                    space.clone(),
                    self.rho(space)?,
                    self.reinforcement(space)?,
                    mass_bound,
                )
                .map_err(|e| anyhow!(e.to_string()))?,
            ),
            "interaction" => Box::new(
                InteractionKernel::new(
                    space.clone(),
                    self.rho(space)?,
                    self.pair_density(space)?,
                    self.reinforcement(space)?,
                    mass_bound,
                )
                .map_err(|e| anyhow!(e.to_string()))?,
            ),
            other => bail!(
                "unknown kernel `{other}` (available: poisson, polya_sum, polya_difference, \
                 local_reinforcement, interaction)"
            ),
        };
        Ok(kernel)
    }
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskSpec {
    Check(CheckSpec),
    Sample(SampleSpec),
    Gnz(GnzSpec),
    Extract(ExtractSpec),
    Transform(TransformSpec),
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Check(_) => "check",
            TaskSpec::Sample(_) => "sample",
            TaskSpec::Gnz(_) => "gnz",
            TaskSpec::Extract(_) => "extract",
            TaskSpec::Transform(_) => "transform",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CheckSpec {
    /// Plain property name: `check = "A1"`.
    Property(String),
    /// Dynkin check for an explicit merge:
    /// `check = { property = "D", merge = [["a","b"],["c"]] }`.
    WithMap {
        property: String,
        merge: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub method: String,
    pub n: usize,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub thin: Option<usize>,
    /// Dump the batch to CSV regardless of the report format.
    #[serde(default)]
    pub dump: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnzSpec {
    pub method: String,
    pub n: usize,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub thin: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractSpec {
    /// `local`, `interaction`, `vanishing_diagonal` or `classify`.
    pub regime: String,
    #[serde(default)]
    pub max_n: Option<u32>,
    /// Diagonal of `f` for the positive-diagonal interaction regime.
    #[serde(default)]
    pub f_diagonal: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub merge: Vec<Vec<String>>,
    pub method: String,
    pub n: usize,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub thin: Option<usize>,
}

/// Resolve a merge given by site labels into a site map.
pub fn merge_map(space: &Space, blocks: &[Vec<String>]) -> Result<SiteMap> {
    let mut index_blocks = Vec::with_capacity(blocks.len());
    for block in blocks {
        let indices: Result<Vec<usize>> = block
            .iter()
            .map(|label| space.index_of(label).map_err(|e| anyhow!(e.to_string())))
            .collect();
        index_blocks.push(indices?);
    }
    SiteMap::merge_blocks(space, &index_blocks).map_err(|e| anyhow!(e.to_string()))
}
