//! Experiment configuration, read from TOML. Every field has a default, so an
//! empty file reproduces the reference setup at the chosen scale.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use enn::{BasisConfig, BenchmarkKind, LmsConfig, Problem, TaskKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Enn,
    Relu,
    Sigm,
    Fdct,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Enn,
        ModelKind::Relu,
        ModelKind::Sigm,
        ModelKind::Fdct,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Enn => "enn",
            ModelKind::Relu => "relu",
            ModelKind::Sigm => "sigm",
            ModelKind::Fdct => "fdct",
        }
    }

    pub fn benchmark(&self) -> Option<BenchmarkKind> {
        match self {
            ModelKind::Enn => None,
            ModelKind::Relu => Some(BenchmarkKind::Relu),
            ModelKind::Sigm => Some(BenchmarkKind::Sigm),
            ModelKind::Fdct => Some(BenchmarkKind::Fdct),
        }
    }
}

impl FromStr for ModelKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .with_context(|| format!("unknown model `{s}` (expected enn, relu, sigm or fdct)"))
    }
}

/// Dataset sizes: `desk` is 100k/20k, `full` is 800k/50k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Desk,
    Full,
}

impl Scale {
    pub fn sizes(&self) -> (usize, usize) {
        match self {
            Scale::Desk => (100_000, 20_000),
            Scale::Full => (800_000, 50_000),
        }
    }
}

/// Seeds for every random draw of a run. Unset seeds derive from `base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    pub base: Option<u64>,
    pub train: Option<u64>,
    pub test: Option<u64>,
    pub init: Option<u64>,
    pub shuffle: Option<u64>,
}

/// Fully resolved seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Seeds {
    pub base: u64,
    pub train: u64,
    pub test: u64,
    pub init: u64,
    pub shuffle: u64,
}

impl Seeds {
    /// `train = base`, `test = base + 1`, `init = base + 2`, `shuffle = base + 3`.
    pub fn from_base(base: u64) -> Self {
        Self {
            base,
            train: base,
            test: base.wrapping_add(1),
            init: base.wrapping_add(2),
            shuffle: base.wrapping_add(3),
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    pub problems: Option<Vec<String>>,
    pub models: Option<Vec<ModelKind>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    pub model: ModelKind,
    pub m1: usize,
    pub q: usize,
    pub n: usize,
    pub scale: Scale,
    pub train_size: Option<usize>,
    pub test_size: Option<usize>,
    pub seeds: SeedConfig,
    pub lms: LmsConfig,
    pub out: Option<String>,
    pub table: TableConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "p1".into(),
            model: ModelKind::Enn,
            m1: 6,
            q: 12,
            n: 512,
            scale: Scale::Desk,
            train_size: None,
            test_size: None,
            seeds: SeedConfig::default(),
            lms: LmsConfig::default(),
            out: None,
            table: TableConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(self.problem.parse::<Problem>()?)
    }

    pub fn basis(&self) -> Result<BasisConfig> {
        Ok(BasisConfig::new(self.n, self.q)?)
    }

    pub fn train_size(&self) -> usize {
        self.train_size.unwrap_or(self.scale.sizes().0)
    }

    pub fn test_size(&self) -> usize {
        self.test_size.unwrap_or(self.scale.sizes().1)
    }

    pub fn seeds(&self) -> Seeds {
        let d = Seeds::from_base(self.seeds.base.unwrap_or(DEFAULT_SEED));
        Seeds {
            base: d.base,
            train: self.seeds.train.unwrap_or(d.train),
            test: self.seeds.test.unwrap_or(d.test),
            init: self.seeds.init.unwrap_or(d.init),
            shuffle: self.seeds.shuffle.unwrap_or(d.shuffle),
        }
    }

    pub fn task(&self) -> Result<TaskKind> {
        Ok(self.problem()?.kind())
    }

    /// Checks every constraint before any work is done.
    pub fn validate(&self) -> Result<()> {
        self.problem()?;
        self.basis()?;
        self.lms.validate()?;
        if self.m1 == 0 {
            bail!("m1 must be >= 1");
        }
        if self.train_size() == 0 || self.test_size() == 0 {
            bail!("train_size and test_size must be >= 1");
        }
        if self.lms.epochs == 0 {
            bail!("lms.epochs must be >= 1");
        }
        if let Some(problems) = &self.table.problems {
            for p in problems {
                p.parse::<Problem>()?;
            }
        }
        Ok(())
    }
}
