//! TOML experiment configuration.
//!
//! ```toml
//! kind = "collision"          # or "ast"
//! n = 64                      # slots
//! load = 100.0                # or m = 6400; may be omitted when the bound fixes m
//! trials = 10000
//! base_seed = 1
//! output = "report.json"      # optional
//! csv = "trials.csv"          # optional
//!
//! [distribution]              # key distribution over the universe
//! name = "zipf"               # uniform | zipf | restricted | pointmass | explicit
//! exponent = 1.0
//!
//! [hash]                      # optional, defaults to identity (universe = n)
//! mode = "random_table"       # identity | random_table | file
//! universe = 1048576
//! seed = 7
//!
//! [access]                    # ast experiments only: the user's access pattern over slots
//! name = "restricted"
//! alpha = 0.1
//!
//! [bound]
//! kind = "load_factor"        # main | fixed_s | load_factor | gr | gr_form | ast_s | ast_eps
//! epsilon = 0.15
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{HashModel, MAX_TABLE_SIZE};
use crate::probability::ProbabilityVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Collision,
    Ast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Uniform,
    Zipf { exponent: f64 },
    Restricted { alpha: f64 },
    #[serde(rename = "pointmass")]
    PointMass {
        #[serde(default)]
        index: usize,
    },
    Explicit { weights: Vec<f64> },
}

impl DistSpec {
    pub fn build(&self, size: usize) -> Result<ProbabilityVector> {
        match self {
            DistSpec::Uniform => ProbabilityVector::uniform(size),
            DistSpec::Zipf { exponent } => ProbabilityVector::zipf(size, *exponent),
            DistSpec::Restricted { alpha } => ProbabilityVector::restricted_uniform(size, *alpha),
            DistSpec::PointMass { index } => ProbabilityVector::point_mass(size, *index),
            DistSpec::Explicit { weights } => {
                if weights.len() != size {
                    return Err(Error::invalid(format!(
                        "explicit distribution has {} weights, expected {size}",
                        weights.len()
                    )));
                }
                ProbabilityVector::from_weights(weights.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum HashSpec {
    #[default]
    Identity,
    RandomTable {
        universe: usize,
        #[serde(default)]
        seed: u64,
    },
    File { path: PathBuf },
}

impl HashSpec {
    pub fn build(&self, slots: usize) -> Result<HashModel> {
        let h = match self {
            HashSpec::Identity => HashModel::identity(slots)?,
            HashSpec::RandomTable { universe, seed } => {
                check_size("universe", *universe)?;
                HashModel::random_table(*universe, slots, *seed)?
            }
            HashSpec::File { path } => HashModel::load_table_file(path, slots)?,
        };
        check_size("universe", h.universe())?;
        Ok(h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSpec {
    Main { epsilon: f64, delta: f64, s: f64 },
    FixedS { epsilon: f64, delta: f64 },
    LoadFactor { epsilon: f64 },
    Gr { beta: f64, lambda: f64 },
    GrForm { beta: f64, lambda: f64 },
    AstS { s: f64 },
    AstEps { epsilon: f64 },
}

impl BoundSpec {
    pub fn experiment_kind(&self) -> ExperimentKind {
        match self {
            BoundSpec::AstS { .. } | BoundSpec::AstEps { .. } => ExperimentKind::Ast,
            _ => ExperimentKind::Collision,
        }
    }

    /// Real-valued key count fixed by the bound's own parameter relation, if any.
    fn implied_keys(&self, n: usize) -> Option<f64> {
        let nf = n as f64;
        match self {
            BoundSpec::Main { epsilon, delta, .. } | BoundSpec::FixedS { epsilon, delta } => {
                Some(epsilon.powi(-2) * nf.powf(1.0 + delta))
            }
            BoundSpec::Gr { beta, lambda } | BoundSpec::GrForm { beta, lambda } => {
                Some(nf.powf(0.5 + beta + lambda))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<f64>,
    pub trials: u64,
    #[serde(default)]
    pub base_seed: u64,
    pub distribution: DistSpec,
    #[serde(default)]
    pub hash: HashSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access: Option<DistSpec>,
    pub bound: BoundSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Number of keys per trial, after checking `m`, `load`, and the bound agree.
    pub fn resolve_keys(&self) -> Result<u64> {
        let implied = self.bound.implied_keys(self.n);
        let from_load = self.load.map(|l| {
            if l > 0.0 && l.is_finite() {
                Ok((l * self.n as f64).round() as u64)
            } else {
                Err(Error::invalid(format!("load must be positive (got {l})")))
            }
        });
        let m = match (self.m, from_load, implied) {
            (Some(m), _, _) => m,
            (None, Some(m), _) => m?,
            (None, None, Some(exact)) => exact.round() as u64,
            (None, None, None) => {
                return Err(Error::Config("one of `m` or `load` is required".into()))
            }
        };
        if let (Some(_), Some(lm)) = (self.m, self.load) {
            let lm = (lm * self.n as f64).round() as u64;
            if lm != m {
                return Err(Error::invalid(format!(
                    "m = {m} disagrees with load * n = {lm}"
                )));
            }
        }
        if let Some(exact) = implied {
            if exact.round() as u64 != m {
                return Err(Error::invalid(format!(
                    "the {:?} bound requires m = round({exact}) but the config gives m = {m}",
                    self.bound
                )));
            }
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<u64> {
        check_size("n", self.n)?;
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.bound.experiment_kind() != self.kind {
            return Err(Error::invalid(format!(
                "bound {:?} does not apply to a {:?} experiment",
                self.bound, self.kind
            )));
        }
        if self.kind == ExperimentKind::Ast && self.access.is_none() {
            return Err(Error::Config("ast experiments need an [access] pattern".into()));
        }
        let m = self.resolve_keys()?;
        if self.kind == ExperimentKind::Collision && m < 2 {
            return Err(Error::UndefinedEstimate { m });
        }
        Ok(m)
    }
}

fn check_size(what: &str, size: usize) -> Result<()> {
    if size == 0 || size > MAX_TABLE_SIZE {
        Err(Error::invalid(format!(
            "{what} must be in 1..={MAX_TABLE_SIZE} (got {size})"
        )))
    } else {
        Ok(())
    }
}
