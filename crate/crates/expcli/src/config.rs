//! Experiment configuration: one experiment per TOML file.
//!
//! ```toml
//! model = "lattice_slowbond"
//! n_list = [250, 500, 1000]
//! replicas = 100
//! seed = 7
//! output_dir = "runs/slowbond"
//!
//! [params]
//! epsilon = 0.5
//! ```
//!
//! A run's `manifest.json` is accepted wherever a config file is.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use slowbond_core::stats::ModelTag;
use slowbond_core::tasep::minimum_window;

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "SLOWBOND_SEED";
pub const OUTPUT_DIR_ENV: &str = "SLOWBOND_OUTPUT_DIR";

/// Largest lattice side accepted; the passage DP keeps one row, sampling is `O(n^2)`.
pub const MAX_LATTICE_N: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Ulam,
    UlamReinforced,
    Lattice,
    LatticeSlowbond,
    Tasep,
    TasepCoupled,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Ulam => "ulam",
            Model::UlamReinforced => "ulam_reinforced",
            Model::Lattice => "lattice",
            Model::LatticeSlowbond => "lattice_slowbond",
            Model::Tasep => "tasep",
            Model::TasepCoupled => "tasep_coupled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Model::Ulam,
            Model::UlamReinforced,
            Model::Lattice,
            Model::LatticeSlowbond,
            Model::Tasep,
            Model::TasepCoupled,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }

    /// Observables recorded per `(n, replica)` cell, in row order.
    pub fn observables(self) -> &'static [&'static str] {
        match self {
            Model::Ulam => &["L", "F"],
            Model::UlamReinforced => &["L", "F", "L_base", "F_base"],
            Model::Lattice => &["T"],
            Model::LatticeSlowbond => &["T", "T_base"],
            Model::Tasep => &["J", "J_se"],
            Model::TasepCoupled => &["tasep_time", "lpp_time"],
        }
    }

    pub fn tag(self) -> ModelTag {
        match self {
            Model::Ulam => ModelTag::Ulam,
            Model::UlamReinforced => ModelTag::UlamReinforced,
            Model::Lattice | Model::TasepCoupled => ModelTag::Lattice,
            Model::LatticeSlowbond => ModelTag::LatticeSlowbond,
            Model::Tasep => ModelTag::Tasep,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Offset `m` of the defect line `y = x + m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// TASEP time horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// TASEP sites per side; defaults to the minimum the horizon needs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub n_list: Vec<u64>,
    pub replicas: u64,
    #[serde(deserialize_with = "seed_from_any")]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Write measured cell times into `records.csv` (breaks byte-identical reruns).
    #[serde(default)]
    pub record_wall_time: bool,
}

/// TOML integers stop at `i64::MAX`, so seeds may also be given as strings,
/// decimal or `0x` hex.
fn seed_from_any<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Unsigned(u64),
        Signed(i64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Unsigned(v) => Ok(v),
        Repr::Signed(v) => u64::try_from(v).map_err(|_| serde::de::Error::custom("seed must be nonnegative")),
        Repr::Text(s) => parse_seed(&s).map_err(serde::de::Error::custom),
    }
}

pub fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| format!("`{s}` is not a 64-bit unsigned seed"))
}

#[derive(Deserialize)]
struct ManifestConfig {
    config: ExperimentConfig,
}

impl ExperimentConfig {
    /// Parses a TOML config, or the `config` member of a run manifest.
    pub fn from_str_any(text: &str, origin: &Path) -> Result<Self> {
        let is_json = origin.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            serde_json::from_str::<ManifestConfig>(text)
                .map(|m| m.config)
                .map_err(|e| CliError::invalid(format!("{}: {e}", origin.display())))
        } else {
            toml::from_str(text).map_err(|e| CliError::invalid(format!("{}: {}", origin.display(), e.message())))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_str_any(&text, path)
    }

    /// Applies `SLOWBOND_SEED` and `SLOWBOND_OUTPUT_DIR` from `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(s) = lookup(SEED_ENV) {
            self.seed = parse_seed(&s).map_err(|e| CliError::invalid(format!("{SEED_ENV}: {e}")))?;
        }
        if let Some(dir) = lookup(OUTPUT_DIR_ENV) {
            self.output_dir = PathBuf::from(dir);
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon.unwrap_or(0.0)
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda.unwrap_or(0.0)
    }

    pub fn offset(&self) -> f64 {
        self.params.offset.unwrap_or(0.0)
    }

    pub fn window(&self) -> u64 {
        self.params
            .window
            .unwrap_or_else(|| minimum_window(self.params.horizon.unwrap_or(0.0)) as u64)
    }

    pub fn burn_in(&self) -> f64 {
        self.params
            .burn_in
            .unwrap_or_else(|| self.params.horizon.unwrap_or(0.0) / 10.0)
    }

    /// System sizes to run. TASEP runs one size, the horizon.
    pub fn sizes(&self) -> Vec<u64> {
        match self.model {
            Model::Tasep => vec![self.params.horizon.unwrap_or(0.0).round() as u64],
            _ => self.n_list.clone(),
        }
    }

    /// Checks everything and reports every problem at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let p = &self.params;
        let m = self.model;
        let mut bad = |field: &str, msg: String| issues.push(format!("{field}: {msg}"));

        if self.replicas < 1 {
            bad("replicas", "must be at least 1".into());
        }
        if self.output_dir.as_os_str().is_empty() {
            bad("output_dir", "must not be empty".into());
        }

        if m == Model::Tasep {
            if !self.n_list.is_empty() {
                bad("n_list", "not used by tasep; the run length is params.horizon".into());
            }
        } else if self.n_list.is_empty() {
            bad("n_list", "must not be empty".into());
        } else {
            if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                bad("n_list", "must be strictly ascending".into());
            }
            if self.n_list[0] < 1 {
                bad("n_list", "sizes must be at least 1".into());
            }
            if matches!(m, Model::Lattice | Model::LatticeSlowbond | Model::TasepCoupled)
                && *self.n_list.last().unwrap() > MAX_LATTICE_N
            {
                bad("n_list", format!("lattice sizes are capped at {MAX_LATTICE_N}"));
            }
        }

        let needs_lambda = m == Model::UlamReinforced;
        let needs_epsilon = matches!(m, Model::LatticeSlowbond | Model::Tasep | Model::TasepCoupled);
        let takes_offset = matches!(m, Model::UlamReinforced | Model::LatticeSlowbond);
        let is_tasep = m == Model::Tasep;

        match p.lambda {
            Some(l) if !needs_lambda => bad("params.lambda", format!("not used by model {m} (got {l})")),
            Some(l) if !(l.is_finite() && l >= 0.0) => bad("params.lambda", format!("must be finite and >= 0, got {l}")),
            None if needs_lambda => bad("params.lambda", format!("required by model {m}")),
            _ => {}
        }
        match p.epsilon {
            Some(e) if !needs_epsilon => bad("params.epsilon", format!("not used by model {m} (got {e})")),
            Some(e) if !(0.0..1.0).contains(&e) => bad("params.epsilon", format!("must lie in [0, 1), got {e}")),
            None if needs_epsilon => bad("params.epsilon", format!("required by model {m}")),
            _ => {}
        }
        if let Some(o) = p.offset {
            if !takes_offset {
                bad("params.offset", format!("not used by model {m}"));
            } else if !o.is_finite() {
                bad("params.offset", format!("must be finite, got {o}"));
            } else {
                if m == Model::LatticeSlowbond && o.fract() != 0.0 {
                    bad("params.offset", format!("must be an integer on the lattice, got {o}"));
                }
                if let Some(&n0) = self.n_list.first() {
                    let fits = if m == Model::UlamReinforced {
                        o.abs() < n0 as f64
                    } else {
                        o.abs() <= n0 as f64
                    };
                    if !fits {
                        bad("params.offset", format!("the line y = x + {o} misses the box for n = {n0}"));
                    }
                }
            }
        }
        for (field, given) in [("params.horizon", p.horizon.is_some()), ("params.window", p.window.is_some()), ("params.burn_in", p.burn_in.is_some())] {
            if given && !is_tasep {
                bad(field, format!("not used by model {m}"));
            }
        }
        if is_tasep {
            match p.horizon {
                None => bad("params.horizon", "required by model tasep".into()),
                Some(h) if !(h.is_finite() && h >= 1.0) => bad("params.horizon", format!("must be finite and >= 1, got {h}")),
                Some(h) => {
                    let need = minimum_window(h) as u64;
                    if let Some(w) = p.window {
                        if w < need {
                            bad(
                                "params.window",
                                format!("{w} sites per side cannot hold horizon {h}; need at least {need}"),
                            );
                        }
                    }
                    if let Some(b) = p.burn_in {
                        if !(b.is_finite() && b >= 0.0 && b < h) {
                            bad("params.burn_in", format!("must lie in [0, horizon), got {b}"));
                        }
                    }
                }
            }
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(issues))
        }
    }
}
