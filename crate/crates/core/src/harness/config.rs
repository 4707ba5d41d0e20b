//! Suite configuration. A user file is merged key by key onto the built-in
//! defaults, so it only needs to name what it changes.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;

use super::Experiment;
use crate::constructions::GeneratorRecipe;
use crate::error::{Error, Result};
use crate::localization::Weight;

const DEFAULT_JSON: &str = include_str!("../../config/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-abs residual of the exact identities.
    pub identity: f64,
    /// Relative gap between the Zak and Gram bounds, scaled by `max(1, B)`.
    pub bounds_rel: f64,
    /// Largest lower bound accepted for a non-basis control.
    pub null_lower: f64,
    /// Size of the entry perturbation in the corrupted-Zak control.
    pub corruption: f64,
    pub sandwich_slack: f64,
    pub boxcar_beta: f64,
    pub product_beta: f64,
    /// Allowed `max/min` of `β/log N` for the low-`β` family.
    pub band_factor: f64,
    pub beta_log_floor: f64,
    pub smoothness_factor: f64,
    pub plateau: f64,
    pub oracle: f64,
    pub lemma41_slack: f64,
    pub quant_floor: f64,
    pub r2_min: f64,
    pub lemma51_rel: f64,
    pub term_drop_rel: f64,
}

impl Tolerances {
    pub fn as_map(&self) -> BTreeMap<String, f64> {
        serde_json::from_value(serde_json::to_value(self).expect("plain struct"))
            .expect("all fields are reals")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitiesConfig {
    pub n_grid: Vec<usize>,
    pub l2_max_n: usize,
    pub bounds_n_grid: Vec<usize>,
    pub bounds_l2_max_n: usize,
    pub bounds_recipes: Vec<GeneratorRecipe>,
    /// Run the identity checks on a corrupted Zak array. The report must fail.
    pub corrupt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteBltConfig {
    pub boxcar_n: Vec<usize>,
    pub boxcar_l: Vec<usize>,
    pub sandwich_n: Vec<usize>,
    /// Two-variable corpus members are skipped above this `N`.
    pub l2_max_n: usize,
    pub product_n: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantMode {
    Strict,
    Lax,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantConfig {
    pub mode: QuantMode,
    pub strict_n: usize,
    pub lax_n: Vec<usize>,
    pub recipes: Vec<GeneratorRecipe>,
    pub k: usize,
    /// Census threshold; `null` uses the default derived from `A`.
    pub delta: Option<f64>,
    /// `N` of the Gaussian negative control.
    pub control_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonsymConfig {
    pub pq: Vec<(Weight, Weight)>,
    pub lemma51_instances: usize,
    /// Inclusive range the random `N` of each rearrangement instance is drawn from.
    pub lemma51_n: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiltersConfig {
    pub n_grid: Vec<usize>,
    pub r_values: Vec<usize>,
    /// Also test `R = ⌊N / r_divisor⌋`.
    pub r_divisor: usize,
    pub l_values: Vec<usize>,
    pub oracle_periods: usize,
    pub spot_checks: usize,
    /// Cells with more entries skip the spot checks and the direct
    /// (non-profile) filter construction.
    pub spot_max_entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub experiments: Vec<Experiment>,
    /// `N` grid of the growth fits.
    pub n_grid: Vec<usize>,
    /// The generator corpus.
    pub recipes: Vec<GeneratorRecipe>,
    /// Seeds for random test inputs.
    pub seeds: Vec<u64>,
    pub tolerances: Tolerances,
    pub identities: IdentitiesConfig,
    pub finite_blt: FiniteBltConfig,
    pub quant_blt: QuantConfig,
    pub nonsym_blt: NonsymConfig,
    pub filters: FiltersConfig,
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_JSON).expect("built-in config parses")
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (key, v) in p {
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(key, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Config {
    /// Parse a possibly partial config and fill the rest from the defaults.
    pub fn from_json(s: &str) -> Result<Self> {
        let patch: Value = serde_json::from_str(s)?;
        if !patch.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        let mut base: Value = serde_json::from_str(DEFAULT_JSON)?;
        merge(&mut base, patch);
        let cfg: Config = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        for r in self
            .recipes
            .iter()
            .chain(&self.identities.bounds_recipes)
            .chain(&self.quant_blt.recipes)
        {
            r.validate()?;
        }
        if self.quant_blt.recipes.iter().any(|r| r.l() != 1) {
            return Err(Error::Config(
                "quant_blt recipes must be one-variable".into(),
            ));
        }
        for (p, q) in &self.nonsym_blt.pq {
            if p.is_infinite() && q.is_infinite() {
                return Err(Error::BothWeightsInfinite);
            }
        }
        let (lo, hi) = self.nonsym_blt.lemma51_n;
        if lo < 2 || lo > hi {
            return Err(Error::Config(format!("bad lemma51_n range ({lo}, {hi})")));
        }
        if self.filters.r_divisor == 0 {
            return Err(Error::Config("filters.r_divisor must be positive".into()));
        }
        if self.quant_blt.delta.is_some_and(|d| d.is_nan() || d <= 0.0) {
            return Err(Error::Config("quant_blt.delta must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        assert_eq!(Config::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
        assert_eq!(cfg.nonsym_blt.pq[1].1, Weight::Finite(1.5));
        assert_eq!(cfg.nonsym_blt.pq[3].1, Weight::Infinite);
    }

    #[test]
    fn partial_override() {
        let cfg = Config::from_json(r#"{"n_grid":[4,8],"tolerances":{"identity":1e-9}}"#).unwrap();
        assert_eq!(cfg.n_grid, vec![4, 8]);
        assert_eq!(cfg.tolerances.identity, 1e-9);
        assert_eq!(cfg.tolerances.bounds_rel, 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::from_json("[1]").is_err());
        assert!(Config::from_json(r#"{"nonsym_blt":{"pq":[["inf","inf"]]}}"#).is_err());
        assert!(Config::from_json(
            r#"{"recipes":[{"kind":"scaled","base":{"kind":"boxcar","l":1},"scale":-1}]}"#
        )
        .is_err());
    }
}
