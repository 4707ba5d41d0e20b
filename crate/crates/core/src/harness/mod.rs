//! Experiment harness: theorem checks over parameter grids, producing
//! re-checkable reports.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::constructions::GeneratorRecipe;
use crate::error::{Error, Result};
use crate::seq::FiniteSequence;

pub mod config;
mod filters;
mod finite;
pub mod fit;
mod identities;
mod nonsym;
mod quant;
pub mod report;

pub use config::Config;
pub use filters::run_filters;
pub use finite::run_finite_blt;
pub use identities::run_identities;
pub use nonsym::run_nonsym_blt;
pub use quant::run_quant_blt;
pub use report::{Check, ExperimentReport, Measurement, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Identities,
    FiniteBlt,
    QuantBlt,
    NonsymBlt,
    Filters,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Identities,
        Experiment::FiniteBlt,
        Experiment::QuantBlt,
        Experiment::NonsymBlt,
        Experiment::Filters,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Identities => "identities",
            Experiment::FiniteBlt => "finite_blt",
            Experiment::QuantBlt => "quant_blt",
            Experiment::NonsymBlt => "nonsym_blt",
            Experiment::Filters => "filters",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

type Slot = Arc<OnceLock<std::result::Result<Arc<FiniteSequence>, String>>>;

/// Builds each `(recipe, N)` generator once, even across threads.
#[derive(Default)]
pub struct Corpus {
    cache: Mutex<HashMap<(String, usize), Slot>>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, recipe: &GeneratorRecipe, n: usize) -> Result<Arc<FiniteSequence>> {
        let key = (serde_json::to_string(recipe)?, n);
        let slot = self
            .cache
            .lock()
            .expect("corpus cache poisoned")
            .entry(key)
            .or_default()
            .clone();
        slot.get_or_init(|| recipe.build(n).map(Arc::new).map_err(|e| e.to_string()))
            .clone()
            .map_err(Error::Config)
    }
}

pub fn run_experiment(exp: Experiment, cfg: &Config, corpus: &Corpus) -> ExperimentReport {
    let mut report = match exp {
        Experiment::Identities => run_identities(cfg, corpus),
        Experiment::FiniteBlt => run_finite_blt(cfg, corpus),
        Experiment::QuantBlt => run_quant_blt(cfg, corpus),
        Experiment::NonsymBlt => run_nonsym_blt(cfg, corpus),
        Experiment::Filters => run_filters(cfg, corpus),
    };
    report.tolerances = cfg.tolerances.as_map();
    report.finish()
}

/// Run the configured experiments in their canonical order.
pub fn run_suite(cfg: &Config) -> SuiteReport {
    let corpus = Corpus::new();
    let mut exps = cfg.experiments.clone();
    exps.sort();
    exps.dedup();
    SuiteReport::new(
        exps.into_iter()
            .map(|e| {
                log::info!("running {e}");
                run_experiment(e, cfg, &corpus)
            })
            .collect(),
    )
}

pub(crate) type CellResult = std::result::Result<Vec<Measurement>, (String, Error)>;

pub(crate) trait Context<T> {
    fn ctx(self, context: impl fmt::Display) -> std::result::Result<T, (String, Error)>;
}

impl<T> Context<T> for Result<T> {
    fn ctx(self, context: impl fmt::Display) -> std::result::Result<T, (String, Error)> {
        self.map_err(|e| (context.to_string(), e))
    }
}

/// Evaluate cells in parallel and append the results in input order.
pub(crate) fn run_cells<T, F>(report: &mut ExperimentReport, cells: &[T], f: F)
where
    T: Sync,
    F: Fn(&T) -> CellResult + Sync + Send,
{
    use rayon::prelude::*;
    let results: Vec<CellResult> = cells.par_iter().map(f).collect();
    for r in results {
        match r {
            Ok(ms) => report.measurements.extend(ms),
            Err((ctx, e)) => report.error(&ctx, e),
        }
    }
}
