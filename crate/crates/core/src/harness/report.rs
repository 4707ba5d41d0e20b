//! Experiment reports: flat measurement records with optional pass/fail
//! checks, so that every verdict can be recomputed from the stored data.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Experiment;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Le,
    Lt,
    Ge,
    Gt,
}

/// `value <op> limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub op: Op,
    pub limit: f64,
}

impl Check {
    pub fn le(limit: f64) -> Self {
        Self { op: Op::Le, limit }
    }

    pub fn lt(limit: f64) -> Self {
        Self { op: Op::Lt, limit }
    }

    pub fn ge(limit: f64) -> Self {
        Self { op: Op::Ge, limit }
    }

    pub fn gt(limit: f64) -> Self {
        Self { op: Op::Gt, limit }
    }

    /// NaN never passes.
    pub fn accepts(&self, value: f64) -> bool {
        match self.op {
            Op::Le => value <= self.limit,
            Op::Lt => value < self.limit,
            Op::Ge => value >= self.limit,
            Op::Gt => value > self.limit,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Op::Le => "<=",
            Op::Lt => "<",
            Op::Ge => ">=",
            Op::Gt => ">",
        };
        write!(f, "{op} {:e}", self.limit)
    }
}

/// JSON has no NaN, so non-finite values travel as `null` or strings.
mod lenient_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_none()
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
            Null(()),
        }
        Ok(match Option::<Raw>::deserialize(d)? {
            Some(Raw::Num(x)) => x,
            Some(Raw::Text(t)) if t == "inf" => f64::INFINITY,
            Some(Raw::Text(t)) if t == "-inf" => f64::NEG_INFINITY,
            _ => f64::NAN,
        })
    }
}

/// One named real with its cell coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub k: Option<usize>,
    pub recipe: String,
    pub seed: Option<u64>,
    pub name: String,
    #[serde(with = "lenient_f64")]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<Check>,
}

impl Measurement {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            n: None,
            l: None,
            k: None,
            recipe: String::new(),
            seed: None,
            name: name.into(),
            value,
            check: None,
        }
    }

    pub fn at(mut self, n: usize, l: usize) -> Self {
        self.n = Some(n);
        self.l = Some(l);
        self
    }

    pub fn axis(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn recipe(mut self, recipe: impl Into<String>) -> Self {
        self.recipe = recipe.into();
        self
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn check(mut self, check: Check) -> Self {
        self.check = Some(check);
        self
    }

    pub fn passed(&self) -> bool {
        self.check.map_or(true, |c| c.accepts(self.value))
    }
}

/// A grid cell the experiment visited.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    #[serde(rename = "N")]
    pub n: usize,
    pub l: usize,
    pub recipe: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub grid: Vec<GridCell>,
    pub measurements: Vec<Measurement>,
    pub fitted: BTreeMap<String, f64>,
    pub passed: bool,
    pub tolerances: BTreeMap<String, f64>,
    /// Notes such as `lax` admissibility or errors met while running.
    #[serde(default)]
    pub flags: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            grid: Vec::new(),
            measurements: Vec::new(),
            fitted: BTreeMap::new(),
            passed: true,
            tolerances: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub fn push(&mut self, m: Measurement) {
        self.measurements.push(m);
    }

    pub fn cell(&mut self, n: usize, l: usize, recipe: impl Into<String>) {
        let cell = GridCell {
            n,
            l,
            recipe: recipe.into(),
        };
        if !self.grid.contains(&cell) {
            self.grid.push(cell);
        }
    }

    /// Record a cell that could not be evaluated as a failing measurement.
    pub fn error(&mut self, context: &str, err: impl fmt::Display) {
        self.flags.push(format!("error: {context}: {err}"));
        self.push(
            Measurement::new("error", f64::NAN)
                .recipe(context)
                .check(Check::le(0.0)),
        );
    }

    /// Recompute `passed` from the measurements alone.
    pub fn recheck(&self) -> bool {
        self.measurements.iter().all(Measurement::passed)
    }

    /// Sort the grid and set `passed`.
    pub fn finish(mut self) -> Self {
        self.grid.sort();
        self.passed = self.recheck();
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Measurement> {
        self.measurements.iter().filter(|m| !m.passed())
    }

    /// Measurements with the given name.
    pub fn named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Measurement> + 'a {
        self.measurements.iter().filter(move |m| m.name == name)
    }
}

/// The reports of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub reports: Vec<ExperimentReport>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(reports: Vec<ExperimentReport>) -> Self {
        let passed = reports.iter().all(|r| r.passed);
        Self { reports, passed }
    }

    pub fn recheck(&self) -> bool {
        self.reports.iter().all(ExperimentReport::recheck)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Flat CSV with columns `experiment,N,l,k,recipe,seed,name,value`.
pub fn write_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "experiment",
        "N",
        "l",
        "k",
        "recipe",
        "seed",
        "name",
        "value",
    ])
    .map_err(csv_err)?;
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in reports {
        for m in &r.measurements {
            w.write_record([
                r.experiment.to_string(),
                opt(m.n.map(|x| x as u64)),
                opt(m.l.map(|x| x as u64)),
                opt(m.k.map(|x| x as u64)),
                m.recipe.clone(),
                opt(m.seed),
                m.name.clone(),
                m.value.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}
