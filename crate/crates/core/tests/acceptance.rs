//! Acceptance gate: one PASS/FAIL line per criterion, computed from the
//! default suite configuration. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fgl_core::harness::{
    run_experiment, run_suite, Corpus, Experiment, ExperimentReport, Measurement, SuiteReport,
};
use fgl_core::Config;

struct Criterion {
    id: u32,
    title: &'static str,
    experiment: Experiment,
    select: fn(&Measurement) -> bool,
    /// Wall-clock limit for the whole experiment.
    limit: Option<Duration>,
}

fn name_in(m: &Measurement, names: &[&str]) -> bool {
    names.iter().any(|n| m.name == *n)
}

fn starts(m: &Measurement, prefixes: &[&str]) -> bool {
    prefixes.iter().any(|p| m.name.starts_with(p))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "exact Zak identities",
        experiment: Experiment::Identities,
        select: |m| {
            m.recipe == "random_entries"
                && starts(
                    m,
                    &[
                        "unitarity",
                        "round_trip",
                        "intertwine",
                        "convolution",
                        "control_corrupted",
                        "error",
                    ],
                )
        },
        limit: Some(Duration::from_secs(30)),
    },
    Criterion {
        id: 2,
        title: "Zak and Gram Riesz bounds agree",
        experiment: Experiment::Identities,
        select: |m| {
            starts(
                m,
                &[
                    "bounds_gap",
                    "control_zak_lower",
                    "control_gram_lower",
                    "error",
                ],
            )
        },
        limit: Some(Duration::from_secs(120)),
    },
    Criterion {
        id: 3,
        title: "sandwich between alpha and beta",
        experiment: Experiment::FiniteBlt,
        select: |m| name_in(m, &["sandwich_slack"]) || starts(m, &["error"]),
        limit: None,
    },
    Criterion {
        id: 4,
        title: "boxcar beta = 2N",
        experiment: Experiment::FiniteBlt,
        select: |m| name_in(m, &["boxcar_beta_error"]),
        limit: None,
    },
    Criterion {
        id: 5,
        title: "finite BLT growth",
        experiment: Experiment::FiniteBlt,
        select: |m| {
            starts(
                m,
                &[
                    "low_beta_",
                    "product_beta_error",
                    "beta_over_log",
                    "corpus_min_step",
                    "c_beta",
                    "c_alpha",
                ],
            )
        },
        limit: Some(Duration::from_secs(300)),
    },
    Criterion {
        id: 6,
        title: "filter smoothness, plateau, time-domain oracle",
        experiment: Experiment::Filters,
        select: |m| {
            starts(
                m,
                &[
                    "smoothness",
                    "direct_smoothness",
                    "direct_vs_profile",
                    "plateau_error",
                    "direct_plateau",
                    "transform_",
                    "oracle_error",
                    "error",
                ],
            )
        },
        limit: None,
    },
    Criterion {
        id: 7,
        title: "convolution-smoothness spot checks",
        experiment: Experiment::Filters,
        select: |m| starts(m, &["lemma41_"]),
        limit: None,
    },
    Criterion {
        id: 8,
        title: "quantitative BLT tails and jump census",
        experiment: Experiment::QuantBlt,
        select: |_| true,
        limit: Some(Duration::from_secs(180)),
    },
    Criterion {
        id: 9,
        title: "nonsymmetric regimes",
        experiment: Experiment::NonsymBlt,
        select: |_| true,
        limit: None,
    },
];

fn summarize(r: &ExperimentReport, select: fn(&Measurement) -> bool) -> (usize, Vec<&Measurement>) {
    let chosen: Vec<&Measurement> = r
        .measurements
        .iter()
        .filter(|m| select(m) && m.check.is_some())
        .collect();
    let failed = chosen.iter().copied().filter(|m| !m.passed()).collect();
    (chosen.len(), failed)
}

fn main() -> ExitCode {
    let cfg = Config::default();
    let corpus = Corpus::new();
    let mut reports = Vec::new();
    let mut times = Vec::new();
    for exp in Experiment::ALL {
        let start = Instant::now();
        reports.push(run_experiment(exp, &cfg, &corpus));
        times.push(start.elapsed());
    }
    let mut ok = true;
    for c in CRITERIA {
        let idx = Experiment::ALL
            .iter()
            .position(|e| *e == c.experiment)
            .expect("known experiment");
        let (count, failed) = summarize(&reports[idx], c.select);
        let elapsed = times[idx];
        let in_time = c.limit.map_or(true, |lim| elapsed <= lim);
        let pass = count > 0 && failed.is_empty() && in_time;
        ok &= pass;
        let limit = c
            .limit
            .map(|l| format!(" (limit {}s)", l.as_secs()))
            .unwrap_or_default();
        println!(
            "{} C{} {}: {} checks, {} failed, {:.1}s{}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            count,
            failed.len(),
            elapsed.as_secs_f64(),
            limit
        );
        for m in failed.iter().take(5) {
            println!(
                "    {} N={:?} l={:?} k={:?} {}: {:e} (want {})",
                m.name,
                m.n,
                m.l,
                m.k,
                m.recipe,
                m.value,
                m.check.expect("selected checks only")
            );
        }
    }

    for r in &reports {
        for (k, v) in &r.fitted {
            let shown = match r.experiment {
                Experiment::NonsymBlt => k.contains("low_beta/"),
                _ => true,
            };
            if shown {
                println!("    fitted {}/{k} = {v:.6}", r.experiment);
            }
        }
    }

    let start = Instant::now();
    let first = SuiteReport::new(reports).to_json().expect("serializable");
    let second = run_suite(&cfg).to_json().expect("serializable");
    let same = first == second;
    ok &= same;
    println!(
        "{} C10 byte-identical reports across two runs: {} bytes, {:.1}s",
        if same { "PASS" } else { "FAIL" },
        first.len(),
        start.elapsed().as_secs_f64()
    );

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
