//! `fgl`: run the finite Balian-Low experiments and work with single
//! generators from the command line.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fgl_core::constructions::{
    boxcar, product, random_unimodular, scale_generator, LowBetaOptions,
};
use fgl_core::filters::{
    default_delta, filter_smoothness, jump_census, phi_filter, transform_profile, TrapezoidSpec,
};
use fgl_core::gabor::{riesz_bounds_gram, riesz_bounds_zak, GRAM_LIMIT};
use fgl_core::harness::config::QuantMode;
use fgl_core::harness::report::write_csv;
use fgl_core::harness::{run_experiment, run_suite, Corpus, Experiment, SuiteReport};
use fgl_core::localization::{alpha, alpha_pq, beta, tail_energy};
use fgl_core::{constructions, Config, FiniteSequence, GaborGrid, Weight};

#[derive(Parser)]
#[command(
    name = "fgl",
    version,
    about = "Finite Gabor systems and Balian-Low experiments"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON config, merged onto the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the flat measurements as CSV here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Replace the configured seeds with this one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Quantitative runs only at admissible N.
    #[arg(long, global = true, conflicts_with = "lax")]
    strict: bool,
    /// Quantitative runs only at small, flagged N.
    #[arg(long, global = true)]
    lax: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Zak identities and Riesz-bound route agreement.
    Identities,
    /// Finite BLT growth of the localization functionals.
    Blt,
    /// Quantitative BLT tails and jump census.
    Quant,
    /// Nonsymmetric weights and their regimes.
    Nonsym,
    /// Filter checks, or one filter when --N is given.
    Filters(FilterArgs),
    /// Every configured experiment.
    Suite,
    /// Build a generator and write it as JSON.
    Make(MakeArgs),
    /// Riesz bounds of a generator by both routes.
    Bounds(InputArgs),
    /// Localization functionals of a generator.
    Localize(LocalizeArgs),
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long = "R", default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Write the filter as a JSON sequence.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Also count jump points of a generator (boxcar unless --input).
    #[arg(long)]
    census: bool,
    /// Census threshold; defaults to the value derived from the lower bound.
    #[arg(long)]
    delta: Option<f64>,
    /// Generator for the census.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Boxcar,
    Random,
    Lowbeta,
    Product,
}

#[derive(Args)]
struct MakeArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    /// Scale the result by this positive factor.
    #[arg(long)]
    scale: Option<f64>,
    /// Iteration budget of the low-beta optimizer.
    #[arg(long, default_value_t = 3000)]
    budget: usize,
    /// One-variable base of a product.
    #[arg(long, value_enum, default_value = "lowbeta")]
    base: Kind,
}

#[derive(Args)]
struct InputArgs {
    /// Generator JSON as written by `make`.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct LocalizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Weight on the sequence: a number, a fraction like 3/2, or inf.
    #[arg(long, default_value = "2")]
    p: Weight,
    /// Weight on the transform.
    #[arg(long, default_value = "2")]
    q: Weight,
    /// Tail thresholds; defaults to N/2, N and 2N.
    #[arg(long = "tail")]
    tails: Vec<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    if let Some(j) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    let exp = match &cli.command {
        Command::Identities => Some(Experiment::Identities),
        Command::Blt => Some(Experiment::FiniteBlt),
        Command::Quant => Some(Experiment::QuantBlt),
        Command::Nonsym => Some(Experiment::NonsymBlt),
        Command::Filters(f) if f.n.is_none() => Some(Experiment::Filters),
        _ => None,
    };
    if let Some(exp) = exp {
        let cfg = load_config(g)?;
        let report = SuiteReport::new(vec![run_experiment(exp, &cfg, &Corpus::new())]);
        return finish_report(g, &report);
    }
    match cli.command {
        Command::Suite => {
            let cfg = load_config(g)?;
            finish_report(g, &run_suite(&cfg))
        }
        Command::Filters(f) => single_filter(g, &f),
        Command::Make(m) => make(g, &m),
        Command::Bounds(a) => bounds(g, &a),
        Command::Localize(a) => localize(g, &a),
        _ => unreachable!("experiment subcommands handled above"),
    }
}

fn load_config(g: &Global) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(p) => Config::load(p).with_context(|| format!("reading config {}", p.display()))?,
        None => Config::default(),
    };
    if let Some(s) = g.seed {
        cfg.seeds = vec![s];
    }
    if g.strict {
        cfg.quant_blt.mode = QuantMode::Strict;
    } else if g.lax {
        cfg.quant_blt.mode = QuantMode::Lax;
    }
    Ok(cfg)
}

fn finish_report(g: &Global, suite: &SuiteReport) -> Result<bool> {
    for r in &suite.reports {
        let checked = r.measurements.iter().filter(|m| m.check.is_some()).count();
        let failed: Vec<_> = r.failures().collect();
        println!(
            "{} {}: {} checks, {} failed",
            if r.passed { "PASS" } else { "FAIL" },
            r.experiment,
            checked,
            failed.len()
        );
        for m in failed.iter().take(10) {
            println!(
                "  {} N={} l={} k={} {}: {} (want {})",
                m.name,
                opt(m.n),
                opt(m.l),
                opt(m.k),
                m.recipe,
                m.value,
                m.check.expect("failures carry checks")
            );
        }
        for f in &r.flags {
            log::info!("{}: {f}", r.experiment);
        }
    }
    if let Some(p) = &g.out {
        suite
            .save(p)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &g.csv {
        let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_csv(&suite.reports, file)?;
    }
    Ok(suite.passed)
}

fn opt(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

/// Print JSON to stdout, or write it to `--out`.
fn emit(g: &Global, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match &g.out {
        Some(p) => {
            std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?
        }
        None => writeln!(io::stdout(), "{text}")?,
    }
    Ok(())
}

fn load_seq(p: &Path) -> Result<FiniteSequence> {
    FiniteSequence::load(p).with_context(|| format!("reading sequence {}", p.display()))
}

fn single_filter(g: &Global, f: &FilterArgs) -> Result<bool> {
    let n = f.n.expect("checked by caller");
    let spec = TrapezoidSpec::new(n, f.l, f.r, f.k)?;
    let smooth = filter_smoothness(&spec);
    let bound = 10.0 * f.r as f64;
    let line = GaborGrid::new(n, 1)?;
    let half = (f.r * n) as f64 / 2.0;
    let plateau = transform_profile(&spec)
        .iter()
        .enumerate()
        .filter(|(k, _)| (line.signed(*k) as f64).abs() <= half)
        .map(|(_, v)| (v - 1.0).abs())
        .fold(0.0, f64::max);
    let mut out = json!({
        "N": n, "l": f.l, "R": f.r, "k": f.k,
        "smoothness": smooth,
        "smoothness_bound": bound,
        "plateau_error": plateau,
    });
    let mut ok = smooth <= bound;
    if f.dump.is_some() || f.census {
        let phi = phi_filter(&spec)?;
        if let Some(p) = &f.dump {
            phi.save(p)
                .with_context(|| format!("writing {}", p.display()))?;
        }
        if f.census {
            let b = match &f.input {
                Some(p) => load_seq(p)?,
                None => boxcar(*phi.grid()),
            };
            let delta = match f.delta {
                Some(d) => d,
                None => default_delta(riesz_bounds_zak(&b).lower),
            };
            let c = jump_census(&b, &phi, &phi, delta, f.k)?;
            out["census"] =
                json!({"delta": delta, "total": c.total, "first": c.first, "second": c.second});
        }
    }
    emit(g, &out)?;
    ok &= plateau <= 1e-10;
    Ok(ok)
}

fn build_kind(
    kind: Kind,
    n: usize,
    l: usize,
    seed: u64,
    budget: usize,
    base: Kind,
) -> Result<FiniteSequence> {
    let grid = GaborGrid::new(n, l)?;
    Ok(match kind {
        Kind::Boxcar => boxcar(grid),
        Kind::Random => random_unimodular(grid, seed),
        Kind::Lowbeta => {
            if l != 1 {
                bail!("lowbeta is one-variable; use --kind product for l > 1");
            }
            let opts = LowBetaOptions {
                budget,
                seed,
                ..LowBetaOptions::default()
            };
            constructions::low_beta_optimize(n, &opts)?.generator
        }
        Kind::Product => {
            if matches!(base, Kind::Product) {
                bail!("the base of a product must be boxcar, random or lowbeta");
            }
            product(&build_kind(base, n, 1, seed, budget, base)?, l)?
        }
    })
}

fn make(g: &Global, m: &MakeArgs) -> Result<bool> {
    let seed = g.seed.unwrap_or(LowBetaOptions::default().seed);
    let mut b = build_kind(m.kind, m.n, m.l, seed, m.budget, m.base)?;
    if let Some(c) = m.scale {
        b = scale_generator(&b, c)?;
    }
    match &g.out {
        Some(p) => b
            .save(p)
            .with_context(|| format!("writing {}", p.display()))?,
        None => println!("{}", b.to_json()?),
    }
    Ok(true)
}

fn bounds(g: &Global, a: &InputArgs) -> Result<bool> {
    let b = load_seq(&a.input)?;
    let z = riesz_bounds_zak(&b);
    let gram = if b.grid().zak_len() <= GRAM_LIMIT {
        Some(riesz_bounds_gram(&b)?)
    } else {
        None
    };
    let agree = gram.as_ref().map_or(true, |gr| z.agrees_with(gr, 1e-8));
    emit(
        g,
        &json!({
            "zak": [z.lower, z.upper],
            "gram": gram.map(|gr| [gr.lower, gr.upper]),
            "agree": agree,
        }),
    )?;
    Ok(agree)
}

fn localize(g: &Global, a: &LocalizeArgs) -> Result<bool> {
    let b = load_seq(&a.input)?;
    let n = b.grid().n() as f64;
    let tails = if a.tails.is_empty() {
        vec![n / 2.0, n, 2.0 * n]
    } else {
        a.tails.clone()
    };
    let tails = tails
        .into_iter()
        .map(|t| Ok(json!({"t": t, "value": tail_energy(&b, a.k, t)?})))
        .collect::<Result<Vec<_>>>()?;
    emit(
        g,
        &json!({
            "alpha": alpha(&b, a.k)?,
            "beta": beta(&b, a.k)?,
            "alpha_pq": alpha_pq(&b, a.k, a.p, a.q)?,
            "p": a.p,
            "q": a.q,
            "tails": tails,
        }),
    )?;
    Ok(true)
}
