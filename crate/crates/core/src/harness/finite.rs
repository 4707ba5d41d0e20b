//! Finite Balian-Low growth: boxcar contrast line, the sandwich between `α`
//! and `β`, the low-`β` family and the corpus-wide lower side.

use super::fit::linear_fit;
use super::{run_cells, Check, Config, Context, Corpus, Experiment, ExperimentReport, Measurement};
use crate::constructions::{boxcar, GeneratorRecipe};
use crate::grid::GaborGrid;
use crate::localization::{alpha, beta_of_zak, sandwich_check, BoundaryWrap};
use crate::zak::zak_forward;

/// The first low-`β` recipe of the corpus, or the default one.
pub(crate) fn low_beta_recipe(cfg: &Config) -> GeneratorRecipe {
    cfg.recipes
        .iter()
        .find(|r| matches!(r, GeneratorRecipe::LowBeta { .. }))
        .cloned()
        .unwrap_or(GeneratorRecipe::LowBeta { options: None })
}

pub(crate) fn in_scope(recipe: &GeneratorRecipe, n: usize, l2_max_n: usize) -> bool {
    recipe.l() < 2 || n <= l2_max_n
}

pub fn run_finite_blt(cfg: &Config, corpus: &Corpus) -> ExperimentReport {
    let mut report = ExperimentReport::new(Experiment::FiniteBlt);
    boxcar_line(cfg, &mut report);
    sandwich(cfg, corpus, &mut report);
    growth(cfg, corpus, &mut report);
    low_beta_family(cfg, corpus, &mut report);
    products(cfg, corpus, &mut report);
    report
}

fn boxcar_line(cfg: &Config, report: &mut ExperimentReport) {
    let fcfg = &cfg.finite_blt;
    let mut cells = Vec::new();
    for &l in &fcfg.boxcar_l {
        for &n in &fcfg.boxcar_n {
            cells.push((n, l));
            report.cell(n, l, "boxcar");
        }
    }
    let tol = cfg.tolerances.boxcar_beta;
    // Sequential: the largest cells hold 2^24 entries.
    for &(n, l) in &cells {
        let res = (|| {
            let z = zak_forward(&boxcar(GaborGrid::new(n, l)?));
            let mut out = Vec::new();
            for k in 1..=l {
                let b = beta_of_zak(&z, k, BoundaryWrap::Quasiperiodic)?;
                let cyclic = beta_of_zak(&z, k, BoundaryWrap::Cyclic)?;
                let m = |name: &str, v: f64| {
                    Measurement::new(name, v).at(n, l).axis(k).recipe("boxcar")
                };
                out.push(m("beta", b));
                out.push(m("boxcar_beta_error", (b - 2.0 * n as f64).abs()).check(Check::le(tol)));
                out.push(m("beta_cyclic_wrap", cyclic));
            }
            Ok::<_, crate::Error>(out)
        })();
        match res {
            Ok(ms) => report.measurements.extend(ms),
            Err(e) => report.error(&format!("boxcar N={n} l={l}"), e),
        }
    }
}

fn sandwich(cfg: &Config, corpus: &Corpus, report: &mut ExperimentReport) {
    let fcfg = &cfg.finite_blt;
    let mut cells = Vec::new();
    for r in &cfg.recipes {
        for &n in &fcfg.sandwich_n {
            if in_scope(r, n, fcfg.l2_max_n) {
                cells.push((r, n));
                report.cell(n, r.l(), r.to_string());
            }
        }
    }
    let slack = Check::ge(-cfg.tolerances.sandwich_slack);
    run_cells(report, &cells, |&(r, n)| {
        let ctx = format!("{r} N={n}");
        let b = corpus.get(r, n).ctx(&ctx)?;
        let mut out = Vec::new();
        for k in 1..=r.l() {
            let rep = sandwich_check(&b, k).ctx(&ctx)?;
            out.push(
                Measurement::new("sandwich_slack", rep.slack())
                    .at(n, r.l())
                    .axis(k)
                    .recipe(r.to_string())
                    .seed(r.seed())
                    .check(slack),
            );
        }
        Ok(out)
    });
}

struct Growth {
    n: usize,
    basis: bool,
    beta: f64,
    alpha: f64,
}

fn growth(cfg: &Config, corpus: &Corpus, report: &mut ExperimentReport) {
    let l2 = cfg.finite_blt.l2_max_n;
    let floor = Check::ge(cfg.tolerances.beta_log_floor);
    let mut cells = Vec::new();
    for r in &cfg.recipes {
        for &n in &cfg.n_grid {
            if in_scope(r, n, l2) && n >= 2 {
                cells.push((r, n));
                report.cell(n, r.l(), r.to_string());
            }
        }
    }
    let results: Vec<Vec<Growth>> = {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(r, n)| {
                let ctx = format!("{r} N={n}");
                let b = corpus.get(r, n).ctx(&ctx)?;
                let z = zak_forward(&b);
                (1..=r.l())
                    .map(|k| {
                        Ok(Growth {
                            n,
                            basis: r.is_basis(),
                            beta: beta_of_zak(&z, k, BoundaryWrap::Quasiperiodic).ctx(&ctx)?,
                            alpha: alpha(&b, k).ctx(&ctx)?,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .zip(&cells)
            .filter_map(|(res, (r, n))| match res {
                Ok(v) => Some(v),
                Err((ctx, e)) => {
                    log::warn!("{r} N={n}: {e}");
                    report.error(&ctx, e);
                    None
                }
            })
            .collect()
    };
    let mut per_n: Vec<(usize, f64, f64)> = Vec::new();
    for ((r, _), gs) in cells.iter().zip(&results) {
        for (k, g) in gs.iter().enumerate() {
            let ln = (g.n as f64).ln();
            let m = |name: &str, v: f64| {
                Measurement::new(name, v)
                    .at(g.n, r.l())
                    .axis(k + 1)
                    .recipe(r.to_string())
                    .seed(r.seed())
            };
            report.push(m("beta", g.beta));
            report.push(m("alpha", g.alpha));
            if g.basis {
                report.push(m("beta_over_log", g.beta / ln).check(floor));
                report.push(m("alpha_over_log", g.alpha / ln));
                match per_n.iter_mut().find(|e| e.0 == g.n) {
                    Some(e) => {
                        e.1 = e.1.min(g.beta / ln);
                        e.2 = e.2.min(g.alpha / ln);
                    }
                    None => per_n.push((g.n, g.beta / ln, g.alpha / ln)),
                }
            }
        }
    }
    per_n.sort_by_key(|e| e.0);
    for &(n, b, _) in &per_n {
        report.push(
            Measurement::new("corpus_min_beta_over_log", b)
                .at(n, 1)
                .recipe("corpus"),
        );
    }
    // The corpus minimum must not decay along the grid.
    for w in per_n.windows(2) {
        report.push(
            Measurement::new("corpus_min_step", w[1].1 - w[0].1)
                .at(w[1].0, 1)
                .recipe("corpus")
                .check(Check::ge(0.0)),
        );
    }
    if let Some(c) = per_n.iter().map(|e| e.1).reduce(f64::min) {
        report.fitted.insert("c_beta_over_log".into(), c);
        report.push(
            Measurement::new("c_beta_over_log", c)
                .recipe("corpus")
                .check(Check::gt(0.0)),
        );
    }
    if let Some(c) = per_n.iter().map(|e| e.2).reduce(f64::min) {
        report.fitted.insert("c_alpha_over_log".into(), c);
        report.push(
            Measurement::new("c_alpha_over_log", c)
                .recipe("corpus")
                .check(Check::gt(0.0)),
        );
    }
}

fn low_beta_family(cfg: &Config, corpus: &Corpus, report: &mut ExperimentReport) {
    let recipe = low_beta_recipe(cfg);
    let name = recipe.to_string();
    let mut ns: Vec<usize> = cfg.n_grid.iter().copied().filter(|&n| n >= 2).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut xs = Vec::new();
    let mut betas = Vec::new();
    let mut alphas = Vec::new();
    for &n in &ns {
        let b = match corpus.get(&recipe, n) {
            Ok(b) => b,
            Err(e) => {
                report.error(&format!("{name} N={n}"), e);
                continue;
            }
        };
        let z = zak_forward(&b);
        let (be, al) = match (
            beta_of_zak(&z, 1, BoundaryWrap::Quasiperiodic),
            alpha(&b, 1),
        ) {
            (Ok(be), Ok(al)) => (be, al),
            (Err(e), _) | (_, Err(e)) => {
                report.error(&format!("{name} N={n}"), e);
                continue;
            }
        };
        let m = |nm: &str, v: f64| {
            Measurement::new(nm, v)
                .at(n, 1)
                .axis(1)
                .recipe(name.clone())
        };
        report.push(m("low_beta_beta", be));
        report.push(m("low_beta_beta_minus_boxcar", be - 2.0 * n as f64).check(Check::lt(0.0)));
        report.push(m("low_beta_alpha_over_log", al / (n as f64).ln()));
        xs.push((n as f64).ln());
        betas.push(be);
        alphas.push(al);
    }
    let ratios: Vec<f64> = xs.iter().zip(&betas).map(|(x, b)| b / x).collect();
    let Some(max) = ratios.iter().copied().reduce(f64::max) else {
        return;
    };
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let band = max / min;
    report.fitted.insert("C_star".into(), max);
    report.fitted.insert("low_beta_band".into(), band);
    report.push(
        Measurement::new("low_beta_band", band)
            .recipe(name.clone())
            .check(Check::le(cfg.tolerances.band_factor)),
    );
    if let Some(f) = linear_fit(&xs, &betas) {
        report.fitted.insert("low_beta_log_slope".into(), f.slope);
        report
            .fitted
            .insert("low_beta_log_intercept".into(), f.intercept);
        report.fitted.insert("low_beta_log_r2".into(), f.r2);
        report.push(
            Measurement::new("low_beta_log_slope", f.slope)
                .recipe(name.clone())
                .check(Check::ge(0.0)),
        );
    }
    let alpha_max = xs
        .iter()
        .zip(&alphas)
        .map(|(x, a)| a / x)
        .fold(0.0, f64::max);
    report.fitted.insert("C_alpha_over_log".into(), alpha_max);
}

fn products(cfg: &Config, corpus: &Corpus, report: &mut ExperimentReport) {
    let bases: Vec<GeneratorRecipe> = cfg
        .recipes
        .iter()
        .filter(|r| {
            matches!(
                r,
                GeneratorRecipe::LowBeta { .. } | GeneratorRecipe::RandomUnimodular { l: 1, .. }
            )
        })
        .cloned()
        .collect();
    let mut cells = Vec::new();
    for base in &bases {
        for &n in &cfg.finite_blt.product_n {
            cells.push((base, n));
            report.cell(n, 2, format!("product({base},2)"));
        }
    }
    let tol = Check::le(cfg.tolerances.product_beta);
    run_cells(report, &cells, |&(base, n)| {
        let ctx = format!("product({base},2) N={n}");
        let b1 = corpus.get(base, n).ctx(&ctx)?;
        let prod = GeneratorRecipe::Product {
            base: Box::new(base.clone()),
            l: 2,
        };
        let b2 = corpus.get(&prod, n).ctx(&ctx)?;
        let one = beta_of_zak(&zak_forward(&b1), 1, BoundaryWrap::Quasiperiodic).ctx(&ctx)?;
        let z2 = zak_forward(&b2);
        let mut out = Vec::new();
        for k in 1..=2 {
            let two = beta_of_zak(&z2, k, BoundaryWrap::Quasiperiodic).ctx(&ctx)?;
            out.push(
                Measurement::new("product_beta_error", (two - one).abs())
                    .at(n, 2)
                    .axis(k)
                    .recipe(prod.to_string())
                    .seed(prod.seed())
                    .check(tol),
            );
        }
        Ok(out)
    });
}
