//! Quantitative Balian-Low: tail sums over the admissible `(Q, R)` grid and
//! the jump census behind them.

use super::config::QuantMode;
use super::{run_cells, Check, Config, Context, Corpus, Experiment, ExperimentReport, Measurement};
use crate::constructions::{gaussian, GeneratorRecipe};
use crate::filters::{default_delta, jump_census, phi_filter, TrapezoidSpec};
use crate::gabor::riesz_bounds_zak;
use crate::grid::GaborGrid;
use crate::localization::{axis_mass, tail_from_mass};

/// `⌊(N/16)√(A/B)⌋`, forgiving rounding when `A = B` up to float error.
pub(crate) fn admissible_max(n: usize, a: f64, b: f64) -> usize {
    ((n as f64 / 16.0) * (a / b).sqrt() + 1e-9).floor() as usize
}

pub fn run_quant_blt(cfg: &Config, corpus: &Corpus) -> ExperimentReport {
    let mut report = ExperimentReport::new(Experiment::QuantBlt);
    let qcfg = &cfg.quant_blt;
    let mut cells: Vec<(&GeneratorRecipe, usize, bool)> = Vec::new();
    let strict = matches!(qcfg.mode, QuantMode::Strict | QuantMode::Both);
    let lax = matches!(qcfg.mode, QuantMode::Lax | QuantMode::Both);
    for r in &qcfg.recipes {
        if strict {
            cells.push((r, qcfg.strict_n, true));
        }
        if lax {
            for &n in &qcfg.lax_n {
                cells.push((r, n, false));
            }
        }
    }
    if lax {
        report.flags.push(format!(
            "lax: N in {:?} below the admissibility threshold",
            qcfg.lax_n
        ));
    }
    for &(r, n, _) in &cells {
        report.cell(n, 1, r.to_string());
    }
    run_cells(&mut report, &cells, |&(r, n, strict)| {
        let mode = if strict { "strict" } else { "lax" };
        quant_cell(r, n, strict, cfg, corpus).ctx(format!("{r} N={n} {mode}"))
    });

    let nc = qcfg.control_n;
    match GaborGrid::new(nc, 1) {
        Ok(g) => {
            report.cell(nc, 1, "gaussian");
            report.push(
                Measurement::new(
                    "control_gaussian_lower",
                    riesz_bounds_zak(&gaussian(g)).lower,
                )
                .at(nc, 1)
                .recipe("gaussian")
                .check(Check::le(cfg.tolerances.null_lower)),
            );
        }
        Err(e) => report.error("gaussian control", e),
    }

    let mins: Vec<(String, f64)> = report
        .named("qr_tail_min")
        .map(|m| {
            (
                format!("qr_tail_min/{}/N={}", m.recipe, m.n.unwrap_or(0)),
                m.value,
            )
        })
        .collect();
    report.fitted.extend(mins);
    report
}

fn quant_cell(
    r: &GeneratorRecipe,
    n: usize,
    strict: bool,
    cfg: &Config,
    corpus: &Corpus,
) -> crate::Result<Vec<Measurement>> {
    let qcfg = &cfg.quant_blt;
    let k = qcfg.k;
    let b = corpus.get(r, n)?;
    let bounds = riesz_bounds_zak(&b);
    let (a, bb) = (bounds.lower, bounds.upper);
    let tag = |m: Measurement| m.at(n, 1).axis(k).recipe(r.to_string()).seed(r.seed());
    let mut out = Vec::new();

    let threshold = 200.0 * (bb / a).sqrt();
    let admissible = Measurement::new("admissibility_ratio", n as f64 / threshold);
    out.push(tag(if strict {
        admissible.check(Check::ge(1.0 - 1e-12))
    } else {
        admissible
    }));

    let gamma = admissible_max(n, a, bb);
    let gamma = if strict { gamma } else { gamma.max(1) };
    if gamma == 0 {
        return Err(crate::Error::ParameterOutOfRange(format!(
            "no admissible (Q, R) at N = {n}"
        )));
    }
    let hb = axis_mass(&b, k)?;
    let fb = b.dft();
    let hf = axis_mass(&fb, k)?;
    let norm = b.grid().n_pow_l() as f64;
    let nf = n as f64;
    let tail_b = |s: usize| tail_from_mass(&hb, nf * s as f64 / 2.0) / norm;
    let tail_f = |s: usize| tail_from_mass(&hf, nf * s as f64 / 2.0) / norm;

    let mut min_stmt = f64::INFINITY;
    let mut min_proof = f64::INFINITY;
    for q in 1..=gamma {
        for rr in 1..=gamma {
            let qr = (q * rr) as f64;
            // Statement pairing: b-tail at NR/2, transform tail at NQ/2.
            let stmt = qr * (tail_b(rr) + tail_f(q));
            let proof = qr * (tail_b(q) + tail_f(rr));
            min_stmt = min_stmt.min(stmt);
            min_proof = min_proof.min(proof);
            let cell =
                |name: &str, v: f64| tag(Measurement::new(format!("{name}[Q={q},R={rr}]"), v));
            out.push(cell("qr_tail_statement", stmt));
            out.push(cell("qr_tail_proof", proof));
        }
    }
    let floor = Check::gt(cfg.tolerances.quant_floor);
    out.push(tag(Measurement::new("qr_tail_min_statement", min_stmt)).check(floor));
    out.push(tag(Measurement::new("qr_tail_min_proof", min_proof)).check(floor));
    out.push(tag(Measurement::new("qr_tail_min", min_stmt.min(min_proof))).check(floor));

    if strict {
        out.extend(census(&b, gamma, a, cfg)?.into_iter().map(tag));
    }
    Ok(out)
}

fn census(
    b: &crate::FiniteSequence,
    gamma: usize,
    a: f64,
    cfg: &Config,
) -> crate::Result<Vec<Measurement>> {
    let qcfg = &cfg.quant_blt;
    let g = *b.grid();
    let delta = qcfg.delta.unwrap_or_else(|| default_delta(a));
    let filters = (1..=gamma)
        .map(|r| phi_filter(&TrapezoidSpec::new(g.n(), g.l(), r, qcfg.k)?))
        .collect::<crate::Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (1..=gamma)
        .flat_map(|q| (1..=gamma).map(move |r| (q, r)))
        .collect();
    use rayon::prelude::*;
    let counts = pairs
        .par_iter()
        .map(|&(q, r)| jump_census(b, &filters[r - 1], &filters[q - 1], delta, qcfg.k))
        .collect::<crate::Result<Vec<_>>>()?;
    let total_points = g.zak_len() as f64;
    let mut out = Vec::new();
    for (&(q, r), c) in pairs.iter().zip(counts) {
        out.push(
            Measurement::new(format!("census[Q={q},R={r}]"), c.total as f64).check(Check::ge(1.0)),
        );
        out.push(Measurement::new(
            format!("census_ratio[Q={q},R={r}]"),
            c.total as f64 * (q * r) as f64 / total_points,
        ));
    }
    Ok(out)
}
