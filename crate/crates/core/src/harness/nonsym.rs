//! Nonsymmetric weights `α^{p,q}`: regime fits across the `N` grid, exact
//! term dropping for infinite weights, and the rearrangement inequality.

use num_complex::Complex64;
use rand::Rng;

use super::finite::{in_scope, low_beta_recipe};
use super::fit::linear_fit;
use super::quant::admissible_max;
use super::{Check, Config, Corpus, Experiment, ExperimentReport, Measurement};
use crate::constructions::GeneratorRecipe;
use crate::gabor::riesz_bounds_zak;
use crate::grid::GaborGrid;
use crate::localization::{
    alpha_pq, axis_mass, power_sum_bound, rearrangement_sides, tail_from_mass, Regime, Weight,
};
use crate::rng::derived;
use crate::seq::FiniteSequence;

const TWO: Weight = Weight::Finite(2.0);

/// Exponent of the predicted growth. With one infinite weight only the
/// finite side counts.
pub(crate) fn tau(p: Weight, q: Weight) -> f64 {
    p.reciprocal() + q.reciprocal()
}

fn pair_label(p: Weight, q: Weight) -> String {
    format!("[{p},{q}]")
}

/// Whether all mass of `s` along axis `k` lies strictly inside `|j_k| < γN/2`.
fn supported_within(s: &FiniteSequence, k: usize, gamma: usize) -> crate::Result<bool> {
    let hist = axis_mass(s, k)?;
    let t = (gamma * s.grid().n()) as f64 / 2.0;
    Ok(tail_from_mass(&hist, t) == 0.0)
}

struct Row {
    n: usize,
    alpha: f64,
    support_ok: bool,
}

pub fn run_nonsym_blt(cfg: &Config, corpus: &Corpus) -> ExperimentReport {
    let mut report = ExperimentReport::new(Experiment::NonsymBlt);
    let low_beta = low_beta_recipe(cfg);
    let l2 = cfg.finite_blt.l2_max_n;
    let k = 1;
    let recipes: Vec<&GeneratorRecipe> = cfg.recipes.iter().filter(|r| r.is_basis()).collect();

    for &(p, q) in &cfg.nonsym_blt.pq {
        let label = pair_label(p, q);
        let t = tau(p, q);
        let regime = Regime::of(t);
        for r in &recipes {
            let mut rows = Vec::new();
            for &n in &cfg.n_grid {
                if !in_scope(r, n, l2) {
                    continue;
                }
                report.cell(n, r.l(), r.to_string());
                match pq_cell(r, n, k, p, q, cfg, corpus, &mut report) {
                    Ok(row) => rows.push(row),
                    Err(e) => report.error(&format!("{r} N={n} {label}"), e),
                }
            }
            fit_rows(&mut report, r, &low_beta, &label, t, regime, &rows, cfg);
        }
    }
    lemma51(cfg, &mut report);
    report
}

#[allow(clippy::too_many_arguments)]
fn pq_cell(
    r: &GeneratorRecipe,
    n: usize,
    k: usize,
    p: Weight,
    q: Weight,
    cfg: &Config,
    corpus: &Corpus,
    report: &mut ExperimentReport,
) -> crate::Result<Row> {
    let b = corpus.get(r, n)?;
    let label = pair_label(p, q);
    let tag = |m: Measurement| m.at(n, r.l()).axis(k).recipe(r.to_string()).seed(r.seed());
    let alpha = alpha_pq(&b, k, p, q)?;
    report.push(tag(Measurement::new(format!("alpha_pq{label}"), alpha)));

    // Replace an infinite slot by 2 so both sides of the identity exist.
    let pf = if p.is_infinite() { TWO } else { p };
    let qf = if q.is_infinite() { TWO } else { q };
    let whole = alpha_pq(&b, k, pf, qf)?;
    let parts = alpha_pq(&b, k, pf, Weight::Infinite)? + alpha_pq(&b, k, Weight::Infinite, qf)?;
    report.push(
        tag(Measurement::new(
            format!("term_drop_error{}", pair_label(pf, qf)),
            (parts - whole).abs(),
        ))
        .check(Check::le(
            cfg.tolerances.term_drop_rel * whole.abs().max(1.0),
        )),
    );

    let bounds = riesz_bounds_zak(&b);
    let gamma = admissible_max(n, bounds.lower, bounds.upper);
    let support_ok = match (p.is_infinite(), q.is_infinite()) {
        (false, true) => gamma > 0 && supported_within(&b.dft(), k, gamma)?,
        (true, false) => gamma > 0 && supported_within(&b, k, gamma)?,
        _ => true,
    };
    if p.is_infinite() || q.is_infinite() {
        report.push(tag(Measurement::new(
            format!("support_precondition{label}"),
            if support_ok { 1.0 } else { 0.0 },
        )));
    }
    if gamma > 0 {
        let ps = power_sum_bound(tau(p, q), gamma as u64)?;
        report.push(tag(Measurement::new(format!("power_sum{label}"), ps.sum)));
        report.push(tag(Measurement::new(
            format!("power_sum_bound{label}"),
            ps.bound,
        )));
    }
    Ok(Row {
        n,
        alpha,
        support_ok,
    })
}

#[allow(clippy::too_many_arguments)]
fn fit_rows(
    report: &mut ExperimentReport,
    r: &GeneratorRecipe,
    low_beta: &GeneratorRecipe,
    label: &str,
    t: f64,
    regime: Regime,
    rows: &[Row],
    cfg: &Config,
) {
    let used: Vec<&Row> = rows.iter().filter(|x| x.support_ok).collect();
    let x: Vec<f64> = used
        .iter()
        .map(|row| {
            let n = row.n as f64;
            match regime {
                Regime::Log => n.ln(),
                _ => n.powf(1.0 - t),
            }
        })
        .collect();
    let y: Vec<f64> = used.iter().map(|row| row.alpha).collect();
    let Some(f) = linear_fit(&x, &y) else {
        return;
    };
    let key = format!("fit{label}/{r}");
    report.fitted.insert(format!("{key}/slope"), f.slope);
    report.fitted.insert(format!("{key}/r2"), f.r2);
    let tag = |m: Measurement| m.recipe(r.to_string()).seed(r.seed());
    report.push(
        tag(Measurement::new(
            format!("fit_slope{label}({regime})"),
            f.slope,
        ))
        .check_if(regime == Regime::Log, Check::gt(0.0)),
    );
    report.push(
        tag(Measurement::new(format!("fit_r2{label}({regime})"), f.r2)).check_if(
            regime == Regime::Log && r == low_beta,
            Check::ge(cfg.tolerances.r2_min),
        ),
    );
}

trait CheckIf {
    fn check_if(self, cond: bool, c: Check) -> Self;
}

impl CheckIf for Measurement {
    fn check_if(self, cond: bool, c: Check) -> Self {
        if cond {
            self.check(c)
        } else {
            self
        }
    }
}

/// Randomized instances of the rearrangement inequality in its `2^{1/a}` form.
fn lemma51(cfg: &Config, report: &mut ExperimentReport) {
    let (lo, hi) = cfg.nonsym_blt.lemma51_n;
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let rel = cfg.tolerances.lemma51_rel;
    for i in 0..cfg.nonsym_blt.lemma51_instances {
        let mut rng = derived(seed, 1_000 + i as u64);
        let n = rng.random_range(lo..=hi);
        // N > 200ν; fall back to ν = 1 when the range is too short.
        let nu_max = ((n as f64 - 1.0) / 200.0).clamp(1.0, 2.0);
        let nu = rng.random_range(1.0..=nu_max);
        let gamma = ((n as f64) / (16.0 * nu)).floor() as u64;
        let a = 1.0 - rng.random::<f64>();
        let width = rng.random_range(0.25..8.0);
        let grid = match GaborGrid::new(n, 1) {
            Ok(g) => g,
            Err(e) => {
                report.error(&format!("lemma51 #{i}"), e);
                continue;
            }
        };
        let nf = n as f64;
        let b = FiniteSequence::from_fn(grid, |j| {
            let env = (-std::f64::consts::PI * (j[0] as f64 / (width * nf)).powi(2)).exp();
            env * Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        match rearrangement_sides(&b, 1, a, gamma) {
            Ok((lhs, rhs)) => report.push(
                Measurement::new("lemma51_excess", lhs - rhs)
                    .at(n, 1)
                    .axis(1)
                    .recipe(format!("envelope(width={width:.3},a={a:.4},gamma={gamma})"))
                    .seed(Some(seed))
                    .check(Check::le(rel * rhs.abs())),
            ),
            Err(e) => report.error(&format!("lemma51 #{i}"), e),
        }
    }
}
