//! Trapezoid filters: the smoothness lemma, the plateau, agreement with the
//! truncated time-domain periodization, and spot checks of the
//! convolution-smoothness bound.

use rand::Rng;

use super::{run_cells, Check, Config, Context, Corpus, Experiment, ExperimentReport, Measurement};
use crate::constructions::{boxcar, random_unimodular};
use crate::filters::{
    axis_profile, default_delta, filter_smoothness, jump_census, phi_filter,
    phi_time_domain_oracle, transform_profile, TrapezoidSpec,
};
use crate::gabor::riesz_bounds_zak;
use crate::grid::GaborGrid;
use crate::rng::derived;
use crate::zak::zak_forward;
use crate::TAU_ID;

fn r_values(n: usize, cfg: &Config) -> Vec<usize> {
    let f = &cfg.filters;
    let mut rs: Vec<usize> = f
        .r_values
        .iter()
        .copied()
        .chain([n / f.r_divisor])
        .collect();
    rs.sort_unstable();
    rs.dedup();
    rs.retain(|&r| r >= 1 && 2 * r < n);
    rs
}

pub fn run_filters(cfg: &Config, _corpus: &Corpus) -> ExperimentReport {
    let mut report = ExperimentReport::new(Experiment::Filters);
    let f = &cfg.filters;
    let mut line_cells = Vec::new();
    let mut full_cells = Vec::new();
    for &n in &f.n_grid {
        for r in r_values(n, cfg) {
            line_cells.push((n, r));
            for &l in &f.l_values {
                report.cell(n, l, format!("phi(R={r})"));
                let direct = GaborGrid::entry_count(n, l) <= f.spot_max_entries as u128;
                if direct {
                    full_cells.push((n, r, l));
                } else {
                    report.flags.push(format!(
                        "N={n} l={l} R={r}: above {} entries, checked through the axis profile only",
                        f.spot_max_entries
                    ));
                }
            }
        }
    }
    run_cells(&mut report, &line_cells, |&(n, r)| {
        line_cell(n, r, cfg).ctx(format!("phi N={n} R={r}"))
    });
    run_cells(&mut report, &full_cells, |&(n, r, l)| {
        full_cell(n, r, l, cfg).ctx(format!("phi N={n} R={r} l={l}"))
    });
    report
}

/// Checks that depend only on the one-variable profile, reported for every `l`.
fn line_cell(n: usize, r: usize, cfg: &Config) -> crate::Result<Vec<Measurement>> {
    let tol = &cfg.tolerances;
    let spec = TrapezoidSpec::new(n, 1, r, 1)?;
    let hat = transform_profile(&spec);
    let line = GaborGrid::new(n, 1)?;
    let half = (r * n) as f64 / 2.0;
    let plateau = hat
        .iter()
        .enumerate()
        .filter(|(k, _)| (line.signed(*k) as f64).abs() <= half)
        .map(|(_, v)| (v - 1.0).abs())
        .fold(0.0, f64::max);
    let lo = hat.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = hat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let oracle = phi_time_domain_oracle(&spec, cfg.filters.oracle_periods)?
        .max_abs_diff(&axis_profile(&spec))?;
    let smooth = filter_smoothness(&spec);
    let bound = tol.smoothness_factor * r as f64;

    let recipe = format!("phi(R={r})");
    let mut out = Vec::new();
    for &l in &cfg.filters.l_values {
        for k in 1..=l {
            out.push(
                Measurement::new("smoothness", smooth)
                    .at(n, l)
                    .axis(k)
                    .recipe(&recipe)
                    .check(Check::le(bound)),
            );
        }
    }
    let m = |name: &str, v: f64| Measurement::new(name, v).at(n, 1).axis(1).recipe(&recipe);
    out.push(m("smoothness_over_r", smooth / r as f64));
    out.push(m("plateau_error", plateau).check(Check::le(tol.plateau)));
    out.push(m("transform_min", lo).check(Check::ge(-TAU_ID)));
    out.push(m("transform_max", hi).check(Check::le(1.0 + TAU_ID)));
    out.push(m("oracle_error", oracle).check(Check::le(tol.oracle)));
    Ok(out)
}

/// Checks on the filter built on the full `l`-variable grid.
fn full_cell(n: usize, r: usize, l: usize, cfg: &Config) -> crate::Result<Vec<Measurement>> {
    let tol = &cfg.tolerances;
    let grid = GaborGrid::new(n, l)?;
    let recipe = format!("phi(R={r})");
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let b = random_unimodular(grid, seed);
    let big_b = riesz_bounds_zak(&b).upper;
    let half = (r * n) as f64 / 2.0;
    let mut out = Vec::new();
    let mut phis = Vec::new();
    let mut smooth = Vec::new();
    for k in 1..=l {
        let spec = TrapezoidSpec::new(n, l, r, k)?;
        let phi = phi_filter(&spec)?;
        let s = phi.delta_l1_norm(k)?;
        let hat = phi.dft();
        let mut plateau = 0.0f64;
        for (idx, v) in hat.values().iter().enumerate() {
            let j = grid.signed(grid.unravel(idx)[k - 1]) as f64;
            if j.abs() <= half {
                plateau = plateau.max((v - 1.0).norm());
            }
        }
        let m = |name: &str, v: f64| Measurement::new(name, v).at(n, l).axis(k).recipe(&recipe);
        out.push(m("direct_smoothness", s).check(Check::le(tol.smoothness_factor * r as f64)));
        out.push(
            m(
                "direct_vs_profile_smoothness",
                (s - filter_smoothness(&spec)).abs(),
            )
            .check(Check::le(1e-9 * s.max(1.0))),
        );
        out.push(m("direct_plateau_error", plateau).check(Check::le(tol.plateau)));

        let census = jump_census(&boxcar(grid), &phi, &phi, default_delta(1.0), k)?;
        out.push(m("boxcar_census", census.total as f64).recipe(format!("boxcar*phi(R={r})")));
        smooth.push(s);
        phis.push(zak_forward(&b.convolve(&phi)?));
    }

    // Lemma 4.1 spot checks on random (m, n, t, k).
    let mut rng = derived(seed, (n * 1_000 + r * 10 + l) as u64);
    let nf = n as f64;
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for _ in 0..cfg.filters.spot_checks {
        let k = rng.random_range(1..=l);
        let m: Vec<i64> = (0..l).map(|_| rng.random_range(0..n as i64)).collect();
        let nn: Vec<i64> = (0..l).map(|_| rng.random_range(0..n as i64)).collect();
        let t = rng.random_range(1..=n as i64) * if rng.random::<bool>() { 1 } else { -1 };
        let mut shifted = m.clone();
        shifted[k - 1] += t;
        let z = &phis[k - 1];
        let lhs = (z.eval(&shifted, &nn) - z.eval(&m, &nn)).norm();
        let rhs = big_b.sqrt() * t.abs() as f64 / nf * smooth[k - 1];
        let excess = lhs - rhs;
        worst = worst.max(excess);
        if excess > tol.lemma41_slack {
            violations += 1;
        }
    }
    let m = |name: &str, v: f64| {
        Measurement::new(name, v)
            .at(n, l)
            .recipe(format!("random_unimodular({seed})*phi(R={r})"))
            .seed(Some(seed))
    };
    out.push(m("lemma41_worst_excess", worst).check(Check::le(tol.lemma41_slack)));
    out.push(m("lemma41_violations", violations as f64).check(Check::le(0.0)));
    Ok(out)
}
