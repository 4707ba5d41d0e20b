//! Exact Zak identities and the agreement of the two Riesz-bound routes.

use num_complex::Complex64;
use rand::Rng;

use super::{run_cells, Check, Config, Context, Corpus, Experiment, ExperimentReport, Measurement};
use crate::constructions::GeneratorRecipe;
use crate::gabor::{riesz_bounds_gram, riesz_bounds_zak, DENSE_EIGEN_LIMIT};
use crate::grid::GaborGrid;
use crate::rng::derived;
use crate::seq::FiniteSequence;
use crate::zak::{
    intertwine_residual_of, zak_convolution_residual, zak_forward, zak_inverse, ZakArray,
};

const RANDOM: &str = "random_entries";

fn random_values(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn run_identities(cfg: &Config, corpus: &Corpus) -> ExperimentReport {
    let mut report = ExperimentReport::new(Experiment::Identities);
    let icfg = &cfg.identities;
    if icfg.corrupt {
        report.flags.push("corrupted Zak input".into());
    }

    let mut cells = Vec::new();
    for &n in &icfg.n_grid {
        for l in [1, 2] {
            if l == 2 && n > icfg.l2_max_n {
                continue;
            }
            for &seed in &cfg.seeds {
                cells.push((n, l, seed));
            }
        }
    }
    for &(n, l, _) in &cells {
        report.cell(n, l, RANDOM);
    }
    run_cells(&mut report, &cells, |&(n, l, seed)| {
        identity_cell(n, l, seed, cfg).ctx(format!("{RANDOM} N={n} l={l} seed={seed}"))
    });

    let mut bound_cells = Vec::new();
    for recipe in &icfg.bounds_recipes {
        for &n in &icfg.bounds_n_grid {
            if recipe.l() == 2 && n > icfg.bounds_l2_max_n {
                continue;
            }
            bound_cells.push((recipe.clone(), n));
        }
    }
    for (r, n) in &bound_cells {
        report.cell(*n, r.l(), r.to_string());
    }
    run_cells(&mut report, &bound_cells, |(recipe, n)| {
        bounds_cell(recipe, *n, cfg, corpus).ctx(format!("{recipe} N={n}"))
    });
    report
}

fn identity_cell(n: usize, l: usize, seed: u64, cfg: &Config) -> crate::Result<Vec<Measurement>> {
    let tol = &cfg.tolerances;
    let grid = GaborGrid::new(n, l)?;
    let mut rng = derived(seed, (n * 8 + l) as u64);
    let b = FiniteSequence::new(grid, random_values(&mut rng, grid.len()))?;
    let phi = FiniteSequence::new(grid, random_values(&mut rng, grid.len()))?;
    let w = ZakArray::new(grid, random_values(&mut rng, grid.zak_len()))?;

    let mut zb = zak_forward(&b);
    if cfg.identities.corrupt {
        zb.values_mut()[0] += tol.corruption;
    }
    let zf = zak_forward(&b.dft());
    let mut corrupted = zb.clone();
    corrupted.values_mut()[grid.zak_len() / 2] += tol.corruption;

    let exact = Check::le(tol.identity);
    let m = |name: &str, v: f64| {
        Measurement::new(name, v)
            .at(n, l)
            .recipe(RANDOM)
            .seed(Some(seed))
    };
    let mut out = vec![
        m("unitarity", (zb.norm_sqr() - b.norm_sqr()).abs()).check(exact),
        m("round_trip_sequence", zak_inverse(&zb).max_abs_diff(&b)?).check(exact),
        m(
            "round_trip_zak",
            zak_forward(&zak_inverse(&w)).max_abs_diff(&w),
        )
        .check(exact),
        m("intertwine_residual", intertwine_residual_of(&zb, &zf)).check(exact),
        m("convolution_residual", zak_convolution_residual(&b, &phi)?).check(exact),
        // The identity check must notice a perturbed entry.
        m(
            "control_corrupted_intertwine",
            intertwine_residual_of(&corrupted, &zf),
        )
        .check(Check::gt(tol.identity)),
    ];
    // Generic spectra have no gap at the bottom, which makes Lanczos slow;
    // the structured recipes cover the larger Gram matrices.
    if grid.zak_len() <= DENSE_EIGEN_LIMIT {
        out.extend(
            bound_gaps(&b, tol.bounds_rel)?
                .into_iter()
                .map(|x| x.at(n, l).recipe(RANDOM).seed(Some(seed))),
        );
    }
    Ok(out)
}

fn bound_gaps(b: &FiniteSequence, rel: f64) -> crate::Result<Vec<Measurement>> {
    let z = riesz_bounds_zak(b);
    let g = riesz_bounds_gram(b)?;
    let scale = z.upper.max(1.0);
    Ok(vec![
        Measurement::new("bounds_gap_lower", (z.lower - g.lower).abs() / scale)
            .check(Check::le(rel)),
        Measurement::new("bounds_gap_upper", (z.upper - g.upper).abs() / scale)
            .check(Check::le(rel)),
    ])
}

fn bounds_cell(
    recipe: &GeneratorRecipe,
    n: usize,
    cfg: &Config,
    corpus: &Corpus,
) -> crate::Result<Vec<Measurement>> {
    let b = corpus.get(recipe, n)?;
    let l = recipe.l();
    let tag = |m: Measurement| m.at(n, l).recipe(recipe.to_string()).seed(recipe.seed());
    let mut out: Vec<Measurement> = bound_gaps(&b, cfg.tolerances.bounds_rel)?
        .into_iter()
        .map(tag)
        .collect();
    let z = riesz_bounds_zak(&b);
    out.push(tag(Measurement::new("zak_lower", z.lower)));
    out.push(tag(Measurement::new("zak_upper", z.upper)));
    if !recipe.is_basis() {
        let g = riesz_bounds_gram(&b)?;
        let null = Check::le(cfg.tolerances.null_lower);
        out.push(tag(Measurement::new("control_zak_lower", z.lower)).check(null));
        out.push(tag(Measurement::new("control_gram_lower", g.lower)).check(null));
    }
    Ok(out)
}
