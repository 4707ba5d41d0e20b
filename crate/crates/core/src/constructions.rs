//! Generator factories.
//!
//! Besides the boxcar, random unimodular-Zak generators and tensor products,
//! this module builds a one-variable generator with small `β`. It writes the
//! Zak transform as `W = e^{2πiθ}` over real phases `θ` on `S_N²`, so the
//! generator is orthonormal for every `θ`, and minimizes
//!
//! `β(θ) = Σ_edges 2 − 2cos(2π x_e)`
//!
//! where `x_e` is the phase step along a lattice edge of the torus, with the
//! quasiperiodic twist `n/N` added on the seam `m = N−1 → 0`. The twist forces
//! one vortex, whose energy grows like `log N`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GaborGrid;
use crate::rng::{derived, seeded};
use crate::seq::FiniteSequence;
use crate::zak::{zak_inverse, ZakArray};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Indicator of `{0..N−1}^l`. Its Zak transform is identically 1.
pub fn boxcar(grid: GaborGrid) -> FiniteSequence {
    let n = grid.n() as i64;
    FiniteSequence::from_fn(grid, |j| {
        real(if j.iter().all(|c| (0..n).contains(c)) {
            1.0
        } else {
            0.0
        })
    })
    .with_label("boxcar")
}

/// The constant sequence `c`.
pub fn constant(grid: GaborGrid, c: Complex64) -> FiniteSequence {
    FiniteSequence::new(grid, vec![c; grid.len()])
        .expect("length matches grid")
        .with_label("constant")
}

/// Sampled Gaussian `e^{−π |j/N|²}` on signed indices. Both it and its
/// transform are concentrated, so it cannot generate a Riesz basis.
pub fn gaussian(grid: GaborGrid) -> FiniteSequence {
    let n = grid.n() as f64;
    FiniteSequence::from_fn(grid, |j| {
        let r2: f64 = j.iter().map(|&c| (c as f64 / n).powi(2)).sum();
        real((-PI * r2).exp())
    })
    .with_label("gaussian")
}

/// Pull back a Zak array of i.i.d. uniform phases.
pub fn random_unimodular(grid: GaborGrid, seed: u64) -> FiniteSequence {
    let mut rng = seeded(seed);
    let w = (0..grid.zak_len())
        .map(|_| Complex64::from_polar(1.0, TAU * rng.random::<f64>()))
        .collect();
    zak_inverse(&ZakArray::new(grid, w).expect("length matches grid"))
        .with_label(format!("random_unimodular(seed={seed})"))
}

/// `b_l(j) = b(j_1) ⋯ b(j_l)` for a one-variable `b`.
pub fn product(b: &FiniteSequence, l: usize) -> Result<FiniteSequence> {
    let g = b.grid();
    if g.l() != 1 {
        return Err(Error::InvalidGrid(format!(
            "product base must have l = 1, got l = {}",
            g.l()
        )));
    }
    let target = g.with_l(l)?;
    let mut values = vec![real(1.0); target.len()];
    for (idx, v) in values.iter_mut().enumerate() {
        for axis in 0..l {
            *v *= b.values()[target.component(idx, axis)];
        }
    }
    let label = format!("product({},{l})", b.label().unwrap_or("b"));
    Ok(FiniteSequence::new(target, values)?.with_label(label))
}

/// `c·b` for a positive finite `c`.
pub fn scale_generator(b: &FiniteSequence, c: f64) -> Result<FiniteSequence> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidScale(c));
    }
    Ok(b.scale(real(c)))
}

/// `β` of `W = e^{2πiθ}` on `S_N²`, with `θ` stored `m`-major.
pub fn phase_beta(theta: &[f64], n: usize) -> f64 {
    let mut total = 0.0;
    for_each_edge(theta, n, |_, _, x| total += 2.0 - 2.0 * (TAU * x).cos());
    total
}

/// [`phase_beta`] and its gradient in `θ`.
pub fn phase_beta_grad(theta: &[f64], n: usize, grad: &mut [f64]) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut total = 0.0;
    for_each_edge(theta, n, |a, b, x| {
        let (s, c) = (TAU * x).sin_cos();
        total += 2.0 - 2.0 * c;
        let dx = 2.0 * TAU * s;
        grad[b] += dx;
        grad[a] -= dx;
    });
    total
}

/// Visit every edge `(a, b)` of the twisted torus with its phase step
/// `x = θ_b − θ_a (+ n/N on the seam)`.
fn for_each_edge(theta: &[f64], n: usize, mut f: impl FnMut(usize, usize, f64)) {
    debug_assert_eq!(theta.len(), n * n);
    let nf = n as f64;
    for m in 0..n {
        let m_next = if m + 1 == n { 0 } else { m + 1 };
        for k in 0..n {
            let a = m * n + k;
            let twist = if m + 1 == n { k as f64 / nf } else { 0.0 };
            let b = m_next * n + k;
            f(a, b, theta[b] - theta[a] + twist);
            let c = m * n + if k + 1 == n { 0 } else { k + 1 };
            f(a, c, theta[c] - theta[a]);
        }
    }
}

/// A phase field with one vortex of winding +1 near `(N/2, N/2)` that obeys
/// the quasiperiodic seam condition: the phase of the Zak transform of a
/// sampled Gaussian, offset by half a sample so its zero falls between
/// lattice points.
pub fn vortex_phase(n: usize) -> Vec<f64> {
    let grid = GaborGrid::new(n, 1).expect("one-variable grid");
    let nf = n as f64;
    let g = FiniteSequence::from_fn(grid, |j| {
        real((-PI * ((j[0] as f64 + 0.5) / nf).powi(2)).exp())
    });
    crate::zak::zak_forward(&g)
        .values()
        .iter()
        .map(|v| if v.norm() > 0.0 { v.arg() / TAU } else { 0.0 })
        .collect()
}

/// Settings for [`low_beta_optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowBetaOptions {
    /// Gradient iterations per restart.
    pub budget: usize,
    /// Number of starts: flat, vortex, then perturbed vortices.
    pub restarts: usize,
    pub seed: u64,
    /// Amplitude of the uniform phase noise added to perturbed starts.
    pub noise: f64,
}

impl Default for LowBetaOptions {
    fn default() -> Self {
        Self {
            budget: 3000,
            restarts: 3,
            seed: 0x10b,
            noise: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowBetaResult {
    pub generator: FiniteSequence,
    pub theta: Vec<f64>,
    pub beta: f64,
    /// Index of the winning start.
    pub restart: usize,
    /// Final `β` of every start, in start order.
    pub restart_betas: Vec<f64>,
}

fn start_phase(n: usize, index: usize, opts: &LowBetaOptions) -> Vec<f64> {
    match index {
        0 => vec![0.0; n * n],
        1 => vortex_phase(n),
        i => {
            let mut rng = derived(opts.seed, i as u64);
            vortex_phase(n)
                .into_iter()
                .map(|t| t + opts.noise * rng.random_range(-1.0..1.0))
                .collect()
        }
    }
}

/// Nesterov-accelerated gradient descent with gradient-based adaptive restart
/// and step `1/L`, `L = 64π²` bounding the Hessian.
fn descend(mut theta: Vec<f64>, n: usize, budget: usize) -> (Vec<f64>, f64) {
    let step = 1.0 / (64.0 * PI * PI);
    let len = theta.len();
    let mut prev = theta.clone();
    let mut y = theta.clone();
    let mut grad = vec![0.0; len];
    let mut t = 1.0f64;
    for _ in 0..budget {
        phase_beta_grad(&y, n, &mut grad);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-10 {
            break;
        }
        prev.copy_from_slice(&theta);
        for i in 0..len {
            theta[i] = y[i] - step * grad[i];
        }
        // Restart the momentum when it points uphill.
        let uphill: f64 = (0..len).map(|i| grad[i] * (theta[i] - prev[i])).sum();
        if uphill > 0.0 {
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mu = (t - 1.0) / t_next;
        for i in 0..len {
            y[i] = theta[i] + mu * (theta[i] - prev[i]);
        }
        t = t_next;
    }
    let beta = phase_beta(&theta, n);
    (theta, beta)
}

/// Minimize `β` over unimodular Zak transforms on the `N`-grid.
pub fn low_beta_optimize(n: usize, opts: &LowBetaOptions) -> Result<LowBetaResult> {
    if n < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "low-beta needs N >= 2, got {n}"
        )));
    }
    if opts.restarts == 0 {
        return Err(Error::ParameterOutOfRange(
            "at least one restart is required".into(),
        ));
    }
    let grid = GaborGrid::new(n, 1)?;
    let runs: Vec<(Vec<f64>, f64)> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| descend(start_phase(n, i, opts), n, opts.budget))
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.1 < runs[best].1 {
            best = i;
        }
    }
    let restart_betas = runs.iter().map(|r| r.1).collect();
    let (theta, beta) = runs.into_iter().nth(best).expect("nonempty");
    let w = theta
        .iter()
        .map(|&t| Complex64::from_polar(1.0, TAU * t))
        .collect();
    let b = zak_inverse(&ZakArray::new(grid, w)?);
    log::debug!("low-beta N={n}: beta={beta:.6} from start {best}");
    Ok(LowBetaResult {
        generator: b.with_label("low_beta"),
        theta,
        beta,
        restart: best,
        restart_betas,
    })
}

/// [`low_beta_optimize`] with default settings and the given budget.
pub fn low_beta_generator_1d(n: usize, budget: usize) -> Result<FiniteSequence> {
    let opts = LowBetaOptions {
        budget,
        ..LowBetaOptions::default()
    };
    Ok(low_beta_optimize(n, &opts)?.generator)
}

/// A reproducible description of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorRecipe {
    Boxcar {
        l: usize,
    },
    RandomUnimodular {
        l: usize,
        seed: u64,
    },
    /// One-variable low-`β` generator.
    LowBeta {
        #[serde(default)]
        options: Option<LowBetaOptions>,
    },
    Product {
        base: Box<GeneratorRecipe>,
        l: usize,
    },
    Scaled {
        base: Box<GeneratorRecipe>,
        scale: f64,
    },
    /// Not a Riesz-basis generator; used as a negative control.
    AllOnes {
        l: usize,
    },
    /// Not a Riesz-basis generator; used as a negative control.
    Gaussian {
        l: usize,
    },
}

impl GeneratorRecipe {
    pub fn l(&self) -> usize {
        match self {
            Self::Boxcar { l }
            | Self::RandomUnimodular { l, .. }
            | Self::Product { l, .. }
            | Self::AllOnes { l }
            | Self::Gaussian { l } => *l,
            Self::LowBeta { .. } => 1,
            Self::Scaled { base, .. } => base.l(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::RandomUnimodular { seed, .. } => Some(*seed),
            Self::LowBeta { options } => Some(options.unwrap_or_default().seed),
            Self::Product { base, .. } | Self::Scaled { base, .. } => base.seed(),
            _ => None,
        }
    }

    /// Whether the recipe is expected to yield a Riesz-basis generator.
    pub fn is_basis(&self) -> bool {
        match self {
            Self::AllOnes { .. } | Self::Gaussian { .. } => false,
            Self::Product { base, .. } | Self::Scaled { base, .. } => base.is_basis(),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Product { base, l } => {
                if base.l() != 1 {
                    return Err(Error::Config("product base must be one-variable".into()));
                }
                if *l == 0 {
                    return Err(Error::Config("product needs l >= 1".into()));
                }
                base.validate()
            }
            Self::Scaled { base, scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidScale(*scale));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, n: usize) -> Result<FiniteSequence> {
        self.validate()?;
        let seq = match self {
            Self::Boxcar { l } => boxcar(GaborGrid::new(n, *l)?),
            Self::RandomUnimodular { l, seed } => random_unimodular(GaborGrid::new(n, *l)?, *seed),
            Self::LowBeta { options } => {
                low_beta_optimize(n, &options.unwrap_or_default())?.generator
            }
            Self::Product { base, l } => product(&base.build(n)?, *l)?,
            Self::Scaled { base, scale } => scale_generator(&base.build(n)?, *scale)?,
            Self::AllOnes { l } => constant(GaborGrid::new(n, *l)?, real(1.0)),
            Self::Gaussian { l } => gaussian(GaborGrid::new(n, *l)?),
        };
        Ok(seq.with_label(self.to_string()))
    }
}

impl fmt::Display for GeneratorRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Boxcar { .. } => f.write_str("boxcar"),
            Self::RandomUnimodular { seed, .. } => write!(f, "random_unimodular({seed})"),
            Self::LowBeta { .. } => f.write_str("low_beta"),
            Self::Product { base, l } => write!(f, "product({base},{l})"),
            Self::Scaled { base, scale } => write!(f, "scaled({base},{scale})"),
            Self::AllOnes { .. } => f.write_str("all_ones"),
            Self::Gaussian { .. } => f.write_str("gaussian"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::{is_ab_riesz_basis, riesz_bounds_gram, riesz_bounds_zak};
    use crate::localization::{beta, beta_of_zak, BoundaryWrap};
    use crate::zak::zak_forward;
    use crate::TAU_ID;

    #[test]
    fn boxcar_examples() {
        let b = boxcar(GaborGrid::new(2, 1).unwrap());
        let want: Vec<Complex64> = [1.0, 1.0, 0.0, 0.0].iter().map(|&x| real(x)).collect();
        assert_eq!(b.values(), want.as_slice());
        let b2 = boxcar(GaborGrid::new(3, 2).unwrap());
        assert!(zak_forward(&b2)
            .values()
            .iter()
            .all(|v| (v - 1.0).norm() < 1e-13));
        for k in 1..=2 {
            assert!((beta(&b2, k).unwrap() - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn random_unimodular_examples() {
        let g = GaborGrid::new(4, 1).unwrap();
        let a = random_unimodular(g, 1);
        assert!(zak_forward(&a)
            .values()
            .iter()
            .all(|v| (v.norm() - 1.0).abs() < 1e-10));
        let r = riesz_bounds_gram(&a).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-8 && (r.upper - 1.0).abs() < 1e-8);
        let b = random_unimodular(g, 2);
        assert!(a.max_abs_diff(&b).unwrap() > 0.1);
        assert_eq!(random_unimodular(g, 1), a);
    }

    #[test]
    fn product_factorizes_the_zak_transform() {
        let g = GaborGrid::new(3, 1).unwrap();
        let b = random_unimodular(g, 5).scale(real(0.7));
        let b2 = product(&b, 2).unwrap();
        let z1 = zak_forward(&b);
        let z2 = zak_forward(&b2);
        for m0 in 0..3i64 {
            for m1 in 0..3i64 {
                for n0 in 0..3i64 {
                    for n1 in 0..3i64 {
                        let want = z1.eval(&[m0], &[n0]) * z1.eval(&[m1], &[n1]);
                        assert!((z2.eval(&[m0, m1], &[n0, n1]) - want).norm() < 1e-12);
                    }
                }
            }
        }
        assert!(product(&b2, 2).is_err());
    }

    #[test]
    fn product_of_boxcar_is_boxcar() {
        let g = GaborGrid::new(3, 1).unwrap();
        let p = product(&boxcar(g), 2).unwrap();
        assert_eq!(p.values(), boxcar(g.with_l(2).unwrap()).values());
    }

    #[test]
    fn product_commutes_with_scaling() {
        let b = random_unimodular(GaborGrid::new(3, 1).unwrap(), 1);
        let lhs = product(&b.scale(real(2.0)), 2).unwrap();
        let rhs = product(&b, 2).unwrap().scale(real(4.0));
        assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-14);
    }

    #[test]
    fn product_beta_equals_base_beta_for_unit_norm() {
        for n in [4, 8] {
            let b = random_unimodular(GaborGrid::new(n, 1).unwrap(), 3);
            let p = product(&b, 2).unwrap();
            let want = beta(&b, 1).unwrap();
            for k in 1..=2 {
                assert!((beta(&p, k).unwrap() - want).abs() < 1e-9 * want);
            }
        }
    }

    #[test]
    fn scaling() {
        let b = boxcar(GaborGrid::new(4, 1).unwrap());
        assert_eq!(scale_generator(&b, 1.0).unwrap(), b);
        let s = scale_generator(&b, 2f64.sqrt()).unwrap();
        let r = riesz_bounds_zak(&s);
        assert!((r.lower - 2.0).abs() < 1e-12 && (r.upper - 2.0).abs() < 1e-12);
        assert!((beta(&s, 1).unwrap() - 2.0 * beta(&b, 1).unwrap()).abs() < 1e-10);
        assert!(scale_generator(&b, 0.0).is_err());
        assert!(scale_generator(&b, f64::NAN).is_err());
    }

    #[test]
    fn phase_beta_matches_zak_beta() {
        let n = 6;
        let mut rng = seeded(3);
        let theta: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
        let w = ZakArray::new(
            GaborGrid::new(n, 1).unwrap(),
            theta
                .iter()
                .map(|&t| Complex64::from_polar(1.0, TAU * t))
                .collect(),
        )
        .unwrap();
        let direct = beta_of_zak(&w, 1, BoundaryWrap::Quasiperiodic).unwrap();
        assert!((phase_beta(&theta, n) - direct).abs() < 1e-10);
        assert!((phase_beta(&vec![0.0; n * n], n) - 2.0 * n as f64).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let n = 8;
        let mut rng = seeded(77);
        let theta: Vec<f64> = vortex_phase(n)
            .into_iter()
            .map(|t| t + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let mut grad = vec![0.0; n * n];
        phase_beta_grad(&theta, n, &mut grad);
        let h = 1e-6;
        for _ in 0..20 {
            let i = rng.random_range(0..n * n);
            let mut up = theta.clone();
            up[i] += h;
            let mut down = theta.clone();
            down[i] -= h;
            let fd = (phase_beta(&up, n) - phase_beta(&down, n)) / (2.0 * h);
            let rel = (fd - grad[i]).abs() / grad[i].abs().max(1e-3);
            assert!(rel <= 1e-5, "component {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn vortex_winds_once() {
        let n = 8;
        let theta = vortex_phase(n);
        // Walk the square of half-width 2 around the center.
        let c = n / 2;
        let mut path = Vec::new();
        for k in c - 2..c + 2 {
            path.push((c - 2, k));
        }
        for m in c - 2..c + 2 {
            path.push((m, c + 2));
        }
        for k in (c - 1..=c + 2).rev() {
            path.push((c + 2, k));
        }
        for m in (c - 1..=c + 2).rev() {
            path.push((m, c - 2));
        }
        let mut winding = 0.0;
        for w in 0..path.len() {
            let (a, b) = (path[w], path[(w + 1) % path.len()]);
            let mut step = theta[b.0 * n + b.1] - theta[a.0 * n + a.1];
            step -= step.round();
            winding += step;
        }
        assert!((winding.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_beta_beats_boxcar_and_is_orthonormal() {
        for n in [4, 8] {
            let res = low_beta_optimize(n, &LowBetaOptions::default()).unwrap();
            assert!(res.beta < 2.0 * n as f64);
            let b = &res.generator;
            assert!((beta(b, 1).unwrap() - res.beta).abs() < 1e-9);
            assert!(is_ab_riesz_basis(b, 1.0 - TAU_ID, 1.0 + TAU_ID).unwrap());
            assert_eq!(res.restart_betas.len(), 3);
        }
    }

    #[test]
    fn low_beta_is_deterministic() {
        let a = low_beta_generator_1d(6, 300).unwrap();
        let b = low_beta_generator_1d(6, 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recipes() {
        let r = GeneratorRecipe::Scaled {
            base: Box::new(GeneratorRecipe::Product {
                base: Box::new(GeneratorRecipe::Boxcar { l: 1 }),
                l: 2,
            }),
            scale: 2.0,
        };
        assert_eq!(r.to_string(), "scaled(product(boxcar,2),2)");
        assert_eq!(r.l(), 2);
        let b = r.build(3).unwrap();
        assert_eq!(b.grid().l(), 2);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<GeneratorRecipe>(&json).unwrap(), r);
        let bad = GeneratorRecipe::Product {
            base: Box::new(GeneratorRecipe::Boxcar { l: 2 }),
            l: 2,
        };
        assert!(bad.build(3).is_err());
        assert!(!GeneratorRecipe::AllOnes { l: 1 }.is_basis());
    }

    #[test]
    fn gaussian_is_not_a_basis() {
        let r = riesz_bounds_zak(&gaussian(GaborGrid::new(16, 1).unwrap()));
        assert!(r.lower < 1e-6 * r.upper, "{r:?}");
    }
}
