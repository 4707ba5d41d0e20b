//! Localization functionals: `α_k`, `β_k`, tail energies, the weighted
//! `α_k^{p,q}` family and power-sum helpers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gabor::riesz_bounds_zak;
use crate::seq::FiniteSequence;
use crate::zak::{unravel_n, zak_forward, ZakArray};

/// `α_k(b) = ‖NΔ_k b‖² + ‖NΔ_k F(b)‖²`.
pub fn alpha(b: &FiniteSequence, k: usize) -> Result<f64> {
    let n2 = (b.grid().n() * b.grid().n()) as f64;
    let time = b.difference(k)?.norm_sqr();
    let freq = b.dft().difference(k)?.norm_sqr();
    Ok(n2 * (time + freq))
}

/// How `Δ_k` treats the step from `m_k = N−1` to `m_k = N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryWrap {
    /// Step onto the quasiperiodic extension, picking up `e^{2πi n_k/N}`.
    Quasiperiodic,
    /// Plain cyclic wrap, ignoring the phase. Only useful as a contrast.
    Cyclic,
}

/// `β_k(b) = (1/N^{2l}) Σ_{S_N^{2l}} |NΔ_k Z(b)|² + |NΓ_k Z(b)|²`.
pub fn beta(b: &FiniteSequence, k: usize) -> Result<f64> {
    beta_of_zak(&zak_forward(b), k, BoundaryWrap::Quasiperiodic)
}

/// `β_k` computed from a Zak array directly.
pub fn beta_of_zak(w: &ZakArray, k: usize, wrap: BoundaryWrap) -> Result<f64> {
    let g = *w.grid();
    let axis = g.check_axis(k)?;
    let big_n = g.n();
    let l = g.l();
    let block = g.n_pow_l();
    // Raveled stride of axis `axis` inside one block.
    let stride = big_n.pow((l - 1 - axis) as u32);
    let mut m = vec![0usize; l];
    let mut n = vec![0usize; l];
    let mut phases = vec![Complex64::new(1.0, 0.0); big_n];
    if wrap == BoundaryWrap::Quasiperiodic {
        for (r, p) in phases.iter_mut().enumerate() {
            let a = 2.0 * PI * r as f64 / big_n as f64;
            *p = Complex64::new(a.cos(), a.sin());
        }
    }

    let mut total = 0.0;
    for mi in 0..block {
        unravel_n(mi, big_n, &mut m);
        let m_next = if m[axis] + 1 == big_n {
            mi - m[axis] * stride
        } else {
            mi + stride
        };
        let wraps = m[axis] + 1 == big_n;
        for ni in 0..block {
            unravel_n(ni, big_n, &mut n);
            let here = w.get(mi, ni);
            let step_m = if wraps {
                phases[n[axis]] * w.get(m_next, ni)
            } else {
                w.get(m_next, ni)
            };
            let n_next = if n[axis] + 1 == big_n {
                ni - n[axis] * stride
            } else {
                ni + stride
            };
            total += (step_m - here).norm_sqr() + (w.get(mi, n_next) - here).norm_sqr();
        }
    }
    let nf = big_n as f64;
    Ok(nf * nf * total / (block as f64 * block as f64))
}

/// The quantities entering the sandwich `½β − 8π²B ≤ α ≤ 2β + 8π²B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub alpha: f64,
    pub beta: f64,
    pub axis: usize,
    pub sandwich_lhs: f64,
    pub sandwich_rhs: f64,
    #[serde(rename = "B_used")]
    pub b_used: f64,
}

impl LocalizationReport {
    /// Smallest of the two slacks `α − lhs` and `rhs − α`.
    pub fn slack(&self) -> f64 {
        (self.alpha - self.sandwich_lhs).min(self.sandwich_rhs - self.alpha)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack() >= -tol
    }
}

/// Evaluate both sides of the sandwich with `B = max |Z(b)|²`.
pub fn sandwich_check(b: &FiniteSequence, k: usize) -> Result<LocalizationReport> {
    let a = alpha(b, k)?;
    let be = beta(b, k)?;
    let b_used = riesz_bounds_zak(b).upper;
    let c = 8.0 * PI * PI * b_used;
    Ok(LocalizationReport {
        alpha: a,
        beta: be,
        axis: k,
        sandwich_lhs: 0.5 * be - c,
        sandwich_rhs: 2.0 * be + c,
        b_used,
    })
}

/// `(1/N^l) Σ_{|j_k| ≥ t} |b(j)|²` over signed representatives `j ∈ I_d^l`.
pub fn tail_energy(b: &FiniteSequence, k: usize, t: f64) -> Result<f64> {
    let hist = axis_mass(b, k)?;
    Ok(tail_from_mass(&hist, t) / b.grid().n_pow_l() as f64)
}

/// `Σ |b(j)|²` grouped by `|j_k|`, indexed `0..=d/2`.
pub(crate) fn axis_mass(b: &FiniteSequence, k: usize) -> Result<Vec<f64>> {
    let g = b.grid();
    let axis = g.check_axis(k)?;
    let mut hist = vec![0.0; g.d() / 2 + 1];
    for (idx, v) in b.values().iter().enumerate() {
        let a = g.signed(g.component(idx, axis)).unsigned_abs() as usize;
        hist[a] += v.norm_sqr();
    }
    Ok(hist)
}

pub(crate) fn tail_from_mass(hist: &[f64], t: f64) -> f64 {
    let start = if t <= 0.0 { 0 } else { t.ceil() as usize };
    hist.iter().skip(start).sum()
}

/// A weight exponent in `[1, ∞]`; the infinite value drops its term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Finite(f64),
    Infinite,
}

impl Weight {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Weight::Infinite)
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(&self) -> f64 {
        match self {
            Weight::Finite(p) => 1.0 / p,
            Weight::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(p) => write!(f, "{p}"),
            Weight::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Weight::Infinite),
            other => {
                let (num, den) = match other.split_once('/') {
                    Some((a, b)) => (a.trim(), Some(b.trim())),
                    None => (other, None),
                };
                let parse = |x: &str| {
                    x.parse::<f64>()
                        .map_err(|_| Error::ParameterOutOfRange(format!("bad weight {s:?}")))
                };
                let mut p = parse(num)?;
                if let Some(den) = den {
                    p /= parse(den)?;
                }
                Ok(Weight::Finite(p))
            }
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Weight::Finite(p) => s.serialize_f64(*p),
            Weight::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Weight::Finite(p)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn check_weight(w: Weight) -> Result<()> {
    match w {
        Weight::Finite(p) if !(p >= 1.0 && p.is_finite()) => Err(Error::ParameterOutOfRange(
            format!("weight exponent {p} not in [1, inf]"),
        )),
        _ => Ok(()),
    }
}

/// `(1/N^l) Σ_j |j_k/N|^p |b(j)|²` with `j_k` taken in `I_d`.
fn moment(b: &FiniteSequence, k: usize, p: f64) -> Result<f64> {
    let hist = axis_mass(b, k)?;
    let n = b.grid().n() as f64;
    let s: f64 = hist
        .iter()
        .enumerate()
        .skip(1)
        .map(|(a, m)| (a as f64 / n).powf(p) * m)
        .sum();
    Ok(s / b.grid().n_pow_l() as f64)
}

/// `α_k^{p,q}(b)`; an infinite `p` drops the `b` term and an infinite `q`
/// drops the transform term.
pub fn alpha_pq(b: &FiniteSequence, k: usize, p: Weight, q: Weight) -> Result<f64> {
    b.grid().check_axis(k)?;
    if p.is_infinite() && q.is_infinite() {
        return Err(Error::BothWeightsInfinite);
    }
    check_weight(p)?;
    check_weight(q)?;
    let time = match p {
        Weight::Finite(p) => moment(b, k, p)?,
        Weight::Infinite => 0.0,
    };
    let freq = match q {
        Weight::Finite(q) => moment(&b.dft(), k, q)?,
        Weight::Infinite => 0.0,
    };
    Ok(time + freq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `τ < 1`
    Power,
    /// `τ = 1`
    Log,
    /// `τ > 1`
    Bounded,
}

impl Regime {
    pub fn of(tau: f64) -> Self {
        if (tau - 1.0).abs() <= 1e-12 {
            Regime::Log
        } else if tau < 1.0 {
            Regime::Power
        } else {
            Regime::Bounded
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Power => "tau<1",
            Regime::Log => "tau=1",
            Regime::Bounded => "tau>1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    pub sum: f64,
    pub regime: Regime,
    pub bound: f64,
}

/// `Σ_{S=1}^γ S^{−τ}` with the regime's lower-bound expression at unit
/// constant: `γ^{1−τ}/(1−τ)`, `log γ`, or `(1 − (200/16)^{1−τ})/(τ−1)`.
///
/// The bound is reported, never asserted.
pub fn power_sum_bound(tau: f64, gamma: u64) -> Result<PowerSum> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!(
            "tau = {tau} must be positive"
        )));
    }
    if gamma == 0 {
        return Err(Error::ParameterOutOfRange(
            "gamma must be at least 1".into(),
        ));
    }
    // Smallest terms first.
    let sum = (1..=gamma).rev().map(|s| (s as f64).powf(-tau)).sum();
    let regime = Regime::of(tau);
    let g = gamma as f64;
    let bound = match regime {
        Regime::Power => g.powf(1.0 - tau) / (1.0 - tau),
        Regime::Log => g.ln(),
        Regime::Bounded => (1.0 - 12.5f64.powf(1.0 - tau)) / (tau - 1.0),
    };
    Ok(PowerSum { sum, regime, bound })
}

/// Both sides of the rearrangement inequality
/// `Σ_{S=1}^γ Σ_{|j_k| ≥ N S^a/2} |b(j)|² ≤ 2^{1/a} Σ_j |j_k/N|^{1/a} |b(j)|²`
/// for `0 < a ≤ 1`.
pub fn rearrangement_sides(b: &FiniteSequence, k: usize, a: f64, gamma: u64) -> Result<(f64, f64)> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "exponent {a} not in (0, 1]"
        )));
    }
    let hist = axis_mass(b, k)?;
    let n = b.grid().n() as f64;
    let lhs = (1..=gamma)
        .map(|s| tail_from_mass(&hist, n * (s as f64).powf(a) / 2.0))
        .sum();
    let inv = 1.0 / a;
    let rhs = 2f64.powf(inv)
        * hist
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, m)| (j as f64 / n).powf(inv) * m)
            .sum::<f64>();
    Ok((lhs, rhs))
}
