//! Trapezoid mollifiers `φ_{R,k}` and the jump census.
//!
//! `φ_{R,k}(j) = N^{l−1} δ_{j′,0} p(j_k)` where `p = S_N P_N ρ_R` is a 1-D
//! profile on `Z_d`. Its transform is `ρ̂(k_k/(NR))` exactly when `R < N/2`,
//! so the profile is built in the frequency domain. Everything that only
//! depends on `p` is computed from the 1-D profile, which keeps grids beyond
//! the size guard (such as `N = 128, l = 2`) within reach.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GaborGrid;
use crate::seq::FiniteSequence;
use crate::zak::zak_forward;

/// The trapezoid: 1 on `|ξ| ≤ 1/2`, `2(1−|ξ|)` on `1/2 ≤ |ξ| ≤ 1`, 0 beyond.
pub fn rho_hat(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 0.5 {
        1.0
    } else if a < 1.0 {
        2.0 * (1.0 - a)
    } else {
        0.0
    }
}

/// Inverse Fourier transform of [`rho_hat`]:
/// `ρ(t) = 2 sin(3πt/2) sin(πt/2) / (πt)²`, with `ρ(0) = 3/2`.
pub fn rho(t: f64) -> f64 {
    if t == 0.0 {
        return 1.5;
    }
    let pt = PI * t;
    2.0 * (1.5 * pt).sin() * (0.5 * pt).sin() / (pt * pt)
}

/// `ρ_R(t) = Rρ(Rt)`.
pub fn rho_dilated(r: f64, t: f64) -> f64 {
    r * rho(r * t)
}

/// Parameters of `φ_{R,k}` on `Z_d^l`.
///
/// Holds `N` and `l` rather than a [`GaborGrid`] so that quantities of the
/// 1-D profile stay available when `d^l` exceeds the size guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapezoidSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub l: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub k: usize,
}

impl TrapezoidSpec {
    pub fn new(n: usize, l: usize, r: usize, k: usize) -> Result<Self> {
        if n == 0 || l == 0 {
            return Err(Error::InvalidGrid(format!("N={n}, l={l}")));
        }
        if r == 0 || 2 * r >= n {
            return Err(Error::InvalidDilation { r, n });
        }
        if k == 0 || k > l {
            return Err(Error::AxisOutOfRange { axis: k, l });
        }
        Ok(Self { n, l, r, k })
    }

    /// The full grid, subject to the size guard.
    pub fn grid(&self) -> Result<GaborGrid> {
        GaborGrid::new(self.n, self.l)
    }

    fn line(&self) -> GaborGrid {
        GaborGrid::new(self.n, 1).expect("one-variable grids are always in range")
    }
}

/// `ρ̂(k/(NR))` for `k ∈ I_d`, in storage order on the 1-D grid.
pub fn transform_profile(spec: &TrapezoidSpec) -> Vec<f64> {
    let line = spec.line();
    let nr = (spec.n * spec.r) as f64;
    (0..line.d())
        .map(|k| rho_hat(line.signed(k) as f64 / nr))
        .collect()
}

/// The profile `p = S_N P_N ρ_R` on `Z_d`, obtained as the inverse transform
/// of [`transform_profile`].
pub fn axis_profile(spec: &TrapezoidSpec) -> FiniteSequence {
    let line = spec.line();
    let spectrum = transform_profile(spec)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    FiniteSequence::new(line, spectrum)
        .expect("profile length is d")
        .idft()
        .with_label(format!("profile R={}", spec.r))
}

/// `φ_{R,k}` on the full grid.
pub fn phi_filter(spec: &TrapezoidSpec) -> Result<FiniteSequence> {
    let grid = spec.grid()?;
    let profile = axis_profile(spec);
    let axis = spec.k - 1;
    let scale = spec.n.pow((spec.l - 1) as u32) as f64;
    let mut phi = FiniteSequence::zeros(grid);
    let mut j = vec![0usize; spec.l];
    for (jk, v) in profile.values().iter().enumerate() {
        j[axis] = jk;
        phi.values_mut()[grid.ravel(&j)] = v * scale;
    }
    Ok(phi.with_label(format!("phi R={} k={}", spec.r, spec.k)))
}

/// Truncated periodization `Σ_{m=−K}^{K} ρ_R(j/N + mN)` at the signed sample
/// points `j ∈ I_d`, as a 1-D sequence. Converges to [`axis_profile`] with an
/// `O(1/K)` tail.
pub fn phi_time_domain_oracle(spec: &TrapezoidSpec, periods: usize) -> Result<FiniteSequence> {
    if periods == 0 {
        return Err(Error::ParameterOutOfRange("K must be at least 1".into()));
    }
    let line = spec.line();
    let n = spec.n as f64;
    let r = spec.r as f64;
    let k = periods as i64;
    let seq = FiniteSequence::from_fn(line, |j| {
        let t = j[0] as f64 / n;
        // Outermost translates first.
        let mut s = 0.0;
        for m in (1..=k).rev() {
            s += rho_dilated(r, t + m as f64 * n) + rho_dilated(r, t - m as f64 * n);
        }
        Complex64::new(s + rho_dilated(r, t), 0.0)
    });
    Ok(seq.with_label(format!("profile oracle R={} K={periods}", spec.r)))
}

/// `‖NΔ_k φ_{R,k}‖_{ℓ₁^{d,l}}`, which equals `Σ_{j∈Z_d} |Δp(j)|` for every `l`.
pub fn filter_smoothness(spec: &TrapezoidSpec) -> f64 {
    axis_profile(spec)
        .delta_l1_norm(1)
        .expect("axis 1 exists on a line")
}

/// `δ₁/40` with `δ₁ = 2√A sin(π(1/4 − 1/200))`.
pub fn default_delta(a: f64) -> f64 {
    2.0 * a.sqrt() * (PI * (0.25 - 0.005)).sin() / 40.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    /// Points satisfying either condition.
    pub total: usize,
    /// `|Z(b) − Z(b∗φ)| ≥ δ`.
    pub first: usize,
    /// `|Z(Fb) − Z(Fb∗ψ)| ≥ δ`.
    pub second: usize,
}

/// Count the points of `S_N^{2l}` where `b` or `F(b)` moves by at least `δ`
/// under mollification by `φ` or `ψ` respectively.
pub fn jump_census(
    b: &FiniteSequence,
    phi: &FiniteSequence,
    psi: &FiniteSequence,
    delta: f64,
    k: usize,
) -> Result<Census> {
    b.grid().check_axis(k)?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "delta = {delta} must be positive"
        )));
    }
    let fb = b.dft();
    let (z, zphi, zf, zpsi) = (
        zak_forward(b),
        zak_forward(&b.convolve(phi)?),
        zak_forward(&fb),
        zak_forward(&fb.convolve(psi)?),
    );
    let flags: Vec<(bool, bool)> = z
        .values()
        .par_iter()
        .zip(zphi.values())
        .zip(zf.values().par_iter().zip(zpsi.values()))
        .map(|((a, b), (c, d))| ((a - b).norm() >= delta, (c - d).norm() >= delta))
        .collect();
    Ok(Census {
        total: flags.iter().filter(|(x, y)| *x || *y).count(),
        first: flags.iter().filter(|(x, _)| *x).count(),
        second: flags.iter().filter(|(_, y)| *y).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫ ρ̂(ξ) e^{2πiξt} dξ` by composite Simpson on each smooth piece.
    fn rho_quadrature(t: f64) -> f64 {
        let simpson = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
            let n = 4000;
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for i in 1..n {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let g = |xi: f64| rho_hat(xi) * (2.0 * PI * xi * t).cos();
        2.0 * (simpson(0.0, 0.5, &g) + simpson(0.5, 1.0, &g))
    }

    #[test]
    fn trapezoid_values() {
        assert_eq!(rho_hat(0.0), 1.0);
        assert_eq!(rho_hat(0.5), 1.0);
        assert!((rho_hat(0.75) - 0.5).abs() < 1e-15);
        assert_eq!(rho_hat(-0.75), rho_hat(0.75));
        assert_eq!(rho_hat(2.0), 0.0);
        assert_eq!(rho_hat(-2.0), 0.0);
        assert_eq!(rho_hat(1.0), 0.0);
    }

    #[test]
    fn rho_closed_form_matches_quadrature() {
        assert!((rho(0.0) - rho_quadrature(0.0)).abs() < 1e-10);
        assert!(rho(2.0).abs() < 1e-15);
        for t in [0.37, 1e-4, -0.9, 1.3, 5.25] {
            assert!((rho(t) - rho_quadrature(t)).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn spec_validation() {
        assert!(TrapezoidSpec::new(16, 1, 8, 1).is_err());
        assert!(TrapezoidSpec::new(16, 1, 0, 1).is_err());
        assert!(TrapezoidSpec::new(16, 2, 1, 3).is_err());
        assert!(TrapezoidSpec::new(16, 2, 7, 2).is_ok());
    }

    #[test]
    fn plateau_and_support() {
        let spec = TrapezoidSpec::new(16, 1, 2, 1).unwrap();
        let phi = phi_filter(&spec).unwrap();
        let f = phi.dft();
        let g = phi.grid();
        for (idx, v) in f.values().iter().enumerate() {
            let k = g.signed(idx).abs() as f64;
            assert!(v.re >= -1e-12 && v.re <= 1.0 + 1e-10 && v.im.abs() < 1e-12);
            if k <= 16.0 {
                assert!((v.re - 1.0).abs() < 1e-10);
            }
            if k >= 32.0 {
                assert!(v.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn multivariable_filter_transform_depends_on_one_axis() {
        let spec = TrapezoidSpec::new(4, 2, 1, 2).unwrap();
        let f = phi_filter(&spec).unwrap().dft();
        let profile = transform_profile(&spec);
        let g = f.grid();
        for idx in 0..g.len() {
            let kk = g.component(idx, 1);
            assert!((f.values()[idx] - profile[kk]).norm() < 1e-12);
        }
    }

    #[test]
    fn smoothness_is_dimension_free() {
        let one = TrapezoidSpec::new(8, 1, 1, 1).unwrap();
        let two = TrapezoidSpec::new(8, 2, 1, 1).unwrap();
        let materialized = phi_filter(&two).unwrap().delta_l1_norm(1).unwrap();
        assert!((filter_smoothness(&one) - materialized).abs() < 1e-12);
        assert!(filter_smoothness(&TrapezoidSpec::new(16, 1, 1, 1).unwrap()) <= 10.0);
    }

    #[test]
    fn time_domain_oracle_converges() {
        let spec = TrapezoidSpec::new(16, 1, 1, 1).unwrap();
        let exact = axis_profile(&spec);
        let dev = |k| {
            phi_time_domain_oracle(&spec, k)
                .unwrap()
                .max_abs_diff(&exact)
                .unwrap()
        };
        let (d64, d128) = (dev(64), dev(128));
        assert!(d64 <= 1e-3);
        assert!((d64 / d128 - 2.0).abs() < 0.1, "ratio {}", d64 / d128);
        let spec2 = TrapezoidSpec::new(16, 1, 2, 1).unwrap();
        let d = phi_time_domain_oracle(&spec2, 128)
            .unwrap()
            .max_abs_diff(&axis_profile(&spec2))
            .unwrap();
        assert!(d <= 5e-4);
    }

    #[test]
    fn census_of_identity_filters_is_empty() {
        let g = GaborGrid::new(4, 1).unwrap();
        let b = FiniteSequence::from_fn(g, |j| Complex64::new(j[0] as f64, 1.0));
        let unit = FiniteSequence::delta(g, Complex64::new(4.0, 0.0));
        let c = jump_census(&b, &unit, &unit, 1e-6, 1).unwrap();
        assert_eq!(c.total, 0);
    }

    #[test]
    fn census_is_monotone_in_delta() {
        let g = GaborGrid::new(16, 1).unwrap();
        let b = FiniteSequence::from_fn(g, |j| {
            Complex64::new(if (0..16).contains(&j[0]) { 1.0 } else { 0.0 }, 0.0)
        });
        let phi = phi_filter(&TrapezoidSpec::new(16, 1, 1, 1).unwrap()).unwrap();
        let delta = default_delta(1.0);
        let c1 = jump_census(&b, &phi, &phi, delta, 1).unwrap();
        let c2 = jump_census(&b, &phi, &phi, 2.0 * delta, 1).unwrap();
        assert!(c1.total >= 1);
        assert!(c2.total <= c1.total);
        assert!(c1.total <= c1.first + c1.second);
    }
}
