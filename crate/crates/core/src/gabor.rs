//! Gabor systems and their Riesz bounds.
//!
//! Two independent routes are provided. The Zak route reads the bounds off
//! `min/max |Z(b)|²`. The Gram route assembles the `N^{2l} × N^{2l}` Gram
//! matrix of the system and computes its extreme eigenvalues, which serves as
//! an oracle for the first.

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{CubeFft, Direction};
use crate::seq::FiniteSequence;
use crate::zak::{unravel_n, zak_forward};
use crate::TAU_ID;

/// Largest Gram dimension the oracle accepts.
pub const GRAM_LIMIT: usize = 4096;

/// Above this dimension the Gram oracle switches from a dense eigensolver
/// to Lanczos iteration on the dense matrix.
pub const DENSE_EIGEN_LIMIT: usize = 1024;

/// Lower bounds below `ZERO_CUTOFF · upper` are treated as zero.
pub const ZERO_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMethod {
    ZakModulus,
    GramEigen,
}

/// Riesz bounds `A ≤ B` of a Gabor system and the route that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszBounds {
    pub lower: f64,
    pub upper: f64,
    pub method: BoundsMethod,
}

impl RieszBounds {
    /// Whether the lower bound is nonzero under the relative cutoff.
    pub fn is_basis(&self) -> bool {
        self.lower >= ZERO_CUTOFF * self.upper && self.upper > 0.0
    }

    /// Agreement within `rel · max(1, upper)` on both ends.
    pub fn agrees_with(&self, other: &RieszBounds, rel: f64) -> bool {
        let scale = rel * self.upper.max(other.upper).max(1.0);
        (self.lower - other.lower).abs() <= scale && (self.upper - other.upper).abs() <= scale
    }
}

/// All `N^{2l}` atoms `b(j−Nn) e^{2πi j·m/N}` in lexicographic `(n, m)` order.
pub fn gabor_system(b: &FiniteSequence) -> Result<Vec<FiniteSequence>> {
    let g = b.grid();
    let count = g.zak_len();
    if count > GRAM_LIMIT {
        log::warn!(
            "Gabor system of {count} atoms: a Gram matrix would exceed the oracle limit {GRAM_LIMIT}"
        );
    }
    let big_n = g.n();
    let block = g.n_pow_l();
    let mut n = vec![0usize; g.l()];
    let mut m = vec![0usize; g.l()];
    let mut atoms = Vec::with_capacity(count);
    for ni in 0..block {
        unravel_n(ni, big_n, &mut n);
        for mi in 0..block {
            unravel_n(mi, big_n, &mut m);
            atoms.push(b.gabor_atom(&n, &m)?);
        }
    }
    Ok(atoms)
}

/// `(min, max)` of `|Z(b)|²` over `S_N^{2l}`.
pub fn riesz_bounds_zak(b: &FiniteSequence) -> RieszBounds {
    let (lower, upper) = zak_forward(b).modulus_sqr_range();
    RieszBounds {
        lower,
        upper,
        method: BoundsMethod::ZakModulus,
    }
}

/// Gram matrix `G[a][b] = ⟨h_a, h_b⟩` of the Gabor system in `(n, m)` order,
/// row-major, with the `1/N^l` weight of the `ℓ₂^{d,l}` inner product.
pub fn gram_matrix(b: &FiniteSequence) -> Result<Vec<Complex64>> {
    let g = *b.grid();
    let dim = g.zak_len();
    if dim > GRAM_LIMIT {
        return Err(Error::GramTooLarge {
            dim,
            limit: GRAM_LIMIT,
        });
    }
    let big_n = g.n();
    let l = g.l();
    let d = g.d();
    let block = g.n_pow_l();
    let inv = CubeFft::new(big_n, l, Direction::Inverse);
    let weight = 1.0 / block as f64;

    // For shifts n_a, n_b the entry depends on m_b − m_a only: it is the
    // inverse N-point transform of the product conj(b(j−Nn_a)) b(j−Nn_b)
    // folded modulo N along every axis.
    let mut gram = vec![Complex64::new(0.0, 0.0); dim * dim];
    gram.par_chunks_mut(block * dim).enumerate().for_each_init(
        || (Vec::new(), vec![Complex64::new(0.0, 0.0); block]),
        |(scratch, folded), (na, rows)| {
            let mut nav = vec![0usize; l];
            let mut nbv = vec![0usize; l];
            let mut jv = vec![0usize; l];
            let mut ia = vec![0usize; l];
            let mut ib = vec![0usize; l];
            let mut ma = vec![0usize; l];
            let mut mb = vec![0usize; l];
            let mut delta = vec![0usize; l];
            unravel_n(na, big_n, &mut nav);
            for nb in 0..block {
                unravel_n(nb, big_n, &mut nbv);
                folded
                    .iter_mut()
                    .for_each(|v| *v = Complex64::new(0.0, 0.0));
                for idx in 0..g.len() {
                    let mut rest = idx;
                    for slot in jv.iter_mut().rev() {
                        *slot = rest % d;
                        rest /= d;
                    }
                    let mut r = 0usize;
                    for a in 0..l {
                        ia[a] = (jv[a] + d - big_n * nav[a]) % d;
                        ib[a] = (jv[a] + d - big_n * nbv[a]) % d;
                        r = r * big_n + jv[a] % big_n;
                    }
                    folded[r] += b.values()[g.ravel(&ia)].conj() * b.values()[g.ravel(&ib)];
                }
                inv.process(folded, scratch);
                for mai in 0..block {
                    unravel_n(mai, big_n, &mut ma);
                    let row = &mut rows[mai * dim..(mai + 1) * dim];
                    for mbi in 0..block {
                        unravel_n(mbi, big_n, &mut mb);
                        let mut di = 0usize;
                        for a in 0..l {
                            delta[a] = (mb[a] + big_n - ma[a]) % big_n;
                            di = di * big_n + delta[a];
                        }
                        row[nb * block + mbi] = folded[di] * weight;
                    }
                }
            }
        },
    );
    Ok(gram)
}

/// Extreme eigenvalues of the Gram matrix.
///
/// Dimensions up to [`DENSE_EIGEN_LIMIT`] use a dense self-adjoint solver;
/// larger ones run Lanczos with full reorthogonalization.
pub fn riesz_bounds_gram(b: &FiniteSequence) -> Result<RieszBounds> {
    let dim = b.grid().zak_len();
    let gram = gram_matrix(b)?;
    let (lo, hi) = if dim <= DENSE_EIGEN_LIMIT {
        dense_extremes(&gram, dim)?
    } else {
        lanczos_extremes(&gram, dim, 0x6a11)?
    };
    Ok(RieszBounds {
        lower: lo.max(0.0),
        upper: hi,
        method: BoundsMethod::GramEigen,
    })
}

fn dense_extremes(gram: &[Complex64], dim: usize) -> Result<(f64, f64)> {
    let mat = Mat::<Complex64>::from_fn(dim, dim, |i, j| gram[i * dim + j]);
    let ev = mat
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok((ev[0], ev[dim - 1]))
}

fn matvec(a: &[Complex64], dim: usize, x: &[Complex64], out: &mut [Complex64]) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = a[i * dim..(i + 1) * dim]
            .iter()
            .zip(x)
            .map(|(p, q)| p * q)
            .sum();
    });
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Extreme eigenvalues of a Hermitian matrix by Lanczos with full
/// reorthogonalization, stopped when both extreme Ritz pairs have residual
/// below `1e-11 · ‖T‖` or the Krylov space becomes invariant. The residual
/// bounds the eigenvalue error, so this is far inside the `1e-8` agreement
/// the oracle is used for.
pub(crate) fn lanczos_extremes(a: &[Complex64], dim: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = crate::rng::seeded(seed);
    let mut q: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let nq = dot(&q, &q).re.sqrt();
    q.iter_mut().for_each(|v| *v /= nq);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];

    for k in 0..dim {
        matvec(a, dim, &basis[k], &mut w);
        let alpha = dot(&basis[k], &w).re;
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).re.sqrt();
        let t_norm = alphas
            .iter()
            .map(|x| x.abs())
            .chain(betas.iter().copied())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let invariant = beta <= 1e-12 * t_norm;
        let check = invariant || k + 1 == dim || (k + 1) % 8 == 0;
        if check {
            let (lo, hi, r_lo, r_hi) = tridiagonal_extremes(&alphas, &betas, beta)?;
            if invariant || k + 1 == dim || (r_lo <= 1e-11 * t_norm && r_hi <= 1e-11 * t_norm) {
                return Ok((lo, hi));
            }
        }
        betas.push(beta);
        basis.push(w.iter().map(|v| v / beta).collect());
    }
    Err(Error::Eigen("Lanczos iteration did not terminate".into()))
}

/// Extreme eigenvalues of the symmetric tridiagonal matrix `(alphas, betas)`
/// and the residual norms `|β_next · s_last|` of their Ritz vectors.
fn tridiagonal_extremes(
    alphas: &[f64],
    betas: &[f64],
    beta_next: f64,
) -> Result<(f64, f64, f64, f64)> {
    let k = alphas.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i == j + 1 {
            betas[j]
        } else if j == i + 1 {
            betas[i]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let r_lo = (beta_next * u[(k - 1, 0)]).abs();
    let r_hi = (beta_next * u[(k - 1, k - 1)]).abs();
    Ok((s[0], s[k - 1], r_lo, r_hi))
}

/// Whether `b` generates an `A,B`-Gabor Riesz basis, judged on the Zak route
/// with tolerance `τ_id` on both ends.
pub fn is_ab_riesz_basis(b: &FiniteSequence, a: f64, big_b: f64) -> Result<bool> {
    if !(a > 0.0 && a <= big_b && big_b.is_finite()) {
        return Err(Error::InvalidBounds {
            lower: a,
            upper: big_b,
        });
    }
    let r = riesz_bounds_zak(b);
    Ok(r.lower >= a - TAU_ID && r.upper <= big_b + TAU_ID)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GaborGrid;
    use crate::rng::seeded;
    use crate::zak::{zak_inverse, ZakArray};
    use std::f64::consts::TAU;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn boxcar(grid: GaborGrid) -> FiniteSequence {
        let n = grid.n() as i64;
        FiniteSequence::from_fn(grid, |j| {
            c(if j.iter().all(|x| (0..n).contains(x)) {
                1.0
            } else {
                0.0
            })
        })
    }

    fn unimodular(grid: GaborGrid, seed: u64) -> FiniteSequence {
        let mut rng = seeded(seed);
        let w = (0..grid.zak_len())
            .map(|_| Complex64::from_polar(1.0, TAU * rng.random::<f64>()))
            .collect();
        zak_inverse(&ZakArray::new(grid, w).unwrap())
    }

    fn random(grid: GaborGrid, seed: u64) -> FiniteSequence {
        let mut rng = seeded(seed);
        let v = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        FiniteSequence::new(grid, v).unwrap()
    }

    /// Gram entries from explicit atoms and inner products.
    fn naive_gram(b: &FiniteSequence) -> Vec<Complex64> {
        let atoms = gabor_system(b).unwrap();
        let mut out = Vec::new();
        for x in &atoms {
            for y in &atoms {
                out.push(x.inner(y).unwrap());
            }
        }
        out
    }

    #[test]
    fn system_enumeration() {
        let g = GaborGrid::new(2, 1).unwrap();
        let atoms = gabor_system(&FiniteSequence::delta(g, c(1.0))).unwrap();
        assert_eq!(atoms.len(), 4);
        assert_eq!(atoms[0].values(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(atoms[2].values(), &[c(0.0), c(0.0), c(1.0), c(0.0)]);
        assert!((atoms[3].values()[2] - c(1.0)).norm() < 1e-15);

        let b = random(GaborGrid::new(3, 1).unwrap(), 1);
        for atom in gabor_system(&b).unwrap() {
            assert!((atom.norm_l2() - b.norm_l2()).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_matches_explicit_inner_products() {
        for (n, l) in [(3, 1), (4, 1), (2, 2)] {
            let b = random(GaborGrid::new(n, l).unwrap(), 9);
            let fast = gram_matrix(&b).unwrap();
            for (x, y) in fast.iter().zip(naive_gram(&b)) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn boxcar_bounds() {
        let b = boxcar(GaborGrid::new(4, 1).unwrap());
        let z = riesz_bounds_zak(&b);
        assert!((z.lower - 1.0).abs() < 1e-12 && (z.upper - 1.0).abs() < 1e-12);
        let gram = gram_matrix(&b).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * 16 + j] - want).norm() < 1e-10);
            }
        }
        assert!(riesz_bounds_gram(&b).unwrap().agrees_with(&z, 1e-10));
    }

    #[test]
    fn unimodular_is_orthonormal() {
        let b = unimodular(GaborGrid::new(4, 1).unwrap(), 3);
        let r = riesz_bounds_gram(&b).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-9 && (r.upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_ones_is_singular() {
        let g = GaborGrid::new(2, 1).unwrap();
        let b = FiniteSequence::new(g, vec![c(1.0); 4]).unwrap();
        let z = riesz_bounds_zak(&b);
        assert!(z.lower < 1e-20 && (z.upper - 4.0).abs() < 1e-12);
        assert!(!z.is_basis());
        let r = riesz_bounds_gram(&b).unwrap();
        assert!(r.lower <= 1e-9);
        assert!(!r.is_basis());
    }

    #[test]
    fn scaling_is_quadratic() {
        let b = random(GaborGrid::new(4, 1).unwrap(), 2);
        let r = riesz_bounds_zak(&b);
        let s = riesz_bounds_zak(&b.scale(c(3.0)));
        assert!((s.lower - 9.0 * r.lower).abs() <= 1e-10 * s.upper);
        assert!((s.upper - 9.0 * r.upper).abs() <= 1e-10 * s.upper);
    }

    #[test]
    fn routes_agree_on_random_generators() {
        for (n, l) in [(5, 1), (8, 1), (3, 2)] {
            let b = random(GaborGrid::new(n, l).unwrap(), 4);
            let z = riesz_bounds_zak(&b);
            let gr = riesz_bounds_gram(&b).unwrap();
            assert!(z.agrees_with(&gr, 1e-8), "{z:?} vs {gr:?}");
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        let b = random(GaborGrid::new(4, 2).unwrap(), 5);
        let gram = gram_matrix(&b).unwrap();
        let dense = dense_extremes(&gram, 256).unwrap();
        let lz = lanczos_extremes(&gram, 256, 1).unwrap();
        assert!((dense.0 - lz.0).abs() < 1e-9 * dense.1);
        assert!((dense.1 - lz.1).abs() < 1e-9 * dense.1);
    }

    #[test]
    fn lanczos_on_identity_stops_immediately() {
        let dim = 50;
        let mut eye = vec![c(0.0); dim * dim];
        (0..dim).for_each(|i| eye[i * dim + i] = c(2.0));
        let (lo, hi) = lanczos_extremes(&eye, dim, 3).unwrap();
        assert!((lo - 2.0).abs() < 1e-13 && (hi - 2.0).abs() < 1e-13);
    }

    #[test]
    fn oracle_size_guard() {
        let b = FiniteSequence::zeros(GaborGrid::new(9, 2).unwrap());
        assert!(matches!(gram_matrix(&b), Err(Error::GramTooLarge { .. })));
    }

    #[test]
    fn ab_predicate() {
        let b = boxcar(GaborGrid::new(4, 1).unwrap());
        assert!(is_ab_riesz_basis(&b, 1.0, 1.0).unwrap());
        assert!(!is_ab_riesz_basis(&b, 2.0, 3.0).unwrap());
        assert!(is_ab_riesz_basis(&b.scale(c(2f64.sqrt())), 1.0, 4.0).unwrap());
        assert!(is_ab_riesz_basis(&b, 0.0, 1.0).is_err());
        assert!(is_ab_riesz_basis(&b, 2.0, 1.0).is_err());
    }
}
