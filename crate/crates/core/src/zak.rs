//! The discrete Zak transform `Z_{d,l}` and its identities.
//!
//! `Z(b)(m,n) = Σ_{j∈S_N^l} b(m−Nj) e^{2πi n·j/N}`. For fixed `m` this is an
//! unnormalized inverse `N`-point FFT in `j`, which is how it is computed.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{roots_of_unity, CubeFft, Direction};
use crate::grid::GaborGrid;
use crate::seq::FiniteSequence;

/// Values of a Zak transform on `S_N^{2l} = {0..N−1}^{2l}`.
///
/// Storage puts the `m` block outermost and the `n` block innermost, each
/// block row-major with axis 1 first. Off the fundamental domain the array is
/// extended by `N`-quasiperiodicity, see [`ZakArray::eval`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZakRepr", into = "ZakRepr")]
pub struct ZakArray {
    grid: GaborGrid,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct ZakRepr {
    #[serde(rename = "N")]
    n: usize,
    l: usize,
    blocks: [String; 2],
    shape: Vec<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
    #[serde(default)]
    label: String,
}

impl TryFrom<ZakRepr> for ZakArray {
    type Error = Error;

    fn try_from(r: ZakRepr) -> Result<Self> {
        if r.blocks[0] != "m" || r.blocks[1] != "n" {
            return Err(Error::Config(format!(
                "unsupported block order {:?}",
                r.blocks
            )));
        }
        let grid = GaborGrid::new(r.n, r.l)?;
        if r.shape != vec![r.n; 2 * r.l] {
            return Err(Error::Config(format!(
                "shape {:?} does not match N, l",
                r.shape
            )));
        }
        if r.re.len() != r.im.len() {
            return Err(Error::LengthMismatch {
                expected: r.re.len(),
                got: r.im.len(),
            });
        }
        let values =
            r.re.into_iter()
                .zip(r.im)
                .map(|(a, b)| Complex64::new(a, b))
                .collect();
        ZakArray::new(grid, values)
    }
}

impl From<ZakArray> for ZakRepr {
    fn from(z: ZakArray) -> Self {
        ZakRepr {
            n: z.grid.n(),
            l: z.grid.l(),
            blocks: ["m".into(), "n".into()],
            shape: vec![z.grid.n(); 2 * z.grid.l()],
            re: z.values.iter().map(|v| v.re).collect(),
            im: z.values.iter().map(|v| v.im).collect(),
            label: String::new(),
        }
    }
}

impl ZakArray {
    pub fn new(grid: GaborGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.zak_len() {
            return Err(Error::LengthMismatch {
                expected: grid.zak_len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GaborGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Number of points in one block, `N^l`.
    pub fn block_len(&self) -> usize {
        self.grid.n_pow_l()
    }

    /// Stored value at `(m, n)` given as block-raveled indices.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.values[m * self.block_len() + n]
    }

    /// `‖W‖² = (1/N^{2l}) Σ |W(m,n)|²`.
    pub fn norm_sqr(&self) -> f64 {
        let np = self.block_len() as f64;
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / (np * np)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Value of the quasiperiodic extension at arbitrary integer `(m, n)`.
    ///
    /// `Z(m+Ne_k, n) = e^{2πi n_k/N} Z(m,n)` and `Z(m, n+Ne_k) = Z(m,n)`;
    /// reduction uses floored division so negative arguments are exact.
    pub fn eval(&self, m: &[i64], n: &[i64]) -> Complex64 {
        let big_n = self.grid.n() as i64;
        let (mi, ni, phase) = reduce(big_n, m, n);
        let w = self.values[mi * self.block_len() + ni];
        if phase == 0 {
            w
        } else {
            w * root(phase as usize, big_n as usize)
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(min, max)` of `|W|²` over the fundamental domain.
    pub fn modulus_sqr_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
                let s = v.norm_sqr();
                (lo.min(s), hi.max(s))
            })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn root(r: usize, n: usize) -> Complex64 {
    let a = std::f64::consts::TAU * r as f64 / n as f64;
    Complex64::new(a.cos(), a.sin())
}

/// Reduce `(m, n)` to the fundamental domain: returns raveled block indices and
/// the phase exponent `Σ q_k n_k mod N` where `m_k = q_k N + r_k`.
fn reduce(big_n: i64, m: &[i64], n: &[i64]) -> (usize, usize, i64) {
    let mut mi = 0usize;
    let mut ni = 0usize;
    let mut phase = 0i64;
    for (&mk, &nk) in m.iter().zip(n) {
        let nr = nk.rem_euclid(big_n);
        let q = mk.div_euclid(big_n);
        let r = mk.rem_euclid(big_n);
        phase = (phase + q.rem_euclid(big_n) * nr).rem_euclid(big_n);
        mi = mi * big_n as usize + r as usize;
        ni = ni * big_n as usize + nr as usize;
    }
    (mi, ni, phase)
}

/// Restriction of `Z_{d,l}(b)` to `S_N^{2l}`.
pub fn zak_forward(b: &FiniteSequence) -> ZakArray {
    let g = *b.grid();
    let big_n = g.n();
    let l = g.l();
    let block = g.n_pow_l();
    let fft = CubeFft::new(big_n, l, Direction::Inverse);
    let mut values = vec![Complex64::new(0.0, 0.0); g.zak_len()];
    values.par_chunks_mut(block).enumerate().for_each_init(
        || {
            (
                Vec::new(),
                vec![0usize; l],
                vec![0usize; l],
                vec![0usize; l],
            )
        },
        |(scratch, m, j, src), (mi, row)| {
            unravel_n(mi, big_n, m);
            for (ji, slot) in row.iter_mut().enumerate() {
                unravel_n(ji, big_n, j);
                for a in 0..l {
                    src[a] = (m[a] + g.d() - big_n * j[a]) % g.d();
                }
                *slot = b.values()[g.ravel(src)];
            }
            fft.process(row, scratch);
        },
    );
    ZakArray { grid: g, values }
}

/// Inverse of [`zak_forward`]: `b(m−Nj) = (1/N^l) Σ_n W(m,n) e^{−2πi n·j/N}`.
pub fn zak_inverse(w: &ZakArray) -> FiniteSequence {
    let g = w.grid;
    let big_n = g.n();
    let l = g.l();
    let block = g.n_pow_l();
    let fft = CubeFft::new(big_n, l, Direction::Forward);
    let mut rows = w.values.clone();
    rows.par_chunks_mut(block)
        .for_each_init(Vec::new, |scratch, row| fft.process(row, scratch));

    let scale = 1.0 / block as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut m = vec![0usize; l];
    let mut j = vec![0usize; l];
    let mut dst = vec![0usize; l];
    for (mi, row) in rows.chunks(block).enumerate() {
        unravel_n(mi, big_n, &mut m);
        for (ji, v) in row.iter().enumerate() {
            unravel_n(ji, big_n, &mut j);
            for a in 0..l {
                dst[a] = (m[a] + g.d() - big_n * j[a]) % g.d();
            }
            out[g.ravel(&dst)] = v * scale;
        }
    }
    FiniteSequence::new(g, out).expect("length matches grid")
}

/// Free-function form of [`ZakArray::eval`].
pub fn zak_eval(w: &ZakArray, m: &[i64], n: &[i64]) -> Complex64 {
    w.eval(m, n)
}

pub(crate) fn unravel_n(idx: usize, big_n: usize, out: &mut [usize]) {
    let mut rest = idx;
    for slot in out.iter_mut().rev() {
        *slot = rest % big_n;
        rest /= big_n;
    }
}

/// `max |Z(Fb)(m,n) − e^{2πi m·n/d} Z(b)(−n,m)|` over `S_N^{2l}`.
pub fn zak_fourier_intertwine_residual(b: &FiniteSequence) -> f64 {
    let zb = zak_forward(b);
    let zf = zak_forward(&b.dft());
    intertwine_residual_of(&zb, &zf)
}

pub(crate) fn intertwine_residual_of(zb: &ZakArray, zf: &ZakArray) -> f64 {
    let g = zb.grid;
    let big_n = g.n();
    let l = g.l();
    let block = g.n_pow_l();
    let roots = roots_of_unity(g.d());
    let mut m = vec![0usize; l];
    let mut n = vec![0usize; l];
    let mut arg_m = vec![0i64; l];
    let mut arg_n = vec![0i64; l];
    let mut worst = 0.0f64;
    for mi in 0..block {
        unravel_n(mi, big_n, &mut m);
        for ni in 0..block {
            unravel_n(ni, big_n, &mut n);
            let mut dot = 0usize;
            for a in 0..l {
                dot += m[a] * n[a];
                arg_m[a] = -(n[a] as i64);
                arg_n[a] = m[a] as i64;
            }
            let rhs = roots[dot % g.d()] * zb.eval(&arg_m, &arg_n);
            worst = worst.max((zf.get(mi, ni) - rhs).norm());
        }
    }
    worst
}

/// `max |Z(b∗φ)(m,n) − (1/N^l) Σ_j φ(j) Z(b)(m−j,n)|` over `S_N^{2l}`.
///
/// The right side is evaluated, for each `n`, as the cyclic convolution of the
/// quasiperiodic extension `m ↦ Z(b)(m,n)` on `Z_d^l` with `φ`.
pub fn zak_convolution_residual(b: &FiniteSequence, phi: &FiniteSequence) -> Result<f64> {
    let lhs = zak_forward(&b.convolve(phi)?);
    let zb = zak_forward(b);
    let g = *b.grid();
    let big_n = g.n();
    let l = g.l();
    let block = g.n_pow_l();

    let worst = (0..block)
        .into_par_iter()
        .map(|ni| {
            let mut n = vec![0usize; l];
            unravel_n(ni, big_n, &mut n);
            let n_signed: Vec<i64> = n.iter().map(|&c| c as i64).collect();
            let mut m = vec![0i64; l];
            let ext: Vec<Complex64> = (0..g.len())
                .map(|idx| {
                    for (a, slot) in m.iter_mut().enumerate() {
                        *slot = g.component(idx, a) as i64;
                    }
                    zb.eval(&m, &n_signed)
                })
                .collect();
            let conv = FiniteSequence::new(g, ext)?.convolve(phi)?;
            let mut mm = vec![0usize; l];
            let mut worst = 0.0f64;
            for mi in 0..block {
                unravel_n(mi, big_n, &mut mm);
                let rhs = conv.values()[g.ravel(&mm)];
                worst = worst.max((lhs.get(mi, ni) - rhs).norm());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;
    use std::f64::consts::TAU;

    fn random(grid: GaborGrid, seed: u64) -> FiniteSequence {
        let mut rng = seeded(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        FiniteSequence::new(grid, values).unwrap()
    }

    fn boxcar(grid: GaborGrid) -> FiniteSequence {
        let n = grid.n() as i64;
        FiniteSequence::from_fn(grid, |j| {
            Complex64::new(
                if j.iter().all(|c| (0..n).contains(c)) {
                    1.0
                } else {
                    0.0
                },
                0.0,
            )
        })
    }

    /// The defining sum, evaluated term by term.
    fn naive(b: &FiniteSequence, m: &[usize], n: &[usize]) -> Complex64 {
        let g = b.grid();
        let big_n = g.n();
        let mut j = vec![0usize; g.l()];
        (0..g.n_pow_l())
            .map(|ji| {
                unravel_n(ji, big_n, &mut j);
                let pos: Vec<i64> = (0..g.l())
                    .map(|a| m[a] as i64 - (big_n * j[a]) as i64)
                    .collect();
                let dot: usize = (0..g.l()).map(|a| n[a] * j[a]).sum();
                let ang = TAU * (dot % big_n) as f64 / big_n as f64;
                b.at(&pos) * Complex64::new(ang.cos(), ang.sin())
            })
            .sum()
    }

    #[test]
    fn boxcar_is_identically_one() {
        for (n, l) in [(2, 1), (5, 1), (3, 2)] {
            let z = zak_forward(&boxcar(GaborGrid::new(n, l).unwrap()));
            assert!(z.values().iter().all(|v| (v - 1.0).norm() < 1e-13));
        }
    }

    #[test]
    fn all_ones_concentrates_at_zero_frequency() {
        let g = GaborGrid::new(4, 1).unwrap();
        let z = zak_forward(&FiniteSequence::new(g, vec![Complex64::new(1.0, 0.0); 16]).unwrap());
        for m in 0..4 {
            for n in 0..4 {
                let want = if n == 0 { 4.0 } else { 0.0 };
                assert!((z.get(m, n) - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn forward_matches_naive_sum() {
        let g = GaborGrid::new(4, 2).unwrap();
        let b = random(g, 11);
        let z = zak_forward(&b);
        let mut m = vec![0; 2];
        let mut n = vec![0; 2];
        for mi in 0..16 {
            unravel_n(mi, 4, &mut m);
            for ni in 0..16 {
                unravel_n(ni, 4, &mut n);
                assert!((z.get(mi, ni) - naive(&b, &m, &n)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unitary_and_invertible() {
        for (n, l, seed) in [(4, 1, 1), (3, 2, 2), (8, 1, 3)] {
            let g = GaborGrid::new(n, l).unwrap();
            let b = random(g, seed);
            let z = zak_forward(&b);
            assert!((z.norm() - b.norm_l2()).abs() < 1e-12);
            assert!(zak_inverse(&z).max_abs_diff(&b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_unimodular() {
        let g = GaborGrid::new(8, 1).unwrap();
        let mut rng = seeded(5);
        let w = ZakArray::new(
            g,
            (0..64)
                .map(|_| Complex64::from_polar(1.0, TAU * rng.random::<f64>()))
                .collect(),
        )
        .unwrap();
        let b = zak_inverse(&w);
        assert!((b.norm_l2() - 1.0).abs() < 1e-12);
        assert!(zak_forward(&b).max_abs_diff(&w) < 1e-12);

        let ones = ZakArray::new(g, vec![Complex64::new(1.0, 0.0); 64]).unwrap();
        assert!(zak_inverse(&ones).max_abs_diff(&boxcar(g)).unwrap() < 1e-13);
    }

    #[test]
    fn quasiperiodicity() {
        let g = GaborGrid::new(4, 2).unwrap();
        let w = zak_forward(&random(g, 6));
        let mut rng = seeded(12);
        for _ in 0..200 {
            let m: Vec<i64> = (0..2).map(|_| rng.random_range(-20..20)).collect();
            let n: Vec<i64> = (0..2).map(|_| rng.random_range(-20..20)).collect();
            let k = rng.random_range(0..2);
            let mut m2 = m.clone();
            m2[k] += 4;
            let a = TAU * n[k] as f64 / 4.0;
            let want = Complex64::new(a.cos(), a.sin()) * w.eval(&m, &n);
            assert!((w.eval(&m2, &n) - want).norm() < 1e-13);
            let mut n2 = n.clone();
            n2[k] -= 4;
            assert_eq!(w.eval(&m, &n2), w.eval(&m, &n));
        }
        assert_eq!(w.eval(&[1, 2], &[3, 0]), w.get(6, 12));
    }

    #[test]
    fn intertwining() {
        let cases = [
            boxcar(GaborGrid::new(4, 1).unwrap()),
            random(GaborGrid::new(8, 1).unwrap(), 2),
            random(GaborGrid::new(3, 2).unwrap(), 2),
        ];
        for b in &cases {
            assert!(zak_fourier_intertwine_residual(b) <= 1e-10);
        }
    }

    #[test]
    fn convolution_identity() {
        let g = GaborGrid::new(4, 1).unwrap();
        let b = random(g, 1);
        let unit = FiniteSequence::delta(g, Complex64::new(4.0, 0.0));
        assert!(zak_convolution_residual(&b, &unit).unwrap() <= 1e-12);
        assert!(zak_convolution_residual(&b, &random(g, 2)).unwrap() <= 1e-10);
        let g2 = GaborGrid::new(3, 2).unwrap();
        assert!(zak_convolution_residual(&random(g2, 3), &random(g2, 4)).unwrap() <= 1e-10);
    }

    #[test]
    fn json_roundtrip() {
        let z = zak_forward(&random(GaborGrid::new(2, 2).unwrap(), 1));
        let text = z.to_json().unwrap();
        assert!(text.contains(r#""blocks":["m","n"]"#));
        assert_eq!(ZakArray::from_json(&text).unwrap(), z);
    }
}
