//! Complex sequences on `Z_d^l` and the operations every other module builds on.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{roots_of_unity, CubeFft, Direction};
use crate::grid::{GaborGrid, SignedIndex};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// An element of `ℓ₂^{d,l}`: one complex value per point of `Z_d^l`.
///
/// Storage is row-major with axis 1 outermost and each component in `0..d`.
/// Indexing through [`FiniteSequence::at`] is cyclic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeqRepr", into = "SeqRepr")]
pub struct FiniteSequence {
    grid: GaborGrid,
    values: Vec<Complex64>,
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SeqRepr {
    #[serde(rename = "N")]
    n: usize,
    l: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    #[serde(default)]
    label: String,
}

impl TryFrom<SeqRepr> for FiniteSequence {
    type Error = Error;

    fn try_from(r: SeqRepr) -> Result<Self> {
        let grid = GaborGrid::new(r.n, r.l)?;
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
        let seq = FiniteSequence::new(grid, values)?;
        Ok(if r.label.is_empty() {
            seq
        } else {
            seq.with_label(r.label)
        })
    }
}

impl From<FiniteSequence> for SeqRepr {
    fn from(s: FiniteSequence) -> Self {
        SeqRepr {
            n: s.grid.n(),
            l: s.grid.l(),
            re: s.values.iter().map(|z| z.re).collect(),
            im: s.values.iter().map(|z| z.im).collect(),
            label: s.label.unwrap_or_default(),
        }
    }
}

impl FiniteSequence {
    pub fn new(grid: GaborGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            label: None,
        })
    }

    pub fn zeros(grid: GaborGrid) -> Self {
        Self {
            grid,
            values: vec![ZERO; grid.len()],
            label: None,
        }
    }

    /// Build a sequence from a function of the signed index `j ∈ I_d^l`.
    pub fn from_fn(grid: GaborGrid, mut f: impl FnMut(&[i64]) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|idx| f(SignedIndex::from_storage(&grid, idx).components()))
            .collect();
        Self {
            grid,
            values,
            label: None,
        }
    }

    /// `c·δ_0`.
    pub fn delta(grid: GaborGrid, c: Complex64) -> Self {
        let mut s = Self::zeros(grid);
        s.values[0] = c;
        s
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
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

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Value at an arbitrary integer multi-index, reduced modulo `d`.
    pub fn at(&self, j: &[i64]) -> Complex64 {
        let canonical: Vec<usize> = j.iter().map(|&c| self.grid.wrap(c)).collect();
        self.values[self.grid.ravel(&canonical)]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            label: self.label.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left_n: self.grid.n(),
                left_l: self.grid.l(),
                right_n: other.grid.n(),
                right_l: other.grid.l(),
            });
        }
        Ok(())
    }

    /// `Σ|b(j)|² / N^l`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid.n_pow_l() as f64
    }

    /// The `ℓ₂^{d,l}` norm `sqrt((1/N^l) Σ|b(j)|²)`.
    pub fn norm_l2(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `(1/N^l) Σ_j conj(self(j)) other(j)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s / self.grid.n_pow_l() as f64)
    }

    fn transform(&self, direction: Direction) -> Self {
        let g = self.grid;
        let mut values = self.values.clone();
        CubeFft::new(g.d(), g.l(), direction).run(&mut values);
        let s = 1.0 / g.n_pow_l() as f64;
        values.iter_mut().for_each(|v| *v *= s);
        Self {
            grid: g,
            values,
            label: None,
        }
    }

    /// `F_{d,l}(b)(k) = (1/N^l) Σ_j b(j) e^{-2πi j·k/d}`, an isometry.
    pub fn dft(&self) -> Self {
        self.transform(Direction::Forward)
    }

    /// Inverse of [`dft`](Self::dft): `(1/N^l) Σ_k c(k) e^{2πi j·k/d}`.
    pub fn idft(&self) -> Self {
        self.transform(Direction::Inverse)
    }

    /// `(a∗b)(k) = (1/N^l) Σ_j a(k−j) b(j)`.
    ///
    /// With this normalization `dft(a∗b) = dft(a)·dft(b)` with no extra factor.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let fa = self.dft();
        let fb = other.dft();
        let product: Vec<Complex64> = fa
            .values
            .iter()
            .zip(&fb.values)
            .map(|(x, y)| x * y)
            .collect();
        Ok(Self::new(self.grid, product)?.idft())
    }

    /// Cyclic forward difference `Δ_k b(j) = b(j+e_k) − b(j)` along axis `k` (1-based).
    pub fn difference(&self, k: usize) -> Result<Self> {
        let axis = self.grid.check_axis(k)?;
        let g = self.grid;
        let d = g.d();
        let stride = g.stride(axis);
        let values = (0..g.len())
            .map(|idx| {
                let c = g.component(idx, axis);
                let next = if c + 1 == d {
                    idx - c * stride
                } else {
                    idx + stride
                };
                self.values[next] - self.values[idx]
            })
            .collect();
        Ok(Self {
            grid: g,
            values,
            label: None,
        })
    }

    /// `‖NΔ_k b‖_{ℓ₁^{d,l}} = (1/N^l) Σ_j |NΔ_k b(j)|`.
    pub fn delta_l1_norm(&self, k: usize) -> Result<f64> {
        let diff = self.difference(k)?;
        let n = self.grid.n() as f64;
        Ok(n * diff.values.iter().map(|v| v.norm()).sum::<f64>() / self.grid.n_pow_l() as f64)
    }

    /// The atom `b(j − Nn) e^{2πi j·m/N}` for `n, m ∈ {0..N−1}^l`.
    pub fn gabor_atom(&self, n: &[usize], m: &[usize]) -> Result<Self> {
        let g = self.grid;
        let big_n = g.n();
        for v in [n, m] {
            if v.len() != g.l() {
                return Err(Error::LengthMismatch {
                    expected: g.l(),
                    got: v.len(),
                });
            }
            if let Some(c) = v.iter().find(|&&c| c >= big_n) {
                return Err(Error::ParameterOutOfRange(format!(
                    "lattice coordinate {c} not in 0..{big_n}"
                )));
            }
        }
        let roots = roots_of_unity(big_n);
        let d = g.d();
        let mut j = vec![0usize; g.l()];
        let mut src = vec![0usize; g.l()];
        let values = (0..g.len())
            .map(|idx| {
                let mut rest = idx;
                for slot in j.iter_mut().rev() {
                    *slot = rest % d;
                    rest /= d;
                }
                let mut phase = 0usize;
                for a in 0..g.l() {
                    src[a] = (j[a] + d - big_n * n[a]) % d;
                    phase = (phase + j[a] * m[a]) % big_n;
                }
                self.values[g.ravel(&src)] * roots[phase]
            })
            .collect();
        Ok(Self {
            grid: g,
            values,
            label: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
