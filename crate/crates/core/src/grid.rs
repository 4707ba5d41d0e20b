//! Discretization parameters and the signed index view of `Z_d^l`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of entries a sequence on `Z_d^l` may have.
pub const MAX_ENTRIES: usize = 1 << 24;

/// The lattice parameter `N`, the cycle length `d = N²` and the number of
/// variables `l`.
///
/// Every other object in the crate references one of these. Construction
/// rejects grids whose `d^l` exceeds [`MAX_ENTRIES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct GaborGrid {
    n: usize,
    l: usize,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    #[serde(rename = "N")]
    n: usize,
    l: usize,
}

impl TryFrom<GridRepr> for GaborGrid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        GaborGrid::new(r.n, r.l)
    }
}

impl From<GaborGrid> for GridRepr {
    fn from(g: GaborGrid) -> Self {
        GridRepr { n: g.n, l: g.l }
    }
}

impl GaborGrid {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("N must be positive".into()));
        }
        if l == 0 {
            return Err(Error::InvalidGrid("l must be at least 1".into()));
        }
        let entries = Self::entry_count(n, l);
        if entries > MAX_ENTRIES as u128 {
            return Err(Error::GridTooLarge {
                entries,
                limit: MAX_ENTRIES,
            });
        }
        Ok(Self { n, l })
    }

    /// `d^l` computed without overflow, for size checks ahead of construction.
    pub fn entry_count(n: usize, l: usize) -> u128 {
        let d = (n as u128) * (n as u128);
        let mut total: u128 = 1;
        for _ in 0..l {
            total = total.saturating_mul(d);
        }
        total
    }

    /// Lattice parameter `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cycle length `d = N²`.
    pub fn d(&self) -> usize {
        self.n * self.n
    }

    /// Number of variables `l`.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of entries `d^l` of a sequence on this grid.
    pub fn len(&self) -> usize {
        self.d().pow(self.l as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `N^l`, the normalization constant of the `ℓ₂^{d,l}` norm.
    pub fn n_pow_l(&self) -> usize {
        self.n.pow(self.l as u32)
    }

    /// Number of points of `S_N^{2l}`, which equals `d^l`.
    pub fn zak_len(&self) -> usize {
        self.len()
    }

    /// Same `N` with a different number of variables.
    pub fn with_l(&self, l: usize) -> Result<Self> {
        Self::new(self.n, l)
    }

    /// Row-major stride of axis `axis` (0-based, axis 0 outermost).
    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.d().pow((self.l - 1 - axis) as u32)
    }

    /// Storage index of the multi-index `j` (each component in `0..d`).
    pub fn ravel(&self, j: &[usize]) -> usize {
        debug_assert_eq!(j.len(), self.l);
        let d = self.d();
        j.iter().fold(0, |acc, &c| acc * d + c)
    }

    /// Multi-index of storage index `idx`.
    pub fn unravel(&self, idx: usize) -> Vec<usize> {
        let d = self.d();
        let mut out = vec![0; self.l];
        let mut rest = idx;
        for slot in out.iter_mut().rev() {
            *slot = rest % d;
            rest /= d;
        }
        out
    }

    /// The representative of `j mod d` in `I_d = [-d/2, d/2)`.
    pub fn signed(&self, j: usize) -> i64 {
        let d = self.d();
        let half = d / 2;
        if j >= d - half {
            j as i64 - d as i64
        } else {
            j as i64
        }
    }

    /// Canonical storage index `0..d` of an arbitrary integer.
    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.d() as i64) as usize
    }

    /// Component `axis` (0-based) of the multi-index stored at `idx`.
    pub(crate) fn component(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.d()
    }

    /// Validate a 1-based axis number.
    pub fn check_axis(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.l {
            Err(Error::AxisOutOfRange { axis: k, l: self.l })
        } else {
            Ok(k - 1)
        }
    }
}

/// A multi-index written with components in `I_d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedIndex(Vec<i64>);

impl SignedIndex {
    pub fn new(grid: &GaborGrid, components: Vec<i64>) -> Result<Self> {
        if components.len() != grid.l() {
            return Err(Error::LengthMismatch {
                expected: grid.l(),
                got: components.len(),
            });
        }
        let d = grid.d() as i64;
        let lo = -(d / 2);
        let hi = d - d / 2 - 1;
        if let Some(c) = components.iter().find(|&&c| c < lo || c > hi) {
            return Err(Error::ParameterOutOfRange(format!(
                "component {c} not in [{lo}, {hi}]"
            )));
        }
        Ok(Self(components))
    }

    /// The signed view of storage index `idx`.
    pub fn from_storage(grid: &GaborGrid, idx: usize) -> Self {
        Self(
            grid.unravel(idx)
                .into_iter()
                .map(|j| grid.signed(j))
                .collect(),
        )
    }

    pub fn to_storage(&self, grid: &GaborGrid) -> usize {
        let canonical: Vec<usize> = self.0.iter().map(|&c| grid.wrap(c)).collect();
        grid.ravel(&canonical)
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_is_n_squared() {
        let g = GaborGrid::new(5, 2).unwrap();
        assert_eq!(g.d(), 25);
        assert_eq!(g.len(), 625);
        assert_eq!(g.n_pow_l(), 25);
    }

    #[test]
    fn size_guard() {
        assert!(GaborGrid::new(64, 2).is_ok());
        assert!(matches!(
            GaborGrid::new(128, 2),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(GaborGrid::new(0, 1).is_err());
        assert!(GaborGrid::new(3, 0).is_err());
    }

    #[test]
    fn signed_representatives() {
        let g = GaborGrid::new(2, 1).unwrap();
        let reps: Vec<i64> = (0..4).map(|j| g.signed(j)).collect();
        assert_eq!(reps, vec![0, 1, -2, -1]);

        let g = GaborGrid::new(3, 1).unwrap();
        let mut reps: Vec<i64> = (0..9).map(|j| g.signed(j)).collect();
        reps.sort();
        assert_eq!(reps, (-4..=4).collect::<Vec<_>>());
    }

    #[test]
    fn ravel_roundtrip() {
        let g = GaborGrid::new(3, 3).unwrap();
        for idx in [0, 1, 80, 500, g.len() - 1] {
            assert_eq!(g.ravel(&g.unravel(idx)), idx);
        }
        // axis 1 outermost
        assert_eq!(g.ravel(&[1, 0, 0]), 81);
        assert_eq!(g.component(81, 0), 1);
    }

    #[test]
    fn signed_index_bounds() {
        let g = GaborGrid::new(2, 2).unwrap();
        assert!(SignedIndex::new(&g, vec![-2, 1]).is_ok());
        assert!(SignedIndex::new(&g, vec![2, 0]).is_err());
        let s = SignedIndex::new(&g, vec![-1, -2]).unwrap();
        assert_eq!(SignedIndex::from_storage(&g, s.to_storage(&g)), s);
    }
}
