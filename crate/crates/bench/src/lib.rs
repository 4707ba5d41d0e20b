//! Benchmark fixtures. The benchmarks themselves live under `benches/`.

use fgl_core::constructions::random_unimodular;
use fgl_core::{FiniteSequence, GaborGrid};

/// `(N, l)` pairs spanning small to large grids.
pub const SIZES: &[(usize, usize)] = &[(8, 1), (32, 1), (128, 1), (8, 2), (16, 2), (32, 2)];

/// A reproducible generator on the `(N, l)` grid.
pub fn fixture(n: usize, l: usize) -> FiniteSequence {
    random_unimodular(
        GaborGrid::new(n, l).expect("benchmark sizes are in range"),
        7,
    )
}
