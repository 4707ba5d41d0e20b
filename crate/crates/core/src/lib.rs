//! Finite multivariable Gabor systems on `Z_d^l` with `d = N²`.
//!
//! The crate covers the discrete Zak transform and its identities, Riesz
//! bounds by the Zak-modulus criterion and by Gram eigenvalues, the
//! Balian-Low localization functionals, the trapezoid filters used in the
//! quantitative bound, generator constructions, and an experiment harness
//! that checks the finite uncertainty theorems numerically.
//!
//! ```
//! use fgl_core::{constructions, GaborGrid};
//!
//! let grid = GaborGrid::new(8, 1).unwrap();
//! let b = constructions::boxcar(grid);
//! let beta = fgl_core::localization::beta(&b, 1).unwrap();
//! assert!((beta - 16.0).abs() < 1e-10);
//! ```

pub mod constructions;
pub mod error;
mod fft;
pub mod filters;
pub mod gabor;
pub mod grid;
pub mod harness;
pub mod localization;
pub mod rng;
pub mod seq;
pub mod zak;

pub use error::{Error, Result};
pub use gabor::RieszBounds;
pub use grid::{GaborGrid, SignedIndex, MAX_ENTRIES};
pub use harness::{Config, ExperimentReport, SuiteReport};
pub use localization::Weight;
pub use num_complex::Complex64;
pub use seq::FiniteSequence;
pub use zak::ZakArray;

/// Tolerance for exact identities.
pub const TAU_ID: f64 = 1e-10;
