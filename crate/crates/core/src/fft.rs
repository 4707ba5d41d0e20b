//! Unnormalized multi-axis FFTs over hypercubes, plus exact roots of unity.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `Σ x(j) e^{-2πi jk/n}`
    Forward,
    /// `Σ x(j) e^{+2πi jk/n}`
    Inverse,
}

/// FFT over every axis of a `dims`-dimensional cube of side `side`, stored
/// row-major. The plan is reusable across many cubes of the same shape.
pub(crate) struct CubeFft {
    side: usize,
    dims: usize,
    plan: Arc<dyn Fft<f64>>,
}

impl CubeFft {
    pub fn new(side: usize, dims: usize, direction: Direction) -> Self {
        let mut planner = FftPlanner::new();
        let plan = match direction {
            Direction::Forward => planner.plan_fft_forward(side),
            Direction::Inverse => planner.plan_fft_inverse(side),
        };
        Self { side, dims, plan }
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dims as u32)
    }

    /// Transform `data` in place. `scratch` must hold at least
    /// `scratch_len() + side` entries.
    pub fn process(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        debug_assert_eq!(data.len(), self.len());
        let side = self.side;
        let need = self.plan.get_inplace_scratch_len() + side;
        if scratch.len() < need {
            scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        let (line, fft_scratch) = scratch.split_at_mut(side);
        for axis in 0..self.dims {
            let stride = side.pow((self.dims - 1 - axis) as u32);
            if stride == 1 {
                self.plan.process_with_scratch(data, fft_scratch);
                continue;
            }
            let block = stride * side;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    self.plan.process_with_scratch(line, fft_scratch);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
    }

    pub fn run(&self, data: &mut [Complex64]) {
        let mut scratch = Vec::new();
        self.process(data, &mut scratch);
    }
}

/// `e^{2πi r/n}` for `r in 0..n`, each computed directly from its angle.
pub(crate) fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|r| {
            let (s, c) = (TAU * r as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}
