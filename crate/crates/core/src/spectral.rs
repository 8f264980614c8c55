//! 2-D discrete Fourier transforms over `[m][n]` laid-out data.
//!
//! Forward: `X[k] = sum_x x[x] exp(-j 2 pi k.x)`, i.e. the weighted inner
//! product with `phi_k`. Inverse: `x[x] = sum_k X[k] exp(+j 2 pi k.x)`, the
//! synthesis `sum_k c_k phi_k`. Neither direction is normalized.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::basis::BasisSet;
use crate::grid::Dims;

pub(crate) struct Fft2 {
    dims: Dims,
    row_forward: Arc<dyn Fft<f64>>,
    row_inverse: Arc<dyn Fft<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(dims: Dims) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims,
            row_forward: planner.plan_fft_forward(dims.height),
            row_inverse: planner.plan_fft_inverse(dims.height),
            col_forward: planner.plan_fft_forward(dims.width),
            col_inverse: planner.plan_fft_inverse(dims.width),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_forward, &self.col_forward);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_inverse, &self.col_inverse);
    }

    fn run(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let Dims { width, height } = self.dims;
        assert_eq!(data.len(), width * height);
        // axis n is contiguous
        rows.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); width];
        for n in 0..height {
            for (m, c) in column.iter_mut().enumerate() {
                *c = data[m * height + n];
            }
            cols.process(&mut column);
            for (m, c) in column.iter().enumerate() {
                data[m * height + n] = *c;
            }
        }
    }
}

/// Separable direct evaluation of the same transforms, without an FFT.
pub(crate) fn dft2_direct(basis: &BasisSet, data: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let Dims { width, height } = basis.dims();
    assert_eq!(data.len(), width * height);
    let twiddle = |table: &[Complex64], t: usize| {
        if inverse {
            table[t]
        } else {
            table[t].conj()
        }
    };
    let tw_m = basis.twiddles_m();
    let tw_n = basis.twiddles_n();

    let mut partial = vec![Complex64::new(0.0, 0.0); width * height];
    for m in 0..width {
        let row = &data[m * height..(m + 1) * height];
        for k2 in 0..height {
            partial[m * height + k2] = row
                .iter()
                .enumerate()
                .map(|(n, x)| x * twiddle(tw_n, (k2 * n) % height))
                .sum();
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); width * height];
    for k1 in 0..width {
        for k2 in 0..height {
            out[k1 * height + k2] = (0..width)
                .map(|m| partial[m * height + k2] * twiddle(tw_m, (k1 * m) % width))
                .sum();
        }
    }
    out
}
