//! Two-dimensional DFT basis functions over the extrapolation area.
//!
//! `phi_k[m, n] = exp(+j 2 pi (k1 m / M + k2 n / N))` with `k = k1 * N + k2`.
//! Values are generated from per-axis twiddle tables on demand; no table of
//! all |L| functions is ever materialized.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, Dims, Grid, SampleGrid};

/// Linear index of a basis function, `k = k1 * height + k2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub const DC: BasisIndex = BasisIndex(0);

    pub(crate) fn from_raw(k: usize) -> Self {
        BasisIndex(k)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Unit circle sampled at `period` points: `table[t] = exp(+j 2 pi t / period)`.
pub(crate) fn twiddles(period: usize) -> Vec<Complex64> {
    (0..period)
        .map(|t| {
            let (s, c) = (TAU * t as f64 / period as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

/// The |L| DFT basis functions for one extrapolation area.
#[derive(Debug, Clone)]
pub struct BasisSet {
    dims: Dims,
    tw_m: Vec<Complex64>,
    tw_n: Vec<Complex64>,
}

impl BasisSet {
    pub fn new(dims: Dims) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyGrid(dims));
        }
        Ok(Self {
            dims,
            tw_m: twiddles(dims.width),
            tw_n: twiddles(dims.height),
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Number of basis functions, |L|.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, k: usize) -> Result<BasisIndex> {
        if k < self.len() {
            Ok(BasisIndex(k))
        } else {
            Err(Error::IndexOutOfRange {
                index: k,
                len: self.len(),
            })
        }
    }

    pub fn from_frequency(&self, k1: usize, k2: usize) -> Result<BasisIndex> {
        if k1 >= self.dims.width || k2 >= self.dims.height {
            return Err(Error::IndexOutOfRange {
                index: k1 * self.dims.height + k2,
                len: self.len(),
            });
        }
        Ok(BasisIndex(self.dims.index(k1, k2)))
    }

    pub fn indices(&self) -> impl Iterator<Item = BasisIndex> {
        (0..self.len()).map(BasisIndex)
    }

    /// Frequency pair `(k1, k2)`.
    pub fn frequency(&self, k: BasisIndex) -> (usize, usize) {
        self.dims.position(k.0)
    }

    /// Index of the complex conjugate function,
    /// `((M - k1) mod M) * N + ((N - k2) mod N)`.
    pub fn conj(&self, k: BasisIndex) -> BasisIndex {
        let (k1, k2) = self.frequency(k);
        let Dims { width, height } = self.dims;
        BasisIndex(
            self.dims
                .index((width - k1) % width, (height - k2) % height),
        )
    }

    pub fn is_self_conjugate(&self, k: BasisIndex) -> bool {
        self.conj(k) == k
    }

    /// The smaller index of the conjugate pair containing `k`.
    pub fn canonical(&self, k: BasisIndex) -> BasisIndex {
        k.min(self.conj(k))
    }

    #[inline]
    pub fn value(&self, k: BasisIndex, m: usize, n: usize) -> Complex64 {
        let (k1, k2) = self.frequency(k);
        self.tw_m[(k1 * m) % self.dims.width] * self.tw_n[(k2 * n) % self.dims.height]
    }

    pub(crate) fn twiddles_m(&self) -> &[Complex64] {
        &self.tw_m
    }

    pub(crate) fn twiddles_n(&self) -> &[Complex64] {
        &self.tw_n
    }

    /// Evaluates `phi_k` over the whole area.
    pub fn evaluate(&self, k: BasisIndex) -> Result<ComplexGrid> {
        let k = self.index(k.0)?;
        Grid::from_fn(self.dims, |m, n| self.value(k, m, n))
    }
}

/// `sum over L of x * conj(y) * w`.
pub fn weighted_inner_product(
    x: &ComplexGrid,
    y: &ComplexGrid,
    w: &SampleGrid,
) -> Result<Complex64> {
    x.dims().check_same(y.dims())?;
    x.dims().check_same(w.dims())?;
    Ok(x.as_slice()
        .iter()
        .zip(y.as_slice())
        .zip(w.as_slice())
        .map(|((a, b), &wt)| a * b.conj() * wt)
        .sum())
}

/// `sum over L of w * |phi_k|^2`, the projection normalization for `phi_k`.
pub fn weighted_basis_norm(basis: &BasisSet, k: BasisIndex, w: &SampleGrid) -> Result<f64> {
    basis.dims().check_same(w.dims())?;
    let k = basis.index(k.0)?;
    if !(w.sum() > 0.0) {
        return Err(Error::NoSupport);
    }
    let dims = basis.dims();
    Ok(dims
        .positions()
        .zip(w.as_slice())
        .map(|((m, n), &wt)| wt * basis.value(k, m, n).norm_sqr())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{
        isotropic_rho, masking_grid, weighting_grid, Region, RegionMask, WeightConfig,
    };

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn dc_is_all_ones() {
        let basis = BasisSet::new(Dims::new(3, 4)).unwrap();
        let g = basis.evaluate(BasisIndex::DC).unwrap();
        assert!(g.as_slice().iter().all(|&v| v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn two_by_two_horizontal_frequency() {
        let basis = BasisSet::new(Dims::square(2)).unwrap();
        let k = basis.from_frequency(1, 0).unwrap();
        let g = basis.evaluate(k).unwrap();
        // storage is [m][n]: (0,0), (0,1), (1,0), (1,1)
        let expected = [1.0, 1.0, -1.0, -1.0];
        for (v, e) in g.as_slice().iter().zip(expected) {
            assert!(close(*v, Complex64::new(e, 0.0), 1e-15));
        }
    }

    #[test]
    fn conjugate_index_evaluates_to_conjugate() {
        let basis = BasisSet::new(Dims::new(5, 6)).unwrap();
        for k in basis.indices() {
            let a = basis.evaluate(k).unwrap();
            let b = basis.evaluate(basis.conj(k)).unwrap();
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!(close(*x, y.conj(), 1e-14));
            }
            assert_eq!(basis.conj(basis.conj(k)), k);
        }
    }

    #[test]
    fn self_conjugate_functions_are_real() {
        let basis = BasisSet::new(Dims::new(4, 6)).unwrap();
        let selfconj: Vec<_> = basis
            .indices()
            .filter(|&k| basis.is_self_conjugate(k))
            .collect();
        assert_eq!(selfconj.len(), 4);
        for k in selfconj {
            let g = basis.evaluate(k).unwrap();
            assert!(g.as_slice().iter().all(|v| v.im.abs() < 1e-15));
        }
    }

    #[test]
    fn out_of_range_index() {
        let basis = BasisSet::new(Dims::square(3)).unwrap();
        assert!(matches!(
            basis.index(9),
            Err(Error::IndexOutOfRange { index: 9, len: 9 })
        ));
        assert!(basis.from_frequency(3, 0).is_err());
    }

    #[test]
    fn inner_product_of_dc_is_area_size() {
        let dims = Dims::new(4, 5);
        let basis = BasisSet::new(dims).unwrap();
        let dc = basis.evaluate(BasisIndex::DC).unwrap();
        let ones = SampleGrid::filled(dims, 1.0).unwrap();
        let zeros = SampleGrid::filled(dims, 0.0).unwrap();
        assert!(close(
            weighted_inner_product(&dc, &dc, &ones).unwrap(),
            Complex64::new(20.0, 0.0),
            1e-12
        ));
        assert_eq!(
            weighted_inner_product(&dc, &dc, &zeros).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn inner_product_matches_double_loop() {
        let dims = Dims::square(8);
        let basis = BasisSet::new(dims).unwrap();
        let w = isotropic_rho(dims, &WeightConfig::default()).unwrap();
        let x = basis.evaluate(basis.index(1).unwrap()).unwrap();
        let y = basis.evaluate(basis.index(2).unwrap()).unwrap();
        let mut expected = Complex64::new(0.0, 0.0);
        for m in 0..8 {
            for n in 0..8 {
                let phase_x = TAU * (n as f64) / 8.0;
                let phase_y = TAU * (2.0 * n as f64) / 8.0;
                let d = ((m as f64 - 3.5).powi(2) + (n as f64 - 3.5).powi(2)).sqrt();
                expected += Complex64::from_polar(1.0, phase_x - phase_y) * 0.8f64.powf(d);
            }
        }
        let got = weighted_inner_product(&x, &y, &w).unwrap();
        assert!(close(got, expected, 1e-12), "{got} vs {expected}");
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let a = ComplexGrid::filled(Dims::new(2, 2), Complex64::new(1.0, 0.0)).unwrap();
        let b = ComplexGrid::filled(Dims::new(2, 3), Complex64::new(1.0, 0.0)).unwrap();
        let w = SampleGrid::filled(Dims::new(2, 2), 1.0).unwrap();
        assert!(weighted_inner_product(&a, &b, &w).is_err());
    }

    #[test]
    fn basis_norms() {
        let dims = Dims::square(4);
        let basis = BasisSet::new(dims).unwrap();
        let ones = SampleGrid::filled(dims, 1.0).unwrap();
        let mask = RegionMask::from_fn(dims, |m, n| {
            if (1..3).contains(&m) && (1..3).contains(&n) {
                Region::Missing
            } else {
                Region::Support
            }
        })
        .unwrap();
        let b = masking_grid(&mask);
        for k in basis.indices() {
            assert!((weighted_basis_norm(&basis, k, &ones).unwrap() - 16.0).abs() < 1e-12);
            assert!((weighted_basis_norm(&basis, k, &b).unwrap() - 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_norm_equals_weight_sum() {
        let dims = Dims::square(64);
        let basis = BasisSet::new(dims).unwrap();
        let rho = isotropic_rho(dims, &WeightConfig::default()).unwrap();
        let mask = RegionMask::from_fn(dims, |m, n| {
            if (24..40).contains(&m) && (24..40).contains(&n) {
                Region::Missing
            } else {
                Region::Support
            }
        })
        .unwrap();
        let w = weighting_grid(&rho, &mask).unwrap();
        let total = w.sum();
        for k in [0, 1, 65, 2047, 4095] {
            let norm = weighted_basis_norm(&basis, basis.index(k).unwrap(), &w).unwrap();
            assert!((norm - total).abs() < 1e-12 * total.max(1.0));
        }
    }

    #[test]
    fn basis_norm_without_support() {
        let dims = Dims::square(3);
        let basis = BasisSet::new(dims).unwrap();
        let zeros = SampleGrid::filled(dims, 0.0).unwrap();
        assert!(matches!(
            weighted_basis_norm(&basis, BasisIndex::DC, &zeros),
            Err(Error::NoSupport)
        ));
    }
}
