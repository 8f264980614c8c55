//! Sample grids, region masks and the masking/weighting functions.
//!
//! Positions are addressed as `(m, n)` where `m` is the horizontal coordinate
//! (`0 <= m < width`) and `n` the vertical one (`0 <= n < height`). Storage is
//! row-major in `m`, i.e. the linear index of `(m, n)` is `m * height + n`,
//! which matches the DFT basis index layout `k = k1 * height + k2`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Extent of a grid: `width` is M (horizontal), `height` is N (vertical).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Dims {
    pub const fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub const fn square(size: usize) -> Self {
        Self::new(size, size)
    }

    /// Number of positions, |L|.
    pub const fn len(&self) -> usize {
        self.width * self.height
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, m: usize, n: usize) -> usize {
        m * self.height + n
    }

    #[inline]
    pub const fn position(&self, index: usize) -> (usize, usize) {
        (index / self.height, index % self.height)
    }

    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> {
        let height = self.height;
        (0..self.len()).map(move |i| (i / height, i % height))
    }

    fn check_non_empty(self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyGrid(self))
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_same(self, other: Dims) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self,
                found: other,
            })
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Dense 2-D array over a [`Dims`] extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dims: Dims,
    values: Vec<T>,
}

/// Real-valued samples: signal, model, residual, mask and weights.
pub type SampleGrid = Grid<f64>;

/// Complex-valued samples, e.g. evaluated basis functions.
pub type ComplexGrid = Grid<Complex64>;

impl<T: Clone> Grid<T> {
    pub fn filled(dims: Dims, value: T) -> Result<Self> {
        dims.check_non_empty()?;
        Ok(Self {
            dims,
            values: vec![value; dims.len()],
        })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        dims.check_non_empty()?;
        let values = dims.positions().map(|(m, n)| f(m, n)).collect();
        Ok(Self { dims, values })
    }
}

impl<T> Grid<T> {
    pub(crate) fn from_raw(dims: Dims, values: Vec<T>) -> Result<Self> {
        dims.check_non_empty()?;
        if values.len() != dims.len() {
            return Err(Error::SampleCount {
                expected: dims.len(),
                found: values.len(),
            });
        }
        Ok(Self { dims, values })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            dims: self.dims,
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> Grid<T> {
    #[inline]
    pub fn get(&self, m: usize, n: usize) -> T {
        self.values[self.dims.index(m, n)]
    }
}

impl Grid<f64> {
    /// Builds a grid from values laid out with linear index `m * height + n`.
    /// Rejects non-finite samples.
    pub fn from_samples(dims: Dims, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let (m, n) = dims.position(i);
            return Err(Error::NonFinite { m, n });
        }
        Self::from_raw(dims, values)
    }

    /// Like [`Grid::from_fn`] but enforces finite samples.
    pub fn from_sample_fn(dims: Dims, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let grid = Grid::from_fn(dims, f)?;
        Self::from_samples(grid.dims, grid.values)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn set(&mut self, m: usize, n: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite { m, n });
        }
        let i = self.dims.index(m, n);
        self.values[i] = value;
        Ok(())
    }

    pub fn to_complex(&self) -> ComplexGrid {
        self.map(|&v| Complex64::new(v, 0.0))
    }
}

/// Membership of a position in the extrapolation area L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Known sample, part of the support area A.
    Support,
    /// Unknown sample, part of the missing area B.
    Missing,
}

/// Partition of L into support area A and missing area B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    dims: Dims,
    support: Vec<bool>,
    support_len: usize,
}

impl RegionMask {
    /// Builds a mask from a per-position classification. At least one
    /// position must be [`Region::Support`].
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> Region) -> Result<Self> {
        dims.check_non_empty()?;
        let support: Vec<bool> = dims
            .positions()
            .map(|(m, n)| f(m, n) == Region::Support)
            .collect();
        Self::from_flags(dims, support)
    }

    /// `flags[i]` is `true` for support positions, linear index `m * height + n`.
    pub fn from_flags(dims: Dims, flags: Vec<bool>) -> Result<Self> {
        dims.check_non_empty()?;
        if flags.len() != dims.len() {
            return Err(Error::SampleCount {
                expected: dims.len(),
                found: flags.len(),
            });
        }
        let support_len = flags.iter().filter(|&&s| s).count();
        if support_len == 0 {
            return Err(Error::NoSupportSamples);
        }
        Ok(Self {
            dims,
            support: flags,
            support_len,
        })
    }

    pub fn full(dims: Dims) -> Result<Self> {
        Self::from_flags(dims, vec![true; dims.len()])
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn region(&self, m: usize, n: usize) -> Region {
        if self.support[self.dims.index(m, n)] {
            Region::Support
        } else {
            Region::Missing
        }
    }

    #[inline]
    pub fn is_support(&self, m: usize, n: usize) -> bool {
        self.support[self.dims.index(m, n)]
    }

    /// Support flags in linear index order.
    pub fn flags(&self) -> &[bool] {
        &self.support
    }

    /// |A|
    pub fn support_len(&self) -> usize {
        self.support_len
    }

    /// |B|
    pub fn missing_len(&self) -> usize {
        self.dims.len() - self.support_len
    }
}

/// Parameters of the isotropic weighting model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig {
    rho_hat: f64,
}

impl WeightConfig {
    pub const DEFAULT_RHO_HAT: f64 = 0.8;

    pub fn new(rho_hat: f64) -> Result<Self> {
        if rho_hat > 0.0 && rho_hat < 1.0 {
            Ok(Self { rho_hat })
        } else {
            Err(Error::InvalidRho(rho_hat))
        }
    }

    pub fn rho_hat(&self) -> f64 {
        self.rho_hat
    }
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            rho_hat: Self::DEFAULT_RHO_HAT,
        }
    }
}

/// The masking function b: 1 on the support area, 0 on the missing area.
pub fn masking_grid(mask: &RegionMask) -> SampleGrid {
    let values = mask
        .flags()
        .iter()
        .map(|&s| if s { 1.0 } else { 0.0 })
        .collect();
    Grid {
        dims: mask.dims(),
        values,
    }
}

/// Radially symmetric weights `rho_hat^d` where `d` is the Euclidean distance
/// to the (possibly half-integer) center `((M-1)/2, (N-1)/2)`.
pub fn isotropic_rho(dims: Dims, cfg: &WeightConfig) -> Result<SampleGrid> {
    let rho_hat = cfg.rho_hat;
    let cm = (dims.width as f64 - 1.0) / 2.0;
    let cn = (dims.height as f64 - 1.0) / 2.0;
    Grid::from_sample_fn(dims, |m, n| {
        let dm = m as f64 - cm;
        let dn = n as f64 - cn;
        rho_hat.powf(dm.hypot(dn))
    })
}

/// The weighting function w: `rho` on the support area, 0 on the missing area.
pub fn weighting_grid(rho: &SampleGrid, mask: &RegionMask) -> Result<SampleGrid> {
    rho.dims().check_same(mask.dims())?;
    let values = rho
        .as_slice()
        .iter()
        .zip(mask.flags())
        .map(|(&r, &s)| if s { r } else { 0.0 })
        .collect();
    Grid::from_samples(rho.dims(), values)
}
