//! Orthogonality deficiency compensation.
//!
//! Restricted to the support area and weighted by `w`, the DFT basis
//! functions are no longer orthogonal: the projection coefficient `p_k`
//! collects leakage from every other function. With
//!
//! ```text
//! K[k][l] = sum_x w[x] phi_l[x] conj(phi_k[x])      Khat = diag(K)^-1 K
//! ```
//!
//! the projections satisfy `p = Khat c` for the true expansion coefficients
//! `c`. Assuming `p` is roughly proportional to `c`, the coefficient of
//! function `k` is estimated as
//!
//! ```text
//! c_k = p_k / D_k,   D_k = sum_l (p_l / p_k) Khat[k][l]
//! ```
//!
//! For DFT functions `K[k][l]` only depends on the frequency difference:
//! it is the forward DFT of `w` at `(k - l) mod (M, N)`. The spectral
//! operator stores that one spectrum instead of the |L|^2 matrix.

use num_complex::Complex64;

use crate::basis::{BasisIndex, BasisSet};
use crate::error::{Error, Result};
use crate::grid::{Dims, SampleGrid};
use crate::spectral::{dft2_direct, Fft2};

/// Largest |L| for which [`build_k_matrix_dense`] will build the full matrix.
pub const DEFAULT_DENSE_LIMIT: usize = 1024;

/// Denominators with a smaller magnitude are rejected by [`compensate`].
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// How the complex denominator `D_k` scales the projection coefficient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Denominator {
    /// `c_k = p_k / |D_k|`: the estimate keeps the phase of `p_k` and only
    /// its magnitude is compensated.
    #[default]
    Modulus,
    /// `c_k = p_k / D_k` with complex division.
    Complex,
}

/// Dense reference matrix K.
#[derive(Debug, Clone, PartialEq)]
pub struct KMatrix {
    dims: Dims,
    entries: Vec<Complex64>,
}

impl KMatrix {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Number of rows (and columns), |L|.
    pub fn size(&self) -> usize {
        self.dims.len()
    }

    pub fn get(&self, k: BasisIndex, l: BasisIndex) -> Complex64 {
        self.entries[k.get() * self.size() + l.get()]
    }
}

/// Builds K by direct summation. Reference use only: cost is O(|L|^3).
pub fn build_k_matrix_dense(w: &SampleGrid, basis: &BasisSet, limit: usize) -> Result<KMatrix> {
    basis.dims().check_same(w.dims())?;
    let dims = basis.dims();
    let size = dims.len();
    if size > limit {
        return Err(Error::DenseLimit { size, limit });
    }
    let mut entries = Vec::with_capacity(size * size);
    for k in basis.indices() {
        for l in basis.indices() {
            let entry: Complex64 = dims
                .positions()
                .zip(w.as_slice())
                .map(|((m, n), &wt)| basis.value(l, m, n) * basis.value(k, m, n).conj() * wt)
                .sum();
            entries.push(entry);
        }
    }
    Ok(KMatrix { dims, entries })
}

#[derive(Debug, Clone)]
enum Backing {
    /// Row-major Khat.
    Dense(Vec<Complex64>),
    /// Forward DFT of `w`, with the DC bin pinned to `sum_w`.
    Spectral {
        spectrum: Vec<Complex64>,
        sum_w: f64,
    },
}

/// Row accessor for Khat.
#[derive(Debug, Clone)]
pub struct OdcOperator {
    dims: Dims,
    backing: Backing,
}

#[inline]
pub(crate) fn included(p: Complex64, floor: f64) -> bool {
    let mag = p.norm_sqr();
    mag > 0.0 && mag >= floor * floor
}

impl OdcOperator {
    /// Normalizes each row of `k` by its diagonal entry.
    pub fn from_dense(k: &KMatrix) -> Result<Self> {
        let size = k.size();
        let mut khat = k.entries.clone();
        for (row, chunk) in khat.chunks_mut(size).enumerate() {
            let diag = k.entries[row * size + row].re;
            if !(diag > 0.0) {
                return Err(Error::NoSupport);
            }
            for v in chunk.iter_mut() {
                *v /= diag;
            }
            chunk[row] = Complex64::new(1.0, 0.0);
        }
        Ok(Self {
            dims: k.dims,
            backing: Backing::Dense(khat),
        })
    }

    fn from_spectrum(dims: Dims, mut spectrum: Vec<Complex64>, w: &SampleGrid) -> Result<Self> {
        let sum_w = w.sum();
        if !(sum_w > 0.0) {
            return Err(Error::NoSupport);
        }
        spectrum[0] = Complex64::new(sum_w, 0.0);
        Ok(Self {
            dims,
            backing: Backing::Spectral { spectrum, sum_w },
        })
    }

    /// Spectral operator with the spectrum of `w` evaluated by direct
    /// (separable) summation instead of an FFT.
    pub(crate) fn spectral_direct(w: &SampleGrid, basis: &BasisSet) -> Result<Self> {
        basis.dims().check_same(w.dims())?;
        let spectrum = dft2_direct(basis, w.to_complex().as_slice(), false);
        Self::from_spectrum(w.dims(), spectrum, w)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.backing, Backing::Spectral { .. })
    }

    /// Forward DFT of the weights when spectrally backed.
    pub(crate) fn spectrum(&self) -> Option<(&[Complex64], f64)> {
        match &self.backing {
            Backing::Spectral { spectrum, sum_w } => Some((spectrum, *sum_w)),
            Backing::Dense(_) => None,
        }
    }

    /// `(Khat)[k][l]`
    pub fn entry(&self, k: BasisIndex, l: BasisIndex) -> Complex64 {
        match &self.backing {
            Backing::Dense(khat) => khat[k.get() * self.dims.len() + l.get()],
            Backing::Spectral { spectrum, sum_w } => {
                if k == l {
                    return Complex64::new(1.0, 0.0);
                }
                let Dims { width, height } = self.dims;
                let (k1, k2) = self.dims.position(k.get());
                let (l1, l2) = self.dims.position(l.get());
                let d1 = (k1 + width - l1) % width;
                let d2 = (k2 + height - l2) % height;
                spectrum[d1 * height + d2] / *sum_w
            }
        }
    }

    /// `sum over included l of p_l * Khat[k][l]`.
    pub(crate) fn row_dot(&self, k: BasisIndex, p: &[Complex64], floor: f64) -> Complex64 {
        let size = self.dims.len();
        debug_assert_eq!(p.len(), size);
        match &self.backing {
            Backing::Dense(khat) => {
                let row = &khat[k.get() * size..(k.get() + 1) * size];
                row.iter()
                    .zip(p)
                    .filter(|(_, &pl)| included(pl, floor))
                    .map(|(e, pl)| pl * e)
                    .sum()
            }
            Backing::Spectral { spectrum, sum_w } => {
                let Dims { width, height } = self.dims;
                let (k1, k2) = self.dims.position(k.get());
                let mut acc = Complex64::new(0.0, 0.0);
                for l1 in 0..width {
                    let d1 = (k1 + width - l1) % width;
                    let spec_row = &spectrum[d1 * height..(d1 + 1) * height];
                    let p_row = &p[l1 * height..(l1 + 1) * height];
                    for (l2, &pl) in p_row.iter().enumerate() {
                        if !included(pl, floor) {
                            continue;
                        }
                        let d2 = if l2 <= k2 { k2 - l2 } else { k2 + height - l2 };
                        acc += pl * spec_row[d2];
                    }
                }
                acc / *sum_w
            }
        }
    }
}

/// Builds Khat from one FFT of the weighting function.
pub fn build_khat_spectral(w: &SampleGrid) -> Result<OdcOperator> {
    let dims = w.dims();
    let mut spectrum = w.to_complex().into_vec();
    Fft2::new(dims).forward(&mut spectrum);
    OdcOperator::from_spectrum(dims, spectrum, w)
}

/// Compensated expansion coefficient for function `k`.
///
/// Projection coefficients below `floor` (or exactly zero) are left out of the
/// denominator sum; `p_k` itself must pass the floor.
pub fn compensate(
    p: &[Complex64],
    k: BasisIndex,
    op: &OdcOperator,
    floor: f64,
    mode: Denominator,
) -> Result<Complex64> {
    if p.len() != op.dims().len() {
        return Err(Error::SampleCount {
            expected: op.dims().len(),
            found: p.len(),
        });
    }
    let pk = *p.get(k.get()).ok_or(Error::IndexOutOfRange {
        index: k.get(),
        len: p.len(),
    })?;
    if !included(pk, floor) {
        return Err(Error::BelowFloor { floor });
    }
    let denominator = op.row_dot(k, p, floor) / pk;
    let magnitude = denominator.norm();
    if !(magnitude >= DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateDenominator(magnitude));
    }
    Ok(match mode {
        Denominator::Modulus => pk / magnitude,
        Denominator::Complex => pk / denominator,
    })
}
