//! Iterative generation of the sparse DFT model.
//!
//! Each iteration projects the weighted residual onto every basis function,
//! selects the function whose weighted projection removes the most residual
//! energy, estimates its expansion coefficient (optionally with orthogonality
//! deficiency compensation), adds it to the model and subtracts it from the
//! residual on the support area.
//!
//! The signal is real, so basis functions are handled as conjugate pairs: one
//! iteration adds `c * phi_u + conj(c) * phi_conj(u)` (or just `c * phi_u`
//! with real `c` for a self-conjugate `u`). The selected index is reported as
//! the smaller member of its pair.
//!
//! Two evaluation paths share these semantics. The direct path recomputes
//! every projection by explicit summation. The fast path keeps the forward
//! DFT of `r * w` and updates it in place: subtracting `c * phi_u` from the
//! residual shifts the spectrum of `w` by `u`, so an iteration costs O(|L|)
//! and FFTs are only needed to enter and leave the frequency domain.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::basis::{weighted_basis_norm, BasisIndex, BasisSet};
use crate::error::{Error, Result};
use crate::grid::{
    isotropic_rho, weighting_grid, ComplexGrid, Grid, RegionMask, SampleGrid, WeightConfig,
};
use crate::odc::{build_khat_spectral, compensate, included, Denominator, OdcOperator};
use crate::spectral::{dft2_direct, Fft2};

/// Synthesized models with a larger imaginary part are rejected.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-6;

/// Relative factor of the default projection floor, see
/// [`default_projection_floor`].
pub const DEFAULT_FLOOR_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Number of iterations (conjugate pairs) to add at most.
    pub max_iterations: usize,
    /// Compensate projection coefficients for orthogonality deficiency.
    /// When off, the projection coefficient is used directly.
    pub odc_enabled: bool,
    /// Frequency-domain evaluation instead of direct summation.
    pub fast_path: bool,
    /// Stop once the weighted residual energy drops to this value.
    pub residual_energy_stop: Option<f64>,
    /// Projections with a smaller magnitude are ignored. `None` selects
    /// [`default_projection_floor`].
    pub projection_floor: Option<f64>,
    pub denominator: Denominator,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_iterations: 250,
            odc_enabled: true,
            fast_path: true,
            residual_energy_stop: None,
            projection_floor: None,
            denominator: Denominator::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if let Some(floor) = self.projection_floor {
            if !(floor >= 0.0 && floor.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "projection floor must be finite and non-negative, got {floor}"
                )));
            }
        }
        if let Some(stop) = self.residual_energy_stop {
            if !(stop >= 0.0 && stop.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "residual energy threshold must be finite and non-negative, got {stop}"
                )));
            }
        }
        Ok(())
    }
}

/// `1e-12 * max|f| * |L|`, with the maximum taken over the support area.
pub fn default_projection_floor(f: &SampleGrid, mask: &RegionMask) -> f64 {
    let max = f
        .as_slice()
        .iter()
        .zip(mask.flags())
        .filter(|(_, &s)| s)
        .fold(0.0f64, |acc, (v, _)| acc.max(v.abs()));
    DEFAULT_FLOOR_FACTOR * max * f.dims().len() as f64
}

/// Model coefficients and residual after some number of iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    coefficients: BTreeMap<BasisIndex, Complex64>,
    residual: SampleGrid,
    iteration: usize,
    floor: f64,
    // fast path only: forward DFT of residual * w
    weighted_spectrum: Option<Vec<Complex64>>,
}

impl ModelState {
    /// Accumulated expansion coefficient per basis function.
    pub fn coefficients(&self) -> &BTreeMap<BasisIndex, Complex64> {
        &self.coefficients
    }

    /// Residual on the support area; zero on the missing area.
    pub fn residual(&self) -> &SampleGrid {
        &self.residual
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Projection floor resolved for this run.
    pub fn floor(&self) -> f64 {
        self.floor
    }
}

/// What one iteration did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// Iteration number after the step (1 for the first step).
    pub iteration: usize,
    /// Canonical (smaller) index of the selected conjugate pair.
    pub selected: BasisIndex,
    /// Projection coefficient of the selected function.
    pub projection: Complex64,
    /// Coefficient added to the model at `selected`.
    pub coefficient: Complex64,
    /// The compensation denominator was degenerate and the projection
    /// coefficient was used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    /// All projection coefficients fell below the floor.
    Converged,
    ResidualEnergy,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    /// Real part of the synthesized model over the whole area.
    pub model: SampleGrid,
    pub state: ModelState,
    pub fallbacks: usize,
    pub stop: StopReason,
}

/// Selection by the full weighted criterion `|p_k|^2 * norms[k]`; ties go to
/// the smallest index.
fn select_with_norms(p: &[Complex64], norms: &[f64], floor: f64) -> Result<BasisIndex> {
    let mut best: Option<(usize, f64)> = None;
    for (k, (pk, norm)) in p.iter().zip(norms).enumerate() {
        if !included(*pk, floor) {
            continue;
        }
        let score = pk.norm_sqr() * norm;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((k, score));
        }
    }
    best.map(|(k, _)| BasisIndex::from_raw(k))
        .ok_or(Error::BelowFloor { floor })
}

fn weight_norms(basis: &BasisSet, w: &SampleGrid) -> Result<Vec<f64>> {
    basis
        .indices()
        .map(|k| weighted_basis_norm(basis, k, w))
        .collect()
}

fn weighted_residual(residual: &SampleGrid, w: &SampleGrid) -> Vec<Complex64> {
    residual
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .map(|(r, wt)| Complex64::new(r * wt, 0.0))
        .collect()
}

/// Weighted projection of `residual` onto every basis function:
/// `p_k = <r, phi_k>_w / <phi_k, phi_k>_w`.
pub fn project_all(
    residual: &SampleGrid,
    w: &SampleGrid,
    basis: &BasisSet,
    fast: bool,
) -> Result<Vec<Complex64>> {
    basis.dims().check_same(residual.dims())?;
    basis.dims().check_same(w.dims())?;
    let sum_w = w.sum();
    if !(sum_w > 0.0) {
        return Err(Error::NoSupport);
    }
    let mut spectrum = weighted_residual(residual, w);
    if fast {
        Fft2::new(basis.dims()).forward(&mut spectrum);
        Ok(spectrum.into_iter().map(|s| s / sum_w).collect())
    } else {
        let norms = weight_norms(basis, w)?;
        let spectrum = dft2_direct(basis, &spectrum, false);
        Ok(spectrum.iter().zip(&norms).map(|(s, n)| s / n).collect())
    }
}

/// Index maximizing `|p_k|^2 * sum(w * |phi_k|^2)` among coefficients at or
/// above `floor`. Fails with [`Error::BelowFloor`] when none qualifies.
pub fn select_basis(
    p: &[Complex64],
    w: &SampleGrid,
    basis: &BasisSet,
    floor: f64,
) -> Result<BasisIndex> {
    basis.dims().check_same(w.dims())?;
    if p.len() != basis.len() {
        return Err(Error::SampleCount {
            expected: basis.len(),
            found: p.len(),
        });
    }
    let norms = weight_norms(basis, w)?;
    select_with_norms(p, &norms, floor)
}

/// Prepared extrapolation problem for one mask and weighting.
pub struct Engine {
    cfg: EngineConfig,
    basis: BasisSet,
    mask: RegionMask,
    weights: SampleGrid,
    norms: Vec<f64>,
    operator: OdcOperator,
    fft: Option<Fft2>,
}

impl Engine {
    pub fn new(mask: &RegionMask, weights: SampleGrid, cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        mask.dims().check_same(weights.dims())?;
        let basis = BasisSet::new(mask.dims())?;
        // w must vanish on the missing area
        let weights = {
            let values = weights
                .as_slice()
                .iter()
                .zip(mask.flags())
                .map(|(&w, &s)| if s { w } else { 0.0 })
                .collect();
            SampleGrid::from_samples(mask.dims(), values)?
        };
        let (operator, norms, fft) = if cfg.fast_path {
            let operator = build_khat_spectral(&weights)?;
            let (spectrum, _) = operator.spectrum().expect("spectral operator");
            // diagonal of K
            let norms = vec![spectrum[0].re; basis.len()];
            (operator, norms, Some(Fft2::new(mask.dims())))
        } else {
            let operator = OdcOperator::spectral_direct(&weights, &basis)?;
            (operator, weight_norms(&basis, &weights)?, None)
        };
        Ok(Self {
            cfg,
            basis,
            mask: mask.clone(),
            weights,
            norms,
            operator,
            fft,
        })
    }

    /// Engine with the isotropic weighting model over the mask's area.
    pub fn isotropic(mask: &RegionMask, wcfg: &WeightConfig, cfg: EngineConfig) -> Result<Self> {
        let rho = isotropic_rho(mask.dims(), wcfg)?;
        let w = weighting_grid(&rho, mask)?;
        Self::new(mask, w, cfg)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn mask(&self) -> &RegionMask {
        &self.mask
    }

    pub fn weights(&self) -> &SampleGrid {
        &self.weights
    }

    pub fn operator(&self) -> &OdcOperator {
        &self.operator
    }

    /// Zero model; the residual is `f` on the support area and 0 elsewhere.
    pub fn initial_state(&self, f: &SampleGrid) -> Result<ModelState> {
        self.mask.dims().check_same(f.dims())?;
        let residual_values = f
            .as_slice()
            .iter()
            .zip(self.mask.flags())
            .map(|(&v, &s)| if s { v } else { 0.0 })
            .collect();
        let residual = SampleGrid::from_samples(f.dims(), residual_values)?;
        let floor = self
            .cfg
            .projection_floor
            .unwrap_or_else(|| default_projection_floor(f, &self.mask));
        let weighted_spectrum = self.fft.as_ref().map(|fft| {
            let mut s = weighted_residual(&residual, &self.weights);
            fft.forward(&mut s);
            s
        });
        Ok(ModelState {
            coefficients: BTreeMap::new(),
            residual,
            iteration: 0,
            floor,
            weighted_spectrum,
        })
    }

    /// Projection coefficients of the current residual.
    pub fn projections(&self, state: &ModelState) -> Vec<Complex64> {
        match &state.weighted_spectrum {
            Some(spectrum) => spectrum
                .iter()
                .zip(&self.norms)
                .map(|(s, n)| s / n)
                .collect(),
            None => {
                let rw = weighted_residual(&state.residual, &self.weights);
                dft2_direct(&self.basis, &rw, false)
                    .iter()
                    .zip(&self.norms)
                    .map(|(s, n)| s / n)
                    .collect()
            }
        }
    }

    /// `sum(w * r^2)`
    pub fn weighted_residual_energy(&self, state: &ModelState) -> f64 {
        state
            .residual
            .as_slice()
            .iter()
            .zip(self.weights.as_slice())
            .map(|(r, w)| w * r * r)
            .sum()
    }

    /// Adds one basis function (pair) to the model.
    ///
    /// Returns [`Error::BelowFloor`] without touching `state` when no
    /// projection coefficient passes the floor.
    pub fn iterate_once(&self, state: &mut ModelState) -> Result<Step> {
        let p = self.projections(state);
        let selected = select_with_norms(&p, &self.norms, state.floor)?;
        let u = self.basis.canonical(selected);
        let pu = p[u.get()];

        let (mut c, fallback) = if self.cfg.odc_enabled {
            match compensate(&p, u, &self.operator, state.floor, self.cfg.denominator) {
                Ok(c) => (c, false),
                Err(Error::DegenerateDenominator(_)) => (pu, true),
                Err(e) => return Err(e),
            }
        } else {
            (pu, false)
        };
        let pair = !self.basis.is_self_conjugate(u);
        if !pair {
            c.im = 0.0;
        }

        *state.coefficients.entry(u).or_default() += c;
        if pair {
            *state.coefficients.entry(self.basis.conj(u)).or_default() += c.conj();
        }
        self.subtract_from_residual(state, u, c, pair);
        if let Some(spectrum) = state.weighted_spectrum.as_mut() {
            self.subtract_from_spectrum(spectrum, u, c);
            if pair {
                self.subtract_from_spectrum(spectrum, self.basis.conj(u), c.conj());
            }
        }
        state.iteration += 1;
        Ok(Step {
            iteration: state.iteration,
            selected: u,
            projection: pu,
            coefficient: c,
            fallback,
        })
    }

    fn subtract_from_residual(
        &self,
        state: &mut ModelState,
        u: BasisIndex,
        c: Complex64,
        pair: bool,
    ) {
        let scale = if pair { 2.0 } else { 1.0 };
        let dims = self.basis.dims();
        let flags = self.mask.flags();
        for (i, r) in state.residual.as_mut_slice().iter_mut().enumerate() {
            if flags[i] {
                let (m, n) = dims.position(i);
                *r -= scale * (c * self.basis.value(u, m, n)).re;
            }
        }
    }

    // S[k] -= c * W[k - u]
    fn subtract_from_spectrum(&self, spectrum: &mut [Complex64], u: BasisIndex, c: Complex64) {
        let (w_spec, _) = self.operator.spectrum().expect("spectral operator");
        let dims = self.basis.dims();
        let (width, height) = (dims.width, dims.height);
        let (u1, u2) = dims.position(u.get());
        for k1 in 0..width {
            let d1 = (k1 + width - u1) % width;
            let w_row = &w_spec[d1 * height..(d1 + 1) * height];
            let s_row = &mut spectrum[k1 * height..(k1 + 1) * height];
            // d2 = k2 - u2 mod height, split to avoid a modulo per element
            let (head, tail) = s_row.split_at_mut(u2);
            for (s, w) in tail.iter_mut().zip(&w_row[..height - u2]) {
                *s -= c * w;
            }
            for (s, w) in head.iter_mut().zip(&w_row[height - u2..]) {
                *s -= c * w;
            }
        }
    }

    /// `g = sum_k c_k phi_k` over the whole area.
    pub fn synthesize_complex(&self, state: &ModelState) -> ComplexGrid {
        let dims = self.basis.dims();
        let values: Vec<Complex64> = match &self.fft {
            Some(fft) => {
                let mut dense = vec![Complex64::new(0.0, 0.0); dims.len()];
                for (k, c) in &state.coefficients {
                    dense[k.get()] = *c;
                }
                fft.inverse(&mut dense);
                dense
            }
            None => dims
                .positions()
                .map(|(m, n)| {
                    state
                        .coefficients
                        .iter()
                        .map(|(&k, c)| c * self.basis.value(k, m, n))
                        .sum()
                })
                .collect(),
        };
        Grid::from_raw(dims, values).expect("basis dims are non-empty")
    }

    /// Real part of `g = sum_k c_k phi_k` over the whole area.
    pub fn synthesize(&self, state: &ModelState) -> Result<SampleGrid> {
        let g = self.synthesize_complex(state);
        let residue = g
            .as_slice()
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.im.abs()));
        if residue > IMAGINARY_RESIDUE_LIMIT {
            return Err(Error::ImaginaryResidue(residue));
        }
        SampleGrid::from_samples(g.dims(), g.as_slice().iter().map(|v| v.re).collect())
    }

    /// Iterates until `state` reaches `target` iterations, convergence or the
    /// energy threshold. Returns the number of fallback steps taken and the
    /// reason for stopping early, if any.
    pub fn advance(
        &self,
        state: &mut ModelState,
        target: usize,
    ) -> Result<(usize, Option<StopReason>)> {
        let mut fallbacks = 0;
        while state.iteration < target {
            if let Some(threshold) = self.cfg.residual_energy_stop {
                if self.weighted_residual_energy(state) <= threshold {
                    return Ok((fallbacks, Some(StopReason::ResidualEnergy)));
                }
            }
            match self.iterate_once(state) {
                Ok(step) => fallbacks += usize::from(step.fallback),
                Err(Error::BelowFloor { .. }) => {
                    return Ok((fallbacks, Some(StopReason::Converged)))
                }
                Err(e) => return Err(e),
            }
        }
        Ok((fallbacks, None))
    }

    /// Iterates until `max_iterations`, convergence or the energy threshold.
    pub fn run(&self, f: &SampleGrid) -> Result<RunSummary> {
        let mut state = self.initial_state(f)?;
        let (fallbacks, stop) = self.advance(&mut state, self.cfg.max_iterations)?;
        let model = self.synthesize(&state)?;
        Ok(RunSummary {
            model,
            state,
            fallbacks,
            stop: stop.unwrap_or(StopReason::MaxIterations),
        })
    }
}

/// Extrapolates `f` from its support area using the isotropic weighting
/// model. Returns the model over the whole area; values of `f` on the
/// missing area are ignored.
pub fn extrapolate(
    f: &SampleGrid,
    mask: &RegionMask,
    wcfg: &WeightConfig,
    cfg: &EngineConfig,
) -> Result<SampleGrid> {
    Ok(Engine::isotropic(mask, wcfg, cfg.clone())?.run(f)?.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dims, Region};

    fn center_loss(size: usize, lo: usize, hi: usize) -> RegionMask {
        RegionMask::from_fn(Dims::square(size), |m, n| {
            if (lo..hi).contains(&m) && (lo..hi).contains(&n) {
                Region::Missing
            } else {
                Region::Support
            }
        })
        .unwrap()
    }

    fn test_signal(dims: Dims) -> SampleGrid {
        Grid::from_sample_fn(dims, |m, n| {
            100.0 + 40.0 * (0.7 * m as f64).sin() + 25.0 * (0.3 * n as f64 + 0.2 * m as f64).cos()
        })
        .unwrap()
    }

    fn cfg(odc: bool, fast: bool, iters: usize) -> EngineConfig {
        EngineConfig {
            max_iterations: iters,
            odc_enabled: odc,
            fast_path: fast,
            ..EngineConfig::default()
        }
    }

    #[test]
    fn projection_of_constant_is_dc() {
        let mask = center_loss(8, 2, 5);
        let rho = isotropic_rho(mask.dims(), &WeightConfig::default()).unwrap();
        let w = weighting_grid(&rho, &mask).unwrap();
        let basis = BasisSet::new(mask.dims()).unwrap();
        let r = Grid::from_sample_fn(
            mask.dims(),
            |m, n| {
                if mask.is_support(m, n) {
                    7.5
                } else {
                    0.0
                }
            },
        )
        .unwrap();
        for fast in [false, true] {
            let p = project_all(&r, &w, &basis, fast).unwrap();
            assert!((p[0] - Complex64::new(7.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_full_area_is_scaled_dft() {
        let dims = Dims::new(4, 6);
        let basis = BasisSet::new(dims).unwrap();
        let w = SampleGrid::filled(dims, 1.0).unwrap();
        let r = test_signal(dims);
        let p = project_all(&r, &w, &basis, true).unwrap();
        for k in basis.indices() {
            let dft: Complex64 = dims
                .positions()
                .map(|(m, n)| r.get(m, n) * basis.value(k, m, n).conj())
                .sum();
            assert!((p[k.get()] - dft / 24.0).norm() < 1e-11);
        }
    }

    #[test]
    fn projection_needs_support() {
        let dims = Dims::square(3);
        let basis = BasisSet::new(dims).unwrap();
        let zeros = SampleGrid::filled(dims, 0.0).unwrap();
        for fast in [false, true] {
            assert!(matches!(
                project_all(&zeros, &zeros, &basis, fast),
                Err(Error::NoSupport)
            ));
        }
    }

    #[test]
    fn select_single_nonzero_and_ties() {
        let dims = Dims::new(3, 4);
        let basis = BasisSet::new(dims).unwrap();
        let w = SampleGrid::filled(dims, 1.0).unwrap();
        let mut p = vec![Complex64::new(0.0, 0.0); 12];
        p[7] = Complex64::new(0.0, -2.0);
        assert_eq!(select_basis(&p, &w, &basis, 1e-9).unwrap().get(), 7);
        p[7] = Complex64::new(3.0, 0.0);
        p[3] = Complex64::new(0.0, 3.0);
        p[9] = Complex64::new(-3.0, 0.0);
        assert_eq!(select_basis(&p, &w, &basis, 1e-9).unwrap().get(), 3);
    }

    #[test]
    fn select_all_below_floor() {
        let dims = Dims::square(2);
        let basis = BasisSet::new(dims).unwrap();
        let w = SampleGrid::filled(dims, 1.0).unwrap();
        let p = vec![Complex64::new(1e-9, 0.0); 4];
        assert!(matches!(
            select_basis(&p, &w, &basis, 1e-6),
            Err(Error::BelowFloor { .. })
        ));
    }

    #[test]
    fn zero_residual_signals_convergence() {
        let mask = center_loss(6, 2, 4);
        for fast in [false, true] {
            let engine =
                Engine::isotropic(&mask, &WeightConfig::default(), cfg(true, fast, 5)).unwrap();
            let zeros = SampleGrid::filled(mask.dims(), 0.0).unwrap();
            let mut state = engine.initial_state(&zeros).unwrap();
            let before = state.clone();
            assert!(matches!(
                engine.iterate_once(&mut state),
                Err(Error::BelowFloor { .. })
            ));
            assert_eq!(state, before);
        }
    }

    #[test]
    fn constant_residual_fits_dc_exactly() {
        let mask = center_loss(8, 3, 6);
        let f = SampleGrid::filled(mask.dims(), 42.0).unwrap();
        for fast in [false, true] {
            let engine =
                Engine::isotropic(&mask, &WeightConfig::default(), cfg(false, fast, 5)).unwrap();
            let mut state = engine.initial_state(&f).unwrap();
            let step = engine.iterate_once(&mut state).unwrap();
            assert_eq!(step.selected, BasisIndex::DC);
            assert_eq!(state.coefficients().len(), 1);
            assert!((state.coefficients()[&BasisIndex::DC] - 42.0).norm() < 1e-11);
            assert!(state.residual().max_abs() < 1e-11);
        }
    }

    #[test]
    fn constant_signal_extrapolates_to_constant() {
        let mask = center_loss(16, 4, 12);
        let f = Grid::from_sample_fn(
            mask.dims(),
            |m, n| {
                if mask.is_support(m, n) {
                    42.0
                } else {
                    -5.0
                }
            },
        )
        .unwrap();
        for fast in [false, true] {
            let g = extrapolate(&f, &mask, &WeightConfig::default(), &cfg(false, fast, 3)).unwrap();
            assert!(g.as_slice().iter().all(|v| (v - 42.0).abs() < 1e-9));
        }
    }

    #[test]
    fn full_expansion_reproduces_signal() {
        let dims = Dims::new(6, 5);
        let mask = RegionMask::full(dims).unwrap();
        let w = SampleGrid::filled(dims, 1.0).unwrap();
        let f = test_signal(dims);
        for (odc, fast) in [(false, false), (false, true), (true, true), (true, false)] {
            let engine = Engine::new(&mask, w.clone(), cfg(odc, fast, dims.len())).unwrap();
            let summary = engine.run(&f).unwrap();
            for (a, b) in summary.model.as_slice().iter().zip(f.as_slice()) {
                assert!((a - b).abs() < 1e-6, "odc={odc} fast={fast}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn residual_vanishes_on_missing_area() {
        let mask = center_loss(10, 3, 7);
        let f = test_signal(mask.dims());
        let engine =
            Engine::isotropic(&mask, &WeightConfig::default(), cfg(true, true, 20)).unwrap();
        let mut state = engine.initial_state(&f).unwrap();
        for _ in 0..20 {
            engine.iterate_once(&mut state).unwrap();
            for (m, n) in mask.dims().positions() {
                if !mask.is_support(m, n) {
                    assert_eq!(state.residual().get(m, n), 0.0);
                }
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let mask = center_loss(4, 1, 3);
        let w = SampleGrid::filled(mask.dims(), 1.0).unwrap();
        assert!(Engine::new(&mask, w.clone(), cfg(true, true, 0)).is_err());
        let bad_floor = EngineConfig {
            projection_floor: Some(-1.0),
            ..EngineConfig::default()
        };
        assert!(Engine::new(&mask, w, bad_floor).is_err());
    }

    #[test]
    fn energy_stop_halts_early() {
        let mask = center_loss(8, 2, 6);
        let f = test_signal(mask.dims());
        let config = EngineConfig {
            residual_energy_stop: Some(f64::MAX),
            ..cfg(true, true, 10)
        };
        let summary = Engine::isotropic(&mask, &WeightConfig::default(), config)
            .unwrap()
            .run(&f)
            .unwrap();
        assert_eq!(summary.stop, StopReason::ResidualEnergy);
        assert_eq!(summary.state.iteration(), 0);
    }
}
