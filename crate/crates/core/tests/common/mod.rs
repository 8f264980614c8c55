//! Brute-force reference implementation and random instances shared by the
//! integration tests. Everything here is written from the defining sums,
//! without the twiddle tables, FFTs or spectral shortcuts of the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use fse::{Denominator, Dims, RegionMask, SampleGrid, WeightConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub width: usize,
    pub height: usize,
    /// `[m * height + n]`
    pub f: Vec<f64>,
    pub support: Vec<bool>,
    pub rho_hat: f64,
}

impl Instance {
    pub fn dims(&self) -> Dims {
        Dims::new(self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn mask(&self) -> RegionMask {
        RegionMask::from_flags(self.dims(), self.support.clone()).unwrap()
    }

    pub fn signal(&self) -> SampleGrid {
        SampleGrid::from_samples(self.dims(), self.f.clone()).unwrap()
    }

    pub fn weight_config(&self) -> WeightConfig {
        WeightConfig::new(self.rho_hat).unwrap()
    }

    /// `rho_hat^distance-to-center` on A, 0 on B.
    pub fn weights(&self) -> Vec<f64> {
        let cm = (self.width as f64 - 1.0) / 2.0;
        let cn = (self.height as f64 - 1.0) / 2.0;
        (0..self.len())
            .map(|i| {
                let (m, n) = (i / self.height, i % self.height);
                if self.support[i] {
                    let d = ((m as f64 - cm).powi(2) + (n as f64 - cn).powi(2)).sqrt();
                    self.rho_hat.powf(d)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn weight_grid(&self) -> SampleGrid {
        SampleGrid::from_samples(self.dims(), self.weights()).unwrap()
    }
}

/// Random instance with dims in `[lo, hi]` and at least a quarter of the
/// positions in the support area.
pub fn random_instance(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Instance {
    let width = rng.gen_range(lo..=hi);
    let height = rng.gen_range(lo..=hi);
    let len = width * height;
    let p_support: f64 = rng.gen_range(0.3..0.95);
    let mut support: Vec<bool> = (0..len).map(|_| rng.gen_bool(p_support)).collect();
    while support.iter().filter(|&&s| s).count() * 4 < len {
        let i = rng.gen_range(0..len);
        support[i] = true;
    }
    let f = (0..len)
        .map(|i| {
            let (m, n) = (i / height, i % height);
            let smooth = 100.0 + 60.0 * ((m as f64) * 0.5).sin() * ((n as f64) * 0.3).cos();
            smooth + rng.gen_range(-40.0..40.0)
        })
        .collect();
    Instance {
        width,
        height,
        f,
        support,
        rho_hat: rng.gen_range(0.6..0.95),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force model of one instance.
pub struct Oracle {
    pub width: usize,
    pub height: usize,
    pub support: Vec<bool>,
    pub w: Vec<f64>,
    pub residual: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    pub odc: bool,
    pub denominator: Denominator,
    pub floor: f64,
}

pub struct OracleStep {
    pub projections: Vec<Complex64>,
    pub selected: usize,
    pub coefficient: Complex64,
}

impl Oracle {
    pub fn new(inst: &Instance, odc: bool, denominator: Denominator) -> Self {
        let residual = inst
            .f
            .iter()
            .zip(&inst.support)
            .map(|(&v, &s)| if s { v } else { 0.0 })
            .collect();
        let max = inst
            .f
            .iter()
            .zip(&inst.support)
            .filter(|(_, &s)| s)
            .fold(0.0f64, |a, (v, _)| a.max(v.abs()));
        Self {
            width: inst.width,
            height: inst.height,
            support: inst.support.clone(),
            w: inst.weights(),
            residual,
            coefficients: vec![Complex64::new(0.0, 0.0); inst.len()],
            odc,
            denominator,
            floor: 1e-12 * max * inst.len() as f64,
        }
    }

    fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn phi(&self, k: usize, m: usize, n: usize) -> Complex64 {
        let (k1, k2) = (k / self.height, k % self.height);
        let phase = 2.0
            * PI
            * (k1 as f64 * m as f64 / self.width as f64
                + k2 as f64 * n as f64 / self.height as f64);
        Complex64::new(phase.cos(), phase.sin())
    }

    pub fn conj_index(&self, k: usize) -> usize {
        let (k1, k2) = (k / self.height, k % self.height);
        ((self.width - k1) % self.width) * self.height + (self.height - k2) % self.height
    }

    /// `sum w phi_l conj(phi_k)`
    pub fn k_entry(&self, k: usize, l: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..self.width {
            for n in 0..self.height {
                acc += self.w[m * self.height + n] * self.phi(l, m, n) * self.phi(k, m, n).conj();
            }
        }
        acc
    }

    pub fn projections(&self) -> Vec<Complex64> {
        (0..self.len())
            .map(|k| {
                let mut num = Complex64::new(0.0, 0.0);
                let mut den = 0.0;
                for m in 0..self.width {
                    for n in 0..self.height {
                        let i = m * self.height + n;
                        let phi = self.phi(k, m, n);
                        num += self.residual[i] * self.w[i] * phi.conj();
                        den += self.w[i] * phi.norm_sqr();
                    }
                }
                num / den
            })
            .collect()
    }

    fn included(&self, p: Complex64) -> bool {
        p.norm() > 0.0 && p.norm() >= self.floor
    }

    /// Exhaustive argmax of `|p_k|^2 * sum w |phi_k|^2`, first index wins.
    pub fn select(&self, p: &[Complex64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, pk) in p.iter().enumerate() {
            if !self.included(*pk) {
                continue;
            }
            let mut norm = 0.0;
            for m in 0..self.width {
                for n in 0..self.height {
                    norm += self.w[m * self.height + n] * self.phi(k, m, n).norm_sqr();
                }
            }
            let score = pk.norm_sqr() * norm;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        best.map(|(k, _)| k)
    }

    pub fn compensated(&self, p: &[Complex64], u: usize) -> Complex64 {
        let kuu = self.k_entry(u, u);
        let mut sum = Complex64::new(0.0, 0.0);
        for (l, pl) in p.iter().enumerate() {
            if self.included(*pl) {
                sum += pl * self.k_entry(u, l) / kuu;
            }
        }
        let d = sum / p[u];
        if d.norm() < 1e-12 {
            return p[u];
        }
        match self.denominator {
            Denominator::Modulus => p[u] / d.norm(),
            Denominator::Complex => p[u] / d,
        }
    }

    /// Largest projection of the initial residual; the magnitude against
    /// which rounding noise in later, smaller coefficients is measured.
    pub fn data_scale(&self) -> f64 {
        self.projections()
            .iter()
            .fold(0.0f64, |a, v| a.max(v.norm()))
    }

    pub fn step(&mut self) -> Option<OracleStep> {
        let p = self.projections();
        let selected = self.select(&p)?;
        let u = selected.min(self.conj_index(selected));
        let mut c = if self.odc {
            self.compensated(&p, u)
        } else {
            p[u]
        };
        let ub = self.conj_index(u);
        if ub == u {
            c.im = 0.0;
        }
        self.coefficients[u] += c;
        if ub != u {
            self.coefficients[ub] += c.conj();
        }
        for m in 0..self.width {
            for n in 0..self.height {
                let i = m * self.height + n;
                let mut term = c * self.phi(u, m, n);
                if ub != u {
                    term += c.conj() * self.phi(ub, m, n);
                }
                self.residual[i] = if self.support[i] {
                    self.residual[i] - term.re
                } else {
                    0.0
                };
            }
        }
        Some(OracleStep {
            projections: p,
            selected: u,
            coefficient: c,
        })
    }

    pub fn synthesize(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (m, n) = (i / self.height, i % self.height);
                self.coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (c * self.phi(k, m, n)).re)
                    .sum()
            })
            .collect()
    }
}

/// `|a - b| <= tol * max(|b|, floor_scale)`.
pub fn close_rel(a: Complex64, b: Complex64, tol: f64, floor_scale: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(floor_scale)
}
