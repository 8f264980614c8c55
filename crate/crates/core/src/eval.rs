//! PSNR on lost regions and iteration sweeps.
//!
//! Sweep PSNR aggregates the squared error of all lost pixels before taking
//! the logarithm; it is not an average of per-block PSNR values.

use std::fmt;
use std::io::Write;

use crate::conceal::{
    make_jobs, map_jobs, to_pixel, ConcealConfig, ConcealJob, LossPattern, FILL_VALUE,
};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::grid::SampleGrid;

pub const PEAK: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    /// Zero mean squared error.
    Perfect,
}

impl Psnr {
    pub fn from_mse(mse: f64) -> Self {
        if mse == 0.0 {
            Psnr::Perfect
        } else {
            Psnr::Finite(10.0 * (PEAK * PEAK / mse).log10())
        }
    }

    /// `f64::INFINITY` for [`Psnr::Perfect`].
    pub fn db(self) -> f64 {
        match self {
            Psnr::Finite(v) => v,
            Psnr::Perfect => f64::INFINITY,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v:.4}"),
            Psnr::Perfect => f.write_str("inf"),
        }
    }
}

/// PSNR over the lost pixels of `pattern` only.
pub fn psnr_lost(
    original: &SampleGrid,
    restored: &SampleGrid,
    pattern: &LossPattern,
) -> Result<Psnr> {
    pattern.dims().check_same(original.dims())?;
    pattern.dims().check_same(restored.dims())?;
    let mut sse = 0.0;
    let mut count = 0usize;
    for ((a, b), &lost) in original
        .as_slice()
        .iter()
        .zip(restored.as_slice())
        .zip(pattern.lost_flags())
    {
        if lost {
            sse += (a - b) * (a - b);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyPattern);
    }
    Ok(Psnr::from_mse(sse / count as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub image: String,
    pub odc: bool,
    pub iterations: usize,
    pub psnr: Psnr,
    /// Sum over all jobs of the weighted residual energy.
    pub residual_energy: f64,
}

// Per checkpoint: squared error over the job's targets and weighted residual
// energy.
fn sweep_job(
    image: &SampleGrid,
    job: &ConcealJob,
    cfg: &ConcealConfig,
    checkpoints: &[usize],
) -> Vec<(f64, f64)> {
    let sse = |values: &mut dyn Iterator<Item = f64>| -> f64 {
        job.targets
            .iter()
            .zip(values)
            .map(|(&(x, y), v)| {
                let d = image.get(x, y) - v;
                d * d
            })
            .sum()
    };
    let fill_sse = sse(&mut std::iter::repeat(FILL_VALUE));

    let prepared = job.mask().and_then(|mask| {
        let mut engine_cfg = cfg.engine.clone();
        engine_cfg.max_iterations = engine_cfg.max_iterations.max(1);
        let engine = Engine::isotropic(&mask, &cfg.weights, engine_cfg)?;
        let state = engine.initial_state(&job.area_signal(image)?)?;
        Ok((engine, state))
    });
    let Ok((engine, mut state)) = prepared else {
        return checkpoints.iter().map(|_| (fill_sse, 0.0)).collect();
    };
    let initial_energy = engine.weighted_residual_energy(&state);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut failed = false;
    for &target in checkpoints {
        if target == 0 {
            out.push((fill_sse, initial_energy));
            continue;
        }
        if !failed {
            failed = engine.advance(&mut state, target).is_err();
        }
        let model = if failed {
            None
        } else {
            engine.synthesize(&state).ok()
        };
        match model {
            Some(model) => {
                let mut values = job.targets.iter().map(|&(x, y)| {
                    let (m, n) = job.area_position(x, y);
                    to_pixel(model.get(m, n))
                });
                out.push((sse(&mut values), engine.weighted_residual_energy(&state)));
            }
            None => {
                failed = true;
                out.push((fill_sse, engine.weighted_residual_energy(&state)));
            }
        }
    }
    out
}

/// Conceals `image` once per ODC setting (off, then on), recording the PSNR
/// after each checkpoint's number of iterations. Each job runs the engine a
/// single time and is sampled as it passes each checkpoint. Failed jobs
/// contribute [`FILL_VALUE`], as in [`crate::conceal::conceal`].
///
/// `cfg.engine.max_iterations` and `cfg.engine.odc_enabled` are ignored.
pub fn sweep(
    label: &str,
    image: &SampleGrid,
    pattern: &LossPattern,
    cfg: &ConcealConfig,
    checkpoints: &[usize],
) -> Result<Vec<SweepRecord>> {
    pattern.dims().check_same(image.dims())?;
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedCheckpoints);
    }
    let lost = pattern.lost_len();
    if lost == 0 {
        return Err(Error::EmptyPattern);
    }
    let jobs = make_jobs(pattern, cfg.border, cfg.fft_size)?;
    let mut records = Vec::with_capacity(2 * checkpoints.len());
    for odc in [false, true] {
        let mut run_cfg = cfg.clone();
        run_cfg.engine.odc_enabled = odc;
        let per_job = map_jobs(&jobs, cfg.parallel, |job| {
            sweep_job(image, job, &run_cfg, checkpoints)
        });
        for (i, &iterations) in checkpoints.iter().enumerate() {
            let (sse, energy) = per_job
                .iter()
                .fold((0.0, 0.0), |(s, e), job| (s + job[i].0, e + job[i].1));
            records.push(SweepRecord {
                image: label.to_string(),
                odc,
                iterations,
                psnr: Psnr::from_mse(sse / lost as f64),
                residual_energy: energy,
            });
        }
    }
    Ok(records)
}

pub const CSV_HEADER: &str = "image,odc,iterations,psnr_db";

/// Writes `image,odc,iterations,psnr_db` rows with a header line.
pub fn write_csv(records: &[SweepRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let odc = if r.odc { "on" } else { "off" };
        writeln!(out, "{},{},{},{}", r.image, odc, r.iterations, r.psnr)?;
    }
    Ok(())
}
