//! Block-loss concealment on whole images.
//!
//! Lost pixels are grouped into jobs: each 4-connected component of the loss
//! mask is cut into `block x block` tiles anchored at its bounding box. A job
//! extrapolates one tile from a `fft_size x fft_size` area centered on it. The
//! support area is the frame of `border` pixels around the tile, minus any
//! lost pixels and anything outside the image; all other positions carry zero
//! weight. Jobs read received pixels only, so they can run in any order.

use rayon::prelude::*;

use crate::engine::{Engine, EngineConfig, StopReason};
use crate::error::{Error, Result};
use crate::grid::{Dims, RegionMask, SampleGrid, WeightConfig};

/// Value written to lost pixels that were not (or could not be) concealed.
pub const FILL_VALUE: f64 = 128.0;

pub const DEFAULT_BLOCK: usize = 16;
pub const DEFAULT_BORDER: usize = 16;
pub const DEFAULT_FFT_SIZE: usize = 64;

/// Axis-aligned rectangle in image coordinates; `x` is horizontal (`m`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }
}

/// Set of lost pixels in an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossPattern {
    dims: Dims,
    lost: Vec<bool>,
    block: usize,
}

impl LossPattern {
    /// `lost[i]` flags pixel `i` in `m * height + n` order.
    pub fn new(dims: Dims, lost: Vec<bool>, block: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyGrid(dims));
        }
        if lost.len() != dims.len() {
            return Err(Error::SampleCount {
                expected: dims.len(),
                found: lost.len(),
            });
        }
        if block == 0 {
            return Err(Error::InvalidConfig("block size must be positive".into()));
        }
        Ok(Self { dims, lost, block })
    }

    /// Pattern with no lost pixels.
    pub fn none(dims: Dims, block: usize) -> Result<Self> {
        Self::new(dims, vec![false; dims.len()], block)
    }

    /// Reads a mask image: 0 marks a lost pixel, 255 a received one.
    pub fn from_mask_grid(mask: &SampleGrid, block: usize) -> Result<Self> {
        let dims = mask.dims();
        let lost = mask
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                0.0 => Ok(true),
                255.0 => Ok(false),
                _ => {
                    let (m, n) = dims.position(i);
                    Err(Error::InvalidMaskValue { m, n, value: v })
                }
            })
            .collect::<Result<_>>()?;
        Self::new(dims, lost, block)
    }

    /// The mask image form: 0 for lost, 255 for received pixels.
    pub fn to_mask_grid(&self) -> SampleGrid {
        let values = self
            .lost
            .iter()
            .map(|&l| if l { 0.0 } else { 255.0 })
            .collect();
        SampleGrid::from_samples(self.dims, values).expect("non-empty pattern dims")
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn is_lost(&self, m: usize, n: usize) -> bool {
        self.lost[self.dims.index(m, n)]
    }

    pub fn lost_flags(&self) -> &[bool] {
        &self.lost
    }

    pub fn lost_len(&self) -> usize {
        self.lost.iter().filter(|&&l| l).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.lost.contains(&true)
    }

    /// `image` with every lost pixel set to [`FILL_VALUE`].
    pub fn damage(&self, image: &SampleGrid) -> Result<SampleGrid> {
        self.dims.check_same(image.dims())?;
        let values = image
            .as_slice()
            .iter()
            .zip(&self.lost)
            .map(|(&v, &l)| if l { FILL_VALUE } else { v })
            .collect();
        SampleGrid::from_samples(self.dims, values)
    }
}

// Block starts along one axis: as many blocks as there are whole `spacing`
// cells inside the border clearance, centered in the image.
fn axis_starts(dim: usize, block: usize, spacing: usize, border: usize) -> Option<Vec<usize>> {
    if dim < 2 * border + block {
        return None;
    }
    let usable = dim - 2 * border;
    let cells = usable / spacing;
    let fit = (usable - block) / spacing + 1;
    let count = cells.min(fit).max(1);
    let total = (count - 1) * spacing + block;
    let start = (dim - total) / 2;
    Some((0..count).map(|i| start + i * spacing).collect())
}

/// Regular grid of `block x block` losses, `spacing` pixels apart (start to
/// start), keeping at least `border` pixels of clearance to the image edges.
pub fn generate_pattern(
    dims: Dims,
    block: usize,
    spacing: usize,
    border: usize,
) -> Result<LossPattern> {
    if block == 0 || spacing == 0 {
        return Err(Error::InvalidConfig(
            "block size and spacing must be positive".into(),
        ));
    }
    let placement = || Error::Placement {
        dims,
        block,
        border,
    };
    let xs = axis_starts(dims.width, block, spacing, border).ok_or_else(placement)?;
    let ys = axis_starts(dims.height, block, spacing, border).ok_or_else(placement)?;
    let mut lost = vec![false; dims.len()];
    for &x in &xs {
        for &y in &ys {
            for m in x..x + block {
                for n in y..y + block {
                    lost[dims.index(m, n)] = true;
                }
            }
        }
    }
    LossPattern::new(dims, lost, block)
}

/// One tile of lost pixels and its extrapolation area.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcealJob {
    /// Tile being concealed.
    pub block: Rect,
    /// Tile dilated by the border, clipped to the image.
    pub window: Rect,
    /// Image coordinates of the area's `(0, 0)` position; may be negative.
    pub area_origin: (isize, isize),
    pub area_dims: Dims,
    /// Lost pixels this job writes, in image coordinates.
    pub targets: Vec<(usize, usize)>,
    support: Vec<bool>,
}

impl ConcealJob {
    /// Support/missing partition of the extrapolation area.
    pub fn mask(&self) -> Result<RegionMask> {
        RegionMask::from_flags(self.area_dims, self.support.clone())
    }

    fn image_position(&self, m: usize, n: usize) -> (isize, isize) {
        (
            self.area_origin.0 + m as isize,
            self.area_origin.1 + n as isize,
        )
    }

    /// Received samples over the extrapolation area; zero on the missing area.
    pub fn area_signal(&self, image: &SampleGrid) -> Result<SampleGrid> {
        SampleGrid::from_sample_fn(self.area_dims, |m, n| {
            if self.support[self.area_dims.index(m, n)] {
                let (x, y) = self.image_position(m, n);
                image.get(x as usize, y as usize)
            } else {
                0.0
            }
        })
    }

    /// Area position of an image position inside the area.
    pub fn area_position(&self, x: usize, y: usize) -> (usize, usize) {
        (
            (x as isize - self.area_origin.0) as usize,
            (y as isize - self.area_origin.1) as usize,
        )
    }
}

fn components(pattern: &LossPattern) -> Vec<Vec<usize>> {
    let dims = pattern.dims;
    let mut seen = vec![false; dims.len()];
    let mut out = Vec::new();
    for start in 0..dims.len() {
        if !pattern.lost[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let (m, n) = dims.position(i);
            let mut visit = |m: usize, n: usize| {
                let j = dims.index(m, n);
                if pattern.lost[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if m > 0 {
                visit(m - 1, n);
            }
            if m + 1 < dims.width {
                visit(m + 1, n);
            }
            if n > 0 {
                visit(m, n - 1);
            }
            if n + 1 < dims.height {
                visit(m, n + 1);
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn build_job(
    pattern: &LossPattern,
    block: Rect,
    targets: Vec<(usize, usize)>,
    border: usize,
    fft_size: usize,
) -> ConcealJob {
    let dims = pattern.dims;
    let window = {
        let x0 = block.x.saturating_sub(border);
        let y0 = block.y.saturating_sub(border);
        let x1 = (block.x + block.width + border).min(dims.width);
        let y1 = (block.y + block.height + border).min(dims.height);
        Rect {
            x: x0,
            y: y0,
            width: x1 - x0,
            height: y1 - y0,
        }
    };
    let area_origin = (
        block.x as isize - ((fft_size - block.width) / 2) as isize,
        block.y as isize - ((fft_size - block.height) / 2) as isize,
    );
    let area_dims = Dims::square(fft_size);
    let support = area_dims
        .positions()
        .map(|(m, n)| {
            let x = area_origin.0 + m as isize;
            let y = area_origin.1 + n as isize;
            x >= 0
                && y >= 0
                && window.contains(x as usize, y as usize)
                && !pattern.is_lost(x as usize, y as usize)
        })
        .collect();
    ConcealJob {
        block,
        window,
        area_origin,
        area_dims,
        targets,
        support,
    }
}

/// Splits the lost pixels into jobs, ordered by tile position (top to bottom,
/// then left to right). Fails if a tile plus its border does not fit into
/// the `fft_size` area.
pub fn make_jobs(pattern: &LossPattern, border: usize, fft_size: usize) -> Result<Vec<ConcealJob>> {
    let dims = pattern.dims;
    let block = pattern.block;
    let limit = fft_size.saturating_sub(2 * border);
    let mut jobs = Vec::new();
    for members in components(pattern) {
        let positions: Vec<(usize, usize)> = members.iter().map(|&i| dims.position(i)).collect();
        let x0 = positions
            .iter()
            .map(|p| p.0)
            .min()
            .expect("non-empty component");
        let y0 = positions
            .iter()
            .map(|p| p.1)
            .min()
            .expect("non-empty component");
        let x1 = positions
            .iter()
            .map(|p| p.0)
            .max()
            .expect("non-empty component")
            + 1;
        let y1 = positions
            .iter()
            .map(|p| p.1)
            .max()
            .expect("non-empty component")
            + 1;
        let mut tiles: std::collections::BTreeMap<(usize, usize), Vec<(usize, usize)>> =
            std::collections::BTreeMap::new();
        for &(x, y) in &positions {
            tiles
                .entry(((y - y0) / block, (x - x0) / block))
                .or_default()
                .push((x, y));
        }
        for ((ty, tx), mut targets) in tiles {
            let x = x0 + tx * block;
            let y = y0 + ty * block;
            let rect = Rect {
                x,
                y,
                width: block.min(x1 - x),
                height: block.min(y1 - y),
            };
            if rect.width > limit || rect.height > limit {
                return Err(Error::ComponentTooLarge {
                    x: rect.x,
                    y: rect.y,
                    width: rect.width,
                    height: rect.height,
                    limit,
                });
            }
            targets.sort_unstable_by_key(|&(x, y)| (y, x));
            jobs.push(build_job(pattern, rect, targets, border, fft_size));
        }
    }
    jobs.sort_by_key(|job| (job.block.y, job.block.x));
    Ok(jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcealConfig {
    pub weights: WeightConfig,
    /// `max_iterations == 0` writes [`FILL_VALUE`] without running the engine.
    pub engine: EngineConfig,
    pub border: usize,
    pub fft_size: usize,
    /// Run jobs on the rayon thread pool.
    pub parallel: bool,
}

impl Default for ConcealConfig {
    fn default() -> Self {
        Self {
            weights: WeightConfig::default(),
            engine: EngineConfig::default(),
            border: DEFAULT_BORDER,
            fft_size: DEFAULT_FFT_SIZE,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobStatus {
    Ok,
    /// Some iterations used the projection coefficient because the
    /// compensation denominator was degenerate.
    Fallback {
        steps: usize,
    },
    /// The block holds [`FILL_VALUE`].
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobReport {
    pub block: Rect,
    pub status: JobStatus,
    pub iterations: usize,
    pub stop: Option<StopReason>,
}

#[derive(Debug, Clone)]
pub struct ConcealOutcome {
    pub image: SampleGrid,
    pub jobs: Vec<JobReport>,
}

/// Rounds half away from zero after clamping to `[0, 255]`.
pub fn to_pixel(v: f64) -> f64 {
    v.clamp(0.0, 255.0).round()
}

/// Runs the engine for one job; returns the rounded values for
/// `job.targets` in order.
pub fn conceal_job(
    image: &SampleGrid,
    job: &ConcealJob,
    cfg: &ConcealConfig,
) -> (Vec<f64>, JobReport) {
    let fill = || vec![FILL_VALUE; job.targets.len()];
    let report = |status, iterations, stop| JobReport {
        block: job.block,
        status,
        iterations,
        stop,
    };
    if cfg.engine.max_iterations == 0 {
        return (fill(), report(JobStatus::Ok, 0, None));
    }
    let result = job.mask().and_then(|mask| {
        let engine = Engine::isotropic(&mask, &cfg.weights, cfg.engine.clone())?;
        engine.run(&job.area_signal(image)?)
    });
    match result {
        Ok(summary) => {
            let values = job
                .targets
                .iter()
                .map(|&(x, y)| {
                    let (m, n) = job.area_position(x, y);
                    to_pixel(summary.model.get(m, n))
                })
                .collect();
            let status = if summary.fallbacks > 0 {
                JobStatus::Fallback {
                    steps: summary.fallbacks,
                }
            } else {
                JobStatus::Ok
            };
            let stop = (summary.stop != StopReason::MaxIterations).then_some(summary.stop);
            (values, report(status, summary.state.iteration(), stop))
        }
        Err(e) => (
            fill(),
            report(
                JobStatus::Failed {
                    error: e.to_string(),
                },
                0,
                None,
            ),
        ),
    }
}

pub(crate) fn map_jobs<T: Send>(
    jobs: &[ConcealJob],
    parallel: bool,
    f: impl Fn(&ConcealJob) -> T + Sync + Send,
) -> Vec<T> {
    if parallel {
        jobs.par_iter().map(f).collect()
    } else {
        jobs.iter().map(f).collect()
    }
}

/// Conceals every lost pixel of `image`. Received pixels are copied
/// unchanged; lost pixels of `image` are never read.
pub fn conceal(
    image: &SampleGrid,
    pattern: &LossPattern,
    cfg: &ConcealConfig,
) -> Result<ConcealOutcome> {
    pattern.dims.check_same(image.dims())?;
    let jobs = make_jobs(pattern, cfg.border, cfg.fft_size)?;
    let results = map_jobs(&jobs, cfg.parallel, |job| conceal_job(image, job, cfg));
    let mut output = image.clone();
    let mut reports = Vec::with_capacity(jobs.len());
    for (job, (values, report)) in jobs.iter().zip(results) {
        for (&(x, y), v) in job.targets.iter().zip(values) {
            output.set(x, y, v)?;
        }
        reports.push(report);
    }
    Ok(ConcealOutcome {
        image: output,
        jobs: reports,
    })
}
