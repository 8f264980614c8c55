//! Frequency selective extrapolation with orthogonality deficiency
//! compensation, applied to concealment of lost image blocks.
//!
//! A signal known on a support area is approximated by a sparse sum of 2-D
//! DFT basis functions over a larger extrapolation area. The model is built
//! one conjugate pair at a time from the weighted projection of the residual;
//! its values on the missing area replace the lost samples.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod conceal;
pub mod engine;
pub mod error;
pub mod eval;
pub mod grid;
pub mod odc;
pub mod pgm;
mod spectral;

pub use basis::{weighted_basis_norm, weighted_inner_product, BasisIndex, BasisSet};
pub use conceal::{
    conceal, generate_pattern, make_jobs, ConcealConfig, ConcealJob, ConcealOutcome, JobReport,
    JobStatus, LossPattern, Rect,
};
pub use engine::{
    extrapolate, project_all, select_basis, Engine, EngineConfig, ModelState, RunSummary, Step,
    StopReason,
};
pub use error::{Error, Result};
pub use eval::{psnr_lost, sweep, write_csv, Psnr, SweepRecord};
pub use grid::{
    isotropic_rho, masking_grid, weighting_grid, ComplexGrid, Dims, Grid, Region, RegionMask,
    SampleGrid, WeightConfig,
};
pub use odc::{
    build_k_matrix_dense, build_khat_spectral, compensate, Denominator, KMatrix, OdcOperator,
};
