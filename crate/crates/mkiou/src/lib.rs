//! Overlap measures and regression losses for oriented bounding boxes.
//!
//! The exact intersection-over-union of two rotated rectangles is a
//! piecewise function of the box parameters: as corners cross edges the
//! gradient jumps, and for thin boxes most of the parameter space is flat.
//! This crate implements the standard workaround, modelling each box as a
//! 2-D Gaussian, alongside the exact quantity so the approximations can be
//! checked against ground truth:
//!
//! * [`geometry`]: the box type, polygon clipping for exact overlap, and a
//!   Monte-Carlo estimator used as an independent cross-check.
//! * [`gaussian`]: box-to-Gaussian conversion, the Kalman-style fused
//!   intersection (`kfiou`), and its modulated rescaling (`mkiou`) that
//!   restores a full `[0, 1]` range.
//! * [`losses`]: smooth-L1 center terms, several IoU-style loss variants,
//!   an aspect-ratio-gated angle loss with analytic gradient, and a
//!   finite-difference gradient helper.
//! * [`fitting`]: a momentum gradient-descent harness that drives a
//!   predicted box onto a target, with full trace capture and batch
//!   scenario runs.
//! * [`analysis`]: sensitivity sweeps, loss surfaces, and a consistency
//!   metric that scores each approximation against the exact overlap.
//! * [`cli`]: the `mkiou` binary's argument handling.
//!
//! ```
//! use mkiou::{skew_iou, kfiou, mkiou, ModulationParams, OrientedBox};
//!
//! let pred = OrientedBox::new(0.0, 0.0, 4.0, 2.0, 0.0)?;
//! let target = OrientedBox::new(0.0, 0.0, 2.0, 4.0, 0.0)?;
//!
//! let exact = skew_iou(&pred, &target)?;
//! assert!((exact - 1.0 / 3.0).abs() < 1e-12);
//!
//! // The fused Gaussian overlap tops out at 1/3, its modulated form at 1.
//! assert!((kfiou(&pred, &target)? - 0.25).abs() < 1e-12);
//! assert!((mkiou(&pred, &target, ModulationParams::default())? - 0.5).abs() < 1e-12);
//! # Ok::<(), mkiou::Error>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fitting;
pub mod gaussian;
pub mod geometry;
pub mod losses;

pub use analysis::{
    consistency_metric, surface, sweep_angle, sweep_wh, SurfaceCell, SurfaceLoss, SurfaceTable,
    SweepRow, SweepTable,
};
pub use error::{Error, Result};
pub use fitting::{
    angle_residual, batch_fit, fit, random_init, scenario_pair, BatchSummary, FitOutcome, FitSpec,
    FitStep, FitTrace, Scenario,
};
pub use gaussian::{
    ab_terms, gauss_area, kalman_intersection, kfiou, mkiou, to_gaussian, Covariance, GaussianBox,
    ModulationParams,
};
pub use geometry::{canonicalize, monte_carlo_iou, skew_iou, OrientedBox, Point, Polygon};
pub use losses::{
    ga_grad_theta, ga_loss, iou_loss, numeric_grad, reg_loss, smooth_l1, LossBreakdown, LossConfig,
    LossVariant,
};
