//! Regression losses over oriented boxes.
//!
//! Centers are penalized with Smooth L1, shape and angle through one of the
//! Gaussian IoU approximations, and near-square targets get an explicit
//! angle term (the Gaussian model of a square carries no angle at all, so
//! without it the angle is unsupervised). A central-difference gradient
//! routine rounds out the module; the angle term also has its analytic
//! derivative for cross-checking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{kfiou, mkiou, ModulationParams};
use crate::geometry::{canonicalize, OrientedBox};

/// Which IoU-derived term enters the regression loss.
///
/// The `Kf*` variants transform the raw Kalman IoU, whose maximum is 1/3,
/// so their minima sit at 2/3, e^(2/3)-1, and ln 3 rather than zero. The
/// `Mk*` variants use the modulated form with range (0, 1] and reach zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// `1 - kfiou`
    KfLinear,
    /// `e^(1 - kfiou) - 1`
    KfExp,
    /// `-ln(kfiou)`
    KfNegLog,
    /// `1 - mkiou`
    Mk,
    /// `1 - mkiou` plus the square-target angle term
    MkGa,
}

impl LossVariant {
    pub const ALL: [LossVariant; 5] = [
        LossVariant::KfLinear,
        LossVariant::KfExp,
        LossVariant::KfNegLog,
        LossVariant::Mk,
        LossVariant::MkGa,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LossVariant::KfLinear => "kf_linear",
            LossVariant::KfExp => "kf_exp",
            LossVariant::KfNegLog => "kf_neglog",
            LossVariant::Mk => "mk",
            LossVariant::MkGa => "mk_ga",
        }
    }
}

impl fmt::Display for LossVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kf_linear" => Ok(LossVariant::KfLinear),
            "kf_exp" => Ok(LossVariant::KfExp),
            "kf_neglog" => Ok(LossVariant::KfNegLog),
            "mk" => Ok(LossVariant::Mk),
            "mk_ga" => Ok(LossVariant::MkGa),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss variant '{other}' (expected kf_linear, kf_exp, kf_neglog, mk, mk_ga)"
            ))),
        }
    }
}

/// Hyperparameters shared by every loss in the module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Modulation factor, < 4.
    pub alpha: f64,
    /// Weight of the angle term, >= 0.
    pub beta: f64,
    /// Sharpness of the angle term's aspect-ratio gate, > 0. At the default
    /// 3 the term is numerically dead for aspect ratios of 4 and beyond.
    pub lambda: f64,
    /// Smooth-L1 quadratic-to-linear transition, > 0.
    pub sl1_delta: f64,
    pub variant: LossVariant,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 3.0,
            beta: 0.3,
            lambda: 3.0,
            sl1_delta: 1.0,
            variant: LossVariant::MkGa,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        ModulationParams::new(self.alpha)?;
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and > 0, got {}",
                self.lambda
            )));
        }
        if !self.sl1_delta.is_finite() || self.sl1_delta <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sl1_delta must be finite and > 0, got {}",
                self.sl1_delta
            )));
        }
        Ok(())
    }
}

/// Per-term decomposition of [`reg_loss`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub center_term: f64,
    pub iou_term: f64,
    pub angle_term: f64,
    pub total: f64,
}

/// Smooth L1: `0.5 x^2 / delta` for `|x| < delta`, else `|x| - delta/2`.
/// Continuous with continuous slope at the transition.
pub fn smooth_l1(x: f64, delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "delta must be finite and > 0, got {delta}"
        )));
    }
    let a = x.abs();
    if a < delta {
        Ok(0.5 * x * x / delta)
    } else {
        Ok(a - 0.5 * delta)
    }
}

/// Shared factor of the angle loss and its gradient:
/// `beta * e^(4 lambda - lambda (ar + 1/ar)^2)` for the target's aspect
/// ratio `ar`, together with the canonicalized angle difference.
fn ga_parts(p: &OrientedBox, t: &OrientedBox, cfg: &LossConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let p = canonicalize(p)?;
    let t = canonicalize(t)?;
    let ar_sum = t.w / t.h + t.h / t.w;
    let gate = cfg.beta * (4.0 * cfg.lambda - cfg.lambda * ar_sum * ar_sum).exp();
    Ok((gate, p.theta - t.theta))
}

/// Angle loss `beta * e^(4 lambda - lambda (ar + 1/ar)^2) * sin^2(2 dtheta)`.
///
/// Peaks at `beta` for square targets at a 45-degree error, has period 90
/// degrees, and shuts itself off as the target's aspect ratio grows (the
/// prediction's shape never enters). For elongated targets the IoU terms
/// carry the angle signal instead.
pub fn ga_loss(p: &OrientedBox, t: &OrientedBox, cfg: &LossConfig) -> Result<f64> {
    let (gate, dtheta) = ga_parts(p, t, cfg)?;
    let s = (2.0 * dtheta).sin();
    Ok(gate * s * s)
}

/// Analytic derivative of [`ga_loss`] with respect to the prediction's
/// angle: `2 beta e^(...) sin(4 dtheta)`. Carries the same `beta` weight as
/// the loss itself so it is exactly what central differences of [`ga_loss`]
/// converge to.
pub fn ga_grad_theta(p: &OrientedBox, t: &OrientedBox, cfg: &LossConfig) -> Result<f64> {
    let (gate, dtheta) = ga_parts(p, t, cfg)?;
    Ok(2.0 * gate * (4.0 * dtheta).sin())
}

/// The IoU-derived penalty for the configured variant.
pub fn iou_loss(p: &OrientedBox, t: &OrientedBox, cfg: &LossConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.variant {
        LossVariant::KfLinear => Ok(1.0 - kfiou(p, t)?.min(1.0 / 3.0)),
        LossVariant::KfExp => Ok((1.0 - kfiou(p, t)?.min(1.0 / 3.0)).exp_m1()),
        LossVariant::KfNegLog => Ok(-kfiou(p, t)?.min(1.0 / 3.0).ln()),
        LossVariant::Mk | LossVariant::MkGa => {
            let m = mkiou(p, t, ModulationParams { alpha: cfg.alpha })?;
            Ok(1.0 - m.min(1.0))
        }
    }
}

/// Combined regression loss: Smooth L1 on the center offsets, the variant's
/// IoU term, and (for [`LossVariant::MkGa`]) the angle term.
pub fn reg_loss(p: &OrientedBox, t: &OrientedBox, cfg: &LossConfig) -> Result<LossBreakdown> {
    cfg.validate()?;
    p.validate()?;
    t.validate()?;
    let center_term =
        smooth_l1(p.cx - t.cx, cfg.sl1_delta)? + smooth_l1(p.cy - t.cy, cfg.sl1_delta)?;
    let iou_term = iou_loss(p, t, cfg)?;
    let angle_term = match cfg.variant {
        LossVariant::MkGa => ga_loss(p, t, cfg)?,
        _ => 0.0,
    };
    Ok(LossBreakdown {
        center_term,
        iou_term,
        angle_term,
        total: center_term + iou_term + angle_term,
    })
}

/// Central-difference gradient of an arbitrary box loss in the raw
/// coordinates `(cx, cy, w, h, theta)`.
///
/// Steps are relative: each coordinate is probed at `step * max(1, |value|)`,
/// with extent probes clamped so `w` and `h` stay positive. Probe failures
/// and non-finite probe values surface as numerical-failure errors.
pub fn numeric_grad<F>(loss: F, p: &OrientedBox, step: f64) -> Result<[f64; 5]>
where
    F: Fn(&OrientedBox) -> Result<f64>,
{
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step must be finite and > 0, got {step}"
        )));
    }
    p.validate()?;
    let coords = [p.cx, p.cy, p.w, p.h, p.theta];
    let mut grad = [0.0; 5];
    for (i, g) in grad.iter_mut().enumerate() {
        let mut h = step * coords[i].abs().max(1.0);
        if i == 2 || i == 3 {
            // Keep both probes strictly inside the positive-extent domain.
            h = h.min(0.49 * coords[i]);
        }
        let probe = |delta: f64| -> Result<f64> {
            let mut c = coords;
            c[i] += delta;
            let b = OrientedBox {
                cx: c[0],
                cy: c[1],
                w: c[2],
                h: c[3],
                theta: c[4],
            };
            let v = loss(&b)?;
            if !v.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "loss is {v} at probe {b:?}"
                )));
            }
            Ok(v)
        };
        let hi = probe(h)?;
        let lo = probe(-h)?;
        // Denominator from the realized probe offsets, not 2h, to cancel
        // representation error in h.
        let span = (coords[i] + h) - (coords[i] - h);
        *g = (hi - lo) / span;
    }
    Ok(grad)
}
