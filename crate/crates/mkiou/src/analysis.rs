//! Sensitivity sweeps and loss surfaces.
//!
//! One-parameter families of box pairs (scale offsets, angle offsets) are
//! evaluated under the exact clipping IoU and the Gaussian approximations
//! side by side, quantifying how faithfully each approximation tracks the
//! real metric. A two-parameter surface over aspect ratio and angle deviation
//! does the same for the loss terms. Tables render to CSV and JSON for
//! external plotting.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gaussian::{kfiou, mkiou, ModulationParams};
use crate::geometry::{skew_iou, OrientedBox};
use crate::losses::{ga_loss, iou_loss, LossConfig, LossVariant};

/// Column name for the modulated IoU at a given alpha: `mkiou_a3`,
/// `mkiou_a2.5`, and so on.
pub fn alpha_column_name(alpha: f64) -> String {
    format!("mkiou_a{alpha}")
}

/// One row of a sweep: the control value plus one entry per value column.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub control: f64,
    pub values: Vec<f64>,
}

/// A one-parameter sensitivity table.
///
/// `columns` names the value columns, in order: the exact IoU first, then
/// the tripled raw Kalman IoU, then the modulated IoU per alpha. Rows are
/// sorted ascending by control value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    /// Name of the swept variable, also the first CSV column.
    pub control: String,
    pub unit: String,
    pub base: OrientedBox,
    pub alphas: Vec<f64>,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.control);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{}", row.control));
            for v in &row.values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = serde_json::Map::new();
                obj.insert(self.control.clone(), json!(r.control));
                for (c, v) in self.columns.iter().zip(&r.values) {
                    obj.insert(c.clone(), json!(v));
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        json!({
            "control": self.control,
            "unit": self.unit,
            "base": self.base,
            "alphas": self.alphas,
            "rows": rows,
        })
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 grid steps, got {steps}"
        )));
    }
    Ok(())
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    for &a in alphas {
        ModulationParams::new(a)?;
    }
    Ok(())
}

/// Evenly spaced grid point `i` of `n` over `[lo, hi]`. Multiplies before
/// dividing so midpoints of symmetric ranges come out exact.
fn grid(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (n - 1) as f64
}

fn sweep_columns(alphas: &[f64]) -> Vec<String> {
    let mut columns = vec!["skew_iou".to_string(), "kfiou3".to_string()];
    columns.extend(alphas.iter().map(|&a| alpha_column_name(a)));
    columns
}

fn sweep_values(pred: &OrientedBox, base: &OrientedBox, alphas: &[f64]) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(alphas.len() + 2);
    values.push(skew_iou(pred, base)?);
    values.push(3.0 * kfiou(pred, base)?);
    for &a in alphas {
        values.push(mkiou(pred, base, ModulationParams { alpha: a })?);
    }
    Ok(values)
}

/// Width-height sensitivity: the prediction is the base box with both
/// extents multiplied by the control scale, same center and angle.
pub fn sweep_wh(
    base: &OrientedBox,
    scale_range: (f64, f64),
    steps: usize,
    alphas: &[f64],
) -> Result<SweepTable> {
    base.validate()?;
    check_steps(steps)?;
    check_alphas(alphas)?;
    let (lo, hi) = scale_range;
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "scale range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
        )));
    }
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let s = grid(lo, hi, steps, i);
        let pred = OrientedBox {
            w: base.w * s,
            h: base.h * s,
            ..*base
        };
        rows.push(SweepRow {
            control: s,
            values: sweep_values(&pred, base, alphas)?,
        });
    }
    Ok(SweepTable {
        control: "scale".into(),
        unit: "ratio".into(),
        base: *base,
        alphas: alphas.to_vec(),
        columns: sweep_columns(alphas),
        rows,
    })
}

/// Angle sensitivity: the prediction is the base box rotated by the control
/// offset (radians in, degrees in the table), same center and extents.
pub fn sweep_angle(
    base: &OrientedBox,
    theta_range: (f64, f64),
    steps: usize,
    alphas: &[f64],
) -> Result<SweepTable> {
    base.validate()?;
    check_steps(steps)?;
    check_alphas(alphas)?;
    let (lo, hi) = theta_range;
    let limit = FRAC_PI_2 + 1e-9;
    if !(lo.is_finite() && hi.is_finite()) || lo < -limit || hi > limit || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "angle range must sit inside [-pi/2, pi/2], got ({lo}, {hi})"
        )));
    }
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let dt = grid(lo, hi, steps, i);
        let pred = OrientedBox {
            theta: base.theta + dt,
            ..*base
        };
        rows.push(SweepRow {
            control: dt.to_degrees(),
            values: sweep_values(&pred, base, alphas)?,
        });
    }
    Ok(SweepTable {
        control: "dtheta_deg".into(),
        unit: "degrees".into(),
        base: *base,
        alphas: alphas.to_vec(),
        columns: sweep_columns(alphas),
        rows,
    })
}

/// Mean absolute deviation between a value column and the exact-IoU column.
/// Small is good: the approximation moves like the real metric.
pub fn consistency_metric(table: &SweepTable, variant_column: &str) -> Result<f64> {
    let col = table.column_index(variant_column)?;
    let exact = table.column_index("skew_iou")?;
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("empty sweep table".into()));
    }
    let sum: f64 = table
        .rows
        .iter()
        .map(|r| (r.values[col] - r.values[exact]).abs())
        .sum();
    Ok(sum / table.rows.len() as f64)
}

/// Which loss a surface plots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceLoss {
    /// `1 - mkiou` at the configured alpha.
    Mk,
    /// The square-target angle loss.
    Ga,
}

impl fmt::Display for SurfaceLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceLoss::Mk => "mk",
            SurfaceLoss::Ga => "ga",
        })
    }
}

impl FromStr for SurfaceLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mk" => Ok(SurfaceLoss::Mk),
            "ga" => Ok(SurfaceLoss::Ga),
            other => Err(Error::InvalidArgument(format!(
                "unknown surface loss '{other}' (expected mk, ga)"
            ))),
        }
    }
}

/// One surface grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceCell {
    pub aspect_ratio: f64,
    pub dtheta_deg: f64,
    pub loss: f64,
}

/// Loss over a rectangular (aspect ratio, angle deviation) grid.
///
/// The target at each aspect ratio has extents `(sqrt(ar), 1/sqrt(ar))`,
/// unit area, so only shape varies along the axis; the prediction is that
/// target rotated by the angle deviation. Cells are stored row-major,
/// aspect ratio outermost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceTable {
    pub loss: SurfaceLoss,
    pub cfg: LossConfig,
    pub ar_steps: usize,
    pub dtheta_steps: usize,
    pub cells: Vec<SurfaceCell>,
}

impl SurfaceTable {
    pub fn cell(&self, ar_index: usize, dtheta_index: usize) -> &SurfaceCell {
        &self.cells[ar_index * self.dtheta_steps + dtheta_index]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("aspect_ratio,dtheta_deg,loss\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{}\n", c.aspect_ratio, c.dtheta_deg, c.loss));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "loss": self.loss,
            "alpha": self.cfg.alpha,
            "beta": self.cfg.beta,
            "lambda": self.cfg.lambda,
            "ar_steps": self.ar_steps,
            "dtheta_steps": self.dtheta_steps,
            "cells": self.cells,
        })
    }
}

/// Evaluates a loss surface. Angle range in radians; the table stores
/// degrees for plotting.
pub fn surface(
    loss: SurfaceLoss,
    ar_range: (f64, f64),
    dtheta_range: (f64, f64),
    grid_steps: (usize, usize),
    cfg: &LossConfig,
) -> Result<SurfaceTable> {
    cfg.validate()?;
    let (ar_lo, ar_hi) = ar_range;
    let (dt_lo, dt_hi) = dtheta_range;
    let (ar_n, dt_n) = grid_steps;
    check_steps(ar_n)?;
    check_steps(dt_n)?;
    if !(ar_lo.is_finite() && ar_hi.is_finite()) || ar_lo < 1.0 - 1e-12 || ar_hi < ar_lo {
        return Err(Error::InvalidArgument(format!(
            "aspect-ratio range must satisfy 1 <= lo <= hi, got ({ar_lo}, {ar_hi})"
        )));
    }
    if !(dt_lo.is_finite() && dt_hi.is_finite()) || dt_hi < dt_lo {
        return Err(Error::InvalidArgument(format!(
            "bad angle range ({dt_lo}, {dt_hi})"
        )));
    }
    let mk_cfg = LossConfig {
        variant: LossVariant::Mk,
        ..*cfg
    };
    let mut cells = Vec::with_capacity(ar_n * dt_n);
    for i in 0..ar_n {
        let ar = grid(ar_lo, ar_hi, ar_n, i);
        let target = OrientedBox {
            cx: 0.0,
            cy: 0.0,
            w: ar.sqrt(),
            h: 1.0 / ar.sqrt(),
            theta: 0.0,
        };
        for j in 0..dt_n {
            let dt = grid(dt_lo, dt_hi, dt_n, j);
            let pred = OrientedBox {
                theta: dt,
                ..target
            };
            let value = match loss {
                SurfaceLoss::Mk => iou_loss(&pred, &target, &mk_cfg)?,
                SurfaceLoss::Ga => ga_loss(&pred, &target, cfg)?,
            };
            cells.push(SurfaceCell {
                aspect_ratio: ar,
                dtheta_deg: dt.to_degrees(),
                loss: value,
            });
        }
    }
    Ok(SurfaceTable {
        loss,
        cfg: *cfg,
        ar_steps: ar_n,
        dtheta_steps: dt_n,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bx(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> OrientedBox {
        OrientedBox::new(cx, cy, w, h, theta).unwrap()
    }

    fn default_wh() -> SweepTable {
        sweep_wh(
            &bx(0.0, 0.0, 4.0, 2.0, 0.0),
            (0.5, 2.0),
            151,
            &[1.0, 2.0, 3.0],
        )
        .unwrap()
    }

    #[test]
    fn wh_sweep_identity_and_double_scale_rows() {
        let t = default_wh();
        assert_eq!(
            t.columns,
            vec!["skew_iou", "kfiou3", "mkiou_a1", "mkiou_a2", "mkiou_a3"]
        );
        assert_eq!(t.rows.len(), 151);

        // Scale 1 sits exactly on the grid and every column is 1 there.
        let row = &t.rows[50];
        assert_eq!(row.control, 1.0);
        for v in &row.values {
            assert!((v - 1.0).abs() <= 1e-12, "{v}");
        }

        // Scale 2: containment gives exactly 1/4; the closed forms give
        // A = 5, B = 1.25.
        let row = t.rows.last().unwrap();
        assert_eq!(row.control, 2.0);
        assert!((row.values[0] - 0.25).abs() <= 1e-12);
        let i3 = t.column_index("mkiou_a3").unwrap();
        let i1 = t.column_index("mkiou_a1").unwrap();
        assert!((row.values[i3] - 1.0 / 3.25).abs() <= 1e-12);
        assert!((row.values[i1] - 3.0 / 5.25).abs() <= 1e-12);

        // Rows ascend in the control variable.
        for pair in t.rows.windows(2) {
            assert!(pair[1].control > pair[0].control);
        }
    }

    #[test]
    fn wh_sweep_is_monotone_in_alpha_away_from_identity() {
        let t = default_wh();
        let (i1, i2, i3) = (
            t.column_index("mkiou_a1").unwrap(),
            t.column_index("mkiou_a2").unwrap(),
            t.column_index("mkiou_a3").unwrap(),
        );
        for row in &t.rows {
            if row.values[0] < 1.0 - 1e-9 {
                assert!(row.values[i1] > row.values[i2]);
                assert!(row.values[i2] > row.values[i3]);
            }
        }
    }

    #[test]
    fn wh_sweep_is_monotone_in_scale_offset() {
        let t = default_wh();
        let i3 = t.column_index("mkiou_a3").unwrap();
        // Strictly decreasing as the scale moves away from 1 in either
        // direction.
        for pair in t.rows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if b.control <= 1.0 {
                assert!(b.values[i3] >= a.values[i3]);
            }
            if a.control >= 1.0 {
                assert!(b.values[i3] <= a.values[i3]);
            }
        }
    }

    #[test]
    fn angle_sweep_reference_rows() {
        let t = sweep_angle(
            &bx(0.0, 0.0, 4.0, 1.0, 0.0),
            (-FRAC_PI_2, FRAC_PI_2),
            181,
            &[3.0],
        )
        .unwrap();
        assert_eq!(t.rows.len(), 181);
        let mid = &t.rows[90];
        assert_eq!(mid.control, 0.0);
        for v in &mid.values {
            assert!((v - 1.0).abs() <= 1e-12);
        }
        // Quarter-turn ends: thin cross, overlap 1 of union 7.
        for row in [&t.rows[0], &t.rows[180]] {
            assert!(
                (row.values[0] - 1.0 / 7.0).abs() <= 1e-12,
                "{}",
                row.values[0]
            );
        }
    }

    #[test]
    fn angle_sweep_on_square_base_shows_the_degeneracy() {
        let t = sweep_angle(
            &bx(0.0, 0.0, 2.0, 2.0, 0.0),
            (-FRAC_PI_2, FRAC_PI_2),
            181,
            &[3.0],
        )
        .unwrap();
        let exact = t.column_index("skew_iou").unwrap();
        let kf = t.column_index("kfiou3").unwrap();
        let mk = t.column_index("mkiou_a3").unwrap();
        for col in [kf, mk] {
            let lo = t
                .rows
                .iter()
                .map(|r| r.values[col])
                .fold(f64::INFINITY, f64::min);
            let hi = t
                .rows
                .iter()
                .map(|r| r.values[col])
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo <= 1e-12, "column varies by {}", hi - lo);
        }
        // Meanwhile the exact IoU really dips: 1/sqrt(2) at 45 degrees.
        let at45 = &t.rows[135];
        assert!((at45.control - 45.0).abs() < 1e-9);
        assert!((at45.values[exact] - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-9);
    }

    #[test]
    fn sweep_columns_are_continuous() {
        // Slope bound from a fine grid; the coarse grid must not exceed it
        // materially. Catches any angle-seam jump.
        let base = bx(0.1, -0.2, 4.0, 1.0, 0.3);
        let fine = sweep_angle(&base, (-FRAC_PI_2, FRAC_PI_2), 1201, &[3.0]).unwrap();
        let coarse = sweep_angle(&base, (-FRAC_PI_2, FRAC_PI_2), 151, &[3.0]).unwrap();
        for col in 0..fine.columns.len() {
            let max_slope = |t: &SweepTable| {
                t.rows
                    .windows(2)
                    .map(|p| {
                        ((p[1].values[col] - p[0].values[col]) / (p[1].control - p[0].control))
                            .abs()
                    })
                    .fold(0.0, f64::max)
            };
            let fine_bound = max_slope(&fine);
            let coarse_max = max_slope(&coarse);
            assert!(
                coarse_max <= fine_bound * 1.1 + 1e-12,
                "column {}: coarse slope {} vs fine bound {}",
                fine.columns[col],
                coarse_max,
                fine_bound
            );
        }
    }

    #[test]
    fn consistency_metric_reference_cases() {
        let t = default_wh();
        // The exact column tracks itself perfectly.
        assert_eq!(consistency_metric(&t, "skew_iou").unwrap(), 0.0);

        // The modulated form at alpha 3 tracks the exact curve better than
        // the tripled raw form, and improves monotonically with alpha.
        let m1 = consistency_metric(&t, "mkiou_a1").unwrap();
        let m2 = consistency_metric(&t, "mkiou_a2").unwrap();
        let m3 = consistency_metric(&t, "mkiou_a3").unwrap();
        let kf = consistency_metric(&t, "kfiou3").unwrap();
        assert!(m3 < kf, "mkiou_a3 {m3} vs kfiou3 {kf}");
        assert!(m1 > m2 && m2 > m3, "{m1} > {m2} > {m3} expected");

        let ang = sweep_angle(
            &bx(0.0, 0.0, 4.0, 1.0, 0.0),
            (-FRAC_PI_2, FRAC_PI_2),
            181,
            &[3.0],
        )
        .unwrap();
        let m3 = consistency_metric(&ang, "mkiou_a3").unwrap();
        let kf = consistency_metric(&ang, "kfiou3").unwrap();
        assert!(m3 < kf, "angle sweep: mkiou_a3 {m3} vs kfiou3 {kf}");

        assert!(matches!(
            consistency_metric(&t, "nope"),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn ga_surface_reference_rows() {
        let cfg = LossConfig::default();
        let t = surface(SurfaceLoss::Ga, (1.0, 8.0), (0.0, PI), (29, 37), &cfg).unwrap();
        assert_eq!(t.cells.len(), 29 * 37);

        // Square row: beta * sin^2(2 dtheta), zero at 0/90/180 degrees,
        // peak beta at 45.
        assert_eq!(t.cell(0, 0).loss, 0.0);
        assert!(t.cell(0, 18).loss < 1e-30); // 90 degrees
        assert!(t.cell(0, 36).loss < 1e-30); // 180 degrees
        assert!((t.cell(0, 9).loss - 0.3).abs() < 1e-15); // 45 degrees

        // Quarter-turn periodicity along the square row.
        for j in 0..18 {
            assert!((t.cell(0, j).loss - t.cell(0, j + 18).loss).abs() <= 1e-12);
        }

        // Aspect ratio 4 (grid index 12): the term is numerically dead.
        let ar4 = 12;
        assert!((t.cell(ar4, 0).aspect_ratio - 4.0).abs() < 1e-12);
        for j in 0..37 {
            assert!(t.cell(ar4, j).loss < 1e-12);
        }

        // Mirror symmetry in the angle.
        let sym = surface(SurfaceLoss::Ga, (1.0, 4.0), (-1.0, 1.0), (5, 21), &cfg).unwrap();
        for i in 0..5 {
            for j in 0..21 {
                let a = sym.cell(i, j).loss;
                let b = sym.cell(i, 20 - j).loss;
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn mk_surface_reference_rows() {
        let cfg = LossConfig::default();
        let t = surface(SurfaceLoss::Mk, (1.0, 8.0), (0.0, PI), (29, 37), &cfg).unwrap();

        // Square row: flat zero, no angle signal at all.
        for j in 0..37 {
            assert_eq!(t.cell(0, j).loss, 0.0);
        }

        // Elongated rows move with the angle.
        let last = 28;
        assert!(t.cell(last, 9).loss > 0.1);

        // Half-turn periodicity in the angle offset.
        let per = surface(SurfaceLoss::Mk, (2.0, 4.0), (0.0, 2.0 * PI), (3, 9), &cfg).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                let a = per.cell(i, j).loss;
                let b = per.cell(i, j + 4).loss; // +pi on a 9-point 2pi grid
                assert!((a - b).abs() <= 1e-12);
            }
        }

        // Losses are non-negative everywhere.
        for c in &t.cells {
            assert!(c.loss >= 0.0);
        }
    }

    #[test]
    fn range_validation() {
        let b = bx(0.0, 0.0, 4.0, 2.0, 0.0);
        assert!(sweep_wh(&b, (0.5, 2.0), 1, &[3.0]).is_err());
        assert!(sweep_wh(&b, (0.0, 2.0), 10, &[3.0]).is_err());
        assert!(sweep_wh(&b, (2.0, 0.5), 10, &[3.0]).is_err());
        assert!(sweep_wh(&b, (0.5, 2.0), 10, &[4.5]).is_err());
        assert!(sweep_angle(&b, (-2.0, 2.0), 10, &[3.0]).is_err());
        assert!(surface(
            SurfaceLoss::Ga,
            (0.5, 4.0),
            (0.0, PI),
            (5, 5),
            &LossConfig::default()
        )
        .is_err());
        assert!(surface(
            SurfaceLoss::Ga,
            (1.0, 4.0),
            (0.0, PI),
            (1, 5),
            &LossConfig::default()
        )
        .is_err());
    }

    #[test]
    fn renderings_are_faithful() {
        let t = sweep_wh(&bx(0.0, 0.0, 4.0, 2.0, 0.0), (0.5, 2.0), 4, &[3.0]).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "scale,skew_iou,kfiou3,mkiou_a3");
        assert_eq!(csv.lines().count(), 5);
        let first = lines.next().unwrap();
        assert!(first.starts_with("0.5,"));

        let j = t.to_json();
        assert_eq!(j["control"], "scale");
        assert_eq!(j["rows"].as_array().unwrap().len(), 4);
        assert_eq!(j["rows"][0]["scale"], 0.5);
        assert!(j["rows"][0]["mkiou_a3"].is_number());

        let s = surface(
            SurfaceLoss::Ga,
            (1.0, 2.0),
            (0.0, 1.0),
            (2, 3),
            &LossConfig::default(),
        )
        .unwrap();
        let csv = s.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "aspect_ratio,dtheta_deg,loss");
        assert_eq!(csv.lines().count(), 7);
        let j = s.to_json();
        assert_eq!(j["loss"], "ga");
        assert_eq!(j["cells"].as_array().unwrap().len(), 6);
    }
}
