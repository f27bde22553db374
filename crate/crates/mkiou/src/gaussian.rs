//! Gaussian box models and the approximate-IoU family built on them.
//!
//! An oriented box maps to a 2-D Gaussian whose mean is the box center and
//! whose covariance eigenvalues are `w^2/4` and `h^2/4` along the box axes.
//! Overlap between two boxes is then approximated through the Kalman-filter
//! covariance intersection, which is smooth in every box parameter and
//! invariant under the `(w,h,theta)` / `(h,w,theta+pi/2)` identity, so the
//! angle-boundary discontinuity of direct rectangle overlap never appears.
//!
//! Two evaluation paths exist and must agree: the matrix path (explicit 2x2
//! covariance algebra) and a closed form in the extent ratios and the angle
//! difference. The matrix path is primary; the closed form feeds the
//! modulated variant and serves as a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{canonicalize, OrientedBox, Point};

/// Determinants at or below this are treated as singular. Only guards true
/// degeneracy; every covariance from a valid box sits far above it.
const DET_FLOOR: f64 = 1e-300;

/// Symmetric 2x2 covariance matrix, stored as its three distinct entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl Covariance {
    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    /// Positive-definiteness with the [`DET_FLOOR`] tolerance.
    pub fn is_positive_definite(&self) -> bool {
        self.s11 > 0.0 && self.det() > DET_FLOOR
    }

    fn add(&self, other: &Covariance) -> Covariance {
        Covariance {
            s11: self.s11 + other.s11,
            s12: self.s12 + other.s12,
            s22: self.s22 + other.s22,
        }
    }

    /// Closed-form inverse; caller has already checked the determinant.
    fn inverse(&self) -> Covariance {
        let d = self.det();
        Covariance {
            s11: self.s22 / d,
            s12: -self.s12 / d,
            s22: self.s11 / d,
        }
    }

    /// `self * m * self`, symmetric by construction for symmetric inputs.
    fn sandwich(&self, m: &Covariance) -> Covariance {
        // t = m * self
        let t11 = m.s11 * self.s11 + m.s12 * self.s12;
        let t12 = m.s11 * self.s12 + m.s12 * self.s22;
        let t21 = m.s12 * self.s11 + m.s22 * self.s12;
        let t22 = m.s12 * self.s12 + m.s22 * self.s22;
        Covariance {
            s11: self.s11 * t11 + self.s12 * t21,
            s12: self.s11 * t12 + self.s12 * t22,
            s22: self.s12 * t12 + self.s22 * t22,
        }
    }
}

/// A box in Gaussian form: mean at the center, covariance from the extents
/// and rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBox {
    pub mu: Point,
    pub sigma: Covariance,
}

/// Modulation factor for the rescaled IoU approximation. Must stay below 4,
/// the infimum of `A + B`; at 1 the modulated value is exactly three times
/// the raw Kalman IoU.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    pub alpha: f64,
}

impl Default for ModulationParams {
    fn default() -> Self {
        Self { alpha: 3.0 }
    }
}

impl ModulationParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let p = Self { alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha >= 4.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and < 4, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Converts a box to its Gaussian form.
///
/// The covariance is `R diag(w^2/4, h^2/4) R^T` for the rotation `R` by
/// `theta`; swapping extents while rotating a quarter turn leaves it
/// unchanged up to rounding.
pub fn to_gaussian(b: &OrientedBox) -> Result<GaussianBox> {
    b.validate()?;
    let (sin, cos) = b.theta.sin_cos();
    let (c2, s2) = (cos * cos, sin * sin);
    let w2 = 0.25 * b.w * b.w;
    let h2 = 0.25 * b.h * b.h;
    Ok(GaussianBox {
        mu: Point::new(b.cx, b.cy),
        sigma: Covariance {
            s11: w2 * c2 + h2 * s2,
            s12: (w2 - h2) * sin * cos,
            s22: w2 * s2 + h2 * c2,
        },
    })
}

fn sqrt_det_area(sigma: &Covariance) -> Result<f64> {
    if !sigma.is_positive_definite() {
        return Err(Error::DegenerateCovariance(format!(
            "not positive definite: {sigma:?}"
        )));
    }
    Ok(4.0 * sigma.det().sqrt())
}

/// Area of the rectangle a Gaussian stands for: `4 * sqrt(det sigma)`,
/// which recovers `w * h` of the source box.
pub fn gauss_area(g: &GaussianBox) -> Result<f64> {
    sqrt_det_area(&g.sigma)
}

/// Kalman covariance intersection `sp - sp (sp + st)^-1 sp`.
///
/// The result is symmetric positive definite and dominated by `sp` in the
/// Loewner order. Evaluated via the subtracted-sandwich form so symmetry
/// holds by construction rather than up to rounding.
pub fn kalman_intersection(sp: &Covariance, st: &Covariance) -> Result<Covariance> {
    for s in [sp, st] {
        if !s.is_positive_definite() {
            return Err(Error::DegenerateCovariance(format!(
                "not positive definite: {s:?}"
            )));
        }
    }
    let sum = sp.add(st);
    if sum.det() <= DET_FLOOR {
        return Err(Error::DegenerateCovariance(format!(
            "singular covariance sum: {sum:?}"
        )));
    }
    let shrink = sp.sandwich(&sum.inverse());
    Ok(Covariance {
        s11: sp.s11 - shrink.s11,
        s12: sp.s12 - shrink.s12,
        s22: sp.s22 - shrink.s22,
    })
}

/// Kalman-filter IoU of two boxes, evaluated on covariances only.
///
/// Centers never enter: the overlap model treats the means as coincident and
/// leaves center regression to a separate penalty. The value lives in
/// `(0, 1/3]` with the maximum attained exactly when the covariances match.
///
/// The fused area uses the update's determinant identity,
/// `det(sp - sp (sp+st)^-1 sp) = det(sp) det(st) / det(sp+st)`, rather than
/// the determinant of the subtracted matrix from [`kalman_intersection`]:
/// the two agree exactly in real arithmetic, but the subtracted form loses
/// digits for thin boxes, whose covariances are badly conditioned.
pub fn kfiou(p: &OrientedBox, t: &OrientedBox) -> Result<f64> {
    let gp = to_gaussian(p)?;
    let gt = to_gaussian(t)?;
    let s_p = sqrt_det_area(&gp.sigma)?;
    let s_t = sqrt_det_area(&gt.sigma)?;
    let sum = gp.sigma.add(&gt.sigma);
    let det_sum = sum.det();
    if det_sum <= DET_FLOOR {
        return Err(Error::DegenerateCovariance(format!(
            "singular covariance sum: {sum:?}"
        )));
    }
    // det(sp)/det(sum) <= 1, so the grouping below cannot overflow even for
    // extreme extents.
    let s_pt = 4.0 * ((gp.sigma.det() / det_sum) * gt.sigma.det()).sqrt();
    Ok(s_pt / (s_p + s_t - s_pt))
}

/// The closed-form pair `(A, B)` with `A^2 = det(sp+st)/det(st)` and
/// `B^2 = det(sp+st)/det(sp)`, expanded in extent ratios and the angle
/// difference. Satisfies `A + B >= 4` and `kfiou = 1/(A + B - 1)`.
pub fn ab_terms(p: &OrientedBox, t: &OrientedBox) -> Result<(f64, f64)> {
    let p = canonicalize(p)?;
    let t = canonicalize(t)?;
    let dt = p.theta - t.theta;
    let (sin, cos) = dt.sin_cos();
    let (c2, s2) = (cos * cos, sin * sin);
    let (wp2, hp2) = (p.w * p.w, p.h * p.h);
    let (wt2, ht2) = (t.w * t.w, t.h * t.h);
    let a2 = 1.0
        + (wp2 * hp2) / (wt2 * ht2)
        + (wp2 / wt2 + hp2 / ht2) * c2
        + (wp2 / ht2 + hp2 / wt2) * s2;
    let b2 = 1.0
        + (wt2 * ht2) / (wp2 * hp2)
        + (wt2 / wp2 + ht2 / hp2) * c2
        + (wt2 / hp2 + ht2 / wp2) * s2;
    Ok((a2.sqrt(), b2.sqrt()))
}

/// Modulated Kalman IoU `(4 - alpha)/(A + B - alpha)`, a rescaling of the
/// raw value onto `(0, 1]` whose sensitivity to extent and angle error is
/// tuned by `alpha`.
pub fn mkiou(p: &OrientedBox, t: &OrientedBox, params: ModulationParams) -> Result<f64> {
    params.validate()?;
    let (a, b) = ab_terms(p, t)?;
    Ok((4.0 - params.alpha) / (a + b - params.alpha))
}
