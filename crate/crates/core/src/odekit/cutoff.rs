//! Cutoff profiles `b`, `v` and the smoothed family `v_eps`.

use serde::{Deserialize, Serialize};

use super::mollifier::Mollifier;
use crate::error::{Error, Result};

/// `b(t) = int_{-inf}^t (1/B) 1_{(-t0-B, -t0)}(s) ds` and `v(t) = int_0^t b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub t0: f64,
    pub width: f64,
}

/// Builds the piecewise profile; `t0 >= 0`, `B > 0`.
pub fn make_cutoff(t0: f64, width: f64) -> Result<CutoffProfile> {
    if !(t0 >= 0.0) || !(width > 0.0) {
        return Err(Error::Parameter(format!(
            "cutoff needs t0 >= 0 and B > 0, got t0 = {t0}, B = {width}"
        )));
    }
    Ok(CutoffProfile { t0, width })
}

impl CutoffProfile {
    fn ramp_start(&self) -> f64 {
        -self.t0 - self.width
    }

    pub fn b(&self, t: f64) -> f64 {
        if t <= self.ramp_start() {
            0.0
        } else if t >= -self.t0 {
            1.0
        } else {
            (t - self.ramp_start()) / self.width
        }
    }

    pub fn v(&self, t: f64) -> f64 {
        let floor = -self.t0 - 0.5 * self.width;
        if t >= -self.t0 {
            t
        } else if t <= self.ramp_start() {
            floor
        } else {
            let x = t - self.ramp_start();
            floor + x * x / (2.0 * self.width)
        }
    }

    /// Breakpoints of `b` in the variable `s = -t`.
    pub fn kinks_in_s(&self) -> [f64; 2] {
        [self.t0, self.t0 + self.width]
    }
}

/// The smooth family `v_eps` obtained from `1/(B - 4 eps) 1_{(-t0-B+2eps, -t0-2eps)}`
/// convolved with `rho_{eps/4}` and integrated twice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedCutoff {
    t0: f64,
    width: f64,
    eps: f64,
    kernel: Mollifier,
    left: f64,
    right: f64,
    offset: f64,
}

pub fn make_smoothed_cutoff(t0: f64, width: f64, eps: f64) -> Result<SmoothedCutoff> {
    make_cutoff(t0, width)?;
    if !(eps > 0.0) || eps >= width / 8.0 {
        return Err(Error::Parameter(format!(
            "smoothing width must satisfy 0 < eps < B/8, got eps = {eps}, B = {width}"
        )));
    }
    let kernel = Mollifier::new(eps / 4.0)?;
    let left = -t0 - width + 2.0 * eps;
    let right = -t0 - 2.0 * eps;
    let mut sc = SmoothedCutoff {
        t0,
        width,
        eps,
        kernel,
        left,
        right,
        offset: 0.0,
    };
    sc.offset = sc.unshifted(0.0);
    Ok(sc)
}

impl SmoothedCutoff {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn scale(&self) -> f64 {
        1.0 / (self.width - 4.0 * self.eps)
    }

    fn unshifted(&self, t: f64) -> f64 {
        self.scale() * (self.kernel.half_square(t - self.left) - self.kernel.half_square(t - self.right))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.unshifted(t) - self.offset
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.scale() * (self.kernel.ramp(t - self.left) - self.kernel.ramp(t - self.right))
    }

    pub fn second(&self, t: f64) -> f64 {
        self.scale() * (self.kernel.cdf(t - self.left) - self.kernel.cdf(t - self.right))
    }
}
