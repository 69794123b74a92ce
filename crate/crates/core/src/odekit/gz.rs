//! Closed-form solution of the coupled system
//!
//! ```text
//! (s + s'^2 / (u''s - s'')) e^{u - t} = 1 / c(t),    s' - s u' = 1
//! ```
//!
//! given by `u = -log H` and `s = I / H`, with `H(t) = int_T^t c e^{-s}` and
//! `I(t) = int_T^t H`. Derivatives come from the quotient rule using
//! `H' = c e^{-t}`, `H'' = (c' - c) e^{-t}` and `I' = H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weightlab::{check_class_c, WeightFunction};

/// Default distance from `T` below which grid points are skipped.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// Value and first two derivatives of `u` and `s` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdePoint {
    pub t: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
    pub s: f64,
    pub ds: f64,
    pub d2s: f64,
}

impl OdePoint {
    /// `u''s - s''`, required to be positive.
    pub fn positivity(&self) -> f64 {
        self.d2u * self.s - self.d2s
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    weight: WeightFunction,
    margin: f64,
}

/// Builds the solution after confirming the `C_T` inequality on a working grid.
pub fn solve_gz(c: &WeightFunction) -> Result<OdeSolution> {
    let lower = c.lower();
    let grid: Vec<f64> = (0..48)
        .map(|i| lower + DEFAULT_MARGIN + 20.0 * f64::from(i) / 47.0)
        .collect();
    let report = check_class_c(c, &grid)?;
    if !report.in_class {
        return Err(Error::Hypothesis(format!(
            "weight violates H^2 > c e^(-t) I at {:?}",
            report.witness
        )));
    }
    Ok(OdeSolution {
        weight: c.clone(),
        margin: DEFAULT_MARGIN,
    })
}

impl OdeSolution {
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// Points closer than this to `T` are not evaluated on grids.
    pub fn left_margin(&self) -> f64 {
        self.margin
    }

    pub fn state(&self, t: f64) -> Result<OdePoint> {
        let c = &self.weight;
        if !(t > c.lower()) {
            return Err(Error::Domain { t, lower: c.lower() });
        }
        let h = c.mass_from_start(t)?.value;
        if !(h > f64::MIN_POSITIVE) {
            return Err(Error::Singular { t, value: h });
        }
        let i = c.iterated_mass(t)?.value;
        let e = (-t).exp();
        let h1 = c.eval(t) * e;
        let h2 = (c.deriv(t) - c.eval(t)) * e;
        let du = -h1 / h;
        let d2u = -h2 / h + h1 * h1 / (h * h);
        let s = i / h;
        let ds = 1.0 - i * h1 / (h * h);
        let d2s = -(h * h1 + i * h2) / (h * h) + 2.0 * i * h1 * h1 / (h * h * h);
        Ok(OdePoint {
            t,
            u: -h.ln(),
            du,
            d2u,
            s,
            ds,
            d2s,
        })
    }

    pub fn u(&self, t: f64) -> Result<f64> {
        Ok(self.state(t)?.u)
    }

    pub fn s(&self, t: f64) -> Result<f64> {
        Ok(self.state(t)?.s)
    }

    /// `lim_{t -> inf} u(t) = -log int_T^inf c e^{-t}`.
    pub fn u_limit(&self) -> Result<f64> {
        Ok(-self.weight.tail_integral(self.weight.lower())?.value.ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub t: f64,
    pub res1: f64,
    pub res2: f64,
    pub min_pos: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    pub max_res1: f64,
    pub max_res2: f64,
    pub min_positivity: f64,
    pub min_s: f64,
    /// Grid nodes inside the left margin, where nothing was evaluated.
    pub skipped: Vec<f64>,
}

/// Residuals of both equations on `grid`.
pub fn verify_gz_residuals(sol: &OdeSolution, grid: &[f64]) -> Result<ResidualReport> {
    let c = sol.weight();
    let mut report = ResidualReport {
        rows: Vec::with_capacity(grid.len()),
        max_res1: 0.0,
        max_res2: 0.0,
        min_positivity: f64::INFINITY,
        min_s: f64::INFINITY,
        skipped: Vec::new(),
    };
    for &t in grid {
        if t < c.lower() + sol.left_margin() {
            report.skipped.push(t);
            continue;
        }
        let p = sol.state(t)?;
        let pos = p.positivity();
        if !(pos > 0.0) {
            return Err(Error::Singular { t, value: pos });
        }
        let res1 = ((p.s + p.ds * p.ds / pos) * (p.u - t).exp() * c.eval(t) - 1.0).abs();
        let res2 = (p.ds - p.s * p.du - 1.0).abs();
        report.max_res1 = report.max_res1.max(res1);
        report.max_res2 = report.max_res2.max(res2);
        report.min_positivity = report.min_positivity.min(pos);
        report.min_s = report.min_s.min(p.s);
        report.rows.push(ResidualRow {
            t,
            res1,
            res2,
            min_pos: pos,
        });
    }
    Ok(report)
}
