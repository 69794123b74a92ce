//! Sampled curves `t -> G(t)` and the concavity / linearity verdicts on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimizer::{minimal_integral, ExtensionProblem, MinimalIntegralResult};
use crate::weightlab::GTransform;

/// `G` sampled on a `t`-grid together with `r = g(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GCurve {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    /// Degree-convergence flag of each solve (always true for given values).
    pub converged: Vec<bool>,
    /// `g(T)`.
    pub total: f64,
}

impl GCurve {
    /// Solves the problem at every grid point; points run in parallel.
    pub fn sample(problem: &ExtensionProblem, gt: &GTransform, t_grid: &[f64]) -> Result<Self> {
        let results: Vec<MinimalIntegralResult> = t_grid
            .par_iter()
            .map(|&t| minimal_integral(problem, t))
            .collect::<Result<_>>()?;
        let mut curve = Self::from_values(gt, t_grid, results.iter().map(|r| r.value).collect())?;
        curve.converged = results.iter().map(|r| r.converged || r.value == 0.0).collect();
        Ok(curve)
    }

    /// Samples at `t_i = g^{-1}(r_i)`.
    pub fn sample_r(problem: &ExtensionProblem, gt: &GTransform, r_grid: &[f64]) -> Result<Self> {
        let t: Vec<f64> = r_grid.iter().map(|&r| gt.inverse(r)).collect::<Result<_>>()?;
        Self::sample(problem, gt, &t)
    }

    pub fn from_values(gt: &GTransform, t: &[f64], g: Vec<f64>) -> Result<Self> {
        if t.len() != g.len() {
            return Err(Error::Grid("t-grid and G values differ in length".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("t-grid must be strictly increasing".into()));
        }
        let r: Vec<f64> = t.iter().map(|&x| gt.eval(x)).collect();
        if r.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Grid("r = g(t) is not strictly decreasing on the grid".into()));
        }
        Ok(Self {
            t: t.to_vec(),
            r,
            converged: vec![true; g.len()],
            g,
            total: gt.total(),
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `k_c = G(T) / g(T)`, with the first grid point standing in for `T`.
    pub fn reference_ratio(&self) -> f64 {
        ratio(self.g[0], self.r[0])
    }

    fn scale(&self) -> f64 {
        self.g.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn check_finite(&self, min_len: usize) -> Result<()> {
        if self.len() < min_len {
            return Err(Error::Grid(format!("need at least {min_len} points, got {}", self.len())));
        }
        if self.g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("G is not finite on the grid".into()));
        }
        Ok(())
    }
}

fn ratio(g: f64, r: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g / r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConcavityVerdict {
    Concave,
    Violated { r: f64, second_difference: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    /// `(r_i, Delta_i)` in increasing `r`: divided second differences scaled
    /// by the squared local spacing.
    pub second_differences: Vec<(f64, f64)>,
    pub max_second_difference: f64,
    pub verdict: ConcavityVerdict,
    pub linear: bool,
    /// Every second difference negative and the deepest below `-10 tol`.
    pub strictly_concave: bool,
    /// `k_c` when the curve is linear.
    pub slope: Option<f64>,
    /// Absolute tolerance `tol * max |G|`.
    pub tolerance: f64,
}

/// Relative agreement demanded of the end slopes for a linear verdict.
pub const SLOPE_TOLERANCE: f64 = 1e-6;

/// Second differences of `G` against `r`; `tol` is relative to `max |G|`.
pub fn check_concavity(curve: &GCurve, tol: f64) -> Result<ConcavityReport> {
    curve.check_finite(5)?;
    // increasing r
    let r: Vec<f64> = curve.r.iter().rev().copied().collect();
    let g: Vec<f64> = curve.g.iter().rev().copied().collect();
    let abs_tol = tol * curve.scale();
    let mut diffs = Vec::with_capacity(r.len() - 2);
    for i in 1..r.len() - 1 {
        let (h0, h1) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let d2 = 2.0 * ((g[i + 1] - g[i]) / h1 - (g[i] - g[i - 1]) / h0) / (h0 + h1);
        let h = 0.5 * (h0 + h1);
        diffs.push((r[i], d2 * h * h));
    }
    let max = diffs.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let verdict = match diffs.iter().find(|d| d.1 > abs_tol) {
        Some(&(r, d)) => ConcavityVerdict::Violated {
            r,
            second_difference: d,
        },
        None => ConcavityVerdict::Concave,
    };
    let k = curve.reference_ratio();
    let n = r.len();
    let slope_lo = (g[1] - g[0]) / (r[1] - r[0]);
    let slope_hi = (g[n - 1] - g[n - 2]) / (r[n - 1] - r[n - 2]);
    let slope_scale = k.abs().max(f64::MIN_POSITIVE);
    let slopes_agree = (slope_lo - k).abs() <= SLOPE_TOLERANCE * slope_scale
        && (slope_hi - k).abs() <= SLOPE_TOLERANCE * slope_scale;
    let linear = verdict == ConcavityVerdict::Concave && diffs.iter().all(|d| d.1 >= -abs_tol) && slopes_agree;
    let min = diffs.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let strictly_concave = max < 0.0 && min <= -10.0 * abs_tol && abs_tol > 0.0;
    Ok(ConcavityReport {
        second_differences: diffs,
        max_second_difference: max,
        verdict,
        linear,
        strictly_concave,
        slope: linear.then_some(k),
        tolerance: abs_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub nonincreasing: bool,
    /// First `t` where `G` increases.
    pub witness: Option<f64>,
    /// `G(t_max) / G(t_min)`.
    pub decay_ratio: f64,
    pub decays: bool,
    pub pass: bool,
}

/// `G` nonincreasing and `G(t_max) <= decay_tolerance G(t_min)`.
pub fn check_monotone_limits(curve: &GCurve, decay_tolerance: f64) -> Result<MonotoneReport> {
    curve.check_finite(2)?;
    let scale = curve.scale();
    let witness = curve
        .g
        .windows(2)
        .zip(&curve.t)
        .find(|(w, _)| w[1] - w[0] > 1e-12 * scale)
        .map(|(_, &t)| t);
    let first = curve.g[0];
    let last = *curve.g.last().unwrap();
    let decay_ratio = if first == 0.0 { 0.0 } else { last / first };
    let decays = decay_ratio <= decay_tolerance;
    Ok(MonotoneReport {
        nonincreasing: witness.is_none(),
        witness,
        decay_ratio,
        decays,
        pass: witness.is_none() && decays,
    })
}

/// The three equivalent statements about linearity, evaluated separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityVerdict {
    /// (1) `G(g^{-1}(r))` linear in `r`.
    pub linear: bool,
    /// (2) some interior `t0` with `G(t0)/g(t0) <= G(T)/g(T)`.
    pub some_ratio_below: bool,
    /// (3) `lim_{t -> inf} G(t)/g(t) <= G(T)/g(T)`.
    pub limit_below: bool,
    pub reference_ratio: f64,
    pub min_interior_ratio: f64,
    pub limit_ratio: f64,
    /// Difference between the two highest extrapolation orders.
    pub limit_error: f64,
    pub extrapolation_stable: bool,
    pub agree: bool,
    pub warnings: Vec<String>,
}

/// Polynomial extrapolation of `(x_i, y_i)` to `x = 0` (Neville).
fn extrapolate_to_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

/// Evaluates the three statements; `tol` is relative to `k_c`.
pub fn check_linearity_equivalence(curve: &GCurve, tol: f64) -> Result<LinearityVerdict> {
    let conc = check_concavity(curve, tol.min(1e-8))?;
    let k = curve.reference_ratio();
    let ratios: Vec<f64> = curve.g.iter().zip(&curve.r).map(|(&g, &r)| ratio(g, r)).collect();
    let slack = tol * k.abs();
    // the endpoint r0 = g(T) is excluded
    let min_interior = ratios[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let some_ratio_below = ratios[1..].iter().any(|&q| q <= k + slack);

    let n = ratios.len();
    let m = n.min(4);
    let xs = &curve.r[n - m..];
    let ys = &ratios[n - m..];
    let high = extrapolate_to_zero(xs, ys);
    let low = extrapolate_to_zero(&xs[1..], &ys[1..]);
    let limit_error = (high - low).abs();
    let extrapolation_stable = limit_error <= 1e-6 * high.abs().max(k.abs()) || limit_error == 0.0;
    let limit_below = high <= k + slack;
    let mut warnings = Vec::new();
    if !extrapolation_stable {
        warnings.push(format!(
            "tail ratio has not settled: extrapolations {high:.6e} and {low:.6e}"
        ));
    }
    let linear = conc.linear;
    Ok(LinearityVerdict {
        linear,
        some_ratio_below,
        limit_below,
        reference_ratio: k,
        min_interior_ratio: min_interior,
        limit_ratio: high,
        limit_error,
        extrapolation_stable,
        agree: linear == some_ratio_below && linear == limit_below,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weightlab::{GTransform, WeightFunction};
    use std::f64::consts::PI;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    fn gt() -> GTransform {
        GTransform::new(&WeightFunction::constant(0.0)).unwrap()
    }

    #[test]
    fn linear_closed_form() {
        let t = grid(0.0, 10.0, 41);
        let g: Vec<f64> = t.iter().map(|x| PI * (-x).exp()).collect();
        let c = GCurve::from_values(&gt(), &t, g).unwrap();
        let rep = check_concavity(&c, 1e-8).unwrap();
        assert!(rep.linear && rep.verdict == ConcavityVerdict::Concave);
        assert!((rep.slope.unwrap() - PI).abs() < 1e-9);
        let v = check_linearity_equivalence(&c, 1e-6).unwrap();
        assert!(v.linear && v.some_ratio_below && v.limit_below && v.agree);
        assert!((v.limit_ratio - PI).abs() < 1e-8);
        let m = check_monotone_limits(&c, 1e-4).unwrap();
        assert!(m.pass && (m.decay_ratio - (-10f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_closed_form() {
        let t = grid(0.0, 10.0, 41);
        let g: Vec<f64> = t.iter().map(|x| PI * (1.0 - (-(-x).exp()).exp())).collect();
        let c = GCurve::from_values(&gt(), &t, g).unwrap();
        let rep = check_concavity(&c, 1e-8).unwrap();
        assert!(!rep.linear && rep.strictly_concave);
        let v = check_linearity_equivalence(&c, 1e-6).unwrap();
        assert!(!v.linear && !v.some_ratio_below && !v.limit_below && v.agree);
        assert!((v.limit_ratio - PI).abs() < 1e-6);
        assert!(check_monotone_limits(&c, 1.0).unwrap().nonincreasing);
    }

    #[test]
    fn zero_curve() {
        let t = grid(0.0, 5.0, 11);
        let c = GCurve::from_values(&gt(), &t, vec![0.0; 11]).unwrap();
        let rep = check_concavity(&c, 1e-8).unwrap();
        assert!(rep.linear && rep.slope == Some(0.0));
        let v = check_linearity_equivalence(&c, 1e-6).unwrap();
        assert!(v.linear && v.some_ratio_below && v.limit_below);
        assert!(check_monotone_limits(&c, 1e-4).unwrap().pass);
    }

    #[test]
    fn violations_and_errors() {
        let t = grid(0.0, 2.0, 9);
        // convex in r: G = r^2
        let g: Vec<f64> = t.iter().map(|x| (-2.0 * x).exp()).collect();
        let c = GCurve::from_values(&gt(), &t, g).unwrap();
        assert!(matches!(check_concavity(&c, 1e-8).unwrap().verdict, ConcavityVerdict::Violated { .. }));
        let short = GCurve::from_values(&gt(), &t[..3], vec![1.0; 3]).unwrap();
        assert!(check_concavity(&short, 1e-8).is_err());
        assert!(GCurve::from_values(&gt(), &[1.0, 0.5], vec![1.0, 1.0]).is_err());
        let rising = GCurve::from_values(&gt(), &t[..3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(check_monotone_limits(&rising, 1.0).unwrap().witness, Some(0.0));
    }
}
