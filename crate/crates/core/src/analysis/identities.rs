//! Layer-cake, integration by parts and the quotient inequality.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domains::{sublevel_volume_integral, DomainModel, QuadratureGrid};
use crate::error::{Error, Result};
use crate::quad::{relative_tail_length, Composite};
use crate::weightlab::WeightFunction;

/// Increasing test functions `a(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum TestFunction {
    /// `a0 + slope t`.
    Affine { a0: f64, slope: f64 },
    /// `a0 + amp (1 - e^{-rate t})`.
    Saturating { a0: f64, amp: f64, rate: f64 },
}

impl TestFunction {
    pub fn constant(a0: f64) -> Self {
        TestFunction::Affine { a0, slope: 0.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TestFunction::Affine { a0, slope } => a0 + slope * t,
            TestFunction::Saturating { a0, amp, rate } => a0 + amp * (1.0 - (-rate * t).exp()),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match *self {
            TestFunction::Affine { slope, .. } => slope,
            TestFunction::Saturating { amp, rate, .. } => amp * rate * (-rate * t).exp(),
        }
    }

    /// Extra decay rate needed on top of `e^{-s}` before the product is negligible.
    fn growth_margin(&self) -> f64 {
        match *self {
            TestFunction::Affine { slope, .. } if slope != 0.0 => 8.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / |lhs|`, absolute when `lhs == 0`.
    pub residual: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let diff = (lhs - rhs).abs();
        Self {
            lhs,
            rhs,
            residual: if lhs == 0.0 { diff } else { diff / lhs.abs() },
        }
    }
}

fn outer_rule() -> Composite {
    Composite {
        rel_tol: 1e-9,
        max_level: 3,
        ..Composite::default()
    }
    .with_nodes_per_unit(2)
}

/// Both sides of `int f a(-psi) = int_T^inf m(t) a'(t) dt + a(T) m(T)` with
/// `m(t) = int_{psi < -t} f`.
///
/// The left side is one domain integral; the right side integrates the
/// sublevel masses in `t`.
pub fn layer_cake<F>(dom: &DomainModel, f: F, a: TestFunction, t_start: f64, grid: &QuadratureGrid) -> Result<IdentityCheck>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let lhs = sublevel_volume_integral(dom, t_start, |z, s| f(z) * a.value(s), grid)?;
    let mass = |t: f64| sublevel_volume_integral(dom, t, |z, _| f(z), grid);
    let m0 = mass(t_start)?;
    let upper = t_start + relative_tail_length(1.0) + a.growth_margin();
    let mut failure = None;
    let integral = outer_rule().integrate(t_start, upper, |t| {
        let d = a.deriv(t);
        if d == 0.0 {
            return 0.0;
        }
        match mass(t) {
            Ok(m) => m * d,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(IdentityCheck::new(lhs, integral?.value + a.value(t_start) * m0))
}

/// The three terms of the product rule for `g a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationByParts {
    /// `int_{t0}^inf c e^{-s} a ds`.
    pub weighted: f64,
    /// `int_{t0}^inf g(s) a'(s) ds`.
    pub transported: f64,
    /// `g(t0) a(t0)`.
    pub boundary: f64,
    /// `weighted - transported - boundary`.
    pub residual: f64,
    /// `g(t) a(t)` at the truncation point.
    pub tail_product: f64,
    pub limit_hypothesis: bool,
}

/// Evaluates `int c e^{-s} a - int g a' - g(t0) a(t0)`, which vanishes when
/// `g(t) a(t) -> 0`.
pub fn int_by_parts_identity(c: &WeightFunction, a: TestFunction, t0: f64) -> Result<IntegrationByParts> {
    c.checked(t0.max(c.lower() + f64::EPSILON))?;
    let g = |t: f64| c.tail_integral(t).map(|e| e.value);
    let g0 = g(t0)?;
    let scale = g0 * a.value(t0).abs().max(1.0);
    let mut upper = t0 + 1.0;
    while g(upper)? * a.value(upper).abs().max(1.0) > 1e-16 * scale {
        upper += 1.0;
        if upper > t0 + 4000.0 {
            break;
        }
    }
    let tail_product = g(upper)? * a.value(upper);
    let q = Composite::default();
    let weighted = q.integrate(t0, upper, |s| c.density(s) * a.value(s))?.value;
    let mut failure = None;
    let transported = q
        .integrate(t0, upper, |s| {
            let d = a.deriv(s);
            if d == 0.0 {
                return 0.0;
            }
            match g(s) {
                Ok(v) => v * d,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        })?
        .value;
    if let Some(e) = failure {
        return Err(e);
    }
    let boundary = g0 * a.value(t0);
    Ok(IntegrationByParts {
        weighted,
        transported,
        boundary,
        residual: weighted - transported - boundary,
        tail_product,
        limit_hypothesis: tail_product.abs() <= 1e-12 * scale,
    })
}

/// Hypothesis `m(t)/m(t0) >= g(t)/g(t0)` and the conclusion comparing the
/// `a`-averages of `f` and of `c e^{-t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub hypothesis_holds: bool,
    /// Hypothesis holds with equality at every grid point.
    pub hypothesis_equality: bool,
    /// `min_t (m(t)/m(t0) - g(t)/g(t0))`.
    pub hypothesis_margin: f64,
    /// `int_{psi < -t0} f a(-psi) / m(t0)`.
    pub lhs: f64,
    /// `int_{t0}^inf c e^{-t} a dt / g(t0)`.
    pub rhs: f64,
    pub conclusion_holds: bool,
    /// Set only when `hypothesis_equality`.
    pub equality_holds: Option<bool>,
    pub margin: f64,
}

/// Checks the quotient inequality for a density `f`; `tol` is relative.
#[allow(clippy::too_many_arguments)]
pub fn quotient_monotonicity<F>(
    dom: &DomainModel,
    f: F,
    a: TestFunction,
    c: &WeightFunction,
    t0: f64,
    t_grid: &[f64],
    tol: f64,
    grid: &QuadratureGrid,
) -> Result<QuotientReport>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let mass = |t: f64| sublevel_volume_integral(dom, t, |z, _| f(z), grid);
    let m0 = mass(t0)?;
    if !(m0 > 0.0) {
        return Err(Error::Parameter("the density has no mass on the starting sublevel set".into()));
    }
    let g = |t: f64| c.tail_integral(t).map(|e| e.value);
    let g0 = g(t0)?;
    let mut margin = f64::INFINITY;
    let mut worst_dev: f64 = 0.0;
    for &t in t_grid.iter().filter(|&&t| t > t0) {
        let lhs = mass(t)? / m0;
        let rhs = g(t)? / g0;
        margin = margin.min(lhs - rhs);
        worst_dev = worst_dev.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }
    let hypothesis_holds = margin >= -tol;
    let hypothesis_equality = worst_dev <= tol;

    let lhs = sublevel_volume_integral(dom, t0, |z, s| f(z) * a.value(s), grid)? / m0;
    let upper = c.tail_cutoff(t0)? + a.growth_margin();
    let rhs = Composite::default().integrate(t0, upper, |s| c.density(s) * a.value(s))?.value / g0;
    let gap = lhs - rhs;
    let size = rhs.abs().max(lhs.abs());
    Ok(QuotientReport {
        hypothesis_holds,
        hypothesis_equality,
        hypothesis_margin: margin,
        lhs,
        rhs,
        conclusion_holds: gap >= -tol * size,
        equality_holds: hypothesis_equality.then_some(gap.abs() <= tol * size),
        margin: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{DomainKind, PhiSpec};
    use std::f64::consts::PI;

    fn saturating() -> TestFunction {
        TestFunction::Saturating {
            a0: 0.0,
            amp: 1.0,
            rate: 1.0,
        }
    }

    #[test]
    fn layer_cake_disk() {
        let grid = QuadratureGrid::default().invariant();
        let r = layer_cake(&DomainModel::disk(), |_| 1.0, saturating(), 0.0, &grid).unwrap();
        assert!((r.lhs - PI / 2.0).abs() < 1e-8);
        assert!((r.rhs - PI / 2.0).abs() < 1e-8);
        let k = layer_cake(&DomainModel::disk(), |_| 1.0, TestFunction::constant(2.5), 0.3, &grid).unwrap();
        assert!((k.lhs - 2.5 * PI * (-0.3f64).exp()).abs() < 1e-10 && k.residual < 1e-10);
        let z = layer_cake(&DomainModel::disk(), |_| 0.0, saturating(), 0.0, &grid).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
    }

    #[test]
    fn layer_cake_affine_ball() {
        let dom = DomainModel::new(DomainKind::Ball { n: 2 }, PhiSpec::Zero).unwrap();
        let a = TestFunction::Affine { a0: 0.5, slope: 2.0 };
        let grid = QuadratureGrid::default().invariant();
        let r = layer_cake(&dom, |z| (-z[0].norm_sqr()).exp(), a, 0.0, &grid).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
    }

    #[test]
    fn integration_by_parts_closed_forms() {
        let r = int_by_parts_identity(&WeightFunction::constant(0.0), saturating(), 0.0).unwrap();
        assert!((r.weighted - 0.5).abs() < 1e-12 && (r.transported - 0.5).abs() < 1e-12);
        assert!(r.boundary.abs() < 1e-15 && r.residual.abs() < 1e-10 && r.limit_hypothesis);

        let zero = int_by_parts_identity(&WeightFunction::constant(0.0), TestFunction::constant(0.0), 0.0).unwrap();
        assert_eq!(zero.residual, 0.0);

        let c = WeightFunction::exp_rate(0.0, 0.5);
        let a = TestFunction::Saturating {
            a0: 0.0,
            amp: 1.0,
            rate: 0.25,
        };
        let r = int_by_parts_identity(&c, a, 1.0).unwrap();
        let e = |x: f64| x.exp();
        assert!((r.weighted - (2.0 * e(-0.5) - 4.0 / 3.0 * e(-0.75))).abs() < 1e-11);
        assert!((r.transported - 2.0 / 3.0 * e(-0.75)).abs() < 1e-11);
        assert!(r.residual.abs() < 1e-9);
    }

    #[test]
    fn quotient_equality_and_strict_cases() {
        let grid = QuadratureGrid::default().invariant();
        let t_grid: Vec<f64> = (1..=8).map(f64::from).collect();
        let c = WeightFunction::constant(0.0);
        let r = quotient_monotonicity(&DomainModel::disk(), |_| 1.0, saturating(), &c, 0.0, &t_grid, 1e-8, &grid)
            .unwrap();
        assert!(r.hypothesis_equality && r.equality_holds == Some(true), "{r:?}");

        let r = quotient_monotonicity(
            &DomainModel::disk(),
            |z| (-z[0].norm_sqr()).exp(),
            saturating(),
            &c,
            0.0,
            &t_grid,
            1e-8,
            &grid,
        )
        .unwrap();
        assert!(r.hypothesis_holds && !r.hypothesis_equality);
        assert!(r.conclusion_holds && r.margin > 1e-4 && r.equality_holds.is_none());

        assert!(
            quotient_monotonicity(&DomainModel::disk(), |_| 0.0, saturating(), &c, 0.0, &t_grid, 1e-8, &grid).is_err()
        );
    }
}
