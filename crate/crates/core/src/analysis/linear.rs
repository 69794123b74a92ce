//! Consequences of linearity: other weights, kernel restriction, the
//! submanifold measure and optimal extensions from coordinate slices.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{check_concavity, GCurve};
use crate::domains::{factorial, sphere_area, strip_integral, DomainKind, DomainModel, IdealSpec, PsiSpec};
use crate::error::{Error, Result};
use crate::minimizer::{
    assemble_gram, bergman_from_gram, minimal_from_gram, minimal_integral, BergmanSpace, ExtensionProblem,
};
use crate::poly::Polynomial;
use crate::weightlab::{log_derivative_margin, GTransform, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRow {
    pub t: f64,
    /// `int_{psi < -t} c~(-psi) |F|^2 e^{-phi}` for the minimizer `F` at `T`.
    pub lhs: f64,
    /// `k_c int_t^inf c~(s) e^{-s} ds`.
    pub rhs: f64,
    /// `G(t; c~)` from a fresh solve.
    pub resolved: f64,
    /// Largest coefficient difference between the two minimizers.
    pub coefficient_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveLinearityReport {
    pub slope: f64,
    pub rows: Vec<EffectiveRow>,
    pub max_relative_error: f64,
    pub max_coefficient_gap: f64,
    pub pass: bool,
}

/// Under a linear `G(.; c)`, the minimizer at `T` computes `G(t; c~)` for
/// every admissible `c~`.
///
/// Both weights must satisfy `c'/c < 1 - eps` on the grid; `tol` bounds the
/// relative error of the integrals and the absolute coefficient gap.
pub fn check_effective_linearity(
    problem: &ExtensionProblem,
    c_tilde: &WeightFunction,
    t_grid: &[f64],
    tol: f64,
    eps: f64,
) -> Result<EffectiveLinearityReport> {
    let c = &problem.space.weight;
    for (name, w) in [("c", c), ("c~", c_tilde)] {
        let interior: Vec<f64> = t_grid.iter().copied().filter(|&t| t > w.lower()).collect();
        if !log_derivative_margin(w, &interior, 1.0 - eps)?.in_class {
            return Err(Error::Hypothesis(format!("{name} violates c'/c < 1 - {eps} on the grid")));
        }
    }
    let gt = GTransform::new(c)?;
    let curve = GCurve::sample(problem, &gt, t_grid)?;
    let conc = check_concavity(&curve, 1e-8)?;
    let Some(slope) = conc.slope else {
        return Err(Error::Hypothesis("G(.; c) is not linear on the grid".into()));
    };
    let f = minimal_integral(problem, t_grid[0])?.minimizer;
    let tilde = problem.with_space(problem.space.with_weight(c_tilde.clone()));

    let rows: Vec<EffectiveRow> = t_grid
        .par_iter()
        .map(|&t| -> Result<EffectiveRow> {
            let gram = assemble_gram(&tilde.space, t)?;
            let x = gram
                .coordinates(&f)
                .ok_or_else(|| Error::Parameter("minimizer leaves the basis".into()))?;
            let lhs = gram.norm_sq(&x);
            let rhs = slope * c_tilde.tail_integral(t)?.value;
            let fresh = minimal_from_gram(&tilde, &gram)?;
            let coefficient_gap = f
                .sub(&fresh.minimizer)
                .terms()
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            Ok(EffectiveRow {
                t,
                lhs,
                rhs,
                resolved: fresh.value,
                coefficient_gap,
            })
        })
        .collect::<Result<_>>()?;
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / b.abs().max(a.abs()) };
    let max_relative_error = rows
        .iter()
        .map(|r| rel(r.lhs, r.rhs).max(rel(r.resolved, r.rhs)))
        .fold(0.0, f64::max);
    let max_coefficient_gap = rows.iter().map(|r| r.coefficient_gap).fold(0.0, f64::max);
    Ok(EffectiveLinearityReport {
        slope,
        rows,
        max_relative_error,
        max_coefficient_gap,
        pass: max_relative_error <= tol && max_coefficient_gap <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionRow {
    pub t: f64,
    pub z: Vec<Complex64>,
    /// `|K_{D_t}(z, o) / K_D(z, o)|`.
    pub ratio: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub rows: Vec<RestrictionRow>,
    pub max_relative_error: f64,
    /// `max |K_{D_t}(o, o) G(t) - 1|` for the unit datum.
    pub duality_error: f64,
    /// Some `t` with `K_{D_t}(o,o) / K_D(o,o) >= e^t`.
    pub ratio_reaches_exponential: bool,
    /// `e^{-t} K_{D_t}(o,o) >= K_D(o,o)` at the last grid point.
    pub liminf_bound: bool,
    pub max_condition: f64,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Condition number above which kernel values are flagged.
pub const CONDITION_WARNING: f64 = 1e12;

/// Ratio of the kernels of `D_t` and `D` with one argument at the pole.
///
/// `samples` are points of `D`; each is pulled into `D_t` by the gauge
/// scaling before evaluation.
pub fn bergman_restriction_check(
    space: &BergmanSpace,
    t_grid: &[f64],
    samples: &[Vec<Complex64>],
    tol: f64,
) -> Result<RestrictionReport> {
    let dom = &space.domain;
    if dom.psi != PsiSpec::Green {
        return Err(Error::Parameter("the restriction law needs the Green pole weight".into()));
    }
    let n = dom.dim();
    let origin = vec![Complex64::new(0.0, 0.0); n];
    let unit = ExtensionProblem::new(
        space.clone(),
        IdealSpec::MaxIdealPower { order: 1 },
        Polynomial::constant(n, 1.0),
    )?;
    let base = assemble_gram(space, 0.0)?;
    let k_oo = bergman_from_gram(space, &base, &origin, &origin)?.value.re;

    struct PerT {
        rows: Vec<RestrictionRow>,
        k_oo: f64,
        duality: f64,
        condition: f64,
    }
    let per_t: Vec<PerT> = t_grid
        .par_iter()
        .map(|&t| -> Result<PerT> {
            let gram = assemble_gram(space, t)?;
            let m = dom.sublevel_scale(t);
            let mut rows = Vec::with_capacity(samples.len());
            for z in samples {
                let zt: Vec<Complex64> = z.iter().map(|c| c * m).collect();
                let kt = bergman_from_gram(space, &gram, &zt, &origin)?.value;
                let k0 = bergman_from_gram(space, &base, &zt, &origin)?.value;
                let ratio = (kt / k0).norm();
                rows.push(RestrictionRow {
                    t,
                    z: zt,
                    ratio,
                    relative_error: (ratio - t.exp()).abs() / t.exp(),
                });
            }
            let kt_oo = bergman_from_gram(space, &gram, &origin, &origin)?.value.re;
            let g = minimal_from_gram(&unit, &gram)?.value;
            Ok(PerT {
                rows,
                k_oo: kt_oo,
                duality: (kt_oo * g - 1.0).abs(),
                condition: gram.condition,
            })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<RestrictionRow> = per_t.iter().flat_map(|p| p.rows.clone()).collect();
    let max_relative_error = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let duality_error = per_t.iter().map(|p| p.duality).fold(0.0, f64::max);
    let max_condition = per_t.iter().map(|p| p.condition).fold(base.condition, f64::max);
    let ratio_reaches_exponential = t_grid
        .iter()
        .zip(&per_t)
        .any(|(&t, p)| p.k_oo / k_oo >= t.exp() * (1.0 - tol));
    let liminf_bound = match (t_grid.last(), per_t.last()) {
        (Some(&t), Some(p)) => (-t).exp() * p.k_oo >= k_oo * (1.0 - tol),
        _ => true,
    };
    let mut warnings = Vec::new();
    if max_condition > CONDITION_WARNING {
        warnings.push(format!("Gram condition number {max_condition:.3e}"));
    }
    Ok(RestrictionReport {
        pass: max_relative_error <= tol && ratio_reaches_exponential && liminf_bound,
        rows,
        max_relative_error,
        duality_error,
        ratio_reaches_exponential,
        liminf_bound,
        max_condition,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeasureEstimate {
    pub t: Vec<f64>,
    /// Normalized strip integrals.
    pub estimates: Vec<f64>,
    pub limit: f64,
    /// Spread of the last two estimates.
    pub limit_error: f64,
    pub stable: bool,
    /// `2(n - k)`.
    pub numerator: f64,
    /// `sigma_{2n-2k-1}`.
    pub sphere: f64,
    pub warnings: Vec<String>,
}

/// Relative Cauchy tolerance for the strip sequence.
pub const STRIP_TOLERANCE: f64 = 1e-6;

/// `int_X |f|^2 e^{-phi} dV[psi]` for `X = {z'' = 0}` in a polydisc, from
/// `2(n-k)/sigma_{2n-2k-1} int |f|^2 e^{-phi} e^{-psi} 1_{-1-t < psi < -t}`.
pub fn boundary_measure(dom: &DomainModel, f: &Polynomial, t_list: &[f64]) -> Result<BoundaryMeasureEstimate> {
    let PsiSpec::SliceLog { codim } = dom.psi else {
        return Err(Error::Parameter("boundary measure needs a coordinate slice pole weight".into()));
    };
    if !matches!(dom.kind, DomainKind::Polydisc { .. }) {
        return Err(Error::Parameter("boundary measure is implemented for polydiscs".into()));
    }
    let n = dom.dim();
    if codim >= n {
        return Err(Error::Parameter(format!(
            "normalization 2(n-k)/sigma_(2n-2k-1) is undefined for k = n = {n}"
        )));
    }
    if t_list.is_empty() {
        return Err(Error::Grid("empty t list".into()));
    }
    let numerator = 2.0 * (n - codim) as f64;
    let sphere = sphere_area(n - codim);
    let grid = crate::domains::QuadratureGrid {
        invariant: dom.phi.is_reinhardt() && f.terms().count() <= 1,
        ..Default::default()
    };
    let estimates: Vec<f64> = t_list
        .par_iter()
        .map(|&t| {
            strip_integral(dom, t, |z, s| f.eval(z).norm_sqr() * dom.phi.weight(z) * s.exp(), &grid)
                .map(|v| numerator / sphere * v)
        })
        .collect::<Result<_>>()?;
    let (limit, limit_error) = extrapolate(&estimates);
    let scale = limit.abs().max(f64::MIN_POSITIVE);
    let stable = limit_error <= STRIP_TOLERANCE * scale || limit_error == 0.0;
    let mut warnings = Vec::new();
    if !stable {
        warnings.push(format!("strip estimates drift by {limit_error:.3e}"));
    }
    Ok(BoundaryMeasureEstimate {
        t: t_list.to_vec(),
        estimates,
        limit,
        limit_error,
        stable,
        numerator,
        sphere,
        warnings,
    })
}

/// Aitken's delta-squared on the last three terms when it is well posed,
/// otherwise the last term; the error is the spread of the last two.
fn extrapolate(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let last = x[n - 1];
    if n < 2 {
        return (last, 0.0);
    }
    let spread = (last - x[n - 2]).abs();
    if n >= 3 {
        let (a, b, c) = (x[n - 3], x[n - 2], x[n - 1]);
        let denom = c - 2.0 * b + a;
        let step = c - b;
        if denom.abs() > 1e-8 * (a.abs() + b.abs() + c.abs()) && (step / denom).abs() < 1e3 {
            return (c - step * step / denom, spread);
        }
    }
    (last, spread)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionRow {
    pub t: f64,
    /// `int_{psi < -t} |F_t|^2 e^{-phi}` of the minimizer on `D_t`.
    pub value: f64,
    /// `e^{-t}` times the global constant.
    pub expected: f64,
    pub relative_error: f64,
    /// Largest coefficient difference between `F_t` and the global `F`.
    pub coefficient_gap: f64,
    /// `int_{psi < -t} c(-psi) |F|^2 e^{-phi}` and `g(t)` times the constant.
    pub weighted: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalExtensionReport {
    pub boundary: BoundaryMeasureEstimate,
    /// `pi^k / k! int_X |f|^2 e^{-phi} dV[psi]`.
    pub constant: f64,
    /// `int_M |F|^2 e^{-phi}` for the global minimizer.
    pub global: f64,
    pub rows: Vec<ExtensionRow>,
    pub max_decay_error: f64,
    pub max_coefficient_gap: f64,
    /// The weighted bound held at every grid point (vacuous without a weight).
    pub weighted_bound: bool,
    pub max_weighted_error: f64,
    pub pass: bool,
}

/// The optimal extension from a coordinate slice and its restrictions.
///
/// `space` carries the slice model and the basis; its weight is ignored in
/// favour of `c == 1`. `weight` enables the `c`-weighted bound.
pub fn optimal_extension_check(
    space: &BergmanSpace,
    f: &Polynomial,
    t_grid: &[f64],
    tol: f64,
    weight: Option<&WeightFunction>,
) -> Result<OptimalExtensionReport> {
    let dom = &space.domain;
    let PsiSpec::SliceLog { codim } = dom.psi else {
        return Err(Error::Parameter("optimal extension needs a coordinate slice pole weight".into()));
    };
    let boundary = boundary_measure(dom, f, t_grid)?;
    let constant = std::f64::consts::PI.powi(codim as i32) / factorial(codim) * boundary.limit;

    let plain = space.with_weight(WeightFunction::constant(0.0));
    let ideal = IdealSpec::CoordinateSlice { codim };
    let problem = if f.is_zero() {
        ExtensionProblem::degenerate(plain, ideal)
    } else {
        ExtensionProblem::new(plain, ideal, f.clone())?
    };
    let global = minimal_integral(&problem, 0.0)?;
    let model_gap = (global.value - constant).abs();
    if !(model_gap <= tol * constant.abs().max(1.0)) {
        return Err(Error::ModelHypothesis(format!(
            "global extension norm {} differs from the slice constant {constant}",
            global.value
        )));
    }
    let big_f = global.minimizer.clone();
    let weighted_problem = weight.map(|w| problem.with_space(problem.space.with_weight(w.clone())));

    let rows: Vec<ExtensionRow> = t_grid
        .par_iter()
        .map(|&t| -> Result<ExtensionRow> {
            let local = minimal_integral(&problem, t)?;
            let expected = (-t).exp() * constant;
            let relative_error = if local.value == expected {
                0.0
            } else {
                (local.value - expected).abs() / expected.abs()
            };
            let coefficient_gap = local
                .minimizer
                .sub(&big_f)
                .terms()
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            let weighted = match (&weighted_problem, weight) {
                (Some(wp), Some(w)) => {
                    let gram = assemble_gram(&wp.space, t)?;
                    let x = gram
                        .coordinates(&big_f)
                        .ok_or_else(|| Error::Parameter("extension leaves the basis".into()))?;
                    Some((gram.norm_sq(&x), w.tail_integral(t)?.value * constant))
                }
                _ => None,
            };
            Ok(ExtensionRow {
                t,
                value: local.value,
                expected,
                relative_error,
                coefficient_gap,
                weighted,
            })
        })
        .collect::<Result<_>>()?;

    let max_decay_error = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let max_coefficient_gap = rows.iter().map(|r| r.coefficient_gap).fold(0.0, f64::max);
    let weighted: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.weighted).collect();
    let weighted_bound = weighted.iter().all(|&(l, r)| l <= r * (1.0 + tol) + f64::MIN_POSITIVE);
    let max_weighted_error = weighted
        .iter()
        .map(|&(l, r)| if l == r { 0.0 } else { (l - r).abs() / r.abs() })
        .fold(0.0, f64::max);
    Ok(OptimalExtensionReport {
        pass: boundary.stable && max_decay_error <= tol && weighted_bound,
        boundary,
        constant,
        global: global.value,
        rows,
        max_decay_error,
        max_coefficient_gap,
        weighted_bound,
        max_weighted_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{PhiSpec, QuadratureGrid};
    use crate::poly::MultiIndex;
    use std::f64::consts::PI;

    fn bidisc() -> DomainModel {
        DomainModel::with_psi(
            DomainKind::Polydisc { radii: vec![1.0, 1.0] },
            PsiSpec::SliceLog { codim: 1 },
            PhiSpec::Zero,
        )
        .unwrap()
    }

    fn disk_problem(phi: PhiSpec) -> ExtensionProblem {
        let space = BergmanSpace::new(
            DomainModel::new(DomainKind::Disk, phi).unwrap(),
            WeightFunction::constant(0.0),
            4,
        );
        ExtensionProblem::new(space, IdealSpec::MaxIdealPower { order: 1 }, Polynomial::constant(1, 1.0)).unwrap()
    }

    #[test]
    fn effective_linearity_on_the_disk() {
        let t: Vec<f64> = (0..=8).map(|i| 0.5 * f64::from(i)).collect();
        let ct = WeightFunction::exp_rate(0.0, 0.5);
        let rep = check_effective_linearity(&disk_problem(PhiSpec::Zero), &ct, &t, 1e-8, 0.1).unwrap();
        assert!(rep.pass, "{rep:?}");
        for r in &rep.rows {
            assert!((r.lhs - 2.0 * PI * (-r.t / 2.0).exp()).abs() < 1e-9 * r.lhs);
        }
        let same = check_effective_linearity(&disk_problem(PhiSpec::Zero), &WeightFunction::constant(0.0), &t, 1e-8, 0.1)
            .unwrap();
        assert!(same.pass);
        let gauss = disk_problem(PhiSpec::RadialPower { a: 1.0 });
        assert!(matches!(
            check_effective_linearity(&gauss, &ct, &t, 1e-8, 0.1),
            Err(Error::Hypothesis(_))
        ));
        let steep = WeightFunction::exp_rate(0.0, 0.95);
        assert!(check_effective_linearity(&disk_problem(PhiSpec::Zero), &steep, &t, 1e-8, 0.1).is_err());
    }

    #[test]
    fn restriction_law_disk_and_ball() {
        let disk = BergmanSpace::new(DomainModel::disk(), WeightFunction::constant(0.0), 6);
        let samples = vec![
            vec![Complex64::new(0.3, 0.1)],
            vec![Complex64::new(-0.5, 0.4)],
            vec![Complex64::new(0.0, -0.9)],
        ];
        let rep = bergman_restriction_check(&disk, &[0.0, 0.5, 1.0, 2.0], &samples, 1e-6).unwrap();
        assert!(rep.pass && rep.max_relative_error < 1e-9 && rep.duality_error < 1e-8, "{rep:?}");
        assert!(rep.rows.iter().filter(|r| r.t == 0.0).all(|r| (r.ratio - 1.0).abs() < 1e-12));

        let ball = BergmanSpace::new(
            DomainModel::new(DomainKind::Ball { n: 2 }, PhiSpec::Zero).unwrap(),
            WeightFunction::constant(0.0),
            3,
        );
        let samples = vec![vec![Complex64::new(0.2, 0.3), Complex64::new(-0.4, 0.1)]];
        let rep = bergman_restriction_check(&ball, &[1.0], &samples, 1e-6).unwrap();
        assert!((rep.rows[0].ratio - 1f64.exp()).abs() < 1e-6 * 1f64.exp());
    }

    #[test]
    fn boundary_measure_bidisc() {
        let dom = bidisc();
        let one = boundary_measure(&dom, &Polynomial::constant(2, 1.0), &[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!(one.stable && (one.limit - PI).abs() < 1e-8, "{one:?}");
        assert!(one.estimates.iter().all(|e| (e - PI).abs() < 1e-8));
        let zero = boundary_measure(&dom, &Polynomial::zero(2), &[1.0, 2.0]).unwrap();
        assert_eq!(zero.limit, 0.0);
        let z1 = Polynomial::monomial(MultiIndex(vec![1, 0]), Complex64::new(1.0, 0.0));
        let lin = boundary_measure(&dom, &z1, &[1.0, 2.0, 3.0]).unwrap();
        assert!((lin.limit - PI / 2.0).abs() < 1e-8);
        let point = DomainModel::with_psi(
            DomainKind::Polydisc { radii: vec![1.0] },
            PsiSpec::SliceLog { codim: 1 },
            PhiSpec::Zero,
        );
        if let Ok(p) = point {
            assert!(boundary_measure(&p, &Polynomial::constant(1, 1.0), &[1.0]).is_err());
        }
        assert!(boundary_measure(&DomainModel::disk(), &Polynomial::constant(1, 1.0), &[1.0]).is_err());
    }

    #[test]
    fn optimal_extension_bidisc() {
        let space = BergmanSpace::new(bidisc(), WeightFunction::constant(0.0), 3).with_grid(QuadratureGrid::default());
        let t = [0.0, 1.0, 2.0, 4.0];
        let w = WeightFunction::exp_rate(0.0, 0.5);
        let rep = optimal_extension_check(&space, &Polynomial::constant(2, 1.0), &t, 1e-6, Some(&w)).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.global - PI * PI).abs() < 1e-8 && (rep.constant - PI * PI).abs() < 1e-8);
        assert!(rep.max_coefficient_gap < 1e-8 && rep.max_weighted_error < 1e-8);
        let zero = optimal_extension_check(&space, &Polynomial::zero(2), &t, 1e-6, None).unwrap();
        assert!(zero.pass && zero.global == 0.0);
    }
}
