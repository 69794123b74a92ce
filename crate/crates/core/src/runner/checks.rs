//! One function per subcommand: config in, [`CheckOutcome`] out.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Check, ExperimentConfig};
use super::report::{Cell, CheckOutcome, Table};
use crate::analysis::{
    bergman_restriction_check, check_concavity, check_effective_linearity, check_linearity_equivalence,
    check_monotone_limits, int_by_parts_identity, layer_cake, optimal_extension_check, quotient_monotonicity,
    ConcavityVerdict, GCurve,
};
use crate::domains::{DomainKind, DomainModel, PsiSpec};
use crate::error::{Error, Result};
use crate::minimizer::{minimal_integral, verify_extension_inequality};
use crate::odekit::{solve_gz, verify_gz_residuals};
use crate::weightlab::{GTransform, WeightFunction};

/// Bound on `|K_{D_t}(o,o) G(t) - 1|`.
pub const DUALITY_TOLERANCE: f64 = 1e-8;

pub fn run_check(cfg: &ExperimentConfig, check: Check) -> CheckOutcome {
    let result = match check {
        Check::ComputeG => compute_g(cfg),
        Check::CheckConcavity => concavity(cfg),
        Check::CheckLinearity => linearity(cfg),
        Check::BergmanRatio => bergman_ratio(cfg),
        Check::VerifyOde => verify_ode(cfg),
        Check::VerifyIdentities => identities(cfg),
        Check::ExtensionCheck => extension(cfg),
    };
    result.unwrap_or_else(|e| CheckOutcome::failed(check.name(), e.to_string()))
}

fn details<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

fn verdicts<const N: usize>(items: [(&str, bool); N]) -> BTreeMap<String, bool> {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn curve_table(curve: &GCurve) -> Table {
    let mut t = Table::new(&["t", "r", "G"]);
    for i in 0..curve.len() {
        t.push(vec![curve.t[i].into(), curve.r[i].into(), curve.g[i].into()]);
    }
    t
}

fn sample_curve(cfg: &ExperimentConfig) -> Result<GCurve> {
    let problem = cfg.problem()?;
    let gt = GTransform::new(&problem.space.weight)?;
    GCurve::sample(&problem, &gt, &cfg.t_grid.points())
}

fn compute_g(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let problem = cfg.problem()?;
    let gt = GTransform::new(&problem.space.weight)?;
    let results = cfg
        .t_grid
        .points()
        .par_iter()
        .map(|&t| minimal_integral(&problem, t))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["t", "r", "G", "basis_degree", "converged"]);
    for r in &results {
        table.push(vec![
            r.t.into(),
            gt.eval(r.t).into(),
            r.value.into(),
            r.basis_degree.into(),
            r.converged.into(),
        ]);
    }
    let v = verdicts([
        ("finite", results.iter().all(|r| r.value.is_finite())),
        ("converged", results.iter().all(|r| r.converged || problem.is_degenerate())),
    ]);
    Ok(CheckOutcome::new(Check::ComputeG.name(), v, details(&results), Some(table)))
}

fn concavity(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let curve = sample_curve(cfg)?;
    let conc = check_concavity(&curve, cfg.tolerances.concavity)?;
    let mono = check_monotone_limits(&curve, cfg.tolerances.decay)?;
    let v = verdicts([
        ("concave", conc.verdict == ConcavityVerdict::Concave),
        ("nonincreasing", mono.nonincreasing),
        ("decays", mono.decays),
    ]);
    let d = serde_json::json!({ "concavity": conc, "monotone": mono });
    Ok(CheckOutcome::new(Check::CheckConcavity.name(), v, d, Some(curve_table(&curve))))
}

fn linearity(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let curve = sample_curve(cfg)?;
    let verdict = check_linearity_equivalence(&curve, cfg.tolerances.relative)?;
    let mut v = verdicts([("statements_agree", verdict.agree)]);
    let mut d = serde_json::json!({ "linearity": verdict });
    if let (Some(c_tilde), true) = (cfg.weight_tilde()?, verdict.linear) {
        let problem = cfg.problem()?;
        let eff = check_effective_linearity(&problem, &c_tilde, &cfg.t_grid.points(), cfg.tolerances.relative, 1e-3)?;
        v.insert("effective_linearity".into(), eff.pass);
        d["effective_linearity"] = details(&eff);
    }
    let mut table = Table::new(&["t", "r", "G", "ratio"]);
    for i in 0..curve.len() {
        let ratio = if curve.g[i] == 0.0 { 0.0 } else { curve.g[i] / curve.r[i] };
        table.push(vec![curve.t[i].into(), curve.r[i].into(), curve.g[i].into(), ratio.into()]);
    }
    Ok(CheckOutcome::new(Check::CheckLinearity.name(), v, d, Some(table)))
}

/// Deterministic points of `D` spread by a golden-ratio sequence.
pub fn sample_points(dom: &DomainModel, count: usize) -> Vec<Vec<Complex64>> {
    let n = dom.dim();
    let golden = 0.618_033_988_749_895;
    let radii = match &dom.kind {
        DomainKind::Polydisc { radii } => radii.clone(),
        _ => vec![1.0; n],
    };
    (0..count)
        .map(|i| {
            let mut z: Vec<Complex64> = (0..n)
                .map(|j| {
                    let k = (i * n + j + 1) as f64;
                    let rho = 0.9 * radii[j] * ((k * golden).fract()).sqrt();
                    Complex64::from_polar(rho, TAU * (k * golden * golden).fract())
                })
                .collect();
            if matches!(dom.kind, DomainKind::Disk | DomainKind::Ball { .. }) {
                let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.9 {
                    z.iter_mut().for_each(|c| *c *= 0.9 / norm);
                }
            }
            z
        })
        .collect()
}

fn bergman_ratio(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let space = cfg.space()?.with_weight(WeightFunction::constant(0.0));
    let samples = sample_points(&space.domain, cfg.samples);
    let rep = bergman_restriction_check(&space, &cfg.t_grid.points(), &samples, cfg.tolerances.relative)?;
    let mut table = Table::new(&["t", "sample", "ratio", "relative_error"]);
    for (i, r) in rep.rows.iter().enumerate() {
        table.push(vec![r.t.into(), (i % samples.len().max(1)).into(), r.ratio.into(), r.relative_error.into()]);
    }
    let v = verdicts([
        ("restriction_law", rep.max_relative_error <= cfg.tolerances.relative),
        ("kernel_duality", rep.duality_error <= DUALITY_TOLERANCE),
        ("ratio_reaches_exponential", rep.ratio_reaches_exponential),
        ("liminf_bound", rep.liminf_bound),
    ]);
    Ok(CheckOutcome::new(Check::BergmanRatio.name(), v, details(&rep), Some(table)))
}

fn verify_ode(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let c = cfg.weight()?;
    let sol = solve_gz(&c)?;
    let rep = verify_gz_residuals(&sol, &cfg.t_grid.points())?;
    let mut table = Table::new(&["t", "res1", "res2", "min_pos"]);
    for r in &rep.rows {
        table.push(vec![r.t.into(), r.res1.into(), r.res2.into(), r.min_pos.into()]);
    }
    let tol = cfg.tolerances.ode;
    let v = verdicts([
        ("first_equation", rep.max_res1 <= tol),
        ("second_equation", rep.max_res2 <= tol),
        ("positivity", rep.min_positivity > 0.0),
        ("evaluated", !rep.rows.is_empty()),
    ]);
    Ok(CheckOutcome::new(Check::VerifyOde.name(), v, details(&rep), Some(table)))
}

fn identities(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let dom = cfg.domain_model()?;
    let c = cfg.weight()?;
    let a = cfg.test_function;
    let t0 = cfg.t_grid.t_min;
    let mut grid = cfg.grid();
    grid.invariant = dom.phi.is_reinhardt();
    let tol = cfg.tolerances.relative;

    let cake = layer_cake(&dom, |z| dom.phi.weight(z), a, t0, &grid)?;
    let parts = int_by_parts_identity(&c, a, t0)?;
    let density = |z: &[Complex64]| dom.phi.weight(z) * c.eval(-dom.psi(z));
    let quotient = quotient_monotonicity(&dom, density, a, &c, t0, &cfg.t_grid.points(), tol, &grid)?;
    let v = verdicts([
        ("layer_cake", cake.residual <= tol),
        ("integration_by_parts", parts.residual.abs() <= cfg.tolerances.ode && parts.limit_hypothesis),
        (
            "quotient",
            !quotient.hypothesis_holds || (quotient.conclusion_holds && quotient.equality_holds != Some(false)),
        ),
    ]);
    let d = serde_json::json!({
        "layer_cake": cake,
        "integration_by_parts": parts,
        "quotient": quotient,
    });
    Ok(CheckOutcome::new(Check::VerifyIdentities.name(), v, d, None))
}

fn extension(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let dom = cfg.domain_model()?;
    if let PsiSpec::SliceLog { .. } = dom.psi {
        let space = cfg.space()?;
        let tilde = cfg.weight_tilde()?;
        let rep = optimal_extension_check(
            &space,
            &cfg.datum()?,
            &cfg.t_grid.points(),
            cfg.tolerances.relative,
            tilde.as_ref(),
        )?;
        let mut table = Table::new(&["t", "value", "expected", "relative_error", "coefficient_gap"]);
        for r in &rep.rows {
            table.push(vec![
                r.t.into(),
                r.value.into(),
                r.expected.into(),
                r.relative_error.into(),
                r.coefficient_gap.into(),
            ]);
        }
        let v = verdicts([
            ("boundary_measure_stable", rep.boundary.stable),
            ("decay_law", rep.max_decay_error <= cfg.tolerances.relative),
            ("restriction", rep.max_coefficient_gap <= DUALITY_TOLERANCE),
            ("weighted_bound", rep.weighted_bound),
        ]);
        return Ok(CheckOutcome::new(Check::ExtensionCheck.name(), v, details(&rep), Some(table)));
    }
    let problem = cfg.problem()?;
    if problem.is_degenerate() {
        return Err(Error::Parameter("the cutoff extension needs a nonzero datum".into()));
    }
    let ext = &cfg.extension;
    let reports = ext
        .widths
        .iter()
        .map(|&b| verify_extension_inequality(&problem, ext.t0, b, ext.mode))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["width", "lhs", "rhs", "constant", "pass"]);
    for r in &reports {
        table.push(vec![r.width.into(), r.lhs.into(), r.rhs.into(), r.constant.into(), Cell::Bool(r.pass)]);
    }
    let v = verdicts([("inequality", reports.iter().all(|r| r.pass))]);
    Ok(CheckOutcome::new(Check::ExtensionCheck.name(), v, details(&reports), Some(table)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::PhiSpec;

    #[test]
    fn samples_stay_inside() {
        for kind in [
            DomainKind::Disk,
            DomainKind::Ball { n: 3 },
            DomainKind::Polydisc { radii: vec![1.0, 0.5] },
        ] {
            let dom = DomainModel::new(kind, PhiSpec::Zero).unwrap();
            let pts = sample_points(&dom, 7);
            assert_eq!(pts.len(), 7);
            assert!(pts.iter().all(|z| dom.contains(z)));
            assert_ne!(pts[0], pts[1]);
        }
    }
}
