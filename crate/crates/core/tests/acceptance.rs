//! Acceptance suite. Runs without the libtest harness so that one PASS/FAIL
//! line per criterion is always printed; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use l2lab::analysis::{
    bergman_restriction_check, boundary_measure, check_effective_linearity, check_linearity_equivalence,
    check_monotone_limits, int_by_parts_identity, layer_cake, optimal_extension_check, GCurve, TestFunction,
};
use l2lab::domains::{
    raw_sublevel_integral, DomainKind, DomainModel, IdealSpec, PhiSpec, PsiSpec, QuadratureGrid,
};
use l2lab::minimizer::{
    minimal_integral, verify_extension_inequality, verify_pythagoras, BergmanSpace, ExtensionMode, ExtensionProblem,
};
use l2lab::odekit::{make_max_smoother, make_smoothed_cutoff, max_smoother_constant, solve_gz, verify_gz_residuals};
use l2lab::poly::{monomials_up_to, Polynomial};
use l2lab::weightlab::{GTransform, WeightFunction};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unit_problem(kind: DomainKind, phi: PhiSpec, degree: u32) -> ExtensionProblem {
    let dom = DomainModel::new(kind, phi).unwrap();
    let n = dom.dim();
    let space = BergmanSpace::new(dom, WeightFunction::constant(0.0), degree);
    ExtensionProblem::new(space, IdealSpec::MaxIdealPower { order: 1 }, Polynomial::constant(n, 1.0)).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn disk_linear_law() -> Outcome {
    let start = Instant::now();
    let problem = unit_problem(DomainKind::Disk, PhiSpec::Zero, 4);
    let mut worst: f64 = 0.0;
    for t in linspace(0.0, 10.0, 41) {
        let g = minimal_integral(&problem, t).map_err(|e| e.to_string())?.value;
        worst = worst.max(rel(g, PI * (-t).exp()));
    }
    ensure(worst <= 1e-6, || format!("radial path error {worst:e}"))?;
    let mut raw_worst: f64 = 0.0;
    for t in [0.0, 1.0, 2.5, 5.0, 10.0] {
        let f = minimal_integral(&problem, t).map_err(|e| e.to_string())?.minimizer;
        let raw = raw_sublevel_integral(&problem.space.domain, t, |z| f.eval(z).norm_sqr(), 256, 64)
            .map_err(|e| e.to_string())?;
        raw_worst = raw_worst.max(rel(raw, PI * (-t).exp()));
    }
    ensure(raw_worst <= 1e-3, || format!("raw path error {raw_worst:e}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("radial {worst:.1e}, raw {raw_worst:.1e}, {secs:.2} s"))
}

fn strict_concavity() -> Outcome {
    let problem = unit_problem(DomainKind::Disk, PhiSpec::RadialPower { a: 1.0 }, 4);
    let gt = GTransform::new(&WeightFunction::constant(0.0)).map_err(|e| e.to_string())?;
    let h = 0.05;
    let r: Vec<f64> = (1..=20).map(|i| h * f64::from(i)).collect();
    let mut g = Vec::new();
    let mut worst: f64 = 0.0;
    for &ri in &r {
        let t = gt.inverse(ri).map_err(|e| e.to_string())?;
        let v = minimal_integral(&problem, t).map_err(|e| e.to_string())?.value;
        worst = worst.max(rel(v, PI * (1.0 - (-ri).exp())));
        g.push(v);
    }
    ensure(worst <= 1e-3, || format!("closed-form mismatch {worst:e}"))?;
    let mut min_ratio = f64::INFINITY;
    for i in 1..r.len() - 1 {
        let d2 = g[i + 1] - 2.0 * g[i] + g[i - 1];
        let margin = 0.5 * PI * (-r[i]).exp() * h * h;
        ensure(d2 <= -margin, || format!("second difference {d2:e} at r = {} above -{margin:e}", r[i]))?;
        min_ratio = min_ratio.min(-d2 / margin);
    }
    Ok(format!("closed form {worst:.1e}, second differences >= {min_ratio:.3} x margin"))
}

fn ode_residuals() -> Outcome {
    let weights = [
        ("1", WeightFunction::constant(0.0)),
        ("e^(t/2)", WeightFunction::exp_rate(0.0, 0.5)),
        ("1/(1+t^2)", WeightFunction::rational(0.0, vec![1.0], vec![1.0, 0.0, 1.0])),
    ];
    let mut parts = Vec::new();
    for (name, c) in weights {
        let sol = solve_gz(&c).map_err(|e| format!("{name}: {e}"))?;
        let grid = linspace(c.lower() + 0.1, c.lower() + 10.0, 200);
        let rep = verify_gz_residuals(&sol, &grid).map_err(|e| format!("{name}: {e}"))?;
        ensure(rep.skipped.is_empty() && rep.rows.len() == grid.len(), || format!("{name}: nodes skipped"))?;
        ensure(rep.max_res1 <= 1e-8 && rep.max_res2 <= 1e-8, || {
            format!("{name}: residuals {:e} {:e}", rep.max_res1, rep.max_res2)
        })?;
        ensure(rep.min_positivity > 0.0, || format!("{name}: u''s - s'' = {:e}", rep.min_positivity))?;
        parts.push(format!("{name} {:.0e}", rep.max_res1.max(rep.max_res2)));
    }
    Ok(parts.join(", "))
}

fn random_point(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
    loop {
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if z.iter().map(|c| c.norm_sqr()).sum::<f64>() < 0.9 {
            return z;
        }
    }
}

fn bergman_restriction() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut parts = Vec::new();
    for (kind, degree) in [(DomainKind::Disk, 6), (DomainKind::Ball { n: 2 }, 3)] {
        let dom = DomainModel::new(kind, PhiSpec::Zero).unwrap();
        let n = dom.dim();
        let space = BergmanSpace::new(dom, WeightFunction::constant(0.0), degree);
        let samples: Vec<Vec<Complex64>> = (0..5).map(|_| random_point(&mut rng, n)).collect();
        let rep = bergman_restriction_check(&space, &[0.5, 1.0, 2.0], &samples, 1e-6).map_err(|e| e.to_string())?;
        ensure(rep.rows.len() == 15, || "missing kernel rows".into())?;
        ensure(rep.max_relative_error <= 1e-6, || format!("n = {n}: ratio error {:e}", rep.max_relative_error))?;
        ensure(rep.duality_error <= 1e-8, || format!("n = {n}: K G - 1 = {:e}", rep.duality_error))?;
        parts.push(format!("n = {n}: ratio {:.0e}, duality {:.0e}", rep.max_relative_error, rep.duality_error));
    }
    Ok(parts.join("; "))
}

fn linearity_equivalence() -> Outcome {
    let bidisc = DomainKind::Polydisc { radii: vec![1.0, 1.0] };
    let cases = [
        ("disk", unit_problem(DomainKind::Disk, PhiSpec::Zero, 4), true),
        ("ball2", unit_problem(DomainKind::Ball { n: 2 }, PhiSpec::Zero, 3), true),
        ("bidisc", unit_problem(bidisc, PhiSpec::Zero, 3), true),
        ("gaussian", unit_problem(DomainKind::Disk, PhiSpec::RadialPower { a: 1.0 }, 4), false),
    ];
    let gt = GTransform::new(&WeightFunction::constant(0.0)).map_err(|e| e.to_string())?;
    let t = linspace(0.0, 10.0, 41);
    let mut disagreements = 0;
    for (name, problem, expected) in &cases {
        let curve = GCurve::sample(problem, &gt, &t).map_err(|e| e.to_string())?;
        let v = check_linearity_equivalence(&curve, 1e-6).map_err(|e| e.to_string())?;
        if !v.agree {
            disagreements += 1;
        }
        ensure(v.linear == *expected && v.some_ratio_below == *expected && v.limit_below == *expected, || {
            format!("{name}: ({}, {}, {}), expected all {expected}", v.linear, v.some_ratio_below, v.limit_below)
        })?;
    }
    ensure(disagreements == 0, || format!("{disagreements} disagreements"))?;
    Ok(format!("{} cases, 0 disagreements", cases.len()))
}

fn effective_linearity() -> Outcome {
    let problem = unit_problem(DomainKind::Disk, PhiSpec::Zero, 4);
    let c_tilde = WeightFunction::exp_rate(0.0, 0.5);
    let t = linspace(0.0, 8.0, 17);
    let rep = check_effective_linearity(&problem, &c_tilde, &t, 1e-6, 1e-3).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for row in &rep.rows {
        worst = worst.max(rel(row.lhs, 2.0 * PI * (-row.t / 2.0).exp()));
    }
    ensure(worst <= 1e-6, || format!("weighted integral error {worst:e}"))?;
    ensure(rep.max_coefficient_gap <= 1e-8, || format!("coefficient gap {:e}", rep.max_coefficient_gap))?;
    Ok(format!("integral {worst:.1e}, coefficients {:.1e}", rep.max_coefficient_gap))
}

fn random_test_function(rng: &mut StdRng) -> TestFunction {
    if rng.random_range(0..2) == 0 {
        TestFunction::Affine {
            a0: rng.random_range(0.1..2.0),
            slope: rng.random_range(0.0..2.0),
        }
    } else {
        TestFunction::Saturating {
            a0: rng.random_range(0.0..1.0),
            amp: rng.random_range(0.1..2.0),
            rate: rng.random_range(0.2..3.0),
        }
    }
}

fn layer_cake_law() -> Outcome {
    let grid = QuadratureGrid::default().invariant();
    let a = TestFunction::Saturating {
        a0: 0.0,
        amp: 1.0,
        rate: 1.0,
    };
    let disk = layer_cake(&DomainModel::disk(), |_| 1.0, a, 0.0, &grid).map_err(|e| e.to_string())?;
    ensure(rel(disk.lhs, PI / 2.0) <= 1e-6 && rel(disk.rhs, PI / 2.0) <= 1e-6, || {
        format!("disk: lhs {} rhs {}", disk.lhs, disk.rhs)
    })?;
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let kind = if i % 2 == 0 { DomainKind::Disk } else { DomainKind::Ball { n: 2 } };
        let dom = DomainModel::new(kind, PhiSpec::Zero).unwrap();
        let b = rng.random_range(0.0..2.0);
        let m = rng.random_range(0..3);
        let f = move |z: &[Complex64]| {
            let q: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            q.powi(m) * (-b * q).exp()
        };
        let a = random_test_function(&mut rng);
        let t0 = rng.random_range(0.0..1.0);
        let r = layer_cake(&dom, f, a, t0, &grid).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(r.residual <= 1e-6, || format!("instance {i}: residual {:e}", r.residual))?;
        worst = worst.max(r.residual);
    }
    Ok(format!("disk {:.1e}, 20 random instances <= {worst:.1e}", disk.residual))
}

fn integration_by_parts() -> Outcome {
    let e = f64::exp;
    let cases = [
        (
            WeightFunction::constant(0.0),
            TestFunction::Saturating {
                a0: 0.0,
                amp: 1.0,
                rate: 1.0,
            },
            0.0,
            [0.5, 0.5, 0.0],
        ),
        (
            WeightFunction::exp_rate(0.0, 0.5),
            TestFunction::Saturating {
                a0: 0.0,
                amp: 1.0,
                rate: 0.25,
            },
            1.0,
            [
                2.0 * e(-0.5) - 4.0 / 3.0 * e(-0.75),
                2.0 / 3.0 * e(-0.75),
                2.0 * e(-0.5) - 2.0 * e(-0.75),
            ],
        ),
        // c = e^{-t}, a = t: int e^{-2s} s = 1/4, g = e^{-2s}/2
        (
            WeightFunction::exp_rate(0.0, -1.0),
            TestFunction::Affine { a0: 0.0, slope: 1.0 },
            0.0,
            [0.25, 0.25, 0.0],
        ),
    ];
    let mut worst: f64 = 0.0;
    for (i, (c, a, t0, terms)) in cases.iter().enumerate() {
        let r = int_by_parts_identity(c, *a, *t0).map_err(|e| e.to_string())?;
        let got = [r.weighted, r.transported, r.boundary];
        for (g, want) in got.iter().zip(terms) {
            ensure((g - want).abs() <= 1e-10, || format!("instance {i}: term {g} vs {want}"))?;
        }
        ensure(r.residual.abs() <= 1e-9, || format!("instance {i}: residual {:e}", r.residual))?;
        worst = worst.max(r.residual.abs());
    }
    Ok(format!("3 instances, residual <= {worst:.1e}"))
}

fn bidisc_slice() -> DomainModel {
    DomainModel::with_psi(
        DomainKind::Polydisc { radii: vec![1.0, 1.0] },
        PsiSpec::SliceLog { codim: 1 },
        PhiSpec::Zero,
    )
    .unwrap()
}

fn optimal_extension() -> Outcome {
    let dom = bidisc_slice();
    let one = Polynomial::constant(2, 1.0);
    let bm = boundary_measure(&dom, &one, &[0.5, 1.0, 2.0, 4.0, 8.0]).map_err(|e| e.to_string())?;
    for (t, v) in bm.t.iter().zip(&bm.estimates) {
        ensure((v - PI).abs() <= 1e-3, || format!("strip estimate {v} at t = {t}"))?;
    }
    let space = BergmanSpace::new(dom, WeightFunction::constant(0.0), 3);
    let rep = optimal_extension_check(&space, &one, &[0.0, 1.0, 2.0, 4.0, 6.0], 1e-3, None)
        .map_err(|e| e.to_string())?;
    ensure((rep.global - PI * PI).abs() <= 1e-3, || format!("global {}", rep.global))?;
    ensure(rep.max_decay_error <= 1e-3, || format!("decay error {:e}", rep.max_decay_error))?;
    ensure(rep.max_coefficient_gap <= 1e-8, || format!("coefficient gap {:e}", rep.max_coefficient_gap))?;
    Ok(format!(
        "boundary {:.9}, global {:.9}, decay {:.1e}, coefficients {:.1e}",
        bm.limit, rep.global, rep.max_decay_error, rep.max_coefficient_gap
    ))
}

fn structure_properties() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);

    // orthogonality of the minimizer against the ideal
    let h = Polynomial::from_terms(
        1,
        monomials_up_to(1, 1)
            .into_iter()
            .zip([Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]),
    );
    let problem = unit_problem(DomainKind::Disk, PhiSpec::LogModulus { h }, 4);
    let basis = problem.free_monomials();
    let perturbations: Vec<Polynomial> = (0..20)
        .map(|_| {
            Polynomial::from_terms(
                1,
                basis.iter().cloned().map(|a| {
                    (a, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                }),
            )
        })
        .collect();
    let pyth = verify_pythagoras(&problem, 1.0, &perturbations).map_err(|e| e.to_string())?;
    ensure(pyth <= 1e-10, || format!("Pythagoras residual {pyth:e}"))?;

    // monotone decay on the linear suite
    let gt = GTransform::new(&WeightFunction::constant(0.0)).map_err(|e| e.to_string())?;
    let t = linspace(0.0, 10.0, 21);
    for (name, p) in [
        ("disk", unit_problem(DomainKind::Disk, PhiSpec::Zero, 4)),
        ("ball2", unit_problem(DomainKind::Ball { n: 2 }, PhiSpec::Zero, 3)),
        ("bidisc", unit_problem(DomainKind::Polydisc { radii: vec![1.0, 1.0] }, PhiSpec::Zero, 3)),
    ] {
        let curve = GCurve::sample(&p, &gt, &t).map_err(|e| e.to_string())?;
        let m = check_monotone_limits(&curve, 1e-4).map_err(|e| e.to_string())?;
        ensure(m.pass, || format!("{name}: monotone {} ratio {:e}", m.nonincreasing, m.decay_ratio))?;
    }

    // regularized maximum, 200 random trials
    let c_rho = max_smoother_constant();
    for trial in 0..200 {
        let eps = rng.random_range(0.01..1.0);
        let x = rng.random_range(-3.0..3.0);
        let y = x + rng.random_range(-3.0 * eps..3.0 * eps);
        let m = make_max_smoother(eps).unwrap();
        let v = m.eval(x, y);
        let fail = |what: &str| format!("trial {trial} ({what}): eps {eps}, x {x}, y {y}");
        let dx = rng.random_range(0.0..eps);
        ensure(m.eval(x + dx, y) >= v - 1e-12 && m.eval(x, y + dx) >= v - 1e-12, || fail("a1 monotone"))?;
        let (x2, y2) = (x + rng.random_range(-eps..eps), y + rng.random_range(-eps..eps));
        let mid = m.eval(0.5 * (x + x2), 0.5 * (y + y2));
        ensure(mid <= 0.5 * (v + m.eval(x2, y2)) + 1e-9, || fail("a1 convex"))?;
        let wider = make_max_smoother(eps * rng.random_range(1.0..3.0)).unwrap();
        ensure(wider.eval(x, y) >= v - 1e-12, || fail("a2"))?;
        ensure((v - x.max(y)).abs() <= eps * c_rho + 1e-12, || fail("a3"))?;
        let gap = 2.0 * eps + rng.random_range(0.0..1.0);
        ensure(m.eval(x, x - gap) == x, || fail("a4"))?;
        ensure(m.eval(y - gap, y) == y, || fail("a5"))?;
        ensure(v >= x - 1e-12 && v >= y - 1e-12, || fail("a6/a7"))?;
    }

    // smoothed cutoff on dense grids
    for &(t0, width, eps) in &[(0.0, 1.0, 0.1), (0.5, 2.0, 0.05), (2.0, 0.5, 0.01)] {
        let v = make_smoothed_cutoff(t0, width, eps).unwrap();
        let lo = -t0 - width - 1.0;
        for i in 0..=20_000 {
            let t = lo + (width + 2.0) * f64::from(i) / 20_000.0;
            if t >= -t0 - eps {
                ensure((v.value(t) - t).abs() <= 1e-9, || format!("property 1 at t = {t}"))?;
            }
            let inside = t > -t0 - width + eps && t < -t0 - eps;
            let cap = if inside { 2.0 / width } else { 0.0 };
            let d2 = v.second(t);
            ensure(d2 >= -1e-9 && d2 <= cap + 1e-9, || format!("property 2 at t = {t}: {d2}"))?;
            let d1 = v.deriv(t);
            ensure((-1e-9..=1.0 + 1e-9).contains(&d1), || format!("property 3 at t = {t}: {d1}"))?;
        }
    }

    // cutoff extension inequality on the disk
    let disk = unit_problem(DomainKind::Disk, PhiSpec::Zero, 4);
    for width in [1.0, 0.5, 0.25] {
        let r = verify_extension_inequality(&disk, 0.0, width, ExtensionMode::Twisted).map_err(|e| e.to_string())?;
        ensure(r.pass, || format!("B = {width}: lhs {} > rhs {}", r.lhs, r.rhs))?;
    }
    Ok(format!("Pythagoras {pyth:.1e}; decay, regularized max, smoothed cutoff and extension inequality hold"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("disk linear law", disk_linear_law),
        ("strict concavity", strict_concavity),
        ("ODE residuals", ode_residuals),
        ("Bergman restriction law", bergman_restriction),
        ("linearity equivalence", linearity_equivalence),
        ("effective linearity", effective_linearity),
        ("layer-cake", layer_cake_law),
        ("integration by parts", integration_by_parts),
        ("optimal extension", optimal_extension),
        ("structure properties", structure_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
