//! Concavity of r -> G(g^{-1}(r)) and the three equivalent linearity tests.

use l2lab::analysis::{check_concavity, check_linearity_equivalence, GCurve};
use l2lab::domains::{DomainKind, DomainModel, IdealSpec, PhiSpec};
use l2lab::minimizer::{BergmanSpace, ExtensionProblem};
use l2lab::poly::Polynomial;
use l2lab::weightlab::{GTransform, WeightFunction};

fn main() -> l2lab::Result<()> {
    let c = WeightFunction::constant(0.0);
    let gt = GTransform::new(&c)?;
    let t: Vec<f64> = (0..=40).map(|i| 0.25 * f64::from(i)).collect();
    for (name, phi) in [("phi = 0", PhiSpec::Zero), ("phi = |z|^2", PhiSpec::RadialPower { a: 1.0 })] {
        let dom = DomainModel::new(DomainKind::Disk, phi)?;
        let space = BergmanSpace::new(dom, c.clone(), 4);
        let problem = ExtensionProblem::new(space, IdealSpec::MaxIdealPower { order: 1 }, Polynomial::constant(1, 1.0))?;
        let curve = GCurve::sample(&problem, &gt, &t)?;
        let conc = check_concavity(&curve, 1e-8)?;
        let lin = check_linearity_equivalence(&curve, 1e-6)?;
        println!(
            "{name}: max second difference {:.3e}, linear {}, strictly concave {}, statements ({}, {}, {}), agree {}",
            conc.max_second_difference, conc.linear, conc.strictly_concave, lin.linear, lin.some_ratio_below, lin.limit_below, lin.agree
        );
    }
    Ok(())
}
