//! G(t) for the disk with a non-radial weight, and its convergence in degree.

use num_complex::Complex64;

use l2lab::domains::{DomainKind, DomainModel, IdealSpec, PhiSpec};
use l2lab::minimizer::{minimal_integral, BergmanSpace, ExtensionProblem};
use l2lab::poly::{monomials_up_to, Polynomial};
use l2lab::weightlab::WeightFunction;

fn main() -> l2lab::Result<()> {
    // phi = 2 log|2 + z|
    let h = Polynomial::from_terms(1, monomials_up_to(1, 1).into_iter().zip([Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]));
    let dom = DomainModel::new(DomainKind::Disk, PhiSpec::LogModulus { h })?;
    let datum = Polynomial::constant(1, 1.0);
    for degree in [1, 2, 4, 8] {
        let space = BergmanSpace::new(dom.clone(), WeightFunction::constant(0.0), degree);
        let problem = ExtensionProblem::new(space, IdealSpec::MaxIdealPower { order: 1 }, datum.clone())?;
        let res = minimal_integral(&problem, 0.5)?;
        println!(
            "degree {degree}: G(0.5) = {:.12}  condition {:.2e}  converged {}",
            res.value, res.condition, res.converged
        );
    }
    Ok(())
}
