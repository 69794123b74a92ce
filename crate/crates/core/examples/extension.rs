//! The cutoff extension inequality on the disk and the optimal slice extension
//! on the bidisc.

use l2lab::analysis::optimal_extension_check;
use l2lab::domains::{DomainKind, DomainModel, IdealSpec, PhiSpec, PsiSpec};
use l2lab::minimizer::{verify_extension_inequality, BergmanSpace, ExtensionMode, ExtensionProblem};
use l2lab::poly::Polynomial;
use l2lab::weightlab::WeightFunction;

fn main() -> l2lab::Result<()> {
    let space = BergmanSpace::new(DomainModel::disk(), WeightFunction::constant(0.0), 4);
    let problem = ExtensionProblem::new(space, IdealSpec::MaxIdealPower { order: 1 }, Polynomial::constant(1, 1.0))?;
    for width in [1.0, 0.5, 0.25] {
        let r = verify_extension_inequality(&problem, 0.0, width, ExtensionMode::Twisted)?;
        println!("B = {width}: {:.8} <= {:.8}  {}", r.lhs, r.rhs, if r.pass { "ok" } else { "FAIL" });
    }

    let dom = DomainModel::with_psi(
        DomainKind::Polydisc { radii: vec![1.0, 1.0] },
        PsiSpec::SliceLog { codim: 1 },
        PhiSpec::Zero,
    )?;
    let space = BergmanSpace::new(dom, WeightFunction::constant(0.0), 3);
    let rep = optimal_extension_check(&space, &Polynomial::constant(2, 1.0), &[0.0, 1.0, 2.0, 4.0], 1e-6, None)?;
    println!("\nslice z2 = 0 of the bidisc: boundary measure {:.10}, G(0) = {:.10}", rep.boundary.limit, rep.global);
    for row in &rep.rows {
        println!("t = {:.1}: G = {:.10}, expected {:.10}", row.t, row.value, row.expected);
    }
    Ok(())
}
