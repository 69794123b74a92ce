//! Kernel ratios K_{D_t}(z, o) / K_D(z, o) on the unit ball of C^2.

use num_complex::Complex64;

use l2lab::analysis::bergman_restriction_check;
use l2lab::domains::{DomainKind, DomainModel, PhiSpec};
use l2lab::minimizer::BergmanSpace;
use l2lab::weightlab::WeightFunction;

fn main() -> l2lab::Result<()> {
    let dom = DomainModel::new(DomainKind::Ball { n: 2 }, PhiSpec::Zero)?;
    let space = BergmanSpace::new(dom, WeightFunction::constant(0.0), 3);
    let samples = vec![
        vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4)],
        vec![Complex64::new(0.0, 0.6), Complex64::new(0.1, 0.0)],
    ];
    let rep = bergman_restriction_check(&space, &[0.5, 1.0, 2.0], &samples, 1e-6)?;
    for row in &rep.rows {
        println!("t = {:.1}  ratio = {:.12}  e^t = {:.12}", row.t, row.ratio, row.t.exp());
    }
    println!("max relative error {:.2e}, |K G - 1| {:.2e}", rep.max_relative_error, rep.duality_error);
    Ok(())
}
