//! Layer-cake formula and the integration-by-parts identity.

use l2lab::analysis::{int_by_parts_identity, layer_cake, TestFunction};
use l2lab::domains::{DomainModel, QuadratureGrid};
use l2lab::weightlab::WeightFunction;

fn main() -> l2lab::Result<()> {
    let a = TestFunction::Saturating { a0: 0.0, amp: 1.0, rate: 1.0 };
    let grid = QuadratureGrid::default().invariant();
    let lc = layer_cake(&DomainModel::disk(), |_| 1.0, a, 0.0, &grid)?;
    println!("layer cake on the disk: {:.12} vs {:.12} (pi/2 = {:.12})", lc.lhs, lc.rhs, std::f64::consts::FRAC_PI_2);

    let c = WeightFunction::exp_rate(0.0, 0.5);
    let a = TestFunction::Saturating { a0: 0.0, amp: 1.0, rate: 0.25 };
    let ibp = int_by_parts_identity(&c, a, 1.0)?;
    println!(
        "integration by parts: {:.12} - {:.12} - {:.12} = {:.2e}",
        ibp.weighted, ibp.transported, ibp.boundary, ibp.residual
    );
    Ok(())
}
