//! Green-function sublevel sets of the model domains and their volumes.

use l2lab::domains::{sublevel_volume_integral, DomainKind, DomainModel, PhiSpec, QuadratureGrid};

fn main() -> l2lab::Result<()> {
    // the integrand is rotation invariant, so one angular node is exact
    let grid = QuadratureGrid::default().invariant();
    for kind in [
        DomainKind::Disk,
        DomainKind::Ball { n: 2 },
        DomainKind::Ball { n: 3 },
        DomainKind::Polydisc { radii: vec![1.0, 1.0] },
    ] {
        let dom = DomainModel::new(kind.clone(), PhiSpec::Zero)?;
        let v0 = sublevel_volume_integral(&dom, 0.0, |_, _| 1.0, &grid)?;
        let v2 = sublevel_volume_integral(&dom, 2.0, |_, _| 1.0, &grid)?;
        println!(
            "{kind:?}: vol(D) = {v0:.10}, vol(D_2)/vol(D) = {:.10} (e^-2 = {:.10}), scale {:.6}",
            v2 / v0,
            (-2.0f64).exp(),
            dom.sublevel_scale(2.0)
        );
    }
    Ok(())
}
