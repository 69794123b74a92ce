//! Checks of the structural statements about `G(t; c)`: concavity in
//! `r = g(t)`, the linear case and its consequences, and the auxiliary
//! identities used along the way.

mod curve;
mod identities;
mod linear;

pub use curve::{
    check_concavity, check_linearity_equivalence, check_monotone_limits, ConcavityReport, ConcavityVerdict, GCurve,
    LinearityVerdict, MonotoneReport, SLOPE_TOLERANCE,
};
pub use identities::{
    int_by_parts_identity, layer_cake, quotient_monotonicity, IdentityCheck, IntegrationByParts, QuotientReport,
    TestFunction,
};
pub use linear::{
    bergman_restriction_check, boundary_measure, check_effective_linearity, optimal_extension_check,
    BoundaryMeasureEstimate, EffectiveLinearityReport, EffectiveRow, ExtensionRow, OptimalExtensionReport,
    RestrictionReport, RestrictionRow, CONDITION_WARNING, STRIP_TOLERANCE,
};
