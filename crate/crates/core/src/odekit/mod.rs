//! Closed-form ODE solution, cutoff profiles and the regularized maximum.

pub mod cutoff;
pub mod gz;
pub mod mollifier;
pub mod smoother;

pub use cutoff::{make_cutoff, make_smoothed_cutoff, CutoffProfile, SmoothedCutoff};
pub use gz::{solve_gz, verify_gz_residuals, OdePoint, OdeSolution, ResidualReport, ResidualRow};
pub use mollifier::{bump, bump_partial_moment, Mollifier};
pub use smoother::{make_max_smoother, max_smoother_constant, MaxSmoother};
