//! Radial nuclear spin diffusion around a single NV centre and the
//! exponential kinetics of the resulting bulk polarization.

mod kinetics;
mod solver;

pub use kinetics::{
    buildup_curve, fit_buildup, fit_depolarization, fit_exponential_approach, ApproachFit, BuildupFit,
    DepolarizationFit, KineticsParams,
};
pub use solver::{solve_radial_diffusion, volume_average, DiffusionConfig, DiffusionSolution, Snapshot};
