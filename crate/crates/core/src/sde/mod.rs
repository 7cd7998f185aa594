//! Stochastic systems and their Euler–Maruyama integration.

pub mod integrator;
pub mod potential;
pub mod systems;

pub use integrator::{
    integrate, simulate_batch, splitmix, BatchConfig, BatchMeta, FnSystem, Recording, SdeSystem, StepReport,
    Trajectory, TrajectoryBatch, TrajectoryDiagnostics,
};
pub use potential::{smootherstep, Bump, LogVolumeProfile, Potential, PotentialSpec, RadialProfile};
pub use systems::{
    make_auxiliary_system, make_coupled_system, make_fully_projected_system, make_isotropic_curvature_system,
    make_orbit_bm_system, make_projected_system, make_uncorrected_isotropic_system, radial_oracle_system,
    reference_point, sample_invariant_initial, AuxiliarySystem, CoupledBase, CoupledSystem, FullyProjectedSystem,
    InitialLaw, IsotropicCurvatureSystem, OrbitBmSystem, ProjectedSystem, RadialOracleSystem, RADIAL_FLOOR,
};
