//! Reconstruction of forcing terms in the one-dimensional wave equation with
//! kinetic (dynamic) boundary conditions
//!
//! ```text
//! y_tt - y_xx = F            in (0,T) x (0,l)
//! y_tt(t,0) - y_x(t,0) = G   in (0,T)
//! y_tt(t,l) + y_x(t,l) = 0   in (0,T)
//! ```
//!
//! from the displacement observed at the final time `T`. The crate provides
//! an explicit finite-difference solver, the time-reversed adjoint solver, the
//! Tikhonov cost with its adjoint gradient, a Fletcher–Reeves conjugate
//! gradient reconstruction for separable sources `F = f(x) r(t,x)`, a
//! fixed-step gradient iteration over general `(F, G)` pairs, and the
//! synthetic experiments used to exercise all of it.

pub mod adjoint;
pub mod error;
pub mod experiment;
pub mod field;
pub mod forward;
pub mod functional;
pub mod grid;
pub mod optimizer;
pub mod quadrature;
pub mod sampling;

pub use adjoint::solve_adjoint;
pub use error::{Error, Result};
pub use experiment::{
    acc_error, add_noise, conv_error, lipschitz_constant, run_example, synthesize_measurement, Example, ExampleReport,
    ExperimentConfig, RunReport,
};
pub use field::{BoundaryField, GradientPair, SourcePair, Trajectory};
pub use forward::{energy_history, solve_forward, solve_sensitivity, BoundaryForcing, InitialData};
pub use functional::{InverseProblem, Measurement, SeparableProblem, SeparableSource};
pub use grid::{Mesh, SpaceGrid, TimeGrid, DEFAULT_CFL_MAX};
pub use optimizer::{
    cg_reconstruct, gradient_descent, project_admissible, AdmissibleBox, GroundTruth, IterationRecord, OptimizerConfig,
    Reconstruction, StepRule, StopStatus,
};
pub use quadrature::{inner_l2, inner_l2b, inner_l2t, norm_l2, norm_l2b, norm_l2t, trapezoid, trapezoid_time};
