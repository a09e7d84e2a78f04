//! Nonlocal scalar conservation laws with look-ahead kernels.
//!
//! The model is ∂t u + ∂x F(u, ū) = 0 with ū = (K∗u)(x) averaging the
//! density over a downstream window [x, x+γ]; the flagship instance is the
//! Arrhenius traffic flux F = u(1−u)e^{−ū}. The crate provides
//!
//! * kernels and the discrete nonlocal quantities ū, ū_x, ū_xx ([`kernel`]),
//! * flux models with validated derivatives ([`flux`]),
//! * a finite-volume integrator with slope tracking and gradient blow-up
//!   detection ([`solver`]),
//! * analytic shock-formation thresholds and their box-optimization
//!   generalization ([`threshold`]),
//! * Riccati comparison ODEs certifying blow-up times ([`riccati`]),
//! * an initial-data library with analytically known slope extrema ([`ic`]).

pub mod flux;
pub mod grid;
pub mod ic;
pub mod kernel;
pub mod riccati;
pub mod solver;
pub mod threshold;

pub use flux::{flux_and_wavespeed, validate_h2, ClauseStatus, FluxError, FluxModel, ValidationReport};
pub use grid::{Boundary, Grid1D, GridError};
pub use ic::InitialData;
pub use kernel::{convolve, kernel_mass, nonlocal_derivatives, KernelError, KernelKind, KernelSpec};
pub use riccati::{
    blowup_time_closed_form, riccati_compare, riccati_solve, ComparisonReport, RiccatiError,
    RiccatiProblem, RiccatiSolution,
};
pub use solver::{
    BlowupCriterion, BlowupEvent, DetectorConfig, RunOutcome, SimState, Solver, SolverError,
    TraceRow,
};
pub use threshold::{
    builtin_n1_grid_min, classify, general_lambda, general_n_roots, omega_box_maxima,
    threshold_constant, threshold_linear, LambdaReport, OmegaBoxMaxima, PotentialModel,
    ThresholdError, ThresholdModel, ThresholdQuery, ThresholdReport, VRange,
};
