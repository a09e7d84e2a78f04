//! Shared scenario builders for the benchmarks in `benches/`.

use nsl_core::{Boundary, FluxModel, Grid1D, InitialData, KernelSpec, SimState, Solver};

/// Periodic sine profile on `n` cells at dx = 0.01, the convolution
/// workload (a gamma = 1 kernel then spans 100 cells).
pub fn smooth_profile(n: usize) -> (Grid1D, Vec<f64>) {
    let grid = Grid1D::from_length(n, 0.0, n as f64 * 0.01, Boundary::Periodic).unwrap();
    let ic = InitialData::SinePerturbation { base: 0.5, amplitude: 0.25, waves: 2 };
    let u = ic.discretize(&grid);
    (grid, u)
}

/// Prepared periodic sine state plus its solver, for step benchmarks.
pub fn sine_state(n: usize, order: u8) -> (Solver, SimState) {
    let flux = FluxModel::arrhenius(1.0).unwrap();
    let kernel = KernelSpec::constant(0.5, 1.0).unwrap();
    let solver =
        Solver::new(flux, kernel).with_cfl(0.45).unwrap().with_order(order).unwrap();
    let grid = Grid1D::from_length(n, 0.0, n as f64 * 0.01, Boundary::Periodic).unwrap();
    let ic = InitialData::SinePerturbation { base: 0.5, amplitude: 0.25, waves: 1 };
    let u0 = ic.discretize(&grid);
    let state = solver.prepare(grid, u0).unwrap();
    (solver, state)
}
