//! Finite-volume integration of ∂t u + ∂x F(u, ū) = 0 with gradient
//! blow-up detection.
//!
//! The scheme is first-order local Lax–Friedrichs with the nonlocal factor
//! frozen per interface:
//!
//!   F̂_{i+1/2} = ½[F(u_i, ū_{i+1/2}) + F(u_{i+1}, ū_{i+1/2})]
//!               − ½ α_{i+1/2} (u_{i+1} − u_i),
//!
//! with ū_{i+1/2} = ½(ū_i + ū_{i+1}) and α_{i+1/2} the local max |F_u|.
//! An optional second-order mode uses minmod-limited reconstruction and
//! two-stage (Heun) time stepping, recomputing ū per stage.
//!
//! The solver tracks M(t) = max u_x and N(t) = min u_x and reports gradient
//! blow-up when max |u_x| clears a slope ceiling while having grown
//! monotonically over a trailing window — a fixed grid cannot follow
//! u_x → ∞, so the ceiling stands in for the divergence criterion, and the
//! growth guard filters out resolved steep traveling profiles.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::flux::FluxModel;
use crate::grid::Grid1D;
use crate::kernel::{convolve, nonlocal_derivatives, KernelError, KernelSpec};

/// Overshoot past [0, m] tolerated by the maximum-principle assertion.
const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cfl must lie in (0, 0.9], got {0}")]
    BadCfl(f64),
    #[error("order must be 1 or 2, got {0}")]
    BadOrder(u8),
    #[error("t_final = {t_final} does not exceed the current time {t}")]
    BadHorizon { t: f64, t_final: f64 },
    #[error("initial data has {got} values, grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("initial data at cell {index} is {value}, outside [0, {m}]")]
    BadInitialData { index: usize, value: f64, m: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("time step underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("non-finite state at t = {t}; last valid state retained")]
    NumericDivergence { t: f64, last_valid: Box<SimState> },
    #[error("maximum principle violated at t = {t}, cell {index}: u = {value}")]
    MaxPrinciple { t: f64, index: usize, value: f64, last_valid: Box<SimState> },
}

/// Full simulation state: cell averages plus cached nonlocal fields and
/// slope extrema. For local fluxes the nonlocal caches are zero-filled.
#[derive(Debug, Clone)]
pub struct SimState {
    pub grid: Grid1D,
    pub u: Vec<f64>,
    pub t: f64,
    pub ubar: Vec<f64>,
    pub ubar_x: Vec<f64>,
    pub ux: Vec<f64>,
    /// M(t) = max u_x.
    pub m_slope: f64,
    /// N(t) = min u_x.
    pub n_slope: f64,
    pub step_count: u64,
}

impl SimState {
    /// max |u_x| = max(M, −N).
    pub fn peak_slope(&self) -> f64 {
        self.m_slope.max(-self.n_slope)
    }

    pub fn mass(&self) -> f64 {
        self.grid.mass(&self.u)
    }

    /// Cell center of the first cell attaining max |u_x|.
    pub fn peak_location(&self) -> f64 {
        let mut best = 0usize;
        for (i, g) in self.ux.iter().enumerate() {
            if g.abs() > self.ux[best].abs() {
                best = i;
            }
        }
        self.grid.cell_center(best)
    }
}

/// How the blow-up detector fired, if at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlowupCriterion {
    SlopeCeiling,
    /// Assigned offline by the refinement harness, never by `run`.
    RefinementDivergence,
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupEvent {
    pub detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_blowup: Option<f64>,
    pub x_location: f64,
    pub peak_slope: f64,
    pub criterion: BlowupCriterion,
}

/// Blow-up detector settings.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorConfig {
    /// Absolute ceiling on max |u_x|; `None` picks
    /// max(100 · initial max |u_x|, 1e3).
    pub slope_ceiling: Option<f64>,
    /// Number of consecutive steps over which max |u_x| must not decrease.
    pub growth_window: usize,
    /// Trace sampling period in steps.
    pub trace_stride: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self { slope_ceiling: None, growth_window: 20, trace_stride: 1 }
    }
}

impl DetectorConfig {
    /// The ceiling actually used for a run starting at `initial_peak`.
    pub fn ceiling_for(&self, initial_peak: f64) -> f64 {
        self.slope_ceiling.unwrap_or((100.0 * initial_peak).max(1e3))
    }
}

/// One trace record: (t, M, N, mass, min u, max u).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub m_slope: f64,
    pub n_slope: f64,
    pub mass: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl TraceRow {
    fn of(s: &SimState) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &s.u {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Self { t: s.t, m_slope: s.m_slope, n_slope: s.n_slope, mass: s.mass(), u_min: lo, u_max: hi }
    }
}

/// Result of [`Solver::run`].
#[derive(Debug)]
pub struct RunOutcome {
    pub state: SimState,
    pub event: BlowupEvent,
    pub trace: Vec<TraceRow>,
}

fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Finite-volume integrator for one flux/kernel pair.
#[derive(Debug, Clone)]
pub struct Solver {
    flux: FluxModel,
    kernel: KernelSpec,
    cfl: f64,
    order: u8,
}

impl Solver {
    /// Defaults: CFL 0.45 (inside the monotonicity bound 0.5), first order.
    pub fn new(flux: FluxModel, kernel: KernelSpec) -> Self {
        Self { flux, kernel, cfl: 0.45, order: 1 }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Result<Self, SolverError> {
        if !cfl.is_finite() || cfl <= 0.0 || cfl > 0.9 {
            return Err(SolverError::BadCfl(cfl));
        }
        self.cfl = cfl;
        Ok(self)
    }

    pub fn with_order(mut self, order: u8) -> Result<Self, SolverError> {
        if order != 1 && order != 2 {
            return Err(SolverError::BadOrder(order));
        }
        self.order = order;
        Ok(self)
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Builds the initial state at t = 0, validating and caching.
    pub fn prepare(&self, grid: Grid1D, u0: Vec<f64>) -> Result<SimState, SolverError> {
        if u0.len() != grid.n_cells() {
            return Err(SolverError::LengthMismatch { expected: grid.n_cells(), got: u0.len() });
        }
        let m = self.flux.m();
        for (index, &value) in u0.iter().enumerate() {
            if !value.is_finite() || value < -STATE_TOL || value > m + STATE_TOL {
                return Err(SolverError::BadInitialData { index, value, m });
            }
        }
        let ubar = self.nonlocal_average(&grid, &u0)?;
        let ubar_x = self.nonlocal_slope(&grid, &u0)?;
        let ux = grid.gradient(&u0);
        let (m_slope, n_slope) = slope_extrema(&ux);
        Ok(SimState { grid, u: u0, t: 0.0, ubar, ubar_x, ux, m_slope, n_slope, step_count: 0 })
    }

    fn nonlocal_average(&self, g: &Grid1D, u: &[f64]) -> Result<Vec<f64>, KernelError> {
        if self.flux.is_nonlocal() {
            convolve(&self.kernel, g, u)
        } else {
            Ok(vec![0.0; g.n_cells()])
        }
    }

    fn nonlocal_slope(&self, g: &Grid1D, u: &[f64]) -> Result<Vec<f64>, KernelError> {
        if self.flux.is_nonlocal() {
            Ok(nonlocal_derivatives(&self.kernel, g, u)?.ubar_x)
        } else {
            Ok(vec![0.0; g.n_cells()])
        }
    }

    /// −∂x F̂ per cell and the largest interface wave speed.
    fn rhs_and_alpha(&self, g: &Grid1D, u: &[f64], ubar: &[f64]) -> (Vec<f64>, f64) {
        let n = g.n_cells();
        let dx = g.dx();
        let slopes: Option<Vec<f64>> = (self.order == 2).then(|| {
            (0..n)
                .map(|i| {
                    let i = i as isize;
                    let a = g.value_at(u, i) - g.value_at(u, i - 1);
                    let b = g.value_at(u, i + 1) - g.value_at(u, i);
                    minmod(a, b) / dx
                })
                .collect()
        });
        // Ghost cells extend constantly, so their reconstruction is flat.
        let slope_at = |j: isize| -> f64 {
            match &slopes {
                None => 0.0,
                Some(s) => match g.boundary() {
                    crate::grid::Boundary::Periodic => {
                        s[j.rem_euclid(n as isize) as usize]
                    }
                    crate::grid::Boundary::ConstantExtension => {
                        if j < 0 || j >= n as isize {
                            0.0
                        } else {
                            s[j as usize]
                        }
                    }
                },
            }
        };

        let mut fhat = vec![0.0; n + 1];
        let mut alpha_max = 0.0f64;
        for (j, fh) in fhat.iter_mut().enumerate() {
            let il = j as isize - 1;
            let ir = j as isize;
            let ul = g.value_at(u, il) + 0.5 * dx * slope_at(il);
            let ur = g.value_at(u, ir) - 0.5 * dx * slope_at(ir);
            let ubf = 0.5 * (g.value_at(ubar, il) + g.value_at(ubar, ir));
            let alpha = self.flux.f_u(ul, ubf).abs().max(self.flux.f_u(ur, ubf).abs());
            alpha_max = alpha_max.max(alpha);
            *fh = 0.5 * (self.flux.f(ul, ubf) + self.flux.f(ur, ubf)) - 0.5 * alpha * (ur - ul);
        }
        let rhs = (0..n).map(|i| -(fhat[i + 1] - fhat[i]) / dx).collect();
        (rhs, alpha_max)
    }

    /// One accepted time step; returns the dt taken (≤ `dt_cap`).
    pub fn step(&self, s: &mut SimState, dt_cap: f64) -> Result<f64, SolverError> {
        let dx = s.grid.dx();
        let (rhs, alpha_max) = self.rhs_and_alpha(&s.grid, &s.u, &s.ubar);
        // α_max = 0 (flat extremal data) falls back to the unit-speed cap.
        let mut dt = (self.cfl * dx / alpha_max).min(self.cfl * dx);
        if self.flux.is_nonlocal() {
            // Never cross the look-ahead window in one step.
            dt = dt.min(0.1 * self.kernel.gamma());
        }
        dt = dt.min(dt_cap);
        if !dt.is_finite() || dt <= 1e-15 * s.t.max(1.0) {
            return Err(SolverError::StepUnderflow(s.t));
        }

        let n = s.grid.n_cells();
        let u_next: Vec<f64> = if self.order == 1 {
            (0..n).map(|i| s.u[i] + dt * rhs[i]).collect()
        } else {
            let u1: Vec<f64> = (0..n).map(|i| s.u[i] + dt * rhs[i]).collect();
            let ubar1 = self.nonlocal_average(&s.grid, &u1)?;
            let (rhs1, _) = self.rhs_and_alpha(&s.grid, &u1, &ubar1);
            (0..n).map(|i| 0.5 * (s.u[i] + u1[i] + dt * rhs1[i])).collect()
        };

        // Hard state assertions. LLF with frozen ū is monotone under this
        // CFL, and F(0, ·) = F(m, ·) = 0 makes 0 and m invariant, so any
        // excursion beyond roundoff is a genuine scheme failure.
        let m = self.flux.m();
        let t_next = s.t + dt;
        for (index, &value) in u_next.iter().enumerate() {
            if !value.is_finite() {
                return Err(SolverError::NumericDivergence {
                    t: t_next,
                    last_valid: Box::new(s.clone()),
                });
            }
            if value < -STATE_TOL || value > m + STATE_TOL {
                return Err(SolverError::MaxPrinciple {
                    t: t_next,
                    index,
                    value,
                    last_valid: Box::new(s.clone()),
                });
            }
        }

        s.ubar = self.nonlocal_average(&s.grid, &u_next)?;
        s.ubar_x = self.nonlocal_slope(&s.grid, &u_next)?;
        s.ux = s.grid.gradient(&u_next);
        let (m_slope, n_slope) = slope_extrema(&s.ux);
        s.m_slope = m_slope;
        s.n_slope = n_slope;
        s.u = u_next;
        s.t = t_next;
        s.step_count += 1;
        Ok(dt)
    }

    /// Advances to `t_final` or until the slope detector fires.
    pub fn run(
        &self,
        s0: SimState,
        t_final: f64,
        detector: &DetectorConfig,
    ) -> Result<RunOutcome, SolverError> {
        if t_final.is_nan() || t_final <= s0.t {
            return Err(SolverError::BadHorizon { t: s0.t, t_final });
        }
        let mut s = s0;
        let ceiling = detector.ceiling_for(s.peak_slope());
        let window = detector.growth_window.max(1);
        let stride = detector.trace_stride.max(1);

        let mut trace = vec![TraceRow::of(&s)];
        let mut history: VecDeque<f64> = VecDeque::with_capacity(window + 1);
        history.push_back(s.peak_slope());
        let mut detected = false;

        while t_final - s.t > 1e-14 * t_final.abs().max(1.0) {
            let remaining = t_final - s.t;
            self.step(&mut s, remaining)?;
            let peak = s.peak_slope();
            history.push_back(peak);
            if history.len() > window + 1 {
                history.pop_front();
            }
            if s.step_count.is_multiple_of(stride as u64) {
                trace.push(TraceRow::of(&s));
            }
            if peak >= ceiling && history.len() == window + 1 {
                let monotone = history.iter().zip(history.iter().skip(1)).all(|(a, b)| b >= a);
                if monotone && history.back() > history.front() {
                    detected = true;
                    break;
                }
            }
        }

        if trace.last().map(|r| r.t) != Some(s.t) {
            trace.push(TraceRow::of(&s));
        }
        let event = BlowupEvent {
            detected,
            t_blowup: detected.then_some(s.t),
            x_location: s.peak_location(),
            peak_slope: s.peak_slope(),
            criterion: if detected { BlowupCriterion::SlopeCeiling } else { BlowupCriterion::None },
        };
        Ok(RunOutcome { state: s, event, trace })
    }
}

fn slope_extrema(ux: &[f64]) -> (f64, f64) {
    let mut m = f64::NEG_INFINITY;
    let mut n = f64::INFINITY;
    for &g in ux {
        m = m.max(g);
        n = n.min(g);
    }
    if ux.is_empty() {
        (0.0, 0.0)
    } else {
        (m, n)
    }
}
