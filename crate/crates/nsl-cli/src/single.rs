//! One configured simulation: segmented integration over the snapshot
//! schedule, blow-up detection, threshold classification of the initial
//! data, and artifact persistence.
//!
//! The detector history restarts at each snapshot boundary, so detection can
//! lag a snapshot time by up to `growth_window` steps; snapshot schedules
//! are coarse relative to step counts, so this does not move reported
//! blow-up times measurably.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;

use nsl_core::{
    classify, BlowupEvent, SimState, SolverError, ThresholdModel, ThresholdQuery,
    ThresholdReport, TraceRow, VRange,
};

use crate::artifacts;
use crate::config::{FluxName, KernelName, RunConfig};

/// Box-search resolution when a tabulated kernel routes threshold
/// classification through the general optimizer.
const THRESHOLD_RESOLUTION: usize = 801;

/// Snapshot times closer than this (relative to the horizon) collapse.
const TIME_TOL: f64 = 1e-12;

/// How a run ended; the process exit code follows it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Clean,
    BlowUp,
    NumericFailure,
}

/// In-memory result of one simulation, before any artifact is written.
#[derive(Debug)]
pub struct SimRun {
    pub status: RunStatus,
    pub error: Option<String>,
    pub event: Option<BlowupEvent>,
    pub trace: Vec<TraceRow>,
    pub final_state: Option<SimState>,
    pub snapshots: Vec<(f64, SimState)>,
    pub sup_slope0: f64,
    pub inf_slope0: f64,
    pub threshold: Option<ThresholdReport>,
    pub mass_initial: f64,
}

impl SimRun {
    pub fn detected(&self) -> bool {
        self.status == RunStatus::BlowUp
    }
}

/// Runs the configured scenario without touching the filesystem.
///
/// Configuration errors surface as `Err`; numeric failures inside the time
/// loop are a run *outcome* (`RunStatus::NumericFailure`) with whatever
/// trace had accumulated, because a sweep must keep going past them.
pub fn simulate(cfg: &RunConfig) -> Result<SimRun> {
    let grid = cfg.build_grid()?;
    let solver = cfg.build_solver()?;
    let ic = cfg.build_ic()?;
    let detector = cfg.detector();
    let t_final = cfg.t_final();
    if t_final.is_nan() || t_final <= 0.0 {
        return Err(anyhow!("sim.t_final must be positive, got {t_final}"));
    }

    let u0 = ic.discretize(&grid);
    let state = solver.prepare(grid, u0).map_err(|e| anyhow!("initial data: {e}"))?;
    // Analytic slope extrema where the family has them; the random family
    // reads them off the discretized profile.
    let (sup0, inf0) = ic.slope_extrema(&state.grid).unwrap_or((state.m_slope, state.n_slope));
    let threshold = classify_initial_data(cfg, sup0, inf0)?;
    let mass_initial = state.mass();
    log::info!(
        "run: n_cells = {}, gamma = {}, t_final = {}, sup u0' = {:.4}, inf u0' = {:.4}",
        state.grid.n_cells(),
        cfg.kernel.gamma,
        t_final,
        sup0,
        inf0,
    );

    // Snapshot schedule: unique finite times in [0, t_final]; t = 0 is
    // served straight from the initial state.
    let tol = TIME_TOL * t_final.max(1.0);
    let mut want: Vec<f64> = cfg
        .output
        .snapshot_times
        .iter()
        .copied()
        .filter(|t| t.is_finite() && *t >= -tol && *t <= t_final + tol)
        .collect();
    want.sort_by(f64::total_cmp);
    want.dedup_by(|a, b| (*a - *b).abs() <= tol);

    let mut snapshots = Vec::new();
    let mut targets: Vec<(f64, bool)> = Vec::new();
    for t in want {
        if t <= tol {
            snapshots.push((0.0, state.clone()));
        } else {
            targets.push((t.min(t_final), true));
        }
    }
    match targets.last() {
        Some(&(t, _)) if (t_final - t).abs() <= tol => {}
        _ => targets.push((t_final, false)),
    }

    let mut rows: Vec<TraceRow> = Vec::new();
    let mut event: Option<BlowupEvent> = None;
    let mut status = RunStatus::Clean;
    let mut error = None;
    let mut recovered: Option<SimState> = None;
    let mut live = Some(state);

    for &(target, is_snapshot) in &targets {
        let s0 = live.take().expect("state is live until a failure breaks the loop");
        match solver.run(s0, target, &detector) {
            Ok(outcome) => {
                // Each segment re-records its starting state; drop the
                // duplicate row at interior boundaries.
                let skip = usize::from(!rows.is_empty());
                rows.extend(outcome.trace.into_iter().skip(skip));
                let detected = outcome.event.detected;
                event = Some(outcome.event);
                if is_snapshot && !detected {
                    snapshots.push((outcome.state.t, outcome.state.clone()));
                }
                live = Some(outcome.state);
                if detected {
                    status = RunStatus::BlowUp;
                    break;
                }
            }
            Err(e) => {
                status = RunStatus::NumericFailure;
                recovered = match &e {
                    SolverError::NumericDivergence { last_valid, .. }
                    | SolverError::MaxPrinciple { last_valid, .. } => {
                        Some((**last_valid).clone())
                    }
                    _ => None,
                };
                error = Some(e.to_string());
                break;
            }
        }
    }
    let final_state = live.or(recovered);

    match status {
        RunStatus::Clean => log::info!(
            "run finished clean at t = {}",
            final_state.as_ref().map_or(f64::NAN, |s| s.t)
        ),
        RunStatus::BlowUp => {
            let e = event.as_ref().expect("detection implies an event");
            log::info!(
                "blow-up detected at t = {:.6}, x = {:.4}, peak slope {:.3}",
                e.t_blowup.unwrap_or(f64::NAN),
                e.x_location,
                e.peak_slope,
            );
        }
        RunStatus::NumericFailure => {
            log::warn!("numeric failure: {}", error.as_deref().unwrap_or("unknown"));
        }
    }

    Ok(SimRun {
        status,
        error,
        event,
        trace: rows,
        final_state,
        snapshots,
        sup_slope0: sup0,
        inf_slope0: inf0,
        threshold,
        mass_initial,
    })
}

/// Threshold classification for the configured model, when the theory
/// covers it (the nonlocal Arrhenius flux; local runs return `None`).
/// The closed forms assume the unit-strength kernels, so a constant kernel
/// with k0 ≠ 1 routes through the general box optimizer instead.
fn classify_initial_data(
    cfg: &RunConfig,
    sup0: f64,
    inf0: f64,
) -> Result<Option<ThresholdReport>> {
    if cfg.flux.name != FluxName::Arrhenius {
        return Ok(None);
    }
    let model = match cfg.kernel.kind {
        KernelName::Constant if cfg.kernel.k0 == 1.0 => ThresholdModel::ConstantPotential,
        KernelName::Linear => ThresholdModel::LinearPotential,
        KernelName::Constant | KernelName::Tabulated => ThresholdModel::General {
            flux: Box::new(cfg.build_flux()?),
            kernel: Box::new(cfg.build_kernel()?),
            v_range: VRange::KernelNorm,
        },
    };
    let q = ThresholdQuery {
        gamma: cfg.kernel.gamma,
        // Discrete extrema of flat or one-sided data can land on the wrong
        // side of zero by rounding; the thresholds are stated for
        // inf ≤ 0 ≤ sup.
        inf_slope: inf0.min(0.0),
        sup_slope: sup0.max(0.0),
        model,
    };
    classify(&q, THRESHOLD_RESOLUTION).map(Some).map_err(|e| anyhow!("threshold: {e}"))
}

/// Full single-run summary, echoed to `report.json`.
#[derive(Debug, Serialize)]
pub struct SingleReport {
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub t_end: f64,
    pub steps: u64,
    pub sup_slope0: f64,
    pub inf_slope0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<BlowupEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdReport>,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub trace_rows: usize,
    pub snapshots: Vec<String>,
    pub config: RunConfig,
}

impl SingleReport {
    /// 0 clean, 10 blow-up detected, 20 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self.status {
            RunStatus::Clean => 0,
            RunStatus::BlowUp => 10,
            RunStatus::NumericFailure => 20,
        }
    }
}

/// Runs one scenario and writes `trace.csv`, `snapshots/*.csv`,
/// `blowup.json`, `threshold.json`, and `report.json` under `out`.
pub fn run_single(cfg: &RunConfig, out: &Path) -> Result<SingleReport> {
    let run = simulate(cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    artifacts::write_trace_csv(&out.join("trace.csv"), &run.trace)?;

    let mut snapshot_files = Vec::new();
    for (i, (t, s)) in run.snapshots.iter().enumerate() {
        let name = format!("snapshots/snap_{i:03}_t{t}.csv");
        artifacts::write_snapshot_csv(&out.join(&name), s)?;
        snapshot_files.push(name);
    }
    if let Some(event) = &run.event {
        artifacts::write_json(&out.join("blowup.json"), event)?;
    }
    if let Some(th) = &run.threshold {
        artifacts::write_json(&out.join("threshold.json"), th)?;
    }

    let (t_end, mass_final, steps) = match &run.final_state {
        Some(s) => (s.t, s.mass(), s.step_count),
        None => (
            run.trace.last().map_or(0.0, |r| r.t),
            run.trace.last().map_or(f64::NAN, |r| r.mass),
            0,
        ),
    };
    let report = SingleReport {
        status: run.status,
        error: run.error,
        t_end,
        steps,
        sup_slope0: run.sup_slope0,
        inf_slope0: run.inf_slope0,
        event: run.event,
        threshold: run.threshold,
        mass_initial: run.mass_initial,
        mass_final,
        trace_rows: run.trace.len(),
        snapshots: snapshot_files,
        config: cfg.clone(),
    };
    artifacts::write_json(&out.join("report.json"), &report)?;
    Ok(report)
}
