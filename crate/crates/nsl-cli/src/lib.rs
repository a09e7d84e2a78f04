//! Experiment harness around [`nsl_core`]: TOML run configs, single runs
//! with artifact persistence, threshold-boundary sweeps, and grid-refinement
//! studies. The `nsl` binary is a thin command-line front end over the
//! functions exported here.
//!
//! Artifacts are plain CSV and JSON with stable schemas:
//!
//! * `trace.csv` — `t,M,N,mass,umin,umax`, one row per sampled step,
//! * `snapshots/*.csv` — `x,u,ubar,ux` at the requested times,
//! * `sweep.csv` — one row per sweep run with threshold classification,
//! * `refine.csv` — one row per refinement level,
//! * `report.json` — machine-readable summary of each command.
//!
//! Identical configs and seeds produce byte-identical CSV files regardless
//! of the worker count: every simulation is sequential, and parallelism only
//! distributes independent runs whose results are gathered in point order.

pub mod artifacts;
pub mod config;
pub mod refine;
pub mod single;
pub mod sweep;

pub use config::RunConfig;
pub use refine::{refinement_study, RefineReport, Verdict};
pub use single::{run_single, simulate, RunStatus, SimRun, SingleReport};
pub use sweep::{run_sweep, PointRecord, SweepConfig, SweepReport};
