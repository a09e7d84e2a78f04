//! Threshold-boundary sweeps: a one- or two-axis grid of runs, each point
//! classified against the analytic threshold, plus the soundness statistic
//! (every above-threshold point must detect blow-up — the thresholds are
//! proven sufficient conditions, so any counterexample is a solver or
//! threshold bug) and the empirical-boundary gap per sweep row.
//!
//! Point results are gathered in deterministic point order, so identical
//! configs and seeds give byte-identical `sweep.csv` regardless of
//! `--jobs`. Failures of single points are recorded in their row and never
//! abort the sweep; failed above-threshold points count against soundness,
//! because an error cannot certify a detection.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::artifacts::{self, csv_field};
use crate::config::{apply_axis, RunConfig};
use crate::single::{simulate, RunStatus};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

/// One swept parameter: `count` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            bail!("axis '{}': count must be at least 1", self.key);
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            bail!("axis '{}': endpoints must be finite", self.key);
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        match self.scale {
            AxisScale::Linear => Ok((0..self.count)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / n)
                .collect()),
            AxisScale::Log => {
                if self.start <= 0.0 || self.stop <= 0.0 {
                    bail!("axis '{}': log scale needs positive endpoints", self.key);
                }
                let ratio = self.stop / self.start;
                Ok((0..self.count).map(|i| self.start * ratio.powf(i as f64 / n)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// One or two axes; with two, the second varies fastest.
    pub axes: Vec<AxisSpec>,
    #[serde(default = "default_runs")]
    pub runs_per_point: usize,
    /// Base scenario; axis values overwrite its keys point by point.
    pub fixed: RunConfig,
}

fn default_runs() -> usize {
    1
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("sweep config does not parse")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read sweep config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }
}

/// One sweep run's row in `sweep.csv` and `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub point: usize,
    pub run: usize,
    pub axis_values: Vec<f64>,
    pub sup_slope: Option<f64>,
    pub inf_slope: Option<f64>,
    pub threshold: Option<f64>,
    pub above_threshold: Option<bool>,
    pub detected: bool,
    pub t_blowup: Option<f64>,
    pub peak_slope: Option<f64>,
    /// above_threshold → detected; vacuously true when unclassified.
    pub consistent: bool,
    /// "ok" or the failure text.
    pub status: String,
}

/// Empirical blow-up boundary along a sup-slope axis, one entry per value
/// of the other axis. The analytic threshold is a sufficient condition, so
/// the expected sign is gap = analytic − empirical ≥ 0.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryGap {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<f64>,
    pub analytic_threshold: Option<f64>,
    pub empirical_boundary: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub points: usize,
    pub runs: usize,
    pub failed: usize,
    pub detected: usize,
    /// Fraction of above-threshold runs that detected blow-up; 1.0 when no
    /// run sits above threshold.
    pub soundness: f64,
    pub above_threshold_runs: usize,
    pub boundary: Vec<BoundaryGap>,
    pub records: Vec<PointRecord>,
}

struct Task {
    point: usize,
    run: usize,
    axis_values: Vec<f64>,
    cfg: RunConfig,
}

/// Executes the whole grid and writes `sweep.csv` and `report.json`.
pub fn run_sweep(
    sw: &SweepConfig,
    out: &Path,
    jobs: usize,
    seed: Option<u64>,
) -> Result<SweepReport> {
    if sw.axes.is_empty() || sw.axes.len() > 2 {
        bail!("sweep needs one or two axes, got {}", sw.axes.len());
    }
    if sw.runs_per_point == 0 {
        bail!("runs_per_point must be at least 1");
    }
    let axis_values: Vec<Vec<f64>> =
        sw.axes.iter().map(AxisSpec::values).collect::<Result<_>>()?;

    let tasks = build_tasks(sw, &axis_values, seed)?;
    log::info!(
        "sweep: {} point(s) x {} run(s), {} job(s)",
        tasks.len() / sw.runs_per_point,
        sw.runs_per_point,
        jobs.max(1),
    );

    let records = execute(&tasks, jobs.max(1));

    let above: Vec<&PointRecord> =
        records.iter().filter(|r| r.above_threshold == Some(true)).collect();
    let detected_above = above.iter().filter(|r| r.detected).count();
    let soundness = if above.is_empty() { 1.0 } else { detected_above as f64 / above.len() as f64 };
    let boundary = boundary_gaps(sw, &records);

    let report = SweepReport {
        points: tasks.len() / sw.runs_per_point,
        runs: records.len(),
        failed: records.iter().filter(|r| r.status != "ok").count(),
        detected: records.iter().filter(|r| r.detected).count(),
        soundness,
        above_threshold_runs: above.len(),
        boundary,
        records,
    };

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_sweep_csv(&out.join("sweep.csv"), sw, &report.records)?;
    artifacts::write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

fn build_tasks(
    sw: &SweepConfig,
    axis_values: &[Vec<f64>],
    seed: Option<u64>,
) -> Result<Vec<Task>> {
    // Base seed for the seeded random family: the CLI flag wins over the
    // config; each extra run per point offsets it so replicates differ while
    // every point sees the same draw (paired comparisons across the axes).
    let config_seed = sw
        .fixed
        .ic
        .params
        .get("seed")
        .and_then(|v| v.as_integer())
        .map(|i| i as u64)
        .unwrap_or(0);
    let base_seed = seed.unwrap_or(config_seed);

    let outer: &[f64] = &axis_values[0];
    let inner: &[f64] = if axis_values.len() == 2 { &axis_values[1] } else { &[0.0] };
    let mut tasks = Vec::new();
    let mut point = 0;
    for &a in outer {
        for &b in inner {
            for run in 0..sw.runs_per_point {
                let mut cfg = sw.fixed.clone();
                apply_axis(&mut cfg, &sw.axes[0].key, a)?;
                let mut values = vec![a];
                if sw.axes.len() == 2 {
                    apply_axis(&mut cfg, &sw.axes[1].key, b)?;
                    values.push(b);
                }
                if cfg.ic.name == "random_fourier" {
                    let s = base_seed.wrapping_add(run as u64);
                    cfg.ic.params.insert("seed".into(), toml::Value::Integer(s as i64));
                }
                tasks.push(Task { point, run, axis_values: values, cfg });
            }
            point += 1;
        }
    }
    Ok(tasks)
}

/// Work-queue execution; records land in task order no matter which worker
/// finishes first.
fn execute(tasks: &[Task], jobs: usize) -> Vec<PointRecord> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<PointRecord>>> = Mutex::new(vec![None; tasks.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(tasks.len()) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(idx) else {
                    break;
                };
                let record = run_task(task);
                slots.lock().expect("sweep worker poisoned the result store")[idx] =
                    Some(record);
            });
        }
    });
    slots
        .into_inner()
        .expect("sweep worker poisoned the result store")
        .into_iter()
        .map(|r| r.expect("every task slot is filled"))
        .collect()
}

fn run_task(task: &Task) -> PointRecord {
    match simulate(&task.cfg) {
        Ok(run) => {
            let threshold = run.threshold.as_ref().map(|t| t.threshold);
            let above = run.threshold.as_ref().map(|t| t.above);
            let detected = run.detected();
            log::info!(
                "point {} run {}: axes {:?} -> detected = {}, status = {:?}",
                task.point,
                task.run,
                task.axis_values,
                detected,
                run.status,
            );
            PointRecord {
                point: task.point,
                run: task.run,
                axis_values: task.axis_values.clone(),
                sup_slope: Some(run.sup_slope0),
                inf_slope: Some(run.inf_slope0),
                threshold,
                above_threshold: above,
                detected,
                t_blowup: run.event.as_ref().and_then(|e| e.t_blowup),
                peak_slope: run.final_state.as_ref().map(|s| s.peak_slope()),
                consistent: !(above == Some(true) && !detected),
                status: match run.status {
                    RunStatus::NumericFailure => {
                        format!("error: {}", run.error.as_deref().unwrap_or("numeric failure"))
                    }
                    _ => "ok".to_string(),
                },
            }
        }
        Err(e) => {
            log::warn!("point {} run {} failed: {e:#}", task.point, task.run);
            PointRecord {
                point: task.point,
                run: task.run,
                axis_values: task.axis_values.clone(),
                sup_slope: None,
                inf_slope: None,
                threshold: None,
                above_threshold: None,
                detected: false,
                t_blowup: None,
                peak_slope: None,
                consistent: true,
                status: format!("error: {e:#}"),
            }
        }
    }
}

/// Groups records by the non-sup-slope axis value and reports, per group,
/// the smallest swept sup-slope that detected blow-up next to the analytic
/// threshold. Empty when no axis sweeps `ic.sup_slope`.
fn boundary_gaps(sw: &SweepConfig, records: &[PointRecord]) -> Vec<BoundaryGap> {
    let Some(sup_axis) = sw.axes.iter().position(|a| a.key == "ic.sup_slope") else {
        return Vec::new();
    };
    let other_axis = 1 - sup_axis;
    let mut groups: Vec<(Option<f64>, Vec<&PointRecord>)> = Vec::new();
    for r in records {
        let group = r.axis_values.get(other_axis).copied().filter(|_| sw.axes.len() == 2);
        match groups.iter_mut().find(|(g, _)| match (*g, group) {
            (Some(x), Some(y)) => x == y,
            (None, None) => true,
            _ => false,
        }) {
            Some((_, rows)) => rows.push(r),
            None => groups.push((group, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(group, rows)| {
            let analytic = rows.iter().find_map(|r| r.threshold);
            let empirical = rows
                .iter()
                .filter(|r| r.detected && r.status == "ok")
                .filter_map(|r| r.axis_values.get(sup_axis).copied())
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
            let gap = match (analytic, empirical) {
                (Some(a), Some(e)) => Some(a - e),
                _ => None,
            };
            BoundaryGap { group, analytic_threshold: analytic, empirical_boundary: empirical, gap }
        })
        .collect()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_sweep_csv(path: &Path, sw: &SweepConfig, records: &[PointRecord]) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(
        w,
        "point,run,axis1_key,axis1_value,axis2_key,axis2_value,sup_slope,inf_slope,\
         threshold,above_threshold,detected,t_blowup,peak_slope,consistent,status"
    )?;
    let axis1_key = csv_field(&sw.axes[0].key);
    let axis2_key = sw.axes.get(1).map(|a| csv_field(&a.key)).unwrap_or_default();
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.point,
            r.run,
            axis1_key,
            r.axis_values[0],
            axis2_key,
            fmt_opt_f64(r.axis_values.get(1).copied()),
            fmt_opt_f64(r.sup_slope),
            fmt_opt_f64(r.inf_slope),
            fmt_opt_f64(r.threshold),
            fmt_opt_bool(r.above_threshold),
            r.detected,
            fmt_opt_f64(r.t_blowup),
            fmt_opt_f64(r.peak_slope),
            r.consistent,
            csv_field(&r.status),
        )?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}
