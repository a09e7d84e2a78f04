//! TOML run configuration and constructors for the core objects.
//!
//! A run config has sections `[grid]`, `[kernel]`, `[flux]`, `[sim]`,
//! `[detector]`, `[ic]`, `[output]`. Unknown keys are rejected with their
//! key path, except inside `[ic]` where the family named by `ic.name`
//! decides which parameters exist; leftovers there are reported as
//! `ic.<key>` during construction. Slope parameters of the initial-data
//! families are the exact coordinates the analytic thresholds are stated
//! in, so sweeps can move along `ic.sup_slope` / `ic.inf_slope` directly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use nsl_core::{
    Boundary, DetectorConfig, FluxModel, Grid1D, InitialData, KernelSpec, Solver,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub kernel: KernelSection,
    #[serde(default)]
    pub flux: FluxSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub detector: DetectorSection,
    pub ic: IcSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_cells: usize,
    pub length: f64,
    #[serde(default)]
    pub x_left: f64,
    pub boundary: BoundaryName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Periodic,
    Constant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub kind: KernelName,
    pub gamma: f64,
    #[serde(default = "default_k0")]
    pub k0: f64,
    /// Two-column text file (offset value), offsets in [-gamma, 0];
    /// `tabulated` kernels only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
}

fn default_k0() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Constant,
    Linear,
    Tabulated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    #[serde(default)]
    pub name: FluxName,
    #[serde(default = "default_m")]
    pub m: f64,
}

fn default_m() -> f64 {
    1.0
}

impl Default for FluxSection {
    fn default() -> Self {
        Self { name: FluxName::Arrhenius, m: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxName {
    #[default]
    Arrhenius,
    Lwr,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Defaults to 20·gamma when absent: characteristic speeds are O(1), and
    /// blow-up, when guaranteed, lands well inside that horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_order")]
    pub order: u8,
}

fn default_cfl() -> f64 {
    0.45
}

fn default_order() -> u8 {
    1
}

impl Default for SimSection {
    fn default() -> Self {
        Self { t_final: None, cfl: default_cfl(), order: default_order() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    /// Absent picks the solver default max(100·initial peak, 1e3), which is
    /// unreachable on coarse grids; production configs set an explicit
    /// ceiling between ~2× the initial peak slope and the grid-resolvable
    /// slope ~1/(3·dx).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_ceiling: Option<f64>,
    #[serde(default = "default_growth_window")]
    pub growth_window: usize,
    #[serde(default = "default_trace_stride")]
    pub trace_stride: usize,
}

fn default_growth_window() -> usize {
    20
}

fn default_trace_stride() -> usize {
    1
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            slope_ceiling: None,
            growth_window: default_growth_window(),
            trace_stride: default_trace_stride(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcSection {
    pub name: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Times at which `snapshots/*.csv` profiles are written.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("config does not parse")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn build_grid(&self) -> Result<Grid1D> {
        let boundary = match self.grid.boundary {
            BoundaryName::Periodic => Boundary::Periodic,
            BoundaryName::Constant => Boundary::ConstantExtension,
        };
        Grid1D::from_length(self.grid.n_cells, self.grid.x_left, self.grid.length, boundary)
            .map_err(|e| anyhow!("grid: {e}"))
    }

    pub fn build_kernel(&self) -> Result<KernelSpec> {
        let g = self.kernel.gamma;
        match self.kernel.kind {
            KernelName::Constant => {
                KernelSpec::constant(g, self.kernel.k0).map_err(|e| anyhow!("kernel: {e}"))
            }
            KernelName::Linear => KernelSpec::linear(g).map_err(|e| anyhow!("kernel: {e}")),
            KernelName::Tabulated => {
                let path = self
                    .kernel
                    .table_path
                    .as_deref()
                    .ok_or_else(|| anyhow!("kernel.table_path: required for kind = tabulated"))?;
                let samples = load_kernel_table(Path::new(path))?;
                KernelSpec::tabulated(g, &samples).map_err(|e| anyhow!("kernel: {e}"))
            }
        }
    }

    pub fn build_flux(&self) -> Result<FluxModel> {
        match self.flux.name {
            FluxName::Arrhenius => FluxModel::arrhenius(self.flux.m),
            FluxName::Lwr => FluxModel::lwr(self.flux.m),
        }
        .map_err(|e| anyhow!("flux: {e}"))
    }

    pub fn build_ic(&self) -> Result<InitialData> {
        let mut p = self.ic.params.clone();
        let ic = match self.ic.name.as_str() {
            "constant" => InitialData::Constant { value: take_f64(&mut p, "value")? },
            "sine" => InitialData::SinePerturbation {
                base: take_f64(&mut p, "base")?,
                amplitude: take_f64(&mut p, "amplitude")?,
                waves: take_int(&mut p, "waves")?.unwrap_or(1) as u32,
            },
            "tanh_front" => InitialData::TanhFront {
                lo: take_f64(&mut p, "lo")?,
                hi: take_f64(&mut p, "hi")?,
                center: take_f64(&mut p, "center")?,
                sup_slope: take_f64(&mut p, "sup_slope")?,
            },
            "two_front" => InitialData::TwoFront {
                lo: take_f64(&mut p, "lo")?,
                hi: take_f64(&mut p, "hi")?,
                up_center: take_f64(&mut p, "up_center")?,
                down_center: take_f64(&mut p, "down_center")?,
                sup_slope: take_f64(&mut p, "sup_slope")?,
                inf_slope: take_f64(&mut p, "inf_slope")?,
            },
            "red_light" => InitialData::RedLight {
                upstream: take_f64(&mut p, "upstream")?,
                center: take_f64(&mut p, "center")?,
                sup_slope: take_f64(&mut p, "sup_slope")?,
            },
            "ramp" => InitialData::FullRamp {
                center: take_f64(&mut p, "center")?,
                sup_slope: take_f64(&mut p, "sup_slope")?,
            },
            "random_fourier" => InitialData::RandomFourier {
                base: take_f64(&mut p, "base")?,
                amplitude: take_f64(&mut p, "amplitude")?,
                modes: take_int(&mut p, "modes")?.unwrap_or(8) as u32,
                seed: take_int(&mut p, "seed")?.unwrap_or(0) as u64,
            },
            other => bail!(
                "ic.name: unknown family '{other}' (expected constant, sine, tanh_front, \
                 two_front, red_light, ramp, random_fourier)"
            ),
        };
        if let Some(key) = p.keys().next() {
            bail!("ic.{key}: unknown parameter for family '{}'", self.ic.name);
        }
        ic.validate(self.flux.m).map_err(|e| anyhow!("{e}"))?;
        Ok(ic)
    }

    pub fn build_solver(&self) -> Result<Solver> {
        let flux = self.build_flux()?;
        let kernel = self.build_kernel()?;
        Solver::new(flux, kernel)
            .with_cfl(self.sim.cfl)
            .and_then(|s| s.with_order(self.sim.order))
            .map_err(|e| anyhow!("sim: {e}"))
    }

    pub fn detector(&self) -> DetectorConfig {
        DetectorConfig {
            slope_ceiling: self.detector.slope_ceiling,
            growth_window: self.detector.growth_window,
            trace_stride: self.detector.trace_stride,
        }
    }

    /// Configured horizon, or the 20·gamma default.
    pub fn t_final(&self) -> f64 {
        self.sim.t_final.unwrap_or(20.0 * self.kernel.gamma)
    }
}

/// Sets one numeric config entry by dotted path; the sweep axes go through
/// here. `ic.*` paths write into the family parameter map and are validated
/// when the initial data is built.
pub fn apply_axis(cfg: &mut RunConfig, key: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        bail!("axis value for '{key}' must be finite, got {value}");
    }
    match key {
        "kernel.gamma" => cfg.kernel.gamma = value,
        "kernel.k0" => cfg.kernel.k0 = value,
        "flux.m" => cfg.flux.m = value,
        "sim.t_final" => cfg.sim.t_final = Some(value),
        "sim.cfl" => cfg.sim.cfl = value,
        "grid.length" => cfg.grid.length = value,
        "grid.n_cells" => {
            if !(1.0..=1e9).contains(&value) {
                bail!("grid.n_cells axis value {value} out of range");
            }
            cfg.grid.n_cells = value.round() as usize;
        }
        "detector.slope_ceiling" => cfg.detector.slope_ceiling = Some(value),
        k if k.starts_with("ic.") => {
            cfg.ic.params.insert(k["ic.".len()..].to_string(), toml::Value::Float(value));
        }
        _ => bail!("sweep axis key '{key}' is not a sweepable config path"),
    }
    Ok(())
}

fn take_f64(p: &mut BTreeMap<String, toml::Value>, key: &'static str) -> Result<f64> {
    let v = p.remove(key).ok_or_else(|| anyhow!("ic.{key}: required by this family"))?;
    value_as_f64(&v).ok_or_else(|| anyhow!("ic.{key}: expected a number, got {v}"))
}

/// Optional integer parameter; floats with zero fraction are accepted so
/// sweep axes can target integer-valued keys.
fn take_int(p: &mut BTreeMap<String, toml::Value>, key: &'static str) -> Result<Option<i64>> {
    let Some(v) = p.remove(key) else {
        return Ok(None);
    };
    match v {
        toml::Value::Integer(i) if i >= 0 => Ok(Some(i)),
        toml::Value::Float(f) if f.fract() == 0.0 && (0.0..=i64::MAX as f64).contains(&f) => {
            Ok(Some(f as i64))
        }
        other => Err(anyhow!("ic.{key}: expected a non-negative integer, got {other}")),
    }
}

fn value_as_f64(v: &toml::Value) -> Option<f64> {
    match *v {
        toml::Value::Float(f) => Some(f),
        toml::Value::Integer(i) => Some(i as f64),
        _ => None,
    }
}

/// Reads a two-column kernel table: one `offset value` pair per line, blank
/// lines and `#` comments ignored.
fn load_kernel_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("kernel.table_path: cannot read {}", path.display()))?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(r), Some(v), None) = (it.next(), it.next(), it.next()) else {
            bail!("kernel table {}:{}: expected 'offset value'", path.display(), lineno + 1);
        };
        let r: f64 = r
            .parse()
            .with_context(|| format!("kernel table {}:{}", path.display(), lineno + 1))?;
        let v: f64 = v
            .parse()
            .with_context(|| format!("kernel table {}:{}", path.display(), lineno + 1))?;
        samples.push((r, v));
    }
    Ok(samples)
}
