//! Initial-data library.
//!
//! Every family is parameterized so that sup u₀′ and inf u₀′ are known
//! analytically; threshold sweeps move along exactly these two coordinates.
//! Smoothed fronts use σ(z) = (1 + tanh z)/2, whose steepness parameter s
//! gives a front of amplitude Δ a maximal slope Δ·s/2 (attained at the
//! center) and exponentially small tails.

use serde::Serialize;
use thiserror::Error;

use crate::grid::Grid1D;

/// sigma(z) = (1 + tanh z)/2, rising from 0 to 1.
fn sigma(z: f64) -> f64 {
    0.5 * (1.0 + z.tanh())
}

#[derive(Debug, Error, PartialEq)]
pub enum IcError {
    #[error("ic.{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("ic slope parameter {field} must be positive, got {value}")]
    NonPositiveSlope { field: &'static str, value: f64 },
    #[error("ic values must stay inside [0, {m}]: {detail}")]
    OutOfRange { m: f64, detail: String },
    #[error("two-front profile needs separation·steepness >= 20 to keep the slope extrema analytic; got {0:.3}")]
    FrontsTooClose(f64),
    #[error("random perturbation needs at least one mode")]
    NoModes,
}

/// Initial profiles u₀(x); `sup_slope`/`inf_slope` are the analytic
/// extrema of u₀′ where the family admits them.
#[derive(Debug, Clone, Serialize)]
pub enum InitialData {
    /// u ≡ value.
    Constant { value: f64 },
    /// base + amplitude·sin(2π·waves·(x−x_left)/length); periodic domains.
    SinePerturbation { base: f64, amplitude: f64, waves: u32 },
    /// Monotone front rising lo → hi with maximal slope `sup_slope`.
    TanhFront { lo: f64, hi: f64, center: f64, sup_slope: f64 },
    /// Rise lo → hi at `up_center`, fall back at `down_center`; sup and inf
    /// slopes independently tunable. Vanishing-derivative tails at both ends
    /// make it admissible on every boundary treatment.
    TwoFront {
        lo: f64,
        hi: f64,
        up_center: f64,
        down_center: f64,
        sup_slope: f64,
        inf_slope: f64,
    },
    /// Traffic stopped behind a jam: u = upstream ahead of the light,
    /// rising to the plug u = 1 at `center`.
    RedLight { upstream: f64, center: f64, sup_slope: f64 },
    /// Full ramp 0 → 1 (the scenario that forces blow-up for every γ under
    /// the constant kernel).
    FullRamp { center: f64, sup_slope: f64 },
    /// Seeded random Fourier perturbation of a constant; slope extrema are
    /// not analytic and are read off the discretized profile instead.
    RandomFourier { base: f64, amplitude: f64, modes: u32, seed: u64 },
}

impl InitialData {
    /// Validates parameters against the density range [0, m].
    pub fn validate(&self, m: f64) -> Result<(), IcError> {
        let finite = |field: &'static str, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(IcError::NotFinite { field, value })
            }
        };
        let in_range = |detail: &str, lo: f64, hi: f64| {
            if lo < -1e-12 || hi > m + 1e-12 {
                Err(IcError::OutOfRange { m, detail: detail.to_string() })
            } else {
                Ok(())
            }
        };
        match *self {
            InitialData::Constant { value } => {
                finite("value", value)?;
                in_range(&format!("constant value {value}"), value, value)
            }
            InitialData::SinePerturbation { base, amplitude, .. } => {
                finite("base", base)?;
                finite("amplitude", amplitude)?;
                in_range(
                    &format!("base {base} with amplitude {amplitude}"),
                    base - amplitude.abs(),
                    base + amplitude.abs(),
                )
            }
            InitialData::TanhFront { lo, hi, center, sup_slope } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                finite("center", center)?;
                if sup_slope.is_nan() || sup_slope <= 0.0 {
                    return Err(IcError::NonPositiveSlope { field: "sup_slope", value: sup_slope });
                }
                if hi <= lo {
                    return Err(IcError::OutOfRange { m, detail: format!("hi {hi} <= lo {lo}") });
                }
                in_range(&format!("front from {lo} to {hi}"), lo, hi)
            }
            InitialData::TwoFront { lo, hi, up_center, down_center, sup_slope, inf_slope } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                finite("up_center", up_center)?;
                finite("down_center", down_center)?;
                if sup_slope.is_nan() || sup_slope <= 0.0 {
                    return Err(IcError::NonPositiveSlope { field: "sup_slope", value: sup_slope });
                }
                if inf_slope.is_nan() || inf_slope >= 0.0 {
                    return Err(IcError::NonPositiveSlope { field: "inf_slope", value: -inf_slope });
                }
                if hi <= lo {
                    return Err(IcError::OutOfRange { m, detail: format!("hi {hi} <= lo {lo}") });
                }
                in_range(&format!("fronts between {lo} and {hi}"), lo, hi)?;
                // Tail cross-talk decays like e^{-2·s·sep}; demand enough
                // separation that the analytic extrema hold to ~1e-9.
                let amp = hi - lo;
                let s_up = 2.0 * sup_slope / amp;
                let s_down = -2.0 * inf_slope / amp;
                let sep = down_center - up_center;
                let margin = s_up.min(s_down) * sep;
                if margin < 20.0 {
                    return Err(IcError::FrontsTooClose(margin));
                }
                Ok(())
            }
            InitialData::RedLight { upstream, center, sup_slope } => {
                finite("upstream", upstream)?;
                finite("center", center)?;
                if sup_slope.is_nan() || sup_slope <= 0.0 {
                    return Err(IcError::NonPositiveSlope { field: "sup_slope", value: sup_slope });
                }
                if upstream >= 1.0 {
                    return Err(IcError::OutOfRange {
                        m,
                        detail: format!("upstream {upstream} must sit below the plug density 1"),
                    });
                }
                in_range(&format!("red light from {upstream} to 1"), upstream.min(0.0), 1.0)
            }
            InitialData::FullRamp { center, sup_slope } => {
                finite("center", center)?;
                if sup_slope.is_nan() || sup_slope <= 0.0 {
                    return Err(IcError::NonPositiveSlope { field: "sup_slope", value: sup_slope });
                }
                in_range("ramp from 0 to 1", 0.0, 1.0)
            }
            InitialData::RandomFourier { base, amplitude, modes, .. } => {
                finite("base", base)?;
                finite("amplitude", amplitude)?;
                if modes == 0 {
                    return Err(IcError::NoModes);
                }
                in_range(
                    &format!("base {base} with amplitude {amplitude}"),
                    base - amplitude.abs(),
                    base + amplitude.abs(),
                )
            }
        }
    }

    /// u₀ at a point. Sine and Fourier families need the domain geometry,
    /// so evaluation goes through the grid.
    pub fn evaluate(&self, x: f64, grid: &Grid1D) -> f64 {
        match *self {
            InitialData::Constant { value } => value,
            InitialData::SinePerturbation { base, amplitude, waves } => {
                let phase = 2.0 * std::f64::consts::PI * waves as f64 * (x - grid.x_left())
                    / grid.length();
                base + amplitude * phase.sin()
            }
            InitialData::TanhFront { lo, hi, center, sup_slope } => {
                let s = 2.0 * sup_slope / (hi - lo);
                lo + (hi - lo) * sigma(s * (x - center))
            }
            InitialData::TwoFront { lo, hi, up_center, down_center, sup_slope, inf_slope } => {
                let amp = hi - lo;
                let s_up = 2.0 * sup_slope / amp;
                let s_down = -2.0 * inf_slope / amp;
                lo + amp * (sigma(s_up * (x - up_center)) - sigma(s_down * (x - down_center)))
            }
            InitialData::RedLight { upstream, center, sup_slope } => {
                let s = 2.0 * sup_slope / (1.0 - upstream);
                upstream + (1.0 - upstream) * sigma(s * (x - center))
            }
            InitialData::FullRamp { center, sup_slope } => sigma(2.0 * sup_slope * (x - center)),
            InitialData::RandomFourier { base, amplitude, modes, seed } => {
                fourier_coefficients(modes, seed)
                    .iter()
                    .enumerate()
                    .map(|(j, &(a, phi))| {
                        let k = (j + 1) as f64;
                        let phase =
                            2.0 * std::f64::consts::PI * k * (x - grid.x_left()) / grid.length();
                        a * (phase + phi).sin()
                    })
                    .sum::<f64>()
                    .mul_add(amplitude, base)
            }
        }
    }

    /// Analytic (sup u₀′, inf u₀′), when the family admits closed forms.
    /// `None` for the random family; read the discrete slopes instead.
    pub fn slope_extrema(&self, grid: &Grid1D) -> Option<(f64, f64)> {
        match *self {
            InitialData::Constant { .. } => Some((0.0, 0.0)),
            InitialData::SinePerturbation { amplitude, waves, .. } => {
                let peak =
                    amplitude.abs() * 2.0 * std::f64::consts::PI * waves as f64 / grid.length();
                Some((peak, -peak))
            }
            InitialData::TanhFront { sup_slope, .. } => Some((sup_slope, 0.0)),
            InitialData::TwoFront { sup_slope, inf_slope, .. } => Some((sup_slope, inf_slope)),
            InitialData::RedLight { sup_slope, .. } => Some((sup_slope, 0.0)),
            InitialData::FullRamp { sup_slope, .. } => Some((sup_slope, 0.0)),
            InitialData::RandomFourier { .. } => None,
        }
    }

    /// Cell-center discretization.
    pub fn discretize(&self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n_cells()).map(|i| self.evaluate(grid.cell_center(i), grid)).collect()
    }
}

/// Normalized coefficients (a_j, phase_j) with Σ|a_j| = 1, so the series
/// stays inside ±1 before scaling by `amplitude`.
fn fourier_coefficients(modes: u32, seed: u64) -> Vec<(f64, f64)> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let mut coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|j| {
            let a = rng.gen_range(0.2..1.0) / (j + 1) as f64;
            let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            (a, phi)
        })
        .collect();
    let total: f64 = coeffs.iter().map(|c| c.0.abs()).sum();
    for c in &mut coeffs {
        c.0 /= total;
    }
    coeffs
}
