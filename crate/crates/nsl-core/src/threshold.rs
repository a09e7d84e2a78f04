//! Analytic shock-formation thresholds.
//!
//! For the Arrhenius flux the slope maximum M(t) = sup u_x obeys a Riccati
//! differential inequality whose unstable root M₂ is bounded over the
//! reachable (u, ū_x) box; blow-up is guaranteed once sup u₀′ clears that
//! bound. Closed forms exist for the two built-in potentials:
//!
//! * constant kernel: λ = (1/γ)(1/2 + (√2/4)·√(3 − Ñ₀)), Ñ₀ = min{−1, γ·inf u₀′}
//! * linear kernel:   λ = (1/γ)(1 + (1/2)·√(6 − Ñ₀)),    Ñ₀ = min{−2, γ·inf u₀′}
//!
//! For any admissible flux/kernel pair, [`general_lambda`] instead maximizes
//! the root M₂(u, v) numerically over [0, m] × [−V, V], feeding it the
//! uniform slope-infimum bound Ñ₀ = min{N(0), min N₁}. The Riccati roots of
//! the Arrhenius family do not depend on ū (the exponential prefactor
//! cancels between numerator and denominator), so partials are evaluated on
//! the ū = 0 slice of the box.

use serde::Serialize;
use thiserror::Error;

use crate::flux::{validate_h2, ClauseStatus, FluxModel};
use crate::kernel::KernelSpec;

/// Discriminants this far below zero are treated as roundoff and clamped;
/// anything lower signals an inadmissible flux.
const DISC_TOL: f64 = 1e-12;

/// |F_uu| below this makes the quadratic degenerate.
const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum ThresholdError {
    #[error("gamma must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("slope extrema must satisfy inf <= 0 <= sup, got inf = {inf}, sup = {sup}")]
    BadSlopes { inf: f64, sup: f64 },
    #[error("grid resolution must be at least 101, got {0}")]
    ResolutionTooLow(usize),
    #[error("v range bound must be positive and finite, got {0}")]
    BadVRange(f64),
    #[error("flux fails H2 validation: {0}")]
    H2Failed(String),
    #[error("F_uu vanishes at (u, v) = ({u}, {v}); Riccati roots are undefined")]
    Degenerate { u: f64, v: f64 },
    #[error("negative discriminant {disc:.3e} at (u, v) = ({u}, {v}); flux violates H2")]
    NegativeDiscriminant { u: f64, v: f64, disc: f64 },
}

fn check_gamma(gamma: f64) -> Result<(), ThresholdError> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(ThresholdError::BadGamma(gamma));
    }
    Ok(())
}

/// Blow-up threshold on sup u₀′ for the constant kernel.
pub fn threshold_constant(gamma: f64, inf_slope: f64) -> Result<f64, ThresholdError> {
    check_gamma(gamma)?;
    let ntilde0 = (gamma * inf_slope).min(-1.0);
    Ok((0.5 + 0.25 * 2.0f64.sqrt() * (3.0 - ntilde0).sqrt()) / gamma)
}

/// Blow-up threshold on sup u₀′ for the linear kernel.
pub fn threshold_linear(gamma: f64, inf_slope: f64) -> Result<f64, ThresholdError> {
    check_gamma(gamma)?;
    let ntilde0 = (gamma * inf_slope).min(-2.0);
    Ok((1.0 + 0.5 * (6.0 - ntilde0).sqrt()) / gamma)
}

/// Stable/unstable roots (N₁ ≤ N₂) of the slope-infimum quadratic
/// −F_uu·N² − 2F_uū·v·N − F_ūū·v², with v standing for ū_x.
pub fn general_n_roots(f: &FluxModel, u: f64, v: f64) -> Result<(f64, f64), ThresholdError> {
    let fuu = f.f_uu(u, 0.0);
    if fuu.abs() < DEGENERACY_TOL {
        return Err(ThresholdError::Degenerate { u, v });
    }
    let fuub = f.f_uubar(u, 0.0);
    let fubub = f.f_ubarubar(u, 0.0);
    let disc = (fuub * fuub - fuu * fubub) * v * v;
    if disc < -DISC_TOL {
        return Err(ThresholdError::NegativeDiscriminant { u, v, disc });
    }
    let s = disc.max(0.0).sqrt();
    Ok(((fuub * v - s) / -fuu, (fuub * v + s) / -fuu))
}

/// Unstable root M₂(u, v) of the slope-supremum quadratic, given the
/// uniform infimum bound Ñ₀ and the kernel jump K(0).
fn general_m2(
    f: &FluxModel,
    k_at_zero: f64,
    ntilde0: f64,
    u: f64,
    v: f64,
) -> Result<f64, ThresholdError> {
    let fuu = f.f_uu(u, 0.0);
    if fuu.abs() < DEGENERACY_TOL {
        return Err(ThresholdError::Degenerate { u, v });
    }
    let fuub = f.f_uubar(u, 0.0);
    let fubub = f.f_ubarubar(u, 0.0);
    let fub = f.f_ubar(u, 0.0);
    let p = 2.0 * fuub * v - fub * k_at_zero;
    let disc = p * p - 4.0 * (fuu * fubub * v * v + fuu * fub * k_at_zero * ntilde0);
    if disc < -DISC_TOL {
        return Err(ThresholdError::NegativeDiscriminant { u, v, disc });
    }
    Ok((p + disc.max(0.0).sqrt()) / (-2.0 * fuu))
}

/// Choice of the |ū_x| bound for the optimization box.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum VRange {
    /// m·‖K‖_W11, valid for every admissible kernel.
    KernelNorm,
    /// A sharper bound, e.g. 1/γ (constant kernel) or 2/γ (linear kernel),
    /// both implied by 0 ≤ u ≤ 1.
    Explicit(f64),
}

/// Outcome of the general box optimization.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaReport {
    /// max M₂ over the box: the blow-up threshold on sup u₀′.
    pub lambda: f64,
    /// Ñ₀ = min{n0, min N₁} actually fed into M₂.
    pub ntilde0: f64,
    /// min N₁ over the box.
    pub n1_min: f64,
    /// Location of the M₂ maximum.
    pub maximizer: (f64, f64),
    /// |ū_x| bound defining the box.
    pub v_max: f64,
    pub grid_resolution: usize,
}

/// Two-stage grid extremum: full lattice, then 10× refinement around the
/// best coarse point. Ties break lexicographically on (u, v), so results
/// do not depend on evaluation partitioning.
fn grid_search<E>(
    mut eval: E,
    u_max: f64,
    v_max: f64,
    resolution: usize,
    maximize: bool,
) -> Result<(f64, (f64, f64)), ThresholdError>
where
    E: FnMut(f64, f64) -> Result<f64, ThresholdError>,
{
    let sign = if maximize { 1.0 } else { -1.0 };
    let nu = resolution;
    let nv = resolution;
    let du = u_max / (nu - 1) as f64;
    let dv = 2.0 * v_max / (nv - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0.0, 0.0);
    for i in 0..nu {
        let u = (i as f64 * du).min(u_max);
        for j in 0..nv {
            let v = (-v_max + j as f64 * dv).min(v_max);
            let val = eval(u, v)?;
            if sign * val > best {
                best = sign * val;
                arg = (u, v);
            }
        }
    }
    // Local refinement: same span as ±2 coarse cells, spacing /10.
    let (u0, v0) = arg;
    for si in -20..=20 {
        let u = (u0 + si as f64 * du / 10.0).clamp(0.0, u_max);
        for sj in -20..=20 {
            let v = (v0 + sj as f64 * dv / 10.0).clamp(-v_max, v_max);
            let val = eval(u, v)?;
            if sign * val > best {
                best = sign * val;
                arg = (u, v);
            }
        }
    }
    Ok((sign * best, arg))
}

/// Maximizes the Riccati root M₂ over the reachable (u, ū_x) box.
///
/// `n0` is the initial slope infimum N(0) (unscaled). The flux must pass H2
/// validation at least weakly; models not yet marked checked are validated
/// here against ū spanning ±m·‖K‖_W11.
pub fn general_lambda(
    f: &FluxModel,
    k: &KernelSpec,
    n0: f64,
    resolution: usize,
    v_range: VRange,
) -> Result<LambdaReport, ThresholdError> {
    if resolution < 101 {
        return Err(ThresholdError::ResolutionTooLow(resolution));
    }
    let m = f.m();
    if !f.h2_checked() {
        let span = m * k.w11_norm();
        let report = validate_h2(f, 101, (-span, span));
        if report.overall() == ClauseStatus::Fail {
            let failed: Vec<&str> = report
                .clauses
                .iter()
                .filter(|c| c.status == ClauseStatus::Fail)
                .map(|c| c.clause)
                .collect();
            return Err(ThresholdError::H2Failed(failed.join(", ")));
        }
    }
    let v_max = match v_range {
        VRange::KernelNorm => m * k.w11_norm(),
        VRange::Explicit(v) => v,
    };
    if v_max <= 0.0 || !v_max.is_finite() {
        return Err(ThresholdError::BadVRange(v_max));
    }

    let (n1_min, _) = grid_search(
        |u, v| general_n_roots(f, u, v).map(|(n1, _)| n1),
        m,
        v_max,
        resolution,
        false,
    )?;
    let ntilde0 = n0.min(n1_min);
    let k0 = k.k_at_zero();
    let (lambda, maximizer) = grid_search(
        |u, v| general_m2(f, k0, ntilde0, u, v),
        m,
        v_max,
        resolution,
        true,
    )?;
    Ok(LambdaReport { lambda, ntilde0, n1_min, maximizer, v_max, grid_resolution: resolution })
}

/// The two potentials with published closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PotentialModel {
    ConstantPotential,
    LinearPotential,
}

/// Brute-force maxima of the two quantities bounding M₂ from above, on the
/// scaled box Ω = [0,1] × [−1,1] (constant) or [0,1] × [−2,2] (linear).
#[derive(Debug, Clone, Serialize)]
pub struct OmegaBoxMaxima {
    /// max of the linear-in-v part of the M₂ numerator.
    pub max_linear: f64,
    /// max of the quadratic term under the M₂ square root, at the
    /// potential's own Ñ₀ (−1 constant, −2 linear).
    pub max_quadratic: f64,
    pub arg_linear: (f64, f64),
    pub arg_quadratic: (f64, f64),
}

/// Evaluates both maxima on a 2001² lattice.
pub fn omega_box_maxima(model: PotentialModel) -> OmegaBoxMaxima {
    type Objective = fn(f64, f64) -> f64;
    let res = 2001;
    let (v_max, linear, quadratic): (f64, Objective, Objective) = match model {
        PotentialModel::ConstantPotential => (
            1.0,
            |u, v| -2.0 * (1.0 - 2.0 * u) * v + u * (1.0 - u),
            |u, v| 8.0 * u * (1.0 - u) * (v * v + 1.0),
        ),
        PotentialModel::LinearPotential => (
            2.0,
            |u, v| -2.0 * (1.0 - 2.0 * u) * v + 2.0 * u * (1.0 - u),
            |u, v| 8.0 * u * (1.0 - u) * (v * v + 4.0),
        ),
    };
    let (max_linear, arg_linear) =
        grid_search(|u, v| Ok(linear(u, v)), 1.0, v_max, res, true).expect("infallible objective");
    let (max_quadratic, arg_quadratic) = grid_search(|u, v| Ok(quadratic(u, v)), 1.0, v_max, res, true)
        .expect("infallible objective");
    OmegaBoxMaxima { max_linear, max_quadratic, arg_linear, arg_quadratic }
}

/// Grid minimum of N₁ over the potential's own scaled box, in ω = ū_x
/// units: ω ∈ [−1/γ, 1/γ] (constant) or [−2/γ, 2/γ] (linear).
pub fn builtin_n1_grid_min(
    model: PotentialModel,
    gamma: f64,
    resolution: usize,
) -> Result<f64, ThresholdError> {
    check_gamma(gamma)?;
    if resolution < 101 {
        return Err(ThresholdError::ResolutionTooLow(resolution));
    }
    let omega_max = match model {
        PotentialModel::ConstantPotential => 1.0 / gamma,
        PotentialModel::LinearPotential => 2.0 / gamma,
    };
    // N₁ for the Arrhenius flux: (−(1−2u)ω − |ω|√(1 − 2u(1−u)))/2.
    let (min, _) = grid_search(
        |u, w| {
            let p = (1.0 - 2.0 * u) * w;
            let disc = p * p + 2.0 * u * (1.0 - u) * w * w;
            Ok((-p - disc.sqrt()) / 2.0)
        },
        1.0,
        omega_max,
        resolution,
        false,
    )?;
    Ok(min)
}

/// What is being classified: a kernel family with closed-form threshold,
/// or an arbitrary flux/kernel pair routed through [`general_lambda`].
#[derive(Debug, Clone)]
pub enum ThresholdModel {
    ConstantPotential,
    LinearPotential,
    General { flux: Box<FluxModel>, kernel: Box<KernelSpec>, v_range: VRange },
}

/// Threshold classification inputs: look-ahead distance and the slope
/// extrema of the initial datum.
#[derive(Debug, Clone)]
pub struct ThresholdQuery {
    pub gamma: f64,
    pub inf_slope: f64,
    pub sup_slope: f64,
    pub model: ThresholdModel,
}

/// Classification outcome. `ntilde0` is in the scaled units of the closed
/// forms for the built-in potentials and unscaled for the general model;
/// `maximizer`/`grid_resolution` are present for the general model only.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub threshold: f64,
    pub above: bool,
    pub ntilde0: f64,
    pub maximizer: Option<(f64, f64)>,
    pub grid_resolution: Option<usize>,
}

/// Evaluates the threshold for a query and classifies sup u₀′ against it.
pub fn classify(q: &ThresholdQuery, resolution: usize) -> Result<ThresholdReport, ThresholdError> {
    check_gamma(q.gamma)?;
    if q.inf_slope.is_nan() || q.sup_slope.is_nan() || q.inf_slope > 0.0 || q.sup_slope < 0.0 {
        return Err(ThresholdError::BadSlopes { inf: q.inf_slope, sup: q.sup_slope });
    }
    let report = match &q.model {
        ThresholdModel::ConstantPotential => {
            let threshold = threshold_constant(q.gamma, q.inf_slope)?;
            ThresholdReport {
                threshold,
                above: q.sup_slope > threshold,
                ntilde0: (q.gamma * q.inf_slope).min(-1.0),
                maximizer: None,
                grid_resolution: None,
            }
        }
        ThresholdModel::LinearPotential => {
            let threshold = threshold_linear(q.gamma, q.inf_slope)?;
            ThresholdReport {
                threshold,
                above: q.sup_slope > threshold,
                ntilde0: (q.gamma * q.inf_slope).min(-2.0),
                maximizer: None,
                grid_resolution: None,
            }
        }
        ThresholdModel::General { flux, kernel, v_range } => {
            let lam = general_lambda(flux, kernel, q.inf_slope, resolution, *v_range)?;
            ThresholdReport {
                threshold: lam.lambda,
                above: q.sup_slope > lam.lambda,
                ntilde0: lam.ntilde0,
                maximizer: Some(lam.maximizer),
                grid_resolution: Some(lam.grid_resolution),
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn closed_form_values() {
        let t = threshold_constant(1.0, 0.0).unwrap();
        assert!((t - (0.5 + 0.5 * SQRT_2)).abs() < 1e-14);
        assert!((t - 1.207107).abs() < 1e-6);

        let t = threshold_linear(1.0, 0.0).unwrap();
        assert!((t - (1.0 + SQRT_2)).abs() < 1e-14);
        assert!((t - 2.414214).abs() < 1e-6);

        // Active inf-slope branch: Ñ₀ = −10.
        let t = threshold_constant(2.0, -5.0).unwrap();
        assert!((t - 0.5 * (0.5 + 0.25 * SQRT_2 * 13.0f64.sqrt())).abs() < 1e-14);
        assert!((t - 0.887377).abs() < 1e-6);

        let t = threshold_linear(2.0, 0.0).unwrap();
        assert!((t - 0.5 * (1.0 + SQRT_2)).abs() < 1e-14);
        assert!((t - 1.207107).abs() < 1e-6);

        // 1/γ scaling all the way down.
        let t = threshold_constant(1e6, 0.0).unwrap();
        assert!((t - (0.5 + 0.5 * SQRT_2) * 1e-6).abs() < 1e-18);

        assert!(matches!(threshold_constant(0.0, 0.0), Err(ThresholdError::BadGamma(_))));
        assert!(matches!(threshold_linear(-1.0, 0.0), Err(ThresholdError::BadGamma(_))));
    }

    #[test]
    fn thresholds_monotone_in_their_arguments() {
        // Non-increasing in inf_slope.
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let inf = -10.0 + 10.0 * i as f64 / 40.0;
            let t = threshold_constant(1.5, inf).unwrap();
            assert!(t <= prev + 1e-14);
            prev = t;
        }
        // Strictly decreasing in gamma within a fixed Ñ₀ regime (inf = 0).
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let gamma = 0.5 + 4.5 * i as f64 / 40.0;
            let t = threshold_linear(gamma, 0.0).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn linear_threshold_dominates_constant() {
        for i in 0..50 {
            let gamma = 0.1 * 1.15f64.powi(i);
            for j in 0..50 {
                let inf = -5.0 * j as f64 / 49.0;
                let tc = threshold_constant(gamma, inf).unwrap();
                let tl = threshold_linear(gamma, inf).unwrap();
                assert!(tl > tc, "gamma {gamma} inf {inf}: {tl} <= {tc}");
            }
        }
    }

    #[test]
    fn omega_maxima_match_published_values() {
        let c = omega_box_maxima(PotentialModel::ConstantPotential);
        assert!((c.max_linear - 2.0).abs() < 1e-12, "constant linear {}", c.max_linear);
        assert!((c.max_quadratic - 4.0).abs() < 1e-12, "constant quadratic {}", c.max_quadratic);
        // The quadratic bound 8u(1−u)(v²−Ñ₀) ≤ 2(1−Ñ₀) is tight.
        assert!(c.max_quadratic <= 2.0 * (1.0 - (-1.0)) + 1e-12);

        let l = omega_box_maxima(PotentialModel::LinearPotential);
        assert!((l.max_linear - 4.0).abs() < 1e-12, "linear linear {}", l.max_linear);
        assert!((l.max_quadratic - 16.0).abs() < 1e-12, "linear quadratic {}", l.max_quadratic);
    }

    #[test]
    fn builtin_n1_lower_bounds() {
        for gamma in [0.5, 1.0, 2.0] {
            let mn = builtin_n1_grid_min(PotentialModel::ConstantPotential, gamma, 301).unwrap();
            assert!(mn >= -1.0 / gamma - 1e-9, "constant gamma {gamma}: {mn}");
            assert!(mn <= -1.0 / gamma + 1e-6, "bound should be attained, got {mn}");
            let mn = builtin_n1_grid_min(PotentialModel::LinearPotential, gamma, 301).unwrap();
            assert!(mn >= -2.0 / gamma - 1e-9, "linear gamma {gamma}: {mn}");
            assert!(mn <= -2.0 / gamma + 1e-6);
        }
    }

    #[test]
    fn n_roots_straddle_zero() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            for j in 0..=100 {
                let v = -1.0 + 2.0 * j as f64 / 100.0;
                let (n1, n2) = general_n_roots(&f, u, v).unwrap();
                assert!(n1 <= 1e-12 && -1e-12 <= n2, "({u}, {v}): {n1}, {n2}");
            }
        }
    }

    #[test]
    fn general_lambda_specializes_to_constant_closed_form() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        let k = KernelSpec::constant(1.0, 1.0).unwrap();
        let rep = general_lambda(&f, &k, -1.0, 501, VRange::Explicit(1.0)).unwrap();
        let closed = threshold_constant(1.0, -1.0).unwrap();
        assert!(rep.lambda <= closed + 1e-9, "{} vs {}", rep.lambda, closed);
        assert!(rep.lambda >= 0.8 * closed, "{} vs {}", rep.lambda, closed);
        // The true box maximum sits at the corners where M₂ = 1 exactly.
        assert!((rep.lambda - 1.0).abs() < 1e-12, "lambda {}", rep.lambda);
        assert!((rep.ntilde0 + 1.0).abs() < 1e-12);
        assert!((rep.n1_min + 1.0).abs() < 1e-9);
        // With γ = 1 the W11 box coincides with the sharper box.
        let rep_w = general_lambda(&f, &k, -1.0, 501, VRange::KernelNorm).unwrap();
        assert!((rep_w.lambda - rep.lambda).abs() < 1e-12);
        assert!((rep_w.v_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn general_lambda_never_exceeds_closed_forms() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        for gamma in [0.5, 1.0, 2.0] {
            for inf in [0.0, -0.7, -3.0] {
                let k = KernelSpec::constant(gamma, 1.0).unwrap();
                let rep =
                    general_lambda(&f, &k, inf, 201, VRange::Explicit(1.0 / gamma)).unwrap();
                let closed = threshold_constant(gamma, inf).unwrap();
                assert!(rep.lambda <= closed + 1e-9, "constant {gamma}/{inf}");

                let k = KernelSpec::linear(gamma).unwrap();
                let rep =
                    general_lambda(&f, &k, inf, 201, VRange::Explicit(2.0 / gamma)).unwrap();
                let closed = threshold_linear(gamma, inf).unwrap();
                assert!(rep.lambda <= closed + 1e-9, "linear {gamma}/{inf}");
            }
        }
    }

    #[test]
    fn lambda_monotone_in_initial_infimum() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        let k = KernelSpec::constant(1.0, 1.0).unwrap();
        let l1 = general_lambda(&f, &k, -1.0, 201, VRange::KernelNorm).unwrap().lambda;
        let l4 = general_lambda(&f, &k, -4.0, 201, VRange::KernelNorm).unwrap().lambda;
        assert!(l4 >= l1, "{l4} < {l1}");
    }

    #[test]
    fn general_lambda_rejects_h2_failures_and_bad_inputs() {
        let lwr = FluxModel::lwr(1.0).unwrap();
        let k = KernelSpec::constant(1.0, 1.0).unwrap();
        assert!(matches!(
            general_lambda(&lwr, &k, -1.0, 201, VRange::KernelNorm),
            Err(ThresholdError::H2Failed(_))
        ));
        let f = FluxModel::arrhenius(1.0).unwrap();
        assert!(matches!(
            general_lambda(&f, &k, -1.0, 51, VRange::KernelNorm),
            Err(ThresholdError::ResolutionTooLow(51))
        ));

        // A degenerate flux (F_uu ≡ 0) is caught pointwise. Disable the
        // registry's H2 stamp so the box search itself reports it.
        use std::sync::Arc;
        let degenerate = FluxModel::custom(
            "degenerate",
            1.0,
            true,
            Arc::new(|u, _| u),
            Arc::new(|_, _| 1.0),
            Arc::new(|_, _| -1.0),
            Arc::new(|_, _| 0.0),
            Arc::new(|_, _| -1.0),
            Arc::new(|_, _| 1.0),
        )
        .unwrap();
        let mut stamped = degenerate;
        stamped.set_h2_checked(true);
        assert!(matches!(
            general_lambda(&stamped, &k, -1.0, 201, VRange::KernelNorm),
            Err(ThresholdError::Degenerate { .. })
        ));
    }

    #[test]
    fn classify_sets_the_above_flag_exactly() {
        let q = ThresholdQuery {
            gamma: 1.0,
            inf_slope: 0.0,
            sup_slope: 1.2072,
            model: ThresholdModel::ConstantPotential,
        };
        let rep = classify(&q, 501).unwrap();
        assert!(rep.above);
        assert!(rep.maximizer.is_none());
        let q = ThresholdQuery { sup_slope: 1.2071, ..q };
        assert!(!classify(&q, 501).unwrap().above);
        let q = ThresholdQuery { sup_slope: -0.1, ..q };
        assert!(matches!(classify(&q, 501), Err(ThresholdError::BadSlopes { .. })));
    }
}
