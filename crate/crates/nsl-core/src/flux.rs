//! Flux models F(u, ū) with partial derivatives through second order.
//!
//! The admissibility conditions on a flux (hypothesis H2) are
//! F(0,·) = F(m,·) = 0 together with the signs F_uu < 0, F_ūū > 0 and
//! F_ū < 0. The shipped Arrhenius model F = u(m−u)e^{−ū} satisfies the sign
//! conditions strictly only in the open strip u ∈ (0, m); its endpoint
//! equalities are classified "weak" rather than failures. The local LWR
//! model F = u(m−u) ignores ū entirely and fails strict H2 (F_ūū ≡ 0);
//! it exists as the kernel-free limit for oracle tests.

use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Slack accepted on u beyond [0, m] before a state counts as out of range.
pub const U_RANGE_TOL: f64 = 1e-8;

/// Magnitudes below this count as exact zeros in sign classification.
const SIGN_TOL: f64 = 1e-12;

pub type FluxFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Error)]
pub enum FluxError {
    #[error("flux ceiling m must be positive and finite, got {0}")]
    InvalidCeiling(f64),
    #[error("non-finite flux input: u = {u}, ubar = {ubar}")]
    NonFinite { u: f64, ubar: f64 },
    #[error("density {u} outside [0, {m}] beyond the 1e-8 overshoot tolerance")]
    OutOfRange { u: f64, m: f64 },
    #[error("{partial} disagrees with finite differences at (u, ubar) = ({u}, {ubar}): relative error {rel_err:.3e}")]
    InconsistentDerivative { partial: &'static str, u: f64, ubar: f64, rel_err: f64 },
}

/// A flux F(u, ū) with evaluators for F and its partials to second order.
///
/// Evaluators are shared immutable closures, so models are cheap to clone
/// and safe to use from several threads at once.
#[derive(Clone)]
pub struct FluxModel {
    name: String,
    m: f64,
    nonlocal: bool,
    h2_checked: bool,
    f: FluxFn,
    f_u: FluxFn,
    f_ubar: FluxFn,
    f_uu: FluxFn,
    f_uubar: FluxFn,
    f_ubarubar: FluxFn,
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("FluxModel")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("nonlocal", &self.nonlocal)
            .field("h2_checked", &self.h2_checked)
            .finish()
    }
}

impl FluxModel {
    /// Arrhenius look-ahead flux F = u(m−u)e^{−ū} (m = 1 in the registry).
    pub fn arrhenius(m: f64) -> Result<Self, FluxError> {
        check_ceiling(m)?;
        Ok(Self {
            name: "arrhenius".into(),
            m,
            nonlocal: true,
            h2_checked: true,
            f: Arc::new(move |u, ub| u * (m - u) * (-ub).exp()),
            f_u: Arc::new(move |u, ub| (m - 2.0 * u) * (-ub).exp()),
            f_ubar: Arc::new(move |u, ub| -u * (m - u) * (-ub).exp()),
            f_uu: Arc::new(move |_, ub| -2.0 * (-ub).exp()),
            f_uubar: Arc::new(move |u, ub| -(m - 2.0 * u) * (-ub).exp()),
            f_ubarubar: Arc::new(move |u, ub| u * (m - u) * (-ub).exp()),
        })
    }

    /// Local LWR flux F = u(m−u); no ū dependence.
    pub fn lwr(m: f64) -> Result<Self, FluxError> {
        check_ceiling(m)?;
        Ok(Self {
            name: "lwr".into(),
            m,
            nonlocal: false,
            h2_checked: false,
            f: Arc::new(move |u, _| u * (m - u)),
            f_u: Arc::new(move |u, _| m - 2.0 * u),
            f_ubar: Arc::new(|_, _| 0.0),
            f_uu: Arc::new(|_, _| -2.0),
            f_uubar: Arc::new(|_, _| 0.0),
            f_ubarubar: Arc::new(|_, _| 0.0),
        })
    }

    /// Custom model from user evaluators; `h2_checked` starts false.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: impl Into<String>,
        m: f64,
        nonlocal: bool,
        f: FluxFn,
        f_u: FluxFn,
        f_ubar: FluxFn,
        f_uu: FluxFn,
        f_uubar: FluxFn,
        f_ubarubar: FluxFn,
    ) -> Result<Self, FluxError> {
        check_ceiling(m)?;
        Ok(Self {
            name: name.into(),
            m,
            nonlocal,
            h2_checked: false,
            f,
            f_u,
            f_ubar,
            f_uu,
            f_uubar,
            f_ubarubar,
        })
    }

    /// Registry lookup for config-driven selection.
    pub fn by_name(name: &str, m: Option<f64>) -> Option<Result<Self, FluxError>> {
        let m = m.unwrap_or(1.0);
        match name {
            "arrhenius" => Some(Self::arrhenius(m)),
            "lwr" => Some(Self::lwr(m)),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Density ceiling: admissible states live in [0, m].
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Whether F actually reads ū (false lets callers skip convolution).
    pub fn is_nonlocal(&self) -> bool {
        self.nonlocal
    }

    pub fn h2_checked(&self) -> bool {
        self.h2_checked
    }

    pub fn set_h2_checked(&mut self, checked: bool) {
        self.h2_checked = checked;
    }

    pub fn f(&self, u: f64, ubar: f64) -> f64 {
        (self.f)(u, ubar)
    }

    pub fn f_u(&self, u: f64, ubar: f64) -> f64 {
        (self.f_u)(u, ubar)
    }

    pub fn f_ubar(&self, u: f64, ubar: f64) -> f64 {
        (self.f_ubar)(u, ubar)
    }

    pub fn f_uu(&self, u: f64, ubar: f64) -> f64 {
        (self.f_uu)(u, ubar)
    }

    pub fn f_uubar(&self, u: f64, ubar: f64) -> f64 {
        (self.f_uubar)(u, ubar)
    }

    pub fn f_ubarubar(&self, u: f64, ubar: f64) -> f64 {
        (self.f_ubarubar)(u, ubar)
    }
}

fn check_ceiling(m: f64) -> Result<(), FluxError> {
    if m <= 0.0 || !m.is_finite() {
        return Err(FluxError::InvalidCeiling(m));
    }
    Ok(())
}

/// Flux value and local characteristic speed F_u at one state.
pub fn flux_and_wavespeed(f: &FluxModel, u: f64, ubar: f64) -> Result<(f64, f64), FluxError> {
    if !u.is_finite() || !ubar.is_finite() {
        return Err(FluxError::NonFinite { u, ubar });
    }
    if !(-U_RANGE_TOL..=f.m() + U_RANGE_TOL).contains(&u) {
        return Err(FluxError::OutOfRange { u, m: f.m() });
    }
    Ok((f.f(u, ubar), f.f_u(u, ubar)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClauseStatus {
    Pass,
    /// Holds with equality somewhere on the boundary u ∈ {0, m} but never
    /// with the wrong sign; the strict inequality holds inside (0, m).
    Weak,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClauseReport {
    pub clause: &'static str,
    pub status: ClauseStatus,
    /// Sample achieving the worst sign margin, for diagnostics.
    pub worst_value: f64,
    pub worst_at: (f64, f64),
}

/// Per-clause H2 classification; `overall` is the weakest clause status.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub clauses: Vec<ClauseReport>,
}

impl ValidationReport {
    pub fn overall(&self) -> ClauseStatus {
        let mut status = ClauseStatus::Pass;
        for c in &self.clauses {
            match c.status {
                ClauseStatus::Fail => return ClauseStatus::Fail,
                ClauseStatus::Weak => status = ClauseStatus::Weak,
                ClauseStatus::Pass => {}
            }
        }
        status
    }

    pub fn clause(&self, name: &str) -> Option<&ClauseReport> {
        self.clauses.iter().find(|c| c.clause == name)
    }
}

/// Classifies the H2 clauses by sampling.
///
/// Sign clauses are evaluated at `u_samples` interior points plus the
/// endpoints {0, m}, against ū spanning `ubar_range`. Wrong sign or an
/// interior zero fails the clause; zeros confined to the endpoints make it
/// weak. The endpoint clause requires |F(0,·)| and |F(m,·)| ≤ 1e−12.
pub fn validate_h2(f: &FluxModel, u_samples: usize, ubar_range: (f64, f64)) -> ValidationReport {
    let m = f.m();
    let n_ub = 33;
    let ubars: Vec<f64> = (0..n_ub)
        .map(|j| ubar_range.0 + (ubar_range.1 - ubar_range.0) * j as f64 / (n_ub - 1) as f64)
        .collect();

    let mut clauses = Vec::new();

    // F(0, ·) = F(m, ·) = 0.
    {
        let mut worst = (0.0f64, (0.0, ubars[0]));
        for &ub in &ubars {
            for u in [0.0, m] {
                let v = f.f(u, ub);
                if v.abs() > worst.0.abs() {
                    worst = (v, (u, ub));
                }
            }
        }
        clauses.push(ClauseReport {
            clause: "endpoints_vanish",
            status: if worst.0.abs() <= SIGN_TOL { ClauseStatus::Pass } else { ClauseStatus::Fail },
            worst_value: worst.0,
            worst_at: worst.1,
        });
    }

    // Sign clauses: value must have `sign` strictly inside (0, m).
    let mut sign_clause = |clause: &'static str, eval: &dyn Fn(f64, f64) -> f64, sign: f64| {
        let mut status = ClauseStatus::Pass;
        let mut worst = (f64::INFINITY, (0.0, 0.0));
        for i in 0..u_samples + 2 {
            let u = m * i as f64 / (u_samples + 1) as f64;
            let interior = i != 0 && i != u_samples + 1;
            for &ub in &ubars {
                let v = eval(u, ub);
                let margin = v * sign;
                if margin < worst.0 {
                    worst = (margin, (u, ub));
                }
                if margin < -SIGN_TOL {
                    status = ClauseStatus::Fail;
                } else if margin <= SIGN_TOL && status != ClauseStatus::Fail {
                    status = if interior { ClauseStatus::Fail } else { ClauseStatus::Weak };
                }
            }
        }
        clauses.push(ClauseReport {
            clause,
            status,
            worst_value: worst.0,
            worst_at: worst.1,
        });
    };

    sign_clause("f_uu_negative", &|u, ub| f.f_uu(u, ub), -1.0);
    sign_clause("f_ubarubar_positive", &|u, ub| f.f_ubarubar(u, ub), 1.0);
    sign_clause("f_ubar_negative", &|u, ub| f.f_ubar(u, ub), -1.0);

    ValidationReport { clauses }
}

/// Checks every supplied partial against central finite differences of the
/// level below at `samples` seeded-random points in [0, m] × ±`ubar_bound`.
///
/// Relative error above 1e−6 (with a unit floor on the scale) fails.
pub fn check_derivative_consistency(
    f: &FluxModel,
    ubar_bound: f64,
    samples: usize,
    seed: u64,
) -> Result<(), FluxError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let m = f.m();
    let h = 6e-6 * m.max(1.0);
    let hb = 6e-6 * ubar_bound.max(1.0);
    for _ in 0..samples {
        // Keep u one step inside the range so the stencil stays admissible.
        let u = rng.gen_range(0.0..=1.0) * (m - 2.0 * h) + h;
        let ub = rng.gen_range(-1.0..=1.0) * ubar_bound;
        let checks: [(&'static str, f64, f64); 5] = [
            ("F_u", f.f_u(u, ub), (f.f(u + h, ub) - f.f(u - h, ub)) / (2.0 * h)),
            ("F_ubar", f.f_ubar(u, ub), (f.f(u, ub + hb) - f.f(u, ub - hb)) / (2.0 * hb)),
            ("F_uu", f.f_uu(u, ub), (f.f_u(u + h, ub) - f.f_u(u - h, ub)) / (2.0 * h)),
            ("F_uubar", f.f_uubar(u, ub), (f.f_u(u, ub + hb) - f.f_u(u, ub - hb)) / (2.0 * hb)),
            (
                "F_ubarubar",
                f.f_ubarubar(u, ub),
                (f.f_ubar(u, ub + hb) - f.f_ubar(u, ub - hb)) / (2.0 * hb),
            ),
        ];
        for (partial, analytic, numeric) in checks {
            let scale = analytic.abs().max(numeric.abs()).max(1.0);
            let rel_err = (analytic - numeric).abs() / scale;
            if rel_err > 1e-6 {
                return Err(FluxError::InconsistentDerivative { partial, u, ubar: ub, rel_err });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrhenius_point_values() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        // Vacuum state: F = 0, speed e^{-ubar}.
        let (fv, fu) = flux_and_wavespeed(&f, 0.0, 0.7).unwrap();
        assert_eq!(fv, 0.0);
        assert!((fu - (-0.7f64).exp()).abs() < 1e-15);
        // Symmetry point.
        let (fv, fu) = flux_and_wavespeed(&f, 0.5, 0.0).unwrap();
        assert!((fv - 0.25).abs() < 1e-15);
        assert!(fu.abs() < 1e-15);
        // Generic point, against direct evaluation.
        let (fv, fu) = flux_and_wavespeed(&f, 0.25, 0.5).unwrap();
        let e = (-0.5f64).exp();
        assert!((fv - 0.1875 * e).abs() < 1e-15);
        assert!((fu - 0.5 * e).abs() < 1e-15);
        assert!((fu - 0.303265).abs() < 1e-6);
    }

    #[test]
    fn flux_vanishes_at_density_extremes() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        for j in 0..40 {
            let ub = -2.0 + 4.0 * j as f64 / 39.0;
            assert!(f.f(0.0, ub).abs() < 1e-15);
            assert!(f.f(1.0, ub).abs() < 1e-15);
        }
    }

    #[test]
    fn wavespeed_bounded_by_exponential() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        let min_ub = -1.5f64;
        let bound = (-min_ub).exp();
        for i in 0..=50 {
            let u = i as f64 / 50.0;
            for j in 0..=50 {
                let ub = min_ub + 3.0 * j as f64 / 50.0;
                assert!(f.f_u(u, ub).abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn derivative_consistency_of_builtins() {
        let arr = FluxModel::arrhenius(1.0).unwrap();
        check_derivative_consistency(&arr, 1.0, 100, 7).unwrap();
        let lwr = FluxModel::lwr(1.0).unwrap();
        check_derivative_consistency(&lwr, 1.0, 100, 7).unwrap();
    }

    #[test]
    fn inconsistent_custom_model_is_caught() {
        let mut f = FluxModel::arrhenius(1.0).unwrap();
        f.f_uu = Arc::new(|_, _| -1.9); // wrong by 5%
        let err = check_derivative_consistency(&f, 1.0, 100, 7).unwrap_err();
        assert!(matches!(err, FluxError::InconsistentDerivative { partial: "F_uu", .. }));
    }

    #[test]
    fn h2_classification_of_arrhenius() {
        let f = FluxModel::arrhenius(1.0).unwrap();
        let report = validate_h2(&f, 99, (-1.0, 1.0));
        assert_eq!(report.clause("endpoints_vanish").unwrap().status, ClauseStatus::Pass);
        assert_eq!(report.clause("f_uu_negative").unwrap().status, ClauseStatus::Pass);
        assert_eq!(report.clause("f_ubarubar_positive").unwrap().status, ClauseStatus::Weak);
        assert_eq!(report.clause("f_ubar_negative").unwrap().status, ClauseStatus::Weak);
        assert_eq!(report.overall(), ClauseStatus::Weak);
    }

    #[test]
    fn h2_classification_of_lwr() {
        let f = FluxModel::lwr(1.0).unwrap();
        let report = validate_h2(&f, 99, (-1.0, 1.0));
        assert_eq!(report.clause("endpoints_vanish").unwrap().status, ClauseStatus::Pass);
        assert_eq!(report.clause("f_uu_negative").unwrap().status, ClauseStatus::Pass);
        // No ū dependence: both ū clauses are identically zero inside.
        assert_eq!(report.clause("f_ubarubar_positive").unwrap().status, ClauseStatus::Fail);
        assert_eq!(report.clause("f_ubar_negative").unwrap().status, ClauseStatus::Fail);
        assert_eq!(report.overall(), ClauseStatus::Fail);
    }

    #[test]
    fn registry_and_input_validation() {
        assert!(FluxModel::by_name("arrhenius", None).unwrap().is_ok());
        assert!(FluxModel::by_name("lwr", Some(2.0)).unwrap().is_ok());
        assert!(FluxModel::by_name("greenshields", None).is_none());
        let f = FluxModel::arrhenius(1.0).unwrap();
        assert!(matches!(
            flux_and_wavespeed(&f, f64::NAN, 0.0),
            Err(FluxError::NonFinite { .. })
        ));
        assert!(matches!(
            flux_and_wavespeed(&f, 1.5, 0.0),
            Err(FluxError::OutOfRange { .. })
        ));
        assert!(flux_and_wavespeed(&f, 1.0 + 5e-9, 0.0).is_ok());
        assert!(matches!(FluxModel::arrhenius(-1.0), Err(FluxError::InvalidCeiling(_))));
    }
}
