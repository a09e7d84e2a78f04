//! Look-ahead kernels and the nonlocal averages they induce.
//!
//! A kernel K is supported on [−γ, 0], so the convolution
//! ū(x) = (K∗u)(x) = ∫ K(x−y)u(y)dy averages u over the downstream window
//! [x, x+γ]. Admissible kernels (hypothesis H1) are nonnegative and
//! nondecreasing on the support. Built-ins:
//!
//! * `Constant`: K ≡ k0/γ, the plain windowed average scaled by k0.
//! * `Linear`:   K(r) = (2/γ)(1 + r/γ), unit mass, weighting nearby traffic.
//! * `Tabulated`: piecewise-linear interpolation of user samples.
//!
//! Besides ū itself this module computes ū_x and ū_xx. For the built-ins
//! these follow exact identities; for tabulated kernels they come from
//! quadrature against K′ plus the jump terms K(−γ⁺)u(x+γ) − K(0⁻)u(x)
//! produced by differentiating the moving window.

use crate::grid::{Boundary, Grid1D};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    Constant,
    Linear,
    Tabulated,
}

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("kernel.gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("kernel.k0 must be positive and finite, got {0}")]
    InvalidStrength(f64),
    #[error("linear kernel is unit-normalized, kernel.k0 must be 1, got {0}")]
    LinearStrength(f64),
    #[error("tabulated kernel needs at least 2 samples, got {0}")]
    TableTooShort(usize),
    #[error("tabulated kernel sample {index} is not finite")]
    TableNotFinite { index: usize },
    #[error("tabulated kernel offsets must increase strictly (sample {index})")]
    TableOffsetsNotIncreasing { index: usize },
    #[error("tabulated kernel must span [-gamma, 0], got [{first}, {last}] with gamma = {gamma}")]
    TableSpan { first: f64, last: f64, gamma: f64 },
    #[error("H1 violation: kernel value at sample {index} is negative ({value})")]
    NegativeValue { index: usize, value: f64 },
    #[error("H1 violation: kernel decreases by {drop} after sample {index}")]
    Decreasing { index: usize, drop: f64 },
    #[error("look-ahead distance {gamma} must be under half the periodic domain length {domain}")]
    WindowTooWide { gamma: f64, domain: f64 },
    #[error("data has {got} entries but the grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
}

/// Piecewise-linear table on [−γ, 0], offsets strictly increasing.
#[derive(Debug, Clone)]
struct KernelTable {
    offsets: Vec<f64>,
    values: Vec<f64>,
}

impl KernelTable {
    fn value_at(&self, r: f64) -> f64 {
        let r = r.clamp(self.offsets[0], *self.offsets.last().unwrap());
        let seg = self.segment_of(r);
        let (r0, r1) = (self.offsets[seg], self.offsets[seg + 1]);
        let w = (r - r0) / (r1 - r0);
        (1.0 - w) * self.values[seg] + w * self.values[seg + 1]
    }

    fn slope_at(&self, r: f64) -> f64 {
        let r = r.clamp(self.offsets[0], *self.offsets.last().unwrap());
        let seg = self.segment_of(r);
        (self.values[seg + 1] - self.values[seg]) / (self.offsets[seg + 1] - self.offsets[seg])
    }

    /// Index of the segment containing r; the last segment absorbs r = 0.
    fn segment_of(&self, r: f64) -> usize {
        let hi = self.offsets.partition_point(|&o| o <= r);
        hi.clamp(1, self.offsets.len() - 1) - 1
    }
}

/// A validated look-ahead kernel with its norms precomputed.
///
/// `l1_norm` is ∫K, `w11_seminorm` is ∫|K′| over the open support (zero for
/// the constant kernel, whose variation lives entirely in its endpoint
/// jumps), and `k_at_zero` is the left limit K(0⁻) used as the jump
/// coefficient in the ū_xx bound.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    kind: KernelKind,
    gamma: f64,
    k0: f64,
    table: Option<KernelTable>,
    l1_norm: f64,
    w11_seminorm: f64,
    k_at_zero: f64,
    k_at_left: f64,
}

impl KernelSpec {
    /// K ≡ k0/γ on [−γ, 0].
    pub fn constant(gamma: f64, k0: f64) -> Result<Self, KernelError> {
        check_gamma(gamma)?;
        if k0 <= 0.0 || !k0.is_finite() {
            return Err(KernelError::InvalidStrength(k0));
        }
        Ok(Self {
            kind: KernelKind::Constant,
            gamma,
            k0,
            table: None,
            l1_norm: k0,
            w11_seminorm: 0.0,
            k_at_zero: k0 / gamma,
            k_at_left: k0 / gamma,
        })
    }

    /// K(r) = (2/γ)(1 + r/γ) on [−γ, 0]; unit mass for every γ.
    pub fn linear(gamma: f64) -> Result<Self, KernelError> {
        check_gamma(gamma)?;
        Ok(Self {
            kind: KernelKind::Linear,
            gamma,
            k0: 1.0,
            table: None,
            l1_norm: 1.0,
            w11_seminorm: 2.0 / gamma,
            k_at_zero: 2.0 / gamma,
            k_at_left: 0.0,
        })
    }

    /// Piecewise-linear kernel from (offset, value) samples spanning [−γ, 0].
    ///
    /// Enforces H1: values nonnegative and nondecreasing (up to −1e−12 per
    /// adjacent pair). Norms come from exact integrals of the interpolant.
    pub fn tabulated(gamma: f64, samples: &[(f64, f64)]) -> Result<Self, KernelError> {
        check_gamma(gamma)?;
        if samples.len() < 2 {
            return Err(KernelError::TableTooShort(samples.len()));
        }
        for (i, &(r, v)) in samples.iter().enumerate() {
            if !r.is_finite() || !v.is_finite() {
                return Err(KernelError::TableNotFinite { index: i });
            }
            if v < 0.0 {
                return Err(KernelError::NegativeValue { index: i, value: v });
            }
        }
        for i in 0..samples.len() - 1 {
            if samples[i + 1].0 <= samples[i].0 {
                return Err(KernelError::TableOffsetsNotIncreasing { index: i + 1 });
            }
            let drop = samples[i].1 - samples[i + 1].1;
            if drop > 1e-12 {
                return Err(KernelError::Decreasing { index: i, drop });
            }
        }
        let first = samples[0].0;
        let last = samples[samples.len() - 1].0;
        let span_tol = 1e-9 * gamma;
        if (first + gamma).abs() > span_tol || last.abs() > span_tol {
            return Err(KernelError::TableSpan { first, last, gamma });
        }
        let offsets: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
        // Trapezoid rule is exact for the piecewise-linear interpolant.
        let mut l1 = 0.0;
        let mut w11 = 0.0;
        for i in 0..offsets.len() - 1 {
            l1 += 0.5 * (values[i] + values[i + 1]) * (offsets[i + 1] - offsets[i]);
            w11 += (values[i + 1] - values[i]).abs();
        }
        let k_at_zero = *values.last().unwrap();
        let k_at_left = values[0];
        Ok(Self {
            kind: KernelKind::Tabulated,
            gamma,
            k0: 1.0,
            table: Some(KernelTable { offsets, values }),
            l1_norm: l1,
            w11_seminorm: w11,
            k_at_zero,
            k_at_left,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn w11_seminorm(&self) -> f64 {
        self.w11_seminorm
    }

    /// ‖K‖_W11 = ∫K + ∫|K′|, the norm bounding |ū| and |ū_x| by m·‖K‖_W11.
    pub fn w11_norm(&self) -> f64 {
        self.l1_norm + self.w11_seminorm
    }

    /// Left limit K(0⁻), the jump coefficient at the origin.
    pub fn k_at_zero(&self) -> f64 {
        self.k_at_zero
    }

    /// Right limit K(−γ⁺), the jump coefficient at the trailing edge.
    pub fn k_at_left(&self) -> f64 {
        self.k_at_left
    }

    /// K(r), zero outside [−γ, 0]; endpoint values are the one-sided limits.
    pub fn evaluate(&self, r: f64) -> f64 {
        if !(-self.gamma..=0.0).contains(&r) {
            return 0.0;
        }
        match self.kind {
            KernelKind::Constant => self.k0 / self.gamma,
            KernelKind::Linear => (2.0 / self.gamma) * (1.0 + r / self.gamma),
            KernelKind::Tabulated => self.table.as_ref().unwrap().value_at(r),
        }
    }

    /// K′(r) inside the open support (piecewise-constant for tables).
    fn slope(&self, r: f64) -> f64 {
        match self.kind {
            KernelKind::Constant => 0.0,
            KernelKind::Linear => 2.0 / (self.gamma * self.gamma),
            KernelKind::Tabulated => self.table.as_ref().unwrap().slope_at(r),
        }
    }

    fn check_window(&self, g: &Grid1D) -> Result<(), KernelError> {
        if g.boundary() == Boundary::Periodic && g.length() <= 2.0 * self.gamma {
            return Err(KernelError::WindowTooWide {
                gamma: self.gamma,
                domain: g.length(),
            });
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<(), KernelError> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(KernelError::InvalidGamma(gamma));
    }
    Ok(())
}

/// ∫K over the support; closed form for built-ins, exact trapezoid for tables.
pub fn kernel_mass(k: &KernelSpec) -> f64 {
    k.l1_norm
}

/// Quadrature of ∫ f(x_i − y)·u(y) dy over the window [x_i, x_i + γ]:
/// composite midpoint over whole cells with fractional end-cell weights.
/// `f` receives the kernel offset r = x_i − y ∈ [−γ, 0].
fn window_quadrature(
    g: &Grid1D,
    u: &[f64],
    i: usize,
    gamma_over_dx: f64,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    // Window in cell coordinates: s ∈ [a, b] where y = x_left + s·dx.
    let a = i as f64 + 0.5;
    let b = a + gamma_over_dx;
    let dx = g.dx();
    let mut acc = 0.0;
    let mut j = a.floor() as isize;
    loop {
        let lo = (j as f64).max(a);
        let hi = ((j + 1) as f64).min(b);
        if hi > lo {
            let r = (i as f64 + 0.5 - 0.5 * (lo + hi)) * dx;
            acc += f(r) * g.value_at(u, j) * (hi - lo) * dx;
        }
        j += 1;
        if (j as f64) >= b {
            break;
        }
    }
    acc
}

/// ū = K∗u at every cell center.
///
/// For the constant kernel this is exactly the windowed average
/// (k0/γ)·∫_x^{x+γ} u dy; in general the quadrature is second-order in dx.
pub fn convolve(k: &KernelSpec, g: &Grid1D, u: &[f64]) -> Result<Vec<f64>, KernelError> {
    check_data(g, u)?;
    k.check_window(g)?;
    let gamma_over_dx = k.gamma / g.dx();
    Ok((0..g.n_cells())
        .map(|i| window_quadrature(g, u, i, gamma_over_dx, |r| k.evaluate(r)))
        .collect())
}

/// First and second derivatives of the nonlocal average at cell centers.
pub struct NonlocalDerivatives {
    pub ubar_x: Vec<f64>,
    pub ubar_xx: Vec<f64>,
}

/// Computes (ū_x, ū_xx).
///
/// Kind-specific paths:
/// * Constant: ū_x = (k0/γ)(u(x+γ) − u(x)) and the same quotient of u_x,
///   the exact derivative of the moving window average.
/// * Linear: ũ_x = −(2/γ)(u − ū_c) with ū_c the unit constant-kernel
///   average, and ũ_xx = −(2/γ)(u_x − (ū_c)_x).
/// * Tabulated: quadrature of ∫K′(x−y)u(y)dy over the window plus the jump
///   terms K(−γ⁺)u(x+γ) − K(0⁻)u(x); same applied to u_x for ū_xx.
///
/// u_x itself comes from centered differences (one-sided at
/// `ConstantExtension` edges).
pub fn nonlocal_derivatives(
    k: &KernelSpec,
    g: &Grid1D,
    u: &[f64],
) -> Result<NonlocalDerivatives, KernelError> {
    check_data(g, u)?;
    k.check_window(g)?;
    let ux = g.gradient(u);
    let n = g.n_cells();
    match k.kind {
        KernelKind::Constant => {
            let scale = k.k0 / k.gamma;
            let diff = |w: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|i| scale * (g.sample(w, g.cell_center(i) + k.gamma) - w[i]))
                    .collect()
            };
            Ok(NonlocalDerivatives { ubar_x: diff(u), ubar_xx: diff(&ux) })
        }
        KernelKind::Linear => {
            let unit = KernelSpec::constant(k.gamma, 1.0).expect("gamma already validated");
            let ubar_c = convolve(&unit, g, u)?;
            let scale = 2.0 / k.gamma;
            let ubar_x: Vec<f64> = (0..n).map(|i| -scale * (u[i] - ubar_c[i])).collect();
            let ubar_cx: Vec<f64> = (0..n)
                .map(|i| (g.sample(u, g.cell_center(i) + k.gamma) - u[i]) / k.gamma)
                .collect();
            let ubar_xx: Vec<f64> = (0..n).map(|i| -scale * (ux[i] - ubar_cx[i])).collect();
            Ok(NonlocalDerivatives { ubar_x, ubar_xx })
        }
        KernelKind::Tabulated => {
            let gamma_over_dx = k.gamma / g.dx();
            let deriv = |w: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|i| {
                        let interior = window_quadrature(g, w, i, gamma_over_dx, |r| k.slope(r));
                        let ahead = g.sample(w, g.cell_center(i) + k.gamma);
                        interior + k.k_at_left * ahead - k.k_at_zero * w[i]
                    })
                    .collect()
            };
            Ok(NonlocalDerivatives { ubar_x: deriv(u), ubar_xx: deriv(&ux) })
        }
    }
}

fn check_data(g: &Grid1D, u: &[f64]) -> Result<(), KernelError> {
    if u.len() != g.n_cells() {
        return Err(KernelError::LengthMismatch { expected: g.n_cells(), got: u.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn linear_samples(gamma: f64, count: usize) -> Vec<(f64, f64)> {
        (0..count)
            .map(|i| {
                let r = -gamma + gamma * i as f64 / (count - 1) as f64;
                (r, (2.0 / gamma) * (1.0 + r / gamma))
            })
            .collect()
    }

    #[test]
    fn mass_closed_forms() {
        let k = KernelSpec::constant(2.0, 1.0).unwrap();
        assert!((kernel_mass(&k) - 1.0).abs() < 1e-12);
        let k = KernelSpec::linear(0.5).unwrap();
        assert!((kernel_mass(&k) - 1.0).abs() < 1e-12);
        let k = KernelSpec::constant(0.25, 3.0).unwrap();
        assert!((kernel_mass(&k) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mass_of_tabulated_linear_kernel() {
        let k = KernelSpec::tabulated(1.0, &linear_samples(1.0, 1001)).unwrap();
        assert!((kernel_mass(&k) - 1.0).abs() < 1e-6);
        assert!((k.k_at_zero() - 2.0).abs() < 1e-9);
        assert!((k.w11_seminorm() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn h1_validation_names_the_violation() {
        let bad = [(-1.0, 0.5), (-0.5, 0.4), (0.0, 1.0)];
        match KernelSpec::tabulated(1.0, &bad) {
            Err(KernelError::Decreasing { index: 0, drop }) => {
                assert!((drop - 0.1).abs() < 1e-12)
            }
            other => panic!("expected Decreasing, got {other:?}"),
        }
        let negative = [(-1.0, -0.1), (0.0, 1.0)];
        assert!(matches!(
            KernelSpec::tabulated(1.0, &negative),
            Err(KernelError::NegativeValue { index: 0, .. })
        ));
        let short_span = [(-0.5, 0.1), (0.0, 1.0)];
        assert!(matches!(
            KernelSpec::tabulated(1.0, &short_span),
            Err(KernelError::TableSpan { .. })
        ));
        // Nondecreasing within the -1e-12 slack must pass.
        let slack = [(-1.0, 0.5), (-0.5, 0.5 - 1e-13), (0.0, 1.0)];
        assert!(KernelSpec::tabulated(1.0, &slack).is_ok());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(KernelSpec::constant(0.0, 1.0), Err(KernelError::InvalidGamma(_))));
        assert!(matches!(KernelSpec::constant(1.0, 0.0), Err(KernelError::InvalidStrength(_))));
        assert!(matches!(KernelSpec::linear(-2.0), Err(KernelError::InvalidGamma(_))));
    }

    #[test]
    fn periodic_window_must_fit() {
        let g = Grid1D::from_length(64, 0.0, 2.0, Boundary::Periodic).unwrap();
        let k = KernelSpec::constant(1.0, 1.0).unwrap();
        let u = vec![0.5; 64];
        assert!(matches!(convolve(&k, &g, &u), Err(KernelError::WindowTooWide { .. })));
        // Same window on a constant-extension domain is fine.
        let g = Grid1D::from_length(64, 0.0, 2.0, Boundary::ConstantExtension).unwrap();
        assert!(convolve(&k, &g, &u).is_ok());
    }

    #[test]
    fn constant_data_is_averaged_to_itself() {
        let g = Grid1D::from_length(128, 0.0, 10.0, Boundary::Periodic).unwrap();
        for k in [
            KernelSpec::constant(1.3, 1.0).unwrap(),
            KernelSpec::linear(0.7).unwrap(),
            KernelSpec::tabulated(1.0, &linear_samples(1.0, 11)).unwrap(),
        ] {
            let u = vec![0.5; 128];
            let ubar = convolve(&k, &g, &u).unwrap();
            let err = ubar.iter().map(|v| (v - 0.5).abs()).fold(0.0f64, f64::max);
            assert!(err < 1e-13, "kind {:?}: err {err}", k.kind());
        }
    }

    #[test]
    fn step_data_yields_exact_ramp() {
        // u = 1 for x < 0, 0 for x >= 0, step aligned with a cell interface.
        // The window average is then ū(x) = clamp(-x, 0, 1) exactly, up to
        // the interpolation of the two cells straddling each window edge.
        let n = 400;
        let g = Grid1D::from_length(n, -5.0, 10.0, Boundary::ConstantExtension).unwrap();
        let u: Vec<f64> = (0..n).map(|i| if g.cell_center(i) < 0.0 { 1.0 } else { 0.0 }).collect();
        let k = KernelSpec::constant(1.0, 1.0).unwrap();
        let ubar = convolve(&k, &g, &u).unwrap();
        let err = (0..n)
            .map(|i| (ubar[i] - (-g.cell_center(i)).clamp(0.0, 1.0)).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12, "ramp error {err}");
    }

    #[test]
    fn convolve_second_order_on_sine() {
        // Constant kernel, gamma not a multiple of dx: exact value is
        // (cos x - cos(x+gamma))/gamma.
        let gamma = 0.7373;
        let mut errs = Vec::new();
        for n in [128usize, 256] {
            let g = Grid1D::from_length(n, 0.0, 2.0 * PI, Boundary::Periodic).unwrap();
            let u: Vec<f64> = (0..n).map(|i| g.cell_center(i).sin()).collect();
            let ubar = convolve(&KernelSpec::constant(gamma, 1.0).unwrap(), &g, &u).unwrap();
            let err = (0..n)
                .map(|i| {
                    let x = g.cell_center(i);
                    (ubar[i] - (x.cos() - (x + gamma).cos()) / gamma).abs()
                })
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        assert!(errs[0] / errs[1] > 3.5, "refinement ratio {:?}", errs);
        assert!(errs[1] < 1e-3);
    }

    #[test]
    fn constant_kernel_matches_windowed_average_path() {
        // gamma an exact multiple of dx; both paths must agree to 1e-12.
        let n = 160;
        let g = Grid1D::from_length(n, 0.0, 10.0, Boundary::Periodic).unwrap();
        let dx = g.dx();
        let gamma = 16.0 * dx;
        let u: Vec<f64> = (0..n).map(|i| (0.3 * g.cell_center(i)).sin().powi(2)).collect();
        let k = KernelSpec::constant(gamma, 1.0).unwrap();
        let quad = convolve(&k, &g, &u).unwrap();
        // Independent path: the window starts mid-cell, so cell i contributes
        // half a cell, cells i+1..i+16 a full cell each, cell i+17 the rest.
        let windowed: Vec<f64> = (0..n)
            .map(|i| {
                let mut acc = 0.5 * u[i];
                for j in 1..16 {
                    acc += g.value_at(&u, i as isize + j);
                }
                acc += 0.5 * g.value_at(&u, i as isize + 16);
                acc * dx / gamma
            })
            .collect();
        assert!(max_abs_diff(&quad, &windowed) < 1e-12);
    }

    #[test]
    fn derivatives_vanish_on_constant_data() {
        let g = Grid1D::from_length(64, 0.0, 12.0, Boundary::Periodic).unwrap();
        let u = vec![0.8; 64];
        for k in [
            KernelSpec::constant(1.0, 1.0).unwrap(),
            KernelSpec::linear(1.5).unwrap(),
            KernelSpec::tabulated(2.0, &linear_samples(2.0, 21)).unwrap(),
        ] {
            let d = nonlocal_derivatives(&k, &g, &u).unwrap();
            assert!(d.ubar_x.iter().all(|v| v.abs() < 1e-12));
            assert!(d.ubar_xx.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn constant_kernel_difference_quotient_on_sine() {
        // gamma = pi: ū_x(x) = (sin(x+pi) - sin x)/pi = -2 sin(x)/pi, and
        // ū_xx differentiates once more.
        let n = 512;
        let g = Grid1D::from_length(n, 0.0, 8.0 * PI, Boundary::Periodic).unwrap();
        let u: Vec<f64> = (0..n).map(|i| g.cell_center(i).sin()).collect();
        let k = KernelSpec::constant(PI, 1.0).unwrap();
        let d = nonlocal_derivatives(&k, &g, &u).unwrap();
        let dx = g.dx();
        let err_x = (0..n)
            .map(|i| (d.ubar_x[i] + 2.0 * g.cell_center(i).sin() / PI).abs())
            .fold(0.0f64, f64::max);
        assert!(err_x < 2.0 * dx * dx, "ubar_x error {err_x}");
        let err_xx = (0..n)
            .map(|i| (d.ubar_xx[i] + 2.0 * g.cell_center(i).cos() / PI).abs())
            .fold(0.0f64, f64::max);
        assert!(err_xx < 2.0 * dx * dx, "ubar_xx error {err_xx}");
    }

    #[test]
    fn tabulated_quadrature_matches_linear_identity_path() {
        // A dense table of the linear kernel must reproduce the identity
        // path through the constant-kernel average to near roundoff when
        // gamma is a multiple of dx.
        let n = 256;
        let g = Grid1D::from_length(n, 0.0, 2.0 * PI, Boundary::Periodic).unwrap();
        let gamma = 32.0 * g.dx();
        let u: Vec<f64> = (0..n).map(|i| g.cell_center(i).sin()).collect();
        let ident = nonlocal_derivatives(&KernelSpec::linear(gamma).unwrap(), &g, &u).unwrap();
        let tab = KernelSpec::tabulated(gamma, &linear_samples(gamma, 41)).unwrap();
        let quad = nonlocal_derivatives(&tab, &g, &u).unwrap();
        // ū_x: the constant K' quadrature telescopes into the same window
        // sums the identity uses, so the paths agree to roundoff.
        assert!(max_abs_diff(&ident.ubar_x, &quad.ubar_x) < 1e-10);
        // ū_xx: integrating centered differences does not telescope
        // exactly, so the paths differ at O(dx²); check each against the
        // closed form ũ_xx = −(2/γ)(cos x − (sin(x+γ) − sin x)/γ) instead.
        let dx = g.dx();
        for i in 0..n {
            let x = g.cell_center(i);
            let exact = -(2.0 / gamma) * (x.cos() - ((x + gamma).sin() - x.sin()) / gamma);
            assert!((ident.ubar_xx[i] - exact).abs() < 4.0 * dx * dx, "identity path at {x}");
            assert!((quad.ubar_xx[i] - exact).abs() < 4.0 * dx * dx, "quadrature path at {x}");
        }
    }

    #[test]
    fn tabulated_constant_kernel_recovers_jump_terms() {
        // A table sampling the constant kernel has K' = 0 inside; ū_x must
        // come entirely from the two jump terms and match the exact
        // difference quotient.
        let n = 256;
        let g = Grid1D::from_length(n, 0.0, 2.0 * PI, Boundary::Periodic).unwrap();
        let gamma = 32.0 * g.dx();
        let u: Vec<f64> = (0..n).map(|i| g.cell_center(i).sin()).collect();
        let table = [(-gamma, 1.0 / gamma), (0.0, 1.0 / gamma)];
        let tab = KernelSpec::tabulated(gamma, &table).unwrap();
        let ident = nonlocal_derivatives(&KernelSpec::constant(gamma, 1.0).unwrap(), &g, &u).unwrap();
        let quad = nonlocal_derivatives(&tab, &g, &u).unwrap();
        assert!(max_abs_diff(&ident.ubar_x, &quad.ubar_x) < 1e-10);
        assert!(max_abs_diff(&ident.ubar_xx, &quad.ubar_xx) < 1e-10);
    }
}
