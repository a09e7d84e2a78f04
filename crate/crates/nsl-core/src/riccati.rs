//! Riccati comparison ODEs.
//!
//! The slope extrema of the PDE obey quadratic differential inequalities;
//! their behavior is pinned between solutions of the factored equation
//!
//! dA/dt = a(t)·(A − b₁(t))·(A − b₂(t)),  a > 0,  b₁ ≤ b₂.
//!
//! With constant coefficients and A(0) > b₂ the solution blows up at
//! t* = ln((A₀−b₁)/(A₀−b₂)) / (a·(b₂−b₁)); with A(0) ≤ b̄ for any
//! b₁ ≤ b̄ ≤ b₂ it stays in [min{A₀, min b₁}, b̄] forever. The solver
//! integrates with an adaptive Dormand–Prince 5(4) pair, declares blow-up
//! once |A| crosses 1e9, and recovers t* by a linear least-squares fit of
//! the reciprocal tail 1/A ≈ (t*−t)/c.

use std::sync::Arc;
use thiserror::Error;

/// Growth ceiling that counts as numerically infinite.
const BLOWUP_CEILING: f64 = 1e9;

pub type Coeff = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Error)]
pub enum RiccatiError {
    #[error("t_max must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("initial value must be finite, got {0}")]
    BadInitial(f64),
    #[error("coefficient violation at t = {t}: {detail}")]
    BadCoefficients { t: f64, detail: String },
    #[error("piecewise coefficients need matching, nonempty, strictly increasing knots")]
    BadKnots,
    #[error("step size underflow at t = {t} before reaching the ceiling")]
    StepUnderflow { t: f64 },
    #[error("comparison trace is empty or starts below A0 ({b0} < {a0})")]
    BadComparisonTrace { b0: f64, a0: f64 },
}

/// dA/dt = a(t)(A−b₁(t))(A−b₂(t)) with initial value `a0` on [0, t_max].
#[derive(Clone)]
pub struct RiccatiProblem {
    a: Coeff,
    b1: Coeff,
    b2: Coeff,
    a0: f64,
    t_max: f64,
}

impl RiccatiProblem {
    /// Constant coefficients.
    pub fn constant(a: f64, b1: f64, b2: f64, a0: f64, t_max: f64) -> Result<Self, RiccatiError> {
        Self::from_fns(
            Arc::new(move |_| a),
            Arc::new(move |_| b1),
            Arc::new(move |_| b2),
            a0,
            t_max,
        )
    }

    /// Arbitrary coefficient functions; bounds a > 0 and b₁ ≤ b₂ are
    /// verified by sampling 2001 points of [0, t_max].
    pub fn from_fns(a: Coeff, b1: Coeff, b2: Coeff, a0: f64, t_max: f64) -> Result<Self, RiccatiError> {
        if t_max <= 0.0 || !t_max.is_finite() {
            return Err(RiccatiError::BadHorizon(t_max));
        }
        if !a0.is_finite() {
            return Err(RiccatiError::BadInitial(a0));
        }
        for i in 0..=2000 {
            let t = t_max * i as f64 / 2000.0;
            let (av, b1v, b2v) = (a(t), b1(t), b2(t));
            if !av.is_finite() || !b1v.is_finite() || !b2v.is_finite() {
                return Err(RiccatiError::BadCoefficients {
                    t,
                    detail: format!("non-finite coefficient (a={av}, b1={b1v}, b2={b2v})"),
                });
            }
            if av <= 0.0 {
                return Err(RiccatiError::BadCoefficients {
                    t,
                    detail: format!("a(t) = {av} is not positive"),
                });
            }
            if b1v > b2v + 1e-12 {
                return Err(RiccatiError::BadCoefficients {
                    t,
                    detail: format!("b1(t) = {b1v} exceeds b2(t) = {b2v}"),
                });
            }
        }
        Ok(Self { a, b1, b2, a0, t_max })
    }

    /// Piecewise-linear coefficients on shared knots (clamped outside),
    /// e.g. envelopes extracted from a PDE trace.
    pub fn piecewise_linear(
        knots: &[f64],
        a: &[f64],
        b1: &[f64],
        b2: &[f64],
        a0: f64,
        t_max: f64,
    ) -> Result<Self, RiccatiError> {
        let n = knots.len();
        if n == 0 || a.len() != n || b1.len() != n || b2.len() != n {
            return Err(RiccatiError::BadKnots);
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RiccatiError::BadKnots);
        }
        let lerp = |ts: Vec<f64>, vs: Vec<f64>| -> Coeff {
            Arc::new(move |t: f64| {
                if t <= ts[0] {
                    return vs[0];
                }
                if t >= ts[ts.len() - 1] {
                    return vs[vs.len() - 1];
                }
                let hi = ts.partition_point(|&x| x <= t);
                let (t0, t1) = (ts[hi - 1], ts[hi]);
                let w = (t - t0) / (t1 - t0);
                vs[hi - 1] * (1.0 - w) + vs[hi] * w
            })
        };
        Self::from_fns(
            lerp(knots.to_vec(), a.to_vec()),
            lerp(knots.to_vec(), b1.to_vec()),
            lerp(knots.to_vec(), b2.to_vec()),
            a0,
            t_max,
        )
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    fn rhs(&self, t: f64, y: f64) -> f64 {
        (self.a)(t) * (y - (self.b1)(t)) * (y - (self.b2)(t))
    }
}

/// Closed-form blow-up time for constant coefficients; `None` when the
/// solution stays bounded (A0 ≤ b2).
pub fn blowup_time_closed_form(a: f64, b1: f64, b2: f64, a0: f64) -> Option<f64> {
    if a0 <= b2 {
        return None;
    }
    if b1 == b2 {
        return Some(1.0 / (a * (a0 - b2)));
    }
    Some(((a0 - b1) / (a0 - b2)).ln() / (a * (b2 - b1)))
}

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    /// Accepted integration steps (t, A).
    pub trace: Vec<(f64, f64)>,
    /// Extrapolated singularity time, when |A| crossed the 1e9 ceiling.
    pub blowup_time: Option<f64>,
}

/// Integrates to t_max or the growth ceiling.
pub fn riccati_solve(p: &RiccatiProblem) -> Result<RiccatiSolution, RiccatiError> {
    solve_with_max_dt(p, p.t_max / 64.0)
}

/// Dormand–Prince 5(4) with elementary step control.
fn solve_with_max_dt(p: &RiccatiProblem, max_dt: f64) -> Result<RiccatiSolution, RiccatiError> {
    const RTOL: f64 = 1e-10;
    const ATOL: f64 = 1e-12;

    let mut t = 0.0;
    let mut y = p.a0;
    let mut dt = (p.t_max * 1e-4).min(max_dt);
    let mut trace = vec![(t, y)];
    let mut k1 = p.rhs(t, y);

    // Stop just short of an exact landing so roundoff residue cannot force
    // a subnormal final step.
    while t < p.t_max * (1.0 - 1e-14) {
        dt = dt.min(p.t_max - t).min(max_dt);
        if dt < 1e-15 * t.max(1.0) {
            return Err(RiccatiError::StepUnderflow { t });
        }

        let k2 = p.rhs(t + dt / 5.0, y + dt * (k1 / 5.0));
        let k3 = p.rhs(t + dt * 0.3, y + dt * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
        let k4 = p.rhs(
            t + dt * 0.8,
            y + dt * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3),
        );
        let k5 = p.rhs(
            t + dt * (8.0 / 9.0),
            y + dt
                * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3
                    - 212.0 / 729.0 * k4),
        );
        let k6 = p.rhs(
            t + dt,
            y + dt
                * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
                    + 49.0 / 176.0 * k4
                    - 5103.0 / 18656.0 * k5),
        );
        let y5 = y
            + dt
                * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                    - 2187.0 / 6784.0 * k5
                    + 11.0 / 84.0 * k6);
        let k7 = p.rhs(t + dt, y5);
        let y4 = y
            + dt
                * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4
                    - 92097.0 / 339200.0 * k5
                    + 187.0 / 2100.0 * k6
                    + k7 / 40.0);

        let scale = ATOL + RTOL * y.abs().max(y5.abs());
        let err = ((y5 - y4) / scale).abs();
        if err <= 1.0 || dt <= 1e-14 * t.max(1.0) {
            t += dt;
            y = y5;
            k1 = k7; // first-same-as-last
            trace.push((t, y));
            if !y.is_finite() {
                return Err(RiccatiError::StepUnderflow { t });
            }
            if y.abs() >= BLOWUP_CEILING {
                return Ok(RiccatiSolution { trace: trace.clone(), blowup_time: Some(extrapolate_blowup(&trace)) });
            }
        }
        let shrink = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        dt *= shrink.clamp(0.2, 5.0);
    }
    Ok(RiccatiSolution { trace, blowup_time: None })
}

/// Least-squares line through the reciprocal tail: near the singularity
/// 1/A = (t*−t)/c, so t* is the root of the fitted line.
fn extrapolate_blowup(trace: &[(f64, f64)]) -> f64 {
    let tail: Vec<(f64, f64)> = trace
        .iter()
        .filter(|(_, a)| a.abs() >= BLOWUP_CEILING / 10.0)
        .map(|&(t, a)| (t, 1.0 / a))
        .collect();
    let tail = if tail.len() >= 5 {
        tail
    } else {
        trace.iter().rev().take(10).rev().map(|&(t, a)| (t, 1.0 / a)).collect()
    };
    let n = tail.len() as f64;
    let (st, sy, stt, sty) = tail.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, &(t, y)| {
        (acc.0 + t, acc.1 + y, acc.2 + t * t, acc.3 + t * y)
    });
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    let intercept = (sy - slope * st) / n;
    if slope.abs() > 0.0 && slope.is_finite() {
        -intercept / slope
    } else {
        tail.last().map(|&(t, _)| t).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonViolation {
    pub t: f64,
    pub b: f64,
    pub a: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Trace points that fell inside the solved time range.
    pub checked: usize,
    pub violations: Vec<ComparisonViolation>,
    /// Largest observed A − B (negative when B dominates everywhere).
    pub max_deficit: f64,
}

impl ComparisonReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the comparison principle B(t) ≥ A(t) against the solution of `p`.
///
/// The quadratic structure propagates initial ordering forward, so a trace
/// B obeying the same differential inequality must dominate A whenever
/// B(0) ≥ A(0). Tolerance per point: 1e−6 + 1e−3·|A|.
pub fn riccati_compare(
    p: &RiccatiProblem,
    b_trace: &[(f64, f64)],
) -> Result<ComparisonReport, RiccatiError> {
    let Some(&(_, b0)) = b_trace.first() else {
        return Err(RiccatiError::BadComparisonTrace { b0: f64::NAN, a0: p.a0 });
    };
    if b0 < p.a0 - 1e-12 {
        return Err(RiccatiError::BadComparisonTrace { b0, a0: p.a0 });
    }
    let span = b_trace.last().map(|&(t, _)| t).unwrap_or(p.t_max).min(p.t_max);
    let sol = solve_with_max_dt(p, (span / 2000.0).max(1e-12))?;
    let trace = &sol.trace;
    let t_end = trace.last().map(|&(t, _)| t).unwrap_or(0.0);

    let mut report =
        ComparisonReport { checked: 0, violations: Vec::new(), max_deficit: f64::NEG_INFINITY };
    for &(t, b) in b_trace {
        if t < 0.0 || t > t_end {
            continue;
        }
        // Linear interpolation between accepted steps; the dt cap keeps the
        // interpolation error far below the comparison tolerance.
        let hi = trace.partition_point(|&(tt, _)| tt <= t).min(trace.len() - 1).max(1);
        let (t0, a0) = trace[hi - 1];
        let (t1, a1) = trace[hi];
        let a = if t1 > t0 { a0 + (a1 - a0) * (t - t0) / (t1 - t0) } else { a0 };
        report.checked += 1;
        report.max_deficit = report.max_deficit.max(a - b);
        if b < a - (1e-6 + 1e-3 * a.abs()) {
            report.violations.push(ComparisonViolation { t, b, a });
        }
    }
    Ok(report)
}
