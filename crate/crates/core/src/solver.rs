//! Query counts and the two-phase solver.
//!
//! For a known marked fraction `lambda <= 1/4` and a fixed oracle phase, a
//! pair of alternating diffusion phases `(theta1, theta2)` exists that drives
//! the search to success probability exactly 1 in
//! `k_opt = ceil(pi / (4 asin(sqrt(lambda))) - 1/2)` queries. This module
//! computes those counts, evaluates the determinism conditions, and solves
//! them numerically.
//!
//! The ground-truth residual is `<R|psi_f>` assembled from the operator
//! product ([`residual_generic`]); the analytic conditions in
//! [`residual_even`] and [`residual_odd`] are validation cross-checks only
//! and never drive the solver. Roots are found by a damped Newton iteration
//! (central-difference Jacobian) started from the reference phase
//! `(theta0, -theta0)`, with a 16x16 multistart grid over `(-pi, pi]^2` as
//! fallback.

use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::subspace::{final_state, pair_iterate_decomposition, SubspaceState};

/// Newton stops early below this residual norm.
const RESIDUAL_STOP: f64 = 1e-12;
/// Largest residual norm accepted as a solution.
pub const RESIDUAL_ACCEPT: f64 = 1e-10;
/// Central-difference step for the numeric Jacobian, in radians.
const JACOBIAN_STEP: f64 = 1e-7;
/// Iteration budget for the primary start.
const PRIMARY_ITERS: u32 = 100;
/// Iteration budget per multistart grid point.
const MULTISTART_ITERS: u32 = 40;
/// Multistart grid resolution per axis.
const MULTISTART_GRID: u32 = 16;
/// Denominators smaller than this count as a tangent pole.
const POLE_EPS: f64 = 1e-12;
/// `solve_min_k` scans up to this multiple of `k_opt` by default.
pub const DEFAULT_K_CAP_FACTOR: u32 = 8;

fn check_lambda_quarter(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidLambda {
            value: lambda,
            requirement: "(0, 1/4]",
        });
    }
    if lambda > 0.25 {
        return Err(Error::LambdaAboveQuarter { value: lambda });
    }
    Ok(())
}

fn check_lambda_half(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 && lambda < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidLambda {
            value: lambda,
            requirement: "(0, 1/2)",
        })
    }
}

/// Wraps an angle to the canonical interval `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}

/// Smallest query count admitting a deterministic two-phase schedule:
/// `ceil(pi / (4 asin(sqrt(lambda))) - 1/2)`, at least 1.
pub fn k_opt(lambda: f64) -> Result<u32> {
    check_lambda_quarter(lambda)?;
    let exact = PI / (4.0 * lambda.sqrt().asin()) - 0.5;
    // The expression is an exact integer at boundaries such as lambda = 1/4;
    // nudge below before rounding up so those stay put.
    Ok((exact - 1e-9).ceil().max(1.0) as u32)
}

/// Optimal query count of the plain (probabilistic) search: the nearest
/// integer to `pi / (4 asin(sqrt(lambda))) - 1/2`, halves rounding up,
/// at least 1.
pub fn k_prime_opt(lambda: f64) -> Result<u32> {
    check_lambda_half(lambda)?;
    let exact = PI / (4.0 * lambda.sqrt().asin()) - 0.5;
    // f64::round is half-away-from-zero, which is half-up for positive input.
    Ok(exact.round().max(1.0) as u32)
}

/// Reference phase `theta0 = 2 asin(sin(pi / (4k + 2)) / sqrt(lambda))` of the
/// matched-phase protocol, also the solver's initial guess. Defined whenever
/// the asin argument does not exceed 1 (k large enough for the given lambda);
/// arguments within 1e-12 of 1 are snapped, so `lambda = 1/4, k = 1` yields
/// exactly pi.
pub fn theta0(lambda: f64, k: u32) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 || lambda >= 1.0 {
        return Err(Error::InvalidLambda {
            value: lambda,
            requirement: "(0, 1)",
        });
    }
    if k == 0 {
        return Err(Error::InvalidQueryCount);
    }
    let arg = (PI / (4.0 * f64::from(k) + 2.0)).sin() / lambda.sqrt();
    if arg > 1.0 + 1e-12 {
        return Err(Error::ThetaZeroOutOfDomain { lambda, k });
    }
    let arg = if arg > 1.0 - 1e-12 { 1.0 } else { arg };
    Ok(2.0 * arg.asin())
}

/// Success probability of the plain search at its optimal query count:
/// `sin^2((k'_opt + 1/2) theta)` with `theta = 2 asin(sqrt(lambda))`.
pub fn std_success(lambda: f64) -> Result<f64> {
    let theta = 2.0 * lambda.sqrt().asin();
    let kp = f64::from(k_prime_opt(lambda)?);
    Ok(((kp + 0.5) * theta).sin().powi(2))
}

/// Query counts and reference angles for one marked fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryPlan {
    /// Deterministic two-phase query count.
    pub k_opt: u32,
    /// Optimal count of the plain probabilistic search.
    pub k_prime_opt: u32,
    /// Polar angle `2 asin(sqrt(lambda))` of the start state.
    pub theta: f64,
    /// Reference phase at `k_opt`, when defined.
    pub theta0: Option<f64>,
}

impl QueryPlan {
    pub fn for_lambda(lambda: f64) -> Result<Self> {
        let k = k_opt(lambda)?;
        Ok(Self {
            k_opt: k,
            k_prime_opt: k_prime_opt(lambda)?,
            theta: 2.0 * lambda.sqrt().asin(),
            theta0: theta0(lambda, k).ok(),
        })
    }
}

/// State after `k` runs of the matched-phase reference protocol, whose oracle
/// phase and diffusion phase both equal `theta0(lambda, k)`.
///
/// That protocol's diffusion operator multiplies the start state itself by
/// `e^{i theta0}` and fixes the orthogonal complement; expressed through the
/// reflection convention used here (identity on `|psi0>`, phase on the
/// complement) it is `S_r(-theta0)` up to global phase, so the run is
/// `G(theta0, -theta0)` applied `k` times.
pub fn theta0_protocol_state(lambda: f64, k: u32) -> Result<SubspaceState> {
    let t0 = theta0(lambda, k)?;
    final_state(lambda, t0, -t0, -t0, k)
}

/// Ground-truth determinism residual: the components of `<R|psi_f>` after the
/// global phase of `psi_f` is fixed by the canonical convention. Both vanish
/// exactly when the schedule is deterministic.
pub fn residual_generic(
    theta1: f64,
    theta2: f64,
    lambda: f64,
    alpha: f64,
    k: u32,
) -> Result<(f64, f64)> {
    let s = final_state(lambda, alpha, theta1, theta2, k)?.canonicalized();
    Ok((s.a_r.re, s.a_r.im))
}

/// Residuals of the analytic determinism conditions for the fixed pi oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionResidual {
    /// The two condition left-hand sides as written, with finite limits
    /// substituted at removable singularities. Infinite at genuine poles.
    pub raw: (f64, f64),
    /// Pole-cleared rearrangement (each equation multiplied by the
    /// denominators of its tangent terms). Vanishes at every solution.
    pub cleared: (f64, f64),
    /// Set when a sin/tan pole was encountered.
    pub at_pole: bool,
}

/// `a * num / den` with the removable limit substituted when `den` vanishes
/// while `a * num` does as well.
fn pole_safe_ratio(a: f64, num: f64, den: f64, at_pole: &mut bool) -> f64 {
    if den.abs() >= POLE_EPS {
        return a * num / den;
    }
    *at_pole = true;
    let top = a * num;
    if top.abs() < 1e-14 {
        0.0
    } else {
        let sign = if den == 0.0 { 1.0 } else { den.signum() };
        f64::INFINITY * top.signum() * sign
    }
}

/// Determinism conditions for an even query count `k` (oracle phase pi):
///
/// ```text
/// 1 + 4 lambda (1 - 2 lambda) sin(t1/2) sin(t2/2) tan(k phi / 2) / sin(phi) = 0
/// (1 - 4 lambda) tan(t1/2) + tan(t2/2)                                      = 0
/// ```
///
/// with `phi` the angle of the two-iterate block. Validation cross-check
/// only; [`residual_generic`] is the solver's ground truth.
pub fn residual_even(theta1: f64, theta2: f64, lambda: f64, k: u32) -> Result<ConditionResidual> {
    check_lambda_half(lambda)?;
    if k == 0 || k % 2 != 0 {
        return Err(Error::InvalidQueryCount);
    }
    let phi = pair_iterate_decomposition(theta1, theta2, lambda)?.phi;
    let half_k = f64::from(k / 2);
    let num = (half_k * phi).sin();
    let den = phi.sin() * (half_k * phi).cos();

    let (s1, c1) = (0.5 * theta1).sin_cos();
    let (s2, c2) = (0.5 * theta2).sin_cos();
    let coeff = 4.0 * lambda * (1.0 - 2.0 * lambda) * s1 * s2;

    let mut at_pole = false;
    let raw_first = 1.0 + pole_safe_ratio(coeff, num, den, &mut at_pole);
    let raw_second = pole_safe_ratio(1.0 - 4.0 * lambda, s1, c1, &mut at_pole)
        + pole_safe_ratio(1.0, s2, c2, &mut at_pole);

    Ok(ConditionResidual {
        raw: (raw_first, raw_second),
        cleared: (den + coeff * num, (1.0 - 4.0 * lambda) * s1 * c2 + c1 * s2),
        at_pole,
    })
}

/// Determinism conditions for an odd query count `k` (oracle phase pi). Both
/// equations share the ratio `tan((k-1) phi / 2) / sin(phi)`; for `k = 1`
/// that term vanishes identically and the conditions reduce to their leading
/// parts. Validation cross-check only.
pub fn residual_odd(theta1: f64, theta2: f64, lambda: f64, k: u32) -> Result<ConditionResidual> {
    check_lambda_half(lambda)?;
    if k % 2 != 1 {
        return Err(Error::InvalidQueryCount);
    }
    let phi = pair_iterate_decomposition(theta1, theta2, lambda)?.phi;
    let m = f64::from((k - 1) / 2);
    let num = (m * phi).sin();
    let den = phi.sin() * (m * phi).cos();

    let (s1, _) = (0.5 * theta1).sin_cos();
    let (s2, c2) = (0.5 * theta2).sin_cos();
    let (sin_t1, cos_t1) = theta1.sin_cos();
    let lead_first = 2.0 * lambda + (1.0 - 2.0 * lambda) * cos_t1;
    let coeff_first = -(1.0 - 2.0 * lambda)
        * s1
        * (sin_t1 * c2
            + (1.0 + 4.0 * lambda - 8.0 * lambda * lambda
                + (1.0 - 8.0 * lambda + 8.0 * lambda * lambda) * cos_t1)
                * s2);
    let lead_second = (1.0 - 2.0 * lambda) * sin_t1;
    let coeff_second = (1.0 - 2.0 * lambda)
        * (8.0 * lambda * (1.0 - lambda) * s1 * sin_t1 * s2
            + cos_t1 * (0.5 * (theta1 + theta2)).sin())
        - 2.0 * lambda * (0.5 * (theta1 - theta2)).sin();

    let mut at_pole = false;
    let raw = (
        lead_first + pole_safe_ratio(coeff_first, num, den, &mut at_pole),
        lead_second + pole_safe_ratio(coeff_second, num, den, &mut at_pole),
    );
    Ok(ConditionResidual {
        raw,
        cleared: (
            lead_first * den + coeff_first * num,
            lead_second * den + coeff_second * num,
        ),
        at_pole,
    })
}

/// A solved deterministic schedule. Angles are reported in `(-pi, pi]`; any
/// representative mod 2 pi is equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSchedule {
    pub lambda: f64,
    pub alpha: f64,
    pub k: u32,
    pub theta1: f64,
    pub theta2: f64,
    /// Norm of [`residual_generic`] at the reported angles; < 1e-10.
    pub residual_norm: f64,
}

fn norm2(r: (f64, f64)) -> f64 {
    r.0.hypot(r.1)
}

/// Damped Newton with a central-difference Jacobian on [`residual_generic`].
/// The linear step solves ridge-regularized normal equations, which also
/// copes with `k = 1`, where the second phase is inert and its Jacobian
/// column vanishes. Returns the root when the residual norm drops below the
/// acceptance threshold.
fn newton_root(
    lambda: f64,
    alpha: f64,
    k: u32,
    start: (f64, f64),
    max_iter: u32,
) -> Option<(f64, f64)> {
    let eval = |t1: f64, t2: f64| -> (f64, f64) {
        residual_generic(t1, t2, lambda, alpha, k).expect("domain validated by solve")
    };
    let mut x = start;
    let mut r = eval(x.0, x.1);
    let mut rn = norm2(r);
    let mut best = rn;
    let mut stalled = 0u32;
    for _ in 0..max_iter {
        if rn < RESIDUAL_STOP {
            return Some(x);
        }
        let h = JACOBIAN_STEP;
        let rp1 = eval(x.0 + h, x.1);
        let rm1 = eval(x.0 - h, x.1);
        let rp2 = eval(x.0, x.1 + h);
        let rm2 = eval(x.0, x.1 - h);
        let j = [
            [(rp1.0 - rm1.0) / (2.0 * h), (rp2.0 - rm2.0) / (2.0 * h)],
            [(rp1.1 - rm1.1) / (2.0 * h), (rp2.1 - rm2.1) / (2.0 * h)],
        ];
        let jtj00 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
        let jtj01 = j[0][0] * j[0][1] + j[1][0] * j[1][1];
        let jtj11 = j[0][1] * j[0][1] + j[1][1] * j[1][1];
        let ridge = 1e-12 * (1.0 + jtj00.max(jtj11));
        let (a, b, d) = (jtj00 + ridge, jtj01, jtj11 + ridge);
        let det = a * d - b * b;
        if !det.is_finite() || det <= 0.0 {
            return None;
        }
        let g0 = -(j[0][0] * r.0 + j[1][0] * r.1);
        let g1 = -(j[0][1] * r.0 + j[1][1] * r.1);
        let dx = ((d * g0 - b * g1) / det, (a * g1 - b * g0) / det);
        if !(dx.0.is_finite() && dx.1.is_finite()) {
            return None;
        }

        let mut step = 1.0f64;
        let mut moved = false;
        for _ in 0..30 {
            let cand = (x.0 + step * dx.0, x.1 + step * dx.1);
            let rc = eval(cand.0, cand.1);
            let rcn = norm2(rc);
            if rcn < rn * (1.0 - 1e-4 * step) || rcn < RESIDUAL_STOP {
                x = cand;
                r = rc;
                rn = rcn;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        if rn < best * 0.9 {
            best = rn;
            stalled = 0;
        } else {
            stalled += 1;
            // Starts that stall far from a root are abandoned quickly so the
            // multistart scan of infeasible (lambda, alpha, k) stays cheap.
            if stalled >= 8 && rn > 1e-6 {
                break;
            }
        }
    }
    (rn < RESIDUAL_ACCEPT).then_some(x)
}

fn accept_root(lambda: f64, alpha: f64, k: u32, root: (f64, f64)) -> Option<PhaseSchedule> {
    let theta1 = wrap_angle(root.0);
    let theta2 = wrap_angle(root.1);
    let residual_norm = norm2(residual_generic(theta1, theta2, lambda, alpha, k).ok()?);
    if residual_norm >= RESIDUAL_ACCEPT {
        return None;
    }
    let success = final_state(lambda, alpha, theta1, theta2, k)
        .ok()?
        .success_probability();
    if success < 1.0 - 1e-9 {
        return None;
    }
    Some(PhaseSchedule {
        lambda,
        alpha,
        k,
        theta1,
        theta2,
        residual_norm,
    })
}

/// Solves the two diffusion phases for `k` queries at oracle phase `alpha`.
///
/// Newton starts from `(theta0, -theta0)` (falling back to `(pi, -pi)` when
/// the reference phase is undefined), so the reported root is the one
/// continuously connected to that guess; a 16x16 grid over `(-pi, pi]^2` is
/// scanned in row-major order when the primary start fails, accepting the
/// first root found. `NoConvergence` after the full scan signals that `k` is
/// too small for this `(lambda, alpha)`.
pub fn solve(lambda: f64, k: u32, alpha: f64) -> Result<PhaseSchedule> {
    check_lambda_quarter(lambda)?;
    if k == 0 {
        return Err(Error::InvalidQueryCount);
    }
    let guess = theta0(lambda, k).map(|t| (t, -t)).unwrap_or((PI, -PI));
    if let Some(s) = newton_root(lambda, alpha, k, guess, PRIMARY_ITERS)
        .and_then(|r| accept_root(lambda, alpha, k, r))
    {
        return Ok(s);
    }
    let step = TAU / f64::from(MULTISTART_GRID);
    for i in 1..=MULTISTART_GRID {
        for j in 1..=MULTISTART_GRID {
            let start = (-PI + step * f64::from(i), -PI + step * f64::from(j));
            if let Some(s) = newton_root(lambda, alpha, k, start, MULTISTART_ITERS)
                .and_then(|r| accept_root(lambda, alpha, k, r))
            {
                return Ok(s);
            }
        }
    }
    Err(Error::NoConvergence {
        lambda,
        alpha,
        max_k: k,
    })
}

/// Schedule with the smallest `k >= 1` for which [`solve`] converges,
/// scanning up to `8 * k_opt(lambda)` queries. For the pi oracle the result
/// lands at `k_opt(lambda)` itself.
pub fn solve_min_k(lambda: f64, alpha: f64) -> Result<PhaseSchedule> {
    let cap = DEFAULT_K_CAP_FACTOR * k_opt(lambda)?;
    solve_min_k_capped(lambda, alpha, cap)
}

/// [`solve_min_k`] with an explicit scan cap.
pub fn solve_min_k_capped(lambda: f64, alpha: f64, k_cap: u32) -> Result<PhaseSchedule> {
    check_lambda_quarter(lambda)?;
    if k_cap == 0 {
        return Err(Error::InvalidQueryCount);
    }
    for k in 1..=k_cap {
        match solve(lambda, k, alpha) {
            Ok(s) => return Ok(s),
            Err(Error::NoConvergence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence {
        lambda,
        alpha,
        max_k: k_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_opt_reference_points() {
        assert_eq!(k_opt(0.25).unwrap(), 1);
        assert_eq!(k_opt(1.0 / 16.0).unwrap(), 3); // 2.608... rounds up
        assert_eq!(k_opt(0.005).unwrap(), 11); // 10.598... rounds up
        assert!(matches!(k_opt(0.3), Err(Error::LambdaAboveQuarter { .. })));
        assert!(k_opt(0.0).is_err());
        assert!(k_opt(-1.0).is_err());
    }

    #[test]
    fn k_prime_opt_reference_points() {
        assert_eq!(k_prime_opt(0.25).unwrap(), 1);
        assert_eq!(k_prime_opt(1.0 / 16.0).unwrap(), 3);
        assert_eq!(k_prime_opt(0.005).unwrap(), 11);
        assert!(k_prime_opt(0.5).is_err());
        assert!(k_prime_opt(0.0).is_err());
        // 0.3 is fine here, only the deterministic count is capped at 1/4.
        assert_eq!(k_prime_opt(0.3).unwrap(), 1);
    }

    #[test]
    fn theta0_reference_points() {
        // Boundary case is exact.
        assert_eq!(theta0(0.25, 1).unwrap(), PI);

        // 2 asin(4 sin(pi/14)), frozen from evaluating the closed form.
        let t = theta0(1.0 / 16.0, 3).unwrap();
        assert!((t - 2.0 * (4.0 * (PI / 14.0).sin()).asin()).abs() < 1e-15);
        assert!((t - 2.195057699090115).abs() < 1e-12);

        assert!(matches!(
            theta0(1.0 / 16.0, 1),
            Err(Error::ThetaZeroOutOfDomain { .. })
        ));
    }

    #[test]
    fn std_success_reference_points() {
        assert!((std_success(0.25).unwrap() - 1.0).abs() < 1e-12);
        // sin^2(3.5 * 2 asin(1/4)), frozen from evaluating the formula.
        let s = std_success(1.0 / 16.0).unwrap();
        assert!((s - 0.9613189697265625).abs() < 1e-12);
        assert!(std_success(0.5).is_err());
    }

    #[test]
    fn query_plan_bundles_counts() {
        let plan = QueryPlan::for_lambda(1.0 / 16.0).unwrap();
        assert_eq!(plan.k_opt, 3);
        assert_eq!(plan.k_prime_opt, 3);
        assert!((plan.theta - 2.0 * 0.25f64.asin()).abs() < 1e-15);
        assert!(plan.theta0.is_some());
    }

    #[test]
    fn wrap_angle_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-2.5 * PI) + 0.5 * PI).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn residual_generic_forced_case() {
        let r = residual_generic(PI, 0.0, 0.25, PI, 1).unwrap();
        assert!(norm2(r) < 1e-14);
    }

    #[test]
    fn residual_generic_reference_protocol_is_a_root() {
        // The matched-phase protocol solves the same landing condition, with
        // the oracle phase theta0 rather than pi.
        let lambda = 1.0 / 16.0;
        let t0 = theta0(lambda, 3).unwrap();
        let r = residual_generic(-t0, -t0, lambda, t0, 3).unwrap();
        assert!(norm2(r) < 1e-9, "residual {:?}", r);
    }

    #[test]
    fn residual_generic_standard_phases_not_deterministic_off_pi() {
        let r = residual_generic(PI, PI, 1.0 / 16.0, 0.9 * PI, 3).unwrap();
        assert!(norm2(r) > 1e-3);
    }

    #[test]
    fn residual_even_zero_phases() {
        let r = residual_even(0.0, 0.0, 0.1, 2).unwrap();
        assert!((r.raw.0 - 1.0).abs() < 1e-12);
        assert_eq!(r.raw.1, 0.0);
        assert!(r.at_pole);
    }

    #[test]
    fn residual_even_matches_independent_transcription() {
        // Re-derive the conditions at a generic point with independently
        // written code.
        let (t1, t2, lambda, k) = (1.0, 2.0, 0.1, 2u32);
        let r = residual_even(t1, t2, lambda, k).unwrap();

        let cos_phi = ((t1 + t2) / 2.0).cos()
            + 8.0 * lambda * (1.0 - lambda) * (t1 / 2.0).sin() * (t2 / 2.0).sin();
        let phi = cos_phi.acos();
        let expect_first = 1.0
            + 4.0
                * lambda
                * (1.0 - 2.0 * lambda)
                * (t1 / 2.0).sin()
                * (t2 / 2.0).sin()
                * (f64::from(k) / 2.0 * phi).tan()
                / phi.sin();
        let expect_second = (1.0 - 4.0 * lambda) * (t1 / 2.0).tan() + (t2 / 2.0).tan();
        assert!((r.raw.0 - expect_first).abs() < 1e-12);
        assert!((r.raw.1 - expect_second).abs() < 1e-12);
        assert!(!r.at_pole);
    }

    #[test]
    fn residual_odd_matches_independent_transcription() {
        let (t1, t2, lambda, k) = (2.4, -1.1, 0.08, 5u32);
        let r = residual_odd(t1, t2, lambda, k).unwrap();

        let cos_phi = ((t1 + t2) / 2.0).cos()
            + 8.0 * lambda * (1.0 - lambda) * (t1 / 2.0).sin() * (t2 / 2.0).sin();
        let phi = cos_phi.acos();
        let ratio = (f64::from(k - 1) / 2.0 * phi).tan() / phi.sin();
        let expect_first = 2.0 * lambda + (1.0 - 2.0 * lambda) * t1.cos()
            - (1.0 - 2.0 * lambda)
                * (t1 / 2.0).sin()
                * (t1.sin() * (t2 / 2.0).cos()
                    + (1.0 + 4.0 * lambda - 8.0 * lambda * lambda
                        + (1.0 - 8.0 * lambda + 8.0 * lambda * lambda) * t1.cos())
                        * (t2 / 2.0).sin())
                * ratio;
        let expect_second = (1.0 - 2.0 * lambda) * t1.sin()
            + ((1.0 - 2.0 * lambda)
                * (8.0 * lambda * (1.0 - lambda) * (t1 / 2.0).sin() * t1.sin() * (t2 / 2.0).sin()
                    + t1.cos() * ((t1 + t2) / 2.0).sin())
                - 2.0 * lambda * ((t1 - t2) / 2.0).sin())
                * ratio;
        assert!((r.raw.0 - expect_first).abs() < 1e-12);
        assert!((r.raw.1 - expect_second).abs() < 1e-12);
    }

    #[test]
    fn residual_odd_leading_terms_at_standard_phase() {
        // At theta1 = pi the leading part of the first condition is
        // 2 lambda + (1 - 2 lambda) cos(pi) = 4 lambda - 1, which vanishes at
        // lambda = 1/4.
        let lambda = 0.25;
        let lead = 2.0 * lambda + (1.0 - 2.0 * lambda) * PI.cos();
        assert!(lead.abs() < 1e-15);
        let r = residual_odd(PI, 0.3, lambda, 1).unwrap();
        // k = 1 kills the ratio term, so the raw values are the leading parts.
        assert!(r.raw.0.abs() < 1e-12);
        assert!((r.raw.1 - (1.0 - 2.0 * lambda) * PI.sin()).abs() < 1e-12);
    }

    #[test]
    fn residual_conditions_vanish_at_solved_schedules() {
        // Odd count.
        let s = solve(1.0 / 16.0, 3, PI).unwrap();
        let r = residual_odd(s.theta1, s.theta2, s.lambda, s.k).unwrap();
        assert!(r.cleared.0.abs() < 1e-10, "cleared {:?}", r.cleared);
        assert!(r.cleared.1.abs() < 1e-10);
        assert!(r.raw.0.abs() < 1e-8);
        assert!(r.raw.1.abs() < 1e-8);

        // Even count.
        let s = solve(1.0 / 16.0, 4, PI).unwrap();
        let r = residual_even(s.theta1, s.theta2, s.lambda, s.k).unwrap();
        assert!(r.cleared.0.abs() < 1e-10, "cleared {:?}", r.cleared);
        assert!(r.cleared.1.abs() < 1e-10);
    }

    #[test]
    fn residual_parity_validation() {
        assert!(residual_even(1.0, 1.0, 0.1, 3).is_err());
        assert!(residual_odd(1.0, 1.0, 0.1, 2).is_err());
        assert!(residual_even(1.0, 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn solve_quarter_is_forced() {
        let s = solve(0.25, 1, PI).unwrap();
        assert_eq!(s.k, 1);
        assert!((s.theta1.abs() - PI).abs() < 1e-9, "theta1 = {}", s.theta1);
        assert!(s.residual_norm < 1e-10);
    }

    #[test]
    fn solve_sixteenth_three_queries() {
        let s = solve(1.0 / 16.0, 3, PI).unwrap();
        let fin = final_state(s.lambda, s.alpha, s.theta1, s.theta2, s.k).unwrap();
        assert!(fin.success_probability() >= 1.0 - 1e-9);
        assert!(fin.a_r.norm() < 1e-9);
        // theta1 ~ -theta2 does not yet hold tightly at this lambda.
        assert!((s.theta1 + s.theta2).abs() > 0.1);
        assert!(s.theta1 > -PI && s.theta1 <= PI);
        assert!(s.theta2 > -PI && s.theta2 <= PI);
    }

    #[test]
    fn solve_small_lambda_tracks_reference_phase() {
        let lambda = 2f64.powi(-10);
        let k = k_opt(lambda).unwrap();
        assert_eq!(k, 25);
        let t0 = theta0(lambda, k).unwrap();
        let s = solve(lambda, k, PI).unwrap();
        assert!((s.theta1 - t0).abs() < 0.05);
        assert!((s.theta2 + t0).abs() < 0.05);
    }

    #[test]
    fn solve_rejects_large_lambda_with_guidance() {
        let err = solve(0.3, 1, PI).unwrap_err();
        assert!(matches!(err, Error::LambdaAboveQuarter { .. }));
        assert!(err.to_string().contains("standard Grover"));
    }

    #[test]
    fn solve_undersized_k_does_not_converge() {
        assert!(matches!(
            solve(1.0 / 16.0, 2, PI),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn solve_min_k_reference_points() {
        assert_eq!(solve_min_k(1.0 / 16.0, PI).unwrap().k, 3);
        // Plateau around pi.
        assert_eq!(solve_min_k(1.0 / 16.0, PI + 0.05).unwrap().k, 3);
        assert_eq!(solve_min_k(1.0 / 16.0, PI - 0.05).unwrap().k, 3);
    }

    #[test]
    fn solve_min_k_far_oracle_needs_more_queries() {
        let s = solve_min_k(1.0 / 16.0, PI - 1.8).unwrap();
        assert!(s.k > 3, "k = {}", s.k);
        let fin = final_state(s.lambda, s.alpha, s.theta1, s.theta2, s.k).unwrap();
        assert!(fin.success_probability() >= 1.0 - 1e-9);
    }

    #[test]
    fn solved_phase_curves_jump_only_with_k_opt() {
        // theta1(lambda) is continuous on each k_opt plateau.
        let grid: Vec<f64> = (0..40)
            .map(|i| {
                let t = f64::from(i) / 39.0;
                (2f64.powi(-8).ln() * (1.0 - t) + 0.25f64.ln() * t).exp()
            })
            .collect();
        let mut prev: Option<(u32, f64)> = None;
        for &lambda in &grid {
            let k = k_opt(lambda).unwrap();
            let s = solve(lambda, k, PI).unwrap();
            if let Some((pk, pt1)) = prev {
                if pk == k {
                    assert!(
                        (s.theta1 - pt1).abs() < 0.5,
                        "jump inside plateau at lambda = {lambda}"
                    );
                }
            }
            prev = Some((k, s.theta1));
        }
    }

    #[test]
    fn theta0_protocol_reaches_south_pole() {
        for &(lambda, k) in &[(0.25, 1u32), (1.0 / 16.0, 3), (0.005, 11)] {
            let s = theta0_protocol_state(lambda, k).unwrap();
            assert!(
                s.a_r.norm() < 1e-9,
                "lambda = {lambda}, k = {k}, |a_R| = {}",
                s.a_r.norm()
            );
        }
    }
}
