//! Double-exponential quadrature at fixed step `h = 2^{-level}`.
//!
//! Convergence is judged by halving the step: [`converge`] raises the level
//! until two consecutive estimates agree to the requested relative tolerance.

use std::f64::consts::FRAC_PI_2;

use crate::error::{DunklError, Result};

/// Truncation of the transformed variable; weights beyond it underflow.
const T_MAX: f64 = 4.5;

/// `∫_a^b f` by the tanh-sinh rule. `f` may be singular at the endpoints.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, level: u32) -> f64 {
    let h = 0.5f64.powi(level as i32);
    let half = 0.5 * (b - a);
    let kmax = (T_MAX / h).ceil() as i64;
    let mut sum = 0.0;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        // distance to the nearer endpoint, free of cancellation
        let gap = 2.0 * half / (1.0 + (2.0 * u.abs()).exp());
        if gap <= 0.0 {
            continue;
        }
        let x = if u < 0.0 { a + gap } else { b - gap };
        if x <= a || x >= b {
            continue;
        }
        let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if w == 0.0 {
            continue;
        }
        sum += w * f(x);
    }
    sum * half * h
}

/// `∫_0^∞ f` by the exp-sinh rule, with `f` given through its logarithm so
/// that large and tiny integrands stay representable.
pub fn exp_sinh_ln<F: Fn(f64) -> f64>(ln_f: F, level: u32) -> f64 {
    let h = 0.5f64.powi(level as i32);
    let kmax = (T_MAX / h).ceil() as i64;
    let mut sum = 0.0;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let s = FRAC_PI_2 * t.sinh();
        let ln_w = (FRAC_PI_2 * t.cosh()).ln() + s;
        let term = (ln_w + ln_f(s.exp())).exp();
        if term.is_finite() {
            sum += term;
        }
    }
    sum * h
}

/// Runs `rule(level)` for increasing levels until consecutive values agree to
/// `tol` relative. Returns `(value, level)`.
pub fn converge<F: Fn(u32) -> f64>(rule: F, tol: f64, min_level: u32, max_level: u32) -> Result<(f64, u32)> {
    let mut prev = rule(min_level);
    for level in min_level + 1..=max_level {
        let cur = rule(level);
        if (cur - prev).abs() <= tol * cur.abs() {
            return Ok((cur, level));
        }
        prev = cur;
    }
    Err(DunklError::QuadratureNotConverged(format!(
        "no agreement to {tol:e} by level {max_level}"
    )))
}
