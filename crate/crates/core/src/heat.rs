//! The Dunkl heat kernel
//! `h(t; x, y) = exp(-(‖x‖² + ‖y‖²)/4t) E(x/√2t, y/√2t) / (c_k (2t)^{γ + N/2})`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::barrier::{ln_envelope, WindowModel};
use crate::error::{DunklError, Result};
use crate::kernel::{kernel_rank1, KernelEvaluator, SeriesOptions};
use crate::quadrature::{converge, exp_sinh_ln, tanh_sinh};
use crate::report::{SamplePoint, SweepReport, Violation};
use crate::root_system::{point, GroupElement, Point, RootSystem};
use crate::sampling::{par_map_indexed, ChamberSampler};

/// Relative tolerance used by [`HeatConfig::new`].
pub const MEHTA_TOL: f64 = 1e-10;
const MIN_LEVEL: u32 = 2;
const MAX_LEVEL: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatConfig {
    /// `∫ e^{-‖x‖²/2} ∏ |⟨α,x⟩|^{2κ(α)} dx`.
    pub ck: f64,
    pub gamma: f64,
    pub dim: usize,
}

impl HeatConfig {
    /// The normalization computed by quadrature.
    pub fn new(rs: &RootSystem) -> Result<Self> {
        Self::with_constant(rs, mehta_constant(rs, MEHTA_TOL)?)
    }

    /// A user-supplied normalization.
    pub fn with_constant(rs: &RootSystem, ck: f64) -> Result<Self> {
        if !(ck > 0.0) || !ck.is_finite() {
            return Err(DunklError::Precondition(format!("c_k must be positive, got {ck}")));
        }
        Ok(HeatConfig {
            ck,
            gamma: rs.gamma(),
            dim: 2,
        })
    }

    /// The rank-one configuration, `N = 1`, `γ = κ`.
    pub fn rank1(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(DunklError::NonPositiveMultiplicity(kappa));
        }
        Ok(HeatConfig {
            ck: mehta_constant_rank1(kappa, MEHTA_TOL)?,
            gamma: kappa,
            dim: 1,
        })
    }

    fn ln_prefactor(&self, t: f64) -> f64 {
        -self.ck.ln() - (self.gamma + 0.5 * self.dim as f64) * (2.0 * t).ln()
    }
}

/// `∫_0^∞ r^{2γ+1} e^{-r²/2} dr` at one level.
fn radial_part(gamma: f64, level: u32) -> f64 {
    exp_sinh_ln(|r| (2.0 * gamma + 1.0) * r.ln() - 0.5 * r * r, level)
}

/// The angular factor `∫_0^{2π} ∏_j |cos(θ - πj/n)|^{2κ_j} dθ`, as `2n` times
/// the integral over the chamber.
fn angular_part(rs: &RootSystem, level: u32) -> f64 {
    let n = rs.n();
    let a = 0.5 * PI - PI / n as f64;
    let chamber = tanh_sinh(
        |theta| {
            let ln: f64 = (0..n)
                .map(|j| 2.0 * rs.kappa(j) * (theta - PI * j as f64 / n as f64).cos().abs().ln())
                .sum();
            ln.exp()
        },
        a,
        0.5 * PI,
        level,
    );
    2.0 * n as f64 * chamber
}

/// `c_k` at a fixed quadrature level, for self-convergence checks.
pub fn mehta_constant_at_level(rs: &RootSystem, level: u32) -> f64 {
    radial_part(rs.gamma(), level) * angular_part(rs, level)
}

/// `c_k = ∫_{ℝ²} e^{-‖x‖²/2} ∏ |⟨α,x⟩|^{2κ(α)} dx` in polar coordinates, each
/// factor refined until two levels agree to `tol`.
pub fn mehta_constant(rs: &RootSystem, tol: f64) -> Result<f64> {
    let (radial, _) = converge(|l| radial_part(rs.gamma(), l), tol, MIN_LEVEL, MAX_LEVEL)?;
    let (angular, _) = converge(|l| angular_part(rs, l), tol, MIN_LEVEL, MAX_LEVEL)?;
    Ok(radial * angular)
}

/// `∫_ℝ e^{-x²/2} |x|^{2κ} dx`.
pub fn mehta_constant_rank1(kappa: f64, tol: f64) -> Result<f64> {
    let (v, _) = converge(|l| 2.0 * exp_sinh_ln(|r| 2.0 * kappa * r.ln() - 0.5 * r * r, l), tol, MIN_LEVEL, MAX_LEVEL)?;
    Ok(v)
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(DunklError::Precondition(format!("t must be positive, got {t}")))
    }
}

pub fn ln_heat(ev: &KernelEvaluator, hc: &HeatConfig, t: f64, x: &Point, y: &Point) -> Result<f64> {
    check_time(t)?;
    let s = (2.0 * t).sqrt();
    let gauss = (x.norm_squared() + y.norm_squared()) / (4.0 * t);
    Ok(hc.ln_prefactor(t) - gauss + ev.ln_kernel(&(x / s), &(y / s))?)
}

/// `h(t; x, y)` for arbitrary `x, y`.
pub fn heat(ev: &KernelEvaluator, hc: &HeatConfig, t: f64, x: &Point, y: &Point) -> Result<f64> {
    Ok(ln_heat(ev, hc, t, x, y)?.exp())
}

/// The rank-one heat kernel at real `x, y`.
pub fn heat_rank1(kappa: f64, hc: &HeatConfig, t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    let s = (2.0 * t).sqrt();
    let (plus, minus) = kernel_rank1(kappa, x.abs() / s, y.abs() / s, &SeriesOptions::default())?;
    let e = if x * y >= 0.0 { plus } else { minus };
    Ok((hc.ln_prefactor(t) - (x * x + y * y) / (4.0 * t)).exp() * e)
}

/// The terms of the heat equation at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatResidual {
    pub dt: f64,
    pub laplacian: f64,
    pub drift: f64,
    pub difference: f64,
    /// `|∂_t h - Δ_k h|` over the largest term magnitude.
    pub residual: f64,
    pub spatial_step: f64,
    pub time_step: f64,
}

/// Checks `∂_t h = Δh + Σ_α κ(α){2⟨α,∇h⟩/⟨α,x⟩ + (h(s_α x) - h(x))/⟨α,x⟩²}`
/// with central differences in `t` and `x` and the reflected values exactly.
///
/// The spatial step is `h_step √(2t) / max(1, ‖y‖/√(2t))` and the time step
/// `h_step t`; `x` must stay two spatial steps away from every mirror.
pub fn heat_equation_residual(
    ev: &KernelEvaluator,
    hc: &HeatConfig,
    t: f64,
    x: &Point,
    y: &Point,
    h_step: f64,
) -> Result<HeatResidual> {
    check_time(t)?;
    if !(h_step > 0.0 && h_step <= 0.1) {
        return Err(DunklError::Precondition(format!("h_step = {h_step} outside (0, 0.1]")));
    }
    let rs = ev.root_system();
    let scale = (2.0 * t).sqrt();
    let hs = h_step * scale / (y.norm() / scale).max(1.0);
    let dt_step = h_step * t;
    for m in 0..rs.n() {
        if rs.root(m).dot(x).abs() <= 2.0 * hs {
            return Err(DunklError::Precondition(format!(
                "x lies within two spatial steps of the mirror of α_{m}"
            )));
        }
    }
    let f = |tt: f64, p: &Point| heat(ev, hc, tt, p, y);
    let h0 = f(t, x)?;
    let dt = (f(t + dt_step, x)? - f(t - dt_step, x)?) / (2.0 * dt_step);
    let ex = point(hs, 0.0);
    let ey = point(0.0, hs);
    let (xp, xm) = (f(t, &(x + ex))?, f(t, &(x - ex))?);
    let (yp, ym) = (f(t, &(x + ey))?, f(t, &(x - ey))?);
    let laplacian = (xp + xm + yp + ym - 4.0 * h0) / (hs * hs);
    let grad = point((xp - xm) / (2.0 * hs), (yp - ym) / (2.0 * hs));
    let mut drift = 0.0;
    let mut difference = 0.0;
    let mut magnitude = dt.abs().max(laplacian.abs());
    for m in 0..rs.n() {
        let alpha = rs.root(m);
        let ax = alpha.dot(x);
        let k = rs.kappa(m);
        let d = k * 2.0 * alpha.dot(&grad) / ax;
        let reflected = f(t, &rs.apply(rs.reflection_for_root(m), x))?;
        let r = k * (reflected - h0) / (ax * ax);
        magnitude = magnitude.max(d.abs()).max(r.abs());
        drift += d;
        difference += r;
    }
    let residual = (dt - laplacian - drift - difference).abs() / magnitude;
    Ok(HeatResidual {
        dt,
        laplacian,
        drift,
        difference,
        residual,
        spatial_step: hs,
        time_step: dt_step,
    })
}

/// Residual tolerance at the tuned step.
pub const HEAT_RESIDUAL_TOL: f64 = 1e-4;
/// Steps used to estimate the order of the difference scheme.
const ORDER_STEPS: (f64, f64) = (4e-2, 2e-2);

/// [`heat_equation_residual`] at `count` interior pairs, with `‖x‖ ≥ 1.5√(2t)`: the residual at
/// `h_step`, and the observed order `log2(r(4e-2)/r(2e-2))`, expected near 2.
pub fn heat_residual_sweep(
    ev: &KernelEvaluator,
    hc: &HeatConfig,
    t: f64,
    sampler: &ChamberSampler,
    count: usize,
    h_step: f64,
) -> Result<SweepReport> {
    check_time(t)?;
    let start = std::time::Instant::now();
    let rs = ev.root_system();
    let samples: Vec<Result<(Point, Point, f64, f64)>> = par_map_indexed(count, |i| {
        let (x, y) = sampler.interior_pair(i, 0.25);
        // keep the coarse stencil clear of the mirrors
        let x = x * (x.norm().max(1.5 * (2.0 * t).sqrt()) / x.norm());
        let r = heat_equation_residual(ev, hc, t, &x, &y, h_step)?.residual;
        let coarse = heat_equation_residual(ev, hc, t, &x, &y, ORDER_STEPS.0)?.residual;
        let fine = heat_equation_residual(ev, hc, t, &x, &y, ORDER_STEPS.1)?.residual;
        Ok((x, y, r, (coarse / fine).log2()))
    });
    let (k0, k1) = rs.multiplicity().as_pair();
    let config = json!({
        "n": rs.n(), "kappa0": k0, "kappa1": k1, "t": t, "h_step": h_step, "ck": hc.ck,
        "seed": sampler.seed, "r_min": sampler.r_min, "r_max": sampler.r_max,
    });
    let mut report = SweepReport::new("heat-residual", config);
    for (i, sample) in samples.into_iter().enumerate() {
        let (x, y, r, order) = sample?;
        let at = SamplePoint::new(i as u64, &x, &y);
        report.samples += 1;
        report.observe("residual", r, at);
        report.observe("order", order, at);
        for (label, value, ok) in [
            ("residual", r, r < HEAT_RESIDUAL_TOL),
            ("order", order, (1.5..=2.5).contains(&order)),
        ] {
            if !ok {
                report.violate(Violation {
                    index: i as u64,
                    w: label.into(),
                    value,
                    x: at.x,
                    y: at.y,
                    detail: format!("heat equation {label} out of range"),
                });
            }
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The envelope of `h(t; x, w.y)` obtained by substituting the kernel envelope
/// at `x/√2t, y/√2t`. `x, y` in the closed chamber.
pub fn ln_heat_envelope(rs: &RootSystem, hc: &HeatConfig, t: f64, x: &Point, y: &Point, w: GroupElement) -> Result<f64> {
    check_time(t)?;
    let s = (2.0 * t).sqrt();
    let gauss = (x.norm_squared() + y.norm_squared()) / (4.0 * t);
    Ok(hc.ln_prefactor(t) - gauss + ln_envelope(rs, &(x / s), &(y / s), w)?)
}

pub fn heat_envelope(rs: &RootSystem, hc: &HeatConfig, t: f64, x: &Point, y: &Point, w: GroupElement) -> Result<f64> {
    Ok(ln_heat_envelope(rs, hc, t, x, y, w)?.exp())
}

/// `h(t; x, w.y) / heat_envelope(t, x, y, w)` over `count` pairs drawn from
/// `sampler` and scaled by `√(2t)`, checked against the kernel window.
pub fn heat_envelope_sweep(
    ev: &KernelEvaluator,
    hc: &HeatConfig,
    t: f64,
    sampler: &ChamberSampler,
    count: usize,
) -> Result<SweepReport> {
    check_time(t)?;
    let start = std::time::Instant::now();
    let rs = ev.root_system();
    let model = WindowModel::new(rs)?;
    let s = (2.0 * t).sqrt();
    let samples: Vec<Result<(Point, Point, Vec<(GroupElement, f64)>)>> = par_map_indexed(count, |i| {
        let (x0, y0) = sampler.pair(i);
        let (x, y) = (x0 * s, y0 * s);
        let ratios = rs
            .elements()
            .map(|w| {
                let num = ln_heat(ev, hc, t, &x, &rs.apply(w, &y))?;
                Ok((w, (num - ln_heat_envelope(rs, hc, t, &x, &y, w)?).exp()))
            })
            .collect::<Result<_>>()?;
        Ok((x, y, ratios))
    });
    let (k0, k1) = rs.multiplicity().as_pair();
    let config = json!({
        "n": rs.n(), "kappa0": k0, "kappa1": k1, "t": t, "ck": hc.ck,
        "seed": sampler.seed, "r_min": sampler.r_min * s, "r_max": sampler.r_max * s,
    });
    let mut report = SweepReport::new("heat-envelope", config);
    for (i, sample) in samples.into_iter().enumerate() {
        let (x, y, ratios) = sample?;
        let at = SamplePoint::new(i as u64, &x, &y);
        report.samples += 1;
        for (w, ratio) in ratios {
            report.observe(&w.to_string(), ratio, at);
            let (lo, hi) = model.ratio_bounds(w);
            if !(ratio >= lo * (1.0 - 1e-9) && ratio <= hi * (1.0 + 1e-9)) {
                report.violate(Violation {
                    index: i as u64,
                    w: w.to_string(),
                    value: ratio,
                    x: at.x,
                    y: at.y,
                    detail: format!("ratio outside [{lo:e}, {hi:e}]"),
                });
            }
        }
    }
    report.fill_windows();
    for w in rs.elements() {
        if let Some(stats) = report.per_w.get_mut(&w.to_string()) {
            let theory = model.window(w);
            stats.theoretical_window = Some(theory);
            if stats.window.unwrap_or(f64::INFINITY) > theory {
                report.passed = false;
            }
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::Multiplicity;
    use statrs::function::gamma::gamma;

    fn macdonald_mehta(n: usize, k: f64) -> f64 {
        2.0 * PI * 2f64.powf(-(n as f64) * k) * gamma(1.0 + 2.0 * k) * gamma(1.0 + n as f64 * k) / gamma(1.0 + k).powi(2)
    }

    #[test]
    fn mehta_constant_matches_closed_form() {
        for n in 3..=6 {
            for k in [0.5, 1.0, 2.5] {
                let m = if n % 2 == 0 { Multiplicity::Pair(k, k) } else { Multiplicity::Uniform(k) };
                let rs = RootSystem::dihedral(n, m).unwrap();
                let v = mehta_constant(&rs, 1e-10).unwrap();
                let exact = macdonald_mehta(n, k);
                assert!((v / exact - 1.0).abs() < 1e-9, "n={n} k={k}: {v} vs {exact}");
            }
        }
        let rs = RootSystem::dihedral_nonnegative(4, Multiplicity::Pair(0.0, 0.0)).unwrap();
        assert!((mehta_constant(&rs, 1e-12).unwrap() / (2.0 * PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mehta_self_convergence() {
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(0.5, 2.0)).unwrap();
        let a = mehta_constant_at_level(&rs, 6);
        let b = mehta_constant_at_level(&rs, 7);
        assert!((a / b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rank1_constant() {
        for k in [0.0, 0.5, 1.0, 2.5] {
            let v = mehta_constant_rank1(k, 1e-12).unwrap();
            let exact = 2f64.powf(k + 0.5) * gamma(k + 0.5);
            assert!((v / exact - 1.0).abs() < 1e-11, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn free_heat_kernel() {
        let rs = RootSystem::dihedral_nonnegative(3, Multiplicity::Uniform(0.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let hc = HeatConfig::new(&rs).unwrap();
        let (x, y, t) = (point(0.3, 1.1), point(-0.4, 0.8), 0.7);
        let exact = (-(x - y).norm_squared() / (4.0 * t)).exp() / (4.0 * PI * t);
        assert!((heat(&ev, &hc, t, &x, &y).unwrap() / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_and_positive() {
        let rs = RootSystem::dihedral(5, Multiplicity::Uniform(1.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let hc = HeatConfig::new(&rs).unwrap();
        let s = ChamberSampler::new(&rs, 3, 0.1, 3.0).unwrap();
        for i in 0..50 {
            let (x, y) = s.pair(i);
            let y = rs.apply(GroupElement::Rotation(2), &y);
            for t in [0.1, 1.0, 10.0] {
                let a = heat(&ev, &hc, t, &x, &y).unwrap();
                let b = heat(&ev, &hc, t, &y, &x).unwrap();
                assert!(a > 0.0);
                assert!((a / b - 1.0).abs() < 1e-10);
            }
        }
        assert!(heat(&ev, &hc, 0.0, &point(0.1, 1.0), &point(0.1, 1.0)).is_err());
    }

    #[test]
    fn scaling_route_agrees() {
        // E(λx, y) = E(x, λy): put the whole scale on one argument
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(1.0, 0.5)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let hc = HeatConfig::new(&rs).unwrap();
        let (x, y, t) = (point(0.5, 1.4), point(0.2, 0.9), 0.3);
        let direct = ln_heat(&ev, &hc, t, &x, &y).unwrap();
        let s = 2.0 * t;
        let other = hc.ln_prefactor(t) - (x.norm_squared() + y.norm_squared()) / (4.0 * t) + ev.ln_kernel(&(x / s), &y).unwrap();
        assert!((direct - other).abs() < 1e-10);
    }

    #[test]
    fn pde_residual_and_order() {
        for rs in [
            RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap(),
            RootSystem::dihedral(4, Multiplicity::Pair(0.5, 2.0)).unwrap(),
            RootSystem::dihedral_nonnegative(3, Multiplicity::Uniform(0.0)).unwrap(),
        ] {
            let ev = KernelEvaluator::new(&rs);
            let hc = HeatConfig::new(&rs).unwrap();
            let s = ChamberSampler::new(&rs, 8, 0.3, 2.0).unwrap();
            for i in 0..10 {
                let (x, y) = s.interior_pair(i, 0.2);
                let r = heat_equation_residual(&ev, &hc, 0.5, &x, &y, 1e-3).unwrap();
                assert!(r.residual < 1e-4, "{r:?}");
                let coarse = heat_equation_residual(&ev, &hc, 0.5, &x, &y, 4e-2).unwrap();
                let fine = heat_equation_residual(&ev, &hc, 0.5, &x, &y, 2e-2).unwrap();
                let ratio = coarse.residual / fine.residual;
                assert!(ratio > 3.0 && ratio < 5.0, "order ratio {ratio}");
            }
        }
    }

    #[test]
    fn residual_sweep_passes() {
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(1.0, 2.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let hc = HeatConfig::new(&rs).unwrap();
        let s = ChamberSampler::new(&rs, 2, 0.2, 2.0).unwrap();
        let r = heat_residual_sweep(&ev, &hc, 1.0, &s, 20, 1e-3).unwrap();
        assert!(r.passed, "{:?}", r.violations);
    }

    #[test]
    fn rank1_heat_matches_free_case() {
        let hc = HeatConfig::rank1(0.0).unwrap();
        let (x, y, t): (f64, f64, f64) = (0.4, -1.1, 0.6);
        let exact = (-(x - y) * (x - y) / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
        assert!((heat_rank1(0.0, &hc, t, x, y).unwrap() / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heat_envelope_window() {
        let rs = RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let hc = HeatConfig::new(&rs).unwrap();
        let s = ChamberSampler::new(&rs, 5, 1e-2, 8.0).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let r = heat_envelope_sweep(&ev, &hc, t, &s, 100).unwrap();
            assert!(r.passed, "{t}: {:?}", r.violations);
        }
    }
}
