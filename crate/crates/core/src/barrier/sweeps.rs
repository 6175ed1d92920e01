//! Seeded sweeps: sign certification of `Λ_w`, monotone envelopes along rays,
//! and the ratio of the kernel to its sharp envelope.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::envelope::{ln_envelope, rank1_window, WindowModel};
use super::{tilde_e, thresholds, Barrier, BarrierConfig, Convention};
use crate::error::{DunklError, Result};
use crate::kernel::{kernel_rank1, KernelEvaluator, SeriesOptions};
use crate::report::{CsvRow, SamplePoint, SweepReport, Violation};
use crate::root_system::{point, GroupElement, Point, RootSystem};
use crate::sampling::{indexed_rng, log_uniform, par_map_indexed, ChamberSampler};

/// Absolute slack on the sign of `Λ_w`.
pub const SIGN_SLACK: f64 = 1e-12;
/// Relative slack between consecutive grid points and at `t = 1`.
pub const MONOTONE_SLACK: f64 = 1e-9;
/// Tolerance for the closed forms of `Λ_w` against the general expression.
const SPECIALIZED_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignMode {
    /// `Λ_w ≥ 0`, `c ≤ c_minus`.
    Positive,
    /// `Λ_w ≤ 0`, `c ≥ c_plus`.
    Negative,
}

impl std::fmt::Display for SignMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SignMode::Positive => "positive",
            SignMode::Negative => "negative",
        })
    }
}

fn check_mode(rs: &RootSystem, cfg: &BarrierConfig, mode: SignMode) -> Result<()> {
    let t = thresholds(rs)?;
    let ok = match mode {
        SignMode::Positive => cfg.c <= t.c_minus * (1.0 + 1e-12),
        SignMode::Negative => cfg.c >= t.c_plus * (1.0 - 1e-12),
    };
    if ok {
        Ok(())
    } else {
        Err(DunklError::Precondition(format!(
            "{mode} mode needs c {} {}, got {}",
            if mode == SignMode::Positive { "≤" } else { "≥" },
            if mode == SignMode::Positive { t.c_minus } else { t.c_plus },
            cfg.c
        )))
    }
}

fn base_config(rs: &RootSystem) -> serde_json::Value {
    let (k0, k1) = rs.multiplicity().as_pair();
    json!({ "n": rs.n(), "kappa0": k0, "kappa1": k1 })
}

struct SignSample {
    x: Point,
    y: Point,
    lambdas: Vec<(GroupElement, f64)>,
    id_sigma: f64,
    id_product: f64,
    specialized: f64,
}

/// Evaluates `Λ_w`, `w ≠ Id`, on `count` sampled pairs and flags those with the
/// wrong sign for `mode`. No check on `c`; use [`certify_lambda_signs`] for that.
pub fn scan_lambda_signs(
    rs: &RootSystem,
    cfg: &BarrierConfig,
    mode: SignMode,
    sampler: &ChamberSampler,
    count: usize,
) -> Result<SweepReport> {
    let start = std::time::Instant::now();
    let product = BarrierConfig { convention: Convention::Product, ..*cfg };
    let sigma = BarrierConfig { convention: Convention::Sigma, ..*cfg };
    let samples: Vec<Result<SignSample>> = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let b = Barrier::new(rs, cfg, &x, &y)?;
        let lambdas = rs
            .elements()
            .filter(|w| !w.is_identity())
            .map(|w| (w, b.lambda(w)))
            .collect();
        let bs = Barrier::from_geometry(rs, b.geometry().clone(), Convention::Sigma);
        let specialized = rs
            .elements()
            .filter_map(|w| bs.specialized_residual(w))
            .fold(0.0, f64::max);
        Ok(SignSample {
            x,
            y,
            lambdas,
            id_sigma: Barrier::new(rs, &sigma, &x, &y)?.lambda(GroupElement::IDENTITY),
            id_product: Barrier::new(rs, &product, &x, &y)?.lambda(GroupElement::IDENTITY),
            specialized,
        })
    });

    let mut config = base_config(rs);
    config["c"] = json!(cfg.c);
    config["convention"] = json!(cfg.convention);
    config["mode"] = json!(mode);
    config["seed"] = json!(sampler.seed);
    config["r_min"] = json!(sampler.r_min);
    config["r_max"] = json!(sampler.r_max);
    let mut report = SweepReport::new("certify-signs", config);
    let mut id_sigma = 0.0f64;
    let (mut id_product_min, mut id_product_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut specialized = 0.0f64;
    for (i, s) in samples.into_iter().enumerate() {
        let s = s?;
        let at = SamplePoint::new(i as u64, &s.x, &s.y);
        report.samples += 1;
        for (w, v) in s.lambdas {
            report.observe(&w.to_string(), v, at);
            let bad = match mode {
                SignMode::Positive => v < -SIGN_SLACK,
                SignMode::Negative => v > SIGN_SLACK,
            };
            if bad {
                report.violate(Violation {
                    index: i as u64,
                    w: w.to_string(),
                    value: v,
                    x: at.x,
                    y: at.y,
                    detail: format!("Λ has the wrong sign for {mode} mode"),
                });
            }
        }
        id_sigma = id_sigma.max(s.id_sigma.abs());
        id_product_min = id_product_min.min(s.id_product);
        id_product_max = id_product_max.max(s.id_product);
        if s.specialized > SPECIALIZED_TOL {
            report.violate(Violation {
                index: i as u64,
                w: "all".into(),
                value: s.specialized,
                x: at.x,
                y: at.y,
                detail: "closed forms of Λ disagree with the general expression".into(),
            });
        }
        specialized = specialized.max(s.specialized);
    }
    report.summary.insert("lambda_id_sigma_max_abs".into(), id_sigma);
    report.summary.insert("lambda_id_product_min".into(), id_product_min);
    report.summary.insert("lambda_id_product_max".into(), id_product_max);
    report.summary.insert("specialized_max_residual".into(), specialized);
    match mode {
        SignMode::Positive => report.summary.insert("lambda_min".into(), report.min_over_w().unwrap_or(0.0)),
        SignMode::Negative => report.summary.insert("lambda_max".into(), report.max_over_w().unwrap_or(0.0)),
    };
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// [`scan_lambda_signs`] after checking that `c` sits on the right side of its threshold.
pub fn certify_lambda_signs(
    rs: &RootSystem,
    cfg: &BarrierConfig,
    mode: SignMode,
    sampler: &ChamberSampler,
    count: usize,
) -> Result<SweepReport> {
    check_mode(rs, cfg, mode)?;
    scan_lambda_signs(rs, cfg, mode, sampler, count)
}

/// One CSV row per `(sample, w ≠ Id)` with `value = Λ_w`.
pub fn lambda_sign_rows(rs: &RootSystem, cfg: &BarrierConfig, sampler: &ChamberSampler, count: usize) -> Result<Vec<CsvRow>> {
    let kappas = rs.multiplicity().as_pair();
    let per_sample: Vec<Result<Vec<CsvRow>>> = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let b = Barrier::new(rs, cfg, &x, &y)?;
        Ok(rs
            .elements()
            .filter(|w| !w.is_identity())
            .map(|w| CsvRow::new(rs.n(), kappas, Some(cfg.c), &x, &y, w.to_string(), b.lambda(w)))
            .collect())
    });
    let mut rows = Vec::new();
    for r in per_sample {
        rows.extend(r?);
    }
    Ok(rows)
}

/// `M(t) = max_w Ẽ_w(tx, y)` and `m(t) = min_w Ẽ_w(tx, y)` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneScan {
    pub t: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// Largest `M(t_{i+1})/M(t_i) - 1`.
    pub max_upper_increase: f64,
    /// Largest `1 - m(t_{i+1})/m(t_i)`.
    pub max_lower_decrease: f64,
    /// `Some` when `c` is at or beyond one of the thresholds.
    pub verdict: Option<bool>,
}

impl MonotoneScan {
    pub fn upper_nonincreasing(&self) -> bool {
        self.max_upper_increase <= MONOTONE_SLACK
    }

    pub fn lower_nondecreasing(&self) -> bool {
        self.max_lower_decrease <= MONOTONE_SLACK
    }
}

/// Scans `t ↦ Ẽ_w(tx, y)` over `t_grid` (assumed increasing).
pub fn monotone_envelope_scan(
    ev: &KernelEvaluator,
    cfg: &BarrierConfig,
    x: &Point,
    y: &Point,
    t_grid: &[f64],
) -> Result<MonotoneScan> {
    let rs = ev.root_system();
    let mut upper = Vec::with_capacity(t_grid.len());
    let mut lower = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let v = tilde_e(ev, cfg, &(x * t), y)?;
        upper.push(v.max());
        lower.push(v.min());
    }
    let steps = |s: &[f64], f: fn(f64, f64) -> f64| s.windows(2).map(|p| f(p[0], p[1])).fold(0.0, f64::max);
    let max_upper_increase = steps(&upper, |a, b| b / a - 1.0);
    let max_lower_decrease = steps(&lower, |a, b| 1.0 - b / a);
    let t = thresholds(rs)?;
    let mut scan = MonotoneScan {
        t: t_grid.to_vec(),
        upper,
        lower,
        max_upper_increase,
        max_lower_decrease,
        verdict: None,
    };
    if cfg.c <= t.c_minus * (1.0 + 1e-12) {
        scan.verdict = Some(scan.upper_nonincreasing());
    } else if cfg.c >= t.c_plus * (1.0 - 1e-12) {
        scan.verdict = Some(scan.lower_nondecreasing());
    }
    Ok(scan)
}

struct RaySample {
    x: Point,
    y: Point,
    scan: MonotoneScan,
    at_one: Vec<(GroupElement, f64)>,
}

/// `rays` seeded rays with `points` grid points on `[0, t_max]`, plus the
/// endpoint check `M(1) ≤ 1` (positive mode) or `m(1) ≥ 1` (negative mode).
///
/// Radii are drawn from `[1e-2, min(10, √(100/t_max))]` so the whole ray stays
/// inside the evaluator's domain guard.
pub fn monotone_sweep(
    ev: &KernelEvaluator,
    cfg: &BarrierConfig,
    mode: SignMode,
    seed: u64,
    rays: usize,
    points: usize,
    t_max: f64,
) -> Result<SweepReport> {
    let rs = ev.root_system();
    check_mode(rs, cfg, mode)?;
    if points < 2 || !(t_max > 0.0) {
        return Err(DunklError::Precondition("need at least two grid points and t_max > 0".into()));
    }
    let start = std::time::Instant::now();
    let guard = SeriesOptions::default().max_norm_product;
    let r_max = (guard / t_max).sqrt().min(10.0);
    let sampler = ChamberSampler::new(rs, seed, 1e-2, r_max)?;
    let grid: Vec<f64> = (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect();
    let samples: Vec<Result<RaySample>> = par_map_indexed(rays, |i| {
        let (x, y) = sampler.pair(i);
        let scan = monotone_envelope_scan(ev, cfg, &x, &y, &grid)?;
        let one = tilde_e(ev, cfg, &x, &y)?;
        Ok(RaySample {
            x,
            y,
            scan,
            at_one: one.elements.into_iter().zip(one.values).collect(),
        })
    });

    let mut config = base_config(rs);
    config["c"] = json!(cfg.c);
    config["convention"] = json!(cfg.convention);
    config["mode"] = json!(mode);
    config["seed"] = json!(seed);
    config["rays"] = json!(rays);
    config["points"] = json!(points);
    config["t_max"] = json!(t_max);
    config["r_max"] = json!(r_max);
    let mut report = SweepReport::new("monotone", config);
    let mut worst_step = 0.0f64;
    let mut endpoint = match mode {
        SignMode::Positive => f64::NEG_INFINITY,
        SignMode::Negative => f64::INFINITY,
    };
    for (i, s) in samples.into_iter().enumerate() {
        let s = s?;
        let at = SamplePoint::new(i as u64, &s.x, &s.y);
        report.samples += 1;
        let (step, label) = match mode {
            SignMode::Positive => (s.scan.max_upper_increase, "M"),
            SignMode::Negative => (s.scan.max_lower_decrease, "m"),
        };
        worst_step = worst_step.max(step);
        if step > MONOTONE_SLACK {
            report.violate(Violation {
                index: i as u64,
                w: label.into(),
                value: step,
                x: at.x,
                y: at.y,
                detail: format!("{label} is not monotone along the ray"),
            });
        }
        for (w, v) in s.at_one {
            report.observe(&w.to_string(), v, at);
            let bad = match mode {
                SignMode::Positive => v > 1.0 + MONOTONE_SLACK,
                SignMode::Negative => v < 1.0 - MONOTONE_SLACK,
            };
            endpoint = match mode {
                SignMode::Positive => endpoint.max(v),
                SignMode::Negative => endpoint.min(v),
            };
            if bad {
                report.violate(Violation {
                    index: i as u64,
                    w: w.to_string(),
                    value: v,
                    x: at.x,
                    y: at.y,
                    detail: "endpoint bound at t = 1 fails".into(),
                });
            }
        }
    }
    report.summary.insert("worst_relative_step".into(), worst_step);
    report.summary.insert(
        match mode {
            SignMode::Positive => "max_tilde_at_one",
            SignMode::Negative => "min_tilde_at_one",
        }
        .into(),
        endpoint,
    );
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

struct RatioSample {
    x: Point,
    y: Point,
    /// `(w, E(x, w.y), envelope, ratio)`.
    rows: Vec<(GroupElement, f64, f64, f64)>,
}

fn ratio_samples(ev: &KernelEvaluator, sampler: &ChamberSampler, count: usize) -> Vec<Result<RatioSample>> {
    let rs = ev.root_system();
    par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let kv = ev.evaluate(&x, &y)?;
        let rows = rs
            .elements()
            .map(|w| {
                let ln_env = ln_envelope(rs, &x, &y, w)?;
                Ok((w, kv.get(w), ln_env.exp(), (kv.ln(w) - ln_env).exp()))
            })
            .collect::<Result<_>>()?;
        Ok(RatioSample { x, y, rows })
    })
}

/// `E(x, w.y) / envelope(x, y, w)` over `count` sampled pairs. Each ratio is
/// checked against the per-`w` bounds of [`WindowModel`], and the observed
/// window `max/min` against its theoretical value.
pub fn ratio_sweep(ev: &KernelEvaluator, sampler: &ChamberSampler, count: usize) -> Result<SweepReport> {
    let start = std::time::Instant::now();
    let rs = ev.root_system();
    let model = WindowModel::new(rs)?;
    let samples = ratio_samples(ev, sampler, count);

    let mut config = base_config(rs);
    config["seed"] = json!(sampler.seed);
    config["r_min"] = json!(sampler.r_min);
    config["r_max"] = json!(sampler.r_max);
    config["c_minus"] = json!(model.c_minus);
    config["c_plus"] = json!(model.c_plus);
    let mut report = SweepReport::new("envelope-ratio", config);
    for (i, s) in samples.into_iter().enumerate() {
        let s = s?;
        let at = SamplePoint::new(i as u64, &s.x, &s.y);
        report.samples += 1;
        for (w, _, _, ratio) in s.rows {
            report.observe(&w.to_string(), ratio, at);
            let (lo, hi) = model.ratio_bounds(w);
            if !(ratio >= lo * (1.0 - MONOTONE_SLACK) && ratio <= hi * (1.0 + MONOTONE_SLACK)) {
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
    let mut worst = 0.0f64;
    for w in rs.elements() {
        if let Some(stats) = report.per_w.get_mut(&w.to_string()) {
            let theory = model.window(w);
            stats.theoretical_window = Some(theory);
            let observed = stats.window.unwrap_or(f64::INFINITY);
            worst = worst.max(observed / theory);
            if observed > theory {
                report.passed = false;
            }
        }
    }
    report.summary.insert("max_observed_over_theoretical".into(), worst);
    report.summary.insert(
        "max_observed_window".into(),
        report.per_w.values().filter_map(|s| s.window).fold(0.0, f64::max),
    );
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The rows behind [`ratio_sweep`], for CSV output.
pub fn ratio_sweep_rows(ev: &KernelEvaluator, sampler: &ChamberSampler, count: usize) -> Result<Vec<CsvRow>> {
    let rs = ev.root_system();
    let kappas = rs.multiplicity().as_pair();
    let mut out = Vec::with_capacity(count * rs.order());
    for s in ratio_samples(ev, sampler, count) {
        let s = s?;
        for (w, value, env, ratio) in s.rows {
            let mut row = CsvRow::new(rs.n(), kappas, None, &s.x, &s.y, w.to_string(), value);
            row.envelope = Some(env);
            row.ratio = Some(ratio);
            out.push(row);
        }
    }
    Ok(out)
}

/// The rank-one bound: `E(x, y)(1+xy)^κ e^{-xy}` (`"+"`) and
/// `E(x, -y)(1+xy)^{κ+1} e^{-xy}` (`"-"`) for `x, y` log-uniform in `[1e-2, r_max]`.
pub fn rank1_ratio_sweep(kappa: f64, seed: u64, count: usize, r_max: f64) -> Result<SweepReport> {
    let start = std::time::Instant::now();
    let (id_window, s_window) = rank1_window(kappa)?;
    if !(r_max > 1e-2) {
        return Err(DunklError::Precondition(format!("r_max = {r_max} must exceed 1e-2")));
    }
    let opts = SeriesOptions::default();
    let samples: Vec<Result<(f64, f64, f64, f64)>> = par_map_indexed(count, |i| {
        let mut rng = indexed_rng(seed, i);
        let x = log_uniform(&mut rng, 1e-2, r_max);
        let y = log_uniform(&mut rng, 1e-2, r_max);
        let (plus, minus) = kernel_rank1(kappa, x, y, &opts)?;
        let xy = x * y;
        let l = xy.ln_1p();
        Ok((
            x,
            y,
            (plus.ln() + kappa * l - xy).exp(),
            (minus.ln() + (kappa + 1.0) * l - xy).exp(),
        ))
    });
    let mut report = SweepReport::new(
        "rank1-ratio",
        json!({ "kappa": kappa, "seed": seed, "count": count, "r_min": 1e-2, "r_max": r_max }),
    );
    for (i, s) in samples.into_iter().enumerate() {
        let (x, y, p, m) = s?;
        let at = SamplePoint::new(i as u64, &point(x, 0.0), &point(y, 0.0));
        report.samples += 1;
        report.observe("+", p, at);
        report.observe("-", m, at);
    }
    report.fill_windows();
    for (label, theory) in [("+", id_window), ("-", s_window)] {
        if let Some(stats) = report.per_w.get_mut(label) {
            stats.theoretical_window = Some(theory);
            if stats.window.unwrap_or(f64::INFINITY) > theory {
                report.passed = false;
            }
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
