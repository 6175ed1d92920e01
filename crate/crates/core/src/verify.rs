//! Seeded sweeps over the algebraic identities, the exponential sums and the
//! kernel evaluator. Each returns a [`SweepReport`] that fails on the first
//! residual above its tolerance.

use serde_json::json;

use crate::barrier::{check_lemma_b, check_lemma_tilde};
use crate::error::Result;
use crate::expsum::{compare, verify_ikl_vanishing, ExpSumQuery, ExpSumReducer, ExpSumRow};
use crate::kernel::{KernelEvaluator, OdeOptions, SeriesShift};
use crate::quantities::{
    comparability_constants, find_dominating_sigma, verify_dr_ds, verify_esp_identity, PairGeometry, QuantityKind,
};
use crate::report::{SamplePoint, SweepReport, Violation};
use crate::root_system::{point, GroupElement, Point, RootSystem};
use crate::sampling::{indexed_rng, par_map_indexed, ChamberSampler};

/// Tolerance for the algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Series against the ODE integration.
pub const ODE_TOL: f64 = 1e-8;
/// `E(x, y)` against `E(y, x)`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Finite-difference eigenvalue residual.
pub const EIGEN_TOL: f64 = 1e-5;
/// Coefficient bound `‖a_k‖∞ ≤ C^k/k!` up to this relative slack.
pub const DECAY_SLACK: f64 = 1e-9;

fn base_config(rs: &RootSystem, sampler: &ChamberSampler, count: usize) -> serde_json::Value {
    let (k0, k1) = rs.multiplicity().as_pair();
    json!({
        "n": rs.n(), "kappa0": k0, "kappa1": k1, "seed": sampler.seed,
        "samples": count, "r_min": sampler.r_min, "r_max": sampler.r_max,
    })
}

/// Per-sample list of `(label, value, tolerance check passed, detail)`.
type Checks = Vec<(String, f64, bool, &'static str)>;

/// Folds per-sample checks into a report, in index order.
fn collect(name: &str, config: serde_json::Value, samples: Vec<Result<(Point, Point, Checks)>>) -> Result<SweepReport> {
    let start = std::time::Instant::now();
    let mut report = SweepReport::new(name, config);
    for (i, s) in samples.into_iter().enumerate() {
        let (x, y, checks) = s?;
        let at = SamplePoint::new(i as u64, &x, &y);
        report.samples += 1;
        for (label, value, ok, detail) in checks {
            report.observe(&label, value, at);
            if !ok {
                report.violate(Violation {
                    index: i as u64,
                    w: label,
                    value,
                    x: at.x,
                    y: at.y,
                    detail: detail.into(),
                });
            }
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `e_k(ρ) = e_k(σ)`, `e_n(ρ) = 0`, `e_n(σ) = 𝔖` and the dropped-`ρ_0` identities.
pub fn esp_sweep(rs: &RootSystem, sampler: &ChamberSampler, count: usize) -> Result<SweepReport> {
    let samples = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let r = verify_esp_identity(rs, &x, &y)?.max_residual();
        let checks: Checks = vec![("max_residual".into(), r, r < IDENTITY_TOL, "symmetric function identity fails")];
        Ok((x, y, checks))
    });
    collect("lemmas-esp", base_config(rs, sampler, count), samples)
}

/// `D_R = D_S - cⁿ𝔖` and `D_R 𝔇_R = D_S 𝔇_S` at every `c` in `cs`.
pub fn drds_sweep(rs: &RootSystem, sampler: &ChamberSampler, count: usize, cs: &[f64]) -> Result<SweepReport> {
    let samples = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let mut checks: Checks = Vec::new();
        for &c in cs {
            let r = verify_dr_ds(rs, &x, &y, c)?.max_residual();
            checks.push((format!("c={c}"), r, r < IDENTITY_TOL, "D_R/D_S identity fails"));
        }
        Ok((x, y, checks))
    });
    let mut config = base_config(rs, sampler, count);
    config["c"] = json!(cs);
    collect("lemmas-drds", config, samples)
}

/// The closed form of `B_j` and `2^{1-n} ≤ C_j ≤ n + 1`.
pub fn lemma_b_sweep(rs: &RootSystem, sampler: &ChamberSampler, count: usize, cs: &[f64]) -> Result<SweepReport> {
    let samples = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let mut checks: Checks = Vec::new();
        for &c in cs {
            let g = PairGeometry::new(rs, &x, &y, c)?;
            for j in 0..rs.n() {
                let r = check_lemma_b(&g, j);
                checks.push(("residual".into(), r.residual, r.residual < IDENTITY_TOL, "B_j closed form fails"));
                checks.push(("C_j".into(), r.c_j, r.bounds_hold, "C_j outside its bounds"));
            }
        }
        Ok((x, y, checks))
    });
    let mut config = base_config(rs, sampler, count);
    config["c"] = json!(cs);
    collect("lemmas-lemma-b", config, samples)
}

/// The closed forms of `Ã_j`, `B̃_j` and `1 ≤ 𝔇_R ≤ n`.
pub fn lemma_tilde_sweep(rs: &RootSystem, sampler: &ChamberSampler, count: usize, cs: &[f64]) -> Result<SweepReport> {
    let samples = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let mut checks: Checks = Vec::new();
        for &c in cs {
            let g = PairGeometry::new(rs, &x, &y, c)?;
            for j in 1..rs.n() {
                let r = check_lemma_tilde(&g, j)?;
                checks.push(("residual".into(), r.residual, r.residual < IDENTITY_TOL, "Ã_j or B̃_j closed form fails"));
                checks.push(("frak_dr".into(), r.frak_dr, r.bounds_hold, "𝔇_R outside [1, n]"));
            }
        }
        Ok((x, y, checks))
    });
    let mut config = base_config(rs, sampler, count);
    config["c"] = json!(cs);
    collect("lemmas-lemma-tilde", config, samples)
}

/// Facts about `ρ_j` and `σ_j`: nonnegativity, the dominating `σ_k`, both
/// forms of `ρ_1` and `ρ_{n-1}` through `r̃`, and the comparability constants.
pub fn rho_sigma_sweep(rs: &RootSystem, sampler: &ChamberSampler, count: usize) -> Result<SweepReport> {
    let n = rs.n();
    let dominating = (1..n).map(|j| find_dominating_sigma(rs, j)).collect::<Result<Vec<_>>>()?;
    let widen = 1e-6;
    let mut comparable = Vec::new();
    for j in 2..n {
        comparable.push((QuantityKind::Sigma, j, comparability_constants(rs, j, QuantityKind::Sigma)?));
    }
    for j in 2..n.saturating_sub(1) {
        comparable.push((QuantityKind::Rho, j, comparability_constants(rs, j, QuantityKind::Rho)?));
    }
    let sin = (std::f64::consts::PI / n as f64).sin();
    let rt = *rs.rtilde();
    let samples = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let g = PairGeometry::new(rs, &x, &y, 0.0)?;
        let scale = x.norm() * y.norm();
        let tiny = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let mut checks: Checks = Vec::new();
        let rho_min = g.rho.iter().copied().fold(f64::INFINITY, f64::min);
        let sigma_min = g.sigma.iter().copied().fold(f64::INFINITY, f64::min);
        checks.push(("rho_min".into(), rho_min, rho_min >= -1e-12, "negative ρ_j"));
        checks.push(("sigma_min".into(), sigma_min, sigma_min >= -1e-12, "negative σ_j"));
        for d in &dominating {
            let gap = g.rho[d.j] - g.sigma[d.k];
            checks.push(("rho_minus_dominated_sigma".into(), gap, gap >= -tiny, "ρ_j < σ_k"));
        }
        let forms = [
            ("rho_1_rtilde_x", g.rho[1] - 2.0 * sin * (rt * x).dot(&y)),
            ("rho_1_rtilde_inv_y", g.rho[1] - 2.0 * sin * x.dot(&(rt.transpose() * y))),
            ("rho_last_rtilde_y", g.rho[n - 1] - 2.0 * sin * x.dot(&(rt * y))),
        ];
        for (label, diff) in forms {
            let r = diff.abs() / scale.max(f64::MIN_POSITIVE);
            checks.push((label.into(), r, r < 1e-12, "closed form of ρ_1 or ρ_{n-1} fails"));
        }
        let inner = g.inner;
        if inner > 0.0 {
            for &(kind, j, (lo, hi)) in &comparable {
                let q = match kind {
                    QuantityKind::Sigma => g.sigma[j],
                    QuantityKind::Rho => g.rho[j],
                };
                let ratio = q / inner;
                let ok = ratio >= lo * (1.0 - widen) && ratio <= hi * (1.0 + widen);
                let label = match kind {
                    QuantityKind::Sigma => format!("sigma_{j}/inner"),
                    QuantityKind::Rho => format!("rho_{j}/inner"),
                };
                checks.push((label, ratio, ok, "ratio escapes the comparability constants"));
            }
        }
        Ok((x, y, checks))
    });
    let mut report = collect("lemmas-rho-sigma", base_config(rs, sampler, count), samples)?;
    for (kind, j, (lo, hi)) in comparable {
        let tag = match kind {
            QuantityKind::Sigma => "sigma",
            QuantityKind::Rho => "rho",
        };
        report.summary.insert(format!("{tag}_{j}_lo"), lo);
        report.summary.insert(format!("{tag}_{j}_hi"), hi);
    }
    Ok(report)
}

/// Every residue tuple with `n ≤ n_max`, `k ≤ k_max`, plus `random` tuples with
/// `k ∈ {4, 5, 6}` and `k ≤ n ≤ 10`, compared between both evaluators. Also
/// checks `I_{k,ℓ} = 0` for all `2ℓ < k < n ≤ n_max`.
pub fn expsum_sweep(n_max: usize, k_max: usize, random: usize, seed: u64) -> Result<(SweepReport, Vec<ExpSumRow>)> {
    use rand::Rng;
    let start = std::time::Instant::now();
    let mut queries = Vec::new();
    for n in 1..=n_max {
        for k in 0..=k_max.min(n) {
            let total = n.pow(k as u32);
            for code in 0..total {
                let mut c = code;
                let ms: Vec<i64> = (0..k)
                    .map(|_| {
                        let m = (c % n) as i64;
                        c /= n;
                        m
                    })
                    .collect();
                queries.push(ExpSumQuery::new(n, &ms)?);
            }
        }
    }
    let exhaustive = queries.len();
    for i in 0..random as u64 {
        let mut rng = indexed_rng(seed, i);
        let k = rng.gen_range(4..=6usize);
        let n = rng.gen_range(k..=10usize);
        let ms: Vec<i64> = (0..k).map(|_| rng.gen_range(0..n as i64)).collect();
        queries.push(ExpSumQuery::new(n, &ms)?);
    }
    let chunks = rayon::current_num_threads().max(1);
    let per = queries.len().div_ceil(chunks);
    let parts: Vec<Result<Vec<ExpSumRow>>> = par_map_indexed(chunks, |c| {
        let mut reducer = ExpSumReducer::new();
        let lo = (c as usize * per).min(queries.len());
        let hi = (lo + per).min(queries.len());
        queries[lo..hi].iter().map(|q| compare(q, &mut reducer)).collect()
    });
    let mut rows = Vec::with_capacity(queries.len());
    for p in parts {
        rows.extend(p?);
    }

    let mut report = SweepReport::new(
        "lemmas-expsum",
        json!({ "n_max": n_max, "k_max": k_max, "random": random, "seed": seed }),
    );
    let origin = SamplePoint::new(0, &point(0.0, 0.0), &point(0.0, 0.0));
    for (i, row) in rows.iter().enumerate() {
        report.samples += 1;
        let err = (row.direct[0] - row.reduced as f64).abs().max(row.direct[1].abs());
        report.observe(&format!("k={}", row.k), err, SamplePoint { index: i as u64, ..origin });
        if !row.matches {
            report.violate(Violation {
                index: i as u64,
                w: format!("n={} {:?}", row.n, row.tuple),
                value: err,
                x: [0.0; 2],
                y: [0.0; 2],
                detail: format!("direct {:?} vs reduced {}", row.direct, row.reduced),
            });
        }
    }
    let mut ikl = 0usize;
    for n in 1..=n_max {
        for k in 1..n {
            for ell in (0..).take_while(|l| 2 * l < k) {
                ikl += 1;
                if !verify_ikl_vanishing(n, k, ell)? {
                    report.violate(Violation {
                        index: 0,
                        w: format!("I_{{{k},{ell}}} n={n}"),
                        value: 1.0,
                        x: [0.0; 2],
                        y: [0.0; 2],
                        detail: "I_{k,ℓ} does not vanish".into(),
                    });
                }
            }
        }
    }
    report.summary.insert("exhaustive_tuples".into(), exhaustive as f64);
    report.summary.insert("random_tuples".into(), random as f64);
    report.summary.insert("ikl_cases".into(), ikl as f64);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((report, rows))
}

/// Kernel checks per sample: positivity, `E(x, w.y) = E(y, w⁻¹.x)`, the
/// coefficient bound, and for the first `ode_count` samples agreement with
/// the ODE integration and the eigenvalue residual at an interior point.
pub fn kernel_sweep(ev: &KernelEvaluator, sampler: &ChamberSampler, count: usize, ode_count: usize) -> Result<SweepReport> {
    let rs = ev.root_system();
    let samples = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let kv = ev.evaluate(&x, &y)?;
        let swapped = ev.evaluate(&y, &x)?;
        let mut checks: Checks = Vec::new();
        let min = kv.values.iter().copied().fold(f64::INFINITY, f64::min);
        checks.push(("min_value".into(), min, min > 0.0, "non-positive kernel value"));
        let sym = rs
            .elements()
            .map(|w| (kv.get(w) / swapped.get(rs.inverse(w)) - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push(("symmetry".into(), sym, sym < SYMMETRY_TOL, "E(x, w.y) ≠ E(y, w⁻¹.x)"));
        let coeffs = ev.series_coefficients(&x, &y, SeriesShift::None, 60)?;
        let decay = coeffs.worst_decay_ratio();
        checks.push(("decay_ratio".into(), decay, decay <= 1.0 + DECAY_SLACK, "‖a_k‖∞ exceeds C^k/k!"));
        if (i as usize) < ode_count {
            let ode = ev.kernel_ode(&x, &y, &OdeOptions::default())?;
            let err = kv
                .values
                .iter()
                .zip(&ode.values)
                .map(|(a, b)| (a / b - 1.0).abs())
                .fold(0.0, f64::max);
            checks.push(("series_vs_ode".into(), err, err < ODE_TOL, "series and ODE disagree"));
            let (xi, yi) = sampler.interior_pair(i, 0.2);
            // moderate norms keep the central-difference error well below tolerance
            let xi = xi * (0.8 / xi.norm());
            let yi = yi * (yi.norm().min(2.0) / yi.norm());
            let eig = ev.eigen_residual(&xi, &yi, &point(0.6, 0.8), 1e-4)?;
            checks.push(("eigen_residual".into(), eig, eig < EIGEN_TOL, "eigenvalue equation fails"));
        }
        Ok((x, y, checks))
    });
    let mut config = base_config(rs, sampler, count);
    config["ode_samples"] = json!(ode_count);
    collect("kernel", config, samples)
}

/// `E(x, w.y) = e^{⟨x, w.y⟩}` for `κ = 0`.
pub fn zero_multiplicity_sweep(n: usize, sampler: &ChamberSampler, count: usize) -> Result<SweepReport> {
    let rs = RootSystem::dihedral_nonnegative(
        n,
        if n % 2 == 0 {
            crate::root_system::Multiplicity::Pair(0.0, 0.0)
        } else {
            crate::root_system::Multiplicity::Uniform(0.0)
        },
    )?;
    let ev = KernelEvaluator::new(&rs);
    let samples = par_map_indexed(count, |i| {
        let (x, y) = sampler.pair(i);
        let kv = ev.evaluate(&x, &y)?;
        let err = rs
            .elements()
            .map(|w: GroupElement| (kv.get(w) / x.dot(&rs.apply(w, &y)).exp() - 1.0).abs())
            .fold(0.0, f64::max);
        let checks: Checks = vec![("relative_error".into(), err, err < 1e-12, "κ = 0 kernel is not exponential")];
        Ok((x, y, checks))
    });
    collect("kernel-zero-multiplicity", base_config(&rs, sampler, count), samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::Multiplicity;

    fn rs(n: usize) -> RootSystem {
        let m = if n % 2 == 0 { Multiplicity::Pair(0.5, 2.5) } else { Multiplicity::Uniform(1.0) };
        RootSystem::dihedral(n, m).unwrap()
    }

    #[test]
    fn identity_sweeps_pass() {
        for n in [3, 4, 7] {
            let rs = rs(n);
            let s = ChamberSampler::standard(&rs, 3);
            assert!(esp_sweep(&rs, &s, 100).unwrap().passed);
            assert!(drds_sweep(&rs, &s, 100, &[0.1, 1.0, 10.0]).unwrap().passed);
            assert!(lemma_b_sweep(&rs, &s, 50, &[0.1, 10.0]).unwrap().passed);
            assert!(lemma_tilde_sweep(&rs, &s, 50, &[0.1, 10.0]).unwrap().passed);
            let r = rho_sigma_sweep(&rs, &s, 200).unwrap();
            assert!(r.passed, "{:?}", r.violations);
        }
    }

    #[test]
    fn expsum_small() {
        let (r, rows) = expsum_sweep(5, 3, 20, 1).unwrap();
        assert!(r.passed, "{:?}", r.violations);
        assert_eq!(rows.len(), r.samples);
    }

    #[test]
    fn kernel_checks_pass() {
        let rs = rs(4);
        let ev = KernelEvaluator::new(&rs);
        let s = ChamberSampler::standard(&rs, 6);
        let r = kernel_sweep(&ev, &s, 40, 5).unwrap();
        assert!(r.passed, "{:?}", r.violations);
        let s = ChamberSampler::new(&rs, 6, 1e-2, 10f64.sqrt()).unwrap();
        assert!(zero_multiplicity_sweep(5, &s, 50).unwrap().passed);
    }
}
