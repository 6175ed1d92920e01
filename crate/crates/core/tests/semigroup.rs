//! `∫ h_t(x, y) h_s(y, z) ω(y) dy = h_{t+s}(x, z)` by polar quadrature. Slow; run with `--ignored`.

use std::f64::consts::PI;

use dihedral_dunkl::heat::{ln_heat, HeatConfig};
use dihedral_dunkl::quadrature::{exp_sinh_ln, tanh_sinh};
use dihedral_dunkl::{point, DunklError, KernelEvaluator, Multiplicity, Point, RootSystem};

fn ln_weight(rs: &RootSystem, y: &Point) -> f64 {
    (0..rs.n()).map(|m| 2.0 * rs.kappa(m) * rs.root(m).dot(y).abs().ln()).sum()
}

fn semigroup_gap(rs: &RootSystem, t: f64, s: f64, x: &Point, z: &Point, level: u32) -> f64 {
    let ev = KernelEvaluator::new(rs);
    let hc = HeatConfig::new(rs).unwrap();
    let ln_integrand = |r: f64, theta: f64| -> f64 {
        let y = point(r * theta.cos(), r * theta.sin());
        let pair = ln_heat(&ev, &hc, t, x, &y).and_then(|a| Ok(a + ln_heat(&ev, &hc, s, &y, z)?));
        match pair {
            Ok(v) => v + ln_weight(rs, &y) + r.ln(),
            // beyond the evaluation guard the Gaussian factor has long underflowed
            Err(DunklError::DomainGuard { .. }) => f64::NEG_INFINITY,
            Err(e) => panic!("{e}"),
        }
    };
    let width = PI / rs.n() as f64;
    let total: f64 = (0..2 * rs.n())
        .map(|i| {
            let a = i as f64 * width;
            tanh_sinh(|theta| exp_sinh_ln(|r| ln_integrand(r, theta), level), a, a + width, level)
        })
        .sum();
    let expected = ln_heat(&ev, &hc, t + s, x, z).unwrap().exp();
    (total / expected - 1.0).abs()
}

#[test]
#[ignore]
fn semigroup_identity() {
    let cases = [
        (RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap(), 0.7, 0.5),
        (RootSystem::dihedral(4, Multiplicity::Pair(0.5, 1.5)).unwrap(), 1.0, 1.0),
    ];
    for (rs, t, s) in cases {
        let gap = semigroup_gap(&rs, t, s, &point(0.3, 0.4), &point(0.5, -0.2), 4);
        assert!(gap < 1e-2, "n={} gap {gap:e}", rs.n());
        eprintln!("n={}: relative gap {gap:.1e}", rs.n());
    }
}
