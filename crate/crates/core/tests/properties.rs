use dihedral_dunkl::heat::{ln_heat, HeatConfig};
use dihedral_dunkl::{point, GroupElement, KernelEvaluator, Multiplicity, Point, RootSystem};
use proptest::prelude::*;

fn system(n: usize, k0: f64, k1: f64) -> RootSystem {
    let m = if n % 2 == 0 { Multiplicity::Pair(k0, k1) } else { Multiplicity::Uniform(k0) };
    RootSystem::dihedral(n, m).unwrap()
}

fn polar(r: f64, theta: f64) -> Point {
    point(r * theta.cos(), r * theta.sin())
}

fn arb_point(r_max: f64) -> impl Strategy<Value = Point> {
    (0.0..r_max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| polar(r, t))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(n in 3usize..=9, a in 0usize..18, b in 0usize..18, c in 0usize..18) {
        let rs = system(n, 1.0, 1.0);
        let [a, b, c] = [a, b, c].map(|i| rs.element(i % rs.order()));
        prop_assert_eq!(rs.compose(rs.compose(a, b), c), rs.compose(a, rs.compose(b, c)));
        prop_assert_eq!(rs.compose(a, rs.inverse(a)), GroupElement::IDENTITY);
        let p = point(0.3, 1.7);
        let lhs = rs.apply(rs.compose(a, b), &p);
        let rhs = rs.apply(a, &rs.apply(b, &p));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn canonicalize_round_trip(n in 3usize..=9, p in arb_point(10.0)) {
        let rs = system(n, 1.0, 1.0);
        let (q, w) = rs.canonicalize(&p);
        prop_assert!(rs.in_closed_chamber(&q));
        prop_assert!((rs.apply(w, &q) - p).norm() < 1e-12 * p.norm().max(1.0));
    }

    #[test]
    fn kernel_is_symmetric_and_invariant(
        n in 3usize..=8, k0 in 0.1f64..3.0, k1 in 0.1f64..3.0,
        x in arb_point(3.0), y in arb_point(3.0), g in 0usize..16,
    ) {
        let rs = system(n, k0, k1);
        let ev = KernelEvaluator::new(&rs);
        let g = rs.element(g % rs.order());
        let e = ev.ln_kernel(&x, &y).unwrap();
        // off-chamber series straight from the recursion
        let direct = ev.evaluate(&x, &y).unwrap().ln(GroupElement::IDENTITY);
        prop_assert!(close(e, direct, 1e-10), "{e} vs {direct}");
        prop_assert!(close(e, ev.ln_kernel(&y, &x).unwrap(), 1e-10));
        let moved = ev.ln_kernel(&rs.apply(g, &x), &rs.apply(g, &y)).unwrap();
        prop_assert!(close(e, moved, 1e-10), "{e} vs {moved}");
    }

    #[test]
    fn kernel_homogeneity_and_orbit_bounds(
        n in 3usize..=8, k0 in 0.1f64..3.0, k1 in 0.1f64..3.0,
        x in arb_point(3.0), y in arb_point(3.0), s in 0.2f64..2.0,
    ) {
        let rs = system(n, k0, k1);
        let ev = KernelEvaluator::new(&rs);
        let a = ev.ln_kernel(&(x * s), &y).unwrap();
        let b = ev.ln_kernel(&x, &(y * s)).unwrap();
        prop_assert!(close(a, b, 1e-10));
        let pairings: Vec<f64> = rs.elements().map(|w| x.dot(&rs.apply(w, &y))).collect();
        let lo = pairings.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = pairings.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e = ev.ln_kernel(&x, &y).unwrap();
        prop_assert!(e >= lo - 1e-12 && e <= hi + 1e-12, "{lo} <= {e} <= {hi}");
    }

    #[test]
    fn zero_multiplicity_is_exponential(n in 3usize..=8, x in arb_point(4.0), y in arb_point(4.0)) {
        let m = if n % 2 == 0 { Multiplicity::Pair(0.0, 0.0) } else { Multiplicity::Uniform(0.0) };
        let rs = RootSystem::dihedral_nonnegative(n, m).unwrap();
        let ev = KernelEvaluator::new(&rs);
        prop_assert!(close(ev.ln_kernel(&x, &y).unwrap(), x.dot(&y), 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn heat_kernel_scaling(k0 in 0.2f64..2.0, k1 in 0.2f64..2.0, x in arb_point(2.0), y in arb_point(2.0),
                           t in 0.2f64..3.0, c in 0.5f64..2.0) {
        let rs = system(4, k0, k1);
        let ev = KernelEvaluator::new(&rs);
        let hc = HeatConfig::new(&rs).unwrap();
        // h_{c²t}(cx, cy) = c^{-(2γ+2)} h_t(x, y)
        let lhs = ln_heat(&ev, &hc, c * c * t, &(x * c), &(y * c)).unwrap();
        let rhs = ln_heat(&ev, &hc, t, &x, &y).unwrap() - (2.0 * rs.gamma() + 2.0) * c.ln();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }
}
