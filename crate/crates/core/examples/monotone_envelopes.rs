//! `t ↦ max_w Ẽ_w(tx, y)` is nonincreasing at `c_minus`; `min_w` is nondecreasing at `c_plus`.

use dihedral_dunkl::barrier::{monotone_envelope_scan, monotone_sweep, BarrierConfig, Convention, SignMode};
use dihedral_dunkl::{point, KernelEvaluator, Multiplicity, RootSystem};

fn main() -> dihedral_dunkl::Result<()> {
    let rs = RootSystem::dihedral(3, Multiplicity::Uniform(1.0))?;
    let ev = KernelEvaluator::new(&rs);
    let (x, y) = (point(0.5, 1.5), point(0.2, 2.0));
    let grid: Vec<f64> = (0..=10).map(|i| 0.01 + 0.299 * i as f64).collect();

    let lo = BarrierConfig::at_c_minus(&rs, Convention::Sigma)?;
    let hi = BarrierConfig::at_c_plus(&rs, Convention::Sigma)?;
    let up = monotone_envelope_scan(&ev, &lo, &x, &y, &grid)?;
    let down = monotone_envelope_scan(&ev, &hi, &x, &y, &grid)?;
    println!("{:>6} {:>14} {:>14}", "t", "max at c-", "min at c+");
    for i in 0..grid.len() {
        println!("{:>6.3} {:>14.10} {:>14.10}", grid[i], up.upper[i], down.lower[i]);
    }

    for (mode, cfg) in [(SignMode::Positive, lo), (SignMode::Negative, hi)] {
        let r = monotone_sweep(&ev, &cfg, mode, 0, 100, 200, 10.0)?;
        println!("{mode}: 100 rays passed={} worst step {:.1e}", r.passed, r.summary["worst_relative_step"]);
    }
    Ok(())
}
