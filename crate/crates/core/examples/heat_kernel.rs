//! The Dunkl heat kernel: normalization, values, the heat equation and its envelope.

use dihedral_dunkl::heat::{heat, heat_envelope_sweep, heat_equation_residual, mehta_constant, HeatConfig, MEHTA_TOL};
use dihedral_dunkl::sampling::ChamberSampler;
use dihedral_dunkl::{point, KernelEvaluator, Multiplicity, RootSystem};

fn main() -> dihedral_dunkl::Result<()> {
    let rs = RootSystem::dihedral(4, Multiplicity::Pair(0.5, 1.5))?;
    let ev = KernelEvaluator::new(&rs);
    println!("c_k = {:.12}", mehta_constant(&rs, MEHTA_TOL)?);
    let hc = HeatConfig::new(&rs)?;

    let (x, y) = (point(0.5, 1.0), point(0.3, 0.7));
    for t in [0.1, 1.0, 10.0] {
        println!("h_{t}(x, y) = {:.6e}", heat(&ev, &hc, t, &x, &y)?);
    }

    let r = heat_equation_residual(&ev, &hc, 1.0, &point(1.0, 2.0), &y, 1e-3)?;
    println!("∂_t h = {:.8e}, Δ_k h = {:.8e}, residual {:.1e}", r.dt, r.laplacian + r.drift + r.difference, r.residual);

    for t in [0.1, 1.0, 10.0] {
        let s = heat_envelope_sweep(&ev, &hc, t, &ChamberSampler::new(&rs, 1, 1e-2, 8.0)?, 2000)?;
        let worst = s.per_w.values().filter_map(|v| v.window).fold(0.0, f64::max);
        println!("t={t}: widest heat/envelope window {worst:.2} passed={}", s.passed);
    }
    Ok(())
}
