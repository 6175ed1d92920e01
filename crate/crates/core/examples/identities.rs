//! Sampled checks of the algebraic identities among the pair quantities.

use dihedral_dunkl::quantities::pair_geometry;
use dihedral_dunkl::sampling::ChamberSampler;
use dihedral_dunkl::verify::{drds_sweep, esp_sweep, lemma_b_sweep, lemma_tilde_sweep, rho_sigma_sweep};
use dihedral_dunkl::{point, Multiplicity, RootSystem};

fn main() -> dihedral_dunkl::Result<()> {
    let rs = RootSystem::dihedral(6, Multiplicity::Pair(0.5, 2.0))?;

    let g = pair_geometry(&rs, &point(0.2, 1.0), &point(0.4, 0.9), 1.0)?;
    for j in 0..rs.n() as i64 {
        println!("j={j}: ρ={:.6} σ={:.6} D_r={:.6} D_s={:.6}", g.rho(j), g.sigma(j), g.dr(j), g.ds(j));
    }

    let sampler = ChamberSampler::standard(&rs, 11);
    let cs = [0.1, 1.0, 10.0];
    let reports = [
        esp_sweep(&rs, &sampler, 2000)?,
        drds_sweep(&rs, &sampler, 2000, &cs)?,
        lemma_b_sweep(&rs, &sampler, 2000, &cs)?,
        lemma_tilde_sweep(&rs, &sampler, 2000, &cs)?,
        rho_sigma_sweep(&rs, &sampler, 2000)?,
    ];
    for r in &reports {
        println!(
            "{:<12} passed={} worst={:.2e} violations={}",
            r.name,
            r.passed,
            r.max_over_w().unwrap_or(0.0),
            r.violation_count
        );
    }
    Ok(())
}
