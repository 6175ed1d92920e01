//! Sign of `Λ_w` at the two thresholds, at one point and over a sample.

use dihedral_dunkl::barrier::{certify_lambda_signs, thresholds, Barrier, BarrierConfig, Convention, SignMode};
use dihedral_dunkl::sampling::ChamberSampler;
use dihedral_dunkl::{point, Multiplicity, RootSystem};

fn main() -> dihedral_dunkl::Result<()> {
    let rs = RootSystem::dihedral(4, Multiplicity::Pair(1.0, 2.5))?;
    let th = thresholds(&rs)?;
    println!("c_minus = {:.6}, c_plus = {:.1}", th.c_minus, th.c_plus);

    let (x, y) = (point(0.3, 1.2), point(0.8, 1.5));
    for (mode, c) in [(SignMode::Positive, th.c_minus), (SignMode::Negative, th.c_plus)] {
        let cfg = BarrierConfig::new(c, Convention::Sigma)?;
        let b = Barrier::new(&rs, &cfg, &x, &y)?;
        let row: Vec<String> = rs.elements().map(|w| format!("{w}:{:+.3e}", b.lambda(w))).collect();
        println!("{mode} at c={c:.4}: {}", row.join(" "));

        let r = certify_lambda_signs(&rs, &cfg, mode, &ChamberSampler::standard(&rs, 5), 10_000)?;
        println!(
            "  10^4 pairs: passed={} Λ over w ≠ Id in [{:.3e}, {:.3e}]",
            r.passed,
            r.min_over_w().unwrap_or(0.0),
            r.max_over_w().unwrap_or(0.0)
        );
    }

    // the other normalization of Q_Id leaves Λ_Id strictly positive
    let b = Barrier::new(&rs, &BarrierConfig::new(th.c_minus, Convention::Product)?, &x, &y)?;
    println!("Λ_Id with the unnormalized weight: {:.3e}", b.lambda(dihedral_dunkl::GroupElement::IDENTITY));
    Ok(())
}
