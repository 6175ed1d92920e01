//! The kernel against its closed-form envelope: observed windows and their bounds.

use dihedral_dunkl::barrier::{envelope, ratio_sweep, EnvelopeCase, WindowModel};
use dihedral_dunkl::sampling::ChamberSampler;
use dihedral_dunkl::{point, KernelEvaluator, Multiplicity, RootSystem};

fn main() -> dihedral_dunkl::Result<()> {
    let rs = RootSystem::dihedral(5, Multiplicity::Uniform(0.5))?;
    let ev = KernelEvaluator::new(&rs);
    let (x, y) = (point(0.6, 2.0), point(0.1, 1.0));
    let values = ev.evaluate(&x, &y)?;
    for (w, e) in values.iter() {
        let env = envelope(&rs, &x, &y, w)?;
        println!("{w:>3} [{:<5}] E={e:.6e} envelope={env:.6e} ratio={:.4}", EnvelopeCase::of(&rs, w).tag(), e / env);
    }

    let model = WindowModel::new(&rs)?;
    let r = ratio_sweep(&ev, &ChamberSampler::new(&rs, 3, 1e-2, 8.0)?, 10_000)?;
    println!("over 10^4 pairs (passed={}):", r.passed);
    for w in rs.elements() {
        let s = &r.per_w[&w.to_string()];
        println!("{w:>3} window {:>10.2} within {:.2e}", s.window.unwrap(), model.window(w));
    }
    Ok(())
}
