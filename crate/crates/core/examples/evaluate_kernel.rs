//! `E(x, w.y)` for every element of I_2(5), checked against the ODE route.

use dihedral_dunkl::{point, KernelEvaluator, Multiplicity, OdeOptions, RootSystem};

fn main() -> dihedral_dunkl::Result<()> {
    let rs = RootSystem::dihedral(5, Multiplicity::Uniform(1.5))?;
    let ev = KernelEvaluator::new(&rs);
    let x = point(0.4, 2.1);
    let y = point(-0.3, 1.6);

    let series = ev.evaluate(&x, &y)?;
    let ode = ev.kernel_ode(&x, &y, &OdeOptions::default())?;
    println!("{} terms, tail bound {:.1e}", series.terms_used, series.truncation_bound);
    println!("{:>4} {:>22} {:>12}", "w", "E(x, w.y)", "vs ODE");
    for ((w, s), o) in series.iter().zip(&ode.values) {
        println!("{w:>4} {s:>22.15e} {:>12.1e}", (s - o).abs() / s);
    }

    // arbitrary points are moved into the chamber first
    let (a, b) = (point(-2.0, -0.5), point(1.0, -1.0));
    println!("E({a:?}, {b:?}) = {:.15e}", ev.kernel(&a, &b)?);
    println!("E({b:?}, {a:?}) = {:.15e}", ev.kernel(&b, &a)?);
    Ok(())
}
