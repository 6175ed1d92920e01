//! Sums of `ζ^{m·j}` over tuples of distinct residues: direct enumeration against the reduction.

use dihedral_dunkl::expsum::{expsum_direct, expsum_reduced, verify_ikl_vanishing, ExpSumQuery};
use dihedral_dunkl::verify::expsum_sweep;

fn main() -> dihedral_dunkl::Result<()> {
    for (n, ms) in [(5, vec![1, 4]), (6, vec![1, 2, 3]), (7, vec![2, 2, 3]), (8, vec![1, 1, 1, 5])] {
        let q = ExpSumQuery::new(n, &ms)?;
        let direct = expsum_direct(&q)?;
        println!("n={n} m={ms:?}: direct {:.3}{:+.3}i, reduced {}", direct.re, direct.im, expsum_reduced(&q));
    }
    for (n, k, l) in [(7, 3, 1), (9, 5, 2)] {
        println!("I_({k},{l}) vanishes mod {n}: {}", verify_ikl_vanishing(n, k, l)?);
    }
    let (report, rows) = expsum_sweep(7, 3, 200, 1)?;
    println!("{} tuples compared, all exact: {}", rows.len(), report.passed);
    Ok(())
}
