//! A combined JSON report for one configuration, the library-side counterpart of `dunkl report-all`.

use dihedral_dunkl::barrier::{certify_lambda_signs, ratio_sweep, BarrierConfig, Convention, SignMode};
use dihedral_dunkl::report::AggregateReport;
use dihedral_dunkl::sampling::ChamberSampler;
use dihedral_dunkl::verify::{esp_sweep, kernel_sweep};
use dihedral_dunkl::{KernelEvaluator, Multiplicity, RootSystem};

fn main() -> dihedral_dunkl::Result<()> {
    let start = std::time::Instant::now();
    let rs = RootSystem::dihedral(3, Multiplicity::Uniform(2.0))?;
    let ev = KernelEvaluator::new(&rs);
    let sampler = ChamberSampler::standard(&rs, 42);
    let reports = vec![
        esp_sweep(&rs, &sampler, 1000)?,
        kernel_sweep(&ev, &sampler, 200, 20)?,
        certify_lambda_signs(&rs, &BarrierConfig::at_c_minus(&rs, Convention::Sigma)?, SignMode::Positive, &sampler, 5000)?,
        certify_lambda_signs(&rs, &BarrierConfig::at_c_plus(&rs, Convention::Sigma)?, SignMode::Negative, &sampler, 5000)?,
        ratio_sweep(&ev, &ChamberSampler::new(&rs, 42, 1e-2, 8.0)?, 5000)?,
    ];
    let all = AggregateReport::new(reports, start.elapsed().as_secs_f64());
    for r in &all.reports {
        eprintln!("{:<24} {}", r.name, if r.passed { "ok" } else { "FAILED" });
    }
    println!("{}", all.without_timing().to_json()?);
    Ok(())
}
