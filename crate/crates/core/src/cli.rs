//! The `dunkl` command line.
//!
//! Exit codes: 0 when every check of the subcommand passes, 1 when a check
//! fails or a computation does not converge, 2 for invalid arguments. The
//! report is written in every case that gets as far as producing one.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::barrier::{
    certify_lambda_signs, lambda_sign_rows, monotone_sweep, rank1_ratio_sweep, ratio_sweep, ratio_sweep_rows,
    thresholds, BarrierConfig, Convention, SignMode,
};
use crate::error::{DunklError, Result};
use crate::expsum::ExpSumRow;
use crate::heat::{heat, heat_envelope_sweep, heat_equation_residual, heat_residual_sweep, HeatConfig, HEAT_RESIDUAL_TOL};
use crate::kernel::{kernel_rank1, rank1_system_residual, KernelEvaluator, SeriesOptions};
use crate::report::{write_csv, AggregateReport, CsvRow, SweepReport};
use crate::root_system::{point, Multiplicity, Point, RootSystem};
use crate::sampling::ChamberSampler;
use crate::verify;

/// Environment variable read when `--workers` is absent.
pub const WORKERS_ENV: &str = "DUNKL_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "dunkl", version, about = "Dunkl kernels of the dihedral groups: evaluation and numerical checks")]
pub struct Cli {
    /// Worker threads (default: $DUNKL_WORKERS, then all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Zero the wall-clock fields so repeated runs compare byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Positive,
    Negative,
}

impl From<ModeArg> for SignMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Positive => SignMode::Positive,
            ModeArg::Negative => SignMode::Negative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Product,
    Sigma,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Product => Convention::Product,
            ConventionArg::Sigma => Convention::Sigma,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct SystemArgs {
    #[arg(long)]
    pub n: usize,
    /// Multiplicity on every root (odd `n`, or both orbits for even `n`).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Orbit of `α_0` (even `n`).
    #[arg(long)]
    pub kappa0: Option<f64>,
    /// Orbit of `α_1` (even `n`).
    #[arg(long)]
    pub kappa1: Option<f64>,
}

impl SystemArgs {
    fn multiplicity(&self) -> Result<Multiplicity> {
        match (self.kappa, self.kappa0, self.kappa1) {
            (Some(k), None, None) if self.n % 2 == 0 => Ok(Multiplicity::Pair(k, k)),
            (Some(k), None, None) => Ok(Multiplicity::Uniform(k)),
            (None, Some(a), Some(b)) => Ok(Multiplicity::Pair(a, b)),
            _ => Err(DunklError::Precondition(
                "give either --kappa or both --kappa0 and --kappa1".into(),
            )),
        }
    }

    /// Positive multiplicities.
    pub fn system(&self) -> Result<RootSystem> {
        RootSystem::dihedral(self.n, self.multiplicity()?)
    }

    /// Multiplicities allowed to vanish.
    pub fn system_nonnegative(&self) -> Result<RootSystem> {
        RootSystem::dihedral_nonnegative(self.n, self.multiplicity()?)
    }
}

#[derive(Clone, Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-2)]
    pub r_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub r_max: f64,
}

impl SampleArgs {
    fn sampler(&self, rs: &RootSystem) -> Result<ChamberSampler> {
        ChamberSampler::new(rs, self.seed, self.r_min, self.r_max)
    }
}

#[derive(Clone, Debug, Args)]
pub struct BarrierArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Deformation constant (default: `c_minus` in positive mode, `c_plus` in negative mode).
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Sigma)]
    pub convention: ConventionArg,
}

impl BarrierArgs {
    fn config(&self, rs: &RootSystem) -> Result<BarrierConfig> {
        let t = thresholds(rs)?;
        let c = self.c.unwrap_or(match self.mode {
            ModeArg::Positive => t.c_minus,
            ModeArg::Negative => t.c_plus,
        });
        BarrierConfig::new(c, self.convention.into())
    }
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got `{s}`"));
    }
    let a = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(point(a, b))
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string())).collect()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// `E(x, w.y)` for every group element.
    Eval {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x: Point,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        y: Point,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_terms: usize,
    },
    /// Rank one: `E(x, ±y)` at a point, or the global bound over a sample.
    Rank1 {
        #[arg(long)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8.0)]
        r_max: f64,
    },
    /// Algebraic identities and the exponential sums.
    Lemmas {
        #[command(subcommand)]
        which: LemmaCommand,
    },
    /// Sign of `Λ_w` for `w ≠ Id` at a threshold value of `c`.
    CertifySigns {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sampling: SampleArgs,
        #[command(flatten)]
        barrier: BarrierArgs,
    },
    /// `M(t)` nonincreasing (positive mode) or `m(t)` nondecreasing (negative mode) along rays.
    Monotone {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        barrier: BarrierArgs,
        #[arg(long, default_value_t = 100)]
        rays: usize,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// `E(x, w.y)` over its sharp envelope.
    EnvelopeRatio {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8.0)]
        r_max: f64,
    },
    /// The heat kernel at one point.
    Heat {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x: Point,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        y: Point,
        /// Override the computed normalization.
        #[arg(long)]
        ck: Option<f64>,
    },
    /// Finite-difference residual of the heat equation.
    HeatResidual {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x: Option<Point>,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        y: Option<Point>,
        #[arg(long, default_value_t = 1e-3)]
        h_step: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        ck: Option<f64>,
    },
    /// Heat kernel over its envelope at several times.
    HeatEnvelope {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_parser = parse_list, default_value = "0.1,1,10")]
        t: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8.0)]
        r_max: f64,
        #[arg(long)]
        ck: Option<f64>,
    },
    /// Every verifier with one seed.
    ReportAll {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        rays: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum LemmaCommand {
    /// Elementary symmetric functions of `ρ` and `σ`.
    Esp {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sampling: SampleArgs,
    },
    /// `D_R = D_S - cⁿ𝔖` and `D_R 𝔇_R = D_S 𝔇_S`.
    Drds {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sampling: SampleArgs,
        #[arg(long, value_parser = parse_list, default_value = "0.1,1,10")]
        c: Vec<f64>,
    },
    /// Direct against reduced exponential sums.
    Expsum {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        #[arg(long, default_value_t = 500)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed form of `B_j` and the bounds on `C_j`.
    LemmaB {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sampling: SampleArgs,
        #[arg(long, value_parser = parse_list, default_value = "0.1,1,10")]
        c: Vec<f64>,
    },
    /// Closed forms of `Ã_j`, `B̃_j` and the bounds on `𝔇_R`.
    LemmaTilde {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sampling: SampleArgs,
        #[arg(long, value_parser = parse_list, default_value = "0.1,1,10")]
        c: Vec<f64>,
    },
    /// Nonnegativity, dominating `σ_k`, closed forms of `ρ_1`, comparability constants.
    RhoSigma {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        sampling: SampleArgs,
    },
}

/// What a subcommand produced.
enum Outcome {
    Report(SweepReport),
    Aggregate(AggregateReport),
    Records { json: serde_json::Value, csv: Option<Vec<u8>>, passed: bool },
}

#[derive(Serialize)]
struct EvalRecord {
    w: String,
    value: f64,
    bound: f64,
    terms: usize,
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r).map_err(|e| DunklError::Precondition(e.to_string()))?;
    }
    wtr.into_inner().map_err(|e| DunklError::Precondition(e.to_string()))
}

fn csv_rows(rows: &[CsvRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}

fn heat_config(rs: &RootSystem, ck: Option<f64>) -> Result<HeatConfig> {
    match ck {
        Some(v) => HeatConfig::with_constant(rs, v),
        None => HeatConfig::new(rs),
    }
}

fn run_lemma(which: &LemmaCommand, format: Format) -> Result<Outcome> {
    Ok(match which {
        LemmaCommand::Esp { system, sampling } => {
            let rs = system.system()?;
            Outcome::Report(verify::esp_sweep(&rs, &sampling.sampler(&rs)?, sampling.samples)?)
        }
        LemmaCommand::Drds { system, sampling, c } => {
            let rs = system.system()?;
            Outcome::Report(verify::drds_sweep(&rs, &sampling.sampler(&rs)?, sampling.samples, c)?)
        }
        LemmaCommand::LemmaB { system, sampling, c } => {
            let rs = system.system()?;
            Outcome::Report(verify::lemma_b_sweep(&rs, &sampling.sampler(&rs)?, sampling.samples, c)?)
        }
        LemmaCommand::LemmaTilde { system, sampling, c } => {
            let rs = system.system()?;
            Outcome::Report(verify::lemma_tilde_sweep(&rs, &sampling.sampler(&rs)?, sampling.samples, c)?)
        }
        LemmaCommand::RhoSigma { system, sampling } => {
            let rs = system.system()?;
            Outcome::Report(verify::rho_sigma_sweep(&rs, &sampling.sampler(&rs)?, sampling.samples)?)
        }
        LemmaCommand::Expsum { n_max, k_max, random, seed } => {
            let (report, rows) = verify::expsum_sweep(*n_max, *k_max, *random, *seed)?;
            if format == Format::Csv {
                #[derive(Serialize)]
                struct Flat {
                    n: usize,
                    k: usize,
                    tuple: String,
                    direct_re: f64,
                    direct_im: f64,
                    reduced: i64,
                    #[serde(rename = "match")]
                    matches: bool,
                }
                let flat: Vec<Flat> = rows
                    .iter()
                    .map(|r: &ExpSumRow| Flat {
                        n: r.n,
                        k: r.k,
                        tuple: r.tuple.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" "),
                        direct_re: r.direct[0],
                        direct_im: r.direct[1],
                        reduced: r.reduced,
                        matches: r.matches,
                    })
                    .collect();
                Outcome::Records {
                    json: serde_json::Value::Null,
                    csv: Some(csv_bytes(&flat)?),
                    passed: report.passed,
                }
            } else {
                Outcome::Report(report)
            }
        }
    })
}

fn report_all(system: &SystemArgs, seed: u64, samples: usize, rays: usize, points: usize) -> Result<AggregateReport> {
    let start = Instant::now();
    let rs = system.system()?;
    let ev = KernelEvaluator::new(&rs);
    let std_sampler = ChamberSampler::standard(&rs, seed);
    let ratio_sampler = ChamberSampler::new(&rs, seed, 1e-2, 8.0)?;
    let cs = [0.1, 1.0, 10.0];
    let hc = HeatConfig::new(&rs)?;
    let heat_samples = (samples / 20).max(5);
    let mut reports = vec![
        verify::esp_sweep(&rs, &std_sampler, samples)?,
        verify::drds_sweep(&rs, &std_sampler, samples, &cs)?,
        verify::lemma_b_sweep(&rs, &std_sampler, samples, &cs)?,
        verify::lemma_tilde_sweep(&rs, &std_sampler, samples, &cs)?,
        verify::rho_sigma_sweep(&rs, &std_sampler, samples)?,
        verify::expsum_sweep(rs.n(), 3, 50, seed)?.0,
        verify::kernel_sweep(&ev, &std_sampler, samples, heat_samples)?,
    ];
    for mode in [SignMode::Positive, SignMode::Negative] {
        let cfg = match mode {
            SignMode::Positive => BarrierConfig::at_c_minus(&rs, Convention::Sigma)?,
            SignMode::Negative => BarrierConfig::at_c_plus(&rs, Convention::Sigma)?,
        };
        reports.push(certify_lambda_signs(&rs, &cfg, mode, &std_sampler, samples)?);
        reports.push(monotone_sweep(&ev, &cfg, mode, seed, rays, points, 10.0)?);
    }
    reports.push(ratio_sweep(&ev, &ratio_sampler, samples)?);
    let k_min = rs.kappa_min();
    reports.push(rank1_ratio_sweep(k_min, seed, samples, 8.0)?);
    reports.push(heat_residual_sweep(&ev, &hc, 1.0, &ChamberSampler::new(&rs, seed, 0.2, 3.0)?, heat_samples, 1e-3)?);
    for t in [0.1, 1.0, 10.0] {
        reports.push(heat_envelope_sweep(&ev, &hc, t, &ratio_sampler, heat_samples)?);
    }
    Ok(AggregateReport::new(reports, start.elapsed().as_secs_f64()))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let format = cli.format;
    let csv_unsupported = |name: &str| {
        DunklError::Precondition(format!("--format csv is not available for `{name}`"))
    };
    Ok(match &cli.command {
        Command::Eval { system, x, y, tol, max_terms } => {
            let rs = system.system_nonnegative()?;
            let opts = SeriesOptions {
                tol: *tol,
                max_terms: *max_terms,
                ..SeriesOptions::default()
            };
            let kv = KernelEvaluator::new(&rs).kernel_series(x, y, &opts)?;
            let records: Vec<EvalRecord> = kv
                .iter()
                .map(|(w, value)| EvalRecord {
                    w: w.to_string(),
                    value,
                    bound: kv.truncation_bound,
                    terms: kv.terms_used,
                })
                .collect();
            Outcome::Records {
                json: serde_json::to_value(&records).expect("plain records serialize"),
                csv: Some(csv_bytes(&records)?),
                passed: true,
            }
        }
        Command::Rank1 { kappa, x, y, samples, seed, r_max } => match (x, y) {
            (Some(x), Some(y)) => {
                let (plus, minus) = kernel_rank1(*kappa, *x, *y, &SeriesOptions::default())?;
                let h = 1e-4 * (1.0 + x.abs());
                let residual = if *x > 2.0 * h {
                    Some(rank1_system_residual(*kappa, *x, *y, h)?)
                } else {
                    None
                };
                let json = serde_json::json!({
                    "kappa": kappa, "x": x, "y": y, "e_plus": plus, "e_minus": minus, "system_residual": residual,
                });
                let passed = residual.map_or(true, |r| r < 1e-6);
                Outcome::Records { json, csv: None, passed }
            }
            (None, None) => Outcome::Report(rank1_ratio_sweep(*kappa, *seed, *samples, *r_max)?),
            _ => return Err(DunklError::Precondition("give both --x and --y, or neither".into())),
        },
        Command::Lemmas { which } => run_lemma(which, format)?,
        Command::CertifySigns { system, sampling, barrier } => {
            let rs = system.system()?;
            let cfg = barrier.config(&rs)?;
            let sampler = sampling.sampler(&rs)?;
            let report = certify_lambda_signs(&rs, &cfg, barrier.mode.into(), &sampler, sampling.samples)?;
            if format == Format::Csv {
                Outcome::Records {
                    json: serde_json::Value::Null,
                    csv: Some(csv_rows(&lambda_sign_rows(&rs, &cfg, &sampler, sampling.samples)?)?),
                    passed: report.passed,
                }
            } else {
                Outcome::Report(report)
            }
        }
        Command::Monotone { system, barrier, rays, points, t_max, seed } => {
            let rs = system.system()?;
            let cfg = barrier.config(&rs)?;
            let ev = KernelEvaluator::new(&rs);
            Outcome::Report(monotone_sweep(&ev, &cfg, barrier.mode.into(), *seed, *rays, *points, *t_max)?)
        }
        Command::EnvelopeRatio { system, samples, seed, r_max } => {
            let rs = system.system()?;
            let ev = KernelEvaluator::new(&rs);
            let sampler = ChamberSampler::new(&rs, *seed, 1e-2, *r_max)?;
            let report = ratio_sweep(&ev, &sampler, *samples)?;
            if format == Format::Csv {
                Outcome::Records {
                    json: serde_json::Value::Null,
                    csv: Some(csv_rows(&ratio_sweep_rows(&ev, &sampler, *samples)?)?),
                    passed: report.passed,
                }
            } else {
                Outcome::Report(report)
            }
        }
        Command::Heat { system, t, x, y, ck } => {
            let rs = system.system_nonnegative()?;
            let hc = heat_config(&rs, *ck)?;
            let value = heat(&KernelEvaluator::new(&rs), &hc, *t, x, y)?;
            let json = serde_json::json!({ "t": t, "x": [x.x, x.y], "y": [y.x, y.y], "ck": hc.ck, "value": value });
            Outcome::Records { json, csv: None, passed: value > 0.0 }
        }
        Command::HeatResidual { system, t, x, y, h_step, samples, seed, ck } => {
            let rs = system.system_nonnegative()?;
            let hc = heat_config(&rs, *ck)?;
            let ev = KernelEvaluator::new(&rs);
            match (x, y) {
                (Some(x), Some(y)) => {
                    let r = heat_equation_residual(&ev, &hc, *t, x, y, *h_step)?;
                    let json = serde_json::to_value(r).expect("plain record serializes");
                    Outcome::Records { json, csv: None, passed: r.residual < HEAT_RESIDUAL_TOL }
                }
                (None, None) => {
                    let sampler = ChamberSampler::new(&rs, *seed, 0.2, 3.0)?;
                    Outcome::Report(heat_residual_sweep(&ev, &hc, *t, &sampler, *samples, *h_step)?)
                }
                _ => return Err(DunklError::Precondition("give both --x and --y, or neither".into())),
            }
        }
        Command::HeatEnvelope { system, t, samples, seed, r_max, ck } => {
            let rs = system.system()?;
            let hc = heat_config(&rs, *ck)?;
            let ev = KernelEvaluator::new(&rs);
            let sampler = ChamberSampler::new(&rs, *seed, 1e-2, *r_max)?;
            let start = Instant::now();
            let reports = t
                .iter()
                .map(|&t| heat_envelope_sweep(&ev, &hc, t, &sampler, *samples))
                .collect::<Result<Vec<_>>>()?;
            Outcome::Aggregate(AggregateReport::new(reports, start.elapsed().as_secs_f64()))
        }
        Command::ReportAll { system, seed, samples, rays, points } => {
            Outcome::Aggregate(report_all(system, *seed, *samples, *rays, *points)?)
        }
    })
    .and_then(|o| match (&o, format) {
        (Outcome::Report(r), Format::Csv) => Err(csv_unsupported(&r.name)),
        (Outcome::Aggregate(_), Format::Csv) => Err(csv_unsupported("aggregate reports")),
        (Outcome::Records { csv: None, .. }, Format::Csv) => Err(csv_unsupported("this subcommand")),
        _ => Ok(o),
    })
}

fn is_configuration_error(e: &DunklError) -> bool {
    matches!(
        e,
        DunklError::InvalidOrder(_)
            | DunklError::NonPositiveMultiplicity(_)
            | DunklError::MultiplicityArity { .. }
            | DunklError::OutsideChamber(..)
            | DunklError::NonFinite
            | DunklError::DomainGuard { .. }
            | DunklError::Precondition(_)
    )
}

fn workers(cli: &Cli) -> std::result::Result<Option<usize>, String> {
    if let Some(w) = cli.workers {
        return Ok(Some(w));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|e| format!("{WORKERS_ENV}={v}: {e}")),
        Err(_) => Ok(None),
    }
}

fn render(cli: &Cli, outcome: Outcome) -> Result<(Vec<u8>, bool)> {
    let to_err = |e: serde_json::Error| DunklError::Precondition(e.to_string());
    Ok(match outcome {
        Outcome::Report(r) => {
            let r = if cli.no_timing { r.without_timing() } else { r };
            let passed = r.passed;
            (r.to_json()?.into_bytes(), passed)
        }
        Outcome::Aggregate(a) => {
            let a = if cli.no_timing { a.without_timing() } else { a };
            let passed = a.passed;
            (a.to_json()?.into_bytes(), passed)
        }
        Outcome::Records { json, csv, passed } => match cli.format {
            Format::Csv => (csv.unwrap_or_default(), passed),
            Format::Json => (serde_json::to_string_pretty(&json).map_err(to_err)?.into_bytes(), passed),
        },
    })
}

fn emit(cli: &Cli, mut bytes: Vec<u8>) -> std::io::Result<()> {
    if cli.format == Format::Json {
        bytes.push(b'\n');
    }
    match &cli.output {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let workers = match workers(cli) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            eprintln!("error: the worker count must be positive");
            return 2;
        }
        builder = builder.num_threads(w);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let result = pool.install(|| dispatch(cli).and_then(|o| render(cli, o)));
    match result {
        Ok((bytes, passed)) => {
            if let Err(e) = emit(cli, bytes) {
                eprintln!("error: cannot write the report: {e}");
                return 2;
            }
            if passed {
                0
            } else {
                eprintln!("check failed; see the report for the violations");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_configuration_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Parses `std::env::args` and runs.
pub fn main() -> i32 {
    run(&Cli::parse())
}
