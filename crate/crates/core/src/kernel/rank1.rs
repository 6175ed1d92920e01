//! The rank-one kernel, `W = {±1}` acting on the real line.

use super::mmatrix::Coupling;
use super::series::{SeriesEngine, SeriesOptions};
use crate::error::{DunklError, Result};

fn engine(kappa: f64) -> SeriesEngine {
    SeriesEngine::new(Coupling::new(vec![vec![(1, kappa)], vec![(0, kappa)]]))
}

fn check(kappa: f64, x: f64, y: f64, opts: &SeriesOptions) -> Result<()> {
    if !x.is_finite() || !y.is_finite() || !kappa.is_finite() {
        return Err(DunklError::NonFinite);
    }
    if kappa < 0.0 {
        return Err(DunklError::NonPositiveMultiplicity(kappa));
    }
    let product = (x * y).abs();
    if product > opts.max_norm_product {
        return Err(DunklError::DomainGuard {
            product,
            limit: opts.max_norm_product,
        });
    }
    Ok(())
}

/// `(E(x, y), E(x, -y))` for the multiplicity `κ ≥ 0`.
pub fn kernel_rank1(kappa: f64, x: f64, y: f64, opts: &SeriesOptions) -> Result<(f64, f64)> {
    check(kappa, x, y, opts)?;
    let s = engine(kappa).sum(&[x * y, -x * y], opts)?;
    Ok((s.shift.exp() * s.sums[0], s.shift.exp() * s.sums[1]))
}

/// Residual of the system
///
/// `∂_x E(x, ±y) + (κ/x)(E(x, ±y) - E(x, ∓y)) = ±y E(x, ±y)`
///
/// with the derivative taken by central differences of step `h`. Each
/// equation is normalized by the sum of the magnitudes of its terms; the
/// larger of the two is returned. Needs `x > h > 0`.
pub fn rank1_system_residual(kappa: f64, x: f64, y: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && x > h) {
        return Err(DunklError::Precondition(format!("need x > h > 0, got x = {x}, h = {h}")));
    }
    let opts = SeriesOptions::default();
    let eng = engine(kappa);
    let eval = |x: f64| -> Result<(f64, f64)> {
        check(kappa, x, y, &opts)?;
        let s = eng.sum(&[x * y, -x * y], &opts)?;
        Ok((s.shift.exp() * s.sums[0], s.shift.exp() * s.sums[1]))
    };
    let (p, m) = eval(x)?;
    let (p_hi, m_hi) = eval(x + h)?;
    let (p_lo, m_lo) = eval(x - h)?;
    let dp = (p_hi - p_lo) / (2.0 * h);
    let dm = (m_hi - m_lo) / (2.0 * h);

    let res_p = (dp + kappa / x * (p - m) - y * p).abs() / (dp.abs() + (kappa / x * (p - m)).abs() + (y * p).abs());
    let res_m = (dm + kappa / x * (m - p) + y * m).abs() / (dm.abs() + (kappa / x * (m - p)).abs() + (y * m).abs());
    Ok(res_p.max(res_m))
}
