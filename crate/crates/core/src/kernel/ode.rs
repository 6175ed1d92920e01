//! Direct integration of the radial system
//! `f_w'(t) = ⟨x, w.y⟩ f_w(t) - (L f)_w(t) / t` from a small seed time to 1.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::mmatrix::Coupling;
use crate::error::{DunklError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub t_seed: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            t_seed: 0.02,
            rtol: 1e-11,
            max_steps: 2_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Rhs<'a> {
    coupling: &'a Coupling,
    b: &'a [f64],
    scratch: Vec<f64>,
}

impl Rhs<'_> {
    fn eval(&mut self, t: f64, f: &[f64], out: &mut [f64]) {
        self.coupling.apply_laplacian(f, &mut self.scratch);
        for i in 0..f.len() {
            out[i] = self.b[i] * f[i] - self.scratch[i] / t;
        }
    }
}

/// Taylor seed `Σ_k a_k t0^k`, solving each order with a general dense LU.
/// Terms are added until they no longer change the sum.
fn taylor_seed(coupling: &Coupling, b: &[f64], t0: f64) -> Result<Vec<f64>> {
    let m = coupling.size();
    let mut a = DVector::from_element(m, 1.0);
    let mut sum = a.clone();
    for k in 1..=400 {
        let dense = coupling.shifted_dense(k as f64);
        let lu = DMatrix::from_row_slice(m, m, &dense).lu();
        let rhs = DVector::from_iterator(m, (0..m).map(|i| b[i] * a[i] * t0));
        a = lu.solve(&rhs).ok_or_else(|| DunklError::Precondition("singular seed system".into()))?;
        sum += &a;
        let norm = a.amax();
        let floor = sum.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
        if norm <= 1e-18 * floor {
            return Ok(sum.iter().copied().collect());
        }
    }
    Err(DunklError::SeriesNotConverged {
        tol: 1e-18,
        max_terms: 400,
    })
}

/// Returns `f(1)` and the number of accepted steps.
pub(crate) fn integrate(coupling: &Coupling, b: &[f64], opts: &OdeOptions) -> Result<(Vec<f64>, usize)> {
    if !(opts.t_seed > 0.0 && opts.t_seed <= 0.1) {
        return Err(DunklError::Precondition(format!("t_seed must lie in (0, 0.1], got {}", opts.t_seed)));
    }
    if !(opts.rtol > 0.0) {
        return Err(DunklError::Precondition(format!("rtol must be positive, got {}", opts.rtol)));
    }
    let m = coupling.size();
    let c0 = b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    // keep the seed inside the range where the unshifted Taylor sum is benign
    let t0 = if c0 > 0.0 { opts.t_seed.min(0.5 / c0) } else { opts.t_seed };
    let mut f = taylor_seed(coupling, b, t0)?;
    if c0 == 0.0 {
        return Ok((f, 0));
    }

    let mut rhs = Rhs {
        coupling,
        b,
        scratch: vec![0.0; m],
    };
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; m]; 7];
    let mut stage = vec![0.0; m];
    let mut fnew = vec![0.0; m];

    let mut t = t0;
    let mut h = 0.01 * t0;
    let mut steps = 0usize;
    rhs.eval(t, &f, &mut k[0]);
    while t < 1.0 {
        if steps >= opts.max_steps {
            return Err(DunklError::StepUnderflow { t });
        }
        let last = t + h >= 1.0;
        if last {
            h = 1.0 - t;
        }
        for i in 0..m {
            stage[i] = f[i] + h * A21 * k[0][i];
        }
        rhs.eval(t + C2 * h, &stage, &mut k[1]);
        for i in 0..m {
            stage[i] = f[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs.eval(t + C3 * h, &stage, &mut k[2]);
        for i in 0..m {
            stage[i] = f[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs.eval(t + C4 * h, &stage, &mut k[3]);
        for i in 0..m {
            stage[i] = f[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs.eval(t + C5 * h, &stage, &mut k[4]);
        for i in 0..m {
            stage[i] = f[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        rhs.eval(t + h, &stage, &mut k[5]);
        for i in 0..m {
            fnew[i] = f[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        rhs.eval(t + h, &fnew, &mut k[6]);

        let mut err = 0.0_f64;
        for i in 0..m {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.rtol * f[i].abs().max(fnew[i].abs());
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            t = if last { 1.0 } else { t + h };
            std::mem::swap(&mut f, &mut fnew);
            k.swap(0, 6);
            steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t {
            return Err(DunklError::StepUnderflow { t });
        }
    }
    Ok((f, steps))
}
