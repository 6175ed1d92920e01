//! Power series in the radial variable.
//!
//! Writing `f_w(t) = E(tx, w.y) = Σ_k a_{w,k} t^k`, the radial equation gives
//! `(k·Id + L) a_k = B a_{k-1}` with `B = diag ⟨x, w.y⟩`. Pulling out
//! `e^{μt}` with `μ = min_w ⟨x, w.y⟩` replaces `B` by `B - μ ≥ 0`, and since
//! `(k·Id + L)^{-1}` is entrywise nonnegative every shifted coefficient is
//! nonnegative. The sum is then free of cancellation.

use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::mmatrix::{Coupling, ShiftedLaplacianLu};
use crate::error::{DunklError, Result};

/// Safety factor applied to the analytic tail bound.
pub const TAIL_SAFETY: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Relative tolerance on every returned value.
    pub tol: f64,
    pub max_terms: usize,
    /// Inputs with `|x|·|y|` above this are rejected.
    pub max_norm_product: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            tol: 1e-14,
            max_terms: 5000,
            max_norm_product: 100.0,
        }
    }
}

impl SeriesOptions {
    pub fn with_tol(tol: f64) -> Self {
        SeriesOptions {
            tol,
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(DunklError::Precondition(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_terms == 0 {
            return Err(DunklError::Precondition("max_terms must be positive".into()));
        }
        Ok(())
    }
}

/// Result of summing the shifted series at `t = 1`.
#[derive(Clone, Debug)]
pub(crate) struct SeriesSum {
    pub shift: f64,
    /// `Σ_k a'_{w,k}`, each ≥ 1.
    pub sums: Vec<f64>,
    /// Bound on the neglected tail of every entry, safety factor included.
    pub tail: f64,
    pub terms: usize,
}

/// Which diagonal is used on the right-hand side of the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesShift {
    /// `B` itself: the plain Taylor coefficients of `t ↦ E(tx, w.y)`.
    None,
    /// `B - min B`: coefficients of `e^{-μt} E(tx, w.y)`.
    Minimum,
}

/// Coefficient vectors `a_0, …, a_K` together with the constant `C` in
/// `|a_k|∞ ≤ C^k / k!`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesCoefficients {
    pub shift: SeriesShift,
    pub bound_constant: f64,
    pub coefficients: Vec<Vec<f64>>,
}

impl SeriesCoefficients {
    /// Largest value of `|a_k|∞ / (C^k/k!)` over all computed orders.
    pub fn worst_decay_ratio(&self) -> f64 {
        let c = self.bound_constant;
        let mut bound = 1.0_f64;
        let mut worst = 0.0_f64;
        for (k, a) in self.coefficients.iter().enumerate() {
            if k > 0 {
                bound *= c / k as f64;
            }
            let norm = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if bound > 0.0 {
                worst = worst.max(norm / bound);
            } else if norm > 0.0 {
                return f64::INFINITY;
            }
        }
        worst
    }
}

/// Factorizations of `k·Id + L`, grown on demand and shared between threads.
#[derive(Debug)]
pub(crate) struct SeriesEngine {
    coupling: Coupling,
    cache: RwLock<Arc<Vec<ShiftedLaplacianLu>>>,
}

impl SeriesEngine {
    pub fn new(coupling: Coupling) -> Self {
        SeriesEngine {
            coupling,
            cache: RwLock::new(Arc::new(Vec::new())),
        }
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// Factors for orders `1..=upto` (entry `k - 1` holds order `k`).
    fn factors(&self, upto: usize, cap: usize) -> Arc<Vec<ShiftedLaplacianLu>> {
        {
            let guard = self.cache.read().expect("factor cache poisoned");
            if guard.len() >= upto {
                return Arc::clone(&guard);
            }
        }
        let mut guard = self.cache.write().expect("factor cache poisoned");
        if guard.len() < upto {
            let mut grown: Vec<ShiftedLaplacianLu> = guard.as_ref().clone();
            let target = upto.max(2 * grown.len()).max(64).min(cap.max(upto));
            for k in (grown.len() + 1)..=target {
                grown.push(ShiftedLaplacianLu::factor(&self.coupling, k as f64));
            }
            *guard = Arc::new(grown);
        }
        Arc::clone(&guard)
    }

    pub fn sum(&self, b: &[f64], opts: &SeriesOptions) -> Result<SeriesSum> {
        opts.validate()?;
        let m = self.coupling.size();
        debug_assert_eq!(b.len(), m);
        let shift = b.iter().copied().fold(f64::INFINITY, f64::min);
        let delta: Vec<f64> = b.iter().map(|v| v - shift).collect();
        let c = delta.iter().copied().fold(0.0_f64, f64::max);

        let mut a = vec![1.0; m];
        let mut next = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        let mut sums = vec![1.0; m];
        if c == 0.0 {
            return Ok(SeriesSum {
                shift,
                sums,
                tail: 0.0,
                terms: 0,
            });
        }

        let mut factors = self.factors(64.min(opts.max_terms), opts.max_terms);
        for k in 1..=opts.max_terms {
            if factors.len() < k {
                factors = self.factors(k, opts.max_terms);
            }
            for i in 0..m {
                rhs[i] = delta[i] * a[i];
            }
            factors[k - 1].solve_into(&rhs, &mut next);
            std::mem::swap(&mut a, &mut next);
            let mut norm = 0.0_f64;
            for i in 0..m {
                sums[i] += a[i];
                norm = norm.max(a[i]);
            }
            if norm == 0.0 {
                return Ok(SeriesSum {
                    shift,
                    sums,
                    tail: 0.0,
                    terms: k,
                });
            }
            let q = c / (k + 1) as f64;
            if q < 1.0 {
                let tail = TAIL_SAFETY * norm * q / (1.0 - q);
                let smallest = sums.iter().copied().fold(f64::INFINITY, f64::min);
                if tail <= opts.tol * smallest {
                    return Ok(SeriesSum {
                        shift,
                        sums,
                        tail,
                        terms: k,
                    });
                }
            }
        }
        Err(DunklError::SeriesNotConverged {
            tol: opts.tol,
            max_terms: opts.max_terms,
        })
    }

    pub fn coefficients(&self, b: &[f64], shift: SeriesShift, terms: usize) -> SeriesCoefficients {
        let m = self.coupling.size();
        let (mu, bound_constant) = match shift {
            SeriesShift::None => (0.0, b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))),
            SeriesShift::Minimum => {
                let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi - lo)
            }
        };
        let factors = self.factors(terms, terms);
        let mut out = Vec::with_capacity(terms + 1);
        out.push(vec![1.0; m]);
        let mut rhs = vec![0.0; m];
        for k in 1..=terms {
            let prev = &out[k - 1];
            for i in 0..m {
                rhs[i] = (b[i] - mu) * prev[i];
            }
            let mut a = vec![0.0; m];
            factors[k - 1].solve_into(&rhs, &mut a);
            out.push(a);
        }
        SeriesCoefficients {
            shift,
            bound_constant,
            coefficients: out,
        }
    }
}
