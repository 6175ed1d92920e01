//! Barrier functions `Q_w`, the radial drifts `Λ_w` of the rescaled kernels
//! `Ẽ_w`, and the thresholds on `c` that fix the sign of every `Λ_w`.

mod envelope;
mod sweeps;

use serde::{Deserialize, Serialize};

pub use envelope::{
    envelope, intermediate_factor_ln, ln_envelope, rank1_window, EnvelopeCase, Rank1Thresholds, WindowModel,
};
pub use sweeps::{
    certify_lambda_signs, lambda_sign_rows, monotone_envelope_scan, monotone_sweep, rank1_ratio_sweep, ratio_sweep, ratio_sweep_rows,
    scan_lambda_signs, MonotoneScan, SignMode, MONOTONE_SLACK, SIGN_SLACK,
};

use crate::error::{DunklError, Result};
use crate::kernel::KernelEvaluator;
use crate::quantities::{relative_residual, PairGeometry};
use crate::root_system::{GroupElement, Point, RootSystem};

/// Which product enters `Ẽ_w`: `∏(1 + c⟨α,x⟩⟨α,y⟩)^κ` (`Product`) or
/// `∏(1 + 2c⟨α,x⟩⟨α,y⟩)^κ` (`Sigma`). With `Sigma` each factor is the `D_s`
/// of the matching reflection and `Λ_Id` vanishes identically.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Product,
    #[default]
    Sigma,
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Product => "product",
            Convention::Sigma => "sigma",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `Λ_w ≥ 0` for `w ≠ Id` when `0 < c ≤ c_minus`.
    pub c_minus: f64,
    /// `Λ_w ≤ 0` for `w ≠ Id` when `c ≥ c_plus`.
    pub c_plus: f64,
}

/// `c_minus = min(1/(κmax(n+1)+1), 1/(2(1+κmax)n))`, `c_plus = 2^{n-1}/κmin`.
pub fn thresholds(rs: &RootSystem) -> Result<Thresholds> {
    let (kmin, kmax) = (rs.kappa_min(), rs.kappa_max());
    if !(kmin > 0.0) {
        return Err(DunklError::NonPositiveMultiplicity(kmin));
    }
    let n = rs.n() as f64;
    let reflections = 1.0 / (kmax * (n + 1.0) + 1.0);
    let rotations = 1.0 / (2.0 * (1.0 + kmax) * n);
    Ok(Thresholds {
        c_minus: reflections.min(rotations),
        c_plus: 2f64.powi(rs.n() as i32 - 1) / kmin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierConfig {
    pub c: f64,
    pub convention: Convention,
}

impl BarrierConfig {
    pub fn new(c: f64, convention: Convention) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(DunklError::Precondition(format!("c must be positive, got {c}")));
        }
        Ok(BarrierConfig { c, convention })
    }

    pub fn at_c_minus(rs: &RootSystem, convention: Convention) -> Result<Self> {
        Self::new(thresholds(rs)?.c_minus, convention)
    }

    pub fn at_c_plus(rs: &RootSystem, convention: Convention) -> Result<Self> {
        Self::new(thresholds(rs)?.c_plus, convention)
    }
}

/// Barrier data for one pair `(x, y)`.
#[derive(Clone, Debug)]
pub struct Barrier<'a> {
    rs: &'a RootSystem,
    g: PairGeometry,
    convention: Convention,
    /// `Q_w` in [`RootSystem::elements`] order.
    q: Vec<f64>,
}

impl<'a> Barrier<'a> {
    pub fn new(rs: &'a RootSystem, cfg: &BarrierConfig, x: &Point, y: &Point) -> Result<Self> {
        Ok(Self::from_geometry(rs, PairGeometry::new(rs, x, y, cfg.c)?, cfg.convention))
    }

    pub fn from_geometry(rs: &'a RootSystem, g: PairGeometry, convention: Convention) -> Self {
        let n = rs.n();
        // D_S / D_R paired factor by factor (D_{r_0} = 1)
        let ratio: f64 = (0..n).map(|k| g.ds[k] / g.dr[k]).product();
        let q = rs
            .elements()
            .map(|w| match w {
                GroupElement::Rotation(0) => 1.0,
                GroupElement::Rotation(j) => g.dr[j] * ratio,
                GroupElement::Reflection(j) => g.ds[j],
            })
            .collect();
        Barrier { rs, g, convention, q }
    }

    pub fn geometry(&self) -> &PairGeometry {
        &self.g
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// `Q_w`: 1 for the identity, `D_{s_j}` for `s_j`, `D_{r_j} D_S / D_R` for `r_j`.
    pub fn q(&self, w: GroupElement) -> f64 {
        self.q[self.rs.slot(w)]
    }

    /// `φ_m` in the factor `1 + c φ_m` attached to the root `α_m`.
    pub fn root_factor(&self, m: usize) -> f64 {
        match self.convention {
            Convention::Product => self.g.root_products[m],
            Convention::Sigma => 2.0 * self.g.root_products[m],
        }
    }

    /// `Σ_α κ(α) ln(1 + c φ_α)`.
    pub fn ln_weight(&self) -> f64 {
        (0..self.rs.n())
            .map(|m| self.rs.kappa(m) * (self.g.c * self.root_factor(m)).ln_1p())
            .sum()
    }

    /// `⟨x, ∇_x⟩ Q_w / Q_w`, from the degree-one homogeneity of `ρ` and `σ` in `x`.
    pub fn radial_log_derivative(&self, w: GroupElement) -> f64 {
        let g = &self.g;
        let c = g.c;
        match w {
            GroupElement::Rotation(0) => 0.0,
            GroupElement::Reflection(j) => c * g.sigma[j] / g.ds[j],
            GroupElement::Rotation(j) => {
                let s: f64 = (0..g.n).map(|k| c * g.sigma[k] / g.ds[k]).sum();
                let r: f64 = (1..g.n).map(|k| c * g.rho[k] / g.dr[k]).sum();
                c * g.rho[j] / g.dr[j] + s - r
            }
        }
    }

    /// `Λ_w` and the sum of the magnitudes of its terms.
    fn lambda_with_scale(&self, w: GroupElement) -> (f64, f64) {
        let rs = self.rs;
        let g = &self.g;
        let displacement = match w {
            GroupElement::Rotation(j) => g.rho[j],
            GroupElement::Reflection(j) => g.sigma[j],
        };
        let dlog = self.radial_log_derivative(w);
        let qw = self.q(w);
        let mut value = displacement - dlog;
        let mut scale = displacement.abs() + dlog.abs();
        for m in 0..rs.n() {
            let v = rs.compose(rs.reflection_for_root(m), w);
            let a = 1.0 / (1.0 + g.c * self.root_factor(m));
            let b = qw / self.q(v);
            let k = rs.kappa(m);
            value += k * (a - b);
            scale += k * (a.abs() + b.abs());
        }
        (value, scale)
    }

    /// `Λ_w = ⟨x, y - w.y⟩ - ⟨x,∇_x⟩Q_w/Q_w + Σ_α κ(α){1/(1 + cφ_α) - Q_w/Q_{s_α w}}`.
    pub fn lambda(&self, w: GroupElement) -> f64 {
        self.lambda_with_scale(w).0
    }

    /// `Λ_w` for every element, in [`RootSystem::elements`] order.
    pub fn lambdas(&self) -> Vec<f64> {
        self.rs.elements().map(|w| self.lambda(w)).collect()
    }

    /// The closed forms for reflections and rotations written in terms of
    /// `ρ`, `σ` and the `D` factors. `None` for the identity.
    ///
    /// These agree with [`Barrier::lambda`] under [`Convention::Sigma`].
    pub fn lambda_specialized(&self, w: GroupElement) -> Option<f64> {
        let g = &self.g;
        let rs = self.rs;
        let n = g.n as i64;
        let c = g.c;
        let ln_dr: f64 = g.dr.iter().map(|d| d.ln()).sum();
        let ln_ds: f64 = g.ds.iter().map(|d| d.ln()).sum();
        match w {
            GroupElement::Rotation(0) => None,
            GroupElement::Reflection(j) => {
                let ji = j as i64;
                let dr_over_ds = (ln_dr - ln_ds).exp();
                let mut v = g.sigma[j] - c * g.sigma[j] / g.ds[j] - rs.kappa(j) * (g.ds[j] - 1.0 / g.ds[j]);
                for k in (0..n).filter(|&k| k != ji) {
                    let ku = k as usize;
                    v -= rs.kappa(ku) * (g.ds[j] / g.dr(k - ji) * dr_over_ds - 1.0 / g.ds[ku]);
                }
                Some(v)
            }
            GroupElement::Rotation(j) => {
                let ji = j as i64;
                let ds_over_dr = (ln_ds - ln_dr).exp();
                let mut v = g.rho[j];
                for k in 0..g.n {
                    v -= c * g.sigma[k] / g.ds[k];
                }
                for k in (1..g.n).filter(|&k| k != j) {
                    v += c * g.rho[k] / g.dr[k];
                }
                for k in 0..n {
                    let ku = k as usize;
                    v -= rs.kappa(ku) * (g.dr[j] / g.ds(k - ji) * ds_over_dr - 1.0 / g.ds[ku]);
                }
                Some(v)
            }
        }
    }

    /// `|general - specialized|` relative to the magnitude of the terms.
    pub fn specialized_residual(&self, w: GroupElement) -> Option<f64> {
        let special = self.lambda_specialized(w)?;
        let (general, scale) = self.lambda_with_scale(w);
        Some(relative_residual(general, special, scale))
    }
}

/// `Ẽ_w(x, y)` for every `w`, in [`RootSystem::elements`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeValues {
    pub elements: Vec<GroupElement>,
    pub values: Vec<f64>,
    pub ln_values: Vec<f64>,
}

impl TildeValues {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `Ẽ_w = E(x, w.y) e^{-⟨x,y⟩} Q_w ∏_α (1 + cφ_α)^{κ(α)}`, assembled in log space.
pub fn tilde_e(ev: &KernelEvaluator, cfg: &BarrierConfig, x: &Point, y: &Point) -> Result<TildeValues> {
    let rs = ev.root_system();
    let b = Barrier::new(rs, cfg, x, y)?;
    let kv = ev.evaluate(x, y)?;
    let base = b.ln_weight() - x.dot(y);
    let ln_values: Vec<f64> = rs
        .elements()
        .map(|w| kv.ln(w) + base + b.q(w).ln())
        .collect();
    Ok(TildeValues {
        elements: rs.elements().collect(),
        values: ln_values.iter().map(|v| v.exp()).collect(),
        ln_values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaBReport {
    pub j: usize,
    pub definitional: f64,
    pub closed_form: f64,
    pub c_j: f64,
    pub residual: f64,
    pub bounds_hold: bool,
}

/// `B_j = D_{s_j} - 1/D_{s_j} + Σ_{k≠j}{D_{s_j} D_R/(D_{r_{k-j}} D_S) - 1/D_{s_k}}`
/// against `cσ_j C_j` with `C_j = ∏_{k≠j} cσ_k/D_{s_k} + 𝔇_S`.
pub fn check_lemma_b(g: &PairGeometry, j: usize) -> LemmaBReport {
    let n = g.n;
    let ji = j as i64;
    let c = g.c;
    let dr_over_ds: f64 = (0..n).map(|k| g.dr[k] / g.ds[k]).product();
    let mut def = g.ds[j] - 1.0 / g.ds[j];
    let mut scale = g.ds[j] + 1.0 / g.ds[j];
    for k in (0..n).filter(|&k| k != j) {
        let a = g.ds[j] / g.dr(k as i64 - ji) * dr_over_ds;
        let b = 1.0 / g.ds[k];
        def += a - b;
        scale += a + b;
    }
    let prod: f64 = (0..n).filter(|&k| k != j).map(|k| c * g.sigma[k] / g.ds[k]).product();
    let c_j = prod + g.frak_ds;
    let closed = c * g.sigma[j] * c_j;
    let lower = 2f64.powi(1 - n as i32);
    LemmaBReport {
        j,
        definitional: def,
        closed_form: closed,
        c_j,
        residual: relative_residual(def, closed, scale),
        bounds_hold: c_j >= lower * (1.0 - 1e-12) && c_j <= (n + 1) as f64 * (1.0 + 1e-12),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaTildeReport {
    pub j: usize,
    pub a_definitional: f64,
    pub a_closed: f64,
    pub b_definitional: f64,
    pub b_closed: f64,
    pub b_closed_factored: f64,
    pub frak_dr: f64,
    pub residual: f64,
    pub bounds_hold: bool,
}

/// `Ã_j = Σ_k cσ_k/D_{s_k} - Σ_{k≠0,j} cρ_k/D_{r_k}` and
/// `B̃_j = Σ_k {D_{r_j} D_S/(D_{s_{k-j}} D_R) - 1/D_{s_k}}` against
/// `cρ_j/D_{r_j} + c^n𝔖𝔇_R/D_S`, `cρ_j𝔇_R + c^n𝔖𝔇_R/D_S` and
/// `(D_{r_j}D_S/D_R - 1)𝔇_S`. Requires `j ≢ 0`.
pub fn check_lemma_tilde(g: &PairGeometry, j: usize) -> Result<LemmaTildeReport> {
    let n = g.n;
    if j % n == 0 {
        return Err(DunklError::Precondition("the rotation index must be nonzero mod n".into()));
    }
    let j = j % n;
    let ji = j as i64;
    let c = g.c;
    let ds_over_dr: f64 = (0..n).map(|k| g.ds[k] / g.dr[k]).product();
    // c^n 𝔖 / D_S as a product of bounded factors
    let cs_over_ds: f64 = (0..n).map(|k| c * g.sigma[k] / g.ds[k]).product();

    let mut a_def = 0.0;
    let mut a_scale = 0.0;
    for k in 0..n {
        let t = c * g.sigma[k] / g.ds[k];
        a_def += t;
        a_scale += t;
    }
    for k in (1..n).filter(|&k| k != j) {
        let t = c * g.rho[k] / g.dr[k];
        a_def -= t;
        a_scale += t;
    }
    let a_closed = c * g.rho[j] / g.dr[j] + cs_over_ds * g.frak_dr;

    let mut b_def = 0.0;
    let mut b_scale = 0.0;
    for k in 0..n as i64 {
        let p = g.dr[j] / g.ds(k - ji) * ds_over_dr;
        let q = 1.0 / g.ds(k);
        b_def += p - q;
        b_scale += p + q;
    }
    let b_closed = c * g.rho[j] * g.frak_dr + cs_over_ds * g.frak_dr;
    let outer = g.dr[j] * ds_over_dr;
    let b_factored = (outer - 1.0) * g.frak_ds;

    let residual = relative_residual(a_def, a_closed, a_scale)
        .max(relative_residual(b_def, b_closed, b_scale))
        .max(relative_residual(b_factored, b_closed, (outer + 1.0) * g.frak_ds));
    Ok(LemmaTildeReport {
        j,
        a_definitional: a_def,
        a_closed,
        b_definitional: b_def,
        b_closed,
        b_closed_factored: b_factored,
        frak_dr: g.frak_dr,
        residual,
        bounds_hold: g.frak_dr >= 1.0 - 1e-12 && g.frak_dr <= n as f64 * (1.0 + 1e-12),
    })
}
