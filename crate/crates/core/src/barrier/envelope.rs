//! The two-sided envelope of `E(x, w.y)` and the constant window it holds in.

use serde::{Deserialize, Serialize};

use super::thresholds;
use crate::error::{DunklError, Result};
use crate::quantities::{comparability_constants, PairGeometry, QuantityKind};
use crate::root_system::{GroupElement, Point, RootSystem, CHAMBER_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvelopeCase {
    Identity,
    S0,
    S1,
    SOther,
    R1,
    RLast,
    ROther,
}

impl EnvelopeCase {
    pub fn of(rs: &RootSystem, w: GroupElement) -> Self {
        let n = rs.n();
        match w {
            GroupElement::Rotation(0) => EnvelopeCase::Identity,
            GroupElement::Reflection(0) => EnvelopeCase::S0,
            GroupElement::Reflection(1) => EnvelopeCase::S1,
            GroupElement::Reflection(_) => EnvelopeCase::SOther,
            GroupElement::Rotation(1) => EnvelopeCase::R1,
            GroupElement::Rotation(j) if j == n - 1 => EnvelopeCase::RLast,
            GroupElement::Rotation(_) => EnvelopeCase::ROther,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            EnvelopeCase::Identity => "Id",
            EnvelopeCase::S0 => "s_0",
            EnvelopeCase::S1 => "s_1",
            EnvelopeCase::SOther => "s_other",
            EnvelopeCase::R1 => "r_1",
            EnvelopeCase::RLast => "r_{n-1}",
            EnvelopeCase::ROther => "r_other",
        }
    }
}

/// `ln` of the case factor multiplying `e^{⟨x,y⟩} ∏(1 + ⟨α,x⟩⟨α,y⟩)^{-κ}`.
fn ln_case_factor(rs: &RootSystem, x: &Point, y: &Point, w: GroupElement) -> f64 {
    let n = rs.n();
    let u0 = rs.root(0).dot(x) * rs.root(0).dot(y);
    let ul = rs.root(n - 1).dot(x) * rs.root(n - 1).dot(y);
    let inner = x.dot(y);
    let rt = rs.rtilde();
    let x_rty = x.dot(&(rt * y));
    let rtx_y = (rt * x).dot(y);
    let walls = u0.ln_1p() + ul.ln_1p();
    match EnvelopeCase::of(rs, w) {
        EnvelopeCase::Identity => 0.0,
        EnvelopeCase::S0 => -u0.ln_1p(),
        EnvelopeCase::S1 => -ul.ln_1p(),
        EnvelopeCase::SOther => -inner.ln_1p(),
        EnvelopeCase::R1 => x_rty.ln_1p() - walls - inner.ln_1p(),
        EnvelopeCase::RLast => rtx_y.ln_1p() - walls - inner.ln_1p(),
        EnvelopeCase::ROther => rtx_y.ln_1p() + x_rty.ln_1p() - walls - 2.0 * inner.ln_1p(),
    }
}

/// `ln` of the envelope; `x, y` must lie in the closed chamber.
pub fn ln_envelope(rs: &RootSystem, x: &Point, y: &Point, w: GroupElement) -> Result<f64> {
    for p in [x, y] {
        if !p.iter().all(|v| v.is_finite()) {
            return Err(DunklError::NonFinite);
        }
        if !rs.in_closed_chamber_tol(p, CHAMBER_TOL) {
            return Err(DunklError::OutsideChamber(p.x, p.y));
        }
    }
    let weight: f64 = (0..rs.n())
        .map(|m| rs.kappa(m) * (rs.root(m).dot(x) * rs.root(m).dot(y)).ln_1p())
        .sum();
    Ok(x.dot(y) - weight + ln_case_factor(rs, x, y, w))
}

/// The sharp envelope of `E(x, w.y)` on the closed chamber.
pub fn envelope(rs: &RootSystem, x: &Point, y: &Point, w: GroupElement) -> Result<f64> {
    Ok(ln_envelope(rs, x, y, w)?.exp())
}

/// `ln` of the factor in the form the envelope is first derived in:
/// 1, `1/(1+σ_j)` or `∏_{k≠0,j}(1+ρ_k) / ∏_k(1+σ_k)`.
pub fn intermediate_factor_ln(g: &PairGeometry, w: GroupElement) -> f64 {
    match w {
        GroupElement::Rotation(0) => 0.0,
        GroupElement::Reflection(j) => -g.sigma[j].ln_1p(),
        GroupElement::Rotation(j) => {
            let num: f64 = (1..g.n).filter(|&k| k != j).map(|k| g.rho[k].ln_1p()).sum();
            let den: f64 = g.sigma.iter().map(|s| s.ln_1p()).sum();
            num - den
        }
    }
}

/// Range `[lo, hi]` of `(1+u)/(1+v)` given `u/v ∈ [a, b]`.
fn f_range(a: f64, b: f64) -> (f64, f64) {
    (a.min(1.0), b.max(1.0))
}

/// Relative widening applied to the numerically optimised comparability constants.
const COMPARABILITY_WIDENING: f64 = 1e-6;

/// Bounds on `E(x, w.y) / envelope` implied by the monotonicity argument at
/// `c_minus` (upper) and `c_plus` (lower), for the sigma convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowModel {
    pub n: usize,
    pub gamma: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    /// `(lo, hi)` with `lo⟨x,y⟩ ≤ σ_j ≤ hi⟨x,y⟩`, indexed by `j` (`None` at the walls).
    pub sigma_bounds: Vec<Option<(f64, f64)>>,
    /// Same for `ρ_j`, `2 ≤ j ≤ n-2`.
    pub rho_bounds: Vec<Option<(f64, f64)>>,
    pub sin_pi_n: f64,
}

impl WindowModel {
    pub fn new(rs: &RootSystem) -> Result<Self> {
        let t = thresholds(rs)?;
        let n = rs.n();
        let widen = |(lo, hi): (f64, f64)| (lo * (1.0 - COMPARABILITY_WIDENING), hi * (1.0 + COMPARABILITY_WIDENING));
        let mut sigma_bounds = vec![None; n];
        for (j, slot) in sigma_bounds.iter_mut().enumerate().skip(2) {
            *slot = Some(widen(comparability_constants(rs, j, QuantityKind::Sigma)?));
        }
        let mut rho_bounds = vec![None; n];
        for (j, slot) in rho_bounds.iter_mut().enumerate().take(n - 1).skip(2) {
            *slot = Some(widen(comparability_constants(rs, j, QuantityKind::Rho)?));
        }
        Ok(WindowModel {
            n,
            gamma: rs.gamma(),
            c_minus: t.c_minus,
            c_plus: t.c_plus,
            sigma_bounds,
            rho_bounds,
            sin_pi_n: (std::f64::consts::PI / n as f64).sin(),
        })
    }

    /// Range of `∏(1 + cσ_k)/(1 + ξ_k)` style factors for `w` at deformation `c`,
    /// i.e. of `Q_w · G_w` where `G_w` is the envelope case factor.
    pub fn case_range(&self, w: GroupElement, c: f64) -> (f64, f64) {
        let n = self.n;
        let sigma_term = |k: usize| -> (f64, f64) {
            match self.sigma_bounds[k] {
                None => f_range(2.0 * c, 2.0 * c),
                Some((lo, hi)) => f_range(c * lo, c * hi),
            }
        };
        let rho_term = |k: usize| -> (f64, f64) {
            if k == 1 || k == n - 1 {
                let r = 1.0 / (2.0 * c * self.sin_pi_n);
                f_range(r, r)
            } else {
                let (lo, hi) = self.rho_bounds[k].expect("generic rotation index");
                f_range(1.0 / (c * hi), 1.0 / (c * lo))
            }
        };
        let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0, a.1 * b.1);
        match w {
            GroupElement::Rotation(0) => (1.0, 1.0),
            GroupElement::Reflection(j) => sigma_term(j),
            GroupElement::Rotation(j) => {
                let mut acc = (1.0, 1.0);
                for k in 0..n {
                    acc = mul(acc, sigma_term(k));
                }
                for k in (1..n).filter(|&k| k != j) {
                    acc = mul(acc, rho_term(k));
                }
                acc
            }
        }
    }

    /// Range of `∏(1 + 2c⟨α,x⟩⟨α,y⟩)^κ / ∏(1 + ⟨α,x⟩⟨α,y⟩)^κ`.
    fn weight_range(&self, c: f64) -> (f64, f64) {
        let a = 2.0 * c;
        (a.min(1.0).powf(self.gamma), a.max(1.0).powf(self.gamma))
    }

    /// `[lower, upper]` for `E(x, w.y) / envelope(x, y, w)`.
    pub fn ratio_bounds(&self, w: GroupElement) -> (f64, f64) {
        let (_, hi_plus) = {
            let (a, b) = self.case_range(w, self.c_plus);
            let (p, q) = self.weight_range(self.c_plus);
            (a * p, b * q)
        };
        let (lo_minus, _) = {
            let (a, b) = self.case_range(w, self.c_minus);
            let (p, q) = self.weight_range(self.c_minus);
            (a * p, b * q)
        };
        (1.0 / hi_plus, 1.0 / lo_minus)
    }

    /// Theoretical `max/min` of the ratio for `w`.
    pub fn window(&self, w: GroupElement) -> f64 {
        let (lo, hi) = self.ratio_bounds(w);
        hi / lo
    }

    /// Bounds on `envelope / intermediate form`.
    pub fn intermediate_bounds(&self, w: GroupElement) -> (f64, f64) {
        self.case_range(w, 1.0)
    }
}

/// Thresholds for the rank-one barrier: `c < 2/(2κ+1)` and `c > 2/κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rank1Thresholds {
    pub c_minus: f64,
    pub c_plus: f64,
}

impl Rank1Thresholds {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(DunklError::NonPositiveMultiplicity(kappa));
        }
        Ok(Rank1Thresholds {
            c_minus: 2.0 / (2.0 * kappa + 1.0),
            c_plus: 2.0 / kappa,
        })
    }
}

/// Windows for `E(x, y)(1+xy)^κ e^{-xy}` and `E(x, -y)(1+xy)^{κ+1} e^{-xy}`, `x, y ≥ 0`.
pub fn rank1_window(kappa: f64) -> Result<(f64, f64)> {
    let t = Rank1Thresholds::new(kappa)?;
    let base = (1.0 / t.c_minus).max(1.0) * t.c_plus.max(1.0);
    Ok((base.powf(kappa), base.powf(kappa + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::{point, Multiplicity};
    use crate::sampling::ChamberSampler;

    #[test]
    fn case_routing() {
        let rs = RootSystem::dihedral(5, Multiplicity::Uniform(1.0)).unwrap();
        assert_eq!(EnvelopeCase::of(&rs, GroupElement::Reflection(3)), EnvelopeCase::SOther);
        assert_eq!(EnvelopeCase::of(&rs, GroupElement::Rotation(4)), EnvelopeCase::RLast);
        assert_eq!(EnvelopeCase::of(&rs, GroupElement::Rotation(2)), EnvelopeCase::ROther);
        let rs3 = RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap();
        let cases: Vec<_> = rs3.elements().map(|w| EnvelopeCase::of(&rs3, w)).collect();
        assert!(!cases.contains(&EnvelopeCase::ROther));
        // s_3 in I_5 uses 1/(1+<x,y>)
        let (x, y) = (point(0.3, 1.0), point(0.1, 2.0));
        let base = ln_envelope(&rs, &x, &y, GroupElement::IDENTITY).unwrap();
        let s3 = ln_envelope(&rs, &x, &y, GroupElement::Reflection(3)).unwrap();
        assert!((s3 - base + x.dot(&y).ln_1p()).abs() < 1e-14);
    }

    #[test]
    fn identity_at_zero_is_one() {
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(1.0, 2.0)).unwrap();
        let v = envelope(&rs, &point(0.5, 1.0), &point(0.0, 0.0), GroupElement::IDENTITY).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn intermediate_form_within_bounds() {
        for (n, m) in [(3, Multiplicity::Uniform(1.0)), (4, Multiplicity::Pair(1.0, 1.0)), (6, Multiplicity::Pair(0.5, 2.5))] {
            let rs = RootSystem::dihedral(n, m).unwrap();
            let model = WindowModel::new(&rs).unwrap();
            let s = ChamberSampler::standard(&rs, 9);
            for i in 0..300 {
                let (x, y) = s.pair(i);
                let g = PairGeometry::new(&rs, &x, &y, 1.0).unwrap();
                for w in rs.elements() {
                    let env = ln_envelope(&rs, &x, &y, w).unwrap() - ln_envelope(&rs, &x, &y, GroupElement::IDENTITY).unwrap();
                    let ratio = (env - intermediate_factor_ln(&g, w)).exp();
                    let (lo, hi) = model.intermediate_bounds(w);
                    assert!(ratio >= lo * (1.0 - 1e-12) && ratio <= hi * (1.0 + 1e-12), "{w}: {ratio} not in [{lo}, {hi}]");
                }
            }
        }
    }

    #[test]
    fn rank1_window_values() {
        let (id, s) = rank1_window(1.0).unwrap();
        assert!((id - 3.0).abs() < 1e-14);
        assert!((s - 9.0).abs() < 1e-13);
    }
}
