//! Evaluation of the Dunkl kernel on the whole orbit `{E(x, w.y)}_{w∈W}`.

pub mod mmatrix;
mod ode;
mod rank1;
mod series;

use serde::{Deserialize, Serialize};

pub use ode::OdeOptions;
pub use rank1::{kernel_rank1, rank1_system_residual};
pub use series::{SeriesCoefficients, SeriesOptions, SeriesShift, TAIL_SAFETY};

use crate::error::{DunklError, Result};
use crate::root_system::{GroupElement, Point, RootSystem};
use mmatrix::Coupling;
use series::SeriesEngine;

/// `E(x, w.y)` for every group element, in [`RootSystem::elements`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValues {
    pub elements: Vec<GroupElement>,
    pub values: Vec<f64>,
    pub ln_values: Vec<f64>,
    /// Absolute error bound valid for every entry.
    pub truncation_bound: f64,
    pub terms_used: usize,
}

impl KernelValues {
    fn position(&self, w: GroupElement) -> usize {
        self.elements
            .iter()
            .position(|&e| e == w)
            .unwrap_or_else(|| panic!("{w} is not an element of this group"))
    }

    pub fn get(&self, w: GroupElement) -> f64 {
        self.values[self.position(w)]
    }

    pub fn ln(&self, w: GroupElement) -> f64 {
        self.ln_values[self.position(w)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroupElement, f64)> + '_ {
        self.elements.iter().copied().zip(self.values.iter().copied())
    }
}

/// Kernel evaluator for one root system and multiplicity.
///
/// Holds a cache of matrix factorizations that grows as higher orders are
/// needed. It is `Sync`; share one instance across worker threads.
#[derive(Debug)]
pub struct KernelEvaluator {
    rs: RootSystem,
    engine: SeriesEngine,
}

impl KernelEvaluator {
    pub fn new(rs: &RootSystem) -> Self {
        let neighbors = rs
            .elements()
            .map(|w| {
                (0..rs.n())
                    .map(|m| {
                        let s = rs.reflection_for_root(m);
                        (rs.slot(rs.compose(s, w)), rs.kappa(m))
                    })
                    .collect()
            })
            .collect();
        KernelEvaluator {
            rs: rs.clone(),
            engine: SeriesEngine::new(Coupling::new(neighbors)),
        }
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    fn pairings(&self, x: &Point, y: &Point, guard: f64) -> Result<Vec<f64>> {
        if !(x.iter().chain(y.iter()).all(|v| v.is_finite())) {
            return Err(DunklError::NonFinite);
        }
        let product = x.norm() * y.norm();
        if product > guard {
            return Err(DunklError::DomainGuard { product, limit: guard });
        }
        Ok(self.rs.elements().map(|w| x.dot(&self.rs.apply(w, y))).collect())
    }

    /// The series evaluator. Works for any `x, y`; the chamber is not required.
    pub fn kernel_series(&self, x: &Point, y: &Point, opts: &SeriesOptions) -> Result<KernelValues> {
        let b = self.pairings(x, y, opts.max_norm_product)?;
        let s = self.engine.sum(&b, opts)?;
        let ln_values: Vec<f64> = s.sums.iter().map(|v| s.shift + v.ln()).collect();
        Ok(KernelValues {
            elements: self.rs.elements().collect(),
            values: ln_values.iter().map(|v| v.exp()).collect(),
            ln_values,
            truncation_bound: s.shift.exp() * s.tail,
            terms_used: s.terms,
        })
    }

    /// [`KernelEvaluator::kernel_series`] with default options.
    pub fn evaluate(&self, x: &Point, y: &Point) -> Result<KernelValues> {
        self.kernel_series(x, y, &SeriesOptions::default())
    }

    /// `E(x, y)` for arbitrary `x, y`, evaluated between chamber representatives.
    pub fn kernel(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.ln_kernel(x, y)?.exp())
    }

    pub fn ln_kernel(&self, x: &Point, y: &Point) -> Result<f64> {
        let (xc, u) = self.rs.canonicalize(x);
        let (yc, v) = self.rs.canonicalize(y);
        // E(u.x', v.y') = E(x', u⁻¹v.y')
        let w = self.rs.compose(self.rs.inverse(u), v);
        Ok(self.evaluate(&xc, &yc)?.ln(w))
    }

    /// Independent evaluation by integrating the radial system.
    pub fn kernel_ode(&self, x: &Point, y: &Point, opts: &OdeOptions) -> Result<KernelValues> {
        let b = self.pairings(x, y, SeriesOptions::default().max_norm_product)?;
        let (f, steps) = ode::integrate(self.engine.coupling(), &b, opts)?;
        Ok(KernelValues {
            elements: self.rs.elements().collect(),
            ln_values: f.iter().map(|v| v.ln()).collect(),
            values: f,
            truncation_bound: f64::NAN,
            terms_used: steps,
        })
    }

    /// The first `terms + 1` coefficient vectors of the radial series.
    pub fn series_coefficients(&self, x: &Point, y: &Point, shift: SeriesShift, terms: usize) -> Result<SeriesCoefficients> {
        let b = self.pairings(x, y, f64::INFINITY)?;
        Ok(self.engine.coefficients(&b, shift, terms))
    }

    /// `|T_ξ E(·, y)(x) - ⟨ξ, y⟩ E(x, y)| / E(x, y)`, with the gradient taken by
    /// central differences of step `h` and the reflection terms exactly.
    /// `x` must keep away from the mirrors.
    pub fn eigen_residual(&self, x: &Point, y: &Point, xi: &Point, h: f64) -> Result<f64> {
        let rs = &self.rs;
        for m in 0..rs.n() {
            if rs.root(m).dot(x).abs() <= 2.0 * h {
                return Err(DunklError::Precondition(format!("x lies within 2h of the mirror of α_{m}")));
            }
        }
        let f = self.kernel(x, y)?;
        let mut deriv = 0.0;
        for (axis, comp) in [(Point::new(1.0, 0.0), xi.x), (Point::new(0.0, 1.0), xi.y)] {
            if comp == 0.0 {
                continue;
            }
            let hi = self.kernel(&(x + axis * h), y)?;
            let lo = self.kernel(&(x - axis * h), y)?;
            deriv += comp * (hi - lo) / (2.0 * h);
        }
        let mut difference = 0.0;
        for m in 0..rs.n() {
            let alpha = rs.root(m);
            let sx = rs.apply(rs.reflection_for_root(m), x);
            let fs = self.kernel(&sx, y)?;
            difference += rs.kappa(m) * alpha.dot(xi) * (f - fs) / alpha.dot(x);
        }
        Ok((deriv + difference - xi.dot(y) * f).abs() / f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::{point, Multiplicity};

    fn polar(r: f64, th: f64) -> Point {
        point(r * th.cos(), r * th.sin())
    }

    #[test]
    fn zero_arguments_give_ones() {
        let rs = RootSystem::dihedral(5, Multiplicity::Uniform(1.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let kv = ev.evaluate(&point(0.0, 0.0), &polar(2.0, 1.3)).unwrap();
        assert!(kv.values.iter().all(|&v| v == 1.0));
        let kv = ev.evaluate(&polar(2.0, 1.3), &point(0.0, 0.0)).unwrap();
        assert!(kv.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_multiplicity_is_exponential() {
        let rs = RootSystem::dihedral_nonnegative(4, Multiplicity::Pair(0.0, 0.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let (x, y) = (polar(2.0, 1.2), polar(3.0, 1.0));
        let kv = ev.evaluate(&x, &y).unwrap();
        for (w, v) in kv.iter() {
            let exact = x.dot(&rs.apply(w, &y)).exp();
            assert!((v / exact - 1.0).abs() < 1e-13, "{w}: {v} vs {exact}");
        }
    }

    #[test]
    fn series_agrees_with_ode() {
        let rs = RootSystem::dihedral(3, Multiplicity::Uniform(1.5)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let (x, y) = (polar(1.5, 1.3), polar(2.0, 1.1));
        let a = ev.evaluate(&x, &y).unwrap();
        let b = ev.kernel_ode(&x, &y, &OdeOptions::default()).unwrap();
        for i in 0..a.values.len() {
            assert!((a.values[i] / b.values[i] - 1.0).abs() < 1e-9, "{} vs {}", a.values[i], b.values[i]);
        }
    }

    #[test]
    fn truncation_bound_is_reported() {
        let rs = RootSystem::dihedral(6, Multiplicity::Pair(0.5, 2.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let kv = ev.evaluate(&polar(9.0, 1.2), &polar(9.0, 1.4)).unwrap();
        assert!(kv.terms_used > 10);
        let smallest = kv.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(kv.truncation_bound <= 1e-14 * smallest * 1.0000001);
    }

    #[test]
    fn domain_guard_and_non_finite() {
        let rs = RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        assert!(matches!(
            ev.evaluate(&polar(11.0, 1.2), &polar(10.0, 1.2)),
            Err(DunklError::DomainGuard { .. })
        ));
        assert_eq!(ev.evaluate(&point(f64::NAN, 1.0), &polar(1.0, 1.2)), Err(DunklError::NonFinite));
    }

    #[test]
    fn max_terms_exhaustion_is_an_error() {
        let rs = RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let opts = SeriesOptions {
            max_terms: 3,
            ..SeriesOptions::default()
        };
        assert!(matches!(
            ev.kernel_series(&polar(3.0, 1.2), &polar(3.0, 1.3), &opts),
            Err(DunklError::SeriesNotConverged { .. })
        ));
    }

    #[test]
    fn general_points_use_canonical_representatives() {
        let rs = RootSystem::dihedral(5, Multiplicity::Uniform(0.7)).unwrap();
        let ev = KernelEvaluator::new(&rs);
        let (x, y) = (polar(1.2, 1.35), polar(0.9, 1.5));
        let kv = ev.evaluate(&x, &y).unwrap();
        for w in rs.elements() {
            let direct = ev.kernel(&x, &rs.apply(w, &y)).unwrap();
            assert!((direct / kv.get(w) - 1.0).abs() < 1e-13);
            // E(w.x, w.y) = E(x, y)
            let moved = ev.kernel(&rs.apply(w, &x), &rs.apply(w, &y)).unwrap();
            assert!((moved / kv.get(GroupElement::IDENTITY) - 1.0).abs() < 1e-13);
        }
    }
}
