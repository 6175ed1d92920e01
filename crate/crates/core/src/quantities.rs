//! Pair quantities `ρ_j = ⟨x, y - r_j.y⟩`, `σ_j = ⟨x, y - s_j.y⟩`, the
//! deformed factors `D_w = 1 + c·(ρ|σ)` and the identities linking them.

use serde::{Deserialize, Serialize};

use crate::error::{DunklError, Result};
use crate::root_system::{point, Point, RootSystem, CHAMBER_TOL};

/// `|a - b| / max(|a|, |b|, scale)`, or 0 when everything vanishes.
///
/// `scale` should be the magnitude of the summands that produced `a` and `b`,
/// so cancellation inside either side is not mistaken for a mismatch.
pub fn relative_residual(a: f64, b: f64, scale: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(scale.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub n: usize,
    pub c: f64,
    /// `⟨x, y⟩`.
    pub inner: f64,
    /// `⟨α_m, x⟩⟨α_m, y⟩` for each positive root.
    pub root_products: Vec<f64>,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub dr: Vec<f64>,
    pub ds: Vec<f64>,
    /// `D_R = ∏ D_{r_j}`.
    pub d_r: f64,
    /// `D_S = ∏ D_{s_j}`.
    pub d_s: f64,
    /// `𝔇_R = Σ 1/D_{r_j}`.
    pub frak_dr: f64,
    /// `𝔇_S = Σ 1/D_{s_j}`.
    pub frak_ds: f64,
    /// `𝔖 = ∏ σ_j`.
    pub frak_s: f64,
}

impl PairGeometry {
    /// Requires `x, y` in the closed chamber (within [`CHAMBER_TOL`]) and `c ≥ 0`.
    pub fn new(rs: &RootSystem, x: &Point, y: &Point, c: f64) -> Result<Self> {
        for p in [x, y] {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(DunklError::NonFinite);
            }
            if !rs.in_closed_chamber_tol(p, CHAMBER_TOL) {
                return Err(DunklError::OutsideChamber(p.x, p.y));
            }
        }
        if !(c >= 0.0) || !c.is_finite() {
            return Err(DunklError::Precondition(format!("deformation constant c = {c} must be ≥ 0")));
        }
        let n = rs.n();
        let root_products: Vec<f64> = rs
            .positive_roots()
            .iter()
            .map(|a| a.dot(x) * a.dot(y))
            .collect();
        let mut rho = vec![0.0; n];
        for (j, r) in rho.iter_mut().enumerate().skip(1) {
            *r = x.dot(&(rs.id_minus_rotation(j) * y));
        }
        // s_{-m} is the reflection across α_m^⊥, so σ_j = 2⟨α_{-j}, x⟩⟨α_{-j}, y⟩
        let sigma: Vec<f64> = (0..n)
            .map(|j| 2.0 * root_products[rs.modn(-(j as i64))])
            .collect();
        Ok(Self::assemble(n, c, x.dot(y), root_products, rho, sigma))
    }

    fn assemble(n: usize, c: f64, inner: f64, root_products: Vec<f64>, rho: Vec<f64>, sigma: Vec<f64>) -> Self {
        let dr: Vec<f64> = rho.iter().map(|r| 1.0 + c * r).collect();
        let ds: Vec<f64> = sigma.iter().map(|s| 1.0 + c * s).collect();
        PairGeometry {
            n,
            c,
            inner,
            d_r: dr.iter().product(),
            d_s: ds.iter().product(),
            frak_dr: dr.iter().map(|d| d.recip()).sum(),
            frak_ds: ds.iter().map(|d| d.recip()).sum(),
            frak_s: sigma.iter().product(),
            root_products,
            rho,
            sigma,
            dr,
            ds,
        }
    }

    /// Same pair, different deformation constant.
    pub fn with_c(&self, c: f64) -> Self {
        Self::assemble(
            self.n,
            c,
            self.inner,
            self.root_products.clone(),
            self.rho.clone(),
            self.sigma.clone(),
        )
    }

    pub fn rho(&self, j: i64) -> f64 {
        self.rho[j.rem_euclid(self.n as i64) as usize]
    }

    pub fn sigma(&self, j: i64) -> f64 {
        self.sigma[j.rem_euclid(self.n as i64) as usize]
    }

    pub fn dr(&self, j: i64) -> f64 {
        self.dr[j.rem_euclid(self.n as i64) as usize]
    }

    pub fn ds(&self, j: i64) -> f64 {
        self.ds[j.rem_euclid(self.n as i64) as usize]
    }
}

pub fn pair_geometry(rs: &RootSystem, x: &Point, y: &Point, c: f64) -> Result<PairGeometry> {
    PairGeometry::new(rs, x, y, c)
}

/// Coefficients `e_0..=e_len` of `∏ (1 + t·v_i)`.
pub fn elementary_symmetric_all(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

/// `e_k(values)`; panics if `k > values.len()`.
pub fn elementary_symmetric(k: usize, values: &[f64]) -> f64 {
    assert!(k <= values.len(), "e_{k} needs at least {k} values");
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for m in (1..=(i + 1).min(k)).rev() {
            e[m] += v * e[m - 1];
        }
    }
    e[k]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EspReport {
    /// Relative residual of `e_k(ρ) - e_k(σ)` for `k = 0..n`.
    pub residuals: Vec<f64>,
    pub e_n_rho: f64,
    /// Relative residual of `e_n(σ)` against `𝔖`.
    pub e_n_sigma_residual: f64,
    /// Relative residual of `e_k(ρ_0..ρ_{n-1}) - e_k(ρ_1..ρ_{n-1})`.
    pub dropped_rho0_residuals: Vec<f64>,
}

impl EspReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .chain(self.dropped_rho0_residuals.iter())
            .chain(std::iter::once(&self.e_n_sigma_residual))
            .chain(std::iter::once(&self.e_n_rho.abs()))
            .fold(0.0, |m, &r| m.max(r))
    }
}

/// Compares the elementary symmetric polynomials of the `ρ_j` and the `σ_j`.
pub fn verify_esp_identity(rs: &RootSystem, x: &Point, y: &Point) -> Result<EspReport> {
    let g = PairGeometry::new(rs, x, y, 0.0)?;
    let n = rs.n();
    let e_rho = elementary_symmetric_all(&g.rho);
    let e_sigma = elementary_symmetric_all(&g.sigma);
    let e_rho_tail = elementary_symmetric_all(&g.rho[1..]);
    let residuals = (0..n)
        .map(|k| relative_residual(e_rho[k], e_sigma[k], 0.0))
        .collect();
    let dropped_rho0_residuals = (0..n)
        .map(|k| relative_residual(e_rho[k], e_rho_tail[k], 0.0))
        .collect();
    Ok(EspReport {
        residuals,
        e_n_rho: e_rho[n],
        e_n_sigma_residual: relative_residual(e_sigma[n], g.frak_s, 0.0),
        dropped_rho0_residuals,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DrDsReport {
    /// `D_R` against `D_S - cⁿ𝔖`.
    pub dr_ds_residual: f64,
    /// `D_R·𝔇_R` against `D_S·𝔇_S`.
    pub drdr_dsds_residual: f64,
}

impl DrDsReport {
    pub fn max_residual(&self) -> f64 {
        self.dr_ds_residual.max(self.drdr_dsds_residual)
    }
}

pub fn verify_dr_ds(rs: &RootSystem, x: &Point, y: &Point, c: f64) -> Result<DrDsReport> {
    let g = PairGeometry::new(rs, x, y, c)?;
    let cn_frak_s = c.powi(rs.n() as i32) * g.frak_s;
    Ok(DrDsReport {
        dr_ds_residual: relative_residual(g.d_r, g.d_s - cn_frak_s, 0.0),
        drdr_dsds_residual: relative_residual(g.d_r * g.frak_dr, g.d_s * g.frak_ds, 0.0),
    })
}

/// Witness for `ρ_j ≥ σ_k` on the closed chamber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatingSigma {
    pub j: usize,
    /// Index of the positive root sent to a negative root by `r_{-j}`.
    pub ell: usize,
    /// `k ≡ j - ℓ (mod n)`.
    pub k: usize,
}

/// Finds `k` with `ρ_j ≥ σ_k`: the smallest `ℓ` such that `r_{-j}.α_ℓ` is a
/// negative root gives `k = j - ℓ`.
pub fn find_dominating_sigma(rs: &RootSystem, j: usize) -> Result<DominatingSigma> {
    let n = rs.n();
    if j % n == 0 {
        return Err(DunklError::Precondition("ρ_0 vanishes; j must be nonzero mod n".into()));
    }
    let (c, s) = crate::root_system::cos_sin_pi_ratio(n as i64 - 1, 2 * n as i64);
    // chamber bisector; no root is orthogonal to it
    let bisector = point(c, s);
    let r_minus_j = rs.rotation(-(j as i64));
    let ell = (0..n)
        .find(|&l| rs.apply(r_minus_j, &rs.root(l)).dot(&bisector) < 0.0)
        .expect("a non-trivial rotation sends some positive root to a negative one");
    Ok(DominatingSigma {
        j: j % n,
        ell,
        k: rs.modn(j as i64 - ell as i64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantityKind {
    Rho,
    Sigma,
}

/// Grid step (radians) on the unit arc of the chamber.
const COMPARABILITY_GRID_STEP: f64 = 1e-3;

/// Constants `0 < lo ≤ hi` with `lo·⟨x,y⟩ ≤ q ≤ hi·⟨x,y⟩` on the closed
/// chamber, where `q` is `ρ_j` (`2 ≤ j ≤ n-2`) or `σ_j` (`2 ≤ j ≤ n-1`).
///
/// The ratio is degree-0 homogeneous in each argument, so it is optimised over
/// pairs of unit vectors: a `10⁻³` rad grid followed by golden-section
/// refinement around the best grid cell.
pub fn comparability_constants(rs: &RootSystem, j: usize, kind: QuantityKind) -> Result<(f64, f64)> {
    let n = rs.n();
    let valid = match kind {
        QuantityKind::Sigma => (2..n).contains(&j),
        QuantityKind::Rho => (2..n.saturating_sub(1)).contains(&j),
    };
    if !valid {
        return Err(DunklError::Precondition(format!(
            "{kind:?}_{j} is not in the ≈⟨x,y⟩ regime for n = {n}"
        )));
    }
    let ratio = comparability_ratio(rs, j, kind);
    let width = std::f64::consts::PI / n as f64;
    let start = std::f64::consts::FRAC_PI_2 - width;
    let steps = (width / COMPARABILITY_GRID_STEP).ceil() as usize;
    let h = width / steps as f64;
    let at = |i: usize| if i == steps { start + width } else { start + h * i as f64 };

    let (mut lo, mut lo_arg) = (f64::INFINITY, (0.0, 0.0));
    let (mut hi, mut hi_arg) = (f64::NEG_INFINITY, (0.0, 0.0));
    for ia in 0..=steps {
        let a = at(ia);
        for ib in 0..=steps {
            let b = at(ib);
            let v = ratio(a, b);
            if v < lo {
                lo = v;
                lo_arg = (a, b);
            }
            if v > hi {
                hi = v;
                hi_arg = (a, b);
            }
        }
    }
    let clamp = |t: f64| t.clamp(start, start + width);
    let refine = |(mut a, mut b): (f64, f64), sign: f64| {
        let f = |a: f64, b: f64| sign * ratio(a, b);
        for _ in 0..4 {
            a = golden_min(|t| f(t, b), clamp(a - h), clamp(a + h));
            b = golden_min(|t| f(a, t), clamp(b - h), clamp(b + h));
        }
        ratio(a, b)
    };
    lo = lo.min(refine(lo_arg, 1.0));
    hi = hi.max(refine(hi_arg, -1.0));
    Ok((lo, hi))
}

fn comparability_ratio(rs: &RootSystem, j: usize, kind: QuantityKind) -> impl Fn(f64, f64) -> f64 + '_ {
    move |a: f64, b: f64| {
        let x = point(a.cos(), a.sin());
        let y = point(b.cos(), b.sin());
        let q = match kind {
            QuantityKind::Rho => x.dot(&(rs.id_minus_rotation(j) * y)),
            QuantityKind::Sigma => {
                let alpha = rs.root(rs.modn(-(j as i64)));
                2.0 * alpha.dot(&x) * alpha.dot(&y)
            }
        };
        q / x.dot(&y)
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [a, b, mid].into_iter().min_by(|&p, &q| f(p).total_cmp(&f(q))).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::Multiplicity;
    use approx::assert_abs_diff_eq;

    fn rs(n: usize) -> RootSystem {
        let m = if n % 2 == 0 { Multiplicity::Pair(1.0, 2.0) } else { Multiplicity::Uniform(1.0) };
        RootSystem::dihedral(n, m).unwrap()
    }

    fn chamber_point(n: usize, r: f64, frac: f64) -> Point {
        let width = std::f64::consts::PI / n as f64;
        let a = std::f64::consts::FRAC_PI_2 - width + frac * width;
        point(r * a.cos(), r * a.sin())
    }

    /// `e_k = (1/k!) Σ over ordered k-tuples of distinct indices of the product`.
    fn esp_by_tuples(k: usize, v: &[f64]) -> f64 {
        fn walk(k: usize, v: &[f64], used: &mut Vec<usize>) -> f64 {
            if used.len() == k {
                return used.iter().map(|&i| v[i]).product();
            }
            let mut s = 0.0;
            for i in 0..v.len() {
                if !used.contains(&i) {
                    used.push(i);
                    s += walk(k, v, used);
                    used.pop();
                }
            }
            s
        }
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        walk(k, v, &mut Vec::new()) / factorial
    }

    #[test]
    fn esp_matches_distinct_tuples() {
        for n in 1..=6 {
            let v: Vec<f64> = (0..n).map(|i| 0.3 + 1.7 * ((i * 7 + 3) % 5) as f64 - 0.9 * i as f64).collect();
            let all = elementary_symmetric_all(&v);
            for k in 0..=n {
                let t = esp_by_tuples(k, &v);
                assert!((all[k] - t).abs() <= 1e-12 * t.abs().max(1.0), "n={n} k={k}: {} vs {t}", all[k]);
                assert_eq!(elementary_symmetric(k, &v), all[k]);
            }
        }
    }

    #[test]
    fn zero_y_gives_trivial_geometry() {
        let rs = rs(5);
        let g = PairGeometry::new(&rs, &chamber_point(5, 1.3, 0.4), &point(0.0, 0.0), 0.7).unwrap();
        assert!(g.rho.iter().chain(&g.sigma).all(|&v| v == 0.0));
        assert_eq!((g.d_r, g.d_s), (1.0, 1.0));
        assert_eq!((g.frak_dr, g.frak_ds), (5.0, 5.0));
    }

    #[test]
    fn outside_chamber_rejected() {
        let rs = rs(3);
        let err = PairGeometry::new(&rs, &point(-1.0, 0.1), &point(0.0, 1.0), 1.0).unwrap_err();
        assert!(matches!(err, DunklError::OutsideChamber(..)));
        assert!(PairGeometry::new(&rs, &point(0.0, 1.0), &point(0.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn sigma_matches_definition_and_wall_formulas() {
        for n in 3..=8 {
            let rs = rs(n);
            let x = chamber_point(n, 1.7, 0.23);
            let y = chamber_point(n, 0.6, 0.81);
            let g = PairGeometry::new(&rs, &x, &y, 0.0).unwrap();
            for j in 0..n {
                let direct_sigma = x.dot(&(y - rs.apply(rs.reflection(j as i64), &y)));
                let direct_rho = x.dot(&(y - rs.apply(rs.rotation(j as i64), &y)));
                assert_abs_diff_eq!(g.sigma[j], direct_sigma, epsilon = 1e-12);
                assert_abs_diff_eq!(g.rho[j], direct_rho, epsilon = 1e-12);
            }
            let a0 = rs.root(0);
            let an = rs.root(n - 1);
            assert_abs_diff_eq!(g.sigma[0], 2.0 * a0.dot(&x) * a0.dot(&y), epsilon = 1e-12);
            assert_abs_diff_eq!(g.sigma[1], 2.0 * an.dot(&x) * an.dot(&y), epsilon = 1e-12);
        }
    }

    #[test]
    fn rho_one_bisector_cross_check() {
        let rs = rs(3);
        // angle π/6 is the wall <α_2, x> = 0; π/3 is the bisector
        let wall = point((std::f64::consts::PI / 6.0).cos(), (std::f64::consts::PI / 6.0).sin());
        let bis = chamber_point(3, 1.0, 0.5);
        for p in [wall, bis] {
            assert!(rs.in_closed_chamber(&p));
            let g = PairGeometry::new(&rs, &p, &p, 0.0).unwrap();
            let direct = p.dot(&(p - rs.apply(rs.rotation(1), &p)));
            let s = (std::f64::consts::PI / 3.0).sin();
            let via_rtilde = 2.0 * s * (rs.rtilde() * p).dot(&p);
            assert_abs_diff_eq!(g.rho[1], direct, epsilon = 1e-14);
            assert_abs_diff_eq!(direct, via_rtilde, epsilon = 1e-14);
        }
    }

    #[test]
    fn esp_small_examples() {
        assert_eq!(elementary_symmetric(0, &[4.0, 5.0]), 1.0);
        assert_eq!(elementary_symmetric(2, &[1.0, 2.0, 3.0]), 11.0);
        assert_eq!(elementary_symmetric(3, &[1.0, 2.0, 3.0]), 6.0);
        assert_eq!(elementary_symmetric_all(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn e1_equals_n_inner_product() {
        for n in 3..=8 {
            let rs = rs(n);
            let x = chamber_point(n, 2.0, 0.1);
            let y = chamber_point(n, 0.5, 0.9);
            let g = PairGeometry::new(&rs, &x, &y, 0.0).unwrap();
            let target = n as f64 * x.dot(&y);
            assert!(relative_residual(elementary_symmetric(1, &g.rho), target, 0.0) < 1e-13);
            assert!(relative_residual(elementary_symmetric(1, &g.sigma), target, 0.0) < 1e-13);
        }
    }

    #[test]
    fn esp_identity_and_exact_zero() {
        let rs = rs(6);
        let r = verify_esp_identity(&rs, &chamber_point(6, 1.2, 0.3), &chamber_point(6, 3.0, 0.7)).unwrap();
        assert_eq!(r.e_n_rho, 0.0);
        assert!(r.max_residual() < 1e-12, "{r:?}");
    }

    #[test]
    fn corollaries_trivial_at_zero_c() {
        let rs = rs(4);
        let r = verify_dr_ds(&rs, &chamber_point(4, 1.0, 0.2), &chamber_point(4, 2.0, 0.6), 0.0).unwrap();
        assert_eq!(r.dr_ds_residual, 0.0);
        assert_eq!(r.drdr_dsds_residual, 0.0);
    }

    #[test]
    fn wall_y_kills_frak_s() {
        let rs = rs(5);
        let y = point(0.0, 2.0); // <α_0, y> = 0
        let x = chamber_point(5, 1.5, 0.3);
        let g = PairGeometry::new(&rs, &x, &y, 1.0).unwrap();
        assert_abs_diff_eq!(g.frak_s, 0.0, epsilon = 1e-15);
        assert!(relative_residual(g.d_r, g.d_s, 0.0) < 1e-12);
    }

    #[test]
    fn dominating_sigma_brute_force_n3() {
        let rs = rs(3);
        let dom = find_dominating_sigma(&rs, 1).unwrap();
        // brute force over ℓ: which candidate roots are sent to negative roots?
        let bis = chamber_point(3, 1.0, 0.5);
        let valid: Vec<usize> = (0..3)
            .filter(|&l| rs.apply(rs.rotation(-1), &rs.root(l)).dot(&bis) < 0.0)
            .collect();
        assert_eq!(dom.ell, valid[0]);
        for &l in &valid {
            let k = rs.modn(1 - l as i64);
            for (fx, fy) in [(0.0, 0.0), (0.2, 0.9), (1.0, 1.0), (0.5, 0.1)] {
                let g = PairGeometry::new(&rs, &chamber_point(3, 1.0, fx), &chamber_point(3, 2.0, fy), 0.0).unwrap();
                assert!(g.rho[1] - g.sigma[k] >= -1e-12);
            }
        }
        assert!(find_dominating_sigma(&rs, 3).is_err());
    }

    #[test]
    fn comparability_regimes() {
        let rs = rs(6);
        assert!(comparability_constants(&rs, 1, QuantityKind::Sigma).is_err());
        assert!(comparability_constants(&rs, 5, QuantityKind::Rho).is_err());
        let (lo, hi) = comparability_constants(&rs, 3, QuantityKind::Rho).unwrap();
        assert!(lo > 0.0 && hi >= lo && hi.is_finite());
        let rs3 = RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap();
        assert!(comparability_constants(&rs3, 1, QuantityKind::Rho).is_err());
        assert!(comparability_constants(&rs3, 2, QuantityKind::Sigma).is_ok());
    }
}
