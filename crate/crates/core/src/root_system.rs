//! Dihedral root systems `I_n`, their Weyl groups and chamber geometry.
//!
//! The positive roots are `α_j = (cos πj/n, sin πj/n)` for `j = 0..n`, the
//! group consists of the rotations `r_j = r^j` (angle `2πj/n`) and the
//! reflections `s_j = s r^j`, and the positive chamber is the open sector
//! where both `⟨α_0, x⟩` and `⟨α_{n-1}, x⟩` are positive.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DunklError, Result};

pub type Point = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Absolute tolerance on the two defining inner products of the closed chamber.
pub const CHAMBER_TOL: f64 = 1e-9;

pub fn point(a: f64, b: f64) -> Point {
    Vector2::new(a, b)
}

/// `(cos, sin)` of `π·num/den`, exact at multiples of `π/2`.
pub(crate) fn cos_sin_pi_ratio(num: i64, den: i64) -> (f64, f64) {
    assert!(den > 0);
    let r = num.rem_euclid(2 * den);
    let quadrant = (2 * r) / den;
    let rem = 2 * r - quadrant * den;
    // φ = π·rem/(2·den) in [0, π/2)
    let (c, s) = if rem == 0 {
        (1.0, 0.0)
    } else if 2 * rem > den {
        let phi = std::f64::consts::PI * (den - rem) as f64 / (2 * den) as f64;
        (phi.sin(), phi.cos())
    } else {
        let phi = std::f64::consts::PI * rem as f64 / (2 * den) as f64;
        (phi.cos(), phi.sin())
    };
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// Multiplicity function of `I_n`: one value for odd `n`, one per orbit for even `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Multiplicity {
    Uniform(f64),
    Pair(f64, f64),
}

impl Multiplicity {
    /// `(κ0, κ1)`; both entries equal for a uniform multiplicity.
    pub fn as_pair(&self) -> (f64, f64) {
        match *self {
            Multiplicity::Uniform(k) => (k, k),
            Multiplicity::Pair(k0, k1) => (k0, k1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Rotation(usize),
    Reflection(usize),
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement::Rotation(0);

    pub fn index(self) -> usize {
        match self {
            GroupElement::Rotation(j) | GroupElement::Reflection(j) => j,
        }
    }

    pub fn is_identity(self) -> bool {
        self == GroupElement::IDENTITY
    }

    pub fn is_reflection(self) -> bool {
        matches!(self, GroupElement::Reflection(_))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Rotation(j) => write!(f, "r{j}"),
            GroupElement::Reflection(j) => write!(f, "s{j}"),
        }
    }
}

impl FromStr for GroupElement {
    type Err = DunklError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DunklError::Precondition(format!("cannot parse group element {s:?}"));
        let (head, tail) = s.split_at(s.char_indices().nth(1).map(|(i, _)| i).ok_or_else(bad)?);
        let j: usize = tail.parse().map_err(|_| bad())?;
        match head {
            "r" => Ok(GroupElement::Rotation(j)),
            "s" => Ok(GroupElement::Reflection(j)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The dihedral root system `I_n` together with its cached group data.
#[derive(Clone, Debug)]
pub struct RootSystem {
    n: usize,
    multiplicity: Multiplicity,
    roots: Vec<Point>,
    kappas: Vec<f64>,
    kappa_min: f64,
    kappa_max: f64,
    gamma: f64,
    rotations: Vec<Mat2>,
    reflections: Vec<Mat2>,
    /// `Id - r_j`, assembled from `2 sin²(πj/n)` to avoid cancellation.
    id_minus_rotations: Vec<Mat2>,
    rtilde: Mat2,
}

impl RootSystem {
    /// Builds `I_n` with strictly positive multiplicities.
    pub fn dihedral(n: usize, multiplicity: Multiplicity) -> Result<Self> {
        let (k0, k1) = multiplicity.as_pair();
        for k in [k0, k1] {
            if !(k > 0.0) || !k.is_finite() {
                return Err(DunklError::NonPositiveMultiplicity(k));
            }
        }
        Self::build(n, multiplicity)
    }

    /// Like [`RootSystem::dihedral`] but also accepts zero multiplicities,
    /// which degenerate the Dunkl kernel to the plain exponential.
    pub fn dihedral_nonnegative(n: usize, multiplicity: Multiplicity) -> Result<Self> {
        let (k0, k1) = multiplicity.as_pair();
        for k in [k0, k1] {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(DunklError::NonPositiveMultiplicity(k));
            }
        }
        Self::build(n, multiplicity)
    }

    fn build(n: usize, multiplicity: Multiplicity) -> Result<Self> {
        if n < 3 {
            return Err(DunklError::InvalidOrder(n));
        }
        let expected = if n % 2 == 0 { 2 } else { 1 };
        let arity = match multiplicity {
            Multiplicity::Uniform(_) => 1,
            Multiplicity::Pair(..) => 2,
        };
        if arity != expected {
            return Err(DunklError::MultiplicityArity { n, expected });
        }
        let (k0, k1) = multiplicity.as_pair();
        let ni = n as i64;

        let roots: Vec<Point> = (0..ni)
            .map(|j| {
                let (c, s) = cos_sin_pi_ratio(j, ni);
                point(c, s)
            })
            .collect();
        let kappas: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { k0 } else { k1 }).collect();

        let mut rotations = Vec::with_capacity(n);
        let mut reflections = Vec::with_capacity(n);
        let mut id_minus_rotations = Vec::with_capacity(n);
        for j in 0..ni {
            let (c, s) = cos_sin_pi_ratio(2 * j, ni);
            rotations.push(Matrix2::new(c, -s, s, c));
            reflections.push(Matrix2::new(-c, s, s, c));
            let (_, half_s) = cos_sin_pi_ratio(j, ni);
            let one_minus_c = 2.0 * half_s * half_s;
            id_minus_rotations.push(Matrix2::new(one_minus_c, s, -s, one_minus_c));
        }
        let (c1, s1) = cos_sin_pi_ratio(1, ni);
        let rtilde = Matrix2::new(s1, -c1, c1, s1);

        let gamma = if n % 2 == 1 {
            n as f64 * k0
        } else {
            (n / 2) as f64 * (k0 + k1)
        };

        Ok(RootSystem {
            n,
            multiplicity,
            roots,
            kappas,
            kappa_min: k0.min(k1),
            kappa_max: k0.max(k1),
            gamma,
            rotations,
            reflections,
            id_minus_rotations,
            rtilde,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn multiplicity(&self) -> Multiplicity {
        self.multiplicity
    }

    pub fn positive_roots(&self) -> &[Point] {
        &self.roots
    }

    pub fn root(&self, j: usize) -> Point {
        self.roots[j % self.n]
    }

    /// `κ(α_j)`.
    pub fn kappa(&self, j: usize) -> f64 {
        self.kappas[j % self.n]
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_min
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    /// Sum of `κ(α)` over the positive roots.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn order(&self) -> usize {
        2 * self.n
    }

    /// All `2n` elements: rotations by ascending index, then reflections.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.n)
            .map(GroupElement::Rotation)
            .chain((0..self.n).map(GroupElement::Reflection))
    }

    /// Dense index of `w` in `0..2n`, following [`RootSystem::elements`].
    pub fn slot(&self, w: GroupElement) -> usize {
        match w {
            GroupElement::Rotation(j) => j % self.n,
            GroupElement::Reflection(j) => self.n + j % self.n,
        }
    }

    pub fn element(&self, slot: usize) -> GroupElement {
        if slot < self.n {
            GroupElement::Rotation(slot)
        } else {
            GroupElement::Reflection(slot - self.n)
        }
    }

    pub fn rotation(&self, j: i64) -> GroupElement {
        GroupElement::Rotation(self.modn(j))
    }

    pub fn reflection(&self, j: i64) -> GroupElement {
        GroupElement::Reflection(self.modn(j))
    }

    pub(crate) fn modn(&self, j: i64) -> usize {
        j.rem_euclid(self.n as i64) as usize
    }

    pub fn matrix(&self, w: GroupElement) -> &Mat2 {
        match w {
            GroupElement::Rotation(j) => &self.rotations[j % self.n],
            GroupElement::Reflection(j) => &self.reflections[j % self.n],
        }
    }

    pub fn apply(&self, w: GroupElement, p: &Point) -> Point {
        self.matrix(w) * p
    }

    /// The group law: `compose(a, b)` acts as `a ∘ b`.
    pub fn compose(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        use GroupElement::*;
        let (a_idx, b_idx) = (a.index() as i64, b.index() as i64);
        match (a, b) {
            (Rotation(_), Rotation(_)) => self.rotation(a_idx + b_idx),
            // r^a s r^b = s r^{b-a}
            (Rotation(_), Reflection(_)) => self.reflection(b_idx - a_idx),
            (Reflection(_), Rotation(_)) => self.reflection(a_idx + b_idx),
            // s r^a s r^b = r^{b-a}
            (Reflection(_), Reflection(_)) => self.rotation(b_idx - a_idx),
        }
    }

    pub fn inverse(&self, w: GroupElement) -> GroupElement {
        match w {
            GroupElement::Rotation(j) => self.rotation(-(j as i64)),
            GroupElement::Reflection(_) => w,
        }
    }

    /// The reflection across `α_j^⊥`, which is `s_{-j}`.
    pub fn reflection_for_root(&self, j: usize) -> GroupElement {
        self.reflection(-(j as i64))
    }

    /// The rotation by `π/2 - π/n`.
    pub fn rtilde(&self) -> &Mat2 {
        &self.rtilde
    }

    /// `Id - r_j` as a matrix.
    pub fn id_minus_rotation(&self, j: usize) -> &Mat2 {
        &self.id_minus_rotations[j % self.n]
    }

    /// `(⟨α_0, p⟩, ⟨α_{n-1}, p⟩)`, the two wall pairings.
    pub fn wall_pairings(&self, p: &Point) -> (f64, f64) {
        (self.roots[0].dot(p), self.roots[self.n - 1].dot(p))
    }

    pub fn in_closed_chamber(&self, p: &Point) -> bool {
        self.in_closed_chamber_tol(p, CHAMBER_TOL)
    }

    pub fn in_closed_chamber_tol(&self, p: &Point, tol: f64) -> bool {
        let (a, b) = self.wall_pairings(p);
        a >= -tol && b >= -tol
    }

    /// Returns `(p', w)` with `p = w.p'` and `p'` in the closed chamber.
    ///
    /// On walls several `w` qualify; the first one in [`RootSystem::elements`]
    /// order wins.
    pub fn canonicalize(&self, p: &Point) -> (Point, GroupElement) {
        let tol = 1e-12 * p.norm().max(1.0);
        let mut best: Option<(f64, Point, GroupElement)> = None;
        for w in self.elements() {
            let q = self.apply(self.inverse(w), p);
            let (a, b) = self.wall_pairings(&q);
            if a >= -tol && b >= -tol {
                return (q, w);
            }
            let score = a.min(b);
            if best.as_ref().map_or(true, |(s, _, _)| score > *s) {
                best = Some((score, q, w));
            }
        }
        // Only reachable through rounding on a wall: take the closest image.
        let (_, q, w) = best.expect("group is non-empty");
        (q, w)
    }

    /// `min_w |x - w.y|`.
    pub fn orbital_distance(&self, x: &Point, y: &Point) -> f64 {
        self.elements()
            .map(|w| (x - self.apply(w, y)).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn i3() -> RootSystem {
        RootSystem::dihedral(3, Multiplicity::Uniform(1.0)).unwrap()
    }

    #[test]
    fn builds_i3() {
        let rs = i3();
        assert_eq!(rs.positive_roots().len(), 3);
        assert_eq!(rs.elements().count(), 6);
        for (j, a) in rs.positive_roots().iter().enumerate() {
            let angle = std::f64::consts::PI * j as f64 / 3.0;
            assert_abs_diff_eq!(a.y.atan2(a.x), angle, epsilon = 1e-15);
            assert_abs_diff_eq!(a.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn pair_multiplicities() {
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(0.5, 2.0)).unwrap();
        assert_eq!(rs.kappa_min(), 0.5);
        assert_eq!(rs.kappa_max(), 2.0);
        assert_eq!(rs.gamma(), 5.0);
        assert_eq!(rs.kappa(0), 0.5);
        assert_eq!(rs.kappa(3), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            RootSystem::dihedral(2, Multiplicity::Uniform(1.0)).unwrap_err(),
            DunklError::InvalidOrder(2)
        );
        assert!(RootSystem::dihedral(3, Multiplicity::Uniform(0.0)).is_err());
        assert!(RootSystem::dihedral(3, Multiplicity::Uniform(-1.0)).is_err());
        assert!(RootSystem::dihedral(4, Multiplicity::Uniform(1.0)).is_err());
        assert!(RootSystem::dihedral(5, Multiplicity::Pair(1.0, 1.0)).is_err());
        assert!(RootSystem::dihedral_nonnegative(3, Multiplicity::Uniform(0.0)).is_ok());
    }

    #[test]
    fn apply_examples() {
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(1.0, 1.0)).unwrap();
        let p = point(1.0, 2.0);
        assert_eq!(rs.apply(GroupElement::IDENTITY, &p), p);
        assert_eq!(rs.apply(GroupElement::Reflection(0), &p), point(-1.0, 2.0));
        let q = rs.apply(GroupElement::Rotation(1), &point(1.0, 0.0));
        assert_eq!(q, point(0.0, 1.0));
    }

    #[test]
    fn compose_examples() {
        let rs = i3();
        use GroupElement::*;
        assert_eq!(rs.compose(Reflection(0), Reflection(0)), Rotation(0));
        assert_eq!(rs.compose(Reflection(0), Rotation(1)), Reflection(1));
        assert_eq!(rs.inverse(Rotation(1)), Rotation(2));
    }

    #[test]
    fn compose_table_matches_matrices() {
        for n in 3..=8 {
            let k = if n % 2 == 0 { Multiplicity::Pair(1.0, 2.0) } else { Multiplicity::Uniform(1.0) };
            let rs = RootSystem::dihedral(n, k).unwrap();
            let all: Vec<_> = rs.elements().collect();
            for &a in &all {
                let inv = rs.inverse(a);
                assert!((rs.matrix(a) * rs.matrix(inv) - Mat2::identity()).abs().max() < 1e-12);
                for &b in &all {
                    let ab = rs.compose(a, b);
                    let diff = rs.matrix(a) * rs.matrix(b) - rs.matrix(ab);
                    assert!(diff.abs().max() < 1e-12, "n={n} {a}∘{b}");
                }
            }
            // presentation relations
            let s0 = GroupElement::Reflection(0);
            for j in 0..n {
                let rj = GroupElement::Rotation(j);
                assert_eq!(rs.compose(rs.compose(s0, rj), s0), rs.inverse(rj));
                let sj = GroupElement::Reflection(j);
                assert_eq!(rs.compose(sj, sj), GroupElement::IDENTITY);
            }
        }
    }

    #[test]
    fn reflection_for_root_negates_root() {
        let rs = RootSystem::dihedral(5, Multiplicity::Uniform(1.0)).unwrap();
        assert_eq!(rs.reflection_for_root(0), GroupElement::Reflection(0));
        assert_eq!(rs.reflection_for_root(2), GroupElement::Reflection(3));
        for n in 3..=8 {
            let k = if n % 2 == 0 { Multiplicity::Pair(1.0, 1.0) } else { Multiplicity::Uniform(1.0) };
            let rs = RootSystem::dihedral(n, k).unwrap();
            for j in 0..n {
                let a = rs.root(j);
                let s = rs.reflection_for_root(j);
                assert!((rs.apply(s, &a) + a).norm() < 1e-12);
                let perp = point(-a.y, a.x);
                assert!((rs.apply(s, &perp) - perp).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn multiplicity_is_orbit_invariant() {
        let rs = RootSystem::dihedral(6, Multiplicity::Pair(0.3, 1.7)).unwrap();
        for w in rs.elements() {
            for j in 0..6 {
                let image = rs.apply(w, &rs.root(j));
                let (k, _) = (0..6)
                    .map(|m| (m, (rs.root(m) - image).norm().min((rs.root(m) + image).norm())))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert_eq!(rs.kappa(k), rs.kappa(j));
            }
        }
    }

    #[test]
    fn canonicalize_examples() {
        let rs = i3();
        let interior = point(0.3, 1.0);
        assert!(rs.in_closed_chamber(&interior));
        assert_eq!(rs.canonicalize(&interior), (interior, GroupElement::IDENTITY));

        let s1 = GroupElement::Reflection(1);
        let p = rs.apply(s1, &interior);
        // brute force: the unique element whose inverse maps p into the chamber
        let hits: Vec<_> = rs
            .elements()
            .filter(|&w| rs.in_closed_chamber_tol(&rs.apply(rs.inverse(w), &p), 0.0))
            .collect();
        assert_eq!(hits, vec![s1]);
        let (q, w) = rs.canonicalize(&p);
        assert_eq!(w, s1);
        assert!((q - interior).norm() < 1e-12);

        let origin = point(0.0, 0.0);
        assert_eq!(rs.canonicalize(&origin), (origin, GroupElement::IDENTITY));
    }

    #[test]
    fn canonicalize_wall_prefers_rotations() {
        let rs = i3();
        // on the wall <α_0, p> = 0: both r_0 and s_0 fix the chamber image
        let p = point(0.0, 1.0);
        assert_eq!(rs.canonicalize(&p).1, GroupElement::IDENTITY);
        let q = rs.apply(GroupElement::Rotation(1), &p);
        let (back, w) = rs.canonicalize(&q);
        assert_eq!(w, GroupElement::Rotation(1));
        assert!((back - p).norm() < 1e-12);
    }

    #[test]
    fn orbital_distance_examples() {
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(1.0, 1.0)).unwrap();
        let x = point(1.0, 0.0);
        let y = point(0.0, 1.0);
        assert_eq!(rs.orbital_distance(&x, &x), 0.0);
        // r_{-1} maps (0,1) onto (1,0), so the orbits coincide
        let brute = (0..8)
            .map(|s| (x - rs.apply(rs.element(s), &y)).norm())
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(rs.orbital_distance(&x, &y), brute, epsilon = 0.0);
        assert_abs_diff_eq!(brute, 0.0, epsilon = 1e-15);
        let z = point(0.6, 0.3);
        assert!(rs.orbital_distance(&x, &z) <= (x - z).norm());
        assert_abs_diff_eq!(rs.orbital_distance(&x, &z), rs.orbital_distance(&z, &x), epsilon = 1e-15);
    }

    #[test]
    fn rtilde_is_a_rotation() {
        let rs = RootSystem::dihedral(4, Multiplicity::Pair(1.0, 1.0)).unwrap();
        let r = rs.rtilde();
        assert!((r * r.transpose() - Mat2::identity()).abs().max() < 1e-15);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-15);
        let e1 = r * point(1.0, 0.0);
        assert_abs_diff_eq!(e1.y.atan2(e1.x), std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn exact_quarter_angles() {
        assert_eq!(cos_sin_pi_ratio(1, 2), (0.0, 1.0));
        assert_eq!(cos_sin_pi_ratio(2, 2), (-1.0, 0.0));
        assert_eq!(cos_sin_pi_ratio(-1, 2), (0.0, -1.0));
        for (num, den) in [(1, 3), (5, 7), (11, 6), (-3, 8)] {
            let t = std::f64::consts::PI * num as f64 / den as f64;
            let (c, s) = cos_sin_pi_ratio(num, den);
            assert_abs_diff_eq!(c, t.cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(s, t.sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn group_element_strings() {
        for s in ["r0", "r11", "s3"] {
            assert_eq!(s.parse::<GroupElement>().unwrap().to_string(), s);
        }
        assert!("x1".parse::<GroupElement>().is_err());
        assert!("r".parse::<GroupElement>().is_err());
    }
}
