//! Center configurations, extended-complex strengths, and removal of
//! infinite strengths.

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Relative tolerance (w.r.t. the diameter) below which two centers count as
/// coinciding.
pub const DISTINCTNESS_TOL: f64 = 1e-9;

/// `N` distinct points in R³ with cached pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterConfiguration {
    points: Vec<Point3>,
    distances: Vec<Vec<f64>>,
    diameter: f64,
}

fn dist(a: &Point3, b: &Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

impl CenterConfiguration {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCoordinate(i));
            }
        }
        let cfg = Self::build(points);
        let n = cfg.len();
        for i in 0..n {
            for j in i + 1..n {
                if cfg.distances[i][j] <= DISTINCTNESS_TOL * cfg.diameter || cfg.distances[i][j] == 0.0 {
                    return Err(Error::CoincidingCenters(i, j));
                }
            }
        }
        Ok(cfg)
    }

    fn build(points: Vec<Point3>) -> Self {
        let n = points.len();
        let mut distances = vec![vec![0.0; n]; n];
        let mut diameter = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let d = dist(&points[i], &points[j]);
                distances[i][j] = d;
                distances[j][i] = d;
                diameter = diameter.max(d);
            }
        }
        Self {
            points,
            distances,
            diameter,
        }
    }

    pub fn empty() -> Self {
        Self::build(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest pairwise distance; 0 when fewer than two centers.
    pub fn min_distance(&self) -> f64 {
        let n = self.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                m = m.min(self.distances[i][j]);
            }
        }
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Sub-configuration keeping the given indices in order.
    pub fn subset(&self, keep: &[usize]) -> Self {
        Self::build(keep.iter().map(|&i| self.points[i]).collect())
    }

    /// True when all pairwise distances agree to `rel_tol`.
    pub fn is_equidistant(&self, rel_tol: f64) -> bool {
        let n = self.len();
        if n < 2 {
            return false;
        }
        let d0 = self.distances[0][1];
        (0..n).all(|i| (i + 1..n).all(|j| (self.distances[i][j] - d0).abs() <= rel_tol * d0))
    }
}

/// Diameter of a configuration (0 for fewer than two centers).
pub fn diameter(config: &CenterConfiguration) -> f64 {
    config.diameter()
}

/// A point of the Riemann sphere: either finite or the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtendedComplex {
    pub fn real(x: f64) -> Self {
        Self::Finite(Complex64::new(x, 0.0))
    }

    pub fn new(re: f64, im: f64) -> Self {
        Self::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            Self::Finite(z) => Some(z),
            Self::Infinity => None,
        }
    }

    /// Stereographic image on the unit sphere (∞ ↦ north pole).
    pub fn to_sphere(&self) -> [f64; 3] {
        match *self {
            Self::Infinity => [0.0, 0.0, 1.0],
            Self::Finite(z) => {
                let r2 = z.norm_sqr();
                if !r2.is_finite() {
                    return [0.0, 0.0, 1.0];
                }
                let s = 1.0 + r2;
                [2.0 * z.re / s, 2.0 * z.im / s, (r2 - 1.0) / s]
            }
        }
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        Self::Finite(z)
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infinity => write!(f, "inf"),
            Self::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

impl Serialize for ExtendedComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Infinity => s.serialize_str("inf"),
            Self::Finite(z) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("re", &z.re)?;
                m.serialize_entry("im", &z.im)?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ExtendedComplex;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"inf\" or an object {\"re\": .., \"im\": ..}")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                if v == "inf" {
                    Ok(ExtendedComplex::Infinity)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedComplex::real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedComplex::real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedComplex::real(v as f64))
            }
            fn visit_map<A: de::MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let (mut re, mut im) = (None, None);
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "re" => re = Some(map.next_value::<f64>()?),
                        "im" => im = Some(map.next_value::<f64>()?),
                        other => return Err(de::Error::unknown_field(other, &["re", "im"])),
                    }
                }
                let re = re.ok_or_else(|| de::Error::missing_field("re"))?;
                Ok(ExtendedComplex::new(re, im.unwrap_or(0.0)))
            }
        }
        d.deserialize_any(V)
    }
}

/// Chordal distance on the Riemann sphere: Euclidean distance between
/// stereographic images on the unit sphere. Bounded by 2.
pub fn chordal_distance(a: ExtendedComplex, b: ExtendedComplex) -> f64 {
    match (a, b) {
        (ExtendedComplex::Infinity, ExtendedComplex::Infinity) => 0.0,
        (ExtendedComplex::Finite(z), ExtendedComplex::Infinity)
        | (ExtendedComplex::Infinity, ExtendedComplex::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
        (ExtendedComplex::Finite(z), ExtendedComplex::Finite(w)) => {
            // closed form avoids cancellation between nearby sphere points
            2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
        }
    }
}

/// Product metric on tuples: ℓ² combination of per-entry chordal distances.
pub fn tuple_distance(a: &StrengthTuple, b: &StrengthTuple) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            alpha: b.len(),
            centers: a.len(),
        });
    }
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(&x, &y)| chordal_distance(x, y).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Feasibility class of a strength tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibleClass {
    /// entries in R ∪ {∞}
    Real,
    /// entries in the closed lower half-plane ∪ {∞}
    Dissipative,
    General,
}

/// `N` strength parameters in C ∪ {∞}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrengthTuple {
    entries: Vec<ExtendedComplex>,
}

impl StrengthTuple {
    pub fn new(entries: Vec<ExtendedComplex>) -> Self {
        Self { entries }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| ExtendedComplex::real(x)).collect())
    }

    pub fn from_complex(values: &[Complex64]) -> Self {
        Self::new(values.iter().map(|&z| ExtendedComplex::Finite(z)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ExtendedComplex] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> ExtendedComplex {
        self.entries[i]
    }

    /// Indices `j` with `α_j = ∞`.
    pub fn infinity_pattern(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.entries[j].is_infinite()).collect()
    }

    /// Number of finite entries.
    pub fn finite_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_infinite()).count()
    }

    pub fn is_all_finite(&self) -> bool {
        self.entries.iter().all(|e| !e.is_infinite())
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.finite().is_none_or(|z| z.im == 0.0))
    }

    pub fn is_dissipative(&self) -> bool {
        self.entries.iter().all(|e| e.finite().is_none_or(|z| z.im <= 0.0))
    }

    pub fn class(&self) -> FeasibleClass {
        if self.is_real() {
            FeasibleClass::Real
        } else if self.is_dissipative() {
            FeasibleClass::Dissipative
        } else {
            FeasibleClass::General
        }
    }

    /// Finite values; errors if any entry is ∞.
    pub fn finite_values(&self) -> Result<Vec<Complex64>> {
        self.entries.iter().map(|e| e.finite().ok_or(Error::UnreducedTuple)).collect()
    }

    pub fn conj(&self) -> Self {
        Self::new(
            self.entries
                .iter()
                .map(|e| match e {
                    ExtendedComplex::Finite(z) => ExtendedComplex::Finite(z.conj()),
                    ExtendedComplex::Infinity => ExtendedComplex::Infinity,
                })
                .collect(),
        )
    }

    pub fn with_entry(&self, i: usize, value: ExtendedComplex) -> Self {
        let mut e = self.entries.clone();
        e[i] = value;
        Self::new(e)
    }
}

/// Drops every center whose strength is ∞, preserving the order of the rest.
pub fn reduce(
    alpha: &StrengthTuple,
    config: &CenterConfiguration,
) -> Result<(StrengthTuple, CenterConfiguration)> {
    if alpha.len() != config.len() {
        return Err(Error::LengthMismatch {
            alpha: alpha.len(),
            centers: config.len(),
        });
    }
    if alpha.is_all_finite() {
        return Ok((alpha.clone(), config.clone()));
    }
    let keep: Vec<usize> = (0..alpha.len()).filter(|&j| !alpha.entries[j].is_infinite()).collect();
    if keep.is_empty() {
        log::debug!("all strengths infinite: free Laplacian, no Γ⁻¹-poles");
    }
    let entries = keep.iter().map(|&j| alpha.entries[j]).collect();
    Ok((StrengthTuple::new(entries), config.subset(&keep)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn line(n: usize) -> CenterConfiguration {
        CenterConfiguration::new((0..n).map(|i| [i as f64, 0.0, 0.0]).collect()).unwrap()
    }

    #[test]
    fn reduce_removes_infinite_entries() {
        let cfg = line(3);
        let alpha = StrengthTuple::new(vec![
            ExtendedComplex::real(1.0),
            ExtendedComplex::Infinity,
            ExtendedComplex::real(2.0),
        ]);
        let (a, y) = reduce(&alpha, &cfg).unwrap();
        assert_eq!(a, StrengthTuple::from_real(&[1.0, 2.0]));
        assert_eq!(y.points(), &[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
    }

    #[test]
    fn reduce_identity_and_empty() {
        let cfg = line(2);
        let alpha = StrengthTuple::from_real(&[0.5, -0.5]);
        let (a, y) = reduce(&alpha, &cfg).unwrap();
        assert_eq!(a, alpha);
        assert_eq!(y, cfg);

        let all_inf = StrengthTuple::new(vec![ExtendedComplex::Infinity; 2]);
        let (a, y) = reduce(&all_inf, &cfg).unwrap();
        assert!(a.is_empty() && y.is_empty());
    }

    #[test]
    fn reduce_length_mismatch() {
        let err = reduce(&StrengthTuple::from_real(&[1.0]), &line(2)).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }

    #[test]
    fn chordal_examples() {
        let zero = ExtendedComplex::real(0.0);
        assert_eq!(chordal_distance(zero, zero), 0.0);
        assert!((chordal_distance(zero, ExtendedComplex::Infinity) - 2.0).abs() < 1e-15);
        let a = ExtendedComplex::real(1.0);
        let b = ExtendedComplex::real(1.0 + 1e-9);
        let d = chordal_distance(a, b);
        // factor 2/(1+|z|²) = 1 at |z| = 1
        assert!((d / 1e-9 - 1.0).abs() < 0.1, "{d}");
    }

    #[test]
    fn chordal_matches_sphere_embedding() {
        let a = ExtendedComplex::new(0.3, -2.0);
        let b = ExtendedComplex::new(-1.5, 0.25);
        let (p, q) = (a.to_sphere(), b.to_sphere());
        let euclid = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        assert!((euclid - chordal_distance(a, b)).abs() < 1e-14);
    }

    #[test]
    fn diameter_examples() {
        let two = CenterConfiguration::new(vec![[0.0; 3], [3.0, 0.0, 0.0]]).unwrap();
        assert_eq!(diameter(&two), 3.0);
        let one = CenterConfiguration::new(vec![[1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(diameter(&one), 0.0);
    }

    #[test]
    fn coinciding_centers_rejected() {
        let err = CenterConfiguration::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [1.0, 1e-12, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::CoincidingCenters(1, 2)));
    }

    #[test]
    fn distances_symmetric() {
        let cfg = CenterConfiguration::new(vec![[0.0, 1.0, 2.0], [3.0, -1.0, 0.5], [1.0, 1.0, 1.0]]).unwrap();
        for i in 0..3 {
            assert_eq!(cfg.distance(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(cfg.distance(i, j), cfg.distance(j, i));
            }
        }
    }

    #[test]
    fn classification() {
        let t = StrengthTuple::new(vec![ExtendedComplex::new(1.0, -0.5), ExtendedComplex::Infinity]);
        assert!(!t.is_real() && t.is_dissipative());
        assert_eq!(t.class(), FeasibleClass::Dissipative);
        assert_eq!(StrengthTuple::from_real(&[1.0]).class(), FeasibleClass::Real);
        assert_eq!(StrengthTuple::from_complex(&[Complex64::new(0.0, 1.0)]).class(), FeasibleClass::General);
    }

    #[test]
    fn json_round_trip() {
        let t = StrengthTuple::new(vec![ExtendedComplex::new(1.0, -0.5), ExtendedComplex::Infinity]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"[{"re":1.0,"im":-0.5},"inf"]"#);
        let back: StrengthTuple = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    fn ext() -> impl Strategy<Value = ExtendedComplex> {
        prop_oneof![
            9 => (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| ExtendedComplex::new(a, b)),
            1 => Just(ExtendedComplex::Infinity),
        ]
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(entries in proptest::collection::vec(ext(), 1..6)) {
            let n = entries.len();
            let cfg = line(n);
            let alpha = StrengthTuple::new(entries);
            let once = reduce(&alpha, &cfg).unwrap();
            let twice = reduce(&once.0, &once.1).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn chordal_is_a_bounded_metric(a in ext(), b in ext(), c in ext()) {
            let dab = chordal_distance(a, b);
            prop_assert!(dab <= 2.0 + 1e-15);
            prop_assert!((dab - chordal_distance(b, a)).abs() < 1e-15);
            prop_assert!(dab <= chordal_distance(a, c) + chordal_distance(c, b) + 1e-12);
            prop_assert_eq!(dab == 0.0, a == b);
        }

        #[test]
        fn chordal_coarsely_equivalent_near_unit_disc(
            r1 in 0.0..1.0f64, t1 in 0.0..TAU, r2 in 0.0..1.0f64, t2 in 0.0..TAU
        ) {
            let a = Complex64::from_polar(r1, t1);
            let b = Complex64::from_polar(r2, t2);
            prop_assume!((a - b).norm() > 1e-12);
            let ratio = chordal_distance(a.into(), b.into()) / (a - b).norm();
            prop_assert!((0.4..=2.1).contains(&ratio), "ratio {}", ratio);
        }
    }
}
