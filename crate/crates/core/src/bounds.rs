//! Checkers for three classical inequalities: the point-line incidence
//! bound in F_q², Kneser's theorem in `(F_q, +)`, and the Ruzsa growth
//! inequality for symmetric sets in Aff(F_q).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::affgroup::{power_sizes, AffError, AffSet};
use crate::ff::{FieldElement, FieldError, FieldSpec};
use crate::plane::{PlanePointSet, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("the set is empty")]
    EmptySet,
    #[error("exponent {0} must be at least 4")]
    BadExponent(u32),
    #[error("malformed line: {0}")]
    LineSyntax(String),
    #[error(transparent)]
    Aff(#[from] AffError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A line of F_q²: `y = slope·x + intercept`, or `x = c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AffineLine {
    NonVertical {
        slope: FieldElement,
        intercept: FieldElement,
    },
    Vertical(FieldElement),
}

impl AffineLine {
    pub fn contains(&self, spec: &FieldSpec, (x, y): Point) -> bool {
        match *self {
            AffineLine::NonVertical { slope, intercept } => {
                spec.add(spec.mul(slope, x), intercept) == y
            }
            AffineLine::Vertical(c) => x == c,
        }
    }

    /// The line through two distinct points.
    pub fn through(spec: &FieldSpec, p: Point, r: Point) -> AffineLine {
        let dx = spec.sub(r.0, p.0);
        match spec.inv(dx) {
            Err(_) => AffineLine::Vertical(p.0),
            Ok(inv) => {
                let slope = spec.mul(spec.sub(r.1, p.1), inv);
                AffineLine::NonVertical {
                    slope,
                    intercept: spec.sub(p.1, spec.mul(slope, p.0)),
                }
            }
        }
    }

    /// Parses `"s c"` or `"v c"` against a field.
    pub fn parse(spec: &FieldSpec, text: &str) -> Result<AffineLine, BoundsError> {
        let raw: RawLine = text.parse()?;
        Ok(match raw {
            RawLine::NonVertical(s, c) => AffineLine::NonVertical {
                slope: spec.element(s)?,
                intercept: spec.element(c)?,
            },
            RawLine::Vertical(c) => AffineLine::Vertical(spec.element(c)?),
        })
    }
}

impl fmt::Display for AffineLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffineLine::NonVertical { slope, intercept } => write!(f, "{slope} {intercept}"),
            AffineLine::Vertical(c) => write!(f, "v {c}"),
        }
    }
}

impl Serialize for AffineLine {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

enum RawLine {
    NonVertical(u64, u64),
    Vertical(u64),
}

impl FromStr for RawLine {
    type Err = BoundsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BoundsError::LineSyntax(s.to_string());
        let toks: Vec<&str> = s.split_whitespace().collect();
        let [first, second] = toks[..] else {
            return Err(bad());
        };
        let c: u64 = second.parse().map_err(|_| bad())?;
        if first == "v" {
            Ok(RawLine::Vertical(c))
        } else {
            Ok(RawLine::NonVertical(first.parse().map_err(|_| bad())?, c))
        }
    }
}

/// All `q² + q` lines: non-vertical by `(slope, intercept)`, then vertical.
pub fn enumerate_lines(spec: &FieldSpec) -> Vec<AffineLine> {
    let mut out: Vec<AffineLine> = spec
        .elements()
        .flat_map(|slope| {
            spec.elements()
                .map(move |intercept| AffineLine::NonVertical { slope, intercept })
        })
        .collect();
    out.extend(spec.elements().map(AffineLine::Vertical));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncidenceResult {
    pub count: u64,
    pub points: u64,
    pub lines: u64,
    pub q: u64,
    /// `|P||L|/q`.
    #[serde(serialize_with = "ser_ratio")]
    pub expectation: Ratio<u64>,
    /// `(q·I − |P||L|)²`.
    #[serde(serialize_with = "ser_display")]
    pub deviation_sq: BigInt,
    /// `q³·|P||L|`.
    #[serde(serialize_with = "ser_display")]
    pub allowance: BigInt,
}

fn ser_ratio<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{}/{}", r.numer(), r.denom()))
}

fn ser_display<S: Serializer, T: fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn incidence_count(
    spec: &FieldSpec,
    points: &[Point],
    lines: &[AffineLine],
) -> IncidenceResult {
    let count = lines
        .iter()
        .map(|l| points.iter().filter(|&&p| l.contains(spec, p)).count() as u64)
        .sum();
    let q = spec.q() as u64;
    let (np, nl) = (points.len() as u64, lines.len() as u64);
    let dev = BigInt::from(q * count) - BigInt::from(np * nl);
    IncidenceResult {
        count,
        points: np,
        lines: nl,
        q,
        expectation: Ratio::new(np * nl, q),
        deviation_sq: &dev * &dev,
        allowance: BigInt::from(q).pow(3) * BigInt::from(np * nl),
    }
}

/// `(q·I − |P||L|)² ≤ q³·|P||L|`.
pub fn vinh_check(
    spec: &FieldSpec,
    points: &[Point],
    lines: &[AffineLine],
) -> (bool, IncidenceResult) {
    let r = incidence_count(spec, points, lines);
    (r.deviation_sq <= r.allowance, r)
}

/// Lines meeting `A` in at most one point.
pub fn undetermined_lines(a: &PlanePointSet) -> BTreeSet<AffineLine> {
    let spec = a.spec();
    let pts = a.to_vec();
    let mut determined = BTreeSet::new();
    for (i, &p) in pts.iter().enumerate() {
        for &r in &pts[i + 1..] {
            determined.insert(AffineLine::through(spec, p, r));
        }
    }
    enumerate_lines(spec)
        .into_iter()
        .filter(|l| !determined.contains(l))
        .collect()
}

pub fn sumset(
    spec: &FieldSpec,
    a: &BTreeSet<FieldElement>,
    b: &BTreeSet<FieldElement>,
) -> BTreeSet<FieldElement> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| spec.add(x, y)))
        .collect()
}

/// `{h : S + h = S}`.
pub fn stabilizer_subgroup(spec: &FieldSpec, s: &BTreeSet<FieldElement>) -> BTreeSet<FieldElement> {
    spec.elements()
        .filter(|&h| s.iter().all(|&x| s.contains(&spec.add(x, h))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KneserResult {
    pub holds: bool,
    pub sumset_size: usize,
    pub h_size: usize,
}

/// `|A + B| ≥ min(q, |A| + |B| − |H|)` with `H` the stabilizer of `A + B`.
pub fn kneser_check(
    spec: &FieldSpec,
    a: &BTreeSet<FieldElement>,
    b: &BTreeSet<FieldElement>,
) -> Result<KneserResult, BoundsError> {
    if a.is_empty() || b.is_empty() {
        return Err(BoundsError::EmptySet);
    }
    let s = sumset(spec, a, b);
    let h = stabilizer_subgroup(spec, &s).len();
    // |A| + |B| − |H| may be negative
    let need = (spec.q() as i64).min(a.len() as i64 + b.len() as i64 - h as i64);
    Ok(KneserResult {
        holds: s.len() as i64 >= need,
        sumset_size: s.len(),
        h_size: h,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuzsaResult {
    pub holds: bool,
    pub tripling: Ratio<u64>,
    /// `|A^k|`.
    pub power_size: usize,
    /// `C^{k−2}|A|`.
    pub bound: Ratio<BigInt>,
}

/// `|A^k| ≤ C^{k−2}|A|` for symmetric `A` and `k ≥ 4`.
pub fn ruzsa_check(a: &AffSet, k: u32) -> Result<RuzsaResult, BoundsError> {
    if k < 4 {
        return Err(BoundsError::BadExponent(k));
    }
    if a.is_empty() {
        return Err(BoundsError::EmptySet);
    }
    if !a.is_symmetric() {
        return Err(AffError::NotSymmetric.into());
    }
    let sizes = power_sizes(a, k)?;
    let (m, n) = (sizes[0] as u64, sizes[2] as u64);
    let power_size = sizes[k as usize - 1];
    let bound = Ratio::new(BigInt::from(n).pow(k - 2), BigInt::from(m).pow(k - 3));
    Ok(RuzsaResult {
        holds: Ratio::from_integer(BigInt::from(power_size)) <= bound,
        tripling: Ratio::new(n, m),
        power_size,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affgroup::{AffElement, AffineGroup};

    fn field(q: u64) -> FieldSpec {
        FieldSpec::from_order(q).unwrap()
    }

    fn els(spec: &FieldSpec, codes: &[u64]) -> BTreeSet<FieldElement> {
        codes.iter().map(|&c| spec.element(c).unwrap()).collect()
    }

    fn all_points(spec: &FieldSpec) -> Vec<Point> {
        PlanePointSet::full(spec).to_vec()
    }

    #[test]
    fn line_enumeration() {
        for (q, n) in [(2, 6), (4, 20), (5, 30)] {
            let f = field(q);
            let lines = enumerate_lines(&f);
            assert_eq!(lines.len(), n);
            assert_eq!(lines.iter().collect::<BTreeSet<_>>().len(), n);
            let pts = all_points(&f);
            for l in &lines {
                assert_eq!(
                    pts.iter().filter(|&&p| l.contains(&f, p)).count(),
                    q as usize
                );
            }
        }
        let f = field(4);
        let lines = enumerate_lines(&f);
        assert!(matches!(lines[0], AffineLine::NonVertical { .. }));
        assert!(matches!(lines[19], AffineLine::Vertical(_)));
    }

    #[test]
    fn line_text_round_trip() {
        let f = field(5);
        for l in enumerate_lines(&f) {
            assert_eq!(AffineLine::parse(&f, &l.to_string()).unwrap(), l);
        }
        assert_eq!(
            AffineLine::parse(&f, "v 3").unwrap(),
            AffineLine::Vertical(f.element(3).unwrap())
        );
        assert!(AffineLine::parse(&f, "x 3").is_err());
        assert!(AffineLine::parse(&f, "1").is_err());
        assert!(AffineLine::parse(&f, "1 9").is_err());
    }

    #[test]
    fn incidence_examples() {
        let f = field(5);
        let r = incidence_count(&f, &all_points(&f), &enumerate_lines(&f));
        assert_eq!(r.count, 150);
        let p = (FieldElement::ZERO, FieldElement::ZERO);
        let l = AffineLine::Vertical(FieldElement::ZERO);
        assert_eq!(incidence_count(&f, &[p], &[l]).count, 1);
        assert_eq!(incidence_count(&f, &[], &enumerate_lines(&f)).count, 0);
    }

    #[test]
    fn vinh_examples() {
        let f = field(7);
        let (holds, r) = vinh_check(&f, &all_points(&f), &enumerate_lines(&f));
        assert!(holds);
        assert_eq!(r.deviation_sq, BigInt::from(0));
        assert_eq!(r.expectation, Ratio::from_integer(392));
        let (holds, r) = vinh_check(&f, &[], &[]);
        assert!(holds);
        assert_eq!(r.allowance, BigInt::from(0));
    }

    #[test]
    fn double_counting_exhaustive_q4() {
        // every point lies on q + 1 lines
        let f = field(4);
        let lines = enumerate_lines(&f);
        let pts = all_points(&f);
        for mask in 0u32..(1 << 16) {
            let p: Vec<_> = (0..16)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| pts[i])
                .collect();
            assert_eq!(incidence_count(&f, &p, &lines).count, p.len() as u64 * 5);
        }
    }

    #[test]
    fn kneser_exhaustive_small_sets_of_f8() {
        let f = field(8);
        let subsets: Vec<BTreeSet<FieldElement>> = (1u32..256)
            .filter(|m| m.count_ones() <= 4)
            .map(|m| {
                (0..8)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| f.element(i).unwrap())
                    .collect()
            })
            .collect();
        for a in &subsets {
            for b in &subsets {
                assert!(kneser_check(&f, a, b).unwrap().holds);
            }
        }
    }

    #[test]
    fn undetermined_examples() {
        let f4 = field(4);
        let square = PlanePointSet::from_codes(&f4, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let und = undetermined_lines(&square);
        assert_eq!(und.len(), 14);
        let pts = square.to_vec();
        assert!(
            incidence_count(&f4, &pts, &und.iter().copied().collect::<Vec<_>>()).count
                <= und.len() as u64
        );
        let single = PlanePointSet::from_codes(&f4, &[(2, 3)]).unwrap();
        assert_eq!(undetermined_lines(&single).len(), 20);
    }

    #[test]
    fn sumset_examples() {
        let f4 = field(4);
        let a = els(&f4, &[0, 1]);
        assert_eq!(sumset(&f4, &a, &a), a);
        assert_eq!(stabilizer_subgroup(&f4, &a), a);
        for q in [4, 5, 8] {
            let f = field(q);
            let all: BTreeSet<_> = f.elements().collect();
            assert_eq!(stabilizer_subgroup(&f, &all), all);
            let b = els(&f, &[1, 3]);
            assert_eq!(sumset(&f, &els(&f, &[0]), &b), b);
        }
    }

    #[test]
    fn kneser_examples() {
        let f4 = field(4);
        let a = els(&f4, &[0, 1]);
        let r = kneser_check(&f4, &a, &a).unwrap();
        assert_eq!((r.holds, r.sumset_size, r.h_size), (true, 2, 2));
        for q in [4, 5, 7] {
            let f = field(q);
            let all: BTreeSet<_> = f.elements().collect();
            let r = kneser_check(&f, &all, &all).unwrap();
            assert!(r.holds);
            assert_eq!(r.sumset_size, q as usize);
        }
        assert_eq!(
            kneser_check(&f4, &BTreeSet::new(), &a),
            Err(BoundsError::EmptySet)
        );
    }

    #[test]
    fn stabilizer_is_a_subgroup() {
        let f = field(8);
        for mask in 1u32..256 {
            let s: BTreeSet<_> = (0..8)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| f.element(i).unwrap())
                .collect();
            let h = stabilizer_subgroup(&f, &s);
            assert!(h.contains(&FieldElement::ZERO));
            for &x in &h {
                assert!(h.contains(&f.neg(x)));
                for &y in &h {
                    assert!(h.contains(&f.add(x, y)));
                }
            }
        }
    }

    #[test]
    fn ruzsa_examples() {
        let f5 = field(5);
        let g5 = AffineGroup::new(&f5);
        let stab = g5.stabilizer(FieldElement::ZERO);
        let r = ruzsa_check(&stab, 6).unwrap();
        assert!(r.holds);
        assert_eq!(r.tripling, Ratio::from_integer(1));
        assert_eq!(r.power_size, 4);

        let a = AffSet::from_codes(&f5, &[(1, 0), (2, 0), (3, 0)]).unwrap();
        let r = ruzsa_check(&a, 4).unwrap();
        assert!(r.holds);
        assert_eq!(r.power_size, 4);
        assert_eq!(r.bound, Ratio::new(BigInt::from(16), BigInt::from(3)));

        assert_eq!(ruzsa_check(&a, 3).unwrap_err(), BoundsError::BadExponent(3));
        let lopsided = AffSet::new(&f5, [AffElement::identity(), g5.element(2, 0).unwrap()]);
        assert_eq!(
            ruzsa_check(&lopsided, 4).unwrap_err(),
            BoundsError::Aff(AffError::NotSymmetric)
        );
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::affgroup::{AffSet, AffineGroup};
    use proptest::prelude::*;

    fn field(q: u64) -> FieldSpec {
        FieldSpec::from_order(q).unwrap()
    }

    proptest! {
        #[test]
        fn double_counting_q5(mask in any::<u32>()) {
            let f = field(5);
            let pts: Vec<_> = PlanePointSet::full(&f).iter().enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p).collect();
            prop_assert_eq!(incidence_count(&f, &pts, &enumerate_lines(&f)).count, pts.len() as u64 * 6);
        }

        #[test]
        fn vinh_holds_at_q7(pmask in any::<u64>(), lmask in any::<u64>()) {
            let f = field(7);
            let pts: Vec<_> = PlanePointSet::full(&f).iter().enumerate()
                .filter(|(i, _)| pmask >> i & 1 == 1).map(|(_, p)| p).collect();
            let lines: Vec<_> = enumerate_lines(&f).into_iter().enumerate()
                .filter(|(i, _)| lmask >> i & 1 == 1).map(|(_, l)| l).collect();
            let (holds, r) = vinh_check(&f, &pts, &lines);
            prop_assert!(holds);
            prop_assert!(r.count <= r.points * r.lines);
        }

        #[test]
        fn undetermined_lines_meet_the_set_at_most_once(mask in 1u32..(1 << 16)) {
            let f = field(4);
            let a = PlanePointSet::new(&f, PlanePointSet::full(&f).iter().enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p));
            let und: Vec<_> = undetermined_lines(&a).into_iter().collect();
            prop_assert!(incidence_count(&f, &a.to_vec(), &und).count <= und.len() as u64);
        }

        #[test]
        fn ruzsa_chain(gens in proptest::collection::vec((1u64..5, 0u64..5), 1..8), k in 4u32..=8) {
            let f = field(5);
            let g = AffineGroup::new(&f);
            let elems: Vec<_> = gens.iter().map(|&(a, b)| g.element(a, b).unwrap()).collect();
            let a = AffSet::new(&f, elems.iter().flat_map(|&x| [x, g.inv(x)]));
            prop_assert!(ruzsa_check(&a, k).unwrap().holds);
        }
    }
}
