//! Point sets in F_q², their directions, and the Rédei polynomial pipeline.
//!
//! For a finite slope `y` the Rédei polynomial of `A` is
//! `H_y(x) = Π (x + y·a − b)`. Its complement `f_y` is the Euclidean quotient
//! of `x^q` by `H_y`, and `g_y` the negated remainder, so that
//! `H_y·f_y = x^q + g_y` holds exactly. Off the direction set `g_y = −x`.
//!
//! Slopes are `Finite(code)` or `Inf`, ordered by code with `Inf` last.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ff::{FieldElement, FieldError, FieldSpec};
use crate::poly::{from_roots, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaneError {
    #[error("at least two points are required, got {0}")]
    TooFewPoints(usize),
    #[error("the point set is empty")]
    EmptySet,
    #[error("set size {size} must exceed q = {q}")]
    PreconditionSize { size: usize, q: u32 },
    #[error("set size {size} outside 2..={q}")]
    SizeOutOfRange { size: usize, q: u32 },
    #[error("the only direction is 0")]
    OnlyZeroDirection,
    #[error("the vertical direction is not spanned; normalize the set first")]
    InfinityNotSpanned,
    #[error("slope {0} is not a direction of the set")]
    SlopeNotDetermined(FieldElement),
    #[error("all points lie on one line of slope {0}")]
    AllOnOneLine(FieldElement),
    #[error("direction count {count} is degenerate (1 or q+1 = {full})")]
    DegenerateDirectionCount { count: usize, full: usize },
    #[error("point ({0}, {1}) is not in the set")]
    PointNotInSet(FieldElement, FieldElement),
    #[error("all q + 1 directions are spanned")]
    AllDirectionsSpanned,
    #[error("duplicate point ({0}, {1})")]
    DuplicatePoint(FieldElement, FieldElement),
    #[error("exponent order violated at slope {y}: l2 = {l2}, l1 = {l1:?}, e = {e}")]
    ExponentOrder {
        y: FieldElement,
        l1: Option<u32>,
        l2: u32,
        e: u32,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Point = (FieldElement, FieldElement);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slope {
    Finite(FieldElement),
    Inf,
}

impl Slope {
    pub fn finite(self) -> Option<FieldElement> {
        match self {
            Slope::Finite(y) => Some(y),
            Slope::Inf => None,
        }
    }

    /// Dense index in `0..=q`, with `Inf` at `q`.
    fn index(self, q: u32) -> usize {
        match self {
            Slope::Finite(y) => y.code() as usize,
            Slope::Inf => q as usize,
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(y) => write!(f, "{y}"),
            Slope::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Slope::Finite(y) => s.serialize_u32(y.code()),
            Slope::Inf => s.serialize_str("inf"),
        }
    }
}

/// Slope of the secant through two distinct points.
pub fn secant_slope(spec: &FieldSpec, p: Point, r: Point) -> Slope {
    let da = spec.sub(r.0, p.0);
    if da.is_zero() {
        Slope::Inf
    } else {
        let db = spec.sub(r.1, p.1);
        Slope::Finite(spec.mul(db, spec.inv(da).expect("nonzero")))
    }
}

/// A set of slopes stored as a bitmask over `0..=q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeMask {
    q: u32,
    bits: Vec<u64>,
}

impl SlopeMask {
    pub fn empty(q: u32) -> Self {
        SlopeMask {
            q,
            bits: vec![0; (q as usize + 1).div_ceil(64)],
        }
    }

    pub fn insert(&mut self, s: Slope) {
        let i = s.index(self.q);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, s: Slope) -> bool {
        let i = s.index(self.q);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Slope> + '_ {
        (0..=self.q as usize)
            .filter(|&i| self.bits[i / 64] >> (i % 64) & 1 == 1)
            .map(|i| {
                if i == self.q as usize {
                    Slope::Inf
                } else {
                    Slope::Finite(FieldElement::from_code_unchecked(i as u32))
                }
            })
    }
}

/// Brute-force direction set of a slice of distinct points.
pub fn direction_mask(spec: &FieldSpec, points: &[Point]) -> SlopeMask {
    let mut mask = SlopeMask::empty(spec.q());
    for (i, &p) in points.iter().enumerate() {
        for &r in &points[i + 1..] {
            mask.insert(secant_slope(spec, p, r));
        }
    }
    mask
}

/// A finite subset of F_q².
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanePointSet {
    spec: FieldSpec,
    points: BTreeSet<Point>,
}

impl PlanePointSet {
    /// Collects points with set semantics (duplicates merge).
    pub fn new(spec: &FieldSpec, points: impl IntoIterator<Item = Point>) -> Self {
        PlanePointSet {
            spec: spec.clone(),
            points: points.into_iter().collect(),
        }
    }

    /// Like [`PlanePointSet::new`] but rejects repeated points.
    pub fn from_distinct(
        spec: &FieldSpec,
        points: impl IntoIterator<Item = Point>,
    ) -> Result<Self, PlaneError> {
        let mut set = BTreeSet::new();
        for p in points {
            if !set.insert(p) {
                return Err(PlaneError::DuplicatePoint(p.0, p.1));
            }
        }
        Ok(PlanePointSet {
            spec: spec.clone(),
            points: set,
        })
    }

    /// Convenience constructor from raw codes.
    pub fn from_codes(spec: &FieldSpec, codes: &[(u64, u64)]) -> Result<Self, PlaneError> {
        let pts = codes
            .iter()
            .map(|&(a, b)| Ok((spec.element(a)?, spec.element(b)?)))
            .collect::<Result<Vec<_>, FieldError>>()?;
        Self::from_distinct(spec, pts)
    }

    /// The whole plane F_q².
    pub fn full(spec: &FieldSpec) -> Self {
        Self::new(
            spec,
            spec.elements()
                .flat_map(|a| spec.elements().map(move |b| (a, b))),
        )
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.contains(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<Point> {
        self.iter().collect()
    }

    pub fn q(&self) -> u32 {
        self.spec.q()
    }

    fn mask(&self) -> SlopeMask {
        direction_mask(&self.spec, &self.to_vec())
    }

    /// Slopes spanned by pairs of distinct points.
    pub fn directions(&self) -> BTreeSet<Slope> {
        self.mask().iter().collect()
    }
}

/// Per-slope pieces of the Rédei analysis at a finite slope `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeDecomposition {
    pub y: FieldElement,
    pub h: Polynomial,
    pub f: Polynomial,
    pub g: Polynomial,
    pub l1: Option<u32>,
    pub l2: u32,
    /// Product of all linear factors of `x^q + g` with multiplicity.
    pub fully_reducible: Polynomial,
    /// The rootless cofactor of `x^q + g`.
    pub nonlinear: Polynomial,
    /// `g̃` with `g̃^{p^{l2}} = g`.
    pub reduced_g: Polynomial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionReport {
    pub directions: BTreeSet<Slope>,
    /// `q − |A|`; negative when the set is larger than `q`.
    pub n: i64,
    pub collinear: bool,
    /// Slope used by [`normalize_infinity`] before the per-slope analysis.
    pub normalized_by: Option<Slope>,
    /// Keyed by finite slopes of the normalized set.
    pub per_slope: BTreeMap<FieldElement, SlopeDecomposition>,
}

/// `D`, `n` and collinearity by brute force over all pairs.
pub fn direction_set(a: &PlanePointSet) -> Result<DirectionReport, PlaneError> {
    if a.len() < 2 {
        return Err(PlaneError::TooFewPoints(a.len()));
    }
    let directions = a.directions();
    Ok(DirectionReport {
        collinear: directions.len() == 1,
        directions,
        n: a.q() as i64 - a.len() as i64,
        normalized_by: None,
        per_slope: BTreeMap::new(),
    })
}

/// [`direction_set`] plus the per-slope decompositions of the normalized
/// set, when `2 ≤ |A| ≤ q` and `1 < |D| < q + 1`.
pub fn direction_report(a: &PlanePointSet) -> Result<DirectionReport, PlaneError> {
    let mut report = direction_set(a)?;
    let full = a.q() as usize + 1;
    let count = report.directions.len();
    if a.len() <= a.q() as usize && count > 1 && count < full {
        let (norm, used) = normalize_infinity(a)?;
        for y in norm.directions().into_iter().filter_map(Slope::finite) {
            report.per_slope.insert(y, slope_decomposition(&norm, y)?);
        }
        report.normalized_by = Some(used);
    }
    Ok(report)
}

/// Lemma-style check for sets larger than `q`: true iff all `q + 1`
/// directions are spanned.
pub fn spans_all_check(a: &PlanePointSet) -> Result<bool, PlaneError> {
    if a.len() <= a.q() as usize {
        return Err(PlaneError::PreconditionSize {
            size: a.len(),
            q: a.q(),
        });
    }
    Ok(a.mask().len() == a.q() as usize + 1)
}

/// Shears the set so that the vertical direction is spanned.
///
/// Returns the set unchanged with `Inf` when it already spans `Inf`.
/// Otherwise takes the smallest nonzero direction `d` and applies
/// `(a, b) ↦ (a − d⁻¹·b, b)`, which sends secants of slope `d` to vertical
/// ones and permutes the remaining slopes; `d` is returned.
pub fn normalize_infinity(a: &PlanePointSet) -> Result<(PlanePointSet, Slope), PlaneError> {
    if a.len() < 2 {
        return Err(PlaneError::TooFewPoints(a.len()));
    }
    let mask = a.mask();
    if mask.contains(Slope::Inf) {
        return Ok((a.clone(), Slope::Inf));
    }
    let d = mask
        .iter()
        .filter_map(Slope::finite)
        .find(|d| !d.is_zero())
        .ok_or(PlaneError::OnlyZeroDirection)?;
    let f = a.spec();
    let shear = f.inv(d)?;
    let sheared = PlanePointSet::new(f, a.iter().map(|(x, y)| (f.sub(x, f.mul(shear, y)), y)));
    Ok((sheared, Slope::Finite(d)))
}

/// `H_y(x) = Π (x + y·a − b)`, monic of degree `|A|`.
pub fn redei_polynomial(a: &PlanePointSet, y: FieldElement) -> Result<Polynomial, PlaneError> {
    if a.is_empty() {
        return Err(PlaneError::EmptySet);
    }
    let f = a.spec();
    let roots: Vec<_> = a.iter().map(|(pa, pb)| f.sub(pb, f.mul(y, pa))).collect();
    Ok(from_roots(f, &roots))
}

fn check_size(a: &PlanePointSet) -> Result<(), PlaneError> {
    if a.len() < 2 || a.len() > a.q() as usize {
        return Err(PlaneError::SizeOutOfRange {
            size: a.len(),
            q: a.q(),
        });
    }
    Ok(())
}

fn x_to_q(spec: &FieldSpec) -> Polynomial {
    Polynomial::monomial(spec, FieldElement::ONE, spec.q() as usize)
}

/// `(f_y, g_y)` with `H_y·f_y = x^q + g_y`: `f_y` is the quotient of `x^q`
/// by `H_y` and `g_y` the negated remainder.
pub fn complement_and_remainder(
    a: &PlanePointSet,
    y: FieldElement,
) -> Result<(Polynomial, Polynomial), PlaneError> {
    check_size(a)?;
    let h = redei_polynomial(a, y)?;
    let (f, r) = x_to_q(a.spec()).quotient_rem(&h)?;
    Ok((f, -&r))
}

/// Full decomposition at a finite direction `y` of a set spanning `Inf`.
pub fn slope_decomposition(
    a: &PlanePointSet,
    y: FieldElement,
) -> Result<SlopeDecomposition, PlaneError> {
    check_size(a)?;
    let mask = a.mask();
    if !mask.contains(Slope::Inf) {
        return Err(PlaneError::InfinityNotSpanned);
    }
    if !mask.contains(Slope::Finite(y)) {
        return Err(PlaneError::SlopeNotDetermined(y));
    }
    let spec = a.spec();
    let h = redei_polynomial(a, y)?;
    let (f, r) = x_to_q(spec).quotient_rem(&h)?;
    let g = -&r;
    if g.is_constant() {
        // x^q + c = (x + c^{1/q})^q
        return Err(PlaneError::AllOnOneLine(y));
    }
    let (l2, reduced_g) = g.pth_content()?;
    let lacunary = &x_to_q(spec) + &g;
    let split = lacunary.linear_split()?;
    let e = spec.e();
    match split.l1 {
        Some(l1) if l1 >= e => return Err(PlaneError::AllOnOneLine(y)),
        Some(l1) if l2 <= l1 => {}
        l1 => return Err(PlaneError::ExponentOrder { y, l1, l2, e }),
    }
    Ok(SlopeDecomposition {
        y,
        h,
        f,
        g,
        l1: split.l1,
        l2,
        fully_reducible: split.fully_reducible,
        nonlinear: split.nonlinear,
        reduced_g,
    })
}

/// Upper bound on `|D|`, or `Trivial` when `l1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperBound {
    Trivial,
    Finite(i64),
}

impl Serialize for UpperBound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            UpperBound::Trivial => s.serialize_str("trivial"),
            UpperBound::Finite(v) => s.serialize_i64(*v),
        }
    }
}

impl fmt::Display for UpperBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperBound::Trivial => write!(f, "trivial"),
            UpperBound::Finite(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionBounds {
    /// `⌈(|A|−1)/(p^{l2}+1)⌉ + 2`.
    pub lower: i64,
    /// Floor of the upper bound, which is rational in general.
    pub upper: UpperBound,
    pub l1: u32,
    pub l2: u32,
    /// Slope (of the normalized set) minimizing `l1`.
    pub slope: FieldElement,
    pub normalized_by: Slope,
    pub directions: usize,
}

impl DirectionBounds {
    pub fn sandwich_holds(&self) -> bool {
        let d = self.directions as i64;
        self.lower <= d
            && match self.upper {
                UpperBound::Trivial => true,
                UpperBound::Finite(u) => d <= u,
            }
    }
}

/// Lower and upper bounds on `|D|` from the `l1`/`l2` exponents.
pub fn direction_bounds(a: &PlanePointSet) -> Result<DirectionBounds, PlaneError> {
    check_size(a)?;
    let q = a.q() as i64;
    let full = q as usize + 1;
    let count = a.mask().len();
    if count == 1 || count == full {
        return Err(PlaneError::DegenerateDirectionCount { count, full });
    }
    let (norm, normalized_by) = normalize_infinity(a)?;
    let mut best: Option<SlopeDecomposition> = None;
    for y in norm.directions().into_iter().filter_map(Slope::finite) {
        let dec = slope_decomposition(&norm, y)?;
        // ascending slope order, so strict comparison keeps the smallest code
        if best.as_ref().is_none_or(|b| dec.l1 < b.l1) {
            best = Some(dec);
        }
    }
    let best = best.expect("a non-collinear set spanning inf has a finite direction");
    let l1 = best.l1.expect("H_y contributes linear factors");
    let l2 = best.l2;
    let p = a.spec().p() as i64;
    let size = a.len() as i64;
    let n = q - size;

    let p_l2 = p.pow(l2);
    let lower = (size - 1 + p_l2) / (p_l2 + 1) + 2;

    let upper = if l1 == 0 {
        UpperBound::Trivial
    } else {
        let p_l1 = p.pow(l1);
        let num = size - 1 - n * (size + p_l1 - q - 1).max(0);
        let ratio = num.div_euclid(p_l1 - 1);
        UpperBound::Finite(n + ratio.max(1))
    };

    Ok(DirectionBounds {
        lower,
        upper,
        l1,
        l2,
        slope: best.y,
        normalized_by,
        directions: count,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MainDirCheck {
    /// `|A|/p^{e/2}` for even `e`, `|A|/(p^{(e−1)/2}+1)` for odd `e`.
    pub threshold: Ratio<u64>,
    pub directions: usize,
    pub holds: bool,
    /// Collinear sets are outside the statement.
    pub exempt: bool,
}

/// Denominator of the direction threshold for F_{p^e}.
pub fn maindir_denominator(spec: &FieldSpec) -> u64 {
    let p = spec.p() as u64;
    let e = spec.e();
    if e.is_multiple_of(2) {
        p.pow(e / 2)
    } else {
        p.pow((e - 1) / 2) + 1
    }
}

/// `|D| > |A|/√q` (e even) or `|D| > |A|/(p^{(e−1)/2}+1)` (e odd), unless
/// `A` is collinear.
pub fn maindir_check(a: &PlanePointSet) -> Result<MainDirCheck, PlaneError> {
    check_size(a)?;
    let count = a.mask().len();
    let den = maindir_denominator(a.spec());
    let size = a.len() as u64;
    Ok(MainDirCheck {
        threshold: Ratio::new(size, den),
        directions: count,
        holds: count as u64 * den > size,
        exempt: count == 1,
    })
}

/// Finite slopes `y` for which the line through `pt` with slope `y`
/// carries a ghost point, i.e. `x + y·a − b` divides `f_y`.
pub fn ghost_slopes(a: &PlanePointSet, pt: Point) -> Result<BTreeSet<FieldElement>, PlaneError> {
    check_size(a)?;
    if !a.contains(pt) {
        return Err(PlaneError::PointNotInSet(pt.0, pt.1));
    }
    let spec = a.spec();
    if a.mask().len() == spec.q() as usize + 1 {
        return Err(PlaneError::AllDirectionsSpanned);
    }
    let mut out = BTreeSet::new();
    for y in spec.elements() {
        let (f, _) = complement_and_remainder(a, y)?;
        let root = spec.sub(pt.1, spec.mul(y, pt.0));
        if f.eval(root).is_zero() {
            out.insert(y);
        }
    }
    Ok(out)
}

/// Number of distinct lines of slope `y` meeting `A` (distinct roots of `H_y`).
pub fn lines_meeting(a: &PlanePointSet, y: FieldElement) -> Result<usize, PlaneError> {
    if a.is_empty() {
        return Err(PlaneError::EmptySet);
    }
    let f = a.spec();
    let intercepts: BTreeSet<_> = a.iter().map(|(pa, pb)| f.sub(pb, f.mul(y, pa))).collect();
    Ok(intercepts.len())
}

/// Checks the Rédei identities of a set at every finite slope and returns a
/// description of each failure:
///
/// * `H_y·f_y = x^q + g_y`;
/// * `g_y = −x` exactly when `y` is not a direction, which is also exactly
///   when `H_y` has no repeated root;
/// * `deg g_y ≤ |D| − 1`, evaluated on the normalized set (the degree bound
///   needs the vertical direction to be spanned).
pub fn redei_identity_failures(a: &PlanePointSet) -> Result<Vec<String>, PlaneError> {
    check_size(a)?;
    let spec = a.spec();
    let mut failures = Vec::new();
    let minus_x = -&Polynomial::x(spec);
    let mask = a.mask();
    let xq = x_to_q(spec);
    for y in spec.elements() {
        let h = redei_polynomial(a, y)?;
        let (f, g) = complement_and_remainder(a, y)?;
        if &h * &f != &xq + &g {
            failures.push(format!("H_{y}·f_{y} != x^q + g_{y}"));
        }
        let in_d = mask.contains(Slope::Finite(y));
        if (g == minus_x) == in_d {
            failures.push(format!("g_{y} = -x disagrees with y in D ({in_d})"));
        }
        let repeated = h.roots_with_multiplicity()?.values().any(|&m| m > 1);
        if repeated != in_d {
            failures.push(format!(
                "repeated root of H_{y} disagrees with y in D ({in_d})"
            ));
        }
    }
    let shares_abscissa = {
        let xs: BTreeSet<_> = a.iter().map(|p| p.0).collect();
        xs.len() < a.len()
    };
    if shares_abscissa != mask.contains(Slope::Inf) {
        failures.push("vertical direction disagrees with shared abscissae".to_string());
    }
    let count = mask.len();
    if count > 1 {
        let (norm, _) = normalize_infinity(a)?;
        for y in spec.elements() {
            let (_, g) = complement_and_remainder(&norm, y)?;
            if g.degree().is_some_and(|d| d + 1 > count) {
                failures.push(format!(
                    "deg g_{y} = {:?} exceeds |D| - 1 = {}",
                    g.degree(),
                    count - 1
                ));
            }
        }
    }
    Ok(failures)
}
