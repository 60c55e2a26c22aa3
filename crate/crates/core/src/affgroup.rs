//! The affine group Aff(F_q) ≅ F_q^* × F_q.
//!
//! `(a, b)` stands for the map `x ↦ a·x + b`; composition is
//! `(a, b)(a′, b′) = (a·a′, a·b′ + b)`. Seen in the plane, `Stab(x)` is the
//! line `b = (1 − a)·x` and the unipotent subgroup `U = {(1, b)}` is a
//! vertical line.
//!
//! Product sets are computed on a dense bitmap indexed by `a·q + b`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::ff::{FieldElement, FieldError, FieldSpec};
use crate::plane::{secant_slope, Slope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffError {
    #[error("affine elements need a nonzero scale")]
    ZeroScale,
    #[error("the set is empty")]
    EmptySet,
    #[error("the set is not closed under inversion")]
    NotSymmetric,
    #[error("the identity is not allowed here")]
    IdentityElement,
    #[error("element is not in A^{k}")]
    MembershipViolation { k: u32 },
    #[error("set of size {0} is too small")]
    TooSmall(usize),
    #[error("exponent {0} is out of range")]
    BadExponent(u32),
    #[error("duplicate element ({0}, {1})")]
    DuplicateElement(FieldElement, FieldElement),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffElement {
    a: FieldElement,
    b: FieldElement,
}

impl AffElement {
    pub fn new(a: FieldElement, b: FieldElement) -> Result<Self, AffError> {
        if a.is_zero() {
            return Err(AffError::ZeroScale);
        }
        Ok(AffElement { a, b })
    }

    pub fn identity() -> Self {
        AffElement {
            a: FieldElement::ONE,
            b: FieldElement::ZERO,
        }
    }

    pub fn a(self) -> FieldElement {
        self.a
    }

    pub fn b(self) -> FieldElement {
        self.b
    }

    pub fn is_identity(self) -> bool {
        self == Self::identity()
    }

    /// The element as a point of the plane.
    pub fn as_point(self) -> (FieldElement, FieldElement) {
        (self.a, self.b)
    }
}

impl fmt::Display for AffElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Group operations of Aff(F_q) for a fixed field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineGroup {
    spec: FieldSpec,
}

impl AffineGroup {
    pub fn new(spec: &FieldSpec) -> Self {
        AffineGroup { spec: spec.clone() }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// `q(q − 1)`.
    pub fn order(&self) -> usize {
        let q = self.spec.q() as usize;
        q * (q - 1)
    }

    pub fn element(&self, a: u64, b: u64) -> Result<AffElement, AffError> {
        AffElement::new(self.spec.element(a)?, self.spec.element(b)?)
    }

    #[inline]
    pub fn mul(&self, g: AffElement, h: AffElement) -> AffElement {
        let f = &self.spec;
        AffElement {
            a: f.mul(g.a, h.a),
            b: f.add(f.mul(g.a, h.b), g.b),
        }
    }

    #[inline]
    pub fn inv(&self, g: AffElement) -> AffElement {
        let f = &self.spec;
        let ai = f.inv(g.a).expect("scale is nonzero");
        AffElement {
            a: ai,
            b: f.neg(f.mul(ai, g.b)),
        }
    }

    /// `g·x = a·x + b`.
    pub fn act(&self, g: AffElement, x: FieldElement) -> FieldElement {
        self.spec.add(self.spec.mul(g.a, x), g.b)
    }

    /// `φ_g(h) = h·g·h⁻¹`.
    pub fn conjugate(&self, h: AffElement, g: AffElement) -> AffElement {
        self.mul(self.mul(h, g), self.inv(h))
    }

    pub fn elements(&self) -> impl Iterator<Item = AffElement> + '_ {
        self.spec
            .nonzero_elements()
            .flat_map(move |a| self.spec.elements().map(move |b| AffElement { a, b }))
    }

    #[inline]
    fn index(&self, g: AffElement) -> usize {
        g.a.code() as usize * self.spec.q() as usize + g.b.code() as usize
    }

    #[inline]
    fn element_at(&self, i: usize) -> AffElement {
        let q = self.spec.q() as usize;
        AffElement {
            a: FieldElement::from_code_unchecked((i / q) as u32),
            b: FieldElement::from_code_unchecked((i % q) as u32),
        }
    }

    /// `Stab(x) = {(a, (1 − a)·x)}`, of size `q − 1`.
    pub fn stabilizer(&self, x: FieldElement) -> AffSet {
        let f = &self.spec;
        AffSet::new(
            f,
            f.nonzero_elements().map(|a| AffElement {
                a,
                b: f.mul(f.sub(FieldElement::ONE, a), x),
            }),
        )
    }

    /// `U = {(1, b)}`, of size `q`.
    pub fn unipotent(&self) -> AffSet {
        let f = &self.spec;
        AffSet::new(
            f,
            f.elements().map(|b| AffElement {
                a: FieldElement::ONE,
                b,
            }),
        )
    }

    pub fn whole(&self) -> AffSet {
        AffSet::new(&self.spec, self.elements())
    }

    /// Slope `b/(a − 1)` of the fibres of `φ_g`, `Inf` when `a = 1`.
    pub fn fiber_slope(&self, g: AffElement) -> Result<Slope, AffError> {
        if g.is_identity() {
            return Err(AffError::IdentityElement);
        }
        let f = &self.spec;
        let den = f.sub(g.a, FieldElement::ONE);
        Ok(match f.inv(den) {
            Ok(di) => Slope::Finite(f.mul(g.b, di)),
            Err(_) => Slope::Inf,
        })
    }
}

/// A finite subset of Aff(F_q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffSet {
    spec: FieldSpec,
    elems: BTreeSet<AffElement>,
}

impl AffSet {
    pub fn new(spec: &FieldSpec, elems: impl IntoIterator<Item = AffElement>) -> Self {
        AffSet {
            spec: spec.clone(),
            elems: elems.into_iter().collect(),
        }
    }

    /// From `(a, b)` codes, rejecting `a = 0` and duplicates.
    pub fn from_codes(spec: &FieldSpec, codes: &[(u64, u64)]) -> Result<Self, AffError> {
        let group = AffineGroup::new(spec);
        let mut elems = BTreeSet::new();
        for &(a, b) in codes {
            let g = group.element(a, b)?;
            if !elems.insert(g) {
                return Err(AffError::DuplicateElement(g.a, g.b));
            }
        }
        Ok(AffSet {
            spec: spec.clone(),
            elems,
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn group(&self) -> AffineGroup {
        AffineGroup::new(&self.spec)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, g: AffElement) -> bool {
        self.elems.contains(&g)
    }

    pub fn iter(&self) -> impl Iterator<Item = AffElement> + '_ {
        self.elems.iter().copied()
    }

    pub fn inverse(&self) -> AffSet {
        let g = self.group();
        AffSet::new(&self.spec, self.iter().map(|x| g.inv(x)))
    }

    pub fn is_symmetric(&self) -> bool {
        let g = self.group();
        self.iter().all(|x| self.contains(g.inv(x)))
    }

    pub fn is_subset(&self, other: &AffSet) -> bool {
        self.elems.is_subset(&other.elems)
    }

    /// `π(A) = {a : (a, b) ∈ A}`.
    pub fn projection_pi(&self) -> BTreeSet<FieldElement> {
        self.iter().map(|g| g.a).collect()
    }

    /// `{x·y : x ∈ self, y ∈ other}`.
    pub fn product(&self, other: &AffSet) -> AffSet {
        let group = self.group();
        let mut seen = vec![false; group.order() + self.spec.q() as usize];
        for x in self.iter() {
            for y in other.iter() {
                seen[group.index(group.mul(x, y))] = true;
            }
        }
        let elems = seen
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| group.element_at(i))
            .collect();
        AffSet {
            spec: self.spec.clone(),
            elems,
        }
    }
}

/// Sizes `|A^1|, …, |A^k|` computed by repeated right multiplication.
pub fn power_sizes(a: &AffSet, k: u32) -> Result<Vec<usize>, AffError> {
    let mut sizes = Vec::with_capacity(k as usize);
    let mut cur = a.clone();
    sizes.push(cur.len());
    for _ in 1..k {
        cur = cur.product(a);
        sizes.push(cur.len());
    }
    Ok(sizes)
}

/// `A^k`, all products of exactly `k` elements of `A`.
pub fn product_power(a: &AffSet, k: u32) -> Result<AffSet, AffError> {
    if a.is_empty() {
        return Err(AffError::EmptySet);
    }
    if k == 0 {
        return Err(AffError::BadExponent(k));
    }
    let mut cur = a.clone();
    for _ in 1..k {
        cur = cur.product(a);
    }
    Ok(cur)
}

fn require_symmetric(a: &AffSet) -> Result<(), AffError> {
    if a.is_empty() {
        return Err(AffError::EmptySet);
    }
    if !a.is_symmetric() {
        return Err(AffError::NotSymmetric);
    }
    Ok(())
}

/// `C = |A³|/|A|` for a nonempty symmetric set.
pub fn tripling_constant(a: &AffSet) -> Result<Ratio<u64>, AffError> {
    require_symmetric(a)?;
    let cube = product_power(a, 3)?;
    Ok(Ratio::new(cube.len() as u64, a.len() as u64))
}

/// `φ_g(A) = {h·g·h⁻¹ : h ∈ A}`.
pub fn conjugation_image(a: &AffSet, g: AffElement) -> Result<AffSet, AffError> {
    if g.is_identity() {
        return Err(AffError::IdentityElement);
    }
    let group = a.group();
    Ok(AffSet::new(
        a.spec(),
        a.iter().map(|h| group.conjugate(h, g)),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiBound {
    /// `|π(A)|`.
    pub pi: usize,
    /// `|A^{k+3}|`.
    pub power_size: usize,
    /// `|φ_g(A)|`.
    pub image_size: usize,
    pub holds: bool,
}

/// `|π(A)| ≤ |A^{k+3}| / |φ_g(A)|` for symmetric `A` and `g ∈ A^k \ {Id}`.
pub fn pi_bound_check(a: &AffSet, g: AffElement, k: u32) -> Result<PiBound, AffError> {
    require_symmetric(a)?;
    if k == 0 {
        return Err(AffError::BadExponent(k));
    }
    if g.is_identity() {
        return Err(AffError::IdentityElement);
    }
    if !product_power(a, k)?.contains(g) {
        return Err(AffError::MembershipViolation { k });
    }
    let pi = a.projection_pi().len();
    let power_size = product_power(a, k + 3)?.len();
    let image_size = conjugation_image(a, g)?.len();
    Ok(PiBound {
        pi,
        power_size,
        image_size,
        holds: pi * image_size <= power_size,
    })
}

/// Exhaustive check of the fibre description of `φ_g` over the whole group:
/// for every `g ≠ Id` and all `h, h′`, `φ_g(h) = φ_g(h′)` exactly when
/// `h = h′` or the secant through `h` and `h′` has slope `b/(a − 1)`.
/// Returns the first offending triple, if any.
pub fn fiber_statement_counterexample(
    spec: &FieldSpec,
) -> Option<(AffElement, AffElement, AffElement)> {
    let group = AffineGroup::new(spec);
    let all: Vec<_> = group.elements().collect();
    for &g in &all {
        if g.is_identity() {
            continue;
        }
        let slope = group.fiber_slope(g).expect("g is not the identity");
        let images: Vec<_> = all.iter().map(|&h| group.conjugate(h, g)).collect();
        for (i, &h) in all.iter().enumerate() {
            for (j, &h2) in all.iter().enumerate().skip(i + 1) {
                let same_image = images[i] == images[j];
                let on_fibre = secant_slope(spec, h.as_point(), h2.as_point()) == slope;
                if same_image != on_fibre {
                    return Some((g, h, h2));
                }
            }
        }
    }
    None
}

/// `(φ_g(A)g⁻¹)(φ_g(A)g⁻¹)⁻¹ ⊆ A·g·A·A·g⁻¹·A`.
pub fn commutator_containment(a: &AffSet, g: AffElement) -> Result<bool, AffError> {
    let group = a.group();
    let gi = group.inv(g);
    let single = |x: AffElement| AffSet::new(a.spec(), [x]);
    let shifted = conjugation_image(a, g)?.product(&single(gi));
    let lhs = shifted.product(&shifted.inverse());
    let rhs = a
        .product(&single(g))
        .product(a)
        .product(a)
        .product(&single(gi))
        .product(a);
    Ok(lhs.is_subset(&rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `|A| ≤ q`.
    Small,
    /// `q < |A| < (3 + 2√2)q`.
    Medium,
    /// `|A| ≥ (3 + 2√2)q`.
    Large,
}

/// `⌈√n⌉`.
pub fn isqrt_ceil(n: u64) -> u64 {
    let s = n.sqrt();
    if s * s < n {
        s + 1
    } else {
        s
    }
}

/// `⌈(3 + 2√2)q⌉ = 3q + ⌈√(8q²)⌉`.
pub fn large_threshold(q: u64) -> u64 {
    3 * q + isqrt_ceil(8 * q * q)
}

pub fn regime(size: usize, q: u32) -> Regime {
    let (size, q) = (size as u64, q as u64);
    if size <= q {
        Regime::Small
    } else if size < large_threshold(q) {
        Regime::Medium
    } else {
        Regime::Large
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseA {
    /// Smallest `x` with `A ⊆ Stab(x)`.
    pub x: FieldElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseB {
    pub pi: usize,
    pub bound: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseC {
    pub pi: usize,
    pub bound: String,
    pub holds: bool,
    pub u_covered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationReport {
    pub q: u32,
    pub size: usize,
    pub regime: Regime,
    /// `|A³|/|A|`, reduced.
    pub tripling: Ratio<u64>,
    pub pi: usize,
    /// Present when the case holds.
    pub case_a: Option<CaseA>,
    /// Present in the small and medium regimes.
    pub case_b: Option<CaseB>,
    /// Present in the large regime.
    pub case_c: Option<CaseC>,
    pub disjunction_holds: bool,
}

fn big(n: impl Into<BigInt>) -> BigInt {
    n.into()
}

fn ratio_string(num: &BigInt, den: &BigInt) -> String {
    let r = Ratio::new(num.clone(), den.clone());
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Structural classification of a symmetric set with `|A| > 1`: reports
/// every one of the three alternatives that holds.
pub fn classify(a: &AffSet) -> Result<ClassificationReport, AffError> {
    require_symmetric(a)?;
    if a.len() <= 1 {
        return Err(AffError::TooSmall(a.len()));
    }
    let spec = a.spec();
    let group = a.group();
    let q = spec.q();
    let size = a.len();
    let cube = product_power(a, 3)?.len();
    let tripling = Ratio::new(cube as u64, size as u64);
    let pi = a.projection_pi().len();
    let regime = regime(size, q);

    let case_a = spec
        .elements()
        .find(|&x| a.iter().all(|g| group.act(g, x) == x))
        .map(|x| CaseA { x });

    // C = N/M with N = |A³|, M = |A|.
    let (n, m) = (big(cube as u64), big(size as u64));
    let (pi_b, q_b) = (big(pi as u64), big(q));
    let n4 = n.pow(4);
    let m4 = m.pow(4);

    let mut case_b = None;
    let mut case_c = None;
    match regime {
        Regime::Small => {
            let coef = big(spec.p()).pow(spec.e() / 2) + 2;
            // π < coef·N⁴/M⁴
            let holds = &pi_b * &m4 < &coef * &n4;
            case_b = Some(CaseB {
                pi,
                bound: ratio_string(&(&coef * &n4), &m4),
                holds,
            });
        }
        Regime::Medium => {
            // π < (4 + 2√2)·N⁴/M⁴  ⇔  π·M⁴ − 4N⁴ < 2√2·N⁴
            let lhs = &pi_b * &m4 - big(4) * &n4;
            let holds = lhs < big(0) || &lhs * &lhs < big(8) * &n4 * &n4;
            case_b = Some(CaseB {
                pi,
                bound: format!("(4+2*sqrt(2))*{}", ratio_string(&n4, &m4)),
                holds,
            });
        }
        Regime::Large => {
            // π < (2/q)·C³·|A| = 2N³/(q·M²)
            let n3 = n.pow(3);
            let holds = &pi_b * &q_b * &m * &m < big(2) * &n3;
            let u_covered = group.unipotent().is_subset(&product_power(a, 8)?);
            case_c = Some(CaseC {
                pi,
                bound: ratio_string(&(big(2) * &n3), &(&q_b * &m * &m)),
                holds,
                u_covered,
            });
        }
    }

    let disjunction_holds = case_a.is_some()
        || case_b.as_ref().is_some_and(|c| c.holds)
        || case_c.as_ref().is_some_and(|c| c.holds && c.u_covered);

    Ok(ClassificationReport {
        q,
        size,
        regime,
        tripling,
        pi,
        case_a,
        case_b,
        case_c,
        disjunction_holds,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn symmetric(q: u64, gens: &[(u64, u64)], identity: bool) -> AffSet {
        let f = FieldSpec::from_order(q).unwrap();
        let g = AffineGroup::new(&f);
        let mut elems: Vec<_> = gens
            .iter()
            .map(|&(a, b)| g.element(1 + a % (q - 1), b % q).unwrap())
            .flat_map(|x| [x, g.inv(x)])
            .collect();
        if identity {
            elems.push(AffElement::identity());
        }
        AffSet::new(&f, elems)
    }

    proptest! {
        #[test]
        fn classification_disjunction(
            q in prop::sample::select(vec![4u64, 5, 7, 8, 9]),
            gens in prop::collection::vec((0u64..100, 0u64..100), 1..40),
            identity in any::<bool>(),
        ) {
            let a = symmetric(q, &gens, identity);
            prop_assume!(a.len() > 1);
            prop_assert!(classify(&a).unwrap().disjunction_holds);
        }

        #[test]
        fn pi_bound_on_random_sets(
            gens in prop::collection::vec((0u64..100, 0u64..100), 1..6),
            pick in any::<prop::sample::Index>(),
            k in 1u32..=2,
        ) {
            let a = symmetric(7, &gens, false);
            let power: Vec<_> = product_power(&a, k).unwrap().iter().filter(|g| !g.is_identity()).collect();
            prop_assume!(!power.is_empty());
            let g = *pick.get(&power);
            prop_assert!(pi_bound_check(&a, g, k).unwrap().holds);
        }

        #[test]
        fn square_elements_satisfy_the_commutator_containment(
            gens in prop::collection::vec((0u64..100, 0u64..100), 1..5),
            pick in any::<prop::sample::Index>(),
        ) {
            let a = symmetric(9, &gens, true);
            let sq: Vec<_> = product_power(&a, 2).unwrap().iter().filter(|g| !g.is_identity()).collect();
            prop_assume!(!sq.is_empty());
            let g = *pick.get(&sq);
            prop_assert!(commutator_containment(&a, g).unwrap());
        }

        #[test]
        fn conjugates_keep_the_scale(
            gens in prop::collection::vec((0u64..100, 0u64..100), 1..6),
            ga in 1u64..5, gb in 0u64..5,
        ) {
            let a = symmetric(5, &gens, false);
            let group = a.group();
            let g = group.element(ga, gb).unwrap();
            prop_assume!(!g.is_identity());
            for h in conjugation_image(&a, g).unwrap().iter() {
                prop_assert_eq!(h.a(), g.a());
            }
        }
    }
}
