//! Dense univariate polynomials over F_q.
//!
//! Coefficients are stored constant term first with no trailing zeros; the
//! zero polynomial is the empty vector and has degree `None` (−∞).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::ff::{FieldElement, FieldError, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomials are defined over different fields")]
    SpecMismatch,
    #[error("division by the zero polynomial")]
    DivisionByZeroPoly,
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial is not monic")]
    NonMonic,
    #[error("cannot parse coefficient {0:?}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    spec: FieldSpec,
    coeffs: Vec<FieldElement>,
}

/// Root multiplicities of a polynomial over F_q; absent roots have
/// multiplicity zero.
pub type RootMultiset = BTreeMap<FieldElement, u32>;

/// Split of a monic polynomial into its fully reducible part and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSplit {
    /// Product of `(x - r)^{mult(r)}` over all roots `r` in F_q.
    pub fully_reducible: Polynomial,
    /// The cofactor, which has no root in F_q.
    pub nonlinear: Polynomial,
    /// p-adic valuation of the gcd of root multiplicities; `None` when the
    /// polynomial has no roots at all.
    pub l1: Option<u32>,
}

impl Polynomial {
    pub fn new(spec: &FieldSpec, coeffs: Vec<FieldElement>) -> Self {
        let mut p = Polynomial {
            spec: spec.clone(),
            coeffs,
        };
        p.normalize();
        p
    }

    /// Builds from raw codes, validating each one.
    pub fn from_codes(spec: &FieldSpec, codes: &[u64]) -> Result<Self, PolyError> {
        let coeffs = codes
            .iter()
            .map(|&c| spec.element(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(spec, coeffs))
    }

    pub fn zero(spec: &FieldSpec) -> Self {
        Self::new(spec, Vec::new())
    }

    pub fn one(spec: &FieldSpec) -> Self {
        Self::constant(spec, FieldElement::ONE)
    }

    pub fn constant(spec: &FieldSpec, c: FieldElement) -> Self {
        Self::new(spec, vec![c])
    }

    /// `c·x^k`.
    pub fn monomial(spec: &FieldSpec, c: FieldElement, k: usize) -> Self {
        let mut coeffs = vec![FieldElement::ZERO; k + 1];
        coeffs[k] = c;
        Self::new(spec, coeffs)
    }

    pub fn x(spec: &FieldSpec) -> Self {
        Self::monomial(spec, FieldElement::ONE, 1)
    }

    /// The monic linear polynomial `x - r`.
    pub fn linear(spec: &FieldSpec, r: FieldElement) -> Self {
        Self::new(spec, vec![spec.neg(r), FieldElement::ONE])
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> FieldElement {
        self.coeffs.get(k).copied().unwrap_or(FieldElement::ZERO)
    }

    /// Degree, with `None` standing for the zero polynomial's −∞.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(FieldElement::ONE)
    }

    fn check_spec(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(PolyError::SpecMismatch)
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_spec(other)?;
        let f = &self.spec;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| f.add(self.coeff(i), other.coeff(i)))
            .collect();
        Ok(Polynomial::new(f, coeffs))
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_spec(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Polynomial::zero(&self.spec));
        }
        let f = &self.spec;
        let mut out = vec![FieldElement::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Ok(Polynomial::new(f, out))
    }

    pub fn scale(&self, c: FieldElement) -> Polynomial {
        let f = &self.spec;
        Polynomial::new(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Formal derivative; `d/dx x^k = k·x^{k-1}` with `k` read mod p.
    pub fn derivative(&self) -> Polynomial {
        let f = &self.spec;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| f.mul(f.from_int((k as u64 % f.p() as u64) as i64), c))
            .collect();
        Polynomial::new(f, coeffs)
    }

    pub fn eval(&self, x: FieldElement) -> FieldElement {
        let f = &self.spec;
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn pow(&self, mut k: u64) -> Polynomial {
        let mut acc = Polynomial::one(&self.spec);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Euclidean division: `self = den·Q + R` with `deg R < deg den`.
    pub fn quotient_rem(&self, den: &Polynomial) -> Result<(Polynomial, Polynomial), PolyError> {
        self.check_spec(den)?;
        let lead = den.leading().ok_or(PolyError::DivisionByZeroPoly)?;
        let f = &self.spec;
        let lead_inv = f.inv(lead)?;
        let dd = den.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Polynomial::zero(f), self.clone()));
        }
        let mut quot = vec![FieldElement::ZERO; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = f.mul(rem[top], lead_inv);
            if c.is_zero() {
                continue;
            }
            let shift = top - dd;
            quot[shift] = c;
            for (i, &d) in den.coeffs.iter().enumerate() {
                rem[shift + i] = f.sub(rem[shift + i], f.mul(c, d));
            }
        }
        rem.truncate(dd);
        Ok((Polynomial::new(f, quot), Polynomial::new(f, rem)))
    }

    /// Quotient when `den` divides `self` exactly, `None` otherwise.
    pub fn exact_div(&self, den: &Polynomial) -> Result<Option<Polynomial>, PolyError> {
        let (q, r) = self.quotient_rem(den)?;
        Ok(r.is_zero().then_some(q))
    }

    /// Divides by the monic linear factor `x - r` (synthetic division),
    /// returning the quotient and the remainder `self(r)`.
    pub fn div_linear(&self, r: FieldElement) -> (Polynomial, FieldElement) {
        let f = &self.spec;
        if self.coeffs.is_empty() {
            return (self.clone(), FieldElement::ZERO);
        }
        let n = self.coeffs.len();
        let mut quot = vec![FieldElement::ZERO; n - 1];
        let mut carry = FieldElement::ZERO;
        for k in (0..n).rev() {
            let v = f.add(self.coeffs[k], f.mul(carry, r));
            if k == 0 {
                return (Polynomial::new(f, quot), v);
            }
            quot[k - 1] = v;
            carry = v;
        }
        unreachable!()
    }

    /// For every `r ∈ F_q`, the largest `m` with `(x - r)^m | self`.
    pub fn roots_with_multiplicity(&self) -> Result<RootMultiset, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut roots = RootMultiset::new();
        for r in self.spec.elements() {
            let mut cur = self.clone();
            let mut m = 0u32;
            loop {
                if cur.is_constant() {
                    break;
                }
                let (quot, rem) = cur.div_linear(r);
                if !rem.is_zero() {
                    break;
                }
                m += 1;
                cur = quot;
            }
            if m > 0 {
                roots.insert(r, m);
            }
        }
        Ok(roots)
    }

    /// Number of distinct roots in F_q.
    pub fn distinct_roots(&self) -> usize {
        self.spec
            .elements()
            .filter(|&r| self.eval(r).is_zero())
            .count()
    }

    /// Splits a monic polynomial into fully reducible and rootless parts.
    pub fn linear_split(&self) -> Result<LinearSplit, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if !self.is_monic() {
            return Err(PolyError::NonMonic);
        }
        let f = &self.spec;
        let roots = self.roots_with_multiplicity()?;
        let mut nonlinear = self.clone();
        let mut fully_reducible = Polynomial::one(f);
        for (&r, &m) in &roots {
            let lin = Polynomial::linear(f, r);
            for _ in 0..m {
                let (quot, rem) = nonlinear.div_linear(r);
                debug_assert!(rem.is_zero());
                nonlinear = quot;
            }
            fully_reducible = &fully_reducible * &lin.pow(m as u64);
        }
        let l1 = roots.values().fold(0u32, |g, &m| num_integer::gcd(g, m));
        let l1 = (l1 > 0).then(|| p_valuation(l1 as u64, f.p() as u64));
        Ok(LinearSplit {
            fully_reducible,
            nonlinear,
            l1,
        })
    }

    /// Largest `l` with `self ∈ F_q[x^{p^l}]`, together with the `p^l`-th
    /// root `g̃` satisfying `g̃^{p^l} = self`.
    ///
    /// A nonzero constant lies in every `F_q[x^{p^l}]`; it is reported with
    /// `l = 0` and itself as the root.
    pub fn pth_content(&self) -> Result<(u32, Polynomial), PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let f = &self.spec;
        if self.is_constant() {
            return Ok((0, self.clone()));
        }
        let p = f.p() as u64;
        let exps_gcd = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(0u64, |g, (k, _)| num_integer::gcd(g, k as u64));
        let l = p_valuation(exps_gcd, p);
        let step = p.pow(l) as usize;
        let coeffs = self
            .coeffs
            .iter()
            .step_by(step)
            .map(|&c| f.frobenius_inv(c, l))
            .collect();
        Ok((l, Polynomial::new(f, coeffs)))
    }

    /// Space-separated coefficient codes, constant first (`"0 2 1"`).
    pub fn to_code_string(&self) -> String {
        self.coeffs
            .iter()
            .map(|c| c.code().to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_codes(spec: &FieldSpec, s: &str) -> Result<Self, PolyError> {
        let codes = s
            .split_whitespace()
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| PolyError::Parse(t.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_codes(spec, &codes)
    }
}

/// Exponent of the largest power of `p` dividing `n` (`n > 0`).
pub fn p_valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n > 0);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// `(σ_0, …, σ_n)` of the given values, so that
/// `Π (x - v_i) = Σ_j (-1)^j σ_j x^{n-j}`.
pub fn elementary_symmetric(
    spec: &FieldSpec,
    values: &[FieldElement],
) -> Result<Vec<FieldElement>, PolyError> {
    for v in values {
        spec.element(v.code() as u64)?;
    }
    let mut sigma = vec![FieldElement::ONE];
    for &v in values {
        sigma.push(FieldElement::ZERO);
        for j in (1..sigma.len()).rev() {
            sigma[j] = spec.add(sigma[j], spec.mul(v, sigma[j - 1]));
        }
    }
    Ok(sigma)
}

/// `Π (x - r)` over the given roots (with repetition).
pub fn from_roots(spec: &FieldSpec, roots: &[FieldElement]) -> Polynomial {
    let mut coeffs = vec![FieldElement::ONE];
    for &r in roots {
        // multiply by (x - r)
        coeffs.push(FieldElement::ZERO);
        for j in (0..coeffs.len()).rev() {
            let shifted = if j > 0 {
                coeffs[j - 1]
            } else {
                FieldElement::ZERO
            };
            coeffs[j] = spec.sub(shifted, spec.mul(r, coeffs[j]));
        }
    }
    Polynomial::new(spec, coeffs)
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[q={}]({})", self.spec.q(), self)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (c.code(), k) {
                (_, 0) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "x^{k}")?,
                (_, 1) => write!(f, "{c}x")?,
                _ => write!(f, "{c}x^{k}")?,
            }
        }
        Ok(())
    }
}

// Operator forms panic on mismatched fields; use the `try_*` methods when the
// operands come from untrusted sources.

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs)
            .expect("polynomials over different fields")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs)
            .expect("polynomials over different fields")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs)
            .expect("polynomials over different fields")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        let f = &self.spec;
        Polynomial::new(f, self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }
}
