//! Exact arithmetic in the finite field F_{p^e}.
//!
//! A field is built from `(p, e)` with a canonical modulus: the monic
//! irreducible polynomial of degree `e` over F_p whose non-leading
//! coefficient vector has the smallest integer code `Σ c_i p^i`. Elements are
//! encoded as integers in `[0, q)` whose base-`p` digits are the coordinates
//! in the basis `1, t, …, t^{e-1}`, so encodings are reproducible everywhere.
//!
//! Multiplication goes through discrete log tables; for `q ≤ 256` full
//! addition and multiplication tables are materialized as well.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on `q` accepted by [`FieldSpec::new`].
pub const DEFAULT_MAX_ORDER: u64 = 1 << 16;

const FULL_TABLE_LIMIT: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds the configured cap {cap}")]
    SizeLimit { p: u64, e: u32, cap: u64 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("the zero element has no inverse")]
    ZeroInverse,
    #[error("element code {code} out of range for q = {q}")]
    CodeOutOfRange { code: u64, q: u32 },
    #[error(
        "modulus code {found} is not the canonical modulus code {expected} for p = {p}, e = {e}"
    )]
    NonCanonicalModulus {
        p: u32,
        e: u32,
        expected: u64,
        found: u64,
    },
}

/// An element of a finite field, stored as its integer code.
///
/// The code alone does not identify the field; operations live on
/// [`FieldSpec`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a code without range checking; callers guarantee `code < q`.
    #[inline]
    pub(crate) fn from_code_unchecked(code: u32) -> Self {
        FieldElement(code)
    }

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus over F_p, constant term first, length `e + 1`.
    modulus: Vec<u32>,
    modulus_code: u64,
    /// `exp[i] = g^i` for `i < 2(q-1)`, `g` a fixed primitive element.
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
}

/// Immutable description of F_{p^e}; cheap to clone and safe to share.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Tables>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.e == other.inner.e
                && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.inner.p)
            .field("e", &self.inner.e)
            .field("q", &self.inner.q)
            .field("modulus", &self.inner.modulus)
            .finish()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^e` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

// Polynomials over F_p as coefficient vectors (constant first), used only
// while building the field.

fn fp_trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn fp_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = fp_trim(num.to_vec());
    let den = fp_trim(den.to_vec());
    let dd = den.len() - 1;
    let lead_inv = fp_pow(den[dd], p - 2, p);
    while r.len() > dd {
        let top = r.len() - 1;
        let c = (r[top] as u64 * lead_inv as u64 % p as u64) as u32;
        let shift = top - dd;
        for (i, &d) in den.iter().enumerate() {
            let sub = (c as u64 * d as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = fp_trim(r);
    }
    r
}

fn fp_pow(base: u32, mut exp: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        exp >>= 1;
    }
    acc as u32
}

fn digits(code: u64, p: u32, len: usize) -> Vec<u32> {
    let mut c = code;
    (0..len)
        .map(|_| {
            let d = (c % p as u64) as u32;
            c /= p as u64;
            d
        })
        .collect()
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    // Trial division by every monic polynomial of degree 1..=deg/2.
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut divisor = digits(code, p, d);
            divisor.push(1);
            if fp_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn canonical_modulus(p: u32, e: u32) -> (Vec<u32>, u64) {
    if e == 1 {
        return (vec![0, 1], 0);
    }
    let count = (p as u64).pow(e);
    for code in 0..count {
        let mut poly = digits(code, p, e as usize);
        poly.push(1);
        if is_irreducible(&poly, p) {
            return (poly, code);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn slow_mul(a: u32, b: u32, p: u32, modulus: &[u32]) -> u32 {
    let e = modulus.len() - 1;
    let da = digits(a as u64, p, e);
    let db = digits(b as u64, p, e);
    let mut prod = vec![0u32; 2 * e];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let r = fp_rem(&prod, modulus, p);
    pack(&r, p)
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

fn digit_add(a: u32, b: u32, p: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let (mut a, mut b) = (a, b);
    let mut out = 0u32;
    let mut place = 1u32;
    while a > 0 || b > 0 {
        let d = (a % p + b % p) % p;
        out += d * place;
        place *= p;
        a /= p;
        b /= p;
    }
    out
}

fn digit_neg(a: u32, p: u32) -> u32 {
    let mut a = a;
    let mut out = 0u32;
    let mut place = 1u32;
    while a > 0 {
        let d = (p - a % p) % p;
        out += d * place;
        place *= p;
        a /= p;
    }
    out
}

impl FieldSpec {
    /// Canonical F_{p^e} with the default size cap.
    pub fn new(p: u64, e: u32) -> Result<Self, FieldError> {
        Self::with_cap(p, e, DEFAULT_MAX_ORDER)
    }

    pub fn with_cap(p: u64, e: u32, cap: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrimeCharacteristic(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = p
            .checked_pow(e)
            .filter(|&q| q <= cap && q <= u32::MAX as u64)
            .ok_or(FieldError::SizeLimit { p, e, cap })?;
        Ok(Self::build(p as u32, e, q as u32))
    }

    /// Canonical field of order `q`, which must be a prime power.
    pub fn from_order(q: u64) -> Result<Self, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Self::new(p, e)
    }

    /// Rebuilds a field from its `p e modulus-code` descriptor, insisting the
    /// modulus is the canonical one.
    pub fn from_descriptor(p: u64, e: u32, modulus_code: u64) -> Result<Self, FieldError> {
        let spec = Self::new(p, e)?;
        if spec.modulus_code() != modulus_code {
            return Err(FieldError::NonCanonicalModulus {
                p: spec.p(),
                e,
                expected: spec.modulus_code(),
                found: modulus_code,
            });
        }
        Ok(spec)
    }

    fn build(p: u32, e: u32, q: u32) -> Self {
        let (modulus, modulus_code) = canonical_modulus(p, e);

        let mul_slow = |a: u32, b: u32| -> u32 {
            if e == 1 {
                ((a as u64 * b as u64) % p as u64) as u32
            } else {
                slow_mul(a, b, p, &modulus)
            }
        };

        // Find a primitive element by walking powers until the cycle closes.
        let order = q - 1;
        let mut exp = Vec::with_capacity(2 * order as usize);
        let mut log = vec![0u32; q as usize];
        if q == 2 {
            exp = vec![1, 1];
        } else {
            for g in 2..q {
                let mut powers = Vec::with_capacity(order as usize);
                let mut x = 1u32;
                loop {
                    powers.push(x);
                    x = mul_slow(x, g);
                    if x == 1 || powers.len() > order as usize {
                        break;
                    }
                }
                if powers.len() == order as usize {
                    exp = powers.clone();
                    exp.extend_from_slice(&powers);
                    break;
                }
            }
        }
        for (i, &v) in exp.iter().take(order as usize).enumerate() {
            log[v as usize] = i as u32;
        }

        let neg: Vec<u32> = (0..q).map(|a| digit_neg(a, p)).collect();
        let inv: Vec<u32> = (0..q)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    exp[((order - log[a as usize]) % order) as usize]
                }
            })
            .collect();

        let (add_table, mul_table) = if q <= FULL_TABLE_LIMIT {
            let n = q as usize;
            let mut add = vec![0u32; n * n];
            let mut mul = vec![0u32; n * n];
            for a in 0..q {
                for b in 0..q {
                    let idx = a as usize * n + b as usize;
                    add[idx] = digit_add(a, b, p);
                    mul[idx] = if a == 0 || b == 0 {
                        0
                    } else {
                        exp[(log[a as usize] + log[b as usize]) as usize]
                    };
                }
            }
            (Some(add), Some(mul))
        } else {
            (None, None)
        };

        FieldSpec {
            inner: Arc::new(Tables {
                p,
                e,
                q,
                modulus,
                modulus_code,
                exp,
                log,
                neg,
                inv,
                add_table,
                mul_table,
            }),
        }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.inner.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.inner.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.inner.q
    }

    /// Modulus coefficients over F_p, constant term first (monic, length e+1).
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    pub fn modulus_code(&self) -> u64 {
        self.inner.modulus_code
    }

    /// `"p e modulus-code"`.
    pub fn descriptor(&self) -> String {
        format!("{} {} {}", self.p(), self.e(), self.modulus_code())
    }

    /// Human form of the modulus, e.g. `x^2+1`.
    pub fn modulus_string(&self) -> String {
        let mut terms = Vec::new();
        for (i, &c) in self.inner.modulus.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let term = match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            };
            terms.push(term);
        }
        terms.join("+")
    }

    /// Validates an integer code.
    pub fn element(&self, code: u64) -> Result<FieldElement, FieldError> {
        if code < self.q() as u64 {
            Ok(FieldElement(code as u32))
        } else {
            Err(FieldError::CodeOutOfRange { code, q: self.q() })
        }
    }

    /// Embeds an integer of F_p (the prime subfield) reduced mod p.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p() as i64) as u32)
    }

    /// All `q` elements in ascending code order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q()).map(FieldElement)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.q()).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.inner.add_table {
            Some(t) => FieldElement(t[a.0 as usize * self.inner.q as usize + b.0 as usize]),
            None => FieldElement(digit_add(a.0, b.0, self.inner.p)),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.inner.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if let Some(t) = &self.inner.mul_table {
            return FieldElement(t[a.0 as usize * self.inner.q as usize + b.0 as usize]);
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let t = &self.inner;
        FieldElement(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            Err(FieldError::ZeroInverse)
        } else {
            Ok(FieldElement(self.inner.inv[a.0 as usize]))
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^k` by square-and-multiply; `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, mut k: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut base = a;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// `a^{p^l}`, the `l`-th power of the Frobenius automorphism.
    pub fn frobenius(&self, a: FieldElement, l: u32) -> FieldElement {
        let l = l % self.e();
        let mut x = a;
        for _ in 0..l {
            x = self.pow(x, self.p() as u64);
        }
        x
    }

    /// Inverse of `frobenius(·, l)`: the unique `b` with `b^{p^l} = a`.
    pub fn frobenius_inv(&self, a: FieldElement, l: u32) -> FieldElement {
        let e = self.e();
        self.frobenius(a, (e - l % e) % e)
    }

    /// The fixed generator of F_q^* behind the log tables.
    pub fn primitive_element(&self) -> FieldElement {
        FieldElement(self.inner.exp[1 % self.inner.exp.len()])
    }
}
