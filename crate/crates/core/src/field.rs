//! Exact scalar arithmetic over ℚ, prime fields, small extension fields and
//! dual numbers.
//!
//! The field is a runtime value ([`FieldContext`]) so that a single binary can
//! work over ℚ or 𝔽_p. Every [`FieldElement`] knows which field it lives in;
//! combining elements from different fields is an error.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by a non-invertible element")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    MixedContexts,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid field: {0}")]
    InvalidField(String),
}

/// 𝔽_{p^k} presented as 𝔽_p[t] / (modulus).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtensionField {
    p: u64,
    k: usize,
    /// Monic modulus, coefficients from t^0 up to t^k.
    modulus: Vec<u64>,
}

impl ExtensionField {
    /// Builds 𝔽_{p^k} using the smallest irreducible monic modulus, where
    /// candidates `t^k + c_{k-1} t^{k-1} + … + c_0` are ordered
    /// lexicographically by `(c_{k-1}, …, c_0)`.
    pub fn new(p: u64, k: usize) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k < 2 {
            return Err(FieldError::InvalidField(format!(
                "extension degree must be at least 2, got {k}"
            )));
        }
        let total = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        let mut index: u128 = 0;
        while index < total {
            // Most significant digit is c_{k-1}.
            let mut digits = vec![0u64; k];
            let mut rest = index;
            for digit in digits.iter_mut() {
                *digit = (rest % p as u128) as u64;
                rest /= p as u128;
            }
            // digits[0] is least significant = c_0.
            let mut modulus = digits;
            modulus.push(1);
            if modulus[0] != 0 && is_irreducible(&modulus, p) {
                return Ok(ExtensionField { p, k, modulus });
            }
            index += 1;
        }
        Err(FieldError::InvalidField(format!(
            "no irreducible polynomial of degree {k} over F_{p}"
        )))
    }

    /// Builds 𝔽_{p^k} from an explicit monic modulus (low to high), checking
    /// irreducibility.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let k = modulus.len().saturating_sub(1);
        if k < 2 || *modulus.last().unwrap() != 1 || !is_irreducible(&modulus, p) {
            return Err(FieldError::InvalidField(
                "modulus must be monic, irreducible and of degree >= 2".into(),
            ));
        }
        Ok(ExtensionField { p, k, modulus })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    fn reduce(&self, mut c: Vec<u64>) -> Vec<u64> {
        let p = self.p;
        let k = self.k;
        while c.len() > k {
            let lead = c.pop().unwrap();
            if lead == 0 {
                continue;
            }
            let shift = c.len() - k;
            for i in 0..k {
                let sub = mulmod(lead, self.modulus[i], p);
                c[shift + i] = submod(c[shift + i], sub, p);
            }
        }
        c.resize(k, 0);
        c
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = addmod(out[i + j], mulmod(ai, bj, p), p);
            }
        }
        self.reduce(out)
    }

    fn inv(&self, a: &[u64]) -> Option<Vec<u64>> {
        // Extended Euclid in 𝔽_p[t].
        let p = self.p;
        let mut r0 = trim(self.modulus.clone());
        let mut r1 = trim(a.to_vec());
        if r1.is_empty() {
            return None;
        }
        let mut s0: Vec<u64> = vec![];
        let mut s1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1, p);
            let qs1 = poly_mul(&q, &s1, p);
            let s2 = poly_sub(&s0, &qs1, p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        // r0 is a nonzero constant since the modulus is irreducible.
        if r0.len() != 1 {
            return None;
        }
        let c = invmod(r0[0], p)?;
        let inv: Vec<u64> = s0.iter().map(|&v| mulmod(v, c, p)).collect();
        Some(self.reduce(inv))
    }
}

/// The field (or dual-number ring) that elements live in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldContext {
    Rationals,
    Prime(u64),
    Extension(Arc<ExtensionField>),
    /// R[ε]/(ε²) over the wrapped base field.
    Dual(Arc<FieldContext>),
}

impl FieldContext {
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(FieldContext::Prime(p))
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn extension(p: u64, k: usize) -> Result<Self, FieldError> {
        Ok(FieldContext::Extension(Arc::new(ExtensionField::new(p, k)?)))
    }

    pub fn dual(base: FieldContext) -> Self {
        FieldContext::Dual(Arc::new(base))
    }

    /// Parses `Q`, `Fp` (with `prime`), `F<p>`, `Fp^k`/`F<p>^k`.
    pub fn from_spec(spec: &str, prime: Option<u64>) -> Result<Self, FieldError> {
        let s = spec.trim();
        if s == "Q" || s.eq_ignore_ascii_case("rationals") {
            return Ok(FieldContext::Rationals);
        }
        let body = s
            .strip_prefix("F")
            .ok_or_else(|| FieldError::InvalidField(s.to_string()))?;
        let (base, power) = match body.split_once('^') {
            Some((b, k)) => (
                b,
                k.parse::<usize>()
                    .map_err(|_| FieldError::InvalidField(s.to_string()))?,
            ),
            None => (body, 1),
        };
        let p = if base == "p" {
            prime.ok_or_else(|| FieldError::InvalidField("Fp needs a prime".into()))?
        } else {
            base.parse::<u64>()
                .map_err(|_| FieldError::InvalidField(s.to_string()))?
        };
        if power == 1 {
            FieldContext::prime(p)
        } else {
            FieldContext::extension(p, power)
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldContext::Rationals => 0,
            FieldContext::Prime(p) => *p,
            FieldContext::Extension(e) => e.p,
            FieldContext::Dual(b) => b.characteristic(),
        }
    }

    pub fn is_dual(&self) -> bool {
        matches!(self, FieldContext::Dual(_))
    }

    /// The underlying field of a dual context, or the context itself.
    pub fn base(&self) -> &FieldContext {
        match self {
            FieldContext::Dual(b) => b,
            other => other,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.from_i64(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        match self {
            FieldContext::Rationals => FieldElement::Rational(BigRational::from_integer(v.into())),
            FieldContext::Prime(p) => FieldElement::Prime {
                value: reduce_i128(v as i128, *p),
                modulus: *p,
            },
            FieldContext::Extension(e) => {
                let mut coeffs = vec![0u64; e.k];
                coeffs[0] = reduce_i128(v as i128, e.p);
                FieldElement::Extension {
                    coeffs,
                    field: e.clone(),
                }
            }
            FieldContext::Dual(b) => FieldElement::Dual(Box::new((b.from_i64(v), b.zero()))),
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> FieldElement {
        match self {
            FieldContext::Rationals => FieldElement::Rational(BigRational::from_integer(v.clone())),
            _ => {
                let p = self.characteristic();
                let r = v.mod_floor(&BigInt::from(p)).to_u64().unwrap();
                self.from_i64(0).add_base_u64(r)
            }
        }
    }

    /// Maps a rational into this field; fails when the denominator vanishes
    /// modulo the characteristic.
    pub fn from_rational(&self, v: &BigRational) -> Result<FieldElement, FieldError> {
        match self {
            FieldContext::Rationals => Ok(FieldElement::Rational(v.clone())),
            _ => {
                let n = self.from_bigint(v.numer());
                let d = self.from_bigint(v.denom());
                n.checked_div(&d)
            }
        }
    }

    /// The adjoined root `t` of an extension field.
    pub fn generator(&self) -> Option<FieldElement> {
        match self {
            FieldContext::Extension(e) => {
                let mut coeffs = vec![0u64; e.k];
                coeffs[1] = 1;
                Some(FieldElement::Extension {
                    coeffs,
                    field: e.clone(),
                })
            }
            _ => None,
        }
    }

    /// Element of 𝔽_{p^k} with the given coordinates in the power basis.
    pub fn extension_element(&self, coords: &[i64]) -> Result<FieldElement, FieldError> {
        match self {
            FieldContext::Extension(e) => {
                if coords.len() > e.k {
                    return Err(FieldError::InvalidField(
                        "too many extension coordinates".into(),
                    ));
                }
                let mut coeffs = vec![0u64; e.k];
                for (c, v) in coeffs.iter_mut().zip(coords) {
                    *c = reduce_i128(*v as i128, e.p);
                }
                Ok(FieldElement::Extension {
                    coeffs,
                    field: e.clone(),
                })
            }
            _ => Err(FieldError::InvalidField("not an extension field".into())),
        }
    }

    pub fn dual_element(&self, re: FieldElement, eps: FieldElement) -> Result<FieldElement, FieldError> {
        match self {
            FieldContext::Dual(b) => {
                if re.context() != **b || eps.context() != **b {
                    return Err(FieldError::MixedContexts);
                }
                Ok(FieldElement::Dual(Box::new((re, eps))))
            }
            _ => Err(FieldError::InvalidField("not a dual context".into())),
        }
    }

    /// Maps an element into this context: ℚ → 𝔽_p → 𝔽_{p^k}, and any base
    /// element into its dual ring.
    pub fn embed(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        let src = a.context();
        if &src == self {
            return Ok(a.clone());
        }
        match (self, a) {
            (FieldContext::Dual(b), _) if !src.is_dual() => {
                Ok(FieldElement::Dual(Box::new((b.embed(a)?, b.zero()))))
            }
            (FieldContext::Dual(b), FieldElement::Dual(pair)) => Ok(FieldElement::Dual(Box::new((
                b.embed(&pair.0)?,
                b.embed(&pair.1)?,
            )))),
            (_, FieldElement::Rational(r)) => self.from_rational(r),
            (FieldContext::Extension(e), FieldElement::Prime { value, modulus }) if *modulus == e.p => {
                let mut coeffs = vec![0u64; e.k];
                coeffs[0] = *value;
                Ok(FieldElement::Extension {
                    coeffs,
                    field: e.clone(),
                })
            }
            _ => Err(FieldError::MixedContexts),
        }
    }

    pub fn label(&self) -> String {
        match self {
            FieldContext::Rationals => "Q".into(),
            FieldContext::Prime(p) => format!("F{p}"),
            FieldContext::Extension(e) => format!("F{}^{}", e.p, e.k),
            FieldContext::Dual(b) => format!("{}[eps]", b.label()),
        }
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// An exact scalar. Rationals are kept in lowest terms with positive
/// denominator, residues in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Rational(BigRational),
    Prime { value: u64, modulus: u64 },
    Extension { coeffs: Vec<u64>, field: Arc<ExtensionField> },
    /// `a + bε`, stored as `(a, b)`.
    Dual(Box<(FieldElement, FieldElement)>),
}

impl FieldElement {
    pub fn rational(n: i64, d: i64) -> FieldElement {
        FieldElement::Rational(BigRational::new(n.into(), d.into()))
    }

    pub fn context(&self) -> FieldContext {
        match self {
            FieldElement::Rational(_) => FieldContext::Rationals,
            FieldElement::Prime { modulus, .. } => FieldContext::Prime(*modulus),
            FieldElement::Extension { field, .. } => FieldContext::Extension(field.clone()),
            FieldElement::Dual(pair) => FieldContext::Dual(Arc::new(pair.0.context())),
        }
    }

    pub fn same_context(&self, other: &FieldElement) -> bool {
        match (self, other) {
            (FieldElement::Rational(_), FieldElement::Rational(_)) => true,
            (FieldElement::Prime { modulus: a, .. }, FieldElement::Prime { modulus: b, .. }) => a == b,
            (FieldElement::Extension { field: a, .. }, FieldElement::Extension { field: b, .. }) => {
                Arc::ptr_eq(a, b) || a == b
            }
            (FieldElement::Dual(a), FieldElement::Dual(b)) => a.0.same_context(&b.0),
            _ => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Rational(r) => r.is_zero(),
            FieldElement::Prime { value, .. } => *value == 0,
            FieldElement::Extension { coeffs, .. } => coeffs.iter().all(|&c| c == 0),
            FieldElement::Dual(pair) => pair.0.is_zero() && pair.1.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElement::Rational(r) => r.is_one(),
            FieldElement::Prime { value, .. } => *value == 1,
            FieldElement::Extension { coeffs, .. } => {
                coeffs[0] == 1 && coeffs[1..].iter().all(|&c| c == 0)
            }
            FieldElement::Dual(pair) => pair.0.is_one() && pair.1.is_zero(),
        }
    }

    /// Units of the ring. For dual numbers this is "ε-free part nonzero".
    pub fn is_invertible(&self) -> bool {
        match self {
            FieldElement::Dual(pair) => pair.0.is_invertible(),
            other => !other.is_zero(),
        }
    }

    /// ε-free part of a dual number; identity on field elements.
    pub fn real_part(&self) -> &FieldElement {
        match self {
            FieldElement::Dual(pair) => &pair.0,
            other => other,
        }
    }

    /// ε-coefficient of a dual number; `None` on field elements.
    pub fn eps_part(&self) -> Option<&FieldElement> {
        match self {
            FieldElement::Dual(pair) => Some(&pair.1),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElement::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Integer representative for ℚ integers and prime-field residues.
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            FieldElement::Rational(r) if r.is_integer() => r.to_integer().to_i64(),
            FieldElement::Prime { value, .. } => i64::try_from(*value).ok(),
            _ => None,
        }
    }

    fn add_base_u64(self, v: u64) -> FieldElement {
        match self {
            FieldElement::Prime { value, modulus } => FieldElement::Prime {
                value: addmod(value, v % modulus, modulus),
                modulus,
            },
            FieldElement::Extension { mut coeffs, field } => {
                coeffs[0] = addmod(coeffs[0], v % field.p, field.p);
                FieldElement::Extension { coeffs, field }
            }
            FieldElement::Dual(pair) => {
                let (re, eps) = *pair;
                FieldElement::Dual(Box::new((re.add_base_u64(v), eps)))
            }
            FieldElement::Rational(r) => FieldElement::Rational(r + BigRational::from_integer(v.into())),
        }
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(match (self, other) {
            (FieldElement::Rational(a), FieldElement::Rational(b)) => FieldElement::Rational(a + b),
            (FieldElement::Prime { value: a, modulus: p }, FieldElement::Prime { value: b, modulus: q })
                if p == q =>
            {
                FieldElement::Prime {
                    value: addmod(*a, *b, *p),
                    modulus: *p,
                }
            }
            (FieldElement::Extension { coeffs: a, field }, FieldElement::Extension { coeffs: b, .. })
                if self.same_context(other) =>
            {
                FieldElement::Extension {
                    coeffs: a.iter().zip(b).map(|(x, y)| addmod(*x, *y, field.p)).collect(),
                    field: field.clone(),
                }
            }
            (FieldElement::Dual(a), FieldElement::Dual(b)) => FieldElement::Dual(Box::new((
                a.0.checked_add(&b.0)?,
                a.1.checked_add(&b.1)?,
            ))),
            _ => return Err(FieldError::MixedContexts),
        })
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(match (self, other) {
            (FieldElement::Rational(a), FieldElement::Rational(b)) => FieldElement::Rational(a * b),
            (FieldElement::Prime { value: a, modulus: p }, FieldElement::Prime { value: b, modulus: q })
                if p == q =>
            {
                FieldElement::Prime {
                    value: mulmod(*a, *b, *p),
                    modulus: *p,
                }
            }
            (FieldElement::Extension { coeffs: a, field }, FieldElement::Extension { coeffs: b, .. })
                if self.same_context(other) =>
            {
                FieldElement::Extension {
                    coeffs: field.mul(a, b),
                    field: field.clone(),
                }
            }
            (FieldElement::Dual(a), FieldElement::Dual(b)) => {
                // (a0 + a1 ε)(b0 + b1 ε) = a0 b0 + (a0 b1 + a1 b0) ε
                let re = a.0.checked_mul(&b.0)?;
                let eps = a.0.checked_mul(&b.1)?.checked_add(&a.1.checked_mul(&b.0)?)?;
                FieldElement::Dual(Box::new((re, eps)))
            }
            _ => return Err(FieldError::MixedContexts),
        })
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        match self {
            FieldElement::Rational(a) => {
                if a.is_zero() {
                    Err(FieldError::DivisionByZero)
                } else {
                    Ok(FieldElement::Rational(a.recip()))
                }
            }
            FieldElement::Prime { value, modulus } => invmod(*value, *modulus)
                .map(|v| FieldElement::Prime {
                    value: v,
                    modulus: *modulus,
                })
                .ok_or(FieldError::DivisionByZero),
            FieldElement::Extension { coeffs, field } => field
                .inv(coeffs)
                .map(|c| FieldElement::Extension {
                    coeffs: c,
                    field: field.clone(),
                })
                .ok_or(FieldError::DivisionByZero),
            FieldElement::Dual(pair) => {
                // (a + bε)⁻¹ = a⁻¹ − b a⁻² ε
                let ai = pair.0.inv()?;
                let eps = pair.1.checked_mul(&ai)?.checked_mul(&ai)?.neg_ref();
                Ok(FieldElement::Dual(Box::new((ai, eps))))
            }
        }
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        if !self.same_context(other) {
            return Err(FieldError::MixedContexts);
        }
        self.checked_mul(&other.inv()?)
    }

    fn neg_ref(&self) -> FieldElement {
        match self {
            FieldElement::Rational(a) => FieldElement::Rational(-a),
            FieldElement::Prime { value, modulus } => FieldElement::Prime {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
            FieldElement::Extension { coeffs, field } => FieldElement::Extension {
                coeffs: coeffs
                    .iter()
                    .map(|&c| if c == 0 { 0 } else { field.p - c })
                    .collect(),
                field: field.clone(),
            },
            FieldElement::Dual(pair) => FieldElement::Dual(Box::new((pair.0.neg_ref(), pair.1.neg_ref()))),
        }
    }

    pub fn pow(&self, mut e: u64) -> FieldElement {
        let mut base = self.clone();
        let mut acc = self.context().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// A square root in the same field, if one exists.
    pub fn sqrt(&self) -> Option<FieldElement> {
        match self {
            FieldElement::Rational(r) => {
                if r.is_negative() {
                    return None;
                }
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                    Some(FieldElement::Rational(BigRational::new(n, d)))
                } else {
                    None
                }
            }
            FieldElement::Prime { .. } | FieldElement::Extension { .. } => finite_sqrt(self),
            FieldElement::Dual(pair) => {
                // √(a + bε) = √a + b/(2√a) ε, requires a ≠ 0.
                let root = pair.0.sqrt()?;
                if root.is_zero() {
                    return if pair.1.is_zero() { Some(self.clone()) } else { None };
                }
                let two = root.context().from_i64(2);
                let eps = pair.1.checked_div(&(&two * &root)).ok()?;
                Some(FieldElement::Dual(Box::new((root, eps))))
            }
        }
    }
}

fn finite_sqrt(a: &FieldElement) -> Option<FieldElement> {
    let ctx = a.context();
    if a.is_zero() {
        return Some(a.clone());
    }
    let p = ctx.characteristic();
    let k = match &ctx {
        FieldContext::Extension(e) => e.k as u32,
        _ => 1,
    };
    let q = (p as u128).checked_pow(k)?;
    if p == 2 {
        // Frobenius is bijective: √a = a^(q/2).
        return Some(pow_u128(a, q / 2));
    }
    let order = q - 1;
    if !pow_u128(a, order / 2).is_one() {
        return None;
    }
    // Tonelli–Shanks in the multiplicative group of order q − 1.
    let mut s = 0u32;
    let mut t = order;
    while t % 2 == 0 {
        t /= 2;
        s += 1;
    }
    let nonresidue = small_elements(&ctx)
        .find(|z| !z.is_zero() && !pow_u128(z, order / 2).is_one())?;
    let mut m = s;
    let mut c = pow_u128(&nonresidue, t);
    let mut x = pow_u128(a, t.div_ceil(2));
    let mut b = pow_u128(a, t);
    while !b.is_one() {
        let mut i = 0u32;
        let mut probe = b.clone();
        while !probe.is_one() {
            probe = &probe * &probe;
            i += 1;
            if i == m {
                return None;
            }
        }
        let mut g = c.clone();
        for _ in 0..(m - i - 1) {
            g = &g * &g;
        }
        x = &x * &g;
        c = &g * &g;
        b = &b * &c;
        m = i;
    }
    Some(x)
}

fn small_elements(ctx: &FieldContext) -> impl Iterator<Item = FieldElement> + '_ {
    let gen = ctx.generator();
    (1i64..).flat_map(move |v| {
        let base = ctx.from_i64(v);
        let mut out = vec![base.clone()];
        if let Some(t) = &gen {
            out.push(&base + t);
        }
        out
    })
}

fn pow_u128(a: &FieldElement, mut e: u128) -> FieldElement {
    let mut base = a.clone();
    let mut acc = a.context().one();
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field elements from different contexts")
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_ref()
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_ref()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            FieldElement::Prime { value, .. } => write!(f, "{value}"),
            FieldElement::Extension { coeffs, .. } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
            FieldElement::Dual(pair) => write!(f, "({})+({})eps", pair.0, pair.1),
        }
    }
}

// ---- modular helpers -------------------------------------------------------

pub(crate) fn addmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

pub(crate) fn submod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + p as u128 - b as u128) % p as u128) as u64
}

pub(crate) fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn reduce_i128(v: i128, p: u64) -> u64 {
    v.rem_euclid(p as i128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

fn invmod(a: u64, p: u64) -> Option<u64> {
    if a.is_multiple_of(p) {
        None
    } else {
        Some(powmod(a, p - 2, p))
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            submod(
                a.get(i).copied().unwrap_or(0),
                b.get(i).copied().unwrap_or(0),
                p,
            )
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = addmod(out[i + j], mulmod(x, y, p), p);
        }
    }
    trim(out)
}

fn poly_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![], r);
    }
    let lead_inv = invmod(*b.last().unwrap(), p).expect("nonzero leading coefficient");
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = mulmod(*r.last().unwrap(), lead_inv, p);
        q[shift] = c;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = submod(r[shift + i], mulmod(c, bi, p), p);
        }
        r = trim(r);
    }
    (trim(q), r)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = poly_divrem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    poly_divrem(&poly_mul(a, b, p), m, p).1
}

/// Ben-Or irreducibility test: `f` of degree k is irreducible over 𝔽_p iff
/// gcd(t^(p^i) − t, f) = 1 for all 1 ≤ i ≤ k/2.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    let k = f.len() - 1;
    if k == 0 {
        return false;
    }
    let t = vec![0, 1];
    let mut power = t.clone();
    for _ in 1..=k / 2 {
        // power ← power^p mod f
        let mut acc = vec![1u64];
        let mut base = power.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, &f, p);
            }
            base = poly_mulmod(&base, &base, &f, p);
            e >>= 1;
        }
        power = acc;
        let diff = poly_sub(&power, &t, p);
        let g = poly_gcd(&diff, &f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(v: i64, p: u64) -> FieldElement {
        FieldContext::Prime(p).from_i64(v)
    }

    #[test]
    fn rational_sum_is_reduced() {
        let a = FieldElement::rational(1, 3);
        let b = FieldElement::rational(1, 6);
        assert_eq!(a + b, FieldElement::rational(1, 2));
        assert_eq!(FieldElement::rational(2, 4), FieldElement::rational(1, 2));
        assert_eq!(FieldElement::rational(1, -2).to_string(), "-1/2");
    }

    #[test]
    fn prime_field_product() {
        assert_eq!(fp(3, 7) * fp(5, 7), fp(1, 7));
        assert_eq!(fp(-1, 7), fp(6, 7));
    }

    #[test]
    fn dual_inverse_matches_brute_force() {
        let base = FieldContext::Prime(7);
        let dual = FieldContext::dual(base.clone());
        let a = dual.dual_element(fp(2, 7), fp(3, 7)).unwrap();
        // Exhaustive search over all 49 candidates.
        let mut found = vec![];
        for u in 0..7 {
            for v in 0..7 {
                let cand = dual.dual_element(fp(u, 7), fp(v, 7)).unwrap();
                if (&a * &cand).is_one() {
                    found.push(cand);
                }
            }
        }
        assert_eq!(found.len(), 1);
        assert_eq!(a.inv().unwrap(), found[0]);
        assert_eq!(found[0], dual.dual_element(fp(4, 7), fp(1, 7)).unwrap());
    }

    #[test]
    fn pure_epsilon_is_not_invertible() {
        let dual = FieldContext::dual(FieldContext::Rationals);
        let eps = dual
            .dual_element(FieldElement::rational(0, 1), FieldElement::rational(1, 1))
            .unwrap();
        assert!(!eps.is_invertible());
        assert_eq!(eps.inv(), Err(FieldError::DivisionByZero));
        assert!((&eps * &eps).is_zero());
    }

    #[test]
    fn mixed_contexts_are_rejected() {
        assert_eq!(
            fp(1, 7).checked_add(&fp(1, 11)),
            Err(FieldError::MixedContexts)
        );
        assert_eq!(
            fp(1, 7).checked_mul(&FieldElement::rational(1, 2)),
            Err(FieldError::MixedContexts)
        );
    }

    #[test]
    fn extension_modulus_is_smallest_irreducible() {
        let f = ExtensionField::new(10007, 2).unwrap();
        // 10007 ≡ 3 (mod 4), so t² + 1 is irreducible and comes first.
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let f = ExtensionField::new(5, 2).unwrap();
        // 2 is the smallest non-residue mod 5 giving −c₀ non-square: t² + 2.
        assert_eq!(f.modulus(), &[2, 0, 1]);
        let f3 = ExtensionField::new(2, 3).unwrap();
        assert_eq!(f3.modulus(), &[1, 1, 0, 1]);
        assert!(ExtensionField::with_modulus(5, vec![1, 0, 1]).is_err());
    }

    #[test]
    fn extension_inverse_and_sqrt() {
        let ctx = FieldContext::extension(7, 2).unwrap();
        let t = ctx.generator().unwrap();
        let a = &t + &ctx.from_i64(3);
        assert!((&a * &a.inv().unwrap()).is_one());
        // Every element of F_7 is a square in F_49.
        let three = ctx.from_i64(3);
        let r = three.sqrt().unwrap();
        assert_eq!(&r * &r, three);
        assert!(fp(3, 7).sqrt().is_none());
        assert_eq!(fp(2, 7).sqrt().map(|r| &r * &r), Some(fp(2, 7)));
    }

    #[test]
    fn rational_into_prime() {
        let ctx = FieldContext::Prime(7);
        let half = ctx.from_rational(&BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(half, fp(4, 7));
        assert!(ctx
            .from_rational(&BigRational::new(1.into(), 7.into()))
            .is_err());
    }

    #[test]
    fn field_specs() {
        assert_eq!(FieldContext::from_spec("Q", None).unwrap(), FieldContext::Rationals);
        assert_eq!(
            FieldContext::from_spec("Fp", Some(7)).unwrap(),
            FieldContext::Prime(7)
        );
        assert_eq!(FieldContext::from_spec("F11", None).unwrap(), FieldContext::Prime(11));
        assert!(matches!(
            FieldContext::from_spec("Fp^2", Some(7)).unwrap(),
            FieldContext::Extension(_)
        ));
        assert!(FieldContext::from_spec("F8", None).is_err());
    }
}
