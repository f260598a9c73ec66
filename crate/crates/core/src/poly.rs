//! Sparse polynomials in x, y (affine) or x, y, z (projective) over a runtime
//! [`FieldContext`], plus planar differential forms built from them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use thiserror::Error;

use crate::field::{FieldContext, FieldElement, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomials belong to different fields")]
    MixedContexts,
    #[error("cannot mix affine and projective polynomials")]
    ArityMismatch,
    #[error("polynomial is not divisible")]
    NotDivisible,
    #[error("target degree {target} is below the polynomial degree {degree}")]
    DegreeTooSmall { target: u32, degree: u32 },
    #[error("variable z is not available for affine polynomials")]
    MissingVariable,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }
    }

    pub fn name(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }

    pub fn from_char(c: char) -> Option<Var> {
        match c {
            'x' => Some(Var::X),
            'y' => Some(Var::Y),
            'z' => Some(Var::Z),
            _ => None,
        }
    }
}

/// Whether a polynomial lives in k[x, y] or k[x, y, z].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arity {
    Affine,
    Projective,
}

impl Arity {
    pub fn nvars(self) -> usize {
        match self {
            Arity::Affine => 2,
            Arity::Projective => 3,
        }
    }
}

/// `x^a y^b z^c`. Ordered graded-lexicographically with x > y > z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u32; 3]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0, 0, 0]);

    pub fn new(a: u32, b: u32, c: u32) -> Self {
        Monomial([a, b, c])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.0[v.index()]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        (0..3).all(|i| self.0[i] <= other.0[i])
    }

    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        other.divides(self).then(|| {
            Monomial([
                self.0[0] - other.0[0],
                self.0[1] - other.0[1],
                self.0[2] - other.0[2],
            ])
        })
    }

    /// All monomials of total degree `k`, in descending term order.
    pub fn of_degree(k: u32, arity: Arity) -> Vec<Monomial> {
        match arity {
            Arity::Affine => (0..=k).rev().map(|a| Monomial([a, k - a, 0])).collect(),
            Arity::Projective => {
                let mut out = Vec::with_capacity(((k + 1) * (k + 2) / 2) as usize);
                for a in (0..=k).rev() {
                    for b in (0..=k - a).rev() {
                        out.push(Monomial([a, b, k - a - b]));
                    }
                }
                out
            }
        }
    }

    /// All monomials of total degree at most `k`, in descending term order.
    pub fn up_to_degree(k: u32, arity: Arity) -> Vec<Monomial> {
        (0..=k)
            .rev()
            .flat_map(|j| Monomial::of_degree(j, arity))
            .collect()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial. No zero coefficients are ever stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, FieldElement>,
    ctx: FieldContext,
    arity: Arity,
}

impl Polynomial {
    pub fn zero(ctx: &FieldContext, arity: Arity) -> Self {
        Polynomial {
            terms: BTreeMap::new(),
            ctx: ctx.clone(),
            arity,
        }
    }

    pub fn constant(c: FieldElement, arity: Arity) -> Self {
        let ctx = c.context();
        Polynomial::from_terms(&ctx, arity, [(Monomial::ONE, c)])
    }

    pub fn from_i64(ctx: &FieldContext, arity: Arity, v: i64) -> Self {
        Polynomial::constant(ctx.from_i64(v), arity)
    }

    pub fn var(ctx: &FieldContext, arity: Arity, v: Var) -> Result<Self, PolyError> {
        if v == Var::Z && arity == Arity::Affine {
            return Err(PolyError::MissingVariable);
        }
        let mut e = [0; 3];
        e[v.index()] = 1;
        Ok(Polynomial::from_terms(ctx, arity, [(Monomial(e), ctx.one())]))
    }

    pub fn x(ctx: &FieldContext, arity: Arity) -> Self {
        Polynomial::var(ctx, arity, Var::X).expect("x always exists")
    }

    pub fn y(ctx: &FieldContext, arity: Arity) -> Self {
        Polynomial::var(ctx, arity, Var::Y).expect("y always exists")
    }

    pub fn z(ctx: &FieldContext) -> Self {
        Polynomial::var(ctx, Arity::Projective, Var::Z).expect("z exists projectively")
    }

    pub fn monomial(ctx: &FieldContext, arity: Arity, m: Monomial, c: FieldElement) -> Self {
        Polynomial::from_terms(ctx, arity, [(m, c)])
    }

    /// Sums the given terms; repeated monomials accumulate. Panics if a
    /// coefficient lives in another field or `z` appears in an affine
    /// polynomial.
    pub fn from_terms<I>(ctx: &FieldContext, arity: Arity, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, FieldElement)>,
    {
        let mut map: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
        for (m, c) in terms {
            assert!(
                arity == Arity::Projective || m.0[2] == 0,
                "affine polynomial cannot contain z"
            );
            assert!(c.context() == *ctx, "coefficient from a different field");
            accumulate(&mut map, m, c);
        }
        Polynomial {
            terms: map,
            ctx: ctx.clone(),
            arity,
        }
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    /// Lowest total degree of a term; `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    /// Degree in a single variable; `None` for zero.
    pub fn degree_in(&self, v: Var) -> Option<u32> {
        self.terms.keys().map(|m| m.exp(v)).max()
    }

    /// Terms in descending term order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &FieldElement)> {
        self.terms.iter().rev()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &FieldElement)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, m: &Monomial) -> FieldElement {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ctx.zero())
    }

    pub fn homogeneous_component(&self, k: u32) -> Polynomial {
        self.filter(|m| m.degree() == k)
    }

    /// Terms of total degree below `n`.
    pub fn truncate(&self, n: u32) -> Polynomial {
        self.filter(|m| m.degree() < n)
    }

    fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
            ctx: self.ctx.clone(),
            arity: self.arity,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.arity != other.arity {
            return Err(PolyError::ArityMismatch);
        }
        if self.ctx != other.ctx {
            return Err(PolyError::MixedContexts);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&mut terms, *m, c.clone());
        }
        Ok(Polynomial {
            terms,
            ctx: self.ctx.clone(),
            arity: self.arity,
        })
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                accumulate(&mut terms, m1.mul(m2), c1 * c2);
            }
        }
        Ok(Polynomial {
            terms,
            ctx: self.ctx.clone(),
            arity: self.arity,
        })
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &FieldElement) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (*m, v * c))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
            ctx: self.ctx.clone(),
            arity: self.arity,
        }
    }

    /// Multiplies by a monomial (no coefficient).
    pub fn shift(&self, m: &Monomial) -> Polynomial {
        assert!(self.arity == Arity::Projective || m.0[2] == 0);
        Polynomial {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
            ctx: self.ctx.clone(),
            arity: self.arity,
        }
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::from_i64(&self.ctx, self.arity, 1);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Quotient `self / g` when `g` divides `self` exactly.
    pub fn exact_div(&self, g: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(g)?;
        let (lm, lc) = g.leading_term().ok_or(FieldError::DivisionByZero)?;
        let lc_inv = lc.inv()?;
        let mut rem = self.clone();
        let mut quotient = BTreeMap::new();
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.div(lm).ok_or(PolyError::NotDivisible)?;
            let qc = c * &lc_inv;
            let step = g.shift(&qm).scale(&qc);
            rem = &rem - &step;
            accumulate(&mut quotient, qm, qc);
        }
        Ok(Polynomial {
            terms: quotient,
            ctx: self.ctx.clone(),
            arity: self.arity,
        })
    }

    /// Formal partial derivative; exponents are reduced in the coefficient
    /// field, so `∂y y^p = 0` over 𝔽_p.
    pub fn partial(&self, v: Var) -> Polynomial {
        let i = v.index();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut nm = *m;
            nm.0[i] -= 1;
            accumulate(&mut terms, nm, c * &self.ctx.from_i64(e as i64));
        }
        Polynomial {
            terms,
            ctx: self.ctx.clone(),
            arity: self.arity,
        }
    }

    /// Pads every term with powers of z to total degree `e`. The input must
    /// not involve z.
    pub fn homogenize(&self, e: u32) -> Result<Polynomial, PolyError> {
        let degree = self.degree().unwrap_or(0);
        if degree > e {
            return Err(PolyError::DegreeTooSmall { target: e, degree });
        }
        if self.degree_in(Var::Z).unwrap_or(0) > 0 {
            return Err(PolyError::ArityMismatch);
        }
        Ok(Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial([m.0[0], m.0[1], e - m.degree()]), c.clone()))
                .collect(),
            ctx: self.ctx.clone(),
            arity: Arity::Projective,
        })
    }

    /// Substitutes `v := 1`. Dehomogenizing with respect to z yields an affine
    /// polynomial in x, y; with respect to x or y the remaining two variables
    /// keep their names.
    pub fn dehomogenize(&self, v: Var) -> Polynomial {
        let i = v.index();
        let arity = if v == Var::Z { Arity::Affine } else { self.arity };
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut nm = *m;
            nm.0[i] = 0;
            accumulate(&mut terms, nm, c.clone());
        }
        Polynomial {
            terms,
            ctx: self.ctx.clone(),
            arity,
        }
    }

    /// Affine chart `v = 1`, renaming the two remaining variables (in the
    /// order x, y, z) to the affine coordinates x, y. For the chart `x = 1`
    /// the result is a polynomial in (y, z) written as (x, y).
    pub fn chart(&self, v: Var) -> Polynomial {
        let keep: Vec<usize> = (0..3).filter(|&j| j != v.index()).collect();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            accumulate(
                &mut terms,
                Monomial([m.0[keep[0]], m.0[keep[1]], 0]),
                c.clone(),
            );
        }
        Polynomial {
            terms,
            ctx: self.ctx.clone(),
            arity: Arity::Affine,
        }
    }

    /// Re-tags an affine polynomial as projective (no homogenization).
    pub fn to_projective(&self) -> Polynomial {
        Polynomial {
            terms: self.terms.clone(),
            ctx: self.ctx.clone(),
            arity: Arity::Projective,
        }
    }

    /// Re-tags a projective polynomial that does not involve z as affine.
    pub fn to_affine(&self) -> Result<Polynomial, PolyError> {
        if self.degree_in(Var::Z).unwrap_or(0) > 0 {
            return Err(PolyError::ArityMismatch);
        }
        Ok(Polynomial {
            terms: self.terms.clone(),
            ctx: self.ctx.clone(),
            arity: Arity::Affine,
        })
    }

    /// Maps every coefficient into `ctx` (ℚ → 𝔽_p → 𝔽_{p^k}, or into dual
    /// numbers).
    pub fn to_context(&self, ctx: &FieldContext) -> Result<Polynomial, PolyError> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            accumulate(&mut terms, *m, ctx.embed(c)?);
        }
        Ok(Polynomial {
            terms,
            ctx: ctx.clone(),
            arity: self.arity,
        })
    }

    /// Applies `f` to every coefficient, changing the context to `ctx`.
    pub fn map_coeffs(
        &self,
        ctx: &FieldContext,
        f: impl Fn(&FieldElement) -> FieldElement,
    ) -> Polynomial {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            accumulate(&mut terms, *m, f(c));
        }
        Polynomial {
            terms,
            ctx: ctx.clone(),
            arity: self.arity,
        }
    }

    /// Evaluates at a point whose length equals the number of variables.
    /// Coefficients are embedded into the point's field.
    pub fn evaluate(&self, point: &[FieldElement]) -> Result<FieldElement, PolyError> {
        if point.len() != self.arity.nvars() {
            return Err(PolyError::ArityMismatch);
        }
        let ctx = point[0].context();
        if point.iter().any(|p| p.context() != ctx) {
            return Err(PolyError::MixedContexts);
        }
        let maxdeg = self.degree().unwrap_or(0) as usize;
        let powers: Vec<Vec<FieldElement>> = point
            .iter()
            .map(|p| {
                let mut v = vec![ctx.one()];
                for i in 1..=maxdeg {
                    let next = &v[i - 1] * p;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = ctx.zero();
        for (m, c) in &self.terms {
            let mut t = ctx.embed(c)?;
            for (i, pw) in powers.iter().enumerate() {
                t = &t * &pw[m.0[i] as usize];
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Composition: replaces the i-th variable by `images[i]`. The result has
    /// the arity and context of the images.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial, PolyError> {
        if images.len() != self.arity.nvars() {
            return Err(PolyError::ArityMismatch);
        }
        let arity = images[0].arity;
        let ctx = images[0].ctx.clone();
        if images.iter().any(|g| g.arity != arity || g.ctx != ctx) {
            return Err(PolyError::MixedContexts);
        }
        let mut powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|g| vec![Polynomial::from_i64(&ctx, arity, 1), g.clone()])
            .collect();
        let mut acc = Polynomial::zero(&ctx, arity);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(ctx.embed(c)?, arity);
            for (i, pw) in powers.iter_mut().enumerate() {
                let e = m.0[i] as usize;
                while pw.len() <= e {
                    let next = &pw[pw.len() - 1] * &images[i];
                    pw.push(next);
                }
                if e > 0 {
                    t = &t * &pw[e];
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Coefficients of the given monomials, in the given order.
    pub fn coefficients_on(&self, basis: &[Monomial]) -> Vec<FieldElement> {
        basis.iter().map(|m| self.coeff(m)).collect()
    }

    /// Builds a polynomial from coefficients on a monomial basis.
    pub fn from_coefficients(
        ctx: &FieldContext,
        arity: Arity,
        basis: &[Monomial],
        coeffs: &[FieldElement],
    ) -> Polynomial {
        Polynomial::from_terms(ctx, arity, basis.iter().copied().zip(coeffs.iter().cloned()))
    }

    /// Multiplies by the least common denominator of the rational
    /// coefficients and divides by the content, making the leading
    /// coefficient positive. Identity for non-rational fields.
    pub fn primitive(&self) -> Polynomial {
        if self.ctx != FieldContext::Rationals || self.is_zero() {
            return self.clone();
        }
        let mut lcm = num_bigint::BigInt::from(1);
        let mut gcd = num_bigint::BigInt::zero();
        for c in self.terms.values() {
            let r = c.as_rational().expect("rational coefficient");
            lcm = num_integer::Integer::lcm(&lcm, r.denom());
        }
        for c in self.terms.values() {
            let r = c.as_rational().expect("rational coefficient");
            let n = r.numer() * (&lcm / r.denom());
            gcd = num_integer::Integer::gcd(&gcd, &n);
        }
        let sign = if self
            .leading_term()
            .map(|(_, c)| num_traits::Signed::is_negative(c.as_rational().unwrap()))
            .unwrap_or(false)
        {
            -1
        } else {
            1
        };
        let factor = num_rational::BigRational::new(lcm * sign, gcd);
        self.scale(&FieldElement::Rational(factor))
    }

    /// Makes the leading coefficient 1.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv().expect("leading coefficient is nonzero")),
        }
    }
}

fn accumulate(map: &mut BTreeMap<Monomial, FieldElement>, m: Monomial, c: FieldElement) {
    if c.is_zero() {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get() + &c;
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("incompatible polynomials")
            }
        }
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
        impl $tr<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                self.$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
            ctx: self.ctx.clone(),
            arity: self.arity,
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Display for Polynomial {
    /// Prints in descending graded-lex order with explicit `*` and `^`; the
    /// output re-parses to an equal polynomial over ℚ and 𝔽_p.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            let text = c.to_string();
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            for v in [Var::X, Var::Y, Var::Z] {
                match m.exp(v) {
                    0 => {}
                    1 => factors.push(v.name().to_string()),
                    e => factors.push(format!("{}^{}", v.name(), e)),
                }
            }
            if factors.is_empty() {
                f.write_str(&magnitude)?;
            } else if magnitude == "1" {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{}*{}", magnitude, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// The coefficient `R` of a 2-form `R dx∧dy`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoForm(pub Polynomial);

impl TwoForm {
    pub fn coefficient(&self) -> &Polynomial {
        &self.0
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) dx^dy", self.0)
    }
}

/// `ω = P dx + Q dy` with a declared degree `d ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialForm {
    pub p: Polynomial,
    pub q: Polynomial,
    pub degree: u32,
}

impl DifferentialForm {
    pub fn new(p: Polynomial, q: Polynomial, degree: u32) -> Result<Self, PolyError> {
        p.check_compatible(&q)?;
        for part in [&p, &q] {
            if let Some(dp) = part.degree() {
                if dp > degree {
                    return Err(PolyError::DegreeTooSmall {
                        target: degree,
                        degree: dp,
                    });
                }
            }
        }
        Ok(DifferentialForm { p, q, degree })
    }

    pub fn context(&self) -> &FieldContext {
        self.p.context()
    }

    pub fn arity(&self) -> Arity {
        self.p.arity()
    }

    /// `dω = (Q_x − P_y) dx∧dy`.
    pub fn curl(&self) -> TwoForm {
        TwoForm(&self.q.partial(Var::X) - &self.p.partial(Var::Y))
    }

    /// `dC ∧ ω = (C_x Q − C_y P) dx∧dy`.
    pub fn wedge_with_dc(&self, c: &Polynomial) -> Result<TwoForm, PolyError> {
        let cx = c.partial(Var::X);
        let cy = c.partial(Var::Y);
        Ok(TwoForm(cx.checked_mul(&self.q)?.checked_sub(&cy.checked_mul(&self.p)?)?))
    }

    /// Homogenizes P and Q to the declared degree.
    pub fn homogenize(&self) -> Result<DifferentialForm, PolyError> {
        if self.arity() == Arity::Projective {
            return Ok(self.clone());
        }
        Ok(DifferentialForm {
            p: self.p.homogenize(self.degree)?,
            q: self.q.homogenize(self.degree)?,
            degree: self.degree,
        })
    }

    /// `f·ω`, of degree `d + deg f`.
    pub fn multiply(&self, f: &Polynomial) -> Result<DifferentialForm, PolyError> {
        let extra = f.degree().unwrap_or(0);
        Ok(DifferentialForm {
            p: f.checked_mul(&self.p)?,
            q: f.checked_mul(&self.q)?,
            degree: self.degree + extra,
        })
    }

    pub fn scale(&self, c: &FieldElement) -> DifferentialForm {
        DifferentialForm {
            p: self.p.scale(c),
            q: self.q.scale(c),
            degree: self.degree,
        }
    }

    pub fn to_context(&self, ctx: &FieldContext) -> Result<DifferentialForm, PolyError> {
        Ok(DifferentialForm {
            p: self.p.to_context(ctx)?,
            q: self.q.to_context(ctx)?,
            degree: self.degree,
        })
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) dx + ({}) dy", self.p, self.q)
    }
}

/// Binomial coefficient `n choose k`, zero when `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> i64 {
    if n < 0 || k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
