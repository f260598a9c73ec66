//! Dense univariate polynomials over a [`FieldContext`]: gcds, square-free
//! decomposition, coprime bases and root finding (rational roots over ℚ,
//! exhaustive roots over 𝔽_p).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::field::{is_prime, FieldContext, FieldElement};

/// Coefficients from the constant term upwards; never has a zero leading
/// coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<FieldElement>,
    ctx: FieldContext,
}

impl UniPoly {
    pub fn new(ctx: &FieldContext, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly {
            coeffs,
            ctx: ctx.clone(),
        }
    }

    pub fn from_i64(ctx: &FieldContext, coeffs: &[i64]) -> Self {
        UniPoly::new(ctx, coeffs.iter().map(|&c| ctx.from_i64(c)).collect())
    }

    pub fn zero(ctx: &FieldContext) -> Self {
        UniPoly::new(ctx, vec![])
    }

    pub fn one(ctx: &FieldContext) -> Self {
        UniPoly::new(ctx, vec![ctx.one()])
    }

    /// `t − a`.
    pub fn linear(ctx: &FieldContext, a: &FieldElement) -> Self {
        UniPoly::new(ctx, vec![-a, ctx.one()])
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &FieldElement) -> FieldElement {
        let mut acc = self.ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * t) + c;
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &self.ctx.from_i64(i as i64))
            .collect();
        UniPoly::new(&self.ctx, coeffs)
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = self.ctx.zero();
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z))
            .collect();
        UniPoly::new(&self.ctx, coeffs)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.scale(&self.ctx.from_i64(-1)))
    }

    pub fn scale(&self, c: &FieldElement) -> UniPoly {
        UniPoly::new(&self.ctx, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(&self.ctx);
        }
        let mut out = vec![self.ctx.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UniPoly::new(&self.ctx, out)
    }

    /// Euclidean division. Panics on division by zero.
    pub fn divrem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        let lead_inv = d.lead().expect("division by zero polynomial").inv().expect("field");
        let dd = d.coeffs.len() - 1;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (UniPoly::zero(&self.ctx), self.clone());
        }
        let mut q = vec![self.ctx.zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[k + j] = &r[k + j] - &(&c * dj);
            }
            q[k] = c;
        }
        (UniPoly::new(&self.ctx, q), UniPoly::new(&self.ctx, r))
    }

    pub fn monic(&self) -> UniPoly {
        match self.lead() {
            None => self.clone(),
            Some(l) => self.scale(&l.inv().expect("nonzero lead")),
        }
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn exact_div(&self, d: &UniPoly) -> Option<UniPoly> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    /// Product of the distinct irreducible factors (monic). Assumes the
    /// characteristic exceeds the degree.
    pub fn squarefree_part(&self) -> UniPoly {
        if self.degree().unwrap_or(0) == 0 {
            return UniPoly::one(&self.ctx);
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g).expect("gcd divides").monic()
    }

    /// Yun's algorithm: returns `(f_1, f_2, …)` with `self = c·Π f_i^i`,
    /// each `f_i` monic and square-free and pairwise coprime. Assumes the
    /// characteristic exceeds the degree.
    pub fn squarefree_decomposition(&self) -> Vec<UniPoly> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.exact_div(&a0).expect("gcd divides");
        let mut c = fp.exact_div(&a0).expect("gcd divides");
        let mut d = c.sub(&b.derivative());
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            out.push(a.clone());
            b = b.exact_div(&a).expect("gcd divides");
            c = d.exact_div(&a).expect("gcd divides");
            d = c.sub(&b.derivative());
        }
        out
    }

    /// Multiplicity of `factor` (non-constant) in `self`.
    pub fn multiplicity_of(&self, factor: &UniPoly) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut m = 0;
        let mut cur = self.clone();
        while let Some(q) = cur.exact_div(factor) {
            m += 1;
            cur = q;
        }
        m
    }

    /// Order of vanishing at `t = 0`.
    pub fn order_at_zero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// All roots in the base field, for prime fields by exhaustive scan.
    pub fn roots_prime_field(&self) -> Vec<FieldElement> {
        let p = match &self.ctx {
            FieldContext::Prime(p) => *p,
            _ => panic!("roots_prime_field needs a prime field"),
        };
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        for v in 0..p {
            if rest.degree().unwrap_or(0) == 0 {
                break;
            }
            let a = self.ctx.from_i64(v as i64);
            if rest.eval(&a).is_zero() {
                out.push(a.clone());
                let lin = UniPoly::linear(&self.ctx, &a);
                while let Some(q) = rest.exact_div(&lin) {
                    rest = q;
                }
            }
        }
        out
    }

    /// Distinct rational roots, in increasing order.
    pub fn rational_roots(&self) -> Vec<BigRational> {
        assert_eq!(self.ctx, FieldContext::Rationals);
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let mut f = self.squarefree_part();
        let mut roots = Vec::new();
        let zero = FieldElement::Rational(BigRational::zero());
        if f.eval(&zero).is_zero() {
            roots.push(BigRational::zero());
            f = f.exact_div(&UniPoly::linear(&f.ctx, &zero)).expect("root");
        }
        if f.degree().unwrap_or(0) > 0 {
            let ints = integer_coefficients(&f);
            roots.extend(padic_rational_roots(&ints));
        }
        roots.sort();
        roots.dedup();
        roots
    }
}

/// Primitive integer coefficient vector proportional to a rational polynomial.
fn integer_coefficients(f: &UniPoly) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for c in &f.coeffs {
        lcm = lcm.lcm(c.as_rational().expect("rational").denom());
    }
    let ints: Vec<BigInt> = f
        .coeffs
        .iter()
        .map(|c| {
            let r = c.as_rational().unwrap();
            r.numer() * (&lcm / r.denom())
        })
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    ints.into_iter().map(|c| c / &g).collect()
}

fn eval_int(f: &[BigInt], t: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in f.iter().rev() {
        acc = (acc * t + c).mod_floor(m);
    }
    acc
}

fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Rational roots of a square-free integer polynomial with nonzero constant
/// term: roots modulo a prime of good reduction are Newton-lifted p-adically
/// and rationally reconstructed, then verified exactly.
fn padic_rational_roots(f: &[BigInt]) -> Vec<BigRational> {
    let lead = f.last().unwrap().abs();
    let constant = f[0].abs();
    // Any root a/b has |a| ≤ |f_0| and 0 < b ≤ |f_n|; reconstruction needs a
    // modulus above 2·|a|·|b|.
    let bound = BigInt::from(2) * &lead * &constant + 1;
    let deriv: Vec<BigInt> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let ctx_of = |p: u64| FieldContext::Prime(p);
    let mut p = 1009u64;
    loop {
        while !is_prime(p) {
            p += 2;
        }
        let pb = BigInt::from(p);
        let ctx = ctx_of(p);
        let reduce = |v: &[BigInt]| {
            UniPoly::new(
                &ctx,
                v.iter()
                    .map(|c| ctx.from_bigint(c))
                    .collect::<Vec<FieldElement>>(),
            )
        };
        let fp = reduce(f);
        let good = !(&lead % &pb).is_zero()
            && fp.gcd(&reduce(&deriv)).degree() == Some(0);
        if !good {
            p += 2;
            continue;
        }
        let mut out = Vec::new();
        for r in fp.roots_prime_field() {
            let mut x = BigInt::from(r.to_i64().unwrap());
            let mut m = pb.clone();
            while m < bound {
                m = &m * &m;
                let fx = eval_int(f, &x, &m);
                let dfx = eval_int(&deriv, &x, &m);
                let inv = modinv(&dfx, &m).expect("simple root lifts");
                x = (&x - fx * inv).mod_floor(&m);
            }
            if let Some(q) = rational_reconstruction(&x, &m) {
                let fe = FieldElement::Rational(q.clone());
                let poly = UniPoly::new(
                    &FieldContext::Rationals,
                    f.iter()
                        .map(|c| FieldElement::Rational(BigRational::from_integer(c.clone())))
                        .collect(),
                );
                if poly.eval(&fe).is_zero() {
                    out.push(q);
                }
            }
        }
        return out;
    }
}

/// Finds `a/b ≡ x (mod m)` with `|a|, |b| < √(m/2)`.
fn rational_reconstruction(x: &BigInt, m: &BigInt) -> Option<BigRational> {
    let half_bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > half_bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    if s1.is_zero() || s1.abs() > half_bound {
        return None;
    }
    Some(BigRational::new(r1, s1))
}

/// A pairwise coprime set of square-free monic polynomials such that every
/// input is, up to a constant, a product of powers of base elements, and all
/// roots of one base element share the same multiplicity in every input.
///
/// Returns the base and, for each base element, its multiplicity in each
/// input polynomial.
pub fn coprime_base(inputs: &[UniPoly]) -> Vec<(UniPoly, Vec<usize>)> {
    let mut base: Vec<UniPoly> = Vec::new();
    for f in inputs {
        for piece in f.squarefree_decomposition() {
            let mut s = piece;
            let mut next = Vec::new();
            for b in base.drain(..) {
                let g = s.gcd(&b);
                if g.degree().unwrap_or(0) == 0 {
                    next.push(b);
                    continue;
                }
                let rest = b.exact_div(&g).unwrap();
                if rest.degree().unwrap_or(0) > 0 {
                    next.push(rest.monic());
                }
                next.push(g.clone());
                s = s.exact_div(&g).unwrap();
            }
            if s.degree().unwrap_or(0) > 0 {
                next.push(s.monic());
            }
            base = next;
        }
    }
    base.sort_by(|a, b| {
        a.degree()
            .cmp(&b.degree())
            .then_with(|| format!("{:?}", a.coeffs).cmp(&format!("{:?}", b.coeffs)))
    });
    base.into_iter()
        .map(|b| {
            let mults = inputs.iter().map(|f| f.multiplicity_of(&b)).collect();
            (b, mults)
        })
        .collect()
}

/// Interpolates the polynomial through `(x_i, y_i)` (Newton form).
pub fn interpolate(ctx: &FieldContext, xs: &[FieldElement], ys: &[FieldElement]) -> UniPoly {
    let n = xs.len();
    let mut coef: Vec<FieldElement> = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = &coef[i] - &coef[i - 1];
            let den = &xs[i] - &xs[i - j];
            coef[i] = num.checked_div(&den).expect("distinct nodes");
        }
    }
    let mut acc = UniPoly::zero(ctx);
    for i in (0..n).rev() {
        acc = acc.mul(&UniPoly::linear(ctx, &xs[i]));
        acc = acc.add(&UniPoly::new(ctx, vec![coef[i].clone()]));
    }
    acc
}

/// Exact integer value of a rational that is known to be a small integer.
pub fn small_integer(r: &BigRational) -> Option<i64> {
    r.is_integer().then(|| r.to_integer().to_i64()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(c: &[i64]) -> UniPoly {
        UniPoly::from_i64(&FieldContext::Rationals, c)
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gcd_and_division() {
        // (t-1)(t-2) and (t-1)(t+3)
        let a = q(&[2, -3, 1]);
        let b = q(&[-3, 2, 1]);
        assert_eq!(a.gcd(&b), q(&[-1, 1]));
        assert_eq!(a.exact_div(&q(&[-1, 1])).unwrap(), q(&[-2, 1]));
    }

    #[test]
    fn yun_decomposition() {
        // (t-1)^2 (t+2)
        let f = q(&[-1, 1]).mul(&q(&[-1, 1])).mul(&q(&[2, 1]));
        let dec = f.squarefree_decomposition();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec[0], q(&[2, 1]));
        assert_eq!(dec[1], q(&[-1, 1]));
        assert_eq!(f.squarefree_part(), q(&[-2, 1, 1]));
    }

    #[test]
    fn rational_roots_are_found() {
        // (2t - 1)(3t + 4)(t^2 + 1) t
        let f = q(&[-1, 2]).mul(&q(&[4, 3])).mul(&q(&[1, 0, 1])).mul(&q(&[0, 1]));
        assert_eq!(f.rational_roots(), vec![r(-4, 3), r(0, 1), r(1, 2)]);
        assert!(q(&[-2, 0, 1]).rational_roots().is_empty());
        // Large coefficients: (1234567 t - 7654321)(t + 99991)
        let g = q(&[-7654321, 1234567]).mul(&q(&[99991, 1]));
        assert_eq!(g.rational_roots(), vec![r(-99991, 1), r(7654321, 1234567)]);
    }

    #[test]
    fn prime_field_roots() {
        let ctx = FieldContext::Prime(7);
        let f = UniPoly::from_i64(&ctx, &[-1, 0, 1]);
        let roots: Vec<i64> = f.roots_prime_field().iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(roots, vec![1, 6]);
    }

    #[test]
    fn coprime_base_separates_multiplicities() {
        // f = t^2 (t-1), g = t (t-1)^3 (t+1)
        let t = q(&[0, 1]);
        let t1 = q(&[-1, 1]);
        let f = t.mul(&t).mul(&t1);
        let g = t.mul(&t1).mul(&t1).mul(&t1).mul(&q(&[1, 1]));
        let base = coprime_base(&[f, g]);
        let mut table: Vec<(UniPoly, Vec<usize>)> = base;
        table.sort_by_key(|(b, _)| b.eval(&FieldContext::Rationals.from_i64(2)).to_string());
        let find = |p: &UniPoly| table.iter().find(|(b, _)| b == p).map(|(_, m)| m.clone());
        assert_eq!(find(&t), Some(vec![2, 1]));
        assert_eq!(find(&t1), Some(vec![1, 3]));
        assert_eq!(find(&q(&[1, 1])), Some(vec![0, 1]));
        assert_eq!(table.len(), 3);
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let ctx = FieldContext::Rationals;
        let f = q(&[3, -1, 0, 2]);
        let xs: Vec<FieldElement> = (0..4).map(|i| ctx.from_i64(i)).collect();
        let ys: Vec<FieldElement> = xs.iter().map(|x| f.eval(x)).collect();
        assert_eq!(interpolate(&ctx, &xs, &ys), f);
    }

    #[test]
    fn reconstruction() {
        let m = BigInt::from(1_000_003i64);
        // 3/7 mod m
        let x = (BigInt::from(3) * modinv(&BigInt::from(7), &m).unwrap()).mod_floor(&m);
        assert_eq!(rational_reconstruction(&x, &m), Some(r(3, 7)));
    }
}
