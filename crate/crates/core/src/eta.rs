//! The η invariant `(K_1(a) : … : K_r(a) : dω(a))`, its predictions from
//! quasi-homogeneous weights and from the line at infinity, and exact Darboux
//! certificates `Σ α_i K_i + α_0 dω = 0`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::darboux::{cofactor, homogeneous_form, Curve, DarbouxError};
use crate::field::{FieldContext, FieldElement};
use crate::linalg::{ExactMatrix, LinalgError};
use crate::local::MarkedPoint;
use crate::poly::{Arity, DifferentialForm, Monomial, PolyError, Polynomial, Var};
use crate::univariate::{coprime_base, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EtaError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("a curve has a component on the line at infinity")]
    ComponentAtInfinity,
    #[error("no curves given")]
    NoCurves,
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A projective tuple of field values; the all-zero tuple is the explicit
/// degenerate state.
#[derive(Debug, Clone, Eq)]
pub struct RatioVector {
    entries: Vec<FieldElement>,
}

impl RatioVector {
    pub fn new(entries: Vec<FieldElement>) -> Self {
        RatioVector { entries }
    }

    pub fn from_i64(ctx: &FieldContext, values: &[i64]) -> Self {
        RatioVector::new(values.iter().map(|&v| ctx.from_i64(v)).collect())
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.entries.iter().all(FieldElement::is_zero)
    }

    /// Representative whose first nonzero entry is one.
    pub fn normalized(&self) -> Vec<FieldElement> {
        match self.entries.iter().find(|e| !e.is_zero()) {
            None => self.entries.clone(),
            Some(lead) => {
                let inv = lead.inv().expect("nonzero entry");
                self.entries.iter().map(|e| e * &inv).collect()
            }
        }
    }

    /// Equal to `other` or degenerate: the dichotomy of the η predictions.
    pub fn matches_or_degenerate(&self, other: &RatioVector) -> bool {
        self.is_degenerate() || self == other
    }

    /// Maps every entry into `ctx`.
    pub fn to_context(&self, ctx: &FieldContext) -> Result<RatioVector, EtaError> {
        let entries = self
            .entries
            .iter()
            .map(|e| embed(ctx, e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RatioVector::new(entries))
    }
}

fn embed(ctx: &FieldContext, e: &FieldElement) -> Result<FieldElement, EtaError> {
    ctx.embed(e)
        .map_err(|err| EtaError::Poly(PolyError::Field(err)))
}

/// Projective equality: cross products agree, and degenerate only equals
/// degenerate.
impl PartialEq for RatioVector {
    fn eq(&self, other: &Self) -> bool {
        if self.entries.len() != other.entries.len() {
            return false;
        }
        if self.is_degenerate() || other.is_degenerate() {
            return self.is_degenerate() && other.is_degenerate();
        }
        let (a, b) = if self.entries[0].same_context(&other.entries[0]) {
            (self.clone(), other.clone())
        } else {
            let ctx = self.entries[0].context();
            match other.to_context(&ctx) {
                Ok(o) => (self.clone(), o),
                Err(_) => return false,
            }
        };
        let n = a.entries.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| &a.entries[i] * &b.entries[j] == &a.entries[j] * &b.entries[i])
        })
    }
}

impl fmt::Display for RatioVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(":"))
    }
}

impl Serialize for RatioVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `(w_deg : w_x + w_y)` for a quasi-homogeneous singular point of one curve.
pub fn predicted_eta_single(ctx: &FieldContext, wx: u32, wy: u32, wdeg: u32) -> RatioVector {
    RatioVector::from_i64(ctx, &[wdeg as i64, (wx + wy) as i64])
}

/// `(deg C : deg D : w_x + w_y)` for two curves meeting in a
/// quasi-homogeneous point of `C·D`; requires `deg C + deg D > w_x + w_y`.
pub fn predicted_eta_pair(
    ctx: &FieldContext,
    deg_c: u32,
    deg_d: u32,
    wx: u32,
    wy: u32,
) -> Result<RatioVector, EtaError> {
    if deg_c + deg_d <= wx + wy {
        return Err(EtaError::HypothesisViolated(format!(
            "deg C + deg D = {} does not exceed w_x + w_y = {}",
            deg_c + deg_d,
            wx + wy
        )));
    }
    Ok(RatioVector::from_i64(
        ctx,
        &[deg_c as i64, deg_d as i64, (wx + wy) as i64],
    ))
}

/// `(deg_1 : … : deg_r : w_x + w_y)` where `deg_i` is the weighted degree of
/// curve `i` at the point (zero for curves not through it: their cofactors
/// vanish at zeros of ω). With at least two curves through the point the
/// pair hypothesis is enforced.
pub fn predicted_eta_general(
    ctx: &FieldContext,
    weighted_degrees: &[u32],
    wx: u32,
    wy: u32,
) -> Result<RatioVector, EtaError> {
    let through = weighted_degrees.iter().filter(|&&d| d > 0).count();
    let total: u32 = weighted_degrees.iter().sum();
    if through >= 2 && total <= wx + wy {
        return Err(EtaError::HypothesisViolated(format!(
            "sum of weighted degrees {total} does not exceed w_x + w_y = {}",
            wx + wy
        )));
    }
    let mut values: Vec<i64> = weighted_degrees.iter().map(|&d| d as i64).collect();
    values.push((wx + wy) as i64);
    Ok(RatioVector::from_i64(ctx, &values))
}

/// Weighted degree of a germ that is quasi-homogeneous for `(w_x, w_y)`.
pub fn weighted_degree(germ: &Polynomial, wx: u32, wy: u32) -> Option<u32> {
    let mut degs = germ
        .terms()
        .map(|(m, _)| m.exp(Var::X) * wx + m.exp(Var::Y) * wy);
    let first = degs.next()?;
    degs.all(|d| d == first).then_some(first)
}

/// Homogeneous cofactors of all curves and the homogeneous curl, all of
/// degree `d − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CofactorData {
    pub omega: DifferentialForm,
    pub cofactors: Vec<Polynomial>,
    pub curl: Polynomial,
}

impl CofactorData {
    pub fn new(omega: &DifferentialForm, curves: &[Curve]) -> Result<Self, EtaError> {
        if curves.is_empty() {
            return Err(EtaError::NoCurves);
        }
        let omega = homogeneous_form(omega)?;
        let cofactors = curves
            .iter()
            .map(|c| cofactor(c, &omega))
            .collect::<Result<Vec<_>, _>>()?;
        let curl = omega.curl().0;
        Ok(CofactorData {
            omega,
            cofactors,
            curl,
        })
    }

    /// `(K_1(a) : … : K_r(a) : dω(a))` at a projective point.
    pub fn eta_at(&self, coords: &[FieldElement; 3]) -> Result<RatioVector, EtaError> {
        let mut entries = Vec::with_capacity(self.cofactors.len() + 1);
        for k in self.cofactors.iter().chain(std::iter::once(&self.curl)) {
            entries.push(k.evaluate(coords)?);
        }
        Ok(RatioVector::new(entries))
    }
}

pub fn eta_at_point(
    omega: &DifferentialForm,
    curves: &[Curve],
    point: &MarkedPoint,
) -> Result<RatioVector, EtaError> {
    CofactorData::new(omega, curves)?.eta_at(&point.coords)
}

/// Restriction of a homogeneous polynomial to `z = 0` as a univariate
/// polynomial in `t = x/y`, together with the multiplicity of `(1:0:0)`.
pub fn restrict_to_infinity(poly: &Polynomial) -> Result<(UniPoly, usize), EtaError> {
    let e = poly.degree().unwrap_or(0);
    let ctx = poly.context();
    let mut coeffs = vec![ctx.zero(); e as usize + 1];
    for (m, c) in poly.terms() {
        if m.exp(Var::Z) == 0 {
            coeffs[m.exp(Var::X) as usize] = c.clone();
        }
    }
    let u = UniPoly::new(ctx, coeffs);
    match u.degree() {
        None => Err(EtaError::ComponentAtInfinity),
        Some(deg) => Ok((u, e as usize - deg)),
    }
}

/// Number of distinct points of `V(C) ∩ {z = 0}` over the algebraic closure.
pub fn distinct_points_at_infinity(poly: &Polynomial) -> Result<usize, EtaError> {
    let (u, deficit) = restrict_to_infinity(poly)?;
    Ok(u.squarefree_part().degree().unwrap_or(0) + usize::from(deficit > 0))
}

/// Evaluation of η at one point at infinity against the prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfinityEvaluation {
    pub label: String,
    pub value: RatioVector,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfinityEta {
    /// Distinct points of the configuration on the line at infinity.
    pub points_at_infinity: usize,
    pub predicted: RatioVector,
    /// `(d+1)·K_i|_{z=0} = deg C_i · dω|_{z=0}` for every curve.
    pub restricted_identity: bool,
    pub evaluations: Vec<InfinityEvaluation>,
}

impl InfinityEta {
    pub fn holds(&self) -> bool {
        self.restricted_identity && self.evaluations.iter().all(|e| e.matches)
    }
}

/// Prediction `(deg C_1 : … : deg C_r : d + 1)` on the line at infinity,
/// valid when the curves meet it in more than `d + 1` distinct points.
/// Verified both as a polynomial identity on `z = 0` and by evaluation at
/// the supplied points at infinity.
pub fn eta_at_infinity(
    omega: &DifferentialForm,
    curves: &[Curve],
    points: &[MarkedPoint],
) -> Result<InfinityEta, EtaError> {
    let d = omega.degree;
    let refs: Vec<&Curve> = curves.iter().collect();
    let union = Curve::union("union", &refs)?;
    let k = distinct_points_at_infinity(&union.poly)?;
    if k <= d as usize + 1 {
        return Err(EtaError::HypothesisViolated(format!(
            "{k} points at infinity do not exceed d + 1 = {}",
            d + 1
        )));
    }
    let ctx = omega.context().clone();
    let mut degs: Vec<i64> = curves.iter().map(|c| c.degree as i64).collect();
    degs.push(d as i64 + 1);
    let predicted = RatioVector::from_i64(&ctx, &degs);
    let data = CofactorData::new(omega, curves)?;
    let at_infinity = |p: &Polynomial| restrict_polynomial(p, Var::Z);
    let curl_inf = at_infinity(&data.curl);
    let restricted_identity = data.cofactors.iter().zip(curves).all(|(k, c)| {
        at_infinity(k).scale(&ctx.from_i64(d as i64 + 1))
            == curl_inf.scale(&ctx.from_i64(c.degree as i64))
    });
    let mut evaluations = Vec::new();
    for p in points.iter().filter(|p| p.is_at_infinity()) {
        let value = data.eta_at(&p.coords)?;
        let matches = value.matches_or_degenerate(&predicted);
        evaluations.push(InfinityEvaluation {
            label: p.label.clone(),
            value,
            matches,
        });
    }
    Ok(InfinityEta {
        points_at_infinity: k,
        predicted,
        restricted_identity,
        evaluations,
    })
}

/// Sets the variable `v` to zero.
fn restrict_polynomial(p: &Polynomial, v: Var) -> Polynomial {
    Polynomial::from_terms(
        p.context(),
        p.arity(),
        p.terms()
            .filter(|(m, _)| m.exp(v) == 0)
            .map(|(m, c)| (*m, c.clone())),
    )
}

/// The incidence matrix of curves against points at infinity and its left
/// kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incidence {
    /// Points at infinity grouped into classes with identical incidence;
    /// each class is the monic square-free polynomial in `t = x/y` whose
    /// roots are its points, or `None` for the point `(1:0:0)`.
    pub point_classes: Vec<Option<UniPoly>>,
    /// `matrix[i][j]`: intersection multiplicity of curve `i` with the
    /// points of class `j`.
    pub matrix: Vec<Vec<usize>>,
    /// Basis of `{β : Σ_i β_i α_ij = 0 for all j}`.
    pub kernel: Vec<Vec<FieldElement>>,
    /// `(Σ β_i K_i)|_{z=0} = 0` for every kernel vector, when ω was given.
    pub restricted_check: Option<bool>,
}

pub fn infinity_incidence_relation(
    curves: &[Curve],
    omega: Option<&DifferentialForm>,
) -> Result<Incidence, EtaError> {
    if curves.is_empty() {
        return Err(EtaError::NoCurves);
    }
    let ctx = curves[0].context().clone();
    let restricted = curves
        .iter()
        .map(|c| restrict_to_infinity(&c.poly))
        .collect::<Result<Vec<_>, _>>()?;
    let finite: Vec<UniPoly> = restricted.iter().map(|(u, _)| u.clone()).collect();
    let base = coprime_base(&finite);
    let mut point_classes: Vec<Option<UniPoly>> = Vec::new();
    let mut columns: Vec<Vec<usize>> = Vec::new();
    for (b, mults) in base {
        point_classes.push(Some(b));
        columns.push(mults);
    }
    if restricted.iter().any(|(_, deficit)| *deficit > 0) {
        point_classes.push(None);
        columns.push(restricted.iter().map(|(_, d)| *d).collect());
    }
    let r = curves.len();
    let matrix: Vec<Vec<usize>> = (0..r)
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    // Left kernel of A: rows of Aᵗ are the point classes.
    let rows: Vec<Vec<FieldElement>> = columns
        .iter()
        .map(|col| col.iter().map(|&a| ctx.from_i64(a as i64)).collect())
        .collect();
    let kernel = if rows.is_empty() {
        identity_basis(&ctx, r)
    } else {
        ExactMatrix::from_rows(&ctx, r, rows).nullspace()?
    };
    let restricted_check = match omega {
        None => None,
        Some(omega) => {
            let data = CofactorData::new(omega, curves)?;
            let mut ok = true;
            for beta in &kernel {
                let mut acc = Polynomial::zero(&ctx, Arity::Projective);
                for (b, k) in beta.iter().zip(&data.cofactors) {
                    acc = &acc + &k.scale(b);
                }
                ok &= restrict_polynomial(&acc, Var::Z).is_zero();
            }
            Some(ok)
        }
    };
    Ok(Incidence {
        point_classes,
        matrix,
        kernel,
        restricted_check,
    })
}

fn identity_basis(ctx: &FieldContext, n: usize) -> Vec<Vec<FieldElement>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ctx.one() } else { ctx.zero() })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    /// `α_0 = 1`: `Π C_i^{α_i}` is an integrating factor.
    IntegratingFactor,
    /// `α_0 = 0`: `Π C_i^{α_i}` is a first integral.
    FirstIntegral,
}

/// An exact relation `Σ α_i K_i + α_0 dω = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub curve_names: Vec<String>,
    /// `(α_1, …, α_r, α_0)`.
    pub alphas: Vec<FieldElement>,
    pub kind: CertificateKind,
}

impl Certificate {
    pub fn alpha0(&self) -> &FieldElement {
        self.alphas.last().expect("nonempty")
    }

    /// `Σ α_i K_i + α_0 dω`, recomputed from scratch.
    pub fn residual(&self, omega: &DifferentialForm, curves: &[Curve]) -> Result<Polynomial, EtaError> {
        let data = CofactorData::new(omega, curves)?;
        let mut acc = data.curl.scale(self.alpha0());
        for (a, k) in self.alphas.iter().zip(&data.cofactors) {
            acc = &acc + &k.scale(a);
        }
        Ok(acc)
    }

    pub fn verify(&self, omega: &DifferentialForm, curves: &[Curve]) -> Result<bool, EtaError> {
        Ok(self.residual(omega, curves)?.is_zero())
    }

    /// Cleared form of `d(μω) = 0` for `μ = Π C_i^{α_i}` (or of
    /// `dH ∧ ω = 0` for a first integral), using the wedges `dC_i ∧ ω`
    /// directly instead of the cofactors:
    /// `α_0 (Π C_j) dω + Σ_i α_i (dC_i ∧ ω) Π_{j≠i} C_j = 0`.
    pub fn cleared_residual(&self, omega: &DifferentialForm, curves: &[Curve]) -> Result<Polynomial, EtaError> {
        let omega = homogeneous_form(omega)?;
        let ctx = omega.context().clone();
        let one = Polynomial::from_i64(&ctx, Arity::Projective, 1);
        let product = curves
            .iter()
            .try_fold(one.clone(), |acc, c| acc.checked_mul(&c.poly))?;
        let mut acc = product.checked_mul(&omega.curl().0)?.scale(self.alpha0());
        for (i, (a, c)) in self.alphas.iter().zip(curves).enumerate() {
            let wedge = omega.wedge_with_dc(&c.poly)?.0;
            let others = curves
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .try_fold(one.clone(), |acc, (_, d)| acc.checked_mul(&d.poly))?;
            acc = acc.checked_add(&wedge.checked_mul(&others)?.scale(a))?;
        }
        Ok(acc)
    }

    /// Primitive integer relation with positive first nonzero entry (ℚ only).
    pub fn integer_relation(&self) -> Option<Vec<BigInt>> {
        canonical_integer_vector(&self.alphas)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .alphas
            .iter()
            .zip(self.curve_names.iter().map(|n| format!("K_{n}")).chain(["dω".to_string()]))
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, name)| format!("({a})*{name}"))
            .collect();
        write!(f, "{} = 0", terms.join(" + "))
    }
}

/// Searches the exact nullspace of the coefficient matrix of
/// `K_1, …, K_r, dω`, preferring relations with `α_0 ≠ 0`.
pub fn certificate_search(omega: &DifferentialForm, curves: &[Curve]) -> Result<Option<Certificate>, EtaError> {
    let data = CofactorData::new(omega, curves)?;
    let ctx = data.omega.context().clone();
    let d = data.omega.degree;
    let monos = Monomial::of_degree(d.saturating_sub(1), Arity::Projective);
    let polys: Vec<&Polynomial> = data.cofactors.iter().chain([&data.curl]).collect();
    let rows: Vec<Vec<FieldElement>> = monos
        .iter()
        .map(|m| polys.iter().map(|p| p.coeff(m)).collect())
        .collect();
    let kernel = ExactMatrix::from_rows(&ctx, polys.len(), rows).nullspace()?;
    let names: Vec<String> = curves.iter().map(|c| c.name.clone()).collect();
    if let Some(v) = kernel.iter().find(|v| !v.last().expect("nonempty").is_zero()) {
        let inv = v.last().unwrap().inv().expect("nonzero");
        return Ok(Some(Certificate {
            curve_names: names,
            alphas: v.iter().map(|a| a * &inv).collect(),
            kind: CertificateKind::IntegratingFactor,
        }));
    }
    Ok(kernel.into_iter().next().map(|v| {
        let lead = v.iter().find(|a| !a.is_zero()).expect("kernel vector").inv().unwrap();
        Certificate {
            curve_names: names,
            alphas: v.iter().map(|a| a * &lead).collect(),
            kind: CertificateKind::FirstIntegral,
        }
    }))
}

/// Kernel of the matrix of non-degenerate η rows: candidate coefficient
/// vectors for a certificate.
pub fn eta_reasoning(rows: &[RatioVector]) -> Result<Vec<Vec<FieldElement>>, EtaError> {
    let rows: Vec<&RatioVector> = rows.iter().filter(|r| !r.is_degenerate()).collect();
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let ctx = first.entries()[0].context();
    let cols = first.len();
    let data: Vec<Vec<FieldElement>> = rows.iter().map(|r| r.entries().to_vec()).collect();
    Ok(ExactMatrix::from_rows(&ctx, cols, data).nullspace()?)
}

/// Primitive integer vector with positive first nonzero entry, for rational
/// vectors.
pub fn canonical_integer_vector(v: &[FieldElement]) -> Option<Vec<BigInt>> {
    let rats = v
        .iter()
        .map(|e| e.as_rational().cloned())
        .collect::<Option<Vec<_>>>()?;
    let lcm = rats.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let ints: Vec<BigInt> = rats.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() {
        return Some(ints);
    }
    let sign = ints.iter().find(|c| !c.is_zero()).map_or(BigInt::one(), |c| {
        if c.is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        }
    });
    Some(ints.into_iter().map(|c| c / &g * &sign).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_polynomial;

    fn q() -> FieldContext {
        FieldContext::Rationals
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn projective_equality() {
        let a = RatioVector::from_i64(&q(), &[2, 4, 6]);
        let b = RatioVector::from_i64(&q(), &[1, 2, 3]);
        let c = RatioVector::from_i64(&q(), &[1, 2, 4]);
        let z = RatioVector::from_i64(&q(), &[0, 0, 0]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, z);
        assert_eq!(z, RatioVector::from_i64(&q(), &[0, 0, 0]));
        assert!(z.matches_or_degenerate(&a));
        assert_eq!(a.to_string(), "(2:4:6)");
    }

    #[test]
    fn single_and_pair_predictions() {
        let ctx = q();
        assert_eq!(predicted_eta_single(&ctx, 1, 1, 2), RatioVector::from_i64(&ctx, &[1, 1]));
        assert_eq!(predicted_eta_single(&ctx, 5, 3, 15), RatioVector::from_i64(&ctx, &[15, 8]));
        assert_eq!(predicted_eta_single(&ctx, 2, 1, 4), RatioVector::from_i64(&ctx, &[4, 3]));
        assert_eq!(
            predicted_eta_pair(&ctx, 2, 2, 2, 1).unwrap(),
            RatioVector::from_i64(&ctx, &[2, 2, 3])
        );
        assert_eq!(
            predicted_eta_pair(&ctx, 1, 2, 1, 1).unwrap(),
            RatioVector::from_i64(&ctx, &[1, 2, 2])
        );
        assert!(matches!(
            predicted_eta_pair(&ctx, 1, 1, 1, 1),
            Err(EtaError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn eta_reasoning_kernels() {
        let ctx = q();
        let cases: [(&[&[i64]], &[i64]); 3] = [
            (&[&[0, 6, 5], &[2, 2, 3], &[1, 4, 4]], &[4, 5, -6]),
            (&[&[0, 1, 1], &[1, 3, 2]], &[1, -1, 1]),
            (&[&[0, 1, 1], &[2, 2, 3]], &[1, 2, -2]),
        ];
        for (rows, expected) in cases {
            let rows: Vec<RatioVector> = rows.iter().map(|r| RatioVector::from_i64(&ctx, r)).collect();
            let ker = eta_reasoning(&rows).unwrap();
            assert_eq!(ker.len(), 1);
            assert_eq!(canonical_integer_vector(&ker[0]).unwrap(), ints(expected));
        }
    }

    #[test]
    fn degenerate_rows_are_dropped() {
        let ctx = q();
        let rows = vec![
            RatioVector::from_i64(&ctx, &[0, 0]),
            RatioVector::from_i64(&ctx, &[6, 5]),
        ];
        let ker = eta_reasoning(&rows).unwrap();
        assert_eq!(canonical_integer_vector(&ker[0]).unwrap(), ints(&[5, -6]));
    }

    #[test]
    fn incidence_two_lines_through_one_point() {
        // Parallel lines y = x and y = x + 1 meet z = 0 in (1:1:0).
        let ctx = q();
        let l1 = Curve::new("L1", parse_polynomial("y - x").unwrap()).unwrap();
        let l2 = Curve::new("L2", parse_polynomial("y - x - 1").unwrap()).unwrap();
        // ω = L1·L2 dx: cofactors −L2 and −L1, whose difference is z.
        let p = l1.poly.checked_mul(&l2.poly).unwrap().dehomogenize(Var::Z);
        let omega = DifferentialForm::new(p.clone(), Polynomial::zero(&ctx, Arity::Affine), 2).unwrap();
        let inc = infinity_incidence_relation(&[l1, l2], Some(&omega)).unwrap();
        assert_eq!(inc.matrix, vec![vec![1], vec![1]]);
        assert_eq!(inc.kernel.len(), 1);
        assert_eq!(canonical_integer_vector(&inc.kernel[0]).unwrap(), ints(&[1, -1]));
        assert_eq!(inc.restricted_check, Some(true));
    }

    #[test]
    fn incidence_three_curves() {
        // Lines through (1:0:0) and (0:1:0): x·y-type incidences
        // A = [[1,1],[2,0],[0,2]].
        let c1 = Curve::new("C1", parse_polynomial("x*y + 1").unwrap()).unwrap();
        let c2 = Curve::new("C2", parse_polynomial("x^2 + y").unwrap()).unwrap();
        let c3 = Curve::new("C3", parse_polynomial("y^2 + x").unwrap()).unwrap();
        let inc = infinity_incidence_relation(&[c1, c2, c3], None).unwrap();
        let mut m = inc.matrix.clone();
        // Column order depends on the base; normalise by sorting columns.
        let cols: Vec<Vec<usize>> = {
            let mut cols: Vec<Vec<usize>> = (0..m[0].len()).map(|j| m.iter().map(|r| r[j]).collect()).collect();
            cols.sort();
            cols
        };
        m = (0..3).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        assert_eq!(m, vec![vec![1, 1], vec![0, 2], vec![2, 0]]);
        assert_eq!(canonical_integer_vector(&inc.kernel[0]).unwrap(), ints(&[2, -1, -1]));
    }

    #[test]
    fn conic_tangent_to_infinity() {
        let c = Curve::new("P", parse_polynomial("y - x^2").unwrap()).unwrap();
        let inc = infinity_incidence_relation(&[c], None).unwrap();
        assert_eq!(inc.matrix, vec![vec![2]]);
        assert!(inc.kernel.is_empty());
    }

    #[test]
    fn hamiltonian_certificate_is_first_integral_or_divergence_free() {
        // ω = dH with H = x^2 + y^2 - 1: dω = 0 and K_H = 0.
        let h = parse_polynomial("x^2 + y^2 - 1").unwrap();
        let omega = DifferentialForm::new(h.partial(Var::X), h.partial(Var::Y), 1).unwrap();
        let c = Curve::new("H", h).unwrap();
        let cert = certificate_search(&omega, std::slice::from_ref(&c)).unwrap().unwrap();
        assert!(cert.verify(&omega, std::slice::from_ref(&c)).unwrap());
        assert!(cert.cleared_residual(&omega, &[c]).unwrap().is_zero());
    }

    #[test]
    fn tangency_example_cofactor() {
        // y - x^2 is integral for ω = -2y dx + x dy with cofactor 2 after
        // homogenization: K = 2z.
        let c = Curve::new("C", parse_polynomial("y - x^2").unwrap()).unwrap();
        let omega = DifferentialForm::new(
            parse_polynomial("-2*y").unwrap(),
            parse_polynomial("x").unwrap(),
            1,
        )
        .unwrap();
        let data = CofactorData::new(&omega, std::slice::from_ref(&c)).unwrap();
        assert_eq!(data.cofactors[0].to_string(), "2");
        // dω = 3: relation 3K - 2dω = 0.
        let cert = certificate_search(&omega, std::slice::from_ref(&c)).unwrap().unwrap();
        assert_eq!(cert.integer_relation().unwrap(), ints(&[3, -2]));
        assert!(cert.cleared_residual(&omega, &[c]).unwrap().is_zero());
    }

    #[test]
    fn infinity_hypothesis_boundary() {
        // Four lines through distinct infinity points, d = 3: k = 4 = d + 1.
        let lines: Vec<Curve> = ["x", "y", "x - y", "x + y"]
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let p = parse_polynomial(&format!("{s} + {}", i + 1)).unwrap();
                Curve::new(format!("L{i}"), p).unwrap()
            })
            .collect();
        let refs: Vec<&Curve> = lines.iter().collect();
        let u = Curve::union("U", &refs).unwrap();
        let h = u.poly.dehomogenize(Var::Z);
        // ω = dH has every line as an integral curve.
        let omega = DifferentialForm::new(h.partial(Var::X), h.partial(Var::Y), 3).unwrap();
        assert!(matches!(
            eta_at_infinity(&omega, &lines, &[]),
            Err(EtaError::HypothesisViolated(_))
        ));
    }
}
