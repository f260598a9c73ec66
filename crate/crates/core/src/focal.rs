//! Focal values of a center-focus candidate: equilibria, normalization of the
//! linear part, the degree-by-degree construction of
//! `F = x² + y² + f_3 + f_4 + …` with
//! `F_x Q − F_y P = Σ s_j (x^{2j+2} + y^{2j+2})`, and the Jacobian of
//! `(s_1, …, s_N)` along perturbation directions via dual numbers.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::darboux::{hilbert_stabilization, DarbouxError};
use crate::field::{FieldContext, FieldElement, FieldError};
use crate::linalg::{ExactMatrix, LinalgError};
use crate::poly::{Arity, DifferentialForm, Monomial, PolyError, Polynomial, Var};
use crate::univariate::{interpolate, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FocalError {
    #[error("P and Q share a common factor: the zero set is not finite")]
    PositiveDimensionalZeroSet,
    #[error("the point is not an equilibrium")]
    NotEquilibrium,
    #[error("not a center candidate (trace {trace}, determinant {determinant})")]
    NotCenterCandidate { trace: String, determinant: String },
    #[error("the determinant of the linear part has no square root in this field")]
    SquareRootUnavailable,
    #[error("characteristic {p} is too small for {n} focal values (need p > {needed})")]
    CharacteristicTooSmall { p: u64, n: usize, needed: usize },
    #[error("linear part is not of the form c·x dx + c·y dy")]
    NotNormalForm,
    #[error("internal solve failure in degree {0}")]
    SolveFailure(u32),
    #[error("equilibria can only be enumerated over ℚ or a prime field")]
    UnsupportedField,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
}

/// `P = c·x + p`, `Q = c·y + q` with `p, q` of order at least two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub c: FieldElement,
    pub p: Polynomial,
    pub q: Polynomial,
    pub degree: u32,
}

impl NormalForm {
    pub fn new(c: FieldElement, p: Polynomial, q: Polynomial, degree: u32) -> Result<Self, FocalError> {
        if c.is_zero() {
            return Err(FocalError::NotNormalForm);
        }
        for h in [&p, &q] {
            if h.arity() != Arity::Affine || h.order().is_some_and(|o| o < 2) {
                return Err(FocalError::NotNormalForm);
            }
            if h.degree().is_some_and(|dg| dg > degree) {
                return Err(FocalError::NotNormalForm);
            }
        }
        Ok(NormalForm { c, p, q, degree })
    }

    /// Splits an affine form whose linear part is already `c(x dx + y dy)`.
    pub fn from_form(omega: &DifferentialForm) -> Result<Self, FocalError> {
        if omega.arity() != Arity::Affine {
            return Err(FocalError::NotNormalForm);
        }
        let ctx = omega.context().clone();
        let c = omega.p.coeff(&Monomial::new(1, 0, 0));
        let x = Polynomial::x(&ctx, Arity::Affine);
        let y = Polynomial::y(&ctx, Arity::Affine);
        let p = &omega.p - &x.scale(&c);
        let q = &omega.q - &y.scale(&c);
        NormalForm::new(c, p, q, omega.degree)
    }

    pub fn context(&self) -> &FieldContext {
        self.p.context()
    }

    pub fn form(&self) -> DifferentialForm {
        let ctx = self.context().clone();
        let x = Polynomial::x(&ctx, Arity::Affine);
        let y = Polynomial::y(&ctx, Arity::Affine);
        DifferentialForm {
            p: &x.scale(&self.c) + &self.p,
            q: &y.scale(&self.c) + &self.q,
            degree: self.degree,
        }
    }

    /// `(λP, λQ)`.
    pub fn scale(&self, lambda: &FieldElement) -> NormalForm {
        NormalForm {
            c: &self.c * lambda,
            p: self.p.scale(lambda),
            q: self.q.scale(lambda),
            degree: self.degree,
        }
    }

    pub fn to_context(&self, ctx: &FieldContext) -> Result<NormalForm, FocalError> {
        Ok(NormalForm {
            c: ctx.embed(&self.c)?,
            p: self.p.to_context(ctx)?,
            q: self.q.to_context(ctx)?,
            degree: self.degree,
        })
    }
}

/// Normalization of the kernel direction `(x² + y²)^{k/2}` in even degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Gauge {
    /// The coefficient of `x^k` in `f_k` is zero.
    #[default]
    XPowerZero,
    /// The coefficient of `y^k` in `f_k` is zero.
    YPowerZero,
}

impl Gauge {
    pub fn tag(&self) -> &'static str {
        match self {
            Gauge::XPowerZero => "even-degree f_k has zero x^k coefficient",
            Gauge::YPowerZero => "even-degree f_k has zero y^k coefficient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocalSequence {
    /// `(s_1, …, s_N)`.
    pub s: Vec<FieldElement>,
    /// `F = x² + y² + f_3 + … + f_{2N+2}`.
    pub f: Polynomial,
    pub gauge: Gauge,
}

impl FocalSequence {
    pub fn all_zero(&self) -> bool {
        self.s.iter().all(FieldElement::is_zero)
    }

    pub fn vanishing_pattern(&self) -> Vec<bool> {
        self.s.iter().map(FieldElement::is_zero).collect()
    }

    /// `F_x Q − F_y P − Σ s_j (x^{2j+2} + y^{2j+2})` truncated to degree
    /// `2N + 2`; zero when the sequence is correct.
    pub fn identity_residual(&self, nf: &NormalForm) -> Result<Polynomial, FocalError> {
        let omega = nf.form();
        let ctx = nf.context().clone();
        let mut lhs = self
            .f
            .partial(Var::X)
            .checked_mul(&omega.q)?
            .checked_sub(&self.f.partial(Var::Y).checked_mul(&omega.p)?)?;
        for (j, s) in self.s.iter().enumerate() {
            let k = 2 * j as u32 + 4;
            lhs = &lhs - &power_sum(&ctx, k).scale(s);
        }
        Ok(lhs.truncate(2 * self.s.len() as u32 + 3))
    }
}

/// `x^k + y^k`.
fn power_sum(ctx: &FieldContext, k: u32) -> Polynomial {
    Polynomial::from_terms(
        ctx,
        Arity::Affine,
        [
            (Monomial::new(k, 0, 0), ctx.one()),
            (Monomial::new(0, k, 0), ctx.one()),
        ],
    )
}

/// Computes `s_1, …, s_N`.
pub fn focal_values(nf: &NormalForm, n: usize, gauge: Gauge) -> Result<FocalSequence, FocalError> {
    let ctx = nf.context().clone();
    let p = ctx.characteristic();
    let needed = 2 * n + 4;
    if p != 0 && p <= needed as u64 {
        return Err(FocalError::CharacteristicTooSmall { p, n, needed });
    }
    let top = 2 * n as u32 + 2;
    let p_parts: Vec<Polynomial> = (0..=nf.degree).map(|m| nf.p.homogeneous_component(m)).collect();
    let q_parts: Vec<Polynomial> = (0..=nf.degree).map(|m| nf.q.homogeneous_component(m)).collect();
    // f[j] is the degree-j part of F.
    let mut f: Vec<Polynomial> = vec![Polynomial::zero(&ctx, Arity::Affine); top as usize + 1];
    f[2] = power_sum(&ctx, 2);
    let mut s = Vec::with_capacity(n);
    for k in 3..=top {
        // Contributions of lower f_j against the nonlinear part of ω.
        let mut rk = Polynomial::zero(&ctx, Arity::Affine);
        for j in 2..k {
            let m = k + 1 - j;
            if m < 2 || m > nf.degree {
                continue;
            }
            let fx = f[j as usize].partial(Var::X);
            let fy = f[j as usize].partial(Var::Y);
            rk = &rk + &(&(&fx * &q_parts[m as usize]) - &(&fy * &p_parts[m as usize]));
        }
        let even = k % 2 == 0;
        let unknowns = k as usize + 1 + usize::from(even);
        let monos: Vec<Monomial> = (0..=k).map(|a| Monomial::new(a, k - a, 0)).collect();
        let mut rows = vec![vec![ctx.zero(); unknowns]; k as usize + 1];
        // c·(y ∂_x − x ∂_y)(x^a y^{k−a}) = c·a x^{a−1}y^{k−a+1} − c·(k−a) x^{a+1}y^{k−a−1}.
        for a in 0..=k {
            if a >= 1 {
                rows[(a - 1) as usize][a as usize] = &nf.c * &ctx.from_i64(a as i64);
            }
            if a < k {
                rows[(a + 1) as usize][a as usize] = -(&nf.c * &ctx.from_i64((k - a) as i64));
            }
        }
        let mut rhs: Vec<FieldElement> = monos.iter().map(|m| -rk.coeff(m)).collect();
        if even {
            let col = k as usize + 1;
            rows[0][col] = ctx.from_i64(-1);
            rows[k as usize][col] = ctx.from_i64(-1);
            let mut gauge_row = vec![ctx.zero(); unknowns];
            match gauge {
                Gauge::XPowerZero => gauge_row[k as usize] = ctx.one(),
                Gauge::YPowerZero => gauge_row[0] = ctx.one(),
            }
            rows.push(gauge_row);
            rhs.push(ctx.zero());
        }
        let sol = ExactMatrix::from_rows(&ctx, unknowns, rows)
            .solve(&rhs)
            .map_err(|e| match e {
                LinalgError::NoSolution => FocalError::SolveFailure(k),
                other => FocalError::Linalg(other),
            })?;
        if !sol.kernel.is_empty() {
            return Err(FocalError::SolveFailure(k));
        }
        let v = sol.particular;
        f[k as usize] = Polynomial::from_terms(
            &ctx,
            Arity::Affine,
            monos.iter().zip(&v).map(|(m, c)| (*m, c.clone())),
        );
        if even {
            s.push(v[k as usize + 1].clone());
        }
    }
    let f = f.iter().fold(Polynomial::zero(&ctx, Arity::Affine), |acc, fk| &acc + fk);
    Ok(FocalSequence { s, f, gauge })
}

/// Jacobian of `s_j` in the parameter directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocalJacobian {
    /// `matrix[j][k] = ∂s_{j+1}/∂θ_k`.
    pub matrix: Vec<Vec<FieldElement>>,
    pub rank: usize,
    pub directions: usize,
}

impl FocalJacobian {
    /// Dimension of the tangent space in the chosen ambient: `M − rank`.
    pub fn tangent_dimension(&self) -> usize {
        self.directions - self.rank
    }
}

/// A perturbation `(p, q) ↦ (p + θ·dp, q + θ·dq)` of a normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Direction {
    pub label: String,
    pub dp: Polynomial,
    pub dq: Polynomial,
}

/// All monomial perturbations of `p` and `q` in degrees `2..=d`
/// (`14` directions for `d = 3`).
pub fn default_ambient(ctx: &FieldContext, d: u32) -> Vec<Direction> {
    let zero = Polynomial::zero(ctx, Arity::Affine);
    let mut out = Vec::new();
    for (target, name) in [(0, "p"), (1, "q")] {
        for k in 2..=d {
            for m in Monomial::of_degree(k, Arity::Affine) {
                let mono = Polynomial::monomial(ctx, Arity::Affine, m, ctx.one());
                let label = format!("{name}:x^{}*y^{}", m.exp(Var::X), m.exp(Var::Y));
                let (dp, dq) = if target == 0 {
                    (mono, zero.clone())
                } else {
                    (zero.clone(), mono)
                };
                out.push(Direction { label, dp, dq });
            }
        }
    }
    out
}

/// Derivatives of `(s_1, …, s_N)` along each direction at `nf`, computed by
/// running the focal recursion over dual numbers `nf + ε·direction`.
pub fn focal_jacobian(nf: &NormalForm, directions: &[Direction], n: usize) -> Result<FocalJacobian, FocalError> {
    let base = nf.context().clone();
    let dual = FieldContext::dual(base.clone());
    let columns: Vec<Vec<FieldElement>> = directions
        .par_iter()
        .map(|dir| -> Result<Vec<FieldElement>, FocalError> {
            let lift = |poly: &Polynomial, delta: &Polynomial| -> Result<Polynomial, FocalError> {
                let mut out = poly.to_context(&dual)?;
                for (m, c) in delta.terms() {
                    let e = dual.dual_element(base.zero(), base.embed(c)?)?;
                    out = &out + &Polynomial::monomial(&dual, Arity::Affine, *m, e);
                }
                Ok(out)
            };
            let degree = [&dir.dp, &dir.dq]
                .iter()
                .filter_map(|d| d.degree())
                .fold(nf.degree, u32::max);
            let lifted = NormalForm {
                c: dual.embed(&nf.c)?,
                p: lift(&nf.p, &dir.dp)?,
                q: lift(&nf.q, &dir.dq)?,
                degree,
            };
            let seq = focal_values(&lifted, n, Gauge::default())?;
            Ok(seq
                .s
                .iter()
                .map(|s| s.eps_part().cloned().unwrap_or_else(|| base.zero()))
                .collect())
        })
        .collect::<Result<_, _>>()?;
    let matrix: Vec<Vec<FieldElement>> = (0..n)
        .map(|j| columns.iter().map(|col| col[j].clone()).collect())
        .collect();
    let rank = if directions.is_empty() {
        0
    } else {
        ExactMatrix::from_rows(&base, directions.len(), matrix.clone()).rank()?
    };
    Ok(FocalJacobian {
        matrix,
        rank,
        directions: directions.len(),
    })
}

/// Affine form over its own coordinates (dehomogenizing projective input).
fn affine_form(omega: &DifferentialForm) -> DifferentialForm {
    match omega.arity() {
        Arity::Affine => omega.clone(),
        Arity::Projective => DifferentialForm {
            p: omega.p.dehomogenize(Var::Z),
            q: omega.q.dehomogenize(Var::Z),
            degree: omega.degree,
        },
    }
}

fn ensure_finite_zero_set(p: &Polynomial, q: &Polynomial) -> Result<(), FocalError> {
    if p.is_zero() || q.is_zero() {
        return Err(FocalError::PositiveDimensionalZeroSet);
    }
    let ph = p.homogenize(p.degree().unwrap_or(0))?;
    let qh = q.homogenize(q.degree().unwrap_or(0))?;
    let e = ph.degree().unwrap_or(0).max(qh.degree().unwrap_or(0));
    match hilbert_stabilization(&[ph, qh], e) {
        Ok(_) => Ok(()),
        Err(DarbouxError::NotFinite { .. }) => Err(FocalError::PositiveDimensionalZeroSet),
        Err(e) => Err(e.into()),
    }
}

/// `P(a, y)` as a univariate polynomial in `y`.
fn restrict_x(poly: &Polynomial, a: &FieldElement) -> UniPoly {
    let ctx = a.context();
    let dy = poly.degree_in(Var::Y).unwrap_or(0) as usize;
    let mut coeffs = vec![ctx.zero(); dy + 1];
    for (m, c) in poly.terms() {
        let term = &ctx.embed(c).expect("coefficient embeds") * &a.pow(m.exp(Var::X) as u64);
        let slot = m.exp(Var::Y) as usize;
        coeffs[slot] = &coeffs[slot] + &term;
    }
    UniPoly::new(&ctx, coeffs)
}

/// Common zeros of `P` and `Q` in the affine plane over the base field:
/// exhaustive over `𝔽_p`, via the resultant in `y` and rational roots over ℚ.
/// Sorted by coordinates.
pub fn equilibria(omega: &DifferentialForm) -> Result<Vec<[FieldElement; 2]>, FocalError> {
    let omega = affine_form(omega);
    let (p, q) = (&omega.p, &omega.q);
    ensure_finite_zero_set(p, q)?;
    let ctx = omega.context().clone();
    let mut out = match &ctx {
        FieldContext::Prime(modulus) => {
            let mut pts = Vec::new();
            for xv in 0..*modulus {
                let a = ctx.from_i64(xv as i64);
                let g = restrict_x(p, &a).gcd(&restrict_x(q, &a));
                if g.is_zero() {
                    return Err(FocalError::PositiveDimensionalZeroSet);
                }
                if g.degree().unwrap_or(0) > 0 {
                    for b in g.roots_prime_field() {
                        pts.push([a.clone(), b]);
                    }
                }
            }
            pts
        }
        FieldContext::Rationals => rational_equilibria(p, q)?,
        _ => return Err(FocalError::UnsupportedField),
    };
    out.sort_by(|a, b| compare_elements(&a[0], &b[0]).then_with(|| compare_elements(&a[1], &b[1])));
    Ok(out)
}

fn compare_elements(a: &FieldElement, b: &FieldElement) -> std::cmp::Ordering {
    match (a.as_rational(), b.as_rational()) {
        (Some(x), Some(y)) => x.cmp(y),
        _ => a.to_i64().cmp(&b.to_i64()),
    }
}

fn rational_equilibria(p: &Polynomial, q: &Polynomial) -> Result<Vec<[FieldElement; 2]>, FocalError> {
    let ctx = FieldContext::Rationals;
    let m = p.degree_in(Var::Y).unwrap_or(0) as usize;
    let n = q.degree_in(Var::Y).unwrap_or(0) as usize;
    // deg Res_y(P, Q) ≤ deg P · deg Q.
    let bound = (p.degree().unwrap_or(0) * q.degree().unwrap_or(0)) as usize;
    let xs: Vec<FieldElement> = (0..=bound as i64).map(|v| ctx.from_i64(v)).collect();
    let ys = xs
        .iter()
        .map(|a| sylvester_resultant(&restrict_x(p, a), m, &restrict_x(q, a), n))
        .collect::<Result<Vec<_>, _>>()?;
    let res = interpolate(&ctx, &xs, &ys);
    if res.is_zero() {
        return Err(FocalError::PositiveDimensionalZeroSet);
    }
    let mut pts = Vec::new();
    for root in res.rational_roots() {
        let a = FieldElement::Rational(root);
        let g = restrict_x(p, &a).gcd(&restrict_x(q, &a));
        if g.is_zero() {
            return Err(FocalError::PositiveDimensionalZeroSet);
        }
        for b in g.rational_roots() {
            pts.push([a.clone(), FieldElement::Rational(b)]);
        }
    }
    Ok(pts)
}

/// Determinant of the Sylvester matrix with formal degrees `m`, `n`.
fn sylvester_resultant(f: &UniPoly, m: usize, g: &UniPoly, n: usize) -> Result<FieldElement, FocalError> {
    let ctx = f.context().clone();
    let size = m + n;
    if size == 0 {
        return Ok(ctx.one());
    }
    let coeff = |h: &UniPoly, i: usize| h.coeffs().get(i).cloned().unwrap_or_else(|| ctx.zero());
    let mut rows = Vec::with_capacity(size);
    for shift in 0..n {
        let mut row = vec![ctx.zero(); size];
        for i in 0..=m {
            row[shift + i] = coeff(f, m - i);
        }
        rows.push(row);
    }
    for shift in 0..m {
        let mut row = vec![ctx.zero(); size];
        for i in 0..=n {
            row[shift + i] = coeff(g, n - i);
        }
        rows.push(row);
    }
    Ok(ExactMatrix::from_rows(&ctx, size, rows).determinant()?)
}

/// Linearization `A = [[Q_x, Q_y], [−P_x, −P_y]]` of `ẋ = Q, ẏ = −P`.
pub fn linearization(omega: &DifferentialForm, point: &[FieldElement; 2]) -> Result<[[FieldElement; 2]; 2], FocalError> {
    let omega = affine_form(omega);
    let ev = |h: &Polynomial| h.evaluate(point);
    Ok([
        [ev(&omega.q.partial(Var::X))?, ev(&omega.q.partial(Var::Y))?],
        [-ev(&omega.p.partial(Var::X))?, -ev(&omega.p.partial(Var::Y))?],
    ])
}

/// The affine change `(x, y) = origin + M·(u, v)` used by [`normalize_at`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transform {
    pub origin: [FieldElement; 2],
    pub matrix: [[FieldElement; 2]; 2],
}

/// Moves an equilibrium with `tr A = 0`, `det A ≠ 0` to the origin and
/// brings the linear part to `c(x dx + y dy)`. The form is first mapped
/// into the point's field.
pub fn normalize_at(
    omega: &DifferentialForm,
    point: &[FieldElement; 2],
) -> Result<(NormalForm, Transform), FocalError> {
    let ctx = point[0].context();
    let omega = affine_form(omega).to_context(&ctx)?;
    if !omega.p.evaluate(point)?.is_zero() || !omega.q.evaluate(point)?.is_zero() {
        return Err(FocalError::NotEquilibrium);
    }
    let a = linearization(&omega, point)?;
    let trace = &a[0][0] + &a[1][1];
    let det = &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]);
    if !trace.is_zero() || det.is_zero() {
        return Err(FocalError::NotCenterCandidate {
            trace: trace.to_string(),
            determinant: det.to_string(),
        });
    }
    // The linear part is d(½ vᵀ J v) with J = [[P_x, P_y], [Q_x, Q_y]],
    // symmetric because the trace vanishes; det J = det A.
    let (alpha, beta, gamma) = (-&a[1][0], a[0][0].clone(), a[0][1].clone());
    let zero = ctx.zero();
    let one = ctx.one();
    // Pre-transform so that the x² coefficient is nonzero.
    let pre: [[FieldElement; 2]; 2] = if !alpha.is_zero() {
        [[one.clone(), zero.clone()], [zero.clone(), one.clone()]]
    } else if !gamma.is_zero() {
        [[zero.clone(), one.clone()], [one.clone(), zero.clone()]]
    } else {
        [[one.clone(), zero.clone()], [one.clone(), one.clone()]]
    };
    let j = [[alpha, beta.clone()], [beta, gamma]];
    let j1 = congruence(&j, &pre);
    let (al, be) = (j1[0][0].clone(), j1[0][1].clone());
    let s = det.sqrt().ok_or(FocalError::SquareRootUnavailable)?;
    let s_inv = s.inv()?;
    // Mᵀ J M = α·I for M = [[1, −β/s], [0, α/s]].
    let m = [[one.clone(), -(&be * &s_inv)], [zero.clone(), &al * &s_inv]];
    let total = mat_mul(&pre, &m);
    let x = Polynomial::x(&ctx, Arity::Affine);
    let y = Polynomial::y(&ctx, Arity::Affine);
    let img = |row: usize| -> Polynomial {
        &(&x.scale(&total[row][0]) + &y.scale(&total[row][1]))
            + &Polynomial::constant(point[row].clone(), Arity::Affine)
    };
    let images = [img(0), img(1)];
    let ps = omega.p.substitute(&images)?;
    let qs = omega.q.substitute(&images)?;
    // (P', Q')ᵀ = Mᵀ (P, Q)ᵀ.
    let p_new = &ps.scale(&total[0][0]) + &qs.scale(&total[1][0]);
    let q_new = &ps.scale(&total[0][1]) + &qs.scale(&total[1][1]);
    let transformed = DifferentialForm::new(p_new, q_new, omega.degree)?;
    let nf = NormalForm::from_form(&transformed)?;
    if nf.c != al {
        return Err(FocalError::NotNormalForm);
    }
    Ok((
        nf,
        Transform {
            origin: point.clone(),
            matrix: total,
        },
    ))
}

fn mat_mul(a: &[[FieldElement; 2]; 2], b: &[[FieldElement; 2]; 2]) -> [[FieldElement; 2]; 2] {
    let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// `Mᵀ J M`.
fn congruence(j: &[[FieldElement; 2]; 2], m: &[[FieldElement; 2]; 2]) -> [[FieldElement; 2]; 2] {
    let mt = [[m[0][0].clone(), m[1][0].clone()], [m[0][1].clone(), m[1][1].clone()]];
    mat_mul(&mt, &mat_mul(j, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_in;

    fn form(ctx: &FieldContext, p: &str, q: &str, d: u32) -> DifferentialForm {
        DifferentialForm::new(
            parse_in(p, ctx, Arity::Affine).unwrap(),
            parse_in(q, ctx, Arity::Affine).unwrap(),
            d,
        )
        .unwrap()
    }

    #[test]
    fn equilibria_simple() {
        let q = FieldContext::Rationals;
        let pts = equilibria(&form(&q, "x", "y", 1)).unwrap();
        assert_eq!(pts, vec![[q.zero(), q.zero()]]);
        let pts = equilibria(&form(&q, "x - 1", "y - 2", 1)).unwrap();
        assert_eq!(pts, vec![[q.from_i64(1), q.from_i64(2)]]);
        let f7 = FieldContext::Prime(7);
        let pts = equilibria(&form(&f7, "x^2 - 1", "y", 2)).unwrap();
        assert_eq!(pts, vec![[f7.from_i64(1), f7.zero()], [f7.from_i64(6), f7.zero()]]);
        assert_eq!(
            equilibria(&form(&q, "x*y", "x*(y + 1)", 2)),
            Err(FocalError::PositiveDimensionalZeroSet)
        );
    }

    #[test]
    fn rational_equilibria_of_cubic_system() {
        // P = (x - 1/2)(y + 3), Q = (y + 3)·x + x^2 - 1/4 … choose a system
        // with known rational zeros: P = x^2 - 1/4, Q = y^2 - 9.
        let q = FieldContext::Rationals;
        let pts = equilibria(&form(&q, "x^2 - 1/4", "y^2 - 9", 2)).unwrap();
        let r = |n, d| FieldElement::rational(n, d);
        assert_eq!(
            pts,
            vec![
                [r(-1, 2), r(-3, 1)],
                [r(-1, 2), r(3, 1)],
                [r(1, 2), r(-3, 1)],
                [r(1, 2), r(3, 1)]
            ]
        );
    }

    #[test]
    fn normal_form_identity_and_scalar() {
        let q = FieldContext::Rationals;
        let origin = [q.zero(), q.zero()];
        let (nf, t) = normalize_at(&form(&q, "x + x^2", "y", 2), &origin).unwrap();
        assert_eq!(nf.c, q.one());
        assert_eq!(nf.p.to_string(), "x^2");
        assert_eq!(t.matrix[0][0], q.one());
        let (nf, _) = normalize_at(&form(&q, "2*x + y^2", "2*y", 2), &origin).unwrap();
        assert_eq!(nf.c, q.from_i64(2));
        assert!(matches!(
            normalize_at(&form(&q, "x", "x + y", 1), &origin),
            Err(FocalError::NotCenterCandidate { .. })
        ));
        assert_eq!(
            normalize_at(&form(&q, "x + 1", "y", 1), &origin),
            Err(FocalError::NotEquilibrium)
        );
    }

    #[test]
    fn normalization_needs_square_root() {
        // Linear part x dx − ... with det J = 2 over ℚ: 2x dx + y dy.
        let q = FieldContext::Rationals;
        let origin = [q.zero(), q.zero()];
        assert_eq!(
            normalize_at(&form(&q, "2*x", "y", 1), &origin),
            Err(FocalError::SquareRootUnavailable)
        );
        let (nf, _) = normalize_at(&form(&q, "2*x", "8*y", 1), &origin).unwrap();
        assert_eq!(nf.form().q.to_string(), "2*y");
    }

    #[test]
    fn hamiltonian_focal_values_vanish() {
        // ω = dH with H = (x²+y²)/2 + x³ − x y² + y⁴.
        let q = FieldContext::Rationals;
        let omega = form(&q, "x + 3*x^2 - y^2", "y - 2*x*y + 4*y^3", 3);
        let nf = NormalForm::from_form(&omega).unwrap();
        let seq = focal_values(&nf, 6, Gauge::XPowerZero).unwrap();
        assert!(seq.all_zero());
        assert!(seq.identity_residual(&nf).unwrap().is_zero());
    }

    #[test]
    fn generic_perturbation_has_nonzero_first_focal_value() {
        let f = FieldContext::Prime(10007);
        let omega = form(&f, "x + x^2 + 3*x*y", "y + 2*y^2 - x^2", 2);
        let nf = NormalForm::from_form(&omega).unwrap();
        let seq = focal_values(&nf, 3, Gauge::XPowerZero).unwrap();
        assert!(!seq.s[0].is_zero());
        assert!(seq.identity_residual(&nf).unwrap().is_zero());
        // Independent oracle: one dense solve through degree 4.
        assert_eq!(seq.s[0], dense_s1(&nf));
    }

    /// Solves for f_3, f_4, s_1 in one linear system.
    fn dense_s1(nf: &NormalForm) -> FieldElement {
        let ctx = nf.context().clone();
        let omega = nf.form();
        let m3: Vec<Monomial> = Monomial::of_degree(3, Arity::Affine);
        let m4: Vec<Monomial> = Monomial::of_degree(4, Arity::Affine);
        let n_unknowns = m3.len() + m4.len() + 1;
        let f2 = power_sum(&ctx, 2);
        let base = &(&f2.partial(Var::X) * &omega.q) - &(&f2.partial(Var::Y) * &omega.p);
        // Column polynomials: contribution of each unknown to F_xQ − F_yP − s(x⁴+y⁴).
        let mut cols: Vec<Polynomial> = Vec::new();
        for m in m3.iter().chain(&m4) {
            let g = Polynomial::monomial(&ctx, Arity::Affine, *m, ctx.one());
            cols.push(&(&g.partial(Var::X) * &omega.q) - &(&g.partial(Var::Y) * &omega.p));
        }
        cols.push(-power_sum(&ctx, 4));
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for m in m3.iter().chain(&m4) {
            rows.push(cols.iter().map(|c| c.coeff(m)).collect::<Vec<_>>());
            rhs.push(-base.coeff(m));
        }
        let mut gauge = vec![ctx.zero(); n_unknowns];
        let x4 = m3.len() + m4.iter().position(|m| *m == Monomial::new(4, 0, 0)).unwrap();
        gauge[x4] = ctx.one();
        rows.push(gauge);
        rhs.push(ctx.zero());
        let sol = ExactMatrix::from_rows(&ctx, n_unknowns, rows).solve(&rhs).unwrap();
        assert!(sol.kernel.is_empty());
        sol.particular[n_unknowns - 1].clone()
    }

    #[test]
    fn gauge_independence_and_scaling() {
        let f = FieldContext::Prime(10007);
        let omega = form(&f, "x + x^2 + 3*x*y - y^3", "y + 2*y^2 - x^2 + x*y^2", 3);
        let nf = NormalForm::from_form(&omega).unwrap();
        let a = focal_values(&nf, 4, Gauge::XPowerZero).unwrap();
        let b = focal_values(&nf, 4, Gauge::YPowerZero).unwrap();
        assert_eq!(a.vanishing_pattern(), b.vanishing_pattern());
        assert!(b.identity_residual(&nf).unwrap().is_zero());
        let lambda = f.from_i64(17);
        let scaled = focal_values(&nf.scale(&lambda), 4, Gauge::XPowerZero).unwrap();
        for (s, t) in a.s.iter().zip(&scaled.s) {
            assert_eq!(&(s * &lambda), t);
        }
    }

    #[test]
    fn characteristic_guard() {
        let f = FieldContext::Prime(11);
        let nf = NormalForm::from_form(&form(&f, "x + x^2", "y", 2)).unwrap();
        assert!(matches!(
            focal_values(&nf, 4, Gauge::XPowerZero),
            Err(FocalError::CharacteristicTooSmall { .. })
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f = FieldContext::Prime(10007);
        let base = NormalForm::from_form(&form(&f, "x + x^2 + 3*x*y", "y + 2*y^2 - x^2", 2)).unwrap();
        let dir = Direction {
            label: "toy".into(),
            dp: parse_in("x*y", &f, Arity::Affine).unwrap(),
            dq: parse_in("y^2", &f, Arity::Affine).unwrap(),
        };
        let constant = Direction {
            label: "zero".into(),
            dp: Polynomial::zero(&f, Arity::Affine),
            dq: Polynomial::zero(&f, Arity::Affine),
        };
        let jac = focal_jacobian(&base, &[dir.clone(), constant], 3).unwrap();
        assert!(jac.matrix.iter().all(|row| row[1].is_zero()));
        // s_1 is affine-linear in a single parameter direction only to first
        // order; compare with the derivative of the interpolating polynomial
        // through enough parameter values.
        let at = |t: i64| {
            let tt = f.from_i64(t);
            let nf = NormalForm {
                c: base.c.clone(),
                p: &base.p + &dir.dp.scale(&tt),
                q: &base.q + &dir.dq.scale(&tt),
                degree: 2,
            };
            focal_values(&nf, 1, Gauge::XPowerZero).unwrap().s[0].clone()
        };
        // s_1 is a polynomial of low degree in t; interpolate through 6 points.
        let ts: Vec<FieldElement> = (0..6).map(|t| f.from_i64(t)).collect();
        let vals: Vec<FieldElement> = (0..6).map(at).collect();
        let poly = interpolate(&f, &ts, &vals);
        assert_eq!(poly.derivative().eval(&f.zero()), jac.matrix[0][0]);
        assert_eq!(jac.rank, 1);
    }

    #[test]
    fn default_ambient_has_fourteen_directions() {
        assert_eq!(default_ambient(&FieldContext::Prime(10007), 3).len(), 14);
    }
}
