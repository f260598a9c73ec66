//! Helpers shared by the acceptance runner and the property suites.
#![allow(dead_code)]

use darboux_core::config::parse_scalar;
use darboux_core::constructions::load_fixture;
use darboux_core::darboux::{
    cofactor_ideal_slice, deg_x, dimension_formula_check, expected_dimension, hilbert_stabilization,
    kernel_space, Curve, DarbouxError, STABLE_RUN,
};
use darboux_core::eta::certificate_search;
use darboux_core::local::local_invariants;
use darboux_core::field::{FieldContext, FieldElement};
use darboux_core::focal::{focal_values, normalize_at, Gauge, NormalForm};
use darboux_core::poly::{binomial, Arity, DifferentialForm, Monomial, Polynomial, Var};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PRIME: u64 = 10007;

pub fn q() -> FieldContext {
    FieldContext::Rationals
}

pub fn fp() -> FieldContext {
    FieldContext::Prime(PRIME)
}

/// Dense polynomial from integer coefficients on the given monomials.
pub fn from_coeffs(ctx: &FieldContext, arity: Arity, monomials: &[Monomial], coeffs: &[i64]) -> Polynomial {
    Polynomial::from_terms(
        ctx,
        arity,
        monomials
            .iter()
            .zip(coeffs)
            .map(|(m, &c)| (*m, ctx.from_i64(c))),
    )
}

/// Random affine polynomial of exact degree `deg` with small sparse
/// integer coefficients.
fn random_affine(rng: &mut ChaCha8Rng, ctx: &FieldContext, deg: u32) -> Polynomial {
    loop {
        let terms: Vec<(Monomial, FieldElement)> = Monomial::up_to_degree(deg, Arity::Affine)
            .into_iter()
            .filter_map(|m| {
                if rng.gen_bool(0.45) {
                    None
                } else {
                    Some((m, ctx.from_i64(rng.gen_range(-3..=3))))
                }
            })
            .collect();
        let p = Polynomial::from_terms(ctx, Arity::Affine, terms);
        if p.degree() == Some(deg) {
            return p;
        }
    }
}

/// A random reduced projective curve of degree `1..=4` without a component at
/// infinity, built as a product of random factors of degree one or two, and
/// with `V(C_x, C_y)` finite (the complete intersection the linkage lives
/// in). Returns `None` for rejected draws.
pub fn random_curve(rng: &mut ChaCha8Rng, ctx: &FieldContext, name: &str) -> Option<Curve> {
    let e: u32 = rng.gen_range(1..=4);
    let mut remaining = e;
    let mut product = Polynomial::from_i64(ctx, Arity::Affine, 1);
    while remaining > 0 {
        let k = if remaining >= 2 && rng.gen_bool(0.5) { 2 } else { 1 };
        product = &product * &random_affine(rng, ctx, k);
        remaining -= k;
    }
    if product.degree() != Some(e) {
        return None;
    }
    let curve = Curve::new(name, product.homogenize(e).ok()?).ok()?;
    if curve.has_component_at_infinity() || !curve.is_square_free().ok()? {
        return None;
    }
    let [cx, cy, _] = curve.partials();
    match hilbert_stabilization(&[cx, cy], e) {
        Ok(_) => Some(curve),
        Err(_) => None,
    }
}

/// The first `n` accepted curves of a seeded stream.
pub fn random_curves(seed: u64, n: usize) -> Vec<Curve> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = q();
    let mut out = Vec::new();
    while out.len() < n {
        if let Some(c) = random_curve(&mut rng, &ctx, &format!("C{}", out.len())) {
            out.push(c);
        }
    }
    out
}

/// `deg Y` from the Hilbert function of the cofactor ideal `(C_x, C_y) : C`,
/// computed independently of `deg X`.
pub fn deg_y_from_cofactor_ideal(curve: &Curve) -> Result<i64, DarbouxError> {
    let cutoff = 3 * curve.degree + 6;
    let mut values: Vec<i64> = Vec::new();
    for k in 0..=cutoff {
        let dim_s = binomial(k as i64 + 2, 2);
        values.push(dim_s - cofactor_ideal_slice(curve, k)?.dim as i64);
        let n = values.len();
        if n >= STABLE_RUN && values[n - STABLE_RUN..].iter().all(|&v| v == values[n - 1]) {
            return Ok(values[n - 1]);
        }
    }
    Err(DarbouxError::NotFinite { cutoff, values })
}

/// Linkage `deg X + deg Y = (e − 1)²` with both sides computed separately,
/// and the complete intersection `V(C_x, C_y)` of degree `(e − 1)²`.
pub fn check_linkage(curve: &Curve) -> Result<(), String> {
    let e = curve.degree as i64;
    let dx = deg_x(curve).map_err(|err| err.to_string())?.deg_x;
    let dy = deg_y_from_cofactor_ideal(curve).map_err(|err| err.to_string())?;
    if dx + dy != (e - 1) * (e - 1) {
        return Err(format!("{}: deg X {dx} + deg Y {dy} != (e-1)^2", curve.poly));
    }
    let [cx, cy, _] = curve.partials();
    let (w, _, _) = hilbert_stabilization(&[cx, cy], curve.degree).map_err(|err| err.to_string())?;
    if w != (e - 1) * (e - 1) {
        return Err(format!("{}: deg W = {w}", curve.poly));
    }
    Ok(())
}

/// The dimension formula `dim V = dim V^H + dim (cofactor ideal)_{d−1}` for
/// `d = 1..=e+1`, and `δ ≤ dim V` where `δ` is the expected dimension.
pub fn check_dimension_formula(curve: &Curve) -> Result<(), String> {
    let e = curve.degree;
    let dx = deg_x(curve).map_err(|err| err.to_string())?.deg_x;
    for d in 1..=e + 1 {
        let f = dimension_formula_check(curve, d).map_err(|err| err.to_string())?;
        if !f.holds() {
            return Err(format!("{}: d = {d}: {f:?}", curve.poly));
        }
        let v = kernel_space(curve, d).map_err(|err| err.to_string())?;
        if v.dim != f.kernel_dim {
            return Err(format!("{}: d = {d}: kernel dims differ", curve.poly));
        }
        let delta = expected_dimension(d, e, dx);
        if delta > v.dim as i64 {
            return Err(format!("{}: d = {d}: δ = {delta} > dim V = {}", curve.poly, v.dim));
        }
    }
    Ok(())
}

/// `ω = Σ λ_i (Π_{j≠i} C_j) dC_i`, which has every `C_i` as an integral curve
/// and the integrating factor `1 / Π C_i`.
pub fn logarithmic_form(curves: &[Polynomial], lambdas: &[i64]) -> DifferentialForm {
    let ctx = curves[0].context().clone();
    let mut p = Polynomial::zero(&ctx, Arity::Affine);
    let mut q = Polynomial::zero(&ctx, Arity::Affine);
    for (i, c) in curves.iter().enumerate() {
        let mut others = Polynomial::from_i64(&ctx, Arity::Affine, lambdas[i]);
        for (j, d) in curves.iter().enumerate() {
            if i != j {
                others = &others * d;
            }
        }
        p = &p + &(&others * &c.partial(Var::X));
        q = &q + &(&others * &c.partial(Var::Y));
    }
    let degree = p.degree().unwrap_or(0).max(q.degree().unwrap_or(0));
    DifferentialForm::new(p, q, degree).expect("form of consistent degree")
}

/// Finds a certificate for a logarithmic form and re-substitutes it.
pub fn check_certificate_resubstitution(curves: &[Polynomial], lambdas: &[i64]) -> Result<(), String> {
    let omega = logarithmic_form(curves, lambdas);
    let named: Vec<Curve> = curves
        .iter()
        .enumerate()
        .map(|(i, c)| Curve::new(format!("C{i}"), c.homogenize(c.degree().unwrap()).unwrap()).unwrap())
        .collect();
    let cert = certificate_search(&omega, &named)
        .map_err(|err| err.to_string())?
        .ok_or_else(|| "no certificate for a logarithmic form".to_string())?;
    if cert.verify(&omega, &named).map_err(|err| err.to_string())? {
        Ok(())
    } else {
        Err(format!("certificate {cert} does not re-substitute to zero"))
    }
}

/// Hamiltonian form `ω = dH` with `H = (x² + y²)/2 + h`, `h` of order ≥ 3.
pub fn hamiltonian_form(ctx: &FieldContext, higher: &Polynomial) -> DifferentialForm {
    let two = ctx.from_i64(2);
    let half = two.inv().unwrap();
    let x = Polynomial::x(ctx, Arity::Affine);
    let y = Polynomial::y(ctx, Arity::Affine);
    let h = &(&(&x * &x) + &(&y * &y)).scale(&half) + higher;
    let degree = h.degree().unwrap() - 1;
    DifferentialForm::new(h.partial(Var::X), h.partial(Var::Y), degree).unwrap()
}

/// Random polynomial supported in degrees `lo..=hi`.
pub fn poly_in_degrees(ctx: &FieldContext, lo: u32, hi: u32, coeffs: &[i64]) -> Polynomial {
    let monomials: Vec<Monomial> = (lo..=hi)
        .flat_map(|k| Monomial::of_degree(k, Arity::Affine))
        .collect();
    from_coeffs(ctx, Arity::Affine, &monomials, coeffs)
}

pub fn monomial_count(lo: u32, hi: u32) -> usize {
    (lo..=hi).map(|k| k as usize + 1).sum()
}

/// Normal form of a bundled construction at its recorded 𝔽_p equilibrium.
pub fn fixture_normal_form(id: &str) -> NormalForm {
    let config = load_fixture(id).unwrap().config;
    let opts = &config.options;
    let p = opts.prime.unwrap();
    let base = FieldContext::prime(p).unwrap();
    let ctx = match opts.focal_extension.unwrap_or(1) {
        1 => base.clone(),
        k => FieldContext::extension(p, k).unwrap(),
    };
    let omega = config.form(&base).unwrap();
    let pt = opts.focal_point.as_ref().unwrap();
    let coords = [
        ctx.embed(&parse_scalar(&pt[0], &base).unwrap()).unwrap(),
        ctx.embed(&parse_scalar(&pt[1], &base).unwrap()).unwrap(),
    ];
    normalize_at(&omega, &coords).unwrap().0
}

/// Index and value of the first nonzero focal value in each gauge agree.
pub fn check_gauge_independence(nf: &NormalForm, n: usize) -> Result<(), String> {
    let a = focal_values(nf, n, Gauge::XPowerZero).map_err(|err| err.to_string())?;
    let b = focal_values(nf, n, Gauge::YPowerZero).map_err(|err| err.to_string())?;
    let first = |s: &[FieldElement]| s.iter().position(|v| !v.is_zero());
    let (ia, ib) = (first(&a.s), first(&b.s));
    if ia != ib {
        return Err(format!("first nonzero focal value at {ia:?} vs {ib:?}"));
    }
    if let Some(i) = ia {
        if a.s[i] != b.s[i] {
            return Err(format!("s_{} differs between gauges: {} vs {}", i + 1, a.s[i], b.s[i]));
        }
    }
    for (seq, nf) in [(&a, nf), (&b, nf)] {
        if !seq.identity_residual(nf).map_err(|err| err.to_string())?.is_zero() {
            return Err("focal identity residual is nonzero".into());
        }
    }
    Ok(())
}

/// `deg X` equals the sum of local Tjurina numbers at affine marked points
/// and modified Tjurina numbers at marked points at infinity.
pub fn cross_check(id: &str) -> Result<(), String> {
    let cfg = load_fixture(id).map_err(|e| e.to_string())?.config;
    let ctx = cfg.context().map_err(|e| e.to_string())?;
    let union = cfg.group(&cfg.union_names(), &ctx).map_err(|e| e.to_string())?;
    let global = deg_x(&union).map_err(|e| e.to_string())?.deg_x;
    let pctx = cfg.point_context().map_err(|e| e.to_string())?;
    let local_curve = union.to_context(&pctx).map_err(|e| e.to_string())?;
    let mut sum = 0i64;
    for p in cfg.points(&pctx).map_err(|e| e.to_string())? {
        let inv = local_invariants(&local_curve.poly, &p).map_err(|e| e.to_string())?;
        sum += inv.t_z.unwrap_or(inv.tjurina) as i64;
    }
    if sum != global {
        return Err(format!("{id}: local sum {sum} != deg X {global}"));
    }
    Ok(())
}
