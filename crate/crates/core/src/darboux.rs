//! Integral curves, the Darboux kernel `V_C(d)`, the cofactor ideal, the
//! degree of the scheme `X = V(C, C_x, C_y)` and related dimension counts.
//!
//! All computations run on homogeneous data: affine curves and forms are
//! homogenized to their declared degrees on entry.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldContext, FieldElement};
use crate::linalg::{ExactMatrix, LinalgError};
use crate::poly::{binomial, Arity, DifferentialForm, Monomial, PolyError, Polynomial, TwoForm, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DarbouxError {
    #[error("curve is not square-free")]
    NotSquareFree,
    #[error("curve contains the line at infinity")]
    ComponentAtInfinity,
    #[error("Hilbert function did not stabilize by degree {cutoff}")]
    NotFinite { cutoff: u32, values: Vec<i64> },
    #[error("curves {0} and {1} share a component")]
    CommonComponent(usize, usize),
    #[error("{0} is not an integral curve of the form")]
    NotIntegralCurve(String),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("the zero polynomial does not define a curve")]
    ZeroCurve,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A homogeneous curve `C(x, y, z) = 0` of degree `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub name: String,
    pub poly: Polynomial,
    pub degree: u32,
}

impl Curve {
    /// Accepts an affine polynomial (homogenized to its degree) or a
    /// homogeneous projective one.
    pub fn new(name: impl Into<String>, poly: Polynomial) -> Result<Self, DarbouxError> {
        let degree = poly.degree().ok_or(DarbouxError::ZeroCurve)?;
        let poly = match poly.arity() {
            Arity::Affine => poly.homogenize(degree)?,
            Arity::Projective => {
                if !poly.is_homogeneous() {
                    return Err(DarbouxError::NotHomogeneous);
                }
                poly
            }
        };
        Ok(Curve {
            name: name.into(),
            poly,
            degree,
        })
    }

    pub fn context(&self) -> &FieldContext {
        self.poly.context()
    }

    /// Product curve.
    pub fn union(name: impl Into<String>, curves: &[&Curve]) -> Result<Curve, DarbouxError> {
        let first = curves.first().ok_or(DarbouxError::ZeroCurve)?;
        let mut poly = first.poly.clone();
        for c in &curves[1..] {
            poly = poly.checked_mul(&c.poly)?;
        }
        Curve::new(name, poly)
    }

    /// True when `z` divides the homogeneous polynomial.
    pub fn has_component_at_infinity(&self) -> bool {
        self.poly.terms().all(|(m, _)| m.exp(Var::Z) > 0)
    }

    pub fn partials(&self) -> [Polynomial; 3] {
        [
            self.poly.partial(Var::X),
            self.poly.partial(Var::Y),
            self.poly.partial(Var::Z),
        ]
    }

    /// Square-free iff the singular locus `V(C_x, C_y, C_z)` is finite. In
    /// characteristic dividing `e` the Euler relation fails, so `C` itself is
    /// added to the generators.
    pub fn is_square_free(&self) -> Result<bool, DarbouxError> {
        let [cx, cy, cz] = self.partials();
        let gens = vec![self.poly.clone(), cx, cy, cz];
        match hilbert_stabilization(&gens, self.degree) {
            Ok(_) => Ok(true),
            Err(DarbouxError::NotFinite { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub fn to_context(&self, ctx: &FieldContext) -> Result<Curve, DarbouxError> {
        Ok(Curve {
            name: self.name.clone(),
            poly: self.poly.to_context(ctx)?,
            degree: self.degree,
        })
    }
}

/// Homogenizes an affine form; projective forms pass through.
pub fn homogeneous_form(omega: &DifferentialForm) -> Result<DifferentialForm, DarbouxError> {
    Ok(omega.homogenize()?)
}

/// Returns the cofactor `K` with `C_x Q − C_y P = C·K`, or `None`.
pub fn is_integral_curve(c: &Polynomial, omega: &DifferentialForm) -> Result<Option<TwoForm>, DarbouxError> {
    if c.is_zero() {
        return Err(DarbouxError::ZeroCurve);
    }
    let wedge = omega.wedge_with_dc(c)?;
    match wedge.0.exact_div(c) {
        Ok(k) => Ok(Some(TwoForm(k))),
        Err(PolyError::NotDivisible) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Cofactor of a curve with respect to the homogenized form.
pub fn cofactor(curve: &Curve, omega: &DifferentialForm) -> Result<Polynomial, DarbouxError> {
    let h = homogeneous_form(omega)?;
    is_integral_curve(&curve.poly, &h)?
        .map(|k| k.0)
        .ok_or_else(|| DarbouxError::NotIntegralCurve(curve.name.clone()))
}

/// Outcome of checking a union of curves both as a product and factorwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnionCheck {
    pub product_integral: bool,
    pub factors_integral: Vec<bool>,
}

impl UnionCheck {
    pub fn consistent(&self) -> bool {
        self.product_integral == self.factors_integral.iter().all(|&b| b)
    }
}

/// Checks that the product of pairwise coprime curves is integral iff every
/// factor is.
pub fn union_integral_curve_check(
    curves: &[Curve],
    omega: &DifferentialForm,
) -> Result<UnionCheck, DarbouxError> {
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            if share_component(&curves[i], &curves[j])? {
                return Err(DarbouxError::CommonComponent(i, j));
            }
        }
    }
    let h = homogeneous_form(omega)?;
    let refs: Vec<&Curve> = curves.iter().collect();
    let product = Curve::union("union", &refs)?;
    let product_integral = is_integral_curve(&product.poly, &h)?.is_some();
    let factors_integral = curves
        .iter()
        .map(|c| is_integral_curve(&c.poly, &h).map(|k| k.is_some()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(UnionCheck {
        product_integral,
        factors_integral,
    })
}

/// Two curves share a component iff `V(C, D)` is not finite.
pub fn share_component(a: &Curve, b: &Curve) -> Result<bool, DarbouxError> {
    let gens = vec![a.poly.clone(), b.poly.clone()];
    match hilbert_stabilization(&gens, a.degree.max(b.degree)) {
        Ok(_) => Ok(false),
        Err(DarbouxError::NotFinite { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

/// One element of `V_C(d)`: homogeneous `P, Q` of degree `d` and `K` of
/// degree `d − 1` with `C_x Q − C_y P = C K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelElement {
    pub p: Polynomial,
    pub q: Polynomial,
    pub k: Polynomial,
}

impl KernelElement {
    pub fn form(&self, d: u32) -> DifferentialForm {
        DifferentialForm {
            p: self.p.clone(),
            q: self.q.clone(),
            degree: d,
        }
    }

    /// Whether the element has zero cofactor, i.e. lies in the Hamiltonian
    /// subspace `F·(C_y, −C_x, 0)` when `C_x, C_y` are coprime.
    pub fn is_hamiltonian(&self) -> bool {
        self.k.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSpace {
    pub degree: u32,
    pub basis: Vec<KernelElement>,
    pub dim: usize,
    pub hamiltonian_dim: usize,
}

/// `dim S_{d−e+1}` in three variables, 0 when `e > d + 1`.
pub fn hamiltonian_dimension(d: u32, e: u32) -> usize {
    if e > d + 1 {
        0
    } else {
        binomial(d as i64 - e as i64 + 3, 2) as usize
    }
}

/// Columns `mult·m` for every monomial `m` of the given degree, written in
/// the target monomial basis. Used to assemble block linear systems.
struct BlockSystem {
    target: Vec<Monomial>,
    index: std::collections::HashMap<Monomial, usize>,
    columns: Vec<Vec<FieldElement>>,
    ctx: FieldContext,
    blocks: Vec<(usize, Vec<Monomial>)>,
}

impl BlockSystem {
    fn new(ctx: &FieldContext, target_degree: u32) -> Self {
        let target = Monomial::of_degree(target_degree, Arity::Projective);
        let index = target.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        BlockSystem {
            target,
            index,
            columns: Vec::new(),
            ctx: ctx.clone(),
            blocks: Vec::new(),
        }
    }

    /// Adds a block of unknowns `u` of the given degree entering as `mult·u`.
    /// Returns the block index. Negative degrees give an empty block.
    fn add_block(&mut self, mult: &Polynomial, degree: i64) -> usize {
        let start = self.columns.len();
        let monos = if degree < 0 {
            vec![]
        } else {
            Monomial::of_degree(degree as u32, Arity::Projective)
        };
        for m in &monos {
            let mut col = vec![self.ctx.zero(); self.target.len()];
            for (mm, c) in mult.terms() {
                let prod = mm.mul(m);
                let i = self.index[&prod];
                col[i] = &col[i] + c;
            }
            self.columns.push(col);
        }
        self.blocks.push((start, monos));
        self.blocks.len() - 1
    }

    fn matrix(&self) -> ExactMatrix {
        let rows = self.target.len();
        let cols = self.columns.len();
        let mut m = ExactMatrix::zeros(&self.ctx, rows, cols);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, j, v.clone());
                }
            }
        }
        m
    }

    fn block_poly(&self, block: usize, v: &[FieldElement]) -> Polynomial {
        let (start, monos) = &self.blocks[block];
        Polynomial::from_coefficients(
            &self.ctx,
            Arity::Projective,
            monos,
            &v[*start..*start + monos.len()],
        )
    }

    fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        let (start, monos) = &self.blocks[block];
        *start..*start + monos.len()
    }
}

/// `V_C(d)`: all `(P, Q, K)` with `C_x Q − C_y P − C K = 0`.
pub fn kernel_space(curve: &Curve, d: u32) -> Result<KernelSpace, DarbouxError> {
    if !curve.is_square_free()? {
        return Err(DarbouxError::NotSquareFree);
    }
    kernel_space_unchecked(curve, d)
}

fn kernel_space_unchecked(curve: &Curve, d: u32) -> Result<KernelSpace, DarbouxError> {
    let ctx = curve.context().clone();
    let e = curve.degree;
    let [cx, cy, _] = curve.partials();
    let mut sys = BlockSystem::new(&ctx, e + d - 1);
    let bq = sys.add_block(&cx, d as i64);
    let bp = sys.add_block(&-&cy, d as i64);
    let bk = sys.add_block(&-&curve.poly, d as i64 - 1);
    let ker = sys.matrix().nullspace()?;
    let basis: Vec<KernelElement> = ker
        .iter()
        .map(|v| KernelElement {
            p: sys.block_poly(bp, v),
            q: sys.block_poly(bq, v),
            k: sys.block_poly(bk, v),
        })
        .collect();
    // Hamiltonian directions F·(C_y, −C_x, 0): rank of their coefficient
    // vectors inside the kernel.
    let ham = if e <= d + 1 {
        let fs = Monomial::of_degree(d + 1 - e, Arity::Projective);
        let rows: Vec<Vec<FieldElement>> = fs
            .iter()
            .map(|m| {
                let q = cy.shift(m);
                let p = cx.shift(m);
                let mut row = vec![ctx.zero(); sys.columns.len()];
                for (block, poly) in [(bq, &q), (bp, &p)] {
                    let range = sys.block_range(block);
                    let monos = &sys.blocks[block].1;
                    for (slot, mm) in range.zip(monos) {
                        row[slot] = poly.coeff(mm);
                    }
                }
                row
            })
            .collect();
        ExactMatrix::from_rows(&ctx, sys.columns.len(), rows).rank()?
    } else {
        0
    };
    Ok(KernelSpace {
        degree: d,
        dim: basis.len(),
        basis,
        hamiltonian_dim: ham,
    })
}

/// Degree-`k` slice of the cofactor ideal `(C_x, C_y) : C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CofactorSlice {
    pub degree: u32,
    pub dim: usize,
    pub basis: Vec<Polynomial>,
}

pub fn cofactor_ideal_slice(curve: &Curve, k: u32) -> Result<CofactorSlice, DarbouxError> {
    check_curve_for_linkage(curve)?;
    let ctx = curve.context().clone();
    let [cx, cy, _] = curve.partials();
    let mut sys = BlockSystem::new(&ctx, k + curve.degree);
    let bk = sys.add_block(&curve.poly, k as i64);
    let _ba = sys.add_block(&-&cx, k as i64 + 1);
    let _bb = sys.add_block(&-&cy, k as i64 + 1);
    let ker = sys.matrix().nullspace()?;
    let range = sys.block_range(bk);
    let projected: Vec<Vec<FieldElement>> = ker.iter().map(|v| v[range.clone()].to_vec()).collect();
    let ncols = range.len();
    let rref = ExactMatrix::from_rows(&ctx, ncols, projected).rref()?;
    let basis: Vec<Polynomial> = rref
        .rows
        .iter()
        .map(|r| sys.block_poly_from(bk, r))
        .collect();
    Ok(CofactorSlice {
        degree: k,
        dim: basis.len(),
        basis,
    })
}

impl BlockSystem {
    fn block_poly_from(&self, block: usize, coeffs: &[FieldElement]) -> Polynomial {
        Polynomial::from_coefficients(&self.ctx, Arity::Projective, &self.blocks[block].1, coeffs)
    }
}

fn check_curve_for_linkage(curve: &Curve) -> Result<(), DarbouxError> {
    if curve.has_component_at_infinity() {
        return Err(DarbouxError::ComponentAtInfinity);
    }
    if !curve.is_square_free()? {
        return Err(DarbouxError::NotSquareFree);
    }
    Ok(())
}

/// Both sides of `dim V_C(d) = dim V^H_C(d) + dim ((C_x, C_y) : C)_{d−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionFormula {
    pub kernel_dim: usize,
    pub hamiltonian_dim: usize,
    pub cofactor_dim: usize,
}

impl DimensionFormula {
    pub fn holds(&self) -> bool {
        self.kernel_dim == self.hamiltonian_dim + self.cofactor_dim
    }
}

pub fn dimension_formula_check(curve: &Curve, d: u32) -> Result<DimensionFormula, DarbouxError> {
    check_curve_for_linkage(curve)?;
    let v = kernel_space_unchecked(curve, d)?;
    let slice = if d == 0 {
        0
    } else {
        cofactor_ideal_slice(curve, d - 1)?.dim
    };
    Ok(DimensionFormula {
        kernel_dim: v.dim,
        hamiltonian_dim: hamiltonian_dimension(d, curve.degree),
        cofactor_dim: slice,
    })
}

/// Hilbert function data of `(C, C_x, C_y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkageDegrees {
    pub deg_x: i64,
    pub deg_y: i64,
    pub e: u32,
    pub stabilization_degree: u32,
    pub hilbert_function: Vec<i64>,
}

/// Number of consecutive equal values that declares stabilization.
pub const STABLE_RUN: usize = 4;

/// `h_k = dim S_k − rank(degree-k multiples of the generators)`.
pub fn hilbert_value(gens: &[Polynomial], k: u32) -> Result<i64, DarbouxError> {
    let ctx = gens[0].context().clone();
    let mut sys = BlockSystem::new(&ctx, k);
    for g in gens {
        let dg = g.degree().ok_or(DarbouxError::ZeroCurve)? as i64;
        sys.add_block(g, k as i64 - dg);
    }
    let dim = sys.target.len() as i64;
    if sys.columns.is_empty() {
        return Ok(dim);
    }
    Ok(dim - sys.matrix().rank()? as i64)
}

/// Computes `h_0, h_1, …` until `STABLE_RUN` consecutive values agree or the
/// cutoff `3e + 6` is passed. Returns `(stable value, first degree of the
/// stable run, all values)`.
pub fn hilbert_stabilization(
    gens: &[Polynomial],
    e: u32,
) -> Result<(i64, u32, Vec<i64>), DarbouxError> {
    let cutoff = 3 * e + 6;
    // Zero generators do not change the ideal (e.g. `C_z` of a curve not
    // involving `z`).
    let nonzero: Vec<Polynomial> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let gens = nonzero.as_slice();
    let mut values: Vec<i64> = Vec::new();
    let mut k = 0u32;
    while k <= cutoff {
        let batch: Vec<u32> = (k..=(k + STABLE_RUN as u32 - 1).min(cutoff)).collect();
        let computed: Vec<Result<i64, DarbouxError>> =
            batch.par_iter().map(|&j| hilbert_value(gens, j)).collect();
        for (j, v) in batch.iter().zip(computed) {
            values.push(v?);
            let n = values.len();
            if n >= STABLE_RUN && values[n - STABLE_RUN..].iter().all(|&x| x == values[n - 1]) {
                let start = j + 1 - STABLE_RUN as u32;
                return Ok((values[n - 1], start, values));
            }
        }
        k += batch.len() as u32;
    }
    Err(DarbouxError::NotFinite { cutoff, values })
}

/// `deg X` for `X = V(C, C_x, C_y)` and the linked degree `deg Y`.
pub fn deg_x(curve: &Curve) -> Result<LinkageDegrees, DarbouxError> {
    if curve.has_component_at_infinity() {
        return Err(DarbouxError::ComponentAtInfinity);
    }
    let [cx, cy, _] = curve.partials();
    let gens: Vec<Polynomial> = [curve.poly.clone(), cx, cy]
        .into_iter()
        .filter(|g| !g.is_zero())
        .collect();
    let (value, start, values) = hilbert_stabilization(&gens, curve.degree)?;
    let e = curve.degree as i64;
    Ok(LinkageDegrees {
        deg_x: value,
        deg_y: (e - 1) * (e - 1) - value,
        e: curve.degree,
        stabilization_degree: start,
        hilbert_function: values,
    })
}

/// `δ = C(d−e+3, 2) + C(d+1, 2) − (e−1)² + deg X`, first summand 0 when
/// `e > d + 1`.
pub fn expected_dimension(d: u32, e: u32, deg_x: i64) -> i64 {
    let ham = hamiltonian_dimension(d, e) as i64;
    let e = e as i64;
    ham + binomial(d as i64 + 1, 2) - (e - 1) * (e - 1) + deg_x
}

/// Sum of affine Tjurina numbers and modified Tjurina numbers at infinity.
pub fn deg_x_from_local_data(affine_tjurinas: &[i64], infinity_tzs: &[i64]) -> i64 {
    affine_tjurinas.iter().sum::<i64>() + infinity_tzs.iter().sum::<i64>()
}

/// Dimension of the first-order deformations `(c, κ)` of an integral curve
/// with its cofactor: `c_x Q − c_y P − c K − C κ = 0`, `deg c = e`,
/// `deg κ = d − 1`. The value 1 means the pair is rigid up to scaling.
pub fn curve_rigidity(omega: &DifferentialForm, curve: &Curve) -> Result<usize, DarbouxError> {
    let h = homogeneous_form(omega)?;
    let k = is_integral_curve(&curve.poly, &h)?
        .ok_or_else(|| DarbouxError::NotIntegralCurve(curve.name.clone()))?
        .0;
    let ctx = curve.context().clone();
    let e = curve.degree;
    let d = h.degree;
    let mut sys = BlockSystem::new(&ctx, e + d - 1);
    // c_x Q − c_y P − c K, expanded monomial by monomial.
    let monos = Monomial::of_degree(e, Arity::Projective);
    let start = sys.columns.len();
    for m in &monos {
        let c = Polynomial::monomial(&ctx, Arity::Projective, *m, ctx.one());
        let expr = &(&(&c.partial(Var::X) * &h.q) - &(&c.partial(Var::Y) * &h.p)) - &(&c * &k);
        let mut col = vec![ctx.zero(); sys.target.len()];
        for (mm, v) in expr.terms() {
            col[sys.index[mm]] = v.clone();
        }
        sys.columns.push(col);
    }
    sys.blocks.push((start, monos));
    sys.add_block(&-&curve.poly, d as i64 - 1);
    Ok(sys.matrix().nullspace()?.len())
}

/// Whether the points impose independent conditions on forms of degree `k`;
/// with at least `dim S_k` points this means no nonzero form of degree `k`
/// vanishes at all of them.
pub fn genericity_points_condition(points: &[[FieldElement; 3]], k: u32) -> Result<bool, DarbouxError> {
    let monos = Monomial::of_degree(k, Arity::Projective);
    if points.is_empty() {
        return Ok(true);
    }
    let ctx = points[0][0].context();
    let rows: Vec<Vec<FieldElement>> = points
        .iter()
        .map(|pt| {
            monos
                .iter()
                .map(|m| {
                    let mut v = ctx.one();
                    for (i, c) in pt.iter().enumerate() {
                        v = &v * &c.pow(m.0[i] as u64);
                    }
                    v
                })
                .collect()
        })
        .collect();
    let rank = ExactMatrix::from_rows(&ctx, monos.len(), rows).rank()?;
    Ok(rank == points.len().min(monos.len()))
}
