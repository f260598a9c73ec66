//! Local invariants of plane curve germs: Milnor and Tjurina numbers, the
//! modified Tjurina number at points of the line at infinity, intersection
//! multiplicity with that line, and quasi-homogeneous weights.
//!
//! A germ is an affine polynomial in two variables `(u, v)` (stored in the
//! `x`, `y` slots) with the point of interest at the origin.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldContext, FieldElement};
use crate::linalg::LinalgError;
use crate::poly::{Arity, Monomial, PolyError, Polynomial, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("colength did not stabilize below truncation degree {cutoff}")]
    NotFiniteColength { cutoff: u32 },
    #[error("the germ has a component on the line z = 0")]
    ComponentOnLine,
    #[error("point {0} does not lie on the curve")]
    NotOnCurve(String),
    #[error("point {0} is not on the line at infinity")]
    NotAtInfinity(String),
    #[error("projective point has all coordinates zero")]
    ZeroPoint,
    #[error("unknown singularity type '{0}'")]
    UnknownType(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Largest truncation degree tried before declaring the colength infinite.
pub const MAX_TRUNCATION: u32 = 40;

/// Declared singularity types with their quasi-homogeneous normal forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SingularityType {
    Smooth,
    /// `A_n`: `x² − y^{n+1}`.
    A(u32),
    /// `D_n`: `y(x² − y^{n−2})`, `n ≥ 4`.
    D(u32),
    E6,
    E7,
    E8,
    /// Ordinary `k`-fold point: `k` distinct smooth transversal branches.
    Ordinary(u32),
    /// Smooth branch meeting the line at infinity transversally.
    Transversal,
    /// Smooth branch simply tangent to the line at infinity.
    Tangent,
}

impl SingularityType {
    /// Weights `(w_x, w_y, w_deg)` of the normal form, reduced by their gcd.
    pub fn weights(&self) -> (u32, u32, u32) {
        let (a, b, c) = match *self {
            SingularityType::Smooth | SingularityType::Transversal => (1, 1, 1),
            SingularityType::Tangent => (1, 2, 2),
            SingularityType::A(n) => (n + 1, 2, 2 * (n + 1)),
            SingularityType::D(n) => (n - 2, 2, 2 * (n - 1)),
            SingularityType::E6 => (4, 3, 12),
            SingularityType::E7 => (3, 2, 9),
            SingularityType::E8 => (5, 3, 15),
            SingularityType::Ordinary(k) => (1, 1, k),
        };
        let g = a.gcd(&b).gcd(&c);
        (a / g, b / g, c / g)
    }

    /// Milnor number (equal to the Tjurina number for these types).
    pub fn milnor(&self) -> u32 {
        match *self {
            SingularityType::Smooth | SingularityType::Transversal | SingularityType::Tangent => 0,
            SingularityType::A(n) | SingularityType::D(n) => n,
            SingularityType::E6 => 6,
            SingularityType::E7 => 7,
            SingularityType::E8 => 8,
            SingularityType::Ordinary(k) => (k - 1) * (k - 1),
        }
    }

    /// Normal form over ℚ as an affine germ.
    pub fn normal_form(&self) -> Polynomial {
        let text = match *self {
            SingularityType::Smooth | SingularityType::Transversal => "y".to_string(),
            SingularityType::Tangent => "y - x^2".to_string(),
            SingularityType::A(n) => format!("x^2 - y^{}", n + 1),
            SingularityType::D(n) => format!("y*(x^2 - y^{})", n - 2),
            SingularityType::E6 => "x^3 - y^4".to_string(),
            SingularityType::E7 => "x*(x^2 - y^3)".to_string(),
            SingularityType::E8 => "x^3 - y^5".to_string(),
            SingularityType::Ordinary(k) => {
                let factors: Vec<String> = (0..k).map(|i| format!("(x - {i}*y)")).collect();
                factors.join("*").replace("(x - 0*y)", "x")
            }
        };
        crate::parse::parse_polynomial(&text).expect("normal forms parse")
    }
}

impl fmt::Display for SingularityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityType::Smooth => write!(f, "smooth"),
            SingularityType::A(n) => write!(f, "A{n}"),
            SingularityType::D(n) => write!(f, "D{n}"),
            SingularityType::E6 => write!(f, "E6"),
            SingularityType::E7 => write!(f, "E7"),
            SingularityType::E8 => write!(f, "E8"),
            SingularityType::Ordinary(k) => write!(f, "ordinary-{k}-fold"),
            SingularityType::Transversal => write!(f, "transversal"),
            SingularityType::Tangent => write!(f, "tangent"),
        }
    }
}

impl FromStr for SingularityType {
    type Err = LocalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let parsed = match t.as_str() {
            "smooth" => Some(SingularityType::Smooth),
            "node" => Some(SingularityType::A(1)),
            "cusp" => Some(SingularityType::A(2)),
            "tacnode" => Some(SingularityType::A(3)),
            "triple" | "triple-point" => Some(SingularityType::D(4)),
            "e6" => Some(SingularityType::E6),
            "e7" => Some(SingularityType::E7),
            "e8" => Some(SingularityType::E8),
            "transversal" => Some(SingularityType::Transversal),
            "tangent" | "tangent-to-infinity" => Some(SingularityType::Tangent),
            _ => None,
        };
        if let Some(p) = parsed {
            return Ok(p);
        }
        let num = |rest: &str| rest.parse::<u32>().ok();
        if let Some(n) = t.strip_prefix('a').and_then(num) {
            if n >= 1 {
                return Ok(SingularityType::A(n));
            }
        }
        if let Some(n) = t.strip_prefix('d').and_then(num) {
            if n >= 4 {
                return Ok(SingularityType::D(n));
            }
        }
        if let Some(k) = t
            .strip_prefix("ordinary-")
            .and_then(|r| r.strip_suffix("-fold"))
            .and_then(num)
        {
            if k >= 2 {
                return Ok(SingularityType::Ordinary(k));
            }
        }
        Err(LocalError::UnknownType(s.to_string()))
    }
}

impl Serialize for SingularityType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SingularityType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A labelled projective point with the affine chart used for local work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedPoint {
    pub label: String,
    pub coords: [FieldElement; 3],
    pub chart: Var,
    pub declared_type: Option<SingularityType>,
}

impl MarkedPoint {
    /// Picks the chart `z = 1` for affine points, otherwise `x = 1` or `y = 1`.
    pub fn new(
        label: impl Into<String>,
        coords: [FieldElement; 3],
        declared_type: Option<SingularityType>,
    ) -> Result<Self, LocalError> {
        let chart = if !coords[2].is_zero() {
            Var::Z
        } else if !coords[0].is_zero() {
            Var::X
        } else if !coords[1].is_zero() {
            Var::Y
        } else {
            return Err(LocalError::ZeroPoint);
        };
        Ok(MarkedPoint {
            label: label.into(),
            coords,
            chart,
            declared_type,
        })
    }

    pub fn affine(label: impl Into<String>, x: FieldElement, y: FieldElement) -> Result<Self, LocalError> {
        let one = x.context().one();
        MarkedPoint::new(label, [x, y, one], None)
    }

    pub fn with_type(mut self, t: SingularityType) -> Self {
        self.declared_type = Some(t);
        self
    }

    pub fn context(&self) -> FieldContext {
        self.coords[0].context()
    }

    pub fn is_at_infinity(&self) -> bool {
        self.coords[2].is_zero()
    }

    /// Coordinates of the point in its chart, as `(u, v)`.
    pub fn chart_coordinates(&self) -> [FieldElement; 2] {
        let pivot = &self.coords[self.chart.index()];
        let inv = pivot.inv().expect("chart coordinate is nonzero");
        let others: Vec<FieldElement> = (0..3)
            .filter(|&i| i != self.chart.index())
            .map(|i| &self.coords[i] * &inv)
            .collect();
        [others[0].clone(), others[1].clone()]
    }
}

/// Germ of a homogeneous polynomial at a marked point, translated to the
/// origin of the point's chart. Coefficients are mapped into the point's
/// field.
pub fn germ_at(f: &Polynomial, point: &MarkedPoint) -> Result<Polynomial, LocalError> {
    let ctx = point.context();
    let f = f.to_context(&ctx)?;
    let f = match f.arity() {
        Arity::Projective => f.chart(point.chart),
        Arity::Affine => {
            if point.chart != Var::Z {
                return Err(PolyError::ArityMismatch.into());
            }
            f
        }
    };
    let [a, b] = point.chart_coordinates();
    let u = Polynomial::x(&ctx, Arity::Affine);
    let v = Polynomial::y(&ctx, Arity::Affine);
    let shifted = f.substitute(&[
        &u + &Polynomial::constant(a, Arity::Affine),
        &v + &Polynomial::constant(b, Arity::Affine),
    ])?;
    Ok(shifted)
}

/// `dim k[[u, v]] / I` together with the truncation degree that certified it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Colength {
    pub value: usize,
    pub truncation: u32,
}

type SparseRow = BTreeMap<Monomial, FieldElement>;

/// `d_N = dim k[u,v]_{<N} / (truncated multiples of gens)`.
///
/// The rows are reduced one at a time against pivots keyed by their
/// lowest monomial, so elimination only ever creates fill-in in higher
/// degrees and the matrices stay sparse.
fn truncated_colength(gens: &[Polynomial], n: u32) -> usize {
    let total = Monomial::up_to_degree(n.saturating_sub(1), Arity::Affine).len();
    if n == 0 {
        return 0;
    }
    let mut pivots: HashMap<Monomial, SparseRow> = HashMap::new();
    for g in gens {
        let Some(order) = g.order() else { continue };
        if order >= n {
            continue;
        }
        for m in Monomial::up_to_degree(n - 1 - order, Arity::Affine) {
            let mut row: SparseRow = g
                .terms()
                .map(|(gm, c)| (gm.mul(&m), c.clone()))
                .filter(|(prod, _)| prod.degree() < n)
                .collect();
            while let Some((lead, c)) = row.first_key_value().map(|(m, c)| (*m, c.clone())) {
                match pivots.get(&lead) {
                    Some(pivot) => {
                        for (pm, pc) in pivot {
                            let entry = row.entry(*pm).or_insert_with(|| c.context().zero());
                            *entry = &*entry - &(&c * pc);
                            if entry.is_zero() {
                                row.remove(pm);
                            }
                        }
                    }
                    None => {
                        let inv = c.inv().expect("nonzero field element");
                        for v in row.values_mut() {
                            *v = &*v * &inv;
                        }
                        pivots.insert(lead, row);
                        break;
                    }
                }
            }
        }
    }
    total - pivots.len()
}

/// Colength of the ideal generated by `gens` in the local ring at the
/// origin. Stops at the first `N` with `d_N = d_{N−1}`: then
/// `m^{N−1} ⊆ I + m^N`, hence `m^{N−1} ⊆ I` by Nakayama, and the value is
/// exact.
pub fn colength(gens: &[Polynomial]) -> Result<Colength, LocalError> {
    let gens: Vec<Polynomial> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    if gens.is_empty() {
        return Err(LocalError::NotFiniteColength { cutoff: 0 });
    }
    let mut prev = 0usize;
    for n in 1..=MAX_TRUNCATION {
        let d = truncated_colength(&gens, n);
        if d == prev {
            return Ok(Colength {
                value: d,
                truncation: n,
            });
        }
        prev = d;
    }
    Err(LocalError::NotFiniteColength {
        cutoff: MAX_TRUNCATION,
    })
}

/// Milnor number: colength of `(F_u, F_v)`.
pub fn milnor(germ: &Polynomial) -> Result<usize, LocalError> {
    Ok(colength(&[germ.partial(Var::X), germ.partial(Var::Y)])?.value)
}

/// Tjurina number: colength of `(F, F_u, F_v)`.
pub fn tjurina(germ: &Polynomial) -> Result<usize, LocalError> {
    Ok(colength(&[germ.clone(), germ.partial(Var::X), germ.partial(Var::Y)])?.value)
}

/// Modified Tjurina number of a germ in `(y, z)` (stored as `(u, v)`), with
/// the line at infinity `v = 0`: colength of `(F_u, v·F_v, F)`.
pub fn modified_tjurina(germ: &Polynomial) -> Result<usize, LocalError> {
    intersection_multiplicity_with_line(germ)?;
    let v = Polynomial::y(germ.context(), Arity::Affine);
    let gens = [
        germ.partial(Var::X),
        &v * &germ.partial(Var::Y),
        germ.clone(),
    ];
    Ok(colength(&gens)?.value)
}

/// Order of vanishing of `F(u, 0)` at `u = 0`.
pub fn intersection_multiplicity_with_line(germ: &Polynomial) -> Result<usize, LocalError> {
    germ.terms()
        .filter(|(m, _)| m.exp(Var::Y) == 0)
        .map(|(m, _)| m.exp(Var::X) as usize)
        .min()
        .ok_or(LocalError::ComponentOnLine)
}

/// Local data at a marked point of a curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalInvariants {
    pub milnor: usize,
    pub tjurina: usize,
    pub t_z: Option<usize>,
    pub intersection_with_line: Option<usize>,
    /// Largest truncation degree needed to certify any of the colengths.
    pub truncation_used: u32,
}

pub fn local_invariants(f: &Polynomial, point: &MarkedPoint) -> Result<LocalInvariants, LocalError> {
    let germ = germ_at(f, point)?;
    if !germ.coeff(&Monomial::ONE).is_zero() {
        return Err(LocalError::NotOnCurve(point.label.clone()));
    }
    let m = colength(&[germ.partial(Var::X), germ.partial(Var::Y)])?;
    let t = colength(&[germ.clone(), germ.partial(Var::X), germ.partial(Var::Y)])?;
    let mut truncation_used = m.truncation.max(t.truncation);
    let (t_z, i) = if point.is_at_infinity() {
        let i = intersection_multiplicity_with_line(&germ)?;
        let v = Polynomial::y(germ.context(), Arity::Affine);
        let tz = colength(&[germ.partial(Var::X), &v * &germ.partial(Var::Y), germ.clone()])?;
        truncation_used = truncation_used.max(tz.truncation);
        (Some(tz.value), Some(i))
    } else {
        (None, None)
    };
    Ok(LocalInvariants {
        milnor: m.value,
        tjurina: t.value,
        t_z,
        intersection_with_line: i,
        truncation_used,
    })
}

/// Positive coprime weights `(w_x, w_y, w_deg)` making every monomial of the
/// support weighted-homogeneous of degree `w_deg`, if the support lies on a
/// line with positive normal. A single monomial gets weights `(1, 1)`.
pub fn quasi_homogeneous_weights(germ: &Polynomial) -> Option<(u32, u32, u32)> {
    let support: Vec<(i64, i64)> = germ
        .terms()
        .map(|(m, _)| (m.exp(Var::X) as i64, m.exp(Var::Y) as i64))
        .collect();
    let &(a0, b0) = support.first()?;
    if support.len() == 1 {
        return Some((1, 1, (a0 + b0) as u32));
    }
    let &(a1, b1) = support.iter().find(|p| **p != (a0, b0))?;
    let (da, db) = (a1 - a0, b1 - b0);
    // Normal (w_x, w_y) ∝ (db, −da) must have both entries positive.
    let (mut wx, mut wy) = (db, -da);
    if wx < 0 {
        wx = -wx;
        wy = -wy;
    }
    if wx <= 0 || wy <= 0 {
        return None;
    }
    let g = wx.gcd(&wy);
    let (wx, wy) = (wx / g, wy / g);
    let deg = a0 * wx + b0 * wy;
    if support.iter().all(|&(a, b)| a * wx + b * wy == deg) {
        Some((wx as u32, wy as u32, deg as u32))
    } else {
        None
    }
}

/// Applies `x ↦ a x + b y`, `y ↦ c x + d y` to a germ.
pub fn linear_change(germ: &Polynomial, m: [[FieldElement; 2]; 2]) -> Result<Polynomial, LocalError> {
    let ctx = germ.context().clone();
    let x = Polynomial::x(&ctx, Arity::Affine);
    let y = Polynomial::y(&ctx, Arity::Affine);
    let img_x = &x.scale(&m[0][0]) + &y.scale(&m[0][1]);
    let img_y = &x.scale(&m[1][0]) + &y.scale(&m[1][1]);
    Ok(germ.substitute(&[img_x, img_y])?)
}
