//! Bundled constructions and the end-to-end verification pipeline.
//!
//! A fixture is an [`AnalysisConfig`] together with the values the
//! construction is expected to produce. [`verify`] runs every check and
//! compares; [`analyze`] runs the checks a configuration asks for and reports
//! the computed values.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{parse_form, parse_scalar, AnalysisConfig, ConfigError, DirectionSpec};
use crate::darboux::{
    curve_rigidity, deg_x, dimension_formula_check, expected_dimension, genericity_points_condition,
    is_integral_curve, kernel_space, Curve, DarbouxError,
};
use crate::eta::{
    canonical_integer_vector, certificate_search, eta_at_infinity, eta_reasoning, predicted_eta_general,
    CofactorData, EtaError, RatioVector,
};
use crate::field::{FieldContext, FieldElement};
use crate::focal::{
    default_ambient, focal_jacobian, focal_values, normalize_at, Direction, FocalError, Gauge,
};
use crate::local::{germ_at, linear_change, local_invariants, LocalError, MarkedPoint, SingularityType};
use crate::poly::{Arity, DifferentialForm, Monomial, Polynomial, Var};
use crate::report::{element_json, Check, Status, VerificationReport};

pub const DEFAULT_PRIME: u64 = 10007;
pub const DEFAULT_FOCAL_ORDER: usize = 10;

const FIXTURE_SOURCES: [(&str, &str); 6] = [
    ("quartic-d2", include_str!("../fixtures/quartic-d2.json")),
    ("9.6", include_str!("../fixtures/9.6.json")),
    ("9.8", include_str!("../fixtures/9.8.json")),
    ("9.9", include_str!("../fixtures/9.9.json")),
    ("9.10", include_str!("../fixtures/9.10.json")),
    ("9.14", include_str!("../fixtures/9.14.json")),
];

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("unknown construction '{0}'")]
    UnknownFixture(String),
    #[error("fixture {id}: {source}")]
    Fixture {
        id: String,
        #[source]
        source: ConfigError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaRowSpec {
    pub points: Vec<String>,
    pub row: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericitySpec {
    pub points: Vec<String>,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigiditySpec {
    pub curve: String,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalSpec {
    /// Linear coefficient `c` of the normal form, as printed by the field.
    pub c: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    pub groups: Vec<Vec<String>>,
    pub certificate: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub deg_x: i64,
    pub delta: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_v: Option<usize>,
    /// Tjurina number at affine points, modified Tjurina number at points at
    /// infinity.
    #[serde(default)]
    pub local: BTreeMap<String, usize>,
    #[serde(default)]
    pub eta: Vec<EtaRowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_infinity: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<i64>>,
    #[serde(default)]
    pub genericity: Vec<GenericitySpec>,
    #[serde(default)]
    pub rigidity: Vec<RigiditySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal: Option<FocalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionFixture {
    pub id: String,
    pub title: String,
    /// Steiner's experimental ideal, when the construction has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steiner_ideal: Option<String>,
    /// Żołądek family listed alongside, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoladek: Option<String>,
    pub table_entry: String,
    /// Name of a linear factor of the displayed form: the core analysis runs
    /// on the form divided by it, and the full form is certified with it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_divisor: Option<String>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub config: AnalysisConfig,
    pub expected: Expected,
}

/// Static metadata for `list-constructions`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixtureMeta {
    pub id: String,
    pub title: String,
    pub steiner_ideal: Option<String>,
    pub zoladek: Option<String>,
    pub table_entry: String,
}

pub fn fixture_ids() -> Vec<&'static str> {
    FIXTURE_SOURCES.iter().map(|(id, _)| *id).collect()
}

pub fn load_fixture(id: &str) -> Result<ConstructionFixture, ConstructionError> {
    let (_, text) = FIXTURE_SOURCES
        .iter()
        .find(|(fid, _)| *fid == id)
        .ok_or_else(|| ConstructionError::UnknownFixture(id.to_string()))?;
    serde_json::from_str(text).map_err(|e| ConstructionError::Fixture {
        id: id.to_string(),
        source: ConfigError::Json(e),
    })
}

pub fn list_fixtures() -> Vec<FixtureMeta> {
    fixture_ids()
        .into_iter()
        .map(|id| {
            let f = load_fixture(id).expect("bundled fixtures parse");
            FixtureMeta {
                id: f.id,
                title: f.title,
                steiner_ideal: f.steiner_ideal,
                zoladek: f.zoladek,
                table_entry: f.table_entry,
            }
        })
        .collect()
}

/// Runtime choices for a verification run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Environment {
    /// Overrides the prime used for focal values.
    pub prime: Option<u64>,
    /// Run the focal-value checks (k).
    pub focal: bool,
    /// Also compute the Jacobian rank when the fixture records one.
    pub tangent_rank: bool,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            prime: None,
            focal: true,
            tangent_rank: true,
        }
    }
}

/// Maps an error to a check outcome: non-finiteness and missing square
/// roots are inconclusive, everything else is a failure.
trait Verdict: std::fmt::Display {
    fn inconclusive(&self) -> bool;
}

impl Verdict for DarbouxError {
    fn inconclusive(&self) -> bool {
        matches!(self, DarbouxError::NotFinite { .. })
    }
}

impl Verdict for LocalError {
    fn inconclusive(&self) -> bool {
        matches!(self, LocalError::NotFiniteColength { .. })
    }
}

impl Verdict for EtaError {
    fn inconclusive(&self) -> bool {
        matches!(self, EtaError::Darboux(e) if e.inconclusive())
    }
}

impl Verdict for FocalError {
    fn inconclusive(&self) -> bool {
        match self {
            FocalError::SquareRootUnavailable | FocalError::CharacteristicTooSmall { .. } => true,
            FocalError::Linalg(e) => e.to_string().contains("pivot"),
            FocalError::Darboux(e) => e.inconclusive(),
            _ => false,
        }
    }
}

impl Verdict for ConfigError {
    fn inconclusive(&self) -> bool {
        false
    }
}

fn from_error<E: Verdict>(name: &str, expected: Value, e: &E) -> Check {
    if e.inconclusive() {
        Check::inconclusive(name, expected, e)
    } else {
        Check::failed(name, expected, e)
    }
}

/// Compares with the expected value when one is given; otherwise records the
/// computed value as informational.
fn value_check(name: &str, expected: Option<Value>, computed: Value) -> Check {
    match expected {
        Some(e) => Check::compare(name, e, computed),
        None => Check {
            name: name.to_string(),
            expected: Value::Null,
            computed,
            status: Status::Pass,
        },
    }
}

/// Everything a run needs, parsed once.
struct Job {
    cfg: AnalysisConfig,
    ctx: FieldContext,
    point_ctx: FieldContext,
    /// Form used for the analysis (the displayed form, divided by the base
    /// divisor if there is one).
    omega: Option<DifferentialForm>,
    /// The displayed form.
    full_omega: Option<DifferentialForm>,
    /// Degree of `omega`.
    d: u32,
    curves: Vec<Curve>,
    union: Curve,
    union_names: Vec<String>,
    groups: Vec<Curve>,
    points: Vec<MarkedPoint>,
}

impl Job {
    fn new(cfg: &AnalysisConfig, base_divisor: Option<&str>) -> Result<Job, ConfigError> {
        let ctx = cfg.context()?;
        let point_ctx = cfg.point_context()?;
        let curves = cfg.curves(&ctx)?;
        let full_omega = match &cfg.form {
            Some(_) => Some(cfg.form(&ctx)?),
            None => None,
        };
        let (omega, d) = match (&full_omega, base_divisor) {
            (Some(om), Some(name)) => {
                let divisor = cfg.curve(name, &ctx)?.poly.dehomogenize(Var::Z);
                let p = affine(&om.p).exact_div(&divisor)?;
                let q = affine(&om.q).exact_div(&divisor)?;
                let d = om.degree - divisor.degree().unwrap_or(0);
                (Some(DifferentialForm::new(p, q, d)?), d)
            }
            (Some(om), None) => (Some(om.clone()), om.degree),
            (None, _) => (None, cfg.degree),
        };
        let union_names = cfg.union_names();
        let union = cfg.group(&union_names, &ctx)?;
        let groups = cfg
            .groups()
            .iter()
            .map(|g| cfg.group(g, &ctx))
            .collect::<Result<Vec<_>, _>>()?;
        let points = cfg.points(&point_ctx)?;
        Ok(Job {
            cfg: cfg.clone(),
            ctx,
            point_ctx,
            omega,
            full_omega,
            d,
            curves,
            union,
            union_names,
            groups,
            points,
        })
    }

    fn point(&self, label: &str) -> Option<&MarkedPoint> {
        self.points.iter().find(|p| p.label == label)
    }

    fn focal_prime(&self, env: &Environment) -> u64 {
        env.prime
            .or(self.cfg.options.prime)
            .or(self.cfg.prime)
            .unwrap_or(DEFAULT_PRIME)
    }
}

fn affine(p: &Polynomial) -> Polynomial {
    match p.arity() {
        Arity::Affine => p.clone(),
        Arity::Projective => p.dehomogenize(Var::Z),
    }
}

/// Runs every check of a bundled construction and compares with the
/// recorded values.
pub fn verify(id: &str, env: &Environment) -> Result<VerificationReport, ConstructionError> {
    let fixture = load_fixture(id)?;
    verify_fixture(&fixture, env)
}

pub fn verify_fixture(fixture: &ConstructionFixture, env: &Environment) -> Result<VerificationReport, ConstructionError> {
    let job = Job::new(&fixture.config, fixture.base_divisor.as_deref()).map_err(|source| {
        ConstructionError::Fixture {
            id: fixture.id.clone(),
            source,
        }
    })?;
    let checks = run_checks(&job, Some(&fixture.expected), fixture.base_divisor.as_deref(), None, env);
    Ok(VerificationReport::new(
        fixture.id.clone(),
        environment(&job, env),
        checks,
    ))
}

/// Runs the checks requested by a configuration (all of them if none are
/// listed) and records the computed values.
pub fn analyze(cfg: &AnalysisConfig, env: &Environment) -> Result<VerificationReport, ConfigError> {
    let job = Job::new(cfg, None)?;
    let selected: Option<Vec<&str>> = if cfg.checks.is_empty() {
        None
    } else {
        Some(cfg.checks.iter().map(String::as_str).collect())
    };
    let checks = run_checks(&job, None, None, selected.as_deref(), env);
    Ok(VerificationReport::new("analysis", environment(&job, env), checks))
}

fn environment(job: &Job, env: &Environment) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("field".into(), json!(job.ctx.label()));
    m.insert("point_field".into(), json!(job.point_ctx.label()));
    m.insert("prime".into(), json!(job.focal_prime(env)));
    m.insert("degree".into(), json!(job.d));
    m.insert(
        "conventions".into(),
        json!({
            "form": "omega = P dx + Q dy encodes x' = Q, y' = -P",
            "cofactor": "dC ^ omega = C K, dC ^ omega = C_x Q - C_y P",
            "certificate": "sum alpha_i K_i + alpha_0 d(omega) = 0, primitive integers, first nonzero entry positive",
            "focal_gauge": Gauge::default().tag(),
            "focal_ambient": "all monomial perturbations of p and q of degrees 2..d",
            "colength_rule": "truncation stops at the first N with d_N = d_(N-1)",
        }),
    );
    m
}

type CheckFn<'a> = Box<dyn Fn() -> Vec<Check> + Send + Sync + 'a>;

fn run_checks(
    job: &Job,
    expected: Option<&Expected>,
    base_divisor: Option<&str>,
    selected: Option<&[&str]>,
    env: &Environment,
) -> Vec<Check> {
    let wanted = |key: &str| selected.is_none_or(|s| s.contains(&key));
    let mut tasks: Vec<CheckFn> = Vec::new();
    if wanted("integral") {
        tasks.push(Box::new(move || integral_checks(job, base_divisor)));
    }
    if wanted("square-free") {
        tasks.push(Box::new(move || square_free_checks(job)));
    }
    let need_degx = wanted("degx") || wanted("local") || wanted("delta");
    if need_degx {
        tasks.push(Box::new(move || degx_related_checks(job, expected, &wanted)));
    }
    if wanted("dimension") {
        tasks.push(Box::new(move || dimension_checks(job, expected)));
    }
    if wanted("eta") {
        tasks.push(Box::new(move || eta_checks(job, expected)));
    }
    if wanted("certificate") {
        tasks.push(Box::new(move || certificate_checks(job, expected)));
    }
    if wanted("genericity") {
        tasks.push(Box::new(move || genericity_checks(job, expected)));
    }
    if wanted("rigidity") {
        tasks.push(Box::new(move || rigidity_checks(job, expected)));
    }
    let run_focal = (env.focal && (selected.is_none() || wanted("focal") || wanted("tangent-rank")))
        && job.omega.is_some()
        && (expected.is_none_or(|e| e.focal.is_some()));
    if run_focal {
        let rank = env.tangent_rank && wanted("tangent-rank");
        tasks.push(Box::new(move || focal_checks(job, expected, env, rank)));
    }
    // Independent groups run concurrently; the report keeps their order.
    tasks.par_iter().map(|t| t()).collect::<Vec<_>>().concat()
}

// ---- (a) integral curves -------------------------------------------------

fn integral_checks(job: &Job, base_divisor: Option<&str>) -> Vec<Check> {
    let mut out = Vec::new();
    let Some(full) = &job.full_omega else {
        return out;
    };
    let mut flags = BTreeMap::new();
    let mut ok = true;
    for c in &job.curves {
        match is_integral_curve(&c.poly, &homog(full)) {
            Ok(k) => {
                ok &= k.is_some();
                flags.insert(c.name.clone(), json!(k.is_some()));
            }
            Err(e) => return vec![from_error("integral-curves", json!(true), &e)],
        }
    }
    out.push(Check::property("integral-curves", json!(flags), ok));
    if base_divisor.is_some() {
        let base = job.omega.as_ref().expect("base form exists");
        let mut flags = BTreeMap::new();
        let mut ok = true;
        for name in &job.union_names {
            let c = job.curves.iter().find(|c| &c.name == name).expect("union curve");
            match is_integral_curve(&c.poly, &homog(base)) {
                Ok(k) => {
                    ok &= k.is_some();
                    flags.insert(c.name.clone(), json!(k.is_some()));
                }
                Err(e) => return vec![from_error("integral-curves-base", json!(true), &e)],
            }
        }
        out.push(Check::property("integral-curves-base", json!(flags), ok));
    }
    out
}

fn homog(omega: &DifferentialForm) -> DifferentialForm {
    crate::darboux::homogeneous_form(omega).expect("forms of the declared degree homogenize")
}

// ---- (b) square-free, no component at infinity ---------------------------

fn square_free_checks(job: &Job) -> Vec<Check> {
    let sf = match job.union.is_square_free() {
        Ok(b) => Check::property("square-free", json!(b), b),
        Err(e) => from_error("square-free", json!(true), &e),
    };
    let inf = job.union.has_component_at_infinity();
    vec![sf, Check::property("no-component-at-infinity", json!(!inf), !inf)]
}

// ---- (c) deg X, linkage; (d) local cross-check; (e) δ --------------------

fn degx_related_checks(job: &Job, expected: Option<&Expected>, wanted: &dyn Fn(&str) -> bool) -> Vec<Check> {
    let mut out = Vec::new();
    let link = match deg_x(&job.union) {
        Ok(l) => l,
        Err(e) => {
            let exp = expected.map_or(Value::Null, |x| json!(x.deg_x));
            return vec![from_error("deg-x", exp, &e)];
        }
    };
    if wanted("degx") {
        out.push(value_check("deg-x", expected.map(|e| json!(e.deg_x)), json!(link.deg_x)));
        let e = link.e as i64;
        out.push(Check::property(
            "linkage",
            json!({"deg_x": link.deg_x, "deg_y": link.deg_y, "(e-1)^2": (e - 1) * (e - 1)}),
            link.deg_x + link.deg_y == (e - 1) * (e - 1),
        ));
    }
    if wanted("local") && !job.points.is_empty() {
        out.extend(local_checks(job, expected, link.deg_x));
    }
    if wanted("delta") {
        let delta = expected_dimension(job.d, job.union.degree, link.deg_x);
        out.push(value_check("delta", expected.map(|e| json!(e.delta)), json!(delta)));
    }
    out
}

fn local_checks(job: &Job, expected: Option<&Expected>, deg_x_value: i64) -> Vec<Check> {
    let union = match job.union.to_context(&job.point_ctx) {
        Ok(u) => u,
        Err(e) => return vec![from_error("local-invariants", Value::Null, &e)],
    };
    let mut computed = BTreeMap::new();
    let mut types_ok = true;
    let mut total = 0usize;
    for p in &job.points {
        match local_invariants(&union.poly, p) {
            Ok(inv) => {
                let contribution = inv.t_z.unwrap_or(inv.tjurina);
                total += contribution;
                if let Some(t) = p.declared_type {
                    let m = t.milnor() as usize;
                    types_ok &= inv.milnor == m && inv.tjurina == m;
                }
                computed.insert(p.label.clone(), contribution);
            }
            Err(e) => return vec![from_error("local-invariants", Value::Null, &e)],
        }
    }
    let mut out = vec![
        value_check(
            "local-invariants",
            expected.map(|e| json!(e.local)),
            json!(computed),
        ),
        Check::property("declared-types", json!(types_ok), types_ok),
    ];
    // The global degree is the sum of the local contributions over all
    // points of X; with every special point listed the sums agree.
    out.push(Check::compare(
        "local-sum",
        json!(deg_x_value),
        json!(total),
    ));
    out
}

// ---- (e, f) dimension of V and the dimension formula ----------------------

fn dimension_checks(job: &Job, expected: Option<&Expected>) -> Vec<Check> {
    let mut out = Vec::new();
    match kernel_space(&job.union, job.d) {
        Ok(v) => out.push(value_check(
            "dim-v",
            expected.and_then(|e| e.dim_v).map(|x| json!(x)),
            json!(v.dim),
        )),
        Err(e) => out.push(from_error("dim-v", Value::Null, &e)),
    }
    match dimension_formula_check(&job.union, job.d) {
        Ok(f) => out.push(Check::property(
            "dimension-formula",
            json!({"kernel": f.kernel_dim, "hamiltonian": f.hamiltonian_dim, "cofactor_slice": f.cofactor_dim}),
            f.holds(),
        )),
        Err(e) => out.push(from_error("dimension-formula", json!(true), &e)),
    }
    out
}

// ---- (g) η ----------------------------------------------------------------

/// Weighted orders of the group germs at a point, in coordinates adapted to
/// the declared type of the union, and the prediction built from them.
fn predicted_row(job: &Job, groups: &[Curve], point: &MarkedPoint) -> Option<RatioVector> {
    let t = point.declared_type?;
    if point.is_at_infinity() {
        return None;
    }
    let (wx, wy, _) = t.weights();
    let ctx = &job.point_ctx;
    let germs: Vec<Polynomial> = groups
        .iter()
        .map(|g| germ_at(&g.poly, point))
        .collect::<Result<_, _>>()
        .ok()?;
    let germs = if wx == wy {
        germs
    } else {
        // A_n with n ≥ 2: the tangent cone is l²; move l to the heavier
        // coordinate.
        if !matches!(t, SingularityType::A(n) if n >= 2) {
            return None;
        }
        let union = germs.iter().fold(Polynomial::constant(ctx.one(), Arity::Affine), |a, g| &a * g);
        let cone = union.homogeneous_component(2);
        let (a, b) = (cone.coeff(&Monomial::new(2, 0, 0)), cone.coeff(&Monomial::new(1, 1, 0)));
        let (alpha, beta) = if a.is_zero() {
            (ctx.zero(), ctx.one())
        } else {
            (&a + &a, b)
        };
        let heavy_is_x = wx > wy;
        let m = if !alpha.is_zero() {
            let inv = alpha.inv().ok()?;
            [[inv.clone(), -(&beta * &inv)], [ctx.zero(), ctx.one()]]
        } else {
            let inv = beta.inv().ok()?;
            [[ctx.zero(), ctx.one()], [inv, ctx.zero()]]
        };
        // `m` sends l to the new x; swap when the heavier weight is on y.
        let m = if heavy_is_x { m } else { [[m[0][1].clone(), m[0][0].clone()], [m[1][1].clone(), m[1][0].clone()]] };
        germs
            .iter()
            .map(|g| linear_change(g, m.clone()))
            .collect::<Result<_, _>>()
            .ok()?
    };
    let orders: Vec<u32> = germs
        .iter()
        .map(|g| {
            g.terms()
                .map(|(m, _)| m.exp(Var::X) * wx + m.exp(Var::Y) * wy)
                .min()
                .unwrap_or(0)
        })
        .collect();
    predicted_eta_general(ctx, &orders, wx, wy).ok()
}

fn eta_checks(job: &Job, expected: Option<&Expected>) -> Vec<Check> {
    let Some(omega) = &job.omega else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let pctx = &job.point_ctx;
    let data = omega
        .to_context(pctx)
        .map_err(EtaError::from)
        .and_then(|om| {
            let gs = job
                .groups
                .iter()
                .map(|g| g.to_context(pctx))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((CofactorData::new(&om, &gs)?, gs))
        });
    let (data, groups) = match data {
        Ok(d) => d,
        Err(e) => return vec![from_error("eta-points", Value::Null, &e)],
    };
    let rows: Vec<(Vec<String>, Option<Vec<i64>>)> = match expected {
        Some(e) => e.eta.iter().map(|r| (r.points.clone(), Some(r.row.clone()))).collect(),
        None => job
            .points
            .iter()
            .filter(|p| !p.is_at_infinity())
            .map(|p| (vec![p.label.clone()], None))
            .collect(),
    };
    let mut computed = BTreeMap::new();
    let mut predicted = BTreeMap::new();
    let mut all_ok = true;
    let mut prediction_ok = true;
    let mut table_rows = Vec::new();
    for (labels, row) in &rows {
        let target = row.as_ref().map(|r| RatioVector::from_i64(pctx, r));
        if let Some(t) = &target {
            table_rows.push(t.clone());
        }
        for label in labels {
            let Some(p) = job.point(label) else {
                all_ok = false;
                computed.insert(label.clone(), json!("missing point"));
                continue;
            };
            match data.eta_at(&p.coords) {
                Ok(v) => {
                    if let Some(t) = &target {
                        all_ok &= v.matches_or_degenerate(t);
                    }
                    computed.insert(label.clone(), json!(v.to_string()));
                }
                Err(e) => return vec![from_error("eta-points", Value::Null, &e)],
            }
            if let Some(pred) = predicted_row(job, &groups, p) {
                if let Some(t) = &target {
                    prediction_ok &= &pred == t;
                }
                predicted.insert(label.clone(), json!(pred.to_string()));
            }
        }
    }
    let exp_json = expected.map(|e| {
        json!(e
            .eta
            .iter()
            .map(|r| json!({"points": r.points, "row": r.row}))
            .collect::<Vec<_>>())
    });
    out.push(Check {
        name: "eta-points".into(),
        expected: exp_json.clone().unwrap_or(Value::Null),
        computed: json!(computed),
        status: if all_ok { Status::Pass } else { Status::Fail },
    });
    if !predicted.is_empty() {
        out.push(Check {
            name: "eta-predicted-by-type".into(),
            expected: exp_json.unwrap_or(Value::Null),
            computed: json!(predicted),
            status: if prediction_ok { Status::Pass } else { Status::Fail },
        });
    }
    if let Some(row) = expected.and_then(|e| e.eta_infinity.clone()) {
        out.push(eta_infinity_check(job, omega, &row));
        table_rows.push(RatioVector::from_i64(pctx, &row));
    }
    // The kernel of the table of rows must contain the certificate.
    if let Some(cert) = expected.and_then(|e| e.certificate.clone()) {
        match eta_reasoning(&table_rows) {
            Ok(kernel) => {
                let vecs: Vec<Value> = kernel
                    .iter()
                    .map(|v| match canonical_integer_vector(v) {
                        Some(iv) if !matches!(pctx, FieldContext::Prime(_)) => json!(bigints(&iv)),
                        _ => json!(v.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
                    })
                    .collect();
                let target = RatioVector::from_i64(pctx, &cert);
                let ok = kernel.len() == 1 && RatioVector::new(kernel[0].clone()) == target;
                out.push(Check {
                    name: "eta-kernel".into(),
                    expected: json!([cert]),
                    computed: json!(vecs),
                    status: if ok { Status::Pass } else { Status::Fail },
                });
            }
            Err(e) => out.push(from_error("eta-kernel", json!([cert]), &e)),
        }
    }
    out
}

fn bigints(v: &[BigInt]) -> Vec<Value> {
    v.iter()
        .map(|b| match i64::try_from(b) {
            Ok(x) => json!(x),
            Err(_) => json!(b.to_string()),
        })
        .collect()
}

fn eta_infinity_check(job: &Job, omega: &DifferentialForm, row: &[i64]) -> Check {
    let name = "eta-infinity";
    let expected = json!(row);
    let result = (|| -> Result<_, EtaError> {
        // Polynomial identity on z = 0 over the main field.
        let main = eta_at_infinity(omega, &job.groups, &[])?;
        // Evaluations at the marked points at infinity in the point field.
        let pctx = &job.point_ctx;
        let om = omega.to_context(pctx)?;
        let gs = job
            .groups
            .iter()
            .map(|g| g.to_context(pctx))
            .collect::<Result<Vec<_>, _>>()?;
        let local = eta_at_infinity(&om, &gs, &job.points)?;
        Ok((main, local))
    })();
    match result {
        Ok((main, local)) => {
            let predicted = main.predicted.clone();
            let target = RatioVector::from_i64(&job.ctx, row);
            let evals: BTreeMap<String, String> = local
                .evaluations
                .iter()
                .map(|e| (e.label.clone(), e.value.to_string()))
                .collect();
            let ok = predicted == target && main.holds() && local.holds();
            Check {
                name: name.into(),
                expected,
                computed: json!({
                    "predicted": predicted.to_string(),
                    "points_at_infinity": main.points_at_infinity,
                    "restricted_identity": main.restricted_identity,
                    "evaluations": evals,
                }),
                status: if ok { Status::Pass } else { Status::Fail },
            }
        }
        Err(e) => from_error(name, expected, &e),
    }
}

// ---- (h) certificates -----------------------------------------------------

fn certificate_check(
    name: &str,
    omega: &DifferentialForm,
    groups: &[Curve],
    expected: Option<&[i64]>,
) -> Vec<Check> {
    let exp = expected.map(|e| json!(e));
    match certificate_search(omega, groups) {
        Ok(Some(cert)) => {
            let relation = cert.integer_relation().map(|v| bigints(&v));
            let mut out = vec![value_check(name, exp, json!(relation))];
            let residual_zero = cert
                .residual(omega, groups)
                .map(|r| r.is_zero())
                .unwrap_or(false)
                && cert
                    .cleared_residual(omega, groups)
                    .map(|r| r.is_zero())
                    .unwrap_or(false);
            out.push(Check::property(
                format!("{name}-residual"),
                json!({"identity": cert.to_string(), "kind": format!("{:?}", cert.kind)}),
                residual_zero,
            ));
            out
        }
        Ok(None) => vec![match exp {
            Some(e) => Check::failed(name, e, "no relation among the cofactors and d(omega)"),
            None => Check::property(name, Value::Null, false),
        }],
        Err(e) => vec![from_error(name, exp.unwrap_or(Value::Null), &e)],
    }
}

fn certificate_checks(job: &Job, expected: Option<&Expected>) -> Vec<Check> {
    let Some(omega) = &job.omega else {
        return Vec::new();
    };
    let mut out = certificate_check(
        "certificate",
        omega,
        &job.groups,
        expected.and_then(|e| e.certificate.as_deref()),
    );
    if let (Some(ext), Some(full)) = (expected.and_then(|e| e.extension.as_ref()), &job.full_omega) {
        let groups: Result<Vec<Curve>, _> = ext.groups.iter().map(|g| job.cfg.group(g, &job.ctx)).collect();
        match groups {
            Ok(gs) => out.extend(certificate_check(
                "extension-certificate",
                full,
                &gs,
                Some(&ext.certificate),
            )),
            Err(e) => out.push(from_error("extension-certificate", json!(ext.certificate), &e)),
        }
    }
    out
}

// ---- (i) genericity, (j) rigidity -----------------------------------------

fn genericity_checks(job: &Job, expected: Option<&Expected>) -> Vec<Check> {
    let Some(exp) = expected else {
        return Vec::new();
    };
    exp.genericity
        .iter()
        .map(|g| {
            let name = format!("genericity-degree-{}:{}", g.degree, g.points.join(","));
            let pts: Option<Vec<[FieldElement; 3]>> =
                g.points.iter().map(|l| job.point(l).map(|p| p.coords.clone())).collect();
            match pts {
                None => Check::failed(&name, json!(true), "unknown point label"),
                Some(pts) => match genericity_points_condition(&pts, g.degree) {
                    Ok(b) => Check::property(&name, json!(b), b),
                    Err(e) => from_error(&name, json!(true), &e),
                },
            }
        })
        .collect()
}

fn rigidity_checks(job: &Job, expected: Option<&Expected>) -> Vec<Check> {
    let (Some(exp), Some(omega)) = (expected, &job.omega) else {
        return Vec::new();
    };
    exp.rigidity
        .iter()
        .map(|r| {
            let name = format!("rigidity:{}", r.curve);
            match job.cfg.curve(&r.curve, &job.ctx) {
                Ok(c) => match curve_rigidity(omega, &c) {
                    Ok(v) => Check::compare(&name, json!(r.value), json!(v)),
                    Err(e) => from_error(&name, json!(r.value), &e),
                },
                Err(e) => from_error(&name, json!(r.value), &e),
            }
        })
        .collect()
}

// ---- (k) focal values -----------------------------------------------------

fn focal_checks(job: &Job, expected: Option<&Expected>, env: &Environment, with_rank: bool) -> Vec<Check> {
    let omega = job.omega.as_ref().expect("focal checks need a form");
    let spec = expected.and_then(|e| e.focal.as_ref());
    let p = job.focal_prime(env);
    let n = job.cfg.options.focal_order.unwrap_or(DEFAULT_FOCAL_ORDER);
    let result = (|| -> Result<Vec<Check>, FocalCheckError> {
        let fp = FieldContext::prime(p).map_err(FocalError::from)?;
        let om = omega.to_context(&fp).map_err(FocalError::from)?;
        // The recorded equilibrium is only meaningful for the recorded prime.
        let recorded = job.cfg.options.prime.unwrap_or(DEFAULT_PRIME) == p;
        let (nf, used_record) = match (&job.cfg.options.focal_point, recorded) {
            (Some(coords), true) => {
                if coords.len() != 2 {
                    return Err(ConfigError::Coordinate("focal_point".into()).into());
                }
                let k = job.cfg.options.focal_extension.unwrap_or(1);
                let work = if k == 1 {
                    fp.clone()
                } else {
                    FieldContext::extension(p, k).map_err(FocalError::from)?
                };
                let point = [
                    work.embed(&parse_scalar(&coords[0], &fp)?).map_err(FocalError::from)?,
                    work.embed(&parse_scalar(&coords[1], &fp)?).map_err(FocalError::from)?,
                ];
                (normalize_at(&om, &point)?.0, true)
            }
            _ => (normalize_first_center_candidate(&om, p)?, false),
        };
        let spec = if used_record { spec } else { None };
        let seq = focal_values(&nf, n, Gauge::XPowerZero)?;
        let residual_zero = seq.identity_residual(&nf)?.is_zero();
        let alt = focal_values(&nf, n, Gauge::YPowerZero)?;
        let mut out = vec![
            value_check("focal-normal-form", spec.map(|s| json!(s.c)), json!(nf.c.to_string())),
            Check::compare(
                "focal-values-vanish",
                Value::Array(vec![element_json(&nf.context().zero()); n]),
                Value::Array(seq.s.iter().map(element_json).collect()),
            ),
            Check::property("focal-identity", json!(residual_zero), residual_zero),
            Check::compare(
                "focal-gauge-independence",
                json!(seq.vanishing_pattern()),
                json!(alt.vanishing_pattern()),
            ),
        ];
        if expected.is_none() {
            // Without a fixture there is no claim that the values vanish.
            out[1].expected = Value::Null;
            out[1].status = Status::Pass;
        }
        if with_rank && spec.is_none_or(|s| s.rank.is_some()) {
            let dirs = ambient(job, nf.context(), nf.degree)?;
            let jac = focal_jacobian(&nf, &dirs, n)?;
            let computed = json!({"rank": jac.rank, "directions": jac.directions, "tangent_dimension": jac.tangent_dimension()});
            let exp = spec.and_then(|s| {
                Some(json!({"rank": s.rank?, "directions": s.directions?, "tangent_dimension": s.directions? - s.rank?}))
            });
            out.push(value_check("focal-jacobian-rank", exp, computed));
            out.push(Check::property(
                "tangent-dimension-at-most-9",
                json!(jac.tangent_dimension()),
                jac.tangent_dimension() <= 9,
            ));
        }
        Ok(out)
    })();
    match result {
        Ok(c) => c,
        Err(FocalCheckError::Focal(e)) => vec![from_error("focal-values-vanish", json!(vec![0; n]), &e)],
        Err(FocalCheckError::Config(e)) => vec![from_error("focal-values-vanish", json!(vec![0; n]), &e)],
    }
}

/// Normalizes at the first equilibrium with vanishing trace and nonzero
/// determinant, over `𝔽_p` or, when the square root is missing, `𝔽_{p²}`.
fn normalize_first_center_candidate(om: &DifferentialForm, p: u64) -> Result<crate::focal::NormalForm, FocalError> {
    let mut last = FocalError::NotEquilibrium;
    for pt in crate::focal::equilibria(om)? {
        match normalize_at(om, &pt) {
            Ok((nf, _)) => return Ok(nf),
            Err(FocalError::SquareRootUnavailable) => {
                let ext = FieldContext::extension(p, 2)?;
                let lifted = [ext.embed(&pt[0])?, ext.embed(&pt[1])?];
                return Ok(normalize_at(om, &lifted)?.0);
            }
            Err(e @ FocalError::NotCenterCandidate { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

#[derive(Debug)]
enum FocalCheckError {
    Focal(FocalError),
    Config(ConfigError),
}

impl From<FocalError> for FocalCheckError {
    fn from(e: FocalError) -> Self {
        FocalCheckError::Focal(e)
    }
}

impl From<ConfigError> for FocalCheckError {
    fn from(e: ConfigError) -> Self {
        FocalCheckError::Config(e)
    }
}

fn ambient(job: &Job, ctx: &FieldContext, d: u32) -> Result<Vec<Direction>, FocalCheckError> {
    match &job.cfg.options.ambient {
        None => Ok(default_ambient(ctx, d)),
        Some(specs) => specs.iter().map(|s| direction(s, ctx)).collect(),
    }
}

fn direction(spec: &DirectionSpec, ctx: &FieldContext) -> Result<Direction, FocalCheckError> {
    let parse = |t: &Option<String>| -> Result<Polynomial, FocalCheckError> {
        match t {
            None => Ok(Polynomial::zero(ctx, Arity::Affine)),
            Some(text) => Ok(parse_form(text, "0", 1, ctx)?.p),
        }
    };
    Ok(Direction {
        label: spec.label.clone(),
        dp: parse(&spec.dp)?,
        dq: parse(&spec.dq)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_fixtures_with_table_metadata() {
        let list = list_fixtures();
        assert_eq!(list.len(), 6);
        let f914 = list.iter().find(|f| f.id == "9.14").unwrap();
        assert_eq!(f914.zoladek.as_deref(), Some("(CD_28)"));
        assert_eq!(f914.table_entry, "Construction");
        let f98 = list.iter().find(|f| f.id == "9.8").unwrap();
        assert_eq!(f98.zoladek, None);
        assert_eq!(f98.table_entry, "Construction");
    }

    #[test]
    fn fixture_polynomials_are_stored_verbatim() {
        let f = load_fixture("9.6").unwrap();
        assert_eq!(f.config.curves["Q"], "2*x^2+2*x*y+x+2*y+2");
        let f = load_fixture("9.10").unwrap();
        assert!(f.config.curves["C"].contains("(1/8)*(x+y-z)"));
    }

    #[test]
    fn unknown_fixture() {
        assert!(matches!(
            verify("9.7", &Environment::default()),
            Err(ConstructionError::UnknownFixture(_))
        ));
    }
}
