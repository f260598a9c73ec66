//! Inputs shared by the benchmarks: bundled constructions decoded once.

use darboux_core::config::AnalysisConfig;
use darboux_core::constructions::load_fixture;
use darboux_core::darboux::Curve;
use darboux_core::field::FieldContext;
use darboux_core::focal::{normalize_at, NormalForm};
use darboux_core::local::MarkedPoint;
use darboux_core::poly::DifferentialForm;

/// A construction decoded over its own field.
pub struct Workload {
    pub config: AnalysisConfig,
    pub union: Curve,
    pub groups: Vec<Curve>,
    pub form: Option<DifferentialForm>,
    pub points: Vec<MarkedPoint>,
}

pub fn workload(id: &str) -> Workload {
    let config = load_fixture(id).expect("bundled fixture").config;
    let ctx = config.context().expect("field");
    let union = config.group(&config.union_names(), &ctx).expect("union");
    let groups = config
        .groups()
        .iter()
        .map(|g| config.group(g, &ctx).expect("group"))
        .collect();
    let form = config.form(&ctx).ok();
    let pctx = config.point_context().expect("point field");
    let points = config.points(&pctx).expect("points");
    Workload {
        config,
        union,
        groups,
        form,
        points,
    }
}

/// The focal normal form at the recorded equilibrium of a construction.
pub fn focal_normal_form(id: &str) -> NormalForm {
    let config = load_fixture(id).expect("bundled fixture").config;
    let opts = &config.options;
    let p = opts.prime.expect("focal prime");
    let base = FieldContext::prime(p).expect("prime field");
    let ctx = match opts.focal_extension.unwrap_or(1) {
        1 => base.clone(),
        k => FieldContext::extension(p, k).expect("extension field"),
    };
    let omega = config.form(&base).expect("form");
    let pt = opts.focal_point.as_ref().expect("focal point");
    let coords = [
        ctx.embed(&darboux_core::config::parse_scalar(&pt[0], &base).unwrap()).unwrap(),
        ctx.embed(&darboux_core::config::parse_scalar(&pt[1], &base).unwrap()).unwrap(),
    ];
    normalize_at(&omega, &coords).expect("normal form").0
}
