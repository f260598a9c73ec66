//! Analysis jobs as restricted JSON documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::darboux::{Curve, DarbouxError};
use crate::field::{FieldContext, FieldElement, FieldError};
use crate::local::{LocalError, MarkedPoint, SingularityType};
use crate::parse::{parse_polynomial, PolyInputError};
use crate::poly::{Arity, DifferentialForm, Monomial, PolyError, Polynomial};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in {context}: {source}")]
    Polynomial {
        context: String,
        #[source]
        source: PolyInputError,
    },
    #[error("invalid coordinate '{0}'")]
    Coordinate(String),
    #[error("point '{0}' needs two affine or three projective coordinates")]
    CoordinateCount(String),
    #[error("unknown curve '{0}'")]
    UnknownCurve(String),
    #[error("unknown singularity type '{0}'")]
    UnknownType(String),
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error("the configuration has no differential form")]
    MissingForm,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    #[error(transparent)]
    Local(#[from] LocalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "Q")]
    pub q: String,
    pub d: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub label: String,
    /// Two affine or three projective coordinates, each an exact number such
    /// as `"-1/4"`.
    pub coords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionSpec {
    pub label: String,
    #[serde(default)]
    pub dp: Option<String>,
    #[serde(default)]
    pub dq: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Prime used for finite-field computations (focal values).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_order: Option<usize>,
    /// Affine equilibrium for focal values, coordinates in `𝔽_p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_point: Option<Vec<String>>,
    /// Degree of the extension of `𝔽_p` used for the normalization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_extension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<Vec<DirectionSpec>>,
    /// Cofactor groups for η and certificates: each group is the union of
    /// the named curves. Defaults to one group per curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<String>>>,
    /// Curves forming the configuration `U`; defaults to all curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub union: Option<Vec<String>>,
    /// Field in which the marked points live (defaults to the main field).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_field: Option<String>,
}

pub const KNOWN_CHECKS: &[&str] = &[
    "integral",
    "square-free",
    "degx",
    "local",
    "delta",
    "dimension",
    "eta",
    "certificate",
    "genericity",
    "rigidity",
    "focal",
    "tangent-rank",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
    pub degree: u32,
    pub curves: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FormSpec>,
    #[serde(default)]
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub options: Options,
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: AnalysisConfig = serde_json::from_str(text)?;
        for c in &cfg.checks {
            if !KNOWN_CHECKS.contains(&c.as_str()) {
                return Err(ConfigError::UnknownCheck(c.clone()));
            }
        }
        Ok(cfg)
    }

    pub fn context(&self) -> Result<FieldContext, ConfigError> {
        Ok(FieldContext::from_spec(&self.field, self.prime.or(self.options.prime))?)
    }

    pub fn point_context(&self) -> Result<FieldContext, ConfigError> {
        match &self.options.point_field {
            Some(spec) => Ok(FieldContext::from_spec(spec, self.options.prime.or(self.prime))?),
            None => self.context(),
        }
    }

    /// Curves in name order, homogenized.
    pub fn curves(&self, ctx: &FieldContext) -> Result<Vec<Curve>, ConfigError> {
        self.curves
            .iter()
            .map(|(name, text)| {
                Ok(Curve::new(name.clone(), parse_curve(name, text, ctx)?)?)
            })
            .collect()
    }

    pub fn curve(&self, name: &str, ctx: &FieldContext) -> Result<Curve, ConfigError> {
        let text = self
            .curves
            .get(name)
            .ok_or_else(|| ConfigError::UnknownCurve(name.to_string()))?;
        Ok(Curve::new(name, parse_curve(name, text, ctx)?)?)
    }

    /// Union of a list of named curves, named by joining the names with `∪`.
    pub fn group(&self, names: &[String], ctx: &FieldContext) -> Result<Curve, ConfigError> {
        let curves = names
            .iter()
            .map(|n| self.curve(n, ctx))
            .collect::<Result<Vec<_>, _>>()?;
        if curves.len() == 1 {
            return Ok(curves.into_iter().next().expect("one curve"));
        }
        let refs: Vec<&Curve> = curves.iter().collect();
        Ok(Curve::union(names.join("∪"), &refs)?)
    }

    pub fn groups(&self) -> Vec<Vec<String>> {
        self.options
            .groups
            .clone()
            .unwrap_or_else(|| self.curves.keys().map(|k| vec![k.clone()]).collect())
    }

    pub fn union_names(&self) -> Vec<String> {
        self.options
            .union
            .clone()
            .unwrap_or_else(|| self.curves.keys().cloned().collect())
    }

    pub fn form(&self, ctx: &FieldContext) -> Result<DifferentialForm, ConfigError> {
        let spec = self.form.as_ref().ok_or(ConfigError::MissingForm)?;
        parse_form(&spec.p, &spec.q, spec.d, ctx)
    }

    pub fn points(&self, ctx: &FieldContext) -> Result<Vec<MarkedPoint>, ConfigError> {
        self.points.iter().map(|p| parse_point(p, ctx)).collect()
    }

    pub fn point(&self, label: &str, ctx: &FieldContext) -> Result<MarkedPoint, ConfigError> {
        let spec = self
            .points
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| ConfigError::Coordinate(label.to_string()))?;
        parse_point(spec, ctx)
    }
}

/// Parses a curve equation; affine input is homogenized to its degree.
pub fn parse_curve(name: &str, text: &str, ctx: &FieldContext) -> Result<Polynomial, ConfigError> {
    let raw = parse_polynomial(text).map_err(|e| ConfigError::Polynomial {
        context: format!("curve {name}"),
        source: e.into(),
    })?;
    let raw = raw.to_context(ctx)?;
    Ok(match raw.arity() {
        Arity::Affine => raw.homogenize(raw.degree().unwrap_or(0))?,
        Arity::Projective => raw,
    })
}

/// Parses an affine form `P dx + Q dy` (or a projective one, if `z` occurs).
pub fn parse_form(p: &str, q: &str, d: u32, ctx: &FieldContext) -> Result<DifferentialForm, ConfigError> {
    let parse = |text: &str, what: &str| -> Result<_, ConfigError> {
        let raw = parse_polynomial(text).map_err(|e| ConfigError::Polynomial {
            context: what.to_string(),
            source: e.into(),
        })?;
        Ok(raw.to_context(ctx)?)
    };
    let mut pp = parse(p, "P")?;
    let mut qq = parse(q, "Q")?;
    if pp.arity() != qq.arity() {
        pp = pp.to_projective();
        qq = qq.to_projective();
    }
    Ok(DifferentialForm::new(pp, qq, d)?)
}

/// Parses an exact scalar such as `-3/4` into the field.
pub fn parse_scalar(text: &str, ctx: &FieldContext) -> Result<FieldElement, ConfigError> {
    let poly = parse_polynomial(text).map_err(|_| ConfigError::Coordinate(text.to_string()))?;
    if poly.terms().any(|(m, _)| *m != Monomial::ONE) {
        return Err(ConfigError::Coordinate(text.to_string()));
    }
    let c = poly.coeff(&Monomial::ONE);
    ctx.embed(&c).map_err(|_| ConfigError::Coordinate(text.to_string()))
}

pub fn parse_point(spec: &PointSpec, ctx: &FieldContext) -> Result<MarkedPoint, ConfigError> {
    let mut coords = spec
        .coords
        .iter()
        .map(|c| parse_scalar(c, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    match coords.len() {
        2 => coords.push(ctx.one()),
        3 => {}
        _ => return Err(ConfigError::CoordinateCount(spec.label.clone())),
    }
    let declared = spec
        .declared_type
        .as_deref()
        .map(|t| {
            t.parse::<SingularityType>()
                .map_err(|_| ConfigError::UnknownType(t.to_string()))
        })
        .transpose()?;
    let coords: [FieldElement; 3] = coords.try_into().expect("three coordinates");
    let mut point = MarkedPoint::new(spec.label.clone(), coords, declared)?;
    if let Some(chart) = &spec.chart {
        let var = match chart.as_str() {
            "x" => crate::poly::Var::X,
            "y" => crate::poly::Var::Y,
            "z" => crate::poly::Var::Z,
            other => return Err(ConfigError::Coordinate(format!("chart {other}"))),
        };
        if point.coords[var.index()].is_zero() {
            return Err(ConfigError::Coordinate(format!("chart {chart} at {}", spec.label)));
        }
        point.chart = var;
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "field": "Q",
        "degree": 2,
        "curves": {"C": "y - x^2"},
        "form": {"P": "-2*y", "Q": "x", "d": 2},
        "points": [{"label": "O", "coords": ["0", "0"]},
                   {"label": "P", "coords": ["0", "1", "0"], "declared_type": "tangent"}],
        "checks": ["integral", "eta"]
    }"#;

    #[test]
    fn parses_sample() {
        let cfg = AnalysisConfig::from_json(SAMPLE).unwrap();
        let ctx = cfg.context().unwrap();
        assert_eq!(cfg.curves(&ctx).unwrap()[0].degree, 2);
        let pts = cfg.points(&ctx).unwrap();
        assert!(pts[1].is_at_infinity());
        assert_eq!(pts[1].declared_type, Some(SingularityType::Tangent));
        assert_eq!(cfg.form(&ctx).unwrap().degree, 2);
    }

    #[test]
    fn rejects_unknown_keys_and_checks() {
        let bad = SAMPLE.replace("\"degree\"", "\"colour\": 1, \"degree\"");
        assert!(matches!(AnalysisConfig::from_json(&bad), Err(ConfigError::Json(_))));
        let bad = SAMPLE.replace("\"eta\"", "\"astrology\"");
        assert!(matches!(AnalysisConfig::from_json(&bad), Err(ConfigError::UnknownCheck(_))));
    }

    #[test]
    fn scalars() {
        let q = FieldContext::Rationals;
        assert_eq!(parse_scalar("-1/4", &q).unwrap(), FieldElement::rational(-1, 4));
        let f = FieldContext::Prime(7);
        assert_eq!(parse_scalar("1/2", &f).unwrap(), f.from_i64(4));
        assert!(parse_scalar("x", &q).is_err());
    }
}
