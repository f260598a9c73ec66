use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use darboux_core::config::{parse_curve, parse_form, parse_scalar, AnalysisConfig, ConfigError};
use darboux_core::constructions::{self, Environment, DEFAULT_FOCAL_ORDER, DEFAULT_PRIME};
use darboux_core::darboux::{
    cofactor, deg_x, dimension_formula_check, homogeneous_form, is_integral_curve, kernel_space, Curve,
    DarbouxError,
};
use darboux_core::eta::{certificate_search, CofactorData, EtaError};
use darboux_core::field::{FieldContext, FieldElement};
use darboux_core::focal::{
    default_ambient, equilibria, focal_jacobian, focal_values, linearization, normalize_at, FocalError, Gauge,
    NormalForm,
};
use darboux_core::local::{local_invariants, LocalError, MarkedPoint};
use darboux_core::poly::DifferentialForm;
use darboux_core::report::{canonical_json, element_json, Check, Status, VerificationReport};

#[derive(Parser, Debug)]
#[command(name = "darboux", version, about = "Exact Darboux integrability certificates for planar polynomial forms")]
struct Cli {
    /// Coefficient field: Q, Fp (with --prime), F<p>, or F<p>^k.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Prime for Fp and for finite-field focal computations.
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Write the canonical JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct FormArgs {
    /// Coefficient P of ω = P dx + Q dy.
    #[arg(long = "P", visible_alias = "p", allow_hyphen_values = true)]
    p: String,
    /// Coefficient Q of ω = P dx + Q dy.
    #[arg(long = "Q", visible_alias = "q", allow_hyphen_values = true)]
    q: String,
    /// Degree d of ω (defaults to the larger degree of P and Q).
    #[arg(long)]
    degree: Option<u32>,
}

#[derive(Args, Debug, Clone)]
struct FocalArgs {
    #[command(flatten)]
    form: FormArgs,
    /// Affine equilibrium `a,b`; by default the first equilibrium with zero
    /// trace found by scanning.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Number N of focal values.
    #[arg(long, default_value_t = DEFAULT_FOCAL_ORDER)]
    order: usize,
    /// Degree k of the extension 𝔽_{p^k} used for the normalization.
    #[arg(long)]
    extension: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the checks listed in a JSON configuration.
    Analyze { config: PathBuf },
    /// Cofactor K of an integral curve: dC ∧ ω = C·K.
    Cofactor {
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Dimension of V_C(d) and the dimension formula.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        #[arg(long)]
        degree: u32,
    },
    /// deg X for X = V(C, C_x, C_y), with the linked deg Y.
    Degx {
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
    },
    /// Tjurina number of a curve at a point.
    Tjurina {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        /// `a,b` (affine) or `a,b,c` (projective).
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Modified Tjurina number at a point on the line at infinity.
    Tz {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// η = (K_1 : … : K_r : dω) at a point.
    Eta {
        /// Curve, optionally named as `name=poly`; repeat for several.
        #[arg(long = "curve", required = true, allow_hyphen_values = true)]
        curves: Vec<String>,
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Search for Σ α_i K_i + α_0 dω = 0.
    Certify {
        #[arg(long = "curve", required = true, allow_hyphen_values = true)]
        curves: Vec<String>,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Focal values s_1, …, s_N at a center candidate.
    Focal(FocalArgs),
    /// Rank of the Jacobian of (s_1, …, s_N) in the default ambient.
    TangentRank(FocalArgs),
    /// Verify a bundled construction.
    VerifyConstruction {
        id: String,
        /// Skip the focal-value checks.
        #[arg(long)]
        no_focal: bool,
    },
    /// List the bundled constructions.
    ListConstructions,
}

/// Outcome classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    /// Malformed input or unusable arguments (exit 2).
    Input(String),
    /// A mathematical check failed (exit 1).
    Math(String),
    /// No verdict could be reached (exit 3).
    Inconclusive(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Math(_) => 1,
            Failure::Input(_) => 2,
            Failure::Inconclusive(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Math(m) | Failure::Inconclusive(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Darboux(d) => d.into(),
            ConfigError::Local(l) => l.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<DarbouxError> for Failure {
    fn from(e: DarbouxError) -> Self {
        match e {
            DarbouxError::NotFinite { .. } => Failure::Inconclusive(format!("NotFinite: {e}")),
            DarbouxError::NotIntegralCurve(_) | DarbouxError::CommonComponent(..) => Failure::Math(e.to_string()),
            DarbouxError::NotSquareFree | DarbouxError::ComponentAtInfinity => Failure::Math(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<LocalError> for Failure {
    fn from(e: LocalError) -> Self {
        match e {
            LocalError::NotFiniteColength { .. } => Failure::Inconclusive(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<EtaError> for Failure {
    fn from(e: EtaError) -> Self {
        match e {
            EtaError::Darboux(d) => d.into(),
            EtaError::HypothesisViolated(_) => Failure::Math(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<FocalError> for Failure {
    fn from(e: FocalError) -> Self {
        match e {
            FocalError::SquareRootUnavailable | FocalError::CharacteristicTooSmall { .. } => {
                Failure::Inconclusive(e.to_string())
            }
            FocalError::Linalg(ref l) if l.to_string().contains("pivot") => Failure::Inconclusive(e.to_string()),
            FocalError::NotEquilibrium | FocalError::NotCenterCandidate { .. } => Failure::Math(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<darboux_core::field::FieldError> for Failure {
    fn from(e: darboux_core::field::FieldError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<darboux_core::poly::PolyError> for Failure {
    fn from(e: darboux_core::poly::PolyError) -> Self {
        Failure::Input(e.to_string())
    }
}

/// What a command produced: the report and the lines to print.
struct Outcome {
    report: VerificationReport,
    lines: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code.clamp(0, 255) as u8);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Some(path) = &cli.json {
                if let Err(e) = std::fs::write(path, outcome.report.to_canonical_json()) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            let status = outcome.report.status;
            if !cli.quiet || status != Status::Pass {
                for line in &outcome.lines {
                    println!("{line}");
                }
            }
            ExitCode::from(status.exit_code() as u8)
        }
        Err(f) => {
            if let Some(path) = &cli.json {
                let report = json!({
                    "fixture": command_name(&cli.command),
                    "environment": {},
                    "checks": [{"name": "input", "expected": Value::Null, "computed": f.message(), "status": failure_label(&f)}],
                    "status": failure_label(&f),
                });
                let _ = std::fs::write(path, canonical_json(&report));
            }
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn failure_label(f: &Failure) -> &'static str {
    match f {
        Failure::Math(_) => "fail",
        Failure::Input(_) => "error",
        Failure::Inconclusive(_) => "inconclusive",
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze { .. } => "analyze",
        Command::Cofactor { .. } => "cofactor",
        Command::Kernel { .. } => "kernel",
        Command::Degx { .. } => "degx",
        Command::Tjurina { .. } => "tjurina",
        Command::Tz { .. } => "tz",
        Command::Eta { .. } => "eta",
        Command::Certify { .. } => "certify",
        Command::Focal(_) => "focal",
        Command::TangentRank(_) => "tangent-rank",
        Command::VerifyConstruction { .. } => "verify-construction",
        Command::ListConstructions => "list-constructions",
    }
}

fn context(cli: &Cli, default: &str) -> Result<FieldContext, Failure> {
    let spec = cli.field.as_deref().unwrap_or(default);
    Ok(FieldContext::from_spec(spec, cli.prime.or(Some(DEFAULT_PRIME)))?)
}

fn environment(ctx: &FieldContext, cli: &Cli) -> BTreeMap<String, Value> {
    let mut env = BTreeMap::new();
    env.insert("field".to_string(), json!(ctx.label()));
    if let Some(p) = cli.prime {
        env.insert("prime".to_string(), json!(p));
    }
    env
}

fn single(cli: &Cli, ctx: &FieldContext, checks: Vec<Check>, lines: Vec<String>) -> Outcome {
    Outcome {
        report: VerificationReport::new(command_name(&cli.command), environment(ctx, cli), checks),
        lines,
    }
}

fn info(name: &str, computed: Value) -> Check {
    Check {
        name: name.to_string(),
        expected: Value::Null,
        computed,
        status: Status::Pass,
    }
}

/// `name=poly` or a bare polynomial, named `C<i>`.
fn named_curve(text: &str, i: usize, ctx: &FieldContext) -> Result<Curve, Failure> {
    let (name, poly) = match text.split_once('=') {
        Some((n, p)) => (n.trim().to_string(), p.trim()),
        None => (format!("C{}", i + 1), text.trim()),
    };
    let poly = parse_curve(&name, poly, ctx)?;
    Ok(Curve::new(name, poly)?)
}

fn form(args: &FormArgs, ctx: &FieldContext) -> Result<DifferentialForm, Failure> {
    let d = match args.degree {
        Some(d) => d,
        None => {
            let p = darboux_core::parse::parse_polynomial(&args.p).map_err(|e| Failure::Input(e.to_string()))?;
            let q = darboux_core::parse::parse_polynomial(&args.q).map_err(|e| Failure::Input(e.to_string()))?;
            p.degree().unwrap_or(0).max(q.degree().unwrap_or(0))
        }
    };
    Ok(parse_form(&args.p, &args.q, d, ctx)?)
}

fn point(text: &str, ctx: &FieldContext) -> Result<MarkedPoint, Failure> {
    let coords = text
        .split(',')
        .map(|c| parse_scalar(c.trim(), ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let coords: [FieldElement; 3] = match coords.len() {
        2 => [coords[0].clone(), coords[1].clone(), ctx.one()],
        3 => [coords[0].clone(), coords[1].clone(), coords[2].clone()],
        _ => return Err(Failure::Input(format!("point '{text}' needs 2 or 3 coordinates"))),
    };
    Ok(MarkedPoint::new("point", coords, None)?)
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Analyze { config } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg = AnalysisConfig::from_json(&text)?;
            if let Some(f) = &cli.field {
                cfg.field = f.clone();
            }
            if cli.prime.is_some() {
                cfg.prime = cli.prime;
            }
            let env = Environment {
                prime: cli.prime,
                ..Environment::default()
            };
            let report = constructions::analyze(&cfg, &env)?;
            let lines = report_lines(&report);
            Ok(Outcome { report, lines })
        }
        Command::Cofactor { curve, form: fa } => {
            let ctx = context(cli, "Q")?;
            let c = named_curve(curve, 0, &ctx)?;
            let om = form(fa, &ctx)?;
            match cofactor(&c, &om) {
                Ok(k) => Ok(single(
                    cli,
                    &ctx,
                    vec![Check::property("integral", json!(k.to_string()), true)],
                    vec![format!("K = {k}")],
                )),
                Err(DarbouxError::NotIntegralCurve(n)) => Ok(single(
                    cli,
                    &ctx,
                    vec![Check::property("integral", json!(false), false)],
                    vec![format!("{n} is not an integral curve of the form")],
                )),
                Err(e) => Err(e.into()),
            }
        }
        Command::Kernel { curve, degree } => {
            let ctx = context(cli, "Q")?;
            let c = named_curve(curve, 0, &ctx)?;
            let v = kernel_space(&c, *degree)?;
            let mut checks = vec![
                info("dim-v", json!(v.dim)),
                info("hamiltonian-dim", json!(v.hamiltonian_dim)),
            ];
            let mut lines = vec![
                format!("dim V = {}", v.dim),
                format!("dim V^H = {}", v.hamiltonian_dim),
            ];
            match dimension_formula_check(&c, *degree) {
                Ok(f) => {
                    checks.push(Check::property(
                        "dimension-formula",
                        json!({"kernel": f.kernel_dim, "hamiltonian": f.hamiltonian_dim, "cofactor_slice": f.cofactor_dim}),
                        f.holds(),
                    ));
                    lines.push(format!(
                        "dimension formula: {} = {} + {} ({})",
                        f.kernel_dim,
                        f.hamiltonian_dim,
                        f.cofactor_dim,
                        if f.holds() { "holds" } else { "FAILS" }
                    ));
                }
                Err(e) => lines.push(format!("dimension formula not applicable: {e}")),
            }
            Ok(single(cli, &ctx, checks, lines))
        }
        Command::Degx { curve } => {
            let ctx = context(cli, "Q")?;
            let c = named_curve(curve, 0, &ctx)?;
            let l = deg_x(&c)?;
            Ok(single(
                cli,
                &ctx,
                vec![info("deg-x", json!(l.deg_x)), info("deg-y", json!(l.deg_y))],
                vec![format!("{}", l.deg_x), format!("deg Y = {}", l.deg_y)],
            ))
        }
        Command::Tjurina { poly, point: pt } => {
            let ctx = context(cli, "Q")?;
            let f = parse_curve("poly", poly, &ctx)?;
            let p = point(pt, &ctx)?;
            let inv = local_invariants(&f, &p)?;
            Ok(single(
                cli,
                &ctx,
                vec![info("tjurina", json!(inv.tjurina)), info("milnor", json!(inv.milnor))],
                vec![format!("{}", inv.tjurina)],
            ))
        }
        Command::Tz { poly, point: pt } => {
            let ctx = context(cli, "Q")?;
            let f = parse_curve("poly", poly, &ctx)?;
            let p = point(pt, &ctx)?;
            if !p.is_at_infinity() {
                return Err(Failure::Input("tz needs a point on the line at infinity (third coordinate 0)".into()));
            }
            let inv = local_invariants(&f, &p)?;
            let tz = inv.t_z.expect("points at infinity have t_z");
            Ok(single(
                cli,
                &ctx,
                vec![
                    info("t_z", json!(tz)),
                    info("tjurina", json!(inv.tjurina)),
                    info("intersection_with_line", json!(inv.intersection_with_line)),
                ],
                vec![format!("{tz}")],
            ))
        }
        Command::Eta { curves, form: fa, point: pt } => {
            let ctx = context(cli, "Q")?;
            let cs = curves
                .iter()
                .enumerate()
                .map(|(i, c)| named_curve(c, i, &ctx))
                .collect::<Result<Vec<_>, _>>()?;
            let om = form(fa, &ctx)?;
            let p = point(pt, &ctx)?;
            let data = CofactorData::new(&om, &cs)?;
            let v = data.eta_at(&p.coords)?;
            Ok(single(
                cli,
                &ctx,
                vec![info("eta", json!(v.to_string()))],
                vec![v.to_string()],
            ))
        }
        Command::Certify { curves, form: fa } => {
            let ctx = context(cli, "Q")?;
            let cs = curves
                .iter()
                .enumerate()
                .map(|(i, c)| named_curve(c, i, &ctx))
                .collect::<Result<Vec<_>, _>>()?;
            let om = form(fa, &ctx)?;
            let h = homogeneous_form(&om)?;
            for c in &cs {
                if is_integral_curve(&c.poly, &h)?.is_none() {
                    return Err(Failure::Math(format!("{} is not an integral curve of the form", c.name)));
                }
            }
            match certificate_search(&om, &cs)? {
                Some(cert) => {
                    let ok = cert.verify(&om, &cs)?;
                    let relation = cert
                        .integer_relation()
                        .map(|v| v.iter().map(|b| b.to_string()).collect::<Vec<_>>());
                    let mut lines = vec![cert.to_string(), format!("kind: {:?}", cert.kind)];
                    if let Some(r) = &relation {
                        lines.push(format!("integer relation: ({})", r.join(", ")));
                    }
                    Ok(single(
                        cli,
                        &ctx,
                        vec![Check::property(
                            "certificate",
                            json!({"identity": cert.to_string(), "relation": relation}),
                            ok,
                        )],
                        lines,
                    ))
                }
                None => Ok(single(
                    cli,
                    &ctx,
                    vec![Check::property("certificate", Value::Null, false)],
                    vec!["no relation among the cofactors and dω".into()],
                )),
            }
        }
        Command::Focal(args) => {
            let (ctx, nf) = focal_setup(cli, args)?;
            let seq = focal_values(&nf, args.order, Gauge::XPowerZero)?;
            let residual = seq.identity_residual(&nf)?.is_zero();
            let mut lines: Vec<String> = seq
                .s
                .iter()
                .enumerate()
                .map(|(j, s)| format!("s_{} = {s}", j + 1))
                .collect();
            lines.push(format!("normal form: c = {} over {}", nf.c, nf.context().label()));
            Ok(single(
                cli,
                &ctx,
                vec![
                    info("focal-values", Value::Array(seq.s.iter().map(element_json).collect())),
                    Check::property("focal-identity", json!(residual), residual),
                ],
                lines,
            ))
        }
        Command::TangentRank(args) => {
            let (ctx, nf) = focal_setup(cli, args)?;
            let dirs = default_ambient(nf.context(), nf.degree);
            let jac = focal_jacobian(&nf, &dirs, args.order)?;
            Ok(single(
                cli,
                &ctx,
                vec![info(
                    "focal-jacobian-rank",
                    json!({"rank": jac.rank, "directions": jac.directions, "tangent_dimension": jac.tangent_dimension()}),
                )],
                vec![
                    format!("rank = {}", jac.rank),
                    format!("directions M = {}", jac.directions),
                    format!("tangent dimension = M - rank = {}", jac.tangent_dimension()),
                ],
            ))
        }
        Command::VerifyConstruction { id, no_focal } => {
            let env = Environment {
                prime: cli.prime,
                focal: !no_focal,
                ..Environment::default()
            };
            let report = constructions::verify(id, &env).map_err(|e| match e {
                constructions::ConstructionError::UnknownFixture(_) => {
                    Failure::Input(format!("{e}; known: {}", constructions::fixture_ids().join(", ")))
                }
                other => Failure::Input(other.to_string()),
            })?;
            let lines = report_lines(&report);
            Ok(Outcome { report, lines })
        }
        Command::ListConstructions => {
            let list = constructions::list_fixtures();
            let lines = list
                .iter()
                .map(|f| {
                    format!(
                        "{:<11} {:<6} {:<9} {:<22} {}",
                        f.id,
                        f.steiner_ideal.as_deref().unwrap_or("-"),
                        f.zoladek.as_deref().unwrap_or("-"),
                        f.table_entry,
                        f.title
                    )
                })
                .collect();
            let checks = list
                .iter()
                .map(|f| info(&f.id, serde_json::to_value(f).expect("metadata serializes")))
                .collect();
            Ok(Outcome {
                report: VerificationReport::new("list-constructions", BTreeMap::new(), checks),
                lines,
            })
        }
    }
}

/// Field for focal work (default 𝔽_p with p = 10007) and the normal form.
fn focal_setup(cli: &Cli, args: &FocalArgs) -> Result<(FieldContext, NormalForm), Failure> {
    let ctx = context(cli, "Fp")?;
    let om = form(&args.form, &ctx)?;
    let p = ctx.characteristic();
    let lift = |pt: &[FieldElement; 2], k: usize| -> Result<[FieldElement; 2], Failure> {
        if k <= 1 || p == 0 {
            return Ok(pt.clone());
        }
        let ext = FieldContext::extension(p, k)?;
        Ok([ext.embed(&pt[0])?, ext.embed(&pt[1])?])
    };
    let candidates: Vec<[FieldElement; 2]> = match &args.point {
        Some(text) => {
            let mp = point(text, &ctx)?;
            if mp.is_at_infinity() {
                return Err(Failure::Input("the equilibrium must be affine".into()));
            }
            vec![mp.chart_coordinates()]
        }
        None => equilibria(&om)?
            .into_iter()
            .filter(|pt| {
                linearization(&om, pt)
                    .map(|a| (&a[0][0] + &a[1][1]).is_zero())
                    .unwrap_or(false)
            })
            .collect(),
    };
    let mut last: Failure = Failure::Math("no equilibrium with vanishing trace".into());
    for pt in candidates {
        let attempt = normalize_at(&om, &lift(&pt, args.extension.unwrap_or(1))?);
        match attempt {
            Ok((nf, _)) => return Ok((ctx, nf)),
            Err(FocalError::SquareRootUnavailable) if args.extension.is_none() && p != 0 => {
                let (nf, _) = normalize_at(&om, &lift(&pt, 2)?)?;
                return Ok((ctx, nf));
            }
            Err(e @ FocalError::NotCenterCandidate { .. }) => last = e.into(),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last)
}

fn report_lines(report: &VerificationReport) -> Vec<String> {
    let mut lines = vec![format!("{}: {}", report.fixture, report.status.label())];
    for c in &report.checks {
        let detail = if c.expected.is_null() {
            format!("{}", c.computed)
        } else {
            format!("expected {}, computed {}", c.expected, c.computed)
        };
        lines.push(format!("  [{}] {}: {}", c.status.label(), c.name, detail));
    }
    lines
}
