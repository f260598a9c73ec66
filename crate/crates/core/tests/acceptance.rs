//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the verdict lines always reach the output; exits non-zero if
//! any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use common::*;
use darboux_core::constructions::{verify, Environment};
use darboux_core::eta::{predicted_eta_pair, predicted_eta_single, weighted_degree, EtaError, RatioVector};
use darboux_core::field::FieldContext;
use darboux_core::focal::{focal_values, Gauge, NormalForm};
use darboux_core::local::{
    intersection_multiplicity_with_line, modified_tjurina, quasi_homogeneous_weights, tjurina,
};
use darboux_core::parse::parse_in;
use darboux_core::poly::{Arity, Monomial, Polynomial, Var};
use darboux_core::report::{Status, VerificationReport};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn germ(text: &str) -> Polynomial {
    parse_in(text, &q(), Arity::Affine).expect("germ parses")
}

fn ratio(values: &[i64]) -> RatioVector {
    RatioVector::from_i64(&q(), values)
}

// ---- 1: η tables -----------------------------------------------------------

fn single_row(equation: &str, printed: &[i64]) -> Result<(), String> {
    let f = germ(equation);
    let (wx, wy, wdeg) = quasi_homogeneous_weights(&f).ok_or(format!("{equation}: not quasi-homogeneous"))?;
    let eta = predicted_eta_single(&q(), wx, wy, wdeg);
    ensure!(eta == ratio(printed), "{equation}: predicted {eta}, printed {printed:?}");
    Ok(())
}

fn pair_row(c: &str, d: &str, printed: Option<&[i64]>) -> Result<(), String> {
    let (c, d) = (germ(c), germ(d));
    let (wx, wy, _) = quasi_homogeneous_weights(&(&c * &d)).ok_or("product not quasi-homogeneous")?;
    let dc = weighted_degree(&c, wx, wy).ok_or("C not weighted homogeneous")?;
    let dd = weighted_degree(&d, wx, wy).ok_or("D not weighted homogeneous")?;
    match (predicted_eta_pair(&q(), dc, dd, wx, wy), printed) {
        (Ok(eta), Some(p)) => ensure!(eta == ratio(p), "{c}·{d}: predicted {eta}, printed {p:?}"),
        (Err(EtaError::HypothesisViolated(_)), None) => {}
        (other, p) => return Err(format!("{c}·{d}: got {other:?}, printed {p:?}")),
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let mut rows = 0;
    // Single curve: node, cusp, tacnode, A_n, D_4, D_n, E_6, E_7, E_8.
    single_row("x^2-y^2", &[1, 1])?;
    single_row("x^2-y^3", &[6, 5])?;
    single_row("x^2-y^4", &[4, 3])?;
    rows += 3;
    for n in 1..=10i64 {
        single_row(&format!("x^2-y^{}", n + 1), &[2 * n + 2, n + 3])?;
        rows += 1;
    }
    single_row("x^3-y^3", &[3, 2])?;
    rows += 1;
    for n in 4..=10i64 {
        single_row(&format!("y*(x^2-y^{})", n - 2), &[2 * n - 2, n])?;
        rows += 1;
    }
    single_row("x^3-y^4", &[12, 7])?;
    single_row("x*(x^2-y^3)", &[9, 5])?;
    single_row("x^3-y^5", &[15, 8])?;
    rows += 3;
    // Two curves.
    pair_row("x-y", "x+y", None)?;
    pair_row("x-y^2", "x+y^2", Some(&[2, 2, 3]))?;
    rows += 2;
    for n in 2..=8i64 {
        pair_row(&format!("x-y^{n}"), &format!("x+y^{n}"), Some(&[n, n, n + 1]))?;
        rows += 1;
    }
    pair_row("y", "x^2-y^2", Some(&[1, 2, 2]))?;
    rows += 1;
    for n in 4..=10i64 {
        pair_row("y", &format!("x^2-y^{}", n - 2), Some(&[2, 2 * (n - 2), n]))?;
        rows += 1;
    }
    pair_row("x", "x^2-y^3", Some(&[3, 6, 5]))?;
    pair_row("x", "x^3-y^3", Some(&[1, 3, 2]))?;
    rows += 2;
    Ok(format!("{rows} rows reproduced"))
}

// ---- 2: modified Tjurina table ---------------------------------------------

fn criterion_2() -> Outcome {
    // Germs in (u, v) with the line at infinity v = 0.
    let rows: [(&str, &str, usize, usize, usize); 5] = [
        ("transversal", "x", 0, 1, 0),
        ("tangent", "y-x^2", 0, 2, 1),
        ("general node", "x^2-y^2", 1, 2, 2),
        ("node, one branch tangent", "x*(y-x^2)", 1, 3, 3),
        ("general triple point", "x^3-y^3", 4, 3, 6),
    ];
    for (name, text, t, i, tz) in rows {
        let f = germ(text);
        let got = (
            tjurina(&f).map_err(|e| e.to_string())?,
            intersection_multiplicity_with_line(&f).map_err(|e| e.to_string())?,
            modified_tjurina(&f).map_err(|e| e.to_string())?,
        );
        ensure!(got == (t, i, tz), "{name}: (t, i, t_z) = {got:?}, expected {:?}", (t, i, tz));
        ensure!(got.2 == got.0 + got.1 - 1, "{name}: t_z != t + i - 1");
    }
    Ok("t_z = 0, 1, 2, 3, 6 and t_z = t + i - 1 on all rows".into())
}

// ---- 3–8: constructions ----------------------------------------------------

fn report(id: &str) -> Result<VerificationReport, String> {
    verify(id, &Environment::default()).map_err(|e| e.to_string())
}

fn computed<'a>(r: &'a VerificationReport, name: &str) -> Result<&'a Value, String> {
    let c = r.check(name).ok_or(format!("{}: no check {name}", r.fixture))?;
    ensure!(c.status == Status::Pass, "{}: {name} is {:?}: {}", r.fixture, c.status, c.computed);
    Ok(&c.computed)
}

fn expect(r: &VerificationReport, name: &str, value: Value) -> Result<(), String> {
    let got = computed(r, name)?;
    ensure!(*got == value, "{}: {name} = {got}, expected {value}", r.fixture);
    Ok(())
}

/// Every η evaluation at the listed points equals `row` or is degenerate.
fn eta_rows(r: &VerificationReport, points: &[&str], row: &[i64]) -> Result<(), String> {
    let map = computed(r, "eta-points")?;
    let predicted = ratio(row);
    let ctx = r
        .environment
        .get("point_field")
        .and_then(Value::as_str)
        .map(|s| FieldContext::from_spec(s, None).unwrap())
        .unwrap_or_else(q);
    for p in points {
        let text = map[*p].as_str().ok_or(format!("{}: no η at {p}", r.fixture))?;
        let entries: Vec<_> = text
            .trim_matches(|c| c == '(' || c == ')')
            .split(':')
            .map(|s| darboux_core::config::parse_scalar(s, &ctx).unwrap())
            .collect();
        let eta = RatioVector::new(entries);
        ensure!(
            eta.matches_or_degenerate(&predicted.to_context(&ctx).unwrap()),
            "{}: η({p}) = {text}, expected {row:?}",
            r.fixture
        );
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let r = report("9.6")?;
    expect(&r, "deg-x", json!(20))?;
    expect(&r, "delta", json!(1))?;
    expect(&r, "dim-v", json!(1))?;
    expect(&r, "certificate", json!([1, -1, 1]))?;
    computed(&r, "certificate-residual")?;
    expect(&r, "genericity-degree-2:C,E,F,H,I,J", json!(true))?;
    expect(&r, "rigidity:Q", json!(1))?;
    Ok("deg X = 20, δ = 1, dim V = 1, K_L4 − K_Γ + dω = 0, six points off every conic, rigidity 1".into())
}

fn criterion_4() -> Outcome {
    let r = report("9.8")?;
    expect(&r, "deg-x", json!(11))?;
    expect(&r, "delta", json!(1))?;
    eta_rows(&r, &["R", "S", "T"], &[0, 6, 5])?;
    eta_rows(&r, &["B"], &[2, 2, 3])?;
    let inf = computed(&r, "eta-infinity")?;
    ensure!(inf["predicted"] == "(1:4:4)", "η at infinity predicted {}", inf["predicted"]);
    ensure!(inf["restricted_identity"] == true, "η at infinity: identity fails on the line");
    expect(&r, "certificate", json!([4, 5, -6]))?;
    computed(&r, "certificate-residual")?;
    expect(&r, "genericity-degree-1:R,S,T,B", json!(true))?;
    Ok("deg X = 11, δ = 1, η rows (0,6,5) (2,2,3) (1,4,4), 4K_L + 5K_C − 6dω = 0, R S T B not collinear".into())
}

fn criterion_5() -> Outcome {
    let r = report("9.9")?;
    expect(&r, "deg-x", json!(13))?;
    expect(&r, "delta", json!(3))?;
    expect(&r, "dim-v", json!(3))?;
    expect(&r, "certificate", json!([1, 2, -2]))?;
    computed(&r, "certificate-residual")?;
    expect(&r, "genericity-degree-2:H,I,J,D,E,F", json!(true))?;
    Ok("deg X = 13, δ = 3, dim V = 3, K_Q + 2K_T − 2dω = 0, six points off every conic".into())
}

fn criterion_6() -> Outcome {
    let r = report("9.10")?;
    expect(&r, "deg-x", json!(7))?;
    expect(&r, "delta", json!(1))?;
    eta_rows(&r, &["R", "S", "T"], &[6, 5])?;
    expect(&r, "certificate", json!([5, -6]))?;
    computed(&r, "certificate-residual")?;
    expect(&r, "genericity-degree-1:R,S,T", json!(true))?;
    expect(&r, "integral-curves", json!({"C": true, "L": true}))?;
    expect(&r, "extension-certificate", json!([5, 6, -6]))?;
    computed(&r, "extension-certificate-residual")?;
    Ok("deg X = 7, δ = 1, η = (6:5) at the cusps, 5K − 6dω = 0, (x+1)·ω certified with L".into())
}

fn criterion_7() -> Outcome {
    let r = report("9.14")?;
    expect(&r, "deg-x", json!(11))?;
    expect(&r, "delta", json!(1))?;
    expect(&r, "certificate", json!([1, -1]))?;
    computed(&r, "certificate-residual")?;
    expect(&r, "genericity-degree-2:N1,N2,N3,N4,N5,N6", json!(true))?;
    Ok("deg X = 11, δ = 1, K_U − dω = 0, six nodes off every conic".into())
}

fn criterion_8() -> Outcome {
    let r = report("quartic-d2")?;
    expect(&r, "deg-x", json!(7))?;
    expect(&r, "dim-v", json!(1))?;
    expect(&r, "delta", json!(1))?;
    ensure!(r.status == Status::Pass, "report status {:?}", r.status);
    Ok("deg X = 7, dim V_C(2) = 1 = δ".into())
}

// ---- 9: focal values ------------------------------------------------------

fn criterion_9() -> Outcome {
    // (a) Hamiltonian forms over 𝔽_p with random higher-order parts.
    let ctx = fp();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..8 {
        let deg: u32 = rng.gen_range(3..=4);
        let coeffs: Vec<i64> = (0..monomial_count(3, deg)).map(|_| rng.gen_range(-20..=20)).collect();
        let omega = hamiltonian_form(&ctx, &poly_in_degrees(&ctx, 3, deg, &coeffs));
        let nf = NormalForm::from_form(&omega).map_err(|e| e.to_string())?;
        let seq = focal_values(&nf, 10, Gauge::XPowerZero).map_err(|e| e.to_string())?;
        ensure!(seq.all_zero(), "Hamiltonian form {} has s = {:?}", omega.p, seq.s);
    }
    // (b) Every construction at its recorded equilibrium.
    for id in ["9.6", "9.8", "9.9", "9.10", "9.14"] {
        let nf = fixture_normal_form(id);
        let seq = focal_values(&nf, 10, Gauge::XPowerZero).map_err(|e| e.to_string())?;
        ensure!(seq.all_zero(), "{id}: s = {:?}", seq.s);
        ensure!(seq.identity_residual(&nf).map_err(|e| e.to_string())?.is_zero(), "{id}: residual");
    }
    // (c) The 9.6 normal form perturbed by x² dx has s_1 ≠ 0.
    let nf = fixture_normal_form("9.6");
    let x2 = Polynomial::monomial(nf.context(), Arity::Affine, Monomial::new(2, 0, 0), nf.context().one());
    let perturbed = NormalForm::new(nf.c.clone(), &nf.p + &x2, nf.q.clone(), nf.degree).map_err(|e| e.to_string())?;
    let seq = focal_values(&perturbed, 10, Gauge::XPowerZero).map_err(|e| e.to_string())?;
    ensure!(!seq.s[0].is_zero(), "perturbed 9.6 normal form has s_1 = 0");
    Ok(format!("8 Hamiltonian forms and 5 constructions give s_1..s_10 = 0; perturbation s_1 = {}", seq.s[0]))
}

// ---- 10: tangent space ----------------------------------------------------

fn criterion_10() -> Outcome {
    let r = report("9.6")?;
    expect(&r, "focal-jacobian-rank", json!({"directions": 14, "rank": 9, "tangent_dimension": 5}))?;
    expect(&r, "tangent-dimension-at-most-9", json!(5))?;
    ensure!(r.environment["prime"] == json!(10007), "prime {}", r.environment["prime"]);
    Ok("rank 9 of M = 14 over 𝔽_10007; tangent dimension 5 ≤ 9".into())
}

// ---- 11: structural properties --------------------------------------------

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ctx = q();
    // Euler and weighted Euler relations.
    for _ in 0..25 {
        let e: u32 = rng.gen_range(0..=5);
        let ms = Monomial::of_degree(e, Arity::Projective);
        let coeffs: Vec<i64> = ms.iter().map(|_| rng.gen_range(-9..=9)).collect();
        let f = from_coeffs(&ctx, Arity::Projective, &ms, &coeffs);
        let lhs = &(&(&Polynomial::x(&ctx, Arity::Projective) * &f.partial(Var::X))
            + &(&Polynomial::y(&ctx, Arity::Projective) * &f.partial(Var::Y)))
            + &(&Polynomial::z(&ctx) * &f.partial(Var::Z));
        ensure!(lhs == f.scale(&ctx.from_i64(e as i64)), "Euler fails for {f}");

        let (wx, wy): (u32, u32) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let wdeg = wx * wy * rng.gen_range(1..=3);
        let support: Vec<Monomial> = Monomial::up_to_degree(wdeg, Arity::Affine)
            .into_iter()
            .filter(|m| m.exp(Var::X) * wx + m.exp(Var::Y) * wy == wdeg)
            .collect();
        let coeffs: Vec<i64> = support.iter().map(|_| rng.gen_range(-9..=9)).collect();
        let g = from_coeffs(&ctx, Arity::Affine, &support, &coeffs);
        let lhs = &(&Polynomial::x(&ctx, Arity::Affine) * &g.partial(Var::X)).scale(&ctx.from_i64(wx as i64))
            + &(&Polynomial::y(&ctx, Arity::Affine) * &g.partial(Var::Y)).scale(&ctx.from_i64(wy as i64));
        ensure!(lhs == g.scale(&ctx.from_i64(wdeg as i64)), "weighted Euler fails for {g}");
    }
    // Linkage and the dimension formula on 20 random curves.
    let curves = random_curves(2024, 20);
    for c in &curves {
        check_linkage(c)?;
        check_dimension_formula(c)?;
    }
    // Local cross-check on every construction.
    for id in darboux_core::constructions::fixture_ids() {
        cross_check(id)?;
    }
    // Certificate re-substitution on random logarithmic forms.
    for _ in 0..10 {
        let r = rng.gen_range(2..=3);
        let lines: Vec<Polynomial> = (0..r)
            .map(|_| {
                let (a, b, c) = (rng.gen_range(1..=5), rng.gen_range(-5..=5), rng.gen_range(-5..=5));
                parse_in(&format!("{a}*x + ({b})*y + ({c})"), &ctx, Arity::Affine).unwrap()
            })
            .collect();
        let lambdas: Vec<i64> = (0..r).map(|_| rng.gen_range(1..=6) * if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        if distinct_lines(&lines) {
            check_certificate_resubstitution(&lines, &lambdas)?;
        }
    }
    // Gauge independence on random normal forms over 𝔽_p.
    let f = fp();
    for _ in 0..10 {
        let n = monomial_count(2, 3);
        let pc: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
        let qc: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
        let nf = NormalForm::new(f.one(), poly_in_degrees(&f, 2, 3, &pc), poly_in_degrees(&f, 2, 3, &qc), 3)
            .map_err(|e| e.to_string())?;
        check_gauge_independence(&nf, 6)?;
    }
    Ok(format!(
        "Euler ×25, linkage + dimension formula on {} curves, local sums on 6 fixtures, certificates, gauges",
        curves.len()
    ))
}

fn distinct_lines(lines: &[Polynomial]) -> bool {
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if a.monic() == b.monic() {
                return false;
            }
        }
    }
    true
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let secs = Duration::from_secs;
    let criteria: [Criterion; 11] = [
        ("η tables", criterion_1, secs(1)),
        ("modified Tjurina table", criterion_2, secs(1)),
        ("construction 9.6", criterion_3, secs(30)),
        ("construction 9.8", criterion_4, secs(30)),
        ("construction 9.9", criterion_5, secs(30)),
        ("construction 9.10", criterion_6, secs(30)),
        ("construction 9.14", criterion_7, secs(30)),
        ("3-cuspidal quartic, d = 2", criterion_8, secs(10)),
        ("focal-value soundness", criterion_9, secs(120)),
        ("tangent-space evidence", criterion_10, secs(300)),
        ("structural properties", criterion_11, secs(120)),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; exceeded {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{elapsed:.2?}]: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} [{elapsed:.2?}]: {why}", i + 1);
            }
        }
    }
    if failures == 0 {
        println!("acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria fail");
        ExitCode::FAILURE
    }
}
