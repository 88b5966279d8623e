//! Command implementations behind the CLI subcommands.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use fbh_core::ambient::Mutation;
use fbh_core::expr::parse;
use fbh_core::families::{ansatz_reduce_int, catalog_with, AnsatzEquation, Perturbation};
use fbh_core::fbiharmonic::{is_admissible, residual_at, verdict_from_reports, TOL_VERIFY};
use fbh_core::sampling::Sampler;
use fbh_core::{ConformalSpace, Error, Expr, ImmersionChart, Params, ResidualReport, Var, Verdict, VerdictKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{
    fv, Counterexample, CurvatureConfig, CurvatureReport, CurvatureSample, CurvatureSummary, Format, PointRecord,
    VerifyConfig, VerifyReport, VerifySummary, F,
};
use crate::suites;
use crate::{AnsatzArgs, Command, CurvatureArgs, EquationArg, Expect, PerturbArg, SelftestArgs, VerifyArgs};

/// Tolerance for `--expect zero`.
pub const ZERO_CURVATURE_TOL: f64 = 1e-10;

/// Mixed into the seed of the 2-plane generator so planes and points are independent streams.
const PLANE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

/// Splits core errors into malformed input (exit 2) and evaluation failures (exit 1).
pub fn classify_error(e: Error) -> CliError {
    match e {
        Error::Syntax { .. }
        | Error::UnknownFunction { .. }
        | Error::MalformedExponent { .. }
        | Error::UnboundParameter(_)
        | Error::UnboundVariable(_)
        | Error::VarOutOfRange { .. }
        | Error::JetShape { .. }
        | Error::Dimension { .. }
        | Error::Constraint(_)
        | Error::NoAdmissiblePoints { .. } => CliError::Usage(e.to_string()),
        _ => CliError::Failed(e.to_string()),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_expr(what: &str, src: &str) -> Result<Expr, CliError> {
    parse(src).map_err(|e| usage(format!("{what} `{src}`: {e}")))
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    /// Printed to stderr after the report.
    pub message: Option<String>,
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Verify(a) => {
            let (report, out) = verify(a)?;
            let body = match a.format {
                Format::Text => report.text(),
                Format::Json => report.json(),
                Format::Csv => report.csv().map_err(|e| CliError::Failed(e.to_string()))?,
            };
            emit(&body, a.output.as_deref())?;
            Ok(out)
        }
        Command::Curvature(a) => {
            let report = curvature(a)?;
            let body = match a.format {
                Format::Text => report.text(),
                Format::Json => json(&report),
                Format::Csv => return Err(usage("curvature supports text and json output")),
            };
            emit(&body, a.output.as_deref())?;
            let passed = report.summary.pass;
            let message = (!passed).then(|| {
                let ce = report.summary.counterexample.as_ref().expect("failing scan has a counterexample");
                format!(
                    "curvature claim `{}` violated: K = {:e} at p = {:?}",
                    report.config.expect.unwrap(),
                    ce.k.0,
                    ce.p.iter().map(|v| v.0).collect::<Vec<_>>()
                )
            });
            Ok(Outcome { passed, message })
        }
        Command::Ansatz(a) => ansatz(a),
        Command::Selftest(a) => Ok(selftest(a)),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn emit(body: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Failed(e.to_string()))
        }
    }
}

/// Parses `"lo,hi[;lo,hi...]"`; a single pair is repeated `dim` times.
pub fn parse_box(s: &str, dim: usize) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = || usage(format!("--box `{s}`: expected lo,hi[;lo,hi...] with lo < hi"));
    let mut out = Vec::new();
    for part in s.split(';') {
        let (lo, hi) = part.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(bad());
        }
        out.push((lo, hi));
    }
    match out.len() {
        1 => Ok(vec![out[0]; dim]),
        k if k == dim => Ok(out),
        k => Err(usage(format!("--box has {k} intervals, expected 1 or {dim}"))),
    }
}

fn parse_hyperplane(s: &str) -> Result<(Vec<f64>, f64), CliError> {
    let bad = |why: &str| usage(format!("--hyperplane `{s}`: {why}; expected \"a1,...,am;a\""));
    let (coeffs, off) = s.split_once(';').ok_or_else(|| bad("missing `;`"))?;
    let a = coeffs
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad("bad coefficient"))?;
    let off = off.trim().parse::<f64>().map_err(|_| bad("bad offset"))?;
    Ok((a, off))
}

fn param_record(p: &Params) -> BTreeMap<String, F> {
    p.iter().map(|(k, v)| (k.clone(), F(*v))).collect()
}

fn box_record(d: &[(f64, f64)]) -> Vec<[F; 2]> {
    d.iter().map(|&(lo, hi)| [F(lo), F(hi)]).collect()
}

/// Everything `verify` needs, from either a family or custom expressions.
struct Model {
    family: Option<String>,
    m: usize,
    space: ConformalSpace,
    chart: ImmersionChart,
    f: Expr,
    params: Params,
    domain: Vec<(f64, f64)>,
    expected: Option<VerdictKind>,
    tol: f64,
}

fn family_model(a: &VerifyArgs, name: &str) -> Result<Model, CliError> {
    let pert = match a.perturb {
        PerturbArg::None => Perturbation::None,
        PerturbArg::Exponent => Perturbation::Exponent,
        PerturbArg::Weight => Perturbation::Weight,
    };
    let bindings: Params = a.params.iter().cloned().collect();
    let spec = catalog_with(name, a.m, &bindings, pert).map_err(classify_error)?;
    Ok(Model {
        family: Some(spec.name.clone()),
        m: spec.m,
        space: spec.space,
        chart: spec.chart,
        f: spec.f,
        params: spec.params,
        domain: spec.domain,
        expected: Some(spec.expected),
        tol: spec.tol,
    })
}

fn custom_model(a: &VerifyArgs) -> Result<Model, CliError> {
    if a.perturb != PerturbArg::None {
        return Err(usage("--perturb applies only to catalogued families"));
    }
    let sigma_src = a.sigma.as_deref().ok_or_else(|| usage("either --family or --sigma is required"))?;
    let params: Params = a.params.iter().cloned().collect();
    let chart = if let Some(h) = &a.hyperplane {
        let (coeffs, off) = parse_hyperplane(h)?;
        ImmersionChart::hyperplane(&coeffs, off).map_err(classify_error)?
    } else if let Some(im) = &a.immersion {
        let comps =
            im.split('|').map(|c| parse_expr("immersion component", c.trim())).collect::<Result<Vec<_>, _>>()?;
        ImmersionChart::general(comps, params.clone()).map_err(classify_error)?
    } else {
        return Err(usage("a custom hypersurface needs --hyperplane or --immersion"));
    };
    let m = chart.m();
    if let Some(want) = a.m {
        if want != m {
            return Err(usage(format!("--m {want} does not match the chart, which has m = {m}")));
        }
    }
    if !(2..=8).contains(&m) {
        return Err(usage(format!("m must lie in 2..=8, got {m}")));
    }
    let sigma = parse_expr("--sigma", sigma_src)?;
    let guards = a.guard.iter().map(|g| parse_expr("--guard", g)).collect::<Result<Vec<_>, _>>()?;
    let space = ConformalSpace::new(m + 1, sigma, guards, params.clone()).map_err(classify_error)?;
    let f = parse_expr("--f", &a.f)?;
    for v in f.variables() {
        if !matches!(v, Var::X(i) if (i as usize) <= m) {
            return Err(usage(format!("--f may only use the chart coordinates x1..x{m}, found `{v}`")));
        }
    }
    for p in f.parameters() {
        if !params.contains_key(&p) {
            return Err(usage(format!("--f: parameter `{p}` is not bound")));
        }
    }
    Ok(Model {
        family: None,
        m,
        space,
        chart,
        f,
        params,
        domain: vec![(-2.0, 2.0); m],
        expected: None,
        tol: TOL_VERIFY,
    })
}

fn worst_term(r: &ResidualReport, bi: bool) -> (&'static str, f64) {
    let ((a, b), names) =
        if bi { (r.normalized_bi(), ("r1_bi", "r2_bi")) } else { (r.normalized_f(), ("r1_f", "r2_f")) };
    if !(a <= b) {
        (names.0, a)
    } else {
        (names.1, b)
    }
}

fn at(i: usize, r: &ResidualReport, term: &'static str, value: f64, reason: &str) -> Counterexample {
    Counterexample { index: Some(i), x: Some(fv(&r.x)), term, value: F(value), reason: reason.to_string() }
}

fn first_where(reports: &[ResidualReport], pred: impl Fn(&ResidualReport) -> bool) -> Option<(usize, &ResidualReport)> {
    reports.iter().enumerate().find(|(_, r)| pred(r))
}

fn argmax(reports: &[ResidualReport], key: impl Fn(&ResidualReport) -> f64) -> (usize, &ResidualReport) {
    reports.iter().enumerate().max_by(|a, b| key(a.1).total_cmp(&key(b.1))).expect("at least one report")
}

/// Names the first point and term that contradict the claimed verdict.
fn counterexample(
    claim: VerdictKind,
    v: &Verdict,
    reports: &[ResidualReport],
    tol: f64,
    tol_falsify: f64,
) -> Counterexample {
    let na = |r: &ResidualReport| r.norm_a2.max(0.0).sqrt();
    match claim {
        VerdictKind::TotallyGeodesic => {
            let (i, r) = first_where(reports, |r| !(na(r) <= tol)).unwrap_or_else(|| argmax(reports, na));
            at(i, r, "normA", na(r), "second fundamental form does not vanish")
        }
        VerdictKind::MinimalNotGeodesic => {
            if let Some((i, r)) = first_where(reports, |r| !(r.h.abs() <= tol)) {
                at(i, r, "H", r.h.abs(), "mean curvature does not vanish")
            } else {
                let (i, r) = argmax(reports, na);
                at(i, r, "normA", na(r), "hypersurface is totally geodesic")
            }
        }
        VerdictKind::BiharmonicProper => {
            if let Some((i, r)) = first_where(reports, |r| !(r.max_normalized_bi() <= tol)) {
                let (t, val) = worst_term(r, true);
                at(i, r, t, val, "biharmonic residual exceeds tolerance")
            } else {
                let (i, r) = argmax(reports, |r| r.h.abs());
                at(i, r, "H", r.h.abs(), "mean curvature vanishes on the sample")
            }
        }
        VerdictKind::FBiharmonicProper => {
            if let Some((i, r)) = first_where(reports, |r| !(r.max_normalized_f() <= tol)) {
                let (t, val) = worst_term(r, false);
                at(i, r, t, val, "f-biharmonic residual exceeds tolerance")
            } else if v.kind == VerdictKind::BiharmonicProper {
                let (i, r) = argmax(reports, ResidualReport::max_normalized_bi);
                let (t, val) = worst_term(r, true);
                at(i, r, t, val, "hypersurface is biharmonic, so not proper")
            } else if v.kind < VerdictKind::BiharmonicProper {
                let (i, r) = argmax(reports, |r| r.h.abs());
                at(i, r, "H", r.h.abs(), "hypersurface is minimal")
            } else {
                let (i, r) = argmax(reports, ResidualReport::relative_grad_f);
                at(i, r, "grad_f", r.relative_grad_f(), "weight f is constant on the sample")
            }
        }
        VerdictKind::NotFBiharmonic => {
            let (i, r) = argmax(reports, ResidualReport::max_normalized_f);
            let (t, val) = worst_term(r, false);
            let reason = if v.kind == VerdictKind::NotFBiharmonic {
                format!("perturbation not detected: largest f-residual is below {tol_falsify:e}")
            } else {
                "perturbed construction still verifies".to_string()
            };
            at(i, r, t, val, &reason)
        }
    }
}

pub fn verify(a: &VerifyArgs) -> Result<(VerifyReport, Outcome), CliError> {
    let model = match &a.family {
        Some(name) => family_model(a, name)?,
        None => custom_model(a)?,
    };
    let tol = a.tol_verify.unwrap_or(model.tol);
    if !(tol > 0.0) || !(a.tol_falsify > 0.0) {
        return Err(usage("tolerances must be positive"));
    }
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let domain = match &a.domain {
        Some(s) => parse_box(s, model.m)?,
        None => model.domain.clone(),
    };
    let Model { space, chart, f, .. } = &model;
    let points = Sampler::new(a.samples, a.seed, domain.clone())
        .sample(|x| is_admissible(space, chart, x))
        .map_err(classify_error)?;

    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(a.jobs).build().map_err(|e| CliError::Failed(e.to_string()))?;
    let results: Vec<Result<ResidualReport, Error>> =
        pool.install(|| points.par_iter().map(|x| residual_at(space, chart, f, x)).collect());
    let mut reports = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => {
                let msg = format!("evaluation failed at point #{i} x = {:?}: {e}", points[i]);
                return Err(match classify_error(e) {
                    CliError::Usage(_) => CliError::Usage(msg),
                    CliError::Failed(_) => CliError::Failed(msg),
                });
            }
        }
    }

    let verdict = verdict_from_reports(&reports, tol);
    let e = &verdict.evidence;
    let passed = match model.expected {
        Some(VerdictKind::NotFBiharmonic) => {
            verdict.kind == VerdictKind::NotFBiharmonic && e.max_norm_f > a.tol_falsify
        }
        Some(k) => verdict.kind == k,
        None => verdict.kind != VerdictKind::NotFBiharmonic,
    };
    let ce = (!passed).then(|| {
        let claim = model.expected.unwrap_or(VerdictKind::FBiharmonicProper);
        counterexample(claim, &verdict, &reports, tol, a.tol_falsify)
    });
    let message = ce.as_ref().map(|c| format!("verification failed: {}", c.describe()));

    let config = VerifyConfig {
        command: "verify",
        family: model.family.clone(),
        m: model.m,
        params: param_record(&model.params),
        sigma: space.sigma().to_string(),
        guards: space.guards().iter().map(|g| g.to_string()).collect(),
        f: f.to_string(),
        chart: chart.components().iter().map(|c| c.to_string()).collect(),
        samples: a.samples,
        seed: a.seed,
        tol_verify: F(tol),
        tol_falsify: F(a.tol_falsify),
        perturb: match a.perturb {
            PerturbArg::None => "none",
            PerturbArg::Exponent => "exponent",
            PerturbArg::Weight => "weight",
        },
        domain: box_record(&domain),
    };
    let summary = VerifySummary {
        verdict: verdict.kind.as_str(),
        expected: model.expected.map(VerdictKind::as_str),
        pass: passed,
        max_norm_residual: F(verdict.max_norm_residual()),
        max_norm_f: F(e.max_norm_f),
        max_norm_bi: F(e.max_norm_bi),
        max_norm_a: F(e.max_norm_a),
        max_abs_h: F(e.max_abs_h),
        max_rel_grad_f: F(e.max_rel_grad_f),
        points: e.points,
        counterexample: ce,
    };
    let report = VerifyReport { config, points: reports.iter().map(PointRecord::from).collect(), summary };
    Ok((report, Outcome { passed, message }))
}

pub fn curvature(a: &CurvatureArgs) -> Result<CurvatureReport, CliError> {
    let bindings: Params = a.params.iter().cloned().collect();
    let (space, family) = match (&a.family, &a.sigma) {
        (Some(name), _) => {
            if !a.guard.is_empty() {
                return Err(usage("--guard cannot be combined with --family"));
            }
            let spec = catalog_with(name, a.m, &bindings, Perturbation::None).map_err(classify_error)?;
            if let Some(n) = a.n {
                if n != spec.m + 1 {
                    return Err(usage(format!("--n {n} does not match family dimension {}", spec.m + 1)));
                }
            }
            (spec.space, Some(spec.name))
        }
        (None, Some(sigma)) => {
            let n = match (a.n, a.m) {
                (Some(n), _) => n,
                (None, Some(m)) => m + 1,
                (None, None) => return Err(usage("--n is required with --sigma")),
            };
            if !(2..=9).contains(&n) {
                return Err(usage(format!("--n must lie in 2..=9, got {n}")));
            }
            let sigma = parse_expr("--sigma", sigma)?;
            let guards = a.guard.iter().map(|g| parse_expr("--guard", g)).collect::<Result<Vec<_>, _>>()?;
            (ConformalSpace::new(n, sigma, guards, bindings).map_err(classify_error)?, None)
        }
        (None, None) => return Err(usage("either --sigma or --family is required")),
    };
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let n = space.n();
    let domain = match &a.domain {
        Some(s) => parse_box(s, n)?,
        None => suites::ambient_box(n),
    };
    let points = Sampler::new(a.samples, a.seed, domain.clone())
        .sample(|p| space.admissible(p).is_ok())
        .map_err(classify_error)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ PLANE_STREAM);
    let mut ks = Vec::with_capacity(points.len());
    for p in &points {
        let k = suites::random_sectional(&space, p, &mut rng, Mutation::None)
            .map_err(|e| CliError::Failed(format!("curvature failed at p = {p:?}: {e}")))?;
        ks.push(k);
    }
    let holds = |k: f64| match a.expect {
        None => true,
        Some(Expect::Negative) => k < 0.0,
        Some(Expect::Zero) => k.abs() <= ZERO_CURVATURE_TOL,
        Some(Expect::Positive) => k > 0.0,
    };
    let violation = ks.iter().position(|&k| !holds(k));
    let summary = CurvatureSummary {
        samples: ks.len(),
        min_k: F(ks.iter().copied().fold(f64::INFINITY, f64::min)),
        max_k: F(ks.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        pass: violation.is_none(),
        counterexample: violation.map(|i| CurvatureSample { p: fv(&points[i]), k: F(ks[i]) }),
    };
    let config = CurvatureConfig {
        command: "curvature",
        family,
        n,
        sigma: space.sigma().to_string(),
        guards: space.guards().iter().map(|g| g.to_string()).collect(),
        params: param_record(space.params()),
        samples: a.samples,
        seed: a.seed,
        domain: box_record(&domain),
        expect: a.expect.map(Expect::as_str),
    };
    Ok(CurvatureReport { config, summary })
}

#[derive(Debug, Serialize)]
struct AnsatzRecord {
    equation: &'static str,
    m: i64,
    quadratic: String,
    coefficients: [String; 3],
    roots: Vec<String>,
    prefactor: String,
    full: Vec<String>,
    report: String,
}

fn ansatz(a: &AnsatzArgs) -> Result<Outcome, CliError> {
    if a.m < 2 {
        return Err(usage(format!("m ≥ 2 required, got {}", a.m)));
    }
    let eq = match a.equation {
        EquationArg::Pq1 => AnsatzEquation::Pq1Power,
        EquationArg::Pc1 => AnsatzEquation::Pc1AffinePower,
    };
    let r = ansatz_reduce_int(eq, a.m).map_err(classify_error)?;
    let body = match a.format {
        Format::Text => format!("{r}\n"),
        Format::Json => json(&AnsatzRecord {
            equation: eq.name(),
            m: a.m,
            quadratic: r.polynomial_string(),
            coefficients: r.quadratic.clone().map(|c| c.to_string()),
            roots: r.roots.iter().map(|c| c.to_string()).collect(),
            prefactor: r.prefactor.to_string(),
            full: r.full.iter().map(|c| c.to_string()).collect(),
            report: r.to_string(),
        }),
        Format::Csv => return Err(usage("ansatz supports text and json output")),
    };
    emit(&body, None)?;
    Ok(Outcome { passed: true, message: None })
}

pub fn run_selftest(seed: u64, mutation: Mutation) -> Vec<suites::SuiteOutcome> {
    vec![
        suites::jet_fd_suite(seed, 20),
        suites::symmetry_suite(seed, mutation),
        suites::constant_curvature_suite(seed, 200, mutation),
        suites::catalog_suite(seed, 100),
    ]
}

fn selftest(a: &SelftestArgs) -> Outcome {
    let mutation = if a.inject_christoffel_sign_flip { Mutation::FlipChristoffelSign } else { Mutation::None };
    let results = run_selftest(a.seed, mutation);
    for r in &results {
        println!("{}", r.line());
    }
    let failing: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    if failing.is_empty() {
        println!("selftest: all {} suites pass", results.len());
        Outcome { passed: true, message: None }
    } else {
        Outcome { passed: false, message: Some(format!("selftest failed: {}", failing.join(", "))) }
    }
}
