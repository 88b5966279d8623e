//! Acceptance gate: one pass/fail line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::Instant;

use fbh::corpus::AD_CORPUS;
use fbh::suites::{self, build, case_label};
use fbh_core::ambient::Mutation;
use fbh_core::expr::parse;
use fbh_core::families::{
    ansatz_reduce_int, nontrivial_root, ode_residual, pro1_residual, AnsatzEquation, FamilySpec, Perturbation,
    ReducedEquation,
};
use fbh_core::fbiharmonic::{admissible_points, umbilical_theory_check};
use fbh_core::sampling::Sampler;
use fbh_core::{Bindings, Error, JetSpace, Params, Var, VerdictKind};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 11;
const SAMPLES: usize = 100;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// The f-biharmonic families of criterion 5.
fn f_families() -> Vec<(&'static str, usize, Params)> {
    let mut v = vec![("tr1", 2, Params::new()), ("tr4", 2, Params::new())];
    for m in [3, 5] {
        v.push(("pqe1_i", m, Params::new()));
    }
    for m in [3, 5, 6, 8] {
        v.push(("pqe1_ii", m, Params::new()));
    }
    for m in [3, 5] {
        v.push(("pc2_i", m, Params::new()));
    }
    for m in [3, 5, 8] {
        v.push(("pc2_ii", m, Params::new()));
    }
    for k in [6.0, 10.0] {
        v.push(("tr6", 2, params(&[("k", k)])));
    }
    v
}

fn suite(o: suites::SuiteOutcome) -> Check {
    match o.failure {
        None => Ok(format!("{} checks, {}", o.checks, o.detail)),
        Some(f) => Err(f),
    }
}

fn criterion_1() -> Check {
    let names = ["exp(", "ln(", "sqrt(", "sin(", "cos(", "atan(", "abs(", "^("];
    for n in names {
        ensure(AD_CORPUS.iter().any(|e| e.contains(n)), || format!("corpus lacks `{n}`"))?;
    }
    ensure(AD_CORPUS.len() >= 30, || format!("corpus has {} expressions", AD_CORPUS.len()))?;
    suite(suites::jet_fd_suite(SEED, 20))
}

fn criterion_2() -> Check {
    suite(suites::constant_curvature_suite(SEED, 200, Mutation::None))
}

fn criterion_3() -> Check {
    let mut worst = f64::NEG_INFINITY;
    let mut total = 0;
    for m in [3usize, 5, 6, 8] {
        let mi = m as i64;
        let t = format!("({}/{})", mi * mi - 2 * mi, mi * mi + 4);
        let sum: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
        for sigma in [format!("z^{t}"), format!("({}+z+1)^{t}", sum.join("+"))] {
            let sp = suites::space(m + 1, &sigma);
            let pts = suites::ambient_points(&sp, 1000, SEED).map_err(|e| e.to_string())?;
            ensure(pts.len() == 1000, || format!("{sigma}: only {} admissible points", pts.len()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + m as u64);
            for p in &pts {
                let k = suites::random_sectional(&sp, p, &mut rng, Mutation::None).map_err(|e| e.to_string())?;
                total += 1;
                worst = worst.max(k);
                ensure(k < 0.0, || format!("σ = {sigma}, m = {m}: K = {k:e} at {p:?}"))?;
            }
        }
    }
    Ok(format!("{total} samples, max K = {worst:.3e}"))
}

fn criterion_4() -> Check {
    for m in 3..=12i64 {
        let mut want = vec![
            BigRational::from_integer(BigInt::from(-1)),
            BigRational::new((m * m - 2 * m).into(), (m * m + 4).into()),
        ];
        want.sort();
        for eq in [AnsatzEquation::Pq1Power, AnsatzEquation::Pc1AffinePower] {
            let r = ansatz_reduce_int(eq, m).map_err(|e| e.to_string())?;
            ensure(r.roots == want, || format!("{} m = {m}: roots {:?}", eq.name(), r.roots))?;
            ensure(nontrivial_root(&BigRational::from_integer(m.into())) == want[1], || {
                format!("m = {m}: root formula")
            })?;
        }
    }
    // PQ1 at m = 2 against −(1+k²) β'² · pq01 on random β shapes
    let betas = ["exp(e*z)*(c+z)^(3/7)+atan(z)", "(c+z)^(-2/3)*cos(e*z/4)+2", "sqrt(c+z^2)*exp(-e*z/5)"];
    let space = JetSpace::new(1, 1).unwrap();
    let mut worst = 0.0f64;
    let mut cand = Sampler::new(200, SEED, vec![(0.2, 3.0), (-2.0, 2.0), (0.3, 3.0), (0.05, 1.5)]).candidates();
    for i in 0..200 {
        let s = cand.next().unwrap();
        let (c, e, z, k2) = (s[0], s[1], s[2], s[3]);
        let p = params(&[("c", c), ("e", e)]);
        let beta = parse(betas[i % betas.len()]).unwrap();
        let a = ode_residual(&ReducedEquation::Pq1 { m: 2, k2 }, &beta, &[z], &p).map_err(|e| e.to_string())?;
        let b = ode_residual(&ReducedEquation::Pq01, &beta, &[z], &p).map_err(|e| e.to_string())?;
        let bj = beta
            .eval(&Bindings::new(space.constant(0.0), &p).with(Var::Z, space.seed(&[z], 0).unwrap()))
            .map_err(|e| e.to_string())?;
        let b1 = bj.first(0);
        let predicted = -(1.0 + k2) * b1 * b1 * b.raw;
        let rel = (a.raw - predicted).abs() / a.normalizer.max(1e-300);
        worst = worst.max(rel);
        ensure(rel <= 1e-10, || format!("β = {} at z = {z}: PQ1 {:e} vs {predicted:e}", betas[i % 3], a.raw))?;
    }
    Ok(format!("roots exact for m = 3..12; m = 2 factorization max rel defect {worst:.1e} on 200 samples"))
}

fn classify(spec: &FamilySpec) -> Result<fbh_core::fbiharmonic::Classification, String> {
    spec.classify(SAMPLES, SEED).map_err(|e| format!("{}: {e}", spec.name))
}

fn criterion_5() -> Check {
    let mut worst = 0.0f64;
    for (name, m, p) in f_families() {
        let label = case_label(name, m, &p);
        let spec = build(name, m, &p, Perturbation::None);
        let c = classify(&spec)?;
        let e = &c.verdict.evidence;
        let limit = if name == "tr6" { 1e-6 } else { 1e-8 };
        ensure(e.points == SAMPLES, || format!("{label}: {} points", e.points))?;
        ensure(e.max_norm_f < limit, || format!("{label}: f-residual {:e}", e.max_norm_f))?;
        ensure(e.max_norm_bi > 1e-3, || format!("{label}: bi-residual {:e}", e.max_norm_bi))?;
        ensure(e.max_rel_grad_f > 1e-8, || format!("{label}: f constant"))?;
        ensure(c.verdict.kind == VerdictKind::FBiharmonicProper, || format!("{label}: {}", c.verdict.kind))?;
        worst = worst.max(e.max_norm_f);
    }
    Ok(format!("{} family runs proper f-biharmonic, max f-residual {worst:.1e}", f_families().len()))
}

fn criterion_6() -> Check {
    let spec = build("m4_biharmonic", 4, &Params::new(), Perturbation::None);
    ensure(spec.sigma.to_string() == "(z)^(2/5)", || format!("σ = {}", spec.sigma))?;
    let (a, _) = spec.hyperplane.clone().ok_or("not a hyperplane")?;
    ensure((a.iter().map(|x| x * x).sum::<f64>() - 4.0).abs() < 1e-12, || "Σaᵢ² ≠ 4".into())?;
    let c = classify(&spec)?;
    let e = &c.verdict.evidence;
    let hs: Vec<f64> = c.reports.iter().map(|r| r.h.abs()).collect();
    let (lo, hi) = hs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    ensure(e.max_norm_f < 1e-8 && e.max_norm_bi < 1e-8, || {
        format!("residuals {:e} / {:e}", e.max_norm_f, e.max_norm_bi)
    })?;
    ensure(lo > 0.0 && hi - lo > 1e-6, || format!("|H| range [{lo:e}, {hi:e}]"))?;
    ensure(c.verdict.kind == VerdictKind::BiharmonicProper, || format!("verdict {}", c.verdict.kind))?;
    Ok(format!("biharmonic_proper, residuals {:.1e}/{:.1e}, |H| ∈ [{lo:.3}, {hi:.3}]", e.max_norm_f, e.max_norm_bi))
}

fn criterion_7() -> Check {
    let mut worst_f = 0.0f64;
    let mut worst_gap = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let spec = build("cylinder_cs", 2, &params(&[("R", r)]), Perturbation::None);
        let c = classify(&spec)?;
        let e = &c.verdict.evidence;
        ensure(e.max_norm_f < 1e-10, || format!("R = {r}: f-residual {:e}", e.max_norm_f))?;
        for rep in &c.reports {
            ensure((rep.h - 1.0 / (2.0 * r)).abs() < 1e-10, || format!("R = {r}: H = {}", rep.h))?;
            let gap = (rep.r1_bi.abs() - rep.h / (r * r)).abs();
            worst_gap = worst_gap.max(gap);
            ensure(gap < 1e-10, || {
                format!("R = {r}: |r1_bi| = {:e} vs H/R² = {:e}", rep.r1_bi.abs(), rep.h / (r * r))
            })?;
        }
        ensure(c.verdict.kind == VerdictKind::FBiharmonicProper, || format!("R = {r}: {}", c.verdict.kind))?;
        worst_f = worst_f.max(e.max_norm_f);
    }
    for (h, want) in
        [(0.0, VerdictKind::TotallyGeodesic), (1.0, VerdictKind::BiharmonicProper), (0.5, VerdictKind::NotFBiharmonic)]
    {
        let spec = build("sphere_slice_biharmonic", 2, &params(&[("height", h)]), Perturbation::None);
        let c = classify(&spec)?;
        ensure(c.verdict.kind == want, || format!("slice z = {h}: {} expected {want}", c.verdict.kind))?;
        if h == 0.5 {
            ensure(c.verdict.evidence.max_norm_bi > 1e-3, || "slice z = 0.5 looks biharmonic".into())?;
        }
    }
    Ok(format!("cylinders f-residual {worst_f:.1e}, |r1_bi| − H/R² within {worst_gap:.1e}; slices 0/1/0.5 as expected"))
}

fn criterion_8() -> Check {
    let mut points = 0;
    let mut with_margin = 0;
    let mut worst = [0.0f64; 3];
    let mut margin = f64::INFINITY;
    for (name, m, p) in f_families() {
        let spec = build(name, m, &p, Perturbation::None);
        let pts =
            admissible_points(&spec.space, &spec.chart, &spec.sampler(SAMPLES, SEED)).map_err(|e| e.to_string())?;
        for x in &pts {
            let u = match umbilical_theory_check(&spec.space, &spec.chart, &spec.f, x) {
                Ok(u) => u,
                Err(Error::NotUmbilic { .. }) => continue,
                Err(e) => return Err(format!("{}: {e}", case_label(name, m, &p))),
            };
            points += 1;
            let vals = [u.codazzi, u.f_form.unwrap_or(0.0), u.curvature_identity];
            for (w, v) in worst.iter_mut().zip(vals) {
                *w = w.max(v);
            }
            ensure(vals.iter().all(|v| *v < 1e-8), || format!("{} at {x:?}: {vals:?}", case_label(name, m, &p)))?;
            if let Some(mg) = u.margin {
                with_margin += 1;
                margin = margin.min(mg);
                ensure(mg >= -1e-10, || format!("{} at {x:?}: margin {mg:e}", case_label(name, m, &p)))?;
            }
        }
    }
    ensure(points > 0, || "no umbilical points".into())?;
    Ok(format!(
        "{points} umbilical points, Codazzi/f-form/curvature {:.1e}/{:.1e}/{:.1e}, min margin {margin:.1e} over {with_margin}",
        worst[0], worst[1], worst[2]
    ))
}

fn criterion_9() -> Check {
    let mut cases = f_families();
    cases.push(("m4_biharmonic", 4, Params::new()));
    let mut least = f64::INFINITY;
    let mut runs = 0;
    for (name, m, p) in &cases {
        for pert in [Perturbation::Exponent, Perturbation::Weight] {
            let spec = build(name, *m, p, pert);
            let c = classify(&spec)?;
            let r = c.verdict.evidence.max_norm_f;
            runs += 1;
            least = least.min(r);
            ensure(r > 1e-3, || format!("{} {pert:?}: max residual {r:e}", case_label(name, *m, p)))?;
        }
    }
    for r in [0.5, 1.0, 2.0] {
        let spec = build("cylinder_cs", 2, &params(&[("R", r)]), Perturbation::Weight);
        let v = classify(&spec)?.verdict.evidence.max_norm_f;
        runs += 1;
        least = least.min(v);
        ensure(v > 1e-3, || format!("cylinder R = {r}: {v:e}"))?;
    }
    Ok(format!("{runs} perturbed runs, smallest max residual {least:.2e}"))
}

fn criterion_10() -> Check {
    let mut cases = f_families();
    cases.push(("m4_biharmonic", 4, Params::new()));
    let mut runs = 0;
    for (name, m, p) in &cases {
        for pert in [Perturbation::None, Perturbation::Exponent] {
            let spec = build(name, *m, p, pert);
            if spec.hyperplane.is_none() {
                continue;
            }
            let label = format!("{} {pert:?}", case_label(name, *m, p));
            let pts =
                admissible_points(&spec.space, &spec.chart, &spec.sampler(SAMPLES, SEED)).map_err(|e| e.to_string())?;
            let mut pro = 0.0f64;
            let mut ff = 0.0f64;
            for x in &pts {
                pro = pro
                    .max(pro1_residual(&spec.space, &spec.chart, x).map_err(|e| format!("{label}: {e}"))?.normalized);
                ff = ff.max(spec.residual_at(x).map_err(|e| format!("{label}: {e}"))?.max_normalized_f());
            }
            let agree = (pro < 1e-8 && ff < 1e-8) || (pro > 1e-3 && ff > 1e-3);
            ensure(agree, || format!("{label}: pro1 {pro:e} vs f-lines {ff:e}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} hyperplane runs agree"))
}

fn criterion_11() -> Check {
    let bin = env!("CARGO_BIN_EXE_fbh");
    let args = ["verify", "--family", "pqe1_ii", "--m", "5", "--samples", "100", "--seed", "7", "--format", "json"];
    let out = |extra: &[&str]| -> Result<Vec<u8>, String> {
        let o = Command::new(bin).args(args).args(extra).env_remove("FBH_SEED").output().map_err(|e| e.to_string())?;
        ensure(o.status.code() == Some(0), || {
            format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr))
        })?;
        Ok(o.stdout)
    };
    let a = out(&[])?;
    let b = out(&[])?;
    let c = out(&["--jobs", "1"])?;
    ensure(a == b, || "two runs differ".into())?;
    ensure(a == c, || "single-threaded run differs".into())?;
    let v: serde_json::Value = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    ensure(v["summary"]["verdict"] == "f_biharmonic_proper", || format!("verdict {}", v["summary"]["verdict"]))?;
    Ok(format!("{} bytes identical across 3 runs", a.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("AD oracle", criterion_1),
        ("constant-curvature calibration", criterion_2),
        ("negative sectional curvature", criterion_3),
        ("exact ansatz roots", criterion_4),
        ("family verification", criterion_5),
        ("m = 4 biharmonic boundary", criterion_6),
        ("cylinder and sphere slices", criterion_7),
        ("umbilical identities", criterion_8),
        ("falsifiability", criterion_9),
        ("hyperplane residual equivalence", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {}: PASS {name} ({msg}) [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
