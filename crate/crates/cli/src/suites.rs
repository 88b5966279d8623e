//! Self-test suites shared by `fbh selftest` and the acceptance target.

use fbh_core::ambient::Mutation;
use fbh_core::expr::parse;
use fbh_core::families::{catalog, catalog_with, FamilySpec, Perturbation};
use fbh_core::fd::{close, fd_oracle};
use fbh_core::sampling::{random_direction, Sampler};
use fbh_core::{Bindings, ConformalSpace, Error, JetSpace, MultiIndex, Params, VerdictKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{AD_CORPUS, CORPUS_BOX, CORPUS_PARAMS};

/// Relative tolerance of the jet-vs-FD comparison for orders 1, 2, 3.
pub const FD_RTOL: [f64; 3] = [1e-6, 1e-6, 1e-4];

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: usize,
    pub detail: String,
    pub failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn line(&self) -> String {
        match &self.failure {
            None => format!("{}: pass ({} checks; {})", self.name, self.checks, self.detail),
            Some(f) => format!("{}: FAIL ({} checks; {}) first failure: {f}", self.name, self.checks, self.detail),
        }
    }
}

fn note(failure: &mut Option<String>, msg: impl FnOnce() -> String) {
    if failure.is_none() {
        *failure = Some(msg());
    }
}

pub fn corpus_params() -> Params {
    CORPUS_PARAMS.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// All multi-indices in `n` variables of degree `1..=3`.
pub fn multi_indices(n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 1..=3usize {
        let mut push = |vars: &[usize]| {
            let mi = MultiIndex::from_vars(n, vars);
            if !out.contains(&mi) {
                out.push(mi);
            }
        };
        for a in 0..n {
            if d == 1 {
                push(&[a]);
            }
            for b in a..n {
                if d == 2 {
                    push(&[a, b]);
                }
                for c in b..n {
                    if d == 3 {
                        push(&[a, b, c]);
                    }
                }
            }
        }
    }
    out
}

/// Jet derivatives of every corpus expression against nested central differences.
pub fn jet_fd_suite(seed: u64, points: usize) -> SuiteOutcome {
    let params = corpus_params();
    let space = JetSpace::new(3, 3).unwrap();
    let alphas = multi_indices(3);
    let pts = Sampler::new(points, seed, CORPUS_BOX.to_vec()).sample(|_| true).unwrap();
    let results: Vec<(usize, [f64; 3], Option<String>)> = AD_CORPUS
        .par_iter()
        .map(|src| {
            let e = parse(src).unwrap();
            let mut worst = [0.0f64; 3];
            let mut checks = 0;
            let mut failure = None;
            for p in &pts {
                let jet = match space.seeds(p).and_then(|s| e.eval(&Bindings::ambient(&s, &params)?)) {
                    Ok(j) => j,
                    Err(err) => {
                        note(&mut failure, || format!("`{src}` at {p:?}: {err}"));
                        continue;
                    }
                };
                for alpha in &alphas {
                    let d = alpha.degree();
                    let ad = jet.partial(alpha);
                    let fd = match fd_oracle(&e, p, alpha, None, &params) {
                        Ok(v) => v,
                        Err(err) => {
                            note(&mut failure, || format!("`{src}` FD at {p:?}: {err}"));
                            continue;
                        }
                    };
                    checks += 1;
                    let rel = (ad - fd).abs() / fd.abs().max(1.0);
                    worst[d - 1] = worst[d - 1].max(rel);
                    if !close(ad, fd, FD_RTOL[d - 1]) {
                        note(&mut failure, || format!("`{src}` ∂^{alpha:?} at {p:?}: jet {ad:e} vs FD {fd:e}"));
                    }
                }
            }
            (checks, worst, failure)
        })
        .collect();
    let mut worst = [0.0f64; 3];
    let mut checks = 0;
    let mut failure = None;
    for (c, w, f) in results {
        checks += c;
        for i in 0..3 {
            worst[i] = worst[i].max(w[i]);
        }
        if failure.is_none() {
            failure = f;
        }
    }
    SuiteOutcome {
        name: "jet-fd",
        checks,
        detail: format!(
            "{} expressions, max rel err by order {:.1e}/{:.1e}/{:.1e}",
            AD_CORPUS.len(),
            worst[0],
            worst[1],
            worst[2]
        ),
        failure,
    }
}

/// `(1 + x1² + … + z²)/2` in `n` ambient variables.
pub fn round_sphere_sigma(n: usize) -> String {
    let mut s = String::from("(1");
    for i in 1..n {
        s.push_str(&format!("+x{i}^2"));
    }
    s.push_str("+z^2)/2");
    s
}

/// Ambient box `x ∈ [−2, 2]`, `z ∈ [0.5, 5]`.
pub fn ambient_box(n: usize) -> Vec<(f64, f64)> {
    let mut b = vec![(-2.0, 2.0); n - 1];
    b.push((0.5, 5.0));
    b
}

pub fn space(n: usize, sigma: &str) -> ConformalSpace {
    ConformalSpace::new(n, parse(sigma).unwrap(), vec![], Params::new()).unwrap()
}

/// Points of the ambient box admissible for `space`.
pub fn ambient_points(space: &ConformalSpace, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, Error> {
    Sampler::new(count, seed, ambient_box(space.n())).sample(|p| space.admissible(p).is_ok())
}

/// Sectional curvature on a random 2-plane; redraws degenerate planes.
pub fn random_sectional(
    space: &ConformalSpace,
    p: &[f64],
    rng: &mut ChaCha8Rng,
    mutation: Mutation,
) -> Result<f64, Error> {
    let c = space.curvature_at_with(p, mutation)?;
    loop {
        let u = random_direction(rng, space.n());
        let v = random_direction(rng, space.n());
        match c.sectional(&u, &v) {
            Err(Error::DegeneratePlane { .. }) => continue,
            r => return r,
        }
    }
}

pub fn symmetry_suite(seed: u64, mutation: Mutation) -> SuiteOutcome {
    let mut checks = 0;
    let mut worst = 0.0f64;
    let mut failure = None;
    for n in [3, 4, 5] {
        let sigmas = [
            "z^(3/13)".to_string(),
            format!("({}+z+1)^(15/29)", (1..n).map(|i| format!("x{i}")).collect::<Vec<_>>().join("+")),
            round_sphere_sigma(n),
            "exp(x1/3)*z^(2/5)".to_string(),
        ];
        for s in &sigmas {
            let sp = space(n, s);
            for p in ambient_points(&sp, 20, seed).unwrap() {
                let c = sp.curvature_at_with(&p, mutation).unwrap();
                let rel = c.symmetry_defect() / (1.0 + c.max_abs_riemann());
                worst = worst.max(rel);
                checks += 1;
                if rel > 1e-12 {
                    note(&mut failure, || format!("σ = {s}, n = {n} at {p:?}: defect {rel:e}"));
                }
            }
        }
    }
    SuiteOutcome { name: "tensor-symmetry", checks, detail: format!("max relative defect {worst:.1e}"), failure }
}

/// Sectional curvature of σ ∈ {1, z, (1+|p|²)/2} against {0, −1, +1}.
pub fn constant_curvature_suite(seed: u64, samples: usize, mutation: Mutation) -> SuiteOutcome {
    let mut checks = 0;
    let mut worst = 0.0f64;
    let mut failure = None;
    for n in [3, 4, 5] {
        for (s, k0) in [("1".to_string(), 0.0), ("z".to_string(), -1.0), (round_sphere_sigma(n), 1.0)] {
            let sp = space(n, &s);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000 ^ n as u64);
            for p in ambient_points(&sp, samples, seed).unwrap() {
                let k = random_sectional(&sp, &p, &mut rng, mutation).unwrap();
                checks += 1;
                worst = worst.max((k - k0).abs());
                if !((k - k0).abs() <= 1e-8) {
                    note(&mut failure, || format!("σ = {s}, n = {n} at {p:?}: K = {k:e}, expected {k0}"));
                }
            }
        }
    }
    SuiteOutcome { name: "constant-curvature", checks, detail: format!("max |K − K₀| {worst:.1e}"), failure }
}

/// The family runs exercised by the catalog suite.
pub fn catalog_cases() -> Vec<(&'static str, usize, Params)> {
    let p = |kv: &[(&str, f64)]| -> Params { kv.iter().map(|(k, v)| (k.to_string(), *v)).collect() };
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
        v.push(("tr6_sphere_slice", 2, p(&[("k", k)])));
    }
    v.push(("m4_biharmonic", 4, Params::new()));
    for r in [0.5, 1.0, 2.0] {
        v.push(("cylinder_cs", 2, p(&[("R", r)])));
    }
    for h in [0.0, 1.0, 0.5] {
        v.push(("sphere_slice_biharmonic", 2, p(&[("height", h)])));
    }
    v.push(("flat_plane", 3, Params::new()));
    v
}

pub fn case_label(name: &str, m: usize, p: &Params) -> String {
    let mut s = format!("{name}(m={m}");
    for (k, v) in p {
        s.push_str(&format!(", {k}={v}"));
    }
    s.push(')');
    s
}

pub fn build(name: &str, m: usize, p: &Params, pert: Perturbation) -> FamilySpec {
    catalog_with(name, Some(m), p, pert).unwrap_or_else(|e| panic!("{}: {e}", case_label(name, m, p)))
}

pub fn catalog_suite(seed: u64, samples: usize) -> SuiteOutcome {
    let cases = catalog_cases();
    let outcomes: Vec<Result<(VerdictKind, VerdictKind), String>> = cases
        .par_iter()
        .map(|(name, m, p)| {
            let spec = catalog(name, Some(*m), p).map_err(|e| e.to_string())?;
            let c = spec.classify(samples, seed).map_err(|e| e.to_string())?;
            Ok((c.verdict.kind, spec.expected))
        })
        .collect();
    let mut failure = None;
    for ((name, m, p), o) in cases.iter().zip(&outcomes) {
        match o {
            Ok((got, want)) if got == want => {}
            Ok((got, want)) => note(&mut failure, || format!("{}: {got}, expected {want}", case_label(name, *m, p))),
            Err(e) => note(&mut failure, || format!("{}: {e}", case_label(name, *m, p))),
        }
    }
    SuiteOutcome {
        name: "catalog",
        checks: cases.len(),
        detail: format!("{} family runs × {samples} points", cases.len()),
        failure,
    }
}
