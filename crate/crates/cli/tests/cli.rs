use std::process::{Command, Output};

fn fbh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbh")).args(args).env_remove("FBH_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn verify_family_json() {
    let o = fbh(&["verify", "--family", "pqe1_ii", "--m", "5", "--samples", "100", "--seed", "7", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["summary"]["verdict"], "f_biharmonic_proper");
    assert_eq!(v["points"].as_array().unwrap().len(), 100);
    for key in ["x", "H", "normA2", "ric_nn", "r1_f", "r2_f_norm", "r1_bi", "r2_bi_norm", "n1", "n2", "f"] {
        assert!(v["points"][0].get(key).is_some(), "{key}");
    }
    assert!(v["summary"].get("counterexample").is_none());
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn verify_flat_plane_and_custom_biharmonic() {
    let o = fbh(&["verify", "--family", "flat_plane", "--m", "3"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("totally_geodesic"));

    let o =
        fbh(&["verify", "--sigma", "z^(2/5)", "--hyperplane", "1,1,1,1;0", "--m", "4", "--f", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["summary"]["verdict"], "biharmonic_proper");
}

#[test]
fn verify_custom_immersion() {
    // the Clifford-type cylinder as a general chart
    let o = fbh(&[
        "verify",
        "--sigma",
        "1",
        "--immersion",
        "R*cos(x1/R)|R*sin(x1/R)|x2",
        "--param",
        "R=1",
        "--f",
        "(exp(x2)+exp(-x2))/2",
        "--format",
        "json",
    ]);
    let v = json(&o);
    assert_eq!(code(&o), 0, "{v}");
    assert_eq!(v["config"]["m"], 2);
}

#[test]
fn verify_failure_names_point_and_term() {
    // constant weight on an f-biharmonic hyperplane: neither biharmonic nor f-biharmonic
    let o =
        fbh(&["verify", "--sigma", "z^(3/13)", "--hyperplane", "1,1,1;2.5", "--guard", "z-0.5", "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["summary"]["verdict"], "not_f_biharmonic");
    let ce = &v["summary"]["counterexample"];
    assert!(ce["index"].is_u64());
    assert!(ce["term"] == "r1_f" || ce["term"] == "r2_f");
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("point #") && err.contains("r"), "{err}");
}

#[test]
fn verify_perturbations() {
    let o = fbh(&["verify", "--family", "pc2_i", "--m", "3", "--perturb", "weight", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["summary"]["expected"], "not_f_biharmonic");
    assert!(v["summary"]["max_norm_f"].as_f64().unwrap() > 1e-3);
    // claiming a perturbed family passes is a violation
    let o = fbh(&["verify", "--family", "pc2_i", "--m", "3", "--perturb", "weight", "--tol-verify", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let o =
        fbh(&["verify", "--family", "tr4", "--samples", "5", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("index,x1,x2,H,normA2"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify"][..],
        &["verify", "--family", "nope"],
        &["verify", "--family", "pqe1_i", "--m", "4"],
        &["verify", "--family", "tr1", "--param", "zeta=1"],
        &["verify", "--family", "tr1", "--param", "a1=-1"],
        &["verify", "--sigma", "z^(", "--hyperplane", "1,1;0"],
        &["verify", "--sigma", "z", "--hyperplane", "1,1;0", "--f", "z"],
        &["verify", "--sigma", "z", "--hyperplane", "1,1"],
        &["verify", "--sigma", "z", "--hyperplane", "0,0;1", "--guard", "-1"],
        &["verify", "--family", "flat_plane", "--perturb", "exponent"],
        &["verify", "--family", "tr1", "--box", "1,0"],
        &["curvature", "--sigma", "z"],
        &["ansatz", "--equation", "pq1", "--m", "1"],
        &["ansatz", "--equation", "pq9", "--m", "3"],
        &["frobnicate"],
    ] {
        let o = fbh(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn curvature_examples() {
    let o = fbh(&[
        "curvature",
        "--sigma",
        "z^(3/13)",
        "--n",
        "4",
        "--expect",
        "negative",
        "--samples",
        "1000",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["summary"]["max_k"].as_f64().unwrap() < 0.0);

    let o = fbh(&["curvature", "--sigma", "1", "--n", "3", "--expect", "zero", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["summary"]["min_k"].as_f64().unwrap().abs() < 1e-10);
    assert!(v["summary"]["max_k"].as_f64().unwrap().abs() < 1e-10);

    let o = fbh(&["curvature", "--sigma", "z^(-1)", "--n", "4", "--expect", "negative"]);
    assert_eq!(code(&o), 1);

    let o = fbh(&["curvature", "--family", "pc2_ii", "--m", "5", "--expect", "negative"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn ansatz_examples() {
    let o = fbh(&["ansatz", "--equation", "pq1", "--m", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "13t^2+10t-3=0; t=-1, t=3/13");
    let o = fbh(&["ansatz", "--equation", "pc1", "--m", "8", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["roots"], serde_json::json!(["-1", "12/17"]));
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_fbh"));
        c.args(args);
        match env {
            Some(s) => c.env("FBH_SEED", s),
            None => c.env_remove("FBH_SEED"),
        };
        c.output().unwrap().stdout
    };
    let base = ["verify", "--family", "tr1", "--samples", "4", "--format", "json"];
    let a = run(Some("5"), &base);
    let mut with_flag = base.to_vec();
    with_flag.extend(["--seed", "5"]);
    assert_eq!(a, run(None, &with_flag));
    assert_ne!(a, run(None, &base));
}

#[test]
fn selftest_passes_and_detects_mutation() {
    let o = fbh(&["selftest", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    for suite in ["jet-fd", "tensor-symmetry", "constant-curvature", "catalog"] {
        assert!(out.lines().any(|l| l.starts_with(&format!("{suite}: pass"))), "{out}");
    }
    let o = fbh(&["selftest", "--seed", "99", "--inject-christoffel-sign-flip"]);
    assert_eq!(code(&o), 1);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("constant-curvature: FAIL"), "{out}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("constant-curvature"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&fbh(&["--help"])), 0);
    assert_eq!(code(&fbh(&["verify", "--help"])), 0);
}
