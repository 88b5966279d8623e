use fbh_core::expr::{parse, BinOp};
use fbh_core::families::ansatz::nontrivial_root;
use fbh_core::families::{ansatz_reduce, catalog, ode_residual, AnsatzEquation, ReducedEquation};
use fbh_core::fbiharmonic::{residual_at, verdict_from_reports};
use fbh_core::{ConformalSpace, Expr, Orientation, Params, Var};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn space(n: usize, sigma: &str) -> ConformalSpace {
    ConformalSpace::new(n, parse(sigma).unwrap(), vec![], Params::new()).unwrap()
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|c| Expr::Const((c * 100.0).round() / 100.0)),
        Just(Expr::Var(Var::X(1))),
        Just(Expr::Var(Var::Z)),
        Just(Expr::param("k")),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), 0..4usize).prop_map(|(l, r, op)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][op];
                Expr::binary(op, l, r)
            }),
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), -4i64..5, 1i64..5).prop_map(|(e, p, q)| Expr::pow(e, fbh_core::Rational::new(p, q))),
            inner.prop_map(|e| Expr::unary(fbh_core::scalar::Elementary::Atan, e)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(e in tree()) {
        let back = parse(&e.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), e.to_string());
    }

    #[test]
    fn riemann_symmetries(x in -1.0f64..1.0, y in -1.0f64..1.0, z in 0.5f64..3.0, which in 0..4usize) {
        let sigma = ["z^(3/13)", "(x1+x2+z+1)^(15/29)", "(1+x1^2+x2^2+z^2)/2", "exp(x1/3)*z"][which];
        let c = space(3, sigma).curvature_at(&[x, y, z]).unwrap();
        prop_assert!(c.symmetry_defect() <= 1e-12 * (1.0 + c.max_abs_riemann()));
    }

    #[test]
    fn sectional_tensor_matches_closed_form(
        p in prop::array::uniform4(0.2f64..2.0),
        u in prop::array::uniform4(-1.0f64..1.0),
        v in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let s = space(4, "(x1+x2+x3+z+1)^(3/13)*(1+x1^2/4)");
        if let (Ok(a), Ok(b)) = (s.sectional(&p, &u, &v), s.sectional_closed_form(&p, &u, &v)) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{} {}", a, b);
        }
    }

    #[test]
    fn weight_scale_invariance(x in prop::array::uniform5(-0.3f64..0.3), scale in 0.01f64..100.0, m in prop::sample::select(vec![3usize, 5])) {
        let spec = catalog("pqe1_ii", Some(m), &Params::new()).unwrap();
        let xs = &x[..m];
        let a = spec.residual_at(xs).unwrap();
        let f10 = Expr::binary(BinOp::Mul, Expr::Const(scale), spec.f.clone());
        let b = residual_at(&spec.space, &spec.chart, &f10, xs).unwrap();
        let (a1, a2) = a.normalized_f();
        let (b1, b2) = b.normalized_f();
        prop_assert!((a1 - b1).abs() <= 1e-12 && (a2 - b2).abs() <= 1e-12);
        prop_assert!((a.r1_bi - b.r1_bi).abs() <= 1e-12 * (1.0 + a.r1_bi.abs()));
    }

    #[test]
    fn orientation_flip(x in prop::array::uniform2(-1.5f64..1.5)) {
        let spec = catalog("tr1", None, &Params::new()).unwrap();
        let flipped = spec.chart.clone().with_orientation(Orientation::Reversed);
        let a = spec.residual_at(&x).unwrap();
        let b = residual_at(&spec.space, &flipped, &spec.f, &x).unwrap();
        prop_assert!((a.h + b.h).abs() <= 1e-13 * (1.0 + a.h.abs()));
        prop_assert!((a.r1_bi + b.r1_bi).abs() <= 1e-12 * (1.0 + a.r1_bi.abs()));
        prop_assert!((a.max_normalized_bi() - b.max_normalized_bi()).abs() <= 1e-12);
        prop_assert!((a.max_normalized_f() - b.max_normalized_f()).abs() <= 1e-12);
    }

    #[test]
    fn verdict_monotone_in_tol(t1 in -16.0f64..0.0, dt in 0.0f64..8.0, fam in 0..4usize) {
        let name = ["pqe1_ii", "m4_biharmonic", "sphere_slice_biharmonic", "tr4"][fam];
        let spec = catalog(name, None, &Params::new()).unwrap();
        let reports = spec.classify(10, 5).unwrap().reports;
        let tight = verdict_from_reports(&reports, 10f64.powf(t1)).kind;
        let loose = verdict_from_reports(&reports, 10f64.powf(t1 + dt)).kind;
        prop_assert!(loose <= tight, "{} -> {}", tight, loose);
    }

    #[test]
    fn ansatz_roots_for_rational_m(p in 2i64..60, q in 1i64..7) {
        let m = BigRational::new(BigInt::from(p.max(2 * q)), BigInt::from(q));
        for eq in [AnsatzEquation::Pq1Power, AnsatzEquation::Pc1AffinePower] {
            let r = ansatz_reduce(eq, &m).unwrap();
            let mut want = vec![BigRational::from_integer(BigInt::from(-1)), nontrivial_root(&m)];
            want.sort();
            want.dedup();
            prop_assert_eq!(&r.roots, &want);
        }
    }

    #[test]
    fn pq1_at_m2_factors_through_pq01(c in 0.2f64..3.0, e in -3.0f64..3.0, z in 0.3f64..3.0, k2 in 0.05f64..1.0) {
        let mut p = Params::new();
        p.insert("c".into(), c);
        p.insert("e".into(), e);
        let beta = parse("exp(e*z)*(c+z)^(3/7)+atan(z)").unwrap();
        let a = ode_residual(&ReducedEquation::Pq1 { m: 2, k2 }, &beta, &[z], &p).unwrap();
        let b = ode_residual(&ReducedEquation::Pq01, &beta, &[z], &p).unwrap();
        let jet = fbh_core::JetSpace::new(1, 1).unwrap();
        let zj = jet.seed(&[z], 0).unwrap();
        let bj = beta.eval(&fbh_core::Bindings::new(jet.constant(0.0), &p).with(Var::Z, zj)).unwrap();
        let b1 = bj.first(0);
        let predicted = -(1.0 + k2) * b1 * b1 * b.raw;
        prop_assert!((a.raw - predicted).abs() <= 1e-10 * a.normalizer.max(1e-300), "{} {}", a.raw, predicted);
    }
}
