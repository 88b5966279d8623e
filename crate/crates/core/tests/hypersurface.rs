use fbh_core::expr::parse;
use fbh_core::fbiharmonic::{residual_at, umbilical_theory_check};
use fbh_core::hypersurface::{geometry_at, surface_scalar_calculus, SurfacePoint};
use fbh_core::{ConformalSpace, Expr, ImmersionChart, Orientation, Params};

fn space(n: usize, sigma: &str) -> ConformalSpace {
    ConformalSpace::new(n, parse(sigma).unwrap(), vec![], Params::new()).unwrap()
}

fn cylinder(r: f64) -> ImmersionChart {
    let comps = ["R*cos(x1/R)", "R*sin(x1/R)", "x2"].iter().map(|s| parse(s).unwrap()).collect();
    let params: Params = [("R".to_string(), r)].into_iter().collect();
    ImmersionChart::general(comps, params).unwrap().with_orientation(Orientation::Reversed)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn flat_plane_is_geodesic() {
    let s = space(4, "1");
    let chart = ImmersionChart::hyperplane(&[0.3, -0.2, 1.0], 0.5).unwrap();
    let g = geometry_at(&s, &chart, &[0.1, 0.2, 0.3]).unwrap();
    assert!(g.norm_a2.abs() < 1e-24 && g.h_mean.abs() < 1e-12);
    assert!(g.umbilic);
}

#[test]
fn horosphere_has_unit_principal_curvatures() {
    let s = space(4, "z");
    let chart = ImmersionChart::hyperplane(&[0.0, 0.0, 0.0], 2.0).unwrap();
    for x in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5]] {
        let g = geometry_at(&s, &chart, &x).unwrap();
        assert!(g.principal.iter().all(|l| close(*l, 1.0, 1e-12)), "{:?}", g.principal);
        assert!(close(g.h_mean, 1.0, 1e-12) && g.umbilic);
        let xi_len: f64 = g.xi.iter().map(|c| c * c).sum::<f64>() / (g.sigma * g.sigma);
        assert!(close(xi_len, 1.0, 1e-14));
    }
}

#[test]
fn hyperplane_mean_curvature_is_normal_derivative_of_sigma() {
    let s = space(3, "(1+x1^2+x2^2+z^2)/2");
    let a = [0.4, -0.7];
    let chart = ImmersionChart::hyperplane(&a, 0.3).unwrap();
    let x = [0.2, 0.9];
    let g = geometry_at(&s, &chart, &x).unwrap();
    let d: f64 = g.xi0.iter().zip(&g.p).map(|(n, p)| n * p).sum();
    assert!(close(g.h_mean, d, 1e-12), "{} {}", g.h_mean, d);
    assert!(g.umbilic);
}

#[test]
fn cylinder_principal_curvatures() {
    let s = space(3, "1");
    for r in [0.5, 1.0, 2.0] {
        let g = geometry_at(&s, &cylinder(r), &[0.3, -0.4]).unwrap();
        assert!(close(g.principal[0], 0.0, 1e-12) && close(g.principal[1], 1.0 / r, 1e-12), "{:?}", g.principal);
        assert!(close(g.h_mean, 0.5 / r, 1e-12));
        assert!(!g.umbilic);
    }
}

#[test]
fn normal_is_orthogonal_to_tangents() {
    let s = space(4, "z^(3/13)");
    let chart = ImmersionChart::hyperplane(&[1.0, 0.5, -0.3], 2.0).unwrap();
    let sp = SurfacePoint::new(&s, &chart, &[0.2, 0.1, 0.4]).unwrap();
    let xi0 = sp.xi0();
    for i in 0..3 {
        let e = sp.tangent(i);
        let d: f64 = e.iter().zip(&xi0).map(|(a, b)| a * b).sum();
        assert!(d.abs() < 1e-14);
    }
}

#[test]
fn laplacian_examples() {
    let (grad, lap) = surface_scalar_calculus(
        &space(3, "1"),
        &ImmersionChart::hyperplane(&[0.0, 0.0], 0.0).unwrap(),
        &parse("x1^2+x2^2").unwrap(),
        &[0.3, 0.5],
    )
    .unwrap();
    assert!(close(lap, 4.0, 1e-13) && close(grad[0], 0.6, 1e-13));
    // hyperbolic plane z = 1 is flat with metric h₀; Δ(x1²) = 2
    let (_, lap) = surface_scalar_calculus(
        &space(3, "z"),
        &ImmersionChart::hyperplane(&[0.0, 0.0], 1.0).unwrap(),
        &parse("x1^2").unwrap(),
        &[0.7, 0.1],
    )
    .unwrap();
    assert!(close(lap, 2.0, 1e-13));
    // on the unit round cylinder Δ(cos x1) = −cos x1
    let (_, lap) =
        surface_scalar_calculus(&space(3, "1"), &cylinder(1.0), &parse("cos(x1)").unwrap(), &[0.7, 0.1]).unwrap();
    assert!(close(lap, -(0.7f64).cos(), 1e-12));
}

#[test]
fn cylinder_residuals() {
    let s = space(3, "1");
    for r in [0.5, 1.0, 2.0] {
        let f = parse("(exp(x2/R)+exp(-x2/R))/2").unwrap();
        let rep = residual_at(&s, &cylinder(r), &f, &[0.2, 0.7]).unwrap();
        let h = 0.5 / r;
        assert!(rep.max_normalized_f() < 1e-10, "{rep:?}");
        assert!(close(rep.r1_bi.abs(), h / (r * r), 1e-10), "{} {}", rep.r1_bi, h / (r * r));
    }
}

#[test]
fn codazzi_on_hyperplanes() {
    let s = space(4, "z^(3/13)");
    let chart = ImmersionChart::hyperplane(&[1.0, 1.0, 1.0], 2.5).unwrap();
    let c = umbilical_theory_check(&s, &chart, &Expr::Const(1.0), &[0.1, 0.2, -0.1]).unwrap();
    assert!(c.codazzi < 1e-10, "{c:?}");
}
