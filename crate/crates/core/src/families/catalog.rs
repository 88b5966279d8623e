//! Named constructions: conformal factor, chart, weight, parameters,
//! sampling box and the expected verdict.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::ambient::ConformalSpace;
use crate::error::Error;
use crate::expr::{parse, Expr, Params};
use crate::fbiharmonic::{classify, residual_at, Classification, ResidualReport, VerdictKind, TOL_VERIFY};
use crate::hypersurface::{ImmersionChart, Orientation};
use crate::sampling::Sampler;
use crate::Rational;

pub const FAMILY_NAMES: [&str; 11] = [
    "tr1",
    "tr4",
    "pqe1_i",
    "pqe1_ii",
    "pc2_i",
    "pc2_ii",
    "tr6_sphere_slice",
    "cylinder_cs",
    "flat_plane",
    "sphere_slice_biharmonic",
    "m4_biharmonic",
];

/// Controls for falsification runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Perturbation {
    #[default]
    None,
    /// Adds `1/20` to the outer exponent of σ (β for the sphere-slice family).
    Exponent,
    /// Multiplies `f` by `1 + 0.1 x1`.
    Weight,
}

#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub name: String,
    pub m: usize,
    pub sigma: Expr,
    pub space: ConformalSpace,
    pub chart: ImmersionChart,
    pub f: Expr,
    pub params: Params,
    /// Chart-coordinate box.
    pub domain: Vec<(f64, f64)>,
    pub expected: VerdictKind,
    pub tol: f64,
    pub perturbation: Perturbation,
    /// Hyperplane coefficients `(a₁..a_m, a_{m+1})`, if the chart is one.
    pub hyperplane: Option<(Vec<f64>, f64)>,
}

impl FamilySpec {
    pub fn sampler(&self, count: usize, seed: u64) -> Sampler {
        Sampler::new(count, seed, self.domain.clone())
    }

    pub fn classify(&self, count: usize, seed: u64) -> Result<Classification, Error> {
        classify(&self.space, &self.chart, &self.f, &self.sampler(count, seed), self.tol)
    }

    pub fn residual_at(&self, x: &[f64]) -> Result<ResidualReport, Error> {
        residual_at(&self.space, &self.chart, &self.f, x)
    }
}

fn rat(r: Rational) -> String {
    if *r.denom() == 1 {
        format!("({})", r.numer())
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

fn sum_x(m: usize) -> String {
    (1..=m).map(|i| format!("x{i}")).collect::<Vec<_>>().join("+")
}

fn affine(m: usize) -> String {
    let mut s: Vec<String> = (1..=m).map(|i| format!("a{i}*x{i}")).collect();
    s.push(format!("a{}", m + 1));
    s.join("+")
}

struct Builder {
    name: &'static str,
    m: usize,
    params: Params,
}

impl Builder {
    fn set(&mut self, k: &str, v: f64) {
        self.params.insert(k.to_string(), v);
    }

    fn get(&self, k: &str) -> f64 {
        self.params[k]
    }

    fn positive(&self, keys: &[&str]) -> Result<(), Error> {
        for k in keys {
            let v = self.get(k);
            if !(v > 0.0) {
                return Err(Error::Constraint(format!("{}: {k} must be positive, got {v}", self.name)));
            }
        }
        Ok(())
    }

    fn hyperplane_coeffs(&self) -> (Vec<f64>, f64) {
        let a = (1..=self.m).map(|i| self.get(&format!("a{i}"))).collect();
        (a, self.get(&format!("a{}", self.m + 1)))
    }
}

fn m_in(name: &str, m: usize, ok: bool, why: &str) -> Result<(), Error> {
    if ok {
        Ok(())
    } else {
        Err(Error::Constraint(format!("{name}: {why}, got m = {m}")))
    }
}

fn canonical(name: &str) -> Option<&'static str> {
    let name = if name == "tr6" { "tr6_sphere_slice" } else { name };
    FAMILY_NAMES.iter().copied().find(|n| *n == name)
}

fn default_m(name: &str) -> usize {
    match name {
        "tr1" | "tr4" | "tr6_sphere_slice" | "cylinder_cs" | "sphere_slice_biharmonic" => 2,
        "m4_biharmonic" => 4,
        _ => 3,
    }
}

pub fn catalog(name: &str, m: Option<usize>, bindings: &Params) -> Result<FamilySpec, Error> {
    catalog_with(name, m, bindings, Perturbation::None)
}

pub fn catalog_with(
    name: &str,
    m: Option<usize>,
    bindings: &Params,
    perturbation: Perturbation,
) -> Result<FamilySpec, Error> {
    let name = canonical(name).ok_or_else(|| Error::Constraint(format!("unknown family `{name}`")))?;
    let m = m.unwrap_or_else(|| default_m(name));
    m_in(name, m, (2..=8).contains(&m), "m must lie in 2..=8")?;
    let fixed = |want: usize| m_in(name, m, m == want, &format!("m = {want} required"));
    let mut b = Builder { name, m, params: Params::new() };
    let half = Rational::new(1, 20);
    let bump = |r: Rational| if perturbation == Perturbation::Exponent { r + half } else { r };
    let no_exponent = || {
        if perturbation == Perturbation::Exponent {
            Err(Error::Constraint(format!("{name}: σ has no exponent to perturb")))
        } else {
            Ok(())
        }
    };
    let upper = |b: &mut Builder| {
        for i in 1..=m {
            b.set(&format!("a{i}"), 1.0);
        }
        b.set(&format!("a{}", m + 1), 2.5);
        b.set("c", 1.0);
    };
    let mut expected = VerdictKind::FBiharmonicProper;
    let mut tol = TOL_VERIFY;
    let mut orientation = Orientation::Standard;
    let mut general: Option<Vec<&str>> = None;
    let mut domain = vec![(-2.0, 2.0); m];
    let half_space_guards = vec!["z-0.5".to_string(), "5-z".to_string()];

    // (σ, guards, f), parameters set on `b` before overrides are applied
    let (sigma, guards, f): (String, Vec<String>, String);
    match name {
        "tr1" => {
            fixed(2)?;
            for (k, v) in [("a1", 0.5), ("a2", 0.5), ("a3", 3.0), ("c1", 1.0), ("c2", 1.0), ("c", 1.0)] {
                b.set(k, v);
            }
            sigma = format!("(c1*z+c2)^{}", rat(bump(Rational::from_integer(-1))));
            guards = vec!["z".into(), "c1*z+c2".into()];
            f = "c*sqrt(1+a1^2+a2^2)*(c1*a1*x1+c1*a2*x2+c1*a3+c2)^2/c1".into();
        }
        "tr4" => {
            fixed(2)?;
            for (k, v) in
                [("c1", 1.0), ("c2", 3.0), ("c3", 1.0), ("c4", 1.0), ("a1", 0.0), ("a2", 0.0), ("a3", 1.0), ("c", 1.0)]
            {
                b.set(k, v);
            }
            sigma = format!("((c1*x1+c2)*(c3*z+c4))^{}", rat(bump(Rational::from_integer(-1))));
            guards = vec!["z".into(), "c1*x1+c2".into(), "c3*z+c4".into()];
            f = "c*(c3*a3+c4)^2*(c1*x1+c2)/c3".into();
        }
        "pqe1_i" => {
            m_in(name, m, m != 4, "m ≠ 4 required")?;
            upper(&mut b);
            sigma = format!("z^{}", rat(bump(Rational::from_integer(-1))));
            guards = half_space_guards;
            let mi = m as i64;
            f = format!(
                "c*{}^{}*({})^{}",
                mi + 1,
                rat(Rational::new(4 - mi, 4)),
                affine(m),
                rat(Rational::from_integer(4 - mi))
            );
        }
        "pqe1_ii" => {
            m_in(name, m, m >= 3 && m != 4, "m ≥ 3 and m ≠ 4 required")?;
            upper(&mut b);
            let mi = m as i64;
            let (num, den) = (mi * mi - 2 * mi, mi * mi + 4);
            sigma = format!("z^{}", rat(bump(Rational::new(num, den))));
            guards = half_space_guards;
            f = format!(
                "c*({num}^2/({}*{den}^2))^{}*({})^{}",
                mi + 1,
                rat(Rational::new(mi - 4, 4)),
                affine(m),
                rat(Rational::new((4 - mi) * (mi + 2), den))
            );
        }
        "pc2_i" | "pc2_ii" => {
            let mi = m as i64;
            if name == "pc2_i" {
                m_in(name, m, m != 4, "m ≠ 4 required")?;
            } else {
                m_in(name, m, m >= 3 && m != 4, "m ≥ 3 and m ≠ 4 required")?;
            }
            for i in 1..=m {
                b.set(&format!("a{i}"), 0.0);
            }
            let last = format!("a{}", m + 1);
            b.set(&last, 1.0);
            b.set("C", 1.0);
            b.set("c", 1.0);
            let s = format!("{}+z+C", sum_x(m));
            let on = format!("{}+{last}+C", sum_x(m));
            let mut g: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
            g.push("z".into());
            g.push(s.clone());
            guards = g;
            domain = vec![(0.1, 2.0); m];
            if name == "pc2_i" {
                sigma = format!("({s})^{}", rat(bump(Rational::from_integer(-1))));
                f = format!("c*({on})^{}", rat(Rational::from_integer(4 - mi)));
            } else {
                let t = Rational::new(mi * mi - 2 * mi, mi * mi + 4);
                sigma = format!("({s})^{}", rat(bump(t)));
                f = format!(
                    "c*{}^{}*({on})^{}",
                    rat(t),
                    rat(Rational::new(mi - 4, 2)),
                    rat(Rational::new((4 - mi) * (mi + 2), mi * mi + 4))
                );
            }
        }
        "tr6_sphere_slice" => {
            fixed(2)?;
            b.set("k", 6.0);
            for (k, v) in [("a1", 0.0), ("a2", 0.0), ("a3", 0.0)] {
                b.set(k, v);
            }
            let r = "sqrt(1+x1^2+x2^2)";
            let den = "-2*r*z-2*(r^2+z^2)*atan(z/r)+k*r^3*(r^2+z^2)".replace('r', r);
            let beta = format!("2*{r}^3/({den})");
            let beta = match perturbation {
                Perturbation::Exponent => format!("({beta})^{}", rat(bump(Rational::from_integer(1)))),
                _ => beta,
            };
            sigma = format!("{beta}*(1+x1^2+x2^2+z^2)/2");
            guards = vec![den];
            f = "k^2*(1+x1^2+x2^2)^2/4".into();
            tol = 1e-6;
        }
        "cylinder_cs" => {
            fixed(2)?;
            no_exponent()?;
            b.set("R", 1.0);
            sigma = "1".into();
            guards = vec![];
            f = "(exp(x2/R)+exp(-x2/R))/2".into();
            general = Some(vec!["R*cos(x1/R)", "R*sin(x1/R)", "x2"]);
            orientation = Orientation::Reversed;
        }
        "flat_plane" => {
            no_exponent()?;
            for i in 1..=m + 1 {
                b.set(&format!("a{i}"), 0.0);
            }
            sigma = "1".into();
            guards = vec![];
            f = "1".into();
            expected = VerdictKind::TotallyGeodesic;
        }
        "sphere_slice_biharmonic" => {
            fixed(2)?;
            b.set("height", 1.0);
            sigma = format!("((1+x1^2+x2^2+z^2)/2)^{}", rat(bump(Rational::from_integer(1))));
            guards = vec![];
            f = "1".into();
        }
        "m4_biharmonic" => {
            fixed(4)?;
            upper(&mut b);
            sigma = format!("z^{}", rat(bump(Rational::new(2, 5))));
            guards = half_space_guards;
            f = "1".into();
            expected = VerdictKind::BiharmonicProper;
        }
        _ => unreachable!(),
    }

    for (k, v) in bindings {
        if !b.params.contains_key(k) {
            return Err(Error::Constraint(format!("{name}: unknown parameter `{k}`")));
        }
        b.set(k, *v);
    }

    match name {
        "tr1" => b.positive(&["a1", "a2", "a3", "c1", "c2", "c"])?,
        "tr4" => b.positive(&["c1", "c2", "c3", "c4", "a3", "c"])?,
        "pqe1_i" | "pqe1_ii" | "m4_biharmonic" => {
            b.positive(&["c"])?;
            let (a, _) = b.hyperplane_coeffs();
            let s: f64 = a.iter().map(|x| x * x).sum();
            if (s - m as f64).abs() > 1e-12 * m as f64 {
                return Err(Error::Constraint(format!("{name}: Σaᵢ² must equal m = {m}, got {s}")));
            }
        }
        "pc2_i" | "pc2_ii" => {
            b.positive(&["C", "c", &format!("a{}", m + 1)])?;
            let (a, _) = b.hyperplane_coeffs();
            if a.iter().any(|&x| x != 0.0) {
                return Err(Error::Constraint(format!("{name}: the plane is z = a{}", m + 1)));
            }
        }
        "tr6_sphere_slice" => {
            if !(b.get("k") >= 6.0) {
                return Err(Error::Constraint(format!("tr6_sphere_slice: k ≥ 6 required, got {}", b.get("k"))));
            }
        }
        "cylinder_cs" => b.positive(&["R"])?,
        _ => {}
    }

    if name == "sphere_slice_biharmonic" {
        let hgt = b.get("height");
        expected = if hgt == 0.0 {
            VerdictKind::TotallyGeodesic
        } else if hgt.abs() == 1.0 {
            VerdictKind::BiharmonicProper
        } else {
            VerdictKind::NotFBiharmonic
        };
        b.set("a1", 0.0);
        b.set("a2", 0.0);
        b.set("a3", hgt);
    }

    let f = match perturbation {
        Perturbation::Weight => format!("({f})*(1+0.1*x1)"),
        _ => f,
    };
    expected = match (perturbation, expected) {
        (Perturbation::None, e) => e,
        (_, VerdictKind::TotallyGeodesic) => VerdictKind::TotallyGeodesic,
        (Perturbation::Weight, VerdictKind::BiharmonicProper) => VerdictKind::BiharmonicProper,
        _ => VerdictKind::NotFBiharmonic,
    };

    let params = b.params;
    let sigma = parse(&sigma)?;
    let guards = guards.iter().map(|g| parse(g)).collect::<Result<Vec<_>, _>>()?;
    let f = parse(&f)?;
    let n = m + 1;
    let space = ConformalSpace::new(n, sigma.clone(), guards, params.clone())?;
    let (chart, hyperplane) = match general {
        Some(comps) => {
            let comps = comps.iter().map(|c| parse(c)).collect::<Result<Vec<_>, _>>()?;
            (ImmersionChart::general(comps, params.clone())?.with_orientation(orientation), None)
        }
        None => {
            let a: Vec<f64> = (1..=m).map(|i| params[&format!("a{i}")]).collect();
            let off = params[&format!("a{}", m + 1)];
            (ImmersionChart::hyperplane(&a, off)?.with_orientation(orientation), Some((a, off)))
        }
    };
    Ok(FamilySpec {
        name: name.to_string(),
        m,
        sigma,
        space,
        chart,
        f,
        params,
        domain,
        expected,
        tol,
        perturbation,
        hyperplane,
    })
}
