//! Report records and their text, JSON and CSV renderings.

use std::collections::BTreeMap;

use fbh_core::ResidualReport;
use serde::{Serialize, Serializer};

/// A float printed with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F(pub f64);

pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

impl Serialize for F {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n: serde_json::Number = fmt_f(self.0).parse().map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

pub fn fv(v: &[f64]) -> Vec<F> {
    v.iter().copied().map(F).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub command: &'static str,
    pub family: Option<String>,
    pub m: usize,
    pub params: BTreeMap<String, F>,
    pub sigma: String,
    pub guards: Vec<String>,
    pub f: String,
    pub chart: Vec<String>,
    pub samples: usize,
    pub seed: u64,
    pub tol_verify: F,
    pub tol_falsify: F,
    pub perturb: &'static str,
    #[serde(rename = "box")]
    pub domain: Vec<[F; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub x: Vec<F>,
    #[serde(rename = "H")]
    pub h: F,
    #[serde(rename = "normA2")]
    pub norm_a2: F,
    pub ric_nn: F,
    pub r1_f: F,
    pub r2_f_norm: F,
    pub r1_bi: F,
    pub r2_bi_norm: F,
    pub n1: F,
    pub n2: F,
    pub f: F,
    pub n1_bi: F,
    pub n2_bi: F,
    pub norm_f: F,
    pub norm_bi: F,
}

impl From<&ResidualReport> for PointRecord {
    fn from(r: &ResidualReport) -> Self {
        PointRecord {
            x: fv(&r.x),
            h: F(r.h),
            norm_a2: F(r.norm_a2),
            ric_nn: F(r.ric_nn),
            r1_f: F(r.r1_f),
            r2_f_norm: F(r.r2_f_norm),
            r1_bi: F(r.r1_bi),
            r2_bi_norm: F(r.r2_bi_norm),
            n1: F(r.n1),
            n2: F(r.n2),
            f: F(r.f_value),
            n1_bi: F(r.n1_bi),
            n2_bi: F(r.n2_bi),
            norm_f: F(r.max_normalized_f()),
            norm_bi: F(r.max_normalized_bi()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub index: Option<usize>,
    pub x: Option<Vec<F>>,
    pub term: &'static str,
    pub value: F,
    pub reason: String,
}

impl Counterexample {
    pub fn describe(&self) -> String {
        let at = match (&self.index, &self.x) {
            (Some(i), Some(x)) => {
                let xs: Vec<String> = x.iter().map(|v| format!("{:.6}", v.0)).collect();
                format!(" at point #{i} x = ({})", xs.join(", "))
            }
            _ => String::new(),
        };
        format!("{}{at}: {} = {:e}", self.reason, self.term, self.value.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub verdict: &'static str,
    pub expected: Option<&'static str>,
    pub pass: bool,
    pub max_norm_residual: F,
    pub max_norm_f: F,
    pub max_norm_bi: F,
    pub max_norm_a: F,
    pub max_abs_h: F,
    pub max_rel_grad_f: F,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub points: Vec<PointRecord>,
    pub summary: VerifySummary,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "H",
    "normA2",
    "ric_nn",
    "r1_f",
    "r2_f_norm",
    "r1_bi",
    "r2_bi_norm",
    "n1",
    "n2",
    "f",
    "n1_bi",
    "n2_bi",
    "norm_f",
    "norm_bi",
];

impl VerifyReport {
    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index".to_string()];
        header.extend((1..=self.config.m).map(|i| format!("x{i}")));
        header.extend(CSV_COLUMNS.iter().map(|c| c.to_string()));
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p.x.iter().map(|v| fmt_f(v.0)));
            for v in [
                p.h,
                p.norm_a2,
                p.ric_nn,
                p.r1_f,
                p.r2_f_norm,
                p.r1_bi,
                p.r2_bi_norm,
                p.n1,
                p.n2,
                p.f,
                p.n1_bi,
                p.n2_bi,
                p.norm_f,
                p.norm_bi,
            ] {
                row.push(fmt_f(v.0));
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn text(&self) -> String {
        let c = &self.config;
        let s = &self.summary;
        let mut out = String::new();
        let what = match &c.family {
            Some(name) => format!("family {name}"),
            None => "custom hypersurface".to_string(),
        };
        out.push_str(&format!("{what}, m = {}, {} points (seed {})\n", c.m, s.points, c.seed));
        out.push_str(&format!("  sigma = {}\n  f     = {}\n", c.sigma, c.f));
        out.push_str(&format!(
            "  max |A| = {:.3e}, max |H| = {:.3e}, max f-residual = {:.3e}, max bi-residual = {:.3e}\n",
            s.max_norm_a.0, s.max_abs_h.0, s.max_norm_f.0, s.max_norm_bi.0
        ));
        match s.expected {
            Some(e) => out.push_str(&format!("verdict: {} (expected {e})\n", s.verdict)),
            None => out.push_str(&format!("verdict: {}\n", s.verdict)),
        }
        if let Some(ce) = &s.counterexample {
            out.push_str(&format!("counterexample: {}\n", ce.describe()));
        }
        out.push_str(if s.pass { "PASS\n" } else { "FAIL\n" });
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSample {
    pub p: Vec<F>,
    pub k: F,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub config: CurvatureConfig,
    pub summary: CurvatureSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureConfig {
    pub command: &'static str,
    pub family: Option<String>,
    pub n: usize,
    pub sigma: String,
    pub guards: Vec<String>,
    pub params: BTreeMap<String, F>,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "box")]
    pub domain: Vec<[F; 2]>,
    pub expect: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSummary {
    pub samples: usize,
    pub min_k: F,
    pub max_k: F,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CurvatureSample>,
}

impl CurvatureReport {
    pub fn text(&self) -> String {
        let c = &self.config;
        let s = &self.summary;
        let mut out = format!(
            "sigma = {} in dimension {}, {} samples (seed {})\n  min K = {:.6e}\n  max K = {:.6e}\n",
            c.sigma, c.n, s.samples, c.seed, s.min_k.0, s.max_k.0
        );
        if let Some(ce) = &s.counterexample {
            let p: Vec<String> = ce.p.iter().map(|v| format!("{:.6}", v.0)).collect();
            out.push_str(&format!("counterexample: K = {:e} at p = ({})\n", ce.k.0, p.join(", ")));
        }
        if let Some(e) = c.expect {
            out.push_str(&format!("expect {e}: {}\n", if s.pass { "PASS" } else { "FAIL" }));
        }
        out
    }
}
