//! Subcommand bodies. Each returns an [`Artifact`]; rendering is left to the caller.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use renormgeo::chart::{load_surface, Chart, Face, CATALOG};
use renormgeo::extrinsic::extrinsic_frame;
use renormgeo::geometry::Metric;
use renormgeo::intrinsic::intrinsic_frame;
use renormgeo::quadrature::{integrate_boundary, integrate_interior, BoundaryQuantity, Quantity};
use renormgeo::renorm::{default_basis, finite_part, ladder_values, BasisTerm};
use renormgeo::theorems::{verify, TheoremId, VerificationReport};

use crate::config::{Format, RunConfig};
use crate::suite;

/// A command result: JSON document plus its CSV rendering.
pub struct Artifact {
    pub json: Value,
    pub csv: String,
    /// Format used when none was requested.
    pub default_format: Format,
    /// Drives the exit status.
    pub pass: bool,
}

impl Artifact {
    fn new(json: impl Serialize, csv: String) -> Result<Self> {
        Ok(Artifact {
            json: serde_json::to_value(json)?,
            csv,
            default_format: Format::Json,
            pass: true,
        })
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(&self.json)? + "\n",
            Format::Csv => self.csv.clone(),
        })
    }
}

fn surface(cfg: &RunConfig) -> Result<Chart> {
    let s = cfg.require_surface()?;
    load_surface(s).with_context(|| format!("loading surface {s}"))
}

fn metric(cfg: &RunConfig, default: Metric) -> Result<Metric> {
    match &cfg.metric {
        Some(m) => Ok(m.parse()?),
        None => Ok(default),
    }
}

/// Truncation height: 0.1 by default for charts reaching the ideal boundary, 0 otherwise.
fn eps(cfg: &RunConfig, chart: &Chart) -> f64 {
    cfg.eps.unwrap_or(match chart.face {
        Face::Ideal { .. } => 0.1,
        _ => 0.0,
    })
}

fn quantity(cfg: &RunConfig) -> Result<Quantity> {
    Ok(cfg.quantity.as_deref().unwrap_or("one").parse()?)
}

pub fn catalog() -> Result<Artifact> {
    let rows: Vec<Value> = CATALOG.iter().map(|(n, p)| json!({ "name": n, "params": p })).collect();
    let mut csv = String::from("name,params\n");
    for (n, p) in CATALOG {
        writeln!(csv, "{n},\"{}\"", p.replace('"', "\"\""))?;
    }
    Artifact::new(json!({ "builtins": rows }), csv)
}

pub fn curvature(cfg: &RunConfig) -> Result<Artifact> {
    let chart = surface(cfg)?;
    let point = cfg.point.clone().context("--point is required")?;
    if point.len() != chart.dom_dim {
        bail!("{} takes {} parameters, got {}", chart.name, chart.dom_dim, point.len());
    }
    let ext = extrinsic_frame(&chart, &point)?;
    let hyp = intrinsic_frame(&chart, &point, Metric::Hyperbolic)?;
    let euc = intrinsic_frame(&chart, &point, Metric::Euclidean)?;
    let mut csv = String::from("quantity,value\n");
    for (k, v) in [
        ("z", ext.z),
        ("H_euc", ext.h_euc),
        ("H_hyp", ext.h_hyp),
        ("R_euc", ext.r_euc),
        ("R_hyp", ext.r_hyp),
        ("B0sq_euc", ext.b0sq_euc),
        ("B0sq_hyp", ext.b0sq_hyp),
        ("lambda_euc", euc.lambda),
        ("lambda_hyp", hyp.lambda),
        ("E2_euc", euc.e2),
        ("E2_hyp", hyp.e2),
        ("W2_euc", euc.w2),
        ("W2_hyp", hyp.w2),
    ] {
        writeln!(csv, "{k},{v:e}")?;
    }
    Artifact::new(
        json!({
            "chart": chart.name,
            "param": point,
            "extrinsic": ext,
            "intrinsic": { "euclidean": euc, "hyperbolic": hyp },
        }),
        csv,
    )
}

pub fn integrate(cfg: &RunConfig) -> Result<Artifact> {
    let chart = surface(cfg)?;
    let spec = cfg.quadrature()?;
    let m = metric(cfg, Metric::Hyperbolic)?;
    let e = eps(cfg, &chart);
    let name = cfg.quantity.as_deref().unwrap_or("one");
    let value = if cfg.boundary.unwrap_or(false) {
        let q: BoundaryQuantity = name.parse()?;
        integrate_boundary(&chart, q, e, m, &spec)?
    } else {
        integrate_interior(&chart, name.parse()?, e, m, &spec)?
    };
    Artifact::new(
        json!({
            "chart": chart.name,
            "quantity": name,
            "boundary": cfg.boundary.unwrap_or(false),
            "metric": m,
            "eps": e,
            "value": value,
        }),
        format!("eps,value\n{e:e},{value:e}\n"),
    )
}

pub fn renorm(cfg: &RunConfig) -> Result<Artifact> {
    let chart = surface(cfg)?;
    let q = quantity(cfg)?;
    let m = metric(cfg, Metric::Hyperbolic)?;
    let basis = match &cfg.basis {
        Some(b) => b.iter().map(|s| s.parse()).collect::<Result<Vec<BasisTerm>, _>>()?,
        None => default_basis(chart.n()),
    };
    let fit = finite_part(&chart, q, &cfg.ladder()?, &basis, m, &cfg.quadrature()?)?;
    let mut csv = String::from("term,coefficient\n");
    for (t, c) in fit.basis.iter().zip(&fit.coefficients) {
        writeln!(csv, "{t},{c:e}")?;
    }
    Artifact::new(
        json!({ "chart": chart.name, "quantity": q.name(), "metric": m, "fit": fit, "finite_part": fit.finite_part }),
        csv,
    )
}

pub fn expand(cfg: &RunConfig) -> Result<Artifact> {
    let chart = surface(cfg)?;
    let q = quantity(cfg)?;
    let m = metric(cfg, Metric::Hyperbolic)?;
    let ladder = cfg.ladder()?;
    let eps = ladder.eps();
    let values = ladder_values(&chart, &[(q, m)], &eps, &cfg.quadrature()?)?.remove(0);
    let mut csv = String::from("eps,value\n");
    let mut rows = Vec::new();
    for (e, v) in eps.iter().zip(&values) {
        writeln!(csv, "{e:e},{v:e}")?;
        rows.push(json!({ "eps": e, "value": v }));
    }
    let mut a = Artifact::new(
        json!({ "chart": chart.name, "quantity": q.name(), "metric": m, "ladder": ladder, "values": rows }),
        csv,
    )?;
    a.default_format = Format::Csv;
    Ok(a)
}

fn report_csv(r: &VerificationReport) -> Result<String> {
    let mut csv = String::from("name,coefficient,value\n");
    writeln!(csv, "lhs,1,{:e}", r.lhs)?;
    for t in &r.terms {
        writeln!(csv, "{},{:e},{:e}", t.name, t.coefficient, t.value)?;
    }
    writeln!(csv, "rhs,1,{:e}", r.rhs)?;
    Ok(csv)
}

pub fn verify_theorem(cfg: &RunConfig) -> Result<Artifact> {
    let id: TheoremId = cfg.theorem.as_deref().context("--theorem is required")?.parse()?;
    let chart = surface(cfg)?;
    // the closed-manifold Gauss-Bonnet checks default to the flat ambient metric
    let default_metric = match id {
        TheoremId::Gb | TheoremId::Cgb => Metric::Euclidean,
        _ => Metric::Hyperbolic,
    };
    let m = metric(cfg, default_metric)?;
    let report = verify(id, &chart, eps(cfg, &chart), m, &cfg.ladder()?, &cfg.quadrature()?)?;
    let mut a = Artifact::new(&report, report_csv(&report)?)?;
    a.pass = report.pass;
    Ok(a)
}

/// Fixed-width summary of a suite run.
pub fn suite_table(result: &suite::SuiteResult) -> String {
    let mut out = String::new();
    for r in &result.rows {
        let c = &r.check;
        let _ = writeln!(
            out,
            "{}  C{:<2}  {:<58}  {:>10.3e}  tol {:.0e}",
            if c.pass { "PASS" } else { "FAIL" },
            r.criterion,
            c.name,
            c.value,
            c.tolerance
        );
    }
    let failed = result.rows.iter().filter(|r| !r.check.pass).count();
    let _ = writeln!(out, "{} checks, {} failed", result.rows.len(), failed);
    out
}

pub fn run_suite(cfg: &RunConfig) -> Result<(Artifact, String)> {
    let only = cfg.only.clone().unwrap_or_default();
    if let Some(bad) = only.iter().find(|&&c| !(1..=suite::CRITERIA).contains(&c)) {
        bail!("no criterion {bad}; valid ids are 1..={}", suite::CRITERIA);
    }
    let result = suite::run(&only, &cfg.ladder()?, &cfg.quadrature()?, &mut |id, t| {
        eprintln!("criterion {id} finished in {:.1}s", t.as_secs_f64());
    })?;
    let mut csv = String::from("criterion,name,value,tolerance,pass\n");
    for r in &result.rows {
        let c = &r.check;
        writeln!(csv, "{},\"{}\",{:e},{:e},{}", r.criterion, c.name, c.value, c.tolerance, c.pass)?;
    }
    let table = suite_table(&result);
    let mut a = Artifact::new(&result, csv)?;
    a.pass = result.pass;
    Ok((a, table))
}
