//! The acceptance checks as a batch run: one row per condition, grouped by criterion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use anyhow::Result;
use serde::Serialize;

use renormgeo::chart::{load_surface, Chart, Symmetry};
use renormgeo::extrinsic::extrinsic_frame;
use renormgeo::geometry::Metric;
use renormgeo::intrinsic::{e2_via_bform, intrinsic_frame};
use renormgeo::quadrature::{integrate_interior, QuadratureSpec, Quantity};
use renormgeo::renorm::{
    bform_expansion, boundary_s_constant_term, boundary_trace_free_norm2, constant_term_check, laplacian_correction_check,
    s_basis, BasisTerm, Ladder, BFORM_R0, BFORM_SAMPLES, LAPLACIAN_LADDER, S_LADDER,
};
use renormgeo::theorems::{
    relative_error, renormalized_area, verify_cor1, verify_cor2, verify_gauss_bonnet, verify_prop1, verify_thm2,
    verify_thm3, Check,
};

pub const CRITERIA: u32 = 11;

const PERTURBED_H3: [&str; 3] = [
    "builtin:perturbed_hemisphere?a=1&delta=0.05&k=2",
    "builtin:perturbed_hemisphere?a=1&delta=0.1&k=3",
    "builtin:perturbed_hemisphere?a=2&delta=0.08&k=1",
];
const PROFILE4: &str = "builtin:perturbed_profile4?a=1&delta=0.2";
const HEMISPHERE4: &str = "builtin:geodesic_hemisphere4?a=1";

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub criterion: u32,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub rows: Vec<SuiteRow>,
    pub pass: bool,
}

struct Rows {
    id: u32,
    rows: Vec<SuiteRow>,
}

impl Rows {
    fn at_most(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.push(Check::at_most(name, value, tol));
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.push(Check::holds(name, ok));
    }

    fn push(&mut self, check: Check) {
        self.rows.push(SuiteRow { criterion: self.id, check });
    }

    /// Wall-clock budgets are reported as pass/fail only, so the JSON stays reproducible.
    fn within_budget(&mut self, name: &str, start: Instant, budget: Duration) {
        self.holds(format!("{name} under {}s", budget.as_secs()), start.elapsed() < budget);
    }
}

pub fn run(only: &[u32], ladder: &Ladder, spec: &QuadratureSpec, progress: &mut dyn FnMut(u32, Duration)) -> Result<SuiteResult> {
    let mut all = Vec::new();
    for id in 1..=CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut rows = Rows { id, rows: Vec::new() };
        if let Err(e) = criterion(id, &mut rows, ladder, spec) {
            rows.holds(format!("error: {e:#}"), false);
        }
        progress(id, start.elapsed());
        all.extend(rows.rows);
    }
    let pass = all.iter().all(|r| r.check.pass);
    Ok(SuiteResult { rows: all, pass })
}

fn chart(uri: &str) -> Result<Chart> {
    Ok(load_surface(uri)?)
}

fn criterion(id: u32, r: &mut Rows, ladder: &Ladder, spec: &QuadratureSpec) -> Result<()> {
    let start = Instant::now();
    match id {
        1 => {
            let fit = renormalized_area(&chart("builtin:geodesic_hemisphere?a=1")?, ladder, spec)?;
            r.within_budget("hemisphere fit", start, Duration::from_secs(5));
            r.at_most("|A_R + 2pi|", fit.finite_part + 2.0 * PI, 1e-6);
            for a in [0.5, 2.0] {
                let fp = renormalized_area(&chart(&format!("builtin:geodesic_hemisphere?a={a}"))?, ladder, spec)?.finite_part;
                r.at_most(format!("a={a} |A_R + 2pi|"), fp + 2.0 * PI, 1e-6);
            }
        }
        2 => {
            for uri in PERTURBED_H3 {
                let t = Instant::now();
                let rep = verify_thm2(&chart(uri)?, ladder, spec)?;
                r.within_budget(uri, t, Duration::from_secs(60));
                r.at_most(format!("{uri} rel_err"), (rep.lhs - rep.rhs).abs() / rep.lhs.abs(), 1e-4);
            }
        }
        3 => {
            for uri in PERTURBED_H3 {
                let ch = chart(uri)?;
                let rep = verify_cor1(&ch, ladder, spec)?;
                r.at_most(format!("{uri} rel_err"), rep.rel_err, 1e-4);
                let thm2 = verify_thm2(&ch, ladder, spec)?;
                r.at_most(format!("{uri} |rhs - bending rhs|"), rep.rhs - thm2.rhs, 1e-6);
            }
        }
        4 => {
            let rep = verify_gauss_bonnet(&chart("builtin:round_sphere?dim=2&radius=1&z0=3")?, 0.0, Metric::Euclidean, spec)?;
            r.at_most("sphere |int K - 4pi|", rep.lhs - 4.0 * PI, 1e-8);
            let rep = verify_gauss_bonnet(&chart("builtin:flat_disk?radius=1&z0=1")?, 0.0, Metric::Euclidean, spec)?;
            let kg = rep.term("kg_bar").map_or(f64::NAN, |t| t.value);
            r.at_most("disk |oint kg - 2pi|", kg - 2.0 * PI, 1e-10);
        }
        5 => {
            let rep = verify_gauss_bonnet(&chart("builtin:round_sphere?dim=4&radius=1&z0=3")?, 0.0, Metric::Euclidean, spec)?;
            let vol = 8.0 * PI * PI / 3.0;
            r.at_most("rel |int lambda^2 - 8pi^2/3|", (rep.lhs - vol) / vol, 1e-6);
            r.at_most("int |W|^2", rep.term("W2_bar").map_or(f64::NAN, |t| t.value), 1e-10);
            r.at_most("int |E|^2", rep.term("E2_bar").map_or(f64::NAN, |t| t.value), 1e-10);
            r.within_budget("4-sphere", start, Duration::from_secs(30));
        }
        6 => {
            let rep = verify_cor2(&chart(HEMISPHERE4)?, ladder, spec)?;
            let expected = 4.0 * PI * PI / 3.0;
            r.at_most("rel |A_R - 4pi^2/3|", (rep.lhs - expected) / expected, 1e-4);
            r.at_most("rel |rhs - 4pi^2/3|", (rep.rhs - expected) / expected, 1e-4);
            let worst = rep
                .terms
                .iter()
                .filter(|t| t.name != "4pi2_chi_over_3")
                .fold(0.0f64, |m, t| m.max(t.value.abs()));
            r.at_most("largest correction integral", worst, 1e-8);
        }
        7 => {
            let rep = verify_thm3(&chart(PROFILE4)?, ladder, spec)?;
            r.at_most("rel_err", rep.rel_err, 5e-4);
            for c in rep.checks.iter().filter(|c| c.name.starts_with("cauchy:")) {
                r.holds(c.name.clone(), c.pass);
            }
            r.within_budget("profile4", start, Duration::from_secs(600));
        }
        8 => {
            let profile = chart(PROFILE4)?;
            let bent = bent_cylinder()?;
            for (label, ch, tr) in [("profile4", &profile, [0.3, 0.7, 1.1]), ("bent", &bent, [0.7, 0.1, -0.2])] {
                let b = bform_expansion(ch, &tr, BFORM_R0, BFORM_SAMPLES)?;
                r.at_most(format!("{label} |b3|/scale"), b.b3 / b.b2.abs().max(b.b4.abs()).max(1.0), 1e-6);
                let oracle = boundary_trace_free_norm2(ch, &tr)?;
                r.at_most(format!("{label} |b2 - |II0|^2|"), b.b2 - oracle, 1e-5);
            }
            let lap = laplacian_correction_check(&profile, &LAPLACIAN_LADDER, spec)?;
            r.at_most("finite part rel diff", lap.finite_part_rel_diff, 1e-5);
            r.at_most(
                "corrected negative powers",
                lap.max_negative_power / lap.corrected.max_abs_coefficient().max(1.0),
                1e-6,
            );
            r.holds("corrected ladder converges", lap.corrected_cauchy.converges);
            let flux_scale = lap.flux.coefficient(BasisTerm::Power(-1)).unwrap_or(0.0).abs().max(1.0);
            r.at_most("flux constant", lap.flux_constant / flux_scale, 1e-5);
        }
        9 => {
            let mut samples = Vec::new();
            for uri in [HEMISPHERE4, PROFILE4] {
                let rep = boundary_s_constant_term(&chart(uri)?, &S_LADDER, spec)?;
                r.at_most(format!("{uri} |c0|/max|c|"), rep.relative, 1e-4);
                samples = rep.fit.ladder;
            }
            let injected: Vec<(f64, f64)> = samples.iter().map(|&(e, v)| (e, v + 0.3)).collect();
            let rep = constant_term_check(&injected, &s_basis())?;
            r.holds("injected constant flagged", !rep.pass);
            r.at_most("injected |c0 - 0.3|/0.3", (rep.constant - 0.3) / 0.3, 0.05);
        }
        10 => {
            let v = pointwise_properties()?;
            r.holds("Chen density identity", v.chen == 0);
            r.holds("Weyl density covariance", v.weyl == 0);
            r.holds("|E|^2 extrinsic = intrinsic", v.e2 == 0);
            r.holds("Gauss equation", v.gauss == 0);
            r.holds("nontrivial Weyl and |E|^2 samples", v.nontrivial);
            r.within_budget("property suite", start, Duration::from_secs(120));
        }
        11 => {
            for uri in [PERTURBED_H3[0], PROFILE4] {
                for eps in [0.05, 0.1] {
                    let rep = verify_prop1(&chart(uri)?, eps, spec)?;
                    r.at_most(format!("{uri} eps={eps} rel_err"), rep.rel_err, 1e-7);
                }
            }
            let hemi = chart("builtin:geodesic_hemisphere?a=1")?;
            let area = integrate_interior(&hemi, Quantity::One, 0.1, Metric::Hyperbolic, spec)?;
            r.at_most("hemisphere area at eps=0.1 vs 18pi", relative_error(area, 18.0 * PI), 1e-12);
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Bent cylinder over `S¹(1) × R²` with `|II̊|² = 2/3` along its ideal boundary.
pub fn bent_cylinder() -> Result<Chart> {
    Ok(Chart::from_exprs(
        "bent_cylinder",
        &[
            "(1 - u1^2/6 + 0.3*u1^3/6)*cos(u2)",
            "(1 - u1^2/6 + 0.3*u1^3/6)*sin(u2)",
            "u3",
            "u4",
            "u1",
        ],
        vec![(0.0, 0.5), (0.0, 2.0 * PI), (-1.0, 1.0), (-1.0, 1.0)],
        Symmetry::None,
        None,
        0,
        true,
        2,
    )?)
}

fn generic_hypersurface() -> Result<Chart> {
    Ok(Chart::from_exprs(
        "generic4",
        &["u2", "u3", "u4", "0.3*sin(u2 + 2*u3)*cos(u4) + 0.2*u1^2*u2 + 0.1*u2*u3*u1", "u1"],
        vec![(0.3, 1.2), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        Symmetry::None,
        None,
        0,
        false,
        0,
    )?)
}

struct Violations {
    chen: usize,
    weyl: usize,
    e2: usize,
    gauss: usize,
    nontrivial: bool,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Kronecker-sequence points over the chart box, kept 5% away from its edges.
fn sample_points(ch: &Chart, count: usize) -> Vec<Vec<f64>> {
    const ALPHA: [f64; 4] = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877, 0.236_067_977_499_79];
    (1..=count)
        .map(|k| {
            ch.domain
                .iter()
                .zip(ALPHA)
                .map(|(&(lo, hi), a)| lo + (0.05 + 0.9 * (k as f64 * a).fract()) * (hi - lo))
                .collect()
        })
        .collect()
}

fn pointwise_properties() -> Result<Violations> {
    let charts = vec![
        chart(PERTURBED_H3[0])?,
        chart(PERTURBED_H3[1])?,
        chart(PROFILE4)?,
        chart("builtin:perturbed_profile4?a=1.5&delta=-0.3&p=3")?,
        bent_cylinder()?,
        generic_hypersurface()?,
    ];
    let per = 10_000usize.div_ceil(charts.len());
    let mut v = Violations { chen: 0, weyl: 0, e2: 0, gauss: 0, nontrivial: false };
    let (mut w2_max, mut e2_max) = (0.0f64, 0.0f64);
    for ch in &charts {
        let n = ch.n() as i32;
        for p in sample_points(ch, per) {
            let f = extrinsic_frame(ch, &p)?;
            let hyp = (f.h_hyp * f.h_hyp - f.r_hyp).powi(n) * f.area_density_hyp;
            let euc = (f.h_euc * f.h_euc - f.r_euc).powi(n) * f.area_density_euc;
            v.chen += usize::from(!close(hyp, euc, 1e-10));
            let ih = intrinsic_frame(ch, &p, Metric::Hyperbolic)?;
            let ie = intrinsic_frame(ch, &p, Metric::Euclidean)?;
            for (i, m) in [(&ih, Metric::Hyperbolic), (&ie, Metric::Euclidean)] {
                v.gauss += usize::from(!close(i.lambda - f.r(m), m.ambient_curvature(), 1e-9));
            }
            if ch.dom_dim == 4 {
                v.weyl += usize::from(!close(ih.w2 * f.area_density_hyp, ie.w2 * f.area_density_euc, 1e-9));
                v.e2 += usize::from(!close(ih.e2, e2_via_bform(&f)?, 1e-8));
                w2_max = w2_max.max(ie.w2);
                e2_max = e2_max.max(ih.e2);
            }
        }
    }
    v.nontrivial = w2_max > 1e-3 && e2_max > 1e-3;
    Ok(v)
}
