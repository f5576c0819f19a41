//! Acceptance suite. Each test covers one criterion and prints a single
//! `PASS`/`FAIL` line; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use renormgeo::chart::{load_surface, Chart, Symmetry};
use renormgeo::extrinsic::extrinsic_frame;
use renormgeo::geometry::Metric;
use renormgeo::intrinsic::{e2_via_bform, intrinsic_frame};
use renormgeo::quadrature::{integrate_interior, QuadratureSpec, Quantity};
use renormgeo::renorm::{
    bform_expansion, boundary_s_constant_term, boundary_trace_free_norm2, constant_term_check, laplacian_correction_check,
    s_basis, Ladder, BFORM_R0, BFORM_SAMPLES, LAPLACIAN_LADDER, S_LADDER,
};
use renormgeo::theorems::{
    relative_error, renormalized_area, verify_cor1, verify_cor2, verify_gauss_bonnet, verify_prop1, verify_thm2,
    verify_thm3, VerificationReport,
};

const PERTURBED_H3: [&str; 3] = [
    "builtin:perturbed_hemisphere?a=1&delta=0.05&k=2",
    "builtin:perturbed_hemisphere?a=1&delta=0.1&k=3",
    "builtin:perturbed_hemisphere?a=2&delta=0.08&k=1",
];
const PROFILE4: &str = "builtin:perturbed_profile4?a=1&delta=0.2";
const HEMISPHERE4: &str = "builtin:geodesic_hemisphere4?a=1";

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn chart(uri: &str) -> Chart {
    load_surface(uri).unwrap_or_else(|e| panic!("{uri}: {e}"))
}

/// Collects named conditions and prints one verdict line.
struct Criterion {
    id: u32,
    title: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
    start: Instant,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            failures: Vec::new(),
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn within(&mut self, what: &str, value: f64, tol: f64) {
        self.check(value <= tol, format!("{what} = {value:.2e} (tol {tol:.0e})"));
    }

    fn elapsed_under(&mut self, budget: Duration) {
        let t = self.start.elapsed();
        self.check(t < budget, format!("runtime {:.2}s (budget {}s)", t.as_secs_f64(), budget.as_secs()));
    }

    fn finish(self) {
        let ok = self.failures.is_empty();
        let detail = if ok { self.notes.join("; ") } else { self.failures.join("; ") };
        println!(
            "{} criterion {:>2}: {} [{}]",
            if ok { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            detail
        );
        assert!(ok, "criterion {} failed: {}", self.id, self.failures.join("; "));
    }
}

fn report_ok(c: &mut Criterion, label: &str, r: &VerificationReport) {
    for check in &r.checks {
        c.check(check.pass, format!("{label} {} = {:.2e}", check.name, check.value));
    }
}

#[test]
fn criterion_01_totally_geodesic_hemisphere_area() {
    let mut c = Criterion::new(1, "renormalized area of the totally geodesic H3 hemisphere is -2pi");
    let hemi = chart("builtin:geodesic_hemisphere?a=1");
    let fit = renormalized_area(&hemi, &Ladder::default(), &spec()).unwrap();
    c.elapsed_under(Duration::from_secs(5));
    c.within("|A_R + 2pi|", (fit.finite_part + 2.0 * PI).abs(), 1e-6);
    // the ladder itself against the truncated area 2π(a/ε − 1)
    let worst = fit
        .ladder
        .iter()
        .map(|&(eps, v)| relative_error(v, 2.0 * PI * (1.0 / eps - 1.0)))
        .fold(0.0, f64::max);
    c.within("ladder vs closed form", worst, 1e-10);
    for a in [0.5, 2.0] {
        let scaled = chart(&format!("builtin:geodesic_hemisphere?a={a}"));
        let fp = renormalized_area(&scaled, &Ladder::default(), &spec()).unwrap().finite_part;
        c.within(&format!("a={a} |A_R + 2pi|"), (fp + 2.0 * PI).abs(), 1e-6);
    }
    c.finish();
}

#[test]
fn criterion_02_bending_difference() {
    let mut c = Criterion::new(2, "finite part equals the hyperbolic minus Euclidean bending");
    for uri in PERTURBED_H3 {
        let start = Instant::now();
        let r = verify_thm2(&chart(uri), &Ladder::default(), &spec()).unwrap();
        let t = start.elapsed().as_secs_f64();
        c.within(&format!("{uri} rel"), (r.lhs - r.rhs).abs() / r.lhs.abs(), 1e-4);
        c.check(t < 60.0, format!("{uri} {t:.1}s"));
        report_ok(&mut c, uri, &r);
    }
    c.finish();
}

#[test]
fn criterion_03_euler_characteristic_form() {
    let mut c = Criterion::new(3, "finite part equals -2pi chi - |B0|^2/2 + bending");
    for uri in PERTURBED_H3 {
        let ch = chart(uri);
        let r = verify_cor1(&ch, &Ladder::default(), &spec()).unwrap();
        c.within(&format!("{uri} rel"), r.rel_err, 1e-4);
        let thm2 = verify_thm2(&ch, &Ladder::default(), &spec()).unwrap();
        c.within(&format!("{uri} |rhs - bending rhs|"), (r.rhs - thm2.rhs).abs(), 1e-6);
        report_ok(&mut c, uri, &r);
    }
    c.finish();
}

#[test]
fn criterion_04_gauss_bonnet() {
    let mut c = Criterion::new(4, "Gauss-Bonnet on the round sphere and the flat disk");
    let s2 = chart("builtin:round_sphere?dim=2&radius=1&z0=3");
    let r = verify_gauss_bonnet(&s2, 0.0, Metric::Euclidean, &spec()).unwrap();
    c.within("|int K - 4pi|", (r.lhs - 4.0 * PI).abs(), 1e-8);
    c.check(r.pass, format!("sphere report rel {:.1e}", r.rel_err));
    let disk = chart("builtin:flat_disk?radius=1&z0=1");
    let r = verify_gauss_bonnet(&disk, 0.0, Metric::Euclidean, &spec()).unwrap();
    let kg = r.term("kg_bar").expect("boundary term").value;
    c.within("|oint kg - 2pi|", (kg - 2.0 * PI).abs(), 1e-10);
    c.within("|int K|", r.lhs.abs(), 1e-10);
    c.check(r.pass, format!("disk report rel {:.1e}", r.rel_err));
    c.finish();
}

#[test]
fn criterion_05_chern_gauss_bonnet_closed() {
    let mut c = Criterion::new(5, "Chern-Gauss-Bonnet on the round 4-sphere");
    let s4 = chart("builtin:round_sphere?dim=4&radius=1&z0=3");
    let r = verify_gauss_bonnet(&s4, 0.0, Metric::Euclidean, &spec()).unwrap();
    let vol = 8.0 * PI * PI / 3.0;
    c.within("rel |int lambda^2 - 8pi^2/3|", (r.lhs - vol).abs() / vol, 1e-6);
    c.within("|W|^2 integral", r.term("W2_bar").unwrap().value.abs(), 1e-10);
    c.within("|E|^2 integral", r.term("E2_bar").unwrap().value.abs(), 1e-10);
    c.check(r.pass, format!("report rel {:.1e}", r.rel_err));
    c.elapsed_under(Duration::from_secs(30));
    c.finish();
}

#[test]
fn criterion_06_totally_geodesic_h5_hemisphere() {
    let mut c = Criterion::new(6, "totally geodesic H5 hemisphere has renormalized area 4pi^2/3");
    let hemi = chart(HEMISPHERE4);
    let expected = 4.0 * PI * PI / 3.0;
    let r = verify_cor2(&hemi, &Ladder::default(), &spec()).unwrap();
    c.within("rel |A_R - 4pi^2/3|", (r.lhs - expected).abs() / expected, 1e-4);
    c.within("rel |rhs - 4pi^2/3|", (r.rhs - expected).abs() / expected, 1e-4);
    for t in r.terms.iter().filter(|t| t.name != "4pi2_chi_over_3") {
        c.within(&t.name, t.value.abs(), 1e-8);
    }
    report_ok(&mut c, "hemisphere4", &r);
    c.finish();
}

#[test]
fn criterion_07_four_dimensional_renormalized_area() {
    let mut c = Criterion::new(7, "finite part on perturbed_profile4 equals the convergent-integral formula");
    let r = verify_thm3(&chart(PROFILE4), &Ladder::default(), &spec()).unwrap();
    c.within("rel", r.rel_err, 5e-4);
    let cauchy = r.checks.iter().filter(|k| k.name.starts_with("cauchy:")).count();
    c.check(cauchy == r.terms.len(), format!("{cauchy} convergence checks for {} integrals", r.terms.len()));
    report_ok(&mut c, "profile4", &r);
    // only orthogonal meeting: the order-2 precondition must reject it
    let weak = chart("builtin:perturbed_profile4?a=1&delta=0.2&p=2");
    c.check(verify_thm3(&weak, &Ladder::default(), &spec()).is_err(), "order-1 profile rejected");
    c.elapsed_under(Duration::from_secs(600));
    c.finish();
}

/// Bent cylinder over `S¹(1) × R²`: `|II̊|² = 2/3` along its ideal boundary.
fn bent_cylinder() -> Chart {
    Chart::from_exprs(
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
    )
    .unwrap()
}

#[test]
fn criterion_08_trace_free_expansion_and_laplacian_term() {
    let mut c = Criterion::new(8, "|B0|^2 has no odd r^3 term and the Laplacian term adds no constant");
    let profile = chart(PROFILE4);
    for tr in [[0.3, 0.7, 1.1], [1.2, 2.0, 4.0]] {
        let b = bform_expansion(&profile, &tr, BFORM_R0, BFORM_SAMPLES).unwrap();
        let scale = b.b2.abs().max(b.b4.abs()).max(1.0);
        c.within(&format!("profile4 {tr:?} |b3|/scale"), b.b3.abs() / scale, 1e-6);
        let oracle = boundary_trace_free_norm2(&profile, &tr).unwrap();
        c.within(&format!("profile4 {tr:?} |b2 - |II0|^2|"), (b.b2 - oracle).abs(), 1e-5);
    }
    let bent = bent_cylinder();
    for tr in [[0.7, 0.1, -0.2], [3.0, -0.5, 0.4]] {
        let b = bform_expansion(&bent, &tr, BFORM_R0, BFORM_SAMPLES).unwrap();
        let oracle = boundary_trace_free_norm2(&bent, &tr).unwrap();
        c.within(&format!("bent {tr:?} |II0|^2 vs 2/3"), (oracle - 2.0 / 3.0).abs(), 1e-12);
        c.within(&format!("bent {tr:?} |b2 - |II0|^2|"), (b.b2 - oracle).abs(), 1e-5);
        let scale = b.b2.abs().max(b.b4.abs()).max(1.0);
        c.within(&format!("bent {tr:?} |b3|/scale"), b.b3.abs() / scale, 1e-6);
    }
    let lap = laplacian_correction_check(&profile, &LAPLACIAN_LADDER, &spec()).unwrap();
    c.within("finite part rel diff", lap.finite_part_rel_diff, 1e-5);
    let scale = lap.corrected.max_abs_coefficient().max(1.0);
    c.within("corrected negative powers", lap.max_negative_power / scale, 1e-6);
    c.check(lap.corrected_cauchy.converges, "corrected ladder converges");
    let flux_scale = lap.flux.coefficient(renormgeo::renorm::BasisTerm::Power(-1)).unwrap_or(0.0).abs().max(1.0);
    c.within("flux constant", lap.flux_constant.abs() / flux_scale, 1e-5);
    c.check(lap.pass, "report pass");
    c.finish();
}

#[test]
fn criterion_09_boundary_s_integral_has_no_constant() {
    let mut c = Criterion::new(9, "the S-curvature boundary integral has no constant term");
    let mut profile_samples = Vec::new();
    for uri in [HEMISPHERE4, PROFILE4] {
        let r = boundary_s_constant_term(&chart(uri), &S_LADDER, &spec()).unwrap();
        c.within(&format!("{uri} |c0|/max|c|"), r.relative, 1e-4);
        if uri == PROFILE4 {
            profile_samples = r.fit.ladder.clone();
        }
    }
    let injected: Vec<(f64, f64)> = profile_samples.iter().map(|&(e, v)| (e, v + 0.3)).collect();
    let r = constant_term_check(&injected, &s_basis()).unwrap();
    c.check(!r.pass, "injected constant is flagged");
    c.within("injected |c0 - 0.3|/0.3", (r.constant - 0.3).abs() / 0.3, 0.05);
    c.finish();
}

/// Random interior points of a chart, kept away from its edges.
fn random_points(ch: &Chart, rng: &mut impl Rng, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            ch.domain
                .iter()
                .map(|&(lo, hi)| {
                    let m = 0.05 * (hi - lo);
                    rng.random_range(lo + m..hi - m)
                })
                .collect()
        })
        .collect()
}

/// Graph-like chart in H5 with no symmetry; the height is the first parameter.
fn generic_hypersurface() -> Chart {
    Chart::from_exprs(
        "generic4",
        &[
            "u2",
            "u3",
            "u4",
            "0.3*sin(u2 + 2*u3)*cos(u4) + 0.2*u1^2*u2 + 0.1*u2*u3*u1",
            "u1",
        ],
        vec![(0.3, 1.2), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        Symmetry::None,
        None,
        0,
        false,
        0,
    )
    .unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_10_conformal_invariance_properties() {
    let mut c = Criterion::new(10, "pointwise conformal invariance and Gauss equation properties");
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let surfaces = vec![
        chart(PERTURBED_H3[0]),
        chart(PERTURBED_H3[1]),
        chart(PROFILE4),
        chart("builtin:perturbed_profile4?a=1.5&delta=-0.3&p=3"),
        bent_cylinder(),
        generic_hypersurface(),
    ];
    let per_chart = 10_000usize.div_ceil(surfaces.len());
    let (mut chen_pts, mut chen_bad, mut weyl_bad, mut e2_bad, mut gauss_bad, mut four_pts) = (0, 0, 0, 0, 0, 0);
    let (mut w2_max, mut e2_max) = (0.0f64, 0.0f64);
    for ch in &surfaces {
        let n = ch.n() as i32;
        for p in random_points(ch, &mut rng, per_chart) {
            let f = extrinsic_frame(ch, &p).unwrap();
            let hyp = (f.h_hyp * f.h_hyp - f.r_hyp).powi(n) * f.area_density_hyp;
            let euc = (f.h_euc * f.h_euc - f.r_euc).powi(n) * f.area_density_euc;
            chen_pts += 1;
            chen_bad += usize::from(!close(hyp, euc, 1e-10));
            for m in [Metric::Hyperbolic, Metric::Euclidean] {
                let i = intrinsic_frame(ch, &p, m).unwrap();
                gauss_bad += usize::from(!close(i.lambda - f.r(m), m.ambient_curvature(), 1e-9));
            }
            if ch.dom_dim == 4 {
                four_pts += 1;
                let ih = intrinsic_frame(ch, &p, Metric::Hyperbolic).unwrap();
                let ie = intrinsic_frame(ch, &p, Metric::Euclidean).unwrap();
                weyl_bad += usize::from(!close(ih.w2 * f.area_density_hyp, ie.w2 * f.area_density_euc, 1e-9));
                e2_bad += usize::from(!close(ih.e2, e2_via_bform(&f).unwrap(), 1e-8));
                w2_max = w2_max.max(ie.w2);
                e2_max = e2_max.max(ih.e2);
            }
        }
    }
    c.check(chen_pts >= 10_000 && chen_bad == 0, format!("Chen density: {chen_bad} of {chen_pts} off"));
    c.check(weyl_bad == 0, format!("Weyl density: {weyl_bad} of {four_pts} off"));
    c.check(e2_bad == 0, format!("|E|^2 extrinsic vs intrinsic: {e2_bad} of {four_pts} off"));
    c.check(gauss_bad == 0, format!("Gauss equation: {gauss_bad} off"));
    c.check(w2_max > 1e-3 && e2_max > 1e-3, format!("nontrivial samples: max |W|^2 {w2_max:.2e}, max |E|^2 {e2_max:.2e}"));
    c.elapsed_under(Duration::from_secs(120));
    c.finish();
}

#[test]
fn criterion_11_truncated_area_identity() {
    let mut c = Criterion::new(11, "truncated area equals the bending/curvature combination at fixed eps");
    for uri in [PERTURBED_H3[0], PROFILE4] {
        for eps in [0.05, 0.1] {
            let r = verify_prop1(&chart(uri), eps, &spec()).unwrap();
            c.within(&format!("{uri} eps={eps} rel"), r.rel_err, 1e-7);
            report_ok(&mut c, uri, &r);
        }
    }
    // the area integral itself is independent of the identity's assembly
    let hemi = chart("builtin:geodesic_hemisphere?a=1");
    let area = integrate_interior(&hemi, Quantity::One, 0.1, Metric::Hyperbolic, &spec()).unwrap();
    c.within("hemisphere area at eps=0.1", relative_error(area, 2.0 * PI * 9.0), 1e-12);
    c.finish();
}
