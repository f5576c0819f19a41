//! Property tests for jets, the expression parser and the pointwise geometry.

use proptest::prelude::*;
use renormgeo::chart::{load_surface, Chart};
use renormgeo::expr::{parse_expr, Expr};
use renormgeo::extrinsic::{extrinsic_frame, extrinsic_frame_flipped};
use renormgeo::geometry::Metric;
use renormgeo::intrinsic::intrinsic_frame;
use renormgeo::jet::{coeff_count, Elementary, Jet};
use renormgeo::quadrature::{integrate_interior, QuadratureSpec, Quantity};

const ORDER: usize = 4;

fn coeffs(nvars: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, coeff_count(nvars, ORDER))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Exact truncated product of two polynomials given by Taylor coefficients at 0.
fn truncated_product(a: &Jet, b: &Jet) -> Vec<f64> {
    let idx = a.multi_indices();
    let mut out = vec![0.0; idx.len()];
    for (i, alpha) in idx.iter().enumerate() {
        for beta in &idx {
            if beta.iter().zip(alpha).all(|(x, y)| x <= y) {
                let gamma: Vec<usize> = alpha.iter().zip(beta).map(|(x, y)| x - y).collect();
                out[i] += a.coeff(beta) * b.coeff(&gamma);
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jet_product_is_truncated_polynomial_product(
        (nvars, a, b) in (1usize..=4).prop_flat_map(|n| (Just(n), coeffs(n), coeffs(n)))
    ) {
        let ja = Jet::from_coeffs(nvars, ORDER, &a).unwrap();
        let jb = Jet::from_coeffs(nvars, ORDER, &b).unwrap();
        let prod = ja * jb;
        for (got, want) in prod.coeffs().iter().zip(truncated_product(&ja, &jb)) {
            prop_assert!(close(*got, want, 1e-13), "{got} vs {want}");
        }
    }

    #[test]
    fn shifted_polynomial_matches_binomial_expansion(
        (nvars, p, x0) in (1usize..=4).prop_flat_map(|n| (Just(n), coeffs(n), prop::collection::vec(-1.0..1.0f64, n)))
    ) {
        // evaluate p(u) = Σ p_β u^β on variable jets seeded at x0
        let poly = Jet::from_coeffs(nvars, ORDER, &p).unwrap();
        let vars: Vec<Jet> = (0..nvars).map(|i| Jet::variable(i, x0[i], nvars, ORDER).unwrap()).collect();
        let mut total = Jet::zero(nvars, ORDER);
        for beta in poly.multi_indices() {
            let mut term = Jet::constant(poly.coeff(&beta), nvars, ORDER);
            for (v, &e) in vars.iter().zip(&beta) {
                for _ in 0..e {
                    term *= *v;
                }
            }
            total += term;
        }
        // Taylor coefficient at x0: Σ_{β ≥ α} p_β Π C(β_i, α_i) x0_i^{β_i − α_i}
        for alpha in total.multi_indices() {
            let mut want = 0.0;
            let mut scale = 0.0f64;
            for beta in poly.multi_indices() {
                if beta.iter().zip(&alpha).all(|(b, a)| b >= a) {
                    let f: f64 = (0..nvars)
                        .map(|i| binomial(beta[i], alpha[i]) * x0[i].powi((beta[i] - alpha[i]) as i32))
                        .product();
                    want += poly.coeff(&beta) * f;
                    scale = scale.max((poly.coeff(&beta) * f).abs());
                }
            }
            let got = total.coeff(&alpha);
            prop_assert!((got - want).abs() <= 1e-13 * scale.max(1.0), "{alpha:?}: {got} vs {want}");
        }
    }
}

const ELEMENTARY: [Elementary; 6] = [
    Elementary::Sin,
    Elementary::Cos,
    Elementary::Exp,
    Elementary::Log,
    Elementary::Sqrt,
    Elementary::Atan,
];

/// Jet of `f` at `y0` in one variable, composed with `inner` by Horner's rule on `inner − y0`.
fn compose_by_series(f: Elementary, inner: &Jet) -> Jet {
    let y0 = inner.value();
    let fy = Jet::variable(0, y0, 1, ORDER).unwrap().apply(f).unwrap();
    let shift = *inner - y0;
    let mut acc = Jet::constant(fy.coeff(&[ORDER]), inner.num_vars(), ORDER);
    for k in (0..ORDER).rev() {
        acc = acc * shift + fy.coeff(&[k]);
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chain_rule_matches_series_composition(
        fi in 0usize..6,
        gi in 0usize..6,
        x in prop::collection::vec(0.2..1.5f64, 2),
    ) {
        let (f, g) = (ELEMENTARY[fi], ELEMENTARY[gi]);
        let u: Vec<Jet> = (0..2).map(|i| Jet::variable(i, x[i], 2, ORDER).unwrap()).collect();
        // keep the inner value positive for log and sqrt
        let arg = u[0] * u[1] + 0.3 * u[0];
        let inner = arg.apply(g).unwrap();
        let inner = if matches!(f, Elementary::Log | Elementary::Sqrt) {
            inner * inner + 0.5
        } else {
            inner
        };
        let direct = inner.apply(f).unwrap();
        let series = compose_by_series(f, &inner);
        let scale = series.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        prop_assert!(direct.max_abs_diff(&series) <= 1e-12 * scale, "{f:?}∘{g:?}: {:e}", direct.max_abs_diff(&series));
    }
}

const CORPUS: &[&str] = &[
    "sin(u1)*cos(u2)",
    "(1 + 0.2*cos(u1)^4)*sin(u1)",
    "u1^2 + u2^2 - 2*u1*u2",
    "-u1^2",
    "exp(-u1)/(1 + u2^2)",
    "sqrt(1 - u1^2)",
    "log(2 + sin(u1 + u2))",
    "atan(u1/3) - atan(u2/5)",
    "2^3^2",
    "-2^2",
    "u1 - u2 - u3",
    "u1/u2/u3",
    "((u1))",
    "1.5e-3*u1 + 2E2",
    "pi*u1 + e",
    "cos(u2)*(1 - u1^2/6 + 0.3*u1^3/6)",
    "u4*u3 - u2*u1",
    "-(-u1)",
    "sin(cos(exp(u1)))",
    "1/(1 + u1)^2",
];

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0usize..4).prop_map(|i| format!("u{}", i + 1)),
        (0.0..10.0f64).prop_map(|c| format!("{c}")),
        (1u32..9).prop_map(|c| c.to_string()),
        Just("pi".to_string()),
    ]
}

fn source() -> impl Strategy<Value = String> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]))
                .prop_map(|(a, b, op)| format!("{a} {op} {b}")),
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]))
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("-{a}")),
            (inner, prop::sample::select(vec!["sin", "cos", "exp", "log", "sqrt", "atan"]))
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

fn round_trip(src: &str) -> (Expr, Expr) {
    let first = parse_expr(src).unwrap_or_else(|e| panic!("{src}: {e}"));
    let again = parse_expr(&first.to_string()).unwrap_or_else(|e| panic!("{first}: {e}"));
    (first, again)
}

#[test]
fn corpus_round_trips() {
    for src in CORPUS {
        let (a, b) = round_trip(src);
        assert_eq!(a, b, "{src}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn printed_expressions_reparse_identically(src in source()) {
        let (a, b) = round_trip(&src);
        prop_assert_eq!(a, b);
    }
}

fn plain(e: &Expr, x: &[f64]) -> f64 {
    e.eval(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jet_derivatives_match_central_differences(
        i in 0usize..CORPUS.len(),
        x in prop::collection::vec(0.3..0.9f64, 4),
    ) {
        let e = parse_expr(CORPUS[i]).unwrap();
        let n = 4;
        let u: Vec<Jet> = (0..n).map(|k| Jet::variable(k, x[k], n, ORDER).unwrap()).collect();
        let jet = e.eval_jet(&u).unwrap();
        let h = 1e-5;
        let shifted = |k: usize, s: f64| {
            let mut y = x.clone();
            y[k] += s;
            y
        };
        for k in 0..n {
            let mut a = vec![0; n];
            a[k] = 1;
            let fd = (plain(&e, &shifted(k, h)) - plain(&e, &shifted(k, -h))) / (2.0 * h);
            prop_assert!((jet.partial(&a) - fd).abs() <= 1e-6, "{}: d{k} {} vs {fd}", CORPUS[i], jet.partial(&a));
        }
        // second derivatives: central differences of the jet gradient at shifted points
        for k in 0..n {
            let up: Vec<Jet> = (0..n).map(|m| Jet::variable(m, shifted(k, h)[m], n, 1).unwrap()).collect();
            let dn: Vec<Jet> = (0..n).map(|m| Jet::variable(m, shifted(k, -h)[m], n, 1).unwrap()).collect();
            let gu = e.eval_jet(&up).unwrap().gradient();
            let gd = e.eval_jet(&dn).unwrap().gradient();
            for j in 0..n {
                let mut a = vec![0; n];
                a[k] += 1;
                a[j] += 1;
                let fd = (gu[j] - gd[j]) / (2.0 * h);
                prop_assert!((jet.partial(&a) - fd).abs() <= 1e-6, "{}: d{k}d{j} {} vs {fd}", CORPUS[i], jet.partial(&a));
            }
        }
    }
}

fn catalog() -> Vec<Chart> {
    [
        "builtin:perturbed_hemisphere?a=1&delta=0.1&k=3",
        "builtin:perturbed_profile4?a=1&delta=0.2",
        "builtin:round_sphere?dim=4&radius=1&z0=3",
    ]
    .iter()
    .map(|u| load_surface(u).unwrap())
    .collect()
}

fn interior_point(ch: &Chart, t: &[f64]) -> Vec<f64> {
    ch.domain
        .iter()
        .zip(t)
        .map(|(&(lo, hi), &s)| lo + (0.05 + 0.9 * s) * (hi - lo))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn frame_relations_hold_at_random_points(which in 0usize..3, t in prop::collection::vec(0.0..1.0f64, 4)) {
        let ch = &catalog()[which];
        let p = interior_point(ch, &t);
        let f = extrinsic_frame(ch, &p).unwrap();
        let d = ch.dom_dim as f64;
        let n = ch.n() as f64;
        for m in [Metric::Euclidean, Metric::Hyperbolic] {
            let s = f.shape(m);
            let trace: f64 = (0..s.len()).map(|i| s[i][i]).sum();
            prop_assert!(close(trace, 2.0 * n * f.h(m), 1e-12));
            let b2: f64 = f.kappas_hyp.iter().map(|k| k * k).sum();
            if m == Metric::Hyperbolic {
                let r = (d * d * f.h_hyp * f.h_hyp - b2) / (d * (d - 1.0));
                prop_assert!(close(r, f.r_hyp, 1e-10));
            }
        }
        prop_assert!(close(f.area_density_hyp, f.area_density_euc / f.z.powi(ch.dom_dim as i32), 1e-12));

        let flipped = extrinsic_frame_flipped(ch, &p).unwrap();
        prop_assert!(close(flipped.h_hyp, -f.h_hyp, 1e-12));
        prop_assert!(close(flipped.h_euc, -f.h_euc, 1e-12));
        prop_assert!(close(flipped.b0sq_hyp, f.b0sq_hyp, 1e-12));
        prop_assert!(close(flipped.r_hyp, f.r_hyp, 1e-12));

        for m in [Metric::Euclidean, Metric::Hyperbolic] {
            let i = intrinsic_frame(ch, &p, m).unwrap();
            prop_assert!(i.riemann.symmetry_residual() <= 1e-9);
            if let Some(s2) = i.sigma2p {
                prop_assert!(close(s2, 3.0 * i.lambda * i.lambda - i.e2 / 4.0, 1e-9));
            }
        }
    }
}

#[test]
fn measure_bookkeeping_and_global_invariant() {
    let spec = QuadratureSpec::default();
    for ch in catalog() {
        let eps = if ch.face == renormgeo::chart::Face::Closed { 0.0 } else { 0.1 };
        let d = ch.dom_dim as i32;
        // ∫ z^d dA_hyp = ∫ 1 dA_euc
        let hyp = integrate_interior(&ch, Quantity::HeightPower(d), eps, Metric::Hyperbolic, &spec).unwrap();
        let euc = integrate_interior(&ch, Quantity::One, eps, Metric::Euclidean, &spec).unwrap();
        assert!(close(hyp, euc, 1e-10), "{}: {hyp} vs {euc}", ch.name);
        let hyp = integrate_interior(&ch, Quantity::ChenN, eps, Metric::Hyperbolic, &spec).unwrap();
        let euc = integrate_interior(&ch, Quantity::ChenN, eps, Metric::Euclidean, &spec).unwrap();
        assert!(close(hyp, euc, 1e-8), "{}: {hyp} vs {euc}", ch.name);
    }
}
