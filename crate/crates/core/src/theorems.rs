//! Two-sided checks of the area, renormalized-area and Gauss–Bonnet identities.
//!
//! Every report evaluates each side independently: finite parts come from ladder fits,
//! the other side from convergent quadratures assembled term by term.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::chart::{Chart, Face};
use crate::error::{GeomError, Result};
use crate::geometry::Metric;
use crate::quadrature::{integrate_boundary, integrate_many, BoundaryQuantity, Quantity, QuadratureSpec};
use crate::renorm::{cauchy_check, default_basis, fit_expansion, ladder_values, ExpansionFit, Ladder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TheoremId {
    #[serde(rename = "GB")]
    Gb,
    #[serde(rename = "CGB")]
    Cgb,
    #[serde(rename = "PROP1")]
    Prop1,
    #[serde(rename = "THM2")]
    Thm2,
    #[serde(rename = "COR1")]
    Cor1,
    #[serde(rename = "THM3")]
    Thm3,
    #[serde(rename = "COR2")]
    Cor2,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::Gb,
        TheoremId::Cgb,
        TheoremId::Prop1,
        TheoremId::Thm2,
        TheoremId::Cor1,
        TheoremId::Thm3,
        TheoremId::Cor2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Gb => "GB",
            TheoremId::Cgb => "CGB",
            TheoremId::Prop1 => "PROP1",
            TheoremId::Thm2 => "THM2",
            TheoremId::Cor1 => "COR1",
            TheoremId::Thm3 => "THM3",
            TheoremId::Cor2 => "COR2",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            TheoremId::Gb | TheoremId::Cgb => 1e-6,
            TheoremId::Prop1 => 1e-7,
            TheoremId::Thm2 | TheoremId::Cor1 => 1e-4,
            TheoremId::Thm3 | TheoremId::Cor2 => 5e-4,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GeomError::Spec(format!("unknown theorem `{s}`")))
    }
}

/// One signed contribution `coefficient × value` to a right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub coefficient: f64,
    pub value: f64,
}

impl Term {
    pub fn contribution(&self) -> f64 {
        self.coefficient * self.value
    }
}

/// A side condition that must also hold for the report to pass.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value.abs() <= tolerance,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            tolerance: 0.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub theorem_id: TheoremId,
    pub chart: String,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(serialize_with = "terms_as_map")]
    pub terms: Vec<Term>,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub fit: Option<ExpansionFit>,
}

fn terms_as_map<S: Serializer>(terms: &[Term], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        coefficient: f64,
        value: f64,
        contribution: f64,
    }
    let mut map = s.serialize_map(Some(terms.len()))?;
    for t in terms {
        map.serialize_entry(
            &t.name,
            &Entry {
                coefficient: t.coefficient,
                value: t.value,
                contribution: t.contribution(),
            },
        )?;
    }
    map.end()
}

/// `Σ coefficient × value` in listed order; the reported rhs is exactly this sum.
pub fn assemble(terms: &[Term]) -> f64 {
    terms.iter().map(Term::contribution).sum()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

impl VerificationReport {
    fn new(id: TheoremId, chart: &Chart, lhs: f64, terms: Vec<Term>, checks: Vec<Check>, fit: Option<ExpansionFit>) -> Self {
        let rhs = assemble(&terms);
        let abs_err = (lhs - rhs).abs();
        let rel_err = relative_error(lhs, rhs);
        let tolerance = id.tolerance();
        let pass = rel_err <= tolerance && checks.iter().all(|c| c.pass);
        VerificationReport {
            theorem_id: id,
            chart: chart.name.clone(),
            lhs,
            rhs,
            terms,
            abs_err,
            rel_err,
            tolerance,
            checks,
            pass,
            fit,
        }
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }
}

fn term(name: &str, coefficient: f64, value: f64) -> Term {
    Term {
        name: name.into(),
        coefficient,
        value,
    }
}

fn tag(q: Quantity, m: Metric) -> String {
    match m {
        Metric::Hyperbolic => q.name(),
        Metric::Euclidean => format!("{}_bar", q.name()),
    }
}

/// Integrals of several pairs at one truncation, keyed like the report terms.
struct Integrals {
    pairs: Vec<(Quantity, Metric)>,
    values: Vec<f64>,
}

impl Integrals {
    fn compute(chart: &Chart, pairs: &[(Quantity, Metric)], eps: f64, spec: &QuadratureSpec) -> Result<Self> {
        Ok(Integrals {
            pairs: pairs.to_vec(),
            values: integrate_many(chart, pairs, eps, spec)?,
        })
    }

    fn get(&self, q: Quantity, m: Metric) -> f64 {
        let i = self.pairs.iter().position(|&p| p == (q, m)).expect("integral requested");
        self.values[i]
    }

    fn term(&self, q: Quantity, m: Metric, coefficient: f64) -> Term {
        term(&tag(q, m), coefficient, self.get(q, m))
    }
}

/// Boundary integral over `∂M_ε`, or 0 for closed charts.
fn boundary_integral(chart: &Chart, q: BoundaryQuantity, eps: f64, m: Metric, spec: &QuadratureSpec) -> Result<f64> {
    match chart.face {
        Face::Closed => Ok(0.0),
        _ => integrate_boundary(chart, q, eps, m, spec),
    }
}

fn require_dim(chart: &Chart, dims: &[usize]) -> Result<()> {
    if dims.contains(&chart.dom_dim) {
        Ok(())
    } else {
        Err(GeomError::Dimension(format!(
            "{} has dimension {}, expected one of {dims:?}",
            chart.name, chart.dom_dim
        )))
    }
}

fn require_renormalizable(chart: &Chart, dim: usize, order: u8) -> Result<()> {
    require_dim(chart, &[dim])?;
    if !matches!(chart.face, Face::Ideal { .. }) {
        return Err(GeomError::Precondition(format!("{} does not reach z = 0", chart.name)));
    }
    if !chart.meets_boundary_orthogonally {
        return Err(GeomError::Precondition(format!("{} does not meet z = 0 orthogonally", chart.name)));
    }
    if chart.asym_minimal_order < order {
        return Err(GeomError::Precondition(format!(
            "{} is asymptotically minimal of order {}, need {order}",
            chart.name, chart.asym_minimal_order
        )));
    }
    Ok(())
}

/// Ladder fit of the truncated hyperbolic area.
pub fn renormalized_area(chart: &Chart, ladder: &Ladder, spec: &QuadratureSpec) -> Result<ExpansionFit> {
    crate::renorm::finite_part(chart, Quantity::One, ladder, &default_basis(chart.n()), Metric::Hyperbolic, spec)
}

const H: Metric = Metric::Hyperbolic;
const E: Metric = Metric::Euclidean;

/// Area of `M_ε` against the bending/curvature combination, with the Euler-characteristic
/// variant (scalar-curvature integrals rewritten by Gauss–Bonnet) as a side check.
pub fn verify_prop1(chart: &Chart, eps: f64, spec: &QuadratureSpec) -> Result<VerificationReport> {
    require_dim(chart, &[2, 4])?;
    if !(eps > 0.0) {
        return Err(GeomError::Precondition("PROP1 needs eps > 0".into()));
    }
    let chi = chart.euler_char as f64;
    let ((lhs, terms), chi_terms) = if chart.dom_dim == 2 {
        let ints = Integrals::compute(
            chart,
            &[(Quantity::One, H), (Quantity::H2, H), (Quantity::H2, E), (Quantity::Lambda, E), (Quantity::Lambda, H)],
            eps,
            spec,
        )?;
        let kg = boundary_integral(chart, BoundaryQuantity::Kg, eps, H, spec)?;
        let kg_bar = boundary_integral(chart, BoundaryQuantity::Kg, eps, E, spec)?;
        let lhs = ints.get(Quantity::One, H);
        let bend = [ints.term(Quantity::H2, H, 1.0), ints.term(Quantity::H2, E, -1.0)];
        let mut terms = bend.to_vec();
        terms.push(ints.term(Quantity::Lambda, E, 1.0));
        terms.push(ints.term(Quantity::Lambda, H, -1.0));
        let mut chi_terms = bend.to_vec();
        chi_terms.extend([
            term("2pi_chi_bar", 2.0 * PI, chi),
            term("kg_bar", -1.0, kg_bar),
            term("2pi_chi", -2.0 * PI, chi),
            term("kg", 1.0, kg),
        ]);
        ((lhs, terms), chi_terms)
    } else {
        let ints = Integrals::compute(
            chart,
            &[
                (Quantity::One, H),
                (Quantity::H4, E),
                (Quantity::H4, H),
                (Quantity::H2R, E),
                (Quantity::H2R, H),
                (Quantity::Lambda2, E),
                (Quantity::Lambda, H),
                (Quantity::Lambda2, H),
                (Quantity::W2, E),
                (Quantity::W2, H),
                (Quantity::E2, E),
                (Quantity::E2, H),
            ],
            eps,
            spec,
        )?;
        let s = boundary_integral(chart, BoundaryQuantity::S, eps, H, spec)?;
        let s_bar = boundary_integral(chart, BoundaryQuantity::S, eps, E, spec)?;
        let lhs = ints.get(Quantity::One, H);
        let common = [
            ints.term(Quantity::H4, E, 1.0),
            ints.term(Quantity::H4, H, -1.0),
            ints.term(Quantity::H2R, E, -2.0),
            ints.term(Quantity::H2R, H, 2.0),
        ];
        let mut terms = common.to_vec();
        terms.push(ints.term(Quantity::Lambda2, E, 1.0));
        terms.push(ints.term(Quantity::Lambda, H, -2.0));
        terms.push(ints.term(Quantity::Lambda2, H, -1.0));
        let c = 4.0 * PI * PI / 3.0;
        let mut chi_terms = common.to_vec();
        chi_terms.push(ints.term(Quantity::Lambda, H, -2.0));
        chi_terms.extend([
            term("4pi2_chi_over_3_bar", c, chi),
            ints.term(Quantity::W2, E, -1.0 / 24.0),
            ints.term(Quantity::E2, E, 1.0 / 12.0),
            term("S_bar", -1.0 / 3.0, s_bar),
            term("4pi2_chi_over_3", -c, chi),
            ints.term(Quantity::W2, H, 1.0 / 24.0),
            ints.term(Quantity::E2, H, -1.0 / 12.0),
            term("S", 1.0 / 3.0, s),
        ]);
        ((lhs, terms), chi_terms)
    };
    let rhs = assemble(&terms);
    let rhs_chi = assemble(&chi_terms);
    let checks = vec![Check::at_most(
        "rhs_with_euler_characteristic_rel_diff",
        relative_error(rhs, rhs_chi),
        TheoremId::Prop1.tolerance(),
    )];
    Ok(VerificationReport::new(TheoremId::Prop1, chart, lhs, terms, checks, None))
}

fn thm2_terms(chart: &Chart, spec: &QuadratureSpec) -> Result<Vec<Term>> {
    let ints = Integrals::compute(chart, &[(Quantity::H2, H), (Quantity::H2, E)], 0.0, spec)?;
    Ok(vec![ints.term(Quantity::H2, H, 1.0), ints.term(Quantity::H2, E, -1.0)])
}

fn cor1_terms(chart: &Chart, spec: &QuadratureSpec) -> Result<Vec<Term>> {
    let ints = Integrals::compute(chart, &[(Quantity::B0sq, H), (Quantity::H2, H)], 0.0, spec)?;
    Ok(vec![
        term("2pi_chi", -2.0 * PI, chart.euler_char as f64),
        ints.term(Quantity::B0sq, H, -0.5),
        ints.term(Quantity::H2, H, 1.0),
    ])
}

/// Renormalized area of a surface in H³ against the difference of bendings.
pub fn verify_thm2(chart: &Chart, ladder: &Ladder, spec: &QuadratureSpec) -> Result<VerificationReport> {
    require_renormalizable(chart, 2, 1)?;
    let fit = renormalized_area(chart, ladder, spec)?;
    let terms = thm2_terms(chart, spec)?;
    Ok(VerificationReport::new(TheoremId::Thm2, chart, fit.finite_part, terms, Vec::new(), Some(fit)))
}

/// Renormalized area of a surface in H³ against `−2πχ − ½∫|B̊|² + ∫H²`.
pub fn verify_cor1(chart: &Chart, ladder: &Ladder, spec: &QuadratureSpec) -> Result<VerificationReport> {
    require_renormalizable(chart, 2, 1)?;
    let fit = renormalized_area(chart, ladder, spec)?;
    let terms = cor1_terms(chart, spec)?;
    let other = assemble(&thm2_terms(chart, spec)?);
    let checks = vec![Check::at_most("thm2_rhs_rel_diff", relative_error(assemble(&terms), other), 1e-6)];
    Ok(VerificationReport::new(TheoremId::Cor1, chart, fit.finite_part, terms, checks, Some(fit)))
}

const THM3_PAIRS: [(Quantity, Metric); 7] = [
    (Quantity::H4, H),
    (Quantity::H4, E),
    (Quantity::H2Lambda, H),
    (Quantity::H2Lambda, E),
    (Quantity::E2, H),
    (Quantity::E2, E),
    (Quantity::B0sqPlusLaplacian, H),
];
const THM3_COEFFS: [f64; 7] = [1.0, -1.0, -2.0, 2.0, 1.0 / 12.0, -1.0 / 12.0, -1.0 / 12.0];

const COR2_PAIRS: [(Quantity, Metric); 6] = [
    (Quantity::B0sq4, H),
    (Quantity::W2, H),
    (Quantity::E2, H),
    (Quantity::H4, H),
    (Quantity::H2Lambda, H),
    (Quantity::B0sqPlusLaplacian, H),
];
const COR2_COEFFS: [f64; 6] = [-1.0 / 144.0, -1.0 / 24.0, 1.0 / 12.0, 1.0, -2.0, -1.0 / 12.0];

fn thm3_terms(chart: &Chart, spec: &QuadratureSpec) -> Result<Vec<Term>> {
    let ints = Integrals::compute(chart, &THM3_PAIRS, 0.0, spec)?;
    Ok(THM3_PAIRS
        .iter()
        .zip(THM3_COEFFS)
        .map(|(&(q, m), c)| ints.term(q, m, c))
        .collect())
}

fn cor2_terms(chart: &Chart, spec: &QuadratureSpec) -> Result<Vec<Term>> {
    let ints = Integrals::compute(chart, &COR2_PAIRS, 0.0, spec)?;
    let mut terms = vec![term("4pi2_chi_over_3", 4.0 * PI * PI / 3.0, chart.euler_char as f64)];
    terms.extend(COR2_PAIRS.iter().zip(COR2_COEFFS).map(|(&(q, m), c)| ints.term(q, m, c)));
    Ok(terms)
}

/// Renormalized area of a hypersurface in H⁵ against the bending/Einstein/Laplacian terms.
/// Every term integral is also checked to settle along the ladder.
pub fn verify_thm3(chart: &Chart, ladder: &Ladder, spec: &QuadratureSpec) -> Result<VerificationReport> {
    require_renormalizable(chart, 4, 2)?;
    let eps = ladder.eps();
    let mut pairs = vec![(Quantity::One, H)];
    pairs.extend(THM3_PAIRS);
    let values = ladder_values(chart, &pairs, &eps, spec)?;
    let samples: Vec<(f64, f64)> = eps.iter().copied().zip(values[0].iter().copied()).collect();
    let fit = fit_expansion(&samples, &default_basis(2))?;
    let checks = THM3_PAIRS
        .iter()
        .zip(&values[1..])
        .map(|(&(q, m), v)| Check::holds(format!("cauchy:{}", tag(q, m)), cauchy_check(v).converges))
        .collect();
    let terms = thm3_terms(chart, spec)?;
    Ok(VerificationReport::new(TheoremId::Thm3, chart, fit.finite_part, terms, checks, Some(fit)))
}

/// Renormalized area of a hypersurface in H⁵ against the Gauss–Bonnet-type decomposition.
pub fn verify_cor2(chart: &Chart, ladder: &Ladder, spec: &QuadratureSpec) -> Result<VerificationReport> {
    require_renormalizable(chart, 4, 2)?;
    let fit = renormalized_area(chart, ladder, spec)?;
    let terms = cor2_terms(chart, spec)?;
    let other = assemble(&thm3_terms(chart, spec)?);
    let checks = vec![Check::at_most("thm3_rhs_rel_diff", relative_error(assemble(&terms), other), 1e-5)];
    Ok(VerificationReport::new(TheoremId::Cor2, chart, fit.finite_part, terms, checks, Some(fit)))
}

/// `∫K dA = 2πχ − ∮κ_g ds` for surfaces, or the four-dimensional form with `S` for 4-manifolds.
/// `eps` only matters for charts reaching `z = 0`.
pub fn verify_gauss_bonnet(chart: &Chart, eps: f64, metric: Metric, spec: &QuadratureSpec) -> Result<VerificationReport> {
    require_dim(chart, &[2, 4])?;
    if matches!(chart.face, Face::Ideal { .. }) && !(eps > 0.0) {
        return Err(GeomError::Precondition("charts reaching z = 0 need eps > 0".into()));
    }
    let chi = chart.euler_char as f64;
    let m = metric;
    if chart.dom_dim == 2 {
        let ints = Integrals::compute(chart, &[(Quantity::Lambda, m)], eps, spec)?;
        let kg = boundary_integral(chart, BoundaryQuantity::Kg, eps, m, spec)?;
        let terms = vec![term("2pi_chi", 2.0 * PI, chi), term(&tag_b("kg", m), -1.0, kg)];
        Ok(VerificationReport::new(TheoremId::Gb, chart, ints.get(Quantity::Lambda, m), terms, Vec::new(), None))
    } else {
        let ints = Integrals::compute(chart, &[(Quantity::Lambda2, m), (Quantity::W2, m), (Quantity::E2, m)], eps, spec)?;
        let s = boundary_integral(chart, BoundaryQuantity::S, eps, m, spec)?;
        let terms = vec![
            term("4pi2_chi_over_3", 4.0 * PI * PI / 3.0, chi),
            ints.term(Quantity::W2, m, -1.0 / 24.0),
            ints.term(Quantity::E2, m, 1.0 / 12.0),
            term(&tag_b("S", m), -1.0 / 3.0, s),
        ];
        Ok(VerificationReport::new(TheoremId::Cgb, chart, ints.get(Quantity::Lambda2, m), terms, Vec::new(), None))
    }
}

fn tag_b(name: &str, m: Metric) -> String {
    match m {
        Metric::Hyperbolic => name.to_string(),
        Metric::Euclidean => format!("{name}_bar"),
    }
}

/// Runs the theorem's own verifier with ladder/ε defaults where the theorem needs them.
pub fn verify(id: TheoremId, chart: &Chart, eps: f64, metric: Metric, ladder: &Ladder, spec: &QuadratureSpec) -> Result<VerificationReport> {
    match id {
        TheoremId::Gb | TheoremId::Cgb => {
            let expected = if id == TheoremId::Gb { 2 } else { 4 };
            if chart.dom_dim != expected {
                return Err(GeomError::Dimension(format!("{id} needs a {expected}-dimensional chart")));
            }
            verify_gauss_bonnet(chart, eps, metric, spec)
        }
        TheoremId::Prop1 => verify_prop1(chart, eps, spec),
        TheoremId::Thm2 => verify_thm2(chart, ladder, spec),
        TheoremId::Cor1 => verify_cor1(chart, ladder, spec),
        TheoremId::Thm3 => verify_thm3(chart, ladder, spec),
        TheoremId::Cor2 => verify_cor2(chart, ladder, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Builtin, Chart};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn ids_round_trip() {
        for id in TheoremId::ALL {
            assert_eq!(id.name().to_lowercase().parse::<TheoremId>().unwrap(), id);
        }
        assert!("thm9".parse::<TheoremId>().is_err());
    }

    #[test]
    fn rhs_is_the_sum_of_terms() {
        let c = Chart::builtin(Builtin::GeodesicHemisphere { a: 1.0 }).unwrap();
        let r = verify_prop1(&c, 0.1, &spec()).unwrap();
        assert_eq!(r.rhs, r.terms.iter().map(Term::contribution).sum::<f64>());
        assert!((r.lhs - 2.0 * PI * 9.0).abs() < 1e-9);
        assert!(r.pass, "{r:?}");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["theorem_id"], "PROP1");
        assert!(json["terms"]["H2_bar"]["contribution"].is_number());
    }

    #[test]
    fn totally_geodesic_thm2() {
        let c = Chart::builtin(Builtin::GeodesicHemisphere { a: 2.0 }).unwrap();
        let r = verify_thm2(&c, &Ladder::default(), &spec()).unwrap();
        assert!((r.lhs + 2.0 * PI).abs() < 1e-6);
        assert!((r.rhs + 2.0 * PI).abs() < 1e-6);
        assert!(r.pass);
    }

    #[test]
    fn preconditions() {
        let weak = Chart::builtin(Builtin::PerturbedProfile4 { a: 1.0, delta: 0.2, p: 2 }).unwrap();
        assert!(matches!(
            verify_thm3(&weak, &Ladder::default(), &spec()),
            Err(GeomError::Precondition(_))
        ));
        let s2 = Chart::builtin(Builtin::RoundSphere { dim: 2, radius: 1.0, z0: 3.0 }).unwrap();
        assert!(matches!(verify_thm2(&s2, &Ladder::default(), &spec()), Err(GeomError::Precondition(_))));
        assert!(verify(TheoremId::Cgb, &s2, 0.1, Metric::Euclidean, &Ladder::default(), &spec()).is_err());
    }

    #[test]
    fn closed_sphere_prop1() {
        let c = Chart::builtin(Builtin::RoundSphere { dim: 2, radius: 1.0, z0: 3.0 }).unwrap();
        let r = verify_prop1(&c, 0.1, &spec()).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
