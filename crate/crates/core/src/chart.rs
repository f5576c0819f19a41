//! Immersion charts of hypersurfaces in the upper half-spaces of R³ and R⁵.
//!
//! Parameter axis 0 is always the *height axis*: the height `z` of the
//! immersion depends on `u1` alone and is monotone along it, so truncating at
//! `z ≥ ε` restricts a single parameter interval.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::{parse_expr, Expr};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    None,
    /// Profile curve `(ρ(u1), z(u1))` swept by rotations of the x-coordinates.
    Revolution,
}

/// Where the chart's boundary sits along the height axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Face {
    /// Closed manifold, no boundary.
    Closed,
    /// Boundary at the ideal boundary `z = 0`, reached at `u1 = at`.
    Ideal { at: f64 },
    /// Ordinary boundary at `u1 = at` (not at infinity).
    Finite { at: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    GeodesicHemisphere { a: f64 },
    PerturbedHemisphere { a: f64, delta: f64, k: u32 },
    GeodesicHemisphere4 { a: f64 },
    /// Profile `ρ = a sinθ (1 + δ cos^p θ)`, `z = a cosθ`, parametrized by the elevation `π/2 − θ`.
    PerturbedProfile4 { a: f64, delta: f64, p: u32 },
    RoundSphere { dim: usize, radius: f64, z0: f64 },
    FlatDisk { radius: f64, z0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartMap {
    Builtin(Builtin),
    /// One expression per ambient coordinate, or `[ρ, z]` for revolution charts.
    Expr(Vec<Expr>),
}

/// Builtin families as `(name, parameter documentation)`.
pub const CATALOG: &[(&str, &str)] = &[
    (
        "geodesic_hemisphere",
        "a>0 (radius, default 1). Totally geodesic hemisphere in H3, chi = 1.",
    ),
    (
        "perturbed_hemisphere",
        "a>0 (default 1), delta (default 0.05), k>=1 (default 2). Radial perturbation \
         a sin(t)(1 + delta sin^k(t) cos^2(t) cos(k phi)) meeting z=0 orthogonally; non-minimal, chi = 1.",
    ),
    (
        "geodesic_hemisphere4",
        "a>0 (default 1). Totally geodesic 4-hemisphere in H5 (revolution), chi = 1.",
    ),
    (
        "perturbed_profile4",
        "a>0 (default 1), delta (default 0.2), p (default 4). Revolution hypersurface in H5 with profile \
         rho = a sin(t)(1 + delta cos^p(t)), z = a cos(t); p>=3 gives H = O(z^2), p=2 only orthogonal, p=1 oblique. \
         Even p keeps the profile even in z, so the reflected double across z=0 is smooth.",
    ),
    (
        "round_sphere",
        "dim in {2,4} (default 2), radius (default 1), z0 (default 3). Closed round sphere at height z0, chi = 2.",
    ),
    (
        "flat_disk",
        "radius (default 1), z0 (default 1). Planar disk in the horizontal plane z = z0, chi = 1.",
    ),
];

/// A parametrized immersion together with its topology and asymptotics metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub name: String,
    pub dom_dim: usize,
    pub ambient_dim: usize,
    /// Parameter box, one `(lo, hi)` per parameter axis (angles included for revolution charts).
    pub domain: Vec<(f64, f64)>,
    pub map: ChartMap,
    pub symmetry: Symmetry,
    pub euler_char: i32,
    pub meets_boundary_orthogonally: bool,
    pub asym_minimal_order: u8,
    pub face: Face,
    /// Sign applied to the cofactor normal (see [`crate::geometry`]).
    pub orientation: f64,
}

fn sphere_angle_domain(dom_dim: usize) -> Vec<(f64, f64)> {
    match dom_dim {
        2 => vec![(0.0, 2.0 * PI)],
        4 => vec![(0.0, PI), (0.0, PI), (0.0, 2.0 * PI)],
        _ => unreachable!(),
    }
}

impl Chart {
    pub fn builtin(b: Builtin) -> Result<Chart> {
        let mut chart = match b {
            Builtin::GeodesicHemisphere { a } => {
                positive("a", a)?;
                Chart {
                    name: format!("geodesic_hemisphere(a={a})"),
                    dom_dim: 2,
                    ambient_dim: 3,
                    domain: vec![(0.0, FRAC_PI_2), (0.0, 2.0 * PI)],
                    map: ChartMap::Builtin(b),
                    symmetry: Symmetry::Revolution,
                    euler_char: 1,
                    meets_boundary_orthogonally: true,
                    asym_minimal_order: 2,
                    face: Face::Ideal { at: 0.0 },
                    orientation: 1.0,
                }
            }
            Builtin::PerturbedHemisphere { a, delta, k } => {
                positive("a", a)?;
                if k == 0 {
                    return Err(GeomError::Spec("perturbed_hemisphere needs k >= 1".into()));
                }
                if delta.abs() >= 0.5 {
                    return Err(GeomError::Spec("perturbed_hemisphere needs |delta| < 0.5".into()));
                }
                Chart {
                    name: format!("perturbed_hemisphere(a={a},delta={delta},k={k})"),
                    dom_dim: 2,
                    ambient_dim: 3,
                    domain: vec![(0.0, FRAC_PI_2), (0.0, 2.0 * PI)],
                    map: ChartMap::Builtin(b),
                    symmetry: Symmetry::None,
                    euler_char: 1,
                    meets_boundary_orthogonally: true,
                    asym_minimal_order: 1,
                    face: Face::Ideal { at: 0.0 },
                    orientation: 1.0,
                }
            }
            Builtin::GeodesicHemisphere4 { a } => {
                positive("a", a)?;
                let mut domain = vec![(0.0, FRAC_PI_2)];
                domain.extend(sphere_angle_domain(4));
                Chart {
                    name: format!("geodesic_hemisphere4(a={a})"),
                    dom_dim: 4,
                    ambient_dim: 5,
                    domain,
                    map: ChartMap::Builtin(b),
                    symmetry: Symmetry::Revolution,
                    euler_char: 1,
                    meets_boundary_orthogonally: true,
                    asym_minimal_order: 2,
                    face: Face::Ideal { at: 0.0 },
                    orientation: 1.0,
                }
            }
            Builtin::PerturbedProfile4 { a, delta, p } => {
                positive("a", a)?;
                if delta.abs() >= 0.5 {
                    return Err(GeomError::Spec("perturbed_profile4 needs |delta| < 0.5".into()));
                }
                if p == 0 {
                    return Err(GeomError::Spec("perturbed_profile4 needs p >= 1".into()));
                }
                let mut domain = vec![(0.0, FRAC_PI_2)];
                domain.extend(sphere_angle_domain(4));
                Chart {
                    name: format!("perturbed_profile4(a={a},delta={delta},p={p})"),
                    dom_dim: 4,
                    ambient_dim: 5,
                    domain,
                    map: ChartMap::Builtin(b),
                    symmetry: Symmetry::Revolution,
                    euler_char: 1,
                    meets_boundary_orthogonally: p >= 2,
                    asym_minimal_order: match p {
                        1 => 0,
                        2 => 1,
                        _ => 2,
                    },
                    face: Face::Ideal { at: 0.0 },
                    orientation: 1.0,
                }
            }
            Builtin::RoundSphere { dim, radius, z0 } => {
                positive("radius", radius)?;
                if z0 <= radius {
                    return Err(GeomError::Spec("round_sphere must lie in z > 0 (z0 > radius)".into()));
                }
                if dim != 2 && dim != 4 {
                    return Err(GeomError::Spec("round_sphere dim must be 2 or 4".into()));
                }
                let mut domain = vec![(0.0, PI)];
                domain.extend(sphere_angle_domain(dim));
                Chart {
                    name: format!("round_sphere(dim={dim},radius={radius},z0={z0})"),
                    dom_dim: dim,
                    ambient_dim: dim + 1,
                    domain,
                    map: ChartMap::Builtin(b),
                    symmetry: if dim == 4 { Symmetry::Revolution } else { Symmetry::None },
                    euler_char: 2,
                    meets_boundary_orthogonally: false,
                    asym_minimal_order: 0,
                    face: Face::Closed,
                    orientation: 1.0,
                }
            }
            Builtin::FlatDisk { radius, z0 } => {
                positive("radius", radius)?;
                positive("z0", z0)?;
                Chart {
                    name: format!("flat_disk(radius={radius},z0={z0})"),
                    dom_dim: 2,
                    ambient_dim: 3,
                    domain: vec![(0.0, radius), (0.0, 2.0 * PI)],
                    map: ChartMap::Builtin(b),
                    symmetry: Symmetry::None,
                    euler_char: 1,
                    meets_boundary_orthogonally: false,
                    asym_minimal_order: 0,
                    face: Face::Finite { at: radius },
                    orientation: 1.0,
                }
            }
        };
        chart.orientation = crate::geometry::reference_orientation(&chart)?;
        Ok(chart)
    }

    /// Chart from DSL expressions. For revolution charts `exprs` is `[ρ, z]`
    /// in `u1` and `ambient_dim` selects 3 or 5; otherwise one expression per
    /// ambient coordinate with the height last.
    #[allow(clippy::too_many_arguments)]
    pub fn from_exprs(
        name: &str,
        exprs: &[&str],
        domain: Vec<(f64, f64)>,
        symmetry: Symmetry,
        ambient_dim: Option<usize>,
        euler_char: i32,
        orthogonal: bool,
        asym_order: u8,
    ) -> Result<Chart> {
        let parsed = exprs.iter().map(|s| parse_expr(s)).collect::<Result<Vec<_>>>()?;
        let (dom_dim, ambient_dim, full_domain) = match symmetry {
            Symmetry::Revolution => {
                if parsed.len() != 2 {
                    return Err(GeomError::Spec("revolution charts take exactly [rho, z] expressions".into()));
                }
                if domain.len() != 1 {
                    return Err(GeomError::Spec("revolution charts take a single profile interval".into()));
                }
                let ambient = ambient_dim.unwrap_or(5);
                if ambient != 3 && ambient != 5 {
                    return Err(GeomError::Spec("ambient_dim must be 3 or 5".into()));
                }
                let mut d = domain.clone();
                d.extend(sphere_angle_domain(ambient - 1));
                (ambient - 1, ambient, d)
            }
            Symmetry::None => {
                let ambient = parsed.len();
                if ambient != 3 && ambient != 5 {
                    return Err(GeomError::Spec(format!(
                        "expected 3 or 5 coordinate expressions, got {ambient}"
                    )));
                }
                if let Some(a) = ambient_dim {
                    if a != ambient {
                        return Err(GeomError::Spec("ambient_dim disagrees with the expression count".into()));
                    }
                }
                if domain.len() != ambient - 1 {
                    return Err(GeomError::Spec(format!(
                        "domain needs {} intervals, got {}",
                        ambient - 1,
                        domain.len()
                    )));
                }
                (ambient - 1, ambient, domain.clone())
            }
        };
        let limit = if symmetry == Symmetry::Revolution { 1 } else { dom_dim };
        for e in &parsed {
            if let Some(m) = e.max_param() {
                if m >= limit {
                    return Err(GeomError::Spec(format!(
                        "expression references u{} but the chart has {limit} parameter(s)",
                        m + 1
                    )));
                }
            }
        }
        for &(lo, hi) in &full_domain {
            if !(lo < hi) {
                return Err(GeomError::Spec(format!("empty interval [{lo}, {hi}]")));
            }
        }
        let mut chart = Chart {
            name: name.to_string(),
            dom_dim,
            ambient_dim,
            domain: full_domain,
            map: ChartMap::Expr(parsed),
            symmetry,
            euler_char,
            meets_boundary_orthogonally: orthogonal,
            asym_minimal_order: asym_order,
            face: Face::Closed,
            orientation: 1.0,
        };
        chart.face = chart.detect_face()?;
        chart.orientation = crate::geometry::reference_orientation(&chart)?;
        Ok(chart)
    }

    fn detect_face(&self) -> Result<Face> {
        let (lo, hi) = self.domain[0];
        let z_lo = self.height(lo)?;
        let z_hi = self.height(hi)?;
        let tol = 1e-12;
        Ok(if z_hi.abs() < tol {
            Face::Ideal { at: hi }
        } else if z_lo.abs() < tol {
            Face::Ideal { at: lo }
        } else {
            Face::Closed
        })
    }

    /// Half-space dimension parameter `n`, with `dom_dim = 2n`.
    pub fn n(&self) -> usize {
        self.dom_dim / 2
    }

    /// Midpoint of the domain, with axis 0 replaced by `u0`.
    pub fn reference_point(&self, u0: f64) -> Vec<f64> {
        let mut p: Vec<f64> = self.domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        p[0] = u0;
        p
    }

    /// Angles at which a revolution chart is evaluated; the angular volume factor is 1 there.
    pub fn revolution_reference(&self, u0: f64) -> Vec<f64> {
        let mut p = vec![u0];
        match self.dom_dim {
            2 => p.push(FRAC_PI_2),
            _ => p.extend([FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]),
        }
        p
    }

    /// Volume of the unit orbit that a revolution chart sweeps.
    pub fn symmetry_factor(&self) -> f64 {
        match (self.symmetry, self.dom_dim) {
            (Symmetry::None, _) => 1.0,
            (Symmetry::Revolution, 2) => 2.0 * PI,
            (Symmetry::Revolution, _) => 2.0 * PI * PI,
        }
    }

    /// Height `z` as a function of the height-axis parameter.
    pub fn height(&self, u0: f64) -> Result<f64> {
        let p = self.reference_point(u0);
        let x = self.eval_unchecked(&p, 0)?;
        Ok(x[self.ambient_dim - 1].value())
    }

    /// Sign of the height-axis direction pointing into the manifold at its face.
    pub fn inward_sign(&self) -> f64 {
        match self.face {
            Face::Ideal { at } | Face::Finite { at } => {
                if (at - self.domain[0].1).abs() < (at - self.domain[0].0).abs() {
                    -1.0
                } else {
                    1.0
                }
            }
            Face::Closed => 1.0,
        }
    }

    /// Parameter interval of the height axis covering `M ∩ {z ≥ ε}`.
    pub fn truncated_interval(&self, eps: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain[0];
        match self.face {
            Face::Closed | Face::Finite { .. } => Ok((lo, hi)),
            Face::Ideal { .. } if eps <= 0.0 => Ok((lo, hi)),
            Face::Ideal { .. } => {
                let t = self.level_parameter(eps)?;
                Ok(if self.inward_sign() < 0.0 { (lo, t) } else { (t, hi) })
            }
        }
    }

    /// Height-axis parameter at which `z = eps` (bisection on the monotone height).
    pub fn level_parameter(&self, eps: f64) -> Result<f64> {
        let Face::Ideal { at } = self.face else {
            return Err(GeomError::Precondition(format!("{} has no ideal boundary", self.name)));
        };
        let far = if self.inward_sign() < 0.0 { self.domain[0].0 } else { self.domain[0].1 };
        let z_far = self.height(far)?;
        if !(eps > 0.0 && eps < z_far) {
            return Err(GeomError::Precondition(format!(
                "eps = {eps} must lie in (0, {z_far}) for {}",
                self.name
            )));
        }
        let (mut near, mut far) = (at, far);
        for _ in 0..200 {
            let mid = 0.5 * (near + far);
            if mid == near || mid == far {
                break;
            }
            if self.height(mid)? < eps {
                near = mid;
            } else {
                far = mid;
            }
        }
        Ok(0.5 * (near + far))
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dom_dim
            && point
                .iter()
                .zip(&self.domain)
                .all(|(&p, &(lo, hi))| p >= lo - 1e-12 && p <= hi + 1e-12)
    }

    /// Jets of every ambient coordinate `(x_1, …, x_2n, z)` at `point`.
    pub fn eval(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        if !self.contains(point) {
            return Err(GeomError::OutsideDomain { point: point.to_vec() });
        }
        self.eval_unchecked(point, order)
    }

    fn eval_unchecked(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let d = self.dom_dim;
        let u = point
            .iter()
            .enumerate()
            .map(|(i, &p)| Jet::variable(i, p, d, order))
            .collect::<Result<Vec<_>>>()?;
        match &self.map {
            ChartMap::Builtin(b) => Ok(eval_builtin(b, &u)),
            ChartMap::Expr(exprs) => match self.symmetry {
                Symmetry::None => exprs.iter().map(|e| e.eval_jet(&u)).collect(),
                Symmetry::Revolution => {
                    let rho = exprs[0].eval_jet(&u)?;
                    let z = exprs[1].eval_jet(&u)?;
                    Ok(sweep(rho, z, &u[1..]))
                }
            },
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeomError::Spec(format!("parameter {name} must be positive, got {v}")))
    }
}

/// Sweeps a profile `(ρ, z)` by the unit sphere parametrized by `angles`.
fn sweep(rho: Jet, z: Jet, angles: &[Jet]) -> Vec<Jet> {
    let mut out = Vec::with_capacity(angles.len() + 2);
    match angles.len() {
        1 => {
            out.push(rho * angles[0].cos());
            out.push(rho * angles[0].sin());
        }
        3 => {
            let (s1, c1) = (angles[0].sin(), angles[0].cos());
            let (s2, c2) = (angles[1].sin(), angles[1].cos());
            let (s3, c3) = (angles[2].sin(), angles[2].cos());
            out.push(rho * c1);
            out.push(rho * s1 * c2);
            out.push(rho * s1 * s2 * c3);
            out.push(rho * s1 * s2 * s3);
        }
        _ => unreachable!("revolution charts sweep S1 or S3"),
    }
    out.push(z);
    out
}

fn eval_builtin(b: &Builtin, u: &[Jet]) -> Vec<Jet> {
    match *b {
        // elevation angle s = π/2 − θ, so the ideal face sits at s = 0 and z = a sin s
        // keeps full relative precision near it
        Builtin::GeodesicHemisphere { a } => {
            let (st, ct) = (u[0].cos(), u[0].sin());
            vec![a * st * u[1].cos(), a * st * u[1].sin(), a * ct]
        }
        Builtin::PerturbedHemisphere { a, delta, k } => {
            let (st, ct) = (u[0].cos(), u[0].sin());
            let bump = st.powi(k as i32).expect("integer power") * ct * ct * (k as f64 * u[1]).cos();
            let rho = a * st * (delta * bump + 1.0);
            vec![rho * u[1].cos(), rho * u[1].sin(), a * ct]
        }
        Builtin::GeodesicHemisphere4 { a } => sweep(a * u[0].cos(), a * u[0].sin(), &u[1..]),
        Builtin::PerturbedProfile4 { a, delta, p } => {
            let ct = u[0].sin();
            let rho = a * u[0].cos() * (delta * ct.powi(p as i32).expect("integer power") + 1.0);
            sweep(rho, a * ct, &u[1..])
        }
        Builtin::RoundSphere { dim, radius, z0 } => {
            let rho = radius * u[0].sin();
            let z = radius * u[0].cos() + z0;
            if dim == 2 {
                let phi = u[1];
                vec![rho * phi.cos(), rho * phi.sin(), z]
            } else {
                sweep(rho, z, &u[1..])
            }
        }
        Builtin::FlatDisk { z0, .. } => {
            let r = u[0];
            vec![r * u[1].cos(), r * u[1].sin(), Jet::constant(z0, 2, u[0].order())]
        }
    }
}

/// Surface spec file contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceSpec {
    Builtin(BuiltinSpec),
    Expr(ExprSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSpec {
    pub builtin: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprSpec {
    pub expr: Vec<String>,
    pub domain: Vec<[f64; 2]>,
    pub euler_char: i32,
    pub orthogonal: bool,
    pub asym_order: u8,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub symmetry: Option<Symmetry>,
    #[serde(default)]
    pub ambient_dim: Option<usize>,
}

impl SurfaceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        // Try each shape explicitly so unknown keys surface as errors.
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| GeomError::Spec(format!("invalid JSON: {e}")))?;
        if value.get("builtin").is_some() {
            serde_json::from_value(value)
                .map(SurfaceSpec::Builtin)
                .map_err(|e| GeomError::Spec(e.to_string()))
        } else {
            serde_json::from_value(value)
                .map(SurfaceSpec::Expr)
                .map_err(|e| GeomError::Spec(e.to_string()))
        }
    }

    /// Parses `builtin:name?key=value&key=value`.
    pub fn from_builtin_uri(uri: &str) -> Result<Self> {
        let rest = uri
            .strip_prefix("builtin:")
            .ok_or_else(|| GeomError::Spec(format!("expected builtin:<name>, got {uri}")))?;
        let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
        let mut params = BTreeMap::new();
        for kv in query.split('&').filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| GeomError::Spec(format!("malformed parameter `{kv}`")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| GeomError::Spec(format!("parameter {k} is not a number: {v}")))?;
            params.insert(k.to_string(), v);
        }
        Ok(SurfaceSpec::Builtin(BuiltinSpec {
            builtin: name.to_string(),
            params,
        }))
    }

    pub fn to_chart(&self) -> Result<Chart> {
        match self {
            SurfaceSpec::Builtin(b) => builtin_from_params(&b.builtin, &b.params),
            SurfaceSpec::Expr(e) => {
                let exprs: Vec<&str> = e.expr.iter().map(String::as_str).collect();
                Chart::from_exprs(
                    e.name.as_deref().unwrap_or("expr"),
                    &exprs,
                    e.domain.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
                    e.symmetry.unwrap_or(Symmetry::None),
                    e.ambient_dim,
                    e.euler_char,
                    e.orthogonal,
                    e.asym_order,
                )
            }
        }
    }
}

/// Builds a catalog chart from a name and a parameter map, rejecting unknown parameters.
pub fn builtin_from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Chart> {
    let allowed: &[&str] = match name {
        "geodesic_hemisphere" | "geodesic_hemisphere4" => &["a"],
        "perturbed_hemisphere" => &["a", "delta", "k"],
        "perturbed_profile4" => &["a", "delta", "p"],
        "round_sphere" => &["dim", "radius", "z0"],
        "flat_disk" => &["radius", "z0"],
        _ => return Err(GeomError::Spec(format!("unknown builtin `{name}`"))),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(GeomError::Spec(format!("unknown parameter `{k}` for {name}")));
    }
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let int = |k: &str, d: f64| -> Result<u32> {
        let v = get(k, d);
        if v.fract() != 0.0 || v < 0.0 {
            return Err(GeomError::Spec(format!("parameter {k} must be a non-negative integer")));
        }
        Ok(v as u32)
    };
    let b = match name {
        "geodesic_hemisphere" => Builtin::GeodesicHemisphere { a: get("a", 1.0) },
        "geodesic_hemisphere4" => Builtin::GeodesicHemisphere4 { a: get("a", 1.0) },
        "perturbed_hemisphere" => Builtin::PerturbedHemisphere {
            a: get("a", 1.0),
            delta: get("delta", 0.05),
            k: int("k", 2.0)?,
        },
        "perturbed_profile4" => Builtin::PerturbedProfile4 {
            a: get("a", 1.0),
            delta: get("delta", 0.2),
            p: int("p", 4.0)?,
        },
        "round_sphere" => Builtin::RoundSphere {
            dim: int("dim", 2.0)? as usize,
            radius: get("radius", 1.0),
            z0: get("z0", 3.0),
        },
        "flat_disk" => Builtin::FlatDisk {
            radius: get("radius", 1.0),
            z0: get("z0", 1.0),
        },
        _ => unreachable!(),
    };
    Chart::builtin(b)
}

/// Resolves either a `builtin:` URI or a path to a JSON spec file.
pub fn load_surface(spec: &str) -> Result<Chart> {
    if spec.starts_with("builtin:") {
        return SurfaceSpec::from_builtin_uri(spec)?.to_chart();
    }
    let text = std::fs::read_to_string(spec).map_err(|e| GeomError::Spec(format!("{spec}: {e}")))?;
    SurfaceSpec::from_json(&text)?.to_chart()
}
