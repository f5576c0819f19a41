//! Tensor-product Gauss–Legendre integration over truncated charts.
//!
//! The height axis is split into panels that double in length away from the
//! truncation face, which keeps the `z^{-2n}` growth of the hyperbolic measure
//! well resolved at every `ε`. Revolution charts reduce to a profile integral.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::chart::{Chart, Face, Symmetry};
use crate::error::{GeomError, Result};
use crate::extrinsic::ExtrinsicFrame;
use crate::geometry::{values, LocalJets, Metric};
use crate::intrinsic::{boundary_frame_from_local, inward_unit_normal, laplacian_of, IntrinsicFrame};
use crate::par::{compensated_sum, Execution};

/// Pointwise integrands over `M_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    One,
    H2,
    H4,
    H2R,
    H2Lambda,
    B0sq,
    B0sq4,
    B0sqPlusLaplacian,
    E2,
    W2,
    Lambda,
    Lambda2,
    /// `(H² − R)^n`.
    ChenN,
    /// `2σ₂(P)`.
    Sigma2P,
    /// `z^p`, for measure bookkeeping.
    HeightPower(i32),
}

impl Quantity {
    pub const ALL: [Quantity; 14] = [
        Quantity::One,
        Quantity::H2,
        Quantity::H4,
        Quantity::H2R,
        Quantity::H2Lambda,
        Quantity::B0sq,
        Quantity::B0sq4,
        Quantity::B0sqPlusLaplacian,
        Quantity::E2,
        Quantity::W2,
        Quantity::Lambda,
        Quantity::Lambda2,
        Quantity::ChenN,
        Quantity::Sigma2P,
    ];

    /// Jet work order the integrand needs.
    pub fn work_order(self) -> usize {
        match self {
            Quantity::B0sqPlusLaplacian => 2,
            Quantity::H2Lambda
            | Quantity::E2
            | Quantity::W2
            | Quantity::Lambda
            | Quantity::Lambda2
            | Quantity::Sigma2P => 1,
            _ => 0,
        }
    }

    fn intrinsic(self) -> bool {
        self.work_order() == 1
    }

    /// Power `p` with `q = O(z^p)` near the ideal boundary for a chart with
    /// `H = O(z^k)`; `None` when `q dA` is conformally invariant.
    pub fn boundary_order(self, k: u8) -> Option<i32> {
        let k = k as i32;
        match self {
            Quantity::One | Quantity::Lambda | Quantity::Lambda2 | Quantity::Sigma2P => Some(0),
            Quantity::H2 | Quantity::H2Lambda => Some(2 * k),
            Quantity::H4 => Some(4 * k),
            Quantity::H2R => Some(2 * k + (2 * k).min(2)),
            Quantity::B0sq => Some(2),
            Quantity::B0sq4 => Some(4),
            Quantity::E2 => Some(2 + 2 * k.min(1)),
            Quantity::B0sqPlusLaplacian => (k < 2).then_some(2),
            Quantity::W2 | Quantity::ChenN => None,
            Quantity::HeightPower(p) => Some(p),
        }
    }

    /// Whether `∫_{M_ε} q dA` blows up as `ε → 0`.
    pub fn diverges(self, chart: &Chart, metric: Metric) -> bool {
        if metric == Metric::Euclidean || !matches!(chart.face, Face::Ideal { .. }) {
            return false;
        }
        match self.boundary_order(chart.asym_minimal_order) {
            None => false,
            Some(p) => p < chart.dom_dim as i32,
        }
    }

    pub fn name(self) -> String {
        match self {
            Quantity::One => "one".into(),
            Quantity::H2 => "H2".into(),
            Quantity::H4 => "H4".into(),
            Quantity::H2R => "H2R".into(),
            Quantity::H2Lambda => "H2lambda".into(),
            Quantity::B0sq => "B0sq".into(),
            Quantity::B0sq4 => "B0sq4".into(),
            Quantity::B0sqPlusLaplacian => "B0sq_plus_laplacian".into(),
            Quantity::E2 => "E2".into(),
            Quantity::W2 => "W2".into(),
            Quantity::Lambda => "lambda".into(),
            Quantity::Lambda2 => "lambda2".into(),
            Quantity::ChenN => "chen_n".into(),
            Quantity::Sigma2P => "sigma2P".into(),
            Quantity::HeightPower(p) => format!("zpow:{p}"),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Quantity {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(p) = s.strip_prefix("zpow:") {
            return p
                .parse()
                .map(Quantity::HeightPower)
                .map_err(|_| GeomError::Spec(format!("bad height power `{p}`")));
        }
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| GeomError::Spec(format!("unknown quantity `{s}`")))
    }
}

/// Integrands over the boundary `∂M_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryQuantity {
    /// Geodesic curvature (surfaces).
    Kg,
    /// S-curvature (4-manifolds).
    S,
    One,
    /// Outward normal derivative of `|B̊|²`.
    DnB0sq,
}

impl BoundaryQuantity {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryQuantity::Kg => "kg",
            BoundaryQuantity::S => "S",
            BoundaryQuantity::One => "one",
            BoundaryQuantity::DnB0sq => "dn_B0sq",
        }
    }
}

impl FromStr for BoundaryQuantity {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        [
            BoundaryQuantity::Kg,
            BoundaryQuantity::S,
            BoundaryQuantity::One,
            BoundaryQuantity::DnB0sq,
        ]
        .into_iter()
        .find(|q| q.name() == s)
        .ok_or_else(|| GeomError::Spec(format!("unknown boundary quantity `{s}`")))
    }
}

/// Node counts and panel layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per panel on the height axis of 2-dimensional charts.
    pub nodes: usize,
    /// Nodes per panel for 1D profile integrals of revolution charts.
    pub profile_nodes: usize,
    /// Nodes per panel on every other axis.
    pub transverse_nodes: usize,
    pub transverse_panels: usize,
    /// Uniform panels on the height axis when no truncation face is present (or `ε = 0`).
    pub panels: usize,
    /// Panel growth factor away from the truncation face.
    pub grading_ratio: f64,
    /// Repeat the computation with doubled node counts and fail on disagreement.
    pub refine_check: bool,
    pub tolerance: f64,
    pub execution: Execution,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 48,
            profile_nodes: 64,
            transverse_nodes: 48,
            transverse_panels: 2,
            panels: 8,
            grading_ratio: 2.0,
            refine_check: false,
            tolerance: 1e-9,
            execution: Execution::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn doubled(&self) -> Self {
        QuadratureSpec {
            nodes: 2 * self.nodes,
            profile_nodes: 2 * self.profile_nodes,
            transverse_nodes: 2 * self.transverse_nodes,
            refine_check: false,
            ..*self
        }
    }
}

type RuleCache = std::sync::Mutex<Vec<(usize, &'static [(f64, f64)])>>;

/// Nodes and weights on `[-1, 1]`, cached per degree.
fn legendre(n: usize) -> &'static [(f64, f64)] {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    if let Some((_, rule)) = guard.iter().find(|(k, _)| *k == n) {
        return rule;
    }
    let deg = NonZeroUsize::new(n.max(1)).expect("non-zero degree");
    let rule: Vec<(f64, f64)> = GaussLegendre::new(deg).as_node_weight_pairs().to_vec();
    let leaked: &'static [(f64, f64)] = Box::leak(rule.into_boxed_slice());
    guard.push((n, leaked));
    leaked
}

/// `(node, weight)` pairs of a composite rule over consecutive panels.
fn composite(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let rule = legendre(n);
    let mut out = Vec::with_capacity(rule.len() * (breaks.len() - 1));
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        out.extend(rule.iter().map(|&(x, wt)| (mid + half * x, half * wt)));
    }
    out
}

fn uniform_breaks(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect()
}

/// Panel breakpoints on `[lo, hi]` growing geometrically away from `near`.
pub fn graded_breaks(lo: f64, hi: f64, near: f64, first: f64, ratio: f64) -> Vec<f64> {
    let len = hi - lo;
    let mut dists = vec![0.0];
    let mut d = first.max(len * 1e-12);
    while d < len * (1.0 - 1e-9) {
        dists.push(d);
        d *= ratio;
    }
    dists.push(len);
    // merge a sliver last panel into its neighbour
    let k = dists.len();
    if k >= 3 && dists[k - 1] - dists[k - 2] < 0.25 * (dists[k - 2] - dists[k - 3]) {
        dists.remove(k - 2);
    }
    if (near - lo).abs() <= (near - hi).abs() {
        dists.iter().map(|d| lo + d).collect()
    } else {
        dists.iter().rev().map(|d| hi - d).collect()
    }
}

/// Height-axis rule for `M_ε`.
fn height_rule(chart: &Chart, eps: f64, spec: &QuadratureSpec, boundary_graded: bool) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = chart.truncated_interval(eps)?;
    let n = if chart.symmetry == Symmetry::Revolution {
        spec.profile_nodes
    } else {
        spec.nodes
    };
    let breaks = match chart.face {
        Face::Ideal { at } if eps > 0.0 && boundary_graded => {
            let level = if chart.inward_sign() < 0.0 { hi } else { lo };
            let first = (level - at).abs();
            graded_breaks(lo, hi, level, first, spec.grading_ratio)
        }
        _ => uniform_breaks(lo, hi, spec.panels),
    };
    Ok(composite(&breaks, n))
}

/// Tensor grid over the axes other than the height axis: `(coords, weight)`.
fn transverse_rule(chart: &Chart, spec: &QuadratureSpec) -> Vec<(Vec<f64>, f64)> {
    if chart.symmetry == Symmetry::Revolution {
        let p = chart.revolution_reference(0.0);
        return vec![(p[1..].to_vec(), chart.symmetry_factor())];
    }
    let axes: Vec<Vec<(f64, f64)>> = chart.domain[1..]
        .iter()
        .map(|&(lo, hi)| composite(&uniform_breaks(lo, hi, spec.transverse_panels), spec.transverse_nodes))
        .collect();
    let mut grid: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for axis in &axes {
        let mut next = Vec::with_capacity(grid.len() * axis.len());
        for (p, w) in &grid {
            for &(x, wx) in axis {
                let mut q = p.clone();
                q.push(x);
                next.push((q, w * wx));
            }
        }
        grid = next;
    }
    grid
}

/// Pointwise data shared by all integrands at one node.
struct Sample {
    ext: ExtrinsicFrame,
    intr: [Option<IntrinsicFrame>; 2],
    lap: [Option<f64>; 2],
}

fn slot(m: Metric) -> usize {
    match m {
        Metric::Euclidean => 0,
        Metric::Hyperbolic => 1,
    }
}

fn sample(chart: &Chart, p: &[f64], terms: &[(Quantity, Metric)]) -> Result<Sample> {
    let k = terms.iter().map(|(q, _)| q.work_order()).max().unwrap_or(0);
    let local = LocalJets::new(chart, p, k)?;
    let ext = ExtrinsicFrame::from_local(&local)?;
    let mut intr = [None, None];
    let mut lap = [None, None];
    for &(q, m) in terms {
        if q.intrinsic() && intr[slot(m)].is_none() {
            intr[slot(m)] = Some(IntrinsicFrame::from_local(&local, m)?);
        }
        if q == Quantity::B0sqPlusLaplacian && lap[slot(m)].is_none() {
            lap[slot(m)] = Some(laplacian_of(&local, m, &local.b0sq_jet(m)?)?);
        }
    }
    Ok(Sample { ext, intr, lap })
}

/// Integrand times the area density of `metric`.
fn integrand(s: &Sample, q: Quantity, m: Metric) -> f64 {
    let e = &s.ext;
    let h = e.h(m);
    let intr = || s.intr[slot(m)].as_ref().expect("intrinsic frame requested");
    let v = match q {
        Quantity::One => 1.0,
        Quantity::H2 => h * h,
        Quantity::H4 => h.powi(4),
        Quantity::H2R => h * h * e.r(m),
        Quantity::H2Lambda => h * h * intr().lambda,
        Quantity::B0sq => e.b0sq(m),
        Quantity::B0sq4 => e.b0sq(m).powi(2),
        Quantity::B0sqPlusLaplacian => 2.0 * e.b0sq(m) + s.lap[slot(m)].expect("laplacian requested"),
        Quantity::E2 => intr().e2,
        Quantity::W2 => intr().w2,
        Quantity::Lambda => intr().lambda,
        Quantity::Lambda2 => intr().lambda.powi(2),
        Quantity::ChenN => (h * h - e.r(m)).powi(e.n() as i32),
        Quantity::Sigma2P => intr().sigma2p.unwrap_or(f64::NAN),
        Quantity::HeightPower(p) => e.z.powi(p),
    };
    v * e.area_density(m)
}

/// `∫_{M_ε} q dA` for several `(quantity, metric)` pairs sharing one set of nodes.
pub fn integrate_many(chart: &Chart, terms: &[(Quantity, Metric)], eps: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    if terms.is_empty() {
        return Ok(Vec::new());
    }
    for &(q, m) in terms {
        if q == Quantity::Sigma2P && chart.dom_dim != 4 {
            return Err(GeomError::Dimension("sigma2P needs a 4-dimensional chart".into()));
        }
        if eps <= 0.0 && q.diverges(chart, m) {
            return Err(GeomError::DivergentAtBoundary {
                quantity: format!("{} ({})", q, m.name()),
            });
        }
    }
    let values = integrate_raw(chart, terms, eps, spec)?;
    if spec.refine_check {
        let fine = integrate_raw(chart, terms, eps, &spec.doubled())?;
        for (i, (a, b)) in values.iter().zip(&fine).enumerate() {
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            if rel > spec.tolerance {
                return Err(GeomError::NonConvergence {
                    quantity: terms[i].0.name(),
                    rel_change: rel,
                });
            }
        }
    }
    Ok(values)
}

fn integrate_raw(chart: &Chart, terms: &[(Quantity, Metric)], eps: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let rule0 = height_rule(chart, eps, spec, true)?;
    let trans = transverse_rule(chart, spec);
    let lines: Vec<Result<Vec<f64>>> = spec.execution.map(rule0.len(), |i| {
        let (t, _) = rule0[i];
        let mut acc: Vec<Vec<f64>> = vec![Vec::with_capacity(trans.len()); terms.len()];
        for (rest, w) in &trans {
            let mut p = Vec::with_capacity(chart.dom_dim);
            p.push(t);
            p.extend_from_slice(rest);
            let s = sample(chart, &p, terms)?;
            for (j, &(q, m)) in terms.iter().enumerate() {
                acc[j].push(w * integrand(&s, q, m));
            }
        }
        Ok(acc.into_iter().map(compensated_sum).collect())
    });
    let lines = lines.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..terms.len())
        .map(|j| compensated_sum(lines.iter().zip(&rule0).map(|(l, &(_, w))| w * l[j])))
        .collect())
}

pub fn integrate_interior(chart: &Chart, quantity: Quantity, eps: f64, metric: Metric, spec: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_many(chart, &[(quantity, metric)], eps, spec)?[0])
}

/// Height-axis parameter of the boundary component integrated by [`integrate_boundary`].
pub fn boundary_parameter(chart: &Chart, eps: f64) -> Result<f64> {
    match chart.face {
        Face::Ideal { .. } => {
            if eps <= 0.0 {
                return Err(GeomError::DivergentAtBoundary {
                    quantity: "boundary integral at z = 0".into(),
                });
            }
            chart.level_parameter(eps)
        }
        Face::Finite { at } => Ok(at),
        Face::Closed => Err(GeomError::Precondition(format!("{} has no boundary", chart.name))),
    }
}

/// `∮_{∂M_ε} q ds` over the level set `z = ε` (or the finite boundary face).
pub fn integrate_boundary(
    chart: &Chart,
    quantity: BoundaryQuantity,
    eps: f64,
    metric: Metric,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let value = boundary_raw(chart, quantity, eps, metric, spec)?;
    if spec.refine_check {
        let fine = boundary_raw(chart, quantity, eps, metric, &spec.doubled())?;
        let rel = (value - fine).abs() / value.abs().max(fine.abs()).max(1.0);
        if rel > spec.tolerance {
            return Err(GeomError::NonConvergence {
                quantity: quantity.name().into(),
                rel_change: rel,
            });
        }
    }
    Ok(value)
}

fn boundary_raw(chart: &Chart, quantity: BoundaryQuantity, eps: f64, metric: Metric, spec: &QuadratureSpec) -> Result<f64> {
    match (quantity, chart.dom_dim) {
        (BoundaryQuantity::Kg, d) if d != 2 => {
            return Err(GeomError::Dimension("geodesic curvature needs a surface".into()))
        }
        (BoundaryQuantity::S, d) if d != 4 => {
            return Err(GeomError::Dimension("S-curvature needs a 4-manifold".into()))
        }
        _ => {}
    }
    let t = boundary_parameter(chart, eps)?;
    let trans = transverse_rule(chart, spec);
    let parts: Vec<Result<f64>> = spec.execution.map(trans.len(), |i| {
        let (rest, w) = &trans[i];
        let mut p = vec![t];
        p.extend_from_slice(rest);
        let local = LocalJets::new(chart, &p, 1)?;
        let bf = boundary_frame_from_local(chart, &local, metric)?;
        let v = match quantity {
            BoundaryQuantity::Kg => bf.h,
            BoundaryQuantity::S => bf.s.unwrap_or(f64::NAN),
            BoundaryQuantity::One => 1.0,
            BoundaryQuantity::DnB0sq => {
                let f = local.b0sq_jet(metric)?;
                let nu = inward_unit_normal(chart, &values(&local.metric(metric)))?;
                -nu.iter().zip(f.gradient()).map(|(a, b)| a * b).sum::<f64>()
            }
        };
        Ok(w * v * bf.line_density)
    });
    Ok(compensated_sum(parts.into_iter().collect::<Result<Vec<_>>>()?))
}
