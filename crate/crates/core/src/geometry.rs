//! Pointwise jet pipeline shared by the extrinsic and intrinsic modules.
//!
//! With a work order `k`, the chart is expanded to order `k + 2`, so that the
//! induced metric is known to order `k + 1`, the second fundamental forms and
//! shape operators to order `k`, and the Christoffel symbols to order `k`.

use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::jet::Jet;

/// Which ambient metric the induced quantities refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Flat metric `ḡ` of the half-space.
    Euclidean,
    /// Hyperbolic metric `g = ḡ / z²`.
    Hyperbolic,
}

impl Metric {
    /// Sectional curvature of the ambient space.
    pub fn ambient_curvature(self) -> f64 {
        match self {
            Metric::Euclidean => 0.0,
            Metric::Hyperbolic => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "euc" => Ok(Metric::Euclidean),
            "hyperbolic" | "hyp" => Ok(Metric::Hyperbolic),
            _ => Err(GeomError::Spec(format!("unknown metric `{s}`"))),
        }
    }
}

pub type JetMatrix = Vec<Vec<Jet>>;

/// Threshold on the Hadamard ratio `det g / Π g_ii` below which the differential
/// counts as degenerate. The ratio ignores coordinate scale, so polar axes approached
/// by quadrature nodes are not mistaken for rank loss.
pub const GRAM_TOL: f64 = 1e-12;

/// Gram determinant and whether it passes the nondegeneracy test.
pub fn gram_check(g: &[Vec<f64>]) -> (f64, bool) {
    let gram = det(g);
    let diag: f64 = (0..g.len()).map(|i| g[i][i]).product();
    let ok = diag > 0.0 && gram > 0.0 && gram / diag > GRAM_TOL;
    (gram, ok)
}

/// Jets of everything the curvature formulas need at one parameter point.
#[derive(Debug, Clone)]
pub struct LocalJets {
    pub dim: usize,
    pub work_order: usize,
    pub point: Vec<f64>,
    /// Ambient coordinates, order `k + 2`.
    pub x: Vec<Jet>,
    /// Coordinate tangents `∂_i x`, order `k + 1`.
    pub tangents: Vec<Vec<Jet>>,
    /// Flat induced metric, order `k + 1`.
    pub g_euc: JetMatrix,
    /// Oriented unit flat normal, order `k`.
    pub normal: Vec<Jet>,
    pub b_euc: JetMatrix,
    pub b_hyp: JetMatrix,
}

impl LocalJets {
    pub fn new(chart: &Chart, point: &[f64], work_order: usize) -> Result<Self> {
        Self::with_orientation(chart, point, work_order, chart.orientation)
    }

    pub(crate) fn with_orientation(chart: &Chart, point: &[f64], k: usize, sign: f64) -> Result<Self> {
        let d = chart.dom_dim;
        let m = chart.ambient_dim;
        let x = chart.eval(point, k + 2)?;
        let tangents: Vec<Vec<Jet>> = (0..d).map(|i| x.iter().map(|xa| xa.d(i)).collect()).collect();

        let g_euc: JetMatrix = (0..d)
            .map(|i| (0..d).map(|j| dot(&tangents[i], &tangents[j])).collect())
            .collect();
        let (gram, ok) = gram_check(&values(&g_euc));
        if !ok {
            return Err(GeomError::RankDeficient {
                gram,
                point: point.to_vec(),
            });
        }

        let t_low: Vec<Vec<Jet>> = tangents.iter().map(|row| truncate_all(row, k)).collect();
        let mut normal = cofactor_normal(&t_low);
        let norm = dot(&normal, &normal).sqrt()?;
        let inv = norm.recip()?.scale(sign);
        for n in &mut normal {
            *n *= inv;
        }

        let second: Vec<Vec<Vec<Jet>>> = (0..d)
            .map(|i| (0..d).map(|j| tangents[i].iter().map(|t| t.d(j)).collect()).collect())
            .collect();
        let b_euc: JetMatrix = (0..d)
            .map(|i| (0..d).map(|j| dot(&second[i][j], &normal)).collect())
            .collect();

        // Hyperbolic second fundamental form from the Levi-Civita connection of
        // g = e^{2φ} ḡ, φ = −ln z: Γ^a_bc = δ_ab ∂_cφ + δ_ac ∂_bφ − δ_bc ∂_aφ.
        let z = x[m - 1].truncate(k);
        let zinv = z.recip()?;
        let dphi = |a: usize| if a == m - 1 { -zinv } else { Jet::zero(d, k) };
        let xi: Vec<Jet> = normal.iter().map(|n| *n * z).collect();
        let w = zinv * zinv;
        let mut b_hyp = vec![vec![Jet::zero(d, k); d]; d];
        for i in 0..d {
            for j in i..d {
                let ti = &t_low[i];
                let tj = &t_low[j];
                let ti_dphi = ti[m - 1] * dphi(m - 1);
                let tj_dphi = tj[m - 1] * dphi(m - 1);
                let tij = dot(ti, tj);
                let mut acc = Jet::zero(d, k);
                for a in 0..m {
                    let gamma = ti[a] * tj_dphi + tj[a] * ti_dphi - tij * dphi(a);
                    acc += (second[i][j][a] + gamma) * xi[a];
                }
                b_hyp[i][j] = acc * w;
                b_hyp[j][i] = b_hyp[i][j];
            }
        }

        Ok(LocalJets {
            dim: d,
            work_order: k,
            point: point.to_vec(),
            x,
            tangents,
            g_euc,
            normal,
            b_euc,
            b_hyp,
        })
    }

    pub fn z(&self) -> Jet {
        self.x[self.x.len() - 1]
    }

    /// Induced metric, order `k + 1`.
    pub fn metric(&self, metric: Metric) -> JetMatrix {
        match metric {
            Metric::Euclidean => self.g_euc.clone(),
            Metric::Hyperbolic => {
                let z = self.z().truncate(self.work_order + 1);
                let w = (z * z).recip().expect("height is positive");
                self.g_euc
                    .iter()
                    .map(|row| row.iter().map(|g| *g * w).collect())
                    .collect()
            }
        }
    }

    pub fn second_form(&self, metric: Metric) -> &JetMatrix {
        match metric {
            Metric::Euclidean => &self.b_euc,
            Metric::Hyperbolic => &self.b_hyp,
        }
    }

    /// Shape operator `g⁻¹B` (as `S[i][j] = g^{ik} B_kj`), order `k`.
    pub fn shape_operator(&self, metric: Metric) -> Result<JetMatrix> {
        let g = truncate_matrix(&self.metric(metric), self.work_order);
        let ginv = sym_inverse(&g)?;
        Ok(mat_mul(&ginv, self.second_form(metric)))
    }

    /// `|B̊|² = tr S² − (tr S)²/d` as a jet of order `k`.
    pub fn b0sq_jet(&self, metric: Metric) -> Result<Jet> {
        let s = self.shape_operator(metric)?;
        let d = self.dim;
        let mut tr = Jet::zero(d, self.work_order);
        let mut tr2 = Jet::zero(d, self.work_order);
        for i in 0..d {
            tr += s[i][i];
            for j in 0..d {
                tr2 += s[i][j] * s[j][i];
            }
        }
        Ok(tr2 - tr * tr / d as f64)
    }
}

pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = a[0] * b[0];
    for (x, y) in a.iter().zip(b).skip(1) {
        acc += *x * *y;
    }
    acc
}

fn truncate_all(v: &[Jet], order: usize) -> Vec<Jet> {
    v.iter().map(|j| j.truncate(order)).collect()
}

pub fn truncate_matrix(m: &JetMatrix, order: usize) -> JetMatrix {
    m.iter().map(|row| truncate_all(row, order)).collect()
}

pub fn values(m: &JetMatrix) -> Vec<Vec<f64>> {
    m.iter().map(|row| row.iter().map(Jet::value).collect()).collect()
}

pub fn mat_mul(a: &JetMatrix, b: &JetMatrix) -> JetMatrix {
    let n = a.len();
    let p = b[0].len();
    (0..n)
        .map(|i| (0..p).map(|j| {
            let mut acc = a[i][0] * b[0][j];
            for k in 1..b.len() {
                acc += a[i][k] * b[k][j];
            }
            acc
        }).collect())
        .collect()
}

/// Determinant of a small real matrix by cofactor expansion.
pub fn det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, v)| *v).collect())
                    .collect();
                let s = if c % 2 == 0 { 1.0 } else { -1.0 };
                s * m[0][c] * det(&minor)
            })
            .sum(),
    }
}

fn jet_det(m: &[Vec<Jet>]) -> Jet {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => {
            let mut acc: Option<Jet> = None;
            for c in 0..n {
                let minor: Vec<Vec<Jet>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, v)| *v).collect())
                    .collect();
                let term = m[0][c] * jet_det(&minor);
                acc = Some(match acc {
                    None => term,
                    Some(a) if c % 2 == 0 => a + term,
                    Some(a) => a - term,
                });
            }
            acc.expect("non-empty matrix")
        }
    }
}

/// Generalized cross product of the `d` rows of a `d × (d+1)` matrix.
fn cofactor_normal(rows: &[Vec<Jet>]) -> Vec<Jet> {
    let m = rows[0].len();
    (0..m)
        .map(|a| {
            let minor: Vec<Vec<Jet>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != a).map(|(_, v)| *v).collect())
                .collect();
            let c = jet_det(&minor);
            if a % 2 == 0 { c } else { -c }
        })
        .collect()
}

/// Inverse of a symmetric positive definite jet matrix (Gauss–Jordan, diagonal pivots).
pub fn sym_inverse(g: &JetMatrix) -> Result<JetMatrix> {
    let n = g.len();
    let nv = g[0][0].num_vars();
    let order = g[0][0].order();
    let mut a = g.clone();
    let mut inv: JetMatrix = (0..n)
        .map(|i| (0..n).map(|j| Jet::constant(if i == j { 1.0 } else { 0.0 }, nv, order)).collect())
        .collect();
    for c in 0..n {
        let p = a[c][c].recip()?;
        for j in 0..n {
            a[c][j] *= p;
            inv[c][j] *= p;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r][c];
            for j in 0..n {
                let (ac, ic) = (a[c][j], inv[c][j]);
                a[r][j] -= f * ac;
                inv[r][j] -= f * ic;
            }
        }
    }
    Ok(inv)
}

/// Christoffel symbols `Γ[l][i][j]` of a metric known to order `k + 1`; result has order `k`.
pub fn christoffel(g: &JetMatrix) -> Result<Vec<JetMatrix>> {
    let n = g.len();
    let k = g[0][0].order().saturating_sub(1);
    let ginv = sym_inverse(&truncate_matrix(g, k))?;
    let dg: Vec<JetMatrix> = (0..n)
        .map(|c| g.iter().map(|row| row.iter().map(|v| v.d(c)).collect()).collect())
        .collect();
    // first kind: Γ_{ijl} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = vec![vec![vec![Jet::zero(n, k); n]; n]; n];
    for i in 0..n {
        for j in i..n {
            for l in 0..n {
                let v = (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]) * 0.5;
                first[i][j][l] = v;
                first[j][i][l] = v;
            }
        }
    }
    let mut out = vec![vec![vec![Jet::zero(n, k); n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = Jet::zero(n, k);
                for m in 0..n {
                    acc += ginv[l][m] * first[i][j][m];
                }
                out[l][i][j] = acc;
                out[l][j][i] = acc;
            }
        }
    }
    Ok(out)
}

/// Orientation making `ξ̄_z > 0` at the chart's reference point, or `H̄ ≥ 0` when the normal is horizontal there.
pub(crate) fn reference_orientation(chart: &Chart) -> Result<f64> {
    let p: Vec<f64> = chart.domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let local = LocalJets::with_orientation(chart, &p, 0, 1.0)?;
    let nz = local.normal[chart.ambient_dim - 1].value();
    if nz.abs() > 1e-8 {
        return Ok(nz.signum());
    }
    let s = local.shape_operator(Metric::Euclidean)?;
    let tr: f64 = (0..chart.dom_dim).map(|i| s[i][i].value()).sum();
    Ok(if tr < 0.0 { -1.0 } else { 1.0 })
}
