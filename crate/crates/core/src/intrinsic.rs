//! Intrinsic curvature of the induced metric: Riemann, Ricci, Weyl, the
//! boundary S-curvature, and the Laplace–Beltrami operator.
//!
//! Conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`,
//! `Rm(X,Y,Z,W) = g(R(X,Y)W, Z)` so that `Rm(e_a,e_b,e_a,e_b)` is the sectional
//! curvature, and `Ric(Y,W) = Σ_a Rm(e_a,Y,e_a,W)`.

use serde::Serialize;

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::extrinsic::ExtrinsicFrame;
use crate::geometry::{christoffel, det, values, JetMatrix, LocalJets, Metric};
use crate::jet::Jet;

/// Fully covariant 4-tensor on a `dim`-dimensional space, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor4 {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Tensor4 {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let n = self.idx(i, j, k, l);
        self.data[n] = v;
    }

    /// `T'(a,b,c,d) = Σ F[a][i] F[b][j] F[c][k] F[d][l] T(i,j,k,l)`.
    pub fn transform(&self, f: &[Vec<f64>]) -> Tensor4 {
        let n = self.dim;
        let mut cur = self.clone();
        for slot in 0..4 {
            let mut next = Tensor4::zeros(n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut idx = [a, b, c, d];
                            let target = idx[slot];
                            let mut acc = 0.0;
                            for (i, fi) in f[target].iter().enumerate() {
                                idx[slot] = i;
                                acc += fi * cur.get(idx[0], idx[1], idx[2], idx[3]);
                            }
                            next.set(a, b, c, d, acc);
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Ricci contraction over the first and third slots.
    pub fn ricci(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|l| (0..n).map(|i| self.get(i, j, i, l)).sum()).collect())
            .collect()
    }

    /// Largest violation of the algebraic curvature symmetries.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v + self.get(j, i, k, l)).abs())
                            .max((v + self.get(i, j, l, k)).abs())
                            .max((v - self.get(k, l, i, j)).abs())
                            .max((v + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Kulkarni–Nomizu product `(h ⊙ g)_ijkl = h_ik g_jl + h_jl g_ik − h_il g_jk − h_jk g_il`.
pub fn kulkarni_nomizu(h: &[Vec<f64>], g: &[Vec<f64>]) -> Tensor4 {
    let n = h.len();
    let mut t = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = h[i][k] * g[j][l] + h[j][l] * g[i][k] - h[i][l] * g[j][k] - h[j][k] * g[i][l];
                    t.set(i, j, k, l, v);
                }
            }
        }
    }
    t
}

/// Ricci decomposition data of an algebraic curvature tensor in an orthonormal frame.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureParts {
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
    pub lambda: f64,
    pub e2: f64,
    pub w2: f64,
    pub sigma2p: Option<f64>,
}

pub fn decompose(rm: &Tensor4) -> CurvatureParts {
    let n = rm.dim;
    let nf = n as f64;
    let ricci = rm.ricci();
    let scalar: f64 = (0..n).map(|i| ricci[i][i]).sum();
    let id: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let e: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| ricci[i][j] - scalar / nf * id[i][j]).collect())
        .collect();
    let e2: f64 = e.iter().flatten().map(|v| v * v).sum();
    let (w2, sigma2p) = if n >= 3 {
        let p: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (ricci[i][j] - scalar / (2.0 * (nf - 1.0)) * id[i][j]) / (nf - 2.0))
                    .collect()
            })
            .collect();
        let pg = kulkarni_nomizu(&p, &id);
        let w2: f64 = rm.data.iter().zip(&pg.data).map(|(r, q)| (r - q) * (r - q)).sum();
        let tr: f64 = (0..n).map(|i| p[i][i]).sum();
        let p2: f64 = p.iter().flatten().map(|v| v * v).sum();
        (w2, (n == 4).then_some(tr * tr - p2))
    } else {
        (0.0, None)
    };
    CurvatureParts {
        ricci,
        scalar,
        lambda: scalar / (nf * (nf - 1.0)),
        e2,
        w2,
        sigma2p,
    }
}

/// Rows are the coordinate components of a `g`-orthonormal frame (Gram–Schmidt in axis order).
pub fn orthonormal_frame(g: &[Vec<f64>], seed: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * g[i][j] * b[j];
            }
        }
        s
    };
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(seed.len());
    for v in seed {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                let c = ip(&w, e);
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= c * ei;
                }
            }
        }
        let nrm = ip(&w, &w);
        if !(nrm > 1e-300) {
            return Err(GeomError::EigenFailure("frame orthonormalization failed".into()));
        }
        let s = nrm.sqrt();
        out.push(w.into_iter().map(|x| x / s).collect());
    }
    Ok(out)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Coordinate-basis `Rm_ijkl` from Christoffel jets of order ≥ 1 and metric values.
fn coordinate_riemann(gamma: &[JetMatrix], g: &[Vec<f64>]) -> Tensor4 {
    let n = g.len();
    let gv: Vec<Vec<Vec<f64>>> = gamma.iter().map(values).collect();
    // R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
    let mut up = vec![0.0; n.pow(4)];
    let at = |l: usize, i: usize, j: usize, k: usize| ((l * n + i) * n + j) * n + k;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = gamma[l][j][k].d(i).value() - gamma[l][i][k].d(j).value();
                    for m in 0..n {
                        v += gv[l][i][m] * gv[m][j][k] - gv[l][j][m] * gv[m][i][k];
                    }
                    up[at(l, i, j, k)] = v;
                }
            }
        }
    }
    let mut rm = Tensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v: f64 = (0..n).map(|m| g[k][m] * up[at(m, i, j, l)]).sum();
                    rm.set(i, j, k, l, v);
                }
            }
        }
    }
    rm
}

/// Pointwise intrinsic curvature of the induced metric.
#[derive(Debug, Clone, Serialize)]
pub struct IntrinsicFrame {
    pub metric: Metric,
    pub dim: usize,
    /// `Rm` in the Gram–Schmidt orthonormal frame.
    pub riemann: Tensor4,
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
    pub lambda: f64,
    pub e2: f64,
    /// Identically 0 on surfaces.
    pub w2: f64,
    /// `2σ₂(P)`; only defined in dimension 4.
    pub sigma2p: Option<f64>,
    pub volume_density: f64,
}

impl IntrinsicFrame {
    pub fn from_local(local: &LocalJets, metric: Metric) -> Result<Self> {
        if local.work_order < 1 {
            return Err(GeomError::JetShape("intrinsic curvature needs work order >= 1".into()));
        }
        let gj = local.metric(metric);
        let g = values(&gj);
        let gamma = christoffel(&gj)?;
        let rm = coordinate_riemann(&gamma, &g);
        let frame = orthonormal_frame(&g, &identity(local.dim))?;
        let riemann = rm.transform(&frame);
        let parts = decompose(&riemann);
        Ok(IntrinsicFrame {
            metric,
            dim: local.dim,
            riemann,
            ricci: parts.ricci,
            scalar: parts.scalar,
            lambda: parts.lambda,
            e2: parts.e2,
            w2: parts.w2,
            sigma2p: parts.sigma2p,
            volume_density: det(&g).sqrt(),
        })
    }

    /// `K(e_a, e_b)` in the orthonormal frame.
    pub fn sectional(&self, a: usize, b: usize) -> f64 {
        self.riemann.get(a, b, a, b)
    }
}

pub fn intrinsic_frame(chart: &Chart, point: &[f64], metric: Metric) -> Result<IntrinsicFrame> {
    IntrinsicFrame::from_local(&LocalJets::new(chart, point, 1)?, metric)
}

/// Ingredients of the boundary term of Gauss–Bonnet type formulas on the level set
/// `u1 = const` (a height level `z = ε` for charts reaching the ideal boundary).
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryFrame {
    pub metric: Metric,
    pub dim: usize,
    /// Second fundamental form of the boundary w.r.t. the inward normal, in an orthonormal boundary frame.
    pub l: Vec<Vec<f64>>,
    pub h: f64,
    pub l_norm2: f64,
    pub tr_l3: f64,
    pub lambda: f64,
    pub ric_nu_nu: f64,
    pub mixed_term: f64,
    /// S-curvature (4-dimensional case only).
    pub s: Option<f64>,
    /// Boundary volume element per unit parameter volume of the tangential axes.
    pub line_density: f64,
}

impl BoundaryFrame {
    /// Geodesic curvature of the boundary curve (2-dimensional case).
    pub fn kappa_g(&self) -> Option<f64> {
        (self.dim == 2).then_some(self.h)
    }
}

/// `S = 6λh − Ric(ν,ν)h − Σ Rm(e_i,e_j,e_i,e_k)L_jk + h³/3 − h|L|² + (2/3)tr L³`.
pub fn s_curvature(lambda: f64, ric_nu_nu: f64, mixed: f64, l: &[Vec<f64>]) -> f64 {
    let (h, l2, l3) = l_invariants(l);
    6.0 * lambda * h - ric_nu_nu * h - mixed + h * h * h / 3.0 - h * l2 + 2.0 / 3.0 * l3
}

fn l_invariants(l: &[Vec<f64>]) -> (f64, f64, f64) {
    let n = l.len();
    let h: f64 = (0..n).map(|i| l[i][i]).sum();
    let l2: f64 = l.iter().flatten().map(|v| v * v).sum();
    let mut l3 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                l3 += l[i][j] * l[j][k] * l[k][i];
            }
        }
    }
    (h, l2, l3)
}

pub fn boundary_frame(chart: &Chart, point: &[f64], metric: Metric) -> Result<BoundaryFrame> {
    boundary_frame_from_local(chart, &LocalJets::new(chart, point, 1)?, metric)
}

pub(crate) fn boundary_frame_from_local(chart: &Chart, local: &LocalJets, metric: Metric) -> Result<BoundaryFrame> {
    let d = local.dim;
    if matches!(chart.face, crate::chart::Face::Ideal { .. }) && local.z().d(0).value().abs() < 1e-14 {
        return Err(GeomError::NotTransverse { point: local.point.clone() });
    }
    let gj = local.metric(metric);
    let g = values(&gj);
    let gamma = christoffel(&gj)?;
    let ginv = crate::geometry::sym_inverse(&crate::geometry::truncate_matrix(&gj, 0))?;
    let g00 = ginv[0][0].value();
    if !(g00 > 0.0) {
        return Err(GeomError::NotTransverse { point: local.point.clone() });
    }
    let s = chart.inward_sign();
    let root = g00.sqrt();
    let nu: Vec<f64> = (0..d).map(|i| s * ginv[0][i].value() / root).collect();

    // orthonormal tangential frame of the level set, with ν first
    let tangential_seed: Vec<Vec<f64>> = (1..d).map(|a| identity(d)[a].clone()).collect();
    let tangential = orthonormal_frame(&g, &tangential_seed)?;
    let mut frame = vec![nu];
    frame.extend(tangential.iter().cloned());

    // L_ij = g(∇_i ∂_j, ν) = s Γ^0_ij / √g^{00}
    let lc = |i: usize, j: usize| s * gamma[0][i][j].value() / root;
    let m = d - 1;
    let mut l = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            let mut acc = 0.0;
            for i in 1..d {
                for j in 1..d {
                    acc += tangential[a][i] * tangential[b][j] * lc(i, j);
                }
            }
            l[a][b] = acc;
        }
    }
    let (h, l2, l3) = l_invariants(&l);

    let gtan: Vec<Vec<f64>> = (1..d).map(|i| (1..d).map(|j| g[i][j]).collect()).collect();
    let line_density = det(&gtan).sqrt();

    let (lambda, ric_nu_nu, mixed, s_val) = if d >= 3 {
        let rm = coordinate_riemann(&gamma, &g).transform(&frame);
        let parts = decompose(&rm);
        let mut mixed = 0.0;
        for i in 1..d {
            for j in 1..d {
                for k in 1..d {
                    mixed += rm.get(i, j, i, k) * l[j - 1][k - 1];
                }
            }
        }
        let ric_nu_nu = parts.ricci[0][0];
        let sv = s_curvature(parts.lambda, ric_nu_nu, mixed, &l);
        (parts.lambda, ric_nu_nu, mixed, Some(sv))
    } else {
        let rm = coordinate_riemann(&gamma, &g).transform(&frame);
        let k = rm.get(0, 1, 0, 1);
        (k, k, 0.0, None)
    };

    Ok(BoundaryFrame {
        metric,
        dim: d,
        l,
        h,
        l_norm2: l2,
        tr_l3: l3,
        lambda,
        ric_nu_nu,
        mixed_term: mixed,
        s: s_val,
        line_density,
    })
}

/// Unit normal of the level set `u1 = const`, pointing into the truncated manifold.
pub fn inward_unit_normal(chart: &Chart, g: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = g.len();
    let gm = nalgebra::DMatrix::from_fn(d, d, |i, j| g[i][j]);
    let ginv = gm
        .try_inverse()
        .ok_or_else(|| GeomError::EigenFailure("singular metric".into()))?;
    let g00 = ginv[(0, 0)];
    if !(g00 > 0.0) {
        return Err(GeomError::EigenFailure("metric is not positive definite".into()));
    }
    let s = chart.inward_sign() / g00.sqrt();
    Ok((0..d).map(|i| s * ginv[(0, i)]).collect())
}

/// Scalar fields that the Laplace–Beltrami operator can be applied to.
#[derive(Debug, Clone)]
pub enum ScalarField {
    /// `|B̊|²` of the same metric as the operator.
    B0sq,
    /// A function of the chart parameters.
    Param(Expr),
}

/// `Δf = g^{ij}(∂_i∂_j f − Γ^k_ij ∂_k f)` with `f` a jet of order ≥ 2.
pub fn laplacian_of(local: &LocalJets, metric: Metric, f: &Jet) -> Result<f64> {
    if f.order() < 2 || local.work_order < 1 {
        return Err(GeomError::JetShape("Laplacian needs a field jet of order >= 2".into()));
    }
    let d = local.dim;
    let gj = local.metric(metric);
    let gamma = christoffel(&crate::geometry::truncate_matrix(&gj, 1))?;
    let ginv = crate::geometry::sym_inverse(&crate::geometry::truncate_matrix(&gj, 0))?;
    let grad = f.gradient();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut alpha = vec![0usize; d];
            alpha[i] += 1;
            alpha[j] += 1;
            let mut v = f.partial(&alpha);
            for (k, gk) in grad.iter().enumerate() {
                v -= gamma[k][i][j].value() * gk;
            }
            acc += ginv[i][j].value() * v;
        }
    }
    Ok(acc)
}

pub fn laplace_beltrami(chart: &Chart, field: &ScalarField, point: &[f64], metric: Metric) -> Result<f64> {
    let local = LocalJets::new(chart, point, 2)?;
    let f = match field {
        ScalarField::B0sq => local.b0sq_jet(metric)?,
        ScalarField::Param(e) => {
            let u = point
                .iter()
                .enumerate()
                .map(|(i, &p)| Jet::variable(i, p, chart.dom_dim, 2))
                .collect::<Result<Vec<_>>>()?;
            e.eval_jet(&u)?
        }
    };
    laplacian_of(&local, metric, &f)
}

/// `|E|²` from the trace-free shape operator of the hyperbolic metric.
pub fn e2_via_bform(frame: &ExtrinsicFrame) -> Result<f64> {
    if frame.dim != 4 {
        return Err(GeomError::Dimension(format!(
            "trace-free Ricci identity needs a 4-dimensional hypersurface, got {}",
            frame.dim
        )));
    }
    let h = frame.h_hyp;
    let s = &frame.shape_hyp;
    let n = s.len();
    let b0: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| s[i][j] - if i == j { h } else { 0.0 }).collect())
        .collect();
    let mul = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
    };
    let tr = |a: &[Vec<f64>]| -> f64 { (0..n).map(|i| a[i][i]).sum() };
    let b2 = mul(&b0, &b0);
    let b3 = mul(&b2, &b0);
    let t2 = tr(&b2);
    let t3 = tr(&b3);
    let t4 = tr(&mul(&b2, &b2));
    Ok(e2_from_traces(h, t2, t3, t4))
}

/// `|B̊²|² − 4H tr B̊³ + 4H²|B̊|² − |B̊|⁴/4` from `tr B̊^k`.
pub fn e2_from_traces(h: f64, t2: f64, t3: f64, t4: f64) -> f64 {
    t4 - 4.0 * h * t3 + 4.0 * h * h * t2 - t2 * t2 / 4.0
}
