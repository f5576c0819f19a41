//! Extrinsic curvature of a chart under the flat and the hyperbolic metric.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::chart::{Chart, Face};
use crate::error::{GeomError, Result};
use crate::geometry::{values, LocalJets, Metric};

/// Pointwise fundamental forms and curvature scalars under both metrics.
#[derive(Debug, Clone, Serialize)]
pub struct ExtrinsicFrame {
    pub dim: usize,
    pub param: Vec<f64>,
    /// Ambient coordinates `(x_1, …, x_2n, z)`.
    pub point: Vec<f64>,
    pub z: f64,
    pub g_euc: Vec<Vec<f64>>,
    pub g_hyp: Vec<Vec<f64>>,
    pub normal_euc: Vec<f64>,
    pub xi_z: f64,
    pub b_euc: Vec<Vec<f64>>,
    pub b_hyp: Vec<Vec<f64>>,
    /// Mixed shape operators `S^i_j = g^{ik} B_kj`.
    pub shape_euc: Vec<Vec<f64>>,
    pub shape_hyp: Vec<Vec<f64>>,
    pub kappas_euc: Vec<f64>,
    pub kappas_hyp: Vec<f64>,
    pub h_euc: f64,
    pub h_hyp: f64,
    pub r_euc: f64,
    pub r_hyp: f64,
    pub b2_euc: f64,
    pub b2_hyp: f64,
    pub b0sq_euc: f64,
    pub b0sq_hyp: f64,
    pub area_density_euc: f64,
    pub area_density_hyp: f64,
}

/// Curvature scalars of one metric, all derived from `(g, B)`.
struct Scalars {
    shape: Vec<Vec<f64>>,
    kappas: Vec<f64>,
    h: f64,
    r: f64,
    b2: f64,
    b0sq: f64,
}

fn scalars(g: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Scalars> {
    let d = g.len();
    let gm = DMatrix::from_fn(d, d, |i, j| g[i][j]);
    let bm = DMatrix::from_fn(d, d, |i, j| b[i][j]);
    let chol = gm
        .clone()
        .cholesky()
        .ok_or_else(|| GeomError::EigenFailure("metric is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::EigenFailure("singular Cholesky factor".into()))?;
    let c = &linv * &bm * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 1000)
        .ok_or_else(|| GeomError::EigenFailure("symmetric eigen-solve did not converge".into()))?;
    let mut kappas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    kappas.sort_by(f64::total_cmp);

    let shape_m = chol.solve(&bm);
    let shape: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| shape_m[(i, j)]).collect()).collect();
    let tr: f64 = (0..d).map(|i| shape[i][i]).sum();
    let tr2: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| shape[i][j] * shape[j][i]).sum();
    let h = tr / d as f64;
    let df = d as f64;
    Ok(Scalars {
        shape,
        kappas,
        h,
        r: (df * df * h * h - tr2) / (df * (df - 1.0)),
        b2: tr2,
        b0sq: tr2 - df * h * h,
    })
}

impl ExtrinsicFrame {
    pub fn from_local(local: &LocalJets) -> Result<Self> {
        let d = local.dim;
        let z = local.z().value();
        let g_euc = values(&local.g_euc);
        let g_hyp: Vec<Vec<f64>> = g_euc.iter().map(|r| r.iter().map(|v| v / (z * z)).collect()).collect();
        let b_euc = values(local.second_form(Metric::Euclidean));
        let b_hyp = values(local.second_form(Metric::Hyperbolic));
        let e = scalars(&g_euc, &b_euc)?;
        let h = scalars(&g_hyp, &b_hyp)?;
        let det_euc = crate::geometry::det(&g_euc);
        let det_hyp = crate::geometry::det(&g_hyp);
        let normal_euc: Vec<f64> = local.normal.iter().map(|n| n.value()).collect();
        Ok(ExtrinsicFrame {
            dim: d,
            param: local.point.clone(),
            point: local.x.iter().map(|x| x.value()).collect(),
            z,
            xi_z: normal_euc[d],
            normal_euc,
            g_euc,
            g_hyp,
            b_euc,
            b_hyp,
            shape_euc: e.shape,
            shape_hyp: h.shape,
            kappas_euc: e.kappas,
            kappas_hyp: h.kappas,
            h_euc: e.h,
            h_hyp: h.h,
            r_euc: e.r,
            r_hyp: h.r,
            b2_euc: e.b2,
            b2_hyp: h.b2,
            b0sq_euc: e.b0sq,
            b0sq_hyp: h.b0sq,
            area_density_euc: det_euc.sqrt(),
            area_density_hyp: det_hyp.sqrt(),
        })
    }

    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn h(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Euclidean => self.h_euc,
            Metric::Hyperbolic => self.h_hyp,
        }
    }

    pub fn r(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Euclidean => self.r_euc,
            Metric::Hyperbolic => self.r_hyp,
        }
    }

    pub fn b0sq(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Euclidean => self.b0sq_euc,
            Metric::Hyperbolic => self.b0sq_hyp,
        }
    }

    pub fn area_density(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Euclidean => self.area_density_euc,
            Metric::Hyperbolic => self.area_density_hyp,
        }
    }

    pub fn shape(&self, metric: Metric) -> &[Vec<f64>] {
        match metric {
            Metric::Euclidean => &self.shape_euc,
            Metric::Hyperbolic => &self.shape_hyp,
        }
    }
}

/// Extrinsic frame at an interior parameter point.
pub fn extrinsic_frame(chart: &Chart, point: &[f64]) -> Result<ExtrinsicFrame> {
    ExtrinsicFrame::from_local(&LocalJets::new(chart, point, 0)?)
}

/// Same frame computed with the opposite unit normal.
pub fn extrinsic_frame_flipped(chart: &Chart, point: &[f64]) -> Result<ExtrinsicFrame> {
    ExtrinsicFrame::from_local(&LocalJets::with_orientation(chart, point, 0, -chart.orientation)?)
}

/// Residuals of the hyperbolic/flat principal curvature relations.
#[derive(Debug, Clone, Serialize)]
pub struct ConformalResiduals {
    pub kappa: f64,
    pub h: f64,
    pub r: f64,
    pub pass: bool,
}

pub const CONFORMAL_TOL: f64 = 1e-10;

pub fn conformal_relations_check(frame: &ExtrinsicFrame) -> ConformalResiduals {
    let (z, xz) = (frame.z, frame.xi_z);
    let kappa = frame
        .kappas_hyp
        .iter()
        .zip(&frame.kappas_euc)
        .map(|(k, kb)| (k - (z * kb + xz)).abs())
        .fold(0.0, f64::max);
    let h = (frame.h_hyp - (z * frame.h_euc + xz)).abs();
    let r = (frame.r_hyp - (z * z * frame.r_euc + 2.0 * z * xz * frame.h_euc + xz * xz)).abs();
    ConformalResiduals {
        kappa,
        h,
        r,
        pass: kappa <= CONFORMAL_TOL && h <= CONFORMAL_TOL && r <= CONFORMAL_TOL,
    }
}

/// `H² − R` under the hyperbolic metric, after checking it against `|B̊|²/(d(d−1))`
/// and against the flat-side value `z²(H̄² − R̄)`.
pub fn chen_invariant(frame: &ExtrinsicFrame) -> Result<f64> {
    let d = frame.dim as f64;
    let hyp = frame.h_hyp * frame.h_hyp - frame.r_hyp;
    let via_b0 = frame.b0sq_hyp / (d * (d - 1.0));
    let euc = frame.z * frame.z * (frame.h_euc * frame.h_euc - frame.r_euc);
    let tol = CONFORMAL_TOL * hyp.abs().max(1.0);
    if (hyp - via_b0).abs() > tol {
        return Err(GeomError::Assertion {
            what: "H^2 - R = |B0|^2 / (d(d-1))".into(),
            lhs: hyp,
            rhs: via_b0,
        });
    }
    if (hyp - euc).abs() > tol {
        return Err(GeomError::Assertion {
            what: "H^2 - R = z^2 (Hbar^2 - Rbar)".into(),
            lhs: hyp,
            rhs: euc,
        });
    }
    Ok(hyp)
}

/// Growth of a boundary-adjacent ratio as the height shrinks.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsCheck {
    pub quantity: String,
    /// `(z, max ratio over transverse samples)`, from the highest level to the lowest.
    pub samples: Vec<(f64, f64)>,
    pub bounded: bool,
}

const ASYMPTOTIC_LEVELS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];
const TRANSVERSE_FRACTIONS: [f64; 4] = [0.13, 0.37, 0.61, 0.89];

fn boundary_ratio(chart: &Chart, name: &str, f: impl Fn(&ExtrinsicFrame) -> f64) -> Result<AsymptoticsCheck> {
    if !matches!(chart.face, Face::Ideal { .. }) {
        return Err(GeomError::Precondition(format!("{} does not reach z = 0", chart.name)));
    }
    let mut samples = Vec::new();
    for &z in &ASYMPTOTIC_LEVELS {
        let t = chart.level_parameter(z)?;
        let mut worst: f64 = 0.0;
        for &frac in &TRANSVERSE_FRACTIONS {
            let mut p = chart.reference_point(t);
            if chart.dom_dim > 1 {
                let (lo, hi) = chart.domain[1];
                p[1] = lo + frac * (hi - lo);
            }
            let frame = extrinsic_frame(chart, &p)?;
            worst = worst.max(f(&frame));
        }
        samples.push((z, worst));
    }
    // An O(z^k) quantity divided by z^k stays flat; one order short grows by 1000x over these levels.
    let first = samples[0].1;
    let last = samples[samples.len() - 1].1;
    let bounded = last <= 4.0 * first + 1e-9;
    Ok(AsymptoticsCheck {
        quantity: name.to_string(),
        samples,
        bounded,
    })
}

/// `|ξ̄_z| / z` near the ideal boundary.
pub fn orthogonality_check(chart: &Chart) -> Result<AsymptoticsCheck> {
    boundary_ratio(chart, "|xi_z|/z", |f| f.xi_z.abs() / f.z)
}

/// `|H| / z^order` near the ideal boundary.
pub fn asymptotic_minimality_check(chart: &Chart, order: u8) -> Result<AsymptoticsCheck> {
    boundary_ratio(chart, &format!("|H|/z^{order}"), move |f| {
        f.h_hyp.abs() / f.z.powi(order as i32)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Builtin, Symmetry};
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_sphere_inward_normal() {
        let c = Chart::builtin(Builtin::RoundSphere { dim: 2, radius: 1.0, z0: 3.0 }).unwrap();
        let f = extrinsic_frame(&c, &[0.9, 2.5]).unwrap();
        for k in &f.kappas_euc {
            assert_abs_diff_eq!(*k, 1.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(f.h_euc, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(f.b2_euc, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r_euc, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn geodesic_hemisphere_is_minimal() {
        for a in [0.5, 1.0, 2.0] {
            let c = Chart::builtin(Builtin::GeodesicHemisphere { a }).unwrap();
            for p in [[0.2, 0.1], [1.0, 3.0], [1.5, 5.0]] {
                let f = extrinsic_frame(&c, &p).unwrap();
                assert!(f.h_hyp.abs() < 1e-12);
                assert!(f.b0sq_hyp.abs() < 1e-12);
                assert_abs_diff_eq!(f.h_euc, -1.0 / a, epsilon = 1e-12);
                assert!(conformal_relations_check(&f).h <= 1e-12);
            }
        }
    }

    #[test]
    fn two_curvature_arithmetic() {
        // a saddle-free quadric graph with κ = (1, 3) at the origin
        let c = Chart::from_exprs(
            "quadric",
            &["u1", "u2", "2 + u1^2/2 + 3*u2^2/2"],
            vec![(-0.5, 0.5), (-0.5, 0.5)],
            Symmetry::None,
            None,
            1,
            false,
            0,
        )
        .unwrap();
        let f = extrinsic_frame(&c, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(f.kappas_euc[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(f.kappas_euc[1], 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(f.h_euc, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(f.b2_euc, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r_euc, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.b0sq_euc, 2.0, epsilon = 1e-12);
        let chen = f.h_euc * f.h_euc - f.r_euc;
        assert_abs_diff_eq!(chen, f.b0sq_euc / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn conformal_substitution() {
        // κ = zκ̄ + ξ̄_z with z = 2, κ̄ = 0.5, ξ̄_z = 0.1
        let (z, kb, xz) = (2.0, 0.5, 0.1);
        assert_abs_diff_eq!(z * kb + xz, 1.1, epsilon = 1e-15);
    }

    #[test]
    fn perturbed_hemisphere_relations() {
        let c = Chart::builtin(Builtin::PerturbedHemisphere { a: 1.0, delta: 0.05, k: 2 }).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let p = [rng.random_range(0.05..1.5), rng.random_range(0.0..std::f64::consts::TAU)];
            let f = extrinsic_frame(&c, &p).unwrap();
            let res = conformal_relations_check(&f);
            assert!(res.pass, "{res:?}");
            chen_invariant(&f).unwrap();
            let tr: f64 = (0..2).map(|i| f.shape_hyp[i][i]).sum();
            assert!((tr - 2.0 * f.h_hyp).abs() < 1e-12);
            let mean: f64 = f.kappas_hyp.iter().sum::<f64>() / 2.0;
            assert!((mean - f.h_hyp).abs() < 1e-12);
        }
    }

    #[test]
    fn orientation_flip() {
        let c = Chart::builtin(Builtin::PerturbedHemisphere { a: 1.0, delta: 0.1, k: 3 }).unwrap();
        let p = [0.8, 0.4];
        let f = extrinsic_frame(&c, &p).unwrap();
        let g = extrinsic_frame_flipped(&c, &p).unwrap();
        assert_abs_diff_eq!(f.h_hyp, -g.h_hyp, epsilon = 1e-13);
        assert_abs_diff_eq!(f.b_hyp[0][1], -g.b_hyp[0][1], epsilon = 1e-12);
        assert_abs_diff_eq!(f.b0sq_hyp, g.b0sq_hyp, epsilon = 1e-13);
        assert_abs_diff_eq!(f.r_hyp, g.r_hyp, epsilon = 1e-13);
    }

    #[test]
    fn umbilic_chen_is_zero() {
        let c = Chart::builtin(Builtin::RoundSphere { dim: 2, radius: 1.0, z0: 3.0 }).unwrap();
        let f = extrinsic_frame(&c, &[1.0, 1.0]).unwrap();
        assert!(chen_invariant(&f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn boundary_asymptotics() {
        let c = Chart::builtin(Builtin::PerturbedHemisphere { a: 1.0, delta: 0.1, k: 2 }).unwrap();
        assert!(orthogonality_check(&c).unwrap().bounded);
        assert!(asymptotic_minimality_check(&c, 1).unwrap().bounded);
        assert!(!asymptotic_minimality_check(&c, 2).unwrap().bounded);

        let good = Chart::builtin(Builtin::PerturbedProfile4 { a: 1.0, delta: 0.2, p: 3 }).unwrap();
        assert!(asymptotic_minimality_check(&good, 2).unwrap().bounded);
        let weak = Chart::builtin(Builtin::PerturbedProfile4 { a: 1.0, delta: 0.2, p: 2 }).unwrap();
        assert!(orthogonality_check(&weak).unwrap().bounded);
        assert!(!asymptotic_minimality_check(&weak, 2).unwrap().bounded);
        let oblique = Chart::builtin(Builtin::PerturbedProfile4 { a: 1.0, delta: 0.2, p: 1 }).unwrap();
        assert!(!orthogonality_check(&oblique).unwrap().bounded);
    }
}
