//! Numerical test of the integrability conditions on the curvature of an
//! orthogonal 2-metric.
//!
//! With `q = |K|^(-3/4)` and `eps = sgn K`, a Riemannian metric passes when
//! the covariant Hessian of `q` in an orthonormal frame is `3 eps q^(-1/3) I`;
//! a Lorentzian metric passes when it is `3 eps q^(-1/3) diag(1, -1)`.
//! The same conditions restated for `k = |K|^(1/2)` give an independent
//! cross-check.

use serde::Serialize;

use crate::metrics::{MetricClass, MetricError, OrthogonalMetric2D};
use crate::numkit::{central_step, Jet2};
use crate::par::Exec;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DarbouxError {
    #[error("curvature vanishes at (u, v) = ({u}, {v}); the conditions are undefined")]
    FlatPoint { u: f64, v: f64 },
    #[error("curvature changes sign across the sample grid")]
    MixedType,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("sample grid must be at least 1x1")]
    EmptyGrid,
}

/// `|K|` at or below this is treated as a flat point.
pub const FLAT_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-4;

/// First and covariant second derivatives of a curvature function, in
/// orthonormal-frame components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameDerivs {
    pub value: f64,
    pub grad: [f64; 2],
    /// `hess[i][j]` is the `eta^j` component of `d f_i - f_k eta^k_i`.
    pub hess: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureJet {
    pub curvature: f64,
    pub k: f64,
    pub q: f64,
    pub q_grad: [f64; 2],
    pub q_hess: [[f64; 2]; 2],
}

impl CurvatureJet {
    pub fn epsilon(&self) -> f64 {
        self.curvature.signum()
    }
}

/// Frame rotated by a constant angle from `(w1, w2)`. Only meaningful for
/// Riemannian metrics, where such a rotation is again orthonormal.
fn frame_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Frame components of `f(K)` and its covariant Hessian at `(u, v)`. The
/// inner derivative is exact (jets); the outer one is a central difference.
pub fn frame_derivs(
    m: &OrthogonalMetric2D,
    u: f64,
    v: f64,
    theta: f64,
    f: impl Fn(&Jet2) -> Jet2,
) -> Result<FrameDerivs, MetricError> {
    let rot = frame_matrix(theta);
    // gradient in the base frame w1 = d_x / A, w2 = d_y / B
    let base = |u: f64, v: f64| -> Result<(f64, [f64; 2], f64, f64, [f64; 2]), MetricError> {
        let s = m.structure(u, v)?;
        let g = f(&s.curvature);
        let (a, b) = (s.a.value(), s.b.value());
        let grad = [g.d(s.x_axis).value() / a, g.d(s.y_axis).value() / b];
        // eta^1_2 evaluated on w1, w2
        let conn = [s.p.value() / a, s.q.value() / b];
        Ok((g.value(), grad, a, b, conn))
    };
    let (value, g0, a, b, conn0) = base(u, v)?;
    let (x_axis, _) = m.coframe_axes();
    let rotate = |g: [f64; 2]| [rot[0][0] * g[0] + rot[0][1] * g[1], rot[1][0] * g[0] + rot[1][1] * g[1]];
    let grad = rotate(g0);

    // coordinate partials of the rotated gradient components
    let pt = [u, v];
    let mut partial = [[0.0; 2]; 2]; // partial[i][axis]
    for axis in 0..2 {
        let h = central_step(pt[axis]);
        let mut lo = pt;
        let mut hi = pt;
        lo[axis] -= h;
        hi[axis] += h;
        let gp = rotate(base(hi[0], hi[1])?.1);
        let gm = rotate(base(lo[0], lo[1])?.1);
        for i in 0..2 {
            partial[i][axis] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let y_axis = 1 - x_axis;
    // w'_j = rot[j][0] w1 + rot[j][1] w2
    let along = |i: usize, j: usize| rot[j][0] * partial[i][x_axis] / a + rot[j][1] * partial[i][y_axis] / b;
    let lorentz = m.class() == MetricClass::Lorentzian;
    let mut hess = [[0.0; 2]; 2];
    for j in 0..2 {
        let w12 = rot[j][0] * conn0[0] + rot[j][1] * conn0[1]; // eta^1_2(w'_j)
        let w21 = if lorentz { w12 } else { -w12 };
        hess[0][j] = along(0, j) - grad[1] * w21;
        hess[1][j] = along(1, j) - grad[0] * w12;
    }
    Ok(FrameDerivs { value, grad, hess })
}

fn q_of(k: &Jet2) -> Jet2 {
    let abs = if k.value() < 0.0 { -*k } else { *k };
    abs.powf(-0.75)
}

fn k_of(k: &Jet2) -> Jet2 {
    let abs = if k.value() < 0.0 { -*k } else { *k };
    abs.sqrt()
}

fn checked_curvature(m: &OrthogonalMetric2D, u: f64, v: f64) -> Result<f64, DarbouxError> {
    let k = m.gauss_curvature(u, v)?;
    if !(k.abs() > FLAT_THRESHOLD) {
        return Err(DarbouxError::FlatPoint { u, v });
    }
    Ok(k)
}

pub fn curvature_jet(m: &OrthogonalMetric2D, u: f64, v: f64) -> Result<CurvatureJet, DarbouxError> {
    curvature_jet_rotated(m, u, v, 0.0)
}

/// As [`curvature_jet`] in the orthonormal frame rotated by `theta`.
pub fn curvature_jet_rotated(m: &OrthogonalMetric2D, u: f64, v: f64, theta: f64) -> Result<CurvatureJet, DarbouxError> {
    let curvature = checked_curvature(m, u, v)?;
    let d = frame_derivs(m, u, v, theta, q_of)?;
    Ok(CurvatureJet {
        curvature,
        k: curvature.abs().sqrt(),
        q: d.value,
        q_grad: d.grad,
        q_hess: d.hess,
    })
}

/// Residuals `[q11 - t1, q22 - t2, q12, q21]` of the q-form conditions.
pub fn q_residuals(class: MetricClass, jet: &CurvatureJet) -> [f64; 4] {
    let target = 3.0 * jet.epsilon() * jet.q.powf(-1.0 / 3.0);
    let t2 = match class {
        MetricClass::Riemannian => target,
        MetricClass::Lorentzian => -target,
    };
    let h = jet.q_hess;
    [h[0][0] - target, h[1][1] - t2, h[0][1], h[1][0]]
}

/// Residuals `[k11 - t11, k22 - t22, k12 - t12, k21 - t12]` of the same
/// conditions written for `k = |K|^(1/2)`, together with the scale
/// `max(1, |t11|, |t22|, 2k^3)` of the terms. The terms grow like `k^3`,
/// which reaches 1e8 near the edges of the catalog domains, so comparisons
/// against a tolerance should use the scaled residuals.
pub fn k_condition_residuals(m: &OrthogonalMetric2D, u: f64, v: f64) -> Result<KResiduals, DarbouxError> {
    let curvature = checked_curvature(m, u, v)?;
    let eps = curvature.signum();
    let d = frame_derivs(m, u, v, 0.0, k_of)?;
    let k = d.value;
    let [k1, k2] = d.grad;
    let cubic = 2.0 * eps * k.powi(3);
    let (t11, t22) = match m.class() {
        MetricClass::Riemannian => (2.5 * k1 * k1 / k - cubic, 2.5 * k2 * k2 / k - cubic),
        MetricClass::Lorentzian => (2.5 * k1 * k1 / k - cubic, 2.5 * k2 * k2 / k + cubic),
    };
    let t12 = 2.5 * k1 * k2 / k;
    let scale = 1f64.max(t11.abs()).max(t22.abs()).max(cubic.abs());
    let h = d.hess;
    Ok(KResiduals {
        raw: [h[0][0] - t11, h[1][1] - t22, h[0][1] - t12, h[1][0] - t12],
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KResiduals {
    pub raw: [f64; 4],
    pub scale: f64,
}

impl KResiduals {
    pub fn scaled(&self) -> [f64; 4] {
        self.raw.map(|r| r / self.scale)
    }
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleResidual {
    pub u: f64,
    pub v: f64,
    pub curvature: f64,
    pub q_form: [f64; 4],
    /// Scaled k-form residuals, see [`k_condition_residuals`].
    pub k_form: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxReport {
    pub class: MetricClass,
    pub epsilon: i8,
    pub grid: [usize; 2],
    pub tol: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub max_k_residual: f64,
    pub verdict: bool,
    pub samples: Vec<SampleResidual>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub grid: [usize; 2],
    pub tol: f64,
    /// Fraction of each side trimmed before laying out the grid.
    pub inset: f64,
    pub exec: Exec,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            grid: [20, 20],
            tol: DEFAULT_TOL,
            inset: 0.0,
            exec: Exec::default(),
        }
    }
}

pub fn check_integrability(m: &OrthogonalMetric2D, opts: &CheckOptions) -> Result<DarbouxReport, DarbouxError> {
    let [nu, nv] = opts.grid;
    if nu == 0 || nv == 0 {
        return Err(DarbouxError::EmptyGrid);
    }
    let pts = m.domain.inset(opts.inset).interior_grid(nu, nv);
    let class = m.class();
    let samples = opts.exec.try_map(pts.len(), |i| {
        let (u, v) = pts[i];
        let jet = curvature_jet(m, u, v)?;
        Ok::<_, DarbouxError>(SampleResidual {
            u,
            v,
            curvature: jet.curvature,
            q_form: q_residuals(class, &jet),
            k_form: k_condition_residuals(m, u, v)?.scaled(),
        })
    })?;
    let positive = samples.iter().filter(|s| s.curvature > 0.0).count();
    if positive != 0 && positive != samples.len() {
        return Err(DarbouxError::MixedType);
    }
    let per: Vec<f64> = samples.iter().map(|s| max_abs(&s.q_form)).collect();
    let max_residual = max_abs(&per);
    let mean_residual = per.iter().sum::<f64>() / per.len() as f64;
    let max_k_residual = samples.iter().fold(0.0f64, |a, s| a.max(max_abs(&s.k_form)));
    Ok(DarbouxReport {
        class,
        epsilon: if positive > 0 { 1 } else { -1 },
        grid: opts.grid,
        tol: opts.tol,
        max_residual,
        mean_residual,
        max_k_residual,
        verdict: max_residual < opts.tol,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{builtin, catalog, CaseId};

    #[test]
    fn lh_t3_at_two() {
        let nf = catalog(CaseId::LhT3);
        let jet = curvature_jet(&nf.metric, 2.0, 0.5).unwrap();
        assert!((jet.curvature + 1.0 / 16.0).abs() < 1e-12);
        assert!((jet.q - 8.0).abs() < 1e-10);
        let r = q_residuals(nf.class, &jet);
        assert!(max_abs(&r) < 1e-5, "{r:?}");
    }

    #[test]
    fn r1_at_one() {
        let nf = catalog(CaseId::R1);
        let jet = curvature_jet(&nf.metric, 1.0, 0.5).unwrap();
        assert!(max_abs(&q_residuals(nf.class, &jet)) < 1e-5);
    }

    #[test]
    fn sphere_fails() {
        let m = builtin("sphere").unwrap();
        let jet = curvature_jet(&m, 1.0, 0.5).unwrap();
        assert!((jet.q - 1.0).abs() < 1e-12);
        assert!(jet.q_hess[0][0].abs() < 1e-6);
        let r = q_residuals(m.class(), &jet);
        assert!((r[0] + 3.0).abs() < 1e-6);
        let k = k_condition_residuals(&m, 1.0, 0.5).unwrap().raw;
        assert!((k[0].abs() - 2.0).abs() < 1e-6);
        assert!(!check_integrability(&m, &CheckOptions::default()).unwrap().verdict);
    }

    #[test]
    fn k_form_r4_and_r2() {
        for (id, u) in [(CaseId::R4, 0.5), (CaseId::R2, 1.0)] {
            let nf = catalog(id);
            let k = k_condition_residuals(&nf.metric, u, 0.3).unwrap().raw;
            assert!(max_abs(&k) < 1e-5, "{id}: {k:?}");
        }
    }

    #[test]
    fn non_members_fail() {
        for name in ["hyperbolic-plane", "perturbed-R1"] {
            let rep = check_integrability(&builtin(name).unwrap(), &CheckOptions::default()).unwrap();
            assert!(!rep.verdict, "{name}");
            assert!(rep.max_residual > 1e-2, "{name}: {}", rep.max_residual);
        }
    }

    #[test]
    fn flat_point_is_an_error() {
        let m = builtin("flat").unwrap();
        assert!(matches!(
            curvature_jet(&m, 0.0, 0.0),
            Err(DarbouxError::FlatPoint { .. })
        ));
    }

    #[test]
    fn catalog_passes_on_default_grid() {
        for id in CaseId::ALL {
            let nf = catalog(id);
            let rep = check_integrability(&nf.metric, &CheckOptions::default()).unwrap();
            assert!(rep.verdict, "{id}: {}", rep.max_residual);
            assert_eq!(rep.epsilon, nf.epsilon, "{id}");
            assert!(rep.max_k_residual < 1e-4, "{id}: k {}", rep.max_k_residual);
        }
    }

    #[test]
    fn rotation_leaves_residuals_unchanged() {
        let nf = catalog(CaseId::R2);
        let base = q_residuals(nf.class, &curvature_jet(&nf.metric, 0.9, 0.4).unwrap());
        for theta in [0.3, 1.1, 2.5] {
            let rot = q_residuals(nf.class, &curvature_jet_rotated(&nf.metric, 0.9, 0.4, theta).unwrap());
            for (a, b) in base.iter().zip(rot) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }
}
