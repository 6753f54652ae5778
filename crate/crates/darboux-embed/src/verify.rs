//! Residual checks for candidate isometric immersions, computed by finite
//! differences of the immersion itself so they do not share code paths with
//! the constructions they test.

use serde::Serialize;

use crate::metrics::OrthogonalMetric2D;
use crate::numkit::{Mat3, Signature, Vec3};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum VerifyError {
    #[error("immersion cannot be evaluated at ({a}, {b}): {reason}")]
    Eval { a: f64, b: f64, reason: String },
}

impl VerifyError {
    pub fn eval(a: f64, b: f64, e: impl ToString) -> Self {
        VerifyError::Eval {
            a,
            b,
            reason: e.to_string(),
        }
    }
}

/// A parametrized surface in R^3 or R^{1,2} together with the map from its
/// parameters to the coordinates `(u, v)` of the metric it should realize.
pub trait Immersion: Sync {
    fn signature(&self) -> Signature;

    fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError>;

    fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError>;

    /// Adapted frame with columns `e1, e2, e3`, where `e1`, `e2` are dual
    /// to the metric coframe and `e3` is normal.
    fn frame(&self, _a: f64, _b: f64) -> Option<Result<Mat3, VerifyError>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Relative step of the five-point stencils.
    pub step: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { step: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexResidual {
    /// Largest entry of `I_image - I_metric`.
    pub isometry: f64,
    /// `|K_image - K| / max(1, |K|)`.
    pub curvature: f64,
    pub image_curvature: f64,
    pub metric_curvature: f64,
    /// Largest value of the four structure-equation residuals on the two
    /// parameter directions; present when the immersion carries a frame.
    pub pfaffian: Option<f64>,
    /// Tangent plane degenerate at this vertex; `curvature` is then 0.
    pub degenerate: bool,
}

const W5: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
const O5: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

fn d5<T>(f: impl Fn(f64) -> Result<T, VerifyError>, x: f64, h: f64) -> Result<T, VerifyError>
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Copy,
{
    let mut acc: Option<T> = None;
    for k in 0..4 {
        let term = f(x + O5[k] * h)? * (W5[k] / (12.0 * h));
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    Ok(acc.expect("four terms"))
}

fn d5_second(f: impl Fn(f64) -> Result<Vec3, VerifyError>, x: f64, h: f64) -> Result<Vec3, VerifyError> {
    let c = [-1.0, 16.0, -30.0, 16.0, -1.0];
    let mut acc = Vec3::zeros();
    for (k, ck) in c.iter().enumerate() {
        acc += f(x + (k as f64 - 2.0) * h)? * (*ck / (12.0 * h * h));
    }
    Ok(acc)
}

fn step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

#[derive(Clone, Copy)]
struct Pair(f64, f64);

impl std::ops::Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}
impl std::ops::Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}

/// Image Gauss curvature `det L / (det I <N, N>)` from first and second
/// parameter derivatives; independent of the parametrization.
pub fn image_curvature(sig: Signature, xa: &Vec3, xb: &Vec3, xaa: &Vec3, xab: &Vec3, xbb: &Vec3) -> Option<f64> {
    let n = sig.normal(xa, xb);
    let nn = sig.dot(&n, &n);
    let det_i = sig.dot(xa, xa) * sig.dot(xb, xb) - sig.dot(xa, xb).powi(2);
    if !(det_i.abs() > 1e-14) || !(nn.abs() > 1e-14) {
        return None;
    }
    let det_l = sig.dot(xaa, &n) * sig.dot(xbb, &n) - sig.dot(xab, &n).powi(2);
    Some(det_l / (det_i * nn))
}

/// All residual channels at parameter `(a, b)`.
pub fn vertex_residuals(
    imm: &dyn Immersion,
    metric: &OrthogonalMetric2D,
    a: f64,
    b: f64,
    opts: &VerifyOptions,
) -> Result<VertexResidual, VerifyError> {
    let sig = imm.signature();
    let (ha, hb) = (step(a, opts.step), step(b, opts.step));
    let xa = d5(|s| imm.position(s, b), a, ha)?;
    let xb = d5(|s| imm.position(a, s), b, hb)?;
    let xaa = d5_second(|s| imm.position(s, b), a, ha)?;
    let xbb = d5_second(|s| imm.position(a, s), b, hb)?;
    let xab = d5(|s| d5(|t| imm.position(s, t), b, hb), a, ha)?;
    let (u, v) = imm.chart(a, b)?;
    let ca = d5(|s| imm.chart(s, b).map(|(u, v)| Pair(u, v)), a, ha)?;
    let cb = d5(|s| imm.chart(a, s).map(|(u, v)| Pair(u, v)), b, hb)?;

    let (guu, gvv) = metric.components(u, v);
    let pull = |x: &Pair, y: &Pair| guu * x.0 * y.0 + gvv * x.1 * y.1;
    let isometry = [
        sig.dot(&xa, &xa) - pull(&ca, &ca),
        sig.dot(&xa, &xb) - pull(&ca, &cb),
        sig.dot(&xb, &xb) - pull(&cb, &cb),
    ]
    .iter()
    .fold(0.0f64, |m, r| m.max(r.abs()));

    let metric_curvature = metric.gauss_curvature(u, v).map_err(|e| VerifyError::eval(a, b, e))?;
    let (image_k, degenerate) = match image_curvature(sig, &xa, &xb, &xaa, &xab, &xbb) {
        Some(k) => (k, false),
        None => (f64::NAN, true),
    };
    let curvature = if degenerate {
        0.0
    } else {
        (image_k - metric_curvature).abs() / metric_curvature.abs().max(1.0)
    };

    let pfaffian = match imm.frame(a, b) {
        None => None,
        Some(frame) => {
            let frame = frame?;
            let fa = d5(|s| imm.frame(s, b).expect("frame present"), a, ha)?;
            let fb = d5(|s| imm.frame(a, s).expect("frame present"), b, hb)?;
            let s = metric.structure(u, v).map_err(|e| VerifyError::eval(a, b, e))?;
            let col = |m: &Mat3, i: usize| m.column(i).into_owned();
            let e = [col(&frame, 0), col(&frame, 1), col(&frame, 2)];
            let norms = e.map(|ei| sig.dot(&ei, &ei));
            let mut worst = 0.0f64;
            for (dx, de, dc) in [(&xa, &fa, &ca), (&xb, &fb, &cb)] {
                let coords = [dc.0, dc.1];
                let eta1 = s.a.value() * coords[s.x_axis];
                let eta2 = s.b.value() * coords[s.y_axis];
                let eta12 = s.p.value() * coords[s.x_axis] + s.q.value() * coords[s.y_axis];
                let omega = |i: usize| sig.dot(&e[i], dx) / norms[i];
                let omega12 = sig.dot(&e[0], &col(de, 1)) / norms[0];
                for r in [omega(2), omega(0) - eta1, omega(1) - eta2, omega12 - eta12] {
                    worst = worst.max(r.abs());
                }
            }
            Some(worst)
        }
    };

    Ok(VertexResidual {
        isometry,
        curvature,
        image_curvature: image_k,
        metric_curvature,
        pfaffian,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::builtin;

    struct Plane;

    impl Immersion for Plane {
        fn signature(&self) -> Signature {
            Signature::Lorentz
        }
        fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
            Ok(Vec3::new(a, b, 0.0))
        }
        fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
            Ok((a, b))
        }
    }

    struct Sphere;

    impl Immersion for Sphere {
        fn signature(&self) -> Signature {
            Signature::Euclidean
        }
        fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
            Ok(Vec3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos()))
        }
        fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
            Ok((a, b))
        }
        fn frame(&self, a: f64, b: f64) -> Option<Result<Mat3, VerifyError>> {
            let e1 = Vec3::new(a.cos() * b.cos(), a.cos() * b.sin(), -a.sin());
            let e2 = Vec3::new(-b.sin(), b.cos(), 0.0);
            Some(Ok(Mat3::from_columns(&[e1, e2, e1.cross(&e2)])))
        }
    }

    #[test]
    fn lorentz_plane_is_flat_and_isometric() {
        let m = builtin("flat-lorentz").unwrap();
        let r = vertex_residuals(&Plane, &m, 0.2, 0.3, &VerifyOptions::default());
        // the flat metric has K = 0 and the residual is exact
        let r = r.unwrap();
        assert!(r.isometry < 1e-14);
        assert!(r.image_curvature.abs() < 1e-12);
        assert_eq!(Signature::Lorentz.dot(&Vec3::x(), &Vec3::x()), 1.0);
        assert_eq!(Signature::Lorentz.dot(&Vec3::y(), &Vec3::y()), -1.0);
    }

    #[test]
    fn round_sphere_residuals() {
        let m = builtin("sphere").unwrap();
        let r = vertex_residuals(&Sphere, &m, 1.0, 0.4, &VerifyOptions::default()).unwrap();
        assert!(r.isometry < 1e-10, "{r:?}");
        assert!(r.curvature < 1e-7, "{r:?}");
        assert!(r.pfaffian.unwrap() < 1e-9, "{r:?}");
    }
}
