//! Embeddings of `g0 = u^2 (dv^2 - du^2)` into Minkowski space R^{1,2}.
//!
//! Points of the frame bundle are written in three charts:
//! `N` with `(u, v, a, x)`, where `a` parametrizes SO(1,2); `N1` with
//! `(p, p0, q, q0, v, x)`, adapted to the first integrals of the two
//! characteristic systems; and `N2` with `(p, p0, q, q0, v, y)`, in which the
//! characteristic systems are in normal form and solutions superpose
//! additively.

mod generators;
mod pfaffian;

pub use generators::{
    iota0_printed, special_embedding, special_pq_of_uv, GenPoint, GeneratorImmersion, GeneratorPair, Iota0,
    SingularCurve, SpecialImmersion,
};
pub use pfaffian::{char_rhs, n1_forms, n1_residuals, N1Velocity};

use serde::{Deserialize, Serialize};

use crate::metrics::{Coef2, OrthogonalMetric2D, Rect};
use crate::numkit::{Mat3, NumError, Smooth1D, Vec3};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum G0Error {
    #[error("a1 must be positive, got {0}")]
    NonPositiveA1(f64),
    #[error("u must be positive in this chart, got {0}")]
    NonPositiveU(f64),
    #[error("point leaves the adapted chart: {0}")]
    OutOfChart(&'static str),
    #[error("generator third derivative must be positive; {side:?} side fails at {at}")]
    NotConvex { side: Side, at: f64 },
    #[error("eps1^2 and eps2^2 must differ")]
    EqualEpsilons,
    #[error("parameter {x} outside generator domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Below this `|p - q|` or `|p0 q0|` a point is treated as off-chart.
pub const CHART_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ACoords {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl ACoords {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        ACoords { a1, a2, a3 }
    }
}

/// The four first integrals `(p, p0, q, q0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PQ {
    pub p: f64,
    pub p0: f64,
    pub q: f64,
    pub q0: f64,
}

impl PQ {
    pub fn new(p: f64, p0: f64, q: f64, q0: f64) -> Self {
        PQ { p, p0, q, q0 }
    }

    pub fn check(&self) -> Result<(), G0Error> {
        if !((self.p - self.q).abs() > CHART_EPS) {
            return Err(G0Error::OutOfChart("p = q"));
        }
        if !((self.p0 * self.q0).abs() > CHART_EPS) {
            return Err(G0Error::OutOfChart("p0 q0 = 0"));
        }
        Ok(())
    }

    /// `u = -p0 q0 (p - q) / 2`.
    pub fn u(&self) -> f64 {
        -0.5 * self.p0 * self.q0 * (self.p - self.q)
    }
}

/// Point of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePoint {
    pub u: f64,
    pub v: f64,
    pub a: ACoords,
    pub x: Vec3,
}

/// Point of `N1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PQPoint {
    pub pq: PQ,
    pub v: f64,
    pub x: Vec3,
}

/// Point of `N2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct N2Point {
    pub pq: PQ,
    pub v: f64,
    pub y: Vec3,
}

/// Point on an integral curve of one characteristic system: `w` is `p` on
/// the plus side and `q` on the minus side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoint {
    pub w: f64,
    pub w0: f64,
    pub v: f64,
    pub y: Vec3,
}

impl CharPoint {
    pub fn shifted(&self, dv: f64, dy: Vec3) -> CharPoint {
        CharPoint {
            v: self.v + dv,
            y: self.y + dy,
            ..*self
        }
    }
}

/// `g0 = u^2 (dv^2 - du^2)` on both sides of `u = 0`; the metric is even in
/// `u`, and the embeddings built here reach `u < 0` as well.
pub fn g0_metric() -> OrthogonalMetric2D {
    let u = Coef2::of_u(Smooth1D::poly(vec![0.0, 1.0]));
    OrthogonalMetric2D::new(u.clone(), u, -1, 1, Rect::new((-1e6, 1e6), (-1e6, 1e6))).expect("valid signs and domain")
}

/// Closed-form SO(1,2) element for coordinates `a`.
pub fn so12_from_a(a: ACoords) -> Result<Mat3, G0Error> {
    let ACoords { a1, a2, a3 } = a;
    if !(a1 > 0.0) {
        return Err(G0Error::NonPositiveA1(a1));
    }
    let c = (a2 * a3 + 1.0).powi(2);
    let b2 = a2 * a2;
    let s1 = a1 * a1 * (a3 * a3 + 1.0);
    let s2 = a1 * a1 * (a3 * a3 - 1.0);
    Ok(Mat3::new(
        (c + b2 + s1) / (2.0 * a1),
        (c + b2 - s1) / (2.0 * a1),
        -a2 * (a3 * a3 + 1.0) - a3,
        (c - b2 + s2) / (2.0 * a1),
        (c - b2 - s2) / (2.0 * a1),
        -a2 * (a3 * a3 - 1.0) - a3,
        (-a3 * (b2 + a1 * a1) - a2) / a1,
        (-a3 * (b2 - a1 * a1) - a2) / a1,
        2.0 * a2 * a3 + 1.0,
    ))
}

pub fn first_integrals(u: f64, a: ACoords) -> Result<PQ, G0Error> {
    let ACoords { a1, a2, a3 } = a;
    if !(u > 0.0) {
        return Err(G0Error::NonPositiveU(u));
    }
    if !(a1 > 0.0) {
        return Err(G0Error::NonPositiveA1(a1));
    }
    let (m, pl) = (a1 - a2, a1 + a2);
    if m == 0.0 || pl == 0.0 {
        return Err(G0Error::OutOfChart("a1 = +-a2"));
    }
    let r = (u / a1).sqrt();
    Ok(PQ {
        p: (a3 * m - 1.0) / m,
        p0: r * m,
        q: (a3 * pl + 1.0) / pl,
        q0: r * pl,
    })
}

/// The SO(1,2) element in `N1` coordinates; its columns are the frame
/// `e1, e2, e3`.
pub fn so12_from_pq(pq: PQ) -> Result<Mat3, G0Error> {
    pq.check()?;
    let PQ { p, p0, q, q0 } = pq;
    let (pp, qq) = (p0 * p0, q0 * q0);
    let d = p0 * q0 * (p - q);
    Ok(Mat3::new(
        -(pp * (p * p + 1.0) + qq * (q * q + 1.0)) / (2.0 * d),
        (p * q + 1.0) / (p - q),
        -(pp * (p * p + 1.0) - qq * (q * q + 1.0)) / (2.0 * d),
        -(pp * (p * p - 1.0) + qq * (q * q - 1.0)) / (2.0 * d),
        (p * q - 1.0) / (p - q),
        -(pp * (p * p - 1.0) - qq * (q * q - 1.0)) / (2.0 * d),
        (pp * p + qq * q) / d,
        -(p + q) / (p - q),
        (pp * p - qq * q) / d,
    ))
}

/// The normal `e3`, the third column of [`so12_from_pq`].
pub fn e3_from_pq(pq: PQ) -> Result<Vec3, G0Error> {
    Ok(so12_from_pq(pq)?.column(2).into_owned())
}

pub fn phi(n: &FramePoint) -> Result<PQPoint, G0Error> {
    Ok(PQPoint {
        pq: first_integrals(n.u, n.a)?,
        v: n.v,
        x: n.x,
    })
}

pub fn phi_inv(n1: &PQPoint) -> Result<FramePoint, G0Error> {
    let pq = n1.pq;
    pq.check()?;
    let u = pq.u();
    if !(u > 0.0) {
        return Err(G0Error::NonPositiveU(u));
    }
    let s = pq.p0 + pq.q0;
    if !(s > 0.0) {
        return Err(G0Error::OutOfChart("p0 + q0 <= 0"));
    }
    let a1 = s * s / (4.0 * u);
    let a2 = (pq.q0 * pq.q0 - pq.p0 * pq.p0) / (4.0 * u);
    let a3 = pq.p + 1.0 / (a1 - a2);
    Ok(FramePoint {
        u,
        v: n1.v,
        a: ACoords { a1, a2, a3 },
        x: n1.x,
    })
}

/// The cubic corrections relating `x` and `y`: `y = x + psi_shift`.
fn psi_shift(pq: PQ) -> Vec3 {
    let PQ { p, p0, q, q0 } = pq;
    let c = 0.125 * p0 * p0 * q0 * q0;
    Vec3::new(
        -c * (p - q) * (1.0 + p * q),
        c * (p - q) * (1.0 - p * q),
        c * (p * p - q * q),
    )
}

pub fn psi(n1: &PQPoint) -> N2Point {
    N2Point {
        pq: n1.pq,
        v: n1.v,
        y: n1.x + psi_shift(n1.pq),
    }
}

pub fn psi_inv(n2: &N2Point) -> PQPoint {
    PQPoint {
        pq: n2.pq,
        v: n2.v,
        x: n2.y - psi_shift(n2.pq),
    }
}

/// Combine a plus-side and a minus-side point: `(p, p0)` from the first,
/// `(q, q0)` from the second, `v` and `y` added.
pub fn superpose(plus: &CharPoint, minus: &CharPoint) -> Result<N2Point, G0Error> {
    let pq = PQ::new(plus.w, plus.w0, minus.w, minus.w0);
    pq.check()?;
    Ok(N2Point {
        pq,
        v: plus.v + minus.v,
        y: plus.y + minus.y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Signature;

    fn lorentz_defect(g: &Mat3) -> f64 {
        let eta = Signature::Lorentz.gram();
        (g.transpose() * eta * g - eta).abs().max()
    }

    #[test]
    fn identity_and_printed_entry() {
        assert_eq!(so12_from_a(ACoords::new(1.0, 0.0, 0.0)).unwrap(), Mat3::identity());
        assert_eq!(so12_from_a(ACoords::new(1.0, 0.0, 1.0)).unwrap()[(2, 2)], 1.0);
        let g = so12_from_a(ACoords::new(2.0, 1.0, 1.0)).unwrap();
        assert!(lorentz_defect(&g) < 1e-12);
        assert!((g.determinant() - 1.0).abs() < 1e-12);
        assert!(so12_from_a(ACoords::new(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn first_integral_values() {
        let pq = first_integrals(1.0, ACoords::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(pq, PQ::new(-1.0, 1.0, 1.0, 1.0));
        let pq = first_integrals(4.0, ACoords::new(2.0, 1.0, 1.0)).unwrap();
        let r2 = 2f64.sqrt();
        assert!((pq.p - 0.0).abs() < 1e-15 && (pq.p0 - r2).abs() < 1e-15);
        assert!((pq.q - 4.0 / 3.0).abs() < 1e-15 && (pq.q0 - 3.0 * r2).abs() < 1e-14);
        assert!((pq.u() - 4.0).abs() < 1e-14);
        assert!(first_integrals(-1.0, ACoords::new(1.0, 0.0, 0.0)).is_err());
        assert!(first_integrals(1.0, ACoords::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn pq_chart_agrees() {
        let g = so12_from_pq(PQ::new(-1.0, 1.0, 1.0, 1.0)).unwrap();
        assert!((g - Mat3::identity()).abs().max() < 1e-12);
        let a = ACoords::new(1.7, -0.4, 0.3);
        let pq = first_integrals(2.5, a).unwrap();
        let d = so12_from_pq(pq).unwrap() - so12_from_a(a).unwrap();
        assert!(d.abs().max() < 1e-12);
    }

    #[test]
    fn e3_on_lightlike_plane() {
        let e3 = e3_from_pq(PQ::new(0.5, 1.3, -0.7, 1.3)).unwrap();
        assert!((e3[0] + 0.5 * (0.5 - 0.7)).abs() < 1e-14);
        assert!((e3[0] - e3[1]).abs() < 1e-14);
        assert!((e3[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psi_hand_values() {
        let n1 = PQPoint {
            pq: PQ::new(1.0, 1.0, 0.0, 1.0),
            v: 0.0,
            x: Vec3::zeros(),
        };
        let y = psi(&n1).y;
        assert_eq!(y, Vec3::new(-0.125, 0.125, 0.125));
        assert_eq!(psi_inv(&psi(&n1)), n1);
    }

    #[test]
    fn phi_roundtrip() {
        let n = FramePoint {
            u: 1.3,
            v: -0.2,
            a: ACoords::new(0.8, 0.3, -1.1),
            x: Vec3::new(1.0, 2.0, 3.0),
        };
        let back = phi_inv(&phi(&n).unwrap()).unwrap();
        assert!((back.u - n.u).abs() < 1e-12);
        assert!((back.a.a1 - n.a.a1).abs() < 1e-12);
        assert!((back.a.a2 - n.a.a2).abs() < 1e-12);
        assert!((back.a.a3 - n.a.a3).abs() < 1e-12);
    }

    #[test]
    fn superposition_of_example_curves() {
        // the two split curves of the worked Cauchy example, at t = 1
        let plus = CharPoint {
            w: 1.0,
            w0: 1.0,
            v: 0.75,
            y: Vec3::new(15.0 / 24.0, 12.0 / 24.0, 3.0 / 16.0),
        };
        let minus = CharPoint {
            w: -2.0,
            w0: 1.0,
            v: 0.75,
            y: Vec3::new(15.0 / 24.0, 0.5, 3.0 / 16.0),
        };
        let n2 = superpose(&plus, &minus).unwrap();
        assert!((n2.v - 1.5).abs() < 1e-15);
        assert!((n2.y - Vec3::new(1.25, 1.0, 0.375)).norm() < 1e-15);
        let c = Vec3::new(0.3, -1.0, 2.0);
        let again = superpose(&plus.shifted(0.4, c), &minus.shifted(-0.4, -c)).unwrap();
        assert!((again.y - n2.y).norm() < 1e-15 && (again.v - n2.v).abs() < 1e-15);
        let bad = CharPoint { w: -2.0, ..plus };
        assert!(superpose(&bad, &minus).is_err());
    }
}
