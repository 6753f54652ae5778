//! Orthogonal 2-metrics, their Gauss curvature, and the normal-form catalog.

mod catalog;
mod profile;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numkit::{Jet2, Smooth1D};

pub use catalog::{builtin, builtin_names, catalog, CaseId, CausalType, KillingField, NormalForm};
pub use profile::{ProfileKind, QProfile};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum MetricError {
    #[error("unknown metric id `{0}`")]
    UnknownId(String),
    #[error("degenerate metric coefficient at (u, v) = ({u}, {v})")]
    Degenerate { u: f64, v: f64 },
    #[error("unsupported sign pair ({0}, {1}); expected (+,+), (+,-) or (-,+)")]
    BadSigns(i8, i8),
    #[error("empty or inverted domain")]
    BadDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricClass {
    Riemannian,
    Lorentzian,
}

/// Coordinate rectangle `[u0, u1] x [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Rect {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Rect { u, v }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u.0 && u <= self.u.1 && v >= self.v.0 && v <= self.v.1
    }

    /// The rectangle shrunk by `frac` of its width on every side.
    pub fn inset(&self, frac: f64) -> Rect {
        let du = (self.u.1 - self.u.0) * frac;
        let dv = (self.v.1 - self.v.0) * frac;
        Rect::new((self.u.0 + du, self.u.1 - du), (self.v.0 + dv, self.v.1 - dv))
    }

    /// Cell-centred `nu x nv` sample points, row-major in `u`.
    pub fn interior_grid(&self, nu: usize, nv: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            let u = self.u.0 + (self.u.1 - self.u.0) * (i as f64 + 0.5) / nu as f64;
            for j in 0..nv {
                let v = self.v.0 + (self.v.1 - self.v.0) * (j as f64 + 0.5) / nv as f64;
                out.push((u, v));
            }
        }
        out
    }

    /// Map a point of the unit square into the rectangle.
    pub fn lerp(&self, a: f64, b: f64) -> (f64, f64) {
        (
            self.u.0 + (self.u.1 - self.u.0) * a,
            self.v.0 + (self.v.1 - self.v.0) * b,
        )
    }
}

type JetFn = dyn Fn(&Jet2, &Jet2) -> Jet2 + Send + Sync;

/// A coefficient function of `(u, v)`.
#[derive(Clone)]
pub enum Coef2 {
    /// `f(u) g(v)`
    Product { u: Smooth1D, v: Smooth1D },
    /// Arbitrary expression built from jet arithmetic on the coordinate jets.
    General(Arc<JetFn>),
}

impl fmt::Debug for Coef2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef2::Product { u, v } => f.debug_struct("Product").field("u", u).field("v", v).finish(),
            Coef2::General(_) => f.write_str("General(..)"),
        }
    }
}

impl Coef2 {
    pub fn of_u(f: Smooth1D) -> Self {
        Coef2::Product {
            u: f,
            v: Smooth1D::constant(1.0),
        }
    }

    pub fn general(f: impl Fn(&Jet2, &Jet2) -> Jet2 + Send + Sync + 'static) -> Self {
        Coef2::General(Arc::new(f))
    }

    pub fn jet(&self, u: f64, v: f64) -> Jet2 {
        match self {
            Coef2::Product { u: fu, v: fv } => Jet2::from_product(&fu.derivs(u), &fv.derivs(v)),
            Coef2::General(f) => f(&Jet2::variable(u, 0, 3), &Jet2::variable(v, 1, 3)),
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            Coef2::Product { u: fu, v: fv } => fu.eval(u) * fv.eval(v),
            Coef2::General(_) => self.jet(u, v).value(),
        }
    }
}

/// `sign_u Eu^2 du^2 + sign_v Gv^2 dv^2`.
#[derive(Debug, Clone)]
pub struct OrthogonalMetric2D {
    pub eu: Coef2,
    pub gv: Coef2,
    pub sign_u: i8,
    pub sign_v: i8,
    pub domain: Rect,
}

/// Coframe data at a point: `eta1 = a dx`, `eta2 = b dy`, connection form
/// `eta12 = p dx + q dy`, where `(x, y)` is `(u, v)` or `(v, u)`.
#[derive(Debug, Clone, Copy)]
pub struct StructureJets {
    pub x_axis: usize,
    pub y_axis: usize,
    pub a: Jet2,
    pub b: Jet2,
    pub p: Jet2,
    pub q: Jet2,
    /// Gauss curvature, order 1.
    pub curvature: Jet2,
}

impl OrthogonalMetric2D {
    pub fn new(eu: Coef2, gv: Coef2, sign_u: i8, sign_v: i8, domain: Rect) -> Result<Self, MetricError> {
        if !matches!((sign_u, sign_v), (1, 1) | (1, -1) | (-1, 1)) {
            return Err(MetricError::BadSigns(sign_u, sign_v));
        }
        if !(domain.u.0 < domain.u.1 && domain.v.0 < domain.v.1) {
            return Err(MetricError::BadDomain);
        }
        Ok(OrthogonalMetric2D {
            eu,
            gv,
            sign_u,
            sign_v,
            domain,
        })
    }

    pub fn class(&self) -> MetricClass {
        if self.sign_u == self.sign_v {
            MetricClass::Riemannian
        } else {
            MetricClass::Lorentzian
        }
    }

    /// Signed diagonal components `(g_uu, g_vv)`.
    pub fn components(&self, u: f64, v: f64) -> (f64, f64) {
        let e = self.eu.eval(u, v);
        let g = self.gv.eval(u, v);
        (self.sign_u as f64 * e * e, self.sign_v as f64 * g * g)
    }

    /// Coordinate axes carrying `eta1` and `eta2`. In the Lorentzian case
    /// `eta1` goes with the positively signed direction.
    pub fn coframe_axes(&self) -> (usize, usize) {
        if self.sign_u > 0 {
            (0, 1)
        } else {
            (1, 0)
        }
    }

    pub fn structure(&self, u: f64, v: f64) -> Result<StructureJets, MetricError> {
        let eu = self.eu.jet(u, v);
        let gv = self.gv.jet(u, v);
        let small = |j: &Jet2| !(j.value().abs() > 1e-14) || !j.is_finite();
        if small(&eu) || small(&gv) {
            return Err(MetricError::Degenerate { u, v });
        }
        let (x_axis, y_axis) = self.coframe_axes();
        let (a, b) = if x_axis == 0 { (eu, gv) } else { (gv, eu) };
        let p = a.d(y_axis).div(&b);
        let bx_over_a = b.d(x_axis).div(&a);
        let (q, sign) = match self.class() {
            MetricClass::Riemannian => (-bx_over_a, 1.0),
            MetricClass::Lorentzian => (bx_over_a, -1.0),
        };
        let curl = q.d(x_axis) - p.d(y_axis);
        let curvature = curl.div(&(a * b)).scale(sign);
        if !curvature.is_finite() {
            return Err(MetricError::Degenerate { u, v });
        }
        Ok(StructureJets {
            x_axis,
            y_axis,
            a,
            b,
            p,
            q,
            curvature,
        })
    }

    /// Gauss curvature from the structure equations.
    pub fn gauss_curvature(&self, u: f64, v: f64) -> Result<f64, MetricError> {
        Ok(self.structure(u, v)?.curvature.value())
    }
}

/// JSON description of a coefficient: a bare function of `u`, or a product
/// of optional `u` and `v` factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefSpec {
    OfU(Smooth1D),
    Split(SplitCoef),
}

/// `{u?, v?}`; a missing factor is 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitCoef {
    #[serde(default)]
    pub u: Option<Smooth1D>,
    #[serde(default)]
    pub v: Option<Smooth1D>,
}

impl CoefSpec {
    fn build(self) -> Coef2 {
        match self {
            CoefSpec::OfU(f) => Coef2::of_u(f),
            CoefSpec::Split(SplitCoef { u, v }) => Coef2::Product {
                u: u.unwrap_or_else(|| Smooth1D::constant(1.0)),
                v: v.unwrap_or_else(|| Smooth1D::constant(1.0)),
            },
        }
    }
}

/// JSON record `{Eu, Gv, sign_u, sign_v, domain}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSpec {
    #[serde(rename = "Eu")]
    pub eu: CoefSpec,
    #[serde(rename = "Gv")]
    pub gv: CoefSpec,
    pub sign_u: i8,
    pub sign_v: i8,
    /// `[[u0, u1], [v0, v1]]`
    pub domain: [[f64; 2]; 2],
}

impl MetricSpec {
    pub fn build(self) -> Result<OrthogonalMetric2D, MetricError> {
        let d = self.domain;
        OrthogonalMetric2D::new(
            self.eu.build(),
            self.gv.build(),
            self.sign_u,
            self.sign_v,
            Rect::new((d[0][0], d[0][1]), (d[1][0], d[1][1])),
        )
    }
}
