use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Coef2, MetricClass, MetricError, OrthogonalMetric2D, ProfileKind, QProfile, Rect};
use crate::numkit::{NamedFn, Smooth1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    R1,
    R2,
    R3,
    R4,
    #[serde(rename = "LE-S1")]
    LeS1,
    #[serde(rename = "LE-S2")]
    LeS2,
    #[serde(rename = "LE-S3")]
    LeS3,
    #[serde(rename = "LE-T1")]
    LeT1,
    #[serde(rename = "LH-S1")]
    LhS1,
    #[serde(rename = "LH-T1")]
    LhT1,
    #[serde(rename = "LH-T2")]
    LhT2,
    #[serde(rename = "LH-T3")]
    LhT3,
}

impl CaseId {
    pub const ALL: [CaseId; 12] = [
        CaseId::R1,
        CaseId::R2,
        CaseId::R3,
        CaseId::R4,
        CaseId::LeS1,
        CaseId::LeS2,
        CaseId::LeS3,
        CaseId::LeT1,
        CaseId::LhS1,
        CaseId::LhT1,
        CaseId::LhT2,
        CaseId::LhT3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::R1 => "R1",
            CaseId::R2 => "R2",
            CaseId::R3 => "R3",
            CaseId::R4 => "R4",
            CaseId::LeS1 => "LE-S1",
            CaseId::LeS2 => "LE-S2",
            CaseId::LeS3 => "LE-S3",
            CaseId::LeT1 => "LE-T1",
            CaseId::LhS1 => "LH-S1",
            CaseId::LhT1 => "LH-T1",
            CaseId::LhT2 => "LH-T2",
            CaseId::LhT3 => "LH-T3",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = MetricError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| MetricError::UnknownId(s.to_string()))
    }
}

/// Causal character of the Killing field. In signature (+,-) a vector of
/// negative squared length is called spacelike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalType {
    Spacelike,
    Timelike,
    None,
}

/// The coordinate field `d/dv`; the arclength chart uses `v = t_scale * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KillingField {
    pub components: [f64; 2],
    pub causal: CausalType,
    pub t_scale: f64,
}

impl KillingField {
    /// `g(d/dt, d/dt)` in the `(s, t)` chart.
    pub fn sq_len_st(&self, m: &OrthogonalMetric2D, u: f64, v: f64) -> f64 {
        self.t_scale * self.t_scale * m.components(u, v).1
    }

    /// Largest component of the Lie derivative of the metric along the field.
    pub fn lie_residual(&self, m: &OrthogonalMetric2D, u: f64, v: f64) -> f64 {
        let e = m.eu.jet(u, v);
        let g = m.gv.jet(u, v);
        let [cu, cv] = self.components;
        let de = cu * e.partial(1, 0) + cv * e.partial(0, 1);
        let dg = cu * g.partial(1, 0) + cv * g.partial(0, 1);
        // L_X g for X = cu d_u + cv d_v with constant components
        (2.0 * e.value() * de).abs().max((2.0 * g.value() * dg).abs())
    }
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    pub id: CaseId,
    pub metric: OrthogonalMetric2D,
    pub class: MetricClass,
    /// +1 elliptic, -1 hyperbolic; equals sgn K.
    pub epsilon: i8,
    pub killing: CausalType,
    pub profile: QProfile,
}

fn f(func: NamedFn) -> Smooth1D {
    Smooth1D::named(func)
}

fn sq(func: NamedFn) -> Smooth1D {
    f(func).times(f(func))
}

fn ident() -> Smooth1D {
    Smooth1D::poly(vec![0.0, 1.0])
}

const V_RANGE: (f64, f64) = (0.0, 1.0);

impl NormalForm {
    /// Printed closed-form Gauss curvature at `u`.
    pub fn curvature(&self, u: f64) -> f64 {
        let mag = match self.profile.kind {
            ProfileKind::Cosh => u.cosh().powi(-4),
            ProfileKind::Sinh => u.sinh().powi(-4),
            ProfileKind::Power => u.powi(-4),
            ProfileKind::Cos => u.cos().powi(-4),
        };
        self.epsilon as f64 * mag
    }

    pub fn killing_field(&self) -> KillingField {
        KillingField {
            components: [0.0, 1.0],
            causal: self.killing,
            t_scale: 3.0,
        }
    }
}

/// Normal form `id` exactly as printed in its `(u, v)` chart.
pub fn catalog(id: CaseId) -> NormalForm {
    use CaseId::*;
    use NamedFn::*;
    let kind = match id {
        R1 | LeS1 | LhT1 => ProfileKind::Cosh,
        R2 | LeS2 | LhT2 => ProfileKind::Sinh,
        R3 | LeS3 | LhT3 => ProfileKind::Power,
        R4 | LhS1 | LeT1 => ProfileKind::Cos,
    };
    // (du coefficient, dv coefficient) before squaring
    let (eu, gv) = match kind {
        ProfileKind::Cosh => (sq(Cosh), f(Sinh)),
        ProfileKind::Sinh => (sq(Sinh), f(Cosh)),
        ProfileKind::Power => (ident(), ident()),
        ProfileKind::Cos => (sq(Cos), f(Sin)),
    };
    let u_range = match kind {
        ProfileKind::Cosh => (1e-3, 3.0),
        ProfileKind::Sinh | ProfileKind::Power => (0.05, 3.0),
        ProfileKind::Cos => (1e-3, FRAC_PI_2 - 1e-3),
    };
    let (sign_u, sign_v) = match id {
        R1 | R2 | R3 | R4 => (1, 1),
        LeS1 | LeS2 | LeS3 | LhS1 => (1, -1),
        LeT1 | LhT1 | LhT2 | LhT3 => (-1, 1),
    };
    let epsilon = match id {
        R1 | R2 | R3 | LeS1 | LeS2 | LeS3 | LeT1 => 1,
        R4 | LhS1 | LhT1 | LhT2 | LhT3 => -1,
    };
    let metric = OrthogonalMetric2D::new(
        Coef2::of_u(eu),
        Coef2::of_u(gv),
        sign_u,
        sign_v,
        Rect::new(u_range, V_RANGE),
    )
    .expect("catalog metrics are well formed");
    let class = metric.class();
    let killing = if sign_v < 0 || class == MetricClass::Riemannian {
        CausalType::Spacelike
    } else {
        CausalType::Timelike
    };
    NormalForm {
        id,
        metric,
        class,
        epsilon,
        killing,
        profile: QProfile::new(kind),
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["sphere", "hyperbolic-plane", "flat", "flat-lorentz", "perturbed-R1"]
}

/// Test metrics outside the catalog.
pub fn builtin(name: &str) -> Result<OrthogonalMetric2D, MetricError> {
    use NamedFn::*;
    let one = || Coef2::of_u(Smooth1D::constant(1.0));
    match name {
        "sphere" => OrthogonalMetric2D::new(one(), Coef2::of_u(f(Sin)), 1, 1, Rect::new((0.1, 3.0), V_RANGE)),
        "hyperbolic-plane" => {
            OrthogonalMetric2D::new(one(), Coef2::of_u(f(Sinh)), 1, 1, Rect::new((0.1, 3.0), V_RANGE))
        }
        "flat" => OrthogonalMetric2D::new(one(), one(), 1, 1, Rect::new((-1.0, 1.0), (-1.0, 1.0))),
        "flat-lorentz" => OrthogonalMetric2D::new(one(), one(), 1, -1, Rect::new((-1.0, 1.0), (-1.0, 1.0))),
        "perturbed-R1" => OrthogonalMetric2D::new(
            Coef2::of_u(sq(Cosh).times(Smooth1D::poly(vec![1.0, 0.1]))),
            Coef2::of_u(f(Sinh)),
            1,
            1,
            Rect::new((1e-3, 3.0), V_RANGE),
        ),
        other => Err(MetricError::UnknownId(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_values() {
        let r1 = catalog(CaseId::R1);
        let (guu, gvv) = r1.metric.components(1.0, 0.0);
        assert!((guu - 5.669626950043876).abs() < 1e-12);
        assert!((gvv - 1.3810978455418155).abs() < 1e-12);
        assert!((r1.curvature(1.0) - 0.1763784476141347).abs() < 1e-12);
        assert!((catalog(CaseId::R4).curvature(std::f64::consts::FRAC_PI_4) + 4.0).abs() < 1e-12);
        assert!((catalog(CaseId::LhT3).curvature(2.0) + 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn numeric_curvature_spot_checks() {
        let k = catalog(CaseId::R3).metric.gauss_curvature(2.0, 0.5).unwrap();
        assert!((k - 1.0 / 16.0).abs() < 1e-6);
        let k = catalog(CaseId::R2).metric.gauss_curvature(1.0, 0.5).unwrap();
        assert!((k - 0.5242652888812924).abs() < 1e-8);
    }

    #[test]
    fn all_forms_match_closed_curvature() {
        for id in CaseId::ALL {
            let nf = catalog(id);
            let r = nf.metric.domain.inset(0.01);
            for i in 0..=10 {
                let (u, v) = r.lerp(i as f64 / 10.0, 0.3);
                let k = nf.metric.gauss_curvature(u, v).unwrap();
                let want = nf.curvature(u);
                assert!(((k - want) / want).abs() < 1e-10, "{id} u={u}: {k} vs {want}");
                assert_eq!(want.signum() as i8, nf.epsilon);
            }
        }
    }

    #[test]
    fn killing_fields() {
        let r1 = catalog(CaseId::R1);
        let kf = r1.killing_field();
        assert_eq!(kf.causal, CausalType::Spacelike);
        assert!((kf.sq_len_st(&r1.metric, 1.0, 0.0) - 9.0 * 1.0f64.sinh().powi(2)).abs() < 1e-12);
        assert_eq!(catalog(CaseId::LhT3).killing, CausalType::Timelike);
        assert_eq!(catalog(CaseId::LeS2).killing, CausalType::Spacelike);
        for id in CaseId::ALL {
            let nf = catalog(id);
            assert!(nf.killing_field().lie_residual(&nf.metric, 0.5, 0.2) < 1e-12);
            // squared length of d/dt is the profile's q'^2 (signed)
            let q1 = nf.profile.q_derivs(0.5)[1];
            let len = nf.killing_field().sq_len_st(&nf.metric, 0.5, 0.2);
            assert!((len.abs() - q1 * q1).abs() < 1e-12, "{id}");
        }
    }

    #[test]
    fn arclength_matches_du_coefficient() {
        for id in CaseId::ALL {
            let nf = catalog(id);
            let (guu, _) = nf.metric.components(0.6, 0.0);
            let ds = nf.profile.ds_du(0.6);
            assert!((guu.abs() - ds * ds).abs() < 1e-12, "{id}");
        }
    }

    #[test]
    fn ids_roundtrip() {
        for id in CaseId::ALL {
            assert_eq!(id.as_str().parse::<CaseId>().unwrap(), id);
        }
        assert!("R9".parse::<CaseId>().is_err());
        assert!(builtin("torus").is_err());
        for n in builtin_names() {
            builtin(n).unwrap();
        }
    }
}
