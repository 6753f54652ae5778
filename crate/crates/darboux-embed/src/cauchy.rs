//! The geometric Cauchy problem for `g0`: given a curve in R^{1,2}, find the
//! embedded surface containing it whose normal along the curve lies in the
//! lightlike plane `z1 = z2`.
//!
//! Pipeline: lift the curve to `N1` with `p0 = q0 = r`, map to `N2`, split
//! the lifted curve into one integral curve of each characteristic system
//! by quadrature, superpose, and map back.

use std::str::FromStr;

use nalgebra::{Matrix3x2, Vector3};
use serde::{Deserialize, Serialize};

use crate::g0::{
    char_rhs, e3_from_pq, g0_metric, n1_residuals, psi, psi_inv, so12_from_pq, superpose, G0Error, N1Velocity, PQPoint,
    Side, SingularCurve, PQ,
};
use crate::mesh::{MeshSummary, ParamGrid, SurfaceMesh};
use crate::numkit::{derivative5, Mat3, NumError, OdeConfig, Signature, Smooth1D, TwoSided, Vec3};
use crate::par::Exec;
use crate::verify::{Immersion, VerifyError, VerifyOptions};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum CauchyError {
    #[error("need a < t0 < b, got [{a}, {b}] with t0 = {t0}")]
    BadDomain { a: f64, b: f64, t0: f64 },
    #[error("curve is not admissible at t = {t}: {reason}")]
    NotAdmissible { t: f64, reason: &'static str },
    #[error("{name} must be {what}, got {value}")]
    BadParameter {
        name: &'static str,
        what: &'static str,
        value: f64,
    },
    #[error("lift breaks down at t = {t}: {reason}")]
    LiftBreakdown { t: f64, reason: String },
    #[error("range [{a}, {b}] is not inside the lifted interval [{lo}, {hi}]")]
    OutsideLift { a: f64, b: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    G0(#[from] G0Error),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Lift and split stop when `r` or `|s|` falls below this.
pub const BREAKDOWN_EPS: f64 = 1e-8;

/// Below this `|x1' - x2'|` or `|x3'|` a curve is not admissible.
pub const ADMISSIBLE_EPS: f64 = 1e-10;

const DENSE_SAMPLES: usize = 2001;

/// One coordinate of a curve: polynomial coefficients (constant first) or
/// any smooth function expression.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentSpec {
    Coeffs(Vec<f64>),
    Smooth(Smooth1D),
}

impl ComponentSpec {
    fn build(self) -> Smooth1D {
        match self {
            ComponentSpec::Coeffs(c) => Smooth1D::poly(c),
            ComponentSpec::Smooth(f) => f,
        }
    }
}

/// JSON record `{x1, x2, x3, domain, t0?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSpec {
    pub x1: ComponentSpec,
    pub x2: ComponentSpec,
    pub x3: ComponentSpec,
    pub domain: [f64; 2],
    #[serde(default)]
    pub t0: Option<f64>,
}

impl CurveSpec {
    /// Build the curve; `t0` defaults to the midpoint of the domain.
    pub fn build(self) -> Result<InitialCurve, CauchyError> {
        let [a, b] = self.domain;
        let t0 = self.t0.unwrap_or(0.5 * (a + b));
        InitialCurve::new([self.x1.build(), self.x2.build(), self.x3.build()], (a, b), t0)
    }
}

/// Value and first two derivatives of the curve at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub x: Vec3,
    pub d1: Vec3,
    pub d2: Vec3,
}

impl CurveJet {
    /// `x1' - x2'`.
    pub fn null_speed(&self) -> f64 {
        self.d1[0] - self.d1[1]
    }

    /// `c = x3' / (x2' - x1')`, the common part of `p` and `q`.
    pub fn c(&self) -> f64 {
        -self.d1[2] / self.null_speed()
    }

    pub fn dc(&self) -> f64 {
        let d = self.d1[1] - self.d1[0];
        let dd = self.d2[1] - self.d2[0];
        (self.d2[2] * d - self.d1[2] * dd) / (d * d)
    }
}

/// The Cauchy datum `t -> (x1, x2, x3)(t)` with base point `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCurve {
    pub x: [Smooth1D; 3],
    pub domain: (f64, f64),
    pub t0: f64,
}

impl InitialCurve {
    pub fn new(x: [Smooth1D; 3], domain: (f64, f64), t0: f64) -> Result<Self, CauchyError> {
        let (a, b) = domain;
        if !(a < t0 && t0 < b) {
            return Err(CauchyError::BadDomain { a, b, t0 });
        }
        Ok(InitialCurve { x, domain, t0 })
    }

    pub fn with_t0(self, t0: f64) -> Result<Self, CauchyError> {
        InitialCurve::new(self.x, self.domain, t0)
    }

    pub fn jet(&self, t: f64) -> CurveJet {
        let d = self.x.each_ref().map(|f| f.derivs(t));
        CurveJet {
            x: Vec3::new(d[0][0], d[1][0], d[2][0]),
            d1: Vec3::new(d[0][1], d[1][1], d[2][1]),
            d2: Vec3::new(d[0][2], d[1][2], d[2][2]),
        }
    }

    pub fn position(&self, t: f64) -> Vec3 {
        self.jet(t).x
    }

    fn samples(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let (a, b) = self.domain;
        (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
    }

    fn check_at(&self, t: f64) -> Result<CurveJet, CauchyError> {
        let j = self.jet(t);
        if !(j.null_speed().abs() > ADMISSIBLE_EPS) {
            return Err(CauchyError::NotAdmissible { t, reason: "x1' = x2'" });
        }
        if !(j.d1[2].abs() > ADMISSIBLE_EPS) {
            return Err(CauchyError::NotAdmissible { t, reason: "x3' = 0" });
        }
        Ok(j)
    }
}

/// The worked curve `((3t + 4t^3)/8, (3t - 4t^3)/8, 3t^2/4)` on `[0.5, 2.5]`
/// with base point 1. Its lift from `r0 = 1` is `r = t`, `s = 3/(2t)`.
pub fn reference_curve() -> InitialCurve {
    InitialCurve::new(
        [
            Smooth1D::poly(vec![0.0, 0.375, 0.0, 0.5]),
            Smooth1D::poly(vec![0.0, 0.375, 0.0, -0.5]),
            Smooth1D::poly(vec![0.0, 0.0, 0.75]),
        ],
        (0.5, 2.5),
        1.0,
    )
    .expect("valid domain")
}

/// Closed form of the surface through [`reference_curve`] in `g0`
/// coordinates; the curve sits at `(u, v) = (-3t/2, 3t/2)`.
pub fn reference_surface(u: f64, v: f64) -> Vec3 {
    let cubic = 16.0 * u.powi(3) + 60.0 * u * u * v + 48.0 * u * v * v + 20.0 * v.powi(3);
    let lin = 108.0 * u + 135.0 * v;
    Vec3::new(
        (lin + cubic) / 108.0,
        (lin - cubic) / 108.0,
        (5.0 * u * u + 8.0 * u * v + 5.0 * v * v) / 6.0,
    )
}

/// `(u, v)` of the reference surface at curve parameters `(t1, t2)`.
pub fn reference_chart(t1: f64, t2: f64) -> (f64, f64) {
    (-(2.0 * t1 + t2) / 2.0, (t1 + 2.0 * t2) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub min_null_speed: f64,
    pub min_dx3: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Dense-sample check of `x1' != x2'` and `x3' != 0` over the closed domain.
pub fn validate(curve: &InitialCurve) -> Admissibility {
    let (mut m12, mut m3) = (f64::INFINITY, f64::INFINITY);
    for t in curve.samples(DENSE_SAMPLES) {
        let j = curve.jet(t);
        m12 = m12.min(j.null_speed().abs());
        m3 = m3.min(j.d1[2].abs());
    }
    Admissibility {
        min_null_speed: m12,
        min_dx3: m3,
        samples: DENSE_SAMPLES,
        pass: m12 > ADMISSIBLE_EPS && m3 > ADMISSIBLE_EPS,
    }
}

/// Residual of the condition a curve must satisfy to be parametrized so
/// that its lift has `r(t) = t`.
pub fn constraint_residual(curve: &InitialCurve, t: f64) -> f64 {
    constraint_terms(curve, t).0
}

/// The residual and the sum of the magnitudes of its three terms.
fn constraint_terms(curve: &InitialCurve, t: f64) -> (f64, f64) {
    let j = curve.jet(t);
    let d = j.null_speed();
    let sq = j.d1[0].powi(2) - j.d1[1].powi(2) - j.d1[2].powi(2);
    let terms = [
        -4.0 * sq * t.powi(6),
        2.0 * d.powi(4),
        -d.powi(3) * (j.d2[0] - j.d2[1]) * t,
    ];
    // the first term cancels inside `sq`, so weigh it by its summands
    let sq_mag = j.d1[0].powi(2) + j.d1[1].powi(2) + j.d1[2].powi(2);
    let scale = 4.0 * sq_mag * t.powi(6) + terms[1].abs() + terms[2].abs();
    (terms.iter().sum(), scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub max: f64,
    pub at: f64,
    /// Largest residual divided by the size of its terms; rounding alone
    /// leaves this near machine precision for a curve that satisfies it.
    pub relative: f64,
}

pub fn max_constraint_residual(curve: &InitialCurve) -> ConstraintReport {
    let mut out = ConstraintReport {
        max: 0.0,
        at: curve.t0,
        relative: 0.0,
    };
    for t in curve.samples(DENSE_SAMPLES) {
        let (r, scale) = constraint_terms(curve, t);
        if r.abs() > out.max {
            out.max = r.abs();
            out.at = t;
        }
        out.relative = out.relative.max(r.abs() / scale.max(f64::MIN_POSITIVE));
    }
    out
}

/// The two algebraic relations between `(p, p0, q, q0)`, the curve speed
/// and a normal-plane parameter `lambda`; both vanish for admissible lifts.
/// With `lambda = 1` they reduce to `p0 = q0` and `(x1' - x2')(p + q) + 2 x3' = 0`.
pub fn lambda_relations(pq: PQ, lambda: f64, dx: Vec3) -> [f64; 2] {
    let PQ { p, p0, q, q0 } = pq;
    let (lm, lp) = (lambda - 1.0, lambda + 1.0);
    [
        p0 * p0 * (lm * p * p - lp) - q0 * q0 * (lm * q * q - lp),
        lm * dx[2] * p * q + (lambda * dx[0] - dx[1]) * (p + q) + lp * dx[2],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftMethod {
    /// Solve the `x` forms of the `N1` system for `(r', s')` at each step.
    #[default]
    DirectResidual,
    /// Closed-form ODEs for `(r, s, v)` with the `(x1' - x2')^2` factor.
    PrintedOde,
    /// The same ODEs with `(x1' + x2')^2` in place of `(x1' - x2')^2`;
    /// kept to show that this variant does not reproduce the worked example.
    PrintedVerbatim,
}

impl LiftMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            LiftMethod::DirectResidual => "direct-residual",
            LiftMethod::PrintedOde => "printed-ode",
            LiftMethod::PrintedVerbatim => "printed-verbatim",
        }
    }
}

impl FromStr for LiftMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" | "direct-residual" => Ok(LiftMethod::DirectResidual),
            "printed" | "printed-ode" => Ok(LiftMethod::PrintedOde),
            "printed-verbatim" => Ok(LiftMethod::PrintedVerbatim),
            _ => Err(format!("unknown lift method '{s}' (direct, printed, printed-verbatim)")),
        }
    }
}

/// `(r', s', v')` at `(t, r, s)`.
pub fn lift_slopes(method: LiftMethod, jet: &CurveJet, r: f64, s: f64) -> Option<[f64; 3]> {
    let d = jet.null_speed();
    if !(d.abs() > ADMISSIBLE_EPS) || !(r.abs() > 0.0) || !(s.abs() > 0.0) {
        return None;
    }
    let dx = jet.d1;
    let out = match method {
        LiftMethod::DirectResidual => {
            let c = jet.c();
            let dc = jet.dc();
            let pq = PQ::new(c + s, r, c - s, r);
            let zero = N1Velocity {
                dp: 0.0,
                dp0: 0.0,
                dq: 0.0,
                dq0: 0.0,
                dv: 0.0,
                dx: Vec3::zeros(),
            };
            // each residual is affine in (s', r'); recover the linear parts
            let base = n1_residuals(
                pq,
                &N1Velocity {
                    dp: dc,
                    dq: dc,
                    dx,
                    ..zero
                },
            );
            let ds = n1_residuals(
                pq,
                &N1Velocity {
                    dp: 1.0,
                    dq: -1.0,
                    ..zero
                },
            );
            let dr = n1_residuals(
                pq,
                &N1Velocity {
                    dp0: 1.0,
                    dq0: 1.0,
                    ..zero
                },
            );
            let a = Matrix3x2::new(ds[1], dr[1], ds[2], dr[2], ds[3], dr[3]);
            let b = -Vector3::new(base[1], base[2], base[3]);
            let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
            let (s1, r1) = (sol[0], sol[1]);
            [r1, s1, -r * r * s1]
        }
        LiftMethod::PrintedOde | LiftMethod::PrintedVerbatim => {
            let r1 = d / (2.0 * r.powi(3) * s);
            let tail = match method {
                LiftMethod::PrintedOde => d * d,
                _ => (dx[0] + dx[1]).powi(2),
            };
            let bracket = (dx[1] * dx[1] + dx[2] * dx[2] - dx[0] * dx[0]) / (s * s) - tail;
            let s1 = bracket / (2.0 * d * r.powi(4));
            let v1 = -bracket / (2.0 * d * r * r);
            [r1, s1, v1]
        }
    };
    out.iter().all(|x| x.is_finite()).then_some(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftOptions {
    /// `r(t0)`.
    pub r0: f64,
    /// `r'(t0)`, used to fix `s(t0)` when `s0` is not given.
    pub dr0: f64,
    pub s0: Option<f64>,
    /// `v(t0)`; the surface does not depend on it.
    pub v0: f64,
    pub method: LiftMethod,
    pub ode: OdeConfig,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            r0: 1.0,
            dr0: 1.0,
            s0: None,
            v0: 0.0,
            method: LiftMethod::DirectResidual,
            ode: OdeConfig::default().with_tol(1e-12).with_max_step(2e-3),
        }
    }
}

/// Lifted curve in `N1` at one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftState {
    pub t: f64,
    pub r: f64,
    pub s: f64,
    pub v: f64,
    pub c: f64,
}

impl LiftState {
    pub fn p(&self) -> f64 {
        self.c + self.s
    }

    pub fn q(&self) -> f64 {
        self.c - self.s
    }

    pub fn pq(&self) -> PQ {
        PQ::new(self.p(), self.r, self.q(), self.r)
    }
}

/// The lift of a curve, with state `[r, s, v]` integrated both ways from `t0`.
#[derive(Debug, Clone)]
pub struct Lift {
    pub method: LiftMethod,
    pub curve: InitialCurve,
    pub traj: TwoSided,
    pub s0: f64,
    /// Where a run stopped early because `r` or `s` reached zero.
    pub breakdown: Option<f64>,
}

pub fn lift(curve: &InitialCurve, opts: &LiftOptions) -> Result<Lift, CauchyError> {
    if !(opts.r0 > 0.0) {
        return Err(CauchyError::BadParameter {
            name: "r0",
            what: "positive",
            value: opts.r0,
        });
    }
    let t0 = curve.t0;
    let j0 = curve.check_at(t0)?;
    let s0 = match opts.s0 {
        Some(s) => s,
        None => {
            if !(opts.dr0 != 0.0 && opts.dr0.is_finite()) {
                return Err(CauchyError::BadParameter {
                    name: "dr0",
                    what: "nonzero",
                    value: opts.dr0,
                });
            }
            j0.null_speed() / (2.0 * opts.r0.powi(3) * opts.dr0)
        }
    };
    if !(s0.abs() > BREAKDOWN_EPS) {
        return Err(CauchyError::BadParameter {
            name: "s0",
            what: "nonzero",
            value: s0,
        });
    }
    let method = opts.method;
    let rhs = |t: f64, y: &[f64]| match lift_slopes(method, &curve.jet(t), y[0], y[1]) {
        Some(d) => d.to_vec(),
        None => vec![f64::NAN; 3],
    };
    let stop = |_: f64, y: &[f64]| !(y[0] > BREAKDOWN_EPS) || !(y[1].abs() > BREAKDOWN_EPS);
    let traj = TwoSided::solve_until(&rhs, t0, &[opts.r0, s0, opts.v0], curve.domain, &opts.ode, &stop).map_err(
        |e| match e {
            NumError::IntegrationFailure { t, reason, .. } => CauchyError::LiftBreakdown { t, reason },
            e => e.into(),
        },
    )?;
    let breakdown = traj.fwd.halted_at.or(traj.bwd.halted_at);
    Ok(Lift {
        method,
        curve: curve.clone(),
        traj,
        s0,
        breakdown,
    })
}

impl Lift {
    /// Interval on which the lift exists.
    pub fn span(&self) -> (f64, f64) {
        self.traj.span()
    }

    pub fn state(&self, t: f64) -> Result<LiftState, CauchyError> {
        if !self.traj.covers(t) {
            let (lo, hi) = self.span();
            return Err(CauchyError::OutsideLift { a: t, b: t, lo, hi });
        }
        let y = self.traj.eval(t);
        Ok(LiftState {
            t,
            r: y[0],
            s: y[1],
            v: y[2],
            c: self.curve.jet(t).c(),
        })
    }

    pub fn pq_point(&self, t: f64) -> Result<PQPoint, CauchyError> {
        let st = self.state(t)?;
        Ok(PQPoint {
            pq: st.pq(),
            v: st.v,
            x: self.curve.position(t),
        })
    }

    /// `(r', s', v')` from the lift equations at the interpolated state.
    pub fn slopes(&self, t: f64) -> Result<[f64; 3], CauchyError> {
        let st = self.state(t)?;
        lift_slopes(self.method, &self.curve.jet(t), st.r, st.s).ok_or_else(|| CauchyError::LiftBreakdown {
            t,
            reason: "slopes undefined".into(),
        })
    }

    fn fd_step(t: f64) -> f64 {
        1e-3 * t.abs().max(1.0)
    }

    /// Residuals of the four `N1` forms on the lifted velocity, with the
    /// velocity of `(p, p0, q, q0, v)` taken by finite differences of the
    /// dense lift and `x'` exact.
    pub fn form_residuals(&self, t: f64) -> Result<[f64; 4], CauchyError> {
        let h = Self::fd_step(t);
        let st = self.state(t)?;
        let comp = |f: fn(&LiftState) -> f64| -> Result<f64, CauchyError> {
            for k in [-2.0, 2.0] {
                self.state(t + k * h)?;
            }
            Ok(derivative5(|x| self.state(x).map(|s| f(&s)).unwrap_or(f64::NAN), t, h))
        };
        let dr = comp(|s| s.r)?;
        let vel = N1Velocity {
            dp: comp(|s| s.p())?,
            dp0: dr,
            dq: comp(|s| s.q())?,
            dq0: dr,
            dv: comp(|s| s.v)?,
            dx: self.curve.jet(t).d1,
        };
        Ok(n1_residuals(st.pq(), &vel))
    }

    /// `|v' + r^2 s'|` with finite-difference derivatives.
    pub fn identity_residual(&self, t: f64) -> Result<f64, CauchyError> {
        let h = Self::fd_step(t);
        for k in [-2.0, 2.0] {
            self.state(t + k * h)?;
        }
        let st = self.state(t)?;
        let d = |i: usize| derivative5(|x| self.traj.eval(x)[i], t, h);
        Ok((d(2) + st.r * st.r * d(1)).abs())
    }

    /// Parameters in the interior of the span, away from the stencil edge.
    pub fn interior_samples(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.span();
        let (lo, hi) = (lo + 3.0 * Self::fd_step(lo), hi - 3.0 * Self::fd_step(hi));
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
            .collect()
    }
}

/// Split the lifted curve into a plus and a minus characteristic curve
/// whose superposition is the lift, with `v` and `y` divided evenly at `t0`.
pub fn split(lift: &Lift, cfg: &OdeConfig) -> Result<(SingularCurve, SingularCurve), CauchyError> {
    let t0 = lift.curve.t0;
    let n2 = psi(&lift.pq_point(t0)?);
    let st = lift.state(t0)?;
    let (v_half, y_half) = (0.5 * n2.v, 0.5 * n2.y);
    let span = lift.span();
    let one = |side: Side| -> Result<SingularCurve, CauchyError> {
        let w_init = match side {
            Side::Plus => st.p(),
            Side::Minus => st.q(),
        };
        let rhs = |t: f64, y: &[f64]| {
            let jet = lift.curve.jet(t);
            let Ok(state) = lift.state(t) else {
                return vec![f64::NAN; 6];
            };
            let Some([dr, ds, _]) = lift_slopes(lift.method, &jet, state.r, state.s) else {
                return vec![f64::NAN; 6];
            };
            let dw = match side {
                Side::Plus => jet.dc() + ds,
                Side::Minus => jet.dc() - ds,
            };
            let (dv, dy) = char_rhs(side, y[0], y[1]);
            vec![dw, dr, dv * dw, dy[0] * dw, dy[1] * dw, dy[2] * dw]
        };
        let y0 = [w_init, st.r, v_half, y_half[0], y_half[1], y_half[2]];
        let traj = TwoSided::solve_until(&rhs, t0, &y0, span, cfg, &|_: f64, _: &[f64]| false)?;
        Ok(SingularCurve::Sampled { side, traj })
    };
    Ok((one(Side::Plus)?, one(Side::Minus)?))
}

/// Largest component of `sigma_plus(t) * sigma_minus(t) - sigma(t)` in `N2`.
pub fn conservation_residual(
    lift: &Lift,
    plus: &SingularCurve,
    minus: &SingularCurve,
    t: f64,
) -> Result<f64, CauchyError> {
    let want = psi(&lift.pq_point(t)?);
    let (a, b) = (plus.at(t)?, minus.at(t)?);
    let got = [
        a.w,
        a.w0,
        b.w,
        b.w0,
        a.v + b.v,
        a.y[0] + b.y[0],
        a.y[1] + b.y[1],
        a.y[2] + b.y[2],
    ];
    let PQ { p, p0, q, q0 } = want.pq;
    let exp = [p, p0, q, q0, want.v, want.y[0], want.y[1], want.y[2]];
    Ok(got.iter().zip(&exp).fold(0.0f64, |m, (g, e)| m.max((g - e).abs())))
}

/// The surface `(t1, t2) -> x` obtained by superposing the two split curves.
pub struct CauchyImmersion<'a> {
    pub plus: &'a SingularCurve,
    pub minus: &'a SingularCurve,
}

impl CauchyImmersion<'_> {
    pub fn point(&self, t1: f64, t2: f64) -> Result<PQPoint, G0Error> {
        Ok(psi_inv(&superpose(&self.plus.at(t1)?, &self.minus.at(t2)?)?))
    }
}

impl Immersion for CauchyImmersion<'_> {
    fn signature(&self) -> Signature {
        Signature::Lorentz
    }

    fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
        self.point(a, b).map(|n| n.x).map_err(|e| VerifyError::eval(a, b, e))
    }

    fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
        self.point(a, b)
            .map(|n| (n.pq.u(), n.v))
            .map_err(|e| VerifyError::eval(a, b, e))
    }

    fn frame(&self, a: f64, b: f64) -> Option<Result<Mat3, VerifyError>> {
        Some(
            self.point(a, b)
                .and_then(|n| so12_from_pq(n.pq))
                .map_err(|e| VerifyError::eval(a, b, e)),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyOptions {
    pub lift: LiftOptions,
    /// Vertex counts along `t1` and `t2`.
    pub grid: [usize; 2],
    /// Parameter range for both `t1` and `t2`; defaults to the lifted span
    /// less the reach of the verification stencils.
    pub range: Option<(f64, f64)>,
    pub verify: VerifyOptions,
    pub exec: Exec,
    /// Samples along the diagonal and the lift for the curve checks.
    pub samples: usize,
}

impl Default for CauchyOptions {
    fn default() -> Self {
        CauchyOptions {
            lift: LiftOptions::default(),
            grid: [41, 41],
            range: None,
            verify: VerifyOptions::default(),
            exec: Exec::default(),
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    pub method: LiftMethod,
    pub t0: f64,
    pub r0: f64,
    pub s0: f64,
    pub v0: f64,
    pub lifted_span: (f64, f64),
    pub breakdown: Option<f64>,
    pub range: (f64, f64),
    pub admissibility: Admissibility,
    pub constraint: ConstraintReport,
    /// Largest `N1` form residual along the lift.
    pub lift_forms: f64,
    /// Largest `|v' + r^2 s'|` along the lift.
    pub lift_identity: f64,
    /// Largest component of `sigma_plus * sigma_minus - sigma`.
    pub conservation: f64,
    /// Largest `|x(t, t) - gamma(t)|`.
    pub diagonal: f64,
    /// Largest deviation of `e3` along the curve from `(-(p+q)/2, -(p+q)/2, 1)`.
    pub normal_plane: f64,
    /// Largest `|<gamma', e3>|`.
    pub normal_tangent: f64,
    pub mesh: MeshSummary,
}

#[derive(Debug)]
pub struct CauchySolution {
    pub lift: Lift,
    pub plus: SingularCurve,
    pub minus: SingularCurve,
    pub mesh: SurfaceMesh,
    pub report: CauchyReport,
}

impl CauchySolution {
    pub fn immersion(&self) -> CauchyImmersion<'_> {
        CauchyImmersion {
            plus: &self.plus,
            minus: &self.minus,
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1).max(1) as f64)
}

/// Run the whole pipeline and sample the surface on `range x range`.
pub fn solve(curve: &InitialCurve, opts: &CauchyOptions) -> Result<CauchySolution, CauchyError> {
    let admissibility = validate(curve);
    let lift = lift(curve, &opts.lift)?;
    let (lo, hi) = lift.span();
    // the verification stencils reach three steps beyond a mesh vertex
    let pad = |t: f64| 3.0 * opts.verify.step * t.abs().max(1.0);
    let range = opts.range.unwrap_or((lo + pad(lo), hi - pad(hi)));
    if !(lo + pad(lo) <= range.0 && range.0 < range.1 && range.1 <= hi - pad(hi)) {
        return Err(CauchyError::OutsideLift {
            a: range.0,
            b: range.1,
            lo,
            hi,
        });
    }
    let (plus, minus) = split(&lift, &opts.lift.ode)?;
    let imm = CauchyImmersion {
        plus: &plus,
        minus: &minus,
    };
    let n = opts.samples.max(2);

    let mut lift_forms = 0.0f64;
    let mut lift_identity = 0.0f64;
    for t in lift.interior_samples(n) {
        lift_forms = lift.form_residuals(t)?.iter().fold(lift_forms, |m, r| m.max(r.abs()));
        lift_identity = lift_identity.max(lift.identity_residual(t)?);
    }

    let (mut conservation, mut diagonal, mut normal_plane, mut normal_tangent) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in linspace(range.0, range.1, n) {
        conservation = conservation.max(conservation_residual(&lift, &plus, &minus, t)?);
        let x = imm.point(t, t)?.x;
        let jet = curve.jet(t);
        diagonal = diagonal.max((x - jet.x).amax());
        let st = lift.state(t)?;
        let e3 = e3_from_pq(st.pq())?;
        let m = -0.5 * (st.p() + st.q());
        normal_plane = normal_plane.max((e3 - Vec3::new(m, m, 1.0)).amax());
        normal_tangent = normal_tangent.max(Signature::Lorentz.dot(&jet.d1, &e3).abs());
    }

    let grid = ParamGrid::new(range, range, opts.grid);
    let mesh = SurfaceMesh::sample(&imm, &g0_metric(), ["t1", "t2"], grid, &opts.verify, opts.exec)?;
    let report = CauchyReport {
        method: lift.method,
        t0: curve.t0,
        r0: opts.lift.r0,
        s0: lift.s0,
        v0: opts.lift.v0,
        lifted_span: (lo, hi),
        breakdown: lift.breakdown,
        range,
        admissibility,
        constraint: max_constraint_residual(curve),
        lift_forms,
        lift_identity,
        conservation,
        diagonal,
        normal_plane,
        normal_tangent,
        mesh: mesh.summary(1),
    };
    Ok(CauchySolution {
        lift,
        plus,
        minus,
        mesh,
        report,
    })
}
