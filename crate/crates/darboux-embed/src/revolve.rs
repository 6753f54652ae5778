//! Riemannian normal forms embedded in R^3 with extrinsic symmetry: the
//! intrinsic Killing field `d/dt` is the restriction of an ambient Killing
//! field, so the surface is swept out from one profile curve by a rotation
//! or a screw motion.
//!
//! The profile is integrated in arclength `s` together with the adapted
//! frame and the frame components `(z1, z2)` of the ambient axis vector.
//! Along it `z2 q' = beta` and `z1^2 + z2^2 + q''^2 = alpha^2` are constant.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};
use serde::Serialize;

use crate::mesh::{MeshSummary, ParamGrid, SurfaceMesh};
use crate::metrics::{catalog, CaseId, MetricClass, NormalForm};
use crate::numkit::{derivative5, Mat3, NumError, OdeConfig, Signature, TwoSided, Vec3};
use crate::par::Exec;
use crate::verify::{Immersion, VerifyError, VerifyOptions};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum RevolveError {
    #[error("{0} is not a Riemannian normal form")]
    NotRiemannian(CaseId),
    #[error("alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("alpha^2 - beta^2/q'^2 - q''^2 = {value} is not positive at s = {s}")]
    NoRealZ1 { s: f64, value: f64 },
    #[error("s range [{a}, {b}] must be increasing and inside [{lo}, {hi}]")]
    BadRange { a: f64, b: f64, lo: f64, hi: f64 },
    #[error("profile becomes singular at s = {s}: {reason}")]
    ProfileSingularity { s: f64, reason: String },
    #[error("s = {s} is outside the integrated profile [{lo}, {hi}]")]
    OutsideProfile { s: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Profile integration halts once `z1` falls below this multiple of `alpha`.
pub const Z1_STOP: f64 = 1e-6;

/// `alpha = |Z|` and `beta = Y . Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtrinsicParams {
    pub alpha: f64,
    pub beta: f64,
}

/// The Killing field `rho -> W + rho x Z` of R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmbientKilling {
    pub w: Vec3,
    pub z: Vec3,
}

impl AmbientKilling {
    /// Field with axis through `p0` along `z` and axial advance `pitch` per
    /// radian.
    pub fn screw(z: Vec3, p0: Vec3, pitch: f64) -> Self {
        AmbientKilling {
            w: z * pitch - p0.cross(&z),
            z,
        }
    }

    /// `a` in `W = a Z - p0 x Z`.
    pub fn pitch(&self) -> f64 {
        self.w.dot(&self.z) / self.z.norm_squared()
    }

    /// The point of the axis closest to the origin.
    pub fn axis_point(&self) -> Vec3 {
        let perp = self.w - self.z * self.pitch();
        perp.cross(&self.z) / self.z.norm_squared()
    }

    pub fn field(&self, rho: &Vec3) -> Vec3 {
        self.w + rho.cross(&self.z)
    }

    /// Rotation part of the time-`t` flow.
    pub fn rotation(&self, t: f64) -> Mat3 {
        let alpha = self.z.norm();
        Rotation3::from_axis_angle(&Unit::new_normalize(self.z), -alpha * t).into_inner()
    }

    /// Time-`t` flow: rotation by angle `|Z| t` about the axis combined with
    /// translation `a |Z| t` along it.
    pub fn flow(&self, t: f64, rho: &Vec3) -> Vec3 {
        let p0 = self.axis_point();
        p0 + self.rotation(t) * (rho - p0) + self.z * (self.pitch() * t)
    }
}

fn stencil_pad(s: f64) -> f64 {
    5e-3 * s.abs().max(1.0)
}

/// `[q, q', q'', q''']` in arclength, with the chart point `u(s)`.
#[derive(Debug, Clone, Copy)]
struct QAt {
    u: f64,
    d: [f64; 4],
}

/// Profile curve of one extrinsically symmetric embedding.
#[derive(Debug, Clone)]
pub struct Profile {
    pub case: CaseId,
    pub params: ExtrinsicParams,
    pub s0: f64,
    /// State `[x, e1, e2, e3, z1, z2]`.
    pub traj: TwoSided,
    pub killing: AmbientKilling,
    /// Where `z1` reached zero, if it did.
    pub boundary: Option<f64>,
    form: NormalForm,
    u_bracket: (f64, f64),
}

/// Profile point with its adapted frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub s: f64,
    pub x: Vec3,
    /// Columns `e1, e2, e3`.
    pub frame: Mat3,
    pub z1: f64,
    pub z2: f64,
}

fn q_at(form: &NormalForm, bracket: (f64, f64), s: f64) -> QAt {
    let u = form.profile.u_of_s(s, bracket.0, bracket.1);
    QAt {
        u,
        d: form.profile.q_derivs(u),
    }
}

/// Slopes in `s` of the profile state `[x, e1, e2, e3, z1, z2]` given
/// `[q, q', q'', q''']` at `s`.
pub fn profile_rhs(q: [f64; 4], y: &[f64]) -> Vec<f64> {
    let [_, q1, q2, q3] = q;
    let e = |k: usize| Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]);
    let (e1, e2, e3) = (e(1), e(2), e(3));
    let (z1, z2) = (y[12], y[13]);
    let w32 = z2 / q1;
    let w31 = (q3 - z2 * z2 / q1) / z1;
    // d e_i = e_j w^j_i with w^1_2 = 0 along the profile
    let de1 = e3 * w31;
    let de2 = e3 * w32;
    let de3 = -e1 * w31 - e2 * w32;
    let dz1 = (q2 / z1) * (z2 * z2 / q1 - q3);
    let dz2 = -z2 * q2 / q1;
    let mut out = Vec::with_capacity(14);
    for v in [e1, de1, de2, de3] {
        out.extend_from_slice(v.as_slice());
    }
    out.push(dz1);
    out.push(dz2);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Requested arclength range; the run may stop early at `z1 = 0`.
    pub s_range: (f64, f64),
    /// Start of the integration; defaults to the middle of the range.
    pub s0: Option<f64>,
    pub ode: OdeConfig,
}

impl ProfileOptions {
    pub fn new(s_range: (f64, f64)) -> Self {
        ProfileOptions {
            s_range,
            s0: None,
            ode: OdeConfig::default().with_tol(1e-12).with_max_step(2e-3),
        }
    }
}

/// Integrate the profile for `case` with axis `Z = (0, 0, alpha)` through
/// the origin and axial pitch `beta / alpha^2`.
pub fn integrate_profile(
    case: CaseId,
    params: ExtrinsicParams,
    opts: &ProfileOptions,
) -> Result<Profile, RevolveError> {
    let form = catalog(case);
    if form.class != MetricClass::Riemannian {
        return Err(RevolveError::NotRiemannian(case));
    }
    let ExtrinsicParams { alpha, beta } = params;
    if !(alpha > 0.0) {
        return Err(RevolveError::BadAlpha(alpha));
    }
    let bracket = form.metric.domain.u;
    let (lo, hi) = (form.profile.s_of_u(bracket.0), form.profile.s_of_u(bracket.1));
    let (a, b) = opts.s_range;
    if !(lo <= a && a < b && b <= hi) {
        return Err(RevolveError::BadRange { a, b, lo, hi });
    }
    let s0 = opts.s0.unwrap_or(0.5 * (a + b));
    if !(a <= s0 && s0 <= b) {
        return Err(RevolveError::BadRange {
            a: s0,
            b: s0,
            lo: a,
            hi: b,
        });
    }
    // room for difference stencils at the ends of the range
    let span = ((a - stencil_pad(a)).max(lo), (b + stencil_pad(b)).min(hi));

    let [_, q1, q2, _] = q_at(&form, bracket, s0).d;
    let z2 = beta / q1;
    let z1_sq = alpha * alpha - z2 * z2 - q2 * q2;
    if !(z1_sq > 0.0) || !z1_sq.is_finite() {
        return Err(RevolveError::NoRealZ1 { s: s0, value: z1_sq });
    }
    let z1 = z1_sq.sqrt();
    // frame components of Z are (z1, z2, -q''); rotate them onto the z axis
    let zvec = Vec3::new(z1, z2, -q2);
    let z_axis = Vec3::new(0.0, 0.0, alpha);
    let frame = Rotation3::rotation_between(&zvec, &z_axis)
        .expect("z1 > 0 keeps Z off the negative axis")
        .into_inner();
    let e2 = frame.column(1).into_owned();
    let killing = AmbientKilling::screw(z_axis, Vec3::zeros(), beta / (alpha * alpha));
    // position with K(x0) = q' e2
    let x0 = z_axis.cross(&(e2 * q1)) / (alpha * alpha);

    let mut y0 = Vec::with_capacity(14);
    y0.extend_from_slice(x0.as_slice());
    for k in 0..3 {
        y0.extend_from_slice(frame.column(k).as_slice());
    }
    y0.push(z1);
    y0.push(z2);

    let rhs = |s: f64, y: &[f64]| profile_rhs(q_at(&form, bracket, s).d, y);
    let stop = |_: f64, y: &[f64]| !(y[12] > Z1_STOP * alpha);
    let traj = TwoSided::solve_until(&rhs, s0, &y0, span, &opts.ode, &stop).map_err(|e| match e {
        NumError::IntegrationFailure { t, reason, .. } => RevolveError::ProfileSingularity { s: t, reason },
        e => e.into(),
    })?;
    let boundary = traj.fwd.halted_at.or(traj.bwd.halted_at);
    Ok(Profile {
        case,
        params,
        s0,
        traj,
        killing,
        boundary,
        form,
        u_bracket: bracket,
    })
}

impl Profile {
    pub fn span(&self) -> (f64, f64) {
        self.traj.span()
    }

    pub fn state(&self, s: f64) -> Result<ProfileState, RevolveError> {
        if !self.traj.covers(s) {
            let (lo, hi) = self.span();
            return Err(RevolveError::OutsideProfile { s, lo, hi });
        }
        let y = self.traj.eval(s);
        let v = |k: usize| Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]);
        Ok(ProfileState {
            s,
            x: v(0),
            frame: Mat3::from_columns(&[v(1), v(2), v(3)]),
            z1: y[12],
            z2: y[13],
        })
    }

    /// `[q, q', q'', q''']` at arclength `s`.
    pub fn q_derivs(&self, s: f64) -> [f64; 4] {
        q_at(&self.form, self.u_bracket, s).d
    }

    /// Chart coordinate `u` of arclength `s`.
    pub fn u_of_s(&self, s: f64) -> f64 {
        q_at(&self.form, self.u_bracket, s).u
    }

    /// Drift of `z2 q' - beta` and `z1^2 + z2^2 + q''^2 - alpha^2` at `s`.
    pub fn conservation(&self, s: f64) -> Result<[f64; 2], RevolveError> {
        let st = self.state(s)?;
        let [_, q1, q2, _] = self.q_derivs(s);
        let ExtrinsicParams { alpha, beta } = self.params;
        Ok([
            st.z2 * q1 - beta,
            st.z1 * st.z1 + st.z2 * st.z2 + q2 * q2 - alpha * alpha,
        ])
    }

    /// `max |F^T F - I|` for the frame at `s`.
    pub fn frame_defect(&self, s: f64) -> Result<f64, RevolveError> {
        let f = self.state(s)?.frame;
        Ok((f.transpose() * f - Mat3::identity()).amax())
    }

    /// `|Z - (z1 e1 + z2 e2 - q'' e3)|` and `|K(x) - q' e2|` at `s`.
    pub fn killing_drift(&self, s: f64) -> Result<[f64; 2], RevolveError> {
        let st = self.state(s)?;
        let [_, q1, q2, _] = self.q_derivs(s);
        let e = |k: usize| st.frame.column(k).into_owned();
        let z = e(0) * st.z1 + e(1) * st.z2 - e(2) * q2;
        Ok([
            (z - self.killing.z).norm(),
            (self.killing.field(&st.x) - e(1) * q1).norm(),
        ])
    }

    /// Samples covering the span, `n >= 2`.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.span();
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
            .collect()
    }

    pub fn surface(&self) -> RevolvedSurface<'_> {
        let sign = self.q_derivs(self.s0)[1].signum();
        RevolvedSurface { profile: self, sign }
    }
}

/// The swept surface `(s, t) -> flow_t(x(s))`, charted by
/// `(u(s), t_scale t)` in the catalog coordinates.
pub struct RevolvedSurface<'a> {
    pub profile: &'a Profile,
    /// `sgn q'`; flips `e2`, `e3` so the frame is dual to the catalog coframe.
    sign: f64,
}

impl RevolvedSurface<'_> {
    pub fn point(&self, s: f64, t: f64) -> Result<Vec3, RevolveError> {
        Ok(self.profile.killing.flow(t, &self.profile.state(s)?.x))
    }

    pub fn frame_at(&self, s: f64, t: f64) -> Result<Mat3, RevolveError> {
        let f = self.profile.state(s)?.frame;
        let r = self.profile.killing.rotation(t);
        let g = Mat3::from_columns(&[
            f.column(0).into_owned(),
            f.column(1) * self.sign,
            f.column(2) * self.sign,
        ]);
        Ok(r * g)
    }
}

impl Immersion for RevolvedSurface<'_> {
    fn signature(&self) -> Signature {
        Signature::Euclidean
    }

    fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
        self.point(a, b).map_err(|e| VerifyError::eval(a, b, e))
    }

    fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
        let (lo, hi) = self.profile.span();
        if !(lo <= a && a <= hi) {
            return Err(VerifyError::eval(a, b, "outside the profile"));
        }
        Ok((self.profile.u_of_s(a), self.profile.form.killing_field().t_scale * b))
    }

    fn frame(&self, a: f64, b: f64) -> Option<Result<Mat3, VerifyError>> {
        Some(self.frame_at(a, b).map_err(|e| VerifyError::eval(a, b, e)))
    }
}

/// Residuals of the Killing system for a framed surface carrying the
/// tangent field `y` and the constant vector `z`, on both parameter
/// directions: the two derivative equations for `(y1, y2)`, the algebraic
/// relation, `dZ = 0` in frame components, and the normal part of `y`.
pub fn killing_predicate(
    imm: &dyn Immersion,
    y: &(dyn Fn(f64, f64) -> Vec3 + Sync),
    z: Vec3,
    a: f64,
    b: f64,
    step: f64,
) -> Result<f64, VerifyError> {
    let frame = |a: f64, b: f64| -> Result<Mat3, VerifyError> {
        imm.frame(a, b)
            .unwrap_or_else(|| Err(VerifyError::eval(a, b, "immersion has no frame")))
    };
    let f = frame(a, b)?;
    let e = |k: usize| f.column(k).into_owned();
    let comps = |f: &Mat3, v: &Vec3| f.transpose() * v;
    let yv = y(a, b);
    let yc = comps(&f, &yv);
    let zc = comps(&f, &z);
    let mut worst = yc[2].abs();
    let (ha, hb) = (step * a.abs().max(1.0), step * b.abs().max(1.0));
    for dir in 0..2 {
        let at = |s: f64| if dir == 0 { (s, b) } else { (a, s) };
        let (x0, h) = if dir == 0 { (a, ha) } else { (b, hb) };
        let d = |g: &dyn Fn(f64, f64) -> Result<Vec3, VerifyError>| -> Result<Vec3, VerifyError> {
            let mut out = Vec3::zeros();
            for k in 0..3 {
                out[k] = derivative5(
                    |s| {
                        let (p, q) = at(s);
                        g(p, q).map(|v| v[k]).unwrap_or(f64::NAN)
                    },
                    x0,
                    h,
                );
            }
            Ok(out)
        };
        let dx = d(&|p, q| imm.position(p, q))?;
        let w = |i: usize| e(i).dot(&dx);
        // w^a_b(d) = <e_a, d e_b>
        let de: Vec<Vec3> = (0..3)
            .map(|k| d(&|p, q| frame(p, q).map(|m| m.column(k).into_owned())))
            .collect::<Result<_, _>>()?;
        let wab = |a: usize, b: usize| e(a).dot(&de[b]);
        let dy = d(&|p, q| Ok(comps(&frame(p, q)?, &y(p, q))))?;
        let dz = d(&|p, q| Ok(comps(&frame(p, q)?, &z)))?;
        let res = [
            dy[0] + yc[1] * wab(0, 1) - zc[2] * w(1),
            dy[1] + yc[0] * wab(1, 0) + zc[2] * w(0),
            yc[0] * wab(2, 0) + yc[1] * wab(2, 1) - zc[1] * w(0) + zc[0] * w(1),
            dz[0] + zc[1] * wab(0, 1) + zc[2] * wab(0, 2),
            dz[1] + zc[0] * wab(1, 0) + zc[2] * wab(1, 2),
            dz[2] + zc[0] * wab(2, 0) + zc[1] * wab(2, 1),
        ];
        if res.iter().any(|r| !r.is_finite()) {
            return Err(VerifyError::eval(a, b, "non-finite Killing residual"));
        }
        worst = res.iter().fold(worst, |m, r| m.max(r.abs()));
    }
    Ok(worst)
}

/// Largest `|h - c - r^2/2|` over profile samples after moving the axis
/// to the `z` axis, orienting it and fitting the offset `c`, where `r` is
/// the distance to the axis and `h` the height along it.
pub fn paraboloid_deviation(profile: &Profile, n: usize) -> Result<f64, RevolveError> {
    let k = &profile.killing;
    let axis = k.z.normalize();
    let p0 = k.axis_point();
    let mut pts = Vec::with_capacity(n);
    for s in profile.samples(n) {
        let rel = profile.state(s)?.x - p0;
        let h = rel.dot(&axis);
        let r = (rel - axis * h).norm();
        pts.push((r, h));
    }
    let best = [1.0, -1.0]
        .iter()
        .map(|sgn| {
            let offset = pts.iter().map(|(r, h)| sgn * h - 0.5 * r * r).sum::<f64>() / pts.len() as f64;
            pts.iter()
                .map(|(r, h)| (sgn * h - offset - 0.5 * r * r).abs())
                .fold(0.0f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

/// Distance between the `(alpha, beta)` surface reflected through a plane
/// containing its axis and the `(alpha, -beta)` surface, compared at
/// corresponding parameters `(s, t)` and `(s, -t)`.
pub fn mirror_distance(
    case: CaseId,
    params: ExtrinsicParams,
    opts: &ProfileOptions,
    t_range: (f64, f64),
    n: usize,
) -> Result<f64, RevolveError> {
    let p = integrate_profile(case, params, opts)?;
    let m = integrate_profile(
        case,
        ExtrinsicParams {
            beta: -params.beta,
            ..params
        },
        opts,
    )?;
    let (sp, sm) = (p.surface(), m.surface());
    // both axes are the z axis through the origin; the mirror plane bisects
    // the azimuths of the two base points
    let xp = p.state(p.s0)?.x;
    let xm = m.state(m.s0)?.x;
    let psi = 0.5 * (xp[1].atan2(xp[0]) + xm[1].atan2(xm[0]));
    let (c, s) = ((2.0 * psi).cos(), (2.0 * psi).sin());
    let reflect = |x: Vec3| Vec3::new(c * x[0] + s * x[1], s * x[0] - c * x[1], x[2]);
    let lo = p.span().0.max(m.span().0);
    let hi = p.span().1.min(m.span().1);
    let mut worst = 0.0f64;
    for i in 0..n {
        let sv = lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64;
        for j in 0..n {
            let t = t_range.0 + (t_range.1 - t_range.0) * j as f64 / (n - 1).max(1) as f64;
            let d = (reflect(sp.point(sv, t)?) - sm.point(sv, -t)?).norm();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevolveOptions {
    pub profile: ProfileOptions,
    /// Defaults to one full turn, `[0, 2 pi / alpha]`.
    pub t_range: Option<(f64, f64)>,
    /// Vertex counts along `s` and `t`.
    pub grid: [usize; 2],
    pub verify: VerifyOptions,
    pub exec: Exec,
    pub samples: usize,
}

impl RevolveOptions {
    pub fn new(s_range: (f64, f64)) -> Self {
        RevolveOptions {
            profile: ProfileOptions::new(s_range),
            t_range: None,
            grid: [41, 41],
            verify: VerifyOptions::default(),
            exec: Exec::default(),
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevolveReport {
    pub case: CaseId,
    pub params: ExtrinsicParams,
    pub s0: f64,
    /// Interval on which the profile was integrated.
    pub s_span: (f64, f64),
    /// Interval covered by the mesh.
    pub s_mesh: (f64, f64),
    pub boundary: Option<f64>,
    pub t_range: (f64, f64),
    pub killing: AmbientKilling,
    /// Axial advance per radian; zero for surfaces of revolution.
    pub pitch: f64,
    /// Smallest and largest distance of the profile from the axis.
    pub axis_distance: (f64, f64),
    /// Largest drift of `z2 q' - beta`.
    pub conservation_beta: f64,
    /// Largest drift of `z1^2 + z2^2 + q''^2 - alpha^2`.
    pub conservation_alpha: f64,
    pub frame_defect: f64,
    /// Largest `|Z - (z1 e1 + z2 e2 - q'' e3)|` and `|K(x) - q' e2|`.
    pub killing_drift: f64,
    /// Largest `| |d/dt x| - |q'| |` over the mesh.
    pub orbit_speed: f64,
    /// Largest Killing-system residual over interior mesh vertices.
    pub killing_residual: f64,
    /// Deviation from `z = (x^2 + y^2)/2` when `beta = 0`.
    pub paraboloid: Option<f64>,
    pub mirror: Option<f64>,
    pub mesh: MeshSummary,
}

#[derive(Debug)]
pub struct RevolveSolution {
    pub profile: Profile,
    pub mesh: SurfaceMesh,
    pub report: RevolveReport,
}

/// Integrate the profile, sweep it, and verify the result.
pub fn revolve(case: CaseId, params: ExtrinsicParams, opts: &RevolveOptions) -> Result<RevolveSolution, RevolveError> {
    let profile = integrate_profile(case, params, &opts.profile)?;
    let t_range = opts.t_range.unwrap_or((0.0, 2.0 * PI / params.alpha));
    let surface = profile.surface();

    let (mut cb, mut ca, mut fd, mut kd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    let axis = profile.killing.z.normalize();
    let p0 = profile.killing.axis_point();
    for s in profile.samples(opts.samples.max(2)) {
        let [b, a] = profile.conservation(s)?;
        cb = cb.max(b.abs());
        ca = ca.max(a.abs());
        fd = fd.max(profile.frame_defect(s)?);
        let [k1, k2] = profile.killing_drift(s)?;
        kd = kd.max(k1).max(k2);
        let rel = profile.state(s)?.x - p0;
        let r = (rel - axis * rel.dot(&axis)).norm();
        rmin = rmin.min(r);
        rmax = rmax.max(r);
    }

    let (lo, hi) = profile.span();
    let (a, b) = opts.profile.s_range;
    let s_mesh = ((lo + stencil_pad(lo)).max(a), (hi - stencil_pad(hi)).min(b));
    if !(s_mesh.0 < s_mesh.1) {
        return Err(RevolveError::BadRange { a, b, lo, hi });
    }
    let grid = ParamGrid::new(s_mesh, t_range, opts.grid);
    let metric = catalog(case).metric;
    let mesh = SurfaceMesh::sample(&surface, &metric, ["s", "t"], grid, &opts.verify, opts.exec)?;

    let k = profile.killing;
    let field = |s: f64, t: f64| {
        surface
            .point(s, t)
            .map(|x| k.field(&x))
            .unwrap_or(Vec3::repeat(f64::NAN))
    };
    let [na, nb] = grid.n;
    let interior: Vec<usize> = (0..grid.len())
        .filter(|&idx| {
            let (i, j) = (idx / nb, idx % nb);
            i >= 1 && j >= 1 && i + 1 < na && j + 1 < nb
        })
        .collect();
    let per_vertex = opts.exec.try_map(interior.len(), |n| {
        let (s, t) = grid.point(interior[n]);
        let kr = killing_predicate(&surface, &field, k.z, s, t, opts.verify.step)?;
        let h = opts.verify.step * t.abs().max(1.0);
        let mut vel = Vec3::zeros();
        for c in 0..3 {
            vel[c] = derivative5(|x| surface.point(s, x).map(|p| p[c]).unwrap_or(f64::NAN), t, h);
        }
        let speed = (vel.norm() - profile.q_derivs(s)[1].abs()).abs();
        Ok::<_, VerifyError>((kr, speed))
    })?;
    let killing_residual = per_vertex.iter().fold(0.0f64, |m, r| m.max(r.0));
    let orbit_speed = per_vertex.iter().fold(0.0f64, |m, r| m.max(r.1));

    let paraboloid = if params.beta == 0.0 {
        Some(paraboloid_deviation(&profile, opts.samples.max(2))?)
    } else {
        None
    };
    let mirror = if params.beta != 0.0 {
        Some(mirror_distance(case, params, &opts.profile, t_range, 11)?)
    } else {
        None
    };

    let report = RevolveReport {
        case,
        params,
        s0: profile.s0,
        s_span: (lo, hi),
        s_mesh,
        boundary: profile.boundary,
        t_range,
        killing: k,
        pitch: k.pitch(),
        axis_distance: (rmin, rmax),
        conservation_beta: cb,
        conservation_alpha: ca,
        frame_defect: fd,
        killing_drift: kd,
        orbit_speed,
        killing_residual,
        paraboloid,
        mirror,
        mesh: mesh.summary(1),
    };
    Ok(RevolveSolution { profile, mesh, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, beta: f64) -> ExtrinsicParams {
        ExtrinsicParams { alpha, beta }
    }

    #[test]
    fn screw_decomposition() {
        let k = AmbientKilling::screw(Vec3::new(0.0, 0.0, 2.0), Vec3::new(1.0, 0.0, 0.0), 0.25);
        assert!((k.pitch() - 0.25).abs() < 1e-15);
        assert!((k.axis_point() - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        // the axis is fixed up to translation, and the flow solves x' = K(x)
        let x = Vec3::new(2.0, 1.0, 0.5);
        let h = 1e-4;
        let d = (k.flow(h, &x) - k.flow(-h, &x)) / (2.0 * h);
        assert!((d - k.field(&x)).norm() < 1e-7);
        let on_axis = k.flow(1.0, &Vec3::new(1.0, 0.0, 0.0));
        assert!((on_axis - Vec3::new(1.0, 0.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn paraboloid_conservation_and_frame() {
        let p = integrate_profile(CaseId::R1, params(3.0, 0.0), &ProfileOptions::new((0.01, 2.01))).unwrap();
        assert!(p.boundary.is_none());
        for s in p.samples(50) {
            for c in p.conservation(s).unwrap() {
                assert!(c.abs() < 1e-8, "{s} {c}");
            }
            assert!(p.frame_defect(s).unwrap() < 1e-8);
            assert_eq!(p.state(s).unwrap().z2, 0.0);
            for k in p.killing_drift(s).unwrap() {
                assert!(k < 1e-7, "{s} {k}");
            }
        }
        assert!(paraboloid_deviation(&p, 200).unwrap() < 1e-5);
    }

    #[test]
    fn other_alpha_is_not_the_paraboloid() {
        let p = integrate_profile(CaseId::R1, params(3.5, 0.0), &ProfileOptions::new((0.01, 2.01))).unwrap();
        assert!(paraboloid_deviation(&p, 200).unwrap() > 1e-2);
        assert_eq!(p.killing.pitch(), 0.0);
    }

    #[test]
    fn screw_has_pitch_and_mirror() {
        let opts = ProfileOptions::new((0.3, 1.3));
        let p = integrate_profile(CaseId::R1, params(4.0, 1.0), &opts).unwrap();
        assert!((p.killing.pitch() - 1.0 / 16.0).abs() < 1e-15);
        for s in p.samples(20) {
            for c in p.conservation(s).unwrap() {
                assert!(c.abs() < 1e-8);
            }
        }
        let d = mirror_distance(CaseId::R1, params(4.0, 1.0), &opts, (0.0, 1.0), 9).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn rejects_lorentzian_and_bad_alpha() {
        let o = ProfileOptions::new((0.1, 0.5));
        assert_eq!(
            integrate_profile(CaseId::LhT3, params(3.0, 0.0), &o).unwrap_err(),
            RevolveError::NotRiemannian(CaseId::LhT3)
        );
        assert!(matches!(
            integrate_profile(CaseId::R1, params(-1.0, 0.0), &o),
            Err(RevolveError::BadAlpha(_))
        ));
        // alpha below q'' leaves no real z1
        assert!(matches!(
            integrate_profile(CaseId::R1, params(0.5, 0.0), &o),
            Err(RevolveError::NoRealZ1 { .. })
        ));
    }

    #[test]
    fn small_alpha_stops_at_boundary() {
        // z1^2 = alpha^2 - 9/cosh^2 u vanishes where cosh u = 3/alpha
        let p = integrate_profile(CaseId::R1, params(2.0, 0.0), &ProfileOptions::new((0.5, 3.0))).unwrap();
        let b = p.boundary.expect("boundary reached");
        let u = p.u_of_s(b);
        assert!((u.cosh() - 1.5).abs() < 1e-3, "{u}");
    }

    #[test]
    fn swept_surface_is_isometric_and_killing() {
        for (case, range, prm) in [
            (CaseId::R1, (0.05, 2.0), params(3.0, 0.0)),
            (CaseId::R1, (0.3, 1.3), params(4.0, 1.0)),
            (CaseId::R4, (0.2, 0.6), params(6.0, 0.5)),
        ] {
            let mut opts = RevolveOptions::new(range);
            opts.grid = [9, 9];
            let sol = revolve(case, prm, &opts).unwrap();
            let r = &sol.report;
            assert!(r.mesh.isometry.max < 1e-5, "{case} {r:?}");
            assert!(r.mesh.curvature.max < 1e-3, "{case} {r:?}");
            assert!(r.mesh.pfaffian.unwrap().max < 1e-5, "{case} {r:?}");
            assert!(r.killing_residual < 1e-5, "{case} {r:?}");
            assert!(r.orbit_speed < 1e-6, "{case} {r:?}");
        }
    }

    #[test]
    fn generic_graph_fails_killing_system() {
        struct Graph;
        impl Immersion for Graph {
            fn signature(&self) -> Signature {
                Signature::Euclidean
            }
            fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
                Ok(Vec3::new(a, b, a * a * b + 0.3 * b.powi(3)))
            }
            fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
                Ok((a, b))
            }
            fn frame(&self, a: f64, b: f64) -> Option<Result<Mat3, VerifyError>> {
                let xa = Vec3::new(1.0, 0.0, 2.0 * a * b).normalize();
                let n = Vec3::new(1.0, 0.0, 2.0 * a * b)
                    .cross(&Vec3::new(0.0, 1.0, a * a + 0.9 * b * b))
                    .normalize();
                Some(Ok(Mat3::from_columns(&[xa, n.cross(&xa), n])))
            }
        }
        let y = |a: f64, b: f64| Vec3::new(1.0, 0.0, 2.0 * a * b);
        let r = killing_predicate(&Graph, &y, Vec3::zeros(), 0.4, 0.7, 1e-3).unwrap();
        assert!(r > 1e-2, "{r}");
        let zero = |_: f64, _: f64| Vec3::zeros();
        assert_eq!(
            killing_predicate(&Graph, &zero, Vec3::zeros(), 0.4, 0.7, 1e-3).unwrap(),
            0.0
        );
    }
}
