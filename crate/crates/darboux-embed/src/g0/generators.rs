//! Embeddings of `g0` built from two convex generating functions `F`, `G`.

use serde::Serialize;

use super::{char_rhs, psi_inv, so12_from_pq, superpose, CharPoint, G0Error, N2Point, Side, PQ};
use crate::numkit::{derivative5, Antiderivative, Mat3, Signature, Smooth1D, TwoSided, Vec3};
use crate::verify::{Immersion, VerifyError};

type Integrand = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Samples per unit length used when checking `F''' > 0`.
const CONVEXITY_SAMPLES: usize = 2001;

/// An integral curve of one characteristic system.
pub enum SingularCurve {
    /// Closed form from a generating function; the parameter is `p` (or `q`).
    Generator {
        side: Side,
        gen: Smooth1D,
        domain: (f64, f64),
        v_int: Antiderivative<Integrand>,
        /// Sign of the fourth root taken for `w0`; positive by default.
        root_sign: f64,
    },
    /// Numerical solution with state `[w, w0, v, y1, y2, y3]` over a curve
    /// parameter `t`.
    Sampled { side: Side, traj: TwoSided },
}

impl std::fmt::Debug for SingularCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularCurve::Generator { side, gen, domain, .. } => f
                .debug_struct("Generator")
                .field("side", side)
                .field("gen", gen)
                .field("domain", domain)
                .finish(),
            SingularCurve::Sampled { side, traj } => f
                .debug_struct("Sampled")
                .field("side", side)
                .field("span", &traj.span())
                .finish(),
        }
    }
}

fn check_convex(side: Side, gen: &Smooth1D, domain: (f64, f64)) -> Result<(), G0Error> {
    let (a, b) = domain;
    let n = CONVEXITY_SAMPLES.max((CONVEXITY_SAMPLES as f64 * (b - a)).ceil() as usize);
    for i in 0..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        if !(gen.derivs(x)[3] > 0.0) {
            return Err(G0Error::NotConvex { side, at: x });
        }
    }
    Ok(())
}

impl SingularCurve {
    /// Closed-form curve; `v` is anchored to vanish at 0 when 0 lies in the
    /// domain and at the left end otherwise.
    pub fn from_generator(side: Side, gen: Smooth1D, domain: (f64, f64)) -> Result<Self, G0Error> {
        if !(domain.0 < domain.1) {
            return Err(G0Error::OutsideDomain {
                x: domain.0,
                a: domain.0,
                b: domain.1,
            });
        }
        check_convex(side, &gen, domain)?;
        let g = gen.clone();
        let integrand: Integrand = Box::new(move |x| (2.0 * g.derivs(x)[3]).sqrt());
        let anchor = if domain.0 <= 0.0 && 0.0 <= domain.1 {
            0.0
        } else {
            domain.0
        };
        let panels = ((domain.1 - domain.0) * 64.0).ceil().max(8.0) as usize;
        let v_int = Antiderivative::new(integrand, domain.0, domain.1, anchor, panels, 1e-12)?;
        Ok(SingularCurve::Generator {
            side,
            gen,
            domain,
            v_int,
            root_sign: 1.0,
        })
    }

    /// Take the negative fourth root for `w0` on a closed-form curve. The
    /// characteristic slopes are even in `w0`, so this is again a solution.
    pub fn negative_root(mut self) -> Self {
        if let SingularCurve::Generator { root_sign, .. } = &mut self {
            *root_sign = -1.0;
        }
        self
    }

    pub fn side(&self) -> Side {
        match self {
            SingularCurve::Generator { side, .. } | SingularCurve::Sampled { side, .. } => *side,
        }
    }

    pub fn at(&self, t: f64) -> Result<CharPoint, G0Error> {
        match self {
            SingularCurve::Generator {
                side,
                gen,
                v_int,
                root_sign,
                ..
            } => {
                let [f, f1, f2, f3] = gen.derivs(t);
                if !(f3 > 0.0) {
                    return Err(G0Error::NotConvex { side: *side, at: t });
                }
                let w0 = root_sign * (8.0 * f3).powf(0.25);
                let sgn = match side {
                    Side::Plus => 1.0,
                    Side::Minus => -1.0,
                };
                let base = 2.0 * t * f1 - 2.0 * f;
                let y = Vec3::new(
                    -(t * t + 1.0) * f2 + base,
                    -(t * t - 1.0) * f2 + base,
                    2.0 * t * f2 - 2.0 * f1,
                ) * sgn;
                Ok(CharPoint {
                    w: t,
                    w0,
                    v: -sgn * v_int.eval(t)?,
                    y,
                })
            }
            SingularCurve::Sampled { traj, .. } => {
                if !traj.covers(t) {
                    let (a, b) = traj.span();
                    return Err(G0Error::OutsideDomain { x: t, a, b });
                }
                let s = traj.eval(t);
                Ok(CharPoint {
                    w: s[0],
                    w0: s[1],
                    v: s[2],
                    y: Vec3::new(s[3], s[4], s[5]),
                })
            }
        }
    }

    /// Largest violation of the characteristic ODEs at `t`, with the
    /// derivative taken by a five-point stencil.
    pub fn ode_residual(&self, t: f64) -> Result<f64, G0Error> {
        let h = 1e-3 * t.abs().max(1.0);
        let pt = self.at(t)?;
        let comp = |i: usize| {
            move |s: f64| {
                let c = self.at(s).expect("curve evaluable near t");
                [c.w, c.v, c.y[0], c.y[1], c.y[2]][i]
            }
        };
        for s in [t - 2.0 * h, t + 2.0 * h] {
            self.at(s)?;
        }
        let dw = derivative5(comp(0), t, h);
        let (cv, cy) = char_rhs(self.side(), pt.w, pt.w0);
        let want = [cv, cy[0], cy[1], cy[2]];
        Ok((1..5)
            .map(|i| (derivative5(comp(i), t, h) - want[i - 1] * dw).abs())
            .fold(0.0, f64::max))
    }
}

/// Two generating functions with `F''' > 0`, `G''' > 0` on their domains.
#[derive(Debug)]
pub struct GeneratorPair {
    pub plus: SingularCurve,
    pub minus: SingularCurve,
}

/// A point of the general immersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenPoint {
    pub x: Vec3,
    pub u: f64,
    pub v: f64,
    pub pq: PQ,
    pub n2: N2Point,
}

impl GeneratorPair {
    pub fn new(f: Smooth1D, g: Smooth1D, p_dom: (f64, f64), q_dom: (f64, f64)) -> Result<Self, G0Error> {
        Ok(GeneratorPair {
            plus: SingularCurve::from_generator(Side::Plus, f, p_dom)?,
            minus: SingularCurve::from_generator(Side::Minus, g, q_dom)?,
        })
    }

    /// The pair `F = e1^4 p^3 / 48`, `G = e2^4 q^3 / 48` whose singular curves
    /// have constant `p0 = e1`, `q0 = e2`.
    pub fn cubic(e1: f64, e2: f64, p_dom: (f64, f64), q_dom: (f64, f64)) -> Result<Self, G0Error> {
        let cubic = |e: f64| Smooth1D::poly(vec![0.0, 0.0, 0.0, e.powi(4) / 48.0]);
        Self::new(cubic(e1), cubic(e2), p_dom, q_dom)
    }

    /// Choose the fourth-root branch of `p0` and `q0`; `true` selects the
    /// negative root on that side.
    pub fn with_branches(self, neg_plus: bool, neg_minus: bool) -> Self {
        let flip = |c: SingularCurve, neg: bool| if neg { c.negative_root() } else { c };
        GeneratorPair {
            plus: flip(self.plus, neg_plus),
            minus: flip(self.minus, neg_minus),
        }
    }

    fn gens(&self) -> (&Smooth1D, &Smooth1D) {
        match (&self.plus, &self.minus) {
            (SingularCurve::Generator { gen: f, .. }, SingularCurve::Generator { gen: g, .. }) => (f, g),
            _ => unreachable!("generator pairs hold closed-form curves"),
        }
    }

    pub fn domains(&self) -> ((f64, f64), (f64, f64)) {
        match (&self.plus, &self.minus) {
            (SingularCurve::Generator { domain: a, .. }, SingularCurve::Generator { domain: b, .. }) => (*a, *b),
            _ => unreachable!("generator pairs hold closed-form curves"),
        }
    }

    /// Superpose the two curves at `(p, q)` and map back to `N1`.
    pub fn embed(&self, p: f64, q: f64) -> Result<GenPoint, G0Error> {
        let n2 = superpose(&self.plus.at(p)?, &self.minus.at(q)?)?;
        let n1 = psi_inv(&n2);
        Ok(GenPoint {
            x: n1.x,
            u: n2.pq.u(),
            v: n2.v,
            pq: n2.pq,
            n2,
        })
    }

    /// The same immersion from the closed formula in `F`, `G` and their
    /// derivatives, without passing through the charts.
    pub fn closed_form_x(&self, p: f64, q: f64) -> Vec3 {
        let (f, g) = self.gens();
        let [f0, f1, f2, f3] = f.derivs(p);
        let [g0, g1, g2, g3] = g.derivs(q);
        let r = (f3 * g3).sqrt();
        let fp = 2.0 * p * f1 - 2.0 * f0;
        let gq = -2.0 * q * g1 + 2.0 * g0;
        Vec3::new(
            (p - q) * (p * q + 1.0) * r - (p * p + 1.0) * f2 + fp + (q * q + 1.0) * g2 + gq,
            (p - q) * (p * q - 1.0) * r - (p * p - 1.0) * f2 + fp + (q * q - 1.0) * g2 + gq,
            (q * q - p * p) * r + 2.0 * p * f2 - 2.0 * f1 - 2.0 * q * g2 + 2.0 * g1,
        )
    }

    /// `u` as printed in the `(p, q) -> (u, v)` formula: `-(p - q)(F''' G''')^(1/4)`.
    pub fn printed_u(&self, p: f64, q: f64) -> f64 {
        let (f, g) = self.gens();
        -(p - q) * (f.derivs(p)[3] * g.derivs(q)[3]).powf(0.25)
    }
}

/// The immersion `(p, q) -> x` of a generator pair, for verification.
pub struct GeneratorImmersion<'a>(pub &'a GeneratorPair);

impl Immersion for GeneratorImmersion<'_> {
    fn signature(&self) -> Signature {
        Signature::Lorentz
    }

    fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
        self.0.embed(a, b).map(|g| g.x).map_err(|e| VerifyError::eval(a, b, e))
    }

    fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
        self.0
            .embed(a, b)
            .map(|g| (g.u, g.v))
            .map_err(|e| VerifyError::eval(a, b, e))
    }

    fn frame(&self, a: f64, b: f64) -> Option<Result<Mat3, VerifyError>> {
        Some(
            self.0
                .embed(a, b)
                .and_then(|g| so12_from_pq(g.pq))
                .map_err(|e| VerifyError::eval(a, b, e)),
        )
    }
}

fn check_eps(e1: f64, e2: f64) -> Result<(), G0Error> {
    if !((e1 * e1 - e2 * e2).abs() > 1e-14) {
        return Err(G0Error::EqualEpsilons);
    }
    Ok(())
}

/// The explicit `(u, v)` immersion for the cubic generators.
pub fn special_embedding(e1: f64, e2: f64, u: f64, v: f64) -> Result<Vec3, G0Error> {
    check_eps(e1, e2)?;
    let (s, m, d) = (e1 * e1 + e2 * e2, e1 * e2, e1 * e1 - e2 * e2);
    let cubic = (s * (v.powi(3) + 3.0 * u * u * v) - 2.0 * m * (u.powi(3) + 3.0 * u * v * v)) / (3.0 * d * d);
    let lin = 0.25 * s * v - 0.5 * m * u;
    Ok(Vec3::new(
        cubic + lin,
        cubic - lin,
        (s * (u * u + v * v) - 4.0 * m * u * v) / (2.0 * d),
    ))
}

/// Inverse of `(p, q) -> (u, v)` for the cubic generators.
pub fn special_pq_of_uv(e1: f64, e2: f64, u: f64, v: f64) -> Result<(f64, f64), G0Error> {
    check_eps(e1, e2)?;
    let p = (2.0 * v - 2.0 * e2 * u / e1) / (e2 * e2 - e1 * e1);
    Ok((p, p + 2.0 * u / (e1 * e2)))
}

/// The explicit immersion in `(u, v)` coordinates, for verification.
pub struct SpecialImmersion {
    pub e1: f64,
    pub e2: f64,
}

impl Immersion for SpecialImmersion {
    fn signature(&self) -> Signature {
        Signature::Lorentz
    }

    fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
        special_embedding(self.e1, self.e2, a, b).map_err(|e| VerifyError::eval(a, b, e))
    }

    fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
        Ok((a, b))
    }

    fn frame(&self, a: f64, b: f64) -> Option<Result<Mat3, VerifyError>> {
        let frame =
            special_pq_of_uv(self.e1, self.e2, a, b).and_then(|(p, q)| so12_from_pq(PQ::new(p, self.e1, q, self.e2)));
        Some(frame.map_err(|e| VerifyError::eval(a, b, e)))
    }
}

/// The full frame-bundle point for the cubic generators, as printed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Iota0 {
    pub u: f64,
    pub v: f64,
    pub x: Vec3,
    pub a: [f64; 3],
}

pub fn iota0_printed(e1: f64, e2: f64, p: f64, q: f64) -> Iota0 {
    let (s1, s2) = (e1 * e1, e2 * e2);
    let common = -s1 * s1 * p.powi(3) / 3.0 + s2 * s2 * q.powi(3) / 3.0 + s1 * s2 * p * q * (p - q);
    let lin = (s1 - s2) * (p + q);
    let den = 2.0 * e1 * e2 * (p - q);
    Iota0 {
        u: 0.5 * e1 * e2 * (q - p),
        v: 0.5 * (s2 * q - s1 * p),
        x: Vec3::new(
            (common - lin) / 8.0,
            (common + lin) / 8.0,
            (s1 - s2) * (s1 * p * p + s2 * q * q) / 8.0,
        ),
        a: [(e1 + e2).powi(2) / den, -(s1 - s2) / den, (e1 * p + e2 * q) / (e1 + e2)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_pair() -> GeneratorPair {
        GeneratorPair::cubic(1.0, 2.0, (-3.0, 3.0), (-3.0, 3.0)).unwrap()
    }

    #[test]
    fn closed_form_curve_value() {
        let c = SingularCurve::from_generator(Side::Plus, Smooth1D::poly(vec![0.0, 0.0, 0.0, 1.0 / 48.0]), (-1.0, 3.0))
            .unwrap();
        let pt = c.at(1.0).unwrap();
        assert!((pt.w0 - 1.0).abs() < 1e-15);
        assert!((pt.y[0] + 1.0 / 6.0).abs() < 1e-15);
        assert!(c.ode_residual(0.7).unwrap() < 1e-10);
    }

    #[test]
    fn v_of_constant_integrand() {
        let c = SingularCurve::from_generator(Side::Plus, Smooth1D::poly(vec![0.0, 0.0, 0.0, 1.0 / 48.0]), (0.0, 2.0))
            .unwrap();
        let dv = c.at(2.0).unwrap().v - c.at(0.0).unwrap().v;
        assert!((dv + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_convex() {
        let r = SingularCurve::from_generator(Side::Minus, Smooth1D::poly(vec![0.0, 0.0, 0.0, -1.0]), (0.0, 1.0));
        assert!(matches!(r, Err(G0Error::NotConvex { side: Side::Minus, .. })));
    }

    #[test]
    fn hand_evaluations() {
        let gp = example_pair();
        let g = gp.embed(0.0, 1.0).unwrap();
        assert!(
            (g.x - Vec3::new(13.0 / 6.0, -5.0 / 6.0, -1.5)).norm() < 1e-12,
            "{:?}",
            g.x
        );
        assert!((g.u - 1.0).abs() < 1e-14 && (g.v - 2.0).abs() < 1e-12);
        let g = gp.embed(1.0, 2.0).unwrap();
        assert!((g.x[0] - 23.0 / 3.0).abs() < 1e-12);
        assert!((g.u - 1.0).abs() < 1e-14 && (g.v - 3.5).abs() < 1e-12);
        assert!((gp.closed_form_x(1.0, 2.0) - g.x).norm() < 1e-12);
        let s = special_embedding(1.0, 2.0, 1.0, 2.0).unwrap();
        assert!((s - Vec3::new(13.0 / 6.0, -5.0 / 6.0, -1.5)).norm() < 1e-12);
        assert_eq!(special_embedding(1.0, 2.0, 0.0, 0.0).unwrap(), Vec3::zeros());
        assert!(special_embedding(1.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn swapped_arguments_flip_u() {
        let f = Smooth1D::poly(vec![0.0, 0.0, 0.0, 0.1, 0.02]);
        let gp = GeneratorPair::new(f.clone(), f, (0.0, 2.0), (0.0, 2.0)).unwrap();
        let (a, b) = (gp.embed(0.4, 1.3).unwrap(), gp.embed(1.3, 0.4).unwrap());
        assert!(a.u * b.u < 0.0);
    }

    #[test]
    fn printed_iota0_disagrees_in_x1() {
        let i = iota0_printed(1.0, 2.0, 0.0, 1.0);
        assert!((i.x[0] - 25.0 / 24.0).abs() < 1e-15);
        assert!((i.u - 1.0).abs() < 1e-15 && (i.v - 2.0).abs() < 1e-15);
        assert!((i.x[2] + 1.5).abs() < 1e-15);
    }

    #[test]
    fn general_immersion_passes_verification() {
        use crate::metrics::{catalog, CaseId};
        use crate::verify::{vertex_residuals, VerifyOptions};
        let f = Smooth1D::poly(vec![0.3, -0.2, 0.1, 0.2, 0.05]);
        let g = Smooth1D::poly(vec![0.0, 0.4, 0.0, 0.1, 0.0, 0.01]);
        let gp = GeneratorPair::new(f, g, (0.0, 1.0), (1.5, 2.5)).unwrap();
        let m = catalog(CaseId::LhT3).metric;
        for (p, q) in [(0.2, 1.7), (0.5, 2.0), (0.9, 2.4)] {
            let r = vertex_residuals(&GeneratorImmersion(&gp), &m, p, q, &VerifyOptions::default()).unwrap();
            assert!(r.isometry < 1e-8, "{r:?}");
            assert!(r.curvature < 1e-6, "{r:?}");
            assert!(r.pfaffian.unwrap() < 1e-8, "{r:?}");
            assert!((gp.closed_form_x(p, q) - gp.embed(p, q).unwrap().x).norm() < 1e-12);
        }
    }

    #[test]
    fn negative_branch_is_isometric() {
        use crate::verify::{vertex_residuals, VerifyOptions};
        let f = Smooth1D::poly(vec![0.3, -0.2, 0.1, 0.2, 0.05]);
        let g = Smooth1D::poly(vec![0.0, 0.4, 0.0, 0.1, 0.0, 0.01]);
        let gp = GeneratorPair::new(f, g, (0.0, 1.0), (1.5, 2.5))
            .unwrap()
            .with_branches(true, false);
        let pt = gp.embed(0.5, 2.0).unwrap();
        assert!(pt.pq.p0 < 0.0 && pt.pq.q0 > 0.0 && pt.u < 0.0);
        let r = vertex_residuals(
            &GeneratorImmersion(&gp),
            &super::super::g0_metric(),
            0.5,
            2.0,
            &VerifyOptions::default(),
        )
        .unwrap();
        assert!(r.isometry < 1e-8 && r.pfaffian.unwrap() < 1e-8, "{r:?}");
    }

    #[test]
    fn special_chart_inverse() {
        let (p, q) = special_pq_of_uv(1.0, 2.0, 1.0, 2.0).unwrap();
        assert!(p.abs() < 1e-15 && (q - 1.0).abs() < 1e-15);
    }
}
