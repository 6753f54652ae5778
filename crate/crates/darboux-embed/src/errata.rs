//! Reproducible checks of three printed formulas that disagree with the
//! identities they are meant to satisfy. Each check returns the measured
//! numbers and a flag that is `true` when the discrepancy is reproduced.

use serde::Serialize;

use crate::cauchy::{lift, reference_curve, InitialCurve, Lift, LiftMethod, LiftOptions};
use crate::g0::{iota0_printed, GeneratorPair};
use crate::numkit::Vec3;

/// The printed `u = -(p - q)(F''' G''')^(1/4)` against `u = -p0 q0 (p - q)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PqToUv {
    /// Printed `u` divided by the `u` of the embedding, sampled on a cubic
    /// generator pair; `1/sqrt 2` for every pair, since `w0 = (8 F''')^(1/4)`.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub flag: bool,
}

pub fn pq_to_uv_factor() -> PqToUv {
    let pair = GeneratorPair::cubic(1.0, 2.0, (-2.0, 2.0), (-2.0, 2.0)).expect("cubic generators are convex");
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (p, q) in [(-1.0, 1.0), (0.0, 1.0), (0.5, -1.5), (1.7, 0.2)] {
        let r = pair.printed_u(p, q) / pair.embed(p, q).expect("off-diagonal point").u;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    PqToUv {
        ratio_min: lo,
        ratio_max: hi,
        flag: (lo - 1.0).abs() > 1e-6 || (hi - 1.0).abs() > 1e-6,
    }
}

/// The printed constant-generator immersion against the general formula
/// at `e1 = 1`, `e2 = 2`, `(p, q) = (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Iota0Mismatch {
    pub printed: Vec3,
    pub computed: Vec3,
    pub flag: bool,
}

pub fn iota0_x1x2_mismatch() -> Iota0Mismatch {
    let pair = GeneratorPair::cubic(1.0, 2.0, (-2.0, 2.0), (-2.0, 2.0)).expect("cubic generators are convex");
    let printed = iota0_printed(1.0, 2.0, 0.0, 1.0).x;
    let computed = pair.embed(0.0, 1.0).expect("off-diagonal point").x;
    let d = printed - computed;
    Iota0Mismatch {
        printed,
        computed,
        flag: d[0].abs().max(d[1].abs()) > 1e-9,
    }
}

/// Lifts of the reference curve on `[0.8, 1.2]` compared with its exact
/// lift `r = t`, `s = 3/(2t)`, `v = 3t/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeSysSign {
    /// Largest error of the lift with the `(x1' + x2')^2` factor.
    pub verbatim_error: f64,
    /// Largest error of the lift with the `(x1' - x2')^2` factor.
    pub corrected_error: f64,
    /// Largest difference between the corrected and direct lifts.
    pub corrected_vs_direct: f64,
    pub flag: bool,
}

pub fn ode_sys_sign() -> OdeSysSign {
    let base = reference_curve();
    // the verbatim system blows up near t = 0.6, so stay on the compared interval
    let curve = InitialCurve::new(base.x, (0.8, 1.2), base.t0).expect("t0 inside");
    let run = |method| {
        let opts = LiftOptions {
            method,
            v0: 1.5,
            ..Default::default()
        };
        lift(&curve, &opts).expect("reference curve lifts on its base interval")
    };
    let (verb, corr, direct) = (
        run(LiftMethod::PrintedVerbatim),
        run(LiftMethod::PrintedOde),
        run(LiftMethod::DirectResidual),
    );
    let (mut ev, mut ec, mut cd) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..=40 {
        let t = 0.8 + 0.01 * i as f64;
        let exact = [t, 1.5 / t, 1.5 * t];
        let state = |l: &Lift| l.state(t).map(|s| [s.r, s.s, s.v]).unwrap_or([f64::NAN; 3]);
        let (a, b, c) = (state(&verb), state(&corr), state(&direct));
        for k in 0..3 {
            // a breakdown of the verbatim lift counts as a failure to reproduce
            ev = if a[k].is_finite() {
                ev.max((a[k] - exact[k]).abs())
            } else {
                f64::INFINITY
            };
            ec = ec.max((b[k] - exact[k]).abs());
            cd = cd.max((b[k] - c[k]).abs());
        }
    }
    OdeSysSign {
        verbatim_error: ev,
        corrected_error: ec,
        corrected_vs_direct: cd,
        flag: ev > 1e-1 && cd < 1e-7,
    }
}

/// All three checks; the flags are always present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrataReport {
    pub pq_to_uv_factor: PqToUv,
    pub iota0_x1x2_mismatch: Iota0Mismatch,
    pub ode_sys_sign: OdeSysSign,
}

pub fn errata_report() -> ErrataReport {
    ErrataReport {
        pq_to_uv_factor: pq_to_uv_factor(),
        iota0_x1x2_mismatch: iota0_x1x2_mismatch(),
        ode_sys_sign: ode_sys_sign(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_u_is_short_by_sqrt2() {
        let r = pq_to_uv_factor();
        assert!(r.flag);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.ratio_min - h).abs() < 1e-12 && (r.ratio_max - h).abs() < 1e-12);
    }

    #[test]
    fn iota0_values() {
        let r = iota0_x1x2_mismatch();
        assert!(r.flag);
        assert!((r.printed[0] - 25.0 / 24.0).abs() < 1e-12);
        assert!((r.computed[0] - 13.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn ode_sign_reproduced() {
        let r = ode_sys_sign();
        assert!(r.flag, "{r:?}");
        assert!(r.corrected_error < 1e-8);
    }
}
