//! Seeded random sampling of the library invariants.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use darboux_embed::g0::{
    first_integrals, phi, phi_inv, psi, psi_inv, so12_from_a, so12_from_pq, superpose, ACoords, CharPoint, FramePoint,
    GeneratorImmersion, GeneratorPair, PQPoint, PQ,
};
use darboux_embed::metrics::{catalog, CaseId};
use darboux_embed::numkit::{Mat3, Signature, Smooth1D, Vec3};
use darboux_embed::verify::{vertex_residuals, VerifyOptions};

use crate::args::SelftestArgs;
use crate::commands::Outcome;
use crate::report::Check;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn mat_rel(a: &Mat3, b: &Mat3) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

fn random_a(rng: &mut ChaCha8Rng) -> ACoords {
    ACoords::new(
        rng.random_range(0.2..4.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
    )
}

fn random_vec(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    )
}

pub fn run(a: &SelftestArgs) -> anyhow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let n = a.cases.max(1);
    let eta = Signature::Lorentz.gram();

    let (mut lorentz, mut chart, mut round_phi, mut round_psi, mut additivity) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let ac = random_a(&mut rng);
        let g = so12_from_a(ac)?;
        let scale = g.amax().powi(2).max(1.0);
        lorentz = lorentz.max((g.transpose() * eta * g - eta).amax() / scale);
        lorentz = lorentz.max((g.determinant() - 1.0).abs() / scale.powf(1.5));

        let u = rng.random_range(0.1..3.0);
        if (ac.a1 - ac.a2).abs() > 0.1 && (ac.a1 + ac.a2).abs() > 0.1 {
            let g2 = so12_from_pq(first_integrals(u, ac)?)?;
            chart = chart.max(mat_rel(&g2, &g));
            let n = FramePoint {
                u,
                v: rng.random_range(-2.0..2.0),
                a: ac,
                x: random_vec(&mut rng),
            };
            let back = phi_inv(&phi(&n)?)?;
            round_phi = round_phi
                .max(rel(back.u, n.u))
                .max(rel(back.a.a1, ac.a1))
                .max(rel(back.a.a2, ac.a2))
                .max(rel(back.a.a3, ac.a3));
        }

        let (p, q): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        if (p - q).abs() > 1e-2 {
            let pt = PQPoint {
                pq: PQ::new(p, rng.random_range(0.2..2.0), q, rng.random_range(0.2..2.0)),
                v: rng.random_range(-2.0..2.0),
                x: random_vec(&mut rng),
            };
            let back = psi_inv(&psi(&pt));
            round_psi = round_psi.max((back.x - pt.x).amax() / pt.x.amax().max(1.0));

            let cp = |w: f64, w0: f64, rng: &mut ChaCha8Rng| CharPoint {
                w,
                w0,
                v: rng.random_range(-2.0..2.0),
                y: random_vec(rng),
            };
            let (plus, minus) = (cp(p, pt.pq.p0, &mut rng), cp(q, pt.pq.q0, &mut rng));
            let (dv, dy) = (rng.random_range(-1.0..1.0), random_vec(&mut rng));
            let base = superpose(&plus, &minus)?;
            let moved = superpose(&plus.shifted(dv, dy), &minus)?;
            additivity = additivity
                .max((moved.v - base.v - dv).abs())
                .max((moved.y - base.y - dy).amax());
        }
    }

    let mut curvature = 0.0f64;
    for id in CaseId::ALL {
        let nf = catalog(id);
        let d = nf.metric.domain.inset(0.05);
        for _ in 0..(n / 10).max(5) {
            let (u, v) = d.lerp(rng.random::<f64>(), rng.random::<f64>());
            curvature = curvature.max(rel(nf.metric.gauss_curvature(u, v)?, nf.curvature(u)));
        }
    }

    // one random convex pair, checked at a few off-diagonal points
    let c3 = rng.random_range(0.05..0.5);
    let f = Smooth1D::poly(vec![0.0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), c3]);
    let g = Smooth1D::poly(vec![0.0, rng.random_range(-1.0..1.0), 0.0, c3 * 2.0, 0.01]);
    let pair = GeneratorPair::new(f, g, (0.0, 1.0), (1.5, 2.5))?;
    let metric = darboux_embed::g0::g0_metric();
    let (mut isometry, mut pfaffian) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let (p, q) = (rng.random_range(0.1..0.9), rng.random_range(1.6..2.4));
        let r = vertex_residuals(&GeneratorImmersion(&pair), &metric, p, q, &VerifyOptions::default())?;
        isometry = isometry.max(r.isometry);
        pfaffian = pfaffian.max(r.pfaffian.unwrap_or(f64::INFINITY));
    }

    let tolerances = BTreeMap::from([
        ("lorentz", 1e-10),
        ("chart", 1e-10),
        ("round_trip", 1e-12),
        ("additivity", 1e-12),
        ("curvature", 1e-5),
        ("isometry", 1e-5),
        ("pfaffian", 1e-4),
    ]);
    let checks = vec![
        Check::below("SO(1,2) membership", lorentz, 1e-10),
        Check::below("chart consistency", chart, 1e-10),
        Check::below("phi round trip", round_phi, 1e-12),
        Check::below("psi round trip", round_psi, 1e-12),
        Check::below("superposition additivity", additivity, 1e-12),
        Check::below("catalog curvature", curvature, 1e-5),
        Check::below("generator isometry", isometry, 1e-5),
        Check::below("generator structure equations", pfaffian, 1e-4),
    ];
    Ok(Outcome {
        tolerances,
        checks,
        result: serde_json::json!({ "seed": a.seed, "cases": n }),
    })
}
