//! One PASS/FAIL line per acceptance criterion. Runtime budgets count
//! toward the verdict; the process exits non-zero if any line fails.

use std::cell::Cell;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use darboux_embed::cauchy::{
    max_constraint_residual, reference_chart, reference_curve, reference_surface, solve, CauchyOptions, InitialCurve,
    LiftOptions,
};
use darboux_embed::darboux::{check_integrability, curvature_jet_rotated, q_residuals, CheckOptions};
use darboux_embed::errata::{iota0_x1x2_mismatch, ode_sys_sign};
use darboux_embed::g0::{
    first_integrals, g0_metric, phi, phi_inv, psi, psi_inv, so12_from_a, so12_from_pq, special_embedding,
    special_pq_of_uv, superpose, ACoords, CharPoint, FramePoint, GeneratorImmersion, GeneratorPair, PQPoint,
    SpecialImmersion, PQ,
};
use darboux_embed::mesh::{MeshSummary, ParamGrid, SurfaceMesh};
use darboux_embed::metrics::{builtin, catalog, CaseId, MetricClass};
use darboux_embed::numkit::{Mat3, Signature, Smooth1D, Vec3};
use darboux_embed::par::Exec;
use darboux_embed::revolve::{revolve, ExtrinsicParams, RevolveOptions};
use darboux_embed::verify::VerifyOptions;

type Outcome = Result<(bool, String), String>;

struct Suite {
    failures: usize,
    /// Worst structure-equation residual over every mesh built so far.
    pfaffian: Cell<f64>,
}

impl Suite {
    fn run(&mut self, id: u32, title: &str, budget: Option<f64>, f: impl FnOnce(&Suite) -> Outcome) {
        let start = Instant::now();
        let out = f(self);
        let secs = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs < b);
        let (pass, detail) = match out {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let limit = budget.map(|b| format!(" < {b} s")).unwrap_or_default();
        println!(
            "{} [{id}] {title}: {detail} ({secs:.2} s{limit})",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failures += 1;
        }
    }

    fn note_mesh(&self, s: &MeshSummary) {
        if let Some(p) = s.pfaffian {
            self.pfaffian.set(self.pfaffian.get().max(p.max));
        }
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn catalog_curvature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for id in CaseId::ALL {
        let nf = catalog(id);
        let d = nf.metric.domain.inset(0.01);
        for _ in 0..100 {
            let (u, v) = d.lerp(rng.random(), rng.random());
            let k = nf.metric.gauss_curvature(u, v).map_err(err)?;
            let exact = nf.curvature(u);
            worst = worst.max((k - exact).abs() / exact.abs());
        }
    }
    Ok((worst < 1e-5, format!("max relative error {worst:.2e} (tol 1e-5)")))
}

fn verdicts() -> Outcome {
    let opts = CheckOptions::default();
    let mut wrong = Vec::new();
    let mut worst_pass = 0.0f64;
    for id in CaseId::ALL {
        let r = check_integrability(&catalog(id).metric, &opts).map_err(err)?;
        worst_pass = worst_pass.max(r.max_residual);
        if !r.verdict {
            wrong.push(id.as_str().to_string());
        }
    }
    let mut least_fail = f64::INFINITY;
    for name in ["sphere", "hyperbolic-plane", "perturbed-R1"] {
        let r = check_integrability(&builtin(name).map_err(err)?, &opts).map_err(err)?;
        least_fail = least_fail.min(r.max_residual);
        if r.verdict {
            wrong.push(name.to_string());
        }
    }
    Ok((
        wrong.is_empty(),
        format!("catalog max residual {worst_pass:.2e}, smallest rejected residual {least_fail:.2e}, wrong verdicts {wrong:?}"),
    ))
}

fn random_a(rng: &mut ChaCha8Rng) -> ACoords {
    ACoords::new(
        rng.random_range(0.2..4.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
    )
}

fn so12_chart() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eta = Signature::Lorentz.gram();
    let (mut member, mut chart) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let a = random_a(&mut rng);
        let g = so12_from_a(a).map_err(err)?;
        // relative to the size of the entries, which reach ~1e2
        let scale = g.amax().powi(2).max(1.0);
        member = member
            .max((g.transpose() * eta * g - eta).amax() / scale)
            .max((g.determinant() - 1.0).abs() / scale.powf(1.5));
        let u = rng.random_range(0.1..3.0);
        let g2 = so12_from_pq(first_integrals(u, a).map_err(err)?).map_err(err)?;
        chart = chart.max((g2 - g).amax() / g.amax().max(1.0));
    }
    let identity = so12_from_a(ACoords::new(1.0, 0.0, 0.0)).map_err(err)? == Mat3::identity();
    Ok((
        member < 1e-10 && chart < 1e-10 && identity,
        format!("membership {member:.2e}, chart consistency {chart:.2e} (tol 1e-10), g(1,0,0) = I exactly: {identity}"),
    ))
}

/// Polynomial of degree 3 to 5 with positive leading coefficient whose
/// third derivative stays above 1/2 on `dom`. Near `F''' = 0` the fourth
/// root in `w0` steepens and the stencil residuals measure truncation error
/// rather than the immersion.
fn convex_generator(rng: &mut ChaCha8Rng, dom: (f64, f64)) -> Smooth1D {
    loop {
        let deg = rng.random_range(3..=5usize);
        let mut c: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
        c[deg] = rng.random_range(0.05..1.0);
        let f = Smooth1D::poly(c);
        let ok = (0..=200).all(|i| f.derivs(dom.0 + (dom.1 - dom.0) * i as f64 / 200.0)[3] > 0.5);
        if ok {
            return f;
        }
    }
}

fn general_isometry(suite: &Suite) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let metric = g0_metric();
    let (mut iso, mut curv) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let p0 = rng.random_range(-2.0..1.0);
        let p_dom = (p0, p0 + rng.random_range(0.5..1.0));
        let gap = rng.random_range(0.3..1.0);
        let q_dom = (p_dom.1 + gap, p_dom.1 + gap + rng.random_range(0.5..1.0));
        // either side may sit to the left
        let (p_dom, q_dom) = if rng.random::<bool>() {
            (p_dom, q_dom)
        } else {
            (q_dom, p_dom)
        };
        let pair = GeneratorPair::new(
            convex_generator(&mut rng, p_dom),
            convex_generator(&mut rng, q_dom),
            p_dom,
            q_dom,
        )
        .map_err(err)?;
        let grid = ParamGrid::new(p_dom, q_dom, [50, 50]);
        let mesh = SurfaceMesh::sample(
            &GeneratorImmersion(&pair),
            &metric,
            ["p", "q"],
            grid,
            &VerifyOptions::default(),
            Exec::Parallel,
        )
        .map_err(err)?;
        let s = mesh.summary(1);
        suite.note_mesh(&s);
        iso = iso.max(s.isometry.max);
        curv = curv.max(s.curvature.max);
    }
    Ok((
        iso < 1e-5 && curv < 1e-3,
        format!("isometry {iso:.2e} (tol 1e-5), curvature {curv:.2e} (tol 1e-3) over 20 pairs"),
    ))
}

fn constant_generators(suite: &Suite) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for (e1, e2) in [(1.0, 2.0), (1.0, 4.0), (2.0, 3.0)] {
        // |u|, |v| < 2 keeps p and q inside [-10, 10]
        let pair = GeneratorPair::cubic(e1, e2, (-10.0, 10.0), (-10.0, 10.0)).map_err(err)?;
        let mut n = 0;
        while n < 1000 {
            let (u, v): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            if u.abs() <= 1e-3 {
                continue;
            }
            n += 1;
            let (p, q) = special_pq_of_uv(e1, e2, u, v).map_err(err)?;
            let g = pair.embed(p, q).map_err(err)?;
            let x = special_embedding(e1, e2, u, v).map_err(err)?;
            worst = worst.max((g.x - x).amax()).max((g.u - u).abs()).max((g.v - v).abs());
        }
        let grid = ParamGrid::new((0.3, 1.5), (-1.0, 1.0), [21, 21]);
        let mesh = SurfaceMesh::sample(
            &SpecialImmersion { e1, e2 },
            &g0_metric(),
            ["u", "v"],
            grid,
            &VerifyOptions::default(),
            Exec::Parallel,
        )
        .map_err(err)?;
        suite.note_mesh(&mesh.summary(1));
    }
    let flag = iota0_x1x2_mismatch().flag;
    Ok((
        worst < 1e-9 && flag,
        format!("max deviation {worst:.2e} (tol 1e-9), iota0 errata flag {flag}"),
    ))
}

fn example_cauchy(suite: &Suite) -> Outcome {
    let curve = reference_curve();
    let opts = CauchyOptions {
        lift: LiftOptions {
            v0: 1.5,
            ..Default::default()
        },
        range: Some((0.8, 1.2)),
        ..Default::default()
    };
    let sol = solve(&curve, &opts).map_err(err)?;
    suite.note_mesh(&sol.report.mesh);

    let near = InitialCurve::new(curve.x.clone(), (0.8, 1.2), 1.0).map_err(err)?;
    let constraint = max_constraint_residual(&near).max;
    let full = max_constraint_residual(&curve);

    let mut lift_err = 0.0f64;
    for i in 0..=400 {
        let t = 0.8 + 0.001 * i as f64;
        let s = sol.lift.state(t).map_err(err)?;
        lift_err = lift_err
            .max((s.r - t).abs())
            .max((s.s - 1.5 / t).abs())
            .max((s.v - 1.5 * t).abs());
    }

    let mut surface = 0.0f64;
    for (k, x) in sol.mesh.positions.iter().enumerate() {
        let (t1, t2) = sol.mesh.grid.point(k);
        let (u, v) = reference_chart(t1, t2);
        surface = surface.max((x - reference_surface(u, v)).amax());
    }

    let imm = sol.immersion();
    let x11 = imm.point(1.0, 1.0).map_err(err)?.x;
    let x12 = imm.point(1.0, 2.0).map_err(err)?.x;
    let spots = (x11 - Vec3::new(0.875, -0.125, 0.75))
        .amax()
        .max((x12[2] - 15.0 / 8.0).abs())
        .max((x12[0] - 17.0 / 6.0).abs());
    let diagonal = sol.report.diagonal;

    let ok = constraint < 1e-12 && lift_err < 1e-8 && surface < 1e-6 && spots < 1e-8 && diagonal < 1e-7;
    Ok((
        ok,
        format!(
            "(a) constraint {constraint:.2e} on [0.8, 1.2] (tol 1e-12; over [0.5, 2.5] raw {:.2e} at t = {:.2}, relative {:.2e}) \
             (b) lift {lift_err:.2e} (tol 1e-8) (c) surface {surface:.2e} (tol 1e-6) \
             (d) spot values {spots:.2e} (tol 1e-8) (e) diagonal {diagonal:.2e} (tol 1e-7)",
            full.max, full.at, full.relative
        ),
    ))
}

fn errata_lift() -> Outcome {
    let r = ode_sys_sign();
    Ok((
        r.verbatim_error > 1e-1 && r.corrected_vs_direct < 1e-7 && r.flag,
        format!(
            "verbatim error {:.2e} (> 1e-1), corrected vs direct {:.2e} (tol 1e-7), flag {}",
            r.verbatim_error, r.corrected_vs_direct, r.flag
        ),
    ))
}

fn paraboloid(suite: &Suite) -> Outcome {
    let sol = revolve(
        CaseId::R1,
        ExtrinsicParams { alpha: 3.0, beta: 0.0 },
        &RevolveOptions::new((0.05, 1.5)),
    )
    .map_err(err)?;
    let r = &sol.report;
    suite.note_mesh(&r.mesh);
    let dev = r.paraboloid.unwrap_or(f64::INFINITY);
    let drift = r.conservation_alpha.max(r.conservation_beta);
    let iso = r.mesh.isometry.max;
    Ok((
        dev < 1e-5 && drift < 1e-8 && iso < 1e-5,
        format!("paraboloid deviation {dev:.2e} (tol 1e-5), conservation drift {drift:.2e} (tol 1e-8), isometry {iso:.2e} (tol 1e-5)"),
    ))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn random_vec(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    )
}

fn properties(suite: &Suite) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut round_phi, mut round_psi, mut additivity) = (0.0f64, 0.0f64, 0.0f64);
    let mut n = 0;
    while n < 2000 {
        let a = random_a(&mut rng);
        // phi divides by a1 - a2 and a1 + a2
        if (a.a1 - a.a2).abs() <= 0.1 || (a.a1 + a.a2).abs() <= 0.1 {
            continue;
        }
        n += 1;
        let fp = FramePoint {
            u: rng.random_range(0.1..3.0),
            v: rng.random_range(-2.0..2.0),
            a,
            x: random_vec(&mut rng),
        };
        let back = phi_inv(&phi(&fp).map_err(err)?).map_err(err)?;
        round_phi = round_phi
            .max(rel(back.u, fp.u))
            .max(rel(back.v, fp.v))
            .max(rel(back.a.a1, a.a1))
            .max(rel(back.a.a2, a.a2))
            .max(rel(back.a.a3, a.a3))
            .max((back.x - fp.x).amax() / fp.x.amax().max(1.0));

        let (p, q): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        if (p - q).abs() <= 1e-2 {
            continue;
        }
        let pt = PQPoint {
            pq: PQ::new(p, rng.random_range(0.2..2.0), q, rng.random_range(0.2..2.0)),
            v: rng.random_range(-2.0..2.0),
            x: random_vec(&mut rng),
        };
        let back = psi_inv(&psi(&pt));
        round_psi = round_psi
            .max((back.x - pt.x).amax() / pt.x.amax().max(1.0))
            .max(rel(back.v, pt.v));

        let mut cp = |w: f64, w0: f64| CharPoint {
            w,
            w0,
            v: rng.random_range(-2.0..2.0),
            y: random_vec(&mut rng),
        };
        let (plus, minus) = (cp(p, pt.pq.p0), cp(q, pt.pq.q0));
        let (dv, dy) = (rng.random_range(-1.0..1.0), random_vec(&mut rng));
        let base = superpose(&plus, &minus).map_err(err)?;
        let left = superpose(&plus.shifted(dv, dy), &minus).map_err(err)?;
        let right = superpose(&plus, &minus.shifted(dv, dy)).map_err(err)?;
        for moved in [left, right] {
            additivity = additivity
                .max((moved.v - base.v - dv).abs())
                .max((moved.y - base.y - dy).amax());
        }
    }

    // rotating the orthonormal frame must not change the residuals
    let mut rotation = 0.0f64;
    for id in CaseId::ALL {
        let nf = catalog(id);
        if nf.class != MetricClass::Riemannian {
            continue;
        }
        let d = nf.metric.domain.inset(0.1);
        for _ in 0..20 {
            let (u, v) = d.lerp(rng.random(), rng.random());
            let base = q_residuals(nf.class, &curvature_jet_rotated(&nf.metric, u, v, 0.0).map_err(err)?);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let turned = q_residuals(nf.class, &curvature_jet_rotated(&nf.metric, u, v, theta).map_err(err)?);
            for (a, b) in base.iter().zip(turned) {
                rotation = rotation.max((a - b).abs());
            }
        }
    }
    // off the integrable locus only the size of the residual is frame independent
    let bumpy = builtin("perturbed-R1").map_err(err)?;
    let norm = |r: [f64; 4]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d = bumpy.domain.inset(0.1);
    for _ in 0..20 {
        let (u, v) = d.lerp(rng.random(), rng.random());
        let class = bumpy.class();
        let base = norm(q_residuals(
            class,
            &curvature_jet_rotated(&bumpy, u, v, 0.0).map_err(err)?,
        ));
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let turned = norm(q_residuals(
            class,
            &curvature_jet_rotated(&bumpy, u, v, theta).map_err(err)?,
        ));
        rotation = rotation.max((base - turned).abs());
    }

    let pfaffian = suite.pfaffian.get();
    let ok = round_phi < 1e-12 && round_psi < 1e-12 && additivity < 1e-12 && pfaffian < 1e-4 && rotation < 1e-6;
    Ok((
        ok,
        format!(
            "phi round trip {round_phi:.2e}, psi round trip {round_psi:.2e} (tol 1e-12), additivity {additivity:.2e}, \
             structure equations on all meshes {pfaffian:.2e} (tol 1e-4), frame rotation {rotation:.2e} (tol 1e-6)"
        ),
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut suite = Suite {
        failures: 0,
        pfaffian: Cell::new(0.0),
    };
    suite.run(1, "catalog curvature", Some(5.0), |_| catalog_curvature());
    suite.run(2, "integrability verdicts", Some(10.0), |_| verdicts());
    suite.run(3, "SO(1,2) chart", None, |_| so12_chart());
    suite.run(4, "general embedding isometry", None, general_isometry);
    suite.run(5, "constant generators", None, constant_generators);
    suite.run(6, "worked Cauchy problem", Some(10.0), example_cauchy);
    suite.run(7, "Cauchy lift sign", None, |_| errata_lift());
    suite.run(8, "extrinsic paraboloid", None, paraboloid);
    suite.run(9, "property suites", None, properties);
    let total = start.elapsed().as_secs_f64();
    let in_time = total < 60.0;
    println!(
        "{} [all] total runtime {total:.2} s (budget 60 s)",
        if in_time { "PASS" } else { "FAIL" }
    );
    if suite.failures > 0 || !in_time {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
