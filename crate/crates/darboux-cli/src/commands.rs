use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;

use darboux_embed::cauchy::{self, CauchyError, CauchyOptions, CurveSpec, LiftOptions};
use darboux_embed::darboux::{check_integrability, CheckOptions};
use darboux_embed::g0::{
    g0_metric, special_embedding, special_pq_of_uv, GeneratorImmersion, GeneratorPair, SpecialImmersion,
};
use darboux_embed::mesh::{chart_jacobians, jacobian_sign_changes, MeshSummary, ParamGrid, SurfaceMesh};
use darboux_embed::metrics::{builtin, builtin_names, catalog, CaseId, MetricClass, MetricSpec, OrthogonalMetric2D};
use darboux_embed::numkit::Smooth1D;
use darboux_embed::par::Exec;
use darboux_embed::revolve::{revolve, ExtrinsicParams, RevolveError, RevolveOptions};
use darboux_embed::verify::{Immersion, VerifyOptions};

use crate::args::{CatalogArgs, CauchyArgs, CheckArgs, EmbedArgs, MeshTolerances, RevolveArgs};
use crate::report::{precheck_output, write_json, Check};

/// A computation that ran but could not reach a result; the driver reports
/// it as a failed verdict rather than a usage error.
#[derive(Debug)]
pub struct Failed(pub String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

fn failed(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow::Error::new(Failed(e.to_string()))
}

/// What a command hands back to the driver for printing and the report.
pub struct Outcome {
    pub tolerances: BTreeMap<&'static str, f64>,
    pub checks: Vec<Check>,
    pub result: serde_json::Value,
}

impl Outcome {
    pub fn failure(f: &Failed) -> Outcome {
        Outcome {
            tolerances: BTreeMap::new(),
            checks: vec![Check::holds(&format!("computation ({})", f.0), false)],
            result: serde_json::json!({ "error": f.0 }),
        }
    }
}

fn positive(name: &str, x: f64) -> anyhow::Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        bail!("{name} must be positive, got {x}")
    }
}

fn mesh_tolerances(t: &MeshTolerances) -> anyhow::Result<BTreeMap<&'static str, f64>> {
    Ok(BTreeMap::from([
        ("isometry", positive("--tol-isometry", t.tol_isometry)?),
        ("curvature", positive("--tol-curvature", t.tol_curvature)?),
        ("pfaffian", positive("--tol-pfaffian", t.tol_pfaffian)?),
    ]))
}

fn mesh_checks(s: &MeshSummary, t: &MeshTolerances) -> Vec<Check> {
    let mut out = vec![
        Check::below("mesh isometry", s.isometry.max, t.tol_isometry),
        Check::below("mesh curvature", s.curvature.max, t.tol_curvature),
    ];
    if let Some(p) = s.pfaffian {
        out.push(Check::below("mesh structure equations", p.max, t.tol_pfaffian));
    }
    out
}

fn precheck(out: &Option<std::path::PathBuf>, report: &Option<std::path::PathBuf>) -> anyhow::Result<()> {
    if let Some(p) = out {
        precheck_output(p, true)?;
    }
    if let Some(p) = report {
        precheck_output(p, false)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CatalogEntry {
    id: String,
    class: Option<MetricClass>,
    epsilon: Option<i8>,
    signs: [i8; 2],
    domain: [[f64; 2]; 2],
    curvature_mid: f64,
}

fn entry(
    id: &str,
    m: &OrthogonalMetric2D,
    class: Option<MetricClass>,
    epsilon: Option<i8>,
) -> anyhow::Result<CatalogEntry> {
    let d = m.domain;
    let (u, v) = d.lerp(0.5, 0.5);
    Ok(CatalogEntry {
        id: id.to_string(),
        class,
        epsilon,
        signs: [m.sign_u, m.sign_v],
        domain: [[d.u.0, d.u.1], [d.v.0, d.v.1]],
        curvature_mid: m.gauss_curvature(u, v)?,
    })
}

pub fn catalog_cmd(a: &CatalogArgs) -> anyhow::Result<()> {
    if let Some(p) = &a.out {
        precheck_output(p, false)?;
    }
    let mut rows = Vec::new();
    for id in CaseId::ALL {
        let nf = catalog(id);
        rows.push(entry(id.as_str(), &nf.metric, Some(nf.class), Some(nf.epsilon))?);
    }
    for name in builtin_names() {
        rows.push(entry(name, &builtin(name)?, None, None)?);
    }
    println!(
        "{:<18} {:>4} {:>7}  {:<24} {:>12}",
        "id", "eps", "signs", "domain (u)", "K(mid)"
    );
    for r in &rows {
        let eps = r.epsilon.map(|e| format!("{e:+}")).unwrap_or_else(|| "-".into());
        let dom = format!("[{}, {}]", r.domain[0][0], r.domain[0][1]);
        println!(
            "{:<18} {:>4} {:>+3},{:<+3}  {:<24} {:>12.5e}",
            r.id, eps, r.signs[0], r.signs[1], dom, r.curvature_mid
        );
    }
    if let Some(p) = &a.out {
        write_json(
            p,
            &serde_json::json!({ "schema_version": crate::report::SCHEMA_VERSION, "metrics": rows }),
        )?;
    }
    Ok(())
}

/// A catalog id, a built-in test metric, or a JSON metric file.
pub fn resolve_metric(spec: &str) -> anyhow::Result<OrthogonalMetric2D> {
    if let Ok(id) = CaseId::from_str(spec) {
        return Ok(catalog(id).metric);
    }
    if builtin_names().contains(&spec) {
        return Ok(builtin(spec)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        let ms: MetricSpec = serde_json::from_str(&text).with_context(|| format!("parsing metric {spec}"))?;
        return Ok(ms.build()?);
    }
    bail!(
        "unknown metric {spec:?}: not a catalog id, a built-in ({}), or a file",
        builtin_names().join(", ")
    )
}

pub fn check_cmd(a: &CheckArgs, exec: Exec) -> anyhow::Result<Outcome> {
    let tol = positive("--tol", a.tol)?;
    if !(0.0..0.5).contains(&a.inset) {
        bail!("--inset must lie in [0, 0.5), got {}", a.inset);
    }
    if let Some(p) = &a.out {
        precheck_output(p, false)?;
    }
    let m = resolve_metric(&a.metric)?;
    let opts = CheckOptions {
        grid: a.grid.0,
        tol,
        inset: a.inset,
        exec,
    };
    let r = check_integrability(&m, &opts).map_err(failed)?;
    let worst = r
        .samples
        .iter()
        .max_by(|x, y| {
            let mx = |s: &darboux_embed::darboux::SampleResidual| s.q_form.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            mx(x).total_cmp(&mx(y))
        })
        .copied();
    let checks = vec![Check::below("integrability residual", r.max_residual, tol)];
    let result = serde_json::json!({
        "metric": a.metric,
        "class": r.class,
        "epsilon": r.epsilon,
        "grid": r.grid,
        "max_residual": r.max_residual,
        "mean_residual": r.mean_residual,
        "max_k_residual": r.max_k_residual,
        "verdict": r.verdict,
        "worst_sample": worst,
    });
    Ok(Outcome {
        tolerances: BTreeMap::from([("integrability", tol)]),
        checks,
        result,
    })
}

/// Parse a generating function argument.
pub fn parse_generator(s: &str) -> anyhow::Result<Smooth1D> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("cubic:") {
        let e: f64 = e.trim().parse().with_context(|| format!("bad cubic preset {s:?}"))?;
        return Ok(Smooth1D::poly(vec![0.0, 0.0, 0.0, e.powi(4) / 48.0]));
    }
    let from_json = |text: &str| -> anyhow::Result<Smooth1D> {
        match serde_json::from_str::<Vec<f64>>(text) {
            Ok(c) => Ok(Smooth1D::poly(c)),
            Err(_) => serde_json::from_str::<Smooth1D>(text).with_context(|| format!("parsing generator {s:?}")),
        }
    };
    if s.starts_with('[') || s.starts_with('{') {
        return from_json(s);
    }
    if s.ends_with(".json") {
        let text = fs::read_to_string(s).with_context(|| format!("reading {s}"))?;
        return from_json(&text);
    }
    let coeffs = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| anyhow!("generator {s:?} is not a preset, JSON, file or coefficient list: {e}"))?;
    Ok(Smooth1D::poly(coeffs))
}

#[derive(Serialize)]
struct EmbedResult {
    mode: &'static str,
    axes: [String; 2],
    domain: [[f64; 2]; 2],
    grid: [usize; 2],
    branches: Option<[i8; 2]>,
    u_range: [f64; 2],
    jacobian_sign_changes: usize,
    generator_agreement: Option<f64>,
    mesh: MeshSummary,
}

fn u_range(imm: &dyn Immersion, grid: &ParamGrid) -> anyhow::Result<[f64; 2]> {
    let mut r = [f64::INFINITY, f64::NEG_INFINITY];
    for k in 0..grid.len() {
        let (a, b) = grid.point(k);
        let u = imm.chart(a, b)?.0;
        r = [r[0].min(u), r[1].max(u)];
    }
    Ok(r)
}

pub fn embed_cmd(a: &EmbedArgs, exec: Exec) -> anyhow::Result<(Outcome, SurfaceMesh)> {
    let tolerances = mesh_tolerances(&a.tol)?;
    precheck(&a.out, &a.report)?;
    let verify = VerifyOptions::default();
    let metric = g0_metric();
    let (mesh, res, mut checks, tolerances) = match (&a.f, &a.g, &a.special) {
        (Some(f), Some(g), None) => {
            let dom = a
                .pq_domain
                .ok_or_else(|| anyhow!("--pq-domain is required with --F and --G"))?;
            let ((pa, pb), (qa, qb)) = (dom.first(), dom.second());
            if !(pb < qa || qb < pa) {
                bail!("--pq-domain must not meet the diagonal p = q");
            }
            let pair = GeneratorPair::new(parse_generator(f)?, parse_generator(g)?, (pa, pb), (qa, qb))?
                .with_branches(a.neg_p0, a.neg_q0);
            let imm = GeneratorImmersion(&pair);
            let grid = ParamGrid::new((pa, pb), (qa, qb), a.grid.0);
            let mesh = SurfaceMesh::sample(&imm, &metric, ["p", "q"], grid, &verify, exec).map_err(failed)?;
            let dets = chart_jacobians(&imm, &grid, 1e-5, exec).map_err(failed)?;
            let res = EmbedResult {
                mode: "generators",
                axes: mesh.axes.clone(),
                domain: [[pa, pb], [qa, qb]],
                grid: a.grid.0,
                branches: Some([if a.neg_p0 { -1 } else { 1 }, if a.neg_q0 { -1 } else { 1 }]),
                u_range: u_range(&imm, &grid)?,
                jacobian_sign_changes: jacobian_sign_changes(&dets, &grid),
                generator_agreement: None,
                mesh: mesh.summary(1),
            };
            (mesh, res, Vec::new(), tolerances)
        }
        (None, None, Some(e)) => {
            let dom = a
                .uv_domain
                .ok_or_else(|| anyhow!("--uv-domain is required with --special"))?;
            let ((ua, ub), (va, vb)) = (dom.first(), dom.second());
            if ua <= 0.0 && 0.0 <= ub {
                bail!("--uv-domain must not contain u = 0, where the metric degenerates");
            }
            let (e1, e2) = (e.0, e.1);
            special_embedding(e1, e2, 0.0, 0.0)?;
            let imm = SpecialImmersion { e1, e2 };
            let grid = ParamGrid::new((ua, ub), (va, vb), a.grid.0);
            let mesh = SurfaceMesh::sample(&imm, &metric, ["u", "v"], grid, &verify, exec).map_err(failed)?;
            // the (p, q) image of the box is spanned by its corners
            let corners: Vec<(f64, f64)> = [(ua, va), (ua, vb), (ub, va), (ub, vb)]
                .iter()
                .map(|&(u, v)| special_pq_of_uv(e1, e2, u, v))
                .collect::<Result<_, _>>()?;
            let span = |f: fn(&(f64, f64)) -> f64| {
                let lo = corners.iter().map(f).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
                (lo - 1e-6, hi + 1e-6)
            };
            let pair = GeneratorPair::cubic(e1, e2, span(|c| c.0), span(|c| c.1))?;
            let mut agreement = 0.0f64;
            for k in 0..grid.len() {
                let (u, v) = grid.point(k);
                let (p, q) = special_pq_of_uv(e1, e2, u, v)?;
                let d = pair.embed(p, q).map_err(failed)?.x - special_embedding(e1, e2, u, v)?;
                agreement = agreement.max(d.amax());
            }
            let res = EmbedResult {
                mode: "special",
                axes: mesh.axes.clone(),
                domain: [[ua, ub], [va, vb]],
                grid: a.grid.0,
                branches: None,
                u_range: [ua, ub],
                jacobian_sign_changes: 0,
                generator_agreement: Some(agreement),
                mesh: mesh.summary(1),
            };
            let mut tol = tolerances;
            tol.insert("generator_agreement", 1e-9);
            (
                mesh,
                res,
                vec![Check::below("generators vs closed form", agreement, 1e-9)],
                tol,
            )
        }
        _ => bail!("give either --F and --G with --pq-domain, or --special with --uv-domain"),
    };
    let mut all = mesh_checks(&res.mesh, &a.tol);
    all.append(&mut checks);
    Ok((
        Outcome {
            tolerances,
            checks: all,
            result: serde_json::to_value(&res)?,
        },
        mesh,
    ))
}

pub fn cauchy_cmd(a: &CauchyArgs, exec: Exec) -> anyhow::Result<(Outcome, SurfaceMesh)> {
    let mut tolerances = mesh_tolerances(&a.tol)?;
    tolerances.insert("diagonal", positive("--tol-diagonal", a.tol_diagonal)?);
    precheck(&a.out, &a.report)?;
    let text = fs::read_to_string(&a.curve).with_context(|| format!("reading {}", a.curve.display()))?;
    let spec: CurveSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing curve {}", a.curve.display()))?;
    let mut curve = spec.build()?;
    if let Some(t0) = a.t0 {
        curve = curve.with_t0(t0)?;
    }
    let opts = CauchyOptions {
        lift: LiftOptions {
            r0: a.r0,
            dr0: a.dr0,
            s0: a.s0,
            v0: a.v0,
            method: a.method,
            ..Default::default()
        },
        grid: a.grid.0,
        range: a.range.map(|r| r.interval()).transpose().map_err(|e| anyhow!(e))?,
        exec,
        ..Default::default()
    };
    let sol = cauchy::solve(&curve, &opts).map_err(|e| match e {
        CauchyError::BadParameter { .. } | CauchyError::BadDomain { .. } | CauchyError::OutsideLift { .. } => e.into(),
        e => failed(e),
    })?;
    let r = &sol.report;
    let mut checks = vec![
        Check::holds("curve admissible", r.admissibility.pass),
        Check::below("diagonal reproduces the curve", r.diagonal, a.tol_diagonal),
    ];
    checks.extend(mesh_checks(&r.mesh, &a.tol));
    Ok((
        Outcome {
            tolerances,
            checks,
            result: serde_json::to_value(r)?,
        },
        sol.mesh,
    ))
}

pub fn revolve_cmd(a: &RevolveArgs, exec: Exec) -> anyhow::Result<(Outcome, SurfaceMesh)> {
    let mut tolerances = mesh_tolerances(&a.tol)?;
    tolerances.insert("conservation", positive("--tol-conservation", a.tol_conservation)?);
    tolerances.insert("shape", positive("--tol-shape", a.tol_shape)?);
    tolerances.insert("killing", positive("--tol-killing", a.tol_killing)?);
    precheck(&a.out, &a.report)?;
    let case = CaseId::from_str(&a.metric).map_err(|e| anyhow!("{e}"))?;
    let s_range = a.s_range.interval().map_err(|e| anyhow!(e))?;
    let mut opts = RevolveOptions::new(s_range);
    opts.t_range = a.t_range.map(|r| r.interval()).transpose().map_err(|e| anyhow!(e))?;
    opts.grid = a.grid.0;
    opts.exec = exec;
    let params = ExtrinsicParams {
        alpha: a.alpha,
        beta: a.beta,
    };
    let sol = revolve(case, params, &opts).map_err(|e| match e {
        RevolveError::NotRiemannian(_) | RevolveError::BadAlpha(_) | RevolveError::BadRange { .. } => e.into(),
        e => failed(e),
    })?;
    let r = &sol.report;
    let mut checks = vec![
        Check::below("conservation (beta)", r.conservation_beta, a.tol_conservation),
        Check::below("conservation (alpha)", r.conservation_alpha, a.tol_conservation),
        Check::below("frame orthonormality", r.frame_defect, a.tol_conservation),
        Check::below("killing system", r.killing_residual, a.tol_killing),
    ];
    if let Some(d) = r.paraboloid {
        checks.push(Check::below("paraboloid deviation", d, a.tol_shape));
    }
    if let Some(d) = r.mirror {
        checks.push(Check::below("mirror symmetry", d, a.tol_shape));
    }
    checks.extend(mesh_checks(&r.mesh, &a.tol));
    Ok((
        Outcome {
            tolerances,
            checks,
            result: serde_json::to_value(r)?,
        },
        sol.mesh,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_syntax() {
        let c = parse_generator("cubic:2").unwrap();
        assert!((c.derivs(1.0)[3] - 2.0).abs() < 1e-12);
        assert_eq!(
            parse_generator("0, 0, 0, 1").unwrap(),
            Smooth1D::poly(vec![0.0, 0.0, 0.0, 1.0])
        );
        assert_eq!(parse_generator("[1, 2]").unwrap(), Smooth1D::poly(vec![1.0, 2.0]));
        assert!(parse_generator("{\"named\": {\"fn\": \"exp\"}}").is_ok());
        assert!(parse_generator("banana").is_err());
    }

    #[test]
    fn metric_lookup() {
        assert!(resolve_metric("R1").is_ok());
        assert!(resolve_metric("sphere").is_ok());
        assert!(resolve_metric("no-such-metric").is_err());
    }
}
