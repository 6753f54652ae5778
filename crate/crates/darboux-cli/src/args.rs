use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "darboux",
    version,
    about = "Isometric embeddings of Darboux-integrable surface metrics"
)]
pub struct Cli {
    /// Evaluate grids on one thread instead of the rayon pool.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in normal forms and test metrics.
    Catalog(CatalogArgs),
    /// Test whether a metric passes the integrability conditions.
    Check(CheckArgs),
    /// Build an embedding of u^2 (dv^2 - du^2) from two generating functions.
    Embed(EmbedArgs),
    /// Solve the Cauchy problem for a null-free initial curve.
    Cauchy(CauchyArgs),
    /// Sweep a profile curve along an ambient Killing field.
    Revolve(RevolveArgs),
    /// Randomized invariant checks with a fixed seed.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Also write the listing as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Catalog id (R1, LH-T3, ...), built-in test metric, or a JSON metric file.
    #[arg(long)]
    pub metric: String,
    #[arg(long, default_value = "20x20")]
    pub grid: Grid,
    #[arg(long, default_value_t = darboux_embed::darboux::DEFAULT_TOL)]
    pub tol: f64,
    /// Fraction of each side of the domain trimmed before sampling.
    #[arg(long, default_value_t = 0.0)]
    pub inset: f64,
    /// Report path.
    #[arg(long, alias = "report")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Plus-side generator: coefficients `c0,c1,...`, a JSON array or
    /// function, a `.json` file, or `cubic:E` for `E^4 x^3 / 48`.
    #[arg(long = "F", allow_hyphen_values = true, requires = "g", conflicts_with = "special")]
    pub f: Option<String>,
    /// Minus-side generator, same syntax as `--F`.
    #[arg(long = "G", allow_hyphen_values = true, requires = "f")]
    pub g: Option<String>,
    /// `p_a,p_b,q_a,q_b`
    #[arg(long, allow_hyphen_values = true)]
    pub pq_domain: Option<Quad>,
    /// Take the negative fourth root for `p0`.
    #[arg(long)]
    pub neg_p0: bool,
    /// Take the negative fourth root for `q0`.
    #[arg(long)]
    pub neg_q0: bool,
    /// `e1,e2` of the explicit immersion for cubic generators.
    #[arg(long, allow_hyphen_values = true)]
    pub special: Option<Pair>,
    /// `u_a,u_b,v_a,v_b`
    #[arg(long, allow_hyphen_values = true, requires = "special")]
    pub uv_domain: Option<Quad>,
    #[arg(long, default_value = "41x41")]
    pub grid: Grid,
    #[command(flatten)]
    pub tol: MeshTolerances,
    /// Mesh output, `.obj` or `.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CauchyArgs {
    /// JSON curve `{x1, x2, x3, domain, t0?}`.
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Slope of `r` at `t0`, used to fix `s0` when `--s0` is absent.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub dr0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub v0: f64,
    /// direct, printed, or printed-verbatim.
    #[arg(long, default_value = "direct")]
    pub method: darboux_embed::cauchy::LiftMethod,
    #[arg(long, default_value = "41x41")]
    pub grid: Grid,
    /// `a,b` for both surface parameters; defaults to the lifted interval.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<Pair>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_diagonal: f64,
    #[command(flatten)]
    pub tol: MeshTolerances,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RevolveArgs {
    /// Riemannian catalog id.
    #[arg(long, default_value = "R1")]
    pub metric: String,
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "0.05,1.5")]
    pub s_range: Pair,
    /// Defaults to one turn, `0,2pi/alpha`.
    #[arg(long, allow_hyphen_values = true)]
    pub t_range: Option<Pair>,
    #[arg(long, default_value = "41x41")]
    pub grid: Grid,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_conservation: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol_shape: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol_killing: f64,
    #[command(flatten)]
    pub tol: MeshTolerances,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random samples per property.
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct MeshTolerances {
    #[arg(long, default_value_t = 1e-5)]
    pub tol_isometry: f64,
    /// Relative curvature residual.
    #[arg(long, default_value_t = 1e-3)]
    pub tol_curvature: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol_pfaffian: f64,
}

/// `NxM` vertex counts, both at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid(pub [usize; 2]);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected NxM, got {s:?}"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad grid size {t:?}: {e}"))
        };
        let g = [parse(a)?, parse(b)?];
        if g[0] < 2 || g[1] < 2 {
            return Err(format!("grid must be at least 2x2, got {s}"));
        }
        Ok(Grid(g))
    }
}

fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|e| format!("bad number {p:?}: {e}"))?;
        if !o.is_finite() {
            return Err(format!("non-finite number {p:?}"));
        }
    }
    Ok(out)
}

/// `a,b` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [a, b] = floats::<2>(s)?;
        Ok(Pair(a, b))
    }
}

impl Pair {
    pub fn interval(self) -> Result<(f64, f64), String> {
        if self.0 < self.1 {
            Ok((self.0, self.1))
        } else {
            Err(format!("empty interval {},{}", self.0, self.1))
        }
    }
}

/// Two intervals `a,b,c,d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad(pub [f64; 4]);

impl FromStr for Quad {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let q = floats::<4>(s)?;
        if !(q[0] < q[1] && q[2] < q[3]) {
            return Err(format!("intervals must be increasing, got {s:?}"));
        }
        Ok(Quad(q))
    }
}

impl Quad {
    pub fn first(&self) -> (f64, f64) {
        (self.0[0], self.0[1])
    }

    pub fn second(&self) -> (f64, f64) {
        (self.0[2], self.0[3])
    }
}
