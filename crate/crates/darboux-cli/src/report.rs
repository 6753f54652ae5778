use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;

use darboux_embed::errata::ErrataReport;
use darboux_embed::mesh::SurfaceMesh;

pub const SCHEMA_VERSION: u32 = 1;

/// One thresholded quantity of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Absent for yes/no checks.
    pub tol: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, tol: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            tol: Some(tol),
            pass: value < tol,
        }
    }

    pub fn holds(name: &str, pass: bool) -> Check {
        Check {
            name: name.to_string(),
            value: if pass { 1.0 } else { 0.0 },
            tol: None,
            pass,
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.tol {
            Some(t) => format!("{verdict} {}: {:.3e} (tol {:.1e})", self.name, self.value, t),
            None => format!("{verdict} {}", self.name),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CommandEcho {
    pub name: &'static str,
    pub args: Vec<String>,
    pub exec: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub command: CommandEcho,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub verdict: bool,
    pub checks: Vec<Check>,
    pub result: T,
    pub errata: ErrataReport,
    pub timing: Timing,
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Csv,
}

impl MeshFormat {
    pub fn of(path: &Path) -> anyhow::Result<MeshFormat> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("csv") => Ok(MeshFormat::Csv),
            _ => bail!("mesh output {} must end in .obj or .csv", path.display()),
        }
    }
}

pub fn write_mesh(path: &Path, mesh: &SurfaceMesh) -> anyhow::Result<()> {
    let format = MeshFormat::of(path)?;
    write_atomic(path, |mut w| match format {
        MeshFormat::Obj => mesh.write_obj(&mut w),
        MeshFormat::Csv => mesh.write_csv(&mut w),
    })
}

/// Fail early on outputs that cannot be produced, before any computation.
pub fn precheck_output(path: &Path, mesh: bool) -> anyhow::Result<()> {
    if mesh {
        MeshFormat::of(path)?;
    }
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let meta = fs::metadata(dir).with_context(|| format!("output directory {} does not exist", dir.display()))?;
    if !meta.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    Ok(())
}
