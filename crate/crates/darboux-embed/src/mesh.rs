//! Sampled surfaces with per-vertex residual channels, and their export.

use std::io::{self, Write};

use serde::Serialize;

use crate::metrics::OrthogonalMetric2D;
use crate::numkit::Vec3;
use crate::par::Exec;
use crate::verify::{vertex_residuals, Immersion, VerifyError, VerifyOptions, VertexResidual};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamGrid {
    pub a: (f64, f64),
    pub b: (f64, f64),
    /// Vertex counts along `a` and `b`, both at least 2.
    pub n: [usize; 2],
}

impl ParamGrid {
    pub fn new(a: (f64, f64), b: (f64, f64), n: [usize; 2]) -> Self {
        ParamGrid { a, b, n }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter of vertex `k`, row-major with `a` varying slowest.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k / self.n[1], k % self.n[1]);
        let lerp = |r: (f64, f64), i: usize, n: usize| {
            if n < 2 {
                r.0
            } else {
                r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64
            }
        };
        (lerp(self.a, i, self.n[0]), lerp(self.b, j, self.n[1]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceMesh {
    pub axes: [String; 2],
    pub grid: ParamGrid,
    pub positions: Vec<Vec3>,
    pub residuals: Vec<VertexResidual>,
}

/// Max and mean of one residual channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Summary {
        let (mut max, mut sum, mut n) = (0.0f64, 0.0, 0usize);
        for v in values {
            max = max.max(v);
            sum += v;
            n += 1;
        }
        Summary {
            max,
            mean: if n == 0 { 0.0 } else { sum / n as f64 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshSummary {
    pub isometry: Summary,
    pub curvature: Summary,
    pub pfaffian: Option<Summary>,
    pub degenerate_vertices: usize,
}

impl SurfaceMesh {
    /// Sample `imm` on `grid` and evaluate every residual channel against
    /// `metric`.
    pub fn sample(
        imm: &dyn Immersion,
        metric: &OrthogonalMetric2D,
        axes: [&str; 2],
        grid: ParamGrid,
        opts: &VerifyOptions,
        exec: Exec,
    ) -> Result<SurfaceMesh, VerifyError> {
        let rows = exec.try_map(grid.len(), |k| {
            let (a, b) = grid.point(k);
            Ok::<_, VerifyError>((imm.position(a, b)?, vertex_residuals(imm, metric, a, b, opts)?))
        })?;
        let (positions, residuals) = rows.into_iter().unzip();
        Ok(SurfaceMesh {
            axes: axes.map(String::from),
            grid,
            positions,
            residuals,
        })
    }

    /// Residual summary over vertices at least `margin` grid lines away
    /// from the boundary.
    pub fn summary(&self, margin: usize) -> MeshSummary {
        let [na, nb] = self.grid.n;
        let inner: Vec<&VertexResidual> = self
            .residuals
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let (i, j) = (k / nb, k % nb);
                i >= margin && j >= margin && i + margin < na && j + margin < nb
            })
            .map(|(_, r)| r)
            .collect();
        let pf: Vec<f64> = inner.iter().filter_map(|r| r.pfaffian).collect();
        MeshSummary {
            isometry: Summary::of(inner.iter().map(|r| r.isometry)),
            curvature: Summary::of(inner.iter().filter(|r| !r.degenerate).map(|r| r.curvature)),
            pfaffian: if pf.is_empty() { None } else { Some(Summary::of(pf)) },
            degenerate_vertices: inner.iter().filter(|r| r.degenerate).count(),
        }
    }

    /// Wavefront OBJ: one `v` line per vertex (coordinates as-is, no
    /// Euclideanization of Lorentz meshes) and quad faces over the grid.
    pub fn write_obj(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(
            w,
            "# {}x{} grid over ({}, {})",
            self.grid.n[0], self.grid.n[1], self.axes[0], self.axes[1]
        )?;
        for x in &self.positions {
            writeln!(w, "v {} {} {}", x[0], x[1], x[2])?;
        }
        let [na, nb] = self.grid.n;
        for i in 0..na.saturating_sub(1) {
            for j in 0..nb.saturating_sub(1) {
                let k = i * nb + j + 1;
                writeln!(w, "f {} {} {} {}", k, k + nb, k + nb + 1, k + 1)?;
            }
        }
        Ok(())
    }

    /// CSV with the two parameter names as the first header fields.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "{},{},x1,x2,x3,res_isom,res_K", self.axes[0], self.axes[1])?;
        for (k, (x, r)) in self.positions.iter().zip(&self.residuals).enumerate() {
            let (a, b) = self.grid.point(k);
            writeln!(w, "{a},{b},{},{},{},{},{}", x[0], x[1], x[2], r.isometry, r.curvature)?;
        }
        Ok(())
    }
}

/// `det d(u, v)/d(a, b)` of the chart of `imm` at every grid vertex, by
/// central differences with relative step `step`.
pub fn chart_jacobians(imm: &dyn Immersion, grid: &ParamGrid, step: f64, exec: Exec) -> Result<Vec<f64>, VerifyError> {
    exec.try_map(grid.len(), |k| {
        let (a, b) = grid.point(k);
        let (ha, hb) = (step * a.abs().max(1.0), step * b.abs().max(1.0));
        let (ua1, va1) = imm.chart(a + ha, b)?;
        let (ua0, va0) = imm.chart(a - ha, b)?;
        let (ub1, vb1) = imm.chart(a, b + hb)?;
        let (ub0, vb0) = imm.chart(a, b - hb)?;
        let (du_a, dv_a) = ((ua1 - ua0) / (2.0 * ha), (va1 - va0) / (2.0 * ha));
        let (du_b, dv_b) = ((ub1 - ub0) / (2.0 * hb), (vb1 - vb0) / (2.0 * hb));
        Ok(du_a * dv_b - du_b * dv_a)
    })
}

/// Number of sign changes of `det d(u, v)/d(a, b)` between neighbouring
/// vertices of the grid, a cheap indicator that the chart folds.
pub fn jacobian_sign_changes(dets: &[f64], grid: &ParamGrid) -> usize {
    let [na, nb] = grid.n;
    let mut count = 0;
    for i in 0..na {
        for j in 0..nb {
            let k = i * nb + j;
            if j + 1 < nb && dets[k] * dets[k + 1] < 0.0 {
                count += 1;
            }
            if i + 1 < na && dets[k] * dets[k + nb] < 0.0 {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::builtin;
    use crate::numkit::Signature;

    struct Plane;

    impl Immersion for Plane {
        fn signature(&self) -> Signature {
            Signature::Euclidean
        }
        fn position(&self, a: f64, b: f64) -> Result<Vec3, VerifyError> {
            Ok(Vec3::new(a, b, 0.0))
        }
        fn chart(&self, a: f64, b: f64) -> Result<(f64, f64), VerifyError> {
            Ok((a, b))
        }
    }

    fn mesh(n: [usize; 2]) -> SurfaceMesh {
        let m = builtin("flat").unwrap();
        let grid = ParamGrid::new((0.0, 1.0), (0.0, 1.0), n);
        SurfaceMesh::sample(
            &Plane,
            &m,
            ["u", "v"],
            grid,
            &VerifyOptions::default(),
            Exec::Sequential,
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_obj() {
        let mut out = Vec::new();
        mesh([2, 2]).write_obj(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(s.lines().filter(|l| l.starts_with("f ")).count(), 1);
        assert!(s.contains("f 1 3 4 2"));
    }

    #[test]
    fn csv_rows() {
        let mut out = Vec::new();
        mesh([3, 4]).write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s.lines().count(), 13);
        assert!(s.starts_with("u,v,x1,x2,x3,res_isom,res_K\n"));
    }

    #[test]
    fn identity_chart_jacobian() {
        let grid = ParamGrid::new((0.0, 1.0), (0.0, 1.0), [3, 3]);
        let dets = chart_jacobians(&Plane, &grid, 1e-4, Exec::Sequential).unwrap();
        assert!(dets.iter().all(|d| (d - 1.0).abs() < 1e-10));
    }

    #[test]
    fn sign_changes() {
        let grid = ParamGrid::new((0.0, 1.0), (0.0, 1.0), [2, 2]);
        assert_eq!(jacobian_sign_changes(&[1.0, 1.0, 1.0, 1.0], &grid), 0);
        assert_eq!(jacobian_sign_changes(&[1.0, -1.0, 1.0, 1.0], &grid), 2);
    }
}
