//! The Pfaffian systems of the embedding problem written in the adapted
//! charts, as explicit coefficient rows.

use serde::Serialize;

use super::{Side, PQ};
use crate::numkit::Vec3;

/// Slopes `(dv/dw, dy/dw)` of a characteristic curve of either side.
pub fn char_rhs(side: Side, w: f64, w0: f64) -> (f64, Vec3) {
    let w2 = w0 * w0;
    let w4 = w2 * w2;
    let dv = -0.5 * w2;
    let dy = Vec3::new(-0.125 * (w * w + 1.0) * w4, -0.125 * (w * w - 1.0) * w4, 0.25 * w * w4);
    match side {
        Side::Plus => (dv, dy),
        Side::Minus => (-dv, -dy),
    }
}

/// Tangent vector in `N1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct N1Velocity {
    pub dp: f64,
    pub dp0: f64,
    pub dq: f64,
    pub dq0: f64,
    pub dv: f64,
    pub dx: Vec3,
}

/// Coefficients of the four generators of the `N1` system (the `v` form and
/// the three `x` forms) on `(dp, dp0, dq, dq0, dv, dx1, dx2, dx3)`.
pub fn n1_forms(pq: PQ) -> [[f64; 8]; 4] {
    let PQ { p, p0, q, q0 } = pq;
    let (pp, qq) = (p0 * p0, q0 * q0);
    let d = p - q;
    let x_row = |k: f64, slot: usize| {
        // k = +1 for x1, -1 for x2
        let mut r = [0.0; 8];
        r[0] = 0.125 * pp * (pp * (p * p + k) + qq * (q * q - 2.0 * p * q - k));
        r[1] = -0.25 * p0 * qq * d * (p * q + k);
        r[2] = -0.125 * qq * (pp * (p * p - 2.0 * p * q - k) + qq * (q * q + k));
        r[3] = -0.25 * pp * q0 * d * (p * q + k);
        r[5 + slot] = 1.0;
        r
    };
    let mut v_row = [0.0; 8];
    v_row[0] = 0.5 * pp;
    v_row[2] = -0.5 * qq;
    v_row[4] = 1.0;
    let mut x3 = [0.0; 8];
    x3[0] = -0.25 * p * pp * (pp - qq);
    x3[1] = 0.25 * p0 * qq * (p * p - q * q);
    x3[2] = -0.25 * q * qq * (pp - qq);
    x3[3] = 0.25 * pp * q0 * (p * p - q * q);
    x3[7] = 1.0;
    [v_row, x_row(1.0, 0), x_row(-1.0, 1), x3]
}

pub fn n1_residuals(pq: PQ, vel: &N1Velocity) -> [f64; 4] {
    let t = [
        vel.dp, vel.dp0, vel.dq, vel.dq0, vel.dv, vel.dx[0], vel.dx[1], vel.dx[2],
    ];
    n1_forms(pq).map(|row| row.iter().zip(&t).map(|(a, b)| a * b).sum())
}
