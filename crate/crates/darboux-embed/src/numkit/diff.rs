use nalgebra::DMatrix;

use super::NumError;

/// Default central-difference step: `1e-5 * max(1, |x|)`.
pub fn central_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

/// Central-difference Jacobian `J[i][j] = d map_i / d x_j` with step `h`
/// (scaled per coordinate by `max(1, |x_j|)`). When `bounds` is given the
/// stencil must stay inside the box.
pub fn num_jacobian(
    map: impl Fn(&[f64]) -> Vec<f64>,
    at: &[f64],
    h: f64,
    bounds: Option<&[(f64, f64)]>,
) -> Result<DMatrix<f64>, NumError> {
    let n = at.len();
    let f0 = map(at);
    let m = f0.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut x = at.to_vec();
    for j in 0..n {
        let hj = h * at[j].abs().max(1.0);
        if let Some(b) = bounds {
            if at[j] - hj < b[j].0 || at[j] + hj > b[j].1 {
                return Err(NumError::StencilOutOfDomain { at: at.to_vec() });
            }
        }
        x[j] = at[j] + hj;
        let fp = map(&x);
        x[j] = at[j] - hj;
        let fm = map(&x);
        x[j] = at[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * hj);
        }
    }
    Ok(jac)
}

/// Five-point stencil for `f'(x)`, error O(h^4).
pub fn derivative5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map() {
        let j = num_jacobian(|x| x.to_vec(), &[0.3, -2.0, 5.0], 1e-5, None).unwrap();
        assert!((j - DMatrix::identity(3, 3)).abs().max() < 1e-9);
    }

    #[test]
    fn hand_derivative() {
        let j = num_jacobian(|x| vec![x[0] * x[0], x[0] * x[1]], &[1.0, 1.0], 1e-4, None).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]);
        assert!((j - want).abs().max() < 1e-6);
    }

    #[test]
    fn five_point_is_fourth_order() {
        let d = derivative5(f64::exp, 0.5, 1e-3);
        assert!((d - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn stencil_guard() {
        let r = num_jacobian(|x| x.to_vec(), &[0.0], 1e-3, Some(&[(0.0, 1.0)]));
        assert!(matches!(r, Err(NumError::StencilOutOfDomain { .. })));
    }
}
