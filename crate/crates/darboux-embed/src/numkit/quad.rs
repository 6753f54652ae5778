use super::NumError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadConfig {
    /// Composite Simpson with an even number of panels.
    Simpson { panels: usize },
    /// Adaptive Simpson with Richardson correction.
    Adaptive { tol: f64, max_depth: u32 },
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig::Adaptive {
            tol: 1e-12,
            max_depth: 40,
        }
    }
}

fn checked(f: &impl Fn(f64) -> f64, t: f64) -> Result<f64, NumError> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumError::NonFinite { at: t })
    }
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64, NumError> {
    if a == b {
        return Ok(0.0);
    }
    match *cfg {
        QuadConfig::Simpson { panels } => {
            if panels == 0 || panels % 2 == 1 {
                return Err(NumError::InvalidConfig(format!(
                    "Simpson needs an even panel count, got {panels}"
                )));
            }
            let h = (b - a) / panels as f64;
            let mut acc = checked(&f, a)? + checked(&f, b)?;
            for i in 1..panels {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * checked(&f, a + h * i as f64)?;
            }
            Ok(acc * h / 3.0)
        }
        QuadConfig::Adaptive { tol, max_depth } => {
            if tol <= 0.0 {
                return Err(NumError::InvalidConfig("tolerance must be positive".into()));
            }
            let fa = checked(&f, a)?;
            let fb = checked(&f, b)?;
            let m = 0.5 * (a + b);
            let fm = checked(&f, m)?;
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            adapt(&f, a, b, fa, fm, fb, whole, tol, max_depth)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, NumError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let flm = checked(f, lm)?;
    let frm = checked(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

/// Cached antiderivative `x -> int_{anchor}^{x} f` on `[a, b]`: cumulative
/// values at uniform knots plus one short adaptive integral per query.
#[derive(Debug, Clone)]
pub struct Antiderivative<F> {
    f: F,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    anchor_value: f64,
    tol: f64,
}

impl<F: Fn(f64) -> f64> Antiderivative<F> {
    pub fn new(f: F, a: f64, b: f64, anchor: f64, panels: usize, tol: f64) -> Result<Self, NumError> {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let knots: Vec<f64> = (0..=panels).map(|i| a + h * i as f64).collect();
        let cfg = QuadConfig::Adaptive { tol, max_depth: 40 };
        let mut cumulative = vec![0.0; knots.len()];
        for i in 1..knots.len() {
            cumulative[i] = cumulative[i - 1] + integrate(&f, knots[i - 1], knots[i], &cfg)?;
        }
        let mut out = Antiderivative {
            f,
            knots,
            cumulative,
            anchor_value: 0.0,
            tol,
        };
        out.anchor_value = out.raw(anchor)?;
        Ok(out)
    }

    fn raw(&self, x: f64) -> Result<f64, NumError> {
        let n = self.knots.len();
        let k = self.knots.partition_point(|&s| s <= x).clamp(1, n) - 1;
        let k = if k + 1 < n && (x - self.knots[k]).abs() > (x - self.knots[k + 1]).abs() {
            k + 1
        } else {
            k
        };
        let cfg = QuadConfig::Adaptive {
            tol: self.tol,
            max_depth: 40,
        };
        Ok(self.cumulative[k] + integrate(&self.f, self.knots[k], x, &cfg)?)
    }

    pub fn eval(&self, x: f64) -> Result<f64, NumError> {
        Ok(self.raw(x)? - self.anchor_value)
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_integrand() {
        assert_eq!(integrate(|_| 0.0, 0.0, 1.0, &QuadConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn simpson_exact_on_quadratics() {
        let v = integrate(|t| t * t, 0.0, 1.0, &QuadConfig::Simpson { panels: 2 }).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let v = integrate(|t| t * t, 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_v_integrand() {
        let v = integrate(|_| (2.0f64 * 0.125).sqrt(), 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let v = integrate(|t: f64| (10.0 * t).cos(), 0.0, 3.0, &QuadConfig::default()).unwrap();
        assert!((v - (30.0f64).sin() / 10.0).abs() < 1e-11);
    }

    #[test]
    fn non_finite_is_error() {
        let r = integrate(|t| 1.0 / t, 0.0, 1.0, &QuadConfig::default());
        assert!(matches!(r, Err(NumError::NonFinite { .. })));
        let r = integrate(|t| t, 0.0, 1.0, &QuadConfig::Simpson { panels: 3 });
        assert!(matches!(r, Err(NumError::InvalidConfig(_))));
    }

    #[test]
    fn cached_antiderivative() {
        let a = Antiderivative::new(|t: f64| t.cos(), -1.0, 2.0, 0.0, 16, 1e-13).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.77, 2.0] {
            assert!((a.eval(x).unwrap() - x.sin()).abs() < 1e-12);
        }
    }
}
