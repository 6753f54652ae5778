use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Poly1D;

/// Elementary functions with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedFn {
    Sinh,
    Cosh,
    Sin,
    Cos,
    Exp,
    /// x^k; non-integer exponents need x > 0.
    Power(f64),
}

impl NamedFn {
    fn derivs(self, x: f64) -> [f64; 4] {
        match self {
            NamedFn::Sinh => {
                let (s, c) = (x.sinh(), x.cosh());
                [s, c, s, c]
            }
            NamedFn::Cosh => {
                let (s, c) = (x.sinh(), x.cosh());
                [c, s, c, s]
            }
            NamedFn::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            NamedFn::Cos => {
                let (s, c) = x.sin_cos();
                [c, -s, -c, s]
            }
            NamedFn::Exp => {
                let e = x.exp();
                [e; 4]
            }
            NamedFn::Power(k) => {
                let pw = |e: f64| {
                    if e == 0.0 {
                        1.0
                    } else if e.fract() == 0.0 && e.abs() < 64.0 {
                        x.powi(e as i32)
                    } else {
                        x.powf(e)
                    }
                };
                [
                    pw(k),
                    k * pw(k - 1.0),
                    k * (k - 1.0) * pw(k - 2.0),
                    k * (k - 1.0) * (k - 2.0) * pw(k - 3.0),
                ]
            }
        }
    }

    fn domain(self) -> (f64, f64) {
        match self {
            NamedFn::Power(k) if k.fract() != 0.0 => (0.0, f64::INFINITY),
            NamedFn::Power(k) if k < 0.0 => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Uniformly sampled function; derivatives come from a local interpolating
/// polynomial through the nearest nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1D {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

const TABLE_STENCIL: usize = 6;

impl Table1D {
    pub fn sample(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let dx = (b - a) / (n - 1) as f64;
        Table1D {
            x0: a,
            dx,
            values: (0..n).map(|i| f(a + dx * i as f64)).collect(),
        }
    }

    fn derivs(&self, x: f64) -> [f64; 4] {
        let n = self.values.len();
        let m = TABLE_STENCIL.min(n);
        let centre = ((x - self.x0) / self.dx).round() as isize;
        let start = (centre - (m as isize) / 2).clamp(0, (n - m) as isize) as usize;
        // local variable xi = (x - x_start)/dx, fit the m nodes exactly
        let vand = DMatrix::from_fn(m, m, |i, j| (i as f64).powi(j as i32));
        let rhs = DVector::from_fn(m, |i, _| self.values[start + i]);
        let coeffs = vand
            .lu()
            .solve(&rhs)
            .map(|c| c.iter().copied().collect::<Vec<_>>())
            .unwrap_or_else(|| vec![f64::NAN; m]);
        let xi = (x - self.x0) / self.dx - start as f64;
        let d = Poly1D::new(coeffs).derivs::<4>(xi);
        let h = self.dx;
        [d[0], d[1] / h, d[2] / (h * h), d[3] / (h * h * h)]
    }
}

/// One-variable smooth function with value and derivatives up to order 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smooth1D {
    Poly(Poly1D),
    /// `scale * f(rate * x + shift)`
    Named {
        #[serde(rename = "fn")]
        func: NamedFn,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        rate: f64,
        #[serde(default)]
        shift: f64,
    },
    Mul(Box<Smooth1D>, Box<Smooth1D>),
    Table(Table1D),
}

impl Smooth1D {
    pub fn poly(coeffs: Vec<f64>) -> Self {
        Smooth1D::Poly(Poly1D::new(coeffs))
    }

    pub fn constant(c: f64) -> Self {
        Smooth1D::poly(vec![c])
    }

    pub fn named(func: NamedFn) -> Self {
        Smooth1D::Named {
            func,
            scale: 1.0,
            rate: 1.0,
            shift: 0.0,
        }
    }

    pub fn times(self, other: Smooth1D) -> Self {
        Smooth1D::Mul(Box::new(self), Box::new(other))
    }

    /// `[f, f', f'', f''']` at `x`.
    pub fn derivs(&self, x: f64) -> [f64; 4] {
        match self {
            Smooth1D::Poly(p) => p.derivs::<4>(x),
            Smooth1D::Named {
                func,
                scale,
                rate,
                shift,
            } => {
                let g = func.derivs(rate * x + shift);
                let mut out = [0.0; 4];
                let mut rk = 1.0;
                for k in 0..4 {
                    out[k] = scale * rk * g[k];
                    rk *= rate;
                }
                out
            }
            Smooth1D::Mul(a, b) => {
                let f = a.derivs(x);
                let g = b.derivs(x);
                [
                    f[0] * g[0],
                    f[1] * g[0] + f[0] * g[1],
                    f[2] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[2],
                    f[3] * g[0] + 3.0 * f[2] * g[1] + 3.0 * f[1] * g[2] + f[0] * g[3],
                ]
            }
            Smooth1D::Table(t) => t.derivs(x),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivs(x)[0]
    }

    /// Largest interval on which the representation is valid.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Smooth1D::Poly(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Smooth1D::Named { func, rate, shift, .. } => {
                let (a, b) = func.domain();
                if *rate == 0.0 {
                    return (f64::NEG_INFINITY, f64::INFINITY);
                }
                let (x1, x2) = ((a - shift) / rate, (b - shift) / rate);
                (x1.min(x2), x1.max(x2))
            }
            Smooth1D::Mul(a, b) => {
                let (a0, a1) = a.domain();
                let (b0, b1) = b.domain();
                (a0.max(b0), a1.min(b1))
            }
            Smooth1D::Table(t) => (t.x0, t.x0 + t.dx * (t.values.len() - 1) as f64),
        }
    }

    /// Whether derivatives are exact (no table differencing anywhere).
    pub fn is_exact(&self) -> bool {
        match self {
            Smooth1D::Poly(_) | Smooth1D::Named { .. } => true,
            Smooth1D::Mul(a, b) => a.is_exact() && b.is_exact(),
            Smooth1D::Table(_) => false,
        }
    }
}

impl From<Poly1D> for Smooth1D {
    fn from(p: Poly1D) -> Self {
        Smooth1D::Poly(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_chain_rule() {
        let f = Smooth1D::Named {
            func: NamedFn::Sin,
            scale: 2.0,
            rate: 3.0,
            shift: 0.5,
        };
        let x = 0.7;
        let d = f.derivs(x);
        let a = 3.0 * x + 0.5;
        assert!((d[0] - 2.0 * a.sin()).abs() < 1e-15);
        assert!((d[1] - 6.0 * a.cos()).abs() < 1e-14);
        assert!((d[2] + 18.0 * a.sin()).abs() < 1e-13);
        assert!((d[3] + 54.0 * a.cos()).abs() < 1e-13);
    }

    #[test]
    fn product_leibniz() {
        let c2 = Smooth1D::named(NamedFn::Cosh).times(Smooth1D::named(NamedFn::Cosh));
        let x = 0.9_f64;
        let d = c2.derivs(x);
        // cosh^2 = (1 + cosh 2x)/2
        assert!((d[0] - (1.0 + (2.0 * x).cosh()) / 2.0).abs() < 1e-14);
        assert!((d[1] - (2.0 * x).sinh()).abs() < 1e-14);
        assert!((d[2] - 2.0 * (2.0 * x).cosh()).abs() < 1e-13);
        assert!((d[3] - 4.0 * (2.0 * x).sinh()).abs() < 1e-13);
    }

    #[test]
    fn table_recovers_smooth_derivatives() {
        let t = Table1D::sample(|x| x.exp(), 0.0, 1.0, 201);
        let f = Smooth1D::Table(t);
        let d = f.derivs(0.4321);
        let e = 0.4321_f64.exp();
        assert!((d[0] - e).abs() < 1e-12);
        assert!((d[1] - e).abs() < 1e-9);
        assert!((d[2] - e).abs() < 1e-6);
        assert!((d[3] - e).abs() < 1e-3);
        assert!(!f.is_exact());
    }

    #[test]
    fn power_domain() {
        assert_eq!(Smooth1D::named(NamedFn::Power(0.5)).domain().0, 0.0);
        let d = Smooth1D::named(NamedFn::Power(3.0)).derivs(-2.0);
        assert_eq!(d, [-8.0, 12.0, -12.0, 6.0]);
    }
}
