//! Truncated bivariate Taylor polynomials.
//!
//! A `Jet2` stores the coefficients `c[i][j]` of `dx^i dy^j` for
//! `i + j <= order` (at most 3). Arithmetic truncates to the smaller order,
//! differentiation lowers the order by one.

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    c: [[f64; MAX_ORDER + 1]; MAX_ORDER + 1],
    order: usize,
}

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

impl Jet2 {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = [[0.0; 4]; 4];
        c[0][0] = v;
        Jet2 {
            c,
            order: order.min(MAX_ORDER),
        }
    }

    /// The coordinate function `axis` (0 = x, 1 = y) expanded at `at`.
    pub fn variable(at: f64, axis: usize, order: usize) -> Self {
        let mut j = Jet2::constant(at, order);
        if j.order >= 1 {
            if axis == 0 {
                j.c[1][0] = 1.0;
            } else {
                j.c[0][1] = 1.0;
            }
        }
        j
    }

    /// Jet of `f(x) g(y)` from the derivative lists of the two factors.
    pub fn from_product(f: &[f64; 4], g: &[f64; 4]) -> Self {
        let mut c = [[0.0; 4]; 4];
        for i in 0..=MAX_ORDER {
            for j in 0..=(MAX_ORDER - i) {
                c[i][j] = f[i] / FACT[i] * g[j] / FACT[j];
            }
        }
        Jet2 { c, order: MAX_ORDER }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0][0]
    }

    /// Partial derivative `d^{i+j} / dx^i dy^j` at the expansion point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i + j <= self.order, "partial beyond jet order");
        self.c[i][j] * FACT[i] * FACT[j]
    }

    pub fn grad(&self) -> [f64; 2] {
        [self.partial(1, 0), self.partial(0, 1)]
    }

    /// Derivative along `axis`; the result has order one less.
    pub fn d(&self, axis: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut c = [[0.0; 4]; 4];
        for i in 0..=order {
            for j in 0..=(order - i) {
                c[i][j] = if axis == 0 {
                    (i + 1) as f64 * self.c[i + 1][j]
                } else {
                    (j + 1) as f64 * self.c[i][j + 1]
                };
            }
        }
        Jet2 { c, order }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// `g(self)` for a univariate `g` given its derivatives at `self.value()`.
    pub fn compose(&self, g: &[f64; 4]) -> Self {
        let mut dev = *self;
        dev.c[0][0] = 0.0;
        let mut out = Jet2::constant(g[0], self.order);
        let mut pow = Jet2::constant(1.0, self.order);
        for (k, gk) in g.iter().enumerate().skip(1).take(self.order) {
            pow = pow * dev;
            out = out + pow.scale(gk / FACT[k]);
        }
        out
    }

    pub fn recip(&self) -> Self {
        let x = self.value();
        let r = 1.0 / x;
        self.compose(&[r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn powf(&self, e: f64) -> Self {
        let x = self.value();
        self.compose(&[
            x.powf(e),
            e * x.powf(e - 1.0),
            e * (e - 1.0) * x.powf(e - 2.0),
            e * (e - 1.0) * (e - 2.0) * x.powf(e - 3.0),
        ])
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn div(&self, other: &Jet2) -> Self {
        *self * other.recip()
    }

    pub fn is_finite(&self) -> bool {
        (0..=self.order).all(|i| (0..=(self.order - i)).all(|j| self.c[i][j].is_finite()))
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let mut c = [[0.0; 4]; 4];
        for i in 0..=order {
            for j in 0..=(order - i) {
                c[i][j] = self.c[i][j] + rhs.c[i][j];
            }
        }
        Jet2 { c, order }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let mut c = [[0.0; 4]; 4];
        for i in 0..=order {
            for j in 0..=(order - i) {
                let mut acc = 0.0;
                for a in 0..=i {
                    for b in 0..=j {
                        acc += self.c[a][b] * rhs.c[i - a][j - b];
                    }
                }
                c[i][j] = acc;
            }
        }
        Jet2 { c, order }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: f64) -> Jet2 {
        let mut out = self;
        out.c[0][0] += rhs;
        out
    }
}
