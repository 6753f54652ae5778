use serde::{Deserialize, Serialize};

/// Real polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly1D {
    pub coeffs: Vec<f64>,
}

impl Poly1D {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly1D { coeffs };
        p.trim();
        p
    }

    pub fn monomial(c: f64, n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = c;
        Poly1D::new(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly1D {
        if self.coeffs.len() <= 1 {
            return Poly1D::new(vec![0.0]);
        }
        Poly1D::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Poly1D {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k as f64 + 1.0)));
        Poly1D::new(out)
    }

    /// Value and the first `N-1` derivatives at `x`.
    pub fn derivs<const N: usize>(&self, x: f64) -> [f64; N] {
        let mut out = [0.0; N];
        let mut p = self.clone();
        for slot in out.iter_mut() {
            *slot = p.eval(x);
            p = p.derivative();
        }
        out
    }
}

impl std::ops::Add for &Poly1D {
    type Output = Poly1D;
    fn add(self, rhs: &Poly1D) -> Poly1D {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly1D::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) + rhs.coeffs.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }
}

impl std::ops::Mul for &Poly1D {
    type Output = Poly1D;
    fn mul(self, rhs: &Poly1D) -> Poly1D {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly1D::new(out)
    }
}
