use serde::{Deserialize, Serialize};

/// Closed-form solutions of `q'' = 3 sigma q^(-1/3)` used by the normal
/// forms, parametrized by the chart coordinate `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// q^(1/3) = cosh u, ds/du = cosh^2 u
    Cosh,
    /// q^(1/3) = sinh u, ds/du = sinh^2 u
    Sinh,
    /// q = u^3, ds/du = u
    Power,
    /// q^(1/3) = cos u, ds/du = cos^2 u
    Cos,
}

/// Profile `q(s)` with arclength `s(u)`. Derivatives are taken in `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QProfile {
    pub kind: ProfileKind,
    /// Sign in `q'' = 3 sigma q^(-1/3)`.
    pub ode_sign: f64,
    /// Constant in `(q'/3)^2 = sigma q^(2/3) - C`.
    pub c_const: f64,
}

impl QProfile {
    pub fn new(kind: ProfileKind) -> Self {
        let (ode_sign, c_const) = match kind {
            ProfileKind::Cosh => (1.0, 1.0),
            ProfileKind::Sinh => (1.0, -1.0),
            ProfileKind::Power => (1.0, 0.0),
            ProfileKind::Cos => (-1.0, -1.0),
        };
        QProfile {
            kind,
            ode_sign,
            c_const,
        }
    }

    pub fn s_of_u(&self, u: f64) -> f64 {
        match self.kind {
            ProfileKind::Cosh => u / 2.0 + (2.0 * u).sinh() / 4.0,
            ProfileKind::Sinh => (2.0 * u).sinh() / 4.0 - u / 2.0,
            ProfileKind::Power => u * u / 2.0,
            ProfileKind::Cos => u / 2.0 + (2.0 * u).sin() / 4.0,
        }
    }

    pub fn ds_du(&self, u: f64) -> f64 {
        match self.kind {
            ProfileKind::Cosh => u.cosh().powi(2),
            ProfileKind::Sinh => u.sinh().powi(2),
            ProfileKind::Power => u,
            ProfileKind::Cos => u.cos().powi(2),
        }
    }

    /// Invert `s(u)` on the bracket `[lo, hi]` (safeguarded Newton).
    pub fn u_of_s(&self, s: f64, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        let mut u = 0.5 * (a + b);
        for _ in 0..200 {
            let f = self.s_of_u(u) - s;
            if f.abs() <= 1e-15 * (1.0 + s.abs()) {
                return u;
            }
            if f > 0.0 {
                b = u;
            } else {
                a = u;
            }
            let d = self.ds_du(u);
            let next = u - f / d;
            u = if d > 0.0 && next > a && next < b {
                next
            } else {
                0.5 * (a + b)
            };
            if (b - a).abs() < 1e-16 * (1.0 + u.abs()) {
                break;
            }
        }
        u
    }

    /// `[q, q', q'', q''']` at the chart point `u`.
    pub fn q_derivs(&self, u: f64) -> [f64; 4] {
        match self.kind {
            ProfileKind::Cosh => {
                let (s, c) = (u.sinh(), u.cosh());
                [c.powi(3), 3.0 * s, 3.0 / c, -3.0 * s / c.powi(4)]
            }
            ProfileKind::Sinh => {
                let (s, c) = (u.sinh(), u.cosh());
                [s.powi(3), 3.0 * c, 3.0 / s, -3.0 * c / s.powi(4)]
            }
            ProfileKind::Power => [u.powi(3), 3.0 * u, 3.0 / u, -3.0 / u.powi(3)],
            ProfileKind::Cos => {
                let (s, c) = u.sin_cos();
                [c.powi(3), -3.0 * s, -3.0 / c, -3.0 * s / c.powi(4)]
            }
        }
    }

    /// `q''` obtained from `q'(u)` by the chain rule through `s(u)`,
    /// independently of the tabulated second derivative.
    pub fn q2_by_chain(&self, u: f64) -> f64 {
        let dq1_du = match self.kind {
            ProfileKind::Cosh => 3.0 * u.cosh(),
            ProfileKind::Sinh => 3.0 * u.sinh(),
            ProfileKind::Power => 3.0,
            ProfileKind::Cos => -3.0 * u.cos(),
        };
        dq1_du / self.ds_du(u)
    }

    /// `q'' - 3 sigma q^(-1/3)` using the chain-rule second derivative.
    pub fn ode_residual(&self, u: f64) -> f64 {
        let q = self.q_derivs(u)[0];
        self.q2_by_chain(u) - 3.0 * self.ode_sign * q.cbrt().recip()
    }

    /// `(q'/3)^2 - sigma q^(2/3) + C`.
    pub fn first_integral_residual(&self, u: f64) -> f64 {
        let [q, q1, _, _] = self.q_derivs(u);
        (q1 / 3.0).powi(2) - self.ode_sign * q.cbrt().powi(2) + self.c_const
    }
}
