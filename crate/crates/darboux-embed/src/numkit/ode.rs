//! Explicit Runge-Kutta integration with dense output.

use super::NumError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeMethod {
    /// Classical fourth-order scheme with a fixed step.
    Rk4 { step: f64 },
    /// Dormand-Prince 5(4) with error control.
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub method: OdeMethod,
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    /// Upper bound on |h|; keeps the Hermite dense output accurate.
    pub max_step: Option<f64>,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            method: OdeMethod::Rk45,
            atol: 1e-10,
            rtol: 1e-10,
            max_steps: 1_000_000,
            max_step: None,
        }
    }
}

impl OdeConfig {
    pub fn rk4(step: f64) -> Self {
        OdeConfig {
            method: OdeMethod::Rk4 { step },
            ..Default::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.atol = tol;
        self.rtol = tol;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    fn validate(&self) -> Result<(), NumError> {
        let ok = self.atol > 0.0
            && self.rtol > 0.0
            && self.max_steps > 0
            && self.max_step.is_none_or(|h| h > 0.0)
            && match self.method {
                OdeMethod::Rk4 { step } => step > 0.0,
                OdeMethod::Rk45 => true,
            };
        if ok {
            Ok(())
        } else {
            Err(NumError::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Accepted steps with states and slopes; evaluation between knots uses
/// cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub slopes: Vec<Vec<f64>>,
    /// Set when a stop predicate ended the run early.
    pub halted_at: Option<f64>,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn covers(&self, t: f64) -> bool {
        let (a, b) = (self.t_start().min(self.t_end()), self.t_start().max(self.t_end()));
        t >= a - 1e-14 * (1.0 + a.abs()) && t <= b + 1e-14 * (1.0 + b.abs())
    }

    /// State at `t` (clamped to the covered interval).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if n == 1 {
            return self.states[0].clone();
        }
        let forward = self.t_end() >= self.t_start();
        // index k with t in [times[k], times[k+1]]
        let k = if forward {
            self.times.partition_point(|&s| s <= t)
        } else {
            self.times.partition_point(|&s| s >= t)
        }
        .clamp(1, n - 1)
            - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let th = ((t - t0) / h).clamp(0.0, 1.0);
        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        let h10 = th * (1.0 - th) * (1.0 - th);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        let (y0, y1, f0, f1) = (
            &self.states[k],
            &self.states[k + 1],
            &self.slopes[k],
            &self.slopes[k + 1],
        );
        (0..y0.len())
            .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
            .collect()
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, ki) in out.iter_mut().zip(k.iter()) {
                *o += h * c * ki;
            }
        }
    }
    out
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1` (either direction).
pub fn ode_solve<F>(rhs: F, t0: f64, y0: &[f64], t1: f64, cfg: &OdeConfig) -> Result<Trajectory, NumError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    ode_solve_until(rhs, t0, y0, t1, cfg, |_, _| false)
}

/// As [`ode_solve`], stopping after the first accepted step at which
/// `stop(t, y)` holds.
pub fn ode_solve_until<F, S>(
    rhs: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    cfg: &OdeConfig,
    stop: S,
) -> Result<Trajectory, NumError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    S: Fn(f64, &[f64]) -> bool,
{
    cfg.validate()?;
    let f0 = rhs(t0, y0);
    if !finite(&f0) || !finite(y0) {
        return Err(NumError::IntegrationFailure {
            t: t0,
            state: y0.to_vec(),
            reason: "non-finite initial slope".into(),
        });
    }
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        slopes: vec![f0],
        halted_at: None,
    };
    if t1 == t0 {
        return Ok(traj);
    }
    match cfg.method {
        OdeMethod::Rk4 { step } => rk4(&rhs, &mut traj, t1, step, cfg, &stop)?,
        OdeMethod::Rk45 => dopri(&rhs, &mut traj, t1, cfg, &stop)?,
    }
    Ok(traj)
}

fn fail(traj: &Trajectory, reason: &str) -> NumError {
    NumError::IntegrationFailure {
        t: traj.t_end(),
        state: traj.last().to_vec(),
        reason: reason.into(),
    }
}

fn rk4<F, S>(rhs: &F, traj: &mut Trajectory, t1: f64, step: f64, cfg: &OdeConfig, stop: &S) -> Result<(), NumError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    S: Fn(f64, &[f64]) -> bool,
{
    let t0 = traj.t_start();
    let n = ((t1 - t0).abs() / step).ceil().max(1.0) as usize;
    if n > cfg.max_steps {
        return Err(fail(traj, "max steps exceeded"));
    }
    let h = (t1 - t0) / n as f64;
    for i in 0..n {
        let t = t0 + h * i as f64;
        let y = traj.last().to_vec();
        let k1 = traj.slopes.last().unwrap().clone();
        let k2 = rhs(t + h / 2.0, &axpy(&y, h, &[(0.5, &k1)]));
        let k3 = rhs(t + h / 2.0, &axpy(&y, h, &[(0.5, &k2)]));
        let k4 = rhs(t + h, &axpy(&y, h, &[(1.0, &k3)]));
        let ynew = axpy(
            &y,
            h,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
        );
        let tn = if i + 1 == n { t1 } else { t + h };
        let fnew = rhs(tn, &ynew);
        if !finite(&ynew) || !finite(&fnew) {
            return Err(fail(traj, "non-finite state"));
        }
        traj.times.push(tn);
        traj.states.push(ynew);
        traj.slopes.push(fnew);
        if stop(tn, traj.last()) {
            traj.halted_at = Some(tn);
            break;
        }
    }
    Ok(())
}

// Dormand-Prince tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri<F, S>(rhs: &F, traj: &mut Trajectory, t1: f64, cfg: &OdeConfig, stop: &S) -> Result<(), NumError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    S: Fn(f64, &[f64]) -> bool,
{
    let dir = (t1 - traj.t_start()).signum();
    let span = (t1 - traj.t_start()).abs();
    let hmax = cfg.max_step.unwrap_or(span).min(span);
    let mut h = (span * 1e-3).min(hmax);
    let mut t = traj.t_start();
    let mut steps = 0usize;
    while dir * (t1 - t) > 0.0 {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(fail(traj, "max steps exceeded"));
        }
        let mut hs = h.min((t1 - t).abs());
        let last_step = (t1 - t).abs() - hs <= 1e-14 * (1.0 + t1.abs());
        if last_step {
            hs = (t1 - t).abs();
        }
        if hs < 1e-14 * (1.0 + t.abs()) {
            return Err(fail(traj, "step size underflow"));
        }
        let hh = dir * hs;
        let y = traj.last().to_vec();
        let k1 = traj.slopes.last().unwrap().clone();
        let k2 = rhs(t + C[1] * hh, &axpy(&y, hh, &[(A2[0], &k1)]));
        let k3 = rhs(t + C[2] * hh, &axpy(&y, hh, &[(A3[0], &k1), (A3[1], &k2)]));
        let k4 = rhs(
            t + C[3] * hh,
            &axpy(&y, hh, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]),
        );
        let k5 = rhs(
            t + C[4] * hh,
            &axpy(&y, hh, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
        );
        let k6 = rhs(
            t + C[5] * hh,
            &axpy(
                &y,
                hh,
                &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)],
            ),
        );
        let ynew = axpy(
            &y,
            hh,
            &[(B[0], &k1), (B[2], &k3), (B[3], &k4), (B[4], &k5), (B[5], &k6)],
        );
        let tn = if last_step { t1 } else { t + hh };
        let k7 = rhs(tn, &ynew);
        let ok = finite(&ynew) && finite(&k7);
        let err = if ok {
            let mut acc = 0.0;
            for i in 0..y.len() {
                let e = hh * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
                let sc = cfg.atol + cfg.rtol * y[i].abs().max(ynew[i].abs());
                acc += (e / sc).powi(2);
            }
            (acc / y.len() as f64).sqrt()
        } else {
            f64::INFINITY
        };
        if err <= 1.0 {
            t = tn;
            traj.times.push(tn);
            traj.states.push(ynew);
            traj.slopes.push(k7);
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (hs * fac).min(hmax);
            if stop(t, traj.last()) {
                traj.halted_at = Some(t);
                break;
            }
        } else {
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h = hs * fac;
        }
    }
    Ok(())
}

/// Two runs from a common start `t0`, one towards each end of an interval.
#[derive(Debug, Clone)]
pub struct TwoSided {
    pub fwd: Trajectory,
    pub bwd: Trajectory,
}

impl TwoSided {
    /// Integrate from `t0` towards both ends of `span`; each run halts on
    /// its own when `stop` fires.
    pub fn solve_until<F, S>(
        rhs: &F,
        t0: f64,
        y0: &[f64],
        span: (f64, f64),
        cfg: &OdeConfig,
        stop: &S,
    ) -> Result<TwoSided, NumError>
    where
        F: Fn(f64, &[f64]) -> Vec<f64>,
        S: Fn(f64, &[f64]) -> bool,
    {
        if !(span.0 <= t0 && t0 <= span.1) {
            return Err(NumError::OutOfDomain {
                x: t0,
                a: span.0,
                b: span.1,
            });
        }
        let fwd = ode_solve_until(rhs, t0, y0, span.1, cfg, stop)?;
        let bwd = ode_solve_until(rhs, t0, y0, span.0, cfg, stop)?;
        Ok(TwoSided { fwd, bwd })
    }

    pub fn t0(&self) -> f64 {
        self.fwd.t_start()
    }

    /// Interval actually covered by the two runs.
    pub fn span(&self) -> (f64, f64) {
        (self.bwd.t_end(), self.fwd.t_end())
    }

    pub fn covers(&self, t: f64) -> bool {
        self.fwd.covers(t) || self.bwd.covers(t)
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        if t >= self.t0() {
            self.fwd.eval(t)
        } else {
            self.bwd.eval(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution() {
        let tr = ode_solve(|_, _| vec![0.0], 0.0, &[5.0], 1.0, &OdeConfig::default()).unwrap();
        assert_eq!(tr.last()[0], 5.0);
    }

    #[test]
    fn exponential_to_1e8() {
        let cfg = OdeConfig::default();
        let tr = ode_solve(|_, y| vec![y[0]], 0.0, &[1.0], 1.0, &cfg).unwrap();
        assert!((tr.last()[0] - std::f64::consts::E).abs() < 1e-8);
        assert_eq!(tr.t_end(), 1.0);
    }

    #[test]
    fn backward_and_dense() {
        let cfg = OdeConfig::default().with_max_step(0.01);
        let tr = ode_solve(|_, y| vec![y[0]], 1.0, &[1.0], 0.0, &cfg).unwrap();
        assert!((tr.last()[0] - (-1.0f64).exp()).abs() < 1e-9);
        let mid = tr.eval(0.4321)[0];
        assert!((mid - (0.4321f64 - 1.0).exp()).abs() < 1e-9);
    }

    #[test]
    fn q_profile_first_integral() {
        // q'' = 3 q^(-1/3), q(0)=1, q'(0)=3: (q'/3)^2 - q^(2/3) stays constant
        let rhs = |_: f64, y: &[f64]| vec![y[1], 3.0 * y[0].powf(-1.0 / 3.0)];
        let tr = ode_solve(rhs, 0.0, &[1.0, 3.0], 1.5, &OdeConfig::default()).unwrap();
        let inv = |y: &[f64]| (y[1] / 3.0).powi(2) - y[0].powf(2.0 / 3.0);
        let c0 = inv(&tr.states[0]);
        for y in &tr.states {
            assert!((inv(y) - c0).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_fixed_step() {
        let tr = ode_solve(|_, y| vec![y[0]], 0.0, &[1.0], 1.0, &OdeConfig::rk4(0.01)).unwrap();
        assert!((tr.last()[0] - std::f64::consts::E).abs() < 1e-9);
        assert_eq!(tr.times.len(), 101);
    }

    #[test]
    fn stop_predicate_halts() {
        let tr = ode_solve_until(
            |_, _| vec![1.0],
            0.0,
            &[0.0],
            10.0,
            &OdeConfig::default().with_max_step(0.1),
            |_, y| y[0] > 1.0,
        )
        .unwrap();
        let h = tr.halted_at.unwrap();
        assert!(h > 1.0 && h < 1.2);
    }

    #[test]
    fn non_finite_reports_last_state() {
        let err = ode_solve(|_, y| vec![y[0] * y[0]], 0.0, &[1.0], 2.0, &OdeConfig::default()).unwrap_err();
        match err {
            NumError::IntegrationFailure { t, .. } => assert!(t < 1.0),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn two_sided_covers_both_ends() {
        let ts = TwoSided::solve_until(
            &|_: f64, y: &[f64]| vec![y[0]],
            0.5,
            &[1.0],
            (0.0, 1.0),
            &OdeConfig::default(),
            &|_: f64, _: &[f64]| false,
        )
        .unwrap();
        assert_eq!(ts.span(), (0.0, 1.0));
        for t in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert!((ts.eval(t)[0] - (t - 0.5f64).exp()).abs() < 1e-8);
        }
        assert!(!ts.covers(1.5));
    }

    #[test]
    fn invalid_config() {
        let cfg = OdeConfig::default().with_tol(0.0);
        assert!(ode_solve(|_, _| vec![0.0], 0.0, &[0.0], 1.0, &cfg).is_err());
    }
}
