//! Weakly nonlinear oscillators `ẍ + x = ε f(x, ẋ, t)`: polar slow flow,
//! first-order averaging, limit cycles and forced entrainment.

use std::f64::consts::TAU;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AvgError {
    #[error("phase undefined at the origin")]
    Origin,
    #[error("amplitude must be positive, got {0}")]
    Amplitude(f64),
    #[error("quadrature did not converge with {0} points")]
    Quadrature(usize),
    #[error("time step {0} exceeds the carrier resolution limit {1}")]
    Step(f64, f64),
    #[error("averaging needs an autonomous forcing")]
    NonAutonomous,
    #[error("trajectory left the finite range at t = {0}")]
    Unstable(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Forcing = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct OscillatorProblem {
    pub forcing: Forcing,
    pub epsilon: f64,
    /// True iff the forcing ignores its `t` argument.
    pub autonomous: bool,
}

impl fmt::Debug for OscillatorProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OscillatorProblem")
            .field("epsilon", &self.epsilon)
            .field("autonomous", &self.autonomous)
            .finish_non_exhaustive()
    }
}

impl OscillatorProblem {
    pub fn autonomous(epsilon: f64, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            forcing: Arc::new(move |x, v, _| f(x, v)),
            epsilon,
            autonomous: true,
        }
    }

    pub fn forced(epsilon: f64, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            forcing: Arc::new(f),
            epsilon,
            autonomous: false,
        }
    }

    /// `f = (1 − x²) ẋ`
    pub fn van_der_pol(epsilon: f64) -> Self {
        Self::autonomous(epsilon, |x, v| (1.0 - x * x) * v)
    }

    /// `f = (1 − x²) ẋ + A cos(Ωt)`
    pub fn forced_van_der_pol(epsilon: f64, amp: f64, omega: f64) -> Self {
        if amp == 0.0 {
            return Self::van_der_pol(epsilon);
        }
        Self::forced(epsilon, move |x, v, t| (1.0 - x * x) * v + amp * (omega * t).cos())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// Averaging is only a small-ε approximation; callers may warn past this.
    pub fn epsilon_is_large(&self) -> bool {
        self.epsilon > 0.5
    }

    pub fn f(&self, x: f64, v: f64, t: f64) -> f64 {
        (self.forcing)(x, v, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub a: f64,
    pub phi: f64,
    /// `φ − t`
    pub theta: f64,
}

impl PolarState {
    pub fn at_time(mut self, t: f64) -> Self {
        self.theta = self.phi - t;
        self
    }
}

/// `x = a sin φ`, `ẋ = a cos φ`; `theta` is taken at `t = 0`.
pub fn to_polar(x: f64, xdot: f64) -> Result<PolarState, AvgError> {
    if x == 0.0 && xdot == 0.0 {
        return Err(AvgError::Origin);
    }
    let phi = x.atan2(xdot);
    Ok(PolarState {
        a: x.hypot(xdot),
        phi,
        theta: phi,
    })
}

pub fn from_polar(p: &PolarState) -> (f64, f64) {
    let (s, c) = p.phi.sin_cos();
    (p.a * s, p.a * c)
}

/// Exact polar form of the dynamics: `(ȧ, θ̇)`.
pub fn slow_flow_rhs(p: &OscillatorProblem, a: f64, phi: f64, t: f64) -> Result<(f64, f64), AvgError> {
    if !(a > 0.0) {
        return Err(AvgError::Amplitude(a));
    }
    let (s, c) = phi.sin_cos();
    let f = p.f(a * s, a * c, t);
    Ok((p.epsilon * f * c, -(p.epsilon / a) * f * s))
}

const QUAD_START: usize = 64;
const QUAD_MAX: usize = 1 << 20;
const QUAD_RTOL: f64 = 1e-10;

/// Period means `(1/2π)∫ f(a sin φ, a cos φ; t) (cos φ, sin φ) dφ`, with `t`
/// frozen. Periodic trapezoid rule, doubled until successive estimates agree.
pub fn averaged_rhs_at(p: &OscillatorProblem, a: f64, t: f64) -> Result<(f64, f64), AvgError> {
    if !(a > 0.0) {
        return Err(AvgError::Amplitude(a));
    }
    let eval = |n: usize, offset: bool| {
        let h = TAU / n as f64;
        let shift = if offset { 0.5 } else { 0.0 };
        let mut sc = 0.0;
        let mut ss = 0.0;
        let mut sa = 0.0;
        for i in 0..n {
            let phi = (i as f64 + shift) * h;
            let (s, c) = phi.sin_cos();
            let f = p.f(a * s, a * c, t);
            sc += f * c;
            ss += f * s;
            sa += f.abs();
        }
        (sc, ss, sa)
    };
    let (mut sc, mut ss, mut sa) = eval(QUAD_START, false);
    let mut n = QUAD_START;
    while n < QUAD_MAX {
        // the refined rule reuses the old nodes and adds the midpoints
        let (mc, ms, ma) = eval(n, true);
        let (c_old, s_old) = (sc / n as f64, ss / n as f64);
        sc += mc;
        ss += ms;
        sa += ma;
        n *= 2;
        let (c_new, s_new) = (sc / n as f64, ss / n as f64);
        // absolute floor for integrands that are pure rounding noise
        let tol = (QUAD_RTOL * sa / n as f64).max(1e-15);
        if (c_new - c_old).abs() <= tol && (s_new - s_old).abs() <= tol {
            return Ok((c_new, s_new));
        }
    }
    Err(AvgError::Quadrature(n))
}

pub fn averaged_rhs(p: &OscillatorProblem, a: f64) -> Result<(f64, f64), AvgError> {
    if !p.autonomous {
        return Err(AvgError::NonAutonomous);
    }
    averaged_rhs_at(p, a, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    /// Derivative vanishes at the root.
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub amplitude: f64,
    pub stability: Stability,
}

/// Positive roots of `f̄_c` on `(0, 10]`.
pub fn limit_cycle_amplitude(p: &OscillatorProblem) -> Result<Vec<LimitCycle>, AvgError> {
    limit_cycles_in(p, 10.0, 2000)
}

pub fn limit_cycles_in(p: &OscillatorProblem, a_max: f64, samples: usize) -> Result<Vec<LimitCycle>, AvgError> {
    if !(a_max > 0.0) || samples < 2 {
        return Err(AvgError::Invalid("scan needs a_max > 0 and at least 2 samples".into()));
    }
    let fc = |a: f64| averaged_rhs(p, a).map(|r| r.0);
    let h = a_max / samples as f64;
    let mut roots = Vec::new();
    let mut lo = h;
    let mut f_lo = fc(lo)?;
    for i in 2..=samples {
        let hi = i as f64 * h;
        let f_hi = fc(hi)?;
        if f_lo == 0.0 {
            roots.push(lo);
        } else if f_lo * f_hi < 0.0 {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            while b - a > 1e-13 * b.max(1.0) {
                let m = 0.5 * (a + b);
                let fm = fc(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    if f_lo == 0.0 {
        roots.push(lo);
    }
    roots
        .into_iter()
        .map(|r| {
            let d = (r * 1e-5).max(1e-7);
            let slope = (fc(r + d)? - fc(r - d)?) / (2.0 * d);
            let stability = if slope < 0.0 {
                Stability::Stable
            } else if slope > 0.0 {
                Stability::Unstable
            } else {
                Stability::Marginal
            };
            Ok(LimitCycle {
                amplitude: r,
                stability,
            })
        })
        .collect()
}

fn rk4<const N: usize>(y: [f64; N], t: f64, dt: f64, rhs: impl Fn(&[f64; N], f64) -> [f64; N]) -> [f64; N] {
    let add = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *y;
        for (o, k) in out.iter_mut().zip(k) {
            *o += s * k;
        }
        out
    };
    let k1 = rhs(&y, t);
    let k2 = rhs(&add(&y, &k1, dt / 2.0), t + dt / 2.0);
    let k3 = rhs(&add(&y, &k2, dt / 2.0), t + dt / 2.0);
    let k4 = rhs(&add(&y, &k3, dt), t + dt);
    let mut out = y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn step_count(dt: f64, t_end: f64) -> Result<usize, AvgError> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(AvgError::Invalid("need dt > 0 and a finite t_end >= 0".into()));
    }
    Ok((t_end / dt).round() as usize)
}

pub const MAX_FULL_DT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullTrajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl FullTrajectory {
    pub fn amplitude(&self) -> Vec<f64> {
        self.x.iter().zip(&self.v).map(|(x, v)| x.hypot(*v)).collect()
    }

    /// Largest `|x|` over the last carrier period.
    pub fn final_envelope(&self) -> f64 {
        let t_end = *self.t.last().unwrap_or(&0.0);
        self.t
            .iter()
            .zip(&self.x)
            .filter(|(t, _)| **t >= t_end - TAU)
            .fold(0.0, |m, (_, x)| m.max(x.abs()))
    }
}

pub fn integrate_full(p: &OscillatorProblem, x0: f64, v0: f64, dt: f64, t_end: f64) -> Result<FullTrajectory, AvgError> {
    if dt > MAX_FULL_DT {
        return Err(AvgError::Step(dt, MAX_FULL_DT));
    }
    let steps = step_count(dt, t_end)?;
    let mut out = FullTrajectory {
        t: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
    };
    let eps = p.epsilon;
    let mut y = [x0, v0];
    out.t.push(0.0);
    out.x.push(x0);
    out.v.push(v0);
    for i in 0..steps {
        let t = i as f64 * dt;
        y = rk4(y, t, dt, |y, t| [y[1], -y[0] + eps * p.f(y[0], y[1], t)]);
        if !y.iter().all(|v| v.is_finite()) {
            return Err(AvgError::Unstable(t + dt));
        }
        out.t.push((i + 1) as f64 * dt);
        out.x.push(y[0]);
        out.v.push(y[1]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowTrajectory {
    pub t: Vec<f64>,
    pub a: Vec<f64>,
    pub theta: Vec<f64>,
}

impl SlowTrajectory {
    /// Map back to `(x, ẋ)` through `φ = t + θ`.
    pub fn to_cartesian(&self) -> (Vec<f64>, Vec<f64>) {
        self.t
            .iter()
            .zip(self.a.iter().zip(&self.theta))
            .map(|(t, (a, th))| {
                from_polar(&PolarState {
                    a: *a,
                    phi: t + th,
                    theta: *th,
                })
            })
            .unzip()
    }
}

fn integrate_polar_with(
    a0: f64,
    theta0: f64,
    dt: f64,
    t_end: f64,
    rhs: impl Fn(f64, f64, f64) -> Result<(f64, f64), AvgError>,
) -> Result<SlowTrajectory, AvgError> {
    if !(a0 > 0.0) {
        return Err(AvgError::Amplitude(a0));
    }
    let steps = step_count(dt, t_end)?;
    let mut out = SlowTrajectory {
        t: vec![0.0],
        a: vec![a0],
        theta: vec![theta0],
    };
    let mut y = [a0, theta0];
    let failure = std::cell::RefCell::new(None);
    for i in 0..steps {
        let t = i as f64 * dt;
        y = rk4(y, t, dt, |y, t| match rhs(y[0], y[1], t) {
            Ok((da, dth)) => [da, dth],
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [f64::NAN, f64::NAN]
            }
        });
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(AvgError::Unstable(t + dt));
        }
        out.t.push((i + 1) as f64 * dt);
        out.a.push(y[0]);
        out.theta.push(y[1]);
    }
    Ok(out)
}

/// First-order averaged flow `ȧ = ε f̄_c(a)`, `θ̇ = −(ε/a) f̄_s(a)`.
pub fn integrate_slow(p: &OscillatorProblem, a0: f64, theta0: f64, dt: f64, t_end: f64) -> Result<SlowTrajectory, AvgError> {
    if !p.autonomous {
        return Err(AvgError::NonAutonomous);
    }
    let eps = p.epsilon;
    integrate_polar_with(a0, theta0, dt, t_end, |a, _, _| {
        let (c, s) = averaged_rhs(p, a)?;
        Ok((eps * c, -(eps / a) * s))
    })
}

/// Exact (non-averaged) polar flow; equivalent to [`integrate_full`].
pub fn integrate_polar(p: &OscillatorProblem, a0: f64, theta0: f64, dt: f64, t_end: f64) -> Result<SlowTrajectory, AvgError> {
    integrate_polar_with(a0, theta0, dt, t_end, |a, th, t| slow_flow_rhs(p, a, t + th, t))
}

/// Closed-form averaged van der Pol amplitude.
pub fn vdp_averaged_amplitude(a0: f64, epsilon: f64, t: f64) -> f64 {
    2.0 / (1.0 + (4.0 / (a0 * a0) - 1.0) * (-epsilon * t).exp()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub epsilon: f64,
    pub horizon: f64,
    pub max_error: f64,
    pub half_epsilon_error: f64,
    /// `max_error / half_epsilon_error`; absent when the latter vanishes.
    pub ratio: Option<f64>,
}

pub const COMPARE_DT: f64 = 0.01;

fn envelope_error(p: &OscillatorProblem, x0: f64, v0: f64, t_end: f64) -> Result<(f64, f64), AvgError> {
    let horizon = if p.epsilon > 0.0 { t_end.min(1.0 / p.epsilon) } else { t_end };
    let start = to_polar(x0, v0)?;
    let full = integrate_full(p, x0, v0, COMPARE_DT, horizon)?;
    let slow = integrate_slow(p, start.a, start.theta, COMPARE_DT, horizon)?;
    let err = full
        .amplitude()
        .iter()
        .zip(&slow.a)
        .fold(0.0f64, |m, (f, s)| m.max((f - s).abs()));
    Ok((horizon, err))
}

/// Envelope error of first-order averaging over `[0, min(T, 1/ε)]`, at `ε`
/// and at `ε/2`. The full envelope is the polar amplitude `√(x² + ẋ²)`.
pub fn compare_full_vs_averaged(p: &OscillatorProblem, x0: f64, v0: f64, t_end: f64) -> Result<ComparisonReport, AvgError> {
    if !(p.epsilon >= 0.0) {
        return Err(AvgError::Invalid("epsilon must be >= 0".into()));
    }
    let (horizon, max_error) = envelope_error(p, x0, v0, t_end)?;
    let (_, half_epsilon_error) = envelope_error(&p.with_epsilon(p.epsilon / 2.0), x0, v0, t_end)?;
    Ok(ComparisonReport {
        epsilon: p.epsilon,
        horizon,
        max_error,
        half_epsilon_error,
        ratio: (p.epsilon > 0.0 && half_epsilon_error > 0.0).then(|| max_error / half_epsilon_error),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entrainment {
    pub epsilon: f64,
    pub amp: f64,
    pub omega: f64,
    pub response_freq: f64,
    pub locked: bool,
}

impl Entrainment {
    pub fn detuning(&self) -> f64 {
        (self.response_freq - self.omega).abs()
    }
}

pub const LOCK_TOLERANCE: f64 = 1e-3;

/// Mean angular frequency from upward zero crossings (linearly interpolated)
/// over the second half of the samples.
pub fn zero_crossing_frequency(t: &[f64], x: &[f64]) -> Option<f64> {
    let start = t.len() / 2;
    let mut crossings = Vec::new();
    for i in start.max(1)..t.len() {
        let (x0, x1) = (x[i - 1], x[i]);
        if x0 < 0.0 && x1 >= 0.0 {
            let s = x0 / (x0 - x1);
            crossings.push(t[i - 1] + s * (t[i] - t[i - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings.last().unwrap() - crossings[0];
    Some(TAU * (crossings.len() - 1) as f64 / span)
}

/// Forced van der Pol: `ẍ + x = ε[(1 − x²) ẋ + A cos Ωt]`.
pub fn forced_response(epsilon: f64, amp: f64, omega: f64, t_end: f64, dt: f64) -> Result<Entrainment, AvgError> {
    if !(0.0..=0.3).contains(&epsilon) {
        return Err(AvgError::Invalid(format!("epsilon {epsilon} outside [0, 0.3]")));
    }
    let p = OscillatorProblem::forced_van_der_pol(epsilon, amp, omega);
    let traj = integrate_full(&p, 0.5, 0.0, dt, t_end)?;
    let response_freq = zero_crossing_frequency(&traj.t, &traj.x)
        .ok_or_else(|| AvgError::Invalid("too few zero crossings; lengthen the run".into()))?;
    Ok(Entrainment {
        epsilon,
        amp,
        omega,
        response_freq,
        locked: (response_freq - omega).abs() <= LOCK_TOLERANCE,
    })
}

/// Entrainment over a grid of forcing amplitudes and frequencies, in
/// row-major `(amp, omega)` order.
pub fn forced_sweep(epsilon: f64, amps: &[f64], omegas: &[f64], t_end: f64, dt: f64) -> Result<Vec<Entrainment>, AvgError> {
    let grid: Vec<(f64, f64)> = amps.iter().flat_map(|&a| omegas.iter().map(move |&w| (a, w))).collect();
    grid.par_iter().map(|&(a, w)| forced_response(epsilon, a, w, t_end, dt)).collect()
}

/// `epsilon,A,Omega,locked,response_freq,max_error`, where `max_error` is the
/// frequency mismatch `|response_freq − Ω|`.
pub fn sweep_csv(rows: &[Entrainment]) -> String {
    let mut out = String::from("epsilon,A,Omega,locked,response_freq,max_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.epsilon,
            r.amp,
            r.omega,
            r.locked,
            r.response_freq,
            r.detuning()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn vdp_fc(a: f64) -> f64 {
        a / 2.0 * (1.0 - a * a / 4.0)
    }

    #[test]
    fn polar_examples() {
        let p = to_polar(0.0, 1.0).unwrap();
        assert_eq!((p.a, p.phi), (1.0, 0.0));
        let p = to_polar(1.0, 0.0).unwrap();
        assert!((p.phi - PI / 2.0).abs() < 1e-15);
        let p = to_polar(3.0, 4.0).unwrap();
        assert!((p.a - 5.0).abs() < 1e-15);
        assert!((p.phi - 0.643_501_108_793_284_4).abs() < 1e-12);
        assert_eq!(to_polar(0.0, 0.0), Err(AvgError::Origin));
    }

    #[test]
    fn polar_round_trip() {
        for &(x, v) in &[(0.3, -2.0), (-1e-3, 4.0), (-7.0, -0.1), (2.0, 0.0)] {
            let (x2, v2) = from_polar(&to_polar(x, v).unwrap());
            assert!((x - x2).abs() < 1e-12 && (v - v2).abs() < 1e-12);
        }
    }

    #[test]
    fn slow_flow_examples() {
        let p = OscillatorProblem::autonomous(0.0, |_, v| v);
        assert_eq!(slow_flow_rhs(&p, 1.3, 0.4, 0.0).unwrap(), (0.0, 0.0));
        let eps = 0.2;
        let p = OscillatorProblem::autonomous(eps, |_, v| v);
        let (a, phi) = (1.7, 0.9);
        let (da, _) = slow_flow_rhs(&p, a, phi, 0.0).unwrap();
        assert!((da - eps * a * phi.cos().powi(2)).abs() < 1e-14);
        let p = OscillatorProblem::autonomous(eps, |_, _| 1.0);
        let (da, dth) = slow_flow_rhs(&p, 1.0, PI / 2.0, 0.0).unwrap();
        assert!(da.abs() < 1e-15);
        assert!((dth + eps).abs() < 1e-15);
        assert!(slow_flow_rhs(&p, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn averaged_examples() {
        let zero = OscillatorProblem::autonomous(0.1, |_, _| 0.0);
        assert_eq!(averaged_rhs(&zero, 1.0).unwrap(), (0.0, 0.0));
        let lin = OscillatorProblem::autonomous(0.1, |_, v| v);
        let (c, s) = averaged_rhs(&lin, 3.0).unwrap();
        assert!((c - 1.5).abs() < 1e-12 && s.abs() < 1e-12);
        let vdp = OscillatorProblem::van_der_pol(0.1);
        for i in 1..=40 {
            let a = i as f64 * 0.1;
            let (c, s) = averaged_rhs(&vdp, a).unwrap();
            assert!((c - vdp_fc(a)).abs() < 1e-9, "a={a}");
            assert!(s.abs() < 1e-9);
        }
        assert_eq!(averaged_rhs(&vdp, -1.0), Err(AvgError::Amplitude(-1.0)));
    }

    #[test]
    fn odd_components_average_out() {
        // terms odd under φ → −φ vanish against cos φ; terms odd under
        // φ → π − φ vanish against sin φ
        let p = OscillatorProblem::autonomous(1.0, |x, v| x * v + x * v.powi(3) + x.powi(3) * v);
        let (c, s) = averaged_rhs(&p, 1.4).unwrap();
        assert!(c.abs() < 1e-12 && s.abs() < 1e-12);
    }

    #[test]
    fn nonautonomous_rejected() {
        let p = OscillatorProblem::forced_van_der_pol(0.1, 0.5, 1.0);
        assert_eq!(averaged_rhs(&p, 1.0), Err(AvgError::NonAutonomous));
        assert!(averaged_rhs_at(&p, 1.0, 0.3).is_ok());
    }

    #[test]
    fn limit_cycles() {
        for eps in [0.01, 0.1, 1.0] {
            let lc = limit_cycle_amplitude(&OscillatorProblem::van_der_pol(eps)).unwrap();
            assert_eq!(lc.len(), 1);
            assert!((lc[0].amplitude - 2.0).abs() < 1e-9, "{lc:?}");
            assert_eq!(lc[0].stability, Stability::Stable);
        }
        let damped = OscillatorProblem::autonomous(0.1, |_, v| -v);
        assert!(limit_cycle_amplitude(&damped).unwrap().is_empty());
        let circ = OscillatorProblem::autonomous(0.1, |x, v| (1.0 - x * x - v * v) * v);
        let lc = limit_cycle_amplitude(&circ).unwrap();
        assert_eq!(lc.len(), 1);
        assert!((lc[0].amplitude - 1.0).abs() < 1e-9);
        assert_eq!(lc[0].stability, Stability::Stable);
        // f̄_c = (a/2)(a − 1)(a − 3): unstable at 1, stable at 3
        let two = OscillatorProblem::autonomous(0.1, |x, v| {
            let r2 = x * x + v * v;
            -(r2 - 4.0 * r2.sqrt() + 3.0) * v
        });
        // off-grid scan so the roots are bracketed rather than hit
        let lc = limit_cycles_in(&two, 9.7, 1777).unwrap();
        assert_eq!(lc.len(), 2);
        assert_eq!(lc[0].stability, Stability::Unstable);
        assert_eq!(lc[1].stability, Stability::Stable);
        assert!((lc[0].amplitude - 1.0).abs() < 1e-9 && (lc[1].amplitude - 3.0).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator() {
        let p = OscillatorProblem::van_der_pol(0.0);
        let traj = integrate_full(&p, 1.0, 0.0, 0.01, 100.0).unwrap();
        let i10 = 1000;
        assert!((traj.t[i10] - 10.0).abs() < 1e-12);
        assert!((traj.x[i10] - 10f64.cos()).abs() < 1e-8);
        for a in traj.amplitude() {
            assert!((a - 1.0).abs() < 1e-8);
        }
        assert!(matches!(integrate_full(&p, 1.0, 0.0, 0.1, 1.0), Err(AvgError::Step(..))));
    }

    #[test]
    fn vdp_relaxes_to_limit_cycle() {
        let p = OscillatorProblem::van_der_pol(0.1);
        let traj = integrate_full(&p, 0.5, 0.0, 0.01, 200.0).unwrap();
        assert!((traj.final_envelope() - 2.0).abs() < 0.05, "{}", traj.final_envelope());
    }

    #[test]
    fn averaged_vdp_matches_closed_form() {
        let eps = 0.1;
        let p = OscillatorProblem::van_der_pol(eps);
        let slow = integrate_slow(&p, 0.5, 0.0, 0.05, 100.0).unwrap();
        for (t, a) in slow.t.iter().zip(&slow.a) {
            assert!((a - vdp_averaged_amplitude(0.5, eps, *t)).abs() < 1e-6);
        }
        assert!(slow.theta.iter().all(|th| th.abs() < 1e-9));
    }

    #[test]
    fn exact_polar_flow_reproduces_full_system() {
        let p = OscillatorProblem::forced(0.3, |x, v, t| (1.0 - x * x) * v + 0.4 * (1.1 * t).cos() - x.powi(3));
        let full = integrate_full(&p, 0.8, -0.3, 0.005, 20.0).unwrap();
        let s = to_polar(0.8, -0.3).unwrap();
        let polar = integrate_polar(&p, s.a, s.theta, 0.005, 20.0).unwrap();
        let (x, v) = polar.to_cartesian();
        for i in 0..x.len() {
            assert!((x[i] - full.x[i]).abs() < 1e-7 && (v[i] - full.v[i]).abs() < 1e-7, "i={i}");
        }
    }

    #[test]
    fn averaging_error_is_first_order() {
        let rep = compare_full_vs_averaged(&OscillatorProblem::van_der_pol(0.1), 0.5, 0.0, 1000.0).unwrap();
        let r = rep.ratio.unwrap();
        assert!((1.5..=3.0).contains(&r), "{rep:?}");
        let zero = compare_full_vs_averaged(&OscillatorProblem::van_der_pol(0.0), 0.5, 0.0, 50.0).unwrap();
        assert!(zero.max_error < 1e-10 && zero.ratio.is_none(), "{zero:?}");
    }

    #[test]
    fn linear_growth_oracle() {
        let eps = 0.05;
        let p = OscillatorProblem::autonomous(eps, |_, v| v);
        let traj = integrate_full(&p, 0.0, 1.0, 0.01, 20.0).unwrap();
        for (t, a) in traj.t.iter().zip(traj.amplitude()) {
            let exact = (eps * t / 2.0).exp();
            assert!((a - exact).abs() < 2.0 * eps * exact, "t={t}");
        }
    }

    #[test]
    fn entrainment() {
        let free = forced_response(0.1, 0.0, 1.0, 500.0, 0.02).unwrap();
        assert!((free.response_freq - 1.0).abs() < 0.01, "{free:?}");
        let lock = forced_response(0.1, 0.5, 1.001, 2000.0, 0.02).unwrap();
        assert!(lock.locked, "{lock:?}");
        let drift = forced_response(0.1, 0.05, 1.3, 2000.0, 0.02).unwrap();
        assert!(!drift.locked, "{drift:?}");
        assert!(forced_response(0.5, 0.1, 1.0, 10.0, 0.02).is_err());
    }

    #[test]
    fn sweep_table() {
        let rows = forced_sweep(0.1, &[0.5], &[1.001, 1.3], 600.0, 0.05).unwrap();
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("epsilon,A,Omega,locked,response_freq,max_error\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
