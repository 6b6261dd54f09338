//! Two-scale demodulation of `q(t) = A(t) sin(ω₀ t + θ(t))` around a known
//! carrier, with `A(t) = A₀ + a(t)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::OscError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndulationDecomposition {
    pub carrier_amp: f64,
    pub carrier_freq: f64,
    pub dt: f64,
    /// Signed slow envelope relative to the carrier amplitude; may be negative.
    pub slow_amp: Vec<f64>,
    /// Slow phase modulation, unwrapped.
    pub slow_phase: Vec<f64>,
    /// Fast remainder `q − (A₀ + a) sin(ω₀ t + θ)`.
    pub residual: Vec<f64>,
}

impl UndulationDecomposition {
    pub fn reconstruct(&self) -> Vec<f64> {
        self.slow_amp
            .iter()
            .zip(&self.slow_phase)
            .enumerate()
            .map(|(i, (a, th))| {
                let t = i as f64 * self.dt;
                (self.carrier_amp + a) * (self.carrier_freq * t + th).sin()
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Centered moving average with a fixed window length; near the ends the
/// window is shifted inward rather than truncated, so it always spans the
/// same number of samples.
fn moving_average(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len();
    let len = len.clamp(1, n);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(len / 2).min(n - len);
            (prefix[start + len] - prefix[start]) / len as f64
        })
        .collect()
}

fn low_pass(x: &[f64], len: usize) -> Vec<f64> {
    (0..3).fold(x.to_vec(), |acc, _| moving_average(&acc, len))
}

/// Quadrature demodulation against `sin/cos(ω₀ t)` followed by a
/// zero-phase moving-average cascade.
///
/// The window spans a whole number of carrier half-periods closest to
/// `2π / cutoff`, which places a null on the `2ω₀` mixing product.
pub fn demodulate(
    q: &[f64],
    dt: f64,
    omega0: f64,
    cutoff: f64,
) -> Result<UndulationDecomposition, OscError> {
    if !(omega0 > 0.0 && dt > 0.0) {
        return Err(OscError::Invalid("omega0 and dt must be positive".into()));
    }
    if !(cutoff > 0.0 && cutoff < omega0) {
        return Err(OscError::Invalid(format!(
            "cutoff {cutoff} must lie in (0, omega0)"
        )));
    }
    let samples_per_period = TAU / (omega0 * dt);
    if samples_per_period < 10.0 {
        return Err(OscError::Undersampled(format!(
            "{samples_per_period:.2} samples per carrier period, need 10"
        )));
    }
    let periods = q.len() as f64 / samples_per_period;
    if periods < 20.0 {
        return Err(OscError::Undersampled(format!(
            "{periods:.1} carrier periods, need 20"
        )));
    }

    let half_periods = (2.0 * omega0 / cutoff).round().max(1.0);
    let window = (half_periods * PI / (omega0 * dt)).round() as usize;

    let (mut in_phase, mut quadrature) = (Vec::with_capacity(q.len()), Vec::with_capacity(q.len()));
    for (i, &v) in q.iter().enumerate() {
        let t = i as f64 * dt;
        in_phase.push(2.0 * v * (omega0 * t).sin());
        quadrature.push(2.0 * v * (omega0 * t).cos());
    }
    let i_slow = low_pass(&in_phase, window);
    let q_slow = low_pass(&quadrature, window);

    // Follow the branch (A, θ) or (−A, θ + π) closest to the previous phase,
    // so the envelope can change sign through zero.
    let mut amp = Vec::with_capacity(q.len());
    let mut phase = Vec::with_capacity(q.len());
    let mut prev: Option<f64> = None;
    for (&c, &s) in i_slow.iter().zip(&q_slow) {
        let a = c.hypot(s);
        let raw = s.atan2(c);
        let (a, th) = match prev {
            None => (a, raw),
            Some(p) => {
                let near = |x: f64| x + TAU * ((p - x) / TAU).round();
                let pos = near(raw);
                let neg = near(raw + PI);
                if (neg - p).abs() < (pos - p).abs() {
                    (-a, neg)
                } else {
                    (a, pos)
                }
            }
        };
        prev = Some(th);
        amp.push(a);
        phase.push(th);
    }

    let carrier_amp = amp.iter().sum::<f64>() / amp.len() as f64;
    let slow_amp: Vec<f64> = amp.iter().map(|a| a - carrier_amp).collect();
    let mut d = UndulationDecomposition {
        carrier_amp,
        carrier_freq: omega0,
        dt,
        slow_amp,
        slow_phase: phase,
        residual: Vec::new(),
    };
    d.residual = q.iter().zip(d.reconstruct()).map(|(x, r)| x - r).collect();
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub name: String,
    pub ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSeparationReport {
    pub factor: f64,
    pub checks: Vec<RatioCheck>,
    pub passed: bool,
}

fn max_abs_derivative(x: &[f64], dt: f64) -> f64 {
    x.windows(3)
        .map(|w| ((w[2] - w[0]) / (2.0 * dt)).abs())
        .fold(0.0, f64::max)
}

/// Evaluates the two-scale inequalities as ratios against `factor`:
///
/// * `slow_amplitude`: `max|a| / A₀`
/// * `fast_amplitude`: `max|residual| / A₀`
/// * `slow_amplitude_rate`: `max|ȧ| / (A₀ ω₀)`
/// * `slow_phase_rate`: `max|θ̇| / ω₀`
pub fn scale_separation_check(d: &UndulationDecomposition, factor: f64) -> ScaleSeparationReport {
    let a0 = d.carrier_amp.abs();
    let max_a = d.slow_amp.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let ratios = [
        ("slow_amplitude", max_a / a0),
        ("fast_amplitude", d.max_residual() / a0),
        (
            "slow_amplitude_rate",
            max_abs_derivative(&d.slow_amp, d.dt) / (a0 * d.carrier_freq),
        ),
        (
            "slow_phase_rate",
            max_abs_derivative(&d.slow_phase, d.dt) / d.carrier_freq,
        ),
    ];
    let checks: Vec<RatioCheck> = ratios
        .into_iter()
        .map(|(name, ratio)| RatioCheck {
            name: name.to_string(),
            ratio,
            passed: ratio.is_finite() && ratio <= factor,
        })
        .collect();
    ScaleSeparationReport {
        factor,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
