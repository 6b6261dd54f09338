use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use translocal_core::averaging::{
    averaged_rhs, compare_full_vs_averaged, integrate_full, integrate_slow, limit_cycle_amplitude, OscillatorProblem,
    Stability,
};
use translocal_core::oscillator::{demodulate, scale_separation_check, ScaleSeparationReport};

use super::{err, Outcome};
use crate::{row, Table, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub epsilon: f64,
    pub a0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub compare_t_end: f64,
    pub quadrature_amplitudes: Vec<f64>,
    pub envelope_tolerance: f64,
    pub omega0: f64,
    pub samples_per_period: f64,
    pub periods: f64,
    pub modulation_ratio: f64,
    pub carrier_amp: f64,
    pub envelope_depth: f64,
    pub phase_depth: f64,
    pub cutoff: f64,
    pub separation_factor: f64,
    pub recovery_tolerance: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            a0: 0.5,
            t_end: 200.0,
            dt: 0.01,
            compare_t_end: 1000.0,
            quadrature_amplitudes: (1..=40).map(|i| i as f64 * 0.1).collect(),
            envelope_tolerance: 0.05,
            omega0: 1.0,
            samples_per_period: 32.0,
            periods: 200.0,
            modulation_ratio: 0.01,
            carrier_amp: 3.0,
            envelope_depth: 0.1,
            phase_depth: 0.05,
            cutoff: 0.5,
            separation_factor: 0.1,
            recovery_tolerance: 0.05,
        }
    }
}

impl super::Params for Params {
    fn validate(&self) -> Result<(), String> {
        if !(self.epsilon > 0.0) {
            return Err("epsilon must be positive".into());
        }
        if !(self.a0 > 0.0 && self.t_end > 0.0 && self.dt > 0.0 && self.compare_t_end > 0.0) {
            return Err("a0, t_end, dt and compare_t_end must be positive".into());
        }
        if self.quadrature_amplitudes.iter().any(|a| !(*a > 0.0)) {
            return Err("quadrature amplitudes must be positive".into());
        }
        if !(self.carrier_amp > 0.0 && self.samples_per_period > 0.0 && self.periods > 0.0) {
            return Err("demodulation settings must be positive".into());
        }
        Ok(())
    }
}

fn vdp_closed_form(a: f64) -> f64 {
    a / 2.0 * (1.0 - a * a / 4.0)
}

fn rel_l2(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(g, w)| (g - w).powi(2)).sum();
    let den: f64 = want.iter().map(|w| w * w).sum();
    (num / den).sqrt()
}

fn separation_rows(t: &mut Table, case: &str, r: &ScaleSeparationReport) {
    for c in &r.checks {
        t.push(row![case, c.name, c.ratio, r.factor, u8::from(c.passed)]);
    }
}

fn demodulation(p: &Params, out: &mut Outcome) -> Result<(), String> {
    let dt = TAU / (p.omega0 * p.samples_per_period);
    let n = (p.periods * p.samples_per_period).round() as usize;
    let nu = p.modulation_ratio * p.omega0;
    let sample = |f: &dyn Fn(f64) -> f64| -> Vec<f64> { (0..n).map(|i| f(i as f64 * dt)).collect() };
    let (w0, a0) = (p.omega0, p.carrier_amp);

    let envelope_in = sample(&|t| (a0 + p.envelope_depth * (nu * t).sin()) * (w0 * t).sin());
    let phase_in = sample(&|t| a0 * (w0 * t + p.phase_depth * (nu * t).cos()).sin());
    let deep_in = sample(&|t| a0 * (1.0 + (nu * t).sin()) * (w0 * t).sin());

    let env = demodulate(&envelope_in, dt, w0, p.cutoff).map_err(err)?;
    let ph = demodulate(&phase_in, dt, w0, p.cutoff).map_err(err)?;
    let deep = demodulate(&deep_in, dt, w0, p.cutoff).map_err(err)?;
    let env_err = rel_l2(&env.slow_amp, &sample(&|t| p.envelope_depth * (nu * t).sin()));
    let ph_err = rel_l2(&ph.slow_phase, &sample(&|t| p.phase_depth * (nu * t).cos()));

    let mut rec = Table::new("demodulation", &["case", "carrier_amp", "recovery_rel_l2"]);
    rec.push(row!["envelope", env.carrier_amp, env_err]);
    rec.push(row!["phase", ph.carrier_amp, ph_err]);
    out.tables.push(rec);

    let mut sep = Table::new("scale_separation", &["case", "check", "ratio", "factor", "passed"]);
    let reports = [
        ("envelope", scale_separation_check(&env, p.separation_factor)),
        ("phase", scale_separation_check(&ph, p.separation_factor)),
        ("full_depth", scale_separation_check(&deep, p.separation_factor)),
    ];
    for (case, r) in &reports {
        separation_rows(&mut sep, case, r);
    }
    out.tables.push(sep);

    let stride = (p.samples_per_period / 4.0).max(1.0) as usize;
    let mut series = Table::new("demodulated_series", &["t", "envelope_slow_amp", "phase_slow_phase"]);
    for i in (0..n).step_by(stride) {
        series.push(row![i as f64 * dt, env.slow_amp[i], ph.slow_phase[i]]);
    }
    out.tables.push(series);

    out.verdicts.push(Verdict::at_most("envelope_recovery_rel_l2", env_err, p.recovery_tolerance));
    out.verdicts.push(Verdict::at_most("phase_recovery_rel_l2", ph_err, p.recovery_tolerance));
    out.verdicts.push(Verdict::flag("separation_passes_for_modulated_inputs", reports[0].1.passed && reports[1].1.passed));
    out.verdicts.push(Verdict::flag("separation_fails_for_full_depth", !reports[2].1.passed));
    Ok(())
}

pub fn run(p: &Params) -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let vdp = OscillatorProblem::van_der_pol(p.epsilon);
    if vdp.epsilon_is_large() {
        out.notes.push(format!("warning: epsilon = {} is outside the weakly nonlinear regime", p.epsilon));
    }

    let mut quad = Table::new("averaged_drift", &["a", "quadrature", "closed_form", "abs_error"]);
    let mut worst = 0.0f64;
    for &a in &p.quadrature_amplitudes {
        let (c, _) = averaged_rhs(&vdp, a).map_err(err)?;
        let exact = vdp_closed_form(a);
        worst = worst.max((c - exact).abs());
        quad.push(row![a, c, exact, (c - exact).abs()]);
    }
    out.tables.push(quad);
    out.verdicts.push(Verdict::at_most("averaged_drift_max_error", worst, 1e-9));

    let cycles = limit_cycle_amplitude(&vdp).map_err(err)?;
    let mut lc = Table::new("limit_cycles", &["amplitude", "stability"]);
    for c in &cycles {
        lc.push(row![c.amplitude, format!("{:?}", c.stability).to_lowercase()]);
    }
    out.tables.push(lc);
    let stable = cycles.iter().find(|c| c.stability == Stability::Stable).map_or(f64::NAN, |c| c.amplitude);
    out.verdicts.push(Verdict::within("limit_cycle_amplitude", stable, 2.0, 1e-9));

    let full = integrate_full(&vdp, p.a0, 0.0, p.dt, p.t_end).map_err(err)?;
    let slow = integrate_slow(&vdp, p.a0, 0.0, p.dt, p.t_end).map_err(err)?;
    let amp = full.amplitude();
    let every = (1.0 / p.dt).round().max(1.0) as usize;
    let mut env = Table::new("envelope", &["t", "x", "full_amplitude", "averaged_amplitude"]);
    for i in (0..full.t.len()).step_by(every) {
        env.push(row![full.t[i], full.x[i], amp[i], slow.a[i]]);
    }
    out.tables.push(env);
    let final_env = full.final_envelope();
    out.verdicts.push(Verdict::within("final_envelope", final_env, 2.0, p.envelope_tolerance));

    let cmp = compare_full_vs_averaged(&vdp, p.a0, 0.0, p.compare_t_end).map_err(err)?;
    let ratio = cmp.ratio.unwrap_or(f64::NAN);
    let mut ct = Table::new("averaging_error", &["epsilon", "horizon", "max_error", "half_epsilon_error", "ratio"]);
    ct.push(row![cmp.epsilon, cmp.horizon, cmp.max_error, cmp.half_epsilon_error, ratio]);
    out.tables.push(ct);
    out.verdicts.push(Verdict::new("error_ratio_eps_over_half_eps", ratio, "in [1.5, 3]", (1.5..=3.0).contains(&ratio)));

    demodulation(p, &mut out)?;
    Ok(out)
}
