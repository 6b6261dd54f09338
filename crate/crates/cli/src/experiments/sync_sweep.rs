use serde::{Deserialize, Serialize};
use translocal_core::graph::wrap_angle;
use translocal_core::oscillator::{
    sync_experiment, CorrelationBin, InitialPhases, IntegrateOptions, OscillatorNetwork, SyncConfig,
};
use translocal_core::Graph;

use super::{err, Outcome};
use crate::{row, Table, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub pair_alpha: f64,
    pub lock_detunings: Vec<f64>,
    pub drift_detunings: Vec<f64>,
    pub pair_t_end: f64,
    pub pair_dt: f64,
    pub lock_tolerance: f64,
    pub phase_tolerance: f64,
    pub side: usize,
    pub dims: usize,
    pub shortcut_prob: f64,
    pub mean_omega: f64,
    pub sigma_omega: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_seeds: usize,
    pub initial: InitialPhases,
    pub bin_width: f64,
    pub min_gain: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            pair_alpha: 1.0,
            lock_detunings: vec![-1.5, -1.2, -0.9, -0.6, -0.3, 0.3, 0.6, 0.9, 1.2, 1.5],
            drift_detunings: vec![-3.0, 2.2, 2.5, 4.0],
            pair_t_end: 200.0,
            pair_dt: 0.01,
            lock_tolerance: 1e-3,
            phase_tolerance: 1e-3,
            side: 32,
            dims: 2,
            shortcut_prob: 0.05,
            mean_omega: 0.0,
            sigma_omega: 0.3,
            alpha: 2.0,
            t_end: 100.0,
            dt: 0.05,
            n_seeds: 20,
            initial: InitialPhases::Uniform,
            bin_width: 1.0,
            min_gain: 0.2,
        }
    }
}

impl super::Params for Params {
    fn validate(&self) -> Result<(), String> {
        if !(self.pair_alpha > 0.0) {
            return Err("pair_alpha must be positive".into());
        }
        let band = 2.0 * self.pair_alpha;
        if let Some(d) = self.lock_detunings.iter().find(|d| d.abs() >= band) {
            return Err(format!("lock detuning {d} is outside the band |dw| < {band}"));
        }
        if let Some(d) = self.drift_detunings.iter().find(|d| d.abs() <= band) {
            return Err(format!("drift detuning {d} is inside the band |dw| <= {band}"));
        }
        if self.n_seeds == 0 {
            return Err("n_seeds must be positive".into());
        }
        if !(self.pair_t_end > 0.0 && self.pair_dt > 0.0 && self.t_end > 0.0 && self.dt > 0.0) {
            return Err("times and steps must be positive".into());
        }
        Ok(())
    }
}

struct PairRun {
    /// Final phase difference wrapped to (−π, π].
    delta: f64,
    /// Mean rate of the unwrapped difference over the second half.
    beat: f64,
}

fn run_pair(alpha: f64, detuning: f64, t_end: f64, dt: f64) -> Result<PairRun, String> {
    let omega = vec![detuning / 2.0, -detuning / 2.0];
    let half = ((t_end / 2.0) / dt).round() as usize;
    let first = OscillatorNetwork::new(Graph::path(2), vec![0.0, 0.0], omega.clone(), alpha).map_err(err)?;
    let mid = first.integrate(&IntegrateOptions::new(dt, half)).map_err(err)?.unwrapped_final;
    let second = OscillatorNetwork::new(Graph::path(2), mid.clone(), omega, alpha).map_err(err)?;
    // the restart stores wrapped phases; add the lost turns back
    let lost = (mid[0] - second.theta()[0]) - (mid[1] - second.theta()[1]);
    let end = second.integrate(&IntegrateOptions::new(dt, half)).map_err(err)?.unwrapped_final;
    let d_mid = mid[0] - mid[1];
    let d_end = end[0] - end[1] + lost;
    Ok(PairRun {
        delta: wrap_angle(d_end),
        beat: (d_end - d_mid) / (half as f64 * dt),
    })
}

fn correlation_table(name: &str, bins: &[CorrelationBin]) -> Table {
    let mut t = Table::new(name, &["r_lo", "r_mean", "correlation", "pairs"]);
    for b in bins {
        t.push(row![b.r_lo, b.r_mean, b.correlation, b.pairs]);
    }
    t
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let a = p.pair_alpha;

    let mut lock = Table::new("pair_locking", &["delta_omega", "alpha", "predicted", "measured", "error", "beat", "locked"]);
    let (mut worst, mut all_locked) = (0.0f64, true);
    for &dw in &p.lock_detunings {
        let r = run_pair(a, dw, p.pair_t_end, p.pair_dt)?;
        let predicted = (dw / (2.0 * a)).asin();
        let error = (r.delta - predicted).abs();
        let locked = r.beat.abs() < p.lock_tolerance;
        worst = worst.max(error);
        all_locked &= locked;
        lock.push(row![dw, a, predicted, r.delta, error, r.beat, u8::from(locked)]);
    }
    out.tables.push(lock);
    out.verdicts.push(Verdict::at_most("locked_phase_max_error", worst, p.phase_tolerance));
    out.verdicts.push(Verdict::flag("locking_detected_inside_band", all_locked));

    let mut drift = Table::new("pair_drift", &["delta_omega", "alpha", "beat", "predicted_beat", "locked"]);
    let mut any_locked = false;
    for &dw in &p.drift_detunings {
        let r = run_pair(a, dw, p.pair_t_end, p.pair_dt)?;
        // period-averaged beat of dΔ/dt = Δω − 2α sin Δ
        let predicted = dw.signum() * (dw * dw - 4.0 * a * a).sqrt();
        let locked = r.beat.abs() < p.lock_tolerance;
        any_locked |= locked;
        drift.push(row![dw, a, r.beat, predicted, u8::from(locked)]);
    }
    out.tables.push(drift);
    out.verdicts.push(Verdict::flag("no_lock_outside_band", !any_locked));

    let cfg = SyncConfig {
        side: p.side,
        dims: p.dims,
        shortcut_prob: p.shortcut_prob,
        mean_omega: p.mean_omega,
        sigma_omega: p.sigma_omega,
        alpha: p.alpha,
        t_end: p.t_end,
        dt: p.dt,
        seeds: (seed..seed + p.n_seeds as u64).collect(),
        initial: p.initial,
        bin_width: p.bin_width,
    };
    let report = sync_experiment(&cfg).map_err(err)?;
    let mut seeds = Table::new("sync_seeds", &["seed", "translocal_edges", "final_r", "control_final_r"]);
    for s in &report.per_seed {
        seeds.push(row![s.seed, s.translocal_edges, s.final_r, s.control_final_r]);
    }
    let mut summary = Table::new("sync_summary", &["shortcut_prob", "seeds", "mean_r", "mean_r_control", "gain"]);
    let gain = report.mean_r - report.mean_r_control;
    summary.push(row![p.shortcut_prob, p.n_seeds, report.mean_r, report.mean_r_control, gain]);
    out.tables.push(seeds);
    out.tables.push(summary);
    out.tables.push(correlation_table("correlation_shortcuts", &report.correlation));
    out.tables.push(correlation_table("correlation_control", &report.correlation_control));
    out.verdicts.push(Verdict::new("small_world_gain", gain, format!("> {}", p.min_gain), gain > p.min_gain));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_locks_at_the_arcsine() {
        let r = run_pair(1.0, 1.0, 100.0, 0.01).unwrap();
        assert!((r.delta - 0.5f64.asin()).abs() < 1e-6);
        assert!(r.beat.abs() < 1e-6);
    }

    #[test]
    fn pair_drifts_outside_the_band() {
        let r = run_pair(1.0, 3.0, 200.0, 0.01).unwrap();
        assert!((r.beat - 5f64.sqrt()).abs() < 0.05, "{}", r.beat);
    }

    #[test]
    fn validation() {
        use super::super::Params as _;
        let p = Params {
            lock_detunings: vec![2.5],
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(Params::default().validate().is_ok());
    }
}
