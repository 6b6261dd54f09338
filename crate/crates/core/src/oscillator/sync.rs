use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    order_parameter, pair_correlation, CorrelationBin, CorrelationOptions, IntegrateOptions,
    OscError, OscillatorNetwork,
};
use crate::graph::{EdgeKind, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialPhases {
    #[default]
    Uniform,
    /// Uniform on `[0, π)`: no phase winding is possible.
    HalfCircle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncConfig {
    pub side: usize,
    pub dims: usize,
    pub shortcut_prob: f64,
    pub mean_omega: f64,
    pub sigma_omega: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub seeds: Vec<u64>,
    pub initial: InitialPhases,
    pub bin_width: f64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        Self {
            side: 32,
            dims: 2,
            shortcut_prob: 0.05,
            mean_omega: 0.0,
            sigma_omega: 0.3,
            alpha: 2.0,
            t_end: 100.0,
            dt: 0.05,
            seeds: (0..20).collect(),
            initial: InitialPhases::Uniform,
            bin_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub translocal_edges: usize,
    pub final_r: f64,
    pub control_final_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    pub per_seed: Vec<SeedOutcome>,
    pub mean_r: f64,
    pub mean_r_control: f64,
    pub correlation: Vec<CorrelationBin>,
    pub correlation_control: Vec<CorrelationBin>,
}

struct Run {
    final_r: f64,
    translocal: usize,
    bins: Vec<CorrelationBin>,
}

fn run_one(cfg: &SyncConfig, p: f64, seed: u64) -> Result<Run, OscError> {
    let graph = Graph::lattice_with_shortcuts(cfg.side, cfg.dims, p, seed)?;
    let translocal = graph.count_kind(EdgeKind::Translocal);
    let shape = graph.lattice().expect("lattice graph");
    // frequencies and initial phases come from a stream independent of the wiring
    let net = OscillatorNetwork::seeded(
        graph,
        cfg.mean_omega,
        cfg.sigma_omega,
        cfg.alpha,
        cfg.initial,
        seed ^ 0x5_eed0_f0dd,
    )?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut opts = IntegrateOptions::new(cfg.dt, steps);
    opts.record_every = steps.max(1);
    let traj = net.integrate(&opts)?;
    let (final_r, _) = order_parameter(traj.last())?;
    let bins = pair_correlation(
        traj.last(),
        &shape,
        &CorrelationOptions {
            bin_width: cfg.bin_width,
            seed,
            ..Default::default()
        },
    )?;
    Ok(Run {
        final_r,
        translocal,
        bins,
    })
}

fn mean_bins(runs: &[Vec<CorrelationBin>]) -> Vec<CorrelationBin> {
    let mut acc: std::collections::BTreeMap<u64, (f64, f64, f64, usize, usize)> = Default::default();
    for bins in runs {
        for b in bins {
            let e = acc.entry(b.r_lo.to_bits()).or_insert((b.r_lo, 0.0, 0.0, 0, 0));
            e.1 += b.r_mean;
            e.2 += b.correlation;
            e.3 += b.pairs;
            e.4 += 1;
        }
    }
    let mut out: Vec<CorrelationBin> = acc
        .into_values()
        .map(|(r_lo, r, c, pairs, k)| CorrelationBin {
            r_lo,
            r_mean: r / k as f64,
            correlation: c / k as f64,
            pairs,
        })
        .collect();
    out.sort_by(|a, b| a.r_lo.total_cmp(&b.r_lo));
    out
}

/// Compares synchronization with shortcuts against the shortcut-free
/// control on identical seeds, frequencies and initial phases.
pub fn sync_experiment(cfg: &SyncConfig) -> Result<SyncReport, OscError> {
    if !(cfg.sigma_omega >= 0.0) {
        return Err(OscError::Invalid("sigma_omega must be >= 0".into()));
    }
    if cfg.seeds.is_empty() {
        return Err(OscError::Invalid("at least one seed is required".into()));
    }
    let runs: Vec<(Run, Run)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| Ok((run_one(cfg, cfg.shortcut_prob, seed)?, run_one(cfg, 0.0, seed)?)))
        .collect::<Result<_, OscError>>()?;
    let per_seed: Vec<SeedOutcome> = cfg
        .seeds
        .iter()
        .zip(&runs)
        .map(|(&seed, (a, b))| SeedOutcome {
            seed,
            translocal_edges: a.translocal,
            final_r: a.final_r,
            control_final_r: b.final_r,
        })
        .collect();
    let k = per_seed.len() as f64;
    let (bins, control): (Vec<_>, Vec<_>) = runs.into_iter().map(|(a, b)| (a.bins, b.bins)).unzip();
    Ok(SyncReport {
        mean_r: per_seed.iter().map(|s| s.final_r).sum::<f64>() / k,
        mean_r_control: per_seed.iter().map(|s| s.control_final_r).sum::<f64>() / k,
        per_seed,
        correlation: mean_bins(&bins),
        correlation_control: mean_bins(&control),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_frequencies_synchronize_from_half_circle() {
        let cfg = SyncConfig {
            side: 8,
            sigma_omega: 0.0,
            alpha: 1.0,
            t_end: 200.0,
            dt: 0.05,
            shortcut_prob: 0.0,
            initial: InitialPhases::HalfCircle,
            seeds: vec![1, 2, 3],
            ..Default::default()
        };
        let report = sync_experiment(&cfg).unwrap();
        for s in &report.per_seed {
            assert!(s.final_r >= 0.999, "{s:?}");
        }
    }

    #[test]
    fn uncoupled_network_stays_incoherent() {
        let cfg = SyncConfig {
            side: 16,
            alpha: 0.0,
            t_end: 20.0,
            seeds: (0..20).collect(),
            ..Default::default()
        };
        let report = sync_experiment(&cfg).unwrap();
        // Rayleigh baseline: E[R] = sqrt(pi / 4N), sd = sqrt((4 - pi) / 4N)
        let n = 256.0;
        let baseline = (std::f64::consts::PI / (4.0 * n)).sqrt();
        let sd_of_mean = ((4.0 - std::f64::consts::PI) / (4.0 * n)).sqrt() / (20.0f64).sqrt();
        assert!((report.mean_r - baseline).abs() < 4.0 * sd_of_mean, "{}", report.mean_r);
        assert!((report.mean_r_control - baseline).abs() < 4.0 * sd_of_mean);
    }

    #[test]
    fn rejects_negative_spread() {
        let cfg = SyncConfig {
            sigma_omega: -1.0,
            ..Default::default()
        };
        assert!(sync_experiment(&cfg).is_err());
    }
}
