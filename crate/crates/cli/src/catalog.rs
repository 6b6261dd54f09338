//! The fixed experiment catalog.

use std::fmt::Write as _;

use crate::{experiments, CliError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Background topic in the source theory.
    pub topic: &'static str,
    pub params: &'static [(&'static str, &'static str)],
}

const CATALOG: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "clique_rg",
        summary: "connectivity arithmetic, maximal-clique oracle, clique-graph fixed points",
        topic: "wormhole-space graphs: connectivity between huge node sets and the clique-graph renormalization",
        params: &[
            ("interbonds, n1, n2", "counts for the connectivity of two node sets"),
            ("oracle_graphs", "random graphs checked against brute-force clique enumeration"),
            ("oracle_max_nodes", "largest oracle graph"),
            ("oracle_edge_prob", "edge probability of the oracle graphs"),
            ("complete_sizes", "n for the K_n -> K1 collapse check"),
            ("cycle_len", "cycle tested as a fixed point"),
            ("fixed_point_steps", "iterations allowed to detect the cycle's fixed point"),
            ("max_steps, overlap_min, min_clique_size", "renormalization settings"),
        ],
    },
    ExperimentInfo {
        name: "sync_sweep",
        summary: "two-oscillator locking and small-world synchronization on a lattice",
        topic: "the clock network: coupled phase oscillators, local near-order plus translocal shortcuts",
        params: &[
            ("pair_alpha", "coupling of the two-oscillator check"),
            ("lock_detunings", "frequency differences inside the locking band"),
            ("drift_detunings", "frequency differences outside it"),
            ("pair_t_end, pair_dt", "integration of the pair"),
            ("lock_tolerance", "beat frequency below which a pair counts as locked"),
            ("side, dims", "lattice"),
            ("shortcut_prob", "per-node probability of a translocal edge"),
            ("sigma_omega, mean_omega", "natural-frequency distribution"),
            ("alpha", "lattice coupling"),
            ("t_end, dt", "lattice integration"),
            ("n_seeds", "ensemble size; seeds run from the config seed upward"),
            ("min_gain", "required mean-R advantage over the shortcut-free control"),
        ],
    },
    ExperimentInfo {
        name: "vdp_averaging",
        summary: "first-order averaging of the van der Pol oscillator and slow/fast demodulation",
        topic: "weakly nonlinear clocks: averaged amplitude/phase equations and undulation modulations",
        params: &[
            ("epsilon", "nonlinearity; values above 0.5 trigger a warning"),
            ("a0", "initial amplitude"),
            ("t_end", "full-system integration time"),
            ("dt", "full-system step"),
            ("compare_t_end", "horizon cap for the full-vs-averaged comparison"),
            ("quadrature_amplitudes", "amplitudes at which the averaged drift is checked"),
            ("omega0, samples_per_period, periods", "demodulation carrier and record length"),
            ("modulation_ratio", "modulation frequency over carrier frequency"),
            ("envelope_depth, phase_depth", "modulation depths of the demodulation inputs"),
            ("cutoff, separation_factor", "demodulation low-pass and scale-separation threshold"),
        ],
    },
    ExperimentInfo {
        name: "fluct_scaling",
        summary: "windowed-variance scaling of correlated random fields and spectral round trips",
        topic: "fluctuations of summed fields: central-limit versus area-law scaling",
        params: &[
            ("alphas", "spectral exponents alpha of the synthesized fields"),
            ("dims", "dimensions n to run; variance should scale as R^(n - alpha)"),
            ("side_2d, side_3d", "lattice sides"),
            ("radii_2d, radii_3d", "window radii R"),
            ("fields", "ensemble size"),
            ("window", "raised_cosine or sharp"),
            ("centers_per_field", "window centres sampled per field"),
            ("spectral_alphas, spectral_side_1d, spectral_side_2d, spectral_fraction", "spectral round trip"),
        ],
    },
    ExperimentInfo {
        name: "madelung_residuals",
        summary: "Madelung split residuals under refinement, quantum potential, two-particle separability",
        topic: "hydrodynamic form of the Schrodinger equation and configuration-space wave functions",
        params: &[
            ("sigma, mass, length", "free Gaussian packet and box"),
            ("dx_coarse, dt_coarse, refinements", "refinement ladder; each level halves dx and dt"),
            ("t_end, stride", "evolution time and snapshot stride"),
            ("floor", "amplitude floor for the split"),
            ("vq_dx", "grid spacing for the quantum potential at the origin"),
            ("pair_n, pair_dx, pair_offset, pair_k", "two-particle grid and entangled test state"),
        ],
    },
    ExperimentInfo {
        name: "two_level_demo",
        summary: "nonlocal micro dynamics whose kernel lift obeys a local macro law",
        topic: "two levels of description linked by nonlocal influence functions",
        params: &[
            ("n", "grid points on the unit circle"),
            ("kernel, width", "F: gaussian, identity, two_peak"),
            ("macro_kernel", "G: identity reproduces the construction"),
            ("rule", "translocal, diffusion"),
            ("gamma, shortcut_prob, translocal_weight", "translocal mixing"),
            ("diffusivity", "diffusive rule"),
            ("dt, steps, record_every", "integration"),
        ],
    },
    ExperimentInfo {
        name: "commutator_demo",
        summary: "non-commuting position and momentum projections on a Gaussian packet",
        topic: "measurement as projection; the order of projections matters",
        params: &[
            ("n, dx, sigma, k0", "packet and grid"),
            ("half_line", "position window [a, b] of the main projector"),
            ("commuting_window", "second position window"),
            ("momentum_window", "momentum window [k1, k2]"),
        ],
    },
];

const ALIASES: &[(&str, &str)] = &[("connectivity_demo", "clique_rg")];

pub fn list() -> &'static [ExperimentInfo] {
    CATALOG
}

pub fn lookup(name: &str) -> Result<&'static ExperimentInfo, CliError> {
    let canonical = ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(name, |(_, target)| target);
    CATALOG
        .iter()
        .find(|e| e.name == canonical)
        .ok_or_else(|| CliError::UnknownExperiment(name.to_string()))
}

/// Human-readable parameter documentation including defaults.
pub fn describe(name: &str) -> Result<String, CliError> {
    let info = lookup(name)?;
    let defaults = experiments::resolve_params(info.name, &toml::Table::new())?;
    let mut out = String::new();
    let _ = writeln!(out, "{}: {}", info.name, info.summary);
    let _ = writeln!(out, "background: {}", info.topic);
    let _ = writeln!(out, "\nparameters:");
    for (keys, doc) in info.params {
        let _ = writeln!(out, "  {keys:<44} {doc}");
    }
    let _ = writeln!(out, "\ndefaults:");
    out.push_str(&toml::to_string(&defaults).expect("defaults serialize"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_seven_entries() {
        assert_eq!(list().len(), 7);
        assert_eq!(lookup("connectivity_demo").unwrap().name, "clique_rg");
        assert!(lookup("nothing").is_err());
    }

    #[test]
    fn every_entry_describes_itself() {
        for e in list() {
            let text = describe(e.name).unwrap();
            assert!(text.starts_with(e.name));
        }
        let fluct = describe("fluct_scaling").unwrap();
        for word in ["alphas", "dims", "radii_2d"] {
            assert!(fluct.contains(word));
        }
        assert!(describe("unknown").is_err());
    }
}
