use serde::{Deserialize, Serialize};
use translocal_core::madelung::{commutator_gap, Projector, WaveFunction};

use super::{err, Outcome};
use crate::{row, Table, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub n: usize,
    pub dx: f64,
    pub sigma: f64,
    pub k0: f64,
    pub half_line: [f64; 2],
    pub commuting_window: [f64; 2],
    pub momentum_window: [f64; 2],
    pub commuting_tolerance: f64,
    pub min_gap: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n: 512,
            dx: 0.05,
            sigma: 1.0,
            k0: 0.0,
            half_line: [0.0, f64::INFINITY],
            commuting_window: [-1.0, 0.5],
            momentum_window: [-1.0, 1.0],
            commuting_tolerance: 1e-12,
            min_gap: 1e-3,
        }
    }
}

impl super::Params for Params {
    fn validate(&self) -> Result<(), String> {
        if self.n < 8 || !(self.dx > 0.0 && self.sigma > 0.0) {
            return Err("need n >= 8 and positive dx, sigma".into());
        }
        for (name, w) in [("half_line", self.half_line), ("commuting_window", self.commuting_window), ("momentum_window", self.momentum_window)] {
            if !(w[0] <= w[1]) {
                return Err(format!("{name} must satisfy lower <= upper"));
            }
        }
        Ok(())
    }
}

pub fn run(p: &Params) -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let psi = WaveFunction::gaussian(p.n, p.dx, 1.0, 0.0, p.sigma, p.k0).map_err(err)?;
    let half = Projector::Position { a: p.half_line[0], b: p.half_line[1] };
    let other = Projector::Position { a: p.commuting_window[0], b: p.commuting_window[1] };
    let momentum = Projector::Momentum { k1: p.momentum_window[0], k2: p.momentum_window[1] };
    let commuting = commutator_gap(&psi, &half, &other).map_err(err)?;
    let mixed = commutator_gap(&psi, &half, &momentum).map_err(err)?;
    let mut t = Table::new("commutator_gaps", &["pair", "gap"]);
    t.push(row!["position_position", commuting]);
    t.push(row!["position_momentum", mixed]);
    out.tables.push(t);
    out.verdicts.push(Verdict::at_most("gap_commuting_positions", commuting, p.commuting_tolerance));
    out.verdicts.push(Verdict::at_least("gap_position_momentum", mixed, p.min_gap));
    Ok(out)
}
