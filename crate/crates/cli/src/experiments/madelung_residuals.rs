use serde::{Deserialize, Serialize};
use translocal_core::madelung::{
    continuity_residual, evolve, hj_residuals, quantum_potential, separability_residual, split, EvolveOptions,
    WaveFunction,
};

use super::{err, Outcome};
use crate::{row, Table, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub sigma: f64,
    pub mass: f64,
    pub length: f64,
    pub dx_coarse: f64,
    pub dt_coarse: f64,
    pub refinements: usize,
    pub t_end: f64,
    pub stride: usize,
    pub floor: f64,
    pub min_continuity_ratio: f64,
    pub min_hj_ratio: f64,
    pub min_flipped_residual: f64,
    pub vq_dx: f64,
    pub vq_length: f64,
    pub vq_tolerance: f64,
    pub pair_n: usize,
    pub pair_dx: f64,
    pub pair_sigma: f64,
    pub pair_offset: f64,
    pub pair_k: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            mass: 1.0,
            length: 40.0,
            dx_coarse: 0.1,
            dt_coarse: 0.0025,
            refinements: 2,
            t_end: 1.0,
            stride: 20,
            floor: 1e-6,
            min_continuity_ratio: 3.0,
            min_hj_ratio: 2.0,
            min_flipped_residual: 0.1,
            vq_dx: 0.01,
            vq_length: 20.0,
            vq_tolerance: 1e-4,
            pair_n: 96,
            pair_dx: 0.25,
            pair_sigma: 1.0,
            pair_offset: 1.0,
            pair_k: 1.5,
        }
    }
}

impl super::Params for Params {
    fn validate(&self) -> Result<(), String> {
        let positive = [self.sigma, self.mass, self.length, self.dx_coarse, self.dt_coarse, self.t_end, self.vq_dx, self.vq_length, self.pair_dx];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err("lengths, spacings, times and the mass must be positive".into());
        }
        if self.refinements == 0 || self.stride == 0 {
            return Err("refinements and stride must be positive".into());
        }
        if self.pair_n < 8 {
            return Err("pair_n must be at least 8".into());
        }
        Ok(())
    }
}

struct Level {
    dx: f64,
    dt: f64,
    continuity_l2: f64,
    continuity_max: f64,
    hj_standard: f64,
    hj_flipped: f64,
}

fn level(p: &Params, k: usize) -> Result<Level, String> {
    let scale = 0.5f64.powi(k as i32);
    let (dx, dt) = (p.dx_coarse * scale, p.dt_coarse * scale);
    let n = (p.length / dx).round() as usize;
    let steps = (p.t_end / dt).round() as usize;
    let psi = WaveFunction::gaussian(n, dx, p.mass, 0.0, p.sigma, 0.0).map_err(err)?;
    let traj = evolve(&psi, &[], &EvolveOptions::new(dt, steps).stride(p.stride)).map_err(err)?;
    let cont = continuity_residual(&traj, p.floor).map_err(err)?;
    let hj = hj_residuals(&traj, &[], p.floor).map_err(err)?;
    Ok(Level {
        dx,
        dt,
        continuity_l2: cont.l2,
        continuity_max: cont.max,
        hj_standard: hj.standard.max,
        hj_flipped: hj.flipped.max,
    })
}

pub fn run(p: &Params) -> Result<Outcome, String> {
    let mut out = Outcome::default();

    let levels = (0..=p.refinements).map(|k| level(p, k)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("refinement", &["dx", "dt", "continuity_l2", "continuity_max", "hj_standard_max", "hj_flipped_max"]);
    for l in &levels {
        t.push(row![l.dx, l.dt, l.continuity_l2, l.continuity_max, l.hj_standard, l.hj_flipped]);
    }
    out.tables.push(t);
    let ratios = |f: fn(&Level) -> f64| levels.windows(2).map(|w| f(&w[0]) / f(&w[1])).fold(f64::INFINITY, f64::min);
    out.verdicts.push(Verdict::at_least("continuity_min_refinement_ratio", ratios(|l| l.continuity_l2), p.min_continuity_ratio));
    out.verdicts.push(Verdict::at_least("hj_standard_min_refinement_ratio", ratios(|l| l.hj_standard), p.min_hj_ratio));
    let flipped_min = levels.iter().map(|l| l.hj_flipped).fold(f64::INFINITY, f64::min);
    out.verdicts.push(Verdict::at_least("hj_flipped_convention_min_residual", flipped_min, p.min_flipped_residual));

    let n = (p.vq_length / p.vq_dx).round() as usize;
    let psi = WaveFunction::gaussian(n, p.vq_dx, p.mass, 0.0, p.sigma, 0.0).map_err(err)?;
    let pair = split(&psi, p.floor).map_err(err)?;
    let vq = quantum_potential(&psi, &pair);
    let mut vt = Table::new("quantum_potential", &["x", "v_q"]);
    let every = (0.1 / p.vq_dx).round().max(1.0) as usize;
    for i in (0..n).step_by(every) {
        if let (Some(v), true) = (vq[i], psi.x(i).abs() <= 3.0) {
            vt.push(row![psi.x(i), v]);
        }
    }
    out.tables.push(vt);
    let origin = vq[n / 2].unwrap_or(f64::NAN);
    let expected = 1.0 / (4.0 * p.mass * p.sigma * p.sigma);
    out.verdicts.push(Verdict::within("quantum_potential_at_origin", origin, expected, p.vq_tolerance));

    let a = WaveFunction::gaussian(p.pair_n, p.pair_dx, p.mass, -p.pair_offset, p.pair_sigma, 0.7).map_err(err)?;
    let b = WaveFunction::gaussian(p.pair_n, p.pair_dx, p.mass, 2.0 * p.pair_offset, 1.5 * p.pair_sigma, -1.1).map_err(err)?;
    let product = WaveFunction::product(&a, &b).map_err(err)?;
    let entangled = WaveFunction::entangled_pair(p.pair_n, p.pair_dx, p.mass, p.pair_sigma, p.pair_offset, p.pair_k).map_err(err)?;
    let r_prod = separability_residual(&product, p.floor).map_err(err)?;
    let r_ent = separability_residual(&entangled, p.floor).map_err(err)?;
    let mut st = Table::new("separability", &["state", "residual"]);
    st.push(row!["product", r_prod]);
    st.push(row!["entangled", r_ent]);
    out.tables.push(st);
    out.verdicts.push(Verdict::at_most("separability_product", r_prod, 1e-6));
    out.verdicts.push(Verdict::at_least("separability_entangled", r_ent, 0.1));
    Ok(out)
}
