use serde::{Deserialize, Serialize};
use translocal_core::fluctuation::{
    iid_ensemble, spectral_exponent, synthesize_ensemble, synthesize_field, variance_vs_radius, ScalingFit,
    VarianceOptions, Window,
};

use super::{err, Outcome};
use crate::{row, Table, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub alphas: Vec<f64>,
    pub dims: Vec<usize>,
    pub side_2d: usize,
    pub side_3d: usize,
    pub radii_2d: Vec<f64>,
    pub radii_3d: Vec<f64>,
    pub fields: usize,
    pub window: Window,
    pub centers_per_field: usize,
    pub iid_tolerance: f64,
    pub alpha_tolerance: f64,
    pub spectral_alphas: Vec<f64>,
    pub spectral_side_1d: usize,
    pub spectral_side_2d: usize,
    pub spectral_fraction: f64,
    pub spectral_tolerance: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 2.0],
            dims: vec![2, 3],
            side_2d: 256,
            side_3d: 64,
            radii_2d: vec![4.0, 8.0, 16.0, 32.0],
            radii_3d: vec![2.0, 2.83, 4.0, 5.66, 8.0],
            fields: 20,
            window: Window::RaisedCosine,
            centers_per_field: 1024,
            iid_tolerance: 0.1,
            alpha_tolerance: 0.2,
            spectral_alphas: vec![0.5, 1.0, 2.0],
            spectral_side_1d: 4096,
            spectral_side_2d: 256,
            spectral_fraction: 0.25,
            spectral_tolerance: 0.3,
        }
    }
}

impl super::Params for Params {
    fn validate(&self) -> Result<(), String> {
        if self.dims.iter().any(|d| !matches!(d, 2 | 3)) {
            return Err("dims entries must be 2 or 3".into());
        }
        if self.radii_2d.len() < 2 || self.radii_3d.len() < 2 {
            return Err("at least two radii are needed for a fit".into());
        }
        if self.radii_2d.iter().chain(&self.radii_3d).any(|r| !(*r > 0.0)) {
            return Err("radii must be positive".into());
        }
        if self.centers_per_field == 0 {
            return Err("centers_per_field must be positive".into());
        }
        Ok(())
    }
}

fn scaling_table(name: &str, fit: &ScalingFit) -> Table {
    let mut t = Table::new(name, &["R", "variance", "stderr"]);
    for r in &fit.rows {
        t.push(row![r.radius, r.variance, r.stderr]);
    }
    t
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let seeds = seed..seed + p.fields as u64;
    let opts = VarianceOptions {
        centers_per_field: p.centers_per_field,
        seed,
    };
    let mut fits = Table::new("scaling_fits", &["case", "dims", "alpha", "beta", "beta_stderr", "expected", "tolerance", "passed"]);
    let mut record = |out: &mut Outcome, case: String, dims: usize, alpha: f64, fit: &ScalingFit, tol: f64| {
        let expected = dims as f64 - alpha;
        let ok = (fit.beta - expected).abs() <= tol;
        fits.push(row![case, dims, alpha, fit.beta, fit.beta_stderr, expected, tol, u8::from(ok)]);
        out.verdicts.push(Verdict::within(&format!("beta_{case}"), fit.beta, expected, tol));
        out.tables.push(scaling_table(&format!("variance_{case}"), fit));
    };

    let iid = iid_ensemble(2, p.side_2d, seeds.clone()).map_err(err)?;
    let fit = variance_vs_radius(&iid, p.window, &p.radii_2d, &opts).map_err(err)?;
    drop(iid);
    record(&mut out, "iid_2d".into(), 2, 0.0, &fit, p.iid_tolerance);

    for &dims in &p.dims {
        let (side, radii) = if dims == 2 { (p.side_2d, &p.radii_2d) } else { (p.side_3d, &p.radii_3d) };
        for &alpha in &p.alphas {
            let ens = synthesize_ensemble(dims, side, alpha, seeds.clone()).map_err(err)?;
            let fit = variance_vs_radius(&ens, p.window, radii, &opts).map_err(err)?;
            record(&mut out, format!("alpha{alpha}_{dims}d"), dims, alpha, &fit, p.alpha_tolerance);
        }
    }
    out.tables.push(fits);

    let mut spectral = Table::new("spectral_round_trip", &["dims", "side", "alpha", "alpha_hat", "stderr", "passed"]);
    let mut worst = 0.0f64;
    for (dims, side) in [(1, p.spectral_side_1d), (2, p.spectral_side_2d)] {
        for &alpha in &p.spectral_alphas {
            let field = synthesize_field(dims, side, alpha, seed).map_err(err)?;
            let fit = spectral_exponent(&field, p.spectral_fraction).map_err(err)?;
            let e = (fit.alpha_hat - alpha).abs();
            worst = worst.max(e);
            spectral.push(row![dims, side, alpha, fit.alpha_hat, fit.stderr, u8::from(e <= p.spectral_tolerance)]);
        }
    }
    out.tables.push(spectral);
    out.verdicts.push(Verdict::at_most("spectral_round_trip_max_error", worst, p.spectral_tolerance));
    Ok(out)
}
