use serde::{Deserialize, Serialize};
use translocal_core::multiscale::{
    default_micro_field, lift, two_level_demo, write_kernel, InfluenceKernel, MicroRule, TwoLevelOptions,
};

use super::{err, Outcome};
use crate::{row, Table, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Gaussian,
    Identity,
    TwoPeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Translocal,
    Diffusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub n: usize,
    pub kernel: KernelKind,
    pub width: f64,
    pub macro_kernel: KernelKind,
    pub rule: RuleKind,
    pub gamma: f64,
    pub shortcut_prob: f64,
    pub translocal_weight: f64,
    pub diffusivity: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub tolerance: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n: 64,
            kernel: KernelKind::Gaussian,
            width: 0.05,
            macro_kernel: KernelKind::Identity,
            rule: RuleKind::Translocal,
            gamma: 1.0,
            shortcut_prob: 0.1,
            translocal_weight: 1.0,
            diffusivity: 0.01,
            dt: 1e-3,
            steps: 500,
            record_every: 50,
            tolerance: 1e-6,
        }
    }
}

impl super::Params for Params {
    fn validate(&self) -> Result<(), String> {
        if self.n < 3 {
            return Err("n must be at least 3".into());
        }
        if !(self.width > 0.0 && self.dt > 0.0) || self.record_every == 0 {
            return Err("width, dt and record_every must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.shortcut_prob) {
            return Err("shortcut_prob must lie in [0, 1]".into());
        }
        Ok(())
    }
}

fn kernel(kind: KernelKind, n: usize, dx: f64, width: f64) -> Result<InfluenceKernel, String> {
    match kind {
        KernelKind::Gaussian => InfluenceKernel::gaussian(n, dx, width),
        KernelKind::Identity => InfluenceKernel::identity(n, dx),
        KernelKind::TwoPeak => InfluenceKernel::two_peak(n, dx),
    }
    .map_err(err)
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome, String> {
    let mut out = Outcome::default();
    let dx = 1.0 / p.n as f64;
    let f = kernel(p.kernel, p.n, dx, p.width)?;
    let g = kernel(p.macro_kernel, p.n, dx, p.width)?;
    let rule = match p.rule {
        RuleKind::Translocal => MicroRule::Translocal {
            gamma: p.gamma,
            shortcut_prob: p.shortcut_prob,
            translocal_weight: p.translocal_weight,
            seed,
        },
        RuleKind::Diffusion => MicroRule::Diffusion {
            diffusivity: p.diffusivity,
        },
    };
    let opts = TwoLevelOptions {
        dt: p.dt,
        steps: p.steps,
        record_every: p.record_every,
    };
    let v0 = default_micro_field(p.n);
    let rep = two_level_demo(&v0, &f, &g, &rule, &opts).map_err(err)?;

    // residuals are reported relative to the size of ΔV at the start
    let scale = lift(&v0, &f.laplacian_x()).map_err(err)?.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut summary = Table::new(
        "two_level_summary",
        &["macro_law_residual", "chained_identity_residual", "laplacian_scale", "macro_law_fd_relative", "translocal_fraction", "micro_change"],
    );
    summary.push(row![
        rep.macro_law_residual,
        rep.chained_identity_residual,
        scale,
        rep.macro_law_fd_relative,
        rep.translocal_fraction,
        rep.micro_change
    ]);
    out.tables.push(summary);
    let mut fields = Table::new("macro_fields", &["t", "x", "U", "V"]);
    for (k, t) in rep.times.iter().enumerate() {
        for i in 0..p.n {
            fields.push(row![t, i as f64 * dx, rep.macro_u[k][i], rep.macro_v[k][i]]);
        }
    }
    out.tables.push(fields);
    out.files.push(("kernel_F.txt".into(), write_kernel(&f)));

    let identity_case = p.macro_kernel == KernelKind::Identity;
    if identity_case {
        out.verdicts.push(Verdict::at_most("chained_identity_relative", rep.chained_identity_residual / scale, p.tolerance));
        out.verdicts.push(Verdict::at_most("macro_law_relative", rep.macro_law_residual / scale, p.tolerance));
    } else {
        out.notes.push("macro kernel differs from the construction; the macro law is not expected to hold".into());
    }
    if p.rule == RuleKind::Translocal && p.shortcut_prob > 0.0 {
        out.verdicts.push(Verdict::new("translocal_fraction", rep.translocal_fraction, "> 0", rep.translocal_fraction > 0.0));
    }
    Ok(out)
}
