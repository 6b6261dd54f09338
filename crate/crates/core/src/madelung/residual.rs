//! Finite-difference residuals of the continuity and Hamilton–Jacobi
//! equations on a computed trajectory, and phase separability.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{second_derivative, split, MadelungPair, QuantumError, QuantumTrajectory, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    /// `sqrt(Σ r² dxᵈ Δt)` over the evaluated points.
    pub l2: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `∂ₜS = −(∇S)²/2m − V + ΔR/(2mR)`
    #[default]
    Standard,
    /// `∂ₜS = −(∇S)²/2m + V − ΔR/(2mR)`
    Flipped,
}

struct Frames {
    h: f64,
    pairs: Vec<MadelungPair>,
}

fn prepare(traj: &QuantumTrajectory, floor: f64) -> Result<Frames, QuantumError> {
    let h = traj.interval()?;
    let pairs = traj.frames.iter().map(|f| split(f, floor)).collect::<Result<_, _>>()?;
    Ok(Frames { h, pairs })
}

/// All sites within two steps along each axis are unmasked.
fn stencil_clear(psi: &WaveFunction, mask: &[bool], i: usize) -> bool {
    (0..psi.dims).all(|a| (-2..=2).all(|o| !mask[psi.shift(i, a, o)]))
}

/// Centred phase gradient from the wrapped phase difference.
fn grad_s(psi: &WaveFunction, i: usize, axis: usize) -> f64 {
    let fwd = psi.values[psi.shift(i, axis, 1)];
    let back = psi.values[psi.shift(i, axis, -1)];
    (fwd * back.conj()).arg() / (2.0 * psi.dx)
}

fn accumulate(values: impl Iterator<Item = f64>, measure: f64) -> ResidualReport {
    let mut rep = ResidualReport {
        max: 0.0,
        l2: 0.0,
        points: 0,
    };
    for r in values {
        rep.max = rep.max.max(r.abs());
        rep.l2 += r * r;
        rep.points += 1;
    }
    rep.l2 = (rep.l2 * measure).sqrt();
    rep
}

fn interior_points<'a>(traj: &'a QuantumTrajectory, fr: &'a Frames) -> impl Iterator<Item = (usize, usize)> + 'a {
    (1..traj.frames.len() - 1).flat_map(move |k| {
        let psi = &traj.frames[k];
        (0..psi.values.len())
            .filter(move |&i| {
                !fr.pairs[k - 1].mask[i] && !fr.pairs[k + 1].mask[i] && stencil_clear(psi, &fr.pairs[k].mask, i)
            })
            .map(move |i| (k, i))
    })
}

/// `∂ₜ(R²) + Σ_a ∂_a(R² ∂_aS / m_a)` with centred differences in space and time.
pub fn continuity_residual(traj: &QuantumTrajectory, floor: f64) -> Result<ResidualReport, QuantumError> {
    let fr = prepare(traj, floor)?;
    let proto = &traj.frames[0];
    let values = interior_points(traj, &fr).map(|(k, i)| {
        let psi = &traj.frames[k];
        let rho = |k: usize, j: usize| fr.pairs[k].r[j].powi(2);
        let rho_t = (rho(k + 1, i) - rho(k - 1, i)) / (2.0 * fr.h);
        let mut div = 0.0;
        for a in 0..psi.dims {
            let flux = |j: usize| rho(k, j) * grad_s(psi, j, a) / psi.masses[a];
            div += (flux(psi.shift(i, a, 1)) - flux(psi.shift(i, a, -1))) / (2.0 * psi.dx);
        }
        rho_t + div
    });
    Ok(accumulate(values, proto.cell() * fr.h))
}

/// Hamilton–Jacobi residual under one sign convention. `v` may be empty for `V = 0`.
pub fn hj_residual(
    traj: &QuantumTrajectory,
    v: &[f64],
    convention: Convention,
    floor: f64,
) -> Result<ResidualReport, QuantumError> {
    let fr = prepare(traj, floor)?;
    let proto = &traj.frames[0];
    let n_sites = proto.values.len();
    if !v.is_empty() && v.len() != n_sites {
        return Err(QuantumError::Length {
            expected: n_sites,
            got: v.len(),
        });
    }
    let pot = |i: usize| if v.is_empty() { 0.0 } else { v[i] };
    let values = interior_points(traj, &fr).map(|(k, i)| {
        let psi = &traj.frames[k];
        let pair = &fr.pairs[k];
        let fwd: Complex64 = traj.frames[k + 1].values[i];
        let back: Complex64 = traj.frames[k - 1].values[i];
        let s_t = (fwd * back.conj()).arg() / (2.0 * fr.h);
        let mut kinetic = 0.0;
        let mut vq = 0.0;
        for a in 0..psi.dims {
            kinetic += grad_s(psi, i, a).powi(2) / (2.0 * psi.masses[a]);
            let lap = second_derivative(psi, &pair.r, &pair.mask, i, a).expect("stencil checked");
            vq -= lap / (2.0 * psi.masses[a] * pair.r[i]);
        }
        match convention {
            Convention::Standard => s_t + kinetic + pot(i) + vq,
            Convention::Flipped => s_t + kinetic - pot(i) - vq,
        }
    });
    Ok(accumulate(values, proto.cell() * fr.h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HjPair {
    pub standard: ResidualReport,
    pub flipped: ResidualReport,
}

pub fn hj_residuals(traj: &QuantumTrajectory, v: &[f64], floor: f64) -> Result<HjPair, QuantumError> {
    Ok(HjPair {
        standard: hj_residual(traj, v, Convention::Standard, floor)?,
        flipped: hj_residual(traj, v, Convention::Flipped, floor)?,
    })
}

/// `min ‖S − (f(x₁) + g(x₂))‖ / ‖S − S̄‖` in the `R²`-weighted norm over
/// unmasked sites. The mean is removed from the denominator because `S` is
/// only defined up to a constant.
pub fn separability_residual(psi: &WaveFunction, floor: f64) -> Result<f64, QuantumError> {
    if psi.dims != 2 {
        return Err(QuantumError::Invalid("separability needs a two-particle state".into()));
    }
    let pair = split(psi, floor)?;
    let n = psi.n;
    let w: Vec<f64> = (0..n * n)
        .map(|i| if pair.mask[i] { 0.0 } else { pair.r[i].powi(2) })
        .collect();
    let s = &pair.s;
    let total_w: f64 = w.iter().sum();
    let mean = w.iter().zip(s).map(|(w, s)| w * s).sum::<f64>() / total_w;
    let denom: f64 = w.iter().zip(s).map(|(w, s)| w * (s - mean).powi(2)).sum();
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let row_w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| w[i * n + j]).sum()).collect();
    let col_w: Vec<f64> = (0..n).map(|j| (0..n).map(|i| w[i * n + j]).sum()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let objective = |f: &[f64], g: &[f64]| -> f64 {
        (0..n * n)
            .map(|idx| w[idx] * (s[idx] - f[idx / n] - g[idx % n]).powi(2))
            .sum()
    };
    let mut last = f64::INFINITY;
    for _ in 0..20_000 {
        for i in 0..n {
            if row_w[i] > 0.0 {
                f[i] = (0..n).map(|j| w[i * n + j] * (s[i * n + j] - g[j])).sum::<f64>() / row_w[i];
            }
        }
        for j in 0..n {
            if col_w[j] > 0.0 {
                g[j] = (0..n).map(|i| w[i * n + j] * (s[i * n + j] - f[i])).sum::<f64>() / col_w[j];
            }
        }
        let obj = objective(&f, &g);
        if last - obj <= 1e-15 * denom {
            last = obj;
            break;
        }
        last = obj;
    }
    Ok((last.max(0.0) / denom).sqrt())
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn analytic_free_gaussian(n: usize, dx: f64, t: f64) -> WaveFunction {
        // σ = 1, m = 1: ψ ∝ (1 + it/2)^{-1/2} exp(−x² / (4(1 + it/2)))
        let z = Complex64::new(1.0, t / 2.0);
        WaveFunction::from_fn_1d(n, dx, 1.0, |x| (-(x * x) / (4.0 * z)).exp() / z.sqrt()).unwrap()
    }

    #[test]
    fn plane_wave_residuals_vanish() {
        let psi = WaveFunction::plane_wave(64, 0.1, 1.0, 1.0).unwrap();
        let traj = evolve(&psi, &[], &EvolveOptions::new(0.005, 20).stride(5)).unwrap();
        assert!(continuity_residual(&traj, DEFAULT_FLOOR).unwrap().max <= 1e-8);
        let hj = hj_residuals(&traj, &[], DEFAULT_FLOOR).unwrap();
        assert!(hj.standard.max <= 1e-8, "{:?}", hj.standard);
        assert!(hj.flipped.max <= 1e-8);
    }

    #[test]
    fn constant_state_is_trivial_in_both_conventions() {
        let psi = WaveFunction::from_fn_1d(32, 0.2, 1.0, |_| Complex64::new(0.6, 0.8)).unwrap();
        let traj = evolve(&psi, &[], &EvolveOptions::new(0.01, 4)).unwrap();
        let hj = hj_residuals(&traj, &[], DEFAULT_FLOOR).unwrap();
        assert!(hj.standard.max < 1e-12 && hj.flipped.max < 1e-12);
    }

    #[test]
    fn stationary_ground_state() {
        let n = 400;
        let dx = 0.05;
        let times: Vec<f64> = (0..5).map(|k| k as f64 * 0.1).collect();
        let traj = QuantumTrajectory::from_fn(&times, |t| {
            WaveFunction::from_fn_1d(n, dx, 1.0, |x| Complex64::from_polar((-x * x / 2.0).exp(), -t / 2.0)).unwrap()
        });
        assert!(continuity_residual(&traj, DEFAULT_FLOOR).unwrap().max <= 1e-8);
        let v = harmonic_potential(&traj.frames[0], 1.0);
        let hj = hj_residual(&traj, &v, Convention::Standard, 1e-3).unwrap();
        assert!(hj.max < 1e-4, "{hj:?}");
    }

    #[test]
    fn analytic_gaussian_continuity_converges_at_second_order() {
        let mut last = None;
        for level in 0..3 {
            let dx = 0.1 / 2f64.powi(level);
            let n = (40.0 / dx) as usize;
            let h = 0.05 / 2f64.powi(level);
            let times: Vec<f64> = (0..=4).map(|k| 0.5 + k as f64 * h).collect();
            let traj = QuantumTrajectory::from_fn(&times, |t| analytic_free_gaussian(n, dx, t));
            let r = continuity_residual(&traj, 1e-3).unwrap().l2;
            if let Some(prev) = last {
                assert!(prev / r > 3.5, "{prev} -> {r}");
            }
            last = Some(r);
        }
    }

    #[test]
    fn separability() {
        let a = WaveFunction::gaussian(96, 0.25, 1.0, -1.0, 1.0, 0.7).unwrap();
        let b = WaveFunction::gaussian(96, 0.25, 1.0, 2.0, 1.5, -1.1).unwrap();
        let prod = WaveFunction::product(&a, &b).unwrap();
        assert!(separability_residual(&prod, DEFAULT_FLOOR).unwrap() <= 1e-6);
        let ent = WaveFunction::entangled_pair(96, 0.25, 1.0, 1.0, 1.0, 1.5).unwrap();
        let r = separability_residual(&ent, DEFAULT_FLOOR).unwrap();
        assert!(r >= 0.1, "{r}");
        assert!(separability_residual(&a, DEFAULT_FLOOR).is_err());
    }

    #[test]
    fn evolved_product_stays_separable() {
        let a = WaveFunction::gaussian(64, 0.3, 1.0, -1.0, 1.0, 0.5).unwrap();
        let b = WaveFunction::gaussian(64, 0.3, 2.0, 1.0, 1.0, -0.5).unwrap();
        let prod = WaveFunction::product(&a, &b).unwrap();
        let traj = evolve_two_particle(&prod, &[], &EvolveOptions::new(0.05, 20).stride(10)).unwrap();
        assert!(separability_residual(traj.last(), DEFAULT_FLOOR).unwrap() <= 1e-6);
        assert!(continuity_residual(&traj, DEFAULT_FLOOR).unwrap().points > 0);
    }

    #[test]
    fn two_plane_waves_satisfy_continuity() {
        let a = WaveFunction::plane_wave(32, 0.2, 1.0, 1.0).unwrap();
        let b = WaveFunction::plane_wave(32, 0.2, 2.0, -2.0).unwrap();
        let prod = WaveFunction::product(&a, &b).unwrap();
        let traj = evolve_two_particle(&prod, &[], &EvolveOptions::new(0.01, 6).stride(2)).unwrap();
        assert!(continuity_residual(&traj, DEFAULT_FLOOR).unwrap().max <= 1e-8);
    }

    #[test]
    fn snapshot_checks() {
        let psi = WaveFunction::gaussian(32, 0.2, 1.0, 0.0, 1.0, 0.0).unwrap();
        let traj = evolve(&psi, &[], &EvolveOptions::new(0.01, 1)).unwrap();
        assert!(matches!(
            continuity_residual(&traj, DEFAULT_FLOOR),
            Err(QuantumError::Snapshots { .. })
        ));
    }
}
