use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{wavenumber, QuantumError, WaveFunction};
use crate::fft::fft_nd;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projector {
    /// Indicator of `a ≤ x ≤ b`.
    Position { a: f64, b: f64 },
    /// Keeps Fourier modes with `k1 ≤ k ≤ k2`.
    Momentum { k1: f64, k2: f64 },
}

/// Apply a 1D projector. The result is not renormalized.
pub fn project(psi: &WaveFunction, p: &Projector) -> Result<WaveFunction, QuantumError> {
    if psi.dims != 1 {
        return Err(QuantumError::Invalid("projections act on one-particle states".into()));
    }
    let n = psi.n;
    let mut values = psi.values.clone();
    match *p {
        Projector::Position { a, b } => {
            let keep: Vec<bool> = (0..n).map(|i| (a..=b).contains(&psi.x(i))).collect();
            if !keep.iter().any(|&k| k) {
                return Err(QuantumError::EmptyWindow("grid points"));
            }
            values.iter_mut().zip(&keep).for_each(|(v, k)| {
                if !k {
                    *v = Complex64::new(0.0, 0.0);
                }
            });
        }
        Projector::Momentum { k1, k2 } => {
            let keep: Vec<bool> = (0..n).map(|m| (k1..=k2).contains(&wavenumber(m, n, psi.dx))).collect();
            if !keep.iter().any(|&k| k) {
                return Err(QuantumError::EmptyWindow("Fourier modes"));
            }
            fft_nd(&mut values, 1, n, false);
            values.iter_mut().zip(&keep).for_each(|(v, k)| {
                *v = if *k { *v / n as f64 } else { Complex64::new(0.0, 0.0) };
            });
            fft_nd(&mut values, 1, n, true);
        }
    }
    Ok(WaveFunction {
        values,
        ..psi.clone()
    })
}

/// `‖P_A P_B ψ − P_B P_A ψ‖ / ‖ψ‖`
pub fn commutator_gap(psi: &WaveFunction, a: &Projector, b: &Projector) -> Result<f64, QuantumError> {
    let ab = project(&project(psi, b)?, a)?;
    let ba = project(&project(psi, a)?, b)?;
    let diff: f64 = ab.values.iter().zip(&ba.values).map(|(x, y)| (x - y).norm_sqr()).sum();
    let norm: f64 = psi.values.iter().map(|x| x.norm_sqr()).sum();
    Ok((diff / norm).sqrt())
}
