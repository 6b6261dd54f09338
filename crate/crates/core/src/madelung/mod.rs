//! Schrödinger evolution on periodic grids (`ħ = 1`) and the amplitude/phase
//! form `ψ = R e^{iS}`.
//!
//! A 2D grid is the configuration space of two particles on a line; each
//! axis carries its own mass.

mod projection;
mod residual;

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::{fft_nd, signed};

pub use projection::{commutator_gap, project, Projector};
pub use residual::{
    continuity_residual, hj_residual, hj_residuals, separability_residual, Convention, HjPair, ResidualReport,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QuantumError {
    #[error("grid must be 1D or 2D with n >= 5 and dx > 0")]
    Grid,
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("masses must be positive, one per axis")]
    Mass,
    #[error("time step {dt} exceeds the guard dx²·m = {limit}")]
    Guard { dt: f64, limit: f64 },
    #[error("every site is below the amplitude floor")]
    AllMasked,
    #[error("need at least {need} snapshots, got {got}")]
    Snapshots { need: usize, got: usize },
    #[error("snapshots are not equally spaced in time")]
    Spacing,
    #[error("window selects no {0}")]
    EmptyWindow(&'static str),
    #[error("crank-nicolson is implemented for one axis only")]
    Scheme,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub dims: usize,
    /// Points per axis.
    pub n: usize,
    pub dx: f64,
    /// One mass per axis.
    pub masses: Vec<f64>,
    /// Row-major, last axis fastest.
    pub values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(dims: usize, n: usize, dx: f64, masses: Vec<f64>, values: Vec<Complex64>) -> Result<Self, QuantumError> {
        if !(1..=2).contains(&dims) || n < 5 || !(dx > 0.0) {
            return Err(QuantumError::Grid);
        }
        if masses.len() != dims || masses.iter().any(|m| !(*m > 0.0)) {
            return Err(QuantumError::Mass);
        }
        let expected = n.pow(dims as u32);
        if values.len() != expected {
            return Err(QuantumError::Length {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            dims,
            n,
            dx,
            masses,
            values,
        })
    }

    /// Position of grid index `i` along any axis; the grid is centred on 0.
    pub fn x(&self, i: usize) -> f64 {
        grid_x(i, self.n, self.dx)
    }

    pub fn from_fn_1d(n: usize, dx: f64, m: f64, f: impl Fn(f64) -> Complex64) -> Result<Self, QuantumError> {
        let values = (0..n).map(|i| f(grid_x(i, n, dx))).collect();
        Self::new(1, n, dx, vec![m], values)
    }

    pub fn from_fn_2d(
        n: usize,
        dx: f64,
        masses: (f64, f64),
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self, QuantumError> {
        let values = (0..n * n).map(|i| f(grid_x(i / n, n, dx), grid_x(i % n, n, dx))).collect();
        Self::new(2, n, dx, vec![masses.0, masses.1], values)
    }

    /// `exp(−(x − x0)²/4σ²) e^{i k x}`, normalized; `|ψ|²` has standard deviation σ.
    pub fn gaussian(n: usize, dx: f64, m: f64, x0: f64, sigma: f64, k: f64) -> Result<Self, QuantumError> {
        let mut psi = Self::from_fn_1d(n, dx, m, |x| gaussian_amp(x, x0, sigma, k))?;
        psi.normalize();
        Ok(psi)
    }

    /// `e^{i k x}` with `k` rounded to the nearest periodic wavenumber.
    pub fn plane_wave(n: usize, dx: f64, m: f64, k: f64) -> Result<Self, QuantumError> {
        let k = nearest_periodic_k(k, n, dx);
        Self::from_fn_1d(n, dx, m, |x| Complex64::from_polar(1.0, k * x))
    }

    /// `ψ(x₁, x₂) = a(x₁) b(x₂)`.
    pub fn product(a: &Self, b: &Self) -> Result<Self, QuantumError> {
        if a.dims != 1 || b.dims != 1 || a.n != b.n || a.dx != b.dx {
            return Err(QuantumError::Invalid("product needs two 1D states on the same grid".into()));
        }
        let n = a.n;
        let values = (0..n * n).map(|i| a.values[i / n] * b.values[i % n]).collect();
        Self::new(2, n, a.dx, vec![a.masses[0], b.masses[0]], values)
    }

    /// Exchange-symmetric sum of two displaced packets moving apart,
    /// `g(x₁ − d, k) g(x₂ + d, −k) + g(x₁ + d, −k) g(x₂ − d, k)`.
    pub fn entangled_pair(n: usize, dx: f64, m: f64, sigma: f64, offset: f64, k: f64) -> Result<Self, QuantumError> {
        let mut psi = Self::from_fn_2d(n, dx, (m, m), |x1, x2| {
            gaussian_amp(x1, offset, sigma, k) * gaussian_amp(x2, -offset, sigma, -k)
                + gaussian_amp(x1, -offset, sigma, -k) * gaussian_amp(x2, offset, sigma, k)
        })?;
        psi.normalize();
        Ok(psi)
    }

    pub fn cell(&self) -> f64 {
        self.dx.powi(self.dims as i32)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            self.values.iter_mut().for_each(|c| *c /= s);
        }
    }

    /// `<x>` along `axis`.
    pub fn mean_position(&self, axis: usize) -> f64 {
        let (sum, w) = self.values.iter().enumerate().fold((0.0, 0.0), |(s, w), (i, c)| {
            let p = c.norm_sqr();
            (s + p * self.x(self.axis_index(i, axis)), w + p)
        });
        sum / w
    }

    pub fn position_variance(&self, axis: usize) -> f64 {
        let mu = self.mean_position(axis);
        let (sum, w) = self.values.iter().enumerate().fold((0.0, 0.0), |(s, w), (i, c)| {
            let p = c.norm_sqr();
            (s + p * (self.x(self.axis_index(i, axis)) - mu).powi(2), w + p)
        });
        sum / w
    }

    pub(crate) fn axis_index(&self, flat: usize, axis: usize) -> usize {
        if self.dims == 1 {
            flat
        } else if axis == 0 {
            flat / self.n
        } else {
            flat % self.n
        }
    }

    /// Flat index of the periodic neighbour `offset` steps along `axis`.
    pub(crate) fn shift(&self, flat: usize, axis: usize, offset: isize) -> usize {
        let n = self.n as isize;
        if self.dims == 1 {
            return (flat as isize + offset).rem_euclid(n) as usize;
        }
        let (i, j) = ((flat / self.n) as isize, (flat % self.n) as isize);
        if axis == 0 {
            ((i + offset).rem_euclid(n) * n + j) as usize
        } else {
            (i * n + (j + offset).rem_euclid(n)) as usize
        }
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.dims == other.dims && self.n == other.n && self.dx == other.dx && self.masses == other.masses
    }

    /// Columns `x,re,im,R,S` (or `x1,x2,...` in 2D).
    pub fn snapshot_csv(&self, floor: f64) -> Result<String, QuantumError> {
        let pair = split(self, floor)?;
        let mut out = String::from(if self.dims == 1 { "x,re,im,R,S\n" } else { "x1,x2,re,im,R,S\n" });
        for (i, c) in self.values.iter().enumerate() {
            if self.dims == 1 {
                let _ = write!(out, "{},", self.x(i));
            } else {
                let _ = write!(out, "{},{},", self.x(i / self.n), self.x(i % self.n));
            }
            let s = if pair.mask[i] { String::new() } else { pair.s[i].to_string() };
            let _ = writeln!(out, "{},{},{},{}", c.re, c.im, pair.r[i], s);
        }
        Ok(out)
    }
}

pub fn grid_x(i: usize, n: usize, dx: f64) -> f64 {
    (i as f64 - (n / 2) as f64) * dx
}

fn gaussian_amp(x: f64, x0: f64, sigma: f64, k: f64) -> Complex64 {
    Complex64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), k * x)
}

pub fn nearest_periodic_k(k: f64, n: usize, dx: f64) -> f64 {
    let dk = 2.0 * PI / (n as f64 * dx);
    (k / dk).round() * dk
}

/// Angular wavenumber of FFT bin `m`.
pub(crate) fn wavenumber(m: usize, n: usize, dx: f64) -> f64 {
    2.0 * PI * signed(m, n) as f64 / (n as f64 * dx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Strang splitting with exact free propagation in Fourier space.
    #[default]
    SplitStep,
    /// Crank–Nicolson with the three-point Laplacian; 1D only.
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub steps: usize,
    /// Keep every `stride`-th state (the initial state is always kept).
    pub stride: usize,
    pub scheme: Scheme,
    /// Skip the `dt ≤ dx²·m` guard.
    pub allow_large_dt: bool,
}

impl EvolveOptions {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            steps,
            stride: 1,
            scheme: Scheme::SplitStep,
            allow_large_dt: false,
        }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTrajectory {
    pub times: Vec<f64>,
    pub frames: Vec<WaveFunction>,
}

impl QuantumTrajectory {
    pub fn last(&self) -> &WaveFunction {
        self.frames.last().expect("trajectory is never empty")
    }

    /// Equal snapshot spacing, or an error.
    pub(crate) fn interval(&self) -> Result<f64, QuantumError> {
        if self.frames.len() < 3 {
            return Err(QuantumError::Snapshots {
                need: 3,
                got: self.frames.len(),
            });
        }
        let h = self.times[1] - self.times[0];
        let tol = 1e-9 * h.abs().max(1e-300);
        if !(h > 0.0) || self.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol) {
            return Err(QuantumError::Spacing);
        }
        if self.frames.iter().any(|f| !f.same_grid(&self.frames[0])) {
            return Err(QuantumError::Invalid("snapshots live on different grids".into()));
        }
        Ok(h)
    }

    /// Trajectory built from a closed-form solution.
    pub fn from_fn(times: &[f64], f: impl Fn(f64) -> WaveFunction) -> Self {
        Self {
            times: times.to_vec(),
            frames: times.iter().map(|&t| f(t)).collect(),
        }
    }
}

type Stepper = Box<dyn FnMut(&mut [Complex64])>;

/// Evolve under `H = Σ_a −∂²_a / 2m_a + V`. `v` may be empty for `V = 0`.
pub fn evolve(psi0: &WaveFunction, v: &[f64], opts: &EvolveOptions) -> Result<QuantumTrajectory, QuantumError> {
    let n_sites = psi0.values.len();
    let v: Vec<f64> = if v.is_empty() { vec![0.0; n_sites] } else { v.to_vec() };
    if v.len() != n_sites {
        return Err(QuantumError::Length {
            expected: n_sites,
            got: v.len(),
        });
    }
    if !(opts.dt > 0.0) || opts.stride == 0 {
        return Err(QuantumError::Invalid("need dt > 0 and stride >= 1".into()));
    }
    let m_min = psi0.masses.iter().cloned().fold(f64::INFINITY, f64::min);
    let limit = psi0.dx * psi0.dx * m_min;
    if !opts.allow_large_dt && opts.dt > limit * (1.0 + 1e-12) {
        return Err(QuantumError::Guard { dt: opts.dt, limit });
    }
    let mut stepper: Stepper = match opts.scheme {
        Scheme::SplitStep => Box::new(split_step(psi0, &v, opts.dt)),
        Scheme::CrankNicolson => {
            if psi0.dims != 1 {
                return Err(QuantumError::Scheme);
            }
            Box::new(crank_nicolson(psi0, &v, opts.dt))
        }
    };
    let mut psi = psi0.values.clone();
    let mut out = QuantumTrajectory {
        times: vec![0.0],
        frames: vec![psi0.clone()],
    };
    for step in 1..=opts.steps {
        stepper(&mut psi);
        if step % opts.stride == 0 {
            out.times.push(step as f64 * opts.dt);
            out.frames.push(WaveFunction {
                values: psi.clone(),
                ..psi0.clone()
            });
        }
    }
    Ok(out)
}

/// Two particles on a line; the configuration-space grid is `n × n`.
pub fn evolve_two_particle(
    psi0: &WaveFunction,
    v: &[f64],
    opts: &EvolveOptions,
) -> Result<QuantumTrajectory, QuantumError> {
    if psi0.dims != 2 {
        return Err(QuantumError::Invalid("two-particle evolution needs a 2D grid".into()));
    }
    if psi0.n > 512 {
        return Err(QuantumError::Invalid(format!("n = {} exceeds 512", psi0.n)));
    }
    evolve(psi0, v, opts)
}

fn split_step(psi0: &WaveFunction, v: &[f64], dt: f64) -> impl FnMut(&mut [Complex64]) {
    let (dims, n) = (psi0.dims, psi0.n);
    let half_v: Vec<Complex64> = v.iter().map(|&v| Complex64::from_polar(1.0, -v * dt / 2.0)).collect();
    let kinetic: Vec<Complex64> = (0..psi0.values.len())
        .map(|i| {
            let e: f64 = (0..dims)
                .map(|a| wavenumber(psi0.axis_index(i, a), n, psi0.dx).powi(2) / (2.0 * psi0.masses[a]))
                .sum();
            Complex64::from_polar(1.0, -e * dt) / psi0.values.len() as f64
        })
        .collect();
    move |psi: &mut [Complex64]| {
        psi.iter_mut().zip(&half_v).for_each(|(p, h)| *p *= h);
        fft_nd(psi, dims, n, false);
        psi.iter_mut().zip(&kinetic).for_each(|(p, k)| *p *= k);
        fft_nd(psi, dims, n, true);
        psi.iter_mut().zip(&half_v).for_each(|(p, h)| *p *= h);
    }
}

fn crank_nicolson(psi0: &WaveFunction, v: &[f64], dt: f64) -> impl FnMut(&mut [Complex64]) {
    let n = psi0.n;
    let i = Complex64::new(0.0, 1.0);
    let off = -1.0 / (2.0 * psi0.masses[0] * psi0.dx * psi0.dx);
    let h_diag: Vec<f64> = v.iter().map(|v| -2.0 * off + v).collect();
    // (1 + iH dt/2) ψ' = (1 − iH dt/2) ψ
    let a_off = i * dt / 2.0 * off;
    let a_diag: Vec<Complex64> = h_diag.iter().map(|h| 1.0 + i * dt / 2.0 * h).collect();
    let b_diag: Vec<Complex64> = h_diag.iter().map(|h| 1.0 - i * dt / 2.0 * h).collect();
    let b_off = -a_off;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    move |psi: &mut [Complex64]| {
        for k in 0..n {
            rhs[k] = b_diag[k] * psi[k] + b_off * (psi[(k + n - 1) % n] + psi[(k + 1) % n]);
        }
        let x = solve_cyclic(a_off, &a_diag, &rhs);
        psi.copy_from_slice(&x);
    }
}

/// Periodic tridiagonal system with constant off-diagonal `e`, via
/// Sherman–Morrison on top of the Thomas algorithm.
fn solve_cyclic(e: Complex64, diag: &[Complex64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= e * e / gamma;
    let x = thomas(e, &d, rhs);
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[0] = gamma;
    u[n - 1] = e;
    let z = thomas(e, &d, &u);
    let fact = (x[0] + e * x[n - 1] / gamma) / (1.0 + z[0] + e * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(x, z)| x - fact * z).collect()
}

fn thomas(e: Complex64, d: &[Complex64], r: &[Complex64]) -> Vec<Complex64> {
    let n = d.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = d[0];
    c[0] = e / denom;
    y[0] = r[0] / denom;
    for k in 1..n {
        denom = d[k] - e * c[k - 1];
        c[k] = e / denom;
        y[k] = (r[k] - e * y[k - 1]) / denom;
    }
    for k in (0..n - 1).rev() {
        y[k] = y[k] - c[k] * y[k + 1];
    }
    y
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadelungPair {
    pub r: Vec<f64>,
    /// Unwrapped phase; meaningless where `mask` is set.
    pub s: Vec<f64>,
    /// Sites whose amplitude falls below the floor.
    pub mask: Vec<bool>,
    /// Plaquettes with nonzero phase winding that the unwrapping cannot
    /// make consistent. Always 0 in 1D.
    pub unwrap_failures: usize,
}

pub const DEFAULT_FLOOR: f64 = 1e-6;

fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor()
}

/// `R = |ψ|` and the phase unwrapped outward from the amplitude maximum.
/// Sites with `R < floor · max R` are masked.
pub fn split(psi: &WaveFunction, floor: f64) -> Result<MadelungPair, QuantumError> {
    let r: Vec<f64> = psi.values.iter().map(|c| c.norm()).collect();
    let r_max = r.iter().cloned().fold(0.0, f64::max);
    if !(r_max > 0.0) {
        return Err(QuantumError::AllMasked);
    }
    let mask: Vec<bool> = r.iter().map(|&v| v < floor * r_max).collect();
    let arg: Vec<f64> = psi.values.iter().map(|c| c.arg()).collect();
    let mut s = vec![0.0; r.len()];
    let mut seen = vec![false; r.len()];
    // largest unvisited amplitude seeds each connected region
    let mut order: Vec<usize> = (0..r.len()).filter(|&i| !mask[i]).collect();
    order.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
    let n = psi.n;
    let neighbours = |i: usize| -> Vec<usize> {
        let mut out = Vec::with_capacity(4);
        for axis in 0..psi.dims {
            let k = psi.axis_index(i, axis);
            if k + 1 < n {
                out.push(psi.shift(i, axis, 1));
            }
            if k > 0 {
                out.push(psi.shift(i, axis, -1));
            }
        }
        out
    };
    for &root in &order {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        s[root] = arg[root];
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for j in neighbours(i) {
                if !seen[j] && !mask[j] {
                    seen[j] = true;
                    s[j] = s[i] + wrap(arg[j] - arg[i]);
                    queue.push_back(j);
                }
            }
        }
    }
    let mut unwrap_failures = 0;
    if psi.dims == 2 {
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let c = [i * n + j, i * n + j + 1, (i + 1) * n + j + 1, (i + 1) * n + j];
                if c.iter().any(|&k| mask[k]) {
                    continue;
                }
                let winding: f64 = (0..4).map(|q| wrap(arg[c[(q + 1) % 4]] - arg[c[q]])).sum();
                if winding.abs() > PI {
                    unwrap_failures += 1;
                }
            }
        }
    }
    Ok(MadelungPair {
        r,
        s,
        mask,
        unwrap_failures,
    })
}

impl MadelungPair {
    pub fn reconstruct(&self) -> Vec<Complex64> {
        self.r
            .iter()
            .zip(&self.s)
            .map(|(r, s)| Complex64::from_polar(*r, *s))
            .collect()
    }
}

/// Fourth-order central second derivative along `axis`; `None` where the
/// stencil touches a masked site.
pub(crate) fn second_derivative(psi: &WaveFunction, f: &[f64], mask: &[bool], i: usize, axis: usize) -> Option<f64> {
    let at = |o: isize| {
        let j = psi.shift(i, axis, o);
        (!mask[j]).then_some(f[j])
    };
    let (m2, m1, c, p1, p2) = (at(-2)?, at(-1)?, at(0)?, at(1)?, at(2)?);
    Some((-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * psi.dx * psi.dx))
}

/// `V_q = −Σ_a ∂²_a R / (2 m_a R)`; `None` on masked stencils.
pub fn quantum_potential(psi: &WaveFunction, pair: &MadelungPair) -> Vec<Option<f64>> {
    (0..pair.r.len())
        .map(|i| {
            if pair.mask[i] || pair.r[i] == 0.0 {
                return None;
            }
            let mut total = 0.0;
            for a in 0..psi.dims {
                total -= second_derivative(psi, &pair.r, &pair.mask, i, a)? / (2.0 * psi.masses[a] * pair.r[i]);
            }
            Some(total)
        })
        .collect()
}

/// Harmonic potential `Σ_a ½ m_a ω² x_a²` on the grid of `psi`.
pub fn harmonic_potential(psi: &WaveFunction, omega: f64) -> Vec<f64> {
    (0..psi.values.len())
        .map(|i| {
            (0..psi.dims)
                .map(|a| 0.5 * psi.masses[a] * omega * omega * psi.x(psi.axis_index(i, a)).powi(2))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plane_wave_is_an_eigenstate() {
        let (n, dx, m) = (128, 0.1, 1.0);
        let psi = WaveFunction::plane_wave(n, dx, m, 2.0).unwrap();
        let k = nearest_periodic_k(2.0, n, dx);
        let opts = EvolveOptions::new(0.01, 100).stride(100);
        for scheme in [Scheme::SplitStep, Scheme::CrankNicolson] {
            let traj = evolve(&psi, &[], &opts.scheme(scheme)).unwrap();
            let end = traj.last();
            assert!(end.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-8));
            if scheme == Scheme::SplitStep {
                let phase = (end.values[7] / psi.values[7]).arg();
                assert!((phase - wrap(-k * k * 1.0 / (2.0 * m))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn free_gaussian_spreads() {
        let (sigma, t) = (1.0, 2.0);
        let psi = WaveFunction::gaussian(1024, 0.05, 1.0, 0.0, sigma, 0.0).unwrap();
        let traj = evolve(&psi, &[], &EvolveOptions::new(0.0025, 800).stride(800)).unwrap();
        let expected = sigma * sigma + t * t / (4.0 * sigma * sigma);
        let w2 = traj.last().position_variance(0);
        assert!((w2 / expected - 1.0).abs() < 0.01, "{w2} vs {expected}");
    }

    #[test]
    fn norm_is_conserved_per_step() {
        let psi = WaveFunction::gaussian(256, 0.1, 1.0, -3.0, 1.0, 1.5).unwrap();
        let v = harmonic_potential(&psi, 0.5);
        for scheme in [Scheme::SplitStep, Scheme::CrankNicolson] {
            let traj = evolve(&psi, &v, &EvolveOptions::new(0.01, 50).scheme(scheme)).unwrap();
            for w in traj.frames.windows(2) {
                assert!((w[1].norm_sqr() - w[0].norm_sqr()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coherent_state_follows_the_classical_orbit() {
        let x0 = 2.0;
        // ground state of ½x² has σ² = ½
        let psi = WaveFunction::gaussian(512, 0.05, 1.0, x0, 0.5f64.sqrt(), 0.0).unwrap();
        let v = harmonic_potential(&psi, 1.0);
        let steps = (2.0 * PI / 0.0025).round() as usize;
        let traj = evolve(&psi, &v, &EvolveOptions::new(0.0025, steps).stride(steps / 16)).unwrap();
        for (t, f) in traj.times.iter().zip(&traj.frames) {
            assert!((f.mean_position(0) - x0 * t.cos()).abs() < 0.01 * x0, "t={t}");
        }
    }

    #[test]
    fn guard_and_scheme_errors() {
        let psi = WaveFunction::gaussian(64, 0.1, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            evolve(&psi, &[], &EvolveOptions::new(0.05, 1)),
            Err(QuantumError::Guard { .. })
        ));
        let mut o = EvolveOptions::new(0.05, 1);
        o.allow_large_dt = true;
        assert!(evolve(&psi, &[], &o).is_ok());
        let two = WaveFunction::product(&psi, &psi).unwrap();
        assert_eq!(
            evolve(&two, &[], &EvolveOptions::new(0.01, 1).scheme(Scheme::CrankNicolson)),
            Err(QuantumError::Scheme)
        );
    }

    #[test]
    fn cyclic_solver_matches_dense_product() {
        let n = 9;
        let e = c(0.3, -0.7);
        let diag: Vec<Complex64> = (0..n).map(|k| c(2.0 + k as f64, 0.5)).collect();
        let x_true: Vec<Complex64> = (0..n).map(|k| c(k as f64, 1.0 - k as f64)).collect();
        let rhs: Vec<Complex64> = (0..n)
            .map(|k| diag[k] * x_true[k] + e * (x_true[(k + n - 1) % n] + x_true[(k + 1) % n]))
            .collect();
        let x = solve_cyclic(e, &diag, &rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn split_examples() {
        let pw = WaveFunction::plane_wave(64, 0.25, 1.0, 3.0).unwrap();
        let k = nearest_periodic_k(3.0, 64, 0.25);
        let p = split(&pw, DEFAULT_FLOOR).unwrap();
        assert!(p.r.iter().all(|r| (r - 1.0).abs() < 1e-12));
        // unwrapped across branch cuts: constant slope everywhere
        for w in p.s.windows(2) {
            assert!((w[1] - w[0] - k * 0.25).abs() < 1e-9);
        }

        let g = WaveFunction::gaussian(64, 0.25, 1.0, 0.0, 1.0, 0.0).unwrap();
        let p = split(&g, DEFAULT_FLOOR).unwrap();
        assert!(p.s.iter().zip(&p.mask).all(|(s, m)| *m || s.abs() < 1e-15));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let cst = WaveFunction::from_fn_1d(16, 0.5, 1.0, |_| c(h, h)).unwrap();
        let p = split(&cst, DEFAULT_FLOOR).unwrap();
        assert!(p.s.iter().all(|s| (s - PI / 4.0).abs() < 1e-15));
        assert!(p.r.iter().all(|r| (r - 1.0).abs() < 1e-15));

        let zero = WaveFunction::from_fn_1d(16, 0.5, 1.0, |_| c(0.0, 0.0)).unwrap();
        assert_eq!(split(&zero, DEFAULT_FLOOR), Err(QuantumError::AllMasked));
    }

    #[test]
    fn split_reconstructs_and_is_gauge_covariant() {
        let psi = WaveFunction::entangled_pair(48, 0.3, 1.0, 1.0, 1.0, 1.5).unwrap();
        let p = split(&psi, DEFAULT_FLOOR).unwrap();
        assert_eq!(p.unwrap_failures, 0);
        for ((a, b), m) in p.reconstruct().iter().zip(&psi.values).zip(&p.mask) {
            assert!(*m || (a - b).norm() < 1e-9);
        }
        let beta = 0.7;
        let rotated = WaveFunction {
            values: psi.values.iter().map(|v| v * Complex64::from_polar(1.0, beta)).collect(),
            ..psi.clone()
        };
        let q = split(&rotated, DEFAULT_FLOOR).unwrap();
        for i in 0..p.r.len() {
            assert!((p.r[i].powi(2) - q.r[i].powi(2)).abs() < 1e-12);
            if !p.mask[i] {
                assert!((wrap(q.s[i] - p.s[i] - beta)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn vortex_is_reported() {
        let psi = WaveFunction::from_fn_2d(16, 0.5, (1.0, 1.0), |x, y| c(x + 0.1, y + 0.1) * (-(x * x + y * y) / 8.0).exp())
            .unwrap();
        let p = split(&psi, DEFAULT_FLOOR).unwrap();
        assert_eq!(p.unwrap_failures, 1);
    }

    #[test]
    fn quantum_potential_examples() {
        let flat = WaveFunction::from_fn_1d(32, 0.1, 1.0, |_| c(2.0, 0.0)).unwrap();
        let p = split(&flat, DEFAULT_FLOOR).unwrap();
        assert!(quantum_potential(&flat, &p).iter().all(|v| v.unwrap().abs() < 1e-12));

        let g = WaveFunction::from_fn_1d(2000, 0.01, 1.0, |x| c((-x * x / 4.0).exp(), 0.0)).unwrap();
        let p = split(&g, DEFAULT_FLOOR).unwrap();
        let vq = quantum_potential(&g, &p);
        assert!((vq[1000].unwrap() - 0.25).abs() < 1e-6);
        let x = g.x(1100);
        assert!((vq[1100].unwrap() - (0.25 - x * x / 8.0)).abs() < 1e-6);

        let k = 1.3;
        let cw = WaveFunction::from_fn_1d(400, 0.01, 1.0, |x| c((k * x).cos(), 0.0)).unwrap();
        let p = split(&cw, DEFAULT_FLOOR).unwrap();
        assert!((quantum_potential(&cw, &p)[200].unwrap() - k * k / 2.0).abs() < 1e-4);
    }

    #[test]
    fn quantum_potential_consistency_identity() {
        // Re(Δψ/ψ) = ΔR/R − (∇S)², so V_q = −Re(Δψ/ψ)/2m − (∇S)²/2m
        let (k, dx) = (0.8, 0.01);
        let psi = WaveFunction::gaussian(2000, dx, 1.0, 0.3, 1.2, k).unwrap();
        let p = split(&psi, DEFAULT_FLOOR).unwrap();
        let vq = quantum_potential(&psi, &p);
        for i in [900, 1000, 1100] {
            let lap = (psi.values[i - 1] - 2.0 * psi.values[i] + psi.values[i + 1]) / (dx * dx);
            let grad_s = (p.s[i + 1] - p.s[i - 1]) / (2.0 * dx);
            let rhs = -(lap / psi.values[i]).re / 2.0 - grad_s * grad_s / 2.0;
            assert!((vq[i].unwrap() - rhs).abs() < 1e-4, "{} {}", vq[i].unwrap(), rhs);
        }
    }
}
