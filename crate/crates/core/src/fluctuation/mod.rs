//! Zero-mean lattice fields with power-law spectra, windowed-sum variance
//! scaling, spectral-exponent estimation and block averaging.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::{forward_real, inverse_real, mode};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FluctError {
    #[error("dims must be 1, 2 or 3, got {0}")]
    Dims(usize),
    #[error("side {0} is not a power of two")]
    Side(usize),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("alpha must lie in [0, 4], got {0}")]
    Alpha(f64),
    #[error("window of reach {reach} exceeds half the box ({half})")]
    WindowTooLarge { reach: f64, half: f64 },
    #[error("need at least {need} ensemble members, got {got}")]
    Ensemble { need: usize, got: usize },
    #[error("ensemble members differ in shape")]
    Shape,
    #[error("too few radii: {0}")]
    Radii(String),
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),
    #[error("block {block} does not divide side {side}")]
    Block { block: usize, side: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub dims: usize,
    pub side: usize,
    pub spacing: f64,
    /// Row-major, last axis fastest.
    pub values: Vec<f64>,
}

impl LatticeField {
    pub fn new(dims: usize, side: usize, values: Vec<f64>) -> Result<Self, FluctError> {
        if !(1..=3).contains(&dims) {
            return Err(FluctError::Dims(dims));
        }
        if side == 0 {
            return Err(FluctError::Invalid("side must be positive".into()));
        }
        let expected = side.pow(dims as u32);
        if values.len() != expected {
            return Err(FluctError::Length {
                expected,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FluctError::Invalid("field values must be finite".into()));
        }
        Ok(Self {
            dims,
            side,
            spacing: 1.0,
            values,
        })
    }

    pub fn constant(dims: usize, side: usize, c: f64) -> Result<Self, FluctError> {
        Self::new(dims, side, vec![c; side.pow(dims as u32)])
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.len() as f64
    }

    pub fn coord(&self, i: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = i;
        for a in (0..self.dims).rev() {
            out[a] = rest % self.side;
            rest /= self.side;
        }
        out
    }

    pub fn index(&self, coord: &[usize]) -> usize {
        coord[..self.dims].iter().fold(0, |acc, &c| acc * self.side + c % self.side)
    }

    /// Minimum-image distance between two sites, in units of `spacing`.
    pub fn distance(&self, a: &[usize], b: &[usize]) -> f64 {
        let side = self.side as isize;
        let mut s = 0.0;
        for k in 0..self.dims {
            let mut d = (b[k] as isize - a[k] as isize).rem_euclid(side);
            if d > side / 2 {
                d -= side;
            }
            s += (d * d) as f64;
        }
        s.sqrt() * self.spacing
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.dims == other.dims && self.side == other.side && self.spacing == other.spacing
    }

    /// `|F(k)|² / N`, so that the total equals the sum of squared values.
    pub fn spectral_power(&self) -> Vec<f64> {
        let n = self.len() as f64;
        forward_real(&self.values, self.dims, self.side)
            .iter()
            .map(|c| c.norm_sqr() / n)
            .collect()
    }
}

fn check_pow2(side: usize) -> Result<(), FluctError> {
    if side < 2 || !side.is_power_of_two() {
        return Err(FluctError::Side(side));
    }
    Ok(())
}

/// Independent standard-normal values on every site.
pub fn iid_field(dims: usize, side: usize, seed: u64) -> Result<LatticeField, FluctError> {
    if !(1..=3).contains(&dims) {
        return Err(FluctError::Dims(dims));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..side.pow(dims as u32)).map(|_| rng.sample(StandardNormal)).collect();
    LatticeField::new(dims, side, values)
}

/// Gaussian field with power spectrum `∝ |k|^alpha`, zero mean and unit
/// sample variance.
pub fn synthesize_field(dims: usize, side: usize, alpha: f64, seed: u64) -> Result<LatticeField, FluctError> {
    if !(0.0..=4.0).contains(&alpha) {
        return Err(FluctError::Alpha(alpha));
    }
    check_pow2(side)?;
    let white = iid_field(dims, side, seed)?;
    // shaping white noise by a real, even multiplier keeps the field real
    let mut spec = forward_real(&white.values, dims, side);
    for (i, c) in spec.iter_mut().enumerate() {
        let m = mode(i, dims, side);
        let k2: f64 = m[..dims].iter().map(|&v| (TAU * v as f64 / side as f64).powi(2)).sum();
        *c *= if k2 == 0.0 { 0.0 } else { k2.powf(alpha / 4.0) };
    }
    let mut values = inverse_real(spec, dims, side);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= mean);
    let sd = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    if sd > 0.0 {
        values.iter_mut().for_each(|v| *v /= sd);
    }
    LatticeField::new(dims, side, values)
}

pub fn synthesize_ensemble(
    dims: usize,
    side: usize,
    alpha: f64,
    seeds: std::ops::Range<u64>,
) -> Result<Vec<LatticeField>, FluctError> {
    seeds
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&s| synthesize_field(dims, side, alpha, s))
        .collect()
}

pub fn iid_ensemble(dims: usize, side: usize, seeds: std::ops::Range<u64>) -> Result<Vec<LatticeField>, FluctError> {
    seeds
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&s| iid_field(dims, side, s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// 1 up to `u = 1`, raised-cosine fall to 0 at `u = 2`.
    #[default]
    RaisedCosine,
    /// Indicator of `u ≤ 1`.
    Sharp,
}

impl Window {
    pub fn support_radius(self) -> f64 {
        match self {
            Window::RaisedCosine => 2.0,
            Window::Sharp => 1.0,
        }
    }

    pub fn profile(self, u: f64) -> f64 {
        match self {
            _ if u <= 1.0 => 1.0,
            Window::Sharp => 0.0,
            Window::RaisedCosine if u >= 2.0 => 0.0,
            Window::RaisedCosine => 0.5 * (1.0 + (PI * (u - 1.0)).cos()),
        }
    }
}

fn check_reach(field: &LatticeField, w: Window, r: f64) -> Result<(), FluctError> {
    if !(r > 0.0) {
        return Err(FluctError::Invalid("radius must be positive".into()));
    }
    let reach = r * w.support_radius();
    let half = field.side as f64 * field.spacing / 2.0;
    if reach > half {
        return Err(FluctError::WindowTooLarge { reach, half });
    }
    Ok(())
}

/// `Σ_i w(|x_i − center| / R) q_i` with minimum-image distances.
pub fn windowed_sum(field: &LatticeField, w: Window, r: f64, center: &[usize]) -> Result<f64, FluctError> {
    check_reach(field, w, r)?;
    if center.len() != field.dims {
        return Err(FluctError::Invalid(format!("center needs {} coordinates", field.dims)));
    }
    let reach = (r * w.support_radius() / field.spacing).ceil() as isize;
    let side = field.side as isize;
    if 2 * reach + 1 >= side {
        return Ok((0..field.len())
            .map(|i| w.profile(field.distance(center, &field.coord(i)) / r) * field.values[i])
            .sum());
    }
    let span = (2 * reach + 1) as usize;
    let mut total = 0.0;
    for flat in 0..span.pow(field.dims as u32) {
        let mut rest = flat;
        let mut d2 = 0isize;
        let mut site = [0usize; 3];
        for a in (0..field.dims).rev() {
            let d = (rest % span) as isize - reach;
            rest /= span;
            d2 += d * d;
            site[a] = (center[a] as isize + d).rem_euclid(side) as usize;
        }
        let weight = w.profile((d2 as f64).sqrt() * field.spacing / r);
        if weight != 0.0 {
            total += weight * field.values[field.index(&site)];
        }
    }
    Ok(total)
}

/// Window sampled on the periodic lattice, centred at the origin.
fn window_kernel(field: &LatticeField, w: Window, r: f64) -> Vec<Complex64> {
    let origin = [0usize; 3];
    let values: Vec<f64> = (0..field.len())
        .map(|i| w.profile(field.distance(&origin, &field.coord(i)) / r))
        .collect();
    forward_real(&values, field.dims, field.side)
}

/// `Q_R` at every centre, by FFT convolution.
fn all_window_sums(spec: &[Complex64], kernel: &[Complex64], dims: usize, side: usize) -> Vec<f64> {
    let prod: Vec<Complex64> = spec.iter().zip(kernel).map(|(a, b)| a * b).collect();
    inverse_real(prod, dims, side)
}

pub const MIN_ENSEMBLE: usize = 20;
pub const MIN_VOLUME_ENSEMBLE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceOptions {
    /// Window centres drawn per field; all sites when this exceeds the field size.
    pub centers_per_field: usize,
    pub seed: u64,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self {
            centers_per_field: 1024,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub radius: f64,
    pub variance: f64,
    /// Standard error of `variance` across ensemble members.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub rows: Vec<ScalingRow>,
    pub beta: f64,
    pub beta_stderr: f64,
}

impl ScalingFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,variance,stderr\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.radius, r.variance, r.stderr);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares, unweighted.
pub fn ols(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LineFit {
        slope,
        intercept,
        slope_stderr,
    }
}

fn check_ensemble(ensemble: &[LatticeField], need: usize) -> Result<(), FluctError> {
    if ensemble.len() < need {
        return Err(FluctError::Ensemble {
            need,
            got: ensemble.len(),
        });
    }
    if ensemble.iter().any(|f| !f.same_shape(&ensemble[0])) {
        return Err(FluctError::Shape);
    }
    Ok(())
}

fn sample_centres(n: usize, count: usize, seed: u64) -> Vec<usize> {
    if count >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0..n)).collect()
}

/// Ensemble variance of `Q_R` per radius and the log-log slope `β` of
/// variance against `R`.
pub fn variance_vs_radius(
    ensemble: &[LatticeField],
    w: Window,
    radii: &[f64],
    opts: &VarianceOptions,
) -> Result<ScalingFit, FluctError> {
    check_ensemble(ensemble, MIN_ENSEMBLE)?;
    if radii.len() < 4 {
        return Err(FluctError::Radii(format!("need at least 4, got {}", radii.len())));
    }
    let (lo, hi) = radii.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if hi < 4.0 * lo {
        return Err(FluctError::Radii(format!("span {hi}/{lo} is below a factor of 4")));
    }
    let proto = &ensemble[0];
    for &r in radii {
        check_reach(proto, w, r)?;
    }
    let (dims, side) = (proto.dims, proto.side);
    let kernels: Vec<Vec<Complex64>> = radii.par_iter().map(|&r| window_kernel(proto, w, r)).collect();
    // per field, per radius: mean of Q_R² over the sampled centres
    let per_field: Vec<Vec<f64>> = ensemble
        .par_iter()
        .enumerate()
        .map(|(fi, field)| {
            let spec = forward_real(&field.values, dims, side);
            let centres = sample_centres(field.len(), opts.centers_per_field, opts.seed.wrapping_add(fi as u64));
            kernels
                .iter()
                .map(|k| {
                    let q = all_window_sums(&spec, k, dims, side);
                    centres.iter().map(|&c| q[c] * q[c]).sum::<f64>() / centres.len() as f64
                })
                .collect()
        })
        .collect();
    let m = ensemble.len() as f64;
    let rows: Vec<ScalingRow> = radii
        .iter()
        .enumerate()
        .map(|(j, &radius)| {
            let vals: Vec<f64> = per_field.iter().map(|v| v[j]).collect();
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
            ScalingRow {
                radius,
                variance: mean,
                stderr: (var / m).sqrt(),
            }
        })
        .collect();
    if rows.iter().any(|r| !(r.variance > 0.0)) {
        return Err(FluctError::Degenerate("windowed sums have zero variance".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.radius.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.variance.ln()).collect();
    let fit = ols(&xs, &ys);
    Ok(ScalingFit {
        rows,
        beta: fit.slope,
        beta_stderr: fit.slope_stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFit {
    pub alpha_hat: f64,
    pub stderr: f64,
    /// `(|k|, mean power)` per shell used in the fit.
    pub shells: Vec<(f64, f64)>,
}

pub const MIN_SPECTRAL_SIDE: usize = 256;

/// Log-log slope of the shell-averaged power spectrum over
/// `0 < |k| ≤ k_max_fraction · k_Nyquist`.
pub fn spectral_exponent(field: &LatticeField, k_max_fraction: f64) -> Result<SpectralFit, FluctError> {
    if !(k_max_fraction > 0.0 && k_max_fraction <= 0.25) {
        return Err(FluctError::Invalid("k_max_fraction must lie in (0, 0.25]".into()));
    }
    if field.side < MIN_SPECTRAL_SIDE {
        return Err(FluctError::Invalid(format!(
            "side {} is below the minimum {MIN_SPECTRAL_SIDE} for a spectral fit",
            field.side
        )));
    }
    let power = field.spectral_power();
    let m_max = k_max_fraction * field.side as f64 / 2.0;
    let shells_n = m_max.floor() as usize;
    let mut sum = vec![0.0; shells_n + 1];
    let mut msum = vec![0.0; shells_n + 1];
    let mut count = vec![0usize; shells_n + 1];
    for (i, p) in power.iter().enumerate() {
        let m = mode(i, field.dims, field.side);
        let mag = m[..field.dims].iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        if mag == 0.0 || mag > m_max {
            continue;
        }
        let b = mag.round() as usize;
        if b == 0 || b > shells_n {
            continue;
        }
        sum[b] += p;
        msum[b] += mag;
        count[b] += 1;
    }
    let kscale = TAU / (field.side as f64 * field.spacing);
    let shells: Vec<(f64, f64)> = (1..=shells_n)
        .filter(|&b| count[b] > 0)
        .map(|b| (msum[b] / count[b] as f64 * kscale, sum[b] / count[b] as f64))
        .collect();
    if shells.len() < 4 {
        return Err(FluctError::Degenerate(format!("only {} shells in the fit band", shells.len())));
    }
    if shells.iter().any(|s| !(s.1 > 0.0)) {
        return Err(FluctError::Degenerate("zero power in the fit band".into()));
    }
    let xs: Vec<f64> = shells.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = shells.iter().map(|s| s.1.ln()).collect();
    let fit = ols(&xs, &ys);
    Ok(SpectralFit {
        alpha_hat: fit.slope,
        stderr: fit.slope_stderr,
        shells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// A single reference site.
    Site(Vec<usize>),
    /// Every site as reference, averaged; uses stationarity of the ensemble.
    Translation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub radius: f64,
    pub integral: f64,
    /// `integral / <q(x)²>`; 0 when the field vanishes.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub site_variance: f64,
    pub rows: Vec<VolumeRow>,
}

/// `Σ_{|y − x| ≤ R} <q(x) q(y)>` for growing balls.
pub fn correlation_volume_integral(
    ensemble: &[LatticeField],
    anchor: &Anchor,
    radii: &[f64],
) -> Result<VolumeReport, FluctError> {
    check_ensemble(ensemble, MIN_VOLUME_ENSEMBLE)?;
    let proto = &ensemble[0];
    for &r in radii {
        check_reach(proto, Window::Sharp, r)?;
    }
    if let Anchor::Site(c) = anchor {
        if c.len() != proto.dims || c.iter().any(|&v| v >= proto.side) {
            return Err(FluctError::Invalid("anchor outside the lattice".into()));
        }
    }
    let (dims, side) = (proto.dims, proto.side);
    let kernels: Vec<Vec<Complex64>> = radii.iter().map(|&r| window_kernel(proto, Window::Sharp, r)).collect();
    let per_field: Vec<(f64, Vec<f64>)> = ensemble
        .par_iter()
        .map(|field| match anchor {
            Anchor::Site(c) => {
                let x = field.values[field.index(c)];
                let sums = radii
                    .iter()
                    .map(|&r| Ok(x * windowed_sum(field, Window::Sharp, r, c)?))
                    .collect::<Result<Vec<_>, FluctError>>()?;
                Ok((x * x, sums))
            }
            Anchor::Translation => {
                let n = field.len() as f64;
                let spec = forward_real(&field.values, dims, side);
                let sq = field.values.iter().map(|v| v * v).sum::<f64>() / n;
                let sums = kernels
                    .iter()
                    .map(|k| {
                        let q = all_window_sums(&spec, k, dims, side);
                        q.iter().zip(&field.values).map(|(a, b)| a * b).sum::<f64>() / n
                    })
                    .collect();
                Ok((sq, sums))
            }
        })
        .collect::<Result<_, FluctError>>()?;
    let m = ensemble.len() as f64;
    let site_variance = per_field.iter().map(|p| p.0).sum::<f64>() / m;
    let rows = radii
        .iter()
        .enumerate()
        .map(|(j, &radius)| {
            let integral = per_field.iter().map(|p| p.1[j]).sum::<f64>() / m;
            VolumeRow {
                radius,
                integral,
                relative: if site_variance > 0.0 { integral / site_variance } else { 0.0 },
            }
        })
        .collect();
    Ok(VolumeReport { site_variance, rows })
}

/// Coarse field of block sums scaled by `N^(−renorm_exponent)`, `N = block^dims`.
pub fn block_average(field: &LatticeField, block: usize, renorm_exponent: f64) -> Result<LatticeField, FluctError> {
    if block < 2 || !field.side.is_multiple_of(block) {
        return Err(FluctError::Block {
            block,
            side: field.side,
        });
    }
    let coarse = field.side / block;
    let n_block = block.pow(field.dims as u32) as f64;
    let mut values = vec![0.0; coarse.pow(field.dims as u32)];
    for (i, v) in field.values.iter().enumerate() {
        let c = field.coord(i);
        let j = c[..field.dims].iter().fold(0, |acc, &x| acc * coarse + x / block);
        values[j] += v;
    }
    let scale = n_block.powf(-renorm_exponent);
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(LatticeField::new(field.dims, coarse, values)?.with_spacing(field.spacing * block as f64))
}

/// Header `dims side spacing`, then one value per line in row-major order.
pub fn write_field(field: &LatticeField) -> String {
    let mut out = format!("{} {} {}\n", field.dims, field.side, field.spacing);
    for v in &field.values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn read_field(text: &str) -> Result<LatticeField, FluctError> {
    let err = |line: usize, msg: &str| FluctError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let [dims, side, spacing] = h[..] else {
        return Err(err(1, "expected `dims side spacing`"));
    };
    let dims: usize = dims.parse().map_err(|_| err(1, "bad dims"))?;
    let side: usize = side.parse().map_err(|_| err(1, "bad side"))?;
    let spacing: f64 = spacing.parse().map_err(|_| err(1, "bad spacing"))?;
    if !(spacing > 0.0) {
        return Err(err(1, "spacing must be positive"));
    }
    let values = lines
        .map(|(i, l)| l.trim().parse::<f64>().map_err(|_| err(i + 1, "bad value")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LatticeField::new(dims, side, values)?.with_spacing(spacing))
}
