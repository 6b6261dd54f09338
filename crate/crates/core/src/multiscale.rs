//! Two field levels joined by influence kernels: a microscopic pair `(u, v)`
//! on a periodic line and macroscopic lifts `V = ∫F v`, `U = ∫G u`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeKind, Graph, GraphError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MultiscaleError {
    #[error("expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("kernel needs n >= 3, dx > 0 and finite entries")]
    Kernel,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Invalid(String),
}

/// Dense `F(x, y)` on an `n`-point periodic grid, row-major in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceKernel {
    pub n: usize,
    pub dx: f64,
    pub matrix: Vec<f64>,
}

impl InfluenceKernel {
    pub fn new(n: usize, dx: f64, matrix: Vec<f64>) -> Result<Self, MultiscaleError> {
        if n < 3 || !(dx > 0.0) || matrix.iter().any(|v| !v.is_finite()) {
            return Err(MultiscaleError::Kernel);
        }
        if matrix.len() != n * n {
            return Err(MultiscaleError::Shape {
                expected: n * n,
                got: matrix.len(),
            });
        }
        Ok(Self { n, dx, matrix })
    }

    fn from_fn(n: usize, dx: f64, f: impl Fn(usize, usize) -> f64) -> Result<Self, MultiscaleError> {
        Self::new(n, dx, (0..n * n).map(|k| f(k / n, k % n)).collect())
    }

    /// Discrete delta: `I / dx`.
    pub fn identity(n: usize, dx: f64) -> Result<Self, MultiscaleError> {
        Self::from_fn(n, dx, |i, j| if i == j { 1.0 / dx } else { 0.0 })
    }

    pub fn constant(n: usize, dx: f64, c: f64) -> Result<Self, MultiscaleError> {
        Self::from_fn(n, dx, |_, _| c)
    }

    /// `δ(y − x) + δ(y − x − L/2)`: every point also sees its antipode.
    pub fn two_peak(n: usize, dx: f64) -> Result<Self, MultiscaleError> {
        Self::from_fn(n, dx, |i, j| {
            let mut v = 0.0;
            if i == j {
                v += 1.0 / dx;
            }
            if j == (i + n / 2) % n {
                v += 1.0 / dx;
            }
            v
        })
    }

    /// Normalized periodic Gaussian of standard deviation `width`.
    pub fn gaussian(n: usize, dx: f64, width: f64) -> Result<Self, MultiscaleError> {
        if !(width > 0.0) {
            return Err(MultiscaleError::Invalid("width must be positive".into()));
        }
        let raw = Self::from_fn(n, dx, |i, j| {
            let d = ring_distance(i, j, n) as f64 * dx;
            (-d * d / (2.0 * width * width)).exp()
        })?;
        let row_sum: f64 = raw.matrix[..n].iter().sum::<f64>() * dx;
        Self::new(n, dx, raw.matrix.iter().map(|v| v / row_sum).collect())
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.n + y]
    }

    /// `Δ_x F(x, y)` with the periodic three-point stencil in `x`.
    pub fn laplacian_x(&self) -> InfluenceKernel {
        let n = self.n;
        let h2 = self.dx * self.dx;
        let matrix = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                (self.at((i + 1) % n, j) - 2.0 * self.at(i, j) + self.at((i + n - 1) % n, j)) / h2
            })
            .collect();
        InfluenceKernel { matrix, ..*self }
    }
}

fn ring_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// `V(x) = Σ_y F(x, y) v(y) dx`
pub fn lift(v: &[f64], f: &InfluenceKernel) -> Result<Vec<f64>, MultiscaleError> {
    if v.len() != f.n {
        return Err(MultiscaleError::Shape {
            expected: f.n,
            got: v.len(),
        });
    }
    Ok(mat_vec(&f.matrix, v).into_iter().map(|x| x * f.dx).collect())
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Periodic three-point Laplacian of a field.
pub fn laplacian(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / (dx * dx))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MicroRule {
    /// `v̇ = D Δ v`
    Diffusion { diffusivity: f64 },
    /// `v̇ = −γ L v` with `L` the weighted Laplacian of a ring with random
    /// shortcuts; shortcut edges carry weight `translocal_weight`.
    Translocal {
        gamma: f64,
        shortcut_prob: f64,
        translocal_weight: f64,
        seed: u64,
    },
    /// Arbitrary dense `v̇ = M v`, row-major.
    Matrix { m: Vec<f64> },
}

impl Default for MicroRule {
    fn default() -> Self {
        MicroRule::Translocal {
            gamma: 1.0,
            shortcut_prob: 0.1,
            translocal_weight: 1.0,
            seed: 0,
        }
    }
}

/// Dense mixing matrix plus the mask of its translocal entries.
struct Mixing {
    m: Vec<f64>,
    translocal: Vec<bool>,
}

fn mixing(rule: &MicroRule, n: usize, dx: f64) -> Result<Mixing, MultiscaleError> {
    let mut m = vec![0.0; n * n];
    let mut translocal = vec![false; n * n];
    match rule {
        MicroRule::Diffusion { diffusivity } => {
            let c = diffusivity / (dx * dx);
            for i in 0..n {
                m[i * n + i] -= 2.0 * c;
                m[i * n + (i + 1) % n] += c;
                m[i * n + (i + n - 1) % n] += c;
            }
        }
        MicroRule::Translocal {
            gamma,
            shortcut_prob,
            translocal_weight,
            seed,
        } => {
            let g = Graph::lattice_with_shortcuts(n, 1, *shortcut_prob, *seed)?;
            for (u, v, kind) in g.edges() {
                let w = gamma
                    * match kind {
                        EdgeKind::Local => 1.0,
                        EdgeKind::Translocal => *translocal_weight,
                    };
                m[u * n + v] += w;
                m[v * n + u] += w;
                m[u * n + u] -= w;
                m[v * n + v] -= w;
                if kind == EdgeKind::Translocal {
                    translocal[u * n + v] = true;
                    translocal[v * n + u] = true;
                }
            }
        }
        MicroRule::Matrix { m: given } => {
            if given.len() != n * n {
                return Err(MultiscaleError::Shape {
                    expected: n * n,
                    got: given.len(),
                });
            }
            m.clone_from(given);
            for i in 0..n {
                for j in 0..n {
                    translocal[i * n + j] = ring_distance(i, j, n) > 1;
                }
            }
        }
    }
    Ok(Mixing { m, translocal })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelReport {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    /// `max_t ‖∫G u̇ − Δ∫F v‖∞`, with `u̇` from the micro rule.
    pub macro_law_residual: f64,
    /// `max_t ‖∫G u̇ − ∫Δ_x F v‖∞`.
    pub chained_identity_residual: f64,
    /// Centred time difference of the recorded `U` against `ΔV`, relative
    /// to `max |ΔV|`; carries the integrator's `O(dt²)` error.
    pub macro_law_fd_relative: f64,
    /// Share of off-diagonal mixing weight on shortcut entries.
    pub translocal_fraction: f64,
    /// `‖v(T) − v(0)‖∞`
    pub micro_change: f64,
    /// Rows of `(t, U, V)` snapshots, flattened per time.
    pub times: Vec<f64>,
    pub macro_u: Vec<Vec<f64>>,
    pub macro_v: Vec<Vec<f64>>,
}

impl TwoLevelReport {
    pub fn to_csv(&self, dx: f64) -> String {
        let mut out = String::from("t,x,U,V\n");
        for (k, t) in self.times.iter().enumerate() {
            for i in 0..self.n {
                let _ = writeln!(out, "{t},{},{},{}", i as f64 * dx, self.macro_u[k][i], self.macro_v[k][i]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelOptions {
    pub dt: f64,
    pub steps: usize,
    /// Snapshot stride for the emitted `(U, V)` table.
    pub record_every: usize,
}

/// Evolves `v̇ = M v` and `u̇(x) = Σ_y Δ_x F(x, y) v(y) dx`, the micro law
/// that makes `U̇ = ΔV` hold exactly when `G = I/dx`, and checks the macro
/// law through an arbitrary `G`.
pub fn two_level_demo(
    v0: &[f64],
    f: &InfluenceKernel,
    g: &InfluenceKernel,
    rule: &MicroRule,
    opts: &TwoLevelOptions,
) -> Result<TwoLevelReport, MultiscaleError> {
    let n = f.n;
    if v0.len() != n {
        return Err(MultiscaleError::Shape {
            expected: n,
            got: v0.len(),
        });
    }
    if g.n != n || g.dx != f.dx {
        return Err(MultiscaleError::Invalid("F and G must share the grid".into()));
    }
    if !(opts.dt > 0.0) || opts.record_every == 0 {
        return Err(MultiscaleError::Invalid("need dt > 0 and record_every >= 1".into()));
    }
    let dx = f.dx;
    let mix = mixing(rule, n, dx)?;
    let lap_f = f.laplacian_x();
    let rhs = |v: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let dv = mat_vec(&mix.m, v);
        let du: Vec<f64> = mat_vec(&lap_f.matrix, v).into_iter().map(|x| x * dx).collect();
        (dv, du)
    };
    let mut v = v0.to_vec();
    let mut u = vec![0.0; n];
    let mut macro_law: f64 = 0.0;
    let mut chained: f64 = 0.0;
    let mut us = Vec::with_capacity(opts.steps + 1);
    let mut lap_vs = Vec::with_capacity(opts.steps + 1);
    let mut report = TwoLevelReport {
        n,
        dt: opts.dt,
        steps: opts.steps,
        macro_law_residual: 0.0,
        chained_identity_residual: 0.0,
        macro_law_fd_relative: 0.0,
        translocal_fraction: 0.0,
        micro_change: 0.0,
        times: Vec::new(),
        macro_u: Vec::new(),
        macro_v: Vec::new(),
    };
    for step in 0..=opts.steps {
        let big_v = lift(&v, f)?;
        let big_u = lift(&u, g)?;
        let (_, du) = rhs(&v);
        let u_dot = lift(&du, g)?;
        let lap_v = laplacian(&big_v, dx);
        let chain = lift(&v, &lap_f)?;
        for i in 0..n {
            macro_law = macro_law.max((u_dot[i] - lap_v[i]).abs());
            chained = chained.max((u_dot[i] - chain[i]).abs());
        }
        if step % opts.record_every == 0 {
            report.times.push(step as f64 * opts.dt);
            report.macro_u.push(big_u.clone());
            report.macro_v.push(big_v.clone());
        }
        us.push(big_u);
        lap_vs.push(lap_v);
        if step == opts.steps {
            break;
        }
        // classical RK4 on (v, u)
        let h = opts.dt;
        let axpy = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
        let (k1v, k1u) = rhs(&v);
        let (k2v, k2u) = rhs(&axpy(&v, &k1v, h / 2.0));
        let (k3v, k3u) = rhs(&axpy(&v, &k2v, h / 2.0));
        let (k4v, k4u) = rhs(&axpy(&v, &k3v, h));
        for i in 0..n {
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
            u[i] += h / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(MultiscaleError::Invalid(format!("micro field diverged at step {step}")));
        }
    }
    let scale = lap_vs.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut fd: f64 = 0.0;
    for k in 1..us.len().saturating_sub(1) {
        for i in 0..n {
            let du = (us[k + 1][i] - us[k - 1][i]) / (2.0 * opts.dt);
            fd = fd.max((du - lap_vs[k][i]).abs());
        }
    }
    let off: f64 = (0..n * n).filter(|k| k / n != k % n).map(|k| mix.m[k].abs()).sum();
    let tl: f64 = (0..n * n).filter(|&k| mix.translocal[k]).map(|k| mix.m[k].abs()).sum();
    report.macro_law_residual = macro_law;
    report.chained_identity_residual = chained;
    report.macro_law_fd_relative = if scale > 0.0 { fd / scale } else { fd };
    report.translocal_fraction = if off > 0.0 { tl / off } else { 0.0 };
    report.micro_change = v.iter().zip(v0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(report)
}

/// A few smooth modes plus a localized bump; a generic non-harmonic start.
pub fn default_micro_field(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (TAU * x).sin() + 0.5 * (3.0 * TAU * x).cos() + (-((x - 0.3) * 20.0).powi(2)).exp()
        })
        .collect()
}

/// `# n=<n> dx=<dx>` then one whitespace-separated row per line.
pub fn write_kernel(k: &InfluenceKernel) -> String {
    let mut out = format!("# n={} dx={}\n", k.n, k.dx);
    for row in k.matrix.chunks(k.n) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_kernel(text: &str) -> Result<InfluenceKernel, MultiscaleError> {
    let err = |line: usize, msg: &str| MultiscaleError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let mut n = None;
    let mut dx = None;
    for tok in header.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse::<usize>().map_err(|_| err(1, "bad n"))?);
        } else if let Some(v) = tok.strip_prefix("dx=") {
            dx = Some(v.parse::<f64>().map_err(|_| err(1, "bad dx"))?);
        }
    }
    let (n, dx) = (n.ok_or_else(|| err(1, "missing n="))?, dx.ok_or_else(|| err(1, "missing dx="))?);
    let mut matrix = Vec::with_capacity(n * n);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(i + 1, "bad entry")))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != n {
            return Err(err(i + 1, &format!("expected {n} entries")));
        }
        matrix.extend(row);
    }
    InfluenceKernel::new(n, dx, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(steps: usize) -> TwoLevelOptions {
        TwoLevelOptions {
            dt: 1e-3,
            steps,
            record_every: 10,
        }
    }

    #[test]
    fn lift_examples() {
        let (n, dx) = (16, 0.25);
        let v: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let id = lift(&v, &InfluenceKernel::identity(n, dx).unwrap()).unwrap();
        assert!(id.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15));
        let c = lift(&v, &InfluenceKernel::constant(n, dx, 3.0).unwrap()).unwrap();
        let expected = 3.0 * dx * v.iter().sum::<f64>();
        assert!(c.iter().all(|x| (x - expected).abs() < 1e-12));
        let tp = lift(&v, &InfluenceKernel::two_peak(n, dx).unwrap()).unwrap();
        for i in 0..n {
            assert!((tp[i] - v[i] - v[(i + n / 2) % n]).abs() < 1e-12);
        }
        assert!(matches!(lift(&v[..3], &InfluenceKernel::identity(n, dx).unwrap()), Err(MultiscaleError::Shape { .. })));
    }

    #[test]
    fn lift_is_bilinear() {
        let (n, dx) = (12, 0.5);
        let a: Vec<f64> = (0..n).map(|i| i as f64 * 0.3).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let f = InfluenceKernel::gaussian(n, dx, 1.0).unwrap();
        let g = InfluenceKernel::two_peak(n, dx).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x + y).collect();
        let (la, lb, ls) = (lift(&a, &f).unwrap(), lift(&b, &f).unwrap(), lift(&sum, &f).unwrap());
        for i in 0..n {
            assert!((ls[i] - 2.0 * la[i] - lb[i]).abs() < 1e-12);
        }
        let fg = InfluenceKernel::new(n, dx, f.matrix.iter().zip(&g.matrix).map(|(x, y)| x + y).collect()).unwrap();
        let (l1, l2, l12) = (lift(&a, &f).unwrap(), lift(&a, &g).unwrap(), lift(&a, &fg).unwrap());
        for i in 0..n {
            assert!((l12[i] - l1[i] - l2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn static_field_has_no_dynamics() {
        let n = 32;
        let f = InfluenceKernel::gaussian(n, 0.1, 0.3).unwrap();
        let g = InfluenceKernel::identity(n, 0.1).unwrap();
        let rep = two_level_demo(&vec![1.5; n], &f, &g, &MicroRule::default(), &opts(50)).unwrap();
        assert!(rep.micro_change < 1e-12);
        assert!(rep.macro_law_residual < 1e-9 && rep.chained_identity_residual < 1e-9);
        assert!(rep.macro_u.iter().flatten().all(|u| u.abs() < 1e-9));
    }

    #[test]
    fn identity_kernels_reduce_to_the_micro_law() {
        let n = 64;
        let dx = 1.0 / n as f64;
        let id = InfluenceKernel::identity(n, dx).unwrap();
        let rule = MicroRule::Diffusion { diffusivity: 0.01 };
        let rep = two_level_demo(&default_micro_field(n), &id, &id, &rule, &opts(200)).unwrap();
        let scale = rep.macro_v.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(rep.macro_law_residual / scale <= 1e-8);
        assert!(rep.macro_law_fd_relative <= 1e-4);
        assert_eq!(rep.translocal_fraction, 0.0);
    }

    #[test]
    fn translocal_mixing_keeps_the_chained_identity() {
        let n = 64;
        let dx = 1.0 / n as f64;
        let f = InfluenceKernel::gaussian(n, dx, 0.05).unwrap();
        let g = InfluenceKernel::identity(n, dx).unwrap();
        let rep = two_level_demo(&default_micro_field(n), &f, &g, &MicroRule::default(), &opts(500)).unwrap();
        let scale = lift(&default_micro_field(n), &f.laplacian_x()).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(rep.chained_identity_residual <= 1e-6 * scale.max(1.0), "{rep:?}");
        assert!(rep.macro_law_residual <= 1e-6 * scale.max(1.0));
        assert!(rep.translocal_fraction > 0.0);
        assert!(rep.micro_change > 1e-2);
    }

    #[test]
    fn a_mismatched_macro_kernel_breaks_the_law() {
        let n = 48;
        let dx = 1.0 / n as f64;
        let f = InfluenceKernel::gaussian(n, dx, 0.05).unwrap();
        let g = InfluenceKernel::two_peak(n, dx).unwrap();
        let rep = two_level_demo(&default_micro_field(n), &f, &g, &MicroRule::default(), &opts(20)).unwrap();
        assert!(rep.macro_law_residual > 1.0);
    }

    #[test]
    fn kernel_text_round_trip() {
        let k = InfluenceKernel::gaussian(6, 0.5, 0.7).unwrap();
        assert_eq!(read_kernel(&write_kernel(&k)).unwrap(), k);
        assert!(read_kernel("# n=3 dx=1\n1 2 3\n1 2\n4 5 6\n").is_err());
        assert!(read_kernel("# n=3\n").is_err());
    }
}
