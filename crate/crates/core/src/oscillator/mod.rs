//! Kuramoto-type phase oscillators on graphs.
//!
//! Dynamics: `dθ_i/dt = ω_i − α Σ_j J_ij sin(θ_i − θ_j)` over graph
//! neighbours. Amplitudes are frozen; amplitude/phase modulation enters only
//! through [`demodulate`].

mod correlation;
mod demod;
mod sync;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::graph::{EdgeKind, Graph};

pub use correlation::{pair_correlation, CorrelationBin, CorrelationOptions};
pub use demod::{
    demodulate, scale_separation_check, RatioCheck, ScaleSeparationReport,
    UndulationDecomposition,
};
pub use sync::{sync_experiment, InitialPhases, SeedOutcome, SyncConfig, SyncReport};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OscError {
    #[error("array length {got} does not match node count {expected}")]
    Length { expected: usize, got: usize },
    #[error("dt * max|omega| = {0} exceeds the stability guard 0.2")]
    Unstable(f64),
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("no phases given")]
    Empty,
    #[error("graph has no lattice positions")]
    NoPositions,
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("series undersampled: {0}")]
    Undersampled(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

/// Phase oscillators on the nodes of a graph.
#[derive(Debug, Clone)]
pub struct OscillatorNetwork {
    graph: Graph,
    theta: Vec<f64>,
    omega: Vec<f64>,
    coupling: f64,
    edge_weight: BTreeMap<(usize, usize), f64>,
}

impl OscillatorNetwork {
    /// Unit weight on every edge.
    pub fn new(graph: Graph, theta: Vec<f64>, omega: Vec<f64>, coupling: f64) -> Result<Self, OscError> {
        let n = graph.node_count();
        for v in [&theta, &omega] {
            if v.len() != n {
                return Err(OscError::Length {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(OscError::Invalid("omega must be finite".into()));
        }
        if !(coupling >= 0.0) {
            return Err(OscError::Invalid(format!("coupling {coupling} must be >= 0")));
        }
        let edge_weight = graph.edges().map(|(u, v, _)| ((u, v), 1.0)).collect();
        Ok(Self {
            theta: theta.iter().map(|t| t.rem_euclid(TAU)).collect(),
            graph,
            omega,
            coupling,
            edge_weight,
        })
    }

    /// Natural frequencies `mean + N(0, sigma)` and initial phases drawn
    /// from `initial`, both from one seeded stream.
    pub fn seeded(
        graph: Graph,
        mean_omega: f64,
        sigma_omega: f64,
        coupling: f64,
        initial: InitialPhases,
        seed: u64,
    ) -> Result<Self, OscError> {
        let n = graph.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega: Vec<f64> = if sigma_omega > 0.0 {
            let normal = Normal::new(mean_omega, sigma_omega)
                .map_err(|e| OscError::Invalid(e.to_string()))?;
            (0..n).map(|_| normal.sample(&mut rng)).collect()
        } else {
            vec![mean_omega; n]
        };
        let span = match initial {
            InitialPhases::Uniform => TAU,
            InitialPhases::HalfCircle => std::f64::consts::PI,
        };
        let theta = (0..n).map(|_| rng.random::<f64>() * span).collect();
        Self::new(graph, theta, omega, coupling)
    }

    /// Sets `J` separately for local and translocal edges.
    pub fn with_kind_weights(mut self, local: f64, translocal: f64) -> Self {
        for (u, v, kind) in self.graph.edges() {
            let w = match kind {
                EdgeKind::Local => local,
                EdgeKind::Translocal => translocal,
            };
            self.edge_weight.insert((u, v), w);
        }
        self
    }

    pub fn set_edge_weight(&mut self, u: usize, v: usize, w: f64) -> bool {
        let k = (u.min(v), u.max(v));
        match self.edge_weight.get_mut(&k) {
            Some(slot) => {
                *slot = w;
                true
            }
            None => false,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    fn csr(&self) -> Csr {
        let n = self.graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for u in 0..n {
            for v in self.graph.neighbors(u) {
                targets.push(v);
                weights.push(self.coupling * self.edge_weight[&(u.min(v), u.max(v))]);
            }
            offsets.push(targets.len());
        }
        Csr {
            offsets,
            targets,
            weights,
        }
    }

    /// Integrates the phase equations.
    ///
    /// Frames are recorded every `opts.record_every` steps (and always at the
    /// final step), with phases wrapped to `[0, 2π)`.
    pub fn integrate(&self, opts: &IntegrateOptions) -> Result<Trajectory, OscError> {
        if !(opts.dt > 0.0) {
            return Err(OscError::BadStep(opts.dt));
        }
        let max_omega = self.omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let guard = opts.dt * max_omega;
        if guard > 0.2 && !opts.allow_unstable {
            return Err(OscError::Unstable(guard));
        }
        let csr = self.csr();
        let n = self.theta.len();
        let mut state = self.theta.clone();
        let stride = opts.record_every.max(1);
        let mut times = vec![0.0];
        let mut frames = vec![state.clone()];
        let mut scratch = Scratch::new(n);
        for step in 1..=opts.steps {
            match opts.method {
                Method::Euler => {
                    csr.rhs(&state, &self.omega, &mut scratch.k1);
                    for i in 0..n {
                        state[i] += opts.dt * scratch.k1[i];
                    }
                }
                Method::Rk4 => rk4_step(&csr, &self.omega, &mut state, opts.dt, &mut scratch),
            }
            if step % stride == 0 || step == opts.steps {
                times.push(step as f64 * opts.dt);
                frames.push(state.iter().map(|t| t.rem_euclid(TAU)).collect());
            }
        }
        Ok(Trajectory {
            times,
            frames,
            unwrapped_final: state,
        })
    }
}

struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Csr {
    fn rhs(&self, theta: &[f64], omega: &[f64], out: &mut [f64]) {
        for i in 0..theta.len() {
            let mut acc = 0.0;
            for k in self.offsets[i]..self.offsets[i + 1] {
                acc += self.weights[k] * (theta[i] - theta[self.targets[k]]).sin();
            }
            out[i] = omega[i] - acc;
        }
    }
}

struct Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

fn rk4_step(csr: &Csr, omega: &[f64], state: &mut [f64], dt: f64, s: &mut Scratch) {
    let n = state.len();
    csr.rhs(state, omega, &mut s.k1);
    for i in 0..n {
        s.tmp[i] = state[i] + 0.5 * dt * s.k1[i];
    }
    csr.rhs(&s.tmp, omega, &mut s.k2);
    for i in 0..n {
        s.tmp[i] = state[i] + 0.5 * dt * s.k2[i];
    }
    csr.rhs(&s.tmp, omega, &mut s.k3);
    for i in 0..n {
        s.tmp[i] = state[i] + dt * s.k3[i];
    }
    csr.rhs(&s.tmp, omega, &mut s.k4);
    for i in 0..n {
        state[i] += dt / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    pub record_every: usize,
    /// Skip the `dt * max|ω| <= 0.2` guard.
    pub allow_unstable: bool,
}

impl IntegrateOptions {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            steps,
            method: Method::Rk4,
            record_every: 1,
            allow_unstable: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Wrapped phases per recorded time.
    pub frames: Vec<Vec<f64>>,
    /// Final phases without wrapping, for winding and drift measurements.
    pub unwrapped_final: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.frames.last().expect("trajectory has the initial frame")
    }

    /// CSV with columns `t,node,theta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,node,theta\n");
        for (t, frame) in self.times.iter().zip(&self.frames) {
            for (i, th) in frame.iter().enumerate() {
                let _ = writeln!(out, "{t},{i},{th}");
            }
        }
        out
    }
}

/// Modulus and argument (in `[0, 2π)`) of the mean unit phasor.
pub fn order_parameter(theta: &[f64]) -> Result<(f64, f64), OscError> {
    if theta.is_empty() {
        return Err(OscError::Empty);
    }
    let n = theta.len() as f64;
    let (s, c) = theta
        .iter()
        .fold((0.0, 0.0), |(s, c), t| (s + t.sin(), c + t.cos()));
    let (re, im) = (c / n, s / n);
    Ok((re.hypot(im).min(1.0), im.atan2(re).rem_euclid(TAU)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pair(delta_omega: f64, alpha: f64, dtheta: f64) -> OscillatorNetwork {
        let g = Graph::path(2);
        OscillatorNetwork::new(g, vec![dtheta, 0.0], vec![1.0 + delta_omega, 1.0], alpha).unwrap()
    }

    /// Closed form of dΔ/dt = −2 sin Δ: tan(Δ/2) = tan(Δ0/2) e^{−2t}.
    fn closed_form_delta(delta0: f64, t: f64) -> f64 {
        2.0 * ((delta0 / 2.0).tan() * (-2.0 * t).exp()).atan()
    }

    fn phase_difference(traj: &Trajectory) -> f64 {
        crate::graph::wrap_angle(traj.last()[0] - traj.last()[1])
    }

    #[test]
    fn free_oscillator_advances_linearly() {
        let net = OscillatorNetwork::new(Graph::new(1), vec![0.0], vec![1.0], 0.0).unwrap();
        let steps = 1000;
        let traj = net.integrate(&IntegrateOptions::new(PI / steps as f64, steps)).unwrap();
        assert!((traj.last()[0] - PI).abs() < 1e-12);
    }

    #[test]
    fn two_oscillators_match_closed_form() {
        let traj = pair(0.0, 1.0, 1.0).integrate(&IntegrateOptions::new(0.01, 100)).unwrap();
        let expected = closed_form_delta(1.0, 1.0);
        assert!((phase_difference(&traj) - expected).abs() < 1e-4);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let err = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let traj = pair(0.0, 1.0, 2.5).integrate(&IntegrateOptions::new(dt, steps)).unwrap();
            (phase_difference(&traj) - closed_form_delta(2.5, 1.0)).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 >= 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn euler_is_first_order() {
        let err = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let mut opts = IntegrateOptions::new(dt, steps);
            opts.method = Method::Euler;
            let traj = pair(0.0, 1.0, 1.0).integrate(&opts).unwrap();
            (phase_difference(&traj) - closed_form_delta(1.0, 1.0)).abs()
        };
        let ratio = err(0.01) / err(0.005);
        assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn locked_difference_is_arcsine() {
        let traj = pair(1.0, 1.0, 0.0).integrate(&IntegrateOptions::new(0.05, 2000)).unwrap();
        assert!((phase_difference(&traj) - 0.5f64.asin()).abs() < 1e-3);
    }

    #[test]
    fn stability_guard() {
        let net = pair(0.0, 1.0, 0.0);
        assert!(matches!(
            net.integrate(&IntegrateOptions::new(0.5, 10)),
            Err(OscError::Unstable(_))
        ));
        let mut opts = IntegrateOptions::new(0.5, 10);
        opts.allow_unstable = true;
        assert!(net.integrate(&opts).is_ok());
        assert!(net.integrate(&IntegrateOptions::new(0.0, 10)).is_err());
    }

    #[test]
    fn order_parameter_examples() {
        let (r, phi) = order_parameter(&[1.3; 5]).unwrap();
        assert!((r - 1.0).abs() < 1e-12 && (phi - 1.3).abs() < 1e-12);
        assert!(order_parameter(&[0.0, PI]).unwrap().0 < 1e-12);
        let (r, phi) = order_parameter(&[0.0, FRAC_PI_2]).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((phi - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(order_parameter(&[]), Err(OscError::Empty));
    }

    #[test]
    fn trajectory_csv_layout() {
        let net = OscillatorNetwork::new(Graph::path(2), vec![0.0, 1.0], vec![0.0, 0.0], 0.0).unwrap();
        let csv = net.integrate(&IntegrateOptions::new(0.1, 1)).unwrap().to_csv();
        assert_eq!(csv, "t,node,theta\n0,0,0\n0,1,1\n0.1,0,0\n0.1,1,1\n");
    }

    #[test]
    fn kind_weights_apply() {
        let mut g = Graph::new(3);
        g.add_edge(0, 1, EdgeKind::Local).unwrap();
        g.add_edge(1, 2, EdgeKind::Translocal).unwrap();
        let net = OscillatorNetwork::new(g, vec![0.0, 1.0, 2.0], vec![0.0; 3], 1.0)
            .unwrap()
            .with_kind_weights(1.0, 0.0);
        // node 2 only couples through a zero-weight translocal edge
        let traj = net.integrate(&IntegrateOptions::new(0.01, 100)).unwrap();
        assert!((traj.last()[2] - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn order_parameter_rotation_invariant(
            phases in prop::collection::vec(0.0f64..TAU, 1..40),
            shift in -10.0f64..10.0,
        ) {
            let (r, phi) = order_parameter(&phases).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
            let shifted: Vec<f64> = phases.iter().map(|p| p + shift).collect();
            let (r2, phi2) = order_parameter(&shifted).unwrap();
            prop_assert!((r - r2).abs() < 1e-12);
            if r > 1e-6 {
                prop_assert!(crate::graph::wrap_angle(phi2 - phi - shift).abs() < 1e-8);
            }
        }

        #[test]
        fn frequency_shift_preserves_differences(c in -2.0f64..2.0, seed in 0u64..50) {
            let g = Graph::lattice_with_shortcuts(4, 2, 0.2, seed).unwrap();
            let base = OscillatorNetwork::seeded(g.clone(), 0.0, 0.3, 1.0, InitialPhases::Uniform, seed).unwrap();
            let shifted_omega: Vec<f64> = base.omega().iter().map(|w| w + c).collect();
            let shifted = OscillatorNetwork::new(g, base.theta().to_vec(), shifted_omega, 1.0).unwrap();
            let opts = IntegrateOptions::new(0.02, 100);
            let a = base.integrate(&opts).unwrap();
            let b = shifted.integrate(&opts).unwrap();
            let t = 2.0;
            for i in 0..16 {
                prop_assert!((b.unwrapped_final[i] - a.unwrapped_final[i] - c * t).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_synchrony_iff_equal_phases() {
        assert!((order_parameter(&[0.4, 0.4, 0.4]).unwrap().0 - 1.0).abs() < 1e-9);
        assert!(order_parameter(&[0.4, 0.4, 0.5]).unwrap().0 < 1.0 - 1e-9);
    }
}
