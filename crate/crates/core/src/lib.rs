//! Desk-scale laboratory for translocal oscillator networks.
//!
//! * [`graph`]: lattices with shortcuts, maximal cliques, clique-graph
//!   renormalization, connectivity statistics, rewiring.
//! * [`oscillator`]: Kuramoto-type phase dynamics, order parameters and
//!   two-scale demodulation.
//! * [`averaging`]: polar slow flow and first-order averaging for weakly
//!   nonlinear oscillators.
//! * [`fluctuation`]: power-law lattice fields, windowed-sum scaling and
//!   block averaging.
//! * [`madelung`]: Schrödinger evolution and its amplitude/phase form.
//! * [`multiscale`]: influence-kernel lifts between two field levels.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod averaging;
mod fft;
pub mod fluctuation;
pub mod graph;
pub mod madelung;
pub mod multiscale;
pub mod oscillator;

pub use graph::{Clique, EdgeKind, Graph, GraphError, LatticeShape};
