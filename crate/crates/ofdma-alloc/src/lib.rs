//! Multi-service OFDMA downlink subchannel allocation under uniform power
//! loading.
//!
//! The crate models a single-cell downlink where `N` orthogonal subchannels,
//! each carrying an equal share of the base-station power, are assigned
//! exclusively to `K` users split into constant-bit-rate (CBR) and
//! best-effort (BE) QoS classes. It provides:
//!
//! * [`rate`] — the PHY abstraction mapping channel gains and power to
//!   achievable bits/symbol through the SNR-gap capacity formula;
//! * [`channel`] — a seeded path-loss / shadowing / frequency-selective
//!   Rayleigh fading generator producing per-drop, per-frame gain matrices;
//! * [`problem`] — instance and allocation types with the shared objective
//!   semantics (CBR surplus ignored, BE rates summed);
//! * [`heuristics`] — two polynomial construction/improvement heuristics and
//!   a semi-random baseline;
//! * [`exact`] — an exact branch-and-bound solver over the binary program
//!   with an in-repo dense-simplex LP relaxation bound, plus an exhaustive
//!   oracle for tiny instances;
//! * [`harness`] — a Monte-Carlo scenario runner with per-drop feasible-power
//!   calibration, a convergence-controlled drop loop and CSV reporting.

pub mod channel;
pub mod exact;
pub mod harness;
pub mod heuristics;
pub mod mat;
pub mod problem;
pub mod rate;
pub mod seed;
mod text;

pub use mat::Matrix;
pub use problem::{Allocation, Evaluation, Infeasible, Instance};
