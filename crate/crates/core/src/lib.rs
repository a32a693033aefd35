//! Trace-maximizing reconfigurable intelligent surface (RIS) design for a
//! point-to-point MIMO link, and a Monte Carlo harness that compares designs
//! by channel power, waterfilling capacity and eigenvalue spread.
//!
//! The link is `z = G Φ H x + w` with `H` (TX → RIS) and `G` (RIS → RX) drawn
//! from a physical multipath model, and `Φ` chosen by one of the
//! [`designs`]. Every design satisfies `tr(Φ†Φ) = n_ris`.
//!
//! ```
//! use ris_core::channel::{realize, ChannelSpec};
//! use ris_core::designs::{design_opt_diag, design_opt_gen};
//!
//! let link = realize(&ChannelSpec::symmetric(8, 4, false, 7), 0).unwrap();
//! let diag = design_opt_diag(&link.h, &link.g).unwrap();
//! let gen = design_opt_gen(&link.h, &link.g).unwrap();
//! assert!(gen.achieved_trace_objective >= diag.achieved_trace_objective);
//! ```

pub mod capacity;
pub mod channel;
pub mod config;
pub mod designs;
pub mod experiments;
pub mod linalg;
pub mod matrix_io;
pub mod parallel;
pub mod rng;
pub mod verify;

pub use linalg::{Complex, ComplexMatrix};
