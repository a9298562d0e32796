//! Topological order parameters of generalized quantum Ising chains.
//!
//! The chain with couplings `J_n^x`, `J_n^y` between spins `n` sites apart
//! and transverse field `g` maps onto a loop `(x(k), y(k))` in an auxiliary
//! plane. Three integers characterize its phase:
//!
//! * the winding number of that loop about the origin ([`winding`]),
//! * the Chern number of the lower band after lifting the loop onto a closed
//!   surface ([`berry`]),
//! * the signed count of Majorana zero modes on the open chain ([`majorana`]).
//!
//! [`sweep`] evaluates them over the Gaussian toy-model parameter plane.

pub mod berry;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod io;
pub mod majorana;
pub mod model;
pub mod sweep;
pub mod winding;

pub use error::{Error, Result};
pub use model::{critical_fields, dispersion, loop_point, sample_loop, CouplingSet, LoopCurve};
pub use winding::{winding_number, winding_of_coupling, WindingResult};
