//! Numerical laboratory for the quantum kicked top.
//!
//! The crate builds Floquet operators for the kicked top, evaluates four
//! chaos measures (out-of-time-order correlator, Loschmidt echo,
//! generalized entanglement, observational entropy) and provides sweep
//! machinery for verifying how those measures repeat in the kick
//! strength k, reflect around half the repeat interval, and behave at
//! the special values k = N pi / 2.
//!
//! Conventions used throughout:
//! * basis ordering m = j, j-1, ..., -j (index n maps to m = j - n);
//! * one Floquet step is U = D(k) R(alpha) with D = exp(-i k J_z^2 / 2j)
//!   applied after the rotation R = exp(-i alpha J_y);
//! * natural logarithms everywhere an entropy appears.

pub mod analytic;
pub mod classical;
pub mod cli;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod measures;
pub mod spinops;
pub mod sweep;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use spinops::{CoherentAngles, Spin};
