//! Simulation and pulse-design toolkit for time-optimal nonadiabatic holonomic
//! gates on transmon pairs encoded in a decoherence-free subspace.
//!
//! Frequencies are linear frequencies in MHz, times are in ns. Hamiltonians
//! and collapse operators are returned in angular units of rad/ns (see
//! [`numerics::angular`]).

pub mod design;
pub mod device;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod metrics;
pub mod numerics;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use numerics::{CMatrix, CVector, C64};
