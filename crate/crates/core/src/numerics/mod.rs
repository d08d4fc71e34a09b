//! Numerical substrate: complex matrices, tensor products, Bessel functions,
//! fixed-step RK4 and bracketed root finding.

mod bessel;
mod linalg;
mod ode;
mod roots;

pub use bessel::bessel_jn;
pub use linalg::{
    basis_vector, commutator, dagger, expm_hermitian, frobenius, hermitian_min_eigenvalue,
    is_hermitian, ket_bra, max_abs, projector, tensor_product, trace, CMatrix, CVector, SparseOp, C64,
};
pub use ode::{rk4_step, OdeState, TimeGrid};
pub use roots::find_root_bracketed;

use std::f64::consts::TAU;

/// Converts a linear frequency in MHz into an angular frequency in rad/ns.
#[inline]
pub fn angular(mhz: f64) -> f64 {
    TAU * mhz * 1e-3
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}
