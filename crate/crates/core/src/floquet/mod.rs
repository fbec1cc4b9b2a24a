//! Effective Hamiltonians for periodically driven chains.

pub mod bessel;
pub mod control;
mod effective;
mod magnus;

pub use effective::{analytic_hf0, rwa_local_effective, RwaEffective};
pub use magnus::{magnus, max_abs, magnus_order0, magnus_order1, MagnusResult, DEFAULT_QUADRATURE_POINTS, MAX_MAGNUS_SITES};
