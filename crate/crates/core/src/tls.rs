//! Two-level system building blocks: the magic-angle kicked model in the
//! rotating frame and the coupling operators of the two standard examples.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use crate::error::Result;
use crate::floquet::KickedModel;
use crate::operators::HermitianOperator;

/// Rotating-frame model `H0 = (Δ/2)σ³`, `W = σ¹`, `λ = π/2`.
pub fn magic_angle_model(delta: f64, period: f64) -> Result<KickedModel> {
    kicked_model(delta, FRAC_PI_2, period)
}

/// Rotating-frame model `H0 = (Δ/2)σ³`, `W = σ¹` with arbitrary kick angle.
pub fn kicked_model(delta: f64, lambda: f64, period: f64) -> Result<KickedModel> {
    KickedModel::new(HermitianOperator::pauli(3).scaled(0.5 * delta), HermitianOperator::pauli(1), lambda, period)
}

/// Longitudinal (pure dephasing) coupling `σ³/√2`.
///
/// The `1/√2` normalization makes the Lorentzian generator reproduce the
/// closed-form rate `η_∥`; see the README section on conventions.
pub fn longitudinal_coupling() -> HermitianOperator {
    HermitianOperator::pauli(3).scaled(FRAC_1_SQRT_2)
}

/// Transverse couplings `σ¹` and `σ²`, each paired with `γ_⊥`.
pub fn transverse_couplings() -> Vec<HermitianOperator> {
    vec![HermitianOperator::pauli(1), HermitianOperator::pauli(2)]
}
