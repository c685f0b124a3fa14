//! Special functions: Γ, ψ, and the modified Bessel functions I_ν, K_ν together
//! with the scaled variants K̂_ν(z) = z^{-ν} K_ν(z) and K̃_ν(z) = z^{ν} K_ν(z).

mod bessel;
mod gamma;

pub use bessel::{bessel_i, bessel_k, Order, ScaledKind, MAX_ORDER};
pub use gamma::{digamma, factorial, gamma, sin_pi};

/// Euler–Mascheroni constant γ_E (20 significant digits).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;
