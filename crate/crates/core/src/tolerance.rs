//! Numerical tolerances.
//!
//! Exact zeros and unit norms only hold up to floating point, so every
//! comparison against them goes through one of these named thresholds.

/// Allowed deviation of a state norm from 1.
pub const TAU_NORM: f64 = 1e-12;
/// Allowed entrywise deviation `max |A - A^dagger|`.
pub const TAU_HERM: f64 = 1e-10;
/// Allowed spectral excursion outside `[0, 1]`.
pub const TAU_POS: f64 = 1e-10;
/// Relative kernel threshold: `||A psi|| <= TAU_KERNEL * ||A||`.
pub const TAU_KERNEL: f64 = 1e-10;
/// Allowed deviation of a density operator trace from 1.
pub const TAU_TRACE: f64 = 1e-12;
/// Allowed imaginary residue of an expectation value.
pub const TAU_IMAG: f64 = 1e-10;
/// Orthogonality and coefficient-normalization slack for superpositions.
pub const TAU_SUPERPOSE: f64 = 1e-10;
/// Completeness slack for outcome families.
pub const TAU_COMPLETE: f64 = 1e-10;
/// Slack on the superposition bound in theorem verification.
pub const TAU_THEOREM: f64 = 1e-10;

/// Overridable set of the tolerances used by validation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    pub norm: f64,
    pub hermitian: f64,
    pub positivity: f64,
    pub kernel: f64,
    pub theorem: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: TAU_NORM,
            hermitian: TAU_HERM,
            positivity: TAU_POS,
            kernel: TAU_KERNEL,
            theorem: TAU_THEOREM,
        }
    }
}
