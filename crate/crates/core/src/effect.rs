//! Effects, density operators and the positivity machinery.
//!
//! An [`Effect`] is a hermitian operator with spectrum in `[0, 1]`; the
//! probability of the event it describes in state `phi` is `<phi|A|phi>`.
//! For a positive operator, `<psi|A|psi> = ||A^{1/2} psi||^2`, so a zero
//! expectation places `psi` in the kernel of `A` (see [`kernel_member`]).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hilbert::{vector_norm, Operator, StateVector, C64};
use crate::tolerance::{Tolerances, TAU_IMAG, TAU_TRACE};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

/// Spectral diagnostics of a candidate effect.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EffectDiagnostics {
    pub hermiticity_residual: f64,
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub finite: bool,
    pub hermitian: bool,
    pub positive: bool,
    pub bounded_by_one: bool,
}

impl EffectDiagnostics {
    pub fn passed(&self) -> bool {
        self.finite && self.hermitian && self.positive && self.bounded_by_one
    }

    fn first_failure(&self) -> Option<Error> {
        if !self.finite {
            Some(Error::NonFinite)
        } else if !self.hermitian {
            Some(Error::NotHermitian {
                residual: self.hermiticity_residual,
            })
        } else if !self.positive {
            Some(Error::NotPositive {
                min_eigenvalue: self.min_eigenvalue,
            })
        } else if !self.bounded_by_one {
            Some(Error::SpectrumAboveOne {
                max_eigenvalue: self.max_eigenvalue,
            })
        } else {
            None
        }
    }
}

/// Reports hermiticity and spectral bounds of `op`. Never fails.
pub fn validate_effect(op: &Operator) -> EffectDiagnostics {
    validate_effect_with(op, &Tolerances::default())
}

pub fn validate_effect_with(op: &Operator, tol: &Tolerances) -> EffectDiagnostics {
    let finite = op.is_finite();
    let hermiticity_residual = op.hermiticity_residual();
    let eigenvalues = if finite { op.hermitian_eigenvalues() } else { Vec::new() };
    let min_eigenvalue = eigenvalues.first().copied().unwrap_or(f64::NAN);
    let max_eigenvalue = eigenvalues.last().copied().unwrap_or(f64::NAN);
    EffectDiagnostics {
        hermiticity_residual,
        finite,
        hermitian: hermiticity_residual <= tol.hermitian,
        positive: min_eigenvalue >= -tol.positivity,
        bounded_by_one: max_eigenvalue <= 1.0 + tol.positivity,
        min_eigenvalue,
        max_eigenvalue,
        eigenvalues,
    }
}

/// Checks that `op` is hermitian and positive (upper bound not required).
pub(crate) fn require_positive(op: &Operator, tol: &Tolerances) -> Result<EffectDiagnostics> {
    let diag = validate_effect_with(op, tol);
    if !diag.finite {
        return Err(Error::NonFinite);
    }
    if !diag.hermitian {
        return Err(Error::NotHermitian {
            residual: diag.hermiticity_residual,
        });
    }
    if !diag.positive {
        return Err(Error::NotPositive {
            min_eigenvalue: diag.min_eigenvalue,
        });
    }
    Ok(diag)
}

/// A validated effect operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: Operator,
    max_eigenvalue: f64,
}

impl Effect {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: Operator, tol: &Tolerances) -> Result<Self> {
        let diag = validate_effect_with(&op, tol);
        match diag.first_failure() {
            Some(err) => Err(err),
            None => Ok(Self {
                op,
                max_eigenvalue: diag.max_eigenvalue.max(0.0),
            }),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            op: Operator::zeros(dim),
            max_eigenvalue: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim),
            max_eigenvalue: 1.0,
        }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Operator norm (largest eigenvalue).
    pub fn norm(&self) -> f64 {
        self.max_eigenvalue
    }
}

/// A hermitian, positive, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: Operator, tol: &Tolerances) -> Result<Self> {
        require_positive(&op, tol)?;
        let trace = op.trace().re;
        if (trace - 1.0).abs() > TAU_TRACE {
            return Err(Error::TraceNotUnit { trace });
        }
        Ok(Self { op })
    }

    /// `|phi><phi|`.
    pub fn pure(phi: &StateVector) -> Self {
        Self {
            op: Operator::projector(phi.amplitudes()),
        }
    }

    /// `identity / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Convex mixture `sum_k w_k |phi_k><phi_k|`; weights must be
    /// non-negative and sum to one.
    pub fn mixture(components: &[(f64, &StateVector)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut op = Operator::zeros(dim);
        for &(w, phi) in components {
            if w.is_nan() || w < 0.0 {
                return Err(Error::InvalidParameter("negative mixture weight".into()));
            }
            if phi.basis() != first.1.basis() {
                return Err(Error::BasisMismatch);
            }
            op = op.add(&Operator::projector(phi.amplitudes()).scale(w))?;
        }
        Self::new(op)
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

fn checked_probability(value: C64, tol: &Tolerances) -> Result<f64> {
    if value.im.abs() > TAU_IMAG {
        return Err(Error::ImaginaryResidue { value: value.im });
    }
    let p = value.re;
    if !(p >= -tol.positivity && p <= 1.0 + tol.positivity) {
        return Err(Error::ExpectationOutOfRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `<phi|A|phi>`, range-checked and then clamped to `[0, 1]`.
pub fn expectation(effect: &Effect, phi: &StateVector) -> Result<f64> {
    if effect.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: effect.dim(),
            found: phi.dim(),
        });
    }
    let value = effect.op.quadratic_form(phi.amplitudes())?;
    checked_probability(value, &Tolerances::default())
}

/// `trace(rho A)`.
pub fn expectation_mixed(effect: &Effect, rho: &DensityOperator) -> Result<f64> {
    if effect.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: effect.dim(),
            found: rho.dim(),
        });
    }
    let n = effect.dim();
    let (a, r) = (&effect.op, &rho.op);
    let mut value = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            value += r[(i, k)] * a[(k, i)];
        }
    }
    checked_probability(value, &Tolerances::default())
}

/// Outcome of a kernel-membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KernelCheck {
    pub member: bool,
    /// `||A psi||`.
    pub residual: f64,
    /// `TAU_KERNEL * ||A||`.
    pub threshold: f64,
}

/// Tests whether `A psi = 0` for a positive operator `A`.
pub fn kernel_member(op: &Operator, psi: &StateVector) -> Result<KernelCheck> {
    kernel_member_with(op, psi, &Tolerances::default())
}

pub fn kernel_member_with(op: &Operator, psi: &StateVector, tol: &Tolerances) -> Result<KernelCheck> {
    if op.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: psi.dim(),
        });
    }
    let diag = require_positive(op, tol)?;
    let norm = diag.max_eigenvalue.max(0.0);
    let residual = vector_norm(&op.apply(psi.amplitudes())?);
    let threshold = tol.kernel * norm;
    Ok(KernelCheck {
        member: residual <= threshold,
        residual,
        threshold,
    })
}
