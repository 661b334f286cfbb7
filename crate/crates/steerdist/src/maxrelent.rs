//! Max-relative entropy `D_max(η ‖ ρ) = log₂ min{λ ≥ 0 | η ≤ λρ}` and the
//! optimal scaling constant `λ_opt` behind filter success probabilities.
//!
//! The support decision is made by projector comparison rather than by
//! inspecting eigenvalues of the compressed operator: near-singular
//! directions would otherwise turn a genuinely infinite divergence into a
//! spuriously huge finite one.

use crate::assemblage::support_inclusion_defect;
use crate::error::{Error, Result};
use crate::linalg::{spectral_decompose, sqrt_pinv, HermitianOperator};

/// Leakage threshold for `supp(η) ⊆ supp(ρ)`.
pub const TOL_SUPPORT_LEAK: f64 = 1e-8;

/// A nonnegative real or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::Infinite => None,
        }
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => write!(f, "inf"),
        }
    }
}

fn check_density(h: &HermitianOperator, name: &str) -> Result<()> {
    let min = h.min_eigenvalue();
    if min < -1e-9 {
        return Err(Error::NegativeOperator { min_eigenvalue: min, floor: -1e-9 });
    }
    let tr = h.trace();
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitTrace { trace: tr });
    }
    let _ = name;
    Ok(())
}

/// `D_max(η ‖ ρ)` in bits. Returns `Infinite` when `supp(η) ⊄ supp(ρ)`.
pub fn dmax(eta: &HermitianOperator, rho: &HermitianOperator) -> Result<ExtendedReal> {
    check_density(eta, "eta")?;
    check_density(rho, "rho")?;
    if eta.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("dmax: dims {} vs {}", eta.dim(), rho.dim()),
        });
    }
    if support_inclusion_defect(eta, rho)? > TOL_SUPPORT_LEAK {
        return Ok(ExtendedReal::Infinite);
    }
    let s = sqrt_pinv(rho)?;
    let compressed = eta.conjugate_by(s.matrix());
    let lambda_max = spectral_decompose(&compressed)?
        .first()
        .map(|p| p.0)
        .unwrap_or(0.0);
    Ok(ExtendedReal::Finite(lambda_max.max(f64::MIN_POSITIVE).log2()))
}

/// `λ_opt = min{λ ≥ 0 | ρ_τ ≤ λ ρ'} = 2^{D_max(ρ_τ ‖ ρ')}`.
///
/// Finite values are always ≥ 1 up to rounding, since both arguments carry
/// unit trace.
pub fn lambda_opt(
    rho_tau: &HermitianOperator,
    rho_transformed: &HermitianOperator,
) -> Result<ExtendedReal> {
    match dmax(rho_tau, rho_transformed)? {
        ExtendedReal::Finite(d) => Ok(ExtendedReal::Finite(2f64.powf(d))),
        ExtendedReal::Infinite => Ok(ExtendedReal::Infinite),
    }
}
