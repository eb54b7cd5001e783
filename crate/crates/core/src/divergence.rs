//! Quantum relative entropy, sandwiched Rényi divergence, and the
//! discretization gap certificate.
//!
//! All values are in nats. Genuine infinities (support mismatch) are carried
//! by an explicit marker, never by a large float: a pure entangled target has
//! an infinite measure and we want that fact to survive serialization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{DensityMatrix, DEFAULT_EIG_FLOOR};

/// σ-weight on the sub-floor eigenspace of ρ above which a divergence is
/// declared infinite rather than floored.
pub const SUPPORT_MISMATCH_TOL: f64 = 1e-10;

/// A divergence value in nats, tagged with its order.
///
/// `alpha = 1` is the quantum relative entropy; other orders are the
/// sandwiched Rényi divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    alpha: f64,
    value: Option<f64>,
}

impl DivergenceValue {
    pub fn finite(alpha: f64, value: f64) -> Self {
        Self {
            alpha,
            value: Some(value),
        }
    }

    pub fn infinite(alpha: f64) -> Self {
        Self { alpha, value: None }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_none()
    }

    pub fn value(&self) -> Option<f64> {
        self.value
    }

    /// Finite value, or `+∞` for the marker.
    pub fn as_f64(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }

    pub fn expect_finite(&self) -> Result<f64> {
        self.value
            .ok_or_else(|| Error::Numerical("divergence is infinite".into()))
    }
}

impl std::fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.value {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "inf"),
        }
    }
}

fn check_same_dim(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<()> {
    if sigma.dim() != rho.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: {} vs {}",
            sigma.dim(),
            rho.dim()
        )));
    }
    Ok(())
}

/// σ-weight carried by eigenvectors of ρ whose eigenvalue is below the floor.
fn null_space_weight(sigma: &DensityMatrix, rho_spec: &crate::hermitian::Spectrum) -> f64 {
    let mut w = 0.0;
    for (k, &lam) in rho_spec.eigenvalues.iter().enumerate() {
        if lam < DEFAULT_EIG_FLOOR {
            let u = rho_spec.eigenvectors.column(k);
            let su = sigma.matrix() * u;
            w += u.dot(&su).re.max(0.0);
        }
    }
    w
}

/// Quantum relative entropy `D(σ‖ρ) = Tr σ (log σ − log ρ)` in nats.
///
/// Computed on floored spectra; returns the infinite marker when σ carries
/// more than [`SUPPORT_MISMATCH_TOL`] weight outside the floored support
/// of ρ.
pub fn relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<DivergenceValue> {
    check_same_dim(sigma, rho)?;
    let rho_spec = rho.op().eig();
    if null_space_weight(sigma, &rho_spec) > SUPPORT_MISMATCH_TOL {
        return Ok(DivergenceValue::infinite(1.0));
    }
    let log_rho = rho_spec.recombine(
        &rho_spec
            .eigenvalues
            .iter()
            .map(|&l| l.max(DEFAULT_EIG_FLOOR).ln())
            .collect::<Vec<_>>(),
    );
    let sig_spec = sigma.op().eig();
    let entropy_term: f64 = sig_spec
        .eigenvalues
        .iter()
        .map(|&l| if l > 0.0 { l * l.ln() } else { 0.0 })
        .sum();
    let cross: f64 = (sigma.matrix() * log_rho).trace().re;
    Ok(DivergenceValue::finite(1.0, entropy_term - cross))
}

/// Sandwiched Rényi divergence
/// `D_α(σ‖ρ) = (α−1)^{-1} log Tr (ρ^{(1−α)/2α} σ ρ^{(1−α)/2α})^α`.
///
/// For commuting inputs this is the classical Rényi divergence of the
/// spectra. `α` must be positive and different from 1.
pub fn sandwiched_renyi(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    alpha: f64,
) -> Result<DivergenceValue> {
    if !(alpha > 0.0) || alpha == 1.0 {
        return Err(Error::Parameter(format!(
            "Rényi order must satisfy α > 0, α ≠ 1 (got {alpha})"
        )));
    }
    check_same_dim(sigma, rho)?;
    let s = (1.0 - alpha) / (2.0 * alpha);
    if s < 0.0 {
        // negative powers of ρ: genuine support mismatch means +∞
        let rho_spec = rho.op().eig();
        if null_space_weight(sigma, &rho_spec) > SUPPORT_MISMATCH_TOL {
            return Ok(DivergenceValue::infinite(alpha));
        }
    }
    let rho_s = rho.op().pow_floored(s, DEFAULT_EIG_FLOOR)?;
    let z = rho_s.matrix() * sigma.matrix() * rho_s.matrix();
    let z =
        crate::hermitian::HermitianOperator::new((&z + z.adjoint()) * Complex64::new(0.5, 0.0))?;
    let trace_alpha: f64 = z
        .eig()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).powf(alpha))
        .sum();
    if !trace_alpha.is_finite() {
        return Err(Error::Numerical(
            "sandwiched trace overflowed; state far outside floored support".into(),
        ));
    }
    if trace_alpha <= 0.0 {
        // σ entirely outside supp(ρ); for α<1 the divergence is +∞
        return Ok(DivergenceValue::infinite(alpha));
    }
    Ok(DivergenceValue::finite(
        alpha,
        trace_alpha.ln() / (alpha - 1.0),
    ))
}

/// The continuity modulus
/// `η₀(x) = −x log x` for `0 ≤ x ≤ 1/e`, and `1/e` otherwise.
pub fn eta0(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Parameter(format!("η₀ requires x ≥ 0, got {x}")));
    }
    let inv_e = 1.0 / std::f64::consts::E;
    if x <= inv_e {
        if x == 0.0 {
            Ok(0.0)
        } else {
            Ok(-x * x.ln())
        }
    } else {
        Ok(inv_e)
    }
}

/// Certified width of the discretization interval:
/// `ε₂ (‖log ρ_AB‖ + log d_A d_B) + η₀(ε₂)`.
///
/// The net-restricted minimum exceeds the unrestricted one by at most this
/// much, so `[value − gap, value]` brackets the true measure.
pub fn approximation_gap(eps2: f64, rho_ab: &DensityMatrix) -> Result<f64> {
    if eps2 < 0.0 {
        return Err(Error::Parameter(format!("ε₂ must be ≥ 0, got {eps2}")));
    }
    let (da, db) = rho_ab.require_dims()?;
    let log_norm = rho_ab
        .op()
        .eig()
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &l| m.max(l.max(DEFAULT_EIG_FLOOR).ln().abs()));
    Ok(eps2 * (log_norm + ((da * db) as f64).ln()) + eta0(eps2)?)
}
