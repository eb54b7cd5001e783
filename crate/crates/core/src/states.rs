//! Shared state constructors and seeded randomness.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{CMat, CVec, DensityMatrix, HermitianOperator};

/// Deterministic RNG for everything sampled in this crate.
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Haar-random unit vector in `C^dim` (normalized complex Gaussian).
pub fn haar_vector(dim: usize, rng: &mut impl Rng) -> CVec {
    let mut v = DVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let n = v.norm();
    v /= Complex64::new(n, 0.0);
    v
}

/// Random Hermitian matrix `(G + G†)/2` with complex Gaussian `G`.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let g = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::new(h).expect("symmetrized matrix is Hermitian")
}

/// Random full-rank density matrix `GG†/Tr` (Wishart).
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::from_matrix(w / Complex64::new(tr, 0.0), None).expect("Wishart is a state")
}

/// Computational basis vector `|j⟩` in `C^dim`.
pub fn basis_vector(dim: usize, j: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[j] = Complex64::new(1.0, 0.0);
    v
}

/// Maximally entangled vector `|Φ⟩ = d^{-1/2} Σ_j |j⟩|j⟩` on `C^d ⊗ C^d`.
pub fn maximally_entangled(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        v[j * d + j] = w;
    }
    v
}

/// Generalized phase operator `Z = Σ_j ω^j |j⟩⟨j|`, `ω = e^{2πi/d}`.
pub fn phase_z(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / d as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Phase-mixed maximally entangled state
/// `Σ_j p_j (Z^j ⊗ I)|Φ⟩⟨Φ|(Z^{-j} ⊗ I)` on `d ⊗ d`, a maximally correlated
/// state whose coefficient matrix is the single-system phase mixture of the
/// same distribution.
pub fn phase_mixed_bipartite(p: &[f64]) -> Result<DensityMatrix> {
    let d = p.len();
    validate_distribution(p)?;
    let phi = maximally_entangled(d);
    let z = phase_z(d);
    let id = CMat::identity(d, d);
    let mut acc = CMat::zeros(d * d, d * d);
    let mut zj = CMat::identity(d, d);
    for &pj in p.iter() {
        let u = zj.kronecker(&id);
        let v = &u * &phi;
        acc += (&v * v.adjoint()) * Complex64::new(pj, 0.0);
        zj *= &z;
    }
    DensityMatrix::from_matrix(acc, Some((d, d)))
}

/// Embeds a coefficient matrix `θ` as the maximally correlated state
/// `Σ_{ij} θ[j,i] |jj⟩⟨ii|` on `d ⊗ d`.
pub fn maxcorr_embed(theta: &HermitianOperator) -> Result<DensityMatrix> {
    let d = theta.dim();
    let mut out = CMat::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            out[(j * d + j, i * d + i)] = theta.matrix()[(j, i)];
        }
    }
    DensityMatrix::from_matrix(out, Some((d, d)))
}

/// `ρ_A ⊗ ρ_B` with bipartite metadata.
pub fn product_density(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(
        rho_a.op().kron(rho_b.op()),
        Some((rho_a.dim(), rho_b.dim())),
    )
}

/// Embeds a bipartite state into a larger bipartition by direct sum with a
/// `pad_weight`-weighted completely mixed complement.
///
/// The A factor is enlarged; B dimensions must match.
pub fn embed_padded(
    rho: &DensityMatrix,
    target_dims: (usize, usize),
    pad_weight: f64,
) -> Result<DensityMatrix> {
    let (da, db) = rho.require_dims()?;
    let (ta, tb) = target_dims;
    if tb != db || ta < da {
        return Err(Error::Validation(format!(
            "cannot embed ({da},{db}) into ({ta},{tb}): B dims must match and A must not shrink"
        )));
    }
    if !(0.0..1.0).contains(&pad_weight) {
        return Err(Error::Parameter(format!(
            "pad weight {pad_weight} outside [0,1)"
        )));
    }
    let dim = ta * tb;
    let mut out = CMat::identity(dim, dim) * Complex64::new(pad_weight / dim as f64, 0.0);
    let scale = Complex64::new(1.0 - pad_weight, 0.0);
    let m = rho.matrix();
    for a in 0..da {
        for ap in 0..da {
            for b in 0..db {
                for bp in 0..db {
                    out[(a * tb + b, ap * tb + bp)] += scale * m[(a * db + b, ap * db + bp)];
                }
            }
        }
    }
    DensityMatrix::from_matrix(out, Some(target_dims))
}

pub(crate) fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Validation("empty probability vector".into()));
    }
    if p.iter().any(|&x| x < 0.0) {
        return Err(Error::Validation("negative probability entry".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!(
            "probabilities sum to {s}, expected 1"
        )));
    }
    Ok(())
}
