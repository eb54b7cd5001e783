//! Coherence measures: minimum divergence from the incoherent (diagonal)
//! states to a given state.
//!
//! The relative-entropy case has a closed form through the diagonal part of
//! `log ρ`; the Rényi case is solved by the same block iteration as the
//! bipartite measures, specialized to scalar blocks over the computational
//! basis (for which the net restriction is exact). A variational expression
//! gives cheap lower bounds for `α ∈ [1/2, 1)`.

use num_complex::Complex64;

use crate::divergence::{relative_entropy, DivergenceValue};
use crate::error::{Error, Result};
use crate::hermitian::{CMat, DensityMatrix, HermitianOperator, DEFAULT_EIG_FLOOR};
use crate::measures::{solve_rel_entropy_with_projectors, solve_renyi_with_projectors};
use crate::solver::SolverConfig;
use crate::states::validate_distribution;

/// A diagonal (incoherent) state given by its probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    probs: Vec<f64>,
}

impl DiagonalState {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_distribution(&probs)?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::new(HermitianOperator::from_real_diagonal(&self.probs), None)
            .expect("probability vector is a state")
    }
}

/// Rank-one projectors onto the computational basis.
fn basis_projectors(d: usize) -> Vec<CMat> {
    (0..d)
        .map(|j| {
            let mut m = CMat::zeros(d, d);
            m[(j, j)] = Complex64::new(1.0, 0.0);
            m
        })
        .collect()
}

/// The closest incoherent state in the relative-entropy sense:
/// `exp((log ρ)^diag)` normalized.
pub fn closest_incoherent(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let log_rho = rho.op().log_floored(DEFAULT_EIG_FLOOR)?;
    let d = rho.dim();
    let mut weights: Vec<f64> = (0..d).map(|j| log_rho.matrix()[(j, j)].re.exp()).collect();
    let t: f64 = weights.iter().sum();
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Numerical(format!(
            "normalizer of the diagonal exponential is {t}"
        )));
    }
    for w in &mut weights {
        *w /= t;
    }
    DensityMatrix::new(HermitianOperator::from_real_diagonal(&weights), rho.dims())
}

/// Minimum relative entropy from incoherent states to ρ, via the closed
/// form `D(I_c(ρ)‖ρ)`.
pub fn rel_entropy(rho: &DensityMatrix) -> Result<DivergenceValue> {
    let ic = closest_incoherent(rho)?;
    relative_entropy(&ic, rho)
}

/// The same minimum computed by the block iteration over the basis net;
/// cross-checks the closed form to solver accuracy.
pub fn rel_entropy_iterative(rho: &DensityMatrix, config: &SolverConfig) -> Result<f64> {
    let d = rho.dim();
    let rho1 = rho.with_dims((1, d))?;
    let (value, _, _) = solve_rel_entropy_with_projectors(&rho1, &basis_projectors(d), config)?;
    Ok(value)
}

/// Minimum sandwiched Rényi divergence from incoherent states to ρ, by the
/// signed-oracle block iteration over the basis net.
pub fn renyi(rho: &DensityMatrix, alpha: f64, config: &SolverConfig) -> Result<DivergenceValue> {
    let d = rho.dim();
    let rho1 = rho.with_dims((1, d))?;
    let solve = solve_renyi_with_projectors(&rho1, &basis_projectors(d), alpha, config)?;
    Ok(solve.value)
}

/// Variational lower bound on the Rényi coherence for `α ∈ [1/2, 1)`:
/// `(α/(α−1)) ln ‖(ρ^{(1−α)/2α} τ^{−(1−α)/α} ρ^{(1−α)/2α})^diag‖`
/// for any full-rank trial state τ; the optimal τ attains the measure.
pub fn renyi_lower_bound(rho: &DensityMatrix, alpha: f64, tau: &DensityMatrix) -> Result<f64> {
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!(
            "variational bound is valid for α ∈ [1/2, 1), got {alpha}"
        )));
    }
    if rho.dim() != tau.dim() {
        return Err(Error::Validation("ρ and τ dimension mismatch".into()));
    }
    let s = (1.0 - alpha) / (2.0 * alpha);
    let rho_s = rho.op().pow_floored(s, DEFAULT_EIG_FLOOR)?;
    let tau_b = tau
        .op()
        .pow_floored(-(1.0 - alpha) / alpha, DEFAULT_EIG_FLOOR)?;
    let m = rho_s.matrix() * tau_b.matrix() * rho_s.matrix();
    let max_diag = (0..rho.dim()).fold(0.0f64, |b, j| b.max(m[(j, j)].re));
    if !(max_diag > 0.0) || !max_diag.is_finite() {
        return Err(Error::Numerical(format!(
            "diagonal norm degenerated to {max_diag}; τ is effectively rank-deficient"
        )));
    }
    Ok(alpha / (alpha - 1.0) * max_diag.ln())
}

/// The phase-mixture family `ρ(p) = Σ_j p_j Z^j |+⟩⟨+| Z^{-j}` with
/// `Z = Σ ω^j |j⟩⟨j|`, `ω = e^{2πi/d}`, and `|+⟩` the uniform superposition.
pub fn phase_mixture(p: &[f64]) -> Result<DensityMatrix> {
    validate_distribution(p)?;
    let d = p.len();
    let z = crate::states::phase_z(d);
    let plus =
        crate::hermitian::CVec::from_element(d, Complex64::new(1.0 / (d as f64).sqrt(), 0.0));
    let mut acc = CMat::zeros(d, d);
    let mut zj = CMat::identity(d, d);
    for &pj in p {
        let v = &zj * &plus;
        acc += (&v * v.adjoint()) * Complex64::new(pj, 0.0);
        zj *= &z;
    }
    DensityMatrix::from_matrix(acc, None)
}

/// Closed form of the Rényi coherence of `ρ(p)`:
/// `(α−1)^{-1} ln Σ_j p_j^{1−α} − α(α−1)^{-1} ln d`, valid on
/// `α ∈ (0,1) ∪ (1,2]`.
pub fn phase_mixture_renyi_closed_form(p: &[f64], alpha: f64) -> Result<f64> {
    validate_distribution(p)?;
    if !(alpha > 0.0) || alpha == 1.0 {
        return Err(Error::Parameter(format!("invalid Rényi order {alpha}")));
    }
    let d = p.len() as f64;
    let s: f64 = p.iter().map(|&x| x.powf(1.0 - alpha)).sum();
    Ok(s.ln() / (alpha - 1.0) - alpha / (alpha - 1.0) * d.ln())
}

/// Evaluates both sides of the additivity identity
/// `C(ρ₁ ⊗ ρ₂) = C(ρ₁) + C(ρ₂)` through the closed form; the caller asserts
/// their agreement.
pub fn additivity_check(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<(f64, f64)> {
    let prod = DensityMatrix::new(rho1.op().kron(rho2.op()), None)?;
    let lhs = rel_entropy(&prod)?.expect_finite()?;
    let rhs = rel_entropy(rho1)?.expect_finite()? + rel_entropy(rho2)?.expect_finite()?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_density, seeded_rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn closest_incoherent_fixes_diagonal_states() {
        let rho = DiagonalState::new(vec![0.2, 0.3, 0.5])
            .unwrap()
            .to_density();
        let ic = closest_incoherent(&rho).unwrap();
        let dev = (ic.matrix() - rho.matrix())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(dev < 1e-12);
    }

    #[test]
    fn closest_incoherent_symmetric_mix_is_uniform() {
        // 0.5|+⟩⟨+| + 0.5·I/2 has equal diagonal log weights
        let plus = phase_mixture(&[1.0, 0.0]).unwrap();
        let m = plus.matrix() * Complex64::new(0.5, 0.0)
            + CMat::identity(2, 2) * Complex64::new(0.25, 0.0);
        let rho = DensityMatrix::from_matrix(m, None).unwrap();
        let ic = closest_incoherent(&rho).unwrap();
        assert_abs_diff_eq!(ic.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ic.matrix()[(1, 1)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn closest_incoherent_is_diagonal_unit_trace() {
        let mut rng = seeded_rng(401);
        let rho = random_density(3, &mut rng);
        let ic = closest_incoherent(&rho).unwrap();
        assert_abs_diff_eq!(ic.op().trace(), 1.0, epsilon = 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(ic.matrix()[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn rel_entropy_zero_iff_incoherent() {
        let rho = DiagonalState::new(vec![0.7, 0.3]).unwrap().to_density();
        let v = rel_entropy(&rho).unwrap().expect_finite().unwrap();
        assert!(v.abs() < 1e-10);
        let mut rng = seeded_rng(403);
        let coherent = random_density(2, &mut rng);
        let v = rel_entropy(&coherent).unwrap().expect_finite().unwrap();
        assert!(v > 1e-6, "random full-rank state is almost surely coherent");
    }

    #[test]
    fn rel_entropy_phase_mixture_closed_form() {
        let rho = phase_mixture(&[0.9, 0.1]).unwrap();
        let v = rel_entropy(&rho).unwrap().expect_finite().unwrap();
        // D(p_mix ‖ p) for p = (0.9, 0.1)
        assert_abs_diff_eq!(v, 0.5108256237659907, epsilon = 1e-10);
        let uniform = phase_mixture(&[0.5, 0.5]).unwrap();
        let v = rel_entropy(&uniform).unwrap().expect_finite().unwrap();
        assert!(v.abs() < 1e-10, "ρ(p_mix) = I/d must give 0, got {v}");
    }

    #[test]
    fn iterative_agrees_with_closed_form() {
        let cfg = SolverConfig {
            max_iter: 6000,
            rel_tol: 1e-12,
            ..SolverConfig::default()
        };
        let diag = DiagonalState::new(vec![0.6, 0.4]).unwrap().to_density();
        let v = rel_entropy_iterative(&diag, &cfg).unwrap();
        assert!(v <= 1e-6, "diagonal state iterated to {v}");

        let mut rng = seeded_rng(405);
        for dim in [2usize, 3] {
            for _ in 0..3 {
                let rho = random_density(dim, &mut rng);
                let closed = rel_entropy(&rho).unwrap().expect_finite().unwrap();
                let iter = rel_entropy_iterative(&rho, &cfg).unwrap();
                assert!(
                    (closed - iter).abs() <= 1e-3,
                    "dim {dim}: closed {closed} vs iterative {iter}"
                );
            }
        }
    }

    #[test]
    fn renyi_phase_mixture_matches_closed_form() {
        let rho = phase_mixture(&[0.9, 0.1]).unwrap();
        let cfg = SolverConfig {
            max_iter: 10_000,
            rel_tol: 1e-13,
            ..SolverConfig::default()
        };
        // −2 ln(√0.9 + √0.1) + ln 2 = ln(5/4)
        let expect = phase_mixture_renyi_closed_form(&[0.9, 0.1], 0.5).unwrap();
        assert_abs_diff_eq!(expect, 1.25f64.ln(), epsilon = 1e-12);
        let got = renyi(&rho, 0.5, &cfg).unwrap().expect_finite().unwrap();
        assert!(
            (got - expect).abs() <= 1e-3,
            "α=0.5: solver {got} vs closed {expect}"
        );
    }

    #[test]
    fn renyi_pure_state_closed_form() {
        // |φ⟩ with amplitude weights (0.8, 0.2): (α/(α−1)) ln max p = −ln 0.8
        let psi = crate::hermitian::CVec::from_vec(vec![
            Complex64::new(0.8f64.sqrt(), 0.0),
            Complex64::new(0.2f64.sqrt(), 0.0),
        ]);
        let rho = DensityMatrix::from_pure(&psi, None).unwrap();
        let cfg = SolverConfig {
            max_iter: 20_000,
            rel_tol: 1e-13,
            ..SolverConfig::default()
        };
        let got = renyi(&rho, 0.5, &cfg).unwrap().expect_finite().unwrap();
        let expect = -(0.8f64.ln());
        assert_abs_diff_eq!(expect, 0.2231435513142097, epsilon = 1e-12);
        assert!(
            (got - expect).abs() <= 1e-3,
            "pure state: solver {got} vs closed {expect}"
        );
    }

    #[test]
    fn renyi_incoherent_is_zero() {
        let rho = DiagonalState::new(vec![0.75, 0.25]).unwrap().to_density();
        let cfg = SolverConfig {
            max_iter: 5000,
            ..SolverConfig::default()
        };
        for &alpha in &[0.5, 2.0] {
            let v = renyi(&rho, alpha, &cfg).unwrap().expect_finite().unwrap();
            assert!(v.abs() <= 1e-6, "α={alpha}: incoherent measured at {v}");
        }
    }

    #[test]
    fn variational_bound_never_exceeds_measure() {
        let rho = phase_mixture(&[0.9, 0.1]).unwrap();
        let cfg = SolverConfig {
            max_iter: 20_000,
            rel_tol: 1e-13,
            ..SolverConfig::default()
        };
        let alpha = 0.5;
        let measure = renyi(&rho, alpha, &cfg).unwrap().expect_finite().unwrap();
        let mut rng = seeded_rng(407);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let tau = random_density(2, &mut rng);
            let b = renyi_lower_bound(&rho, alpha, &tau).unwrap();
            assert!(b <= measure + 1e-6, "bound {b} exceeds measure {measure}");
            best = best.max(b);
        }
        assert!(
            measure - best <= 0.05,
            "random τ search stalled at {best} vs {measure}"
        );
    }

    #[test]
    fn variational_bound_tau_equals_incoherent_rho() {
        let rho = DiagonalState::new(vec![0.6, 0.4]).unwrap().to_density();
        let b = renyi_lower_bound(&rho, 0.5, &rho).unwrap();
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-10);
        assert!(renyi_lower_bound(&rho, 0.3, &rho).is_err());
        assert!(renyi_lower_bound(&rho, 1.0, &rho).is_err());
    }

    #[test]
    fn phase_mixture_shapes() {
        for d in [2usize, 3] {
            let uniform = phase_mixture(&vec![1.0 / d as f64; d]).unwrap();
            let dev = (uniform.matrix()
                - CMat::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0))
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
            assert!(dev < 1e-12, "uniform phase mixture ≠ I/{d}");
        }
        let pure = phase_mixture(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(pure.matrix()[(0, 1)].re, 0.5, epsilon = 1e-12);
        let skew = phase_mixture(&[0.9, 0.1]).unwrap();
        assert_abs_diff_eq!(skew.matrix()[(0, 1)].norm(), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(skew.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn additivity_exact_via_closed_form() {
        let a = DiagonalState::new(vec![0.5, 0.5]).unwrap().to_density();
        let b = DiagonalState::new(vec![0.9, 0.1]).unwrap().to_density();
        let (lhs, rhs) = additivity_check(&a, &b).unwrap();
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rhs, 0.0, epsilon = 1e-10);

        let p = phase_mixture(&[0.9, 0.1]).unwrap();
        let q = phase_mixture(&[0.7, 0.3]).unwrap();
        let (lhs, rhs) = additivity_check(&p, &q).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
        let expected_p = 0.5108256237659907;
        // D(p_mix‖q) = Σ_j 0.5 ln(0.5/q_j)
        let expected_q: f64 = [0.7f64, 0.3]
            .iter()
            .map(|&qj| 0.5 * (0.5f64 / qj).ln())
            .sum();
        assert_abs_diff_eq!(rhs, expected_p + expected_q, epsilon = 1e-9);

        let mut rng = seeded_rng(409);
        for _ in 0..10 {
            let r1 = random_density(2, &mut rng);
            let r2 = random_density(2, &mut rng);
            let (lhs, rhs) = additivity_check(&r1, &r2).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-9,
                "additivity broke: {lhs} vs {rhs}"
            );
        }
        // ρ⊗ρ doubles the measure
        let r = random_density(2, &mut rng);
        let (lhs, _) = additivity_check(&r, &r).unwrap();
        let single = rel_entropy(&r).unwrap().expect_finite().unwrap();
        assert_abs_diff_eq!(lhs, 2.0 * single, epsilon = 1e-9);
    }
}
