//! Separability membership decision and the partial-transpose comparison.
//!
//! The rule: run the measure for a prescribed number of iterations; declare
//! entanglement when the objective exceeds the promise threshold ε₁, declare
//! consistency with separability when it falls below the combined
//! discretization-plus-convergence threshold; anything between is
//! inconclusive. An entanglement verdict additionally records whether the
//! certified interval actually excludes zero, since at practical net sizes
//! the analytic discretization gap can dominate ε₁.

use serde::Serialize;

use crate::divergence::approximation_gap;
use crate::error::{Error, Result};
use crate::hermitian::DensityMatrix;
use crate::measures::min_sep_relative_entropy;
use crate::net::ComplexNet;
use crate::solver::SolverConfig;

/// Entanglement verdict threshold on the partial-transpose minimum
/// eigenvalue.
pub const DEFAULT_PPT_THRESHOLD: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    /// Objective small enough to be consistent with a separable state.
    SeparableConsistent,
    /// Objective exceeded ε₁.
    Entangled,
    Inconclusive,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::SeparableConsistent => write!(f, "separable-consistent"),
            Decision::Entangled => write!(f, "entangled"),
            Decision::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Everything recorded by one membership decision.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipVerdict {
    pub decision: Decision,
    /// Final measure objective.
    pub objective: f64,
    /// Discretization gap plus convergence allowance; objectives at or below
    /// are consistent with separability.
    pub threshold_low: f64,
    /// The promise threshold ε₁.
    pub threshold_high: f64,
    pub iterations_used: usize,
    pub ppt_min_eig: f64,
    pub ppt_decision: bool,
    /// Whether the certified interval of the measure excludes zero; an
    /// entangled verdict without this flag rests on the promise alone.
    pub h1_certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl MembershipVerdict {
    /// CLI convention: 0 separable-consistent, 1 entangled, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.decision {
            Decision::SeparableConsistent => 0,
            Decision::Entangled => 1,
            Decision::Inconclusive => 2,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("verdict serialization")
    }
}

/// Iterations needed so the convergence allowance fits under ε₁ next to the
/// discretization gap:
/// `⌈ln(d_A · net_size) / (ε₁ − gap(ε₂))⌉`.
pub fn required_iterations(
    eps1: f64,
    eps2: f64,
    rho: &DensityMatrix,
    net_size: usize,
) -> Result<usize> {
    let (da, _) = rho.require_dims()?;
    let gap = approximation_gap(eps2, rho)?;
    let denom = eps1 - gap;
    if denom <= 0.0 {
        return Err(Error::Infeasible(format!(
            "ε₁ = {eps1} does not exceed the discretization gap {gap:.6}; \
             refine the net before deciding membership"
        )));
    }
    Ok(((da as f64 * net_size as f64).ln() / denom).ceil() as usize)
}

/// Minimum eigenvalue of the partial transpose and the induced entanglement
/// verdict (`min_eig < threshold`).
pub fn ppt_test(rho: &DensityMatrix, threshold: f64) -> Result<(f64, bool)> {
    let dims = rho.require_dims()?;
    let pt = rho.op().partial_transpose(dims)?;
    let min_eig = pt.eig().min_eigenvalue();
    Ok((min_eig, min_eig < threshold))
}

/// Runs the measure for a fixed iteration budget and classifies the state.
///
/// The budget is `max(required_iterations, config.max_iter)`. When ε₁ is
/// below the discretization gap the prescribed budget does not exist; the
/// decision then falls back to `config.max_iter` and records a warning, and
/// the entangled branch still applies the promise rule verbatim.
pub fn decide_membership(
    rho: &DensityMatrix,
    net: &ComplexNet,
    eps1: f64,
    config: &SolverConfig,
) -> Result<MembershipVerdict> {
    if !(eps1 > 0.0) {
        return Err(Error::Parameter(format!("ε₁ must be > 0, got {eps1}")));
    }
    let (da, _) = rho.require_dims()?;
    let gap = approximation_gap(net.eps2_bound, rho)?;
    let (budget, mut warning) = match required_iterations(eps1, net.eps2_bound, rho, net.size()) {
        Ok(t) => (t.max(config.max_iter), None),
        Err(Error::Infeasible(msg)) => (
            config.max_iter,
            Some(format!("iteration budget undefined: {msg}")),
        ),
        Err(e) => return Err(e),
    };
    let cfg = SolverConfig {
        max_iter: budget,
        rel_tol: 0.0,
        ..config.clone()
    };
    let measure = min_sep_relative_entropy(rho, net, &cfg)?;
    let objective = measure.value.expect_finite()?;
    let iterations_used = measure.iterations;
    let threshold_low = gap + (da as f64 * net.size() as f64).ln() / iterations_used.max(1) as f64;

    let h1_certified = measure.interval.0 > 0.0;
    let decision = if objective > eps1 {
        if !h1_certified {
            let note = format!(
                "entangled by the promise rule (objective {objective:.6} > ε₁ = {eps1}), but \
                 the certified interval lower bound {:.6} does not exclude zero at ε₂ = {:.4}",
                measure.interval.0, net.eps2_bound
            );
            warning = Some(match warning {
                Some(w) => format!("{w}; {note}"),
                None => note,
            });
        }
        Decision::Entangled
    } else if objective <= threshold_low {
        Decision::SeparableConsistent
    } else {
        Decision::Inconclusive
    };

    let (ppt_min_eig, ppt_decision) = ppt_test(rho, DEFAULT_PPT_THRESHOLD)?;
    Ok(MembershipVerdict {
        decision,
        objective,
        threshold_low,
        threshold_high: eps1,
        iterations_used,
        ppt_min_eig,
        ppt_decision,
        h1_certified,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::CMat;
    use crate::net::complex_net;
    use crate::states::{maximally_entangled, product_density, random_density, seeded_rng};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn required_iterations_arithmetic() {
        // ε₂ = 0, ε₁ = 0.1, d_A = 4, net 256 → ⌈ln 1024 / 0.1⌉ = 70
        let rho = DensityMatrix::from_matrix(
            CMat::identity(8, 8) * Complex64::new(0.125, 0.0),
            Some((4, 2)),
        )
        .unwrap();
        assert_eq!(required_iterations(0.1, 0.0, &rho, 256).unwrap(), 70);
        // doubling the net size adds ln 2 / denom
        let t2 = required_iterations(0.1, 0.0, &rho, 512).unwrap();
        assert_eq!(t2, ((4.0f64 * 512.0).ln() / 0.1).ceil() as usize);
        // infeasible when ε₁ can't clear the gap
        let err = required_iterations(1e-6, 0.5, &rho, 256).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn ppt_bell_and_products() {
        let bell = DensityMatrix::from_pure(&maximally_entangled(2), Some((2, 2))).unwrap();
        let (min_eig, entangled) = ppt_test(&bell, DEFAULT_PPT_THRESHOLD).unwrap();
        assert_abs_diff_eq!(min_eig, -0.5, epsilon = 1e-10);
        assert!(entangled);

        let mut rng = seeded_rng(501);
        let prod =
            product_density(&random_density(2, &mut rng), &random_density(2, &mut rng)).unwrap();
        let (min_eig, entangled) = ppt_test(&prod, DEFAULT_PPT_THRESHOLD).unwrap();
        assert!(min_eig > -1e-12);
        assert!(!entangled);

        let mixed = DensityMatrix::from_matrix(
            CMat::identity(8, 8) * Complex64::new(0.125, 0.0),
            Some((4, 2)),
        )
        .unwrap();
        let (_, entangled) = ppt_test(&mixed, DEFAULT_PPT_THRESHOLD).unwrap();
        assert!(!entangled);
    }

    #[test]
    fn ppt_holds_on_random_separable_mixtures() {
        let mut rng = seeded_rng(503);
        for _ in 0..1000 {
            let terms = 1 + (rng.next_u64() % 8) as usize;
            let mut acc = CMat::zeros(4, 4);
            let mut weights = vec![0.0; terms];
            let mut tot = 0.0;
            for w in weights.iter_mut() {
                *w = (rng.next_u64() % 1000 + 1) as f64;
                tot += *w;
            }
            for &w in &weights {
                let a = random_density(2, &mut rng);
                let b = random_density(2, &mut rng);
                acc += a.matrix().kronecker(b.matrix()) * Complex64::new(w / tot, 0.0);
            }
            let sep = DensityMatrix::from_matrix(acc, Some((2, 2))).unwrap();
            let (_, entangled) = ppt_test(&sep, DEFAULT_PPT_THRESHOLD).unwrap();
            assert!(!entangled, "separable mixture flagged as entangled");
        }
    }

    use rand::RngCore;

    #[test]
    fn entangled_verdict_certified_with_fine_net() {
        // with a fine enough net the certified interval excludes zero and
        // the entangled verdict carries no warning
        let bell = DensityMatrix::from_pure(&maximally_entangled(2), Some((2, 2))).unwrap();
        let padded = crate::states::embed_padded(&bell, (4, 2), 1e-6).unwrap();
        let net = complex_net(32, 2).unwrap();
        let cfg = SolverConfig {
            max_iter: 1500,
            rel_tol: 0.0,
            ..SolverConfig::default()
        };
        let v = decide_membership(&padded, &net, 0.3, &cfg).unwrap();
        assert_eq!(v.decision, Decision::Entangled);
        assert!(
            v.h1_certified,
            "interval should exclude zero at n=32: objective {}, threshold_low {}",
            v.objective, v.threshold_low
        );
    }

    #[test]
    fn entangled_verdict_uncertified_at_coarse_net_records_warning() {
        let bell = DensityMatrix::from_pure(&maximally_entangled(2), Some((2, 2))).unwrap();
        let padded = crate::states::embed_padded(&bell, (4, 2), 1e-6).unwrap();
        let net = complex_net(8, 2).unwrap();
        let cfg = SolverConfig {
            max_iter: 800,
            rel_tol: 0.0,
            ..SolverConfig::default()
        };
        let v = decide_membership(&padded, &net, 0.3, &cfg).unwrap();
        assert_eq!(v.decision, Decision::Entangled);
        assert!(!v.h1_certified);
        assert!(
            v.warning.is_some(),
            "uncertified verdict must carry a warning"
        );
    }

    #[test]
    fn membership_on_mixed_state_is_separable_consistent() {
        let net = complex_net(8, 2).unwrap();
        let rho = DensityMatrix::from_matrix(
            CMat::identity(4, 4) * Complex64::new(0.25, 0.0),
            Some((2, 2)),
        )
        .unwrap();
        let cfg = SolverConfig {
            max_iter: 300,
            ..SolverConfig::default()
        };
        let v = decide_membership(&rho, &net, 0.3, &cfg).unwrap();
        assert_eq!(v.decision, Decision::SeparableConsistent);
        assert!(v.objective <= v.threshold_low);
        assert!(!v.ppt_decision);
        assert_eq!(v.exit_code(), 0);
    }

    #[test]
    fn membership_is_deterministic() {
        let net = complex_net(8, 2).unwrap();
        let mut rng = seeded_rng(505);
        let rho = random_density(4, &mut rng).with_dims((2, 2)).unwrap();
        let cfg = SolverConfig {
            max_iter: 120,
            ..SolverConfig::default()
        };
        let a = decide_membership(&rho, &net, 0.5, &cfg).unwrap();
        let b = decide_membership(&rho, &net, 0.5, &cfg).unwrap();
        assert_eq!(a.decision, b.decision);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.iterations_used, b.iterations_used);
    }

    #[test]
    fn verdict_json_has_fields() {
        let net = complex_net(8, 2).unwrap();
        let rho = DensityMatrix::from_matrix(
            CMat::identity(4, 4) * Complex64::new(0.25, 0.0),
            Some((2, 2)),
        )
        .unwrap();
        let cfg = SolverConfig {
            max_iter: 100,
            ..SolverConfig::default()
        };
        let v = decide_membership(&rho, &net, 0.3, &cfg).unwrap();
        let json: serde_json::Value = serde_json::from_str(&v.to_json_string()).unwrap();
        for key in [
            "decision",
            "objective",
            "threshold_low",
            "threshold_high",
            "iterations_used",
            "ppt_min_eig",
            "ppt_decision",
            "h1_certified",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
