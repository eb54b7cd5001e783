//! Net-restricted divergence minimization over the separable model class,
//! closed forms for special states, and hypothesis-testing exponent curves.
//!
//! The model class fixes a finite set of pure states `{ψ_c}` on the B
//! system and optimizes the A-side blocks of `σ = Σ_c X_c ⊗ |ψ_c⟩⟨ψ_c|`.
//! The minimized quantity `min_σ D(σ‖ρ)` (or its Rényi analog) upper-bounds
//! the unrestricted measure, and the discretization certificate from
//! [`crate::divergence::approximation_gap`] brackets the true value from
//! below.

use num_complex::Complex64;
use serde::Serialize;

use crate::divergence::{approximation_gap, DivergenceValue};
use crate::error::{Error, Result};
use crate::hermitian::{CMat, DensityMatrix, HermitianOperator, Spectrum};
use crate::net::ComplexNet;
use crate::solver::{minimize, BlockState, IterationTrace, OmegaBlocks, SolverConfig};
use crate::states::validate_distribution;

/// Trace objectives below this are reported as an infinite measure.
const TRACE_UNDERFLOW: f64 = 1e-290;

/// Outcome of one measure evaluation.
#[derive(Debug, Clone)]
pub struct MeasureResult {
    /// Converged measure value in nats (infinite marker possible for α ≠ 1).
    pub value: DivergenceValue,
    /// Divergence order; 1 is relative entropy.
    pub alpha: f64,
    /// Update steps actually run.
    pub iterations: usize,
    /// Optimization-gap certificate `γ ln(d_A |D|)/t`. For α = 1 it bounds
    /// `value − min`, for α ≠ 1 it bounds the trace-objective gap.
    pub gap_bound: f64,
    /// Certified interval containing the unrestricted measure (α = 1) or the
    /// net-restricted optimum (α ≠ 1).
    pub interval: (f64, f64),
    /// The assembled minimizing separable state `Σ_c X_c ⊗ |ψ_c⟩⟨ψ_c|`.
    pub sep_state: DensityMatrix,
    /// Covering certificate of the net used.
    pub eps2_used: f64,
    /// Whether the bipartition was transposed so the A side is the larger.
    pub swapped: bool,
    /// Full iteration record.
    pub trace: IterationTrace,
}

#[derive(Serialize)]
struct MeasureResultFile {
    value: Option<f64>,
    infinite: bool,
    alpha: f64,
    iterations: usize,
    gap_bound: f64,
    interval: [Option<f64>; 2],
    eps2: f64,
    swapped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sep_state: Option<crate::hermitian::MatrixFile>,
}

impl MeasureResult {
    pub fn to_json_string(&self, include_sep_state: bool) -> String {
        let fin = |x: f64| if x.is_finite() { Some(x) } else { None };
        serde_json::to_string(&MeasureResultFile {
            value: self.value.value(),
            infinite: self.value.is_infinite(),
            alpha: self.alpha,
            iterations: self.iterations,
            gap_bound: self.gap_bound,
            interval: [fin(self.interval.0), fin(self.interval.1)],
            eps2: self.eps2_used,
            swapped: self.swapped,
            sep_state: include_sep_state
                .then(|| self.sep_state.op().to_matrix_file(self.sep_state.dims())),
        })
        .expect("measure serialization")
    }
}

/// `Σ_c X_c ⊗ |ψ_c⟩⟨ψ_c|` as a raw matrix.
pub(crate) fn assemble_raw(blocks: &[CMat], projectors: &[CMat], da: usize, db: usize) -> CMat {
    let dim = da * db;
    let mut out = CMat::zeros(dim, dim);
    for (x, p) in blocks.iter().zip(projectors) {
        for a in 0..da {
            for ap in 0..da {
                let xv = x[(a, ap)];
                if xv.norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..db {
                    for bp in 0..db {
                        out[(a * db + b, ap * db + bp)] += xv * p[(b, bp)];
                    }
                }
            }
        }
    }
    out
}

/// `Tr_B[M (I_A ⊗ P)]` for each projector, hermitized.
fn contract_b(m: &CMat, p: &CMat, da: usize, db: usize) -> CMat {
    let mut v = CMat::zeros(da, da);
    for a in 0..da {
        for ap in 0..da {
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..db {
                for bpp in 0..db {
                    s += m[(a * db + b, ap * db + bpp)] * p[(bpp, b)];
                }
            }
            v[(a, ap)] = s;
        }
    }
    let adj = v.adjoint();
    (v + adj) * Complex64::new(0.5, 0.0)
}

fn hermitize(m: CMat) -> CMat {
    let adj = m.adjoint();
    (m + adj) * Complex64::new(0.5, 0.0)
}

/// Assembles the separable state `Σ_c X_c ⊗ |ψ_c⟩⟨ψ_c|` of a solver state
/// over a net.
pub fn assemble_sep_state(state: &BlockState, net: &ComplexNet) -> Result<DensityMatrix> {
    if state.num_blocks() != net.size() {
        return Err(Error::Validation(format!(
            "state has {} blocks but net has {} points",
            state.num_blocks(),
            net.size()
        )));
    }
    let da = state.block_dim();
    let db = net.d;
    let m = assemble_raw(state.blocks(), &net.projectors(), da, db);
    DensityMatrix::from_matrix(m, Some((da, db)))
}

/// Per-block relative-entropy oracle:
/// `V_c = Tr_B[(log Σ X ⊗ P − log ρ)(I_A ⊗ P_c)]`.
///
/// Satisfies `Σ_c Tr X_c V_c = D(Σ X ⊗ P ‖ ρ)` on floored spectra.
pub fn v_map(state: &BlockState, net: &ComplexNet, rho: &DensityMatrix) -> Result<Vec<CMat>> {
    let (da, db) = oriented_dims(state, net, rho)?;
    let log_rho = rho.op().log_floored(crate::hermitian::DEFAULT_EIG_FLOOR)?;
    let projectors = net.projectors();
    rel_entropy_oracle(
        state,
        &projectors,
        log_rho.matrix(),
        da,
        db,
        crate::hermitian::DEFAULT_EIG_FLOOR,
    )
}

/// Per-block Rényi oracle (without the sign factor):
/// `V_{α,c} = Tr_B[ρ^s (ρ^s Σ X⊗P ρ^s)^{α−1} ρ^s (I_A ⊗ P_c)]`, `s = (1−α)/2α`.
///
/// Satisfies `Σ_c Tr X_c V_{α,c} = Tr (ρ^s Σ X⊗P ρ^s)^α`.
pub fn v_alpha_map(
    state: &BlockState,
    net: &ComplexNet,
    rho: &DensityMatrix,
    alpha: f64,
) -> Result<Vec<CMat>> {
    check_alpha(alpha)?;
    let (da, db) = oriented_dims(state, net, rho)?;
    let floor = crate::hermitian::DEFAULT_EIG_FLOOR;
    let s = (1.0 - alpha) / (2.0 * alpha);
    let rho_s = rho.op().pow_floored(s, floor)?;
    let projectors = net.projectors();
    let (v, _) = renyi_oracle(state, &projectors, rho_s.matrix(), alpha, da, db, floor)?;
    Ok(v)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 {
        return Err(Error::Parameter(format!(
            "Rényi order must satisfy α > 0, α ≠ 1 (got {alpha})"
        )));
    }
    Ok(())
}

fn oriented_dims(
    state: &BlockState,
    net: &ComplexNet,
    rho: &DensityMatrix,
) -> Result<(usize, usize)> {
    let (da, db) = rho.require_dims()?;
    if state.block_dim() != da || net.d != db || state.num_blocks() != net.size() {
        return Err(Error::Validation(format!(
            "state ({} blocks of dim {}) and net (dim {}, {} points) do not match ρ dims ({da},{db})",
            state.num_blocks(),
            state.block_dim(),
            net.d,
            net.size()
        )));
    }
    Ok((da, db))
}

fn rel_entropy_oracle(
    state: &BlockState,
    projectors: &[CMat],
    log_rho: &CMat,
    da: usize,
    db: usize,
    floor: f64,
) -> Result<Vec<CMat>> {
    let sigma = assemble_raw(state.blocks(), projectors, da, db);
    let spec = Spectrum::of(&sigma);
    let log_sigma = spec.recombine(
        &spec
            .eigenvalues
            .iter()
            .map(|&l| l.max(floor).ln())
            .collect::<Vec<_>>(),
    );
    let m = log_sigma - log_rho;
    Ok(projectors
        .iter()
        .map(|p| contract_b(&m, p, da, db))
        .collect())
}

fn renyi_oracle(
    state: &BlockState,
    projectors: &[CMat],
    rho_s: &CMat,
    alpha: f64,
    da: usize,
    db: usize,
    floor: f64,
) -> Result<(Vec<CMat>, f64)> {
    let sigma = assemble_raw(state.blocks(), projectors, da, db);
    let z = hermitize(rho_s * sigma * rho_s);
    let spec = Spectrum::of(&z);
    let trace_alpha: f64 = spec
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).powf(alpha))
        .sum();
    let w = if alpha > 1.0 {
        spec.recombine(
            &spec
                .eigenvalues
                .iter()
                .map(|&l| l.max(0.0).powf(alpha - 1.0))
                .collect::<Vec<_>>(),
        )
    } else {
        spec.recombine(
            &spec
                .eigenvalues
                .iter()
                .map(|&l| l.max(floor).powf(alpha - 1.0))
                .collect::<Vec<_>>(),
        )
    };
    let g = hermitize(rho_s * w * rho_s);
    let v = projectors
        .iter()
        .map(|p| contract_b(&g, p, da, db))
        .collect();
    Ok((v, trace_alpha))
}

/// Relative-entropy solve against explicit projectors; dims are taken from ρ
/// as-is (no bipartition swap). Shared by the bipartite measures and the
/// coherence specialization.
pub(crate) fn solve_rel_entropy_with_projectors(
    rho: &DensityMatrix,
    projectors: &[CMat],
    config: &SolverConfig,
) -> Result<(f64, BlockState, IterationTrace)> {
    let (da, db) = rho.require_dims()?;
    let floor = config.eig_floor;
    let log_rho = rho.op().log_floored(floor)?;
    let cfg = SolverConfig {
        gamma: 1.0,
        adaptive_gamma: false,
        ..config.clone()
    };
    let init = BlockState::uniform(da, projectors.len());
    let omega = |s: &BlockState| rel_entropy_oracle(s, projectors, log_rho.matrix(), da, db, floor);
    let objective = |s: &BlockState, om: &OmegaBlocks| trace_pairing(s, om);
    let (best, trace) = minimize(omega, objective, &init, &cfg)?;
    let best_obj = trace
        .objective_per_step
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x));
    Ok((best_obj, best, trace))
}

pub(crate) struct RenyiSolve {
    pub value: DivergenceValue,
    pub trace_objective: f64,
    pub state: BlockState,
    pub trace: IterationTrace,
}

/// Rényi solve against explicit projectors with adaptive step damping.
pub(crate) fn solve_renyi_with_projectors(
    rho: &DensityMatrix,
    projectors: &[CMat],
    alpha: f64,
    config: &SolverConfig,
) -> Result<RenyiSolve> {
    check_alpha(alpha)?;
    let (da, db) = rho.require_dims()?;
    let floor = config.eig_floor;
    let s = (1.0 - alpha) / (2.0 * alpha);
    let rho_s = rho.op().pow_floored(s, floor)?;
    let sgn = if alpha > 1.0 { 1.0 } else { -1.0 };
    let cfg = config.clone();
    let init = BlockState::uniform(da, projectors.len());
    let omega = |st: &BlockState| -> Result<OmegaBlocks> {
        let (v, _) = renyi_oracle(st, projectors, rho_s.matrix(), alpha, da, db, floor)?;
        Ok(v.into_iter()
            .map(|m| m * Complex64::new(sgn, 0.0))
            .collect())
    };
    let objective = |s: &BlockState, om: &OmegaBlocks| trace_pairing(s, om);
    let (best, trace) = minimize(omega, objective, &init, &cfg)?;
    let best_obj = trace
        .objective_per_step
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x));
    // signed objective back to the positive trace quantity
    let trace_objective = sgn * best_obj;
    let value = if alpha < 1.0 && trace_objective <= TRACE_UNDERFLOW {
        DivergenceValue::infinite(alpha)
    } else if trace_objective <= 0.0 || !trace_objective.is_finite() {
        return Err(Error::Numerical(format!(
            "trace objective degenerated to {trace_objective}"
        )));
    } else {
        DivergenceValue::finite(alpha, trace_objective.ln() / (alpha - 1.0))
    };
    Ok(RenyiSolve {
        value,
        trace_objective,
        state: best,
        trace,
    })
}

fn trace_pairing(state: &BlockState, omega: &OmegaBlocks) -> f64 {
    state
        .blocks()
        .iter()
        .zip(omega)
        .map(|(x, o)| (x * o).trace().re)
        .sum()
}

/// Orients ρ so the A side is the larger subsystem and checks the net.
fn orient(rho: &DensityMatrix, net: &ComplexNet) -> Result<(DensityMatrix, bool)> {
    let (da, db) = rho.require_dims()?;
    let (oriented, swapped) = if db > da {
        (rho.swap_subsystems()?, true)
    } else {
        (rho.clone(), false)
    };
    let (_, db) = oriented.require_dims()?;
    if net.d != db {
        return Err(Error::Validation(format!(
            "net dimension {} does not match the smaller subsystem dimension {db}",
            net.d
        )));
    }
    Ok((oriented, swapped))
}

/// Minimum relative entropy from the net-restricted separable class to ρ:
/// the multiplicative update with the relative-entropy oracle, γ = 1, and
/// uniform initialization.
pub fn min_sep_relative_entropy(
    rho: &DensityMatrix,
    net: &ComplexNet,
    config: &SolverConfig,
) -> Result<MeasureResult> {
    let (oriented, swapped) = orient(rho, net)?;
    let projectors = net.projectors();
    let (value, state, trace) = solve_rel_entropy_with_projectors(&oriented, &projectors, config)?;
    let iterations = trace.steps();
    let gap_bound = trace.final_gap_bound;
    let ngr = approximation_gap(net.eps2_bound, &oriented)?;
    let sep_state = assemble_sep_state(&state, net)?;
    let sep_state = if swapped {
        sep_state.swap_subsystems()?
    } else {
        sep_state
    };
    Ok(MeasureResult {
        value: DivergenceValue::finite(1.0, value),
        alpha: 1.0,
        iterations,
        gap_bound,
        interval: (value - gap_bound - ngr, value),
        sep_state,
        eps2_used: net.eps2_bound,
        swapped,
        trace,
    })
}

/// Minimum sandwiched Rényi divergence from the net-restricted separable
/// class to ρ, by the signed-oracle update with adaptive step damping.
pub fn min_sep_renyi(
    rho: &DensityMatrix,
    net: &ComplexNet,
    alpha: f64,
    config: &SolverConfig,
) -> Result<MeasureResult> {
    let (oriented, swapped) = orient(rho, net)?;
    let projectors = net.projectors();
    let solve = solve_renyi_with_projectors(&oriented, &projectors, alpha, config)?;
    let iterations = solve.trace.steps();
    let gap_bound = solve.trace.final_gap_bound;
    let interval = match solve.value.value() {
        Some(v) => {
            let lower = if alpha < 1.0 {
                (solve.trace_objective + gap_bound).ln() / (alpha - 1.0)
            } else if solve.trace_objective > gap_bound {
                (solve.trace_objective - gap_bound).ln() / (alpha - 1.0)
            } else {
                f64::NEG_INFINITY
            };
            (lower, v)
        }
        None => (f64::INFINITY, f64::INFINITY),
    };
    let sep_state = assemble_sep_state(&solve.state, net)?;
    let sep_state = if swapped {
        sep_state.swap_subsystems()?
    } else {
        sep_state
    };
    Ok(MeasureResult {
        value: solve.value,
        alpha,
        iterations,
        gap_bound,
        interval,
        sep_state,
        eps2_used: net.eps2_bound,
        swapped,
        trace: solve.trace,
    })
}

/// Closed form for pure states with the given Schmidt weights:
/// `(α/(α−1)) ln max_i p_i`, valid for `α ∈ (0,1)` (the measure is infinite
/// for α > 1 on pure entangled states).
pub fn pure_state_renyi(schmidt_weights: &[f64], alpha: f64) -> Result<f64> {
    validate_distribution(schmidt_weights)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "pure-state closed form is valid for α ∈ (0,1), got {alpha}"
        )));
    }
    let pmax = schmidt_weights.iter().cloned().fold(0.0f64, f64::max);
    Ok(alpha / (alpha - 1.0) * pmax.ln())
}

/// Measure of a maximally correlated state via its coefficient matrix: the
/// bipartite minimization collapses to the single-system incoherent one.
pub fn maxcorr_rel_entropy(theta: &HermitianOperator) -> Result<DivergenceValue> {
    let rho_theta = DensityMatrix::new(theta.clone(), None)?;
    crate::coherence::rel_entropy(&rho_theta)
}

/// Error-exponent trade-off curves evaluated from measure samples on an
/// α-grid.
#[derive(Debug, Clone)]
pub struct ExponentCurve {
    pub r_grid: Vec<f64>,
    /// `sup_{α<1} [(1−α)E_α − αr]/(1−α)` over the sampled grid.
    pub achievability: Vec<f64>,
    /// `inf_{α>1} [(1−α)E_α − αr]/(1−α)` over the sampled grid.
    pub strong_converse: Vec<f64>,
    pub alpha_grid: Vec<f64>,
}

/// Default α-grid: `{0.05k}_{k=1..19} ∪ {1.05, 1.1, 1.25, 1.5, 2, 3}`.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (1..=19).map(|k| 0.05 * k as f64).collect();
    g.extend_from_slice(&[1.05, 1.1, 1.25, 1.5, 2.0, 3.0]);
    g
}

/// Builds both exponent curves from `(α, E_α)` samples. The grid must cover
/// both sides of 1; infinite samples propagate into the achievability sup
/// and are skipped by the strong-converse inf.
pub fn exponent_curve(samples: &[(f64, f64)], r_grid: &[f64]) -> Result<ExponentCurve> {
    if r_grid.is_empty() {
        return Err(Error::Parameter("empty rate grid".into()));
    }
    let below: Vec<(f64, f64)> = samples.iter().cloned().filter(|&(a, _)| a < 1.0).collect();
    let above: Vec<(f64, f64)> = samples.iter().cloned().filter(|&(a, _)| a > 1.0).collect();
    if below.is_empty() || above.is_empty() {
        return Err(Error::Parameter(
            "α-grid must contain samples on both sides of 1".into(),
        ));
    }
    let achievability = r_grid
        .iter()
        .map(|&r| {
            below
                .iter()
                .map(|&(a, e)| e - a * r / (1.0 - a))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let strong_converse = r_grid
        .iter()
        .map(|&r| {
            above
                .iter()
                .filter(|&&(_, e)| e.is_finite())
                .map(|&(a, e)| e + a * r / (a - 1.0))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(ExponentCurve {
        r_grid: r_grid.to_vec(),
        achievability,
        strong_converse,
        alpha_grid: samples.iter().map(|&(a, _)| a).collect(),
    })
}
