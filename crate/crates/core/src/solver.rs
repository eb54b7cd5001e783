//! Generalized Arimoto-Blahut fixed-point iteration over block states.
//!
//! The state is a classical-quantum density matrix stored as one PSD block
//! per net index, `Σ_c Tr X_c = 1`. One step of the multiplicative update
//! replaces each block by `exp(log X_c − Ω_c/γ)` and divides the whole
//! collection by the global normalizer `κ = Σ_c Tr exp(log X_c − Ω_c/γ)`.
//!
//! The driver monitors the descent condition
//! `Tr ρ'(Ω[ρ'] − Ω[ρ]) ≤ γ D(ρ'‖ρ)` and, when adaptive stepping is on,
//! doubles γ and recomputes the step on a violation. A violation-free step
//! lets γ decay halfway back toward its configured base: the smallest γ
//! satisfying the condition shrinks as the iterate approaches the optimum,
//! and pinning γ at a transient worst-case value would shrink every later
//! step by the same factor. With uniform initialization the objective after
//! t accepted steps is within `γ_max · ln(d_A · |blocks|) / t` of the global
//! minimum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{CMat, Spectrum};

/// Per-block oracle output: one Hermitian matrix per block.
pub type OmegaBlocks = Vec<CMat>;

/// Solver knobs.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Step damping γ of the multiplicative update.
    pub gamma: f64,
    /// Hard iteration cap.
    pub max_iter: usize,
    /// Relative objective-change threshold over a 10-step window; 0 disables
    /// early stopping.
    pub rel_tol: f64,
    /// Eigenvalue floor applied before logarithms.
    pub eig_floor: f64,
    /// Double γ and retry a step whenever the descent condition fails.
    pub adaptive_gamma: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            max_iter: 5000,
            rel_tol: 1e-10,
            eig_floor: 1e-14,
            adaptive_gamma: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::Parameter(format!(
                "γ must be > 0, got {}",
                self.gamma
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Parameter("max_iter must be ≥ 1".into()));
        }
        if !(self.eig_floor > 0.0) {
            return Err(Error::Parameter("eig_floor must be > 0".into()));
        }
        Ok(())
    }
}

/// The solver state: one PSD block `X_c` per net index, total trace 1.
#[derive(Debug, Clone)]
pub struct BlockState {
    blocks: Vec<CMat>,
    block_dim: usize,
}

impl BlockState {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Validation("block state needs ≥ 1 block".into()));
        }
        let block_dim = blocks[0].nrows();
        let mut total = 0.0;
        for (c, b) in blocks.iter().enumerate() {
            if b.nrows() != block_dim || b.ncols() != block_dim {
                return Err(Error::Validation(format!(
                    "block {c} is {}x{}, expected {block_dim}x{block_dim}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            let min = Spectrum::of(b).min_eigenvalue();
            if min < -1e-10 {
                return Err(Error::Validation(format!(
                    "block {c} has eigenvalue {min:.3e} below -1e-10"
                )));
            }
            total += b.trace().re;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "blocks have total trace {total}, expected 1"
            )));
        }
        Ok(Self { blocks, block_dim })
    }

    /// The completely mixed classical-quantum state: `X_c = I/(d·count)`.
    pub fn uniform(block_dim: usize, count: usize) -> Self {
        let w = Complex64::new(1.0 / (block_dim * count) as f64, 0.0);
        let blocks = (0..count)
            .map(|_| CMat::identity(block_dim, block_dim) * w)
            .collect();
        Self { blocks, block_dim }
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMat>, block_dim: usize) -> Self {
        Self { blocks, block_dim }
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }
}

/// Everything recorded along one solver run.
///
/// `objective_per_step[k]` is the objective after `k + 1` update steps, so
/// the convergence bound with denominator `t` applies to entry `t − 1`.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub objective_per_step: Vec<f64>,
    pub gamma_per_step: Vec<f64>,
    pub descent_ok_per_step: Vec<bool>,
    pub descent_violations: usize,
    pub final_gap_bound: f64,
}

impl IterationTrace {
    pub fn steps(&self) -> usize {
        self.objective_per_step.len()
    }

    /// CSV with columns `step, objective, gamma, descent_ok`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["step", "objective", "gamma", "descent_ok"])
            .map_err(csv_err)?;
        for (i, ((obj, g), ok)) in self
            .objective_per_step
            .iter()
            .zip(&self.gamma_per_step)
            .zip(&self.descent_ok_per_step)
            .enumerate()
        {
            wtr.write_record([
                (i + 1).to_string(),
                obj.to_string(),
                g.to_string(),
                ok.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Factored block state carried across iterations: `X_c = Q_c e^{Λ_c} Q_c†`
/// with `Λ_c` the log-eigenvalues. Keeping the factorization saves one
/// eigendecomposition per block per step and makes `log X_c` exact.
struct FactoredBlocks {
    dim: usize,
    vecs: Vec<CMat>,
    log_evals: Vec<Vec<f64>>,
}

impl FactoredBlocks {
    fn from_state(state: &BlockState, eig_floor: f64) -> Self {
        let mut vecs = Vec::with_capacity(state.num_blocks());
        let mut log_evals = Vec::with_capacity(state.num_blocks());
        for b in state.blocks() {
            let spec = Spectrum::of(b);
            vecs.push(spec.eigenvectors.clone());
            log_evals.push(
                spec.eigenvalues
                    .iter()
                    .map(|&l| l.max(eig_floor).ln())
                    .collect(),
            );
        }
        Self {
            dim: state.block_dim(),
            vecs,
            log_evals,
        }
    }

    fn to_state(&self) -> BlockState {
        let blocks = (0..self.vecs.len())
            .map(|c| recombine(&self.vecs[c], &self.log_evals[c], f64::exp))
            .collect();
        BlockState::from_blocks_unchecked(blocks, self.dim)
    }

    /// One multiplicative update with oracle values `omega`.
    fn step(&self, omega: &[CMat], gamma: f64, eig_floor: f64, iter: usize) -> Result<Self> {
        let ln_floor = eig_floor.ln();
        let count = self.vecs.len();
        debug_assert_eq!(omega.len(), count);
        let inv_gamma = Complex64::new(1.0 / gamma, 0.0);
        let mut specs: Vec<Spectrum> = Vec::with_capacity(count);
        let mut shift = f64::NEG_INFINITY;
        for ((q, lev), om) in self.vecs.iter().zip(&self.log_evals).zip(omega) {
            let log_x = recombine(q, lev, |l| l.max(ln_floor));
            let arg = log_x - om * inv_gamma;
            let spec = Spectrum::of(&arg);
            shift = shift.max(spec.max_eigenvalue());
            specs.push(spec);
        }
        if !shift.is_finite() {
            return Err(Error::Numerical(format!(
                "update exponent diverged at iteration {iter}"
            )));
        }
        let kappa_shifted: f64 = specs
            .iter()
            .flat_map(|s| s.eigenvalues.iter())
            .map(|&m| (m - shift).exp())
            .sum();
        if !(kappa_shifted > 0.0) || !kappa_shifted.is_finite() {
            return Err(Error::Numerical(format!(
                "normalizer κ = {kappa_shifted} (shifted) at iteration {iter}"
            )));
        }
        let ln_kappa = kappa_shifted.ln() + shift;
        let vecs = specs.iter().map(|s| s.eigenvectors.clone()).collect();
        let log_evals = specs
            .iter()
            .map(|s| s.eigenvalues.iter().map(|&m| m - ln_kappa).collect())
            .collect();
        Ok(Self {
            dim: self.dim,
            vecs,
            log_evals,
        })
    }
}

/// `Q f(Λ) Q†`.
fn recombine(q: &CMat, evals: &[f64], f: impl Fn(f64) -> f64) -> CMat {
    let n = q.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in evals.iter().enumerate() {
        let w = f(lam);
        if w == 0.0 {
            continue;
        }
        let col = q.column(k);
        for j in 0..n {
            let cj = col[j].conj() * w;
            for i in 0..n {
                out[(i, j)] += col[i] * cj;
            }
        }
    }
    let adj = out.adjoint();
    (out + adj) * Complex64::new(0.5, 0.0)
}

/// One application of the multiplicative update to `state` with evaluated
/// oracle values `omega`.
pub fn f_map(state: &BlockState, omega: &[CMat], gamma: f64, eig_floor: f64) -> Result<BlockState> {
    if omega.len() != state.num_blocks() {
        return Err(Error::Validation(format!(
            "oracle returned {} blocks for a state with {}",
            omega.len(),
            state.num_blocks()
        )));
    }
    Ok(FactoredBlocks::from_state(state, eig_floor)
        .step(omega, gamma, eig_floor, 0)?
        .to_state())
}

/// Evaluates the descent condition
/// `lhs = Tr ρ'(Ω[ρ'] − Ω[ρ]) ≤ γ D(ρ'‖ρ) = rhs` for a candidate step.
pub fn check_descent(
    prev: &BlockState,
    next: &BlockState,
    mut omega: impl FnMut(&BlockState) -> Result<OmegaBlocks>,
    gamma: f64,
) -> Result<(f64, f64, bool)> {
    let om_prev = omega(prev)?;
    let om_next = omega(next)?;
    Ok(descent_parts(
        prev,
        next,
        &om_prev,
        &om_next,
        gamma,
        crate::hermitian::DEFAULT_EIG_FLOOR,
    ))
}

fn descent_parts(
    prev: &BlockState,
    next: &BlockState,
    omega_prev: &[CMat],
    omega_next: &[CMat],
    gamma: f64,
    eig_floor: f64,
) -> (f64, f64, bool) {
    let mut lhs = 0.0;
    for c in 0..next.num_blocks() {
        lhs += (&next.blocks()[c] * (&omega_next[c] - &omega_prev[c]))
            .trace()
            .re;
    }
    // block-wise D(next‖prev) of the classical-quantum states
    let mut dv = 0.0;
    for c in 0..next.num_blocks() {
        let xn = &next.blocks()[c];
        let spec_n = Spectrum::of(xn);
        let ent: f64 = spec_n
            .eigenvalues
            .iter()
            .map(|&l| if l > 0.0 { l * l.ln() } else { 0.0 })
            .sum();
        let spec_p = Spectrum::of(&prev.blocks()[c]);
        let log_p = recombine(&spec_p.eigenvectors, &spec_p.eigenvalues, |l| {
            l.max(eig_floor).ln()
        });
        dv += ent - (xn * log_p).trace().re;
    }
    let rhs = gamma * dv;
    (lhs, rhs, lhs <= rhs + 1e-9)
}

/// Runs the iteration until `max_iter` or until the objective change over a
/// 10-step window falls below `rel_tol` relatively. Returns the best state
/// seen together with the full trace.
///
/// `objective` receives the state and the oracle values already evaluated at
/// it, so `Σ_c Tr X_c Ω_c` style objectives come for free.
pub fn minimize(
    mut omega: impl FnMut(&BlockState) -> Result<OmegaBlocks>,
    mut objective: impl FnMut(&BlockState, &OmegaBlocks) -> f64,
    init: &BlockState,
    config: &SolverConfig,
) -> Result<(BlockState, IterationTrace)> {
    config.validate()?;
    let floor = config.eig_floor;
    let mut trace = IterationTrace::default();
    let mut gamma = config.gamma;

    let mut factored = FactoredBlocks::from_state(init, floor);
    let mut state = init.clone();
    let mut omega_cur = omega(&state)?;
    let obj_init = objective(&state, &omega_cur);
    let mut best_state = state.clone();
    let mut best_obj = obj_init;

    let mut max_gamma = gamma;
    let mut completed = 0usize;
    for t in 1..=config.max_iter {
        let mut retried = false;
        let (cand_factored, cand_state, omega_cand, step_ok) = loop {
            let cf = factored.step(&omega_cur, gamma, floor, t)?;
            let cs = cf.to_state();
            let oc = omega(&cs)?;
            if !config.adaptive_gamma {
                break (cf, cs, oc, true);
            }
            let (lhs, rhs, ok) = descent_parts(&state, &cs, &omega_cur, &oc, gamma, floor);
            if ok {
                break (cf, cs, oc, true);
            }
            retried = true;
            trace.descent_violations += 1;
            gamma *= 2.0;
            max_gamma = max_gamma.max(gamma);
            if gamma > 1e15 {
                return Err(Error::Numerical(format!(
                    "descent condition unsatisfiable at iteration {t}: lhs={lhs}, rhs={rhs}"
                )));
            }
        };
        if config.adaptive_gamma && !retried {
            gamma = (0.5 * gamma).max(config.gamma);
        }
        factored = cand_factored;
        state = cand_state;
        omega_cur = omega_cand;
        completed = t;

        let obj = objective(&state, &omega_cur);
        if !obj.is_finite() {
            return Err(Error::Numerical(format!(
                "objective became {obj} at iteration {t}"
            )));
        }
        trace.objective_per_step.push(obj);
        trace.gamma_per_step.push(gamma);
        trace.descent_ok_per_step.push(step_ok);
        if obj < best_obj {
            best_obj = obj;
            best_state = state.clone();
        }

        #[cfg(debug_assertions)]
        {
            let total = state.total_trace();
            debug_assert!(
                (total - 1.0).abs() < 1e-9,
                "trace drifted to {total} at iteration {t}"
            );
            if t % 97 == 0 {
                debug_assert!(
                    BlockState::new(state.blocks().to_vec()).is_ok(),
                    "block state invariants violated at iteration {t}"
                );
            }
        }

        if t > 10 {
            let prev = trace.objective_per_step[t - 11];
            if (obj - prev).abs() < config.rel_tol * obj.abs() {
                break;
            }
        }
    }

    let d = (init.block_dim() * init.num_blocks()) as f64;
    trace.final_gap_bound = max_gamma * d.ln() / completed.max(1) as f64;
    Ok((best_state, trace))
}
