//! Acceptance suite: every release-gating property, one test per criterion,
//! each printing a PASS line with the measured numbers.
//!
//! Expected values are frozen from independent oracles (classical KL/Rényi
//! formulas, brute-force spectra, closed forms), never from the code paths
//! they check.

use std::sync::OnceLock;

use entdetect::coherence;
use entdetect::divergence::sandwiched_renyi;
use entdetect::experiment::{boundary_scan, rho_p_lambda_delta, sweep_lambda, ExperimentSpec};
use entdetect::hermitian::{CMat, DensityMatrix, HermitianOperator};
use entdetect::measures::{
    default_alpha_grid, exponent_curve, min_sep_relative_entropy, min_sep_renyi, MeasureResult,
};
use entdetect::membership::{decide_membership, ppt_test, Decision, DEFAULT_PPT_THRESHOLD};
use entdetect::net::{complex_net, eps2_bound, real_net};
use entdetect::solver::SolverConfig;
use entdetect::states::{
    embed_padded, maximally_entangled, phase_mixed_bipartite, product_density, random_density,
    random_hermitian, seeded_rng,
};
use entdetect::witness::{extract_witness, validate_witness};
use num_complex::Complex64;

/// Classical KL divergence in nats (independent oracle).
fn classical_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 })
        .sum()
}

/// Classical Rényi divergence in nats (independent oracle).
fn classical_renyi(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| a.powf(alpha) * b.powf(1.0 - alpha))
        .sum();
    s.ln() / (alpha - 1.0)
}

/// The 2⊗2 maximally correlated instance with p = (0.9, 0.1) on the n = 16
/// net, run for exactly 10⁴ steps. Shared by criteria 1 and 3.
fn maxcorr_instance() -> &'static MeasureResult {
    static RUN: OnceLock<MeasureResult> = OnceLock::new();
    RUN.get_or_init(|| {
        let rho = phase_mixed_bipartite(&[0.9, 0.1]).expect("instance state");
        let net = complex_net(16, 2).expect("net");
        let cfg = SolverConfig {
            max_iter: 10_000,
            rel_tol: 0.0,
            ..SolverConfig::default()
        };
        min_sep_relative_entropy(&rho, &net, &cfg).expect("measure run")
    })
}

#[test]
fn criterion_1_maxcorr_closed_form() {
    let started = std::time::Instant::now();
    let target = classical_kl(&[0.5, 0.5], &[0.9, 0.1]);
    assert!((target - 0.5108256237659907).abs() < 1e-12);
    let m = maxcorr_instance();
    let value = m.value.value().expect("finite measure");
    let err = (value - target).abs();
    assert!(
        err < 0.01,
        "criterion 1 FAIL: value {value} vs closed form {target} (err {err:.3e})"
    );
    assert_eq!(m.iterations, 10_000);
    // restriction dominance: the net-restricted minimum cannot undershoot
    // the exact measure, here known in closed form
    assert!(
        value >= target - 1e-9,
        "criterion 1 FAIL: net-restricted value {value} fell below the exact measure {target}"
    );
    // the closed form agrees with the coefficient-matrix route
    let theta = coherence::phase_mixture(&[0.9, 0.1]).unwrap();
    let via_maxcorr = entdetect::measures::maxcorr_rel_entropy(theta.op())
        .unwrap()
        .expect_finite()
        .unwrap();
    assert!((via_maxcorr - target).abs() < 1e-9);
    println!(
        "acceptance criterion 1 (maximally correlated closed form): PASS — \
         value {value:.12} vs D(p_mix||p) {target:.12}, |err| {err:.3e} < 0.01, \
         10^4 iterations in {:.1?}",
        started.elapsed()
    );
}

#[test]
fn criterion_2_pure_state_renyi() {
    let started = std::time::Instant::now();
    let bell = DensityMatrix::from_pure(&maximally_entangled(2), Some((2, 2))).unwrap();
    let net = complex_net(16, 2).unwrap();
    let cfg = SolverConfig {
        max_iter: 10_000,
        rel_tol: 1e-12,
        ..SolverConfig::default()
    };
    let m = min_sep_renyi(&bell, &net, 0.5, &cfg).unwrap();
    let value = m.value.value().expect("finite measure");
    let target = 2.0f64.ln();
    let err = (value - target).abs();
    assert!(
        err < 0.02,
        "criterion 2 FAIL: value {value} vs ln 2 {target} (err {err:.3e})"
    );
    println!(
        "acceptance criterion 2 (pure-state Rényi closed form): PASS — \
         α=1/2 Bell value {value:.12} vs ln 2 {target:.12}, |err| {err:.3e} < 0.02, \
         {} iterations in {:.1?}",
        m.iterations,
        started.elapsed()
    );
}

#[test]
fn criterion_3_convergence_bound() {
    let target = classical_kl(&[0.5, 0.5], &[0.9, 0.1]);
    let m = maxcorr_instance();
    let bound = |t: usize| 512.0f64.ln() / t as f64;
    let mut violations = 0usize;
    // the stated checkpoints plus every recorded step from t = 100 on
    for (idx, &obj) in m.trace.objective_per_step.iter().enumerate() {
        let t = idx + 1;
        if t >= 100 && obj - target > bound(t) {
            violations += 1;
        }
    }
    for &t in &[100usize, 200, 500, 1000, 5000] {
        let obj = m.trace.objective_per_step[t - 1];
        assert!(
            obj - target <= bound(t),
            "criterion 3 FAIL at t={t}: objective gap {:.3e} > ln(512)/t = {:.3e}",
            obj - target,
            bound(t)
        );
    }
    assert_eq!(
        violations, 0,
        "criterion 3 FAIL: {violations} bound violations"
    );
    println!(
        "acceptance criterion 3 (convergence-bound conformance): PASS — \
         objective(t) − {target:.5} ≤ ln(512)/t at t ∈ {{100,200,500,1000,5000}} and all t ≥ 100, \
         worst gap at t=5000: {:.3e} ≤ {:.3e}",
        m.trace.objective_per_step[4999] - target,
        bound(5000)
    );
}

#[test]
fn criterion_4_net_laws() {
    // exact size laws
    let n16 = complex_net(16, 2).unwrap();
    assert_eq!(
        n16.size(),
        256,
        "criterion 4 FAIL: |D_16,2| = {}",
        n16.size()
    );
    let n8 = complex_net(8, 3).unwrap();
    assert_eq!(n8.size(), 4096, "criterion 4 FAIL: |D_8,3| = {}", n8.size());

    // sampled ε₂ below the analytic bound
    let est16 = n16.estimate_eps2(10_000, 424242);
    assert!(
        est16 <= eps2_bound(16, 2),
        "criterion 4 FAIL: sampled ε₂ {est16} > bound {}",
        eps2_bound(16, 2)
    );
    let est8 = n8.estimate_eps2(10_000, 424243);
    assert!(
        est8 <= eps2_bound(8, 3),
        "criterion 4 FAIL: sampled ε₂ {est8} > bound {}",
        eps2_bound(8, 3)
    );

    // circle min-max inner product to 1e-12
    for &n in &[8usize, 16] {
        let net = real_net(n, 1).unwrap();
        let got = net.min_max_inner_product_d1(128).unwrap();
        let expect = (std::f64::consts::PI / n as f64).cos();
        assert!(
            (got - expect).abs() < 1e-12,
            "criterion 4 FAIL: circle n={n} min-max {got} vs cos(π/n) {expect}"
        );
    }
    println!(
        "acceptance criterion 4 (δ-net laws): PASS — sizes 16²=256 and 8⁴=4096 exact; \
         sampled ε₂ {est16:.4} ≤ {:.4} (n=16,d=2) and {est8:.4} ≤ {:.4} (n=8,d=3); \
         circle min-max = cos(π/n) to 1e-12",
        eps2_bound(16, 2),
        eps2_bound(8, 3)
    );
}

#[test]
fn criterion_5_witness_guarantees() {
    let started = std::time::Instant::now();
    let rho = rho_p_lambda_delta(0.5, 0.9, 0.01).unwrap();
    let net = complex_net(16, 2).unwrap();
    let cfg = SolverConfig {
        max_iter: 6000,
        rel_tol: 1e-12,
        ..SolverConfig::default()
    };
    let m = min_sep_relative_entropy(&rho, &net, &cfg).unwrap();
    let w = extract_witness(&rho, &m).unwrap();
    assert!(
        w.tr_rho_w < 0.0,
        "criterion 5 FAIL: Tr ρW = {} not negative",
        w.tr_rho_w
    );
    let report = validate_witness(&w, 10_000, 2024).unwrap();
    assert_eq!(
        report.violations, 0,
        "criterion 5 FAIL: {} margins below −slack {}",
        report.violations, w.slack
    );
    assert!(report.min_margin >= -w.slack);

    // Pythagorean identity on 100 hyperplane points
    let dim = rho.dim();
    let sigma = &w.sigma_star;
    let d_star = entdetect::divergence::relative_entropy(sigma, &rho)
        .unwrap()
        .expect_finite()
        .unwrap();
    let min_eig = sigma.min_eigenvalue().max(1e-12);
    let id = CMat::identity(dim, dim);
    let mut rng = seeded_rng(515);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    while checked < 100 {
        let h = random_hermitian(dim, &mut rng).into_matrix();
        let h = &h - &id * (h.trace() / Complex64::new(dim as f64, 0.0));
        let wmat = w.w.matrix();
        let hw = (&h * wmat).trace().re;
        let ww = (wmat * wmat).trace().re;
        let wtr = wmat.trace().re;
        let det = dim as f64 * ww - wtr * wtr;
        assert!(det.abs() > 1e-12);
        let x = -hw * wtr / det;
        let y = hw * dim as f64 / det;
        let delta = &h - &id * Complex64::new(x, 0.0) - wmat * Complex64::new(y, 0.0);
        let norm = HermitianOperator::new(delta.clone()).unwrap().op_norm();
        if norm < 1e-12 {
            continue;
        }
        let t = 0.3 * min_eig / norm;
        let sp = sigma.matrix() + delta * Complex64::new(t, 0.0);
        let sigma_prime = match DensityMatrix::from_matrix(sp, sigma.dims()) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let lhs = entdetect::divergence::relative_entropy(&sigma_prime, &rho)
            .unwrap()
            .expect_finite()
            .unwrap();
        let rhs = entdetect::divergence::relative_entropy(&sigma_prime, sigma)
            .unwrap()
            .expect_finite()
            .unwrap()
            + d_star;
        let dev = (lhs - rhs).abs();
        worst = worst.max(dev);
        assert!(
            dev < 1e-6,
            "criterion 5 FAIL: Pythagorean identity off by {dev:.3e}"
        );
        checked += 1;
    }
    println!(
        "acceptance criterion 5 (witness guarantees): PASS — Tr ρW = {:.4} < 0; \
         min margin {:.4} ≥ −slack = {:.4} over 10^4 Haar products + {} grid products, \
         0 violations; Pythagorean identity on 100 hyperplane points, worst dev {:.2e} < 1e-6 \
         ({:.1?})",
        w.tr_rho_w,
        report.min_margin,
        -w.slack,
        report.grid_products,
        worst,
        started.elapsed()
    );
}

#[test]
fn criterion_6_coherence_suite() {
    let started = std::time::Instant::now();
    let cfg = SolverConfig {
        max_iter: 10_000,
        rel_tol: 1e-13,
        ..SolverConfig::default()
    };

    // iterative vs closed form on 20 random full-rank states
    let mut rng = seeded_rng(606);
    let mut worst_gap = 0.0f64;
    for k in 0..20 {
        let dim = if k % 2 == 0 { 2 } else { 3 };
        let rho = random_density(dim, &mut rng);
        let closed = coherence::rel_entropy(&rho)
            .unwrap()
            .expect_finite()
            .unwrap();
        let iterative = coherence::rel_entropy_iterative(&rho, &cfg).unwrap();
        let gap = (closed - iterative).abs();
        worst_gap = worst_gap.max(gap);
        assert!(
            gap <= 1e-3,
            "criterion 6 FAIL: iterative gap {gap:.3e} on state {k} (dim {dim})"
        );
    }

    // additivity exact through the closed form on 10 pairs
    let mut worst_add = 0.0f64;
    for _ in 0..10 {
        let a = random_density(2, &mut rng);
        let b = random_density(3, &mut rng);
        let (lhs, rhs) = coherence::additivity_check(&a, &b).unwrap();
        let dev = (lhs - rhs).abs();
        worst_add = worst_add.max(dev);
        assert!(dev <= 1e-9, "criterion 6 FAIL: additivity off by {dev:.3e}");
    }

    // Rényi coherence of the phase mixture vs its closed form
    let mut worst_renyi = 0.0f64;
    for p in [vec![0.9, 0.1], vec![0.5, 0.3, 0.2]] {
        let rho = coherence::phase_mixture(&p).unwrap();
        for &alpha in &[0.5, 1.5, 2.0] {
            let closed = coherence::phase_mixture_renyi_closed_form(&p, alpha).unwrap();
            let got = coherence::renyi(&rho, alpha, &cfg)
                .unwrap()
                .expect_finite()
                .unwrap();
            let dev = (got - closed).abs();
            worst_renyi = worst_renyi.max(dev);
            assert!(
                dev <= 1e-3,
                "criterion 6 FAIL: α={alpha}, p={p:?}: solver {got} vs closed {closed}"
            );
        }
    }
    println!(
        "acceptance criterion 6 (coherence suite): PASS — iterative vs closed worst gap \
         {worst_gap:.2e} ≤ 1e-3 (20 states, d ∈ {{2,3}}); additivity worst dev {worst_add:.2e} \
         ≤ 1e-9 (10 pairs); Rényi closed-form worst dev {worst_renyi:.2e} ≤ 1e-3 \
         (α ∈ {{0.5, 1.5, 2}}) ({:.1?})",
        started.elapsed()
    );
}

#[test]
fn criterion_7_membership_and_ppt() {
    let started = std::time::Instant::now();
    let net = complex_net(16, 2).unwrap();
    let cfg = SolverConfig {
        max_iter: 2000,
        rel_tol: 0.0,
        ..SolverConfig::default()
    };

    let bell = DensityMatrix::from_pure(&maximally_entangled(2), Some((2, 2))).unwrap();
    let padded = embed_padded(&bell, (4, 2), 1e-6).unwrap();
    let v_bell = decide_membership(&padded, &net, 0.3, &cfg).unwrap();
    assert_eq!(
        v_bell.decision,
        Decision::Entangled,
        "criterion 7 FAIL: Bell-derived state decided {} (objective {})",
        v_bell.decision,
        v_bell.objective
    );
    // at this net size the discretization gap exceeds ε₁, so the promise
    // verdict must be flagged as uncertified
    assert!(!v_bell.h1_certified);
    assert!(v_bell.warning.is_some());

    let mut rng = seeded_rng(707);
    let prod = product_density(&random_density(4, &mut rng), &random_density(2, &mut rng)).unwrap();
    let v_prod = decide_membership(&prod, &net, 0.3, &cfg).unwrap();
    assert_eq!(
        v_prod.decision,
        Decision::SeparableConsistent,
        "criterion 7 FAIL: product state decided {} (objective {})",
        v_prod.decision,
        v_prod.objective
    );

    let mixed = DensityMatrix::from_matrix(
        CMat::identity(8, 8) * Complex64::new(0.125, 0.0),
        Some((4, 2)),
    )
    .unwrap();
    let v_mixed = decide_membership(&mixed, &net, 0.3, &cfg).unwrap();
    assert_eq!(v_mixed.decision, Decision::SeparableConsistent);

    let (min_eig, entangled) = ppt_test(&bell, DEFAULT_PPT_THRESHOLD).unwrap();
    assert!(
        (min_eig - (-0.5)).abs() < 1e-10,
        "criterion 7 FAIL: Bell PPT min eigenvalue {min_eig}"
    );
    assert!(entangled);
    println!(
        "acceptance criterion 7 (membership/PPT): PASS — Bell-derived → {} (objective {:.3} > 0.3); \
         product → {} ({:.2e}); maximally mixed → {} ({:.2e}); Bell PPT min eig {min_eig:.12} = −1/2 \
         ({:.1?})",
        v_bell.decision,
        v_bell.objective,
        v_prod.decision,
        v_prod.objective,
        v_mixed.decision,
        v_mixed.objective,
        started.elapsed()
    );
}

#[test]
fn criterion_8_figure_shapes() {
    let started = std::time::Instant::now();
    // sweep: p = 1/2, value nondecreasing in λ per δ, small at λ = 0.05
    let mut lambda_grid = vec![0.05];
    lambda_grid.extend((1..=10).map(|k| k as f64 / 10.0));
    let sweep_spec = ExperimentSpec {
        p: 0.5,
        lambda_grid,
        delta_grid: vec![1e-1, 1e-2, 1e-4],
        net_n: 16,
        solver: SolverConfig {
            max_iter: 8000,
            rel_tol: 1e-11,
            ..SolverConfig::default()
        },
        ..ExperimentSpec::default()
    };
    let rows = sweep_lambda(&sweep_spec).unwrap();
    for delta in [1e-1, 1e-2, 1e-4] {
        let mut per_delta: Vec<&entdetect::experiment::SweepRow> =
            rows.iter().filter(|r| r.delta == delta).collect();
        per_delta.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        assert!(!per_delta.is_empty());
        for w in per_delta.windows(2) {
            assert!(
                w[1].value >= w[0].value - 1e-3,
                "criterion 8 FAIL: δ={delta}: value({}) = {} < value({}) = {} − 1e-3",
                w[1].lambda,
                w[1].value,
                w[0].lambda,
                w[0].value
            );
        }
        let at_005 = per_delta.iter().find(|r| r.lambda == 0.05).unwrap();
        assert!(
            at_005.value <= 0.05,
            "criterion 8 FAIL: δ={delta}: value at λ=0.05 is {}",
            at_005.value
        );
    }

    // boundary: ours never above the partial-transpose onset
    let boundary_spec = ExperimentSpec {
        p: 0.1,
        delta_grid: vec![0.05, 0.1, 0.2],
        net_n: 16,
        solver: SolverConfig {
            max_iter: 4000,
            rel_tol: 1e-11,
            ..SolverConfig::default()
        },
        ..ExperimentSpec::default()
    };
    let brows = boundary_scan(&boundary_spec, 1e-8, -1e-8).unwrap();
    for r in &brows {
        assert!(
            r.crossings_ok,
            "criterion 8 FAIL: δ={} no crossing",
            r.delta
        );
        assert!(
            r.lambda_ours <= r.lambda_ppt,
            "criterion 8 FAIL: δ={}: ours {} > ppt {}",
            r.delta,
            r.lambda_ours,
            r.lambda_ppt
        );
    }
    let summary: Vec<String> = brows
        .iter()
        .map(|r| format!("δ={}: {:.4} ≤ {:.4}", r.delta, r.lambda_ours, r.lambda_ppt))
        .collect();
    println!(
        "acceptance criterion 8 (figure-shape reproduction): PASS — sweep nondecreasing in λ \
         (slack 1e-3) with value(λ=0.05) ≤ 0.05 at δ ∈ {{1e-1,1e-2,1e-4}}; boundary ordering \
         [{}] ({:.1?})",
        summary.join(", "),
        started.elapsed()
    );
}

#[test]
fn criterion_9_exponent_curves() {
    // commuting diagonal instance: quantum pipeline vs classical formulas
    let p = [0.5f64, 0.5];
    let q = [0.9f64, 0.1];
    let sigma = DensityMatrix::new(HermitianOperator::from_real_diagonal(&p), None).unwrap();
    let rho = DensityMatrix::new(HermitianOperator::from_real_diagonal(&q), None).unwrap();
    let grid = default_alpha_grid();
    let quantum: Vec<(f64, f64)> = grid
        .iter()
        .map(|&a| {
            (
                a,
                sandwiched_renyi(&sigma, &rho, a)
                    .unwrap()
                    .expect_finite()
                    .unwrap(),
            )
        })
        .collect();
    let classical: Vec<(f64, f64)> = grid
        .iter()
        .map(|&a| (a, classical_renyi(&p, &q, a)))
        .collect();
    let r_grid: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
    let qc = exponent_curve(&quantum, &r_grid).unwrap();
    let cc = exponent_curve(&classical, &r_grid).unwrap();
    let mut worst = 0.0f64;
    for k in 0..r_grid.len() {
        worst = worst.max((qc.achievability[k] - cc.achievability[k]).abs());
        worst = worst.max((qc.strong_converse[k] - cc.strong_converse[k]).abs());
    }
    assert!(
        worst <= 1e-9,
        "criterion 9 FAIL: quantum vs classical curves differ by {worst:.3e}"
    );
    for w in qc.achievability.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-12,
            "criterion 9 FAIL: achievability not nonincreasing"
        );
    }
    // at r = 0 the sup sits at the largest sampled α below 1
    let near_one = quantum
        .iter()
        .filter(|&&(a, _)| a < 1.0)
        .map(|&(_, e)| e)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        (qc.achievability[0] - near_one).abs() < 1e-12,
        "criterion 9 FAIL: achievability(0) = {} vs α→1⁻ sample {near_one}",
        qc.achievability[0]
    );
    println!(
        "acceptance criterion 9 (exponent curves): PASS — classical agreement to {worst:.2e} \
         ≤ 1e-9 on {} rates; achievability nonincreasing; achievability(0) = {:.6} matches the \
         α→1⁻ sample",
        r_grid.len(),
        qc.achievability[0]
    );
}
