//! Discrete point sets on real spheres and complex unit spheres, with
//! covering-quality certificates.
//!
//! The real set on the d-sphere is a product-of-circles recursion: level 1 is
//! the n-point circle, and level d prepends `cos(2πj/n)·v` to each level
//! `d−1` vector and appends `sin(2πj/n)`. The complex set on `C^d` reads a
//! level `2d−2` real vector as one real coordinate followed by `d−1` complex
//! ones, which fixes a first-coordinate-real phase convention.
//!
//! The analytic covering certificate is `ε₂ ≤ 2√d·π/n`; `estimate_eps2`
//! gives a sampled lower estimate that must stay below it.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{CMat, CVec};
use crate::states::{haar_vector, seeded_rng};

/// Refuse to materialize nets beyond this many vectors.
const MAX_NET_POINTS: f64 = 2.0e6;

/// Finite subset of the unit sphere `S^d ⊂ R^{d+1}` with `n^d` points.
#[derive(Debug, Clone)]
pub struct RealNet {
    pub n: usize,
    pub d: usize,
    pub points: Vec<Vec<f64>>,
}

/// Finite set of unit vectors in `C^d`, `n^{2d−2}` of them, with its
/// analytic covering bound `eps2_bound = 2√d·π/n`.
#[derive(Debug, Clone)]
pub struct ComplexNet {
    pub n: usize,
    pub d: usize,
    pub points: Vec<CVec>,
    pub eps2_bound: f64,
}

/// Builds the real net on `S^d` with `n` points per circle.
pub fn real_net(n: usize, d: usize) -> Result<RealNet> {
    if n < 3 {
        return Err(Error::Parameter(format!(
            "circle granularity n = {n} is degenerate; need n ≥ 3"
        )));
    }
    if d < 1 {
        return Err(Error::Parameter("sphere dimension d must be ≥ 1".into()));
    }
    let size = (n as f64).powi(d as i32);
    if size > MAX_NET_POINTS {
        return Err(Error::Parameter(format!(
            "real net (n={n}, d={d}) would hold n^d ≈ {size:.2e} points; limit is {MAX_NET_POINTS:.0e}"
        )));
    }
    let angles: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let mut points: Vec<Vec<f64>> = angles.iter().map(|&(c, s)| vec![c, s]).collect();
    for _ in 2..=d {
        let mut next = Vec::with_capacity(points.len() * n);
        for &(c, s) in &angles {
            for v in &points {
                let mut w = Vec::with_capacity(v.len() + 1);
                w.extend(v.iter().map(|x| c * x));
                w.push(s);
                next.push(w);
            }
        }
        points = next;
    }
    Ok(RealNet { n, d, points })
}

impl RealNet {
    /// `min over unit ψ₁ of max over net of |⟨ψ₁|ψ₂⟩|`, evaluated on a fine
    /// angle grid (valid for d = 1 where the sphere is a circle).
    pub fn min_max_inner_product_d1(&self, grid_per_gap: usize) -> Result<f64> {
        if self.d != 1 {
            return Err(Error::Parameter(
                "min-max inner product scan implemented for d = 1 only".into(),
            ));
        }
        let m = self.n * grid_per_gap.max(2);
        let mut min_max = f64::INFINITY;
        for k in 0..m {
            let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let (x, y) = (t.cos(), t.sin());
            let best = self
                .points
                .iter()
                .fold(0.0f64, |b, p| b.max((x * p[0] + y * p[1]).abs()));
            min_max = min_max.min(best);
        }
        Ok(min_max)
    }
}

/// Builds the complex net on `C^d` from the real net on `S^{2d−2}`.
pub fn complex_net(n: usize, d: usize) -> Result<ComplexNet> {
    if d < 2 {
        return Err(Error::Parameter(
            "complex net needs dimension d ≥ 2; use the computational basis for d = 1".into(),
        ));
    }
    let rn = real_net(n, 2 * d - 2)?;
    let points: Vec<CVec> = rn
        .points
        .iter()
        .map(|x| {
            CVec::from_fn(d, |k, _| {
                if k == 0 {
                    Complex64::new(x[0], 0.0)
                } else {
                    Complex64::new(x[2 * k - 1], x[2 * k])
                }
            })
        })
        .collect();
    Ok(ComplexNet {
        n,
        d,
        points,
        eps2_bound: eps2_bound(n, d),
    })
}

/// Analytic covering bound `2√d·π/n`.
pub fn eps2_bound(n: usize, d: usize) -> f64 {
    2.0 * (d as f64).sqrt() * std::f64::consts::PI / n as f64
}

/// Smallest circle granularity achieving a requested covering quality:
/// `n = ⌈2√d·π/ε₂⌉`.
pub fn granularity_for_eps2(eps2: f64, d: usize) -> Result<usize> {
    if !(eps2 > 0.0) {
        return Err(Error::Parameter(format!("ε₂ must be > 0, got {eps2}")));
    }
    let x = 2.0 * (d as f64).sqrt() * std::f64::consts::PI / eps2;
    // relative slack so that exact inverses of eps2_bound round back
    Ok((x * (1.0 - 1e-9)).ceil() as usize)
}

#[derive(Serialize)]
struct NetFile {
    n: usize,
    d: usize,
    points: Vec<Vec<[f64; 2]>>,
    eps2_bound: f64,
}

impl ComplexNet {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Covering deviation `2√(1 − max_c |⟨ψ|ψ_c⟩|²)` of one vector.
    pub fn eps2_deviation(&self, psi: &CVec) -> f64 {
        let best = self
            .points
            .iter()
            .fold(0.0f64, |b, p| b.max(p.dotc(psi).norm_sqr()));
        2.0 * (1.0 - best.min(1.0)).max(0.0).sqrt()
    }

    /// Sampled estimate of ε₂: the max covering deviation over Haar-random
    /// unit vectors. Deterministic for a given seed, and nondecreasing in the
    /// sample count because samples extend the same stream.
    pub fn estimate_eps2(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = seeded_rng(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let psi = haar_vector(self.d, &mut rng);
            worst = worst.max(self.eps2_deviation(&psi));
        }
        worst
    }

    /// Rank-one projectors `|ψ_c⟩⟨ψ_c|` for all net points.
    pub fn projectors(&self) -> Vec<CMat> {
        self.points.iter().map(|p| p * p.adjoint()).collect()
    }

    pub fn to_json_string(&self) -> String {
        let points = self
            .points
            .iter()
            .map(|p| p.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        serde_json::to_string(&NetFile {
            n: self.n,
            d: self.d,
            points,
            eps2_bound: self.eps2_bound,
        })
        .expect("net serialization")
    }
}
