//! The 4⊗2 phase-damped experiment family, sweep and boundary drivers, and
//! their CSV/plot-script surfaces.
//!
//! The family is a two-qubit-plus-qubit pure state pushed through a
//! phase-damping channel of strength λ on each A qubit and mixed with the
//! maximally mixed state at weight δ. Sweeping λ traces how the measure
//! grows with coherence; scanning (δ, λ) for threshold crossings compares
//! the measure's detection region against the partial-transpose test.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{CMat, CVec, DensityMatrix};
use crate::measures::{min_sep_relative_entropy, ExponentCurve};
use crate::membership::ppt_test;
use crate::net::{complex_net, ComplexNet};
use crate::solver::SolverConfig;

/// Absolute λ-resolution of the boundary bisection.
pub const BISECTION_TOL: f64 = 1e-3;
/// Bisection step cap.
pub const BISECTION_MAX_STEPS: usize = 20;

/// Parameters of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub p: f64,
    pub lambda_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub net_n: usize,
    pub solver: SolverConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let mut lambda_grid = vec![0.05];
        lambda_grid.extend((1..=10).map(|k| k as f64 / 10.0));
        Self {
            p: 0.5,
            lambda_grid,
            delta_grid: vec![1e-1, 1e-2, 1e-4],
            net_n: 16,
            solver: SolverConfig {
                max_iter: 8000,
                rel_tol: 1e-11,
                ..SolverConfig::default()
            },
            seed: 7,
            output_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Parameter(format!("p = {} outside [0,1]", self.p)));
        }
        if self.lambda_grid.is_empty() || self.delta_grid.is_empty() {
            return Err(Error::Parameter("empty λ or δ grid".into()));
        }
        for &l in &self.lambda_grid {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Parameter(format!("λ = {l} outside [0,1]")));
            }
        }
        for &d in &self.delta_grid {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::Parameter(format!("δ = {d} outside [0,1]")));
            }
        }
        self.solver.validate()
    }

    /// Parses the flat `key = value` config document. Unknown keys are
    /// rejected; `#` starts a comment.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: String| Error::Format(format!("config line {}: {e}", lineno + 1));
            match key {
                "p" => spec.p = value.parse().map_err(|e| bad(format!("p: {e}")))?,
                "lambda_grid" => spec.lambda_grid = parse_grid(value).map_err(bad)?,
                "delta_grid" => spec.delta_grid = parse_grid(value).map_err(bad)?,
                "net_n" => spec.net_n = value.parse().map_err(|e| bad(format!("net_n: {e}")))?,
                "seed" => spec.seed = value.parse().map_err(|e| bad(format!("seed: {e}")))?,
                "output_dir" => spec.output_dir = PathBuf::from(value),
                "gamma" => {
                    spec.solver.gamma = value.parse().map_err(|e| bad(format!("gamma: {e}")))?
                }
                "max_iter" => {
                    spec.solver.max_iter =
                        value.parse().map_err(|e| bad(format!("max_iter: {e}")))?
                }
                "rel_tol" => {
                    spec.solver.rel_tol = value.parse().map_err(|e| bad(format!("rel_tol: {e}")))?
                }
                "eig_floor" => {
                    spec.solver.eig_floor =
                        value.parse().map_err(|e| bad(format!("eig_floor: {e}")))?
                }
                "adaptive_gamma" => {
                    spec.solver.adaptive_gamma = value
                        .parse()
                        .map_err(|e| bad(format!("adaptive_gamma: {e}")))?
                }
                other => {
                    return Err(Error::Format(format!(
                        "config line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect()
}

/// Qubit pure state `(|0⟩ + e^{iθ}|1⟩)/√2`.
pub fn phi_theta(theta: f64) -> CVec {
    let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CVec::from_vec(vec![w, Complex64::from_polar(1.0, theta) * w])
}

/// Phase-damping channel on one qubit: populations kept, coherences scaled
/// by λ.
pub fn phase_damping(rho: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::Validation("phase damping acts on one qubit".into()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("λ = {lambda} outside [0,1]")));
    }
    let mut m = rho.matrix().clone();
    let s = Complex64::new(lambda, 0.0);
    m[(0, 1)] *= s;
    m[(1, 0)] *= s;
    DensityMatrix::from_matrix(m, None)
}

/// Scales all matrix elements whose bit `qubit` differs between row and
/// column (phase damping on that qubit of a multi-qubit operator).
fn damp_qubit(m: &mut CMat, qubit_mask: usize, lambda: f64) {
    let s = Complex64::new(lambda, 0.0);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if (i & qubit_mask) != (j & qubit_mask) {
                m[(i, j)] *= s;
            }
        }
    }
}

/// The experiment state on 4⊗2: phase damping of strength λ on both A
/// qubits of `√p|φ₀φ₀0⟩ + √(1−p)|φ_{π/2}φ_{π/2}1⟩`, mixed with I/8 at
/// weight δ.
pub fn rho_p_lambda_delta(p: f64, lambda: f64, delta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} outside [0,1]")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("λ = {lambda} outside [0,1]")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Parameter(format!("δ = {delta} outside [0,1]")));
    }
    if delta == 0.0 {
        log::warn!("δ = 0 leaves the state rank-deficient; measures may report infinity");
    }
    let phi0 = phi_theta(0.0);
    let phi1 = phi_theta(std::f64::consts::FRAC_PI_2);
    let mut psi = CVec::zeros(8);
    let (wp, wq) = (
        Complex64::new(p.sqrt(), 0.0),
        Complex64::new((1.0 - p).sqrt(), 0.0),
    );
    // index (x₁x₂x₃) ↦ 4x₁ + 2x₂ + x₃; B is the last qubit
    for x1 in 0..2 {
        for x2 in 0..2 {
            psi[(x1 << 2) | (x2 << 1)] += wp * phi0[x1] * phi0[x2];
            psi[(x1 << 2) | (x2 << 1) | 1] += wq * phi1[x1] * phi1[x2];
        }
    }
    let mut m = &psi * psi.adjoint();
    damp_qubit(&mut m, 0b100, lambda);
    damp_qubit(&mut m, 0b010, lambda);
    let m = m * Complex64::new(1.0 - delta, 0.0)
        + CMat::identity(8, 8) * Complex64::new(delta / 8.0, 0.0);
    DensityMatrix::from_matrix(m, Some((4, 2)))
}

/// One sweep record.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub lambda: f64,
    pub delta: f64,
    pub value: f64,
    pub gap_bound: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
    pub iterations: usize,
}

/// Evaluates the measure over the (δ, λ) grid. Rows are produced in grid
/// order (δ outer, λ inner); failed points are recorded as NaN rows and the
/// run continues.
pub fn sweep_lambda(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let net = complex_net(spec.net_n, 2)?;
    let grid: Vec<(f64, f64)> = spec
        .delta_grid
        .iter()
        .flat_map(|&d| spec.lambda_grid.iter().map(move |&l| (d, l)))
        .collect();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(delta, lambda)| sweep_point(spec, &net, delta, lambda))
        .collect();
    Ok(rows)
}

fn sweep_point(spec: &ExperimentSpec, net: &ComplexNet, delta: f64, lambda: f64) -> SweepRow {
    let run = rho_p_lambda_delta(spec.p, lambda, delta)
        .and_then(|rho| min_sep_relative_entropy(&rho, net, &spec.solver));
    match run {
        Ok(m) => SweepRow {
            p: spec.p,
            lambda,
            delta,
            value: m.value.as_f64(),
            gap_bound: m.gap_bound,
            interval_lo: m.interval.0,
            interval_hi: m.interval.1,
            iterations: m.iterations,
        },
        Err(e) => {
            log::warn!("sweep point (δ={delta}, λ={lambda}) failed: {e}");
            SweepRow {
                p: spec.p,
                lambda,
                delta,
                value: f64::NAN,
                gap_bound: f64::NAN,
                interval_lo: f64::NAN,
                interval_hi: f64::NAN,
                iterations: 0,
            }
        }
    }
}

pub const SWEEP_HEADER: [&str; 8] = [
    "p",
    "lambda",
    "delta",
    "value",
    "gap_bound",
    "interval_lo",
    "interval_hi",
    "iterations",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in rows {
        wtr.write_record([
            r.p.to_string(),
            r.lambda.to_string(),
            r.delta.to_string(),
            r.value.to_string(),
            r.gap_bound.to_string(),
            r.interval_lo.to_string(),
            r.interval_hi.to_string(),
            r.iterations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One boundary record: smallest λ at which each test flags entanglement.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryRow {
    pub delta: f64,
    pub lambda_ours: f64,
    pub lambda_ppt: f64,
    pub crossings_ok: bool,
}

/// Finds the smallest λ where `pred` turns true, assuming monotone onset.
/// Returns the located λ and whether a proper bracket existed.
fn bisect_smallest_true(
    mut pred: impl FnMut(f64) -> Result<bool>,
    lo0: f64,
    hi0: f64,
) -> Result<(f64, bool)> {
    let at_lo = pred(lo0)?;
    if at_lo {
        return Ok((lo0, false));
    }
    let at_hi = pred(hi0)?;
    if !at_hi {
        return Ok((f64::NAN, false));
    }
    let (mut lo, mut hi) = (lo0, hi0);
    let mut steps = 0;
    while hi - lo > BISECTION_TOL && steps < BISECTION_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    Ok((hi, true))
}

/// Scans δ values, bisecting λ for (a) the measure exceeding
/// `measure_threshold` and (b) the partial-transpose minimum eigenvalue
/// falling below `ppt_threshold`.
pub fn boundary_scan(
    spec: &ExperimentSpec,
    measure_threshold: f64,
    ppt_threshold: f64,
) -> Result<Vec<BoundaryRow>> {
    spec.validate()?;
    let net = complex_net(spec.net_n, 2)?;
    let rows: Vec<Result<BoundaryRow>> = spec
        .delta_grid
        .par_iter()
        .map(|&delta| {
            let measure_pred = |lambda: f64| -> Result<bool> {
                let rho = rho_p_lambda_delta(spec.p, lambda, delta)?;
                let m = min_sep_relative_entropy(&rho, &net, &spec.solver)?;
                Ok(m.value.as_f64() > measure_threshold)
            };
            let ppt_pred = |lambda: f64| -> Result<bool> {
                let rho = rho_p_lambda_delta(spec.p, lambda, delta)?;
                let (min_eig, _) = ppt_test(&rho, ppt_threshold)?;
                Ok(min_eig < ppt_threshold)
            };
            let (lambda_ours, ok_ours) = bisect_smallest_true(measure_pred, 0.0, 1.0)?;
            let (lambda_ppt, ok_ppt) = bisect_smallest_true(ppt_pred, 0.0, 1.0)?;
            Ok(BoundaryRow {
                delta,
                lambda_ours,
                lambda_ppt,
                crossings_ok: ok_ours && ok_ppt,
            })
        })
        .collect();
    rows.into_iter().collect()
}

pub const BOUNDARY_HEADER: [&str; 4] = ["delta", "lambda_ours", "lambda_ppt", "crossings_ok"];

pub fn write_boundary_csv<W: Write>(rows: &[BoundaryRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(BOUNDARY_HEADER).map_err(csv_err)?;
    for r in rows {
        wtr.write_record([
            r.delta.to_string(),
            r.lambda_ours.to_string(),
            r.lambda_ppt.to_string(),
            r.crossings_ok.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub const EXPONENT_HEADER: [&str; 3] = ["r", "achievability", "strong_converse"];

pub fn write_exponent_csv<W: Write>(curve: &ExponentCurve, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(EXPONENT_HEADER).map_err(csv_err)?;
    for k in 0..curve.r_grid.len() {
        wtr.write_record([
            curve.r_grid[k].to_string(),
            curve.achievability[k].to_string(),
            curve.strong_converse[k].to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Plot-script flavors, one per CSV schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Sweep,
    Boundary,
    Exponent,
}

impl PlotKind {
    fn header(&self) -> &'static [&'static str] {
        match self {
            PlotKind::Sweep => &SWEEP_HEADER,
            PlotKind::Boundary => &BOUNDARY_HEADER,
            PlotKind::Exponent => &EXPONENT_HEADER,
        }
    }
}

/// Writes a standalone Python script that plots the given CSV. The CSV must
/// already exist with the schema of `kind`.
pub fn emit_plot_script(csv_path: &Path, kind: PlotKind, out_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv_path)?;
    let first = text.lines().next().unwrap_or_default();
    let expected = kind.header().join(",");
    if first.trim() != expected {
        return Err(Error::Validation(format!(
            "csv header '{first}' does not match expected '{expected}'"
        )));
    }
    let csv_name = csv_path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("data.csv");
    let body = match kind {
        PlotKind::Sweep => format!(
            r#"#!/usr/bin/env python3
"""Measure-vs-lambda curves, one per delta."""
import csv
from collections import defaultdict
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

series = defaultdict(list)
with open("{csv_name}") as f:
    for row in csv.DictReader(f):
        series[float(row["delta"])].append((float(row["lambda"]), float(row["value"])))
for delta, pts in sorted(series.items()):
    pts.sort()
    plt.plot([x for x, _ in pts], [y for _, y in pts], marker="o", label=f"delta={{delta:g}}")
plt.xlabel("lambda")
plt.ylabel("minimum relative entropy (nats)")
plt.legend()
plt.tight_layout()
plt.savefig("sweep.png", dpi=160)
print("wrote sweep.png")
"#
        ),
        PlotKind::Boundary => format!(
            r#"#!/usr/bin/env python3
"""Detection boundaries in the (delta, lambda) plane."""
import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

deltas, ours, ppt = [], [], []
with open("{csv_name}") as f:
    for row in csv.DictReader(f):
        deltas.append(float(row["delta"]))
        ours.append(float(row["lambda_ours"]))
        ppt.append(float(row["lambda_ppt"]))
plt.plot(deltas, ours, marker="o", label="divergence test")
plt.plot(deltas, ppt, marker="s", label="partial transpose test")
plt.xlabel("delta")
plt.ylabel("lambda at detection onset")
plt.legend()
plt.tight_layout()
plt.savefig("boundary.png", dpi=160)
print("wrote boundary.png")
"#
        ),
        PlotKind::Exponent => format!(
            r#"#!/usr/bin/env python3
"""Error-exponent trade-off curves."""
import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

r, ach, sc = [], [], []
with open("{csv_name}") as f:
    for row in csv.DictReader(f):
        r.append(float(row["r"]))
        ach.append(float(row["achievability"]))
        sc.append(float(row["strong_converse"]))
plt.plot(r, ach, marker="o", label="achievability")
plt.plot(r, sc, marker="s", label="strong converse")
plt.xlabel("r")
plt.ylabel("exponent (nats)")
plt.legend()
plt.tight_layout()
plt.savefig("exponent.png", dpi=160)
print("wrote exponent.png")
"#
        ),
    };
    std::fs::write(out_path, body)?;
    Ok(())
}
