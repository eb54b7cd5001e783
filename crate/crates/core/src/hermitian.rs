//! Dense complex Hermitian linear algebra.
//!
//! Everything downstream works with validated [`HermitianOperator`]s and
//! [`DensityMatrix`]es. Matrix functions (log, exp, fractional powers) go
//! through a single eigendecomposition path with an explicit eigenvalue
//! floor, so rank-deficient states stay usable: eigenvalues below the floor
//! are raised to it before the scalar function is applied.
//!
//! Bipartite structure is index-based: a composite index on `H_A ⊗ H_B`
//! is `a * d_b + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVec = DVector<Complex64>;

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Default eigenvalue floor applied before logarithms and negative powers.
pub const DEFAULT_EIG_FLOOR: f64 = 1e-14;
/// Tolerance on the trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed negativity of density-matrix eigenvalues.
pub const PSD_TOL: f64 = -1e-10;

/// Which subsystem a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// A validated Hermitian operator.
///
/// Construction checks `M = M†` entrywise within [`HERMITICITY_TOL`] and then
/// stores the symmetrized matrix `(M + M†)/2`, so stored operators are
/// Hermitian to machine precision.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
}

impl HermitianOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Validation(format!(
                "matrix is {}x{}, expected square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let adj = mat.adjoint();
        let dev = (&mat - &adj).camax();
        if dev > HERMITICITY_TOL {
            return Err(Error::Validation(format!(
                "matrix deviates from Hermitian by {dev:.3e} (tolerance {HERMITICITY_TOL:.0e})"
            )));
        }
        let sym = (mat + adj) * Complex64::new(0.5, 0.0);
        Ok(Self { mat: sym })
    }

    /// Builds from row-major `(re, im)` entries.
    pub fn from_entries(dim: usize, entries: &[(f64, f64)]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mat = CMat::from_fn(dim, dim, |i, j| {
            let (re, im) = entries[i * dim + j];
            Complex64::new(re, im)
        });
        Self::new(mat)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mat = CMat::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self { mat }
    }

    /// Wraps a matrix that is Hermitian by construction, skipping validation.
    pub(crate) fn from_hermitian_unchecked(mat: CMat) -> Self {
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Full eigendecomposition with eigenvalues sorted ascending.
    pub fn eig(&self) -> Spectrum {
        Spectrum::of(&self.mat)
    }

    /// Applies a real scalar function to the spectrum: `U f(Λ_floored) U†`.
    ///
    /// Eigenvalues below `eig_floor` are raised to `eig_floor` first. If `f`
    /// produces a non-finite value at some floored eigenvalue, a domain error
    /// naming that eigenvalue is returned.
    pub fn matrix_fn(&self, f: impl Fn(f64) -> f64, eig_floor: f64) -> Result<HermitianOperator> {
        let spec = self.eig();
        let mut vals = Vec::with_capacity(spec.eigenvalues.len());
        for &lam in &spec.eigenvalues {
            let floored = lam.max(eig_floor);
            let y = f(floored);
            if !y.is_finite() {
                return Err(Error::Domain(format!(
                    "scalar function undefined at floored eigenvalue {floored:.6e}"
                )));
            }
            vals.push(y);
        }
        Ok(HermitianOperator::from_hermitian_unchecked(
            spec.recombine(&vals),
        ))
    }

    /// Matrix logarithm on the floored spectrum.
    pub fn log_floored(&self, eig_floor: f64) -> Result<HermitianOperator> {
        self.matrix_fn(f64::ln, eig_floor)
    }

    /// Matrix power `H^p`. Negative powers floor the spectrum; nonnegative
    /// powers clamp at zero so rank-deficient inputs stay exact.
    pub fn pow_floored(&self, p: f64, eig_floor: f64) -> Result<HermitianOperator> {
        if p < 0.0 {
            self.matrix_fn(|x| x.powf(p), eig_floor)
        } else {
            self.matrix_fn(|x| x.max(0.0).powf(p), f64::NEG_INFINITY)
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::from_hermitian_unchecked(self.mat.kronecker(&other.mat))
    }

    /// Partial trace over the subsystem not kept.
    pub fn partial_trace(&self, dims: (usize, usize), keep: Keep) -> Result<HermitianOperator> {
        let (da, db) = check_dims(self.dim(), dims)?;
        let mat = match keep {
            Keep::A => partial_trace_b(&self.mat, da, db),
            Keep::B => partial_trace_a(&self.mat, da, db),
        };
        Ok(HermitianOperator::from_hermitian_unchecked(mat))
    }

    /// Partial transpose on the B factor.
    pub fn partial_transpose(&self, dims: (usize, usize)) -> Result<HermitianOperator> {
        let (da, db) = check_dims(self.dim(), dims)?;
        let mut out = CMat::zeros(self.dim(), self.dim());
        for a in 0..da {
            for ap in 0..da {
                for b in 0..db {
                    for bp in 0..db {
                        out[(a * db + b, ap * db + bp)] = self.mat[(a * db + bp, ap * db + b)];
                    }
                }
            }
        }
        Ok(HermitianOperator::from_hermitian_unchecked(out))
    }

    /// Operator norm = max |eigenvalue|.
    pub fn op_norm(&self) -> f64 {
        self.eig()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn to_matrix_file(&self, dims: Option<(usize, usize)>) -> MatrixFile {
        MatrixFile::from_cmat(&self.mat, dims)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_matrix_file(None)).expect("matrix serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(s).map_err(|e| Error::Format(format!("matrix file: {e}")))?;
        file.to_hermitian()
    }
}

fn check_dims(dim: usize, dims: (usize, usize)) -> Result<(usize, usize)> {
    let (da, db) = dims;
    if da == 0 || db == 0 || da * db != dim {
        return Err(Error::Validation(format!(
            "bipartite dims ({da}, {db}) inconsistent with total dimension {dim}"
        )));
    }
    Ok((da, db))
}

pub(crate) fn partial_trace_b(m: &CMat, da: usize, db: usize) -> CMat {
    let mut out = CMat::zeros(da, da);
    for a in 0..da {
        for ap in 0..da {
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..db {
                s += m[(a * db + b, ap * db + b)];
            }
            out[(a, ap)] = s;
        }
    }
    out
}

pub(crate) fn partial_trace_a(m: &CMat, da: usize, db: usize) -> CMat {
    let mut out = CMat::zeros(db, db);
    for b in 0..db {
        for bp in 0..db {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..da {
                s += m[(a * db + b, a * db + bp)];
            }
            out[(b, bp)] = s;
        }
    }
    out
}

/// Eigendecomposition of a Hermitian operator.
///
/// Eigenvalues are real and ascending; eigenvectors are the matching
/// orthonormal columns of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl Spectrum {
    pub(crate) fn of(mat: &CMat) -> Spectrum {
        let se = SymmetricEigen::new(mat.clone());
        let n = se.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut eigenvectors = CMat::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            eigenvectors.set_column(k, &se.eigenvectors.column(i));
        }
        Spectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `U diag(vals) U†` for replacement eigenvalues `vals`.
    pub fn recombine(&self, vals: &[f64]) -> CMat {
        let n = self.eigenvalues.len();
        debug_assert_eq!(vals.len(), n);
        // U D U† with D real diagonal, accumulated column-wise.
        let mut out = CMat::zeros(n, n);
        for (k, &w) in vals.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let col = self.eigenvectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += col[i] * col[j].conj() * w;
                }
            }
        }
        // kill rounding asymmetry
        let adj = out.adjoint();
        (out + adj) * Complex64::new(0.5, 0.0)
    }

    pub fn reconstruct(&self) -> CMat {
        self.recombine(&self.eigenvalues)
    }
}

/// A validated density matrix with optional bipartite metadata.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
    dims: Option<(usize, usize)>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace within [`TRACE_TOL`], and positive
    /// semidefiniteness within [`PSD_TOL`].
    pub fn new(op: HermitianOperator, dims: Option<(usize, usize)>) -> Result<Self> {
        if let Some(d) = dims {
            check_dims(op.dim(), d)?;
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Validation(format!(
                "density matrix trace {tr} deviates from 1 beyond {TRACE_TOL:.0e}"
            )));
        }
        let min = op.eig().min_eigenvalue();
        if min < PSD_TOL {
            return Err(Error::Validation(format!(
                "density matrix minimum eigenvalue {min:.3e} below {PSD_TOL:.0e}"
            )));
        }
        Ok(Self { op, dims })
    }

    pub fn from_matrix(mat: CMat, dims: Option<(usize, usize)>) -> Result<Self> {
        Self::new(HermitianOperator::new(mat)?, dims)
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn from_pure(psi: &CVec, dims: Option<(usize, usize)>) -> Result<Self> {
        let n2 = psi.norm_squared();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "pure state norm² = {n2}, expected 1"
            )));
        }
        let mat = psi * psi.adjoint() / Complex64::new(n2, 0.0);
        Self::from_matrix(mat, dims)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }

    /// Bipartite dims, or a validation error when absent.
    pub fn require_dims(&self) -> Result<(usize, usize)> {
        self.dims
            .ok_or_else(|| Error::Validation("bipartite dims required but not set".into()))
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn with_dims(&self, dims: (usize, usize)) -> Result<Self> {
        check_dims(self.dim(), dims)?;
        Ok(Self {
            op: self.op.clone(),
            dims: Some(dims),
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.op.eig().min_eigenvalue()
    }

    /// Exchanges the A and B factors; dims `(d_a, d_b)` become `(d_b, d_a)`.
    pub fn swap_subsystems(&self) -> Result<Self> {
        let (da, db) = self.require_dims()?;
        let m = self.matrix();
        let mut out = CMat::zeros(self.dim(), self.dim());
        for a in 0..da {
            for b in 0..db {
                for ap in 0..da {
                    for bp in 0..db {
                        out[(b * da + a, bp * da + ap)] = m[(a * db + b, ap * db + bp)];
                    }
                }
            }
        }
        Ok(Self {
            op: HermitianOperator::from_hermitian_unchecked(out),
            dims: Some((db, da)),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.op.to_matrix_file(self.dims)).expect("matrix serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(s).map_err(|e| Error::Format(format!("matrix file: {e}")))?;
        file.to_density()
    }
}

/// Repo-wide matrix file schema:
/// `{"dim": n, "dims": [dA, dB] | null, "entries": [[re, im], ...]}` with
/// entries row-major at full double precision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub dims: Option<(usize, usize)>,
    pub entries: Vec<(f64, f64)>,
}

impl MatrixFile {
    pub fn from_cmat(mat: &CMat, dims: Option<(usize, usize)>) -> Self {
        let dim = mat.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let z = mat[(i, j)];
                entries.push((z.re, z.im));
            }
        }
        MatrixFile { dim, dims, entries }
    }

    pub fn to_hermitian(&self) -> Result<HermitianOperator> {
        HermitianOperator::from_entries(self.dim, &self.entries)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_hermitian()?, self.dims)
    }
}
