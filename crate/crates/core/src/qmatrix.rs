//! Dense complex Hermitian linear algebra and the two state distances.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Every matrix that
//! enters an eigendecomposition is first replaced by its Hermitian part
//! `(M + M^H) / 2`, and eigenvalues in `[-1e-10, 0)` are treated as rounding
//! noise and clipped to zero before square roots and logarithms.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Invariant, Result};
use crate::tensor;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Maximum absolute deviation from Hermiticity accepted for a state.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Maximum accepted `|tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue still treated as rounding noise.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues of a target state at or below this are treated as exactly
/// zero when building its square-root factor.
pub const RANK_TOL: f64 = 1e-14;

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest `|m[i,j] - conj(m[j,i])|`.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            left: m.nrows(),
            right: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(())
}

fn no_convergence(m: &CMatrix) -> Error {
    Error::EigenNoConvergence {
        dim: m.nrows(),
        frobenius: m.norm(),
        asymmetry: max_asymmetry(m),
        finite: all_finite(m),
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// `V f(Λ) V^H`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            scaled.column_mut(j).scale_mut(fl);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|l| l)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn eig_iteration_budget(dim: usize) -> usize {
    1000 + 200 * dim
}

/// Eigenvalues ascending and orthonormal eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eig(m: &CMatrix) -> Result<SpectralDecomposition> {
    let dim = check_square(m)?;
    if !all_finite(m) {
        return Err(no_convergence(m));
    }
    let h = hermitize(m);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, eig_iteration_budget(dim))
        .ok_or_else(|| no_convergence(m))?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending. Cheaper than [`hermitian_eig`].
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_square(m)?;
    if !all_finite(m) {
        return Err(no_convergence(m));
    }
    let mut values: Vec<f64> = hermitize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Principal square root of a positive semidefinite matrix.
pub fn matrix_sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    let min = eig.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// Hilbert–Schmidt inner product `Re tr(A B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_square(a)?;
    check_same_dim(a, b)?;
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    Ok(acc)
}

/// `x·a + (1 - x)·b`, the point at parameter `x` on the segment from `b` to `a`.
pub fn convex_combination(x: f64, a: &CMatrix, b: &CMatrix) -> CMatrix {
    let y = 1.0 - x;
    a.zip_map(b, |p, q| p * x + q * y)
}

/// Rank-one projector `|ψ⟩⟨ψ|`.
pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite,
/// with a tensor-factor structure `local_dims` (party 1 most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    local_dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, local_dims: Vec<usize>) -> Result<Self> {
        validate(&matrix, &local_dims)?;
        Ok(Self { matrix, local_dims })
    }

    /// For matrices that are valid by construction (convex combinations of
    /// valid states). Only checked in debug builds.
    pub(crate) fn new_unchecked(matrix: CMatrix, local_dims: Vec<usize>) -> Self {
        debug_assert!(validate(&matrix, &local_dims).is_ok());
        Self { matrix, local_dims }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector `psi`.
    pub fn from_pure(psi: &CVector, local_dims: Vec<usize>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "pure state vector must have unit norm, got {norm}"
            )));
        }
        Self::new(projector(psi), local_dims)
    }

    /// `𝟙/d`.
    pub fn maximally_mixed(local_dims: Vec<usize>) -> Result<Self> {
        let dim = tensor::total_dim(&local_dims)?;
        let m = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self::new_unchecked(m, local_dims))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn n_parties(&self) -> usize {
        self.local_dims.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        // tr(ρρ) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `x·self + (1 - x)·other`.
    pub fn mix(&self, x: f64, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.local_dims != other.local_dims {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight must lie in [0, 1], got {x}"
            )));
        }
        Ok(Self::new_unchecked(
            convex_combination(x, &self.matrix, &other.matrix),
            self.local_dims.clone(),
        ))
    }

    /// Partial transpose on the given zero-based parties.
    pub fn partial_transpose(&self, parties: &[usize]) -> Result<CMatrix> {
        tensor::partial_transpose(&self.matrix, &self.local_dims, parties)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.matrix)?[0])
    }
}

fn validate(matrix: &CMatrix, local_dims: &[usize]) -> Result<()> {
    if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
        return Err(Error::InvalidState {
            invariant: Invariant::Shape,
            deviation: (matrix.nrows() as f64 - matrix.ncols() as f64).abs(),
        });
    }
    let dim = matrix.nrows();
    let product: usize = local_dims.iter().product();
    if local_dims.is_empty() || local_dims.contains(&0) || product != dim {
        return Err(Error::InvalidState {
            invariant: Invariant::LocalDims,
            deviation: (product as f64 - dim as f64).abs(),
        });
    }
    if !all_finite(matrix) {
        return Err(Error::InvalidState {
            invariant: Invariant::Finiteness,
            deviation: f64::INFINITY,
        });
    }
    let asym = max_asymmetry(matrix);
    if asym > HERMITIAN_TOL {
        return Err(Error::InvalidState {
            invariant: Invariant::Hermiticity,
            deviation: asym,
        });
    }
    let tr = matrix.trace();
    let trace_dev = (tr - Complex64::new(1.0, 0.0)).norm();
    if trace_dev > TRACE_TOL {
        return Err(Error::InvalidState {
            invariant: Invariant::Trace,
            deviation: trace_dev,
        });
    }
    let min = hermitian_eigenvalues(matrix)?[0];
    if min < -PSD_TOL {
        return Err(Error::InvalidState {
            invariant: Invariant::Positivity,
            deviation: -min,
        });
    }
    Ok(())
}

/// The distance `D(ρ, σ)` being minimized over a separable set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// `B²(ρ,σ) = 2 - 2√F(ρ,σ)`.
    BuresSquared,
    /// `S(ρ‖σ) = tr ρ(log₂ρ - log₂σ)`, in bits.
    RelativeEntropy,
}

impl MeasureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureKind::BuresSquared => "bures2",
            MeasureKind::RelativeEntropy => "relent",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Support handling for the relative entropy against rank-deficient `σ`.
///
/// Eigenvalues of `ρ` at or below `support_tol` contribute nothing to
/// `tr ρ log ρ`. Eigenvalues of `σ` at or below `support_tol` span a null
/// space; if `ρ` puts more than `mass_tol` weight there the distance is
/// `+∞`, otherwise those eigenvalues are floored at `support_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelEntropyTolerances {
    pub support_tol: f64,
    pub mass_tol: f64,
}

impl Default for RelEntropyTolerances {
    fn default() -> Self {
        Self {
            support_tol: 1e-12,
            mass_tol: 1e-9,
        }
    }
}

/// A target state `ρ` with its spectral data cached, so that repeated
/// distances `D(ρ, σ)` cost one eigendecomposition of a matrix built from `σ`.
///
/// `ρ = W W^H` with `W = V_r diag(√λ_r)` over the eigenvalues above
/// [`RANK_TOL`]. The fidelity is evaluated on the `r × r` matrix `W^H σ W`,
/// which has the same nonzero spectrum as `√ρ σ √ρ`.
#[derive(Debug, Clone)]
pub struct TargetState {
    rho: DensityMatrix,
    root_factor: CMatrix,
    entropy_term: f64,
    tolerances: RelEntropyTolerances,
}

impl TargetState {
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        Self::with_tolerances(rho, RelEntropyTolerances::default())
    }

    pub fn with_tolerances(rho: DensityMatrix, tolerances: RelEntropyTolerances) -> Result<Self> {
        let eig = hermitian_eig(rho.matrix())?;
        let min = eig.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        let kept: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&k| eig.eigenvalues[k] > RANK_TOL)
            .collect();
        let dim = rho.dim();
        let mut root_factor = CMatrix::zeros(dim, kept.len());
        for (col, &k) in kept.iter().enumerate() {
            let s = eig.eigenvalues[k].sqrt();
            root_factor.set_column(col, &(eig.eigenvectors.column(k) * Complex64::new(s, 0.0)));
        }
        let entropy_term = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l > tolerances.support_tol)
            .map(|&l| l * l.log2())
            .sum();
        Ok(Self {
            rho,
            root_factor,
            entropy_term,
            tolerances,
        })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Numerical rank of `ρ`.
    pub fn rank(&self) -> usize {
        self.root_factor.ncols()
    }

    fn check_sigma(&self, sigma: &CMatrix) -> Result<()> {
        check_same_dim(self.rho.matrix(), sigma)
    }

    /// `F(ρ,σ) = (tr √(√ρ σ √ρ))²`, clamped to `[0, 1]`.
    pub fn fidelity(&self, sigma: &CMatrix) -> Result<f64> {
        self.check_sigma(sigma)?;
        let w = &self.root_factor;
        let inner = w.adjoint() * sigma * w;
        // Eigenvalues at rounding level are zeroed like the spectrum of ρ;
        // their square roots would otherwise add O(√ε) to the trace.
        let root = |l: f64| if l > RANK_TOL { l.sqrt() } else { 0.0 };
        let root_trace: f64 = if inner.nrows() == 1 {
            root(inner[(0, 0)].re)
        } else {
            hermitian_eigenvalues(&inner)?.into_iter().map(root).sum()
        };
        Ok((root_trace * root_trace).clamp(0.0, 1.0))
    }

    pub fn bures_squared(&self, sigma: &CMatrix) -> Result<f64> {
        let f = self.fidelity(sigma)?;
        Ok((2.0 - 2.0 * f.sqrt()).clamp(0.0, 2.0))
    }

    /// `S(ρ‖σ)` in bits; `f64::INFINITY` when `ρ` leaks out of the support of `σ`.
    pub fn relative_entropy(&self, sigma: &CMatrix) -> Result<f64> {
        self.check_sigma(sigma)?;
        let eig = hermitian_eig(sigma)?;
        let min = eig.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        // ⟨v_i|ρ|v_i⟩ = ‖W^H v_i‖²
        let overlaps = self.root_factor.adjoint() * &eig.eigenvectors;
        let tol = self.tolerances;
        let mut null_mass = 0.0;
        let mut cross = 0.0;
        for (i, &mu) in eig.eigenvalues.iter().enumerate() {
            let weight = overlaps.column(i).norm_squared();
            if mu <= tol.support_tol {
                null_mass += weight;
            }
            cross += weight * mu.max(tol.support_tol).log2();
        }
        if null_mass > tol.mass_tol {
            return Ok(f64::INFINITY);
        }
        Ok((self.entropy_term - cross).max(0.0))
    }

    /// A positive multiple of `-∇_σ D(ρ, σ)`, the steepest-descent direction
    /// of the measure at `σ` as a linear functional on states.
    ///
    /// Relative entropy: the Fréchet derivative of `log σ` applied to `ρ`,
    /// `V (Γ ∘ V^H ρ V) V^H` with the divided differences
    /// `Γ_ij = (ln μ_i - ln μ_j)/(μ_i - μ_j)` (and `1/μ_i` on the diagonal).
    /// Bures: `W (W^H σ W)^{-1/2} W^H`, the derivative of `√F`.
    /// Eigenvalues of `σ` are floored at the support tolerance.
    pub fn descent_direction(&self, measure: MeasureKind, sigma: &CMatrix) -> Result<CMatrix> {
        self.check_sigma(sigma)?;
        let floor = self.tolerances.support_tol;
        match measure {
            MeasureKind::RelativeEntropy => {
                let eig = hermitian_eig(sigma)?;
                let v = &eig.eigenvectors;
                let mu: Vec<f64> = eig.eigenvalues.iter().map(|&m| m.max(floor)).collect();
                let mut inner = v.adjoint() * self.rho.matrix() * v;
                let n = mu.len();
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (mu[i], mu[j]);
                        let gamma = if (a - b).abs() <= 1e-12 * a.max(b) {
                            2.0 / (a + b)
                        } else {
                            (a.ln() - b.ln()) / (a - b)
                        };
                        inner[(i, j)] *= gamma;
                    }
                }
                Ok(hermitize(&(v * inner * v.adjoint())))
            }
            MeasureKind::BuresSquared => {
                let w = &self.root_factor;
                let eig = hermitian_eig(&(w.adjoint() * sigma * w))?;
                let inv_root = eig.map(|l| 1.0 / l.max(floor).sqrt());
                Ok(hermitize(&(w * inv_root * w.adjoint())))
            }
        }
    }

    pub fn distance(&self, measure: MeasureKind, sigma: &CMatrix) -> Result<f64> {
        match measure {
            MeasureKind::BuresSquared => self.bures_squared(sigma),
            MeasureKind::RelativeEntropy => self.relative_entropy(sigma),
        }
    }
}

fn target(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<TargetState> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    TargetState::new(rho.clone())
}

pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    target(rho, sigma)?.fidelity(sigma.matrix())
}

pub fn bures_squared(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    target(rho, sigma)?.bures_squared(sigma.matrix())
}

pub fn relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tolerances: RelEntropyTolerances,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    TargetState::with_tolerances(rho.clone(), tolerances)?.relative_entropy(sigma.matrix())
}

pub fn distance(measure: MeasureKind, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    target(rho, sigma)?.distance(measure, sigma.matrix())
}

/// `⟨ψ|σ|ψ⟩`, the fidelity of a pure state with `σ`.
pub fn pure_state_fidelity(psi: &CVector, sigma: &CMatrix) -> Result<f64> {
    if psi.len() != sigma.nrows() {
        return Err(Error::DimensionMismatch {
            left: psi.len(),
            right: sigma.nrows(),
        });
    }
    Ok((psi.adjoint() * sigma * psi)[(0, 0)].re.clamp(0.0, 1.0))
}
