//! Test helpers: random states and independent reference computations.
#![allow(dead_code)]

use entbound::rng::{random_unit_vector, rng_from_seed, StateRng};
use entbound::{CMatrix, CVector, DensityMatrix};
use nalgebra::{Complex, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `G G† / tr(G G†)` for a `dim × rank` complex Gaussian `G`.
pub fn random_density(dim: usize, rank: usize, rng: &mut StateRng) -> CMatrix {
    let g = CMatrix::from_fn(dim, rank, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m / c(tr, 0.0);
    (&m + m.adjoint()) * c(0.5, 0.0)
}

pub fn random_state(local_dims: &[usize], rank: usize, seed: u64) -> DensityMatrix {
    let dim = local_dims.iter().product();
    let mut rng = rng_from_seed(seed);
    DensityMatrix::new(random_density(dim, rank, &mut rng), local_dims.to_vec()).unwrap()
}

pub fn random_pure(dim: usize, seed: u64) -> CVector {
    random_unit_vector(dim, &mut rng_from_seed(seed))
}

/// Eigenvalues of a Hermitian matrix straight from nalgebra, ascending.
pub fn eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `f(M)` for Hermitian `M`, straight from nalgebra.
pub fn apply(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex::new(f(l), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `(tr √(√ρ σ √ρ))²` by the textbook route.
pub fn naive_fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let s = apply(rho, |l| l.max(0.0).sqrt());
    let inner = &s * sigma * &s;
    let t: f64 = eigenvalues(&inner).iter().map(|l| l.max(0.0).sqrt()).sum();
    t * t
}

/// `tr ρ (log₂ ρ − log₂ σ)` for full-rank states.
pub fn naive_relative_entropy(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let log2 = |l: f64| l.log2();
    let d = apply(rho, log2) - apply(sigma, log2);
    (rho * d).trace().re
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    eigenvalues(m).iter().map(|l| l.abs()).sum()
}

/// Shannon entropy in bits of the squared Schmidt coefficients.
pub fn entanglement_entropy(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .map(|a| a * a)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// `cos θ |00⟩ + sin θ |11⟩`.
pub fn schmidt_state(theta: f64) -> DensityMatrix {
    let mut v = CVector::zeros(4);
    v[0] = c(theta.cos(), 0.0);
    v[3] = c(theta.sin(), 0.0);
    DensityMatrix::from_pure(&v, vec![2, 2]).unwrap()
}

/// Trace norm of the realigned matrix `R[(i,j),(k,l)] = ρ[(i,k),(j,l)]` of a
/// bipartite `d × d` state; above 1 certifies entanglement.
pub fn realignment_norm(rho: &CMatrix, d: usize) -> f64 {
    let mut r = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    r[(i * d + j, k * d + l)] = rho[(i * d + k, j * d + l)];
                }
            }
        }
    }
    let sv = r.singular_values();
    sv.iter().sum()
}

/// Largest `⟨a⊗b|X|a⊗b⟩` over a grid of qubit states
/// `cos(t/2)|0⟩ + e^{iφ} sin(t/2)|1⟩` with spacing `step` in both angles.
pub fn two_qubit_grid_max(x: &CMatrix, step: f64) -> f64 {
    let n_t = (std::f64::consts::PI / step).round() as usize;
    let n_p = (2.0 * std::f64::consts::PI / step).round() as usize;
    let mut qubits = Vec::new();
    for i in 0..=n_t {
        let t = i as f64 * step;
        for j in 0..n_p {
            let p = j as f64 * step;
            qubits.push([
                c((t / 2.0).cos(), 0.0),
                Complex64::from_polar((t / 2.0).sin(), p),
            ]);
        }
    }
    let mut best = f64::NEG_INFINITY;
    for a in &qubits {
        // (⟨a| ⊗ 𝟙) X (|a⟩ ⊗ 𝟙)
        let mut m = [[c(0.0, 0.0); 2]; 2];
        for (r, mr) in m.iter_mut().enumerate() {
            for (s, entry) in mr.iter_mut().enumerate() {
                let mut acc = c(0.0, 0.0);
                for i in 0..2 {
                    for k in 0..2 {
                        acc += a[i].conj() * x[(i * 2 + r, k * 2 + s)] * a[k];
                    }
                }
                *entry = acc;
            }
        }
        for b in &qubits {
            let mut v = c(0.0, 0.0);
            for r in 0..2 {
                for s in 0..2 {
                    v += b[r].conj() * m[r][s] * b[s];
                }
            }
            best = best.max(v.re);
        }
    }
    best
}
