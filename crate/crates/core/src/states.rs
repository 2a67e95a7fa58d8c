//! State families: GHZ, W, the 3×3 Horodecki family, chessboard states,
//! white-noise mixing, and seeded random product states.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qmatrix::{projector, CMatrix, CVector, DensityMatrix};
use crate::rng::{random_unit_vector, StateRng};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Visibility `p ∈ [0, 1]` of the entangled component in `pρ + (1-p)𝟙/d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParam(f64);

impl NoiseParam {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "noise parameter p must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Parameter `a ∈ (0, 1)` of the Horodecki 3×3 bound entangled family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorodeckiParam(f64);

impl HorodeckiParam {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Horodecki parameter a must lie in (0, 1), got {a}"
            )));
        }
        Ok(Self(a))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Parameters of the 3×3 chessboard family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChessboardParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub m: Complex64,
    pub n: Complex64,
}

impl ChessboardParams {
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
        m: Complex64,
        n: Complex64,
    ) -> Result<Self> {
        if m.norm() == 0.0 || n.norm() == 0.0 {
            return Err(Error::InvalidParameter(
                "chessboard parameters m and n must be nonzero".into(),
            ));
        }
        let all = [a, b, c, d, m, n];
        if all.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "chessboard parameters must be finite".into(),
            ));
        }
        Ok(Self { a, b, c, d, m, n })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64, m: f64, n: f64) -> Result<Self> {
        Self::new(real(a), real(b), real(c), real(d), real(m), real(n))
    }

    /// `s = a c* / n*`.
    pub fn s(&self) -> Complex64 {
        self.a * self.c.conj() / self.n.conj()
    }

    /// `t = a d* / m*`.
    pub fn t(&self) -> Complex64 {
        self.a * self.d.conj() / self.m.conj()
    }

    /// The four unnormalized vectors `V₁ … V₄`, nine amplitudes each.
    pub fn vectors(&self) -> [CVector; 4] {
        let Self { a, b, c, d, m, n } = *self;
        let (s, t) = (self.s(), self.t());
        let v = |amps: [Complex64; 9]| CVector::from_row_slice(&amps);
        [
            v([m, ZERO, s, ZERO, n, ZERO, ZERO, ZERO, ZERO]),
            v([ZERO, a, ZERO, b, ZERO, c, ZERO, ZERO, ZERO]),
            v([n.conj(), ZERO, ZERO, ZERO, -m.conj(), ZERO, t, ZERO, ZERO]),
            v([ZERO, b.conj(), ZERO, -a.conj(), ZERO, ZERO, ZERO, d, ZERO]),
        ]
    }

    /// `N = 1 / Σ_j ⟨V_j|V_j⟩`.
    pub fn normalization(&self) -> f64 {
        1.0 / self.vectors().iter().map(|v| v.norm_squared()).sum::<f64>()
    }
}

/// Smallest `|m|`, `|n|` accepted when sampling chessboard parameters.
pub const CHESSBOARD_MIN_MN: f64 = 1e-6;

/// Draw `a, b, c, d, m, n` uniformly from `[0, 1]`, redrawing while `m` or
/// `n` is below [`CHESSBOARD_MIN_MN`]. Returns the parameters and the number
/// of rejected draws.
pub fn sample_chessboard_params(rng: &mut StateRng) -> (ChessboardParams, usize) {
    let mut rejected = 0;
    loop {
        let mut draw = [0.0f64; 6];
        for x in draw.iter_mut() {
            *x = rng.random_range(0.0..=1.0);
        }
        let [a, b, c, d, m, n] = draw;
        if m < CHESSBOARD_MIN_MN || n < CHESSBOARD_MIN_MN {
            rejected += 1;
            continue;
        }
        let params = ChessboardParams::from_real(a, b, c, d, m, n)
            .expect("m and n were checked to be nonzero");
        return (params, rejected);
    }
}

fn check_parties(n_parties: usize) -> Result<()> {
    if n_parties < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 parties, got {n_parties}"
        )));
    }
    if n_parties > 20 {
        return Err(Error::InvalidParameter(format!(
            "{n_parties} qubits is beyond dense-matrix range"
        )));
    }
    Ok(())
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n_parties` qubits.
pub fn ghz_vector(n_parties: usize) -> Result<CVector> {
    check_parties(n_parties)?;
    let dim = 1usize << n_parties;
    let mut psi = CVector::zeros(dim);
    let amp = real(std::f64::consts::FRAC_1_SQRT_2);
    psi[0] = amp;
    psi[dim - 1] = amp;
    Ok(psi)
}

pub fn ghz(n_parties: usize) -> Result<DensityMatrix> {
    let psi = ghz_vector(n_parties)?;
    DensityMatrix::from_pure(&psi, vec![2; n_parties])
}

/// Equal superposition of all weight-one basis strings on `n_parties` qubits.
pub fn w_vector(n_parties: usize) -> Result<CVector> {
    check_parties(n_parties)?;
    let dim = 1usize << n_parties;
    let mut psi = CVector::zeros(dim);
    let amp = real(1.0 / (n_parties as f64).sqrt());
    for k in 0..n_parties {
        psi[1 << k] = amp;
    }
    Ok(psi)
}

pub fn w_state(n_parties: usize) -> Result<DensityMatrix> {
    let psi = w_vector(n_parties)?;
    DensityMatrix::from_pure(&psi, vec![2; n_parties])
}

/// The Horodecki 3×3 PPT entangled state with parameter `a`.
pub fn horodecki(a: HorodeckiParam) -> Result<DensityMatrix> {
    let a = a.value();
    let mut m = CMatrix::zeros(9, 9);
    for k in [0, 1, 2, 3, 4, 5, 7] {
        m[(k, k)] = real(a);
    }
    for (i, j) in [(0, 4), (0, 8), (4, 8)] {
        m[(i, j)] = real(a);
        m[(j, i)] = real(a);
    }
    let edge = (1.0 + a) / 2.0;
    let off = (1.0 - a * a).sqrt() / 2.0;
    m[(6, 6)] = real(edge);
    m[(8, 8)] = real(edge);
    m[(6, 8)] = real(off);
    m[(8, 6)] = real(off);
    m.unscale_mut(8.0 * a + 1.0);
    DensityMatrix::new(m, vec![3, 3])
}

/// `N Σ_j |V_j⟩⟨V_j|`.
pub fn chessboard(params: &ChessboardParams) -> Result<DensityMatrix> {
    let vectors = params.vectors();
    let mut m = CMatrix::zeros(9, 9);
    for v in &vectors {
        m += projector(v);
    }
    m.scale_mut(params.normalization());
    // the Gram sum is exactly Hermitian up to rounding in the products
    let m = crate::qmatrix::hermitize(&m);
    DensityMatrix::new(m, vec![3, 3])
}

/// `pρ + (1 - p)𝟙/d`.
pub fn mix_white_noise(rho: &DensityMatrix, p: NoiseParam) -> Result<DensityMatrix> {
    let noise = DensityMatrix::maximally_mixed(rho.local_dims().to_vec())?;
    rho.mix(p.value(), &noise)
}

/// Local vectors of a Haar-random pure product state, one per block dimension.
pub fn random_product_state(block_dims: &[usize], rng: &mut StateRng) -> Vec<CVector> {
    block_dims
        .iter()
        .map(|&d| random_unit_vector(d, rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ghz2_is_bell() {
        let rho = ghz(2).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(rho.matrix()[(i, j)].re, 0.5, epsilon = 1e-15);
        }
        let nonzero = rho.matrix().iter().filter(|z| z.norm() > 1e-15).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn ghz3_support() {
        let rho = ghz(3).unwrap();
        assert_eq!(rho.dim(), 8);
        for i in 0..8 {
            for j in 0..8 {
                let expected = if [0, 7].contains(&i) && [0, 7].contains(&j) {
                    0.5
                } else {
                    0.0
                };
                assert_abs_diff_eq!(rho.matrix()[(i, j)].re, expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn ghz_and_w_are_pure() {
        for n in 2..=5 {
            assert_abs_diff_eq!(ghz(n).unwrap().purity(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(w_state(n).unwrap().purity(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_few_parties() {
        assert!(ghz(1).is_err());
        assert!(w_state(0).is_err());
    }

    #[test]
    fn w2_and_w3_amplitudes() {
        let rho = w_state(2).unwrap();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert_abs_diff_eq!(rho.matrix()[(i, j)].re, 0.5, epsilon = 1e-15);
        }
        let psi = w_vector(3).unwrap();
        let amp = 1.0 / 3f64.sqrt();
        for k in [4, 2, 1] {
            assert_abs_diff_eq!(psi[k].re, amp, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn w_single_qubit_marginal() {
        for n in 2..=5 {
            let rho = w_state(n).unwrap();
            // trace out all parties except the first
            let rest = 1 << (n - 1);
            let mut p1 = 0.0;
            for r in 0..rest {
                p1 += rho.matrix()[(rest + r, rest + r)].re;
            }
            let coherence: Complex64 = (0..rest).map(|r| rho.matrix()[(r, rest + r)]).sum();
            assert_abs_diff_eq!(p1, 1.0 / n as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(coherence.norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn horodecki_entries() {
        let rho = horodecki(HorodeckiParam::new(0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(6, 6)].re, 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(
            rho.matrix()[(8, 6)].re,
            0.75f64.sqrt() / 10.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn horodecki_rejects_out_of_range() {
        assert!(HorodeckiParam::new(0.0).is_err());
        assert!(HorodeckiParam::new(1.0).is_err());
        assert!(HorodeckiParam::new(f64::NAN).is_err());
    }

    #[test]
    fn horodecki_is_ppt() {
        for k in 1..=9 {
            let a = k as f64 / 10.0;
            let rho = horodecki(HorodeckiParam::new(a).unwrap()).unwrap();
            let pt = rho.partial_transpose(&[1]).unwrap();
            let min = crate::qmatrix::hermitian_eigenvalues(&pt).unwrap()[0];
            assert!(min >= -1e-10, "a={a}: min PT eigenvalue {min}");
        }
    }

    #[test]
    fn chessboard_all_ones() {
        let p = ChessboardParams::from_real(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.s().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.t().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.normalization(), 1.0 / 12.0, epsilon = 1e-15);
        let v1 = &p.vectors()[0];
        let expected = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        for (k, e) in expected.iter().enumerate() {
            assert_abs_diff_eq!(v1[k].re, *e, epsilon = 1e-15);
        }
    }

    #[test]
    fn chessboard_requires_nonzero_m_n() {
        assert!(ChessboardParams::from_real(0.5, 0.5, 0.5, 0.5, 0.0, 0.5).is_err());
        assert!(ChessboardParams::from_real(0.5, 0.5, 0.5, 0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn chessboard_random_draws_are_states_of_rank_at_most_four() {
        let mut rng = rng_from_seed(11);
        for _ in 0..50 {
            let (p, _) = sample_chessboard_params(&mut rng);
            let rho = chessboard(&p).unwrap();
            let eig = crate::qmatrix::hermitian_eigenvalues(rho.matrix()).unwrap();
            assert!(eig[0] >= -1e-12);
            assert!(eig.iter().filter(|&&l| l > 1e-10).count() <= 4);
            assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn noise_mixing() {
        let rho = ghz(2).unwrap();
        let same = mix_white_noise(&rho, NoiseParam::new(1.0).unwrap()).unwrap();
        assert!((same.matrix() - rho.matrix()).norm() < 1e-15);
        let flat = mix_white_noise(&rho, NoiseParam::new(0.0).unwrap()).unwrap();
        let id4 = CMatrix::identity(4, 4) * real(0.25);
        assert!((flat.matrix() - id4).norm() < 1e-15);

        let p0 = DensityMatrix::new(
            CMatrix::from_diagonal(&CVector::from_vec(vec![real(1.0), ZERO])),
            vec![2],
        )
        .unwrap();
        let half = mix_white_noise(&p0, NoiseParam::new(0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(half.matrix()[(0, 0)].re, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(half.matrix()[(1, 1)].re, 0.25, epsilon = 1e-15);
        assert!(NoiseParam::new(1.5).is_err());
    }

    #[test]
    fn random_product_states() {
        let mut r1 = rng_from_seed(5);
        let mut r2 = rng_from_seed(5);
        let a = random_product_state(&[2, 2], &mut r1);
        let b = random_product_state(&[2, 2], &mut r2);
        assert_eq!(a, b);
        for v in &a {
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
        let single = random_product_state(&[9], &mut r1);
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].len(), 9);

        let mut r3 = rng_from_seed(6);
        let c = random_product_state(&[2, 2], &mut r3);
        assert!(a[0].dotc(&c[0]).norm() < 1.0 - 1e-9);
    }
}
