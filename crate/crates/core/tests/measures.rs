mod common;

use common::*;
use entbound::qmatrix::{
    self, bures_squared, fidelity, hs_inner, matrix_sqrt_psd, pure_state_fidelity,
    RelEntropyTolerances,
};
use entbound::{CMatrix, DensityMatrix, MeasureKind, TargetState};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![2]),
        Just(vec![3]),
        Just(vec![2, 2]),
        Just(vec![2, 3]),
        Just(vec![2, 2, 2]),
    ]
}

fn rel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    qmatrix::relative_entropy(rho, sigma, RelEntropyTolerances::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(
        dims in dims(), r1 in 1usize..=4, r2 in 1usize..=4, s1: u64, s2: u64,
    ) {
        let rho = random_state(&dims, r1, s1);
        let sigma = random_state(&dims, r2, s2);
        let f = fidelity(&rho, &sigma).unwrap();
        let g = fidelity(&sigma, &rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - g).abs() < 1e-8, "{f} vs {g}");
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fidelity_brackets_trace_distance(dims in dims(), r1 in 1usize..=4, r2 in 1usize..=4, s1: u64, s2: u64) {
        // 1 - √F ≤ ½‖ρ - σ‖₁ ≤ √(1 - F), so F = 1 forces ρ = σ.
        let rho = random_state(&dims, r1, s1);
        let sigma = random_state(&dims, r2, s2);
        let f = fidelity(&rho, &sigma).unwrap();
        let td = 0.5 * trace_norm(&(rho.matrix() - sigma.matrix()));
        prop_assert!(1.0 - f.sqrt() <= td + 1e-8);
        prop_assert!(td <= (1.0 - f).max(0.0).sqrt() + 1e-6);
    }

    #[test]
    fn fidelity_matches_textbook_route(dims in dims(), r1 in 1usize..=4, r2 in 1usize..=4, s1: u64, s2: u64) {
        let rho = random_state(&dims, r1, s1);
        let sigma = random_state(&dims, r2, s2);
        let f = fidelity(&rho, &sigma).unwrap();
        let naive = naive_fidelity(rho.matrix(), sigma.matrix());
        prop_assert!((f - naive).abs() < 1e-7, "{f} vs {naive}");
    }

    #[test]
    fn bures_is_monotone_in_fidelity(dims in dims(), seeds in prop::array::uniform3(any::<u64>())) {
        let rho = random_state(&dims, 2, seeds[0]);
        let a = random_state(&dims, 3, seeds[1]);
        let b = random_state(&dims, 3, seeds[2]);
        let (fa, fb) = (fidelity(&rho, &a).unwrap(), fidelity(&rho, &b).unwrap());
        let (ba, bb) = (bures_squared(&rho, &a).unwrap(), bures_squared(&rho, &b).unwrap());
        prop_assert!((ba - (2.0 - 2.0 * fa.sqrt())).abs() < 1e-12);
        if fa > fb {
            prop_assert!(ba <= bb + 1e-12);
        }
        prop_assert!((0.0..=2.0).contains(&ba));
    }

    #[test]
    fn klein_and_pinsker(dims in dims(), r1 in 1usize..=4, s1: u64, s2: u64) {
        let d: usize = dims.iter().product();
        let rho = random_state(&dims, r1, s1);
        let sigma = random_state(&dims, d, s2);
        let s = rel_entropy(&rho, &sigma);
        let td = trace_norm(&(rho.matrix() - sigma.matrix()));
        prop_assert!(s >= 0.0);
        prop_assert!(s >= td * td / (2.0 * std::f64::consts::LN_2) - 1e-9, "{s} vs {td}");
        prop_assert!(rel_entropy(&rho, &rho).abs() < 1e-9);
    }

    #[test]
    fn relative_entropy_matches_textbook_route(dims in dims(), s1: u64, s2: u64) {
        let d: usize = dims.iter().product();
        let rho = random_state(&dims, d, s1);
        let sigma = random_state(&dims, d, s2);
        let s = rel_entropy(&rho, &sigma);
        let naive = naive_relative_entropy(rho.matrix(), sigma.matrix());
        prop_assert!((s - naive).abs() < 1e-8 * (1.0 + naive.abs()), "{s} vs {naive}");
    }

    #[test]
    fn distance_is_convex_along_segments(
        dims in dims(), r in 1usize..=4, seeds in prop::array::uniform3(any::<u64>()),
    ) {
        let d: usize = dims.iter().product();
        let rho = random_state(&dims, r, seeds[0]);
        let s0 = random_state(&dims, d, seeds[1]);
        let s1 = random_state(&dims, d, seeds[2]);
        let target = TargetState::new(rho).unwrap();
        for measure in [MeasureKind::BuresSquared, MeasureKind::RelativeEntropy] {
            let d0 = target.distance(measure, s0.matrix()).unwrap();
            let d1 = target.distance(measure, s1.matrix()).unwrap();
            for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let mid = qmatrix::convex_combination(x, s0.matrix(), s1.matrix());
                let dm = target.distance(measure, &mid).unwrap();
                prop_assert!(dm <= x * d0 + (1.0 - x) * d1 + 1e-8, "{measure} x={x}: {dm}");
            }
        }
    }

    #[test]
    fn square_root_squares_back(dims in dims(), r in 1usize..=4, s: u64) {
        let rho = random_state(&dims, r, s);
        let root = matrix_sqrt_psd(rho.matrix()).unwrap();
        let err = (&root * &root - rho.matrix()).norm();
        prop_assert!(err < 1e-8 * rho.dim() as f64, "{err}");
        prop_assert!(qmatrix::max_asymmetry(&root) < 1e-12);
    }

    #[test]
    fn pure_fidelity_shortcut(dims in dims(), r in 1usize..=4, s1: u64, s2: u64) {
        let d: usize = dims.iter().product();
        let psi = random_pure(d, s1);
        let pure = DensityMatrix::from_pure(&psi, dims.clone()).unwrap();
        let sigma = random_state(&dims, r, s2);
        let short = pure_state_fidelity(&psi, sigma.matrix()).unwrap();
        let full = fidelity(&pure, &sigma).unwrap();
        prop_assert!((short - full).abs() < 1e-9, "{short} vs {full}");
    }

    #[test]
    fn hs_inner_is_real_trace_of_product(dims in dims(), s1: u64, s2: u64) {
        let a = random_state(&dims, 2, s1);
        let b = random_state(&dims, 3, s2);
        let direct = (a.matrix() * b.matrix()).trace().re;
        prop_assert!((hs_inner(a.matrix(), b.matrix()).unwrap() - direct).abs() < 1e-14);
    }
}

#[test]
fn relative_entropy_support_rule() {
    let pure = schmidt_state(0.3);
    let product = DensityMatrix::new(
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ])),
        vec![2, 2],
    )
    .unwrap();
    // Each state has weight outside the other's support.
    assert_eq!(rel_entropy(&pure, &product), f64::INFINITY);
    assert_eq!(rel_entropy(&product, &pure), f64::INFINITY);
    let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
    assert!((rel_entropy(&pure, &mixed) - 2.0).abs() < 1e-12);
}

#[test]
fn measures_of_pure_states_against_their_dephased_version() {
    // For |ψ⟩ = cos θ|00⟩ + sin θ|11⟩ and σ its diagonal part,
    // S(ψ‖σ) is the entropy of (cos²θ, sin²θ) and F = cos⁴θ + sin⁴θ.
    for theta in [0.1, 0.4, std::f64::consts::FRAC_PI_4] {
        let psi = schmidt_state(theta);
        let diag = CMatrix::from_diagonal(&psi.matrix().diagonal());
        let sigma = DensityMatrix::new(diag, vec![2, 2]).unwrap();
        let s = rel_entropy(&psi, &sigma);
        let expected = entanglement_entropy(&[theta.cos(), theta.sin()]);
        assert!((s - expected).abs() < 1e-9, "{s} vs {expected}");
        let f = fidelity(&psi, &sigma).unwrap();
        let expected = theta.cos().powi(4) + theta.sin().powi(4);
        assert!((f - expected).abs() < 1e-9, "{f} vs {expected}");
    }
}
