use nalgebra::Complex;
use proptest::prelude::*;
use qidlab::channels::spec::random_stinespring;
use qidlab::channels::LinearMap;
use qidlab::metrics::{
    check_f_vs_d, diamond_norm_estimate, fidelity, forgetfulness_deficit, geometry_deficit, output_distance,
    overlap_trace_norm, pure_distance, trace_norm, OptimConfig,
};
use qidlab::qid::{
    build_decoders, evaluate_code, haar_targets, helstrom, minimax_decoder, ortho_to_all_bound,
    qid_to_forgetfulness_bound, random_code, technical_eta, Code,
};
use qidlab::rng::seeded;
use qidlab::tensor::{self, haar_state, ComplexOperator, PureState};
use qidlab::{CMatrix, CVector};

fn random_density(d: usize, rank: usize, seed: u64) -> CMatrix {
    let g: CMatrix = tensor::gaussian_matrix(d, rank, &mut seeded(seed));
    let w = &g * g.adjoint();
    let tr = w.trace();
    w / tr
}

fn c(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

/// Square root with eigenvalues below 1e-12 set to zero, so rank-deficient
/// inputs carry no `√noise` terms.
fn clamped_sqrt(m: &CMatrix) -> CMatrix {
    let eig = tensor::eigh(m);
    let roots = CMatrix::from_diagonal(&CVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&v| c(if v > 1e-12 { v.sqrt() } else { 0.0 })),
    ));
    &eig.vectors * roots * eig.vectors.adjoint()
}

/// Fidelity as `‖√ρ √σ‖₁²` through singular values.
fn oracle_fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    (clamped_sqrt(rho) * clamped_sqrt(sigma)).singular_values().sum().powi(2)
}

#[test]
fn bound_formulas_match_hand_values() {
    assert_eq!(ortho_to_all_bound(0.0), 0.0);
    assert!((ortho_to_all_bound(0.01) - 0.21).abs() < 1e-15);
    assert_eq!(ortho_to_all_bound(1.0), 3.0);
    assert_eq!(qid_to_forgetfulness_bound(0.0), 0.0);
    assert!((qid_to_forgetfulness_bound(1e-4) - 0.7).abs() < 1e-12);
    assert_eq!(technical_eta(1.0, 1.0, 0.0, 0.0), 0.0);
    assert!((technical_eta(2.0, 1.0, 1e-3, 1e-3) - 1.195).abs() < 1e-3);
}

#[test]
fn helstrom_examples() {
    let p0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    let p1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
    let plus = CMatrix::from_element(2, 2, c(0.5));
    let h = helstrom(&p0, &p1).unwrap();
    assert!((h.bias - 1.0).abs() < 1e-12);
    assert!((h.projector - &p0).camax() < 1e-12);
    assert!(helstrom(&plus, &plus).unwrap().bias.abs() < 1e-12);
    assert!((helstrom(&p0, &plus).unwrap().bias - 0.5f64.sqrt()).abs() < 1e-12);
}

/// Margins from fictitious play on a few fixed codes, at doubling horizons.
#[test]
fn minimax_margin_never_worsens_with_more_iterations() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = Code::new(CMatrix::from_row_slice(4, 2, &[c(h), c(h), c(0.0), c(0.0), c(0.0), c(0.0), c(h), c(-h)]), 2, 2, None).unwrap();
    let codes = vec![
        bell,
        random_code(4, 2, 3, &mut seeded(1)).unwrap(),
        random_code(6, 2, 4, &mut seeded(2)).unwrap(),
        random_code(3, 3, 5, &mut seeded(3)).unwrap(),
    ];
    for code in &codes {
        for phi in haar_targets(code, 2, 5) {
            let mut prev = f64::INFINITY;
            for iters in [25, 50, 100, 200] {
                let atom = minimax_decoder(code, &phi, iters).unwrap();
                assert!(atom.game_upper <= prev + 1e-6, "{iters}: {} after {prev}", atom.game_upper);
                // Saddle sandwich: certified upper value above the lower one.
                assert!(atom.game_upper >= atom.game_lower - 1e-9);
                prev = atom.game_upper;
            }
        }
    }
}

#[test]
fn evaluated_codes_satisfy_environment_bound() {
    for (b, e, s, seed) in [(4, 2, 3, 1u64), (8, 2, 6, 2), (3, 3, 4, 3), (16, 2, 8, 4)] {
        let code = random_code(b, e, s, &mut seeded(seed)).unwrap();
        let decoders = build_decoders(&code, &haar_targets(&code, 4, seed), 100).unwrap();
        let ev = evaluate_code(&code, &decoders, 200, 0.05, seed).unwrap();
        assert!(ev.env_holds, "{ev:?}");
        assert!(ev.env_distance_max <= 7.0 * ev.epsilon_hat.powf(0.25) + 1e-9);
        assert!(ev.sandwich.holds, "{:?}", ev.sandwich);
        assert!(ev.epsilon_hat <= 1.0 + 1e-9);
    }
}

#[test]
fn deficit_witnesses_reproduce_values() {
    let cfg = OptimConfig { restarts: 4, iters: 100, samples: 32, ..OptimConfig::with_seed(3) };
    for seed in 0..4 {
        let ch = random_stinespring(2, 2, 2, 100 + seed).unwrap();
        let g = geometry_deficit(&ch, &cfg).unwrap();
        let (p, q) = (g.phi.amplitudes(), g.psi.amplitudes());
        assert!((g.value - (pure_distance(p, q) - output_distance(&ch, p, q))).abs() < 1e-12);
        let f = forgetfulness_deficit(&ch, &cfg).unwrap();
        assert!((f.value - output_distance(&ch, f.phi.amplitudes(), f.psi.amplitudes())).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn helstrom_bias_is_half_trace_distance(d in 1usize..6, seed in 0u64..10_000) {
        let rho = random_density(d, d, seed);
        let sigma = random_density(d, 1 + (seed as usize % d), seed + 1);
        let h = helstrom(&rho, &sigma).unwrap();
        prop_assert!((h.bias - 0.5 * trace_norm(&(&rho - &sigma))).abs() < 1e-10);
        prop_assert!((&h.projector * &h.projector - &h.projector).camax() < 1e-10);
    }

    #[test]
    fn overlap_identity(db in 1usize..5, de in 1usize..5, seed in 0u64..10_000) {
        let mut rng = seeded(seed);
        let phi: PureState = haar_state(db * de, &mut rng).unwrap().with_dims(vec![db, de]).unwrap();
        let psi: PureState = haar_state(db * de, &mut rng).unwrap().with_dims(vec![db, de]).unwrap();
        let lhs = overlap_trace_norm(&phi, &psi).unwrap().powi(2);
        let rhs = oracle_fidelity(phi.marginal(&[0]).unwrap().matrix(), psi.marginal(&[0]).unwrap().matrix());
        prop_assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn fidelity_distance_chain(d in 2usize..6, seed in 0u64..10_000) {
        let rho = ComplexOperator::from_matrix(random_density(d, d, seed)).unwrap();
        let sigma = ComplexOperator::from_matrix(random_density(d, 1 + (seed as usize % d), seed + 1)).unwrap();
        let r = check_f_vs_d(&rho, &sigma).unwrap();
        prop_assert!(r.holds);
        let f = fidelity(rho.matrix(), sigma.matrix()).unwrap();
        prop_assert!((f - oracle_fidelity(rho.matrix(), sigma.matrix())).abs() < 1e-8, "{f} vs {}", oracle_fidelity(rho.matrix(), sigma.matrix()));
    }

    #[test]
    fn diamond_estimate_dominates_unentangled_inputs(seed in 0u64..10_000) {
        let a = random_stinespring(2, 2, 2, seed).unwrap();
        let b = random_stinespring(2, 2, 2, seed + 1).unwrap();
        let gamma = LinearMap::difference(&a, &b).unwrap();
        let est = diamond_norm_estimate(&gamma, 8, seed).unwrap();
        for k in 0..4 {
            let rho = random_density(2, 1 + k % 2, seed * 11 + k as u64);
            let out = gamma.apply(&rho).unwrap();
            prop_assert!(est.value >= trace_norm(&out) - 1e-9, "{} < {}", est.value, trace_norm(&out));
        }
        prop_assert!(est.value <= 2.0 + 1e-9);
    }

    #[test]
    fn code_records_round_trip(b in 2usize..5, e in 1usize..3, seed in 0u64..10_000) {
        let s = 1 + (seed as usize % (b * e));
        let code = random_code(b, e, s, &mut seeded(seed)).unwrap();
        let back = Code::from_record(&code.to_record()).unwrap();
        prop_assert_eq!(back.dims(), code.dims());
        let v: CVector = haar_targets(&code, 1, seed).remove(0);
        prop_assert!((back.embed(&v) - code.embed(&v)).norm() < 1e-15);
    }
}
