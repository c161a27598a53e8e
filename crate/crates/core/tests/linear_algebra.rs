use nalgebra::Complex;
use proptest::prelude::*;
use qidlab::channels::spec::random_stinespring;
use qidlab::metrics::trace_norm;
use qidlab::rng::seeded;
use qidlab::tensor::{self, haar_state, haar_unitary, ComplexOperator, PureState};
use qidlab::{CMatrix, Channel};

fn random_density(d: usize, rank: usize, seed: u64) -> CMatrix {
    let g: CMatrix = tensor::gaussian_matrix(d, rank, &mut seeded(seed));
    let w = &g * g.adjoint();
    let tr = w.trace();
    w / tr
}

fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    tensor::hermitian_part(&tensor::gaussian_matrix(d, d, &mut seeded(seed)))
}

/// `tr_B` and `tr_A` on `A ⊗ B` by explicit index sums.
fn oracle_trace(m: &CMatrix, da: usize, db: usize, keep_a: bool) -> CMatrix {
    if keep_a {
        CMatrix::from_fn(da, da, |i, j| (0..db).map(|b| m[(i * db + b, j * db + b)]).sum())
    } else {
        CMatrix::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum())
    }
}

#[test]
fn eigendecomposition_reconstructs_large_hermitian() {
    for seed in 0..4 {
        let h = random_hermitian(64, seed);
        let eig = tensor::eigh(&h);
        assert!((eig.reconstruct() - &h).camax() < 1e-9);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = eig.vectors.adjoint() * &eig.vectors;
        assert!((gram - tensor::identity::<f64>(64)).camax() < 1e-10);
    }
}

#[test]
fn haar_states_have_symmetric_second_moment() {
    let d = 3;
    let samples = 20000;
    let mut rng = seeded(11);
    let mut acc = CMatrix::zeros(d * d, d * d);
    for _ in 0..samples {
        let v = haar_state::<f64, _>(d, &mut rng).unwrap().into_amplitudes();
        let p = &v * v.adjoint();
        acc += tensor::kron(&p, &p);
    }
    acc /= Complex::new(samples as f64, 0.0);
    // 2/(d(d+1)) Π_sym with Π_sym = (1 + SWAP)/2.
    let swap = CMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        if c == j * d + i {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let sym = (tensor::identity::<f64>(d * d) + swap) * Complex::new(0.5, 0.0);
    let expected = sym * Complex::new(2.0 / (d * (d + 1)) as f64, 0.0);
    // Entries are averages of bounded terms; 20000 samples keep 5σ below 0.01.
    assert!((acc - expected).camax() < 0.01);
}

#[test]
fn haar_unitaries_are_unitary() {
    let u: CMatrix = haar_unitary(7, &mut seeded(2));
    assert!((u.adjoint() * &u - tensor::identity::<f64>(7)).camax() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_inverts_tensor_product(da in 1usize..5, db in 1usize..5, seed in 0u64..10_000) {
        let a = ComplexOperator::from_matrix(random_hermitian(da, seed)).unwrap();
        let b = ComplexOperator::from_matrix(random_density(db, db, seed + 1)).unwrap();
        let ab = a.tensor(&b);
        prop_assert!((ab.partial_trace(&[0]).unwrap().matrix() - a.matrix()).camax() < 1e-10);
        let tr_a = a.trace();
        prop_assert!((ab.partial_trace(&[1]).unwrap().matrix() - b.matrix() * tr_a).camax() < 1e-10);
        // A generic joint operator against the index-sum oracle.
        let joint = random_hermitian(da * db, seed + 2);
        let op = ComplexOperator::new(vec![da, db], joint.clone()).unwrap();
        prop_assert!((op.partial_trace(&[0]).unwrap().matrix() - oracle_trace(&joint, da, db, true)).camax() < 1e-10);
        prop_assert!((op.partial_trace(&[1]).unwrap().matrix() - oracle_trace(&joint, da, db, false)).camax() < 1e-10);
    }

    #[test]
    fn representations_agree(a in 1usize..4, b in 1usize..4, e in 1usize..4, seed in 0u64..10_000) {
        prop_assume!(a <= b * e);
        let ch = random_stinespring(a, b, e, seed).unwrap();
        for k in 0..5 {
            let rho = random_density(a, 1 + (k % a), seed * 7 + k as u64);
            let kraus = ch.apply_matrix(&rho).unwrap();
            prop_assert!((ch.apply_via_stinespring(&rho).unwrap() - &kraus).camax() < 1e-9);
            prop_assert!((ch.apply_via_choi(&rho).unwrap() - &kraus).camax() < 1e-9);
            prop_assert!((kraus.trace().re - 1.0).abs() < 1e-9);
        }
        prop_assert!(ch.tp_deviation() < 1e-9);
    }

    #[test]
    fn double_complement_has_same_choi_spectrum(a in 1usize..4, b in 1usize..4, e in 1usize..4, seed in 0u64..10_000) {
        prop_assume!(a <= b * e);
        let ch = random_stinespring(a, b, e, seed).unwrap();
        let back = ch.complement().complement();
        let (mut x, mut y) = (ch.choi_spectrum(), back.choi_spectrum());
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        prop_assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn channels_contract_trace_distance(a in 2usize..4, b in 1usize..4, e in 1usize..4, seed in 0u64..10_000) {
        prop_assume!(a <= b * e);
        let ch = random_stinespring(a, b, e, seed).unwrap();
        let mut rng = seeded(seed + 99);
        let phi: PureState = haar_state(a, &mut rng).unwrap();
        let psi: PureState = haar_state(a, &mut rng).unwrap();
        let before = trace_norm(&(phi.projector().matrix() - psi.projector().matrix()));
        let after = trace_norm(&(ch.apply(&phi.projector()).unwrap().matrix() - ch.apply(&psi.projector()).unwrap().matrix()));
        prop_assert!(after <= before + 1e-9);
        let comp = ch.complement();
        let after_e = trace_norm(&(comp.apply(&phi.projector()).unwrap().matrix() - comp.apply(&psi.projector()).unwrap().matrix()));
        prop_assert!(after_e <= before + 1e-9);
    }

    #[test]
    fn composition_is_trace_preserving(seed in 0u64..10_000) {
        let n = random_stinespring(2, 3, 2, seed).unwrap();
        let m = random_stinespring(3, 2, 2, seed + 1).unwrap();
        let mn = Channel::compose(&m, &n).unwrap();
        let rho = random_density(2, 2, seed + 2);
        let direct = m.apply_matrix(&n.apply_matrix(&rho).unwrap()).unwrap();
        prop_assert!((mn.apply_matrix(&rho).unwrap() - direct).camax() < 1e-10);
        prop_assert!(mn.tp_deviation() < 1e-9);
    }
}
