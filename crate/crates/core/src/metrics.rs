//! Distances, fidelities, diamond-norm estimates and the two channel deficits.
//!
//! Every estimate here is a lower bound on a supremum: the returned value is
//! recomputed at the returned witness.

use nalgebra::{Complex, ComplexField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, LinearMap};
use crate::error::{Error, Result};
use crate::rng::{seeded, stream};
use crate::scalar::{CMatrix, CVector, Real};
use crate::tensor::{self, haar_state, ComplexOperator, PureState};

/// Sum of singular values.
pub fn trace_norm<T: Real>(x: &CMatrix<T>) -> T {
    if x.is_square() && tensor::hermitian_deviation(x) <= T::norm_tol() {
        return trace_norm_hermitian(x);
    }
    x.clone().singular_values().iter().fold(T::zero(), |acc, &s| acc + s)
}

/// Sum of absolute eigenvalues of the Hermitian part.
pub fn trace_norm_hermitian<T: Real>(x: &CMatrix<T>) -> T {
    tensor::eigvalsh(x).into_iter().fold(T::zero(), |acc, v| acc + v.abs())
}

/// `F(ρ,σ) = ‖√ρ√σ‖₁²`.
pub fn fidelity<T: Real>(rho: &CMatrix<T>, sigma: &CMatrix<T>) -> Result<T> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch("fidelity arguments differ in shape".into()));
    }
    let a = support_sqrt(rho)?;
    let b = support_sqrt(sigma)?;
    let n = trace_norm(&(a * b));
    Ok(n * n)
}

/// `√m` with eigenvalues at rounding level dropped: their square roots are
/// of order `√ε` and would bias the fidelity of rank-deficient states.
fn support_sqrt<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let eig = tensor::eigh(m);
    tensor::check_spectrum_psd(&eig.values)?;
    let top = eig.values.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let floor = top * T::default_epsilon() * T::lit(64.0 * m.nrows() as f64);
    Ok(eig.map(|x| if x > floor { x.sqrt() } else { T::zero() }))
}

/// The chain `1 − √F ≤ ½‖ρ − σ‖₁ ≤ √(1 − F)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityDistance {
    pub one_minus_sqrt_f: f64,
    pub half_trace_distance: f64,
    pub sqrt_one_minus_f: f64,
    pub holds: bool,
}

pub fn check_f_vs_d(rho: &ComplexOperator, sigma: &ComplexOperator) -> Result<FidelityDistance> {
    rho.check_density()?;
    sigma.check_density()?;
    let f = fidelity(rho.matrix(), sigma.matrix())?.min(1.0);
    let lo = 1.0 - f.sqrt();
    let mid = 0.5 * trace_norm_hermitian(&(rho.matrix() - sigma.matrix()));
    let hi = (1.0 - f).max(0.0).sqrt();
    let tol = 1e-9;
    Ok(FidelityDistance {
        one_minus_sqrt_f: lo,
        half_trace_distance: mid,
        sqrt_one_minus_f: hi,
        holds: lo <= mid + tol && mid <= hi + tol,
    })
}

/// `‖tr_B |φ⟩⟨ψ|‖₁` for states on `B ⊗ E`, with `B` the first subsystem.
pub fn overlap_trace_norm(phi: &PureState, psi: &PureState) -> Result<f64> {
    if phi.dims() != psi.dims() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", phi.dims(), psi.dims())));
    }
    if phi.dims().len() < 2 {
        return Err(Error::DimensionMismatch("need a bipartite state".into()));
    }
    let keep: Vec<usize> = (1..phi.dims().len()).collect();
    Ok(trace_norm(&tensor::cross_marginal(phi, psi, &keep)?))
}

/// `‖N(φ) − N(ψ)‖₁` for pure inputs.
pub fn output_distance(ch: &Channel, phi: &CVector, psi: &CVector) -> f64 {
    trace_norm_hermitian(&(ch.apply_pure(phi) - ch.apply_pure(psi)))
}

/// `‖φ − ψ‖₁ = 2‖ψ − ⟨φ|ψ⟩φ‖` for unit vectors; stable when `φ ≈ ψ`.
pub fn pure_distance(phi: &CVector, psi: &CVector) -> f64 {
    let overlap = phi.dotc(psi);
    2.0 * (psi - phi * overlap).norm().min(1.0)
}

/// Optimizer settings shared by the ascent routines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimConfig {
    pub restarts: usize,
    pub iters: usize,
    pub step_decay: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    /// Haar pairs drawn to seed the deficit searches.
    pub samples: usize,
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self { restarts: 32, iters: 400, step_decay: 0.5, rel_tol: 1e-7, initial_step: 0.25, samples: 256, seed: 0 }
    }
}

impl OptimConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// A certified lower bound on a supremum over pure input pairs.
#[derive(Clone, Debug)]
pub struct DeficitEstimate {
    pub value: f64,
    pub phi: PureState,
    pub psi: PureState,
    pub restarts: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct DiamondEstimate {
    pub value: f64,
    /// Input on `R ⊗ A` with `|R| = |A|`.
    pub witness: PureState,
    pub restarts: usize,
}

/// Best rank-one input `|v⟩⟨w|` on `C^k ⊗ A` found for `‖(id_k ⊗ Γ)(·)‖₁`.
#[derive(Clone, Debug)]
pub struct RestrictedEstimate {
    pub k: usize,
    pub value: f64,
    pub v: CVector,
    pub w: CVector,
}

/// `T[(r,a),(r',a')] = Σ_{b,b'} U[(r',b'),(r,b)] J[(a,b),(a',b')]`, so that
/// `tr(U (M_v⊗1) J (M_w⊗1)†) = vᵀ T w̄`.
fn contract(u: &CMatrix, j: &CMatrix, k: usize, da: usize, db: usize) -> CMatrix {
    let n = k * da;
    let mut t = CMatrix::zeros(n, n);
    for r in 0..k {
        for r2 in 0..k {
            for b in 0..db {
                for b2 in 0..db {
                    let ub = u[(r2 * db + b2, r * db + b)];
                    if ub.re == 0.0 && ub.im == 0.0 {
                        continue;
                    }
                    for a in 0..da {
                        for a2 in 0..da {
                            t[(r * da + a, r2 * da + a2)] += ub * j[(a * db + b, a2 * db + b2)];
                        }
                    }
                }
            }
        }
    }
    t
}

fn as_k_by_a(v: &CVector, k: usize, da: usize) -> CMatrix {
    CMatrix::from_fn(k, da, |r, a| v[r * da + a])
}

fn extended_output(gamma: &LinearMap, v: &CVector, w: &CVector, k: usize) -> CMatrix {
    gamma.apply_extended(&as_k_by_a(v, k, gamma.in_dim()), &as_k_by_a(w, k, gamma.in_dim()))
}

fn sign_matrix(h: &CMatrix) -> CMatrix {
    tensor::eigh(h).map(|x| if x >= 0.0 { 1.0 } else { -1.0 })
}

/// Unitary `U` with `tr(U H) = ‖H‖₁`.
fn polar_dual(h: &CMatrix) -> CMatrix {
    let svd = h.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    v_t.adjoint() * u.adjoint()
}

fn random_unit(n: usize, rng: &mut crate::rng::Rng) -> CVector {
    haar_state::<f64, _>(n, rng).expect("positive dimension").into_amplitudes()
}

/// `max_v ‖(id ⊗ Γ)(|v⟩⟨v|)‖₁` over `v ∈ A ⊗ A`.
///
/// Alternates `S = sign(H(v))` and `v = top eigenvector of v ↦ tr(S H(v))`,
/// which never decreases the objective. Start 0 is the maximally entangled
/// state; the rest are Haar random.
pub fn diamond_norm_estimate(gamma: &LinearMap, restarts: usize, seed: u64) -> Result<DiamondEstimate> {
    gamma.check_hermitian_preserving(1e-8)?;
    let (da, db) = (gamma.in_dim(), gamma.out_dim());
    let restarts = restarts.max(1);
    let runs: Vec<(f64, CVector)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut v = if i == 0 {
                PureState::<f64>::maximally_entangled(da).into_amplitudes()
            } else {
                random_unit(da * da, &mut stream(seed, i as u64))
            };
            let mut value = trace_norm_hermitian(&extended_output(gamma, &v, &v, da));
            for _ in 0..200 {
                let h = extended_output(gamma, &v, &v, da);
                let q = contract(&sign_matrix(&h), gamma.choi(), da, da, db).transpose();
                let next = tensor::eigh(&q).top_vector();
                let next_value = trace_norm_hermitian(&extended_output(gamma, &next, &next, da));
                if next_value <= value * (1.0 + 1e-12) + 1e-15 {
                    break;
                }
                v = next;
                value = next_value;
            }
            (value, v)
        })
        .collect();
    let (value, v) = best(runs);
    let witness = PureState::new(vec![da, da], v)?;
    Ok(DiamondEstimate { value, witness, restarts })
}

fn best<V>(runs: Vec<(f64, V)>) -> (f64, V) {
    let mut best: Option<(f64, V)> = None;
    for (val, w) in runs {
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, w));
        }
    }
    best.expect("at least one run")
}

/// `max ‖(id_k ⊗ Γ)(|v⟩⟨w|)‖₁` over unit `v, w ∈ C^k ⊗ A` by alternating
/// polar, `v` and `w` updates.
pub fn restricted_norm_estimate(gamma: &LinearMap, k: usize, restarts: usize, seed: u64) -> RestrictedEstimate {
    let (da, db) = (gamma.in_dim(), gamma.out_dim());
    let n = k * da;
    let runs: Vec<(f64, (CVector, CVector))> = (0..restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let mut v = random_unit(n, &mut rng);
            let mut w = if i % 2 == 0 { v.clone() } else { random_unit(n, &mut rng) };
            let mut value = trace_norm(&extended_output(gamma, &v, &w, k));
            for _ in 0..300 {
                let h = extended_output(gamma, &v, &w, k);
                let t = contract(&polar_dual(&h), gamma.choi(), k, da, db);
                let g = &t * w.conjugate();
                let gn = g.norm();
                if gn <= 1e-300 {
                    break;
                }
                let nv = g.conjugate().unscale(gn);
                let kvec = t.transpose() * &nv;
                let kn = kvec.norm();
                if kn <= 1e-300 {
                    break;
                }
                let nw = kvec.unscale(kn);
                let next = trace_norm(&extended_output(gamma, &nv, &nw, k));
                if next <= value * (1.0 + 1e-12) + 1e-15 {
                    break;
                }
                v = nv;
                w = nw;
                value = next;
            }
            (value, (v, w))
        })
        .collect();
    let (value, (v, w)) = best(runs);
    RestrictedEstimate { k, value, v, w }
}

#[derive(Clone, Debug, Serialize)]
pub struct CbRatio {
    pub t: usize,
    pub norm_t: f64,
    pub norm_1: f64,
    pub ratio: Option<f64>,
    pub bound_holds: bool,
}

/// Compares `‖Γ‖^(t)` with `t · ‖Γ‖^(1)`.
pub fn cb_ratio_check(gamma: &LinearMap, t: usize, restarts: usize, seed: u64) -> Result<CbRatio> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    let nt = restricted_norm_estimate(gamma, t, restarts, seed).value;
    let n1 = restricted_norm_estimate(gamma, 1, restarts, seed.wrapping_add(1)).value;
    let ratio = (n1 > 1e-12).then(|| nt / n1);
    Ok(CbRatio { t, norm_t: nt, norm_1: n1, ratio, bound_holds: nt <= t as f64 * n1 + 1e-3 })
}

/// Structured seed pairs on dimension `d`: basis pairs, `|i⟩±|j⟩` and
/// `|i⟩±i|j⟩` pairs, and Fourier-basis pairs.
fn structured_pairs(d: usize) -> Vec<(CVector, CVector)> {
    let basis = |i: usize| {
        let mut v = CVector::zeros(d);
        v[i] = Complex::new(1.0, 0.0);
        v
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            out.push((basis(i), basis(j)));
            let (bi, bj) = (basis(i), basis(j));
            out.push(((&bi + &bj).scale(s), (&bi - &bj).scale(s)));
            let ij = bj.map(|z| z * Complex::new(0.0, 1.0));
            out.push(((&bi + &ij).scale(s), (&bi - &ij).scale(s)));
            out.push((basis(i), (&bi + &bj).scale(s)));
        }
    }
    let fourier = |k: usize| {
        CVector::from_fn(d, |j, _| {
            let a = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
            Complex::new(a.cos(), a.sin()).unscale((d as f64).sqrt())
        })
    };
    for k in 0..d {
        for l in (k + 1)..d {
            out.push((fourier(k), fourier(l)));
        }
        out.push((basis(k), fourier(k)));
    }
    out
}

fn normalize(v: &mut CVector) {
    let n = v.norm();
    if n > 0.0 {
        v.unscale_mut(n);
    }
}

/// Coordinate polish on a pair of unit vectors: perturb one real coordinate
/// at a time, renormalize, keep improvements; the step decays when a sweep
/// gains less than `rel_tol`.
fn polish_pair(
    phi: CVector,
    psi: CVector,
    f: &(impl Fn(&CVector, &CVector) -> f64 + ?Sized),
    cfg: &OptimConfig,
) -> (f64, CVector, CVector) {
    let mut x = [phi, psi];
    let mut value = f(&x[0], &x[1]);
    let mut step = cfg.initial_step;
    let d = x[0].len();
    for _ in 0..cfg.iters {
        let start = value;
        for which in 0..2 {
            for idx in 0..d {
                for part in 0..2 {
                    for sign in [1.0, -1.0] {
                        let mut trial = x[which].clone();
                        let delta = if part == 0 {
                            Complex::new(sign * step, 0.0)
                        } else {
                            Complex::new(0.0, sign * step)
                        };
                        trial[idx] += delta;
                        normalize(&mut trial);
                        let val = if which == 0 { f(&trial, &x[1]) } else { f(&x[0], &trial) };
                        if val > value {
                            value = val;
                            x[which] = trial;
                            break;
                        }
                    }
                }
            }
        }
        if value - start <= cfg.rel_tol * value.abs().max(1e-12) {
            step *= cfg.step_decay;
            if step < 1e-9 {
                break;
            }
        }
    }
    let [phi, psi] = x;
    (value, phi, psi)
}

/// Seeds the search with structured and Haar pairs, then polishes the
/// `cfg.restarts` best seeds.
fn pair_search(
    dim: usize,
    f: &(dyn Fn(&CVector, &CVector) -> f64 + Sync),
    ascend: Option<&(dyn Fn(CVector, CVector) -> (CVector, CVector) + Sync)>,
    cfg: &OptimConfig,
) -> Result<(f64, PureState, PureState)> {
    let mut seeds = structured_pairs(dim);
    let mut rng = seeded(cfg.seed);
    for _ in 0..cfg.samples {
        let a = random_unit(dim, &mut rng);
        let b = random_unit(dim, &mut rng);
        seeds.push((a, b));
    }
    if dim == 1 {
        seeds.push((CVector::from_element(1, Complex::new(1.0, 0.0)), CVector::from_element(1, Complex::new(1.0, 0.0))));
    }
    let mut scored: Vec<(f64, usize)> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, (a, b))| (f(a, b), i))
        .collect();
    scored.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));
    let chosen: Vec<usize> = scored.iter().take(cfg.restarts.max(1)).map(|&(_, i)| i).collect();
    let runs: Vec<(f64, (CVector, CVector))> = chosen
        .par_iter()
        .map(|&i| {
            let (mut a, mut b) = seeds[i].clone();
            if let Some(asc) = ascend {
                (a, b) = asc(a, b);
            }
            let (val, a, b) = polish_pair(a, b, f, cfg);
            (val, (a, b))
        })
        .collect();
    let (_, (a, b)) = best(runs);
    // Recompute so the stored value is exactly the objective at the witness.
    let value = f(&a, &b);
    Ok((value, PureState::new(vec![dim], a)?, PureState::new(vec![dim], b)?))
}

/// `sup_{φ,ψ} ‖φ − ψ‖₁ − ‖N(φ) − N(ψ)‖₁`.
pub fn geometry_deficit(ch: &Channel, cfg: &OptimConfig) -> Result<DeficitEstimate> {
    let f = |a: &CVector, b: &CVector| pure_distance(a, b) - output_distance(ch, a, b);
    let (value, phi, psi) = pair_search(ch.in_dim(), &f, None, cfg)?;
    Ok(DeficitEstimate { value, phi, psi, restarts: cfg.restarts, samples: cfg.samples, seed: cfg.seed })
}

/// Monotone ascent for `‖N(φ) − N(ψ)‖₁`: `S = sign(N(φ) − N(ψ))`, then
/// `φ, ψ` become the top and bottom eigenvectors of `N†(S)`.
fn forgetfulness_ascent(ch: &Channel, mut phi: CVector, mut psi: CVector) -> (CVector, CVector) {
    let mut value = output_distance(ch, &phi, &psi);
    for _ in 0..200 {
        let s = sign_matrix(&(ch.apply_pure(&phi) - ch.apply_pure(&psi)));
        let eig = tensor::eigh(&ch.adjoint_apply(&s));
        let (np, nq) = (eig.top_vector(), eig.bottom_vector());
        let next = output_distance(ch, &np, &nq);
        if next <= value * (1.0 + 1e-12) + 1e-15 {
            break;
        }
        phi = np;
        psi = nq;
        value = next;
    }
    (phi, psi)
}

/// `sup_{φ,ψ} ‖N(φ) − N(ψ)‖₁`.
pub fn forgetfulness_deficit(ch: &Channel, cfg: &OptimConfig) -> Result<DeficitEstimate> {
    let f = |a: &CVector, b: &CVector| output_distance(ch, a, b);
    let asc = |a: CVector, b: CVector| forgetfulness_ascent(ch, a, b);
    let (value, phi, psi) = pair_search(ch.in_dim(), &f, Some(&asc), cfg)?;
    Ok(DeficitEstimate { value, phi, psi, restarts: cfg.restarts, samples: cfg.samples, seed: cfg.seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::spec::constant_pi;
    use crate::rng::seeded;
    use crate::scalar::cr;

    fn ket(v: &[f64]) -> CVector {
        let mut x = CVector::from_iterator(v.len(), v.iter().map(|&a| Complex::new(a, 0.0)));
        normalize(&mut x);
        x
    }

    fn proj(v: &[f64]) -> ComplexOperator {
        PureState::new(vec![v.len()], ket(v)).unwrap().projector()
    }

    fn fast() -> OptimConfig {
        OptimConfig { restarts: 8, iters: 200, samples: 64, ..OptimConfig::with_seed(3) }
    }

    #[test]
    fn fidelity_and_trace_norm_examples() {
        let rho = PureState::<f64>::basis(vec![2], 0).unwrap().projector();
        assert!((fidelity(rho.matrix(), rho.matrix()).unwrap() - 1.0).abs() < 1e-12);
        let mixed = ComplexOperator::<f64>::diagonal(&[0.3, 0.7]);
        assert!((fidelity(mixed.matrix(), mixed.matrix()).unwrap() - 1.0).abs() < 1e-12);
        let plus = proj(&[1.0, 1.0]);
        assert!((fidelity(rho.matrix(), plus.matrix()).unwrap() - 0.5).abs() < 1e-12);
        let one = proj(&[0.0, 1.0]);
        assert!((trace_norm(&(rho.matrix() - one.matrix())) - 2.0).abs() < 1e-12);
        let bad = ComplexOperator::<f64>::diagonal(&[1.1, -0.1]);
        assert!(matches!(fidelity(bad.matrix(), rho.matrix()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn trace_norm_non_hermitian_uses_singular_values() {
        let x: CMatrix = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(3.0), cr(0.0), cr(0.0)]);
        assert!((trace_norm(&x) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn f_vs_d_examples() {
        let zero = proj(&[1.0, 0.0]);
        let r = check_f_vs_d(&zero, &zero).unwrap();
        assert!(r.one_minus_sqrt_f.abs() < 1e-9 && r.half_trace_distance.abs() < 1e-9 && r.sqrt_one_minus_f.abs() < 1e-6);
        let r = check_f_vs_d(&zero, &proj(&[0.0, 1.0])).unwrap();
        assert!((r.one_minus_sqrt_f - 1.0).abs() < 1e-9 && (r.half_trace_distance - 1.0).abs() < 1e-9);
        let r = check_f_vs_d(&zero, &proj(&[1.0, 1.0])).unwrap();
        // Independent 2x2 arithmetic: F = 1/2.
        let s = 0.5f64.sqrt();
        assert!((r.one_minus_sqrt_f - (1.0 - s)).abs() < 1e-12);
        assert!((r.half_trace_distance - s).abs() < 1e-12);
        assert!((r.sqrt_one_minus_f - s).abs() < 1e-12);
        assert!(r.holds);
        let unnormalized = ComplexOperator::<f64>::diagonal(&[0.5, 0.2]);
        assert!(check_f_vs_d(&unnormalized, &zero).is_err());
    }

    #[test]
    fn overlap_trace_norm_examples() {
        let mut rng = seeded(11);
        let phi = haar_state::<f64, _>(16, &mut rng).unwrap().with_dims(vec![4, 4]).unwrap();
        assert!((overlap_trace_norm(&phi, &phi).unwrap() - 1.0).abs() < 1e-12);
        let a = PureState::<f64>::basis(vec![2, 2], 0).unwrap();
        let b = PureState::<f64>::basis(vec![2, 2], 3).unwrap();
        assert!(overlap_trace_norm(&a, &b).unwrap() < 1e-14);
        let psi = haar_state::<f64, _>(16, &mut rng).unwrap().with_dims(vec![4, 4]).unwrap();
        let v = overlap_trace_norm(&phi, &psi).unwrap();
        let f = fidelity(phi.marginal(&[0]).unwrap().matrix(), psi.marginal(&[0]).unwrap().matrix()).unwrap();
        assert!((v * v - f).abs() < 1e-8);
        assert!(overlap_trace_norm(&phi, &a).is_err());
    }

    #[test]
    fn diamond_examples() {
        let dep = Channel::<f64>::dephasing(2, 1.0).unwrap();
        let zero = LinearMap::difference(&dep, &dep).unwrap();
        assert!(diamond_norm_estimate(&zero, 4, 1).unwrap().value < 1e-12);

        let id = Channel::<f64>::identity(2);
        let g = LinearMap::difference(&id, &constant_pi(2)).unwrap();
        let est = diamond_norm_estimate(&g, 8, 2).unwrap();
        assert!((est.value - 1.5).abs() < 1e-4);
        let phi = PureState::<f64>::maximally_entangled(2);
        assert!(est.witness.overlap(&phi) > 1.0 - 1e-6);

        let g = LinearMap::difference(&id, &dep).unwrap();
        assert!((diamond_norm_estimate(&g, 8, 3).unwrap().value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn diamond_rejects_non_hermitian_preserving() {
        let mut choi = CMatrix::zeros(4, 4);
        choi[(0, 1)] = Complex::new(1.0, 0.0);
        let g = LinearMap::from_choi(2, 2, choi).unwrap();
        assert!(matches!(diamond_norm_estimate(&g, 2, 0), Err(Error::NotHermitianPreserving { .. })));
    }

    #[test]
    fn transposition_ratio() {
        let t = LinearMap::<f64>::transpose(2);
        let r = cb_ratio_check(&t, 2, 16, 5).unwrap();
        assert!((r.norm_1 - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.norm_t - 2.0).abs() < 1e-4, "{r:?}");
        assert!(r.bound_holds);
        let z = LinearMap::<f64>::zero(2, 2);
        let r = cb_ratio_check(&z, 2, 4, 5).unwrap();
        assert_eq!((r.norm_t, r.norm_1), (0.0, 0.0));
    }

    #[test]
    fn geometry_deficit_examples() {
        let u = tensor::haar_unitary::<f64, _>(2, &mut seeded(1));
        let uch = Channel::unitary(u).unwrap();
        assert!(geometry_deficit(&uch, &fast()).unwrap().value.abs() < 1e-9);

        let dep = Channel::<f64>::dephasing(2, 1.0).unwrap();
        let est = geometry_deficit(&dep, &fast()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9);
        // Witness is orthogonal and unbiased with respect to the computational basis.
        assert!(est.phi.overlap(&est.psi) < 1e-9);
        for s in [&est.phi, &est.psi] {
            assert!((s.amplitudes()[0].norm_sqr() - 0.5).abs() < 1e-6);
        }
        let c = constant_pi(3);
        assert!((geometry_deficit(&c, &fast()).unwrap().value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn forgetfulness_deficit_examples() {
        let c = constant_pi(2);
        assert!(forgetfulness_deficit(&c, &fast()).unwrap().value < 1e-9);
        let u = tensor::haar_unitary::<f64, _>(3, &mut seeded(2));
        let comp = Channel::unitary(u).unwrap().complement();
        assert!(forgetfulness_deficit(&comp, &fast()).unwrap().value < 1e-9);
        let dep = Channel::<f64>::dephasing(2, 1.0).unwrap().complement();
        assert!((forgetfulness_deficit(&dep, &fast()).unwrap().value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn estimates_reproduce_at_witness() {
        let ch = crate::channels::spec::random_stinespring(2, 2, 2, 4).unwrap();
        let g = geometry_deficit(&ch, &fast()).unwrap();
        let val = g.phi.trace_distance(&g.psi)
            - trace_norm(&(ch.apply(&g.phi.projector()).unwrap().matrix() - ch.apply(&g.psi.projector()).unwrap().matrix()));
        assert!((val - g.value).abs() < 1e-9);
        let f = forgetfulness_deficit(&ch, &fast()).unwrap();
        assert!((output_distance(&ch, f.phi.amplitudes(), f.psi.amplitudes()) - f.value).abs() < 1e-12);
    }
}
