//! Entropic quantities, the one-shot identification capacity formulas and
//! the antidegradability test.
//!
//! Entropies are in bits. Capacities are maximized by exponentiated-gradient
//! ascent on input density matrices; the iterates stay full rank, so logs
//! are taken with a tiny floor.

use nalgebra::Complex;
use num_traits::Num;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::report::matrix;
use crate::rng::stream;
use crate::scalar::CMatrix;
use crate::tensor::{self, eigh, ComplexOperator};

/// Eigenvalues below this are zero in entropies.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Floor inside matrix logarithms on full-rank iterates.
const LOG_FLOOR: f64 = 1e-300;

/// Coherent information must exceed this for an input to count as feasible
/// for the one-shot identification rate.
pub const COHERENT_TOL: f64 = 1e-6;

/// Base-2 von Neumann entropy.
pub fn entropy(rho: &CMatrix) -> Result<f64> {
    let vals = tensor::eigvalsh(rho);
    tensor::check_spectrum_psd(&vals)?;
    Ok(vals.iter().filter(|&&v| v > ENTROPY_FLOOR).map(|&v| -v * v.log2()).sum())
}

/// Entropic data of `(id ⊗ N)` applied to a purification of `input`; `A` is
/// the purifying reference.
#[derive(Clone, Debug, Serialize)]
pub struct CapacityPoint {
    pub input: Vec<Vec<[f64; 2]>>,
    pub h_a: f64,
    pub h_b: f64,
    pub h_e: f64,
    pub h_ab: f64,
    pub mutual_information: f64,
    pub coherent_information: f64,
    /// `H(A|B) = H(AB) − H(B)`.
    pub conditional_entropy: f64,
}

impl CapacityPoint {
    pub fn entropies(&self) -> EntropyPoint<f64> {
        EntropyPoint { h_a: self.h_a, h_b: self.h_b, h_e: self.h_e }
    }
}

pub fn capacity_point(ch: &Channel, input: &ComplexOperator) -> Result<CapacityPoint> {
    if input.dim() != ch.in_dim() {
        return Err(Error::DimensionMismatch(format!("input of dim {} for channel on {}", input.dim(), ch.in_dim())));
    }
    input.check_density()?;
    let (da, db) = (ch.in_dim(), ch.out_dim());
    // Purification on A' ⊗ A with A' the channel input.
    let phi = tensor::purify(input)?.into_amplitudes();
    let mut joint = CMatrix::zeros(db * da, db * da);
    let id = tensor::identity::<f64>(da);
    for k in ch.kraus() {
        let w = k.kronecker(&id) * &phi;
        joint += &w * w.adjoint();
    }
    let dims = [db, da];
    let rho_b = tensor::split(&dims, &[0])?.trace_out(&joint);
    let rho_a = tensor::split(&dims, &[1])?.trace_out(&joint);
    let h_a = entropy(&rho_a)?;
    let h_b = entropy(&rho_b)?;
    let h_ab = entropy(&joint)?;
    let h_e = entropy(&ch.complement().apply_matrix(input.matrix())?)?;
    Ok(CapacityPoint {
        input: matrix(input.matrix()),
        h_a,
        h_b,
        h_e,
        h_ab,
        mutual_information: h_a + h_b - h_ab,
        coherent_information: h_b - h_ab,
        conditional_entropy: h_ab - h_b,
    })
}

/// Channel with its complement, for repeated entropy evaluations.
struct Pair<'a> {
    ch: &'a Channel,
    comp: Channel,
}

impl<'a> Pair<'a> {
    fn new(ch: &'a Channel) -> Self {
        Self { ch, comp: ch.complement() }
    }

    fn entropies(&self, rho: &CMatrix) -> (f64, f64, f64) {
        let h = |m: &CMatrix| entropy(m).unwrap_or(f64::NAN);
        let out = self.ch.apply_matrix(rho).expect("input dim checked");
        let env = self.comp.apply_matrix(rho).expect("input dim checked");
        (h(rho), h(&out), h(&env))
    }

    fn mutual(&self, rho: &CMatrix) -> f64 {
        let (a, b, e) = self.entropies(rho);
        a + b - e
    }

    fn coherent(&self, rho: &CMatrix) -> f64 {
        let (_, b, e) = self.entropies(rho);
        b - e
    }

    /// Gradient in nats of `H(N(ρ)) − H(N^c(ρ))`, up to multiples of `I`.
    fn coherent_gradient(&self, rho: &CMatrix) -> CMatrix {
        let out = self.ch.apply_matrix(rho).expect("input dim checked");
        let env = self.comp.apply_matrix(rho).expect("input dim checked");
        self.comp.adjoint_apply(&ln_floor(&env)) - self.ch.adjoint_apply(&ln_floor(&out))
    }

    fn mutual_gradient(&self, rho: &CMatrix) -> CMatrix {
        self.coherent_gradient(rho) - ln_floor(rho)
    }
}

fn ln_floor(m: &CMatrix) -> CMatrix {
    eigh(m).map(|v| v.max(LOG_FLOOR).ln())
}

/// Gradient of `I(A:B)` in bits, as a function of the input; directional
/// derivatives along traceless Hermitian directions are `tr(G Δ)`.
pub fn mutual_information_gradient(ch: &Channel, rho: &CMatrix) -> CMatrix {
    Pair::new(ch).mutual_gradient(rho) / Complex::new(std::f64::consts::LN_2, 0.0)
}

pub fn mutual_information(ch: &Channel, rho: &CMatrix) -> f64 {
    Pair::new(ch).mutual(rho)
}

pub fn coherent_information(ch: &Channel, rho: &CMatrix) -> f64 {
    Pair::new(ch).coherent(rho)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub restarts: usize,
    pub iters: usize,
    /// Stopping tolerance: Frank-Wolfe gap (nats) for `C_E`, per-step gain
    /// for coherent information.
    pub tol: f64,
    pub antidegradability_iters: usize,
    /// The constant `c` of the typicality bounds, used in rate arithmetic.
    pub c: f64,
    pub seed: u64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self { restarts: 4, iters: 2000, tol: 1e-11, antidegradability_iters: 3000, c: 1.0, seed: 17 }
    }
}

/// `ρ ∝ exp(ln ρ + ηG)`.
fn eg_step(rho: &CMatrix, grad: &CMatrix, eta: f64) -> CMatrix {
    let logm = ln_floor(rho) + grad * Complex::new(eta, 0.0);
    let eig = eigh(&logm);
    let shift = eig.max();
    let m = eig.map(|v| (v - shift).exp());
    let tr = m.trace().re;
    m / Complex::new(tr, 0.0)
}

/// Monotone exponentiated-gradient ascent with backtracking. For a concave
/// objective the Frank-Wolfe gap `λmax(G) − tr ρG` bounds the distance to
/// the optimum and serves as the stopping rule; otherwise ascent stops once
/// steps stop gaining. Returns the iterate, its value and the final gap.
fn ascend(
    start: CMatrix,
    iters: usize,
    tol: f64,
    concave: bool,
    value: &dyn Fn(&CMatrix) -> f64,
    grad: &dyn Fn(&CMatrix) -> CMatrix,
) -> (CMatrix, f64, f64) {
    let mut rho = start;
    let mut f = value(&rho);
    let mut eta = 1.0;
    let mut fw_gap = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..iters {
        let g = grad(&rho);
        fw_gap = eigh(&g).max() - (&rho * &g).trace().re;
        if concave && fw_gap < tol {
            break;
        }
        let mut accepted = false;
        while eta > 1e-12 {
            let cand = eg_step(&rho, &g, eta);
            let fc = value(&cand);
            if fc > f {
                stalled = if fc - f < tol { stalled + 1 } else { 0 };
                rho = cand;
                f = fc;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted || (!concave && stalled >= 5) {
            break;
        }
        eta = (eta * 1.5).min(4.0);
    }
    (rho, f, fw_gap)
}

/// Start `k`: the maximally mixed state for `k = 0`, otherwise a full-rank
/// Wishart draw mixed with it.
fn start_state(d: usize, k: usize, seed: u64) -> CMatrix {
    let pi = tensor::identity::<f64>(d) / Complex::new(d as f64, 0.0);
    if k == 0 {
        return pi;
    }
    let g: CMatrix = tensor::gaussian_matrix(d, d, &mut stream(seed, k as u64));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    w * Complex::new(0.9 / tr, 0.0) + pi * Complex::new(0.1, 0.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub argmax: Vec<Vec<[f64; 2]>>,
    /// Final value of every restart, start 0 first.
    pub restart_values: Vec<f64>,
    /// Largest minus smallest restart value.
    pub spread: f64,
    /// Frank-Wolfe gap at the returned input, in bits: the true maximum is
    /// at most `value + certified_gap`.
    pub certified_gap: f64,
    #[serde(skip)]
    pub input: CMatrix,
}

/// `C_E(N) = max_ρ I(A:B)`.
pub fn entanglement_assisted_capacity(ch: &Channel, cfg: &CapacityConfig) -> Result<CapacityEstimate> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("capacity needs restarts >= 1".into()));
    }
    let pair = Pair::new(ch);
    let runs: Vec<(CMatrix, f64, f64)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let start = start_state(ch.in_dim(), k, cfg.seed);
            ascend(start, cfg.iters, cfg.tol, true, &|r| pair.mutual(r), &|r| pair.mutual_gradient(r))
        })
        .collect();
    Ok(estimate_from_runs(runs))
}

fn estimate_from_runs(runs: Vec<(CMatrix, f64, f64)>) -> CapacityEstimate {
    let restart_values: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let best = (0..runs.len()).fold(0, |b, i| if runs[i].1 > runs[b].1 { i } else { b });
    let lo = restart_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = restart_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let input = runs[best].0.clone();
    let certified_gap = runs[best].2 / std::f64::consts::LN_2;
    CapacityEstimate { value: hi, argmax: matrix(&input), restart_values, spread: hi - lo, certified_gap, input }
}

#[derive(Clone, Debug, Serialize)]
pub struct QidOneShot {
    pub value: f64,
    /// Coherent information at the `C_E` argmax.
    pub coherent_info_at_ce_argmax: f64,
    /// Largest coherent information found.
    pub best_coherent_info: f64,
    /// Whether any input with coherent information above the tolerance was found.
    pub feasible: bool,
    pub argmax: Option<Vec<Vec<[f64; 2]>>>,
}

/// `sup { I(A:B) : I(A⟩B) > 0 }`, zero when the set is empty.
///
/// When the `C_E` maximizer is feasible its value is returned. Otherwise the
/// coherent information is maximized from several starts; from the best
/// feasible point, ascent on `I(A:B)` continues with each step cut back by
/// bisection to stay feasible.
pub fn q_id_one_shot(ch: &Channel, ce: &CapacityEstimate, cfg: &CapacityConfig) -> Result<QidOneShot> {
    let pair = Pair::new(ch);
    let at_argmax = pair.coherent(&ce.input);
    if at_argmax > COHERENT_TOL {
        return Ok(QidOneShot {
            value: ce.value,
            coherent_info_at_ce_argmax: at_argmax,
            best_coherent_info: at_argmax,
            feasible: true,
            argmax: Some(ce.argmax.clone()),
        });
    }
    let runs: Vec<(CMatrix, f64)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let start = start_state(ch.in_dim(), k, cfg.seed ^ 0x5eed);
            let (r, v, _) = ascend(start, cfg.iters, cfg.tol, false, &|r| pair.coherent(r), &|r| pair.coherent_gradient(r));
            (r, v)
        })
        .collect();
    let (best_rho, best_ic) = runs.into_iter().fold((CMatrix::zeros(0, 0), f64::NEG_INFINITY), |acc, r| if r.1 > acc.1 { r } else { acc });
    if best_ic <= COHERENT_TOL {
        return Ok(QidOneShot { value: 0.0, coherent_info_at_ce_argmax: at_argmax, best_coherent_info: best_ic, feasible: false, argmax: None });
    }
    let feasible = |r: &CMatrix| pair.coherent(r) > COHERENT_TOL;
    // Move toward the unconstrained maximizer as far as feasibility allows;
    // concavity of I(A:B) makes it nondecreasing along the segment.
    let mix = |a: &CMatrix, b: &CMatrix, s: f64| a * Complex::new(1.0 - s, 0.0) + b * Complex::new(s, 0.0);
    let last_feasible = |from: &CMatrix, to: &CMatrix| {
        let (mut lo, mut hi) = (0.0, 1.0);
        if feasible(to) {
            return to.clone();
        }
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if feasible(&mix(from, to, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mix(from, to, lo)
    };
    let mut rho = last_feasible(&best_rho, &ce.input);
    let mut f = pair.mutual(&rho);
    let mut eta = 1.0;
    for _ in 0..cfg.iters {
        let cand = last_feasible(&rho, &eg_step(&rho, &pair.mutual_gradient(&rho), eta));
        let fc = pair.mutual(&cand);
        if fc <= f + cfg.tol {
            eta *= 0.5;
            if eta < 1e-8 {
                break;
            }
            continue;
        }
        rho = cand;
        f = fc;
    }
    Ok(QidOneShot {
        value: f,
        coherent_info_at_ce_argmax: at_argmax,
        best_coherent_info: best_ic,
        feasible: true,
        argmax: Some(matrix(&rho)),
    })
}

/// Entropies a direct-coding rate is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPoint<T> {
    pub h_a: T,
    pub h_b: T,
    pub h_e: T,
}

impl<T: Num + Copy> EntropyPoint<T> {
    /// `I(A:B) = H(A) + H(B) − H(E)` for a pure `ABE` state.
    pub fn mutual_information(&self) -> T {
        self.h_a + self.h_b - self.h_e
    }
}

/// Block-length bookkeeping of an amortized identification code, all
/// logarithms base 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateParams<T> {
    pub n: T,
    pub log_s: T,
    /// Noiseless side register.
    pub log_c: T,
    /// Register Alice discards.
    pub log_f: T,
    pub rate: T,
}

/// `(log|S| − 2 log|C|) / n`.
pub fn amortized_rate<T: Num + Copy>(n: T, log_s: T, log_c: T) -> T {
    (log_s - (log_c + log_c)) / n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CodingCase {
    /// `H(E) < H(B)`: no side register.
    Unamortized,
    /// `H(E) ≥ H(B)`: nothing discarded.
    Amortized,
}

/// Direct-coding parameters at block length `n` for slack `delta` and
/// typicality constant `c`.
pub fn direct_coding_params<T: Num + Copy + PartialOrd>(point: &EntropyPoint<T>, n: T, delta: T, c: T) -> (CodingCase, RateParams<T>) {
    let seven = T::one() + T::one() + T::one() + T::one() + T::one() + T::one() + T::one();
    let eight = seven + T::one();
    let margin = (seven + c) * delta;
    let (case, r, f) = if point.h_e < point.h_b {
        (CodingCase::Unamortized, T::zero(), point.h_b - point.h_e - margin)
    } else {
        (CodingCase::Amortized, point.h_e - point.h_b + margin, T::zero())
    };
    let log_s = n * (point.h_a + r + f - eight * delta);
    let log_c = n * r;
    let params = RateParams { n, log_s, log_c, log_f: n * f, rate: amortized_rate(n, log_s, log_c) };
    (case, params)
}

#[derive(Clone, Debug, Serialize)]
pub struct AntidegradabilityGap {
    /// `min_T ‖Choi(T∘N^c) − Choi(N)‖₂` found.
    pub gap: f64,
    pub iterations: usize,
    /// Choi matrix of the best map `E → B` found.
    #[serde(skip)]
    pub map_choi: CMatrix,
}

/// Projection onto `{X ≥ 0, tr_B X = I_E}` (Choi matrices of channels
/// `E → B`) by Dykstra's alternating projections.
fn project_cptp(y: &CMatrix, de: usize, db: usize) -> CMatrix {
    let affine = |x: &CMatrix| {
        let mut out = x.clone();
        for e in 0..de {
            for f in 0..de {
                let mut tr = Complex::new(0.0, 0.0);
                for b in 0..db {
                    tr += x[(e * db + b, f * db + b)];
                }
                let target = if e == f { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) };
                let corr = (tr - target) / Complex::new(db as f64, 0.0);
                for b in 0..db {
                    out[(e * db + b, f * db + b)] -= corr;
                }
            }
        }
        out
    };
    let psd = |x: &CMatrix| eigh(x).map(|v| v.max(0.0));
    let mut cur = y.clone();
    let n = y.nrows();
    let (mut p, mut q) = (CMatrix::zeros(n, n), CMatrix::zeros(n, n));
    for _ in 0..200 {
        let a = affine(&(&cur + &p));
        p = &cur + &p - &a;
        let next = psd(&(&a + &q));
        q = &a + &q - &next;
        let change = (&next - &cur).norm();
        cur = next;
        if change < 1e-13 {
            break;
        }
    }
    cur
}

/// Smallest Frobenius distance between `Choi(N)` and `Choi(T∘N^c)` over
/// channels `T` found by projected accelerated gradient descent.
pub fn antidegradability_gap(ch: &Channel, iters: usize) -> Result<AntidegradabilityGap> {
    let ch = ch.minimal();
    let comp = ch.complement();
    let (da, db, de) = (ch.in_dim(), ch.out_dim(), comp.out_dim());
    // coeff[(i, j)] = N^c(|i⟩⟨j|).
    let mut coeff = Vec::with_capacity(da * da);
    for i in 0..da {
        for j in 0..da {
            let mut eij = CMatrix::zeros(da, da);
            eij[(i, j)] = Complex::new(1.0, 0.0);
            coeff.push(comp.apply_matrix(&eij)?);
        }
    }
    let k = CMatrix::from_fn(da * da, de * de, |ij, ef| coeff[ij][(ef / de, ef % de)]);
    let norm = k.singular_values().max();
    let target = ch.choi().clone();
    let forward = |x: &CMatrix| {
        let mut out = CMatrix::zeros(da * db, da * db);
        for i in 0..da {
            for j in 0..da {
                let c = &coeff[i * da + j];
                let mut block = CMatrix::zeros(db, db);
                for e in 0..de {
                    for f in 0..de {
                        if c[(e, f)] != Complex::new(0.0, 0.0) {
                            block += x.view((e * db, f * db), (db, db)) * c[(e, f)];
                        }
                    }
                }
                out.view_mut((i * db, j * db), (db, db)).copy_from(&block);
            }
        }
        out
    };
    let adjoint = |z: &CMatrix| {
        let mut out = CMatrix::zeros(de * db, de * db);
        for i in 0..da {
            for j in 0..da {
                let c = &coeff[i * da + j];
                let zb = z.view((i * db, j * db), (db, db)).into_owned();
                for e in 0..de {
                    for f in 0..de {
                        let w = c[(e, f)].conj();
                        if w != Complex::new(0.0, 0.0) {
                            let mut v = out.view_mut((e * db, f * db), (db, db));
                            v += &zb * w;
                        }
                    }
                }
            }
        }
        out
    };
    let residual = |x: &CMatrix| (forward(x) - &target).norm();
    let mut x = tensor::kron(&tensor::identity(de), &(tensor::identity(db) / Complex::new(db as f64, 0.0)));
    if norm <= 0.0 {
        return Ok(AntidegradabilityGap { gap: residual(&x), iterations: 0, map_choi: x });
    }
    let step = Complex::new(1.0 / (2.0 * norm * norm), 0.0);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut best = (residual(&x), x.clone());
    let mut used = 0;
    let mut checkpoint = best.0;
    for it in 0..iters {
        used = it + 1;
        let grad = adjoint(&(forward(&y) - &target)) * Complex::new(2.0, 0.0);
        let next = project_cptp(&(&y - grad * step), de, db);
        let r = residual(&next);
        if r < best.0 {
            best = (r, next.clone());
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = Complex::new((t - 1.0) / t_next, 0.0);
        y = &next + (&next - &x) * momentum;
        let moved = (&next - &x).norm();
        x = next;
        t = t_next;
        if best.0 < 1e-12 || moved < 1e-15 {
            break;
        }
        // Away from zero the residual plateaus; stop once it stalls.
        if used % 200 == 0 {
            if checkpoint - best.0 < 1e-4 * best.0 {
                break;
            }
            checkpoint = best.0;
        }
    }
    Ok(AntidegradabilityGap { gap: best.0, iterations: used, map_choi: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cr;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| cr(x))))
    }

    #[test]
    fn entropy_examples() {
        assert!(entropy(&diag(&[1.0, 0.0])).unwrap().abs() < 1e-12);
        assert!((entropy(&diag(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-12);
        let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((entropy(&diag(&[0.25, 0.75])).unwrap() - h).abs() < 1e-12);
        assert!((h - 0.811278).abs() < 1e-6);
        assert!(entropy(&diag(&[1.2, -0.2])).is_err());
    }

    #[test]
    fn capacity_point_examples() {
        let pi = ComplexOperator::maximally_mixed(vec![2]);
        let p = capacity_point(&Channel::identity(2), &pi).unwrap();
        assert!((p.mutual_information - 2.0).abs() < 1e-9 && (p.coherent_information - 1.0).abs() < 1e-9);
        let p = capacity_point(&Channel::dephasing(2, 1.0).unwrap(), &pi).unwrap();
        assert!((p.mutual_information - 1.0).abs() < 1e-9 && p.coherent_information.abs() < 1e-9);
        let c = Channel::constant(2, &ComplexOperator::diagonal(&[0.3, 0.7])).unwrap();
        let rho = ComplexOperator::diagonal(&[0.6, 0.4]);
        assert!(capacity_point(&c, &rho).unwrap().mutual_information.abs() < 1e-9);
    }

    #[test]
    fn ce_of_identity_and_dephasing() {
        let cfg = CapacityConfig::default();
        let ce = entanglement_assisted_capacity(&Channel::identity(2), &cfg).unwrap();
        assert!((ce.value - 2.0).abs() < 1e-4, "{}", ce.value);
        let ce = entanglement_assisted_capacity(&Channel::dephasing(2, 1.0).unwrap(), &cfg).unwrap();
        assert!((ce.value - 1.0).abs() < 1e-4);
        let ce = entanglement_assisted_capacity(&Channel::depolarizing(2, 1.0).unwrap(), &cfg).unwrap();
        assert!(ce.value.abs() < 1e-6);
    }

    #[test]
    fn rate_arithmetic() {
        assert_eq!(amortized_rate(3.0, 8.0, 1.0), 2.0);
        let id2 = EntropyPoint { h_a: 1.0, h_b: 1.0, h_e: 0.0 };
        let (case, p) = direct_coding_params(&id2, 1.0, 0.0, 1.0);
        assert_eq!(case, CodingCase::Unamortized);
        assert_eq!((p.log_f, p.rate), (1.0, 2.0));
        let cbit = EntropyPoint { h_a: 1.0, h_b: 1.0, h_e: 1.0 };
        let (case, p) = direct_coding_params(&cbit, 1.0, 0.0, 1.0);
        assert_eq!(case, CodingCase::Amortized);
        assert_eq!(p.rate, 1.0);
    }

    #[test]
    fn projection_lands_on_channels() {
        let y: CMatrix = tensor::gaussian_matrix(4, 4, &mut crate::rng::seeded(3));
        let x = project_cptp(&tensor::hermitian_part(&y), 2, 2);
        assert!(tensor::eigvalsh(&x)[0] > -1e-9);
        let tr = tensor::split(&[2, 2], &[0]).unwrap().trace_out(&x);
        assert!((tr - tensor::identity::<f64>(2)).norm() < 1e-8);
    }
}
