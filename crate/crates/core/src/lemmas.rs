//! Seeded randomized battery over the supporting inequalities, plus the
//! transposition example for the `t`-restricted norm bound.

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::LinearMap;
use crate::error::Result;
use crate::metrics::{cb_ratio_check, check_f_vs_d, fidelity, overlap_trace_norm, CbRatio};
use crate::qid::{gentle_check, little_eig, mixing_fidelity_bound};
use crate::rng::{stream, Rng};
use crate::scalar::CMatrix;
use crate::tensor::{self, haar_state, haar_unitary, uniform_index, ComplexOperator, PureState};

use rand::Rng as _;

/// Equality tolerance for the overlap identity.
pub const NICE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaConfig {
    pub trials: usize,
    /// Largest dimension of any factor drawn.
    pub max_dim: usize,
    /// Restarts of the two restricted-norm ascents.
    pub norm_restarts: usize,
    /// Allowed excess `lhs − rhs` on the inequalities.
    pub slack: f64,
    pub seed: u64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self { trials: 1000, max_dim: 8, norm_restarts: 16, slack: 1e-9, seed: 7 }
    }
}

/// Outcome of one randomized check.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaSummary {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Instances whose hypotheses could not be verified.
    pub skipped: usize,
    /// Largest `lhs − rhs` seen (for the equality, largest `|lhs − rhs|`).
    pub worst_slack: f64,
    pub first_failure: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaBatteryReport {
    pub config: LemmaConfig,
    pub lemmas: Vec<LemmaSummary>,
    /// Transposition on qubits at `t = 2`.
    pub norm_bound: CbRatio,
    /// Whether the transposition ratio lies in `[1.9, 2 + 1e-3]`.
    pub norm_bound_tight: bool,
    pub all_pass: bool,
}

/// `(lhs, rhs)` of one instance, or `None` when skipped.
type Instance = Option<(f64, f64)>;

fn dim(rng: &mut Rng, lo: usize, max: usize) -> usize {
    lo + uniform_index(max - lo + 1, rng)
}

fn random_state(d: usize, rank: usize, rng: &mut Rng) -> CMatrix {
    let g: CMatrix = tensor::gaussian_matrix(d, rank, rng);
    let w = &g * g.adjoint();
    let tr = w.trace();
    w / tr
}

/// `U diag(u) U†` with `u` uniform in `[0, 1]`.
fn random_contraction(d: usize, rng: &mut Rng) -> CMatrix {
    let u: CMatrix = haar_unitary(d, rng);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| Complex::new(rng.random::<f64>(), 0.0)));
    &u * diag * u.adjoint()
}

fn nice(rng: &mut Rng, max: usize) -> Result<Instance> {
    let (db, de) = (dim(rng, 1, max), dim(rng, 1, max));
    let phi: PureState = haar_state(db * de, rng)?.with_dims(vec![db, de])?;
    // Half the pairs are perturbations of each other, so fidelities near 1
    // are exercised too.
    let psi = if rng.random::<bool>() {
        let noise: PureState = haar_state(db * de, rng)?;
        let t = rng.random::<f64>();
        PureState::from_unnormalized(vec![db, de], phi.amplitudes() + noise.amplitudes() * Complex::new(t, 0.0))?
    } else {
        haar_state(db * de, rng)?.with_dims(vec![db, de])?
    };
    let lhs = overlap_trace_norm(&phi, &psi)?.powi(2);
    let rhs = fidelity(phi.marginal(&[0])?.matrix(), psi.marginal(&[0])?.matrix())?;
    Ok(Some((lhs, rhs)))
}

fn f_vs_d(rng: &mut Rng, max: usize) -> Result<Instance> {
    let d = dim(rng, 2, max);
    let (r1, r2) = (dim(rng, 1, d), dim(rng, 1, d));
    let rho = ComplexOperator::from_matrix(random_state(d, r1, rng))?;
    let sigma = ComplexOperator::from_matrix(random_state(d, r2, rng))?;
    let c = check_f_vs_d(&rho, &sigma)?;
    // Report the larger violation of the two links.
    let left = c.one_minus_sqrt_f - c.half_trace_distance;
    let right = c.half_trace_distance - c.sqrt_one_minus_f;
    Ok(Some((left.max(right), 0.0)))
}

fn fidelity_monotone(rng: &mut Rng, max: usize) -> Result<Instance> {
    let d = dim(rng, 2, max);
    let rho = random_state(d, dim(rng, 1, d), rng);
    let sigma = random_state(d, dim(rng, 1, d), rng);
    // √ρ C √ρ with 0 ≤ C ≤ 1 lies between 0 and ρ.
    let shrink = |m: &CMatrix, rng: &mut Rng| -> Result<CMatrix> {
        let s = tensor::sqrt_psd(m)?;
        Ok(&s * random_contraction(d, rng) * &s)
    };
    let rho_t = shrink(&rho, rng)?;
    let sigma_t = shrink(&sigma, rng)?;
    Ok(Some((fidelity(&rho_t, &sigma_t)?, fidelity(&rho, &sigma)?)))
}

fn gentle(rng: &mut Rng, max: usize) -> Result<Instance> {
    let d = dim(rng, 2, max);
    let rho = random_state(d, dim(rng, 1, d), rng);
    let x = random_contraction(d, rng);
    let r = gentle_check(&rho, &x)?;
    Ok(r.skipped.is_none().then_some((r.distance, r.bound)))
}

fn little(rng: &mut Rng, max: usize) -> Result<Instance> {
    let d = dim(rng, 1, max);
    let mut p: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    // Occasional exact zeros and ties.
    if d > 1 && rng.random::<f64>() < 0.2 {
        p[d - 1] = 0.0;
    }
    if d > 2 && rng.random::<f64>() < 0.2 {
        p[1] = p[0];
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p.sort_by(|a, b| b.total_cmp(a));
    let dd = rng.random::<f64>();
    let r = little_eig(&p, dd)?;
    Ok(Some((r.mass, dd)))
}

fn mixing(rng: &mut Rng, max: usize) -> Result<Instance> {
    let d = dim(rng, 2, max);
    let r = dim(rng, 1, d);
    let rho = random_state(d, r, rng);
    let k = dim(rng, 1, 4);
    let sigmas: Vec<CMatrix> = (0..k).map(|_| random_state(d, dim(rng, 1, r), rng)).collect();
    let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let rep = mixing_fidelity_bound(&rho, &sigmas, &w)?;
    Ok(rep.skipped.is_none().then_some((rep.fidelity, rep.bound)))
}

type Check = fn(&mut Rng, usize) -> Result<Instance>;

const CHECKS: [(&str, Check, bool); 6] = [
    ("overlap_identity", nice, true),
    ("fidelity_vs_distance", f_vs_d, false),
    ("fidelity_monotone", fidelity_monotone, false),
    ("gentle_measurement", gentle, false),
    ("little_eigenvalues", little, false),
    ("mixing_vs_fidelity", mixing, false),
];

pub fn lemma_battery(cfg: &LemmaConfig) -> Result<LemmaBatteryReport> {
    let max = cfg.max_dim.max(2);
    let mut lemmas = Vec::with_capacity(CHECKS.len());
    for (l, &(name, check, equality)) in CHECKS.iter().enumerate() {
        let results: Vec<Instance> = (0..cfg.trials)
            .into_par_iter()
            .map(|i| check(&mut stream(cfg.seed, (l * cfg.trials + i) as u64), max))
            .collect::<Result<_>>()?;
        let mut s = LemmaSummary { name: name.into(), trials: cfg.trials, failures: 0, skipped: 0, worst_slack: f64::NEG_INFINITY, first_failure: None };
        for (i, r) in results.iter().enumerate() {
            let Some((lhs, rhs)) = *r else {
                s.skipped += 1;
                continue;
            };
            let (slack, tol) = if equality { ((lhs - rhs).abs(), NICE_TOL) } else { (lhs - rhs, cfg.slack) };
            s.worst_slack = s.worst_slack.max(slack);
            if !(slack <= tol) {
                s.failures += 1;
                s.first_failure.get_or_insert(i);
            }
        }
        lemmas.push(s);
    }
    let norm_bound = cb_ratio_check(&LinearMap::transpose(2), 2, cfg.norm_restarts, cfg.seed)?;
    let norm_bound_tight = norm_bound.ratio.is_some_and(|r| (1.9..=2.0 + 1e-3).contains(&r));
    let all_pass = lemmas.iter().all(|s| s.failures == 0) && norm_bound.bound_holds && norm_bound_tight;
    Ok(LemmaBatteryReport { config: cfg.clone(), lemmas, norm_bound, norm_bound_tight, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_battery_passes() {
        let cfg = LemmaConfig { trials: 50, ..Default::default() };
        let r = lemma_battery(&cfg).unwrap();
        for s in &r.lemmas {
            assert_eq!(s.failures, 0, "{s:?}");
        }
        assert!(r.norm_bound_tight, "{:?}", r.norm_bound);
    }
}
