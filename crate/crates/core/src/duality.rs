//! Decoder synthesis and the two duality reports: geometry preservation
//! against environment forgetfulness, and disturbance against
//! recoverability.
//!
//! Infima over decoders are witnessed by the Petz map and a seesaw
//! refinement of it, so they are upper bounds on the infimum. Diamond norms
//! are ascent estimates, so they are lower bounds; reports flag this.

use std::time::Instant;

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::spec::parse_channel;
use crate::channels::{Channel, LinearMap};
use crate::error::{Error, Result};
use crate::metrics::{self, OptimConfig};
use crate::report::StateRecord;
use crate::scalar::{CMatrix, CVector};
use crate::tensor::{self, ComplexOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderMethod {
    Petz,
    Seesaw,
}

#[derive(Clone, Debug)]
pub struct DecoderSearchResult {
    /// Channel `B → A`.
    pub decoder: Channel,
    pub entanglement_fidelity: f64,
    /// Ascent estimate of `‖D∘N − id‖◊`.
    pub diamond_deviation: f64,
    pub method: DecoderMethod,
    /// Entanglement fidelity after each accepted iteration, starting value first.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualityConfig {
    pub optim: OptimConfig,
    /// Additive slack inside every deficit argument.
    pub slack: f64,
    pub seesaw_iters: usize,
    pub diamond_restarts: usize,
}

impl Default for DualityConfig {
    fn default() -> Self {
        Self { optim: OptimConfig::default(), slack: 0.05, seesaw_iters: 100, diamond_restarts: 8 }
    }
}

/// `F_e = Σ_k |tr(ρ K_k)|²` over the Kraus operators of `D∘N`.
pub fn entanglement_fidelity(ch: &Channel, decoder: &Channel, prior: &ComplexOperator) -> Result<f64> {
    let dn = Channel::compose(decoder, ch)?;
    if dn.out_dim() != dn.in_dim() || prior.dim() != dn.in_dim() {
        return Err(Error::DimensionMismatch("decoder must return to the input space".into()));
    }
    Ok(dn.kraus().iter().map(|k| (prior.matrix() * k).trace().norm_sqr()).sum())
}

fn diamond_deviation(ch: &Channel, decoder: &Channel, restarts: usize, seed: u64) -> Result<f64> {
    let dn = Channel::compose(decoder, ch)?;
    let gamma = LinearMap::difference(&dn, &Channel::identity(ch.in_dim()))?;
    Ok(metrics::diamond_norm_estimate(&gamma, restarts, seed)?.value)
}

/// Support projector and inverse square root of a PSD matrix.
fn inv_sqrt_on_support(m: &CMatrix, cutoff: f64) -> (CMatrix, CMatrix) {
    let eig = tensor::eigh(m);
    let inv = eig.map(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 });
    let supp = eig.map(|x| if x > cutoff { 1.0 } else { 0.0 });
    (inv, supp)
}

/// Kraus operators `|0⟩⟨κ|` for an orthonormal basis `κ` of the kernel of `supp`.
fn kernel_completion(supp: &CMatrix, out_dim: usize) -> Vec<CMatrix> {
    let eig = tensor::eigh(&(tensor::identity::<f64>(supp.nrows()) - supp));
    let mut kraus = Vec::new();
    for (j, &v) in eig.values.iter().enumerate() {
        if v > 0.5 {
            let kappa = eig.vectors.column(j);
            let mut k = CMatrix::zeros(out_dim, supp.nrows());
            for i in 0..supp.nrows() {
                k[(0, i)] = kappa[i].conj();
            }
            kraus.push(k);
        }
    }
    kraus
}

pub fn petz_decoder(ch: &Channel, prior: &ComplexOperator, restarts: usize, seed: u64) -> Result<DecoderSearchResult> {
    let decoder = petz_map(ch, prior)?;
    let fe = entanglement_fidelity(ch, &decoder, prior)?;
    let diamond_deviation = diamond_deviation(ch, &decoder, restarts, seed)?;
    Ok(DecoderSearchResult {
        decoder,
        entanglement_fidelity: fe,
        diamond_deviation,
        method: DecoderMethod::Petz,
        history: vec![fe],
    })
}

/// `σ ↦ √P N†(N(P)^{-1/2} σ N(P)^{-1/2}) √P`, completed on the kernel of `N(P)`.
pub fn petz_map(ch: &Channel, prior: &ComplexOperator) -> Result<Channel> {
    prior.check_density()?;
    if prior.dim() != ch.in_dim() {
        return Err(Error::DimensionMismatch("prior must live on the channel input".into()));
    }
    let np = ch.apply_matrix(prior.matrix())?;
    if tensor::eigh(&np).max() <= 1e-10 {
        return Err(Error::SingularOutput);
    }
    let (inv, supp) = inv_sqrt_on_support(&np, 1e-10);
    let sqrt_p = tensor::sqrt_psd(prior.matrix())?;
    let mut kraus: Vec<CMatrix> = ch.kraus().iter().map(|k| &sqrt_p * k.adjoint() * &inv).collect();
    kraus.extend(kernel_completion(&supp, ch.in_dim()));
    Channel::from_kraus(kraus)
}

/// `W` with `F_e(D) = tr(J_D W)` for decoders `D: B → A`.
fn fidelity_operator(ch: &Channel, prior: &ComplexOperator) -> CMatrix {
    let (da, db) = (ch.in_dim(), ch.out_dim());
    let mut w = CMatrix::zeros(da * db, da * db);
    for k in ch.kraus() {
        let kr = k * prior.matrix();
        let m = CVector::from_fn(da * db, |idx, _| kr[(idx / da, idx % da)]);
        w += m.conjugate() * m.transpose();
    }
    w
}

fn fe_from_choi(j: &CMatrix, w: &CMatrix) -> f64 {
    (j * w).trace().re
}

/// Reimpell–Werner power iteration on the decoder Choi matrix, started from
/// the Petz map. An update is accepted only if `F_e` does not decrease.
pub fn seesaw_decoder(
    ch: &Channel,
    prior: &ComplexOperator,
    iters: usize,
    restarts: usize,
    seed: u64,
) -> Result<DecoderSearchResult> {
    if iters == 0 {
        return Err(Error::InvalidArgument("seesaw needs at least one iteration".into()));
    }
    let (da, db) = (ch.in_dim(), ch.out_dim());
    let start = petz_map(ch, prior)?;
    let w = fidelity_operator(ch, prior);
    let mut j = start.choi().clone();
    let mut fe = fe_from_choi(&j, &w);
    let mut history = vec![fe];
    let split = tensor::split(&[db, da], &[0])?;
    for _ in 0..iters {
        let x = &w * &j * &w;
        let lambda = split.trace_out(&x);
        let (inv, supp) = inv_sqrt_on_support(&lambda, 1e-14);
        let left = inv.kronecker(&tensor::identity::<f64>(da));
        let mut next = &left * x * &left;
        let mut e0 = CMatrix::zeros(da, da);
        e0[(0, 0)] = Complex::new(1.0, 0.0);
        next += (tensor::identity::<f64>(db) - supp).kronecker(&e0);
        let next = tensor::hermitian_part(&next);
        let next_fe = fe_from_choi(&next, &w);
        if next_fe < fe {
            break;
        }
        let gain = next_fe - fe;
        j = next;
        fe = next_fe;
        history.push(fe);
        if gain <= 1e-12 {
            break;
        }
    }
    let decoder = Channel::from_choi(db, da, &j, 1e-14)?;
    let fe_final = entanglement_fidelity(ch, &decoder, prior)?;
    let diamond_deviation = diamond_deviation(ch, &decoder, restarts, seed)?;
    Ok(DecoderSearchResult { decoder, entanglement_fidelity: fe_final, diamond_deviation, method: DecoderMethod::Seesaw, history })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessPair {
    pub role: &'static str,
    pub phi: StateRecord,
    pub psi: StateRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityAlternativeReport {
    pub channel_spec: String,
    pub delta_hat: f64,
    pub f_hat: f64,
    pub bound_forward: f64,
    pub bound_converse: f64,
    /// `f_hat / bound_forward` and `delta_hat / bound_converse`.
    pub headroom_forward: f64,
    pub headroom_converse: f64,
    pub forward_pass: bool,
    pub converse_pass: bool,
    pub slack: f64,
    pub witnesses: Vec<WitnessPair>,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: Option<f64>,
}

pub fn forward_bound(delta: f64) -> f64 {
    4.0 * 2f64.sqrt() * delta.max(0.0).powf(0.25)
}

pub fn converse_bound(epsilon: f64) -> f64 {
    4.0 * (2.0 * epsilon.max(0.0)).sqrt()
}

/// Geometry deficit of `N` against forgetfulness of `N^c`.
pub fn fidelity_alternative_report(
    spec: &str,
    ch: &Channel,
    cfg: &DualityConfig,
    timed: bool,
) -> Result<FidelityAlternativeReport> {
    let clock = Instant::now();
    let geo = metrics::geometry_deficit(ch, &cfg.optim)?;
    let forget = metrics::forgetfulness_deficit(&ch.complement(), &cfg.optim)?;
    let (delta_hat, f_hat) = (geo.value, forget.value);
    let bound_forward = forward_bound(delta_hat + cfg.slack);
    let bound_converse = converse_bound(f_hat + cfg.slack);
    let forward_pass = f_hat <= bound_forward;
    let converse_pass = delta_hat <= bound_converse;
    Ok(FidelityAlternativeReport {
        channel_spec: spec.to_string(),
        delta_hat,
        f_hat,
        bound_forward,
        bound_converse,
        headroom_forward: f_hat / bound_forward,
        headroom_converse: delta_hat / bound_converse,
        forward_pass,
        converse_pass,
        slack: cfg.slack,
        witnesses: vec![
            WitnessPair { role: "geometry", phi: (&geo.phi).into(), psi: (&geo.psi).into() },
            WitnessPair { role: "forgetfulness", phi: (&forget.phi).into(), psi: (&forget.psi).into() },
        ],
        pass: forward_pass && converse_pass,
        seed: cfg.optim.seed,
        runtime_ms: timed.then(|| clock.elapsed().as_secs_f64() * 1e3),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InfoDisturbanceReport {
    pub channel_spec: String,
    /// Estimate of `‖N^c − R‖◊`, `R` the constant map to `N^c(prior)`.
    pub disturbance: f64,
    /// Smallest `‖D∘N − id‖◊` estimate over the decoders tried.
    pub found: f64,
    pub found_method: DecoderMethod,
    pub petz_fidelity: f64,
    pub seesaw_fidelity: f64,
    pub seesaw_iterations: usize,
    pub seesaw_monotone: bool,
    /// `2√found + slack`; asserted.
    pub bound: f64,
    /// `found ≤ 2√disturbance + slack`; recorded only.
    pub reverse_bound: f64,
    pub reverse_holds: bool,
    pub diamond_estimates_are_lower_bounds: bool,
    pub slack: f64,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: Option<f64>,
}

pub fn info_disturbance_report(
    spec: &str,
    ch: &Channel,
    prior: &ComplexOperator,
    cfg: &DualityConfig,
    timed: bool,
) -> Result<InfoDisturbanceReport> {
    let clock = Instant::now();
    let seed = cfg.optim.seed;
    let comp = ch.complement();
    let target = ComplexOperator::from_matrix(comp.apply_matrix(prior.matrix())?)?;
    let r = Channel::constant(ch.in_dim(), &target)?;
    let gamma = LinearMap::difference(&comp, &r)?;
    let disturbance = metrics::diamond_norm_estimate(&gamma, cfg.diamond_restarts, seed)?.value;
    let petz = petz_decoder(ch, prior, cfg.diamond_restarts, seed.wrapping_add(1))?;
    let seesaw = seesaw_decoder(ch, prior, cfg.seesaw_iters, cfg.diamond_restarts, seed.wrapping_add(2))?;
    let seesaw_monotone = seesaw.history.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let (found, found_method) = if seesaw.diamond_deviation < petz.diamond_deviation {
        (seesaw.diamond_deviation, DecoderMethod::Seesaw)
    } else {
        (petz.diamond_deviation, DecoderMethod::Petz)
    };
    let bound = 2.0 * found.sqrt() + cfg.slack;
    let reverse_bound = 2.0 * disturbance.sqrt() + cfg.slack;
    Ok(InfoDisturbanceReport {
        channel_spec: spec.to_string(),
        disturbance,
        found,
        found_method,
        petz_fidelity: petz.entanglement_fidelity,
        seesaw_fidelity: seesaw.entanglement_fidelity,
        seesaw_iterations: seesaw.history.len() - 1,
        seesaw_monotone,
        bound,
        reverse_bound,
        reverse_holds: found <= reverse_bound,
        diamond_estimates_are_lower_bounds: true,
        slack: cfg.slack,
        pass: disturbance <= bound,
        seed,
        runtime_ms: timed.then(|| clock.elapsed().as_secs_f64() * 1e3),
    })
}

/// The fixed 20-channel battery: named families plus five Haar-random
/// Stinespring dilations with `|A| = |B| = |E| ∈ {2, 3}`.
pub fn battery_specs() -> Vec<&'static str> {
    vec![
        "identity:2",
        "identity:3",
        "unitary:seed=7,d=2",
        "unitary:seed=8,d=3",
        "dephasing:1.0",
        "dephasing:0.5",
        "dephasing:p=1.0,d=3",
        "depolarizing:0.2",
        "depolarizing:0.6",
        "depolarizing:p=0.3,d=3",
        "erasure:0.25",
        "erasure:0.5",
        "amplitude-damping:0.3",
        "amplitude-damping:0.8",
        "constant:2",
        "stinespring:seed=101,a=2,b=2,e=2",
        "stinespring:seed=102,a=2,b=2,e=2",
        "stinespring:seed=103,a=2,b=2,e=2",
        "stinespring:seed=104,a=3,b=3,e=3",
        "stinespring:seed=105,a=3,b=3,e=3",
    ]
}

pub fn battery() -> Result<Vec<(String, Channel)>> {
    battery_specs().into_iter().map(|s| Ok((s.to_string(), parse_channel(s, 2)?))).collect()
}

/// Runs `f` over the battery in parallel, preserving battery order.
pub fn over_battery<R: Send>(f: impl Fn(&str, &Channel) -> Result<R> + Sync) -> Result<Vec<R>> {
    let channels = battery()?;
    channels.par_iter().map(|(s, ch)| f(s, ch)).collect()
}

/// Maximally mixed prior on the channel input.
pub fn flat_prior(ch: &Channel) -> ComplexOperator {
    ComplexOperator::maximally_mixed(vec![ch.in_dim()])
}
