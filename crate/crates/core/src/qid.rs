//! Quantum-identification codes.
//!
//! A code is a subspace `S ⊆ B⊗E`; Bob holds `B` and must answer "is it φ?"
//! with an effect `D_φ` on `B`. Decoders come from fictitious play on the
//! zero-sum game with payoff `1 − tr φ^B P + tr σ P`, where `σ` ranges over
//! the `B`-marginals of states in `S ∩ φ^⊥`. Both best responses are
//! eigendecompositions.
//!
//! Ambient index of `B⊗E` is `b·|E| + e`; when the code carries a side
//! register `C` it sits between them and counts as part of `B`.

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::trace_norm;
use crate::report::{amplitudes, matrix};
use crate::rng::{seeded, stream, Rng};
use crate::scalar::{CMatrix, CVector};
use crate::tensor::{self, eigh, haar_state, haar_subspace, split, Subspace};

/// Eigenvalues above this count as strictly positive in the decoder's
/// best response and as nonzero in spectra.
const SPECTRAL_FLOOR: f64 = 1e-12;

/// Upper payoffs closer than this count as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDims {
    pub s: usize,
    pub b: usize,
    pub e: usize,
    #[serde(default)]
    pub c: Option<usize>,
}

impl CodeDims {
    /// Dimension of everything Bob holds.
    pub fn b_total(&self) -> usize {
        self.b * self.c.unwrap_or(1)
    }
}

#[derive(Clone, Debug)]
pub struct Code {
    subspace: Subspace,
    dims: CodeDims,
}

impl Code {
    /// `frame` is the isometry `S → B⊗E` (or `S → B⊗C⊗E`).
    pub fn new(frame: CMatrix, b: usize, e: usize, c: Option<usize>) -> Result<Self> {
        let mut ambient = vec![b];
        ambient.extend(c);
        ambient.push(e);
        let subspace = Subspace::new(ambient, frame)?;
        let dims = CodeDims { s: subspace.dim(), b, e, c };
        Ok(Self { subspace, dims })
    }

    pub fn dims(&self) -> CodeDims {
        self.dims
    }

    pub fn frame(&self) -> &CMatrix {
        self.subspace.frame()
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// Ambient vector `J c`.
    pub fn embed(&self, coeffs: &CVector) -> CVector {
        self.frame() * coeffs
    }

    pub fn b_marginal(&self, v: &CVector) -> CMatrix {
        b_marginal(v, self.dims.b_total(), self.dims.e)
    }

    pub fn e_marginal(&self, v: &CVector) -> CMatrix {
        e_marginal(v, self.dims.b_total(), self.dims.e)
    }

    fn check_coeffs(&self, coeffs: &CVector) -> Result<()> {
        if coeffs.len() != self.dims.s {
            return Err(Error::DimensionMismatch(format!("{} coefficients for code of dim {}", coeffs.len(), self.dims.s)));
        }
        let n = coeffs.norm_squared();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { value: n });
        }
        Ok(())
    }

    pub fn to_record(&self) -> CodeRecord {
        CodeRecord { dims: self.dims, frame: matrix(self.frame()) }
    }

    pub fn from_record(rec: &CodeRecord) -> Result<Self> {
        let frame = from_pairs(&rec.frame)?;
        let code = Self::new(frame, rec.dims.b, rec.dims.e, rec.dims.c)?;
        if code.dims != rec.dims {
            return Err(Error::DimensionMismatch(format!("declared {:?}, frame gives {:?}", rec.dims, code.dims)));
        }
        Ok(code)
    }
}

/// Serialized form of a [`Code`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeRecord {
    pub dims: CodeDims,
    pub frame: Vec<Vec<[f64; 2]>>,
}

fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged or empty matrix".into()));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])))
}

fn vector_from_pairs(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|z| Complex::new(z[0], z[1])))
}

fn reshape(v: &CVector, db: usize, de: usize) -> CMatrix {
    CMatrix::from_fn(db, de, |b, e| v[b * de + e])
}

/// `tr_E |v⟩⟨v|` for an ambient vector (not necessarily normalized).
pub fn b_marginal(v: &CVector, db: usize, de: usize) -> CMatrix {
    let m = reshape(v, db, de);
    &m * m.adjoint()
}

/// `tr_B |v⟩⟨v|`.
pub fn e_marginal(v: &CVector, db: usize, de: usize) -> CMatrix {
    let m = reshape(v, db, de);
    m.transpose() * m.conjugate()
}

/// Haar-random code: the span of `ds` Haar-random orthonormal vectors.
pub fn random_code(db: usize, de: usize, ds: usize, rng: &mut Rng) -> Result<Code> {
    if ds > db * de {
        return Err(Error::InvalidArgument(format!("code dim {ds} exceeds {db}x{de}")));
    }
    let sub: Subspace = haar_subspace(vec![db, de], ds, rng)?;
    Code::new(sub.frame().clone(), db, de, None)
}

pub struct Helstrom {
    pub projector: CMatrix,
    /// `tr ρP − tr σP`.
    pub bias: f64,
}

/// Optimal test between `rho` and `sigma`: the projector onto the
/// nonnegative eigenspace of `rho − sigma`.
pub fn helstrom(rho: &CMatrix, sigma: &CMatrix) -> Result<Helstrom> {
    if rho.shape() != sigma.shape() || !rho.is_square() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", rho.shape(), sigma.shape())));
    }
    let eig = eigh(&(rho - sigma));
    let scale = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&j| eig.values[j] >= -SPECTRAL_FLOOR * scale).collect();
    let bias = keep.iter().map(|&j| eig.values[j]).sum();
    let v = eig.vectors.select_columns(&keep);
    Ok(Helstrom { projector: &v * v.adjoint(), bias })
}

/// One synthesized identification effect.
#[derive(Clone, Debug)]
pub struct DecoderAtom {
    /// Target coefficients in `S`.
    pub target: CVector,
    pub effect: CMatrix,
    /// `tr φ^B D`.
    pub acceptance: f64,
    /// Best adversary value `max tr ψ^B D` over `ψ ∈ S ∩ φ^⊥`, from an exact
    /// eigen-step against the returned effect.
    pub false_acceptance: f64,
    /// Adversary attaining `false_acceptance`, coefficients in `S`.
    pub adversary: Option<CVector>,
    /// Payoff of the returned effect against its best adversary.
    pub game_upper: f64,
    /// Best value the decoder's best response achieved against an adversary
    /// average; the game value lies between the two.
    pub game_lower: f64,
    pub iterations: usize,
}

impl DecoderAtom {
    pub fn gap(&self) -> f64 {
        self.game_upper - self.game_lower
    }

    pub fn to_record(&self) -> DecoderRecord {
        DecoderRecord {
            target: amplitudes(&self.target),
            effect: matrix(&self.effect),
            acceptance: self.acceptance,
            false_acceptance: self.false_acceptance,
            adversary: self.adversary.as_ref().map(amplitudes),
            game_upper: self.game_upper,
            game_lower: self.game_lower,
            iterations: self.iterations,
        }
    }

    /// Rebuilds an atom; the effect must satisfy `0 ≤ D ≤ 1`.
    pub fn from_record(rec: &DecoderRecord) -> Result<Self> {
        let effect = from_pairs(&rec.effect)?;
        if !effect.is_square() {
            return Err(Error::DimensionMismatch("effect must be square".into()));
        }
        let dev = tensor::hermitian_deviation(&effect);
        if dev > 1e-9 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let vals = tensor::eigvalsh(&effect);
        let worst = vals.iter().fold(0.0f64, |m, &v| m.max(-v).max(v - 1.0));
        if worst > 1e-9 {
            return Err(Error::NotPsd { min_eigenvalue: -worst });
        }
        Ok(Self {
            target: vector_from_pairs(&rec.target),
            effect,
            acceptance: rec.acceptance,
            false_acceptance: rec.false_acceptance,
            adversary: rec.adversary.as_deref().map(vector_from_pairs),
            game_upper: rec.game_upper,
            game_lower: rec.game_lower,
            iterations: rec.iterations,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderRecord {
    pub target: Vec<[f64; 2]>,
    pub effect: Vec<Vec<[f64; 2]>>,
    pub acceptance: f64,
    pub false_acceptance: f64,
    pub adversary: Option<Vec<[f64; 2]>>,
    pub game_upper: f64,
    pub game_lower: f64,
    pub iterations: usize,
}

/// Orthonormal basis of `c^⊥` in coefficient space, as columns.
fn complement_frame(c: &CVector) -> CMatrix {
    let n = c.len();
    let mut m = CMatrix::zeros(n, n + 1);
    m.set_column(0, c);
    for i in 0..n {
        m[(i, i + 1)] = Complex::new(1.0, 0.0);
    }
    let q = m.qr().q();
    q.columns(1, n - 1).into_owned()
}

/// The quadratic form `c ↦ ⟨Gc|(D⊗I)|Gc⟩` on the adversary's coordinates.
struct Lifted {
    /// `gr[b, j·|E| + e] = G[b·|E| + e, j]`.
    gr: CMatrix,
    m: usize,
    de: usize,
}

impl Lifted {
    fn new(g: &CMatrix, db: usize, de: usize) -> Self {
        let m = g.ncols();
        let gr = CMatrix::from_fn(db, m * de, |b, col| g[(b * de + col % de, col / de)]);
        Self { gr, m, de }
    }

    /// `G†(Σ_k w_k v_k v_k† ⊗ I)G` for the columns `v_k` of `v`.
    fn form(&self, v: &CMatrix, weights: Option<&[f64]>) -> CMatrix {
        let r = v.ncols();
        if r == 0 {
            return CMatrix::zeros(self.m, self.m);
        }
        let y = v.adjoint() * &self.gr;
        let de = self.de;
        let yp = CMatrix::from_fn(r * de, self.m, |row, j| {
            let (k, e) = (row / de, row % de);
            let s = weights.map_or(1.0, |w| w[k].max(0.0).sqrt());
            y[(k, j * de + e)] * s
        });
        yp.adjoint() * yp
    }
}

struct Play {
    effect: CMatrix,
    acceptance: f64,
    false_acceptance: f64,
    adversary: CVector,
    lower: f64,
}

/// Fictitious play for `min_P max_σ 1 − tr(target P) + tr(σ P)`. The
/// adversary's pure strategies are `c ↦ op(Gc)` for unit `c`, and its best
/// response is taken on the quadratic form `⟨Gc|(D⊗I)|Gc⟩`. Returns the
/// time-averaged effect with the best upper payoff seen.
fn fictitious_play(
    target: &CMatrix,
    g: &CMatrix,
    db: usize,
    de: usize,
    op: &(dyn Fn(&CVector) -> CMatrix + Sync),
    iters: usize,
) -> Play {
    let lifted = Lifted::new(g, db, de);
    let m = g.ncols();
    let mut sigma_sum = CMatrix::zeros(db, db);
    let mut d_sum = CMatrix::zeros(db, db);
    let mut a_sum = CMatrix::zeros(m, m);
    let mut accept_sum = 0.0;
    let mut lower = f64::NEG_INFINITY;
    let mut best_upper = f64::INFINITY;
    let mut best_balance = f64::INFINITY;
    let mut best_effect = CMatrix::zeros(db, db);
    for t in 1..=iters {
        let sigma_bar = if t == 1 { CMatrix::zeros(db, db) } else { &sigma_sum / Complex::new((t - 1) as f64, 0.0) };
        let eig = eigh(&(target - &sigma_bar));
        let pos: Vec<usize> = (0..db).filter(|&j| eig.values[j] > SPECTRAL_FLOOR).collect();
        lower = lower.max(1.0 - pos.iter().map(|&j| eig.values[j]).sum::<f64>());
        let v = eig.vectors.select_columns(&pos);
        accept_sum += (v.adjoint() * target * &v).trace().re;
        a_sum += lifted.form(&v, None);
        d_sum += &v * v.adjoint();
        let scale = Complex::new(1.0 / t as f64, 0.0);
        let adv = eigh(&(&a_sum * scale));
        let accept = accept_sum / t as f64;
        let upper = 1.0 - accept + adv.max();
        // Payoff ties go to the iterate with the smaller worse-side error.
        let balance = (1.0 - accept).max(adv.max());
        if upper < best_upper - TIE_TOL || (upper <= best_upper + TIE_TOL && balance < best_balance) {
            best_upper = upper.min(best_upper);
            best_balance = balance;
            best_effect = &d_sum * scale;
        }
        sigma_sum += op(&(g * adv.top_vector()));
    }
    // Certify against the returned effect with one exact adversary step.
    let eig = eigh(&best_effect);
    let form = lifted.form(&eig.vectors, Some(&eig.values));
    let adv = eigh(&form);
    Play {
        acceptance: (target * &best_effect).trace().re,
        false_acceptance: adv.max(),
        adversary: adv.top_vector(),
        effect: best_effect,
        lower,
    }
}

/// Decoder for target `phi` (coefficients in `S`) after `iters` rounds of
/// fictitious play.
pub fn minimax_decoder(code: &Code, phi: &CVector, iters: usize) -> Result<DecoderAtom> {
    code.check_coeffs(phi)?;
    let d = code.dims();
    let target = code.b_marginal(&code.embed(phi));
    if d.s == 1 {
        let h = helstrom(&target, &CMatrix::zeros(d.b_total(), d.b_total()))?;
        let acceptance = (&target * &h.projector).trace().re;
        return Ok(DecoderAtom {
            target: phi.clone(),
            effect: h.projector,
            acceptance,
            false_acceptance: 0.0,
            adversary: None,
            game_upper: 1.0 - acceptance,
            game_lower: 1.0 - acceptance,
            iterations: 0,
        });
    }
    if iters == 0 {
        return Err(Error::InvalidArgument("minimax_decoder needs iters >= 1".into()));
    }
    let perp = complement_frame(phi);
    let g = code.frame() * &perp;
    let (db, de) = (d.b_total(), d.e);
    let play = fictitious_play(&target, &g, db, de, &|v| b_marginal(v, db, de), iters);
    Ok(DecoderAtom {
        target: phi.clone(),
        game_upper: 1.0 - play.acceptance + play.false_acceptance,
        game_lower: play.lower,
        acceptance: play.acceptance,
        false_acceptance: play.false_acceptance,
        adversary: Some(&perp * play.adversary),
        effect: play.effect,
        iterations: iters,
    })
}

/// `count` Haar-random targets in coefficient space; target `i` uses
/// stream `i` of `seed`.
pub fn haar_targets(code: &Code, count: usize, seed: u64) -> Vec<CVector> {
    (0..count)
        .map(|i| {
            let s = haar_state::<f64, _>(code.dims().s, &mut stream(seed, i as u64)).expect("positive code dim");
            s.into_amplitudes()
        })
        .collect()
}

/// Decoders for every target, synthesized concurrently.
pub fn build_decoders(code: &Code, targets: &[CVector], iters: usize) -> Result<Vec<DecoderAtom>> {
    targets.par_iter().map(|t| minimax_decoder(code, t, iters)).collect()
}

pub fn ortho_to_all_bound(delta: f64) -> f64 {
    delta + 2.0 * delta.sqrt()
}

/// Environment forgetfulness implied by an `ε`-identification code.
pub fn qid_to_forgetfulness_bound(epsilon: f64) -> f64 {
    7.0 * epsilon.powf(0.25)
}

/// `η` of the forgetfulness-to-identification direction.
pub fn technical_eta(lambda: f64, mu: f64, delta: f64, epsilon: f64) -> f64 {
    3.0 * (30.0 * lambda * delta / mu + 3.0 * epsilon.sqrt() + 4.0 * delta).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Equal,
    Orthogonal,
    Adversary,
    Superposition,
    Haar,
    Net,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairWitness {
    pub target_index: usize,
    pub kind: PairKind,
    pub phi: Vec<[f64; 2]>,
    pub psi: Vec<[f64; 2]>,
    /// `|⟨φ|ψ⟩|²`.
    pub overlap: f64,
    /// `tr ψ^B D_φ`.
    pub acceptance: f64,
    pub error: f64,
}

/// Sandwich `F(φ,ψ) ≤ F(φ^B,ψ^B) ≤ F(φ,ψ) + 4√ε` over evaluated pairs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SandwichSummary {
    pub pairs: usize,
    pub epsilon: f64,
    /// Largest `F(φ,ψ) − F(φ^B,ψ^B)`; positive values violate the lower side
    /// beyond roundoff.
    pub max_lower_excess: f64,
    /// Largest `F(φ^B,ψ^B) − F(φ,ψ) − 4√ε`.
    pub max_upper_excess: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CodeEvaluation {
    pub dims: CodeDims,
    pub targets: usize,
    pub pairs: usize,
    pub haar_pairs: usize,
    pub structured_pairs: usize,
    pub net_pairs: usize,
    pub epsilon_hat: f64,
    pub witness: Option<PairWitness>,
    /// Largest `½‖φ^E − ψ^E‖₁` over evaluated pairs.
    pub env_distance_max: f64,
    /// `7 ε̂^{1/4}`.
    pub env_bound: f64,
    pub env_holds: bool,
    pub sandwich: SandwichSummary,
    pub seed: u64,
}

/// Fidelity and distance data of one ambient pair.
struct PairData {
    overlap: f64,
    fidelity_b: f64,
    env_distance: f64,
}

fn pair_data(phi: &CVector, psi: &CVector, db: usize, de: usize) -> PairData {
    let mp = reshape(phi, db, de);
    let mq = reshape(psi, db, de);
    // F(φ^B, ψ^B) = ‖tr_B |φ⟩⟨ψ|‖₁².
    let cross = mp.transpose() * mq.conjugate();
    let fidelity_b = trace_norm(&cross).powi(2);
    let env = mp.transpose() * mp.conjugate() - mq.transpose() * mq.conjugate();
    PairData { overlap: phi.dotc(psi).norm_sqr(), fidelity_b, env_distance: 0.5 * trace_norm(&env) }
}

/// Sandwich check on explicit coefficient pairs.
pub fn fidelity_sandwich_check(code: &Code, pairs: &[(CVector, CVector)], epsilon: f64) -> SandwichSummary {
    let d = code.dims();
    let mut s = SandwichSummary { pairs: pairs.len(), epsilon, max_lower_excess: f64::NEG_INFINITY, max_upper_excess: f64::NEG_INFINITY, holds: true };
    for (p, q) in pairs {
        let data = pair_data(&code.embed(p), &code.embed(q), d.b_total(), d.e);
        s.absorb(&data);
    }
    s.finish()
}

impl SandwichSummary {
    fn absorb(&mut self, d: &PairData) {
        self.max_lower_excess = self.max_lower_excess.max(d.overlap - d.fidelity_b);
        self.max_upper_excess = self.max_upper_excess.max(d.fidelity_b - d.overlap - 4.0 * self.epsilon.sqrt());
    }

    fn finish(mut self) -> Self {
        self.holds = self.max_lower_excess <= 1e-9 && self.max_upper_excess <= 1e-9;
        self
    }
}

struct TargetEval {
    worst: Option<PairWitness>,
    pairs: Vec<(PairKind, CVector, PairData)>,
    haar: usize,
    structured: usize,
    net: usize,
}

fn psi_candidates(
    code: &Code,
    atom: &DecoderAtom,
    haar: usize,
    net: &[CVector],
    rng: &mut Rng,
) -> Vec<(PairKind, CVector)> {
    let s = code.dims().s;
    let phi = &atom.target;
    let mut out = vec![(PairKind::Equal, phi.clone())];
    if s > 1 {
        let perp = complement_frame(phi);
        let mut orthos = Vec::new();
        if let Some(a) = &atom.adversary {
            out.push((PairKind::Adversary, a.clone()));
            orthos.push(a.clone());
        }
        for _ in 0..3 {
            let c = haar_state::<f64, _>(s - 1, rng).expect("positive dim").into_amplitudes();
            let v = &perp * c;
            out.push((PairKind::Orthogonal, v.clone()));
            orthos.push(v);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for o in orthos.iter().take(2) {
            for phase in [Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)] {
                out.push((PairKind::Superposition, (phi + o * phase) * Complex::new(h, 0.0)));
            }
        }
    }
    for _ in 0..haar {
        out.push((PairKind::Haar, haar_state::<f64, _>(s, rng).expect("positive dim").into_amplitudes()));
    }
    out.extend(net.iter().map(|v| (PairKind::Net, v.clone())));
    out
}

fn evaluate_target(code: &Code, index: usize, atom: &DecoderAtom, haar: usize, net: &[CVector], seed: u64) -> TargetEval {
    let d = code.dims();
    let (db, de) = (d.b_total(), d.e);
    let mut rng = stream(seed, index as u64);
    let phi_amb = code.embed(&atom.target);
    let mut eval = TargetEval { worst: None, pairs: Vec::new(), haar: 0, structured: 0, net: 0 };
    for (kind, psi) in psi_candidates(code, atom, haar, net, &mut rng) {
        match kind {
            PairKind::Haar => eval.haar += 1,
            PairKind::Net => eval.net += 1,
            _ => eval.structured += 1,
        }
        let psi_amb = code.embed(&psi);
        let m = reshape(&psi_amb, db, de);
        let acceptance = (m.adjoint() * &atom.effect * &m).trace().re;
        let data = pair_data(&phi_amb, &psi_amb, db, de);
        let error = (acceptance - data.overlap).abs();
        if eval.worst.as_ref().is_none_or(|w| error > w.error) {
            eval.worst = Some(PairWitness {
                target_index: index,
                kind,
                phi: amplitudes(&atom.target),
                psi: amplitudes(&psi),
                overlap: data.overlap,
                acceptance,
                error,
            });
        }
        eval.pairs.push((kind, psi, data));
    }
    eval
}

/// Worst sampled identification error of `decoders` on `code`.
///
/// Each target is paired with itself, its recorded adversary, three random
/// orthogonal states, eight 50/50 superpositions with two of those, and
/// `haar_pairs / targets` Haar states. Two-dimensional codes additionally
/// sweep a trace-distance net of spacing `net_eta`.
pub fn evaluate_code(code: &Code, decoders: &[DecoderAtom], haar_pairs: usize, net_eta: f64, seed: u64) -> Result<CodeEvaluation> {
    let d = code.dims();
    if decoders.is_empty() {
        return Err(Error::InvalidArgument("evaluate_code needs at least one decoder".into()));
    }
    for atom in decoders {
        code.check_coeffs(&atom.target)?;
        if atom.effect.nrows() != d.b_total() {
            return Err(Error::DimensionMismatch(format!("effect of dim {} for |B| = {}", atom.effect.nrows(), d.b_total())));
        }
    }
    let net: Vec<CVector> = if d.s == 2 {
        let mut rng = stream(seed, u64::MAX);
        // The k = 2 lattice has ~16/η² points, far below the generic bound.
        tensor::epsilon_net(2, net_eta, f64::INFINITY, &mut rng)?.into_iter().map(|p| p.into_amplitudes()).collect()
    } else {
        Vec::new()
    };
    let per_target = haar_pairs.div_ceil(decoders.len());
    let evals: Vec<TargetEval> = decoders
        .par_iter()
        .enumerate()
        .map(|(i, atom)| evaluate_target(code, i, atom, per_target, &net, seed))
        .collect();
    let mut witness: Option<PairWitness> = None;
    let (mut haar, mut structured, mut net_pairs) = (0, 0, 0);
    for e in &evals {
        haar += e.haar;
        structured += e.structured;
        net_pairs += e.net;
        if let Some(w) = &e.worst {
            if witness.as_ref().is_none_or(|cur| w.error > cur.error) {
                witness = Some(w.clone());
            }
        }
    }
    let epsilon_hat = witness.as_ref().map_or(0.0, |w| w.error);
    let mut sandwich = SandwichSummary {
        pairs: 0,
        epsilon: epsilon_hat,
        max_lower_excess: f64::NEG_INFINITY,
        max_upper_excess: f64::NEG_INFINITY,
        holds: true,
    };
    let mut env_distance_max = 0.0f64;
    for e in &evals {
        for (_, _, data) in &e.pairs {
            sandwich.pairs += 1;
            sandwich.absorb(data);
            env_distance_max = env_distance_max.max(data.env_distance);
        }
    }
    let env_bound = qid_to_forgetfulness_bound(epsilon_hat);
    Ok(CodeEvaluation {
        dims: d,
        targets: decoders.len(),
        pairs: haar + structured + net_pairs,
        haar_pairs: haar,
        structured_pairs: structured,
        net_pairs,
        epsilon_hat,
        witness,
        env_distance_max,
        env_bound,
        env_holds: env_distance_max <= env_bound + 1e-9,
        sandwich: sandwich.finish(),
        seed,
    })
}

/// Truncation data for the forgetfulness-to-identification direction.
#[derive(Clone, Debug)]
pub struct TruncationBundle {
    /// `0 ≤ X ≤ 1` on the ambient space.
    pub x: CMatrix,
    /// Reference state on the ambient space.
    pub omega: CMatrix,
    /// Largest sampled `1 − tr XφX†`.
    pub epsilon: f64,
    /// Largest sampled `‖Ω̃^E − φ̃^E‖₁`.
    pub delta: f64,
    /// Smallest and largest nonzero eigenvalues of `Ω̃^E`.
    pub mu: f64,
    pub lambda: f64,
    /// Eigenvalues of `Ω̃^E`, nonincreasing.
    pub omega_e_spectrum: Vec<f64>,
    pub samples: usize,
}

impl TruncationBundle {
    /// Measures `ε` and `δ` over the frame vectors and `samples` Haar states
    /// of the code. `x = None` is the identity and `omega = None` the
    /// maximally mixed state on `S`.
    pub fn measure(code: &Code, x: Option<CMatrix>, omega: Option<CMatrix>, samples: usize, seed: u64) -> Result<Self> {
        let d = code.dims();
        let n = code.frame().nrows();
        let (db, de) = (d.b_total(), d.e);
        let x = x.unwrap_or_else(|| tensor::identity(n));
        if x.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("X is {:?}, ambient dim {n}", x.shape())));
        }
        let xv = tensor::eigvalsh(&x);
        let worst = xv.iter().fold(0.0f64, |m, &v| m.max(-v).max(v - 1.0));
        if worst > 1e-9 || tensor::hermitian_deviation(&x) > 1e-9 {
            return Err(Error::InvalidArgument(format!("X must satisfy 0 <= X <= 1 (violation {worst:.3e})")));
        }
        let omega = omega.unwrap_or_else(|| code.subspace().maximally_mixed().into_matrix());
        let sp = split(&code.subspace().ambient_dims().to_vec(), &[code.subspace().ambient_dims().len() - 1])?;
        let omega_e = sp.trace_out(&(&x * &omega * x.adjoint()));
        let spectrum: Vec<f64> = tensor::eigvalsh(&omega_e).into_iter().rev().collect();
        let nonzero: Vec<f64> = spectrum.iter().copied().filter(|&v| v > SPECTRAL_FLOOR).collect();
        let lambda = nonzero.first().copied().unwrap_or(0.0);
        let mu = nonzero.last().copied().unwrap_or(0.0);
        let mut rng = seeded(seed);
        let mut states: Vec<CVector> = (0..d.s).map(|j| code.frame().column(j).into_owned()).collect();
        for _ in 0..samples {
            let c = haar_state::<f64, _>(d.s, &mut rng)?.into_amplitudes();
            states.push(code.embed(&c));
        }
        let (mut epsilon, mut delta) = (0.0f64, 0.0f64);
        for v in &states {
            let w = &x * v;
            epsilon = epsilon.max(1.0 - w.norm_squared());
            delta = delta.max(trace_norm(&(&omega_e - e_marginal(&w, db, de))));
        }
        Ok(Self { x, omega, epsilon, delta, mu, lambda, omega_e_spectrum: spectrum, samples: states.len() })
    }

    pub fn eta(&self) -> f64 {
        technical_eta(self.lambda, self.mu, self.delta, self.epsilon)
    }

    pub fn in_range(&self) -> bool {
        self.delta <= 1.0 / 15.0 && self.epsilon <= 1.0 / 15.0
    }
}

/// Half-width of the eigenvalue window used for the hatted marginals.
pub const TRUNCATION_GAMMA: f64 = 0.5;

/// `B`-marginal of `w` keeping only the Schmidt terms whose weight `p_j`
/// matches the `j`-th largest eigenvalue `o_j` of `Ω̃^E` within
/// `(1−γ)p_j ≤ o_j ≤ (1+γ)p_j`.
pub fn hat_b_marginal(w: &CVector, db: usize, de: usize, omega_e_spectrum: &[f64]) -> CMatrix {
    let svd = reshape(w, db, de).svd(true, false);
    let u = svd.u.expect("requested U");
    let mut out = CMatrix::zeros(db, db);
    // nalgebra returns singular values unsorted only for degenerate input; sort explicitly.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    for (j, &k) in order.iter().enumerate() {
        let p = svd.singular_values[k].powi(2);
        let o = omega_e_spectrum.get(j).copied().unwrap_or(0.0);
        if (1.0 - TRUNCATION_GAMMA) * p <= o && o <= (1.0 + TRUNCATION_GAMMA) * p && p > 0.0 {
            let col = u.column(k);
            out += (&col * col.adjoint()) * Complex::new(p, 0.0);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ForgetfulToQid {
    pub epsilon: f64,
    pub delta: f64,
    pub mu: f64,
    pub lambda: f64,
    pub eta: f64,
    /// Both `δ` and `ε` are at most 1/15; otherwise nothing is asserted.
    pub in_range: bool,
    /// `η ≥ 1`.
    pub vacuous: bool,
    pub slack: f64,
    pub evaluation: CodeEvaluation,
    /// `ε̂ ≤ min(η, 1) + slack`, present only when `in_range`.
    pub holds: Option<bool>,
    #[serde(skip)]
    pub decoders: Vec<DecoderAtom>,
}

/// Decoder for `phi` from fictitious play on the truncated marginals:
/// the target is the normalized hatted `B`-marginal of `Xφ`, the adversary
/// plays hatted marginals of `Xψ`, `ψ ∈ S ∩ φ^⊥`.
pub fn truncated_decoder(code: &Code, bundle: &TruncationBundle, phi: &CVector, iters: usize) -> Result<DecoderAtom> {
    code.check_coeffs(phi)?;
    let d = code.dims();
    let (db, de) = (d.b_total(), d.e);
    if d.s == 1 || iters == 0 {
        return minimax_decoder(code, phi, iters);
    }
    let spectrum = &bundle.omega_e_spectrum;
    let hat = |w: &CVector| hat_b_marginal(w, db, de, spectrum);
    let mut target = hat(&(&bundle.x * code.embed(phi)));
    let tr = target.trace().re;
    if tr <= SPECTRAL_FLOOR {
        // Nothing survives the window; fall back to the untruncated marginal.
        target = code.b_marginal(&(&bundle.x * code.embed(phi)));
    }
    let tr = target.trace().re;
    target /= Complex::new(tr, 0.0);
    let perp = complement_frame(phi);
    let g = &bundle.x * code.frame() * &perp;
    let play = fictitious_play(&target, &g, db, de, &hat, iters);
    // Report the untruncated acceptance data for the returned effect.
    let plain = minimax_certify(code, phi, &play.effect)?;
    Ok(DecoderAtom { game_lower: play.lower, iterations: iters, ..plain })
}

/// Acceptance and exact best adversary of an arbitrary effect.
pub fn minimax_certify(code: &Code, phi: &CVector, effect: &CMatrix) -> Result<DecoderAtom> {
    code.check_coeffs(phi)?;
    let d = code.dims();
    let target = code.b_marginal(&code.embed(phi));
    let acceptance = (&target * effect).trace().re;
    let (false_acceptance, adversary) = if d.s > 1 {
        let perp = complement_frame(phi);
        let g = code.frame() * &perp;
        let lifted = Lifted::new(&g, d.b_total(), d.e);
        let eig = eigh(effect);
        let adv = eigh(&lifted.form(&eig.vectors, Some(&eig.values)));
        (adv.max(), Some(&perp * adv.top_vector()))
    } else {
        (0.0, None)
    };
    Ok(DecoderAtom {
        target: phi.clone(),
        effect: effect.clone(),
        acceptance,
        false_acceptance,
        adversary,
        game_upper: 1.0 - acceptance + false_acceptance,
        game_lower: f64::NEG_INFINITY,
        iterations: 0,
    })
}

/// Synthesizes truncated-game decoders for `targets` and evaluates them.
pub fn forgetful_to_qid(
    code: &Code,
    bundle: &TruncationBundle,
    targets: &[CVector],
    iters: usize,
    haar_pairs: usize,
    slack: f64,
    seed: u64,
) -> Result<ForgetfulToQid> {
    let decoders: Vec<DecoderAtom> =
        targets.par_iter().map(|t| truncated_decoder(code, bundle, t, iters)).collect::<Result<_>>()?;
    let evaluation = evaluate_code(code, &decoders, haar_pairs, 0.05, seed)?;
    let eta = bundle.eta();
    let in_range = bundle.in_range();
    let holds = in_range.then(|| evaluation.epsilon_hat <= eta.min(1.0) + slack);
    Ok(ForgetfulToQid {
        epsilon: bundle.epsilon,
        delta: bundle.delta,
        mu: bundle.mu,
        lambda: bundle.lambda,
        eta,
        in_range,
        vacuous: eta >= 1.0,
        slack,
        evaluation,
        holds,
        decoders,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaPrediction {
    pub epsilon: f64,
    /// `ε + √(d̃_E/d̃_B)`.
    pub eta: f64,
    pub fraction_within: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub dims: CodeDims,
    /// Rank of `tr_B XX†`.
    pub d_tilde_e: usize,
    /// `1 / tr[(tr_E XΩX†)²]`.
    pub d_tilde_b: f64,
    pub samples: usize,
    pub mean: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
    pub predictions: Vec<EtaPrediction>,
    pub seed: u64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Distances `‖tr_B XΩX† − tr_B XφX†‖₁` for Haar `φ ∈ S`.
pub fn concentration_distances(code: &Code, x: Option<&CMatrix>, samples: usize, seed: u64) -> (CMatrix, Vec<f64>) {
    let d = code.dims();
    let (db, de) = (d.b_total(), d.e);
    let apply = |v: CVector| match x {
        Some(x) => x * v,
        None => v,
    };
    let mut omega_e = CMatrix::zeros(de, de);
    for j in 0..d.s {
        omega_e += e_marginal(&apply(code.frame().column(j).into_owned()), db, de);
    }
    omega_e /= Complex::new(d.s as f64, 0.0);
    let mut rng = seeded(seed);
    let dists = (0..samples)
        .map(|_| {
            let c = haar_state::<f64, _>(d.s, &mut rng).expect("positive dim").into_amplitudes();
            trace_norm(&(&omega_e - e_marginal(&apply(code.embed(&c)), db, de)))
        })
        .collect();
    (omega_e, dists)
}

/// Empirical concentration of environment marginals for `Ω` maximally mixed
/// on `S`, against `η(ε) = ε + √(d̃_E/d̃_B)` for each `ε` in `eps_grid`.
pub fn concentration_check(code: &Code, x: Option<&CMatrix>, samples: usize, eps_grid: &[f64], seed: u64) -> Result<ConcentrationReport> {
    let d = code.dims();
    let (db, de) = (d.b_total(), d.e);
    let n = code.frame().nrows();
    if let Some(x) = x {
        if x.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("X is {:?}, ambient dim {n}", x.shape())));
        }
    }
    // tr_B XX† and tr_E XΩX†.
    let (xx, xf) = match x {
        Some(x) => (x * x.adjoint(), x * code.frame()),
        None => (tensor::identity(n), code.frame().clone()),
    };
    let ambient = code.subspace().ambient_dims().to_vec();
    let sp_e = split(&ambient, &[ambient.len() - 1])?;
    let xx_e = sp_e.trace_out(&xx);
    let d_tilde_e = tensor::eigvalsh(&xx_e).iter().filter(|&&v| v > 1e-9).count();
    let mut omega_b = CMatrix::zeros(db, db);
    for j in 0..d.s {
        omega_b += b_marginal(&xf.column(j).into_owned(), db, de);
    }
    omega_b /= Complex::new(d.s as f64, 0.0);
    let purity = (&omega_b * &omega_b).trace().re;
    let d_tilde_b = 1.0 / purity;
    let (_, mut dists) = concentration_distances(code, x, samples, seed);
    let mean = dists.iter().sum::<f64>() / dists.len().max(1) as f64;
    dists.sort_by(f64::total_cmp);
    let base = (d_tilde_e as f64 / d_tilde_b).sqrt();
    let predictions = eps_grid
        .iter()
        .map(|&eps| {
            let eta = eps + base;
            let within = dists.iter().filter(|&&v| v <= eta).count();
            EtaPrediction { epsilon: eps, eta, fraction_within: within as f64 / dists.len().max(1) as f64 }
        })
        .collect();
    Ok(ConcentrationReport {
        dims: d,
        d_tilde_e,
        d_tilde_b,
        samples: dists.len(),
        mean,
        median: quantile(&dists, 0.5),
        q95: quantile(&dists, 0.95),
        max: dists.last().copied().unwrap_or(f64::NAN),
        predictions,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub db: usize,
    pub de: usize,
    pub sizes: Vec<usize>,
    pub draws: usize,
    pub samples_per_draw: usize,
    /// Median over draws of the mean distance, per size.
    pub medians: Vec<f64>,
    pub decreasing: bool,
    pub seed: u64,
}

/// Median over `draws` random codes of the mean `‖Ω^E − φ^E‖₁`, for each
/// code dimension in `sizes` at fixed `(db, de)`; checks the medians
/// decrease strictly.
pub fn concentration_monotonicity(db: usize, de: usize, sizes: &[usize], draws: usize, samples: usize, seed: u64) -> Result<MonotonicityReport> {
    let mut medians = Vec::with_capacity(sizes.len());
    for (si, &s) in sizes.iter().enumerate() {
        let means: Vec<f64> = (0..draws)
            .into_par_iter()
            .map(|k| {
                let idx = (si * draws + k) as u64;
                let code = random_code(db, de, s, &mut stream(seed, 2 * idx))?;
                let (_, dists) = concentration_distances(&code, None, samples, crate::rng::child_seed(&mut stream(seed, 2 * idx + 1)));
                Ok(dists.iter().sum::<f64>() / samples.max(1) as f64)
            })
            .collect::<Result<_>>()?;
        let mut sorted = means;
        sorted.sort_by(f64::total_cmp);
        medians.push(quantile(&sorted, 0.5));
    }
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    Ok(MonotonicityReport { db, de, sizes: sizes.to_vec(), draws, samples_per_draw: samples, medians, decreasing, seed })
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    /// Reason the hypotheses could not be verified; no assertion then.
    pub skipped: Option<String>,
    pub epsilon: f64,
    pub mu: f64,
    pub lambda: f64,
    pub rank: usize,
    pub fidelity: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Support projector and extreme nonzero eigenvalues of a state.
fn window(rho: &CMatrix) -> (usize, f64, f64) {
    let vals = tensor::eigvalsh(rho);
    let nz: Vec<f64> = vals.into_iter().filter(|&v| v > 1e-10).collect();
    let lo = nz.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nz.iter().copied().fold(0.0, f64::max);
    (nz.len(), lo, hi)
}

fn is_state(rho: &CMatrix) -> bool {
    rho.is_square()
        && tensor::hermitian_deviation(rho) <= 1e-9
        && (rho.trace().re - 1.0).abs() <= 1e-9
        && tensor::eigvalsh(rho).iter().all(|&v| v >= -1e-9)
}

/// `F(ρ, Σ p_i σ_i) ≤ ε λ²/μ²` with `ε = max_i F(ρ, σ_i)`, where `P`, `Q_i`
/// are the supports and `μ`, `λ` the extreme nonzero eigenvalues over all
/// inputs.
pub fn mixing_fidelity_bound(rho: &CMatrix, sigmas: &[CMatrix], weights: &[f64]) -> Result<MixingReport> {
    let skip = |why: &str| MixingReport {
        skipped: Some(why.to_string()),
        epsilon: f64::NAN,
        mu: f64::NAN,
        lambda: f64::NAN,
        rank: 0,
        fidelity: f64::NAN,
        bound: f64::NAN,
        holds: true,
    };
    if sigmas.is_empty() || sigmas.len() != weights.len() {
        return Err(Error::InvalidArgument("need one weight per state".into()));
    }
    if sigmas.iter().any(|s| s.shape() != rho.shape()) {
        return Err(Error::DimensionMismatch("mixing inputs differ in dimension".into()));
    }
    if !is_state(rho) || !sigmas.iter().all(is_state) {
        return Ok(skip("inputs are not density matrices"));
    }
    if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Ok(skip("weights are not a probability vector"));
    }
    let mut rank = 0;
    let (mut mu, mut lambda) = (f64::INFINITY, 0.0f64);
    for m in std::iter::once(rho).chain(sigmas) {
        let (r, lo, hi) = window(m);
        rank = rank.max(r);
        mu = mu.min(lo);
        lambda = lambda.max(hi);
    }
    if mu * rank as f64 > 1.0 + 1e-9 {
        return Ok(skip("mu * r exceeds 1"));
    }
    let mut epsilon = 0.0f64;
    let mut mix = CMatrix::zeros(rho.nrows(), rho.ncols());
    for (s, &w) in sigmas.iter().zip(weights) {
        epsilon = epsilon.max(crate::metrics::fidelity(rho, s)?);
        mix += s * Complex::new(w, 0.0);
    }
    let fidelity = crate::metrics::fidelity(rho, &mix)?;
    let bound = epsilon * (lambda / mu).powi(2);
    Ok(MixingReport { skipped: None, epsilon, mu, lambda, rank, fidelity, bound, holds: fidelity <= bound + 1e-9 })
}

#[derive(Clone, Debug, Serialize)]
pub struct GentleReport {
    pub skipped: Option<String>,
    /// `1 − tr ρX`.
    pub epsilon: f64,
    /// `‖ρ − √Xρ√X‖₁`.
    pub distance: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn gentle_check(rho: &CMatrix, x: &CMatrix) -> Result<GentleReport> {
    if rho.shape() != x.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", rho.shape(), x.shape())));
    }
    let eig = eigh(x);
    let bad = eig.values.iter().any(|&v| !(-1e-9..=1.0 + 1e-9).contains(&v)) || tensor::hermitian_deviation(x) > 1e-9;
    if bad || !is_state(rho) {
        return Ok(GentleReport { skipped: Some("hypotheses 0 <= X <= 1 or state rho fail".into()), epsilon: f64::NAN, distance: f64::NAN, bound: f64::NAN, holds: true });
    }
    let sx = eig.map(|v| v.clamp(0.0, 1.0).sqrt());
    let epsilon = (1.0 - (rho * x).trace().re).max(0.0);
    let distance = trace_norm(&(rho - &sx * rho * &sx));
    let bound = 2.0 * epsilon.sqrt();
    Ok(GentleReport { skipped: None, epsilon, distance, bound, holds: distance <= bound + 1e-9 })
}

#[derive(Clone, Debug, Serialize)]
pub struct LittleEig {
    /// Zero-based indices `i` with `p_i ≤ D/r`.
    pub chi: Vec<usize>,
    pub threshold: f64,
    pub mass: f64,
    pub holds: bool,
}

/// Small-eigenvalue discard for a nonincreasing probability vector.
pub fn little_eig(p: &[f64], d: f64) -> Result<LittleEig> {
    if p.is_empty() || p.iter().any(|&x| x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("p must be a probability vector".into()));
    }
    if p.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("p must be nonincreasing".into()));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::InvalidArgument(format!("D = {d} outside [0, 1]")));
    }
    let threshold = d / p.len() as f64;
    let chi: Vec<usize> = (0..p.len()).filter(|&i| p[i] <= threshold).collect();
    let mass = chi.iter().map(|&i| p[i]).sum();
    Ok(LittleEig { chi, threshold, mass, holds: mass <= d + 1e-12 })
}
