//! Type and typical projectors on `n` copies of a tripartite pure state and
//! the six typicality properties used by the direct coding argument.
//!
//! Sequences are taken in the eigenbases of the single-copy marginals, so
//! the type projector on `A^n` and the weakly typical projectors on `B^n`
//! and `E^n` are diagonal masks. Only the eigenvalue floor `Π₂^E` is dense.
//! The state `|ρ⟩^{⊗n}` is never formed densely: its nonzero amplitudes are
//! enumerated inside the chosen type class.

use std::collections::BTreeMap;

use nalgebra::Complex;
use serde::Serialize;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::scalar::{CMatrix, CVector};
use crate::tensor::{self, eigh, ComplexOperator, PureState};

/// Largest dense dimension (`d^n`) handled by the dense projector builders
/// and by `E^n` inside a bundle.
pub const DENSE_CAP: usize = 1 << 12;

/// Largest number of `n`-copy amplitudes enumerated inside a type class.
pub const SEQUENCE_CAP: usize = 1 << 22;

/// Eigenvalues and amplitudes below this are treated as zero.
const SUPPORT_FLOOR: f64 = 1e-14;

/// Property 1 is an identity; this is its tolerance.
pub const EXACT_TOL: f64 = 1e-10;

fn cz() -> Complex<f64> {
    Complex::new(0.0, 0.0)
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// All length-`d` vectors of nonnegative integers summing to `n`, in
/// lexicographically decreasing order.
pub fn compositions(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(n, d, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// Number of sequences with the given symbol counts.
pub fn multinomial(counts: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut out = 1.0f64;
    for &k in counts {
        for j in 1..=k {
            total += 1;
            out = out * total as f64 / j as f64;
        }
    }
    out.round()
}

/// `log₂` of the probability of one sequence with the given counts.
fn sequence_log_prob(p: &[f64], counts: &[usize]) -> f64 {
    counts.iter().zip(p).map(|(&k, &q)| if k == 0 { 0.0 } else { k as f64 * q.log2() }).sum()
}

fn weakly_typical(log_prob: f64, n: usize, entropy: f64, delta: f64) -> bool {
    log_prob.is_finite() && (-log_prob / n as f64 - entropy).abs() <= delta
}

/// Rank of the weakly typical projector for spectrum `p`: the number of
/// sequences whose empirical entropy is within `delta` of `H(p)`.
pub fn typical_rank(p: &[f64], n: usize, delta: f64) -> f64 {
    let h = shannon(p);
    compositions(n, p.len())
        .iter()
        .filter(|k| weakly_typical(sequence_log_prob(p, k), n, h, delta))
        .map(|k| multinomial(k))
        .sum()
}

/// How the type class on `A^n` is chosen. Counts refer to the eigenvalues
/// of the `A` marginal in decreasing order.
#[derive(Clone, Debug, PartialEq)]
pub enum TypeSelection {
    /// The type minimizing `Σ |t_i − n p_i|`, ties to the more probable class.
    Closest,
    /// The most probable type class whose size meets the rank bounds
    /// `2^{n(H ± δ)}`; falls back to [`TypeSelection::Closest`].
    MostProbableFeasible,
    Explicit(Vec<usize>),
}

/// Resolves a type for spectrum `p` (decreasing) at block length `n`.
pub fn select_type(p: &[f64], n: usize, delta: f64, selection: &TypeSelection) -> Result<Vec<usize>> {
    let class_log_prob = |k: &[usize]| multinomial(k).log2() + sequence_log_prob(p, k);
    let admissible = |k: &[usize]| k.iter().zip(p).all(|(&c, &q)| c == 0 || q > SUPPORT_FLOOR);
    let closest = || {
        let mut best: Option<(f64, f64, Vec<usize>)> = None;
        for k in compositions(n, p.len()).into_iter().filter(|k| admissible(k)) {
            let dist: f64 = k.iter().zip(p).map(|(&c, &q)| (c as f64 - n as f64 * q).abs()).sum();
            let lp = class_log_prob(&k);
            let better = match &best {
                None => true,
                Some((d, l, _)) => dist < d - 1e-12 || ((dist - d).abs() <= 1e-12 && lp > *l),
            };
            if better {
                best = Some((dist, lp, k));
            }
        }
        best.map(|b| b.2).ok_or_else(|| Error::InvalidArgument("spectrum has no support".into()))
    };
    match selection {
        TypeSelection::Explicit(k) => {
            if k.len() != p.len() || k.iter().sum::<usize>() != n {
                return Err(Error::InvalidArgument(format!(
                    "type {k:?} must have {} entries summing to n = {n}",
                    p.len()
                )));
            }
            Ok(k.clone())
        }
        TypeSelection::Closest => closest(),
        TypeSelection::MostProbableFeasible => {
            let h = shannon(p);
            let mut best: Option<(f64, Vec<usize>)> = None;
            for k in compositions(n, p.len()).into_iter().filter(|k| admissible(k)) {
                if (multinomial(&k).log2() / n as f64 - h).abs() > delta {
                    continue;
                }
                let lp = class_log_prob(&k);
                if best.as_ref().is_none_or(|b| lp > b.0 + 1e-12) {
                    best = Some((lp, k));
                }
            }
            match best {
                Some(b) => Ok(b.1),
                None => closest(),
            }
        }
    }
}

/// Spectral data of a single-copy marginal, eigenvalues decreasing.
struct Marginal {
    values: Vec<f64>,
    vectors: CMatrix,
}

fn marginal_basis(rho: &CMatrix) -> Result<Marginal> {
    let eig = eigh(rho);
    tensor::check_spectrum_psd(&eig.values)?;
    let d = eig.values.len();
    let values = (0..d).rev().map(|j| eig.values[j].max(0.0)).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.vectors[(r, d - 1 - c)]);
    Ok(Marginal { values, vectors })
}

fn check_dense(d: usize, n: usize) -> Result<usize> {
    let mut total = 1usize;
    for _ in 0..n {
        total = total.saturating_mul(d);
        if total > DENSE_CAP {
            return Err(Error::CapExceeded { what: "dense n-copy dimension".into(), needed: (d as f64).powi(n as i32), cap: DENSE_CAP as f64 });
        }
    }
    Ok(total)
}

/// `Σ_{seq ∈ keep} ⊗_k |v_{seq_k}⟩⟨v_{seq_k}|` for eigenvectors `v`.
fn sequence_projector(m: &Marginal, n: usize, keep: impl Fn(&[usize]) -> bool) -> Result<(CMatrix, usize)> {
    let d = m.values.len();
    let dim = check_dense(d, n)?;
    let mut proj = CMatrix::zeros(dim, dim);
    let mut rank = 0;
    let mut counts = vec![0usize; d];
    let mut digits = vec![0usize; n];
    for idx in 0..dim {
        let mut r = idx;
        counts.iter_mut().for_each(|c| *c = 0);
        for k in (0..n).rev() {
            digits[k] = r % d;
            r /= d;
            counts[digits[k]] += 1;
        }
        if !keep(&counts) {
            continue;
        }
        let mut v = CVector::from_element(1, Complex::new(1.0, 0.0));
        for &s in &digits {
            v = v.kronecker(&m.vectors.column(s).into_owned());
        }
        proj += &v * v.adjoint();
        rank += 1;
    }
    Ok((proj, rank))
}

#[derive(Clone, Debug)]
pub struct DenseProjector {
    pub matrix: CMatrix,
    pub rank: usize,
    /// Type counts for type projectors.
    pub counts: Option<Vec<usize>>,
}

/// Projector onto the type class `counts` of `rho`'s eigenbasis on `n` copies.
pub fn type_projector(rho: &ComplexOperator, n: usize, selection: &TypeSelection) -> Result<DenseProjector> {
    rho.check_hermitian()?;
    let m = marginal_basis(rho.matrix())?;
    let counts = select_type(&m.values, n, 0.0, selection)?;
    let (matrix, rank) = sequence_projector(&m, n, |k| k == counts.as_slice())?;
    Ok(DenseProjector { matrix, rank, counts: Some(counts) })
}

/// Weakly typical projector: eigen-sequences with `|−log₂ p(x^n)/n − H| ≤ δ`.
pub fn typical_projector(rho: &ComplexOperator, n: usize, delta: f64) -> Result<DenseProjector> {
    rho.check_hermitian()?;
    let m = marginal_basis(rho.matrix())?;
    let h = shannon(&m.values);
    let (matrix, rank) = sequence_projector(&m, n, |k| weakly_typical(sequence_log_prob(&m.values, k), n, h, delta))?;
    Ok(DenseProjector { matrix, rank, counts: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenFloor {
    pub threshold: f64,
    pub rank: usize,
    /// Total weight of the eigenvalues at or below the threshold.
    pub discarded_mass: f64,
    /// Largest over smallest kept eigenvalue; `None` when nothing is kept.
    pub ratio: Option<f64>,
    #[serde(skip)]
    pub projector: CMatrix,
    /// Kept eigenvectors as columns.
    #[serde(skip)]
    pub kept: CMatrix,
    #[serde(skip)]
    pub kept_values: Vec<f64>,
}

/// Projector onto the eigenspaces of `xi` with eigenvalue above `threshold`.
pub fn eigen_floor_projector(xi: &CMatrix, threshold: f64) -> Result<EigenFloor> {
    let eig = eigh(xi);
    tensor::check_spectrum_psd(&eig.values)?;
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&j| eig.values[j] > threshold && eig.values[j] > SUPPORT_FLOOR).collect();
    let kept = CMatrix::from_fn(xi.nrows(), keep.len(), |r, c| eig.vectors[(r, keep[c])]);
    let kept_values: Vec<f64> = keep.iter().map(|&j| eig.values[j]).collect();
    let discarded_mass = eig.values.iter().filter(|&&v| v <= threshold).map(|&v| v.max(0.0)).sum();
    let ratio = match (kept_values.first(), kept_values.last()) {
        (Some(&lo), Some(&hi)) => Some(hi / lo),
        _ => None,
    };
    Ok(EigenFloor { threshold, rank: keep.len(), discarded_mass, ratio, projector: &kept * kept.adjoint(), kept, kept_values })
}

/// `|ρ⟩^{ABE} = Σ_j √λ_j |j⟩^A ⊗ V|v_j⟩` for `input = Σ λ_j |v_j⟩⟨v_j|`
/// and `V` the Stinespring isometry of the minimal dilation of `ch`.
pub fn tripartite_state(ch: &Channel, input: &ComplexOperator) -> Result<PureState> {
    if input.dim() != ch.in_dim() {
        return Err(Error::DimensionMismatch(format!("input of dim {} for channel on {}", input.dim(), ch.in_dim())));
    }
    input.check_density()?;
    let ch = ch.minimal();
    let (da, db, de) = (ch.in_dim(), ch.out_dim(), ch.env_dim());
    let eig = input.eigh();
    let image = ch.stinespring() * &eig.vectors;
    let mut amps = CVector::zeros(da * db * de);
    for j in 0..da {
        let w = eig.values[j].max(0.0).sqrt();
        for r in 0..db * de {
            amps[j * db * de + r] = image[(r, j)] * w;
        }
    }
    PureState::from_unnormalized(vec![da, db, de], amps)
}

/// One `n`-copy amplitude in the product eigenbasis.
struct Leaf {
    a: u64,
    b: u64,
    e: usize,
    amp: Complex<f64>,
    log_pb: f64,
    log_pe: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub n_threshold_note: String,
}

/// Options of a typicality run beyond `(n, δ, ε)`.
#[derive(Clone, Debug)]
pub struct TypicalityOptions {
    /// The constant `c` in properties 3 and 5.
    pub c: f64,
    pub selection: TypeSelection,
    /// Properties other than 1 are asserted only for `n` at least this.
    pub assert_from_n: usize,
}

impl Default for TypicalityOptions {
    fn default() -> Self {
        Self { c: 1.0, selection: TypeSelection::MostProbableFeasible, assert_from_n: 2 }
    }
}

/// Projectors and truncated states for one `(n, δ)`.
#[derive(Clone, Debug)]
pub struct TypicalityBundle {
    pub n: usize,
    pub delta: f64,
    /// Marginal spectra on the supports, decreasing.
    pub spectra: [Vec<f64>; 3],
    pub entropies: [f64; 3],
    pub type_counts: Vec<usize>,
    pub type_rank: f64,
    pub typical_rank_b: f64,
    pub typical_rank_e1: f64,
    /// `⟨ψ|Π_t^A|ψ⟩`.
    pub type_weight: f64,
    /// `ξ^{E^n}` on the `E^n` support, normalized by the type weight.
    pub xi_e: CMatrix,
    pub floor: EigenFloor,
    /// Number of nonzero eigenvalues of `ξ^{E^n}`.
    pub xi_rank: usize,
    /// `A`-marginal entries of `ψ_t` keyed by sequence pairs.
    psi_t_a: BTreeMap<(u64, u64), Complex<f64>>,
    /// Rows of `ψ̃_t` keyed by `(a, b)`, in the kept eigenbasis of `Π₂^E`.
    tilde_rows: BTreeMap<(u64, u64), CVector>,
    /// `⟨ψ_t|ψ̃_t⟩`.
    overlap: Complex<f64>,
}

fn encode_len(d: usize, n: usize) -> Result<()> {
    if (n as f64) * (d.max(2) as f64).log2() >= 63.0 {
        return Err(Error::CapExceeded { what: "sequence index bits".into(), needed: n as f64 * (d as f64).log2(), cap: 63.0 });
    }
    Ok(())
}

impl TypicalityBundle {
    pub fn build(state: &PureState, n: usize, delta: f64, selection: &TypeSelection) -> Result<Self> {
        let dims = state.dims();
        if dims.len() != 3 {
            return Err(Error::DimensionMismatch(format!("expected an ABE state, got dims {dims:?}")));
        }
        if n == 0 || !(delta > 0.0) {
            return Err(Error::InvalidArgument("typicality needs n >= 1 and delta > 0".into()));
        }
        let (da, db, de) = (dims[0], dims[1], dims[2]);
        let marg = |keep: usize| -> Result<Marginal> { marginal_basis(state.marginal(&[keep])?.matrix()) };
        let (ma, mb, me) = (marg(0)?, marg(1)?, marg(2)?);
        // Restrict each system to its support.
        let support = |m: &Marginal| m.values.iter().take_while(|&&v| v > SUPPORT_FLOOR).count().max(1);
        let (sa, sb, se) = (support(&ma), support(&mb), support(&me));
        for (d, label) in [(sa, "A"), (sb, "B")] {
            encode_len(d, n).map_err(|e| match e {
                Error::CapExceeded { needed, cap, .. } => Error::CapExceeded { what: format!("{label}^n sequence index bits"), needed, cap },
                other => other,
            })?;
        }
        let e_dim = check_dense(se, n)?;
        let spectra = [ma.values[..sa].to_vec(), mb.values[..sb].to_vec(), me.values[..se].to_vec()];
        let entropies = [shannon(&spectra[0]), shannon(&spectra[1]), shannon(&spectra[2])];
        // Single-copy amplitudes in the product eigenbasis.
        let amp = state.amplitudes();
        let mut single = Vec::new();
        for a in 0..sa {
            for b in 0..sb {
                for e in 0..se {
                    let mut z = cz();
                    for x in 0..da {
                        let ua = ma.vectors[(x, a)].conj();
                        for y in 0..db {
                            let ub = ua * mb.vectors[(y, b)].conj();
                            for w in 0..de {
                                z += ub * me.vectors[(w, e)].conj() * amp[(x * db + y) * de + w];
                            }
                        }
                    }
                    if z.norm() > SUPPORT_FLOOR {
                        single.push((a, b, e, z));
                    }
                }
            }
        }
        let type_counts = select_type(&spectra[0], n, delta, selection)?;
        let type_rank = multinomial(&type_counts);
        let log_pb: Vec<f64> = spectra[1].iter().map(|p| p.log2()).collect();
        let log_pe: Vec<f64> = spectra[2].iter().map(|p| p.log2()).collect();

        let mut leaves = Vec::new();
        let mut counts = vec![0usize; sa];
        #[allow(clippy::too_many_arguments)]
        fn dfs(
            pos: usize,
            n: usize,
            single: &[(usize, usize, usize, Complex<f64>)],
            target: &[usize],
            counts: &mut [usize],
            dims: (u64, u64, usize),
            logs: (&[f64], &[f64]),
            cur: Leaf,
            out: &mut Vec<Leaf>,
        ) -> Result<()> {
            if pos == n {
                if out.len() >= SEQUENCE_CAP {
                    return Err(Error::CapExceeded { what: "n-copy amplitudes in the type class".into(), needed: (out.len() + 1) as f64, cap: SEQUENCE_CAP as f64 });
                }
                out.push(cur);
                return Ok(());
            }
            for &(a, b, e, z) in single {
                if counts[a] == target[a] {
                    continue;
                }
                counts[a] += 1;
                let next = Leaf {
                    a: cur.a * dims.0 + a as u64,
                    b: cur.b * dims.1 + b as u64,
                    e: cur.e * dims.2 + e,
                    amp: cur.amp * z,
                    log_pb: cur.log_pb + logs.0[b],
                    log_pe: cur.log_pe + logs.1[e],
                };
                let r = dfs(pos + 1, n, single, target, counts, dims, logs, next, out);
                counts[a] -= 1;
                r?;
            }
            Ok(())
        }
        let root = Leaf { a: 0, b: 0, e: 0, amp: Complex::new(1.0, 0.0), log_pb: 0.0, log_pe: 0.0 };
        dfs(0, n, &single, &type_counts, &mut counts, (sa as u64, sb as u64, se), (&log_pb, &log_pe), root, &mut leaves)?;

        let type_weight: f64 = leaves.iter().map(|l| l.amp.norm_sqr()).sum();
        if type_weight <= 0.0 {
            return Err(Error::InvalidArgument(format!("type {type_counts:?} has zero weight")));
        }
        let scale = 1.0 / type_weight.sqrt();

        // A-marginal of ψ_t: group amplitudes by the (b, e) sequence.
        let mut by_be: BTreeMap<(u64, usize), Vec<(u64, Complex<f64>)>> = BTreeMap::new();
        for l in &leaves {
            by_be.entry((l.b, l.e)).or_default().push((l.a, l.amp * scale));
        }
        let mut psi_t_a: BTreeMap<(u64, u64), Complex<f64>> = BTreeMap::new();
        for group in by_be.values() {
            for &(a, x) in group {
                for &(a2, y) in group {
                    *psi_t_a.entry((a, a2)).or_insert(cz()) += x * y.conj();
                }
            }
        }

        // Rows of ψ_t restricted to typical B, split into the full row and
        // its typical-E part (the latter is ξ).
        let (hb, he) = (entropies[1], entropies[2]);
        let mut rows: BTreeMap<(u64, u64), (CVector, CVector)> = BTreeMap::new();
        for l in &leaves {
            if !weakly_typical(l.log_pb, n, hb, delta) {
                continue;
            }
            let row = rows.entry((l.a, l.b)).or_insert_with(|| (CVector::zeros(e_dim), CVector::zeros(e_dim)));
            row.0[l.e] += l.amp * scale;
            if weakly_typical(l.log_pe, n, he, delta) {
                row.1[l.e] += l.amp * scale;
            }
        }
        if rows.len().saturating_mul(e_dim) > SEQUENCE_CAP {
            return Err(Error::CapExceeded { what: "typical rows times E^n dimension".into(), needed: (rows.len() * e_dim) as f64, cap: SEQUENCE_CAP as f64 });
        }
        let mut xi_e = CMatrix::zeros(e_dim, e_dim);
        for (_, w) in rows.values() {
            xi_e += w * w.adjoint();
        }
        let xi_rank = tensor::eigvalsh(&xi_e).iter().filter(|&&v| v > SUPPORT_FLOOR).count();
        let threshold = if xi_rank == 0 { 0.0 } else { 2f64.powf(-2.0 * n as f64 * delta) / xi_rank as f64 };
        let floor = eigen_floor_projector(&xi_e, threshold)?;
        let kept_adj = floor.kept.adjoint();
        let mut overlap = cz();
        let mut tilde_rows = BTreeMap::new();
        for (key, (u, w)) in rows {
            let c = &kept_adj * &w;
            overlap += (&kept_adj * &u).dotc(&c);
            tilde_rows.insert(key, c);
        }
        let typical_rank_b = typical_rank(&spectra[1], n, delta);
        let typical_rank_e1 = typical_rank(&spectra[2], n, delta);
        Ok(Self {
            n,
            delta,
            spectra,
            entropies,
            type_counts,
            type_rank,
            typical_rank_b,
            typical_rank_e1,
            type_weight,
            xi_e,
            floor,
            xi_rank,
            psi_t_a,
            tilde_rows,
            overlap,
        })
    }

    /// Largest entrywise deviation of `ψ_t^{A^n}` from `Π_t / rank Π_t`.
    pub fn type_marginal_deviation(&self) -> f64 {
        let target = 1.0 / self.type_rank;
        let mut dev: f64 = 0.0;
        let mut diagonal = 0usize;
        for (&(a, a2), &z) in &self.psi_t_a {
            let want = if a == a2 {
                diagonal += 1;
                target
            } else {
                0.0
            };
            dev = dev.max((z - Complex::new(want, 0.0)).norm());
        }
        if (diagonal as f64) < self.type_rank {
            dev = dev.max(target);
        }
        dev
    }

    /// `tr ψ̃_t = ‖ψ̃_t‖²`.
    pub fn tilde_norm_sqr(&self) -> f64 {
        self.tilde_rows.values().map(|c| c.norm_squared()).sum()
    }

    /// `‖ψ_t − ψ̃_t‖₁` for the unit vector `ψ_t` and subnormalized `ψ̃_t`.
    pub fn truncation_distance(&self) -> f64 {
        let s = 1.0 + self.tilde_norm_sqr();
        (s * s - 4.0 * self.overlap.norm_sqr()).max(0.0).sqrt()
    }

    fn purity_grouped(&self, by_a: bool) -> f64 {
        let mut groups: BTreeMap<u64, Vec<(u64, &CVector)>> = BTreeMap::new();
        for (&(a, b), c) in &self.tilde_rows {
            let (g, k) = if by_a { (b, a) } else { (a, b) };
            groups.entry(g).or_default().push((k, c));
        }
        let mut m: BTreeMap<(u64, u64), Complex<f64>> = BTreeMap::new();
        for g in groups.values() {
            for &(k, x) in g {
                for &(k2, y) in g {
                    *m.entry((k, k2)).or_insert(cz()) += y.dotc(x);
                }
            }
        }
        m.values().map(|z| z.norm_sqr()).sum()
    }

    /// `tr[(ψ̃_t^X)²]` for `X = A^n, B^n, E^n`.
    pub fn purities(&self) -> [f64; 3] {
        let e = self.floor.kept_values.iter().map(|v| v * v).sum();
        [self.purity_grouped(true), self.purity_grouped(false), e]
    }

    /// Eigenvalues of `ψ̃_t^{E^n}`: those of `ξ^{E^n}` kept by the floor.
    pub fn tilde_e_spectrum(&self) -> &[f64] {
        &self.floor.kept_values
    }

    /// `rank Π₂^E Π₁^E`. The floor lives inside the support of `ξ^{E^n}`,
    /// which `Π₁^E` fixes, so this is the floor's rank.
    pub fn rank_e(&self) -> usize {
        self.floor.rank
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TypicalityReport {
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub c: f64,
    pub dims: [usize; 3],
    pub spectra: [Vec<f64>; 3],
    pub entropies: [f64; 3],
    pub type_counts: Vec<usize>,
    pub type_rank: f64,
    pub rank_b: f64,
    pub rank_e1: f64,
    pub rank_e: usize,
    pub type_weight: f64,
    pub tilde_trace: f64,
    pub floor: EigenFloor,
    pub properties: Vec<PropertyCheck>,
    /// Whether this `n` is at or past the assertion threshold.
    pub asserted: bool,
    pub all_pass: bool,
}

impl TypicalityReport {
    /// Passes when every property passes or when `n` is below the threshold,
    /// except property 1, which must hold for every `n`.
    pub fn ok(&self) -> bool {
        if self.asserted {
            self.all_pass
        } else {
            self.properties.iter().filter(|p| p.name == "1").all(|p| p.pass)
        }
    }
}

pub fn typicality_report(state: &PureState, n: usize, delta: f64, epsilon: f64, opts: &TypicalityOptions) -> Result<TypicalityReport> {
    if !(0.0..1.0 / 3.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} outside (0, 1/3)")));
    }
    let bundle = TypicalityBundle::build(state, n, delta, &opts.selection)?;
    let nf = n as f64;
    let c = opts.c;
    let asymptotic = format!("holds for sufficiently large n; asserted for n >= {}", opts.assert_from_n);
    let mut props = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64, note: &str| {
        props.push(PropertyCheck { name: name.into(), lhs, rhs, pass: lhs <= rhs, n_threshold_note: note.into() });
    };
    push("1", bundle.type_marginal_deviation(), EXACT_TOL, "exact for every n: max entrywise deviation from the normalized type projector");
    push("2", bundle.truncation_distance(), epsilon, &asymptotic);
    let scale = 1.0 / (1.0 - 3.0 * epsilon);
    let purities = bundle.purities();
    for (k, label) in ["A", "B", "E"].iter().enumerate() {
        let rhs = 3.0 * scale * 2f64.powf(-nf * (bundle.entropies[k] - c * delta));
        push(&format!("3.{label}"), purities[k], rhs, &asymptotic);
    }
    let ranks = [bundle.type_rank, bundle.typical_rank_b, bundle.rank_e() as f64];
    for (k, label) in ["A", "B", "E"].iter().enumerate() {
        let lhs = if ranks[k] > 0.0 { (ranks[k].log2() / nf - bundle.entropies[k]).abs() } else { f64::INFINITY };
        push(&format!("4.{label}"), lhs, delta, &format!("|log2(rank)/n - H| against delta; {asymptotic}"));
    }
    let spectrum = bundle.tilde_e_spectrum();
    let trivial_e = bundle.spectra[2].len() == 1;
    let e_note = if trivial_e { format!("E is trivial so the bound is vacuous; {asymptotic}") } else { asymptotic.clone() };
    let max_eig = spectrum.last().copied().unwrap_or(f64::INFINITY);
    push("5", max_eig, scale * 2f64.powf(-nf * (bundle.entropies[2] - c * delta)), &e_note);
    let ratio = bundle.floor.ratio.unwrap_or(f64::INFINITY);
    push("6", ratio, 2f64.powf(2.0 * nf * delta), &e_note);
    // What the floor guarantees for every n: the smallest kept eigenvalue
    // exceeds 2^{-2nδ}/rank ξ^E, so the ratio is at most λmax·rank·2^{2nδ}.
    let xi_rank = bundle.xi_rank as f64;
    push("6.floor", ratio, max_eig * xi_rank * 2f64.powf(2.0 * nf * delta) * (1.0 + 1e-12), "guaranteed by the floor construction for every n");
    push(
        "floor.mass",
        bundle.floor.discarded_mass,
        2f64.powf(-2.0 * nf * delta) + 1e-12,
        "mass below the floor is at most rank times the threshold",
    );
    push("floor.algebra", scale * 2f64.powf(-2.0 * nf * delta), 2f64.powf(-nf * delta), &asymptotic);
    let all_pass = props.iter().all(|p| p.pass);
    let dims = state.dims();
    Ok(TypicalityReport {
        n,
        delta,
        epsilon,
        c,
        dims: [dims[0], dims[1], dims[2]],
        spectra: bundle.spectra.clone(),
        entropies: bundle.entropies,
        type_counts: bundle.type_counts.clone(),
        type_rank: bundle.type_rank,
        rank_b: bundle.typical_rank_b,
        rank_e1: bundle.typical_rank_e1,
        rank_e: bundle.rank_e(),
        type_weight: bundle.type_weight,
        tilde_trace: bundle.tilde_norm_sqr(),
        floor: bundle.floor,
        properties: props,
        asserted: n >= opts.assert_from_n,
        all_pass,
    })
}

/// Smallest `n` of a scan from which a property passes at every larger
/// scanned `n`.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyThreshold {
    pub name: String,
    pub from_n: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypicalityScan {
    pub reports: Vec<TypicalityReport>,
    pub thresholds: Vec<PropertyThreshold>,
}

pub fn typicality_scan(state: &PureState, ns: &[usize], delta: f64, epsilon: f64, opts: &TypicalityOptions) -> Result<TypicalityScan> {
    let reports = ns.iter().map(|&n| typicality_report(state, n, delta, epsilon, opts)).collect::<Result<Vec<_>>>()?;
    let names: Vec<String> = reports.first().map(|r| r.properties.iter().map(|p| p.name.clone()).collect()).unwrap_or_default();
    let thresholds = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let mut from_n = None;
            for r in reports.iter().rev() {
                if r.properties[k].pass {
                    from_n = Some(r.n);
                } else {
                    break;
                }
            }
            PropertyThreshold { name: name.clone(), from_n }
        })
        .collect();
    Ok(TypicalityScan { reports, thresholds })
}
