//! Quantum channels in Kraus, Stinespring and Choi form.
//!
//! Conventions:
//! - Stinespring isometry `V: A → B⊗E`, `V|a⟩ = Σ_k K_k|a⟩ ⊗ |k⟩`, so the
//!   environment is indexed by Kraus operators.
//! - Choi matrix `J = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)` on `A ⊗ B`, unnormalized, so
//!   `tr_B J = 1_A` for trace-preserving maps.

pub mod spec;

use nalgebra::{Complex, ComplexField};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, CVector, Real};
use crate::tensor::{self, ComplexOperator};

/// Kraus completeness is rejected beyond this deviation.
pub const TP_REJECT_TOL: f64 = 1e-6;

/// Default cap on `in_dim * out_dim * env_dim` for tensor powers.
pub const DEFAULT_POWER_CAP: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct Channel<T: Real = f64> {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix<T>>,
    stinespring: CMatrix<T>,
    choi: CMatrix<T>,
}

impl<T: Real> Channel<T> {
    pub fn from_kraus(kraus: Vec<CMatrix<T>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?;
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::DimensionMismatch("empty Kraus operator".into()));
        }
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::DimensionMismatch("Kraus operators of differing shapes".into()));
        }
        let mut sum = CMatrix::<T>::zeros(in_dim, in_dim);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = (sum - tensor::identity::<T>(in_dim))
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.modulus()));
        if dev.as_f64() > TP_REJECT_TOL {
            return Err(Error::NotTracePreserving { deviation: dev.as_f64() });
        }
        let env_dim = kraus.len();
        let mut stinespring = CMatrix::zeros(out_dim * env_dim, in_dim);
        for (k, op) in kraus.iter().enumerate() {
            for b in 0..out_dim {
                for a in 0..in_dim {
                    stinespring[(b * env_dim + k, a)] = op[(b, a)];
                }
            }
        }
        let n = in_dim * out_dim;
        let mut choi = CMatrix::zeros(n, n);
        for op in &kraus {
            let w = CVector::from_fn(n, |idx, _| op[(idx % out_dim, idx / out_dim)]);
            choi += &w * w.adjoint();
        }
        Ok(Self { in_dim, out_dim, kraus, stinespring, choi })
    }

    /// Channel from its Stinespring isometry `V: A → B⊗E` (rows indexed `b * env + e`).
    pub fn from_stinespring(v: &CMatrix<T>, out_dim: usize, env_dim: usize) -> Result<Self> {
        if v.nrows() != out_dim * env_dim {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} rows, expected {}x{}",
                v.nrows(),
                out_dim,
                env_dim
            )));
        }
        let in_dim = v.ncols();
        let kraus = (0..env_dim)
            .map(|e| CMatrix::from_fn(out_dim, in_dim, |b, a| v[(b * env_dim + e, a)]))
            .collect();
        Self::from_kraus(kraus)
    }

    /// Channel from a Choi matrix; Kraus rank is the number of eigenvalues
    /// above `cutoff`.
    pub fn from_choi(in_dim: usize, out_dim: usize, choi: &CMatrix<T>, cutoff: T) -> Result<Self> {
        if choi.nrows() != in_dim * out_dim || choi.ncols() != in_dim * out_dim {
            return Err(Error::DimensionMismatch("Choi matrix shape".into()));
        }
        let eig = tensor::eigh(choi);
        tensor::check_spectrum_psd(&eig.values)?;
        let mut kraus: Vec<CMatrix<T>> = Vec::new();
        for (j, &lam) in eig.values.iter().enumerate().rev() {
            if lam <= cutoff {
                continue;
            }
            let s = lam.sqrt();
            kraus.push(CMatrix::from_fn(out_dim, in_dim, |b, a| eig.vectors[(a * out_dim + b, j)].scale(s)));
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(out_dim, in_dim));
        }
        Self::from_kraus(kraus)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMatrix<T>] {
        &self.kraus
    }

    pub fn stinespring(&self) -> &CMatrix<T> {
        &self.stinespring
    }

    pub fn choi(&self) -> &CMatrix<T> {
        &self.choi
    }

    /// Maximum deviation of `Σ K†K` from the identity.
    pub fn tp_deviation(&self) -> T {
        let mut sum = CMatrix::<T>::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        (sum - tensor::identity::<T>(self.in_dim))
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.modulus()))
    }

    /// The complementary channel `ρ ↦ tr_B VρV†` for the stored dilation.
    pub fn complement(&self) -> Self {
        let env = self.env_dim();
        let kraus = (0..self.out_dim)
            .map(|b| CMatrix::from_fn(env, self.in_dim, |k, a| self.kraus[k][(b, a)]))
            .collect();
        Self::from_kraus(kraus).expect("complement of a valid channel is valid")
    }

    fn check_input(&self, rho: &CMatrix<T>) -> Result<()> {
        if rho.nrows() != self.in_dim || rho.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "input {}x{} for channel on dimension {}",
                rho.nrows(),
                rho.ncols(),
                self.in_dim
            )));
        }
        Ok(())
    }

    /// `Σ K ρ K†` on a raw matrix.
    pub fn apply_matrix(&self, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check_input(rho)?;
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &ComplexOperator<T>) -> Result<ComplexOperator<T>> {
        ComplexOperator::new(vec![self.out_dim], self.apply_matrix(rho.matrix())?)
    }

    /// Output on a pure input `|v⟩`, without forming `|v⟩⟨v|`.
    pub fn apply_pure(&self, v: &CVector<T>) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            let w = k * v;
            out += &w * w.adjoint();
        }
        out
    }

    pub fn apply_via_stinespring(&self, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check_input(rho)?;
        let big = &self.stinespring * rho * self.stinespring.adjoint();
        let sp = tensor::split(&[self.out_dim, self.env_dim()], &[0])?;
        Ok(sp.trace_out(&big))
    }

    pub fn apply_via_choi(&self, rho: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check_input(rho)?;
        Ok(choi_apply(&self.choi, self.in_dim, self.out_dim, rho))
    }

    /// Heisenberg-picture adjoint `Y ↦ Σ K† Y K`.
    pub fn adjoint_apply(&self, y: &CMatrix<T>) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if outer.in_dim != inner.out_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose channel on {} after channel into {}",
                outer.in_dim, inner.out_dim
            )));
        }
        let mut kraus = Vec::with_capacity(outer.env_dim() * inner.env_dim());
        for ko in &outer.kraus {
            for ki in &inner.kraus {
                kraus.push(ko * ki);
            }
        }
        Self::from_kraus(kraus)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut kraus = Vec::with_capacity(self.env_dim() * other.env_dim());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        Self::from_kraus(kraus).expect("tensor product of channels is a channel")
    }

    /// `N^{⊗n}`; rejected when `in·out·env` of the result exceeds `cap`.
    pub fn tensor_pow(&self, n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
        }
        let size = (self.in_dim as f64 * self.out_dim as f64 * self.env_dim() as f64).powi(n as i32);
        if size > cap as f64 {
            return Err(Error::CapExceeded { what: "tensor power in*out*env".into(), needed: size, cap: cap as f64 });
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.tensor(self);
        }
        Ok(acc)
    }

    /// Same channel with the environment reduced to the Choi rank.
    pub fn minimal(&self) -> Self {
        Self::from_choi(self.in_dim, self.out_dim, &self.choi, T::validation_tol())
            .expect("Choi matrix of a channel is PSD")
    }

    /// Choi eigenvalues, descending.
    pub fn choi_spectrum(&self) -> Vec<T> {
        let mut v = tensor::eigvalsh(&self.choi);
        v.reverse();
        v
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![tensor::identity(d)]).expect("identity is a channel")
    }

    pub fn unitary(u: CMatrix<T>) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        Self::from_kraus(vec![u])
    }

    /// `ρ ↦ (1-p)ρ + p Σ_i ⟨i|ρ|i⟩ |i⟩⟨i|`.
    pub fn dephasing(d: usize, p: f64) -> Result<Self> {
        check_prob("dephasing", p)?;
        let mut kraus = Vec::new();
        if p < 1.0 {
            kraus.push(tensor::identity::<T>(d).scale(T::lit((1.0 - p).sqrt())));
        }
        if p > 0.0 {
            for i in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, i)] = Complex::new(T::lit(p.sqrt()), T::zero());
                kraus.push(k);
            }
        }
        Self::from_kraus(kraus)
    }

    /// `ρ ↦ (1-p)ρ + p·1/d`, with Weyl-operator Kraus decomposition.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        check_prob("depolarizing", p)?;
        let d2 = (d * d) as f64;
        let w_id = (1.0 - p + p / d2).sqrt();
        let w = (p / d2).sqrt();
        let mut kraus = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let weight = if a == 0 && b == 0 { w_id } else { w };
                if weight == 0.0 {
                    continue;
                }
                kraus.push(weyl::<T>(d, a, b).scale(T::lit(weight)));
            }
        }
        Self::from_kraus(kraus)
    }

    /// Erasure with flag `|d⟩` on a `d+1` dimensional output.
    pub fn erasure(d: usize, p: f64) -> Result<Self> {
        check_prob("erasure", p)?;
        let mut kraus = Vec::new();
        if p < 1.0 {
            let mut k = CMatrix::zeros(d + 1, d);
            for i in 0..d {
                k[(i, i)] = Complex::new(T::lit((1.0 - p).sqrt()), T::zero());
            }
            kraus.push(k);
        }
        if p > 0.0 {
            for j in 0..d {
                let mut k = CMatrix::zeros(d + 1, d);
                k[(d, j)] = Complex::new(T::lit(p.sqrt()), T::zero());
                kraus.push(k);
            }
        }
        Self::from_kraus(kraus)
    }

    /// `ρ ↦ σ` for every input on dimension `in_dim`.
    pub fn constant(in_dim: usize, sigma: &ComplexOperator<T>) -> Result<Self> {
        sigma.check_density()?;
        let eig = sigma.eigh();
        let out = sigma.dim();
        let mut kraus = Vec::new();
        for (i, &lam) in eig.values.iter().enumerate().rev() {
            if lam <= T::validation_tol() {
                continue;
            }
            let s = lam.sqrt();
            for j in 0..in_dim {
                kraus.push(CMatrix::from_fn(out, in_dim, |b, a| {
                    if a == j {
                        eig.vectors[(b, i)].scale(s)
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                }));
            }
        }
        Self::from_kraus(kraus)
    }

    /// Measure in the computational basis, then prepare `outputs[i]`.
    pub fn cq(outputs: &[ComplexOperator<T>]) -> Result<Self> {
        let first = outputs
            .first()
            .ok_or_else(|| Error::InvalidArgument("cq channel needs at least one output state".into()))?;
        let out = first.dim();
        let d = outputs.len();
        let mut kraus = Vec::new();
        for (i, sigma) in outputs.iter().enumerate() {
            if sigma.dim() != out {
                return Err(Error::DimensionMismatch("cq outputs of differing dimension".into()));
            }
            sigma.check_density()?;
            let eig = sigma.eigh();
            for (j, &lam) in eig.values.iter().enumerate().rev() {
                if lam <= T::validation_tol() {
                    continue;
                }
                let s = lam.sqrt();
                kraus.push(CMatrix::from_fn(out, d, |b, a| {
                    if a == i {
                        eig.vectors[(b, j)].scale(s)
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                }));
            }
        }
        Self::from_kraus(kraus)
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_prob("amplitude-damping", gamma)?;
        let z = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let k0 = CMatrix::from_row_slice(2, 2, &[one, z, z, Complex::new(T::lit((1.0 - gamma).sqrt()), T::zero())]);
        let k1 = CMatrix::from_row_slice(2, 2, &[z, Complex::new(T::lit(gamma.sqrt()), T::zero()), z, z]);
        Self::from_kraus(vec![k0, k1])
    }
}

/// Parameters for [`make_named`].
#[derive(Clone, Debug)]
pub struct NamedParams<T: Real = f64> {
    pub dim: usize,
    pub p: Option<f64>,
    pub unitary: Option<CMatrix<T>>,
    pub outputs: Option<Vec<ComplexOperator<T>>>,
    pub sigma: Option<ComplexOperator<T>>,
}

impl<T: Real> NamedParams<T> {
    pub fn dim(dim: usize) -> Self {
        Self { dim, p: None, unitary: None, outputs: None, sigma: None }
    }

    pub fn with_p(dim: usize, p: f64) -> Self {
        Self { p: Some(p), ..Self::dim(dim) }
    }
}

pub const NAMED_FAMILIES: [&str; 8] =
    ["identity", "unitary", "dephasing", "depolarizing", "erasure", "constant", "cq", "amplitude-damping"];

/// Standard channel families by name.
pub fn make_named<T: Real>(name: &str, params: &NamedParams<T>) -> Result<Channel<T>> {
    let d = params.dim;
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let p = |default: Option<f64>| {
        params
            .p
            .or(default)
            .ok_or_else(|| Error::InvalidArgument(format!("`{name}` needs a parameter p")))
    };
    match name {
        "identity" => Ok(Channel::identity(d)),
        "unitary" => {
            let u = params
                .unitary
                .clone()
                .ok_or_else(|| Error::InvalidArgument("`unitary` needs a matrix".into()))?;
            Channel::unitary(u)
        }
        "dephasing" => Channel::dephasing(d, p(Some(1.0))?),
        "depolarizing" => Channel::depolarizing(d, p(None)?),
        "erasure" => Channel::erasure(d, p(None)?),
        "constant" => {
            let sigma = params.sigma.clone().unwrap_or_else(|| ComplexOperator::maximally_mixed(vec![d]));
            Channel::constant(d, &sigma)
        }
        "cq" => {
            let outputs = match &params.outputs {
                Some(o) => o.clone(),
                None => (0..d)
                    .map(|i| crate::tensor::PureState::<T>::basis(vec![d], i).map(|s| s.projector()))
                    .collect::<Result<Vec<_>>>()?,
            };
            Channel::cq(&outputs)
        }
        "amplitude-damping" => {
            if d != 2 {
                return Err(Error::InvalidArgument("amplitude-damping is a qubit channel".into()));
            }
            Channel::amplitude_damping(p(None)?)
        }
        other => Err(Error::UnknownChannel(other.to_string())),
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("{name} parameter {p} outside [0, 1]")));
    }
    Ok(())
}

/// Weyl operator `X^a Z^b` on dimension `d`.
pub fn weyl<T: Real>(d: usize, a: usize, b: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let angle = 2.0 * std::f64::consts::PI * ((b * j) % d) as f64 / d as f64;
        m[((j + a) % d, j)] = Complex::new(T::lit(angle.cos()), T::lit(angle.sin()));
    }
    m
}

/// `N(ρ) = Σ_ij ρ_ij J_(i,·),(j,·)` for a Choi matrix on `A ⊗ B`.
pub fn choi_apply<T: Real>(choi: &CMatrix<T>, in_dim: usize, out_dim: usize, rho: &CMatrix<T>) -> CMatrix<T> {
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for i in 0..in_dim {
        for j in 0..in_dim {
            let r = rho[(i, j)];
            if r.re == T::zero() && r.im == T::zero() {
                continue;
            }
            for b in 0..out_dim {
                for b2 in 0..out_dim {
                    out[(b, b2)] += r * choi[(i * out_dim + b, j * out_dim + b2)];
                }
            }
        }
    }
    out
}

/// A linear map between operator spaces, held as its Choi matrix on `A ⊗ B`.
#[derive(Clone, Debug)]
pub struct LinearMap<T: Real = f64> {
    in_dim: usize,
    out_dim: usize,
    choi: CMatrix<T>,
}

impl<T: Real> LinearMap<T> {
    pub fn from_choi(in_dim: usize, out_dim: usize, choi: CMatrix<T>) -> Result<Self> {
        if choi.nrows() != in_dim * out_dim || choi.ncols() != in_dim * out_dim {
            return Err(Error::DimensionMismatch("Choi matrix shape".into()));
        }
        Ok(Self { in_dim, out_dim, choi })
    }

    pub fn from_channel(ch: &Channel<T>) -> Self {
        Self { in_dim: ch.in_dim, out_dim: ch.out_dim, choi: ch.choi.clone() }
    }

    /// `a - b`.
    pub fn difference(a: &Channel<T>, b: &Channel<T>) -> Result<Self> {
        if a.in_dim != b.in_dim || a.out_dim != b.out_dim {
            return Err(Error::DimensionMismatch("channel difference needs equal shapes".into()));
        }
        Self::from_choi(a.in_dim, a.out_dim, &a.choi - &b.choi)
    }

    /// Matrix transposition `X ↦ Xᵀ` on dimension `d`.
    pub fn transpose(d: usize) -> Self {
        let n = d * d;
        let mut choi = CMatrix::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                // J has block (i,j) equal to |j⟩⟨i|.
                choi[(i * d + j, j * d + i)] = Complex::new(T::one(), T::zero());
            }
        }
        Self { in_dim: d, out_dim: d, choi }
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        let n = in_dim * out_dim;
        Self { in_dim, out_dim, choi: CMatrix::zeros(n, n) }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn choi(&self) -> &CMatrix<T> {
        &self.choi
    }

    pub fn apply(&self, x: &CMatrix<T>) -> Result<CMatrix<T>> {
        if x.nrows() != self.in_dim || x.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch("input shape".into()));
        }
        Ok(choi_apply(&self.choi, self.in_dim, self.out_dim, x))
    }

    pub fn check_hermitian_preserving(&self, tol: T) -> Result<()> {
        let dev = tensor::hermitian_deviation(&self.choi);
        if dev > tol {
            return Err(Error::NotHermitianPreserving { deviation: dev.as_f64() });
        }
        Ok(())
    }

    /// `(id_k ⊗ Γ)(|v⟩⟨w|)` for `v, w ∈ C^k ⊗ A` given as `k × |A|` matrices.
    pub fn apply_extended(&self, v: &CMatrix<T>, w: &CMatrix<T>) -> CMatrix<T> {
        let vb = v.kronecker(&tensor::identity::<T>(self.out_dim));
        let wb = w.kronecker(&tensor::identity::<T>(self.out_dim));
        &vb * &self.choi * wb.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::scalar::{c, cr};
    use crate::tensor::{haar_state, haar_unitary, PureState};

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn paulis() -> [CMatrix; 3] {
        let x = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        let y = CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]);
        let z = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]);
        [x, y, z]
    }

    #[test]
    fn unitary_channel_has_trivial_environment() {
        let u = haar_unitary::<f64, _>(3, &mut seeded(1));
        let ch = Channel::unitary(u).unwrap();
        assert_eq!(ch.env_dim(), 1);
        let comp = ch.complement();
        assert_eq!(comp.out_dim(), 1);
        let s = haar_state::<f64, _>(3, &mut seeded(2)).unwrap();
        let out = comp.apply_pure(s.amplitudes());
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pinching_from_kraus() {
        let k0 = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)]);
        let k1 = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let ch = Channel::from_kraus(vec![k0, k1]).unwrap();
        let plus = PureState::<f64>::from_unnormalized(vec![2], CVector::from_vec(vec![cr(1.0), cr(1.0)])).unwrap();
        let out = ch.apply(&plus.projector()).unwrap();
        let pi = ComplexOperator::<f64>::maximally_mixed(vec![2]);
        assert!(close(out.matrix(), pi.matrix(), 1e-14));
        // Complement maps basis inputs to orthogonal environment states.
        let comp = ch.complement();
        let e0 = comp.apply_pure(PureState::<f64>::basis(vec![2], 0).unwrap().amplitudes());
        let e1 = comp.apply_pure(PureState::<f64>::basis(vec![2], 1).unwrap().amplitudes());
        assert!((e0 * e1).norm() < 1e-14);
    }

    #[test]
    fn pauli_kraus_matches_named_depolarizing() {
        let p = 0.3;
        let [x, y, z] = paulis();
        let kraus = vec![
            tensor::identity::<f64>(2).scale((1.0 - p as f64).sqrt()),
            x.scale((p / 3.0f64).sqrt()),
            y.scale((p / 3.0f64).sqrt()),
            z.scale((p / 3.0f64).sqrt()),
        ];
        let from_paulis = Channel::from_kraus(kraus).unwrap();
        // Pauli errors with total weight p shrink the Bloch vector by 1 - 4p/3.
        let named = Channel::<f64>::depolarizing(2, 4.0 * p / 3.0).unwrap();
        assert!(close(from_paulis.choi(), named.choi(), 1e-12));
    }

    #[test]
    fn non_trace_preserving_kraus_rejected() {
        let k = tensor::identity::<f64>(2).scale(0.9);
        assert!(matches!(Channel::from_kraus(vec![k]), Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn constant_channel_complement_embeds_input() {
        let sigma = ComplexOperator::<f64>::diagonal(&[0.75, 0.25]);
        let ch = Channel::constant(2, &sigma).unwrap();
        let s = haar_state::<f64, _>(2, &mut seeded(3)).unwrap();
        assert!(close(&ch.apply_pure(s.amplitudes()), sigma.matrix(), 1e-12));
        let comp = ch.complement();
        // Environment is (eigen-index of σ) ⊗ (copy of input): σ' ⊗ ρ.
        let out = comp.apply_pure(s.amplitudes());
        let expected = tensor::kron(&ComplexOperator::<f64>::diagonal(&[0.75, 0.25]).into_matrix(), s.projector().matrix());
        assert!(close(&out, &expected, 1e-12));
    }

    #[test]
    fn apply_identity_dephasing_depolarizing() {
        let rho = haar_state::<f64, _>(2, &mut seeded(4)).unwrap().projector();
        let id = make_named::<f64>("identity", &NamedParams::dim(2)).unwrap();
        assert!(close(id.apply(&rho).unwrap().matrix(), rho.matrix(), 1e-14));
        let dep = make_named::<f64>("depolarizing", &NamedParams::with_p(2, 1.0)).unwrap();
        let pi = ComplexOperator::<f64>::maximally_mixed(vec![2]);
        assert!(close(dep.apply(&rho).unwrap().matrix(), pi.matrix(), 1e-12));
        let rho3 = haar_state::<f64, _>(3, &mut seeded(5)).unwrap().projector();
        assert!(id.apply(&rho3).is_err());
    }

    #[test]
    fn compose_and_powers() {
        let u = haar_unitary::<f64, _>(2, &mut seeded(6));
        let a = Channel::unitary(u.clone()).unwrap();
        let b = Channel::unitary(u.adjoint()).unwrap();
        let ab = Channel::compose(&b, &a).unwrap();
        assert!(close(ab.choi(), Channel::<f64>::identity(2).choi(), 1e-12));

        let id3 = Channel::<f64>::identity(2).tensor_pow(3, DEFAULT_POWER_CAP).unwrap();
        assert_eq!(id3.in_dim(), 8);
        assert!(close(id3.choi(), Channel::<f64>::identity(8).choi(), 1e-12));

        let deph = Channel::<f64>::dephasing(2, 1.0).unwrap();
        let d2 = deph.tensor_pow(2, DEFAULT_POWER_CAP).unwrap();
        let plus = CVector::from_vec(vec![cr(0.5), cr(0.5), cr(0.5), cr(0.5)]);
        let out = d2.apply_pure(&plus);
        assert!(close(&out, &tensor::identity::<f64>(4).scale(0.25), 1e-14));
        assert!(matches!(deph.tensor_pow(12, DEFAULT_POWER_CAP), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn named_families() {
        let cq = make_named::<f64>("cq", &NamedParams::dim(2)).unwrap();
        let pinch = Channel::<f64>::dephasing(2, 1.0).unwrap();
        assert!(close(cq.choi(), pinch.choi(), 1e-14));
        let er = make_named::<f64>("erasure", &NamedParams::with_p(2, 0.5)).unwrap();
        assert_eq!(er.out_dim(), 3);
        let out = er.apply_pure(PureState::<f64>::basis(vec![2], 0).unwrap().amplitudes());
        assert!((out[(2, 2)].re - 0.5).abs() < 1e-14);
        assert!(matches!(make_named::<f64>("teleport", &NamedParams::dim(2)), Err(Error::UnknownChannel(_))));
        assert!(make_named::<f64>("depolarizing", &NamedParams::with_p(2, 1.5)).is_err());
        let ad = make_named::<f64>("amplitude-damping", &NamedParams::with_p(2, 0.3)).unwrap();
        assert!(ad.tp_deviation() < 1e-14);
    }

    #[test]
    fn representations_agree() {
        let mut rng = seeded(8);
        let v = haar_unitary::<f64, _>(6, &mut rng).columns(0, 2).into_owned();
        let chans = vec![
            Channel::<f64>::depolarizing(3, 0.4).unwrap(),
            Channel::<f64>::erasure(2, 0.3).unwrap(),
            Channel::from_stinespring(&v, 3, 2).unwrap(),
            Channel::<f64>::amplitude_damping(0.7).unwrap(),
        ];
        for ch in &chans {
            for _ in 0..100 {
                let rho = haar_state::<f64, _>(ch.in_dim(), &mut rng).unwrap().projector().into_matrix();
                let k = ch.apply_matrix(&rho).unwrap();
                assert!(close(&k, &ch.apply_via_stinespring(&rho).unwrap(), 1e-9));
                assert!(close(&k, &ch.apply_via_choi(&rho).unwrap(), 1e-9));
            }
            let cc = ch.complement().complement();
            let (s1, s2) = (ch.choi_spectrum(), cc.choi_spectrum());
            for (a, b) in s1.iter().zip(&s2) {
                assert!((a - b).abs() < 1e-8);
            }
            // tr_B J = 1_A.
            let marg = tensor::split(&[ch.in_dim(), ch.out_dim()], &[0]).unwrap().trace_out(ch.choi());
            assert!(close(&marg, &tensor::identity(ch.in_dim()), 1e-12));
        }
    }

    #[test]
    fn minimal_form_reduces_environment() {
        let deph = Channel::<f64>::dephasing(2, 0.5).unwrap();
        assert_eq!(deph.env_dim(), 3);
        let m = deph.minimal();
        assert_eq!(m.env_dim(), 2);
        assert!(close(m.choi(), deph.choi(), 1e-12));
    }

    #[test]
    fn transpose_map_acts_as_transpose() {
        let t = LinearMap::<f64>::transpose(3);
        let x = crate::tensor::gaussian_matrix::<f64, _>(3, 3, &mut seeded(9));
        assert!(close(&t.apply(&x).unwrap(), &x.transpose(), 1e-14));
    }

    #[test]
    fn single_precision_channel() {
        let ch = Channel::<f32>::depolarizing(2, 0.5).unwrap();
        let rho = haar_state::<f32, _>(2, &mut seeded(10)).unwrap().projector();
        let out = ch.apply(&rho).unwrap();
        out.check_density().unwrap();
    }
}
