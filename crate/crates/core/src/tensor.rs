//! Dense complex linear algebra on multipartite Hilbert spaces.
//!
//! Subsystems are ordered; index `i` of a composite space with dims
//! `[d0, d1, ..., dm]` is the row-major (Kronecker) combination of the
//! subsystem indices, subsystem 0 most significant.

use nalgebra::{Complex, ComplexField, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, CVector, Real};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real = f64> {
    pub values: Vec<T>,
    /// Column `j` is the eigenvector for `values[j]`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        self.map(|x| x)
    }

    /// `Σ f(λ_j) |v_j⟩⟨v_j|`.
    pub fn map(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(f(v));
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn max(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn top_vector(&self) -> CVector<T> {
        self.vectors.column(self.values.len() - 1).into_owned()
    }

    pub fn bottom_vector(&self) -> CVector<T> {
        self.vectors.column(0).into_owned()
    }
}

pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()).scale(T::lit(0.5))
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn eigh<T: Real>(m: &CMatrix<T>) -> HermitianEigen<T> {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

pub fn eigvalsh<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    m.trace()
}

pub fn hermitian_deviation<T: Real>(m: &CMatrix<T>) -> T {
    (m - m.adjoint()).iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn outer<T: Real>(u: &CVector<T>, v: &CVector<T>) -> CMatrix<T> {
    u * v.adjoint()
}

/// Square root of a PSD matrix; eigenvalues in `[-tol, 0)` are clipped.
pub fn sqrt_psd<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let eig = eigh(m);
    check_spectrum_psd(&eig.values)?;
    Ok(eig.map(|x| x.max(T::zero()).sqrt()))
}

/// Rejects spectra with an eigenvalue below `-validation_tol`.
pub fn check_spectrum_psd<T: Real>(values: &[T]) -> Result<()> {
    let min = values.iter().copied().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
    if min < -T::validation_tol() {
        return Err(Error::NotPsd { min_eigenvalue: min.as_f64() });
    }
    Ok(())
}

pub fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Index bookkeeping for splitting a composite space into kept and traced
/// factors. `full[t * kept_dim + k]` is the composite index whose kept digits
/// form `k` and traced digits form `t`.
#[derive(Clone, Debug)]
pub struct Split {
    pub kept_dim: usize,
    pub traced_dim: usize,
    pub full: Vec<usize>,
}

pub fn split(dims: &[usize], keep: &[usize]) -> Result<Split> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystems { keep: keep.to_vec(), dims: dims.to_vec() });
    }
    let kept_dim: usize = sorted.iter().map(|&k| dims[k]).product();
    let total = product(dims);
    let traced_dim = total / kept_dim.max(1);
    let mut full = vec![0usize; total];
    let mut digits = vec![0usize; dims.len()];
    for idx in 0..total {
        let mut rem = idx;
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let (mut k, mut t) = (0usize, 0usize);
        for s in 0..dims.len() {
            if sorted.binary_search(&s).is_ok() {
                k = k * dims[s] + digits[s];
            } else {
                t = t * dims[s] + digits[s];
            }
        }
        full[t * kept_dim + k] = idx;
    }
    Ok(Split { kept_dim, traced_dim, full })
}

impl Split {
    /// Reshapes a composite vector into a `kept × traced` matrix.
    pub fn reshape<T: Real>(&self, v: &CVector<T>) -> CMatrix<T> {
        CMatrix::from_fn(self.kept_dim, self.traced_dim, |k, t| v[self.full[t * self.kept_dim + k]])
    }

    pub fn trace_out<T: Real>(&self, m: &CMatrix<T>) -> CMatrix<T> {
        let kd = self.kept_dim;
        let mut out = CMatrix::zeros(kd, kd);
        for t in 0..self.traced_dim {
            let base = &self.full[t * kd..(t + 1) * kd];
            for (k1, &i) in base.iter().enumerate() {
                for (k2, &j) in base.iter().enumerate() {
                    out[(k1, k2)] += m[(i, j)];
                }
            }
        }
        out
    }
}

/// A square complex operator on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator<T: Real = f64> {
    dims: Vec<usize>,
    matrix: CMatrix<T>,
}

impl<T: Real> ComplexOperator<T> {
    pub fn new(dims: Vec<usize>, matrix: CMatrix<T>) -> Result<Self> {
        let n = product(&dims);
        if matrix.nrows() != n || matrix.ncols() != n || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} (product {}) vs matrix {}x{}",
                dims,
                n,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dims, matrix })
    }

    /// Single-system operator.
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(vec![n], matrix)
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = product(&dims);
        Self { dims, matrix: identity(n) }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n = product(&dims);
        Self { dims, matrix: identity::<T>(n).scale(T::one() / T::lit(n as f64)) }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = product(&dims);
        Self { dims, matrix: CMatrix::zeros(n, n) }
    }

    /// Diagonal operator on a single system.
    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(entries[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        Self { dims: vec![n], matrix }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, matrix: kron(&self.matrix, &other.matrix) }
    }

    /// Traces out every subsystem not listed in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let sp = split(&self.dims, keep)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        let dims: Vec<usize> = kept.iter().map(|&k| self.dims[k]).collect();
        let dims = if dims.is_empty() { vec![1] } else { dims };
        Ok(Self { dims, matrix: sp.trace_out(&self.matrix) })
    }

    pub fn eigh(&self) -> HermitianEigen<T> {
        eigh(&self.matrix)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let dev = hermitian_deviation(&self.matrix);
        if dev > T::validation_tol() {
            return Err(Error::NotHermitian { deviation: dev.as_f64() });
        }
        Ok(())
    }

    pub fn check_psd(&self) -> Result<()> {
        self.check_hermitian()?;
        check_spectrum_psd(&eigvalsh(&self.matrix))
    }

    /// Hermitian, PSD and unit trace, all within the scalar's validation tolerance.
    pub fn check_density(&self) -> Result<()> {
        self.check_psd()?;
        let tr = self.trace();
        if (tr.re - T::one()).abs() > T::validation_tol() || tr.im.abs() > T::validation_tol() {
            return Err(Error::NotNormalized { value: tr.re.as_f64() });
        }
        Ok(())
    }

    pub fn scale(&self, s: T) -> Self {
        Self { dims: self.dims.clone(), matrix: self.matrix.scale(s) }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(Self { dims: self.dims.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(Self { dims: self.dims.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(Self { dims: self.dims.clone(), matrix: &self.matrix * &other.matrix })
    }
}

/// A normalized vector on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T: Real = f64> {
    dims: Vec<usize>,
    amplitudes: CVector<T>,
}

impl<T: Real> PureState<T> {
    pub fn new(dims: Vec<usize>, amplitudes: CVector<T>) -> Result<Self> {
        if product(&dims) != amplitudes.len() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} vs {} amplitudes",
                dims,
                amplitudes.len()
            )));
        }
        let n2 = amplitudes.norm_squared();
        if (n2 - T::one()).abs() > T::norm_tol() {
            return Err(Error::NotNormalized { value: n2.as_f64() });
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn from_unnormalized(dims: Vec<usize>, amplitudes: CVector<T>) -> Result<Self> {
        let n = amplitudes.norm();
        if n <= T::zero() {
            return Err(Error::NotNormalized { value: 0.0 });
        }
        Self::new(dims, amplitudes.unscale(n))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n = product(&dims);
        if index >= n {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {n}")));
        }
        let mut v = CVector::zeros(n);
        v[index] = Complex::new(T::one(), T::zero());
        Self::new(dims, v)
    }

    /// `(1/√d) Σ_i |i⟩|i⟩` on `d ⊗ d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = CVector::zeros(d * d);
        let a = T::one() / T::lit(d as f64).sqrt();
        for i in 0..d {
            v[i * d + i] = Complex::new(a, T::zero());
        }
        Self { dims: vec![d, d], amplitudes: v }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector<T> {
        self.amplitudes
    }

    /// Reinterprets the subsystem structure without touching amplitudes.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.amplitudes)
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn projector(&self) -> ComplexOperator<T> {
        ComplexOperator { dims: self.dims.clone(), matrix: outer(&self.amplitudes, &self.amplitudes) }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, amplitudes: self.amplitudes.kronecker(&other.amplitudes) }
    }

    /// Reduced density operator on the subsystems in `keep`.
    pub fn marginal(&self, keep: &[usize]) -> Result<ComplexOperator<T>> {
        let sp = split(&self.dims, keep)?;
        let m = sp.reshape(&self.amplitudes);
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        let dims: Vec<usize> = kept.iter().map(|&k| self.dims[k]).collect();
        let dims = if dims.is_empty() { vec![1] } else { dims };
        Ok(ComplexOperator { dims, matrix: &m * m.adjoint() })
    }

    /// Trace distance `‖φ − ψ‖₁ = 2√(1 − |⟨φ|ψ⟩|²)` between pure states.
    pub fn trace_distance(&self, other: &Self) -> T {
        let f = self.overlap(other).min(T::one());
        T::lit(2.0) * (T::one() - f).max(T::zero()).sqrt()
    }
}

/// `tr_traced |φ⟩⟨ψ|` restricted to the `keep` subsystems.
pub fn cross_marginal<T: Real>(
    phi: &PureState<T>,
    psi: &PureState<T>,
    keep: &[usize],
) -> Result<CMatrix<T>> {
    if phi.dims != psi.dims {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", phi.dims, psi.dims)));
    }
    let sp = split(&phi.dims, keep)?;
    Ok(sp.reshape(&phi.amplitudes) * sp.reshape(&psi.amplitudes).adjoint())
}

/// A subspace described by an orthonormal frame (isometry columns).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<T: Real = f64> {
    ambient_dims: Vec<usize>,
    frame: CMatrix<T>,
}

impl<T: Real> Subspace<T> {
    pub fn new(ambient_dims: Vec<usize>, frame: CMatrix<T>) -> Result<Self> {
        if frame.nrows() != product(&ambient_dims) || frame.ncols() == 0 || frame.ncols() > frame.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "frame {}x{} in ambient {:?}",
                frame.nrows(),
                frame.ncols(),
                ambient_dims
            )));
        }
        let gram = frame.adjoint() * &frame;
        let dev = (&gram - identity::<T>(frame.ncols()))
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.modulus()));
        if dev > T::tight_tol() {
            return Err(Error::NotOrthonormal { deviation: dev.as_f64() });
        }
        Ok(Self { ambient_dims, frame })
    }

    pub fn ambient_dims(&self) -> &[usize] {
        &self.ambient_dims
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &CMatrix<T> {
        &self.frame
    }

    /// The ambient state `J c` for unit coefficients `c`.
    pub fn embed(&self, coeffs: &CVector<T>) -> Result<PureState<T>> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("{} coefficients for subspace of dim {}", coeffs.len(), self.dim())));
        }
        PureState::new(self.ambient_dims.clone(), &self.frame * coeffs)
    }

    pub fn projector(&self) -> ComplexOperator<T> {
        ComplexOperator { dims: self.ambient_dims.clone(), matrix: &self.frame * self.frame.adjoint() }
    }

    /// The normalized projector `Π_S / |S|`.
    pub fn maximally_mixed(&self) -> ComplexOperator<T> {
        self.projector().scale(T::one() / T::lit(self.dim() as f64))
    }
}

/// Purification on `A ⊗ A'` built from the spectral decomposition:
/// `Σ √λ_j |v_j⟩|j⟩`.
pub fn purify<T: Real>(rho: &ComplexOperator<T>) -> Result<PureState<T>> {
    rho.check_hermitian()?;
    let eig = rho.eigh();
    check_spectrum_psd(&eig.values)?;
    let d = rho.dim();
    let mut v = CVector::zeros(d * d);
    for (j, &lam) in eig.values.iter().enumerate() {
        let w = lam.max(T::zero()).sqrt();
        for a in 0..d {
            v[a * d + j] += eig.vectors[(a, j)].scale(w);
        }
    }
    let mut dims = rho.dims().to_vec();
    dims.push(d);
    PureState::from_unnormalized(dims, v)
}

fn gaussian<T: Real, R: rand::Rng + ?Sized>(rng: &mut R) -> Complex<T>
where
    StandardNormal: Distribution<T>,
{
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let re: T = StandardNormal.sample(rng);
    let im: T = StandardNormal.sample(rng);
    Complex::new(re * h, im * h)
}

pub fn gaussian_matrix<T: Real, R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let mut m = CMatrix::zeros(rows, cols);
    // Column-major fill keeps the draw order stable across nalgebra versions.
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = gaussian(rng);
        }
    }
    m
}

/// Haar-distributed unit vector of dimension `dim`.
pub fn haar_state<T: Real, R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState<T>>
where
    StandardNormal: Distribution<T>,
{
    if dim == 0 {
        return Err(Error::InvalidArgument("haar_state needs dim >= 1".into()));
    }
    let v = gaussian_matrix::<T, R>(dim, 1, rng).column(0).into_owned();
    PureState::from_unnormalized(vec![dim], v)
}

/// Orthonormalizes the columns of `g` by QR, with the phases of the
/// triangular factor's diagonal divided out.
fn phase_fixed_q<T: Real>(g: CMatrix<T>) -> CMatrix<T> {
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        let m = d.modulus();
        let phase = if m > T::zero() { d.unscale(m) } else { Complex::new(T::one(), T::zero()) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn haar_unitary<T: Real, R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    phase_fixed_q(gaussian_matrix(dim, dim, rng))
}

/// Haar-random `sub_dim`-dimensional subspace of a space with the given dims.
pub fn haar_subspace<T: Real, R: rand::Rng + ?Sized>(
    ambient_dims: Vec<usize>,
    sub_dim: usize,
    rng: &mut R,
) -> Result<Subspace<T>>
where
    StandardNormal: Distribution<T>,
{
    let n = product(&ambient_dims);
    if sub_dim == 0 || sub_dim > n {
        return Err(Error::InvalidArgument(format!("subspace dim {sub_dim} not in 1..={n}")));
    }
    let q = phase_fixed_q(gaussian_matrix(n, sub_dim, rng));
    Subspace::new(ambient_dims, q)
}

/// Default cap on the `(5/η)^{2k}` net-size bound.
pub const DEFAULT_NET_CAP: f64 = 1e6;

/// A trace-norm `eta`-net for the pure states of a `k`-dimensional space.
///
/// `k = 1` is a single point, `k = 2` uses a Fibonacci lattice on the Bloch
/// sphere, larger `k` uses greedy farthest-point selection from a Haar pool.
/// Covering is verified on fresh Haar samples before returning.
pub fn epsilon_net<R: rand::Rng + ?Sized>(k: usize, eta: f64, cap: f64, rng: &mut R) -> Result<Vec<PureState<f64>>> {
    if k == 0 || !(eta > 0.0 && eta <= 2.0) {
        return Err(Error::InvalidArgument(format!("epsilon_net needs k >= 1 and 0 < eta <= 2, got k={k}, eta={eta}")));
    }
    let bound = (5.0 / eta).powi(2 * k as i32);
    if bound > cap {
        return Err(Error::CapExceeded { what: "epsilon-net bound (5/eta)^(2k)".into(), needed: bound, cap });
    }
    if k == 1 {
        return Ok(vec![PureState::basis(vec![1], 0)?]);
    }
    let covered = |net: &[PureState<f64>], s: &PureState<f64>| net.iter().any(|p| p.trace_distance(s) <= eta);
    let check_samples = 2000usize;
    if k == 2 {
        // On the Bloch sphere the trace distance of pure states is the chord length.
        let mut points = ((16.0 / (eta * eta)).ceil() as usize).max(2);
        loop {
            let net = fibonacci_bloch(points);
            let ok = (0..check_samples).all(|_| {
                let s = haar_state::<f64, R>(2, rng).expect("dim 2");
                covered(&net, &s)
            });
            if ok || net.len() as f64 >= bound {
                return Ok(net);
            }
            points = points * 3 / 2 + 1;
        }
    }
    let pool_size = ((bound.min(2e4)) as usize).max(64);
    let pool: Vec<PureState<f64>> = (0..pool_size).map(|_| haar_state(k, rng)).collect::<Result<_>>()?;
    let mut net = vec![pool[0].clone()];
    let mut dist: Vec<f64> = pool.iter().map(|p| p.trace_distance(&net[0])).collect();
    let target = 0.8 * eta;
    loop {
        let (far, &worst) = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("non-empty pool");
        if worst <= target || net.len() as f64 >= bound {
            break;
        }
        let p = pool[far].clone();
        for (d, q) in dist.iter_mut().zip(&pool) {
            *d = d.min(q.trace_distance(&p));
        }
        net.push(p);
    }
    Ok(net)
}

fn fibonacci_bloch(n: usize) -> Vec<PureState<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let theta = z.clamp(-1.0, 1.0).acos();
            let phi = golden * i as f64;
            let v = CVector::from_vec(vec![
                Complex::new((theta / 2.0).cos(), 0.0),
                Complex::from_polar((theta / 2.0).sin(), phi),
            ]);
            PureState::new(vec![2], v).expect("unit Bloch vector")
        })
        .collect()
}

/// Uniformly random element of `{0, ..., n-1}`; shared helper for samplers.
pub fn uniform_index<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    rng.random_range(0..n)
}
