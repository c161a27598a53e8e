use nalgebra::{Complex, DMatrix, SymmetricEigen};
use qidlab::{tensor, CMatrix};

pub type M = DMatrix<Complex<f64>>;

pub fn h(m: &M) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().filter(|&&v| v > 1e-14).map(|&v| -v * v.log2()).sum()
}

pub fn ptrace(m: &M, da: usize, db: usize, keep_first: bool) -> M {
    if keep_first {
        M::from_fn(da, da, |i, j| (0..db).map(|b| m[(i * db + b, j * db + b)]).sum())
    } else {
        M::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum())
    }
}

/// Mutual information from first principles: purify on a copy of the input,
/// apply `id ⊗ K` for each Kraus operator and take entropies.
pub fn oracle_mutual(kraus: &[CMatrix], rho: &M) -> f64 {
    let d = rho.nrows();
    let eig = SymmetricEigen::new(rho.clone());
    let mut phi = nalgebra::DVector::<Complex<f64>>::zeros(d * d);
    for k in 0..d {
        let w = eig.eigenvalues[k].max(0.0).sqrt();
        for i in 0..d {
            for j in 0..d {
                phi[i * d + j] += eig.eigenvectors[(i, k)].conj() * eig.eigenvectors[(j, k)] * w;
            }
        }
    }
    let db = kraus[0].nrows();
    let mut joint = M::zeros(d * db, d * db);
    for k in kraus {
        let op = tensor::kron(&tensor::identity(d), k);
        let v = op * &phi;
        joint += &v * v.adjoint();
    }
    h(&ptrace(&joint, d, db, true)) + h(&ptrace(&joint, d, db, false)) - h(&joint)
}

pub fn bloch(x: f64, y: f64, z: f64) -> M {
    let c = |re: f64, im: f64| Complex::new(re, im);
    M::from_row_slice(2, 2, &[c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0), c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0)])
}

/// Grid over the Bloch ball at spacing 0.05, then shrinking local search.
pub fn grid_oracle(kraus: &[CMatrix]) -> f64 {
    let f = |p: [f64; 3]| {
        if p.iter().map(|v| v * v).sum::<f64>() > 1.0 {
            f64::NEG_INFINITY
        } else {
            oracle_mutual(kraus, &bloch(p[0], p[1], p[2]))
        }
    };
    let steps: Vec<f64> = (0..=40).map(|i| -1.0 + 0.05 * i as f64).collect();
    let mut best = ([0.0; 3], f([0.0; 3]));
    for &x in &steps {
        for &y in &steps {
            for &z in &steps {
                let v = f([x, y, z]);
                if v > best.1 {
                    best = ([x, y, z], v);
                }
            }
        }
    }
    let mut step = 0.025;
    while step > 1e-7 {
        let mut moved = false;
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut p = best.0;
                p[axis] += sign * step;
                let v = f(p);
                if v > best.1 {
                    best = (p, v);
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best.1
}
