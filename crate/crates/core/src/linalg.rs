//! Dense complex matrix helpers: Hermitian parts, eigenvalue bounds, square roots.

use alloc::vec::Vec;
use nalgebra::{Complex, DMatrix, DVector};
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|v| c(*v)))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().fold(0.0f64, |a, b| a.max(*b))
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// `‖M - M*‖_F / max(1, ‖M‖_F)`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint())) / frobenius(m).max(1.0)
}

/// Ascending eigenvalues and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

/// `V diag(f(λ)) V*` over the Hermitian part of `m`.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|v| c(f(*v)))));
    &vecs * d * vecs.adjoint()
}

/// PSD square root; negative eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| v.max(0.0).sqrt())
}

/// Eigenvalues of a general square matrix via the complex Schur form, or
/// `None` when the QR iteration does not settle.
pub fn eigenvalues(m: &CMatrix) -> Option<Vec<C64>> {
    if m.is_empty() {
        return Some(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)?;
    let (_, t) = schur.unpack();
    Some((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Spectral radius from the Schur form, falling back to `‖T^(2^j)‖^(2^-j)`
/// with `j = 10`.
pub fn spectral_radius(m: &CMatrix) -> f64 {
    if let Some(ev) = eigenvalues(m) {
        return ev.iter().fold(0.0f64, |a, z| a.max(z.norm_sqr().sqrt()));
    }
    let mut p = m.clone();
    let mut log_scale = 0.0;
    for _ in 0..10 {
        let n = op_norm(&p);
        if n == 0.0 {
            return 0.0;
        }
        p /= c(n);
        log_scale = 2.0 * (log_scale + n.ln());
        p = &p * &p;
    }
    let n = op_norm(&p);
    if n == 0.0 {
        return 0.0;
    }
    ((log_scale + n.ln()) / 1024.0).exp()
}

/// Orthonormal basis of the column span of `m` (rank decided relative to `tol`).
pub fn column_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return CMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().fold(0.0f64, |a, b| a.max(*b));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol * top.max(1.0))
        .collect();
    CMatrix::from_fn(n, keep.len(), |r, k| u[(r, keep[k])])
}

/// Deterministic probe vectors: the standard basis followed by `extra`
/// normalized random vectors drawn from a seeded ChaCha8 stream.
pub fn probe_vectors(dim: usize, extra: usize, seed: u64) -> Vec<CVector> {
    let mut out: Vec<CVector> = (0..dim)
        .map(|i| CVector::from_fn(dim, |r, _| if r == i { c(1.0) } else { c(0.0) }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let v = random_vector(&mut rng, dim);
        let norm = v.norm();
        out.push(if norm > 0.0 { v / c(norm) } else { v });
    }
    out
}

pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Entries uniform in the unit square of the complex plane, centred at zero.
pub fn random_vector(rng: &mut impl RngCore, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| Complex::new(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0))
}

pub fn random_matrix(rng: &mut impl RngCore, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| Complex::new(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0))
}

/// Random matrix rescaled to operator norm `norm`.
pub fn random_contraction(rng: &mut impl RngCore, dim: usize, norm: f64) -> CMatrix {
    let m = random_matrix(rng, dim);
    let s = op_norm(&m);
    if s == 0.0 {
        m
    } else {
        m * c(norm / s)
    }
}

/// Random Hermitian PSD matrix `A A*`.
pub fn random_psd(rng: &mut impl RngCore, dim: usize) -> CMatrix {
    let a = random_matrix(rng, dim);
    &a * a.adjoint()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
