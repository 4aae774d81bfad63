//! Finite-dimensional realization of the model `T ≅ part of (B_a ⊗ I_𝔇) ⊕ S`
//! for a-contractions with `0 < a < 1`, and the growth obstruction for
//! forward shifts when `a > 1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::cesaro::{cesaro_coefficients, cesaro_number};
use crate::error::{Error, Result};
use crate::linalg::{self, c, column_basis, op_norm, psd_sqrt, CMatrix};
use crate::operator::{alpha_of_t, FiniteOperator, Hereditary};
use crate::shifts::{self, classify_shift, least_squares_slope, operator_norm_sq_estimate, ShiftSpec, SignVerdict};
use crate::special::Compensated;

/// Cap on the automatic truncation depth.
pub const MAX_DEPTH: usize = 10_000;

fn check_order(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("model construction needs 0 < a < 1, got {a}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    /// `D = α(T*, T)^{1/2}`.
    pub d: CMatrix,
    pub alpha: Hereditary,
    /// `‖D² - α‖ / max(1, ‖α‖)`.
    pub reconstruction_error: f64,
}

/// The defect operator of an a-contraction.
pub fn defect(t: &FiniteOperator, a: f64, tol: f64) -> Result<Defect> {
    check_order(a)?;
    let alpha = alpha_of_t(a, t, tol * 1e-2)?;
    let min = linalg::min_eigenvalue(&alpha.value);
    if min < -tol - alpha.tail_bound {
        return Err(Error::NotContractive { min_eigenvalue: min });
    }
    let d = psd_sqrt(&alpha.value);
    let reconstruction_error = op_norm(&(&d * &d - &alpha.value)) / op_norm(&alpha.value).max(1.0);
    Ok(Defect { d, alpha, reconstruction_error })
}

/// `ρ_{N,m} = -sum_{j<=N} k^a(j) k^{-a}(m-j)` for `m > N`.
pub fn rho(big_n: u64, m: u64, a: f64) -> Result<f64> {
    if m <= big_n {
        return Err(Error::Domain(format!("rho needs m > N, got N = {big_n}, m = {m}")));
    }
    let k = cesaro_coefficients(a, big_n as usize + 1);
    let alpha = cesaro_coefficients(-a, m as usize + 1);
    let mut acc = Compensated::new();
    for (j, kj) in k.iter().enumerate() {
        acc.add(-kj * alpha[m as usize - j]);
    }
    Ok(acc.value())
}

/// `ρ_{N,m} = sum_{n=N+1}^{m} k^a(n) k^{-a}(m-n)`.
pub fn rho_long(big_n: u64, m: u64, a: f64) -> Result<f64> {
    if m <= big_n {
        return Err(Error::Domain(format!("rho needs m > N, got N = {big_n}, m = {m}")));
    }
    let k = cesaro_coefficients(a, m as usize + 1);
    let alpha = cesaro_coefficients(-a, m as usize + 1);
    let mut acc = Compensated::new();
    for n in big_n as usize + 1..=m as usize {
        acc.add(k[n] * alpha[m as usize - n]);
    }
    Ok(acc.value())
}

/// `ρ_{N,m}` for `m = N+1 ..= N+len` in one pass.
fn rho_row(big_n: usize, len: usize, a: f64) -> Vec<f64> {
    let k = cesaro_coefficients(a, big_n + 1);
    let alpha = cesaro_coefficients(-a, big_n + len + 1);
    (big_n + 1..=big_n + len)
        .map(|m| {
            let mut acc = Compensated::new();
            for (j, kj) in k.iter().enumerate() {
                acc.add(-kj * alpha[m - j]);
            }
            acc.value()
        })
        .collect()
}

/// `u_r(m) = sum_{n+j=m} r^n k^a(n) k^{-a}(j)`.
pub fn u_coeff(r: f64, m: u64, a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain("u_coeff needs r in [0, 1]".into()));
    }
    let len = m as usize + 1;
    let k = cesaro_coefficients(a, len);
    let alpha = cesaro_coefficients(-a, len);
    let mut acc = Compensated::new();
    let mut rn = 1.0;
    for n in 0..len {
        acc.add(rn * k[n] * alpha[len - 1 - n]);
        rn *= r;
    }
    Ok(acc.value())
}

/// `u_r(0..=m_max)` by the same convolution.
pub fn u_row(r: f64, m_max: usize, a: f64) -> Vec<f64> {
    let len = m_max + 1;
    let k = cesaro_coefficients(a, len);
    let alpha = cesaro_coefficients(-a, len);
    let weighted: Vec<f64> = {
        let mut rn = 1.0;
        k.iter()
            .map(|kn| {
                let v = rn * kn;
                rn *= r;
                v
            })
            .collect()
    };
    (0..len)
        .map(|m| {
            let mut acc = Compensated::new();
            for n in 0..=m {
                acc.add(weighted[n] * alpha[m - n]);
            }
            acc.value()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UDecay {
    /// `max m^{1+a} |u_r(m) - u_r(m-1)|` over `2 <= m <= m_max` and the grid.
    pub max_scaled_increment: f64,
    /// The same maximum restricted to `m <= 100`.
    pub early_max: f64,
    /// Per grid point: `(r, max over m)`.
    pub per_r: Vec<(f64, f64)>,
}

/// Scan of the scaled increments `m^{1+a} |u_r(m) - u_r(m-1)|`.
pub fn u_decay_scan(a: f64, m_max: usize, r_grid: &[f64]) -> Result<UDecay> {
    check_order(a)?;
    if m_max < 2 {
        return Err(Error::Domain("u_decay_scan needs m_max >= 2".into()));
    }
    let mut max_scaled_increment: f64 = 0.0;
    let mut early_max: f64 = 0.0;
    let mut per_r = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain("u_decay_scan needs r in [0, 1]".into()));
        }
        let u = u_row(r, m_max, a);
        let mut row_max: f64 = 0.0;
        for m in 2..=m_max {
            let v = (m as f64).powf(1.0 + a) * (u[m] - u[m - 1]).abs();
            row_max = row_max.max(v);
            if m <= 100 {
                early_max = early_max.max(v);
            }
        }
        max_scaled_increment = max_scaled_increment.max(row_max);
        per_r.push((r, row_max));
    }
    Ok(UDecay { max_scaled_increment, early_max, per_r })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelReport {
    pub depth: usize,
    pub defect_rank: usize,
    pub quotient_dim: usize,
    /// `‖G*G - I‖`.
    pub isometry_defect: f64,
    /// `‖M G - G T‖` with `M = (B_a ⊗ I) ⊕ S`. Truncation leaves a residual of
    /// order `sqrt(depth_tail)`.
    pub intertwining_residual: f64,
    /// Largest violation of `‖x‖² = sum_{n<=N} k_n ‖D T^n x‖² + sum_{m>N} ρ_{N,m} ‖T^m x‖²` over `N <= depth`.
    pub norm_identity_residual: f64,
    /// Smallest eigenvalue of the quotient Gram matrix.
    pub quotient_min: f64,
    /// `‖S*S - I‖` on the quotient (0 when the quotient is null).
    pub s_isometry_defect: f64,
    /// Bound on the part of `sum k_n ‖D T^n x‖²` beyond the depth.
    pub depth_tail: f64,
}

/// Terms `k_n ‖D T^n‖²` until they decay geometrically below `tol`, and a
/// bound on everything after the last one.
fn defect_terms(t: &FiniteOperator, d: &CMatrix, a: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let limit = 4 * MAX_DEPTH;
    let k = cesaro_coefficients(a, limit + 1);
    let mut terms = Vec::new();
    let mut y = d.clone();
    for n in 0..=limit {
        let v = op_norm(&y);
        let term = k[n] * v * v;
        terms.push(term);
        if term == 0.0 {
            return Ok((terms, 0.0));
        }
        if n >= 8 {
            let ratio = (term / terms[n - 4]).powf(0.25);
            if ratio < 1.0 {
                let rest = term * ratio / (1.0 - ratio);
                if rest < tol * 1e-2 {
                    return Ok((terms, rest));
                }
            }
        }
        y = &y * t.matrix();
    }
    Err(Error::Depth { depth: limit, tail: f64::INFINITY })
}

/// Bound on `sum_{n>N} k_n ‖D T^n‖²`.
fn tail_after(terms: &[f64], rest: f64, big_n: usize) -> f64 {
    terms.iter().skip(big_n + 1).sum::<f64>() + rest
}

/// `sum_{m>N} ρ_{N,m} T*^m T^m`, closing stationary orbits with `sum_{m>N} ρ_{N,m} = 1`.
fn quotient_gram(t: &FiniteOperator, a: f64, big_n: usize, tol: f64) -> Result<CMatrix> {
    let dim = t.dim();
    let adj = t.matrix().adjoint();
    let mut x = t.power(big_n + 1);
    x = x.adjoint() * &x;
    let mut acc = CMatrix::zeros(dim, dim);
    let mut chunk = 256;
    let mut offset = 0usize;
    let mut used = 0.0;
    let mut row = rho_row(big_n, chunk, a);
    loop {
        if offset == row.len() {
            if row.len() >= 1 << 16 {
                return Err(Error::Depth { depth: big_n, tail: op_norm(&x) });
            }
            chunk *= 4;
            row = rho_row(big_n, chunk, a);
        }
        let r = row[offset];
        acc += &x * c(r);
        used += r;
        offset += 1;
        let next = &adj * &x * t.matrix();
        let xn = op_norm(&next);
        if xn < tol * 1e-3 {
            break;
        }
        if op_norm(&(&next - &x)) <= 1e-13 * xn.max(1e-300) {
            acc += &next * c(1.0 - used);
            break;
        }
        x = next;
    }
    Ok(linalg::hermitian_part(&acc))
}

/// Realizes the model embedding `G` and reports its defects.
pub fn build_model(t: &FiniteOperator, a: f64, depth: Option<usize>, tol: f64) -> Result<ModelReport> {
    check_order(a)?;
    let dim = t.dim();
    let def = defect(t, a, tol)?;
    let d = &def.d;
    let (terms, rest) = defect_terms(t, d, a, tol)?;
    let big_n = match depth {
        Some(n) => n,
        None => (0..terms.len())
            .find(|&n| tail_after(&terms, rest, n) < tol)
            .ok_or(Error::Depth { depth: terms.len(), tail: rest })?,
    };
    if big_n > MAX_DEPTH {
        return Err(Error::Depth { depth: big_n, tail: tail_after(&terms, rest, big_n) });
    }
    let tail = tail_after(&terms, rest, big_n);
    if tail > tol {
        return Err(Error::Depth { depth: big_n, tail });
    }
    let k = cesaro_coefficients(a, big_n + 2);
    let qd = column_basis(d, 1e-12);
    let rank = qd.ncols();

    // G on the H_a ⊗ 𝔇 block, n-major coordinates
    let mut g_top = CMatrix::zeros((big_n + 1) * rank, dim);
    let mut dtn = d.clone();
    let mut norm_part = CMatrix::zeros(dim, dim);
    let mut partial_sums = Vec::with_capacity(big_n + 1);
    for n in 0..=big_n {
        let block = qd.adjoint() * &dtn * c(k[n].sqrt());
        g_top.view_mut((n * rank, 0), (rank, dim)).copy_from(&block);
        norm_part += dtn.adjoint() * &dtn * c(k[n]);
        partial_sums.push(norm_part.clone());
        dtn = &dtn * t.matrix();
    }

    // norm identity for every N <= depth
    let id = CMatrix::identity(dim, dim);
    let mut norm_identity_residual: f64 = 0.0;
    let mut gram = CMatrix::zeros(dim, dim);
    for (nn, part) in partial_sums.iter().enumerate() {
        let q = quotient_gram(t, a, nn, tol)?;
        norm_identity_residual = norm_identity_residual.max(op_norm(&(&id - part - &q)));
        if nn == big_n {
            gram = q;
        }
    }

    // quotient block
    let (vals, vecs) = linalg::hermitian_eigen(&gram);
    let quotient_min = vals.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol).collect();
    let qdim = keep.len();
    let qa = CMatrix::from_fn(dim, qdim, |r, j| vecs[(r, keep[j])]);
    let sqrt_vals: Vec<f64> = keep.iter().map(|&i| vals[i].sqrt()).collect();
    let g_bottom = CMatrix::from_fn(qdim, dim, |i, j| qa[(j, i)].conj() * c(sqrt_vals[i]));

    let mut g = CMatrix::zeros((big_n + 1) * rank + qdim, dim);
    g.view_mut((0, 0), (g_top.nrows(), dim)).copy_from(&g_top);
    g.view_mut((g_top.nrows(), 0), (qdim, dim)).copy_from(&g_bottom);

    // S on the quotient: x̂ ↦ (Tx)^ in the coordinates of g_bottom
    let s = if qdim > 0 {
        let inv = CMatrix::from_fn(dim, qdim, |r, j| qa[(r, j)] * c(1.0 / sqrt_vals[j]));
        &g_bottom * t.matrix() * inv
    } else {
        CMatrix::zeros(0, 0)
    };
    let s_isometry_defect = if qdim > 0 { op_norm(&(s.adjoint() * &s - CMatrix::identity(qdim, qdim))) } else { 0.0 };

    let b_a = shifts::truncate(ShiftSpec::backward(a)?, big_n + 1).kron_identity(rank);
    let model = b_a.direct_sum(&FiniteOperator::new(s)?);
    let isometry_defect = op_norm(&(g.adjoint() * &g - &id));
    let intertwining_residual = op_norm(&(model.matrix() * &g - &g * t.matrix()));
    Ok(ModelReport {
        depth: big_n,
        defect_rank: rank,
        quotient_dim: qdim,
        isometry_defect,
        intertwining_residual,
        norm_identity_residual,
        quotient_min,
        s_isometry_defect,
        depth_tail: tail,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub m: u64,
    pub shift_growth_exponent: f64,
    pub model_growth_cap: f64,
    pub separated: bool,
    pub verdict: SignVerdict,
}

/// Margin by which the fitted exponent must exceed the model cap.
pub const GAP_MARGIN: f64 = 0.1;

/// Growth obstruction: `‖F_s^n‖² ≍ (n+1)^{s-1}` outgrows every part of a model
/// whose powers grow like `(n+1)^{m-1}`.
pub fn counterexample_gap(a: f64, s: f64, n_max: u64) -> Result<GapReport> {
    let m = a.ceil();
    if !(a > 0.0) || (m as u64) % 2 != 0 {
        return Err(Error::Domain(format!("need a in (2j-1, 2j], got {a}")));
    }
    if !(s > m && s < a + 1.0) {
        return Err(Error::Domain(format!("need {m} < s < {}, got s = {s}", a + 1.0)));
    }
    if n_max < 4 {
        return Err(Error::Domain("n_max must be at least 4".into()));
    }
    let shift = ShiftSpec::forward(s)?;
    let mut pts = Vec::new();
    let mut n = 1u64;
    pts.push((0.0, operator_norm_sq_estimate(shift, 0).ln()));
    while n <= n_max {
        pts.push((((n + 1) as f64).ln(), operator_norm_sq_estimate(shift, n).ln()));
        n *= 2;
    }
    let slope = least_squares_slope(&pts);
    let cap = m - 1.0;
    let verdict = classify_shift(shift, a)?.verdict;
    Ok(GapReport {
        m: m as u64,
        shift_growth_exponent: slope,
        model_growth_cap: cap,
        separated: slope > cap + GAP_MARGIN,
        verdict,
    })
}

/// Coefficients of `(1-t)^a / (1-rt)^a` up to `t^m_max` by power-series division.
pub fn u_generating(r: f64, m_max: usize, a: f64) -> Vec<f64> {
    let num = cesaro_coefficients(-a, m_max + 1);
    let den: Vec<f64> = {
        let mut rn = 1.0;
        cesaro_coefficients(-a, m_max + 1)
            .into_iter()
            .map(|v| {
                let x = v * rn;
                rn *= r;
                x
            })
            .collect()
    };
    let mut out = vec![0.0; m_max + 1];
    for i in 0..=m_max {
        let mut acc = Compensated::new();
        acc.add(num[i]);
        for j in 1..=i {
            acc.add(-den[j] * out[i - j]);
        }
        out[i] = acc.value() / den[0];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        assert!((rho(0, 1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((rho(0, 2, 0.5).unwrap() - 0.125).abs() < 1e-15);
        for n in 0..6u64 {
            let v = rho(n, n + 1, 0.3).unwrap();
            assert!((v - cesaro_number(0.3, n + 1).unwrap()).abs() < 1e-15);
        }
        assert!(rho(3, 3, 0.5).is_err());
        for n in 0..8u64 {
            for m in n + 1..n + 30 {
                let (x, y) = (rho(n, m, 0.7).unwrap(), rho_long(n, m, 0.7).unwrap());
                assert!((x - y).abs() < 1e-12 && x > 0.0);
            }
        }
    }

    #[test]
    fn u_examples() {
        assert_eq!(u_coeff(0.3, 0, 0.5).unwrap(), 1.0);
        assert!(u_coeff(1.0, 7, 0.5).unwrap().abs() < 1e-15);
        let g = u_generating(0.4, 50, 0.6);
        let u = u_row(0.4, 50, 0.6);
        for (x, y) in g.iter().zip(&u) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_operator_model() {
        let r = build_model(&FiniteOperator::zeros(3), 0.5, None, 1e-10).unwrap();
        assert_eq!((r.depth, r.defect_rank, r.quotient_dim), (0, 3, 0));
        assert!(r.isometry_defect < 1e-14 && r.intertwining_residual < 1e-14);
    }

    #[test]
    fn scalar_model_has_null_quotient() {
        let t = FiniteOperator::scalar(1, c(0.5));
        let r = build_model(&t, 0.5, None, 1e-10).unwrap();
        assert_eq!(r.quotient_dim, 0);
        assert!(r.isometry_defect < 1e-9, "{r:?}");
        assert!(r.norm_identity_residual < 1e-9, "{r:?}");
    }

    #[test]
    fn unimodular_scalar_is_all_quotient() {
        let t = FiniteOperator::scalar(1, nalgebra::Complex::new(0.6, 0.8));
        let r = build_model(&t, 0.5, Some(3), 1e-10).unwrap();
        assert_eq!((r.defect_rank, r.quotient_dim), (0, 1));
        assert!(r.isometry_defect < 1e-12 && r.s_isometry_defect < 1e-12, "{r:?}");
        assert!(r.intertwining_residual < 1e-12);
    }

    #[test]
    fn nilpotent_backward_shift_model() {
        let t = shifts::truncate(ShiftSpec::backward(0.8).unwrap(), 5);
        let r = build_model(&t, 0.5, None, 1e-10).unwrap();
        assert_eq!(r.quotient_dim, 0);
        assert!(r.isometry_defect < 1e-10, "{r:?}");
        assert!(r.intertwining_residual < 1e-10, "{r:?}");
        assert!(r.norm_identity_residual < 1e-12, "{r:?}");
    }

    #[test]
    fn defect_requires_contraction() {
        let t = shifts::truncate(ShiftSpec::forward(1.5).unwrap(), 4);
        assert!(matches!(defect(&t, 0.5, 1e-9), Err(Error::NotContractive { .. })));
        let t = FiniteOperator::scalar(1, c(0.6));
        let d = defect(&t, 0.5, 1e-12).unwrap();
        assert!((d.d[(0, 0)].re - 0.64f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn gap_examples() {
        let r = counterexample_gap(2.0, 2.5, 1 << 14).unwrap();
        assert!(r.separated && r.verdict == SignVerdict::Nonneg, "{r:?}");
        assert!(counterexample_gap(1.9, 2.2, 1 << 14).unwrap().separated);
        assert!(counterexample_gap(2.0, 2.0, 1 << 14).is_err());
        assert!(counterexample_gap(2.5, 3.2, 1 << 14).is_err());
    }
}
