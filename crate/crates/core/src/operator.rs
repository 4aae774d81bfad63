//! Hereditary functional calculus `f(T*, T)(B) = sum f_n T*^n B T^n` on
//! finite matrices and the certifications built on it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use crate::cesaro::{cesaro_sequence, CesaroParams};
use crate::error::{Error, Result};
use crate::fracdiff::poly_solution_check;
use crate::linalg::{self, c, frobenius, hermitian_deviation, hermitian_part, op_norm, CMatrix, CVector};
use crate::sequence::RealSequence;
use crate::series::{CoefficientSeries, Tail};
use crate::shifts::{power_norm_sq, ShiftSpec};
use crate::special::binomial;

/// Slack on the spectral radius gate.
pub const SPECTRAL_SLACK: f64 = 1e-9;
/// Hermiticity tolerance for inputs of the calculus.
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_TERMS: usize = 1 << 18;

/// A dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteOperator {
    m: CMatrix,
}

impl FiniteOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("operator must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("operator has non-finite entries".into()));
        }
        Ok(Self { m })
    }

    pub fn from_real(rows: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * rows {
            return Err(Error::Dimension(format!("expected {} entries, got {}", rows * rows, data.len())));
        }
        Self::new(linalg::real_matrix(rows, rows, data))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn scalar(dim: usize, lambda: linalg::C64) -> Self {
        Self { m: CMatrix::identity(dim, dim) * lambda }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn power(&self, n: usize) -> CMatrix {
        let mut p = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..n {
            p = &self.m * p;
        }
        p
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.m)
    }

    pub fn spectral_radius(&self) -> f64 {
        if self.nilpotency_index().is_some() {
            return 0.0;
        }
        linalg::spectral_radius(&self.m)
    }

    /// Fails unless the spectrum lies in the closed unit disc (with slack).
    pub fn check_spectrum(&self) -> Result<()> {
        let rho = self.spectral_radius();
        if rho > 1.0 + SPECTRAL_SLACK {
            return Err(Error::SpectralRadius { estimate: rho });
        }
        Ok(())
    }

    /// Smallest `q <= dim` with `T^q = 0`, if any.
    pub fn nilpotency_index(&self) -> Option<usize> {
        let scale = frobenius(&self.m).max(1.0);
        let mut p = CMatrix::identity(self.dim(), self.dim());
        for q in 0..=self.dim() {
            if frobenius(&p) <= 1e-14 * scale {
                return Some(q);
            }
            p = &self.m * p;
        }
        None
    }

    /// Block diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut m = CMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.m);
        m.view_mut((a, a), (b, b)).copy_from(&other.m);
        Self { m }
    }

    /// `self ⊗ I_k`.
    pub fn kron_identity(&self, k: usize) -> Self {
        Self { m: self.m.kronecker(&CMatrix::identity(k, k)) }
    }

    /// Restriction to the span of the orthonormal columns of `q`, which must be
    /// invariant: `‖(I - QQ*) T Q‖ < 1e-12`.
    pub fn compress(&self, q: &CMatrix) -> Result<Self> {
        if q.nrows() != self.dim() {
            return Err(Error::Dimension("compression basis has the wrong height".into()));
        }
        let tq = &self.m * q;
        let leak = &tq - q * (q.adjoint() * &tq);
        let l = op_norm(&leak);
        if l >= 1e-12 * self.norm().max(1.0) {
            return Err(Error::Precondition(format!("subspace is not invariant (leak {l:e})")));
        }
        Ok(Self { m: q.adjoint() * tq })
    }

    /// `‖T^n x‖²` for `n = 0..=horizon`.
    pub fn orbit_norms(&self, x: &CVector, horizon: usize) -> Vec<f64> {
        let mut v = x.clone();
        let mut out = Vec::with_capacity(horizon + 1);
        for _ in 0..=horizon {
            out.push(v.norm_squared());
            v = &self.m * v;
        }
        out
    }
}

/// Result of a hereditary evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Hereditary {
    pub value: CMatrix,
    pub terms_used: usize,
    /// Operator-norm bound on the neglected part.
    pub tail_bound: f64,
}

fn check_hermitian(b: &CMatrix) -> Result<()> {
    let dev = hermitian_deviation(b);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// `f(T*, T)(B)` with a tail below `tol` in operator norm.
///
/// Terminates exactly for nilpotent `T`, closes stationary orbits
/// `T* X T = X` with the known total `f(1)`, and otherwise stops once
/// `‖B‖ (M ‖T^{n+1}‖)² sum_{k>n} |f_k| < tol` with `M` the largest power
/// norm seen.
pub fn hereditary_apply(f: &CoefficientSeries, t: &FiniteOperator, b: &CMatrix, tol: f64) -> Result<Hereditary> {
    if b.nrows() != t.dim() || b.ncols() != t.dim() {
        return Err(Error::Dimension("B must match the dimension of T".into()));
    }
    check_hermitian(b)?;
    t.check_spectrum()?;
    let d = t.dim();
    let b = hermitian_part(b);
    let b_norm = op_norm(&b);
    let adj = t.matrix().adjoint();
    if let Some(q) = t.nilpotency_index() {
        let mut x = b.clone();
        let mut acc = CMatrix::zeros(d, d);
        for n in 0..q {
            let fn_ = f.get(n).ok_or_else(|| {
                Error::Divergence(format!("coefficient {n} needed for nilpotent index {q} is not available"))
            })?;
            acc += &x * c(fn_);
            x = &adj * x * t.matrix();
        }
        return Ok(Hereditary { value: hermitian_part(&acc), terms_used: q, tail_bound: 0.0 });
    }
    let mut x = b.clone();
    let mut power = CMatrix::identity(d, d);
    let mut acc = CMatrix::zeros(d, d);
    let mut partial_total = 0.0;
    let mut stationary_steps = 0;
    let mut max_power: f64 = 1.0;
    let limit = match f.tail() {
        Tail::Zero => f.len(),
        _ => f.len().min(MAX_TERMS),
    };
    let mut last_bound = f64::INFINITY;
    for n in 0..limit {
        let fn_ = f.coeffs()[n];
        acc += &x * c(fn_);
        partial_total += fn_;
        let next = &adj * &x * t.matrix();
        power = t.matrix() * power;
        let pn = op_norm(&power);
        max_power = max_power.max(pn);
        let rest = f.l1_from(n + 1);
        let bound = if rest.is_finite() { b_norm * (max_power * pn).powi(2) * rest } else { f64::INFINITY };
        last_bound = bound;
        if rest == 0.0 || bound < tol {
            return Ok(Hereditary { value: hermitian_part(&acc), terms_used: n + 1, tail_bound: if rest == 0.0 { 0.0 } else { bound } });
        }
        let drift = frobenius(&(&next - &x));
        if drift <= 1e-14 * frobenius(&x).max(1e-300) {
            stationary_steps += 1;
        } else {
            stationary_steps = 0;
        }
        if stationary_steps >= 2 {
            if let Some(total) = f.total() {
                acc += &next * c(total - partial_total);
                return Ok(Hereditary { value: hermitian_part(&acc), terms_used: n + 1, tail_bound: 0.0 });
            }
        }
        x = next;
    }
    if f.is_finite() {
        return Ok(Hereditary { value: hermitian_part(&acc), terms_used: limit, tail_bound: 0.0 });
    }
    Err(Error::Divergence(format!(
        "coefficient window of {limit} terms exhausted with tail bound {last_bound:e} above {tol:e}"
    )))
}

/// `(1 - t)^a (T*, T) = sum k^{-a}(n) T*^n T^n`.
pub fn alpha_of_t(a: f64, t: &FiniteOperator, tol: f64) -> Result<Hereditary> {
    if !(a > 0.0) {
        return Err(Error::Domain("alpha_of_t: order must be positive".into()));
    }
    let id = CMatrix::identity(t.dim(), t.dim());
    let mut len = 1usize << 12;
    loop {
        let f = cesaro_sequence(CesaroParams { order: -a, length: len });
        match hereditary_apply(&f, t, &id, tol) {
            Err(Error::Divergence(_)) if len < MAX_TERMS && !f.is_finite() => len *= 4,
            other => return other,
        }
    }
}

/// `sup_N ‖sum_{n<=N} |β_n| T*^n T^n‖ + ‖β‖_1`, with `N <= n_max`.
pub fn at_norm(beta: &CoefficientSeries, t: &FiniteOperator, n_max: usize) -> Result<f64> {
    let l1 = beta.wiener_norm_bound();
    if !l1.is_finite() {
        return Err(Error::Divergence("coefficients are not absolutely summable".into()));
    }
    t.check_spectrum()?;
    let d = t.dim();
    let abs = beta.abs();
    let adj = t.matrix().adjoint();
    let mut x = CMatrix::identity(d, d);
    let mut acc = CMatrix::zeros(d, d);
    let available = if abs.is_finite() { n_max.min(abs.len().saturating_sub(1)) } else { n_max };
    if available >= abs.len() && !abs.is_finite() && t.nilpotency_index().is_none() {
        // partial sums increase in the PSD order; the full sum dominates them all
        let full = hereditary_apply(&abs, t, &x, 1e-12)
            .map_err(|e| Error::Divergence(format!("absolute series: {e}")))?;
        return Ok(op_norm(&full.value) + l1);
    }
    for n in 0..=available {
        acc += &x * c(abs.get(n).unwrap_or(0.0));
        x = &adj * x * t.matrix();
    }
    Ok(op_norm(&hermitian_part(&acc)) + l1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComposeReport {
    pub lhs: CMatrix,
    pub rhs: CMatrix,
    pub residual: f64,
    pub agree: bool,
}

/// Compares `(fg)(T*, T)(B)` with `g(T*, T)(f(T*, T)(B))`.
pub fn compose_check(
    f: &CoefficientSeries,
    g: &CoefficientSeries,
    t: &FiniteOperator,
    b: &CMatrix,
    tol: f64,
) -> Result<ComposeReport> {
    let h = f.product(g);
    let inner_tol = tol * 1e-2;
    let lhs = hereditary_apply(&h, t, b, inner_tol)?.value;
    let fb = hereditary_apply(f, t, b, inner_tol)?.value;
    let rhs = hereditary_apply(g, t, &fb, inner_tol)?.value;
    let residual = op_norm(&(&lhs - &rhs));
    Ok(ComposeReport { agree: residual <= tol, lhs, rhs, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CertifiedNonneg,
    CertifiedNegative,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub min_eigenvalue: f64,
    pub truncation_terms: usize,
    pub truncation_bound: f64,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

/// Certifies `(1 - t)^a (T*, T) >= 0` from its smallest eigenvalue.
pub fn certify_a_contraction(t: &FiniteOperator, a: f64, tol: f64) -> CertReport {
    match alpha_of_t(a, t, tol) {
        Ok(h) => {
            let min = linalg::min_eigenvalue(&h.value);
            let verdict = if min >= -tol - h.tail_bound { Verdict::CertifiedNonneg } else { Verdict::CertifiedNegative };
            CertReport { min_eigenvalue: min, truncation_terms: h.terms_used, truncation_bound: h.tail_bound, verdict, reason: None }
        }
        Err(e) => CertReport {
            min_eigenvalue: f64::NAN,
            truncation_terms: 0,
            truncation_bound: f64::INFINITY,
            verdict: Verdict::Inconclusive,
            reason: Some(format!("{e}")),
        },
    }
}

/// What an orbit check runs on.
#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    Matrix(&'a FiniteOperator),
    Shift(ShiftSpec),
}

/// Number of basis vectors probed for shifts.
const SHIFT_PROBES: u64 = 6;

impl Subject<'_> {
    /// `‖T^n h‖²` for `n <= horizon` over the probe set.
    fn orbits(&self, horizon: usize, extra: usize, seed: u64) -> Vec<Vec<f64>> {
        match self {
            Subject::Matrix(t) => linalg::probe_vectors(t.dim(), extra, seed)
                .iter()
                .map(|h| t.orbit_norms(h, horizon))
                .collect(),
            Subject::Shift(s) => (0..SHIFT_PROBES)
                .map(|m| (0..=horizon as u64).map(|n| power_norm_sq(*s, n, m)).collect())
                .collect(),
        }
    }
}

/// `(I - ∇)^q Λ_i` from finitely many values.
fn integer_difference(vals: &[f64], q: usize, i: usize) -> f64 {
    let mut acc = crate::special::Compensated::new();
    for l in 0..=q {
        let v = binomial(q as u64, l as u64) * vals[i + l];
        acc.add(if l % 2 == 0 { v } else { -v });
    }
    acc.value()
}

/// `m` with `m < a <= m + 1`.
pub fn isometry_degree(a: f64) -> u64 {
    (a.ceil() - 1.0).max(0.0) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    pub m: u64,
    pub probes: usize,
    /// Every orbit `‖T^n h‖²` is a polynomial of degree at most `m`.
    pub polynomial: bool,
    /// `(I - ∇)^{m+1}` annihilates every orbit.
    pub difference_vanishes: bool,
    pub max_residual: f64,
    pub max_difference: f64,
    pub is_isometry: bool,
    /// Monomial coefficients of the fitted polynomial for each probe.
    pub polynomials: Vec<Vec<f64>>,
}

/// Tests the a-isometry property through its polynomial characterisation.
pub fn certify_a_isometry(subject: Subject<'_>, a: f64, horizon: usize, tol: f64, seed: u64) -> Result<IsometryReport> {
    if !(a > 0.0) {
        return Err(Error::Domain("certify_a_isometry: order must be positive".into()));
    }
    let m = isometry_degree(a);
    if horizon < m as usize + 2 {
        return Err(Error::Domain("certify_a_isometry: horizon must be at least m + 2".into()));
    }
    let orbits = subject.orbits(horizon, 4, seed);
    let mut polynomial = true;
    let mut max_residual: f64 = 0.0;
    let mut max_difference: f64 = 0.0;
    let mut polynomials = Vec::with_capacity(orbits.len());
    let q = m as usize + 1;
    for orbit in &orbits {
        let scale = orbit.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let seq = RealSequence::from_values(orbit.clone());
        let fit = poly_solution_check(&seq, m, horizon as u64, tol)?;
        polynomial &= fit.is_poly;
        max_residual = max_residual.max(fit.max_residual / scale);
        polynomials.push(fit.coefficients);
        for i in 0..=horizon - q {
            max_difference = max_difference.max(integer_difference(orbit, q, i).abs() / scale);
        }
    }
    let difference_vanishes = max_difference <= tol;
    Ok(IsometryReport {
        m,
        probes: orbits.len(),
        polynomial,
        difference_vanishes,
        max_residual,
        max_difference,
        is_isometry: polynomial && difference_vanishes,
        polynomials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvenOddBranch {
    /// A `(2m+1)`-contraction of moderate growth is a `2m`-contraction.
    Odd,
    /// A `2m`-contraction with `‖T^n x‖² = o(n^{2m-1})` is a `(2m-1)`-contraction.
    Even,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvenOddReport {
    pub branch: EvenOddBranch,
    pub hypothesis_met: bool,
    pub growth_ok: bool,
    pub conclusion_holds: bool,
    /// Smallest tested value of the concluded difference.
    pub min_value: f64,
}

fn min_difference(orbits: &[Vec<f64>], q: usize) -> f64 {
    let mut min = f64::INFINITY;
    for orbit in orbits {
        let scale = orbit[0].abs().max(1e-300);
        for i in 0..orbit.len() - q {
            min = min.min(integer_difference(orbit, q, i) / scale);
        }
    }
    min
}

/// `max_{n in (H/2, H]} Λ_n / (n+1)^p` against the same over `n <= H/2`.
fn growth_ratio(orbit: &[f64], p: f64) -> (f64, f64) {
    let h = orbit.len() - 1;
    let scaled = |n: usize| orbit[n] / ((n + 1) as f64).powf(p);
    let early = (0..=h / 2).map(scaled).fold(0.0f64, f64::max);
    let late = (h / 2 + 1..=h).map(scaled).fold(0.0f64, f64::max);
    (early, late)
}

/// Parity theorem check on orbits `‖T^n x‖²`.
pub fn even_odd_check(
    subject: Subject<'_>,
    m: u64,
    branch: EvenOddBranch,
    horizon: usize,
    tol: f64,
    seed: u64,
) -> Result<EvenOddReport> {
    if m == 0 {
        return Err(Error::Domain("even_odd_check: m must be positive".into()));
    }
    let two_m = 2 * m as usize;
    if horizon < 2 * (two_m + 2) {
        return Err(Error::Domain("even_odd_check: horizon too short".into()));
    }
    let orbits = subject.orbits(horizon, 4, seed);
    let (hyp_order, concl_order) = match branch {
        EvenOddBranch::Odd => (two_m + 1, two_m),
        EvenOddBranch::Even => (two_m, two_m - 1),
    };
    let hypothesis_contraction = min_difference(&orbits, hyp_order) >= -tol;
    let growth_ok = orbits.iter().all(|o| {
        let (early, late) = match branch {
            EvenOddBranch::Odd => growth_ratio(o, two_m as f64),
            EvenOddBranch::Even => growth_ratio(o, two_m as f64 - 1.0),
        };
        match branch {
            // bounded by a multiple of (n+1)^{2m}
            EvenOddBranch::Odd => late <= 1.01 * early + tol,
            // decaying relative to (n+1)^{2m-1}
            EvenOddBranch::Even => late <= 0.75 * early + tol,
        }
    });
    let min_value = min_difference(&orbits, concl_order);
    Ok(EvenOddReport {
        branch,
        hypothesis_met: hypothesis_contraction && growth_ok,
        growth_ok,
        conclusion_holds: min_value >= -tol,
        min_value,
    })
}
