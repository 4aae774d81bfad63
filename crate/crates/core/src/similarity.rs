//! Similarity to an α-contraction: positivizers `g` with `g ≻ 0` and
//! `f g ≻ 0`, conjugation by `B = h(T̂*, T̂)^{1/2}`, and the final check.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_map, op_norm, CMatrix};
use crate::operator::{hereditary_apply, FiniteOperator};
use crate::series::{envelope_sum, CoefficientSeries, Tail};

/// Ratios `r` tried for the kernels `(1 - r t)^(-q)`.
pub const R_GRID: [f64; 19] = [
    0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];
pub const Q_GRID: [u32; 3] = [1, 2, 3];
pub const DEFAULT_WINDOW: usize = 64;
/// Points of the positivity grid on `[0, 1]`.
const GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Candidate {
    Identity,
    Kernel { r: f64, q: u32 },
    Pair { first: (f64, u32), second: (f64, u32) },
}

impl Candidate {
    pub fn label(&self) -> String {
        match self {
            Candidate::Identity => "1".into(),
            Candidate::Kernel { r, q } => format!("(1-{r}t)^-{q}"),
            Candidate::Pair { first, second } => {
                format!("(1-{}t)^-{}(1-{}t)^-{}", first.0, first.1, second.0, second.1)
            }
        }
    }

    fn max_ratio(&self) -> f64 {
        match self {
            Candidate::Identity => 0.0,
            Candidate::Kernel { r, .. } => *r,
            Candidate::Pair { first, second } => first.0.max(second.0),
        }
    }

    /// Coefficients `g_0 ..= g_{len-1}`.
    pub fn series(&self, len: usize) -> CoefficientSeries {
        match self {
            Candidate::Identity => CoefficientSeries::constant(1.0),
            Candidate::Kernel { r, q } => CoefficientSeries::geometric_kernel(*r, *q as f64, len),
            Candidate::Pair { first, second } => CoefficientSeries::geometric_kernel(first.0, first.1 as f64, len)
                .product(&CoefficientSeries::geometric_kernel(second.0, second.1 as f64, len)),
        }
    }
}

/// Candidates in search order: `1`, single kernels by `(q, r)`, then distinct pairs.
pub fn candidates() -> Vec<Candidate> {
    let mut singles = Vec::new();
    for q in Q_GRID {
        for r in R_GRID {
            singles.push((r, q));
        }
    }
    let mut out = Vec::with_capacity(1 + singles.len() * (singles.len() + 1) / 2);
    out.push(Candidate::Identity);
    out.extend(singles.iter().map(|&(r, q)| Candidate::Kernel { r, q }));
    for i in 0..singles.len() {
        for j in i + 1..singles.len() {
            out.push(Candidate::Pair { first: singles[i], second: singles[j] });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Positivizer {
    pub candidate: Candidate,
    pub g: CoefficientSeries,
    /// `[f g]_window`.
    pub product: CoefficientSeries,
    pub window: usize,
    /// Smallest certified value of `(f g)_n / g_n` beyond the window, or of `(f g)_n` inside it.
    pub margin: f64,
    /// Position of the candidate in [`candidates`].
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PositivizerOutcome {
    Found(Positivizer),
    NotFound { tried: usize },
}

/// Checks `f(t) > 0` on `[0, 1]` from a grid, a Lipschitz slack and the tail bound.
pub fn check_positive_on_interval(f: &CoefficientSeries) -> Result<f64> {
    if f.is_empty() || f.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::Precondition("series needs finite coefficients".into()));
    }
    let tail = f.l1_from(f.len());
    if !tail.is_finite() {
        return Err(Error::Precondition("series tail is not certified summable".into()));
    }
    let lipschitz: f64 = f.coeffs().iter().enumerate().map(|(n, c)| n as f64 * c.abs()).sum();
    let h = 1.0 / GRID as f64;
    let min = (0..=GRID).map(|k| f.eval(k as f64 * h)).fold(f64::INFINITY, f64::min);
    let lower = min - lipschitz * h / 2.0 - tail;
    if lower <= 0.0 {
        return Err(Error::Precondition(format!(
            "series is not certified positive on [0, 1] (grid minimum {min:e}, slack {:e})",
            lipschitz * h / 2.0 + tail
        )));
    }
    Ok(lower)
}

/// `|f_i|` bound for indices past the stored window.
fn envelope(f: &CoefficientSeries) -> Option<Box<dyn Fn(usize) -> f64 + '_>> {
    match f.tail() {
        Tail::Zero => Some(Box::new(|_| 0.0)),
        Tail::Model(m) if m.valid_from <= f.len() => Some(Box::new(move |i| m.bound(i))),
        _ => None,
    }
}

/// Certifies `[f g]_n >= 0` for every `n`, with `(f g)_0 > 0`.
///
/// Inside the window the coefficients are computed with the neglected part of
/// `f` bounded by its envelope. Beyond it the kernels are log-concave, so
/// `g_{n-i}/g_n` increases to `r_max^(-i)` and the ratio `(f g)_n / g_n` is
/// bounded below by its value at the window edge with negative terms at the limit.
pub fn check_candidate(f: &CoefficientSeries, candidate: Candidate, window: usize) -> Option<(CoefficientSeries, f64)> {
    let len = f.len();
    let w = window.max(len + 1);
    if candidate == Candidate::Identity {
        if !f.is_finite() || !f.is_positive() {
            return None;
        }
        let margin = f.coeffs().iter().copied().fold(f64::INFINITY, f64::min);
        return Some((f.clone(), margin));
    }
    let env = envelope(f)?;
    let g = candidate.series(w + 1);
    let gc = g.coeffs();
    let fc = f.coeffs();
    let mut margin = f64::INFINITY;
    for n in 0..w {
        let mut p = 0.0;
        for i in 0..=n.min(len - 1) {
            p += fc[i] * gc[n - i];
        }
        let err: f64 = (len..=n).map(|i| env(i) * gc[n - i]).sum();
        let v = p - err;
        if v < 0.0 || (n == 0 && v <= 0.0) {
            return None;
        }
        margin = margin.min(v / gc[n]);
    }
    let r = candidate.max_ratio();
    let mut lower = 0.0;
    for (i, fi) in fc.iter().enumerate() {
        lower += if *fi >= 0.0 { fi * gc[w - i] / gc[w] } else { fi * r.powi(-(i as i32)) };
    }
    if let Tail::Model(m) = f.tail() {
        let rel = m.ratio / r;
        if rel >= 1.0 {
            return None;
        }
        lower -= m.constant * envelope_sum(m.exponent, rel, len);
    }
    if !(lower > 0.0) {
        return None;
    }
    margin = margin.min(lower);
    Some((f.product(&g).truncate(w - 1), margin))
}

/// First candidate `g` (in [`candidates`] order) with `g ≻ 0` and `f g ≻ 0`.
pub fn search_positivizer(f: &CoefficientSeries, window: usize, budget: usize) -> Result<PositivizerOutcome> {
    check_positive_on_interval(f)?;
    let w = window.max(f.len() + 1);
    let all = candidates();
    let tried = budget.min(all.len());
    for (index, candidate) in all.into_iter().take(tried).enumerate() {
        if let Some((product, margin)) = check_candidate(f, candidate, w) {
            let g = candidate.series(w + 1);
            return Ok(PositivizerOutcome::Found(Positivizer { candidate, g, product, window: w, margin, index }));
        }
    }
    Ok(PositivizerOutcome::NotFound { tried })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    /// `B = h(T̂*, T̂)^{1/2}`.
    pub b: CMatrix,
    pub b_inv: CMatrix,
    /// `T = B T̂ B⁻¹`.
    pub t: FiniteOperator,
    /// Smallest eigenvalue of `h(T̂*, T̂)`.
    pub epsilon: f64,
    /// `h(T̂*, T̂)` itself.
    pub h_value: CMatrix,
    /// `‖B‖ ‖B⁻¹‖`.
    pub condition: f64,
    /// `‖B⁻¹ T B - T̂‖ / max(1, ‖T̂‖)`.
    pub reconstruction_error: f64,
}

/// Conjugates `T̂` by the square root of `h(T̂*, T̂)`.
pub fn conjugate_by_sqrt(t_hat: &FiniteOperator, h: &CoefficientSeries, tol: f64) -> Result<Conjugation> {
    let id = CMatrix::identity(t_hat.dim(), t_hat.dim());
    let hv = hereditary_apply(h, t_hat, &id, tol * 1e-2)?.value;
    let epsilon = linalg::min_eigenvalue(&hv);
    let threshold = tol * op_norm(&hv).max(1.0);
    if epsilon <= threshold {
        return Err(Error::NotCoercive { min_eigenvalue: epsilon, threshold });
    }
    let floor = epsilon / 2.0;
    let b = hermitian_map(&hv, |v| v.max(floor).sqrt());
    let b_inv = hermitian_map(&hv, |v| 1.0 / v.max(floor).sqrt());
    let t = FiniteOperator::new(&b * t_hat.matrix() * &b_inv)?;
    let reconstruction_error = op_norm(&(&b_inv * t.matrix() * &b - t_hat.matrix())) / t_hat.norm().max(1.0);
    let condition = op_norm(&b) * op_norm(&b_inv);
    Ok(Conjugation { b, b_inv, t, epsilon, h_value: hv, condition, reconstruction_error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityCertificate {
    pub g: CoefficientSeries,
    pub g_label: String,
    pub h: CoefficientSeries,
    pub b: CMatrix,
    pub t: FiniteOperator,
    pub epsilon: f64,
    /// Smallest eigenvalue of `α(T*, T)`.
    pub alpha_min_eig: f64,
    /// Smallest eigenvalue of `γ(T̂*, T̂)`.
    pub gamma_min_eig: f64,
    /// `‖α(T̂*,T̂)(h(T̂*,T̂)) - g(T̂*,T̂)(γ(T̂*,T̂))‖`.
    pub identity_residual: f64,
    pub reconstruction_error: f64,
    /// Positivity of `g` and `γ̃ g` holds beyond the window by a tail argument,
    /// not only on it.
    pub tail_certified: bool,
}

fn refuse(stage: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Refused { stage, cause: Box::new(e) }
}

/// Runs the whole pipeline: `γ = α γ̃` positive at `T̂`, positivizer `g` of `γ̃`,
/// conjugation by `h = γ̃ g`, positivity of `α(T*, T)` and the identity
/// `α(T̂*,T̂)(h(T̂*,T̂)) = g(T̂*,T̂)(γ(T̂*,T̂))`.
pub fn verify_similarity(
    t_hat: &FiniteOperator,
    alpha: &CoefficientSeries,
    gamma_tilde: &CoefficientSeries,
    g: Option<&CoefficientSeries>,
    tol: f64,
) -> Result<SimilarityCertificate> {
    let inner = tol * 1e-2;
    let id = CMatrix::identity(t_hat.dim(), t_hat.dim());

    let gamma = alpha.product(gamma_tilde);
    let gv = hereditary_apply(&gamma, t_hat, &id, inner).map_err(refuse("gamma"))?;
    let gamma_min_eig = linalg::min_eigenvalue(&gv.value);
    if gamma_min_eig < -tol - gv.tail_bound {
        return Err(refuse("gamma")(Error::Precondition(format!(
            "gamma(T*, T) has min eigenvalue {gamma_min_eig:e}"
        ))));
    }

    let (g, g_label, tail_certified) = match g {
        Some(g) => {
            if !g.is_positive() {
                return Err(refuse("positivizer")(Error::Precondition("g is not positive".into())));
            }
            let product = gamma_tilde.product(g);
            if !product.is_positive() {
                return Err(refuse("positivizer")(Error::Precondition("gamma_tilde g is not positive".into())));
            }
            (g.clone(), String::from("given"), g.is_finite() && gamma_tilde.is_finite())
        }
        None => match search_positivizer(gamma_tilde, DEFAULT_WINDOW, usize::MAX).map_err(refuse("positivizer"))? {
            PositivizerOutcome::Found(p) => (p.g, p.candidate.label(), true),
            PositivizerOutcome::NotFound { tried } => {
                return Err(refuse("positivizer")(Error::Precondition(format!(
                    "no positivizer among {tried} candidates"
                ))))
            }
        },
    };

    let h = gamma_tilde.product(&g);
    let conj = conjugate_by_sqrt(t_hat, &h, tol).map_err(refuse("conjugation"))?;

    let av = hereditary_apply(alpha, &conj.t, &id, inner).map_err(refuse("alpha"))?;
    let alpha_min_eig = linalg::min_eigenvalue(&av.value);
    if alpha_min_eig < -tol - av.tail_bound {
        return Err(refuse("alpha")(Error::NotContractive { min_eigenvalue: alpha_min_eig }));
    }

    let lhs = hereditary_apply(alpha, t_hat, &conj.h_value, inner).map_err(refuse("identity"))?;
    let rhs = hereditary_apply(&g, t_hat, &gv.value, inner).map_err(refuse("identity"))?;
    let identity_residual = op_norm(&(&lhs.value - &rhs.value));
    let allowed = tol + lhs.tail_bound + rhs.tail_bound;
    if identity_residual > allowed {
        return Err(refuse("identity")(Error::Inconsistency(format!(
            "both sides differ by {identity_residual:e} (allowed {allowed:e})"
        ))));
    }

    Ok(SimilarityCertificate {
        g,
        g_label,
        h,
        b: conj.b,
        t: conj.t,
        epsilon: conj.epsilon,
        alpha_min_eig,
        gamma_min_eig,
        identity_residual,
        reconstruction_error: conj.reconstruction_error,
        tail_certified,
    })
}
