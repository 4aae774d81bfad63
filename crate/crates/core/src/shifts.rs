//! Weighted shifts `B_s` (backward) and `F_s` (forward) on the space `H_s`
//! of power series with `‖t^m‖² = k^s(m)`.

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::cesaro::{cesaro_coefficients, cesaro_number, cesaro_number_gamma};
use crate::error::{Error, Result};
use crate::fracdiff::frac_diff;
use crate::linalg::{c, CMatrix};
use crate::operator::FiniteOperator;
use crate::sequence::RealSequence;
use crate::special::{gamma, gamma_ratio, integer_distance, sin_pi};

/// Distance below which `s` is treated as an integer.
pub const NEAR_INTEGER: f64 = 1e-9;

/// Numeric values at or below this size carry no sign.
pub const SIGN_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Backward,
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSpec {
    pub direction: Direction,
    pub weight: f64,
}

impl ShiftSpec {
    pub fn new(direction: Direction, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::Domain("shift weight must be positive".into()));
        }
        Ok(Self { direction, weight })
    }

    pub fn backward(weight: f64) -> Result<Self> {
        Self::new(Direction::Backward, weight)
    }

    pub fn forward(weight: f64) -> Result<Self> {
        Self::new(Direction::Forward, weight)
    }
}

fn k(s: f64, n: u64) -> f64 {
    if n <= 4096 {
        cesaro_number(s, n).unwrap_or(f64::NAN)
    } else {
        cesaro_number_gamma(s, n).unwrap_or(f64::NAN)
    }
}

/// `Γ(n + a) / Γ(n + b)` ratio of Cesàro numbers `k^s(p) / k^s(q)`.
fn k_ratio(s: f64, p: u64, q: u64) -> f64 {
    if p.max(q) <= 4096 {
        return k(s, p) / k(s, q);
    }
    // k^s(p)/k^s(q) = Γ(p+s)Γ(q+1) / (Γ(q+s)Γ(p+1))
    let num = gamma_ratio(p as f64, s, 1.0).unwrap_or(f64::NAN);
    let den = gamma_ratio(q as f64, s, 1.0).unwrap_or(f64::NAN);
    num / den
}

/// `‖S^n e_m‖² / ‖e_m‖²`.
pub fn power_norm_sq(shift: ShiftSpec, n: u64, m: u64) -> f64 {
    let s = shift.weight;
    match shift.direction {
        Direction::Forward => k_ratio(s, n + m, m),
        Direction::Backward => {
            if m >= n {
                k_ratio(s, m - n, m)
            } else {
                0.0
            }
        }
    }
}

/// `n ↦ power_norm_sq(shift, n, m)` as a sequence.
pub fn power_norm_sequence(shift: ShiftSpec, m: u64) -> Result<RealSequence> {
    match shift.direction {
        Direction::Forward => RealSequence::cesaro(shift.weight, m, 1.0 / k(shift.weight, m)),
        Direction::Backward => {
            Ok(RealSequence::from_values((0..=m).map(|n| power_norm_sq(shift, n, m)).collect()))
        }
    }
}

/// `‖S^n‖²`: the supremum of `power_norm_sq` over basis indices.
///
/// Each ratio is a product of factors `(i+s)/(i+1)` that move monotonically
/// towards 1, so the supremum sits at the first admissible index or at
/// infinity, where it equals 1.
pub fn operator_norm_sq_estimate(shift: ShiftSpec, n: u64) -> f64 {
    let s = shift.weight;
    match shift.direction {
        Direction::Forward => {
            if s >= 1.0 {
                k(s, n)
            } else {
                1.0
            }
        }
        Direction::Backward => {
            if s <= 1.0 {
                1.0 / k(s, n)
            } else {
                1.0
            }
        }
    }
}

/// `(1 - ∇)^a k^s(m) = sin(πs) Γ(1-s+a) Γ(s+m) / (π Γ(m+a+1))` for `s < a + 1`.
pub fn frac_diff_cesaro_closed(a: f64, s: f64, m: u64) -> Result<f64> {
    if !(a > 0.0 && s > 0.0) {
        return Err(Error::Domain("closed form needs a > 0 and s > 0".into()));
    }
    if s >= a + 1.0 {
        return Err(Error::Domain(format!("closed form needs s < a + 1, got a = {a}, s = {s}")));
    }
    let sin = sin_pi(s);
    if sin == 0.0 {
        return Ok(0.0);
    }
    let g = gamma(1.0 - s + a)?;
    let ratio = gamma_ratio(m as f64, s, a + 1.0)?;
    Ok(sin * g * ratio / core::f64::consts::PI)
}

/// `(-1)^a k^{s-a}(m + a)` for integer `a`.
pub fn frac_diff_cesaro_integer(a: u64, s: f64, m: u64) -> f64 {
    let v = k(s - a as f64, m + a);
    if a % 2 == 0 {
        v
    } else {
        -v
    }
}

fn is_integer(x: f64) -> bool {
    integer_distance(x) < NEAR_INTEGER
}

/// Closed predicate for `Σ k^{-a}(j) S^{*j} S^j` to make sense.
pub fn membership_predicate(shift: ShiftSpec, a: f64) -> bool {
    match shift.direction {
        Direction::Backward => true,
        Direction::Forward => shift.weight < a + 1.0 || is_integer(a),
    }
}

/// Slope of `ln |k^{-a}(j)| ‖S^j e_m‖²` against `ln j` on `j ∈ [2^12, 2^20]`.
fn summand_slope(shift: ShiftSpec, a: f64, m: u64) -> f64 {
    let pts: Vec<(f64, f64)> = (12..=20)
        .map(|e| {
            let j = 1u64 << e;
            let kern = cesaro_number_gamma(-a, j).map(|v| v.abs()).unwrap_or(0.0);
            ((j as f64).ln(), (kern * power_norm_sq(shift, j, m)).ln())
        })
        .collect();
    least_squares_slope(&pts)
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Membership in the class where `(1 - t)^a (S*, S)` is defined, with a
/// numeric cross-check of the absolute summand decay for `m ∈ {0, 5}`.
pub fn membership_weak(shift: ShiftSpec, a: f64) -> Result<bool> {
    if !(a > 0.0) {
        return Err(Error::Domain("membership_weak: order must be positive".into()));
    }
    let predicate = membership_predicate(shift, a);
    // finite kernel or finitely supported orbit: nothing to check numerically
    if is_integer(a) || shift.direction == Direction::Backward {
        return Ok(predicate);
    }
    for m in [0u64, 5] {
        let slope = summand_slope(shift, a, m);
        let numeric = if slope < -1.05 {
            Some(true)
        } else if slope > -0.95 {
            Some(false)
        } else {
            None
        };
        if let Some(v) = numeric {
            if v != predicate {
                return Err(Error::Inconsistency(format!(
                    "predicate says {predicate}, summand decay slope {slope:.4} at m = {m}"
                )));
            }
        }
    }
    Ok(predicate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignVerdict {
    /// `(1 - t)^a (S*, S) >= 0`: an a-contraction.
    Nonneg,
    Nonpos,
    /// `(1 - t)^a (S*, S) = 0`: an a-isometry.
    Zero,
    Indefinite,
    NotInClass,
}

impl SignVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignVerdict::Nonneg => "nonneg",
            SignVerdict::Nonpos => "nonpos",
            SignVerdict::Zero => "zero",
            SignVerdict::Indefinite => "indefinite",
            SignVerdict::NotInClass => "not_in_class",
        }
    }
}

/// Numeric evidence: `⟨(1 - t)^a (S*, S) u_m, u_m⟩` for sampled basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub indices: Vec<u64>,
    pub values: Vec<f64>,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignClassification {
    pub verdict: SignVerdict,
    pub cross_check: Option<CrossCheck>,
}

/// Verdict from the closed predicates alone.
pub fn closed_verdict(shift: ShiftSpec, a: f64) -> SignVerdict {
    let s = shift.weight;
    match shift.direction {
        Direction::Backward => {
            if a <= s {
                SignVerdict::Nonneg
            } else {
                SignVerdict::Indefinite
            }
        }
        Direction::Forward => {
            let a_int = is_integer(a);
            if s < a + 1.0 {
                if is_integer(s) {
                    SignVerdict::Zero
                } else if sin_pi(s) > 0.0 {
                    SignVerdict::Nonneg
                } else {
                    SignVerdict::Nonpos
                }
            } else if a_int {
                // (1 - ∇)^a k^s(m) = (-1)^a k^{s-a}(m+a) with s - a >= 1
                if (a.round() as u64) % 2 == 0 {
                    SignVerdict::Nonneg
                } else {
                    SignVerdict::Nonpos
                }
            } else {
                SignVerdict::NotInClass
            }
        }
    }
}

/// Basis indices used by the numeric cross-check.
pub const CROSS_CHECK_INDICES: [u64; 7] = [0, 1, 2, 5, 10, 20, 50];

/// `⟨(1 - t)^a (S*, S) u_m, u_m⟩ = (1 - ∇)^a Λ_0` with `Λ_n = power_norm_sq(shift, n, m)`.
pub fn quadratic_form_at_basis(shift: ShiftSpec, a: f64, m: u64, tol: f64) -> Result<f64> {
    let seq = power_norm_sequence(shift, m)?;
    if is_integer(a) {
        return frac_diff(a.round(), &seq, 0, tol).map(|r| r.value);
    }
    frac_diff(a, &seq, 0, tol).map(|r| r.value)
}

/// Sign classification of `(1 - t)^a (S*, S)`, cross-checked numerically.
pub fn classify_shift(shift: ShiftSpec, a: f64) -> Result<SignClassification> {
    if !(a > 0.0) {
        return Err(Error::Domain("classify_shift: order must be positive".into()));
    }
    let verdict = closed_verdict(shift, a);
    if verdict == SignVerdict::NotInClass {
        return Ok(SignClassification { verdict, cross_check: None });
    }
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for &m in CROSS_CHECK_INDICES.iter() {
        if let Ok(v) = quadratic_form_at_basis(shift, a, m, 1e-12) {
            indices.push(m);
            values.push(v);
        }
    }
    let consistent = match verdict {
        SignVerdict::Nonneg => values.iter().all(|v| *v >= -SIGN_FLOOR),
        SignVerdict::Nonpos => values.iter().all(|v| *v <= SIGN_FLOOR),
        SignVerdict::Zero => values.iter().all(|v| v.abs() <= 1e-8),
        SignVerdict::Indefinite => {
            values.iter().any(|v| *v < -SIGN_FLOOR) && values.iter().any(|v| *v > SIGN_FLOOR)
        }
        SignVerdict::NotInClass => true,
    };
    Ok(SignClassification { verdict, cross_check: Some(CrossCheck { indices, values, consistent }) })
}

/// Matrix of the shift on the first `dim` orthonormal basis vectors
/// `u_m = t^m / ‖t^m‖`.
pub fn truncate(shift: ShiftSpec, dim: usize) -> FiniteOperator {
    let w = cesaro_coefficients(shift.weight, dim.max(1));
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim.saturating_sub(1) {
        match shift.direction {
            Direction::Forward => m[(i + 1, i)] = c((w[i + 1] / w[i]).sqrt()),
            Direction::Backward => m[(i, i + 1)] = c((w[i] / w[i + 1]).sqrt()),
        }
    }
    FiniteOperator::new(m).expect("square finite matrix")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fwd(s: f64) -> ShiftSpec {
        ShiftSpec::forward(s).unwrap()
    }

    fn bwd(s: f64) -> ShiftSpec {
        ShiftSpec::backward(s).unwrap()
    }

    #[test]
    fn power_norm_examples() {
        assert_eq!(power_norm_sq(bwd(1.0), 3, 7), 1.0);
        assert_eq!(power_norm_sq(fwd(2.0), 4, 0), 5.0);
        assert!((power_norm_sq(fwd(0.5), 2, 1) - 0.625).abs() < 1e-15);
        assert_eq!(power_norm_sq(bwd(0.5), 4, 3), 0.0);
        let far = power_norm_sq(fwd(1.5), 5000, 10);
        let near = k(1.5, 5010) / k(1.5, 10);
        assert!((far / near - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norms_match_scan() {
        for &s in &[0.3, 0.8, 1.0, 1.7, 2.5] {
            for dir in [Direction::Forward, Direction::Backward] {
                let sh = ShiftSpec::new(dir, s).unwrap();
                for n in [1u64, 4, 17] {
                    let scan = (0..4000u64).map(|m| power_norm_sq(sh, n, m)).fold(0.0f64, f64::max);
                    let est = operator_norm_sq_estimate(sh, n);
                    assert!(scan <= est * (1.0 + 1e-12), "{sh:?} n={n}");
                    assert!(scan >= est * 0.97, "{sh:?} n={n}: {scan} vs {est}");
                }
            }
        }
        assert_eq!(operator_norm_sq_estimate(fwd(2.0), 9), 10.0);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(frac_diff_cesaro_closed(1.5, 2.0, 0).unwrap(), 0.0);
        let v = frac_diff_cesaro_closed(0.5, 0.5, 0).unwrap();
        assert!((v - 2.0 / core::f64::consts::PI).abs() < 1e-15);
        let v = frac_diff_cesaro_closed(2.0, 1.5, 3).unwrap();
        assert!((v - k(-0.5, 5)).abs() < 1e-15);
        assert!(frac_diff_cesaro_closed(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn membership_examples() {
        assert!(membership_weak(bwd(0.3), 2.5).unwrap());
        assert!(!membership_weak(fwd(3.0), 1.5).unwrap());
        assert!(membership_weak(fwd(3.0), 2.0).unwrap());
        assert!(membership_weak(fwd(1.2), 0.5).unwrap());
    }

    #[test]
    fn classification_examples() {
        let r = classify_shift(bwd(0.7), 0.5).unwrap();
        assert_eq!(r.verdict, SignVerdict::Nonneg);
        assert!(r.cross_check.unwrap().consistent);
        let r = classify_shift(fwd(2.5), 1.8).unwrap();
        assert_eq!(r.verdict, SignVerdict::Nonneg);
        assert!(r.cross_check.unwrap().consistent);
        let r = classify_shift(fwd(1.5), 1.2).unwrap();
        assert_eq!(r.verdict, SignVerdict::Nonpos);
        assert!(r.cross_check.unwrap().consistent);
        let r = classify_shift(bwd(0.5), 1.5).unwrap();
        assert_eq!(r.verdict, SignVerdict::Indefinite);
        assert!(r.cross_check.unwrap().consistent);
        assert_eq!(classify_shift(fwd(3.5), 1.5).unwrap().verdict, SignVerdict::NotInClass);
        assert_eq!(classify_shift(fwd(3.0), 1.0).unwrap().verdict, SignVerdict::Nonpos);
        assert_eq!(classify_shift(fwd(2.0), 1.5).unwrap().verdict, SignVerdict::Zero);
    }

    #[test]
    fn truncations() {
        let b = truncate(bwd(1.0), 3);
        assert_eq!(b.matrix()[(0, 1)], c(1.0));
        assert_eq!(b.matrix()[(1, 2)], c(1.0));
        let f = truncate(fwd(2.0), 2);
        assert!((f.matrix()[(1, 0)].re - 2f64.sqrt()).abs() < 1e-15);
        let sh = bwd(0.5);
        let t = truncate(sh, 4);
        let e3 = crate::linalg::CVector::from_fn(4, |r, _| if r == 3 { c(1.0) } else { c(0.0) });
        let orbit = t.orbit_norms(&e3, 5);
        for (n, v) in orbit.iter().enumerate() {
            assert!((v - power_norm_sq(sh, n as u64, 3)).abs() < 1e-14);
        }
        assert_eq!(t.nilpotency_index(), Some(4));
    }
}
