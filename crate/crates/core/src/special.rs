//! Gamma-function ratios and small numeric helpers.
//!
//! The ratio `Γ(n + a) / Γ(n + b)` is evaluated with the offset `a - b`
//! kept separate from `n`, so that large `n` does not destroy the
//! information carried by a fractional offset.

use num_traits::Float;

use crate::error::{Error, Result};

/// Arguments at or above this value use the Stirling series directly.
const STIRLING_MIN: f64 = 15.0;

/// `B_{2k} / (2k (2k - 1))` for k = 1..8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

fn stirling_correction(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// `ln Γ(n + a) - ln Γ(n + b)` for `n + a, n + b >= STIRLING_MIN`.
fn ln_gamma_ratio_large(n: f64, a: f64, b: f64) -> f64 {
    let x = n + a;
    let y = n + b;
    let d = a - b;
    (x - 0.5) * (d / y).ln_1p() + d * y.ln() - d + stirling_correction(x) - stirling_correction(y)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `Γ(n + a) / Γ(n + b)` with sign tracking.
///
/// Returns zero when `n + b` is a pole of Γ and `n + a` is not; fails when
/// `n + a` is a pole.
pub fn gamma_ratio(n: f64, a: f64, b: f64) -> Result<f64> {
    if !(n.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("non-finite argument to gamma_ratio".into()));
    }
    if is_nonpositive_integer(n + a) {
        return Err(Error::Domain("gamma_ratio: numerator argument is a pole".into()));
    }
    if is_nonpositive_integer(n + b) {
        return Ok(0.0);
    }
    if a == b {
        return Ok(1.0);
    }
    let lowest = (n + a).min(n + b);
    let shift = if lowest >= STIRLING_MIN { 0.0 } else { (STIRLING_MIN - lowest).ceil() };
    let mut prod = 1.0;
    let mut i = 0.0;
    while i < shift {
        prod *= (n + b + i) / (n + a + i);
        i += 1.0;
    }
    Ok(prod * ln_gamma_ratio_large(n + shift, a, b).exp())
}

/// Euler's Gamma function (not intended for arguments beyond ~170).
pub fn gamma(x: f64) -> Result<f64> {
    gamma_ratio(0.0, x, 1.0)
}

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.round() {
        return 0.0;
    }
    // reduce to [-1, 1]
    let r = x - 2.0 * (x / 2.0).round();
    let pi = core::f64::consts::PI;
    if r > 0.5 {
        (pi * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(pi * (1.0 + r)).sin()
    } else {
        (pi * r).sin()
    }
}

/// Distance from `x` to the nearest integer.
pub fn integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Binomial coefficient as f64 (exact while the value fits in 53 bits).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Binomial coefficient as i128 (exact; panics on overflow in debug builds).
pub fn binomial_i128(n: u64, k: u64) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5).unwrap() - core::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-12);
        assert!((gamma(-0.5).unwrap() + 2.0 * core::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!(gamma(-2.0).is_err());
    }

    #[test]
    fn large_ratio_keeps_offset() {
        // Γ(n + 1/2) / Γ(n) ~ sqrt(n) (1 - 1/(8n) + ...)
        let n = 1.0e8;
        let r = gamma_ratio(n, 0.5, 0.0).unwrap();
        let expected = n.sqrt() * (1.0 - 1.0 / (8.0 * n));
        assert!((r / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pole_in_denominator_gives_zero() {
        assert_eq!(gamma_ratio(0.0, 0.5, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn sin_pi_integers_vanish() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert!((sin_pi(2.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(1.5) + 1.0).abs() < 1e-16);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial_i128(60, 30), 118264581564861424);
        assert_eq!(binomial(3, 5), 0.0);
    }
}
