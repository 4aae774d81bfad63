//! Cesàro numbers `k^a(n)`, the Taylor coefficients of `(1 - t)^(-a)`.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::series::{CoefficientSeries, Tail, TailModel};
use crate::special::{binomial, gamma_ratio};

/// Beyond this index the recurrence hands over to the Gamma ratio.
const RECURRENCE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CesaroParams {
    pub order: f64,
    pub length: usize,
}

impl CesaroParams {
    pub fn new(order: f64, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::Domain("CesaroParams: length must be at least 1".into()));
        }
        if !order.is_finite() {
            return Err(Error::Domain("CesaroParams: order must be finite".into()));
        }
        Ok(Self { order, length })
    }
}

fn nonpositive_integer(a: f64) -> Option<u64> {
    if a <= 0.0 && a == a.round() {
        Some((-a) as u64)
    } else {
        None
    }
}

/// `k^a(n)`.
///
/// For `a = -q` with `q` a nonnegative integer the exact values
/// `(-1)^n C(q, n)` are returned.
pub fn cesaro_number(a: f64, n: u64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::Domain("cesaro_number: non-finite order".into()));
    }
    if let Some(q) = nonpositive_integer(a) {
        let b = binomial(q, n);
        return Ok(if n % 2 == 0 { b } else { -b });
    }
    if n <= RECURRENCE_LIMIT {
        let mut k = 1.0;
        for j in 1..=n {
            let j = j as f64;
            k *= (j + a - 1.0) / j;
        }
        return Ok(k);
    }
    cesaro_number_gamma(a, n)
}

/// `k^a(n) = Γ(n + a) / (Γ(a) Γ(n + 1))` via Gamma ratios.
pub fn cesaro_number_gamma(a: f64, n: u64) -> Result<f64> {
    if nonpositive_integer(a).is_some() {
        return Err(Error::Domain("cesaro_number_gamma: order is a nonpositive integer".into()));
    }
    let num = gamma_ratio(n as f64, a, 1.0)?;
    let den = gamma_ratio(0.0, a, 1.0)?;
    Ok(num / den)
}

/// `k^a(0..len)` by the recurrence.
pub fn cesaro_coefficients(a: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut k = 1.0;
    for j in 0..len {
        if j > 0 {
            let jf = j as f64;
            k *= (jf + a - 1.0) / jf;
        }
        out.push(k);
    }
    out
}

/// Coefficients `k^a(0..length)` with a power-law tail model of exponent `a - 1`.
///
/// The constant is twice the largest `|k^a(n)| n^(1-a)` over the last tenth
/// of the window.
pub fn cesaro_sequence(params: CesaroParams) -> CoefficientSeries {
    let a = params.order;
    let coeffs = cesaro_coefficients(a, params.length);
    let total = if a < 0.0 {
        Some(0.0)
    } else if a == 0.0 {
        Some(1.0)
    } else {
        None
    };
    if let Some(q) = nonpositive_integer(a) {
        if (q as usize) < params.length {
            return CoefficientSeries::polynomial(coeffs[..=q as usize].to_vec());
        }
    }
    let len = coeffs.len();
    let start = (len - len / 10).clamp(1, len.max(2) - 1);
    let mut c: f64 = 0.0;
    for (n, k) in coeffs.iter().enumerate().skip(start) {
        c = c.max(k.abs() * (n as f64).powf(1.0 - a));
    }
    if len <= 1 {
        c = 1.0;
    }
    let tail = Tail::Model(TailModel::power_law(2.0 * c, a - 1.0, len));
    CoefficientSeries::new(coeffs, tail).with_total(total)
}

/// `((n + 1)^(a-1) / Γ(a), n^(a-1) / Γ(a))` for `0 < a <= 1`, `n >= 1`.
pub fn gautschi_bounds(a: f64, n: u64) -> Result<(f64, f64)> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain("gautschi_bounds: order must lie in (0, 1]".into()));
    }
    if n == 0 {
        return Err(Error::Domain("gautschi_bounds: n must be positive".into()));
    }
    let ga = gamma_ratio(0.0, a, 1.0)?;
    let nf = n as f64;
    Ok(((nf + 1.0).powf(a - 1.0) / ga, nf.powf(a - 1.0) / ga))
}
