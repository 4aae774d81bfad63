//! Real Taylor-coefficient sequences with certified tails.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::cesaro::cesaro_coefficients;

/// Envelope `|f_n| <= constant * n^exponent * ratio^n`, valid for `n >= valid_from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub constant: f64,
    pub exponent: f64,
    pub ratio: f64,
    pub valid_from: usize,
}

impl TailModel {
    pub fn power_law(constant: f64, exponent: f64, valid_from: usize) -> Self {
        Self { constant, exponent, ratio: 1.0, valid_from }
    }

    pub fn bound(&self, n: usize) -> f64 {
        let x = n.max(1) as f64;
        self.constant * x.powf(self.exponent) * self.ratio.powf(n as f64)
    }

    /// True when the envelope is summable.
    pub fn is_summable(&self) -> bool {
        self.constant == 0.0 || self.ratio < 1.0 || (self.ratio == 1.0 && self.exponent < -1.0)
    }

    /// Upper bound for `sum_{n >= start} bound(n)`; infinite when not summable.
    pub fn l1_from(&self, start: usize) -> f64 {
        if self.constant == 0.0 {
            return 0.0;
        }
        self.constant * envelope_sum(self.exponent, self.ratio, start.max(1))
    }
}

/// Upper bound for `sum_{n >= start} n^p rho^n` (start >= 1).
pub(crate) fn envelope_sum(p: f64, rho: f64, start: usize) -> f64 {
    let start = start.max(1);
    let s = start as f64;
    if rho > 1.0 {
        return f64::INFINITY;
    }
    if rho == 1.0 {
        if p >= -1.0 {
            return f64::INFINITY;
        }
        // first term plus integral majorant of the decreasing remainder
        return s.powf(p) + s.powf(p + 1.0) / (-p - 1.0);
    }
    if rho <= 0.0 {
        return if start == 0 { 1.0 } else { 0.0 };
    }
    // find x0 >= start with (1 + 1/x0)^max(p,0) * rho < 1, sum explicitly up to x0
    let pp = p.max(0.0);
    let mut x0 = s;
    if pp > 0.0 {
        let need = 1.0 / ((1.0 / rho).powf(1.0 / pp) - 1.0);
        x0 = x0.max((need + 1.0).ceil());
    }
    let theta = (1.0 + 1.0 / x0).powf(pp) * rho;
    let mut acc = 0.0;
    let mut x = s;
    let mut guard = 0usize;
    while x < x0 && guard < 10_000_000 {
        acc += x.powf(p) * rho.powf(x);
        x += 1.0;
        guard += 1;
    }
    acc + x0.powf(p) * rho.powf(x0) / (1.0 - theta)
}

/// What is known about the coefficients beyond the stored window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// All coefficients beyond the window vanish.
    Zero,
    /// The coefficients obey an envelope.
    Model(TailModel),
    /// Nothing is known.
    Unknown,
}

/// A real power series `f(t) = sum f_n t^n` stored as a finite window plus
/// tail information.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries {
    coeffs: Vec<f64>,
    tail: Tail,
    total: Option<f64>,
}

impl CoefficientSeries {
    pub fn new(coeffs: Vec<f64>, tail: Tail) -> Self {
        let total = match tail {
            Tail::Zero => Some(coeffs.iter().sum()),
            _ => None,
        };
        Self { coeffs, tail, total }
    }

    /// A polynomial: finite support, total known.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs, Tail::Zero)
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    /// Records the full sum `f(1)` when it is known in closed form.
    pub fn with_total(mut self, total: Option<f64>) -> Self {
        self.total = total;
        self
    }

    /// Coefficients of `(1 - r t)^(-q)` on `len` indices: `k^q(n) r^n`.
    pub fn geometric_kernel(r: f64, q: f64, len: usize) -> Self {
        let len = len.max(1);
        let base = cesaro_coefficients(q, len);
        let mut coeffs = Vec::with_capacity(len);
        let mut pow = 1.0;
        for k in base {
            coeffs.push(k * pow);
            pow *= r;
        }
        let tail = if r == 0.0 {
            Tail::Zero
        } else {
            // k^q(n) <= C n^(q-1) for q >= 1 with C = max over the window
            let p = (q - 1.0).max(0.0);
            let mut c: f64 = 1.0;
            for (n, v) in coeffs.iter().enumerate().skip(1) {
                let k = v / r.powf(n as f64);
                c = c.max(k / (n as f64).powf(p));
            }
            Tail::Model(TailModel { constant: 2.0 * c, exponent: p, ratio: r.abs(), valid_from: len })
        };
        let total = if r.abs() < 1.0 { Some((1.0 - r).powf(-q)) } else { None };
        Self { coeffs, tail, total }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// `f(1)`, when known.
    pub fn total(&self) -> Option<f64> {
        self.total
    }

    /// Coefficient `f_n`, or `None` beyond the window unless the tail is zero.
    pub fn get(&self, n: usize) -> Option<f64> {
        match self.coeffs.get(n) {
            Some(v) => Some(*v),
            None if self.tail == Tail::Zero => Some(0.0),
            None => None,
        }
    }

    /// True when all coefficients beyond the window vanish.
    pub fn is_finite(&self) -> bool {
        self.tail == Tail::Zero
    }

    /// `[f]_N`.
    pub fn truncate(&self, n: usize) -> Self {
        let end = (n + 1).min(self.coeffs.len());
        Self::polynomial(self.coeffs[..end].to_vec())
    }

    /// l1 norm of the stored window.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Upper bound for `sum_{n >= start} |f_n|` over the whole series.
    pub fn l1_from(&self, start: usize) -> f64 {
        let window: f64 = self.coeffs.iter().skip(start).map(|c| c.abs()).sum();
        window + self.tail_l1(start.max(self.coeffs.len()))
    }

    /// Upper bound on the l1 norm of the series beyond the window, from index `start`.
    fn tail_l1(&self, start: usize) -> f64 {
        match self.tail {
            Tail::Zero => 0.0,
            Tail::Model(m) => {
                if start < m.valid_from {
                    f64::INFINITY
                } else {
                    m.l1_from(start)
                }
            }
            Tail::Unknown => f64::INFINITY,
        }
    }

    /// Full l1 norm bound (window plus tail); infinite when not certified.
    pub fn wiener_norm_bound(&self) -> f64 {
        self.l1_from(0)
    }

    /// True when the whole coefficient sequence is certified absolutely summable.
    pub fn in_wiener_algebra(&self) -> bool {
        self.wiener_norm_bound().is_finite()
    }

    /// Evaluates the stored window at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `|f|`, the series of absolute values.
    pub fn abs(&self) -> Self {
        let total = if self.tail == Tail::Zero { Some(self.l1_norm()) } else { None };
        Self { coeffs: self.coeffs.iter().map(|c| c.abs()).collect(), tail: self.tail, total }
    }

    pub fn scale(&self, c: f64) -> Self {
        let tail = match self.tail {
            Tail::Model(m) => Tail::Model(TailModel { constant: m.constant * c.abs(), ..m }),
            t => t,
        };
        Self { coeffs: self.coeffs.iter().map(|v| v * c).collect(), tail, total: self.total.map(|t| t * c) }
    }

    /// Cauchy product. The window is exact up to the shorter input window
    /// (longer when one factor is a polynomial).
    pub fn product(&self, other: &Self) -> Self {
        let len = match (self.tail, other.tail) {
            (Tail::Zero, Tail::Zero) => self.len() + other.len() - 1,
            (Tail::Zero, _) => other.len(),
            (_, Tail::Zero) => self.len(),
            _ => self.len().min(other.len()),
        };
        let mut coeffs = vec![0.0; len];
        for (n, slot) in coeffs.iter_mut().enumerate() {
            let mut acc = crate::special::Compensated::new();
            let lo = n.saturating_sub(other.len().saturating_sub(1));
            let hi = n.min(self.len().saturating_sub(1));
            for i in lo..=hi {
                if let (Some(a), Some(b)) = (self.coeffs.get(i), other.coeffs.get(n - i)) {
                    acc.add(a * b);
                }
            }
            *slot = acc.value();
        }
        let tail = product_tail(self, other, len);
        let total = match (self.total, other.total) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Self { coeffs, tail, total }
    }

    /// `f >= g` coefficientwise on the common window.
    pub fn dominates(&self, other: &Self) -> bool {
        let n = self.len().max(other.len());
        (0..n).all(|i| match (self.get(i), other.get(i)) {
            (Some(a), Some(b)) => a >= b,
            _ => true,
        })
    }

    /// `f > g`: dominates and `f_0 > g_0`.
    pub fn strictly_dominates(&self, other: &Self) -> bool {
        self.dominates(other) && self.get(0).unwrap_or(0.0) > other.get(0).unwrap_or(0.0)
    }

    /// `f > 0` on the stored window.
    pub fn is_positive(&self) -> bool {
        self.coeffs.first().is_some_and(|c| *c > 0.0) && self.coeffs.iter().all(|c| *c >= 0.0)
    }
}

fn product_tail(f: &CoefficientSeries, g: &CoefficientSeries, len: usize) -> Tail {
    match (f.tail, g.tail) {
        (Tail::Zero, Tail::Zero) => Tail::Zero,
        (Tail::Zero, Tail::Model(m)) => poly_times_model(f, m, len),
        (Tail::Model(m), Tail::Zero) => poly_times_model(g, m, len),
        (Tail::Model(mf), Tail::Model(mg)) if mf.ratio == 1.0 && mg.ratio == 1.0 => {
            let nf = f.wiener_norm_bound();
            let ng = g.wiener_norm_bound();
            if !nf.is_finite() || !ng.is_finite() || mf.exponent > 0.0 || mg.exponent > 0.0 {
                return Tail::Unknown;
            }
            // split the convolution at n/2; both halves use envelopes valid from len/2
            let cf = widened_constant(f, mf, len / 2);
            let cg = widened_constant(g, mg, len / 2);
            let constant = nf * cg * 2f64.powf(-mg.exponent) + ng * cf * 2f64.powf(-mf.exponent);
            Tail::Model(TailModel {
                constant,
                exponent: mf.exponent.max(mg.exponent),
                ratio: 1.0,
                valid_from: len.max(2 * mf.valid_from.max(mg.valid_from)),
            })
        }
        _ => Tail::Unknown,
    }
}

/// Constant `C` with `|f_j| <= C j^p` for every `j >= from`.
fn widened_constant(f: &CoefficientSeries, m: TailModel, from: usize) -> f64 {
    let mut c = m.constant;
    for j in from.max(1)..f.len() {
        c = c.max(f.coeffs[j].abs() / (j as f64).powf(m.exponent));
    }
    c
}

fn poly_times_model(poly: &CoefficientSeries, m: TailModel, len: usize) -> Tail {
    let deg = poly.len().saturating_sub(1);
    let norm = poly.l1_norm();
    let ratio_factor = if m.ratio > 0.0 { m.ratio.powf(-(deg as f64)) } else { 0.0 };
    let constant = m.constant * norm * ratio_factor * 2f64.powf((-m.exponent).max(0.0));
    Tail::Model(TailModel {
        constant,
        exponent: m.exponent,
        ratio: m.ratio,
        valid_from: len.max(2 * deg).max(m.valid_from + deg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_and_norm() {
        let f = CoefficientSeries::polynomial(vec![1.0, -2.0, 3.0]);
        assert_eq!(f.truncate(1).coeffs(), &[1.0, -2.0]);
        assert_eq!(f.l1_norm(), 6.0);
        assert_eq!(f.total(), Some(2.0));
        assert_eq!(f.eval(2.0), 1.0 - 4.0 + 12.0);
    }

    #[test]
    fn order_relations() {
        let f = CoefficientSeries::polynomial(vec![1.0, 0.5]);
        let g = CoefficientSeries::polynomial(vec![1.0, 0.25]);
        assert!(f.dominates(&g));
        assert!(!f.strictly_dominates(&g));
        let zero = CoefficientSeries::constant(0.0);
        assert!(f.strictly_dominates(&zero));
        assert!(f.is_positive());
    }

    #[test]
    fn product_of_polynomials() {
        let f = CoefficientSeries::polynomial(vec![1.0, -1.0]);
        let g = CoefficientSeries::polynomial(vec![1.0, 1.0]);
        let h = f.product(&g);
        assert_eq!(h.coeffs(), &[1.0, 0.0, -1.0]);
        assert_eq!(h.total(), Some(0.0));
    }

    #[test]
    fn geometric_kernel_total_and_tail() {
        let g = CoefficientSeries::geometric_kernel(0.5, 1.0, 20);
        assert!((g.coeffs()[3] - 0.125).abs() < 1e-15);
        assert!((g.total().unwrap() - 2.0).abs() < 1e-15);
        let exact_tail: f64 = (20..200).map(|n| 0.5f64.powi(n)).sum();
        assert!(g.l1_from(20) >= exact_tail);
    }

    #[test]
    fn envelope_sum_is_an_upper_bound() {
        let exact: f64 = (10..200_000).map(|n| (n as f64).powf(-1.5)).sum();
        assert!(envelope_sum(-1.5, 1.0, 10) >= exact);
        let exact: f64 = (5..5000).map(|n| (n as f64).powf(2.0) * 0.9f64.powi(n as i32)).sum();
        assert!(envelope_sum(2.0, 0.9, 5) >= exact);
        assert!(envelope_sum(-0.5, 1.0, 3).is_infinite());
    }
}
