//! Real sequences indexed by the nonnegative integers, with a declared growth bound.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

use crate::cesaro::cesaro_number;
use crate::error::{Error, Result};
use crate::special::gamma_ratio;

/// Envelope `|Λ_n| <= constant * (n + 1)^exponent * ratio^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub constant: f64,
    pub exponent: f64,
    pub ratio: f64,
}

impl Growth {
    pub fn polynomial(constant: f64, exponent: f64) -> Self {
        Self { constant, exponent, ratio: 1.0 }
    }

    pub fn geometric(constant: f64, exponent: f64, ratio: f64) -> Self {
        Self { constant, exponent, ratio }
    }

    pub fn bound(&self, n: u64) -> f64 {
        if self.constant == 0.0 {
            return 0.0;
        }
        let nf = n as f64;
        let geo = if self.ratio == 1.0 { 1.0 } else { self.ratio.powf(nf) };
        self.constant * (nf + 1.0).powf(self.exponent) * geo
    }
}

type Eval = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Func(Eval),
    Values(Arc<[f64]>),
    Geometric { scale: f64, ratio: f64 },
    Polynomial(Arc<[f64]>),
    Cesaro { order: f64, offset: u64, scale: f64 },
    Alternating,
    Combination(Arc<[(f64, RealSequence)]>),
}

/// A real sequence `Λ_0, Λ_1, ...` with a growth envelope.
#[derive(Clone)]
pub struct RealSequence {
    source: Source,
    growth: Growth,
    support: Option<u64>,
}

impl fmt::Debug for RealSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Func(_) => "func",
            Source::Values(_) => "values",
            Source::Geometric { .. } => "geometric",
            Source::Polynomial(_) => "polynomial",
            Source::Cesaro { .. } => "cesaro",
            Source::Alternating => "alternating",
            Source::Combination(_) => "combination",
        };
        f.debug_struct("RealSequence")
            .field("kind", &kind)
            .field("growth", &self.growth)
            .field("support", &self.support)
            .finish()
    }
}

/// Indices at which declared growth is spot-checked.
fn spot_indices() -> impl Iterator<Item = u64> {
    (0..=32u64).chain((6..=12).map(|k| 1u64 << k))
}

impl RealSequence {
    fn checked(self) -> Result<Self> {
        let g = self.growth;
        if !(g.constant >= 0.0 && g.ratio >= 0.0 && g.ratio <= 1.0 && g.exponent.is_finite()) {
            return Err(Error::Domain("growth: need constant >= 0 and ratio in [0, 1]".into()));
        }
        for n in spot_indices() {
            if self.support.is_some_and(|s| n > s) {
                break;
            }
            let v = self.value(n);
            if !v.is_finite() {
                return Err(Error::Domain(alloc::format!("sequence is not finite at index {n}")));
            }
            let b = g.bound(n);
            if v.abs() > b * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::Domain(alloc::format!(
                    "declared growth violated at index {n}: |{v}| > {b}"
                )));
            }
        }
        Ok(self)
    }

    /// Arbitrary evaluator with a declared growth bound (spot-checked).
    pub fn from_fn<F>(f: F, growth: Growth) -> Result<Self>
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self { source: Source::Func(Arc::new(f)), growth, support: None }.checked()
    }

    /// Evaluator without the growth spot-check; the caller vouches for `growth`.
    pub(crate) fn from_fn_trusted<F>(f: F, growth: Growth) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self { source: Source::Func(Arc::new(f)), growth, support: None }
    }

    /// Finitely supported sequence; entries beyond the slice are zero.
    pub fn from_values(values: Vec<f64>) -> Self {
        let constant = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let support = Some(values.len().saturating_sub(1) as u64);
        let values: Arc<[f64]> = values.into();
        Self { source: Source::Values(values), growth: Growth::polynomial(constant, 0.0), support }
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(alloc::vec![c])
    }

    /// `scale * ratio^n` for `0 <= ratio <= 1`.
    pub fn geometric(scale: f64, ratio: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::Domain("geometric: ratio must lie in [0, 1]".into()));
        }
        Ok(Self {
            source: Source::Geometric { scale, ratio },
            growth: Growth::geometric(scale.abs(), 0.0, ratio),
            support: None,
        })
    }

    /// `p(n) = sum c_i n^i`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        // |p(n)| <= sum |c_i| (n+1)^i <= (sum |c_i|) (n+1)^deg
        let constant: f64 = coeffs.iter().map(|c| c.abs()).sum();
        let degree = coeffs.len().saturating_sub(1) as f64;
        Self {
            source: Source::Polynomial(coeffs.into()),
            growth: Growth::polynomial(constant, degree),
            support: None,
        }
    }

    /// `scale * k^order(n + offset)` for `order > 0`.
    pub fn cesaro(order: f64, offset: u64, scale: f64) -> Result<Self> {
        if !(order > 0.0) {
            return Err(Error::Domain("cesaro sequence: order must be positive".into()));
        }
        // k^s(n+m) <= C_s (n+m+1)^(s-1) <= C_s (m+1)^max(s-1,0) (n+1)^(s-1)
        let p = order - 1.0;
        let g = gamma_ratio(0.0, order, 1.0)?;
        let c_s = if order >= 1.0 {
            order.powf(order - 1.0) / g
        } else {
            (2f64.powf(1.0 - order) / g).max(1.0)
        };
        let shift = (offset as f64 + 1.0).powf(p.max(0.0));
        Ok(Self {
            source: Source::Cesaro { order, offset, scale },
            growth: Growth::polynomial(scale.abs() * c_s * shift, p),
            support: None,
        })
    }

    /// `(-1)^n`.
    pub fn alternating() -> Self {
        Self { source: Source::Alternating, growth: Growth::polynomial(1.0, 0.0), support: None }
    }

    /// `sum c_i Λ^(i)`.
    pub fn combination(terms: Vec<(f64, RealSequence)>) -> Self {
        let constant = terms.iter().map(|(c, s)| c.abs() * s.growth.constant).sum();
        let exponent = terms.iter().map(|(_, s)| s.growth.exponent).fold(f64::NEG_INFINITY, f64::max);
        let ratio = terms.iter().map(|(_, s)| s.growth.ratio).fold(0.0, f64::max);
        let support = terms
            .iter()
            .map(|(_, s)| s.support)
            .try_fold(0u64, |m, s| s.map(|s| m.max(s)));
        let exponent = if exponent.is_finite() { exponent } else { 0.0 };
        Self { source: Source::Combination(terms.into()), growth: Growth { constant, exponent, ratio }, support }
    }

    /// Replaces the growth envelope (spot-checked).
    pub fn with_growth(mut self, growth: Growth) -> Result<Self> {
        self.growth = growth;
        self.checked()
    }

    /// Declares that entries beyond `last` vanish.
    pub fn with_support(mut self, last: u64) -> Self {
        self.support = Some(last);
        self
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    /// Last index that may be nonzero, when finite.
    pub fn support(&self) -> Option<u64> {
        self.support
    }

    pub fn value(&self, n: u64) -> f64 {
        if self.support.is_some_and(|s| n > s) {
            return 0.0;
        }
        match &self.source {
            Source::Func(f) => f(n),
            Source::Values(v) => v.get(n as usize).copied().unwrap_or(0.0),
            Source::Geometric { scale, ratio } => scale * ratio.powf(n as f64),
            Source::Polynomial(c) => {
                let x = n as f64;
                c.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            Source::Cesaro { order, offset, scale } => {
                let idx = n + offset;
                let k = if idx <= 256 {
                    cesaro_number(*order, idx)
                } else {
                    crate::cesaro::cesaro_number_gamma(*order, idx)
                };
                scale * k.unwrap_or(f64::NAN)
            }
            Source::Alternating => {
                if n % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Source::Combination(terms) => terms.iter().map(|(c, s)| c * s.value(n)).sum(),
        }
    }

    /// Iterator over `Λ_start, Λ_start+1, ...`; uses recurrences where available.
    pub fn iter_from(&self, start: u64) -> SeqIter<'_> {
        let state = match &self.source {
            Source::Geometric { .. } | Source::Cesaro { .. } => IterState::Running(self.value(start)),
            Source::Combination(terms) => {
                IterState::Parts(terms.iter().map(|(c, s)| (*c, s.iter_from(start))).collect())
            }
            _ => IterState::Plain,
        };
        SeqIter { seq: self, n: start, state }
    }

    /// `Λ_0..=Λ_last` collected.
    pub fn take(&self, last: u64) -> Vec<f64> {
        self.iter_from(0).take(last as usize + 1).collect()
    }
}

enum IterState<'a> {
    Plain,
    Running(f64),
    Parts(Vec<(f64, SeqIter<'a>)>),
}

/// Sequential evaluator; see [`RealSequence::iter_from`].
pub struct SeqIter<'a> {
    seq: &'a RealSequence,
    n: u64,
    state: IterState<'a>,
}

impl Iterator for SeqIter<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let n = self.n;
        self.n += 1;
        if self.seq.support.is_some_and(|s| n > s) {
            return Some(0.0);
        }
        let out = match &mut self.state {
            IterState::Plain => self.seq.value(n),
            IterState::Running(cur) => {
                let v = *cur;
                *cur = match &self.seq.source {
                    Source::Geometric { ratio, .. } => v * ratio,
                    Source::Cesaro { order, offset, .. } => {
                        let idx = (n + offset + 1) as f64;
                        // refresh from the closed form now and then to stop drift
                        if (n + 1) % 4096 == 0 {
                            self.seq.value(n + 1)
                        } else {
                            v * (idx + order - 1.0) / idx
                        }
                    }
                    _ => unreachable!(),
                };
                v
            }
            IterState::Parts(parts) => parts.iter_mut().map(|(c, it)| *c * it.next().unwrap_or(0.0)).sum(),
        };
        Some(out)
    }
}
