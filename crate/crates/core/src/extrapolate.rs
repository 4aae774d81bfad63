//! Richardson extrapolation on a geometric step sequence.

use alloc::vec::Vec;
use num_traits::Float;

/// Limit estimate and the spread used as its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
}

/// Extrapolates `values[k] = S(h_k)` with `h_{k+1} = h_k / 2` and
/// `S(h) = S + sum_i c_i h^{exponents[i]}` to `h -> 0`.
///
/// Every elimination order is tried; the one whose last two estimates
/// agree best wins.
pub fn richardson(values: &[f64], exponents: &[f64]) -> Option<Extrapolated> {
    let k = values.len();
    if k < 2 {
        return None;
    }
    let mut best = Extrapolated { value: values[k - 1], error: (values[k - 1] - values[k - 2]).abs() };
    let mut column: Vec<f64> = values.to_vec();
    for &e in exponents.iter().take(k - 2) {
        let f = 2f64.powf(-e);
        let next: Vec<f64> = column.windows(2).map(|w| (w[1] - f * w[0]) / (1.0 - f)).collect();
        let m = next.len();
        if m >= 2 {
            let cand = Extrapolated { value: next[m - 1], error: (next[m - 1] - next[m - 2]).abs() };
            if cand.error.is_finite() && cand.error < best.error {
                best = cand;
            }
        }
        column = next;
    }
    Some(best)
}

/// Sorted positive exponents merged from the given ladders, duplicates dropped.
pub fn merge_ladders(ladders: &[(f64, usize)], count: usize) -> Vec<f64> {
    let mut all: Vec<f64> = ladders
        .iter()
        .flat_map(|&(start, len)| (0..len).map(move |i| start + i as f64))
        .filter(|e| *e > 1e-12)
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    all.truncate(count);
    all
}
