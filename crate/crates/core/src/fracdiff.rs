//! Fractional forward differences `(1 - ∇)^a Λ_n = sum_j k^{-a}(j) Λ_{j+n}`,
//! Cesàro means, the discrete Taylor formula and the composition checks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::cesaro::{cesaro_coefficients, cesaro_number_gamma};
use crate::error::{Error, Result};
use crate::extrapolate::{merge_ladders, richardson};
use crate::sequence::{Growth, RealSequence};
use crate::series::envelope_sum;
use crate::special::{binomial, binomial_i128, gamma, Compensated};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Partial sums with a certified tail bound, or a finite sum.
    Direct,
    /// Partial sums extrapolated along a geometric checkpoint sequence.
    Extrapolated,
    Abel,
    Cesaro(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Summable,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub value: f64,
    pub method: Method,
    pub terms_used: u64,
    /// Certified bound for `Direct`, error estimate otherwise.
    pub tail_bound: f64,
    pub status: Status,
    pub certified: bool,
}

impl ConvergenceReport {
    fn exact(value: f64, terms: u64) -> Self {
        Self { value, method: Method::Direct, terms_used: terms, tail_bound: 0.0, status: Status::Converged, certified: true }
    }
}

/// Summation method requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumMethod {
    Direct,
    Abel,
    Cesaro(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracDiffOptions {
    pub tol: f64,
    pub budget: u64,
    pub method: SumMethod,
}

impl FracDiffOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, budget: DEFAULT_BUDGET, method: SumMethod::Direct }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn method(mut self, method: SumMethod) -> Self {
        self.method = method;
        self
    }
}

fn positive_integer(a: f64) -> Option<u64> {
    if a > 0.0 && a == a.round() {
        Some(a as u64)
    } else {
        None
    }
}

/// `(1 - ∇)^a Λ_n` by direct summation.
pub fn frac_diff(a: f64, seq: &RealSequence, n: u64, tol: f64) -> Result<ConvergenceReport> {
    frac_diff_with(a, seq, n, &FracDiffOptions::new(tol))
}

pub fn frac_diff_with(a: f64, seq: &RealSequence, n: u64, opts: &FracDiffOptions) -> Result<ConvergenceReport> {
    if !a.is_finite() {
        return Err(Error::Domain("frac_diff: order must be finite".into()));
    }
    if !(opts.tol > 0.0) || opts.budget == 0 {
        return Err(Error::Domain("frac_diff: need tol > 0 and budget >= 1".into()));
    }
    if a == 0.0 {
        return Ok(ConvergenceReport::exact(seq.value(n), 1));
    }
    if let Some(q) = positive_integer(a) {
        return Ok(integer_difference(q, seq, n));
    }
    if let Some(last) = seq.support() {
        return Ok(finite_support_sum(a, seq, n, last));
    }
    match opts.method {
        SumMethod::Direct => direct(a, seq, n, opts),
        SumMethod::Abel => abel(a, seq, n, opts),
        SumMethod::Cesaro(tau) => cesaro_route(a, seq, n, tau, opts),
    }
}

fn integer_difference(q: u64, seq: &RealSequence, n: u64) -> ConvergenceReport {
    let mut acc = Compensated::new();
    for (j, v) in seq.iter_from(n).take(q as usize + 1).enumerate() {
        let c = binomial(q, j as u64);
        acc.add(if j % 2 == 0 { c * v } else { -c * v });
    }
    ConvergenceReport::exact(acc.value(), q + 1)
}

fn finite_support_sum(a: f64, seq: &RealSequence, n: u64, last: u64) -> ConvergenceReport {
    if n > last {
        return ConvergenceReport::exact(0.0, 0);
    }
    let len = (last - n + 1) as usize;
    let k = cesaro_coefficients(-a, len);
    let mut acc = Compensated::new();
    for (kj, v) in k.iter().zip(seq.iter_from(n)) {
        acc.add(kj * v);
    }
    ConvergenceReport::exact(acc.value(), len as u64)
}

/// `C` with `|k^{-a}(j)| <= C j^{-a-1}` for all `j >= from` (non-integer `a`).
fn kernel_envelope(a: f64, from: u64) -> f64 {
    let limit = gamma(-a).map(|g| 1.0 / g.abs()).unwrap_or(0.0);
    let at = cesaro_number_gamma(-a, from).map(|k| k.abs()).unwrap_or(f64::INFINITY);
    2.0 * limit.max(at * (from as f64).powf(a + 1.0))
}

/// Index from which the kernel envelope is trusted.
fn envelope_start(a: f64) -> u64 {
    let s = 4.0 * (a.abs() + 1.0) * (a.abs() + 1.0);
    (s.ceil() as u64).max(64)
}

/// Bound on `sum_{j >= big_n} |k^{-a}(j) Λ_{j+n}| r^j`.
fn tail_bound(a: f64, g: Growth, n: u64, big_n: u64, r: f64) -> f64 {
    if g.constant == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let bn = big_n as f64;
    let shift = (1.0 + (nf + 1.0) / bn).powf(g.exponent.max(0.0));
    let geo = if g.ratio == 1.0 { 1.0 } else { g.ratio.powf(nf) };
    kernel_envelope(a, big_n) * g.constant * shift * geo * envelope_sum(g.exponent - a - 1.0, g.ratio * r, big_n as usize)
}

fn is_convergent(a: f64, g: Growth) -> bool {
    g.constant == 0.0 || g.ratio < 1.0 || g.exponent < a
}

fn direct(a: f64, seq: &RealSequence, n: u64, opts: &FracDiffOptions) -> Result<ConvergenceReport> {
    let g = seq.growth();
    if !is_convergent(a, g) {
        return Err(Error::Divergence(format!(
            "sum of k^(-{a})(j) Λ_(j+n) needs growth exponent below {a}, declared {}",
            g.exponent
        )));
    }
    let mut big_n = envelope_start(a);
    let mut bound = tail_bound(a, g, n, big_n, 1.0);
    while bound >= opts.tol && big_n <= opts.budget {
        big_n *= 2;
        bound = tail_bound(a, g, n, big_n, 1.0);
    }
    if bound < opts.tol && big_n <= opts.budget.max(envelope_start(a)) {
        let value = partial_sum(a, seq, n, big_n);
        return Ok(ConvergenceReport {
            value,
            method: Method::Direct,
            terms_used: big_n,
            tail_bound: bound,
            status: Status::Converged,
            certified: true,
        });
    }
    if g.ratio < 1.0 {
        return Err(Error::Tolerance { requested: opts.tol, reached: bound, terms: opts.budget as usize });
    }
    extrapolated(a, seq, n, opts)
}

fn partial_sum(a: f64, seq: &RealSequence, n: u64, terms: u64) -> f64 {
    let mut acc = Compensated::new();
    let mut k = 1.0;
    for (j, v) in seq.iter_from(n).take(terms as usize).enumerate() {
        if j > 0 {
            let jf = j as f64;
            k *= (jf - a - 1.0) / jf;
        }
        acc.add(k * v);
    }
    acc.value()
}

/// Partial sums at `n0 * 2^k`, extrapolated in `1/N` with the ladder `a - p + i`.
fn extrapolated(a: f64, seq: &RealSequence, n: u64, opts: &FracDiffOptions) -> Result<ConvergenceReport> {
    let n0 = 256u64.max(16 * (n + 1));
    let mut levels = 0u32;
    while n0 << (levels + 1) <= opts.budget {
        levels += 1;
    }
    if levels < 3 {
        return Err(Error::Tolerance { requested: opts.tol, reached: f64::INFINITY, terms: opts.budget as usize });
    }
    let last = n0 << levels;
    let mut checkpoints = Vec::with_capacity(levels as usize + 1);
    let mut next = n0;
    let mut acc = Compensated::new();
    let mut k = 1.0;
    for (j, v) in seq.iter_from(n).take(last as usize).enumerate() {
        if j > 0 {
            let jf = j as f64;
            k *= (jf - a - 1.0) / jf;
        }
        acc.add(k * v);
        if j as u64 + 1 == next {
            checkpoints.push(acc.value());
            next *= 2;
        }
    }
    let p = seq.growth().exponent;
    let ladder = merge_ladders(&[(a - p, levels as usize)], levels as usize);
    let est = richardson(&checkpoints, &ladder)
        .ok_or(Error::Tolerance { requested: opts.tol, reached: f64::INFINITY, terms: last as usize })?;
    if !(est.error < opts.tol) {
        return Err(Error::Tolerance { requested: opts.tol, reached: est.error, terms: last as usize });
    }
    Ok(ConvergenceReport {
        value: est.value,
        method: Method::Extrapolated,
        terms_used: last,
        tail_bound: est.error,
        status: Status::Converged,
        certified: false,
    })
}

/// Abel means `sum_j k^{-a}(j) Λ_{j+n} r^j` at `r = 1 - 2^-i`, extrapolated to `r = 1`.
fn abel(a: f64, seq: &RealSequence, n: u64, opts: &FracDiffOptions) -> Result<ConvergenceReport> {
    let g = seq.growth();
    let inner_tol = opts.tol * 1e-3;
    let mut values = Vec::new();
    let mut used = 0u64;
    let mut i = 3;
    loop {
        let h = 2f64.powi(-i);
        let r = 1.0 - h;
        let mut big_n = envelope_start(a);
        while tail_bound(a, g, n, big_n, r) >= inner_tol && big_n < opts.budget {
            big_n *= 2;
        }
        if used + big_n > opts.budget || i > 40 {
            break;
        }
        used += big_n;
        let mut acc = Compensated::new();
        let mut k = 1.0;
        let mut rp = 1.0;
        for (j, v) in seq.iter_from(n).take(big_n as usize).enumerate() {
            if j > 0 {
                let jf = j as f64;
                k *= (jf - a - 1.0) / jf;
                rp *= r;
            }
            acc.add(k * rp * v);
        }
        values.push(acc.value());
        i += 1;
    }
    if values.len() < 3 {
        return Err(Error::Tolerance { requested: opts.tol, reached: f64::INFINITY, terms: used as usize });
    }
    let p = g.exponent;
    let m = values.len();
    let ladder = merge_ladders(&[(a - p, m), (1.0, m)], m);
    let est = richardson(&values, &ladder)
        .ok_or(Error::Tolerance { requested: opts.tol, reached: f64::INFINITY, terms: used as usize })?;
    if !(est.error < opts.tol) {
        return Err(Error::Tolerance { requested: opts.tol, reached: est.error, terms: used as usize });
    }
    Ok(ConvergenceReport {
        value: est.value,
        method: Method::Abel,
        terms_used: used,
        tail_bound: est.error,
        status: Status::Summable,
        certified: false,
    })
}

fn cesaro_route(a: f64, seq: &RealSequence, n: u64, tau: f64, opts: &FracDiffOptions) -> Result<ConvergenceReport> {
    let mut k = 1.0;
    let mut acc = Compensated::new();
    let partials = seq.iter_from(n).enumerate().map(move |(j, v)| {
        if j > 0 {
            let jf = j as f64;
            k *= (jf - a - 1.0) / jf;
        }
        acc.add(k * v);
        acc.value()
    });
    let mut rep = summable_limit_iter(tau, partials, opts.tol, opts.budget)?;
    rep.method = Method::Cesaro(tau);
    Ok(rep)
}

/// `C_τ s_n = (1 / k^{τ+1}(n)) sum_j k^τ(n - j) s_j`.
pub fn cesaro_mean(tau: f64, partials: &RealSequence, n: u64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain("cesaro_mean: tau must be nonnegative".into()));
    }
    let len = n as usize + 1;
    let k = cesaro_coefficients(tau, len);
    let mut acc = Compensated::new();
    for (j, s) in partials.iter_from(0).take(len).enumerate() {
        acc.add(k[len - 1 - j] * s);
    }
    let denom = cesaro_coefficients(tau + 1.0, len)[len - 1];
    Ok(acc.value() / denom)
}

/// `(C, τ)` limit of the sequence, detected by a stabilization window.
pub fn summable_limit(tau: f64, partials: &RealSequence, tol: f64, budget: u64) -> Result<ConvergenceReport> {
    let mut rep = summable_limit_iter(tau, partials.iter_from(0), tol, budget)?;
    rep.method = Method::Cesaro(tau);
    Ok(rep)
}

/// Window length for the stabilization test.
pub fn stabilization_window(budget: u64) -> usize {
    50usize.max((budget / 20) as usize)
}

fn summable_limit_iter<I: Iterator<Item = f64>>(tau: f64, partials: I, tol: f64, budget: u64) -> Result<ConvergenceReport> {
    if !(tau >= 0.0) {
        return Err(Error::Domain("summable_limit: tau must be nonnegative".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("summable_limit: tol must be positive".into()));
    }
    let window = stabilization_window(budget);
    let budget = budget as usize;
    let fail = |reached: f64, terms: usize| Err(Error::Tolerance { requested: tol, reached, terms });
    if tau == tau.round() && tau <= 32.0 {
        // integer order: τ-fold running sums
        let t = tau as usize;
        let mut cums = vec![0.0; t + 1];
        let mut denom = 1.0;
        let mut ring = vec![0.0; window];
        let mut best = f64::INFINITY;
        for (i, s) in partials.take(budget).enumerate() {
            cums[0] = s;
            for level in 1..=t {
                cums[level] += cums[level - 1];
            }
            if i > 0 {
                let nf = i as f64;
                denom *= (nf + tau) / nf;
            }
            let mean = cums[t] / denom;
            ring[i % window] = mean;
            if i + 1 >= window && (i + 1) % (window / 8).max(1) == 0 {
                let (lo, hi) = ring.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
                let spread = hi - lo;
                best = best.min(spread);
                if spread < tol {
                    return Ok(ConvergenceReport {
                        value: mean,
                        method: Method::Cesaro(tau),
                        terms_used: i as u64 + 1,
                        tail_bound: spread,
                        status: Status::Summable,
                        certified: false,
                    });
                }
            }
        }
        return fail(best, budget);
    }
    // fractional order: sampled means on the window ending at doubling checkpoints
    let mut stored: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    let mut check = 2 * window;
    for s in partials.take(budget) {
        stored.push(s);
        if stored.len() == check || stored.len() == budget {
            let end = stored.len() - 1;
            let start = end + 1 - window;
            let kt = cesaro_coefficients(tau, end + 1);
            let kt1 = cesaro_coefficients(tau + 1.0, end + 1);
            let samples = 50usize.min(window);
            let (mut lo, mut hi, mut last) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for q in 0..=samples {
                let m = start + (window - 1) * q / samples;
                let mut acc = Compensated::new();
                for (j, sj) in stored[..=m].iter().enumerate() {
                    acc.add(kt[m - j] * sj);
                }
                let mean = acc.value() / kt1[m];
                lo = lo.min(mean);
                hi = hi.max(mean);
                last = mean;
            }
            let spread = hi - lo;
            best = best.min(spread);
            if spread < tol {
                return Ok(ConvergenceReport {
                    value: last,
                    method: Method::Cesaro(tau),
                    terms_used: stored.len() as u64,
                    tail_bound: spread,
                    status: Status::Summable,
                    certified: false,
                });
            }
            check *= 2;
        }
    }
    fail(best, stored.len())
}

/// Both parts of the discrete Taylor formula and `head + tail - Λ_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorSplit {
    pub head: f64,
    pub tail: f64,
    pub residual: f64,
}

/// `Λ_n = sum_{j<k} (-1)^j C(n,j) (I-∇)^j Λ_0 + (-1)^k sum_{j<=n-k} C(n-1-j,k-1) (I-∇)^k Λ_j`.
pub fn discrete_taylor(seq: &RealSequence, k: u64, n: u64) -> Result<TaylorSplit> {
    if k == 0 || n < k {
        return Err(Error::Domain("discrete_taylor: need n >= k >= 1".into()));
    }
    let vals = seq.take(n);
    let exact = vals.iter().all(|v| v.fract() == 0.0 && v.abs() < 9.0e15) && n <= 100;
    if exact {
        let ints: Vec<i128> = vals.iter().map(|v| *v as i128).collect();
        let (head, tail) = taylor_parts_i128(&ints, k, n);
        let residual = (head + tail - ints[n as usize]) as f64;
        return Ok(TaylorSplit { head: head as f64, tail: tail as f64, residual });
    }
    let (head, tail) = taylor_parts_f64(&vals, k, n);
    Ok(TaylorSplit { head, tail, residual: head + tail - vals[n as usize] })
}

/// `(I - ∇)^j Λ_i = sum_l (-1)^l C(j,l) Λ_{i+l}`.
fn backward_i128(vals: &[i128], j: u64, i: usize) -> i128 {
    (0..=j).map(|l| {
        let c = binomial_i128(j, l) * vals[i + l as usize];
        if l % 2 == 0 { c } else { -c }
    }).sum()
}

fn taylor_parts_i128(vals: &[i128], k: u64, n: u64) -> (i128, i128) {
    let sign = |j: u64| if j % 2 == 0 { 1 } else { -1 };
    let head = (0..k).map(|j| sign(j) * binomial_i128(n, j) * backward_i128(vals, j, 0)).sum();
    let tail: i128 = (0..=n - k).map(|j| binomial_i128(n - 1 - j, k - 1) * backward_i128(vals, k, j as usize)).sum();
    (head, sign(k) * tail)
}

fn taylor_parts_f64(vals: &[f64], k: u64, n: u64) -> (f64, f64) {
    let backward = |j: u64, i: usize| {
        let mut acc = Compensated::new();
        for l in 0..=j {
            let c = binomial(j, l) * vals[i + l as usize];
            acc.add(if l % 2 == 0 { c } else { -c });
        }
        acc.value()
    };
    let sign = |j: u64| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut head = Compensated::new();
    for j in 0..k {
        head.add(sign(j) * binomial(n, j) * backward(j, 0));
    }
    let mut tail = Compensated::new();
    for j in 0..=n - k {
        tail.add(binomial(n - 1 - j, k - 1) * backward(k, j as usize));
    }
    (head.value(), sign(k) * tail.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KuttnerBranch {
    /// `s > -1`, `r >= 0`.
    A,
    /// `s > -1`, `r + s > -1`, `r + s` non-integer.
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KuttnerReport {
    pub branch: KuttnerBranch,
    pub lhs: ConvergenceReport,
    pub rhs: ConvergenceReport,
    pub agree: bool,
}

fn side_error(side: &str, e: Error) -> Error {
    match e {
        Error::Divergence(m) => Error::Divergence(format!("{side} side: {m}")),
        Error::Tolerance { requested, reached, terms } => {
            Error::Divergence(format!("{side} side: tolerance {requested:e} not reached after {terms} terms (best {reached:e})"))
        }
        other => other,
    }
}

/// Compares `(1-∇)^{r+s} Λ_n` with `(1-∇)^r [(1-∇)^s Λ]_n`.
pub fn kuttner_compose_check(r: f64, s: f64, seq: &RealSequence, n: u64, tol: f64) -> Result<KuttnerReport> {
    let branch = if s > -1.0 && r >= 0.0 {
        KuttnerBranch::A
    } else if s > -1.0 && r + s > -1.0 && (r + s).fract() != 0.0 {
        KuttnerBranch::B
    } else {
        return Err(Error::Precondition(format!("no composition theorem covers r = {r}, s = {s}")));
    };
    let inner_tol = tol * 1e-2;
    let lhs = frac_diff(r + s, seq, n, inner_tol).map_err(|e| side_error("left", e))?;
    let inner = inner_sequence(s, seq, inner_tol).map_err(|e| side_error("right", e))?;
    let rhs = frac_diff(r, &inner, n, inner_tol).map_err(|e| side_error("right", e))?;
    let agree = (lhs.value - rhs.value).abs() <= tol;
    Ok(KuttnerReport { branch, lhs, rhs, agree })
}

/// `M_i = (1-∇)^s Λ_i`, evaluated on demand, with a growth envelope fitted on samples.
fn inner_sequence(s: f64, seq: &RealSequence, tol: f64) -> Result<RealSequence> {
    let base = seq.clone();
    let eval = move |i: u64| frac_diff(s, &base, i, tol).map(|r| r.value);
    let g = seq.growth();
    let samples: Vec<u64> = (0..=16u64).chain([32, 64, 128]).collect();
    let mut vals = Vec::with_capacity(samples.len());
    for &i in &samples {
        vals.push((i, eval(i)?));
    }
    if vals.iter().all(|(_, v)| v.abs() <= tol) {
        return Ok(RealSequence::from_fn_trusted(|_| 0.0, Growth::polynomial(0.0, 0.0)));
    }
    let mut c: f64 = 0.0;
    for (i, v) in &vals {
        let b = Growth { constant: 1.0, ..g }.bound(*i);
        if b > 0.0 {
            c = c.max(v.abs() / b);
        }
    }
    let growth = Growth { constant: 2.0 * c.max(f64::MIN_POSITIVE), ..g };
    let base = seq.clone();
    Ok(RealSequence::from_fn_trusted(
        move |i| frac_diff(s, &base, i, tol).map(|r| r.value).unwrap_or(f64::NAN),
        growth,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestionAReport {
    /// `(1-∇)^a Λ_n >= -tol` for all tested `n`.
    pub precondition_met: bool,
    pub min_a: f64,
    pub values_b: Vec<f64>,
    pub min_b: f64,
    /// Precondition met and `min_b >= -tol`.
    pub holds: bool,
}

/// Evaluates `(1-∇)^a Λ_n` and `(1-∇)^b Λ_n` for `n <= horizon`.
pub fn question_a_check(a: f64, b: f64, seq: &RealSequence, horizon: u64, tol: f64) -> Result<QuestionAReport> {
    if !(0.0 < b && b < a) || b.fract() == 0.0 {
        return Err(Error::Domain("question_a_check: need 0 < b < a with b non-integer".into()));
    }
    let inner_tol = tol * 1e-2;
    let mut min_a = f64::INFINITY;
    for n in 0..=horizon {
        min_a = min_a.min(frac_diff(a, seq, n, inner_tol)?.value);
    }
    let precondition_met = min_a >= -tol;
    let mut values_b = Vec::with_capacity(horizon as usize + 1);
    for n in 0..=horizon {
        values_b.push(frac_diff(b, seq, n, inner_tol)?.value);
    }
    let min_b = values_b.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(QuestionAReport { precondition_met, min_a, values_b, min_b, holds: precondition_met && min_b >= -tol })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyCheck {
    pub is_poly: bool,
    /// `Δ^j Λ_0`, so that `p(n) = sum_j newton[j] C(n, j)`.
    pub newton: Vec<f64>,
    /// Monomial coefficients of `p`, lowest degree first.
    pub coefficients: Vec<f64>,
    pub max_residual: f64,
}

/// Fits the degree-`m` interpolant through `Λ_0..Λ_m` and measures it on `n <= horizon`.
///
/// `is_poly` when the residual is below `tol * max(1, max |Λ_n|)`.
pub fn poly_solution_check(seq: &RealSequence, m: u64, horizon: u64, tol: f64) -> Result<PolyCheck> {
    if horizon < m + 2 {
        return Err(Error::Domain("poly_solution_check: need horizon >= m + 2".into()));
    }
    let vals = seq.take(horizon);
    let mut diffs: Vec<f64> = vals[..=m as usize].to_vec();
    let mut newton = Vec::with_capacity(m as usize + 1);
    for _ in 0..=m {
        newton.push(diffs[0]);
        diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let eval = |x: f64| {
        let mut acc = Compensated::new();
        let mut c = 1.0;
        for (j, d) in newton.iter().enumerate() {
            if j > 0 {
                c *= (x - (j as f64 - 1.0)) / j as f64;
            }
            acc.add(d * c);
        }
        acc.value()
    };
    let mut max_residual: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for (i, v) in vals.iter().enumerate() {
        max_residual = max_residual.max((v - eval(i as f64)).abs());
        scale = scale.max(v.abs());
    }
    // expand sum newton[j] x(x-1)...(x-j+1)/j! into monomials
    let mut coefficients = vec![0.0; m as usize + 1];
    let mut basis = vec![1.0];
    for (j, d) in newton.iter().enumerate() {
        if j > 0 {
            let shift = j as f64 - 1.0;
            let mut next = vec![0.0; basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b / j as f64;
                next[i] -= b * shift / j as f64;
            }
            basis = next;
        }
        for (i, b) in basis.iter().enumerate() {
            coefficients[i] += d * b;
        }
    }
    Ok(PolyCheck { is_poly: max_residual <= tol * scale, newton, coefficients, max_residual })
}
