//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria that cannot hold as stated are still evaluated and reported as
//! FAIL; they are listed in `KNOWN_INFEASIBLE` so that the process only exits
//! non-zero on unexpected failures.

use std::time::Instant;

use fracop_core::cesaro::{cesaro_coefficients, cesaro_number, cesaro_number_gamma, cesaro_sequence, gautschi_bounds, CesaroParams};
use fracop_core::fracdiff::{discrete_taylor, frac_diff, frac_diff_with, poly_solution_check, question_a_check, FracDiffOptions, SumMethod};
use fracop_core::linalg::{self, c, op_norm, random_contraction, random_vector, seeded, CMatrix};
use fracop_core::model::{build_model, counterexample_gap, u_coeff, u_decay_scan, u_row};
use fracop_core::operator::{compose_check, hereditary_apply, FiniteOperator};
use fracop_core::sequence::RealSequence;
use fracop_core::series::CoefficientSeries;
use fracop_core::shifts::{classify_shift, frac_diff_cesaro_closed, power_norm_sequence, truncate, ShiftSpec, SignVerdict};
use fracop_core::similarity::verify_similarity;
use rand_core::RngCore;

const KNOWN_INFEASIBLE: [u32; 2] = [8, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn off_integer_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64)
        .filter(|s| (s - s.round()).abs() > 1e-3)
        .collect()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for a in [0.5, 0.9, 1.3, 1.5, 2.2] {
        for s in off_integer_grid(0.0, a + 1.0, 7) {
            let seq = RealSequence::cesaro(s, 0, 1.0).unwrap();
            for m in [0u64, 1, 2, 5, 10, 20] {
                let closed = frac_diff_cesaro_closed(a, s, m).unwrap();
                let opts = FracDiffOptions::new(1e-10).method(SumMethod::Direct);
                let oracle = match frac_diff_with(a, &seq, m, &opts) {
                    Ok(r) => r.value,
                    Err(e) => return outcome(false, format!("oracle failed at a={a} s={s} m={m}: {e}")),
                };
                worst = worst.max((closed - oracle).abs());
                cases += 1;
            }
        }
    }
    outcome(worst <= 1e-8, format!("{cases} cases, max |closed - oracle| = {worst:.3e} (tol 1e-8)"))
}

fn criterion_2() -> Outcome {
    let mut rel: f64 = 0.0;
    for a in [0.1, 0.5, 0.9, 1.0, 1.5, 2.2, 3.7, -0.5, -1.3, -2.5] {
        let mut k = 1.0;
        for n in 0..=10_000u64 {
            if n > 0 {
                k *= (n as f64 + a - 1.0) / n as f64;
            }
            let g = cesaro_number_gamma(a, n).unwrap();
            if k != 0.0 {
                rel = rel.max(((k - g) / k).abs());
            }
            let lib = cesaro_number(a, n).unwrap();
            if k != 0.0 {
                rel = rel.max(((k - lib) / k).abs());
            }
        }
    }
    let mut sandwich = true;
    for a in [0.1, 0.5, 0.9, 1.0] {
        for n in 1..=10_000u64 {
            let (lo, hi) = gautschi_bounds(a, n).unwrap();
            let k = cesaro_number(a, n).unwrap();
            let slack = 1e-14 * k.abs();
            sandwich &= lo <= k + slack && k <= hi + slack;
        }
    }
    let mut conv: f64 = 0.0;
    for (a, b) in [(0.5, 0.5), (1.3, -0.7), (-0.4, 2.1), (0.25, 3.0)] {
        let ka = cesaro_coefficients(a, 201);
        let kb = cesaro_coefficients(b, 201);
        let kab = cesaro_coefficients(a + b, 201);
        for n in 0..=200 {
            let s: f64 = (0..=n).map(|j| ka[j] * kb[n - j]).sum();
            conv = conv.max((s - kab[n]).abs() / kab[n].abs().max(1.0));
        }
    }
    outcome(
        rel <= 1e-12 && sandwich && conv <= 1e-10,
        format!("recurrence vs gamma rel err {rel:.2e}, Gautschi sandwich {sandwich}, Vandermonde err {conv:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = seeded(3);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for m in 0..=3u64 {
        for _ in 0..5 {
            let coeffs: Vec<f64> = (0..=m).map(|_| (rng.next_u64() % 21) as f64 - 10.0).collect();
            let seq = RealSequence::polynomial(coeffs);
            for frac in [0.25, 0.5, 0.75, 1.0] {
                let a = m as f64 + frac;
                for n in 0..=50 {
                    match frac_diff(a, &seq, n, 1e-10) {
                        Ok(r) => worst = worst.max(r.value.abs()),
                        Err(e) => return outcome(false, format!("m={m} a={a} n={n}: {e}")),
                    }
                    cases += 1;
                }
            }
        }
    }
    let geo = RealSequence::geometric(1.0, 0.5).unwrap();
    let converse = (0..=3).all(|m| !poly_solution_check(&geo, m, 50, 1e-8).unwrap().is_poly)
        && (0..=3).all(|m| frac_diff(m as f64 + 0.5, &geo, 0, 1e-10).map(|r| r.value.abs() > 1e-8).unwrap_or(true));
    outcome(
        worst <= 1e-8 && converse,
        format!("{cases} evaluations, max |(1-∇)^a Λ_n| = {worst:.2e}; 2^-n rejected: {converse}"),
    )
}

fn criterion_4() -> Outcome {
    let grid: [(f64, f64, f64); 20] = [
        (0.5, 0.2, 0.5),
        (0.5, 0.3, 1.0),
        (0.8, 0.5, 0.8),
        (0.8, 0.1, 2.0),
        (1.0, 0.5, 1.0),
        (1.0, 0.7, 1.5),
        (1.3, 0.6, 1.3),
        (1.3, 1.2, 2.0),
        (1.7, 0.9, 1.7),
        (1.7, 1.5, 3.0),
        (2.0, 1.5, 2.0),
        (2.0, 0.5, 2.5),
        (2.4, 1.3, 2.4),
        (2.4, 2.2, 3.1),
        (2.9, 2.5, 2.9),
        (2.9, 1.1, 4.0),
        (3.0, 2.5, 3.0),
        (3.5, 3.3, 3.5),
        (3.5, 0.4, 5.0),
        (4.2, 3.9, 4.2),
    ];
    let mut worst = f64::INFINITY;
    for (a, b, s) in grid {
        for m in [0u64, 3, 10, 30, 50] {
            let seq = power_norm_sequence(ShiftSpec::backward(s).unwrap(), m).unwrap();
            match question_a_check(a, b, &seq, 50, 1e-9) {
                Ok(r) => worst = worst.min(r.min_b),
                Err(e) => return outcome(false, format!("a={a} b={b} s={s} m={m}: {e}")),
            }
        }
    }
    outcome(worst >= -1e-9, format!("20 (a, b, s) points x 5 basis indices, min (1-∇)^b Λ_n = {worst:.3e}"))
}

fn taylor_oracle(vals: &[i128], k: usize, n: usize) -> i128 {
    let binom = |n: i128, r: i128| -> i128 {
        if r < 0 || r > n {
            return 0;
        }
        let mut acc = 1i128;
        for i in 0..r {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    };
    let diff = |j: usize, at: usize| -> i128 {
        (0..=j).map(|i| if i % 2 == 0 { 1 } else { -1 } * binom(j as i128, i as i128) * vals[at + i]).sum()
    };
    let mut head = 0i128;
    for j in 0..k {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        head += sign * binom(n as i128, j as i128) * diff(j, 0);
    }
    let mut tail = 0i128;
    for j in 0..=n - k {
        tail += binom((n - 1 - j) as i128, (k - 1) as i128) * diff(k, j);
    }
    if k % 2 == 1 {
        tail = -tail;
    }
    head + tail
}

fn criterion_5() -> Outcome {
    let mut rng = seeded(5);
    let mut worst: f64 = 0.0;
    let mut oracle_ok = true;
    for _ in 0..1000 {
        let vals: Vec<f64> = (0..=60).map(|_| (rng.next_u64() % 2001) as f64 - 1000.0).collect();
        let ints: Vec<i128> = vals.iter().map(|v| *v as i128).collect();
        let seq = RealSequence::from_values(vals);
        let k = 1 + (rng.next_u64() % 6) as usize;
        let n = k + (rng.next_u64() % (61 - k as u64)) as usize;
        let split = discrete_taylor(&seq, k as u64, n as u64).unwrap();
        worst = worst.max(split.residual.abs());
        oracle_ok &= taylor_oracle(&ints, k, n) == ints[n];
        oracle_ok &= (split.head + split.tail) as i128 == ints[n];
    }
    outcome(worst <= 1e-13 && oracle_ok, format!("1000 sequences, max residual {worst:e}, independent oracle agrees: {oracle_ok}"))
}

/// Verdicts as stated for the shifts: backward iff `a <= s`; forward by the
/// parity of `floor(s)` when `s < a + 1`, by `(-1)^a` for integer `a` otherwise.
fn expected_verdict(forward: bool, a: f64, s: f64) -> SignVerdict {
    let int = |x: f64| (x - x.round()).abs() < 1e-9;
    if !forward {
        return if a <= s { SignVerdict::Nonneg } else { SignVerdict::Indefinite };
    }
    if s < a + 1.0 {
        if int(s) {
            SignVerdict::Zero
        } else if (s.floor() as u64) % 2 == 0 {
            SignVerdict::Nonneg
        } else {
            SignVerdict::Nonpos
        }
    } else if int(a) {
        if (a.round() as u64) % 2 == 0 {
            SignVerdict::Nonneg
        } else {
            SignVerdict::Nonpos
        }
    } else {
        SignVerdict::NotInClass
    }
}

fn criterion_6() -> Outcome {
    let a_grid = [0.3, 0.7, 1.0, 1.4, 1.8, 2.0, 2.5, 3.0, 3.3, 4.0];
    let s_grid = [0.2, 0.5, 1.0, 1.5, 2.0, 2.3, 2.7, 3.0, 3.6, 4.5];
    let mut mismatches = Vec::new();
    let mut sign_conflicts = 0;
    let mut points = 0;
    for forward in [false, true] {
        for a in a_grid {
            for s in s_grid {
                points += 1;
                let shift = if forward { ShiftSpec::forward(s) } else { ShiftSpec::backward(s) }.unwrap();
                let cls = match classify_shift(shift, a) {
                    Ok(c) => c,
                    Err(e) => return outcome(false, format!("classify failed at a={a} s={s}: {e}")),
                };
                let want = expected_verdict(forward, a, s);
                if cls.verdict != want {
                    mismatches.push(format!("{}(a={a},s={s})", if forward { "F" } else { "B" }));
                }
                if let Some(x) = &cls.cross_check {
                    for v in &x.values {
                        if v.abs() <= 1e-10 {
                            continue;
                        }
                        let bad = match want {
                            SignVerdict::Nonneg => *v < 0.0,
                            SignVerdict::Nonpos => *v > 0.0,
                            SignVerdict::Zero => true,
                            _ => false,
                        };
                        if bad {
                            sign_conflicts += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(
        mismatches.is_empty() && sign_conflicts == 0,
        format!("{points} grid points, verdict mismatches {:?}, numeric sign conflicts {sign_conflicts}", mismatches),
    )
}

fn criterion_7() -> Outcome {
    let (mut iso, mut inter, mut norm, mut qdim) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    let mut cases = 0;
    for a in [0.3, 0.5, 0.8] {
        for s in [a, a + 0.2, 1.0, 2.5] {
            for d in 1..=12 {
                let t = truncate(ShiftSpec::backward(s).unwrap(), d);
                let r = match build_model(&t, a, None, 1e-12) {
                    Ok(r) => r,
                    Err(e) => return outcome(false, format!("a={a} s={s} d={d}: {e}")),
                };
                iso = iso.max(r.isometry_defect);
                inter = inter.max(r.intertwining_residual);
                norm = norm.max(r.norm_identity_residual);
                qdim = qdim.max(r.quotient_dim);
                cases += 1;
            }
        }
    }
    outcome(
        iso <= 1e-10 && inter <= 1e-10 && norm <= 1e-10 && qdim == 0,
        format!("{cases} truncations: norm identity {norm:.2e}, isometry defect {iso:.2e}, intertwining {inter:.2e}, max quotient dim {qdim}"),
    )
}

fn criterion_8() -> Outcome {
    let r_grid = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99];
    let mut basics = true;
    let mut first_err: f64 = 0.0;
    for a in [0.3, 0.5, 0.8] {
        for r in r_grid {
            basics &= (u_coeff(r, 0, a).unwrap() - 1.0).abs() <= 1e-12;
            first_err = first_err.max((u_coeff(r, 1, a).unwrap() - a * (1.0 - r)).abs());
        }
        for m in 1..50 {
            basics &= u_coeff(1.0, m, a).unwrap().abs() <= 1e-12;
        }
    }
    // (1 - t)^a / (1 - r t)^a by power-series division
    let mut gen_err: f64 = 0.0;
    for a in [0.3, 0.5, 0.8] {
        for r in r_grid {
            let num = cesaro_coefficients(-a, 201);
            let den: Vec<f64> = num.iter().enumerate().map(|(i, v)| v * r.powi(i as i32)).collect();
            let mut q = vec![0.0; 201];
            for i in 0..=200 {
                let mut acc = num[i];
                for j in 1..=i {
                    acc -= den[j] * q[i - j];
                }
                q[i] = acc;
            }
            let u = u_row(r, 200, a);
            for i in 0..=200 {
                gen_err = gen_err.max((u[i] - q[i]).abs());
            }
        }
    }
    let mut decay = true;
    let mut ratio: f64 = 0.0;
    for a in [0.3, 0.5, 0.8] {
        let scan = u_decay_scan(a, 10_000, &[0.0, 0.5, 0.9, 0.99]).unwrap();
        decay &= scan.max_scaled_increment <= 10.0 * scan.early_max;
        ratio = ratio.max(scan.max_scaled_increment / scan.early_max);
    }
    let pass = basics && first_err <= 1e-12 && gen_err <= 1e-10 && decay;
    outcome(
        pass,
        format!(
            "u_r(0)=1 and u_1(m)=0: {basics}; max |u_r(1) - a(1-r)| = {first_err:.3e} (computed u_r(1) = -a(1-r)); \
             generating function err {gen_err:.2e}; increment ratio {ratio:.3} (<= 10: {decay})"
        ),
    )
}

fn criterion_9() -> Outcome {
    let t_hat = truncate(ShiftSpec::forward(1.5).unwrap(), 8);
    let alpha = CoefficientSeries::polynomial(vec![1.0, -1.0]);
    let gamma_tilde = CoefficientSeries::polynomial(vec![1.0, -0.25]);
    match verify_similarity(&t_hat, &alpha, &gamma_tilde, None, 1e-9) {
        Ok(cert) => {
            let t = cert.t.matrix();
            let defect = CMatrix::identity(8, 8) - t.adjoint() * t;
            let min = linalg::min_eigenvalue(&defect);
            outcome(
                min >= -1e-9 && cert.identity_residual <= 1e-9,
                format!("min eig of I - T*T = {min:.3e}, identity residual {:.2e}", cert.identity_residual),
            )
        }
        Err(e) => outcome(false, format!("pipeline refused: {e}")),
    }
}

fn criterion_10() -> Outcome {
    let r = match counterexample_gap(2.0, 2.5, 1 << 14) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let fit_ok = (r.shift_growth_exponent - 1.5).abs() <= 0.05;
    let gap_ok = r.shift_growth_exponent - r.model_growth_cap > 0.4;
    let cls = classify_shift(ShiftSpec::forward(2.5).unwrap(), 2.0).unwrap().verdict;
    outcome(
        fit_ok && gap_ok && cls == SignVerdict::Nonneg,
        format!("fitted exponent {:.4}, cap {}, classification {}", r.shift_growth_exponent, r.model_growth_cap, cls.as_str()),
    )
}

fn criterion_11() -> Outcome {
    let series = |a: f64| cesaro_sequence(CesaroParams::new(a, 1 << 12).unwrap());
    let pairs = [
        (series(-0.5), series(-0.3)),
        (series(-1.5), CoefficientSeries::geometric_kernel(0.5, 2.0, 1 << 12)),
        (CoefficientSeries::polynomial(vec![1.0, -0.5, 0.25]), series(-0.7)),
    ];
    let mut nil: f64 = 0.0;
    for d in 2..=8 {
        for s in [0.5, 1.5, 3.0] {
            let t = truncate(ShiftSpec::backward(s).unwrap(), d);
            let id = CMatrix::identity(d, d);
            for (f, g) in &pairs {
                nil = nil.max(compose_check(f, g, &t, &id, 1e-10).unwrap().residual);
            }
        }
    }
    let mut rng = seeded(11);
    let mut rnd: f64 = 0.0;
    let mut quad: f64 = 0.0;
    for trial in 0..24 {
        let d = 2 + trial % 7;
        let t = FiniteOperator::new(random_contraction(&mut rng, d, 0.85)).unwrap();
        let b = linalg::random_psd(&mut rng, d);
        let b = &b * c(1.0 / op_norm(&b));
        for (f, g) in &pairs {
            rnd = rnd.max(compose_check(f, g, &t, &b, 1e-9).unwrap().residual);
        }
        // <f(T*,T)(I) x, x> = sum f_n ‖T^n x‖²
        let f = &pairs[0].0;
        let fv = hereditary_apply(f, &t, &CMatrix::identity(d, d), 1e-13).unwrap().value;
        let x = random_vector(&mut rng, d);
        let lhs = (x.adjoint() * &fv * &x)[(0, 0)].re;
        let mut y = x.clone();
        let mut rhs = 0.0;
        for fc in f.coeffs() {
            rhs += fc * y.norm_squared();
            y = t.matrix() * y;
        }
        quad = quad.max((lhs - rhs).abs());
    }
    outcome(
        nil <= 1e-10 && rnd <= 1e-8 && quad <= 1e-9,
        format!("composition: nilpotent {nil:.2e}, random contractions {rnd:.2e}; quadratic form {quad:.2e}"),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "closed form for (1-∇)^a k^s(m)", criterion_1),
        (2, "Cesàro number integrity", criterion_2),
        (3, "polynomial solutions of (1-∇)^a Λ = 0", criterion_3),
        (4, "positivity passes from order a to b < a", criterion_4),
        (5, "discrete Taylor identity", criterion_5),
        (6, "shift classification table", criterion_6),
        (7, "model construction on nilpotent truncations", criterion_7),
        (8, "u-coefficients", criterion_8),
        (9, "similarity pipeline", criterion_9),
        (10, "growth obstruction for F_2.5, a = 2", criterion_10),
        (11, "hereditary calculus", criterion_11),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_INFEASIBLE.contains(&id) { " [known infeasible]" } else { "" };
        println!("{tag} {id:>2} {name}: {} ({secs:.1}s){note}", o.detail);
        if o.pass {
            passed += 1;
        } else if note.is_empty() {
            unexpected += 1;
        }
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
