//! Parsers for the compact sequence, series and shift descriptors used on the
//! command line.
//!
//! Sequences:
//! `const:C`, `geom:S,R` (`S R^n`), `poly:C0,C1,..`, `values:V0,V1,..`,
//! `cesaro:ORDER,OFFSET,SCALE` (`SCALE k^ORDER(n + OFFSET)`), `alt` (`(-1)^n`),
//! `shift:DIR,S,M` (`‖S^n u_M‖²` for the shift `DIR` of weight `S`).

use fracop_core::series::CoefficientSeries;
use fracop_core::sequence::RealSequence;
use fracop_core::shifts::{power_norm_sequence, Direction, ShiftSpec};

fn numbers(body: &str) -> Result<Vec<f64>, String> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number {s:?}")))
        .collect()
}

fn exactly<const N: usize>(kind: &str, body: &str) -> Result<[f64; N], String> {
    let v = numbers(body)?;
    v.try_into().map_err(|v: Vec<f64>| format!("{kind} takes {N} numbers, got {}", v.len()))
}

pub fn parse_direction(s: &str) -> Result<Direction, String> {
    match s {
        "forward" | "F" | "f" => Ok(Direction::Forward),
        "backward" | "B" | "b" => Ok(Direction::Backward),
        other => Err(format!("unknown direction {other:?} (forward or backward)")),
    }
}

pub fn parse_sequence(spec: &str) -> Result<RealSequence, String> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let core = |e: fracop_core::Error| e.to_string();
    match kind {
        "const" => Ok(RealSequence::constant(exactly::<1>(kind, body)?[0])),
        "geom" => {
            let [s, r] = exactly::<2>(kind, body)?;
            RealSequence::geometric(s, r).map_err(core)
        }
        "poly" => Ok(RealSequence::polynomial(numbers(body)?)),
        "values" => Ok(RealSequence::from_values(numbers(body)?)),
        "cesaro" => {
            let [order, offset, scale] = exactly::<3>(kind, body)?;
            if offset < 0.0 || offset.fract() != 0.0 {
                return Err("cesaro offset must be a nonnegative integer".into());
            }
            RealSequence::cesaro(order, offset as u64, scale).map_err(core)
        }
        "alt" => Ok(RealSequence::alternating()),
        "shift" => {
            let mut parts = body.splitn(2, ',');
            let dir = parse_direction(parts.next().unwrap_or(""))?;
            let [s, m] = exactly::<2>(kind, parts.next().unwrap_or(""))?;
            if m < 0.0 || m.fract() != 0.0 {
                return Err("shift basis index must be a nonnegative integer".into());
            }
            let shift = ShiftSpec::new(dir, s).map_err(core)?;
            power_norm_sequence(shift, m as u64).map_err(core)
        }
        other => Err(format!("unknown sequence kind {other:?}")),
    }
}

/// Polynomial coefficients `c0,c1,...`.
pub fn parse_series(spec: &str) -> Result<CoefficientSeries, String> {
    let v = numbers(spec)?;
    if v.is_empty() {
        return Err("empty coefficient list".into());
    }
    Ok(CoefficientSeries::polynomial(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sequences() {
        assert_eq!(parse_sequence("const:2").unwrap().value(7), 2.0);
        assert_eq!(parse_sequence("geom:1,0.5").unwrap().value(2), 0.25);
        assert_eq!(parse_sequence("poly:1,0,1").unwrap().value(3), 10.0);
        assert_eq!(parse_sequence("alt").unwrap().value(3), -1.0);
        assert!((parse_sequence("shift:forward,2,0").unwrap().value(3) - 4.0).abs() < 1e-12);
        assert!(parse_sequence("geom:1").is_err());
        assert!(parse_sequence("nope:1").is_err());
    }
}
