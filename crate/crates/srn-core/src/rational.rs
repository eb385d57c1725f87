//! Exact rational scalars used throughout the crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Arbitrary-precision rational number.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q`. Panics if `q == 0`.
pub fn frac(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p`, `p/q` or a decimal such as `0.25` into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rat::new(p, q));
    }
    if let Some((int, dec)) = s.split_once('.') {
        if dec.is_empty() || !dec.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let num: BigInt = dec.parse().ok()?;
        let denom = BigInt::from(10u32).pow(dec.len() as u32);
        let frac_part = Rat::new(num, denom);
        let whole = Rat::from_integer(int_part);
        return Some(if negative { whole - frac_part } else { whole + frac_part });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// Lossy conversion to `f64` (used only at the simulator boundary).
pub fn rat_to_f64(r: &Rat) -> f64 {
    // Split into quotient and remainder so huge numerators stay in range.
    let (q, rem) = (r.numer() / r.denom(), r.numer() % r.denom());
    let q_f = bigint_to_f64(&q);
    let rem_f = bigint_to_f64(&rem) / bigint_to_f64(r.denom());
    q_f + rem_f
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    let s = n.to_string();
    s.parse::<f64>().unwrap_or(if n.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_fraction_decimal() {
        assert_eq!(parse_rat("3").unwrap(), rat(3));
        assert_eq!(parse_rat("-4").unwrap(), rat(-4));
        assert_eq!(parse_rat("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rat("0.25").unwrap(), frac(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), frac(-3, 2));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("x").is_none());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rat(&frac(4, 2)), "2");
        assert_eq!(format_rat(&frac(1, 3)), "1/3");
        assert_eq!(format_rat(&frac(-2, 4)), "-1/2");
    }

    #[test]
    fn f64_conversion_is_close() {
        assert!((rat_to_f64(&frac(1, 3)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((rat_to_f64(&rat(7)) - 7.0).abs() == 0.0);
    }
}
