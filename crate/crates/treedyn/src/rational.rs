//! Exact rational scalars and their text form.
//!
//! Lengths, offsets and slopes are all `BigRational` so that every
//! combinatorial query is reproducible bit for bit. The text form is
//! `"p/q"` (or just `"p"` for integers), which is what the JSON file
//! formats use.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// `p/q` from machine integers.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from(BigInt::from(p))
}

/// Parses `"p/q"`, `"p"` or a JSON-style integer literal.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rational::from(p))
        }
    }
}

/// Renders in lowest terms, omitting the denominator when it is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/2", "1", "-7/3", "0"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
        assert_eq!(parse_rational("6/4").map(|r| format_rational(&r)), Some("3/2".into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
