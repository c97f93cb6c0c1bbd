//! Conversions between decimals, floats and exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rust_decimal::Decimal;

pub fn decimal_to_rational(d: Decimal) -> BigRational {
    let scale = d.scale();
    let mantissa = BigInt::from(d.mantissa());
    let denom = BigInt::from(10u32).pow(scale);
    BigRational::new(mantissa, denom)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact value of a finite float.
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Parses `"p/q"` or an integer string.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_conversion_is_exact() {
        let r = decimal_to_rational(Decimal::new(-125, 3));
        assert_eq!(r, BigRational::new((-1).into(), 8.into()));
        assert_eq!(rational_to_f64(&r), -0.125);
    }

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_rational("1/3"), Some(BigRational::new(1.into(), 3.into())));
        assert_eq!(parse_rational("2"), Some(BigRational::from_integer(2.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
