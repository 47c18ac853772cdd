//! Scalar abstraction for the exact linear algebra core.

use num::traits::{FromPrimitive, Num, Signed};
use num::BigRational;
use std::fmt::{Debug, Display};

/// Field-like scalar the core is generic over.
///
/// `BigRational` is the instantiation everything exact runs on; `f32`/`f64`
/// satisfy the same bounds for callers that want approximate spectra.
pub trait Scalar: Clone + PartialEq + Debug + Display + Num + Signed + FromPrimitive {
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("scalar conversion from i64")
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("scalar conversion from usize")
    }
}

impl<T> Scalar for T where T: Clone + PartialEq + Debug + Display + Num + Signed + FromPrimitive {}

/// `z^n` for a signed exponent. Panics on `z = 0` with `n < 0`; callers guard
/// the spectral parameter against zero before calling.
pub fn int_pow<T: Scalar>(z: &T, n: i64) -> T {
    let mut acc = T::one();
    let base = if n >= 0 {
        z.clone()
    } else {
        T::one() / z.clone()
    };
    for _ in 0..n.unsigned_abs() {
        acc = acc * base.clone();
    }
    acc
}

/// Parses "p/q" or "p" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let t = s.trim();
    t.parse::<BigRational>()
        .map_err(|e| format!("invalid rational {t:?}: {e}"))
}

/// Renders a rational as "p/q", or "p" when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    r.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn int_pow_negative_exponent() {
        let z = rat(3, 5);
        assert_eq!(int_pow(&z, -2), rat(25, 9));
        assert_eq!(int_pow(&z, 0), rat(1, 1));
        assert_eq!(int_pow(&z, 3), rat(27, 125));
    }

    #[test]
    fn int_pow_works_for_floats_too() {
        assert_eq!(int_pow(&2.0f64, -1), 0.5);
    }

    #[test]
    fn rational_text_round_trip() {
        let r = parse_rational("-10/15").unwrap();
        assert_eq!(format_rational(&r), "-2/3");
        assert_eq!(format_rational(&parse_rational("7").unwrap()), "7");
        assert!(parse_rational("a/b").is_err());
    }
}
