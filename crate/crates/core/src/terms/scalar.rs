use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact Gaussian rational `re + im·i`.
///
/// Coefficients of monomials and commutation constants both use this type.
/// Purely real values are the common case; the imaginary part is carried only
/// so that complex commutation constants can be declared.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    re: BigRational,
    im: BigRational,
}

impl Scalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Scalar { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Scalar {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(Scalar {
            re: &self.re / &norm,
            im: -(&self.im / &norm),
        })
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Option<Scalar> {
        rhs.inverse().map(|inv| self * &inv)
    }

    pub fn pow(&self, mut exp: u64) -> Scalar {
        let mut base = self.clone();
        let mut acc = Scalar::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    /// Real and negative, so a leading minus can be pulled out when rendering sums.
    pub(crate) fn is_negative_real(&self) -> bool {
        self.im.is_zero() && self.re.is_negative()
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rational(&self.re, f);
        }
        f.write_str("(")?;
        fmt_rational(&self.re, f)?;
        if self.im.is_negative() {
            f.write_str("-")?;
            fmt_rational(&-self.im.clone(), f)?;
        } else {
            f.write_str("+")?;
            fmt_rational(&self.im, f)?;
        }
        f.write_str("i)")
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(a: i64, b: i64) -> Scalar {
        Scalar::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
        )
    }

    #[test]
    fn inverse_of_gaussian() {
        let z = gauss(1, 2);
        let inv = z.inverse().unwrap();
        assert!((&z * &inv).is_one());
        assert_eq!(inv.to_string(), "(1/5-2/5i)");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let z = gauss(1, 1);
        let mut acc = Scalar::one();
        for k in 0..9u64 {
            assert_eq!(z.pow(k), acc);
            acc = &acc * &z;
        }
        assert_eq!(Scalar::from_int(-1).pow(6), Scalar::one());
    }

    #[test]
    fn zero_has_no_inverse() {
        assert!(Scalar::zero().inverse().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Scalar::ratio(-3, 6).to_string(), "-1/2");
        assert_eq!(gauss(0, 1).to_string(), "(0+1i)");
        assert_eq!(gauss(2, -1).to_string(), "(2-1i)");
    }
}
