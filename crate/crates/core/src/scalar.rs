//! Coefficient rings used throughout the crate.
//!
//! Everything symbolic is carried out over exact rationals. Floats only enter
//! when an orthonormal basis cannot be represented exactly (a norm that is not
//! a rational square), in which case the same generic code runs over `f64`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Build a rational from an integer numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Build an integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Render a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn fraction_string(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse `"p/q"` or `"p"` (optionally signed) into a rational.
pub fn parse_fraction(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => parse_decimal(s),
    }
}

/// Parse a decimal literal such as `-1.25` or `3e-2` exactly.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (ip, fp) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{ip}{fp}").parse().ok()?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(digits);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -q } else { q })
}

/// Commutative ring operations needed by tensors and polynomials.
pub trait Scalar:
    Clone + Debug + PartialEq + Send + Sync + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialEq + Send + Sync + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

/// A field in which linear algebra (kernels, orthonormal bases) is carried out.
///
/// `Rational` answers every zero test exactly; `f64` uses the tolerance given
/// by the caller.
pub trait Field: Scalar + Div<Output = Self> + 'static {
    /// True only for exact arithmetic.
    const EXACT: bool;

    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Zero test: exact for rationals, `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Square root if it is representable in this field.
    fn sqrt_checked(&self) -> Option<Self>;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&int(n))
    }

    /// Sign and magnitude text, used by the polynomial printer.
    fn signed_repr(&self) -> (bool, String);
}

impl Field for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Huge numerators/denominators: fall back to a ratio of floats.
            let n = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn signed_repr(&self) -> (bool, String) {
        (self.is_negative(), fraction_string(&self.abs()))
    }

    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().magnitude();
        let d = self.denom().magnitude();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Some(Rational::new(BigInt::from(rn), BigInt::from(rd)))
        } else {
            None
        }
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        <Rational as Field>::to_f64(q)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn signed_repr(&self) -> (bool, String) {
        (self.is_sign_negative() && *self != 0.0, format!("{}", self.abs()))
    }

    fn sqrt_checked(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
}

/// Binomial coefficient as `u128`.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub(crate) fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}
