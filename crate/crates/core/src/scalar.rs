//! Numeric abstraction shared by the whole crate.
//!
//! Every quantity that enters a kernel evaluation, a partition sum or a
//! check is generic over [`Scalar`]. Two instantiations are supported:
//!
//! * `f64` — fast floating point, comparisons use a relative tolerance;
//! * [`Rational`] (`num::BigRational`) — exact arithmetic, comparisons
//!   are exact (tolerance zero). This is the mode the verification
//!   suites run in whenever kernel parameters are rational.

use std::fmt;

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{Signed, Zero};

use crate::error::Error;

/// Exact rational scalar.
pub type Rational = num::BigRational;

/// Scalar number usable for kernel weights and probabilities.
///
/// The trait folds in the arithmetic via `num_traits::Signed` (which
/// brings `Zero`, `One`, the four operations and `abs`).
pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Signed + Send + Sync + 'static
{
    /// Whether arithmetic in this type is exact. Drives default tolerances.
    fn is_exact() -> bool;

    fn from_u64(n: u64) -> Self;

    /// Construct `num / den`.
    fn from_ratio(num: i64, den: u64) -> Self;

    /// Lossy conversion for reporting and Monte Carlo use.
    fn to_f64(&self) -> f64;

    /// Parse from a decimal string, a fraction `p/q`, or scientific
    /// notation (`"0.3"`, `"-1/2"`, `"1e-10"`). For the exact type the
    /// decimal forms parse exactly (`"0.3"` becomes 3/10, not a binary
    /// approximation).
    fn parse(text: &str) -> Result<Self, Error>;

    /// `self^n` for a nonnegative integer exponent.
    fn powu(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base.clone();
            n >>= 1;
        }
        acc
    }

    /// Product of a slice of nonnegative factors. The float
    /// implementation switches to log-space when a factor leaves
    /// `[1e-6, 1e6]`, to avoid overflow and underflow.
    fn product_of(factors: &[Self]) -> Self {
        factors
            .iter()
            .fold(Self::one(), |acc, f| acc * f.clone())
    }

    /// Nearest nonnegative integer if `self` is within `tol` of one.
    fn to_nonneg_integer(&self, tol: &Self) -> Option<u64> {
        let approx = self.to_f64();
        if !approx.is_finite() || approx < -0.5 {
            return None;
        }
        let rounded = approx.round().max(0.0) as u64;
        let exact = Self::from_u64(rounded);
        if close(self, &exact, tol) {
            Some(rounded)
        } else {
            None
        }
    }
}

impl Scalar for f64 {
    fn is_exact() -> bool {
        false
    }

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse(text: &str) -> Result<Self, Error> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("cannot parse number `{text}`")))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("cannot parse number `{text}`")))?;
            if q == 0.0 {
                return Err(Error::Parameter(format!("zero denominator in `{text}`")));
            }
            return Ok(p / q);
        }
        text.parse()
            .map_err(|_| Error::Parameter(format!("cannot parse number `{text}`")))
    }

    fn powu(&self, n: u32) -> Self {
        self.powi(n as i32)
    }

    fn product_of(factors: &[Self]) -> Self {
        let extreme = factors
            .iter()
            .any(|f| *f > 1e6 || (*f > 0.0 && *f < 1e-6));
        if !extreme {
            return factors.iter().product();
        }
        if factors.iter().any(|f| *f == 0.0) {
            return 0.0;
        }
        factors.iter().map(|f| f.ln()).sum::<f64>().exp()
    }
}

impl Scalar for Rational {
    fn is_exact() -> bool {
        true
    }

    fn from_u64(n: u64) -> Self {
        Ratio::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: u64) -> Self {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse(text: &str) -> Result<Self, Error> {
        parse_rational(text)
    }
}

/// Parse `"3"`, `"-1/2"`, `"0.25"`, `"2.5e-3"` into an exact rational.
fn parse_rational(text: &str) -> Result<Rational, Error> {
    let text = text.trim();
    let err = || Error::Parameter(format!("cannot parse number `{text}`"));
    if text.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(Error::Parameter(format!("zero denominator in `{text}`")));
        }
        return Ok(Ratio::new(p, q));
    }
    // decimal with optional exponent: [sign] digits [. digits] [e exp]
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let numer: BigInt = digits.parse().map_err(|_| err())?;
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if shift >= 0 {
        Ratio::from_integer(numer * num::pow::pow(ten, shift as usize))
    } else {
        Ratio::new(numer, num::pow::pow(ten, (-shift) as usize))
    };
    Ok(value)
}

/// Relative closeness: `|a - b| <= tol * max(1, |a|, |b|)`.
///
/// With `tol == 0` this is exact equality, which is the default in
/// rational mode.
pub fn close<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    if a == b {
        return true;
    }
    let diff = (a.clone() - b.clone()).abs();
    let mut scale = T::one();
    let aa = a.abs();
    if aa > scale {
        scale = aa;
    }
    let bb = b.abs();
    if bb > scale {
        scale = bb;
    }
    diff <= tol.clone() * scale
}

/// Default comparison tolerance: exact for rationals, relative 1e-9 for
/// floats.
pub fn default_tol<T: Scalar>() -> T {
    if T::is_exact() {
        T::zero()
    } else {
        T::from_ratio(1, 1_000_000_000)
    }
}

/// `n!` as a scalar.
pub fn factorial<T: Scalar>(n: u32) -> T {
    let mut acc = T::one();
    for k in 2..=n {
        acc = acc * T::from_u64(k as u64);
    }
    acc
}
