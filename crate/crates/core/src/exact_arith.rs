//! Exact number tower: big rationals and signed square roots of rationals.
//!
//! Everything the engine computes lives in the rationals; the single square
//! root of a reported coefficient is carried symbolically by [`SignedRadical`].

use std::fmt;
use std::sync::atomic::{AtomicU8, Ordering};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("ratio of radicals is not rational")]
    NotCommensurable,
    #[error("division by zero radical")]
    ZeroDivisor,
    #[error("malformed radical literal `{0}`")]
    Parse(String),
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact integer square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().magnitude().sqrt();
    let d = x.denom().magnitude().sqrt();
    if &(&n * &n) == x.numer().magnitude() && &(&d * &d) == x.denom().magnitude() {
        Some(Rational::new(
            BigInt::from_biguint(Sign::Plus, n),
            BigInt::from_biguint(Sign::Plus, d),
        ))
    } else {
        None
    }
}

/// `sign * sqrt(radicand)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedRadical {
    sign: i8,
    radicand: Rational,
}

impl SignedRadical {
    pub fn zero() -> Self {
        SignedRadical { sign: 0, radicand: <Rational as Zero>::zero() }
    }

    pub fn new(sign: i8, radicand: Rational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        if sign == 0 || Zero::is_zero(&radicand) {
            return Self::zero();
        }
        SignedRadical { sign: sign.signum(), radicand }
    }

    /// `sign(num) * sqrt(num^2 / den)`; the normalized overlap `num / sqrt(den)`.
    pub fn from_overlap(num: &Rational, den: &Rational) -> Self {
        assert!(den.is_positive(), "nonpositive norm");
        let s = if Zero::is_zero(num) { 0 } else if num.is_positive() { 1 } else { -1 };
        Self::new(s, num * num / den)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Signed square: `sign * radicand`.
    pub fn signed_square(&self) -> Rational {
        match self.sign {
            0 => <Rational as Zero>::zero(),
            1 => self.radicand.clone(),
            _ => -self.radicand.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * ToPrimitive::to_f64(&self.radicand).unwrap_or(f64::NAN).sqrt()
    }

    pub fn neg(&self) -> Self {
        SignedRadical { sign: -self.sign, radicand: self.radicand.clone() }
    }

    /// Parse `+sqrt(p/q)`, `-sqrt(p/q)`, `sqrt(p)` or `0`.
    pub fn parse(s: &str) -> Result<Self, ArithError> {
        let t = s.trim();
        if t == "0" {
            return Ok(Self::zero());
        }
        let (sign, rest) = match t.as_bytes().first() {
            Some(b'-') => (-1, &t[1..]),
            Some(b'+') => (1, &t[1..]),
            _ => (1, t),
        };
        let inner = rest
            .strip_prefix("sqrt(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| ArithError::Parse(s.to_string()))?;
        let (p, q) = match inner.split_once('/') {
            Some((p, q)) => (p, q),
            None => (inner, "1"),
        };
        let p: BigInt = p.trim().parse().map_err(|_| ArithError::Parse(s.to_string()))?;
        let q: BigInt = q.trim().parse().map_err(|_| ArithError::Parse(s.to_string()))?;
        if q.is_zero() || p.is_negative() || q.is_negative() {
            return Err(ArithError::Parse(s.to_string()));
        }
        Ok(Self::new(sign, Rational::new(p, q)))
    }
}

impl fmt::Display for SignedRadical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(
                f,
                "{}sqrt({}/{})",
                if s > 0 { '+' } else { '-' },
                self.radicand.numer(),
                self.radicand.denom()
            ),
        }
    }
}

pub fn srad_from_signed_rational(x: &Rational) -> SignedRadical {
    let s = if Zero::is_zero(x) { 0 } else if x.is_positive() { 1 } else { -1 };
    SignedRadical::new(s, x * x)
}

pub fn srad_mul(a: &SignedRadical, b: &SignedRadical) -> SignedRadical {
    SignedRadical::new(a.sign * b.sign, &a.radicand * &b.radicand)
}

pub fn srad_ratio_as_rational(a: &SignedRadical, b: &SignedRadical) -> Result<Rational, ArithError> {
    if b.is_zero() {
        return Err(ArithError::ZeroDivisor);
    }
    if a.is_zero() {
        return Ok(<Rational as Zero>::zero());
    }
    let r = rational_sqrt(&(&a.radicand / &b.radicand)).ok_or(ArithError::NotCommensurable)?;
    Ok(if a.sign * b.sign > 0 { r } else { -r })
}

// ---------------------------------------------------------------------------
// Scalar abstraction: the engine runs over exact rationals, and over f64 for
// the floating-point cross-check.

/// How Gaussian elimination picks a pivot row within a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotStrategy {
    /// Smallest numerator*denominator bit size (default).
    SmallestBits,
    /// First row in index order with a nonzero entry.
    FirstNonzero,
}

static PIVOT: AtomicU8 = AtomicU8::new(0);

pub fn set_pivot_strategy(p: PivotStrategy) {
    PIVOT.store(
        match p {
            PivotStrategy::SmallestBits => 0,
            PivotStrategy::FirstNonzero => 1,
        },
        Ordering::SeqCst,
    );
}

pub fn pivot_strategy() -> PivotStrategy {
    match PIVOT.load(Ordering::SeqCst) {
        0 => PivotStrategy::SmallestBits,
        _ => PivotStrategy::FirstNonzero,
    }
}

pub trait Scalar: Clone + Send + Sync + fmt::Debug + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_frac(n: i64, d: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn add_assign(&mut self, o: &Self);
    /// `self += a * b`
    fn add_mul(&mut self, a: &Self, b: &Self);
    fn signum(&self) -> i32;
    fn to_f64(&self) -> f64;
    /// Lower is a better pivot.
    fn pivot_cost(&self) -> f64;
    fn approx_eq(&self, o: &Self) -> bool;
    /// Positive factor that keeps a working vector well scaled: clears
    /// denominators for exact scalars, normalizes for floating point.
    fn tidy_factor(entries: &[&Self], norm2: &Self) -> Self;
    /// Zero relative to a quantity whose square is `scale2` (e.g. an inner
    /// product against the product of the squared norms).
    fn negligible(&self, scale2: &Self) -> bool {
        let _ = scale2;
        self.is_zero()
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_frac(n: i64, d: i64) -> Self {
        rat(n, d)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn signum(&self) -> i32 {
        if Zero::is_zero(self) {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn pivot_cost(&self) -> f64 {
        match pivot_strategy() {
            PivotStrategy::SmallestBits => (self.numer().bits() + self.denom().bits()) as f64,
            PivotStrategy::FirstNonzero => 0.0,
        }
    }
    fn approx_eq(&self, o: &Self) -> bool {
        self == o
    }
    fn tidy_factor(entries: &[&Self], _norm2: &Self) -> Self {
        let mut l = BigInt::from(1);
        let mut g = BigInt::from(0);
        for x in entries {
            l = l.lcm(x.denom());
            g = g.gcd(x.numer());
        }
        if Zero::is_zero(&g) {
            return One::one();
        }
        Rational::new(l, g.abs())
    }
}

/// Absolute tolerance used by the floating-point instantiation.
pub const F64_TOL: f64 = 1e-9;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_frac(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        self.abs() < F64_TOL
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn signum(&self) -> i32 {
        if Scalar::is_zero(self) {
            0
        } else if *self > 0.0 {
            1
        } else {
            -1
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pivot_cost(&self) -> f64 {
        -self.abs()
    }
    fn approx_eq(&self, o: &Self) -> bool {
        (self - o).abs() <= F64_TOL * (1.0 + self.abs().max(o.abs()))
    }
    fn negligible(&self, scale2: &Self) -> bool {
        self.abs() <= F64_TOL * (1.0 + scale2.abs().sqrt())
    }
    fn tidy_factor(_entries: &[&Self], norm2: &Self) -> Self {
        if *norm2 > 0.0 {
            1.0 / norm2.sqrt()
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canonical(r: &Rational) -> bool {
        use num_integer::Integer;
        r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
    }

    #[test]
    fn from_signed_rational_examples() {
        assert_eq!(srad_from_signed_rational(&rat(3, 4)).to_string(), "+sqrt(9/16)");
        assert_eq!(srad_from_signed_rational(&rat(-2, 1)).to_string(), "-sqrt(4/1)");
        assert_eq!(srad_from_signed_rational(&rat(0, 1)).to_string(), "0");
    }

    #[test]
    fn mul_examples() {
        let h = SignedRadical::new(1, rat(1, 2));
        assert_eq!(srad_mul(&h, &h), SignedRadical::new(1, rat(1, 4)));
        let a = SignedRadical::new(-1, rat(3, 4));
        let b = SignedRadical::new(1, rat(1, 3));
        assert_eq!(srad_mul(&a, &b), SignedRadical::new(-1, rat(1, 4)));
        assert!(srad_mul(&SignedRadical::zero(), &SignedRadical::new(1, rat(7, 1))).is_zero());
    }

    #[test]
    fn ratio_examples() {
        let a = SignedRadical::new(1, rat(9, 16));
        let b = SignedRadical::new(1, rat(1, 16));
        assert_eq!(srad_ratio_as_rational(&a, &b).unwrap(), rat(3, 1));
        let a = SignedRadical::new(-1, rat(1, 2));
        let b = SignedRadical::new(1, rat(2, 1));
        assert_eq!(srad_ratio_as_rational(&a, &b).unwrap(), rat(-1, 2));
        let a = SignedRadical::new(1, rat(2, 1));
        let b = SignedRadical::new(1, rat(3, 1));
        assert_eq!(srad_ratio_as_rational(&a, &b), Err(ArithError::NotCommensurable));
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["+sqrt(5/7)", "-sqrt(1/21)", "0", "+sqrt(1/1)"] {
            assert_eq!(SignedRadical::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(SignedRadical::parse("sqrt(3)").unwrap(), SignedRadical::new(1, rat(3, 1)));
        assert!(SignedRadical::parse("sqrt(1/0)").is_err());
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-200i64..200, 1i64..200).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_srad() -> impl Strategy<Value = SignedRadical> {
        (-1i8..=1, 0i64..50, 1i64..50).prop_map(|(s, p, q)| SignedRadical::new(s, rat(p, q)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10000))]
        #[test]
        fn signed_square_roundtrip(x in arb_rat()) {
            let r = srad_from_signed_rational(&x);
            prop_assert!(canonical(r.radicand()));
            let sq = rational_sqrt(r.radicand()).unwrap();
            let back = if r.sign() < 0 { -sq } else { sq };
            prop_assert_eq!(back, x);
        }

        #[test]
        fn mul_assoc_comm(a in arb_srad(), b in arb_srad(), c in arb_srad()) {
            prop_assert_eq!(srad_mul(&a, &b), srad_mul(&b, &a));
            let l = srad_mul(&srad_mul(&a, &b), &c);
            let r = srad_mul(&a, &srad_mul(&b, &c));
            prop_assert!(canonical(l.radicand()));
            prop_assert_eq!(l, r);
        }
    }
}
