//! Exact scalars: rationals and elements of a real quadratic field.
//!
//! Every construction in the crate is generic over [`ExactField`]. Two
//! implementations are provided: [`BigRational`] for purely rational data and
//! [`Quadratic`] for values `p + q·√d` with a single square-free `d` per
//! computation. Comparisons are decided by integer arithmetic only.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use regex::Regex;

use crate::error::{Error, Result};

/// An ordered field with exact arithmetic and a canonical text form.
pub trait ExactField:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Eq
    + PartialOrd
    + Ord
    + Hash
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Parses the canonical text encoding.
    fn parse_scalar(s: &str) -> Result<Self>;

    fn from_integer(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Square root inside the field, if one exists there.
    ///
    /// For [`Quadratic`] a rational argument may produce a value over a new
    /// discriminant (`sqrt(2)` is representable); callers that must stay in a
    /// fixed context compare [`ExactField::discriminant`] afterwards.
    fn sqrt_exact(&self) -> Option<Self>;

    /// Square-free `d` this value lives over, `None` when rational.
    fn discriminant(&self) -> Option<u64>;

    fn is_rational(&self) -> bool {
        self.discriminant().is_none()
    }

    /// Rational value, when the scalar is rational.
    fn to_rational(&self) -> Option<BigRational>;

    /// Lossy conversion, for reporting only.
    fn to_f64(&self) -> f64;

    fn half(&self) -> Self {
        self.clone() * Self::from_ratio(1, 2)
    }
}

fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer();
    let d = x.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

fn ratio_to_f64(x: &BigRational) -> f64 {
    ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Malformed(format!("bad numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Malformed(format!("bad denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Malformed(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

fn write_ratio(f: &mut fmt::Formatter<'_>, x: &BigRational) -> fmt::Result {
    if x.denom().is_one() {
        write!(f, "{}", x.numer())
    } else {
        write!(f, "{}/{}", x.numer(), x.denom())
    }
}

impl ExactField for BigRational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(numer.into(), denom.into())
    }

    fn parse_scalar(s: &str) -> Result<Self> {
        parse_ratio(s)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        rational_sqrt(self)
    }

    fn discriminant(&self) -> Option<u64> {
        None
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

/// Splits `d` into `(s, f)` with `d = s²·f` and `f` square-free.
fn square_free_split(mut d: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut p = 2u64;
    while p * p <= d {
        while d % (p * p) == 0 {
            d /= p * p;
            outside *= p;
        }
        p += 1;
    }
    (outside, d)
}

/// `rational + radical·√discriminant`, always in canonical form.
///
/// Canonical means: both parts reduced with positive denominators, and the
/// discriminant is present iff the radical part is nonzero. Equal values thus
/// have identical representations and the derived `Eq`/`Hash` are exact.
///
/// Binary operations between values over different discriminants panic; use
/// the `checked_*` methods where inputs are not already validated.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quadratic {
    rational: BigRational,
    radical: BigRational,
    disc: Option<u64>,
}

/// Unreduced components as read from external input.
#[derive(Debug, Clone)]
pub struct RawQuadratic {
    pub p_num: BigInt,
    pub p_den: BigInt,
    pub q_num: BigInt,
    pub q_den: BigInt,
    pub disc: u64,
}

impl Quadratic {
    pub fn rational(x: BigRational) -> Self {
        Quadratic {
            rational: x,
            radical: BigRational::zero(),
            disc: None,
        }
    }

    /// `rational + radical·√d`; `d` need not be square-free.
    pub fn new(rational: BigRational, radical: BigRational, d: u64) -> Self {
        let (outside, inside) = square_free_split(d);
        let radical = radical * BigRational::from_integer(outside.into());
        if d == 0 || radical.is_zero() {
            return Self::rational(rational);
        }
        if inside == 1 {
            return Self::rational(rational + radical);
        }
        Quadratic {
            rational,
            radical,
            disc: Some(inside),
        }
    }

    pub fn sqrt(d: u64) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), d)
    }

    pub fn normalize(raw: RawQuadratic) -> Result<Self> {
        if raw.p_den.is_zero() || raw.q_den.is_zero() {
            return Err(Error::Malformed("zero denominator".into()));
        }
        Ok(Self::new(
            BigRational::new(raw.p_num, raw.p_den),
            BigRational::new(raw.q_num, raw.q_den),
            raw.disc,
        ))
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn radical_part(&self) -> &BigRational {
        &self.radical
    }

    fn joint_disc(&self, other: &Self) -> Result<Option<u64>> {
        match (self.disc, other.disc) {
            (Some(a), Some(b)) if a != b => Err(Error::MixedDiscriminants(a, b)),
            (Some(a), _) | (None, Some(a)) => Ok(Some(a)),
            (None, None) => Ok(None),
        }
    }

    fn from_parts(rational: BigRational, radical: BigRational, disc: Option<u64>) -> Self {
        match disc {
            Some(d) if !radical.is_zero() => Quadratic {
                rational,
                radical,
                disc: Some(d),
            },
            _ => Self::rational(rational),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.joint_disc(other)?;
        Ok(Self::from_parts(
            &self.rational + &other.rational,
            &self.radical + &other.radical,
            d,
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other.clone())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.joint_disc(other)?;
        let dv = BigRational::from_integer(d.unwrap_or(0).into());
        let rational = &self.rational * &other.rational + &self.radical * &other.radical * dv;
        let radical = &self.rational * &other.radical + &self.radical * &other.rational;
        Ok(Self::from_parts(rational, radical, d))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let Some(d) = self.disc else {
            return Some(Self::rational(self.rational.recip()));
        };
        let norm = &self.rational * &self.rational
            - &self.radical * &self.radical * BigRational::from_integer(d.into());
        Some(Self::from_parts(
            &self.rational / &norm,
            -(&self.radical / &norm),
            Some(d),
        ))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let inv = other
            .inverse()
            .ok_or_else(|| Error::Malformed("division by zero".into()))?;
        self.checked_mul(&inv)
    }

    /// Exact sign, decided by comparing `p²` with `q²·d`.
    pub fn signum(&self) -> Ordering {
        let p = self.rational.numer().sign();
        let Some(d) = self.disc else {
            return sign_to_ordering(p);
        };
        let q = self.radical.numer().sign();
        match (p, q) {
            (Sign::NoSign, s) | (s, Sign::NoSign) => sign_to_ordering(s),
            (Sign::Plus, Sign::Plus) => Ordering::Greater,
            (Sign::Minus, Sign::Minus) => Ordering::Less,
            (Sign::Plus, Sign::Minus) | (Sign::Minus, Sign::Plus) => {
                let p2 = &self.rational * &self.rational;
                let q2d = &self.radical * &self.radical * BigRational::from_integer(d.into());
                match p2.cmp(&q2d) {
                    Ordering::Greater => sign_to_ordering(p),
                    Ordering::Less => sign_to_ordering(q),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn checked_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(self.checked_sub(other)?.signum())
    }
}

fn sign_to_ordering(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

impl fmt::Debug for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ratio(f, &self.rational)?;
        if let Some(d) = self.disc {
            if self.radical.is_negative() {
                f.write_str("-")?;
                write_ratio(f, &-self.radical.clone())?;
            } else {
                f.write_str("+")?;
                write_ratio(f, &self.radical)?;
            }
            write!(f, "*sqrt({d})")?;
        }
        Ok(())
    }
}

fn scalar_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(?P<p>[+-]?\d+(?:/[+-]?\d+)?)?(?:(?P<sign>[+-])?(?:(?P<q>[+-]?\d+(?:/[+-]?\d+)?)\*)?sqrt\((?P<d>\d+)\))?$",
        )
        .expect("static regex")
    })
}

impl FromStr for Quadratic {
    type Err = Error;

    /// Accepts `p`, `p/q`, `p/q+r/s*sqrt(d)`, `p/q-r/s*sqrt(d)`, `sqrt(d)` and
    /// `r/s*sqrt(d)`. Whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let caps = scalar_regex()
            .captures(&compact)
            .ok_or_else(|| Error::Malformed(format!("cannot parse scalar {s:?}")))?;
        let p = caps.name("p");
        let d = caps.name("d");
        if p.is_none() && d.is_none() {
            return Err(Error::Malformed(format!("empty scalar {s:?}")));
        }
        let rational = match p {
            Some(m) => parse_ratio(m.as_str())?,
            None => BigRational::zero(),
        };
        let Some(d) = d else {
            return Ok(Self::rational(rational));
        };
        if p.is_some() && caps.name("sign").is_none() {
            return Err(Error::Malformed(format!("missing sign before radical in {s:?}")));
        }
        let d: u64 = d
            .as_str()
            .parse()
            .map_err(|_| Error::Malformed(format!("discriminant too large in {s:?}")))?;
        let mut radical = match caps.name("q") {
            Some(m) => parse_ratio(m.as_str())?,
            None => BigRational::one(),
        };
        if caps.name("sign").map(|m| m.as_str()) == Some("-") {
            radical = -radical;
        }
        Ok(Self::new(rational, radical, d))
    }
}

impl PartialOrd for Quadratic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quadratic {
    /// Panics on mixed discriminants, like the arithmetic operators.
    fn cmp(&self, other: &Self) -> Ordering {
        self.checked_cmp(other).expect("comparison across quadratic contexts")
    }
}

impl Add for Quadratic {
    type Output = Quadratic;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("addition across quadratic contexts")
    }
}

impl Sub for Quadratic {
    type Output = Quadratic;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(&rhs).expect("subtraction across quadratic contexts")
    }
}

impl Mul for Quadratic {
    type Output = Quadratic;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs).expect("multiplication across quadratic contexts")
    }
}

impl Div for Quadratic {
    type Output = Quadratic;
    fn div(self, rhs: Self) -> Self {
        self.checked_div(&rhs).expect("division by zero or across quadratic contexts")
    }
}

impl Neg for Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Self {
        Self::from_parts(-self.rational, -self.radical, self.disc)
    }
}

impl Zero for Quadratic {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.disc.is_none() && self.rational.is_zero()
    }
}

impl One for Quadratic {
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
}

impl From<BigRational> for Quadratic {
    fn from(x: BigRational) -> Self {
        Self::rational(x)
    }
}

impl ExactField for Quadratic {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::rational(BigRational::new(numer.into(), denom.into()))
    }

    fn parse_scalar(s: &str) -> Result<Self> {
        s.parse()
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.signum() == Ordering::Less {
            return None;
        }
        let Some(d) = self.disc else {
            if let Some(r) = rational_sqrt(&self.rational) {
                return Some(Self::rational(r));
            }
            // x = t²·f with f square-free gives t·√f
            let x = &self.rational;
            let prod = x.numer() * x.denom();
            let prod = prod.to_u64()?;
            let (outside, inside) = square_free_split(prod);
            let radical = BigRational::new(BigInt::from(outside), x.denom().clone());
            return Some(Self::new(BigRational::zero(), radical, inside));
        };
        // (a + b√d)² = p + q√d  ⇔  a² + d·b² = p, 2ab = q
        let dv = BigRational::from_integer(d.into());
        let norm = &self.rational * &self.rational - &self.radical * &self.radical * &dv;
        let t = rational_sqrt(&norm)?;
        let two = BigRational::from_integer(2.into());
        for a2 in [(&self.rational + &t) / &two, (&self.rational - &t) / &two] {
            if a2.is_zero() {
                continue;
            }
            if let Some(a) = rational_sqrt(&a2) {
                let b = &self.radical / (&two * &a);
                let root = Self::from_parts(a, b, Some(d));
                return Some(if root.signum() == Ordering::Less { -root } else { root });
            }
        }
        None
    }

    fn discriminant(&self) -> Option<u64> {
        self.disc
    }

    fn to_rational(&self) -> Option<BigRational> {
        self.disc.is_none().then(|| self.rational.clone())
    }

    fn to_f64(&self) -> f64 {
        let p = ratio_to_f64(&self.rational);
        match self.disc {
            Some(d) => p + ratio_to_f64(&self.radical) * (d as f64).sqrt(),
            None => p,
        }
    }
}

/// Common discriminant of a collection of scalars, or the first clash.
pub fn shared_discriminant<'a, T: ExactField>(
    values: impl IntoIterator<Item = &'a T>,
) -> Result<Option<u64>> {
    let mut seen: Option<u64> = None;
    for v in values {
        match (seen, v.discriminant()) {
            (Some(a), Some(b)) if a != b => return Err(Error::MixedDiscriminants(a, b)),
            (None, Some(b)) => seen = Some(b),
            _ => {}
        }
    }
    Ok(seen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Quadratic {
        s.parse().unwrap()
    }

    fn raw(p: (i64, i64), r: (i64, i64), d: u64) -> RawQuadratic {
        RawQuadratic {
            p_num: p.0.into(),
            p_den: p.1.into(),
            q_num: r.0.into(),
            q_den: r.1.into(),
            disc: d,
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(Quadratic::normalize(raw((2, 4), (0, 1), 2)).unwrap(), q("1/2"));
        let v = Quadratic::normalize(raw((1, 1), (2, 2), 2)).unwrap();
        assert_eq!(v.to_string(), "1+1*sqrt(2)");
        let v = Quadratic::normalize(raw((3, 6), (-2, -4), 2)).unwrap();
        assert_eq!(v.to_string(), "1/2+1/2*sqrt(2)");
        assert!(Quadratic::normalize(raw((1, 0), (0, 1), 2)).is_err());
    }

    #[test]
    fn square_factors_are_pulled_out() {
        assert_eq!(q("sqrt(8)"), q("2*sqrt(2)"));
        assert_eq!(q("sqrt(9)"), q("3"));
        assert_eq!(q("1+0*sqrt(5)").discriminant(), None);
    }

    #[test]
    fn compare_examples() {
        assert_eq!(q("1/2").cmp(&q("3/4")), Ordering::Less);
        assert_eq!(q("1").cmp(&q("0+1*sqrt(2)")), Ordering::Less);
        let x = q("-3/7+2/5*sqrt(3)");
        assert_eq!(x.cmp(&x), Ordering::Equal);
        assert_eq!(q("3/2").cmp(&q("sqrt(2)")), Ordering::Greater);
        assert_eq!(q("-3/2").cmp(&q("-sqrt(2)")), Ordering::Less);
        assert_eq!(q("1-sqrt(2)").signum(), Ordering::Less);
        assert_eq!(q("-1+sqrt(2)").signum(), Ordering::Greater);
    }

    #[test]
    fn mixed_contexts_are_reported() {
        let a = q("sqrt(2)");
        let b = q("sqrt(3)");
        assert_eq!(a.checked_cmp(&b), Err(Error::MixedDiscriminants(2, 3)));
        assert!(a.checked_cmp(&q("7/5")).is_ok());
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "-7/3", "1/2+1/3*sqrt(2)", "1/2-1/3*sqrt(2)", "0+1*sqrt(5)"] {
            assert_eq!(q(s).to_string(), s);
        }
        assert_eq!(q("1/2+-1/3*sqrt(2)").to_string(), "1/2-1/3*sqrt(2)");
        assert!("1/2 sqrt(2)".parse::<Quadratic>().is_err());
        assert!("".parse::<Quadratic>().is_err());
        assert!("1/0".parse::<Quadratic>().is_err());
    }

    #[test]
    fn inverse_and_division() {
        let x = q("1+sqrt(2)");
        assert_eq!(x.inverse().unwrap(), q("-1+sqrt(2)"));
        assert_eq!(x.clone() / x.clone(), Quadratic::one());
        assert!(Quadratic::zero().inverse().is_none());
    }

    #[test]
    fn square_roots() {
        assert_eq!(q("9/4").sqrt_exact(), Some(q("3/2")));
        assert_eq!(q("2").sqrt_exact(), Some(q("sqrt(2)")));
        assert_eq!(q("1/2").sqrt_exact(), Some(q("1/2*sqrt(2)")));
        assert_eq!(q("3+2*sqrt(2)").sqrt_exact(), Some(q("1+sqrt(2)")));
        assert_eq!(q("1+sqrt(2)").sqrt_exact(), None);
        assert_eq!(q("-4").sqrt_exact(), None);
        let r = BigRational::from_ratio(4, 9);
        assert_eq!(r.sqrt_exact(), Some(BigRational::from_ratio(2, 3)));
        assert_eq!(BigRational::from_ratio(2, 1).sqrt_exact(), None);
    }
}
