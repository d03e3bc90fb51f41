//! Exact rational helpers: parsing, square tests and square classes.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"`, `"p"` or a plain decimal like `"-1.5"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let bad = || Error::Parse(format!("cannot parse rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            t => t.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = int_part.abs() * &scale + frac_part;
        let num = if negative { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Renders a rational as `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratio of huge integers; scale down before converting
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn is_square_integer(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// True iff `r` is the square of a rational (zero counts as a square).
pub fn is_rational_square(r: &Rational) -> bool {
    is_square_integer(r.numer()) && is_square_integer(r.denom())
}

/// Exact square root of a rational square, if it is one.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if !is_rational_square(r) {
        return None;
    }
    Some(Rational::new(r.numer().sqrt(), r.denom().sqrt()))
}

fn to_u128(n: &BigInt) -> Result<u128> {
    n.abs()
        .to_u128()
        .ok_or_else(|| Error::TooLarge(format!("{n} exceeds the 128-bit factorization limit")))
}

fn odd_exponent_primes(n: u128, into: &mut BTreeSet<u64>) -> Result<()> {
    if n <= 1 {
        return Ok(());
    }
    for (p, e) in num_prime::nt_funcs::factorize128(n) {
        if e % 2 == 1 {
            let p = u64::try_from(p)
                .map_err(|_| Error::TooLarge(format!("prime factor {p} exceeds 64 bits")))?;
            // p appears in both numerator and denominator at most once after reduction
            if !into.remove(&p) {
                into.insert(p);
            }
        }
    }
    Ok(())
}

/// The class of a nonzero rational modulo nonzero squares: a sign and the
/// set of primes dividing its squarefree part. Multiplication of classes is
/// sign product plus symmetric difference of prime sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    negative: bool,
    primes: BTreeSet<u64>,
}

impl SquareClass {
    pub fn one() -> Self {
        SquareClass {
            negative: false,
            primes: BTreeSet::new(),
        }
    }

    pub fn minus_one() -> Self {
        SquareClass {
            negative: true,
            primes: BTreeSet::new(),
        }
    }

    pub fn from_rational(r: &Rational) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::InvalidForm("zero has no square class".into()));
        }
        let mut primes = BTreeSet::new();
        odd_exponent_primes(to_u128(r.numer())?, &mut primes)?;
        odd_exponent_primes(to_u128(r.denom())?, &mut primes)?;
        Ok(SquareClass {
            negative: r.is_negative(),
            primes,
        })
    }

    pub fn from_i64(n: i64) -> Result<Self> {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_square(&self) -> bool {
        !self.negative && self.primes.is_empty()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    pub fn contains_prime(&self, p: u64) -> bool {
        self.primes.contains(&p)
    }

    pub fn mul(&self, other: &Self) -> Self {
        SquareClass {
            negative: self.negative != other.negative,
            primes: self
                .primes
                .symmetric_difference(&other.primes)
                .copied()
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        SquareClass {
            negative: !self.negative,
            primes: self.primes.clone(),
        }
    }

    /// The squarefree integer representative.
    pub fn to_bigint(&self) -> BigInt {
        let mag = self
            .primes
            .iter()
            .fold(BigInt::one(), |acc, &p| acc * BigInt::from(p));
        if self.negative {
            -mag
        } else {
            mag
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_bigint().to_i64()
    }

    /// Residue of the representative with the prime `p` removed, modulo `m`.
    pub(crate) fn unit_part_mod(&self, p: u64, m: u64) -> u64 {
        let m128 = m as u128;
        let mut acc: u128 = 1 % m128;
        for &q in &self.primes {
            if q != p {
                acc = acc * (q as u128 % m128) % m128;
            }
        }
        if self.negative {
            acc = (m128 - acc) % m128;
        }
        acc as u64
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bigint())
    }
}

/// Squarefree integer with the same sign and square class as `r`.
pub fn squarefree_part(r: &Rational) -> Result<BigInt> {
    Ok(SquareClass::from_rational(r)?.to_bigint())
}
