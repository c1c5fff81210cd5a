//! Arbitrary-precision rational helpers shared across the crate.
//!
//! All exact quantities (squared magnitudes, phases in turns, eigenvalues,
//! payoffs, weights) are `Ratio<BigInt>`. Rationals cross the serialization
//! boundary as decimal-free `"p/q"` strings so float formatting can never
//! corrupt exact inputs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Shorthand constructor from machine integers (panics on q = 0).
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Parses `"p/q"` or `"p"` with optional sign, no whitespace, no decimals.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let mut parts = s.splitn(2, '/');
    let numer = parts.next().unwrap_or("");
    let numer: BigInt = numer
        .parse()
        .map_err(|_| format!("invalid rational numerator in {s:?}"))?;
    match parts.next() {
        None => Ok(Rat::from_integer(numer)),
        Some(d) => {
            let denom: BigInt = d
                .parse()
                .map_err(|_| format!("invalid rational denominator in {s:?}"))?;
            if denom.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(Rat::new(numer, denom))
        }
    }
}

/// Canonical display form: reduced, `"p"` when the denominator is 1, else `"p/q"`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float (every finite f64 is a dyadic rational).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Floors `x` to a multiple of `10^-digits`.
pub fn truncate_decimal(x: &Rat, digits: u32) -> Rat {
    let scale = Rat::from_integer(BigInt::from(10u32).pow(digits));
    (x * &scale).floor() / scale
}

/// Exact square root when `r` is the square of a rational, `None` otherwise.
pub fn sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let sp = r.numer().sqrt();
    let sq = r.denom().sqrt();
    if &(&sp * &sp) == r.numer() && &(&sq * &sq) == r.denom() {
        Some(Rat::new(sp, sq))
    } else {
        None
    }
}

/// Least common multiple of the denominators of a nonempty slice.
pub fn denominator_lcm(rs: &[Rat]) -> BigInt {
    rs.iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Wraps a phase measured in turns into the canonical interval [0, 1).
pub fn wrap_turns(p: &Rat) -> Rat {
    p - p.floor()
}
