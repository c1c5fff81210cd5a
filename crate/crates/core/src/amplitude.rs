//! Complex amplitudes in exact polar form or as float pairs.
//!
//! The exact form stores the squared magnitude `mag2 = |c|²` as a non-negative
//! rational and the phase as a rational number of turns in [0, 1). Every
//! construction the derivation needs — phase rotation, permutation, splitting a
//! channel into `z` equal sub-channels (divide `mag2` by `z`) — is closed over
//! this representation, while a rational (re, im) pair could not represent
//! `1/√2` at all. The price is that sums of non-parallel exact amplitudes are
//! generally not representable; [`sum_exact`] reports this as
//! [`CoreError::ExactClosure`] and callers fall back to float mode explicitly.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::CoreError;
use crate::rational::{rat, rat_to_f64, sqrt_exact, wrap_turns, Rat};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub enum Amplitude {
    Exact { mag2: Rat, phase: Rat },
    Float { re: f64, im: f64 },
}

impl Amplitude {
    /// Exact amplitude with squared magnitude `mag2` and phase in turns.
    /// The phase is wrapped into [0, 1); a zero magnitude forces phase 0.
    pub fn exact(mag2: Rat, phase: Rat) -> Result<Self, CoreError> {
        if mag2.is_negative() {
            return Err(CoreError::InvalidAmplitude(format!(
                "mag2 must be non-negative, got {mag2}"
            )));
        }
        if mag2.is_zero() {
            return Ok(Amplitude::Exact {
                mag2,
                phase: Rat::zero(),
            });
        }
        Ok(Amplitude::Exact {
            mag2,
            phase: wrap_turns(&phase),
        })
    }

    /// Exact amplitude with phase 0.
    pub fn from_mag2(mag2: Rat) -> Result<Self, CoreError> {
        Self::exact(mag2, Rat::zero())
    }

    pub fn float(re: f64, im: f64) -> Result<Self, CoreError> {
        if !re.is_finite() || !im.is_finite() {
            return Err(CoreError::InvalidAmplitude(format!(
                "float amplitude must be finite, got ({re}, {im})"
            )));
        }
        Ok(Amplitude::Float { re, im })
    }

    pub fn zero_exact() -> Self {
        Amplitude::Exact {
            mag2: Rat::zero(),
            phase: Rat::zero(),
        }
    }

    pub fn one_exact() -> Self {
        Amplitude::Exact {
            mag2: Rat::from_integer(BigInt::from(1)),
            phase: Rat::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Amplitude::Exact { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Amplitude::Exact { mag2, .. } => mag2.is_zero(),
            Amplitude::Float { re, im } => *re == 0.0 && *im == 0.0,
        }
    }

    /// Squared magnitude |c|²; exact in exact mode.
    pub fn mag2(&self) -> Value {
        match self {
            Amplitude::Exact { mag2, .. } => Value::Exact(mag2.clone()),
            Amplitude::Float { re, im } => Value::Float(re * re + im * im),
        }
    }

    pub fn conj(&self) -> Amplitude {
        match self {
            Amplitude::Exact { mag2, phase } => Amplitude::exact(mag2.clone(), -phase)
                .expect("conjugate of a valid amplitude is valid"),
            Amplitude::Float { re, im } => Amplitude::Float { re: *re, im: -im },
        }
    }

    /// Complex product. Exact × exact stays exact (magnitudes multiply,
    /// phases add); any float operand yields a float product.
    pub fn mul(&self, rhs: &Amplitude) -> Amplitude {
        match (self, rhs) {
            (
                Amplitude::Exact { mag2: m1, phase: p1 },
                Amplitude::Exact { mag2: m2, phase: p2 },
            ) => Amplitude::exact(m1 * m2, p1 + p2).expect("product of valid amplitudes is valid"),
            _ => {
                let (ar, ai) = self.to_float_pair();
                let (br, bi) = rhs.to_float_pair();
                Amplitude::Float {
                    re: ar * br - ai * bi,
                    im: ar * bi + ai * br,
                }
            }
        }
    }

    /// Multiplies by the unit phase e^{2πi·turns}.
    pub fn rotate(&self, turns: &Rat) -> Amplitude {
        match self {
            Amplitude::Exact { mag2, phase } => Amplitude::exact(mag2.clone(), phase + turns)
                .expect("rotation of a valid amplitude is valid"),
            Amplitude::Float { re, im } => {
                let theta = TAU * rat_to_f64(turns);
                let (s, c) = theta.sin_cos();
                Amplitude::Float {
                    re: re * c - im * s,
                    im: re * s + im * c,
                }
            }
        }
    }

    /// Divides the amplitude by √z, i.e. divides mag2 by z. This is the
    /// channel-splitting step and is exact for every positive integer z.
    pub fn split(&self, z: u64) -> Amplitude {
        debug_assert!(z >= 1);
        match self {
            Amplitude::Exact { mag2, phase } => Amplitude::Exact {
                mag2: mag2 / Rat::from_integer(BigInt::from(z)),
                phase: phase.clone(),
            },
            Amplitude::Float { re, im } => {
                let r = (z as f64).sqrt();
                Amplitude::Float {
                    re: re / r,
                    im: im / r,
                }
            }
        }
    }

    /// Cartesian (re, im) view; exact amplitudes convert through f64.
    pub fn to_float_pair(&self) -> (f64, f64) {
        match self {
            Amplitude::Exact { mag2, phase } => {
                let r = rat_to_f64(mag2).sqrt();
                let theta = TAU * rat_to_f64(phase);
                (r * theta.cos(), r * theta.sin())
            }
            Amplitude::Float { re, im } => (*re, *im),
        }
    }

    pub fn to_float(&self) -> Amplitude {
        let (re, im) = self.to_float_pair();
        Amplitude::Float { re, im }
    }

    pub fn approx_eq(&self, rhs: &Amplitude, tol: f64) -> bool {
        match (self, rhs) {
            (Amplitude::Exact { .. }, Amplitude::Exact { .. }) => self == rhs,
            _ => {
                let (ar, ai) = self.to_float_pair();
                let (br, bi) = rhs.to_float_pair();
                (ar - br).abs() <= tol && (ai - bi).abs() <= tol
            }
        }
    }
}

/// Exact sum of exact amplitudes.
///
/// Representable sums are exactly those whose nonzero terms all lie on one
/// line through the origin (pairwise phase differences 0 or 1/2 turn) with
/// pairwise magnitude ratios that are squares of rationals. Everything else
/// is an [`CoreError::ExactClosure`] error.
pub fn sum_exact(terms: &[Amplitude]) -> Result<Amplitude, CoreError> {
    let half = rat(1, 2);
    // (mag2, direction in [0,1/2), sign along that direction)
    let mut nonzero: Vec<(&Rat, Rat, i8)> = Vec::new();
    for t in terms {
        match t {
            Amplitude::Float { .. } => return Err(CoreError::MixedMode),
            Amplitude::Exact { mag2, phase } => {
                if mag2.is_zero() {
                    continue;
                }
                if phase < &half {
                    nonzero.push((mag2, phase.clone(), 1));
                } else {
                    nonzero.push((mag2, phase - &half, -1));
                }
            }
        }
    }
    let Some((base_mag2, direction, _)) = nonzero.first().cloned() else {
        return Ok(Amplitude::zero_exact());
    };
    let mut total = Rat::zero();
    for (mag2, dir, sign) in &nonzero {
        if *dir != direction {
            return Err(CoreError::ExactClosure(format!(
                "summands with phase directions {direction} and {dir} turns are not parallel"
            )));
        }
        let ratio = *mag2 / base_mag2;
        let q = sqrt_exact(&ratio).ok_or_else(|| {
            CoreError::ExactClosure(format!(
                "magnitude ratio {ratio} is not the square of a rational"
            ))
        })?;
        if *sign > 0 {
            total += q;
        } else {
            total -= q;
        }
    }
    if total.is_zero() {
        return Ok(Amplitude::zero_exact());
    }
    let mag2 = &total * &total * base_mag2;
    let phase = if total.is_positive() {
        direction
    } else {
        direction + half
    };
    Amplitude::exact(mag2, phase)
}

/// Sum that falls back to float arithmetic when the exact sum is not
/// representable (or when any term is already float).
pub fn sum_with_fallback(terms: &[Amplitude]) -> Amplitude {
    if terms.iter().all(Amplitude::is_exact) {
        if let Ok(a) = sum_exact(terms) {
            return a;
        }
    }
    let (mut re, mut im) = (0.0, 0.0);
    for t in terms {
        let (r, i) = t.to_float_pair();
        re += r;
        im += i;
    }
    Amplitude::Float { re, im }
}
