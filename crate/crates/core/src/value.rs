//! Scalar values that are exact rationals when possible and floats otherwise.
//!
//! Expectation values, weights, and probabilities all flow through [`Value`].
//! Arithmetic between two exact operands stays exact; any float operand
//! contaminates the result to float, mirroring how the engine degrades from
//! exact to numeric mode.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::{format_rat, rat_to_f64, Rat};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rat),
    Float(f64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(Rat::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Float(x) => *x == 0.0,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => rat_to_f64(r),
            Value::Float(x) => *x,
        }
    }

    pub fn add(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => Value::Float(self.to_f64() + rhs.to_f64()),
        }
    }

    pub fn sub(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => Value::Float(self.to_f64() - rhs.to_f64()),
        }
    }

    pub fn mul(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            _ => Value::Float(self.to_f64() * rhs.to_f64()),
        }
    }

    /// Division; exact division by exact zero is the caller's bug and panics.
    pub fn div(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a / b),
            _ => Value::Float(self.to_f64() / rhs.to_f64()),
        }
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(-a),
            Value::Float(x) => Value::Float(-x),
        }
    }

    /// Absolute difference as f64, usable across modes.
    pub fn abs_diff_f64(&self, rhs: &Value) -> f64 {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => rat_to_f64(&(a - b).abs()),
            _ => (self.to_f64() - rhs.to_f64()).abs(),
        }
    }

    pub fn approx_eq(&self, rhs: &Value, tol: f64) -> bool {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => self.abs_diff_f64(rhs) <= tol,
        }
    }

    /// Total order for sorting; mixed modes compare through f64.
    pub fn cmp_values(&self, rhs: &Value) -> Ordering {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&rhs.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{}", format_rat(r)),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl From<Rat> for Value {
    fn from(r: Rat) -> Self {
        Value::Exact(r)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}
