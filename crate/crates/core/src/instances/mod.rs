//! Geometric violator spaces given by live oracles: smallest enclosing
//! balls of point sets and two-dimensional linear programs.
//!
//! Both are generic over a [`Scalar`]. Exact rationals are the default; the
//! float instantiations exist for quick experiments and make no promises on
//! boundary cases.

mod lp2d;
mod miniball;

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use thiserror::Error;

use crate::explicit::{ExplicitError, ExplicitViolatorSpace};
use crate::oracle::ViolatorSpace;
use crate::set::ConstraintSet;

pub use lp2d::{HalfplaneLp, ImplicitRegion, Point2};
pub use miniball::{Ball, PointSet, MAX_MINIBALL_DIM};

/// Largest ground set [`tabulate`] accepts.
pub const TABULATE_MAX_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("point {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("dimension {0} exceeds the exact-arithmetic limit of {MAX_MINIBALL_DIM}")]
    DimensionTooLarge(usize),
    #[error("an instance needs at least one constraint")]
    Empty,
    #[error("halfplane {0} has a zero normal vector")]
    DegenerateHalfplane(usize),
    #[error("the implicit region intersected with all halfplanes is empty")]
    Infeasible,
    #[error("the implicit box is empty")]
    EmptyBox,
    #[error("{n} constraints exceed the tabulation limit of {TABULATE_MAX_N}")]
    TooLarge { n: usize },
    #[error("cannot parse {0:?} as a number")]
    BadNumber(String),
    #[error(transparent)]
    Explicit(#[from] ExplicitError),
}

/// Ordered field used for coordinates.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// Parses an integer, a fraction `p/q`, or a decimal `x.y`.
    fn parse_scalar(s: &str) -> Result<Self, InstanceError>;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let mut num = BigInt::from_str(&digits).ok()?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(num, den));
    }
    BigInt::from_str(t).ok().map(BigRational::from_integer)
}

impl Scalar for BigRational {
    fn parse_scalar(s: &str) -> Result<Self, InstanceError> {
        parse_rational(s).ok_or_else(|| InstanceError::BadNumber(s.to_string()))
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn parse_scalar(s: &str) -> Result<Self, InstanceError> {
        parse_rational(s)
            .and_then(|r| ToPrimitive::to_f64(&r))
            .ok_or_else(|| InstanceError::BadNumber(s.to_string()))
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn parse_scalar(s: &str) -> Result<Self, InstanceError> {
        f64::parse_scalar(s).map(|v| v as f32)
    }

    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

pub(crate) fn abs<T: Scalar>(v: &T) -> T {
    if *v < T::zero() {
        T::zero() - v.clone()
    } else {
        v.clone()
    }
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting on
/// absolute value. `None` if `m` is singular.
pub(crate) fn solve_linear<T: Scalar>(mut m: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k)
            .filter(|&r| !m[r][col].is_zero())
            .max_by(|&r, &s| {
                abs(&m[r][col])
                    .partial_cmp(&abs(&m[s][col]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        m.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..k {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / m[col][col].clone();
            let (top, rest) = m.split_at_mut(r);
            for (x, p) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *x = x.clone() - p.clone() * f.clone();
            }
            let v = b[col].clone() * f;
            b[r] = b[r].clone() - v;
        }
    }
    let mut x = vec![T::zero(); k];
    for r in (0..k).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..k {
            acc = acc - m[r][c].clone() * x[c].clone();
        }
        x[r] = acc / m[r][r].clone();
    }
    Some(x)
}

/// The explicit table of a small oracle: `V(G)` for every `G`, by scanning
/// all `h ∉ G` without touching any call counter.
pub fn tabulate<S: ViolatorSpace + ?Sized>(space: &S) -> Result<ExplicitViolatorSpace, InstanceError> {
    let n = space.ground_size();
    if n > TABULATE_MAX_N {
        return Err(InstanceError::TooLarge { n });
    }
    Ok(ExplicitViolatorSpace::from_fn(n, |g| {
        let set = ConstraintSet::from_mask(n, g as u64);
        space.violators(&set).to_mask().expect("n <= 16") as u32
    })?)
}
