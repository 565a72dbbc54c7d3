//! Elements of the value group: finite lexicographic tuples of exact
//! rationals, plus a formal top element written `inf`.
//!
//! Tuples compare coordinate by coordinate, most significant first, and a
//! shorter tuple behaves as if zero-padded on the right. Values are kept
//! canonical by trimming trailing zero coordinates, so `(1/2, 0)` and `1/2`
//! are the same element and the zero element is the empty tuple. `inf` is
//! absorbing under addition and strictly greater than every finite value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

// ====== Errors ======

/// Arithmetic or parse failure on value-group elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueError {
    /// `n * inf` with `n <= 0` has no consistent meaning.
    ScaleInfinity(i64),
    /// Subtraction with an infinite right-hand side.
    SubtractInfinity,
    /// Division of `inf` by a positive integer.
    DivideInfinity,
    /// Division by zero.
    DivideByZero,
    /// Malformed textual value.
    Parse(String),
}

impl fmt::Display for ValueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueError::ScaleInfinity(n) => {
                write!(f, "{n} * inf is undefined (scale factor must be >= 1)")
            }
            ValueError::SubtractInfinity => write!(f, "cannot subtract inf"),
            ValueError::DivideInfinity => write!(f, "cannot divide inf"),
            ValueError::DivideByZero => write!(f, "division by zero"),
            ValueError::Parse(msg) => write!(f, "bad value literal: {msg}"),
        }
    }
}

impl std::error::Error for ValueError {}

// ====== GroupValue ======

#[derive(Clone, Debug, PartialEq, Eq)]
enum Inner {
    Finite(Vec<BigRational>),
    Infinity,
}

/// An element of a totally ordered abelian group of finite rank, or `inf`.
///
/// The representation is canonical (no trailing zero coordinates), so derived
/// equality agrees with the zero-padded lexicographic comparison.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupValue {
    inner: Inner,
}

impl GroupValue {
    /// The formal top element.
    pub fn infinity() -> Self {
        GroupValue { inner: Inner::Infinity }
    }

    /// The neutral element (empty tuple).
    pub fn zero() -> Self {
        GroupValue { inner: Inner::Finite(Vec::new()) }
    }

    /// Finite value from explicit coordinates; trailing zeros are trimmed.
    pub fn finite(mut coords: Vec<BigRational>) -> Self {
        while coords.last().map_or(false, |c| c.is_zero()) {
            coords.pop();
        }
        GroupValue { inner: Inner::Finite(coords) }
    }

    /// Rank-one value living in the most significant coordinate.
    pub fn from_rational(r: BigRational) -> Self {
        GroupValue::finite(vec![r])
    }

    /// Convenience constructor for a rank-one rational `n/d`.
    pub fn rational(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        GroupValue::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Rank-one integer value.
    pub fn from_int(n: i64) -> Self {
        GroupValue::rational(n, 1)
    }

    /// The unit vector in coordinate `k` (0-based). For `k >= 1` this is a
    /// positive infinitesimal relative to every positive value supported on
    /// earlier coordinates.
    pub fn unit_in_coord(k: usize) -> Self {
        let mut coords = vec![BigRational::zero(); k + 1];
        coords[k] = BigRational::new(BigInt::from(1), BigInt::from(1));
        GroupValue::finite(coords)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.inner, Inner::Infinity)
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.inner, Inner::Finite(c) if c.is_empty())
    }

    /// Number of stored coordinates (0 for the zero element and for `inf`).
    pub fn rank(&self) -> usize {
        match &self.inner {
            Inner::Finite(c) => c.len(),
            Inner::Infinity => 0,
        }
    }

    /// Coordinates of a finite value (canonical, trailing zeros trimmed).
    pub fn coords(&self) -> Option<&[BigRational]> {
        match &self.inner {
            Inner::Finite(c) => Some(c),
            Inner::Infinity => None,
        }
    }

    /// The value as a single rational if it is finite of rank <= 1.
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.inner {
            Inner::Finite(c) if c.is_empty() => Some(BigRational::zero()),
            Inner::Finite(c) if c.len() == 1 => Some(c[0].clone()),
            _ => None,
        }
    }

    /// `n * self` for any integer `n`. Rejects `n <= 0` on `inf`.
    pub fn scaled(&self, n: i64) -> Result<GroupValue, ValueError> {
        match &self.inner {
            Inner::Infinity => {
                if n >= 1 {
                    Ok(GroupValue::infinity())
                } else {
                    Err(ValueError::ScaleInfinity(n))
                }
            }
            Inner::Finite(c) => {
                let factor = BigRational::new(BigInt::from(n), BigInt::from(1));
                Ok(GroupValue::finite(c.iter().map(|x| x * &factor).collect()))
            }
        }
    }

    /// `n * self` for `n >= 1`; total (infinity stays infinity).
    pub(crate) fn mul_pos(&self, n: u64) -> GroupValue {
        debug_assert!(n >= 1);
        match &self.inner {
            Inner::Infinity => GroupValue::infinity(),
            Inner::Finite(c) => {
                let factor = BigRational::new(BigInt::from(n), BigInt::from(1));
                GroupValue::finite(c.iter().map(|x| x * &factor).collect())
            }
        }
    }

    /// `-self`; rejects `inf`.
    pub fn negated(&self) -> Result<GroupValue, ValueError> {
        self.scaled(-1)
    }

    /// `self - rhs`; rejects an infinite `rhs`.
    pub fn minus(&self, rhs: &GroupValue) -> Result<GroupValue, ValueError> {
        match &rhs.inner {
            Inner::Infinity => Err(ValueError::SubtractInfinity),
            Inner::Finite(_) => Ok(self + &rhs.negated()?),
        }
    }

    /// `self / n` for a positive integer `n` (the ambient group is divisible).
    pub fn divided(&self, n: u64) -> Result<GroupValue, ValueError> {
        if n == 0 {
            return Err(ValueError::DivideByZero);
        }
        match &self.inner {
            Inner::Infinity => Err(ValueError::DivideInfinity),
            Inner::Finite(c) => {
                let factor = BigRational::new(BigInt::from(1), BigInt::from(n));
                Ok(GroupValue::finite(c.iter().map(|x| x * &factor).collect()))
            }
        }
    }

    /// Minimum of an iterator of values; `inf` if the iterator is empty.
    pub fn min_of<I: IntoIterator<Item = GroupValue>>(values: I) -> GroupValue {
        values
            .into_iter()
            .fold(GroupValue::infinity(), |acc, v| if v < acc { v } else { acc })
    }
}

impl Ord for GroupValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.inner, &other.inner) {
            (Inner::Infinity, Inner::Infinity) => Ordering::Equal,
            (Inner::Infinity, Inner::Finite(_)) => Ordering::Greater,
            (Inner::Finite(_), Inner::Infinity) => Ordering::Less,
            (Inner::Finite(a), Inner::Finite(b)) => {
                let zero = BigRational::zero();
                let n = a.len().max(b.len());
                for i in 0..n {
                    let x = a.get(i).unwrap_or(&zero);
                    let y = b.get(i).unwrap_or(&zero);
                    match x.cmp(y) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
        }
    }
}

impl PartialOrd for GroupValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Add for &GroupValue {
    type Output = GroupValue;

    fn add(self, rhs: &GroupValue) -> GroupValue {
        match (&self.inner, &rhs.inner) {
            (Inner::Infinity, _) | (_, Inner::Infinity) => GroupValue::infinity(),
            (Inner::Finite(a), Inner::Finite(b)) => {
                let zero = BigRational::zero();
                let n = a.len().max(b.len());
                let coords = (0..n)
                    .map(|i| a.get(i).unwrap_or(&zero) + b.get(i).unwrap_or(&zero))
                    .collect();
                GroupValue::finite(coords)
            }
        }
    }
}

impl std::ops::Add for GroupValue {
    type Output = GroupValue;

    fn add(self, rhs: GroupValue) -> GroupValue {
        &self + &rhs
    }
}

// ====== Text form ======
//
// `inf`, a bare rational like `3/2` or `-7`, or a tuple `(1/2, 0, -3)`.

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Inner::Infinity => write!(f, "inf"),
            Inner::Finite(c) if c.is_empty() => write!(f, "0"),
            Inner::Finite(c) if c.len() == 1 => write!(f, "{}", c[0]),
            Inner::Finite(c) => {
                write!(f, "(")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupValue({self})")
    }
}

/// Parse a rational literal, rejecting zero denominators instead of panicking.
pub(crate) fn parse_rational(s: &str) -> Result<BigRational, ValueError> {
    let s = s.trim();
    let bad = || ValueError::Parse(format!("expected a rational, found {s:?}"));
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = numer.parse().map_err(|_| bad())?;
    let d: BigInt = match denom {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if d.is_zero() {
        return Err(ValueError::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

impl FromStr for GroupValue {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(GroupValue::infinity());
        }
        if let Some(body) = s.strip_prefix('(') {
            let body = body
                .strip_suffix(')')
                .ok_or_else(|| ValueError::Parse(format!("unclosed tuple {s:?}")))?;
            let coords = body
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>, _>>()?;
            if coords.is_empty() {
                return Err(ValueError::Parse("empty tuple".into()));
            }
            return Ok(GroupValue::finite(coords));
        }
        Ok(GroupValue::from_rational(parse_rational(s)?))
    }
}

// ====== Tests ======
