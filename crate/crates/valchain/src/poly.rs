//! Univariate polynomials over Q with exact rational coefficients, and the
//! base field Q equipped with a p-adic valuation.
//!
//! Everything downstream is built from a handful of operations defined here:
//! ring arithmetic, division with remainder, expansion of one polynomial in
//! powers of another, Hasse derivatives, and evaluation at rational points.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::value::{parse_rational, GroupValue};

// ====== Errors ======

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyError {
    /// Division with a zero divisor.
    DivideByZero,
    /// Expansion base must have degree >= 1.
    ConstantBase,
    /// Malformed polynomial literal.
    Parse(String),
    /// The modulus of a base field must be prime.
    NotPrime(u64),
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::DivideByZero => write!(f, "polynomial division by zero"),
            PolyError::ConstantBase => {
                write!(f, "expansion base must be a non-constant polynomial")
            }
            PolyError::Parse(msg) => write!(f, "bad polynomial literal: {msg}"),
            PolyError::NotPrime(p) => write!(f, "{p} is not prime"),
        }
    }
}

impl std::error::Error for PolyError {}

// ====== Base field ======

/// The rationals with the p-adic valuation `v_p`, normalized so `v_p(p) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field {
    p: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn new(p: u64) -> Result<Field, PolyError> {
        if is_prime(p) {
            Ok(Field { p })
        } else {
            Err(PolyError::NotPrime(p))
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Multiplicity of p in a nonzero integer. Factorial-scale inputs carry
    /// multiplicities in the hundreds of thousands, so powers of p are
    /// stripped in exponentially growing blocks: ascend through p^(2^k)
    /// while each one divides, then recover the remaining multiplicity by
    /// descending the same ladder. Costs O(log v) big divisions instead of
    /// v single ones, and stays cheap when v is small.
    fn mult(&self, n: &BigInt) -> i64 {
        debug_assert!(!n.is_zero());
        let mut n = n.abs();
        let mut count = 0i64;
        let mut ladder: Vec<(BigInt, i64)> = Vec::new();
        let mut pw = BigInt::from(self.p);
        let mut e = 1i64;
        loop {
            let (q, r) = n.div_rem(&pw);
            if !r.is_zero() {
                break;
            }
            n = q;
            count += e;
            ladder.push((pw.clone(), e));
            let next = &pw * &pw;
            if next.bits() > n.bits() {
                break;
            }
            pw = next;
            e <<= 1;
        }
        while let Some((pw, e)) = ladder.pop() {
            let (q, r) = n.div_rem(&pw);
            if r.is_zero() {
                n = q;
                count += e;
            }
        }
        count
    }

    /// `v_p(r)` as a rank-one group value; `v_p(0) = inf`.
    pub fn v(&self, r: &BigRational) -> GroupValue {
        if r.is_zero() {
            return GroupValue::infinity();
        }
        let v = self.mult(r.numer()) - self.mult(r.denom());
        GroupValue::from_int(v)
    }
}

// ====== Coefficient arithmetic ======
//
// `Ratio` re-normalizes with a gcd after every operation, and num-bigint's
// binary gcd walks the full bit length of its inputs even against 1. Digit
// stream approximants reach hundreds of kilobits, where that no-op
// "reduction" dominates all real work, so integer-valued coefficients are
// combined with raw `BigInt` arithmetic and `new_raw` instead.

fn q_add(a: &BigRational, b: &BigRational) -> BigRational {
    if a.denom().is_one() && b.denom().is_one() {
        BigRational::new_raw(a.numer() + b.numer(), BigInt::one())
    } else {
        a + b
    }
}

fn q_sub(a: &BigRational, b: &BigRational) -> BigRational {
    if a.denom().is_one() && b.denom().is_one() {
        BigRational::new_raw(a.numer() - b.numer(), BigInt::one())
    } else {
        a - b
    }
}

fn q_mul(a: &BigRational, b: &BigRational) -> BigRational {
    if a.denom().is_one() && b.denom().is_one() {
        BigRational::new_raw(a.numer() * b.numer(), BigInt::one())
    } else {
        a * b
    }
}

fn q_neg(a: &BigRational) -> BigRational {
    BigRational::new_raw(-a.numer().clone(), a.denom().clone())
}

// ====== Polynomials ======

/// A polynomial in one variable X with rational coefficients, stored densely
/// from the constant term upward with no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Poly {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Poly {
        Poly::new(vec![c])
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    /// The variable X.
    pub fn x() -> Poly {
        Poly::from_ints(&[0, 1])
    }

    /// Convenience constructor from integer coefficients, constant term first.
    pub fn from_ints(coeffs: &[i64]) -> Poly {
        Poly::new(coeffs.iter().map(|&n| BigRational::from_integer(BigInt::from(n))).collect())
    }

    /// `c * X^k`.
    pub fn monomial(c: BigRational, k: usize) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of a nonzero polynomial; the zero polynomial reports 0, so
    /// check `is_zero` first where the distinction matters.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_one()
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| q_add(&self.coeff(i), &rhs.coeff(i))).collect())
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| q_sub(&self.coeff(i), &rhs.coeff(i))).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(q_neg).collect())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = q_add(&coeffs[i + j], &q_mul(a, b));
            }
        }
        Poly::new(coeffs)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| q_mul(a, c)).collect())
    }

    pub fn pow(&self, mut n: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly), PolyError> {
        if divisor.is_zero() {
            return Err(PolyError::DivideByZero);
        }
        let d = divisor.degree();
        let monic = divisor.is_monic();
        let lead_inv = BigRational::one() / divisor.leading_coeff();
        let mut rem = self.coeffs.clone();
        let mut quot: Vec<BigRational> = Vec::new();
        while rem.len() > d {
            let k = rem.len() - 1 - d;
            let factor = if monic {
                rem.last().unwrap().clone()
            } else {
                q_mul(rem.last().unwrap(), &lead_inv)
            };
            if quot.len() < k + 1 {
                quot.resize(k + 1, BigRational::zero());
            }
            quot[k] = factor.clone();
            for (j, b) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = q_sub(&rem[k + j], &q_mul(&factor, b));
            }
            while rem.last().map_or(false, |c| c.is_zero()) {
                rem.pop();
            }
            // the leading term always cancels exactly
            debug_assert!(rem.len() <= k + d);
        }
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Expansion of `self` in powers of `base`:
    /// `self = sum_i out[i] * base^i` with `deg out[i] < deg base`.
    pub fn expansion(&self, base: &Poly) -> Result<Vec<Poly>, PolyError> {
        if base.is_zero() || base.degree() == 0 {
            return Err(PolyError::ConstantBase);
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        while !rest.is_zero() {
            let (q, r) = rest.div_rem(base)?;
            out.push(r);
            rest = q;
        }
        if out.is_empty() {
            out.push(Poly::zero());
        }
        Ok(out)
    }

    /// Coefficients of `self` written in powers of `(X - a)`.
    pub fn taylor_at(&self, a: &BigRational) -> Vec<Poly> {
        let base = Poly::new(vec![q_neg(a), BigRational::one()]);
        self.expansion(&base).expect("X - a has degree 1")
    }

    /// Hasse derivative of order `b`: the coefficient of `Y^b` in
    /// `self(X + Y)` as a polynomial in X.
    pub fn hasse_derivative(&self, b: usize) -> Poly {
        if b > self.degree() || self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() - b];
        for (i, a) in self.coeffs.iter().enumerate().skip(b) {
            if a.is_zero() {
                continue;
            }
            let binom = num_integer::binomial(BigInt::from(i), BigInt::from(b));
            coeffs[i - b] = q_mul(a, &BigRational::from_integer(binom));
        }
        Poly::new(coeffs)
    }

    /// Ordinary first derivative.
    pub fn derivative(&self) -> Poly {
        self.hasse_derivative(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = q_add(&q_mul(&acc, x), c);
        }
        acc
    }

    /// Substitute another polynomial for X.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }
}

// ====== Text form ======
//
// Sums of monomial terms: `X^4 - 4*X^2 - 4*X + 4`, `3/2*X`, `-7`. The parser
// accepts optional `*`, either case for the variable, and arbitrary spacing.

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let one = BigRational::one();
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let unit_coeff = mag == one;
            match (k, unit_coeff) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "X")?,
                (1, false) => write!(f, "{mag}*X")?,
                (_, true) => write!(f, "X^{k}")?,
                (_, false) => write!(f, "{mag}*X^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl FromStr for Poly {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(PolyError::Parse("empty input".into()));
        }
        // split into signed terms at '+' / '-' not preceded by '^' exponent digits'
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = match compact.chars().next() {
            Some('-') => true,
            Some('+') => false,
            _ => false,
        };
        let body: &str = compact.trim_start_matches(['+', '-']);
        if body.is_empty() {
            return Err(PolyError::Parse(format!("dangling sign in {s:?}")));
        }
        for ch in body.chars() {
            if ch == '+' || ch == '-' {
                if current.is_empty() {
                    return Err(PolyError::Parse(format!("dangling sign in {s:?}")));
                }
                terms.push((negative, std::mem::take(&mut current)));
                negative = ch == '-';
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(PolyError::Parse(format!("dangling sign in {s:?}")));
        }
        terms.push((negative, current));

        let mut acc = Poly::zero();
        for (neg, term) in terms {
            let mono = parse_term(&term)
                .map_err(|msg| PolyError::Parse(format!("{msg} in {s:?}")))?;
            acc = if neg { acc.sub(&mono) } else { acc.add(&mono) };
        }
        Ok(acc)
    }
}

/// One unsigned term: `3/2*X^4`, `X^2`, `5*X`, `X`, `7`, `2X^3` (implicit `*`).
fn parse_term(term: &str) -> Result<Poly, String> {
    let var_at = term.find(['x', 'X']);
    let (coeff_part, var_part) = match var_at {
        Some(i) => (&term[..i], &term[i..]),
        None => (term, ""),
    };
    let coeff = match coeff_part.strip_suffix('*').unwrap_or(coeff_part) {
        "" => BigRational::one(),
        lit => parse_rational(lit).map_err(|_| format!("bad coefficient {lit:?}"))?,
    };
    if var_part.is_empty() {
        return Ok(Poly::constant(coeff));
    }
    let exp_part = &var_part[1..];
    let exp: usize = match exp_part.strip_prefix('^') {
        None if exp_part.is_empty() => 1,
        None => return Err(format!("unexpected {exp_part:?} after variable")),
        Some(digits) => digits
            .parse()
            .map_err(|_| format!("bad exponent {digits:?}"))?,
    };
    Ok(Poly::monomial(coeff, exp))
}

// ====== Tests ======
