//! Finitely presented valuations on Q[X]: a depth-zero (monomial) valuation
//! followed by a tower of ordinary augmentations.
//!
//! A depth-zero valuation is determined by a center `alpha` in Q and a value
//! `delta` for `X - alpha`:
//!
//! ```text
//! w(f) = min_i { v(c_i) + i * delta },   f = sum_i c_i (X - alpha)^i.
//! ```
//!
//! An ordinary augmentation `[w; phi, gamma]` assigns to `f` the minimum of
//! `w(f_i) + i * gamma` over the `phi`-expansion `f = sum_i f_i phi^i`. When
//! each `phi` is a key polynomial for the stage below and each `gamma`
//! strictly exceeds the previous value of `phi`, the result is again a
//! valuation; this module provides the arithmetic and the derived tests
//! (truncation, graded equivalence and divisibility, the epsilon invariant)
//! while structural validation lives with the chain types.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::poly::{Field, Poly, PolyError};
use crate::value::{GroupValue, ValueError};

// ====== Errors ======

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValError {
    /// Augmentation keys must be monic.
    KeyNotMonic(String),
    /// Augmentation keys must be non-constant.
    KeyConstant,
    /// Augmentation keys may not drop in degree.
    KeyDegreeDrop { got: usize, have: usize },
    /// The augmentation value must strictly exceed the current value of the key.
    GammaTooSmall { gamma: String, current: String },
    /// No augmentation on top of a stage with infinite value.
    AugmentAfterInfinity,
    /// Minimal key degree needs rank-one values throughout the tower.
    HigherRankDegree,
    /// The epsilon invariant is undefined for constants.
    EpsilonOfConstant,
    Value(ValueError),
    Poly(PolyError),
}

impl fmt::Display for ValError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValError::KeyNotMonic(p) => write!(f, "key polynomial {p} is not monic"),
            ValError::KeyConstant => write!(f, "key polynomial must be non-constant"),
            ValError::KeyDegreeDrop { got, have } => write!(
                f,
                "key degree {got} is below the current key degree {have}"
            ),
            ValError::GammaTooSmall { gamma, current } => write!(
                f,
                "augmentation value {gamma} does not exceed the current key value {current}"
            ),
            ValError::AugmentAfterInfinity => {
                write!(f, "cannot augment a valuation whose last value is inf")
            }
            ValError::HigherRankDegree => {
                write!(f, "minimal key degree requires rank-one values in the tower")
            }
            ValError::EpsilonOfConstant => {
                write!(f, "epsilon is undefined for constant polynomials")
            }
            ValError::Value(e) => write!(f, "{e}"),
            ValError::Poly(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ValError {}

impl From<ValueError> for ValError {
    fn from(e: ValueError) -> Self {
        ValError::Value(e)
    }
}

impl From<PolyError> for ValError {
    fn from(e: PolyError) -> Self {
        ValError::Poly(e)
    }
}

// ====== Helpers ======

/// Value of the `i`-th expansion term: `base + i * gamma`, with the `i = 0`
/// term left untouched so an infinite `gamma` never multiplies zero.
pub(crate) fn term_value(base: GroupValue, gamma: &GroupValue, i: usize) -> GroupValue {
    if i == 0 {
        base
    } else {
        &base + &gamma.mul_pos(i as u64)
    }
}

// ====== Valuation towers ======

/// A depth-zero valuation on Q[X] together with a finite stack of ordinary
/// augmentations. Keys are indexed from 0: key 0 is `X - alpha` with value
/// `delta`, key `k >= 1` is the `k`-th augmentation pair.
#[derive(Clone, PartialEq, Eq)]
pub struct Valuation {
    field: Field,
    alpha: BigRational,
    delta: GroupValue,
    augs: Vec<(Poly, GroupValue)>,
}

impl Valuation {
    /// The depth-zero valuation centered at `alpha` with `w(X - alpha) = delta`.
    pub fn depth_zero(field: Field, alpha: BigRational, delta: GroupValue) -> Valuation {
        Valuation { field, alpha, delta, augs: Vec::new() }
    }

    /// `[self; phi, gamma]`. Requires `phi` monic and non-constant, its degree
    /// at least the current key degree, and `gamma > self(phi)`.
    pub fn augment(&self, phi: Poly, gamma: GroupValue) -> Result<Valuation, ValError> {
        if self.gamma_at(self.depth()).is_infinite() {
            return Err(ValError::AugmentAfterInfinity);
        }
        if phi.is_zero() || phi.degree() == 0 {
            return Err(ValError::KeyConstant);
        }
        if !phi.is_monic() {
            return Err(ValError::KeyNotMonic(phi.to_string()));
        }
        let have = self.key_at(self.depth()).degree();
        if phi.degree() < have {
            return Err(ValError::KeyDegreeDrop { got: phi.degree(), have });
        }
        let current = self.value(&phi);
        if gamma <= current {
            return Err(ValError::GammaTooSmall {
                gamma: gamma.to_string(),
                current: current.to_string(),
            });
        }
        let mut augs = self.augs.clone();
        augs.push((phi, gamma));
        Ok(Valuation { field: self.field, alpha: self.alpha.clone(), delta: self.delta.clone(), augs })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Number of augmentations on top of the depth-zero stage.
    pub fn depth(&self) -> usize {
        self.augs.len()
    }

    pub fn center(&self) -> &BigRational {
        &self.alpha
    }

    pub fn augmentations(&self) -> &[(Poly, GroupValue)] {
        &self.augs
    }

    /// Key polynomial at stage `k` (stage 0 is `X - alpha`).
    pub fn key_at(&self, k: usize) -> Poly {
        if k == 0 {
            Poly::new(vec![-self.alpha.clone(), BigRational::one()])
        } else {
            self.augs[k - 1].0.clone()
        }
    }

    /// Assigned value at stage `k` (stage 0 is `delta`).
    pub fn gamma_at(&self, k: usize) -> GroupValue {
        if k == 0 {
            self.delta.clone()
        } else {
            self.augs[k - 1].1.clone()
        }
    }

    /// Largest tuple rank among the stage values; coordinates at this index
    /// and beyond are untouched by the tower.
    pub fn value_rank(&self) -> usize {
        let mut r = self.delta.rank();
        for (_, g) in &self.augs {
            r = r.max(g.rank());
        }
        r.max(1)
    }

    fn value_at_depth(&self, depth: usize, f: &Poly) -> GroupValue {
        if f.is_zero() {
            return GroupValue::infinity();
        }
        if depth == 0 {
            let coords = f.taylor_at(&self.alpha);
            return GroupValue::min_of(coords.iter().enumerate().map(|(i, c)| {
                term_value(self.field.v(&c.coeff(0)), &self.delta, i)
            }));
        }
        let (phi, gamma) = &self.augs[depth - 1];
        let parts = f.expansion(phi).expect("keys are non-constant");
        GroupValue::min_of(
            parts
                .iter()
                .enumerate()
                .map(|(i, part)| term_value(self.value_at_depth(depth - 1, part), gamma, i)),
        )
    }

    /// `w(f)`.
    pub fn value(&self, f: &Poly) -> GroupValue {
        self.value_at_depth(self.depth(), f)
    }

    /// The `q`-truncation `w_q(f) = min_i { w(f_i) + i * w(q) }` over the
    /// `q`-expansion of `f`. Always `<= w(f)`, with equality for example when
    /// `q` is the topmost key.
    pub fn truncate(&self, q: &Poly, f: &Poly) -> Result<GroupValue, ValError> {
        if q.is_zero() || q.degree() == 0 {
            return Err(ValError::KeyConstant);
        }
        if f.is_zero() {
            return Ok(GroupValue::infinity());
        }
        let wq = self.value(q);
        let parts = f.expansion(q)?;
        Ok(GroupValue::min_of(
            parts
                .iter()
                .enumerate()
                .map(|(i, part)| term_value(self.value(part), &wq, i)),
        ))
    }

    /// Graded-ring equivalence: `f ~ g` when `w(f - g) > w(f)`.
    pub fn equivalent(&self, f: &Poly, g: &Poly) -> bool {
        if f == g {
            return true;
        }
        self.value(&f.sub(g)) > self.value(f)
    }

    /// Graded divisibility `q | f` in the graded ring of `w`, decided by an
    /// infinitesimal probe: raise the value of `q` by a positive
    /// infinitesimal `iota` in a fresh tuple coordinate and test whether the
    /// perturbed expansion value exceeds `w(f)`. Requires `q` monic and
    /// non-constant.
    pub fn divides(&self, q: &Poly, f: &Poly) -> Result<bool, ValError> {
        if q.is_zero() || q.degree() == 0 {
            return Err(ValError::KeyConstant);
        }
        if !q.is_monic() {
            return Err(ValError::KeyNotMonic(q.to_string()));
        }
        if f.is_zero() {
            return Ok(true);
        }
        let wf = self.value(f);
        let wq = self.value(q);
        if wq.is_infinite() {
            // q generates the support; it divides exactly the support ideal
            return Ok(wf.is_infinite());
        }
        let iota = GroupValue::unit_in_coord(self.value_rank());
        let gamma = &wq + &iota;
        let parts = f.expansion(q)?;
        let probed = GroupValue::min_of(
            parts
                .iter()
                .enumerate()
                .map(|(i, part)| term_value(self.value(part), &gamma, i)),
        );
        Ok(probed > wf)
    }

    /// The epsilon invariant `max_b (w(f) - w(D_b f)) / b` over Hasse
    /// derivatives `D_b` with `1 <= b <= deg f`.
    pub fn epsilon(&self, f: &Poly) -> Result<GroupValue, ValError> {
        if f.is_zero() || f.degree() == 0 {
            return Err(ValError::EpsilonOfConstant);
        }
        let wf = self.value(f);
        if wf.is_infinite() {
            return Ok(GroupValue::infinity());
        }
        let mut best: Option<GroupValue> = None;
        for b in 1..=f.degree() {
            let db = f.hasse_derivative(b);
            if db.is_zero() {
                continue;
            }
            let wd = self.value(&db);
            // w(D_b f) is finite here: an infinite value would put f's
            // derivative in the support, impossible when w(f) is finite
            let slope = wf.minus(&wd)?.divided(b as u64)?;
            best = Some(match best {
                Some(b0) if b0 >= slope => b0,
                _ => slope,
            });
        }
        best.ok_or(ValError::EpsilonOfConstant)
    }

    /// Minimal degree of a key polynomial usable in a further augmentation:
    /// `e * deg(top key)`, where `e` is the least positive integer moving
    /// `e * gamma_top` into the group generated by `v(Q*)` and the earlier
    /// stage values. Only defined when every stage value is rank one.
    pub fn min_key_degree(&self) -> Result<usize, ValError> {
        let top = self.gamma_at(self.depth());
        if top.is_infinite() {
            return Err(ValError::AugmentAfterInfinity);
        }
        let mut previous: Vec<BigRational> = Vec::new();
        for k in 0..self.depth() {
            let g = self.gamma_at(k);
            previous.push(g.as_rational().ok_or(ValError::HigherRankDegree)?);
        }
        let gamma = top.as_rational().ok_or(ValError::HigherRankDegree)?;
        let e = ramification_index(&gamma, &previous);
        Ok(e * self.key_at(self.depth()).degree())
    }
}

/// Least `e >= 1` with `e * gamma` in the subgroup of Q generated by 1 and
/// `previous`.
fn ramification_index(gamma: &BigRational, previous: &[BigRational]) -> usize {
    // the subgroup is (g/L) Z with L = lcm of denominators, g = gcd of the
    // scaled numerators together with L itself
    let mut l = BigInt::one();
    for q in previous {
        l = l.lcm(q.denom());
    }
    let mut g = l.clone();
    for q in previous {
        let scaled = (q.numer() * &l / q.denom()).abs();
        g = g.gcd(&scaled);
    }
    // e * gamma in (g/L) Z  <=>  e * numer(gamma) * L / (denom(gamma) * g) in Z
    let c = gamma.numer().abs();
    let d = gamma.denom().clone();
    let target = &d * &g;
    let e = &target / (c * &l).gcd(&target);
    let e: BigInt = e;
    usize::try_from(e).expect("ramification index fits in usize")
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[p={}; {}: {}", self.field.prime(), self.key_at(0), self.delta)?;
        for (phi, gamma) in &self.augs {
            write!(f, "; {phi}: {gamma}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Valuation{self}")
    }
}

// ====== Tests ======
