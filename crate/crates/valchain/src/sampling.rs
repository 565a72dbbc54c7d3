//! Continuous families of augmentations and the stable-value scan.
//!
//! A family is an increasing stream of augmentation pairs `(chi_i, gamma_i)`
//! of uniform degree. Augmenting a fixed base valuation by successive pairs
//! yields valuations `rho_i = [base; chi_i, gamma_i]` that grow pointwise; a
//! polynomial is *stable* when the values `rho_i(f)` freeze from some index
//! on, and the frozen value is what a limit step assigns to it.
//!
//! Three stream shapes are built in besides explicit item lists:
//!
//! * Hensel streams: best approximations `a_i` to a simple residue root of a
//!   monic integer polynomial, refined one p-adic digit at a time;
//! * factorial digit streams: partial sums of `sum_n p^(n!)`, whose p-adic
//!   limit is a classical transcendental number;
//! * aperiodic digit streams: digits 1 everywhere except a marker digit 2 at
//!   perfect-square positions, an irrational limit with no usable
//!   approximation bound.
//!
//! For the first two shapes a repeated value at consecutive indices already
//! certifies stability, so the scan reports an exact certificate. For the
//! others it falls back to a window heuristic and says so.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::{Field, Poly};
use crate::valuation::{ValError, Valuation};
use crate::value::GroupValue;

// ====== Errors ======

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyError {
    /// Explicit family ran out of items.
    OutOfItems { index: usize, len: usize },
    /// Factorial digit streams are capped to keep numbers tractable.
    IndexCap { index: usize, cap: usize },
    /// Hensel stream parameters do not describe a simple residue root.
    BadHenselSeed(String),
    /// The target polynomial vanished at an approximant: the stream is
    /// degenerate because an exact rational root was hit.
    RootHit(BigRational),
    /// Explicit items must be monic, non-constant, of uniform degree, with
    /// strictly increasing values.
    BadItems(String),
    /// Digit streams with digit 2 need p >= 3.
    PrimeTooSmall(u64),
    /// The family and the base valuation live over different fields.
    FieldMismatch { family: u64, base: u64 },
    /// No family item is a proper augmentation of the base valuation.
    NoProperItems,
    Val(ValError),
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::OutOfItems { index, len } => {
                write!(f, "family item {index} requested but only {len} are given")
            }
            FamilyError::IndexCap { index, cap } => {
                write!(f, "family item {index} exceeds the stream cap {cap}")
            }
            FamilyError::BadHenselSeed(msg) => write!(f, "bad Hensel stream: {msg}"),
            FamilyError::RootHit(a) => {
                write!(f, "target polynomial vanishes at {a}; the stream terminates")
            }
            FamilyError::BadItems(msg) => write!(f, "bad family items: {msg}"),
            FamilyError::PrimeTooSmall(p) => {
                write!(f, "digit streams with marker digits need p >= 3, got {p}")
            }
            FamilyError::FieldMismatch { family, base } => {
                write!(f, "family over p={family} used with a valuation over p={base}")
            }
            FamilyError::NoProperItems => {
                write!(f, "no family item properly augments the base valuation")
            }
            FamilyError::Val(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for FamilyError {}

impl From<ValError> for FamilyError {
    fn from(e: ValError) -> Self {
        FamilyError::Val(e)
    }
}

// ====== Stream kinds ======

/// Digit pattern for a built-in stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DigitRule {
    /// Partial sums of `sum_{n>=1} p^(n!)`: certified transcendental limit.
    Factorial,
    /// Digits 1 with a marker 2 at perfect-square positions: aperiodic limit
    /// with no certificate.
    Aperiodic,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// A finite, explicitly given list of `(chi, gamma)` pairs.
    Explicit(Vec<(Poly, GroupValue)>),
    /// Successive digit refinements of a simple residue root of `target`.
    Hensel { target: Poly, residue_root: u64 },
    /// A built-in digit stream around the center 0.
    Digits(DigitRule),
}

/// A stream of augmentation pairs over a fixed base field, with the scan
/// window used for heuristic stability.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyProvider {
    field: Field,
    kind: FamilyKind,
    window: usize,
}

/// Hard cap on factorial stream indices: item 8 already involves `p^(9!)`.
pub const FACTORIAL_CAP: usize = 8;

/// Default scan window.
pub const DEFAULT_WINDOW: usize = 8;

impl FamilyProvider {
    pub fn explicit(
        field: Field,
        items: Vec<(Poly, GroupValue)>,
        window: usize,
    ) -> Result<FamilyProvider, FamilyError> {
        if items.is_empty() {
            return Err(FamilyError::BadItems("empty item list".into()));
        }
        let d = items[0].0.degree();
        for (chi, _) in &items {
            if chi.is_zero() || chi.degree() == 0 {
                return Err(FamilyError::BadItems(format!("constant item {chi}")));
            }
            if !chi.is_monic() {
                return Err(FamilyError::BadItems(format!("item {chi} is not monic")));
            }
            if chi.degree() != d {
                return Err(FamilyError::BadItems(format!(
                    "item {chi} breaks the uniform degree {d}"
                )));
            }
        }
        for pair in items.windows(2) {
            if pair[1].1 <= pair[0].1 {
                return Err(FamilyError::BadItems(format!(
                    "values must strictly increase, got {} then {}",
                    pair[0].1, pair[1].1
                )));
            }
        }
        Ok(FamilyProvider { field, kind: FamilyKind::Explicit(items), window })
    }

    pub fn hensel(
        field: Field,
        target: Poly,
        residue_root: u64,
        window: usize,
    ) -> Result<FamilyProvider, FamilyError> {
        let p = field.prime();
        if target.is_zero() || target.degree() < 2 {
            return Err(FamilyError::BadHenselSeed(
                "target must have degree >= 2".into(),
            ));
        }
        if !target.is_monic() {
            return Err(FamilyError::BadHenselSeed(format!(
                "target {target} is not monic"
            )));
        }
        for c in target.coeffs() {
            if !c.is_integer() {
                return Err(FamilyError::BadHenselSeed(format!(
                    "target {target} has a non-integer coefficient"
                )));
            }
        }
        if residue_root >= p {
            return Err(FamilyError::BadHenselSeed(format!(
                "residue root {residue_root} is not reduced mod {p}"
            )));
        }
        let a0 = BigRational::from_integer(BigInt::from(residue_root));
        let g_a0 = target.eval(&a0);
        if !is_divisible(&g_a0, p) {
            return Err(FamilyError::BadHenselSeed(format!(
                "{residue_root} is not a root of the target mod {p}"
            )));
        }
        let dg_a0 = target.derivative().eval(&a0);
        if is_divisible(&dg_a0, p) {
            return Err(FamilyError::BadHenselSeed(format!(
                "residue root {residue_root} is not simple mod {p}"
            )));
        }
        Ok(FamilyProvider { field, kind: FamilyKind::Hensel { target, residue_root }, window })
    }

    pub fn digits(field: Field, rule: DigitRule, window: usize) -> Result<FamilyProvider, FamilyError> {
        if matches!(rule, DigitRule::Aperiodic) && field.prime() < 3 {
            return Err(FamilyError::PrimeTooSmall(field.prime()));
        }
        Ok(FamilyProvider { field, kind: FamilyKind::Digits(rule), window })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn with_window(mut self, window: usize) -> FamilyProvider {
        self.window = window.max(2);
        self
    }

    /// Whether a repeated value at consecutive indices certifies stability:
    /// true for streams whose limit is provably outside Q.
    pub fn is_certified(&self) -> bool {
        match &self.kind {
            FamilyKind::Hensel { .. } => true,
            FamilyKind::Digits(DigitRule::Factorial) => true,
            FamilyKind::Digits(DigitRule::Aperiodic) => false,
            FamilyKind::Explicit(_) => false,
        }
    }

    /// Largest index the scan will sample.
    pub fn max_index(&self) -> usize {
        match &self.kind {
            FamilyKind::Explicit(items) => items.len() - 1,
            FamilyKind::Hensel { .. } => 4 * self.window.max(2),
            FamilyKind::Digits(DigitRule::Factorial) => FACTORIAL_CAP.min(4 * self.window.max(2)),
            FamilyKind::Digits(DigitRule::Aperiodic) => 4 * self.window.max(2),
        }
    }

    /// Uniform degree of the stream items.
    pub fn item_degree(&self) -> usize {
        match &self.kind {
            FamilyKind::Explicit(items) => items[0].0.degree(),
            _ => 1,
        }
    }

    /// Upper bound on the tuple rank of the stream's values.
    pub fn value_rank(&self) -> usize {
        match &self.kind {
            FamilyKind::Explicit(items) => {
                items.iter().map(|(_, g)| g.rank()).max().unwrap_or(1).max(1)
            }
            _ => 1,
        }
    }

    /// The `i`-th augmentation pair `(chi_i, gamma_i)`.
    pub fn item(&self, i: usize) -> Result<(Poly, GroupValue), FamilyError> {
        match &self.kind {
            FamilyKind::Explicit(items) => items
                .get(i)
                .cloned()
                .ok_or(FamilyError::OutOfItems { index: i, len: items.len() }),
            FamilyKind::Hensel { target, residue_root } => {
                self.hensel_item(target, *residue_root, i)
            }
            FamilyKind::Digits(rule) => self.digit_item(*rule, i),
        }
    }

    /// One Hensel refinement: from an approximant `a` with `c = v(g(a))`,
    /// the next digit `d` solves `g(a + d p^c) = 0 mod p^(c+1)`, i.e.
    /// `d = -(g(a)/p^c) * g'(a)^(-1) mod p`. The assigned value is `c`.
    fn hensel_item(
        &self,
        target: &Poly,
        residue_root: u64,
        i: usize,
    ) -> Result<(Poly, GroupValue), FamilyError> {
        let p = BigInt::from(self.field.prime());
        let mut a = BigInt::from(residue_root);
        let mut c = self.int_valuation(&eval_int(target, &a))?;
        for _ in 0..i {
            let g_a = eval_int(target, &a);
            let unit = &g_a / p.pow(u32::try_from(c).expect("valuation fits in u32"));
            let dg_a = eval_int(&target.derivative(), &a);
            let inv = mod_inverse(&dg_a, &p);
            let digit = (-(unit * inv)).mod_floor(&p);
            debug_assert!(!digit.is_zero(), "exact valuation forces a nonzero digit");
            a += digit * p.pow(u32::try_from(c).expect("valuation fits in u32"));
            c = self.int_valuation(&eval_int(target, &a))?;
        }
        let chi = Poly::new(vec![BigRational::from_integer(-a), BigRational::one()]);
        Ok((chi, GroupValue::from_int(c)))
    }

    fn int_valuation(&self, n: &BigInt) -> Result<i64, FamilyError> {
        if n.is_zero() {
            // the exact root was hit; recover the approximant for the report
            return Err(FamilyError::RootHit(BigRational::zero()));
        }
        let p = BigInt::from(self.field.prime());
        let mut n = n.abs();
        let mut c = 0i64;
        loop {
            let (q, r) = n.div_rem(&p);
            if r.is_zero() {
                c += 1;
                n = q;
            } else {
                return Ok(c);
            }
        }
    }

    /// Digit stream item: `a_i = sum_{n=1}^{i+1} d_n p^n` with exponents
    /// `n!` for the factorial rule, and the assigned value is
    /// `v(a_{i+1} - a_i)`.
    fn digit_item(&self, rule: DigitRule, i: usize) -> Result<(Poly, GroupValue), FamilyError> {
        if matches!(rule, DigitRule::Factorial) && i > FACTORIAL_CAP {
            return Err(FamilyError::IndexCap { index: i, cap: FACTORIAL_CAP });
        }
        let p = BigInt::from(self.field.prime());
        let mut a = BigInt::zero();
        for n in 1..=(i + 1) {
            a += self.digit_term(rule, n, &p);
        }
        let gamma = match rule {
            // next term is p^((i+2)!)
            DigitRule::Factorial => factorial(i as u64 + 2) as i64,
            // next term is d p^(i+2) with a unit digit d
            DigitRule::Aperiodic => i as i64 + 2,
        };
        let chi = Poly::new(vec![BigRational::from_integer(-a), BigRational::one()]);
        Ok((chi, GroupValue::from_int(gamma)))
    }

    fn digit_term(&self, rule: DigitRule, n: usize, p: &BigInt) -> BigInt {
        match rule {
            DigitRule::Factorial => {
                p.pow(u32::try_from(factorial(n as u64)).expect("exponent fits in u32"))
            }
            DigitRule::Aperiodic => {
                let digit = if is_square(n) { 2u32 } else { 1u32 };
                BigInt::from(digit) * p.pow(n as u32)
            }
        }
    }

    /// All items the scan may touch, skipping the leading ones that do not
    /// yet properly augment `base` (their value does not exceed the base
    /// value of their key).
    fn proper_towers(
        &self,
        base: &Valuation,
    ) -> Result<Vec<(usize, Valuation)>, FamilyError> {
        if base.field() != self.field {
            return Err(FamilyError::FieldMismatch {
                family: self.field.prime(),
                base: base.field().prime(),
            });
        }
        let mut towers = Vec::new();
        for i in 0..=self.max_index() {
            let (chi, gamma) = match self.item(i) {
                Ok(pair) => pair,
                Err(FamilyError::OutOfItems { .. }) => break,
                Err(e) => return Err(e),
            };
            if gamma <= base.value(&chi) {
                if towers.is_empty() {
                    continue; // stream has not yet reached the base stage
                }
                return Err(FamilyError::BadItems(format!(
                    "item {i} ({chi}: {gamma}) does not augment the previous stage"
                )));
            }
            towers.push((i, base.augment(chi, gamma)?));
        }
        if towers.is_empty() {
            return Err(FamilyError::NoProperItems);
        }
        Ok(towers)
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn is_square(n: usize) -> bool {
    let r = (n as f64).sqrt().round() as usize;
    r * r == n
}

fn is_divisible(r: &BigRational, p: u64) -> bool {
    debug_assert!(r.is_integer());
    r.numer().mod_floor(&BigInt::from(p)).is_zero()
}

fn eval_int(f: &Poly, a: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in f.coeffs().iter().rev() {
        debug_assert!(c.is_integer());
        acc = acc * a + c.numer();
    }
    acc
}

/// Inverse of `a` mod the prime `p`; `a` must be a unit.
fn mod_inverse(a: &BigInt, p: &BigInt) -> BigInt {
    let a = a.mod_floor(p);
    debug_assert!(!a.is_zero(), "inverse of a non-unit");
    let ext = a.extended_gcd(p);
    debug_assert!(ext.gcd.is_one());
    ext.x.mod_floor(p)
}

// ====== Stable-value scan ======

/// How a stability verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Repeated value at consecutive indices of a stream with a provably
    /// irrational limit: the value is frozen from there on.
    Exact,
    /// A full window of equal values in a stream with no such guarantee.
    Heuristic,
}

/// Outcome of scanning `rho_i(f)` along a family.
#[derive(Clone, Debug, PartialEq)]
pub enum Stability {
    /// The values froze; `at_index` is the first index of the frozen run.
    Stable { value: GroupValue, at_index: usize, certificate: Certificate },
    /// The values rose strictly through the whole sampled range.
    Unstable { observed: Vec<GroupValue> },
    /// The sample budget ran out with neither a frozen run nor strict growth.
    Unresolved { observed: Vec<GroupValue> },
}

impl Stability {
    pub fn stable_value(&self) -> Option<&GroupValue> {
        match self {
            Stability::Stable { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stability::Stable { value, at_index, certificate } => {
                let tag = match certificate {
                    Certificate::Exact => "exact",
                    Certificate::Heuristic => "heuristic",
                };
                write!(f, "stable at {value} from item {at_index} ({tag})")
            }
            Stability::Unstable { observed } => {
                write!(f, "unstable: values rose through ")?;
                write_samples(f, observed)
            }
            Stability::Unresolved { observed } => {
                write!(f, "unresolved after ")?;
                write_samples(f, observed)
            }
        }
    }
}

fn write_samples(f: &mut fmt::Formatter<'_>, observed: &[GroupValue]) -> fmt::Result {
    let mut first = true;
    for v in observed {
        if !first {
            write!(f, ", ")?;
        }
        write!(f, "{v}")?;
        first = false;
    }
    Ok(())
}

/// Incremental judgment of a sample stream `rho_i(f)`: tracks the current
/// frozen run and settles as soon as it is long enough. Shared by every scan
/// that samples a family, whatever the underlying tower construction.
pub(crate) struct ScanJudge {
    certified: bool,
    window: usize,
    observed: Vec<GroupValue>,
    indices: Vec<usize>,
    run_start: usize,
}

impl ScanJudge {
    pub(crate) fn new(certified: bool, window: usize) -> ScanJudge {
        ScanJudge {
            certified,
            window: window.max(2),
            observed: Vec::new(),
            indices: Vec::new(),
            run_start: 0,
        }
    }

    /// Feed the sample taken at family index `index`; returns the verdict
    /// once a frozen run is long enough (one repeat for certified streams,
    /// a full window otherwise).
    pub(crate) fn feed(&mut self, index: usize, value: GroupValue) -> Option<Stability> {
        let pos = self.observed.len();
        if pos > 0 && value != self.observed[pos - 1] {
            self.run_start = pos;
        }
        self.observed.push(value);
        self.indices.push(index);
        let run = pos - self.run_start + 1;
        let needed = if self.certified { 2 } else { self.window };
        if run >= needed {
            Some(Stability::Stable {
                value: self.observed[self.run_start].clone(),
                at_index: self.indices[self.run_start],
                certificate: if self.certified {
                    Certificate::Exact
                } else {
                    Certificate::Heuristic
                },
            })
        } else {
            None
        }
    }

    /// Verdict when the sample budget is exhausted without a frozen run.
    pub(crate) fn finish(self) -> Stability {
        let strictly_rising = self.observed.windows(2).all(|w| w[0] < w[1]);
        if self.observed.len() >= 2 && strictly_rising {
            Stability::Unstable { observed: self.observed }
        } else {
            Stability::Unresolved { observed: self.observed }
        }
    }
}

impl FamilyProvider {
    /// Scan `rho_i(f)` for `rho_i = [base; chi_i, gamma_i]` and report
    /// whether the values freeze. For certified streams one repeat at
    /// consecutive indices settles it; otherwise a run of `window` equal
    /// values is accepted as heuristic evidence.
    pub fn stable_value(&self, base: &Valuation, f: &Poly) -> Result<Stability, FamilyError> {
        let towers = self.proper_towers(base)?;
        let mut judge = ScanJudge::new(self.is_certified(), self.window);
        for (i, rho) in &towers {
            if let Some(verdict) = judge.feed(*i, rho.value(f)) {
                return Ok(verdict);
            }
        }
        Ok(judge.finish())
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Explicit(items) => write!(f, "explicit({} items)", items.len()),
            FamilyKind::Hensel { target, residue_root } => {
                write!(f, "hensel({target}, root {residue_root})")
            }
            FamilyKind::Digits(DigitRule::Factorial) => write!(f, "digits(factorial)"),
            FamilyKind::Digits(DigitRule::Aperiodic) => write!(f, "digits(aperiodic)"),
        }
    }
}

// ====== Tests ======
