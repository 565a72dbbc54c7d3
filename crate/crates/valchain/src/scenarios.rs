//! Ready-made chains and sequences: the named systems behind `demo`, plus a
//! builder for totally ramified chains of arbitrary shape.
//!
//! The ramified builder constructs each key from the previous one as
//! `phi^e - M`, where `M` is the unique monomial in the earlier keys whose
//! value ties `e` copies of the last gamma. Because the new gamma always
//! extends the value group by exactly the requested index, the residual
//! datum of every step is linear and the augmentation is automatically
//! well-formed at every depth.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::chains::{Block, Chain, ChainError, Sequence, Shape, Step};
use crate::poly::{Field, Poly};
use crate::sampling::{DigitRule, FamilyProvider, DEFAULT_WINDOW};
use crate::value::GroupValue;

// ====== Errors ======

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioError {
    /// The seed value or a requested index does not actually ramify.
    NotRamified(String),
    /// The digit solver could not represent a tie value (an internal
    /// invariant; reaching this means the requested shape is inconsistent).
    DigitSolver(String),
    Chain(Box<ChainError>),
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::NotRamified(msg) => write!(f, "{msg}"),
            ScenarioError::DigitSolver(msg) => write!(f, "digit solver failed: {msg}"),
            ScenarioError::Chain(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<ChainError> for ScenarioError {
    fn from(e: ChainError) -> Self {
        ScenarioError::Chain(Box::new(e))
    }
}

// ====== Helpers ======

fn field(p: u64) -> Field {
    Field::new(p).expect("builtin prime")
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// ====== Fixed systems ======

/// `p = 2`, seed `(X: 1/2)`, one ordinary augmentation `(X^2 - 2: 3/2)`:
/// the smallest chain with genuine ramification at both levels.
pub fn two_step() -> Chain {
    Chain::depth_zero(field(2), int(0), GroupValue::rational(1, 2))
        .with_step(Step::ordinary(Poly::from_ints(&[-2, 0, 1]), GroupValue::rational(3, 2)))
        .expect("two-step augmentation is well-formed")
}

/// `p = 3`, seed `(X - 1: 1)`, then a limit augmentation `(X^2 - 7: 50)`
/// over the digit refinements of the residue root `1` of `X^2 - 7`. The
/// refinements converge to a square root of 7 in the 3-adic integers, so
/// every linear polynomial stabilizes while `X^2 - 7` itself climbs without
/// bound; the chain pins it at 50.
pub fn sqrt7() -> Chain {
    let f = field(3);
    let target = Poly::from_ints(&[-7, 0, 1]);
    let family = FamilyProvider::hensel(f, target.clone(), 1, DEFAULT_WINDOW)
        .expect("1 is a simple residue root of X^2 - 7 mod 3");
    Chain::depth_zero(f, int(1), GroupValue::from_int(1))
        .with_step(Step::limit(family, target, GroupValue::from_int(50)))
        .expect("limit augmentation is well-formed")
}

/// `p = 3`, seed `(X: 1)`, then a stable limit over the partial sums of
/// `sum 3^(n!)`. The gaps between consecutive exponents grow so fast that
/// every polynomial stabilizes along the family: the limit is a valuation,
/// not another augmentation.
pub fn liouville() -> Chain {
    let f = field(3);
    let family = FamilyProvider::digits(f, DigitRule::Factorial, DEFAULT_WINDOW)
        .expect("factorial digits exist over every prime");
    Chain::depth_zero(f, int(0), GroupValue::from_int(1))
        .with_step(Step::stable_limit(family))
        .expect("stable limit is well-formed")
}

/// `p = 3`, seed `(X: 1)`, then a stable limit over an aperiodic digit
/// stream (digit 2 at perfect-square positions, 1 elsewhere). The family
/// carries no freezing certificate, so stability is judged through the scan
/// window instead of proved.
pub fn aperiodic() -> Chain {
    let f = field(3);
    let family = FamilyProvider::digits(f, DigitRule::Aperiodic, DEFAULT_WINDOW)
        .expect("aperiodic digits exist over p >= 3");
    Chain::depth_zero(f, int(0), GroupValue::from_int(1))
        .with_step(Step::stable_limit(family))
        .expect("stable limit is well-formed")
}

/// `p = 5`, the bare seed `(X - 2: 3)`: no augmentations at all.
pub fn depth_zero_only() -> Chain {
    Chain::depth_zero(field(5), int(2), GroupValue::from_int(3))
}

// ====== Ramified chains ======

/// Builds a chain over `field` centered at `alpha` whose value group grows
/// by exactly `ramifications[j]` at step `j + 1`. The seed value must have
/// a denominator of at least 2 and every requested index must be at least 2.
///
/// Key degrees multiply up: the step-`(j+1)` key has degree
/// `denom(delta) * ramifications[0] * ... * ramifications[j-1]`.
pub fn ramified_chain(
    f: Field,
    alpha: i64,
    delta: BigRational,
    ramifications: &[u64],
) -> Result<Chain, ScenarioError> {
    if delta.is_negative() || delta.is_zero() {
        return Err(ScenarioError::NotRamified(format!(
            "seed value {delta} must be positive"
        )));
    }
    let s0 = delta.denom().clone();
    if s0 < BigInt::from(2) {
        return Err(ScenarioError::NotRamified(format!(
            "seed value {delta} has trivial denominator; nothing ramifies"
        )));
    }
    for &r in ramifications {
        if r < 2 {
            return Err(ScenarioError::NotRamified(format!(
                "ramification index {r} must be at least 2"
            )));
        }
    }

    let mut chain = Chain::depth_zero(f, int(alpha), GroupValue::from_rational(delta.clone()));

    // Parallel records of the construction so far. `bounds[i]` is the order
    // of `gammas[i]` over the group below it, which both caps the digit of
    // `keys[i]` in a tie monomial and fixes the degree of the next key.
    let mut keys: Vec<Poly> = vec![Poly::from_ints(&[-alpha, 1])];
    let mut gammas: Vec<BigRational> = vec![delta];
    let mut denoms: Vec<BigInt> = vec![s0.clone()];
    let mut bounds: Vec<BigInt> = vec![s0];

    for &r in ramifications {
        let ratio = bounds.last().expect("non-empty").clone();
        let gamma_top = gammas.last().expect("non-empty").clone();
        let target = BigRational::new(ratio.clone(), BigInt::one()) * &gamma_top;
        let tie = tie_monomial(f, &keys, &gammas, &denoms, &bounds, &target)?;

        let ratio_u: u64 = u64::try_from(&ratio)
            .map_err(|_| ScenarioError::DigitSolver(format!("degree ratio {ratio} overflows")))?;
        let phi = keys.last().expect("non-empty").pow(ratio_u).sub(&tie);

        let denom = denoms.last().expect("non-empty") * BigInt::from(r);
        let gamma = target + BigRational::new(BigInt::one(), denom.clone());

        chain.push_step(Step::ordinary(phi.clone(), GroupValue::from_rational(gamma.clone())))?;
        keys.push(phi);
        gammas.push(gamma);
        denoms.push(denom);
        bounds.push(BigInt::from(r));
    }
    Ok(chain)
}

/// The unique product `p^c0 * keys[0]^c1 * ...` of value `target`, with the
/// digit of `keys[i]` below `bounds[i]`. Digits are fixed from the top key
/// down: each is the one choice that drops the remainder into the value
/// group generated below that key.
fn tie_monomial(
    f: Field,
    keys: &[Poly],
    gammas: &[BigRational],
    denoms: &[BigInt],
    bounds: &[BigInt],
    target: &BigRational,
) -> Result<Poly, ScenarioError> {
    let mut rem = target.clone();
    let mut monomial = Poly::one();
    for i in (0..keys.len()).rev() {
        let below = if i == 0 { BigInt::one() } else { denoms[i - 1].clone() };
        let mut digit: Option<BigInt> = None;
        let mut c = BigInt::zero();
        while c < bounds[i] {
            let cand = &rem - BigRational::new(c.clone(), BigInt::one()) * &gammas[i];
            if (cand * BigRational::new(below.clone(), BigInt::one())).is_integer() {
                digit = Some(c);
                break;
            }
            c += 1;
        }
        let digit = digit.ok_or_else(|| {
            ScenarioError::DigitSolver(format!(
                "no digit below {} brings {rem} into the group under key {i}",
                bounds[i]
            ))
        })?;
        if !digit.is_zero() {
            let d: u64 = u64::try_from(&digit)
                .map_err(|_| ScenarioError::DigitSolver(format!("digit {digit} overflows")))?;
            monomial = monomial.mul(&keys[i].pow(d));
            rem -= BigRational::new(digit, BigInt::one()) * &gammas[i];
        }
    }
    if !rem.is_integer() || rem.is_negative() {
        return Err(ScenarioError::DigitSolver(format!(
            "residual exponent {rem} is not a power of {}",
            f.prime()
        )));
    }
    let c0: u64 = u64::try_from(rem.numer())
        .map_err(|_| ScenarioError::DigitSolver(format!("residual exponent {rem} overflows")))?;
    let scale = BigRational::from_integer(BigInt::from(f.prime()).pow(
        u32::try_from(c0)
            .map_err(|_| ScenarioError::DigitSolver(format!("residual exponent {c0} overflows")))?,
    ));
    Ok(monomial.scale(&scale))
}

/// The endless version of the square tower: `p = 2`, seed `(X: 1/2)`, and a
/// step generator that keeps doubling the ramification forever. Keys have
/// degree `2^(k+1)` at step `k + 1`.
pub fn ramified_tower() -> Chain {
    let f = field(2);
    Chain::depth_zero(f, int(0), GroupValue::rational(1, 2))
        .with_extension(Arc::new(move |k| {
            let ch = ramified_chain(f, 0, rat(1, 2), &vec![2; k])
                .expect("the all-2 tower is well-formed at every depth");
            let last = ch.steps().last().expect("at least one step");
            (last.key().expect("ordinary step").clone(), last.gamma().expect("ordinary step").clone())
        }))
        .expect("a bare seed accepts an extension")
}

/// The square tower presented as a key sequence that declines to declare
/// its extent: same blocks as [`ramified_tower`], shape left undeclared.
pub fn undeclared() -> Sequence {
    let f = field(2);
    Sequence::new(
        f,
        vec![Block::new(Poly::x(), GroupValue::rational(1, 2))],
        Shape::Undeclared,
    )
    .expect("a single linear block is well-formed")
    .with_extension(Arc::new(move |j| {
        let ch = ramified_chain(f, 0, rat(1, 2), &vec![2; j])
            .expect("the all-2 tower is well-formed at every depth");
        let last = ch.steps().last().expect("at least one step");
        (last.key().expect("ordinary step").clone(), last.gamma().expect("ordinary step").clone())
    }))
}

// ====== Registry ======

#[derive(Clone)]
pub enum ScenarioKind {
    Chain(Chain),
    Sequence(Sequence),
}

#[derive(Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub kind: ScenarioKind,
}

/// All named systems, in presentation order.
pub fn all() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "two-step",
            summary: "p = 2: seed (X: 1/2), one augmentation (X^2 - 2: 3/2)",
            kind: ScenarioKind::Chain(two_step()),
        },
        Scenario {
            name: "sqrt7",
            summary: "p = 3: digit refinements of a square root of 7, pinned at (X^2 - 7: 50)",
            kind: ScenarioKind::Chain(sqrt7()),
        },
        Scenario {
            name: "liouville",
            summary: "p = 3: stable limit along the partial sums of sum 3^(n!)",
            kind: ScenarioKind::Chain(liouville()),
        },
        Scenario {
            name: "tower",
            summary: "p = 2: endless tower doubling the ramification at every step",
            kind: ScenarioKind::Chain(ramified_tower()),
        },
        Scenario {
            name: "aperiodic",
            summary: "p = 3: stable limit along an aperiodic digit stream, judged heuristically",
            kind: ScenarioKind::Chain(aperiodic()),
        },
        Scenario {
            name: "depth-zero",
            summary: "p = 5: the bare seed (X - 2: 3), no augmentations",
            kind: ScenarioKind::Chain(depth_zero_only()),
        },
        Scenario {
            name: "undeclared",
            summary: "p = 2: the square tower as a sequence that declines to declare its extent",
            kind: ScenarioKind::Sequence(undeclared()),
        },
    ]
}

pub fn by_name(name: &str) -> Option<Scenario> {
    all().into_iter().find(|s| s.name == name)
}

// ====== Tests ======

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{classify, Classification};

    fn poly(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn square_tower_keys_match_hand_expansion() {
        let ch = ramified_chain(field(2), 0, rat(1, 2), &[2, 2, 2]).unwrap();
        let phi1 = poly("X^2 - 2");
        let phi2 = phi1.pow(2).sub(&poly("4*X"));
        let phi3 = phi2.pow(2).sub(&phi1.scale(&int(16)));
        assert_eq!(ch.key_at(1).unwrap(), phi1);
        assert_eq!(ch.key_at(2).unwrap(), phi2);
        assert_eq!(ch.key_at(3).unwrap(), phi3);
        assert_eq!(ch.gamma_at(1).unwrap(), GroupValue::rational(5, 4));
        assert_eq!(ch.gamma_at(2).unwrap(), GroupValue::rational(21, 8));
        assert_eq!(ch.gamma_at(3).unwrap(), GroupValue::rational(85, 16));
    }

    #[test]
    fn ramified_chains_validate_clean() {
        let cases: &[(u64, i64, (i64, i64), &[u64])] = &[
            (2, 0, (1, 2), &[2, 2, 2]),
            (3, 1, (2, 3), &[2, 2]),
            (5, -1, (3, 2), &[2, 3]),
        ];
        for &(p, alpha, (n, d), rams) in cases {
            let ch = ramified_chain(field(p), alpha, rat(n, d), rams).unwrap();
            let report = ch.validate(8, &[]);
            assert!(report.passed(), "p = {p}: {report}");
        }
    }

    #[test]
    fn mixed_index_chain_grows_degrees_multiplicatively() {
        let ch = ramified_chain(field(3), 0, rat(1, 2), &[3, 2]).unwrap();
        assert_eq!(ch.key_at(1).unwrap().degree(), 2);
        assert_eq!(ch.key_at(2).unwrap().degree(), 6);
        // gamma denominators follow the requested indices: 2, then 6, then 12.
        assert_eq!(ch.gamma_at(1).unwrap(), GroupValue::from_rational(rat(1, 1) + rat(1, 6)));
        let report = ch.validate(8, &[]);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn degenerate_requests_are_rejected() {
        assert!(matches!(
            ramified_chain(field(2), 0, int(1), &[2]),
            Err(ScenarioError::NotRamified(_))
        ));
        assert!(matches!(
            ramified_chain(field(2), 0, rat(1, 2), &[1]),
            Err(ScenarioError::NotRamified(_))
        ));
        assert!(matches!(
            ramified_chain(field(2), 0, rat(-1, 2), &[2]),
            Err(ScenarioError::NotRamified(_))
        ));
    }

    #[test]
    fn tower_extends_on_demand() {
        let tower = ramified_tower();
        assert!(tower.is_infinite());
        // Evaluating a degree-5 polynomial forces keys of degree 2, 4, 8.
        let w = tower.value(&poly("X^5 - 2*X + 6")).unwrap();
        assert!(!w.is_infinite());
        // The finite prefix agrees with the direct construction.
        let direct = ramified_chain(field(2), 0, rat(1, 2), &[2, 2]).unwrap();
        assert_eq!(direct.value(&poly("X^3 + 2")).unwrap(), tower.value(&poly("X^3 + 2")).unwrap());
    }

    #[test]
    fn registry_names_resolve() {
        assert_eq!(all().len(), 7);
        for s in all() {
            assert!(by_name(s.name).is_some());
        }
        assert!(by_name("missing").is_none());
    }

    #[test]
    fn scenario_shapes_classify_as_labeled() {
        let vt = ["two-step", "depth-zero"];
        for name in vt {
            let Some(Scenario { kind: ScenarioKind::Chain(ch), .. }) = by_name(name) else {
                panic!("{name} should be a chain scenario");
            };
            let seq = ch.to_sequence(6).unwrap();
            assert_eq!(classify(&seq, 6), Classification::ValuationTranscendental, "{name}");
        }
        let Some(Scenario { kind: ScenarioKind::Sequence(seq), .. }) = by_name("undeclared")
        else {
            panic!("undeclared should be a sequence scenario");
        };
        assert_eq!(classify(&seq, 5), Classification::Undetermined { depth: 5 });
    }

    #[test]
    fn tower_converts_to_an_endless_sequence() {
        let seq = ramified_tower().to_sequence(3).unwrap();
        assert_eq!(seq.shape(), Shape::Infinite);
        assert!(seq.is_generated());
        assert_eq!(classify(&seq, 3), Classification::ValuationAlgebraic);
    }
}
