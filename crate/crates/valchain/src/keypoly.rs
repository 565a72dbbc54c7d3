//! Analysis of key polynomials over a chain: the epsilon invariant, delta
//! computations for split polynomials, recognition of abstract key
//! polynomials by decision templates, and randomized multiplicativity
//! spot-checks.

use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chains::{epsilon_with, value_increases, Chain, ChainError, Step};
use crate::poly::{Field, Poly};
use crate::value::GroupValue;
use crate::valuation::ValError;

// ====== Epsilon and delta ======

/// The epsilon invariant of `f`: `max_b (w(f) - w(D_b f)) / b` over the
/// non-vanishing Hasse derivatives `D_b f`, with `epsilon = infinity` when
/// `w(f)` is infinite. Strictly increasing along the keys of a well-formed
/// chain.
pub fn epsilon(w: &Chain, f: &Poly) -> Result<GroupValue, ChainError> {
    epsilon_with(|g| w.value(g), f)
}

/// A delta value together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaResult {
    pub value: GroupValue,
    pub method: &'static str,
}

/// The delta invariant of a polynomial that splits over the base field with
/// the given roots: exactly the largest value of `X - root`.
pub fn delta_split_oracle(w: &Chain, roots: &[BigRational]) -> Result<DeltaResult, ChainError> {
    if roots.is_empty() {
        return Err(ChainError::NoRoots);
    }
    let mut best: Option<GroupValue> = None;
    for r in roots {
        let v = w.value(&Poly::new(vec![-r.clone(), BigRational::one()]))?;
        best = Some(match best {
            Some(b) if b >= v => b,
            _ => v,
        });
    }
    Ok(DeltaResult { value: best.expect("non-empty roots"), method: "split-root-exact" })
}

/// Delta bound when no root data is available: epsilon stands in for delta
/// (the two agree whenever the chain's value group admits no defect).
pub fn delta_estimate(w: &Chain, f: &Poly) -> Result<DeltaResult, ChainError> {
    Ok(DeltaResult { value: epsilon(w, f)?, method: "epsilon-surrogate" })
}

// ====== Key recognition ======

/// Outcome of the key recognition templates, with the truncating chain when
/// one is produced.
#[derive(Clone, Debug)]
pub enum KeyStatus {
    /// Monic linear polynomials are keys for every valuation; the
    /// truncation is the depth-zero chain seeded at the root.
    LinearAlways { truncation: Chain },
    /// Recognized as an abstract key polynomial for the given valuation.
    Abkp { truncation: Chain },
    /// Shown not to be an abstract key polynomial.
    NotAbkp,
}

/// Decide whether `phi` is an abstract key polynomial for the chain `w`,
/// using the implemented templates: monic linear polynomials always are;
/// the chain's top key is; and relative to a lower stage `below`, a
/// polynomial gaining value from `below` to `w` is (truncating through
/// `[below; phi, w(phi)]`), while one that does not gain value is a key
/// exactly when its degree equals the degree of `below`'s top key. Inputs
/// outside the templates are refused as undecidable rather than guessed.
pub fn is_abkp(w: &Chain, phi: &Poly, below: Option<&Chain>) -> Result<KeyStatus, ChainError> {
    if phi.is_zero() || phi.degree() == 0 {
        return Err(ChainError::Val(ValError::KeyConstant));
    }
    if !phi.is_monic() {
        return Err(ChainError::Val(ValError::KeyNotMonic(phi.to_string())));
    }
    if phi.degree() == 1 {
        let root = -phi.coeff(0);
        let delta = w.value(phi)?;
        return Ok(KeyStatus::LinearAlways {
            truncation: Chain::depth_zero(w.field(), root, delta),
        });
    }
    if *phi == w.last_key().1 {
        return Ok(KeyStatus::Abkp { truncation: w.clone() });
    }
    let Some(low) = below else {
        return Err(ChainError::Undecidable {
            detail: format!(
                "{phi} is neither linear nor the top key, and no lower stage was supplied \
                 for the value-increase template"
            ),
        });
    };
    if value_increases(low, w, phi)? {
        let gamma = w.value(phi)?;
        let truncation = low.clone().with_step(Step::ordinary(phi.clone(), gamma))?;
        return Ok(KeyStatus::Abkp { truncation });
    }
    if phi.degree() == low.last_key().1.degree() {
        return Ok(KeyStatus::Abkp { truncation: low.clone() });
    }
    Ok(KeyStatus::NotAbkp)
}

// ====== Multiplicativity spot-checks ======

/// One pair violating multiplicativity.
#[derive(Clone, Debug)]
pub struct MultFailure {
    pub f: Poly,
    pub g: Poly,
    pub product_value: GroupValue,
    pub sum_value: GroupValue,
}

/// Result of a multiplicativity spot-check.
#[derive(Clone, Debug)]
pub struct MultReport {
    pub checked: usize,
    pub failures: Vec<MultFailure>,
}

/// Check `w(f g) = w(f) + w(g)` on the canonical pairs `(X, X)` and
/// `(X, X + 1)` plus `sample_count` seeded random pairs with degrees up to
/// `degree_bound`. A violation witnesses that some stage was augmented by a
/// polynomial that is not a key for the stage below it.
pub fn check_multiplicativity(
    w: &Chain,
    sample_count: usize,
    degree_bound: usize,
    seed: u64,
) -> Result<MultReport, ChainError> {
    let mut pairs: Vec<(Poly, Poly)> =
        vec![(Poly::x(), Poly::x()), (Poly::x(), Poly::from_ints(&[1, 1]))];
    let sampled = sample_polys(w.field(), 2 * sample_count, degree_bound, seed);
    for pair in sampled.chunks_exact(2) {
        pairs.push((pair[0].clone(), pair[1].clone()));
    }
    let checked = pairs.len();
    let mut failures = Vec::new();
    for (f, g) in pairs {
        let product_value = w.value(&f.mul(&g))?;
        let sum_value = &w.value(&f)? + &w.value(&g)?;
        if product_value != sum_value {
            failures.push(MultFailure { f, g, product_value, sum_value });
        }
    }
    Ok(MultReport { checked, failures })
}

/// Seeded sample of non-zero integer polynomials with degrees in
/// `1..=degree_bound` and coefficients bounded by `p^3`.
pub fn sample_polys(
    field: Field,
    count: usize,
    degree_bound: usize,
    seed: u64,
) -> Vec<Poly> {
    let bound = (field.prime() as i64).pow(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let degree = rng.gen_range(1..=degree_bound.max(1));
        let mut coeffs: Vec<i64> = (0..=degree).map(|_| rng.gen_range(-bound..=bound)).collect();
        while coeffs[degree] == 0 {
            coeffs[degree] = rng.gen_range(-bound..=bound);
        }
        out.push(Poly::from_ints(&coeffs));
    }
    out
}

// ====== Tests ======
