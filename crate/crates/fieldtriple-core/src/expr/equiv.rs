//! Equality decision: exact on the polynomial/rational fragment, randomized
//! sampling with a "probable" verdict when transcendental atoms are present.

use std::collections::BTreeMap;

use num::{BigInt, BigRational};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::normalize::to_frac;
use super::{eval_at, Expr, ExprError, Symbol};

/// Outcome of an equality decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    /// Difference normalizes to the zero polynomial: exact proof.
    Proved,
    /// Transcendental content; agreement at 64 independent random rational
    /// points within |v| <= 10.
    Probable,
    /// Proven distinct (nonzero polynomial) or disagreement at a sample point.
    NotEquivalent,
}

impl Equivalence {
    pub fn holds(self) -> bool {
        !matches!(self, Equivalence::NotEquivalent)
    }
}

const SAMPLE_POINTS: usize = 64;
const SAMPLE_SEED: u64 = 0x7472_6970_6c65; // "triple"

/// Decide whether `a` and `b` denote the same function of their symbols.
pub fn equivalent(a: &Expr, b: &Expr) -> Result<Equivalence, ExprError> {
    let d = a - b;
    let frac = to_frac(&d)?;
    if frac.num.is_zero() {
        return Ok(Equivalence::Proved);
    }
    let nd = super::normalize(&d)?;
    if !nd.has_func() {
        // A nonzero rational function differs from zero on a dense set.
        return Ok(Equivalence::NotEquivalent);
    }

    let symbols: Vec<Symbol> = nd.free_symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < SAMPLE_POINTS {
        attempts += 1;
        if attempts > SAMPLE_POINTS * 100 {
            return Err(ExprError::EvalDomain(
                "could not sample enough admissible points for the probabilistic check".into(),
            ));
        }
        let point = random_point(&mut rng, &symbols);
        let (va, vb) = match (eval_at(a, &point), eval_at(b, &point)) {
            (Ok(va), Ok(vb)) => (va.to_f64(), vb.to_f64()),
            // Domain errors (log of a non-positive sample, ...) do not decide.
            (Err(ExprError::EvalDomain(_)), _) | (_, Err(ExprError::EvalDomain(_))) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if !va.is_finite() || !vb.is_finite() {
            continue;
        }
        let scale = 1.0 + va.abs() + vb.abs();
        if (va - vb).abs() > 1e-8 * scale {
            return Ok(Equivalence::NotEquivalent);
        }
        checked += 1;
    }
    Ok(Equivalence::Probable)
}

/// One random rational assignment with every value in [-10, 10].
fn random_point(rng: &mut ChaCha8Rng, symbols: &[Symbol]) -> BTreeMap<Symbol, BigRational> {
    let mut point = BTreeMap::new();
    for s in symbols {
        let den: i64 = rng.gen_range(1..=8);
        let num: i64 = rng.gen_range(-10 * den..=10 * den);
        point.insert(
            s.clone(),
            BigRational::new(BigInt::from(num), BigInt::from(den)),
        );
    }
    point
}

#[cfg(test)]
mod tests {
    use super::super::FuncTag;
    use super::*;

    fn sym(name: &str) -> Expr {
        Expr::sym(&Symbol::new(name))
    }

    #[test]
    fn binomial_square_proved() {
        let (a, b) = (sym("a"), sym("b"));
        let lhs = (a.clone() + b.clone()).pow(2);
        let rhs = a.pow(2) + Expr::int(2) * a.clone() * b.clone() + b.pow(2);
        assert_eq!(equivalent(&lhs, &rhs).unwrap(), Equivalence::Proved);
    }

    #[test]
    fn pythagorean_identity_probable() {
        let y1 = sym("y1");
        let lhs = Expr::func(FuncTag::Sin, y1.clone()).pow(2);
        let rhs = Expr::one() - Expr::func(FuncTag::Cos, y1.clone()).pow(2);
        assert_eq!(equivalent(&lhs, &rhs).unwrap(), Equivalence::Probable);
    }

    #[test]
    fn distinct_symbols_not_equivalent() {
        assert_eq!(
            equivalent(&sym("y1_1"), &sym("y1_2")).unwrap(),
            Equivalence::NotEquivalent
        );
    }

    #[test]
    fn transcendental_mismatch_detected() {
        let y1 = sym("y1");
        let lhs = Expr::func(FuncTag::Sin, y1.clone());
        let rhs = Expr::func(FuncTag::Cos, y1.clone());
        assert_eq!(equivalent(&lhs, &rhs).unwrap(), Equivalence::NotEquivalent);
    }
}
