//! Canonical normalization: expanded multivariate polynomials with rational
//! coefficients over a fixed symbol order, with transcendental applications
//! treated as opaque atoms. Quotients keep an explicit denominator whose
//! leading coefficient is scaled to one; no polynomial gcd is attempted.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num::{BigRational, One, Zero};

use super::{Expr, ExprError, ExprKind, FuncTag, Symbol};

/// A multiplicative atom of the canonical form: either a plain symbol or an
/// opaque transcendental application with a normalized argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Atom {
    Sym(Symbol),
    Func(FuncTag, Expr),
}

impl Atom {
    fn to_expr(&self) -> Expr {
        match self {
            Atom::Sym(s) => Expr::sym(s),
            Atom::Func(tag, arg) => Expr::func(*tag, arg.clone()),
        }
    }
}

/// A power product of atoms; exponents are strictly positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Monomial(BTreeMap<Atom, u32>);

impl Monomial {
    fn unit() -> Self {
        Monomial(BTreeMap::new())
    }

    fn atom(a: Atom) -> Self {
        let mut m = BTreeMap::new();
        m.insert(a, 1);
        Monomial(m)
    }

    fn degree(&self) -> u64 {
        self.0.values().map(|&e| u64::from(e)).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (a, e) in &other.0 {
            *out.entry(a.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }

    fn is_unit(&self) -> bool {
        self.0.is_empty()
    }
}

// Iteration order doubles as display order: higher total degree first, then
// plain map order among equal degrees.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Poly(BTreeMap<Monomial, BigRational>);

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    fn constant(c: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Monomial::unit(), c);
        }
        Poly(m)
    }

    fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    fn atom(a: Atom) -> Self {
        let mut m = BTreeMap::new();
        m.insert(Monomial::atom(a), BigRational::one());
        Poly(m)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn as_constant(&self) -> Option<BigRational> {
        if self.0.is_empty() {
            return Some(BigRational::zero());
        }
        if self.0.len() == 1 {
            let (m, c) = self.0.iter().next().unwrap();
            if m.is_unit() {
                return Some(c.clone());
            }
        }
        None
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            let entry = out.entry(m.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.remove(m);
            }
        }
        Poly(out)
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                let m = ma.mul(mb);
                let c = ca * cb;
                let entry = out.entry(m.clone()).or_insert_with(BigRational::zero);
                *entry += c;
                if entry.is_zero() {
                    out.remove(&m);
                }
            }
        }
        Poly(out)
    }

    fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, v)| (m.clone(), v * c)).collect())
    }

    fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Coefficient of the first monomial in iteration order.
    fn leading_coefficient(&self) -> Option<BigRational> {
        self.0.values().next().cloned()
    }

    fn to_expr(&self) -> Expr {
        if self.0.is_empty() {
            return Expr::zero();
        }
        let mut terms = Vec::with_capacity(self.0.len());
        for (mono, coef) in &self.0 {
            terms.push(term_expr(mono, coef));
        }
        Expr::sum(terms)
    }
}

fn term_expr(mono: &Monomial, coef: &BigRational) -> Expr {
    let mut factors: Vec<Expr> = Vec::new();
    for (atom, exp) in &mono.0 {
        factors.push(atom.to_expr().pow(*exp as i32));
    }
    if factors.is_empty() {
        return Expr::constant(coef.clone());
    }
    if coef.is_one() {
        return Expr::prod(factors);
    }
    let mut all = Vec::with_capacity(factors.len() + 1);
    all.push(Expr::constant(coef.clone()));
    all.extend(factors);
    Expr::prod(all)
}

/// Quotient of two polynomials. Invariants: the denominator is nonzero and
/// its leading coefficient is one; a constant denominator is exactly 1 (the
/// constant is folded into the numerator).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Frac {
    pub(crate) num: Poly,
    pub(crate) den: Poly,
}

impl Frac {
    fn new(num: Poly, den: Poly) -> Result<Frac, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if let Some(c) = den.as_constant() {
            let inv = BigRational::one() / c;
            return Ok(Frac {
                num: num.scale(&inv),
                den: Poly::one(),
            });
        }
        let lead = den.leading_coefficient().expect("nonzero denominator");
        let inv = BigRational::one() / lead;
        Ok(Frac {
            num: num.scale(&inv),
            den: den.scale(&inv),
        })
    }

    fn from_poly(p: Poly) -> Frac {
        Frac {
            num: p,
            den: Poly::one(),
        }
    }

    fn is_den_one(&self) -> bool {
        self.den.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    fn add(&self, other: &Frac) -> Result<Frac, ExprError> {
        if self.is_den_one() && other.is_den_one() {
            return Ok(Frac::from_poly(self.num.add(&other.num)));
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Frac::new(num, den)
    }

    fn mul(&self, other: &Frac) -> Result<Frac, ExprError> {
        if self.is_den_one() && other.is_den_one() {
            return Ok(Frac::from_poly(self.num.mul(&other.num)));
        }
        Frac::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    fn pow(&self, k: i32) -> Result<Frac, ExprError> {
        if k == 0 {
            // 0^0 is normalized to 1; no derivation in the engine produces it.
            return Ok(Frac::from_poly(Poly::one()));
        }
        let e = k.unsigned_abs();
        if k > 0 {
            Frac::new(self.num.pow(e), self.den.pow(e))
        } else {
            if self.num.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            Frac::new(self.den.pow(e), self.num.pow(e))
        }
    }

    fn to_expr(&self) -> Expr {
        let num = self.num.to_expr();
        if self.is_den_one() {
            return num;
        }
        let den_inv = self.den.to_expr().pow(-1);
        if num == Expr::one() {
            return den_inv;
        }
        Expr::prod(vec![num, den_inv])
    }
}

pub(crate) fn to_frac(e: &Expr) -> Result<Frac, ExprError> {
    match e.kind() {
        ExprKind::Const(c) => Ok(Frac::from_poly(Poly::constant(c.clone()))),
        ExprKind::Sym(s) => Ok(Frac::from_poly(Poly::atom(Atom::Sym(s.clone())))),
        ExprKind::Sum(es) => {
            let mut acc = Frac::from_poly(Poly::zero());
            for t in es {
                acc = acc.add(&to_frac(t)?)?;
            }
            Ok(acc)
        }
        ExprKind::Prod(es) => {
            let mut acc = Frac::from_poly(Poly::one());
            for f in es {
                acc = acc.mul(&to_frac(f)?)?;
            }
            Ok(acc)
        }
        ExprKind::Pow(b, k) => to_frac(b)?.pow(*k),
        ExprKind::Func(tag, arg) => {
            let arg_n = normalize(arg)?;
            Ok(Frac::from_poly(Poly::atom(Atom::Func(*tag, arg_n))))
        }
    }
}

/// Canonical form of `e`. Idempotent: normalizing a normalized expression
/// reproduces it exactly, and equal canonical forms are structurally equal.
pub fn normalize(e: &Expr) -> Result<Expr, ExprError> {
    Ok(to_frac(e)?.to_expr())
}

/// `normalize(e) == 0`, without rebuilding the expression.
pub fn normalizes_to_zero(e: &Expr) -> Result<bool, ExprError> {
    Ok(to_frac(e)?.num.is_zero())
}

#[cfg(test)]
mod tests {
    use super::super::diff;
    use super::*;

    fn sym(name: &str) -> Expr {
        Expr::sym(&Symbol::new(name))
    }

    #[test]
    fn binomial_identity_vanishes() {
        let y1 = sym("y1");
        let e = (y1.clone() + Expr::one()).pow(2)
            - y1.pow(2)
            - Expr::int(2) * y1.clone()
            - Expr::one();
        assert_eq!(normalize(&e).unwrap(), Expr::zero());
    }

    #[test]
    fn commutativity_vanishes() {
        let a = sym("y1_1") * sym("p1_1") - sym("p1_1") * sym("y1_1");
        assert_eq!(normalize(&a).unwrap(), Expr::zero());
    }

    #[test]
    fn rational_arithmetic() {
        let e = Expr::int(2) * Expr::rational(1, 2) * sym("y1_2");
        assert_eq!(normalize(&e).unwrap(), sym("y1_2"));
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        let y1 = sym("y1");
        let x1 = sym("x1");
        let samples = vec![
            (y1.clone() + x1.clone()).pow(3),
            y1.clone() / (x1.clone() + Expr::one()),
            Expr::func(FuncTag::Sin, y1.clone() + x1.clone()) * Expr::rational(3, 4),
            (y1.clone() - y1.clone()) * x1.clone(),
            Expr::rational(-7, 3) * y1.pow(2) + x1.pow(-2),
        ];
        for e in samples {
            let n1 = normalize(&e).unwrap();
            let n2 = normalize(&n1).unwrap();
            assert_eq!(n1, n2, "normalize not idempotent on {}", e);
        }
    }

    #[test]
    fn division_by_zero_polynomial_detected() {
        let y1 = sym("y1");
        let zero = y1.clone() - y1.clone();
        let e = Expr::one() / zero;
        assert_eq!(normalize(&e), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn quotient_form_is_stable() {
        let x = sym("x1");
        let y = sym("y1");
        let q = (x.clone() + y.clone()) / (Expr::int(2) * x.clone() + Expr::int(2));
        let n = normalize(&q).unwrap();
        // denominator scaled monic: (x1 + 1), numerator picks up the 1/2
        let n2 = normalize(&n).unwrap();
        assert_eq!(n, n2);
        let diff_expr = &q - &n;
        assert!(normalizes_to_zero(&diff_expr).unwrap());
    }

    #[test]
    fn derivative_of_quotient_checks_out() {
        // d/dx (1/x) = -1/x^2
        let x = Symbol::new("x1");
        let e = Expr::sym(&x).pow(-1);
        let d = diff(&e, &x);
        let want = -Expr::sym(&x).pow(-2);
        assert!(normalizes_to_zero(&(&d - &want)).unwrap());
    }
}
