//! Minimal symbolic kernel: immutable expression trees over named symbols,
//! partial differentiation, canonical polynomial normalization, exact and
//! floating-point evaluation, and an equality decision.
//!
//! The canonical form is an expanded multivariate polynomial (or quotient of
//! two polynomials) with rational coefficients. Transcendental applications
//! (`sin`, `cos`, `exp`, `log`, `sqrt`) are opaque atoms whose arguments are
//! recursively normalized. Equality on the polynomial fragment is decided
//! exactly; expressions containing transcendental atoms fall back to random
//! rational sampling and report a "probable" verdict.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num::{BigInt, BigRational, Zero};

mod display;
mod equiv;
mod eval;
mod normalize;

pub use equiv::{equivalent, Equivalence};
pub use eval::{eval_at, eval_f64, Value};
pub use normalize::{normalize, normalizes_to_zero};

/// Errors raised by kernel operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("missing assignment for symbol `{0}`")]
    MissingAssignment(Symbol),
    #[error("evaluation domain error: {0}")]
    EvalDomain(String),
}

/// An interned symbol name.
///
/// The total order is "natural": runs of digits compare numerically, so
/// `y1_2 < y1_10`. Symbols are registered through a chart set or a model's
/// parameter list before they reach user-facing expressions; the parser is
/// the gatekeeper.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: impl AsRef<str>) -> Self {
        Symbol(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.0)
    }
}

/// Compare strings chunk-wise, treating digit runs as numbers.
fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ab, mut bb) = (a.as_bytes(), b.as_bytes());
    loop {
        match (ab.first(), bb.first()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(&x), Some(&y)) => {
                if x.is_ascii_digit() && y.is_ascii_digit() {
                    let xe = ab.iter().position(|c| !c.is_ascii_digit()).unwrap_or(ab.len());
                    let ye = bb.iter().position(|c| !c.is_ascii_digit()).unwrap_or(bb.len());
                    let xs = std::str::from_utf8(&ab[..xe]).unwrap().trim_start_matches('0');
                    let ys = std::str::from_utf8(&bb[..ye]).unwrap().trim_start_matches('0');
                    let ord = xs.len().cmp(&ys.len()).then_with(|| xs.cmp(ys));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                    ab = &ab[xe..];
                    bb = &bb[ye..];
                } else {
                    match x.cmp(&y) {
                        Ordering::Equal => {
                            ab = &ab[1..];
                            bb = &bb[1..];
                        }
                        ord => return ord,
                    }
                }
            }
        }
    }
}

/// Tags for the supported transcendental functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FuncTag {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl FuncTag {
    pub fn name(self) -> &'static str {
        match self {
            FuncTag::Sin => "sin",
            FuncTag::Cos => "cos",
            FuncTag::Exp => "exp",
            FuncTag::Log => "log",
            FuncTag::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => FuncTag::Sin,
            "cos" => FuncTag::Cos,
            "exp" => FuncTag::Exp,
            "log" => FuncTag::Log,
            "sqrt" => FuncTag::Sqrt,
            _ => return None,
        })
    }
}

/// Expression node kinds. Sums and products are n-ary; powers carry integer
/// exponents only (division is a negative power).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExprKind {
    Const(BigRational),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Expr, i32),
    Func(FuncTag, Expr),
}

/// An immutable symbolic expression. Cheap to clone and safe to share across
/// threads.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<ExprKind>);

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind().cmp(other.kind())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Expr {
    pub fn kind(&self) -> &ExprKind {
        &self.0
    }

    pub fn constant(r: BigRational) -> Expr {
        Expr(Arc::new(ExprKind::Const(r)))
    }

    pub fn int(v: i64) -> Expr {
        Expr::constant(BigRational::from(BigInt::from(v)))
    }

    /// Exact rational constant `n/d`. Panics when `d == 0`.
    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::constant(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(s: &Symbol) -> Expr {
        Expr(Arc::new(ExprKind::Sym(s.clone())))
    }

    /// n-ary sum; empty input is 0 and a single term is returned unchanged.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr(Arc::new(ExprKind::Sum(terms))),
        }
    }

    /// n-ary product; empty input is 1 and a single factor is returned unchanged.
    pub fn prod(factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr(Arc::new(ExprKind::Prod(factors))),
        }
    }

    pub fn pow(&self, exponent: i32) -> Expr {
        if exponent == 1 {
            self.clone()
        } else {
            Expr(Arc::new(ExprKind::Pow(self.clone(), exponent)))
        }
    }

    pub fn func(tag: FuncTag, arg: Expr) -> Expr {
        Expr(Arc::new(ExprKind::Func(tag, arg)))
    }

    /// True for the literal constant 0 (not for unnormalized zero expressions).
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.kind(), ExprKind::Const(c) if c.is_zero())
    }

    /// The constant value, if this node is a literal constant.
    pub fn as_constant(&self) -> Option<&BigRational> {
        match self.kind() {
            ExprKind::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Collect every symbol occurring in the expression.
    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.kind() {
            ExprKind::Const(_) => {}
            ExprKind::Sym(s) => {
                out.insert(s.clone());
            }
            ExprKind::Sum(es) | ExprKind::Prod(es) => {
                for e in es {
                    e.collect_symbols(out);
                }
            }
            ExprKind::Pow(b, _) => b.collect_symbols(out),
            ExprKind::Func(_, a) => a.collect_symbols(out),
        }
    }

    /// True if any transcendental application occurs in the tree.
    pub fn has_func(&self) -> bool {
        match self.kind() {
            ExprKind::Const(_) | ExprKind::Sym(_) => false,
            ExprKind::Sum(es) | ExprKind::Prod(es) => es.iter().any(Expr::has_func),
            ExprKind::Pow(b, _) => b.has_func(),
            ExprKind::Func(_, _) => true,
        }
    }

    /// Replace symbols by expressions. Symbols missing from the map are left
    /// in place. The result is not normalized.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Expr>) -> Expr {
        match self.kind() {
            ExprKind::Const(_) => self.clone(),
            ExprKind::Sym(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            ExprKind::Sum(es) => Expr::sum(es.iter().map(|e| e.substitute(map)).collect()),
            ExprKind::Prod(es) => Expr::prod(es.iter().map(|e| e.substitute(map)).collect()),
            ExprKind::Pow(b, k) => Expr(Arc::new(ExprKind::Pow(b.substitute(map), *k))),
            ExprKind::Func(tag, a) => Expr::func(*tag, a.substitute(map)),
        }
    }
}

/// Partial derivative of `e` with respect to `s`, treating every other symbol
/// as independent. Transcendental atoms differentiate by the chain rule. The
/// result is not normalized.
pub fn diff(e: &Expr, s: &Symbol) -> Expr {
    match e.kind() {
        ExprKind::Const(_) => Expr::zero(),
        ExprKind::Sym(t) => {
            if t == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        ExprKind::Sum(es) => Expr::sum(es.iter().map(|t| diff(t, s)).collect()),
        ExprKind::Prod(es) => {
            let mut terms = Vec::with_capacity(es.len());
            for (i, fi) in es.iter().enumerate() {
                let d = diff(fi, s);
                if d.is_zero_literal() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(es.len());
                for (j, fj) in es.iter().enumerate() {
                    factors.push(if i == j { d.clone() } else { fj.clone() });
                }
                terms.push(Expr::prod(factors));
            }
            Expr::sum(terms)
        }
        ExprKind::Pow(b, k) => {
            if *k == 0 {
                return Expr::zero();
            }
            let d = diff(b, s);
            if d.is_zero_literal() {
                return Expr::zero();
            }
            Expr::prod(vec![Expr::int(i64::from(*k)), b.pow(*k - 1), d])
        }
        ExprKind::Func(tag, a) => {
            let d = diff(a, s);
            if d.is_zero_literal() {
                return Expr::zero();
            }
            let outer = match tag {
                FuncTag::Sin => Expr::func(FuncTag::Cos, a.clone()),
                FuncTag::Cos => Expr::prod(vec![Expr::int(-1), Expr::func(FuncTag::Sin, a.clone())]),
                FuncTag::Exp => Expr::func(FuncTag::Exp, a.clone()),
                FuncTag::Log => a.pow(-1),
                FuncTag::Sqrt => Expr::prod(vec![
                    Expr::rational(1, 2),
                    Expr::func(FuncTag::Sqrt, a.clone()).pow(-1),
                ]),
            };
            Expr::prod(vec![outer, d])
        }
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum(vec![self.clone(), rhs.clone()])
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sum(vec![self.clone(), -rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::prod(vec![self.clone(), rhs.clone()])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::prod(vec![self, rhs])
    }
}

impl Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::prod(vec![self.clone(), rhs.pow(-1)])
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        &self / &rhs
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.kind() {
            ExprKind::Const(c) => Expr::constant(-c.clone()),
            _ => Expr::prod(vec![Expr::int(-1), self.clone()]),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> Symbol {
        Symbol::new(name)
    }

    #[test]
    fn natural_symbol_order() {
        assert!(s("y1_2") < s("y1_10"));
        assert!(s("x1") < s("x2"));
        assert!(s("p1_1") < s("p1_2"));
        assert!(s("x2") < s("x11"));
        assert!(s("dp1_1_1") < s("dp1_1_2"));
        // natural-equal names fall back to lexicographic, keeping Ord
        // consistent with Eq
        assert_ne!(s("y01").cmp(&s("y1")), Ordering::Equal);
    }

    #[test]
    fn diff_power_rule() {
        // d(y1_1^2/2)/dy1_1 = y1_1
        let v = s("y1_1");
        let e = Expr::sym(&v).pow(2) / Expr::int(2);
        let d = normalize(&diff(&e, &v)).unwrap();
        assert_eq!(d, Expr::sym(&v));
    }

    #[test]
    fn diff_chain_and_product_rule() {
        // d(sin(y1)*y1_2)/dy1 = cos(y1)*y1_2
        let y1 = s("y1");
        let y12 = s("y1_2");
        let e = Expr::func(FuncTag::Sin, Expr::sym(&y1)) * Expr::sym(&y12);
        let d = normalize(&diff(&e, &y1)).unwrap();
        let want = normalize(&(Expr::func(FuncTag::Cos, Expr::sym(&y1)) * Expr::sym(&y12))).unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn diff_linearity_on_mixed_terms() {
        // d(x1*y1_1 + y2_3)/dy2_3 = 1
        let x1 = s("x1");
        let y11 = s("y1_1");
        let y23 = s("y2_3");
        let e = Expr::sym(&x1) * Expr::sym(&y11) + Expr::sym(&y23);
        let d = normalize(&diff(&e, &y23)).unwrap();
        assert_eq!(d, Expr::one());
    }
}
