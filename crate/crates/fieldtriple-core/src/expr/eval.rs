//! Exact and floating-point evaluation of expressions at a point.

use std::collections::BTreeMap;

use num::{BigRational, ToPrimitive, Zero};

use super::{Expr, ExprError, ExprKind, FuncTag, Symbol};

/// Result of an evaluation: exact rational when the expression is free of
/// transcendental applications, floating point otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx(_) => None,
        }
    }
}

/// Evaluate `e` at the given assignment. Every symbol of `e` must be covered.
/// Polynomial and rational expressions evaluate exactly; any transcendental
/// application switches the whole evaluation to floating point.
pub fn eval_at(e: &Expr, assignment: &BTreeMap<Symbol, BigRational>) -> Result<Value, ExprError> {
    if e.has_func() {
        let floats: BTreeMap<Symbol, f64> = assignment
            .iter()
            .map(|(s, r)| (s.clone(), r.to_f64().unwrap_or(f64::NAN)))
            .collect();
        Ok(Value::Approx(eval_f64(e, &floats)?))
    } else {
        Ok(Value::Exact(eval_exact(e, assignment)?))
    }
}

fn eval_exact(
    e: &Expr,
    assignment: &BTreeMap<Symbol, BigRational>,
) -> Result<BigRational, ExprError> {
    match e.kind() {
        ExprKind::Const(c) => Ok(c.clone()),
        ExprKind::Sym(s) => assignment
            .get(s)
            .cloned()
            .ok_or_else(|| ExprError::MissingAssignment(s.clone())),
        ExprKind::Sum(es) => {
            let mut acc = BigRational::zero();
            for t in es {
                acc += eval_exact(t, assignment)?;
            }
            Ok(acc)
        }
        ExprKind::Prod(es) => {
            let mut acc = BigRational::from_integer(1.into());
            for f in es {
                acc *= eval_exact(f, assignment)?;
            }
            Ok(acc)
        }
        ExprKind::Pow(b, k) => {
            let base = eval_exact(b, assignment)?;
            if *k < 0 && base.is_zero() {
                return Err(ExprError::EvalDomain(
                    "zero raised to a negative power".into(),
                ));
            }
            Ok(rational_pow(&base, *k))
        }
        ExprKind::Func(_, _) => unreachable!("exact path rejects transcendental nodes"),
    }
}

fn rational_pow(base: &BigRational, k: i32) -> BigRational {
    let mut acc = BigRational::from_integer(1.into());
    let e = k.unsigned_abs();
    for _ in 0..e {
        acc *= base;
    }
    if k < 0 {
        BigRational::from_integer(1.into()) / acc
    } else {
        acc
    }
}

/// Floating-point evaluation with f64 bindings; used by the grid verifier.
pub fn eval_f64(e: &Expr, assignment: &BTreeMap<Symbol, f64>) -> Result<f64, ExprError> {
    match e.kind() {
        ExprKind::Const(c) => Ok(c.to_f64().unwrap_or(f64::NAN)),
        ExprKind::Sym(s) => assignment
            .get(s)
            .copied()
            .ok_or_else(|| ExprError::MissingAssignment(s.clone())),
        ExprKind::Sum(es) => {
            let mut acc = 0.0;
            for t in es {
                acc += eval_f64(t, assignment)?;
            }
            Ok(acc)
        }
        ExprKind::Prod(es) => {
            let mut acc = 1.0;
            for f in es {
                acc *= eval_f64(f, assignment)?;
            }
            Ok(acc)
        }
        ExprKind::Pow(b, k) => {
            let base = eval_f64(b, assignment)?;
            if *k < 0 && base == 0.0 {
                return Err(ExprError::EvalDomain(
                    "zero raised to a negative power".into(),
                ));
            }
            Ok(base.powi(*k))
        }
        ExprKind::Func(tag, a) => {
            let v = eval_f64(a, assignment)?;
            apply_func(*tag, v)
        }
    }
}

pub(crate) fn apply_func(tag: FuncTag, v: f64) -> Result<f64, ExprError> {
    match tag {
        FuncTag::Sin => Ok(v.sin()),
        FuncTag::Cos => Ok(v.cos()),
        FuncTag::Exp => Ok(v.exp()),
        FuncTag::Log => {
            if v <= 0.0 {
                Err(ExprError::EvalDomain(format!("log of non-positive value {v}")))
            } else {
                Ok(v.ln())
            }
        }
        FuncTag::Sqrt => {
            if v < 0.0 {
                Err(ExprError::EvalDomain(format!("sqrt of negative value {v}")))
            } else {
                Ok(v.sqrt())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_square_over_two() {
        let v = Symbol::new("y1_1");
        let e = Expr::sym(&v).pow(2) / Expr::int(2);
        let mut a = BTreeMap::new();
        a.insert(v, rat(3, 1));
        assert_eq!(eval_at(&e, &a).unwrap(), Value::Exact(rat(9, 2)));
    }

    #[test]
    fn exact_sum_cancels() {
        let x1 = Symbol::new("x1");
        let y1 = Symbol::new("y1");
        let e = Expr::sym(&x1) + Expr::sym(&y1);
        let mut a = BTreeMap::new();
        a.insert(x1, rat(1, 1));
        a.insert(y1, rat(-1, 1));
        assert_eq!(eval_at(&e, &a).unwrap(), Value::Exact(rat(0, 1)));
    }

    #[test]
    fn transcendental_goes_float() {
        let y1 = Symbol::new("y1");
        let e = Expr::func(FuncTag::Exp, Expr::zero()) * Expr::sym(&y1);
        let mut a = BTreeMap::new();
        a.insert(y1, rat(7, 1));
        match eval_at(&e, &a).unwrap() {
            Value::Approx(v) => assert!((v - 7.0).abs() < 1e-12),
            other => panic!("expected float value, got {other:?}"),
        }
    }

    #[test]
    fn missing_assignment_is_reported() {
        let y1 = Symbol::new("y1");
        let e = Expr::sym(&y1);
        let a = BTreeMap::new();
        assert_eq!(
            eval_at(&e, &a),
            Err(ExprError::MissingAssignment(y1))
        );
    }

    #[test]
    fn log_of_nonpositive_is_domain_error() {
        let y1 = Symbol::new("y1");
        let e = Expr::func(FuncTag::Log, Expr::sym(&y1));
        let mut a = BTreeMap::new();
        a.insert(y1, rat(-1, 1));
        assert!(matches!(eval_at(&e, &a), Err(ExprError::EvalDomain(_))));
    }
}
