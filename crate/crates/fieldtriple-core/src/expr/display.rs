//! Text form of expressions. The output conforms to the model-file
//! expression grammar, so every printed expression re-parses.

use std::fmt;

use num::{BigRational, One, Signed};

use super::{Expr, ExprKind};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.kind() {
        ExprKind::Sum(terms) => {
            if terms.is_empty() {
                return write!(f, "0");
            }
            for (i, t) in terms.iter().enumerate() {
                let (neg, mag) = split_sign(t);
                if i == 0 {
                    if neg {
                        write_leading_negative(f, &mag)?;
                        continue;
                    }
                } else {
                    write!(f, "{}", if neg { " - " } else { " + " })?;
                }
                write_term(f, &mag)?;
            }
            Ok(())
        }
        _ => {
            let (neg, mag) = split_sign(e);
            if neg {
                write_leading_negative(f, &mag)
            } else {
                write_term(f, &mag)
            }
        }
    }
}

/// A unary minus binds tighter than `^` in the grammar, so `-y1^2` would
/// re-parse as `(-y1)^2`. Parenthesize the magnitude whenever its first
/// printed factor carries an exponent.
fn write_leading_negative(f: &mut fmt::Formatter<'_>, mag: &Expr) -> fmt::Result {
    write!(f, "-")?;
    if leading_factor_has_exponent(mag) {
        write!(f, "(")?;
        write_term(f, mag)?;
        write!(f, ")")
    } else {
        write_term(f, mag)
    }
}

fn leading_factor_has_exponent(e: &Expr) -> bool {
    match e.kind() {
        ExprKind::Pow(b, k) => match *k {
            // negative powers print as `1/...`, starting with a safe `1`
            k if k < 0 => false,
            1 => leading_factor_has_exponent(b),
            _ => true,
        },
        ExprKind::Prod(fs) => {
            // mirror write_product: the coefficient (or its numerator) leads,
            // negative powers trail as denominators
            let mut first_num: Option<&Expr> = None;
            for (i, fac) in fs.iter().enumerate() {
                match fac.kind() {
                    ExprKind::Pow(_, k) if *k < 0 => continue,
                    ExprKind::Const(c) if i == 0 && !c.is_integer() => {
                        if !num::BigRational::from(c.numer().clone()).is_one() {
                            return false; // prints the integer numerator first
                        }
                        continue;
                    }
                    _ => {
                        first_num = Some(fac);
                        break;
                    }
                }
            }
            match first_num {
                Some(fac) => leading_factor_has_exponent(fac),
                None => false, // prints "1"
            }
        }
        _ => false,
    }
}

/// Extract a leading minus sign so sums read `a - b` instead of `a + -1*b`.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e.kind() {
        ExprKind::Const(c) if c.is_negative() => (true, Expr::constant(-c.clone())),
        ExprKind::Prod(fs) => {
            if let ExprKind::Const(c) = fs[0].kind() {
                if c.is_negative() {
                    let mag = -c.clone();
                    let mut rest: Vec<Expr> = fs[1..].to_vec();
                    if mag.is_one() && !rest.is_empty() {
                        return (true, Expr::prod(rest));
                    }
                    let mut all = vec![Expr::constant(mag)];
                    all.append(&mut rest);
                    return (true, Expr::prod(all));
                }
            }
            (false, e.clone())
        }
        _ => (false, e.clone()),
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.kind() {
        ExprKind::Sum(_) => {
            write!(f, "(")?;
            write_expr(f, e)?;
            write!(f, ")")
        }
        ExprKind::Prod(fs) => write_product(f, fs),
        ExprKind::Pow(b, k) if *k < 0 => {
            write!(f, "1/")?;
            write_den_base(f, b, (*k).unsigned_abs())
        }
        _ => write_factor(f, e),
    }
}

fn write_product(f: &mut fmt::Formatter<'_>, factors: &[Expr]) -> fmt::Result {
    let mut nums: Vec<Expr> = Vec::new();
    let mut dens: Vec<(&Expr, u32)> = Vec::new();
    // a rational coefficient p/q prints as `p*... /q`
    let mut const_den: Option<Expr> = None;
    for (i, fac) in factors.iter().enumerate() {
        match fac.kind() {
            ExprKind::Pow(b, k) if *k < 0 => dens.push((b, (*k).unsigned_abs())),
            ExprKind::Const(c) if i == 0 && !c.is_integer() => {
                let p = Expr::constant(BigRational::from(c.numer().clone()));
                const_den = Some(Expr::constant(BigRational::from(c.denom().clone())));
                if !p.as_constant().map(|v| v.is_one()).unwrap_or(false) {
                    nums.push(p);
                }
            }
            _ => nums.push(fac.clone()),
        }
    }
    if nums.is_empty() {
        write!(f, "1")?;
    } else {
        for (i, fac) in nums.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write_factor(f, fac)?;
        }
    }
    if let Some(q) = const_den {
        write!(f, "/")?;
        write_factor(f, &q)?;
    }
    for (b, k) in dens {
        write!(f, "/")?;
        write_den_base(f, b, k)?;
    }
    Ok(())
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.kind() {
        ExprKind::Const(c) => write!(f, "{c}"),
        ExprKind::Sym(s) => write!(f, "{s}"),
        ExprKind::Sum(_) | ExprKind::Prod(_) => {
            write!(f, "(")?;
            write_expr(f, e)?;
            write!(f, ")")
        }
        ExprKind::Pow(b, k) => {
            if *k < 0 {
                write!(f, "(1/")?;
                write_den_base(f, b, (*k).unsigned_abs())?;
                write!(f, ")")
            } else {
                write_pow(f, b, *k)
            }
        }
        ExprKind::Func(tag, a) => {
            write!(f, "{}(", tag.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

fn write_pow(f: &mut fmt::Formatter<'_>, base: &Expr, k: i32) -> fmt::Result {
    if k == 1 {
        return write_factor(f, base);
    }
    if pow_base_needs_parens(base) {
        write!(f, "(")?;
        write_expr(f, base)?;
        write!(f, ")")?;
    } else {
        write_factor(f, base)?;
    }
    write!(f, "^{k}")
}

fn write_den_base(f: &mut fmt::Formatter<'_>, base: &Expr, k: u32) -> fmt::Result {
    if k == 1 {
        if den_base_needs_parens(base) {
            write!(f, "(")?;
            write_expr(f, base)?;
            write!(f, ")")
        } else {
            write_factor(f, base)
        }
    } else if pow_base_needs_parens(base) {
        write!(f, "(")?;
        write_expr(f, base)?;
        write!(f, ")^{k}")
    } else {
        write_factor(f, base)?;
        write!(f, "^{k}")
    }
}

fn constant_needs_parens(c: &BigRational) -> bool {
    c.is_negative() || !c.is_integer()
}

fn pow_base_needs_parens(e: &Expr) -> bool {
    match e.kind() {
        ExprKind::Const(c) => constant_needs_parens(c),
        ExprKind::Sym(_) | ExprKind::Func(_, _) => false,
        ExprKind::Sum(_) | ExprKind::Prod(_) | ExprKind::Pow(_, _) => true,
    }
}

fn den_base_needs_parens(e: &Expr) -> bool {
    match e.kind() {
        ExprKind::Const(c) => constant_needs_parens(c),
        ExprKind::Sym(_) | ExprKind::Func(_, _) => false,
        // `a/x^2` re-parses with the whole power in the denominator
        ExprKind::Pow(_, k) => *k < 0,
        ExprKind::Sum(_) | ExprKind::Prod(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{normalize, FuncTag, Symbol};
    use super::*;

    fn sym(name: &str) -> Expr {
        Expr::sym(&Symbol::new(name))
    }

    #[test]
    fn canonical_text_samples() {
        let e = normalize(&((sym("y1_1").pow(2) + sym("y1_2").pow(2)) / Expr::int(2))).unwrap();
        assert_eq!(e.to_string(), "y1_1^2/2 + y1_2^2/2");

        let e = normalize(&(sym("y1") - sym("x1") * Expr::int(3))).unwrap();
        assert_eq!(e.to_string(), "-3*x1 + y1");

        let e = normalize(&(Expr::func(FuncTag::Sin, sym("y1")) * sym("y1_2"))).unwrap();
        assert_eq!(e.to_string(), "y1_2*sin(y1)");

        let e = normalize(&(Expr::one() / (sym("x1") + Expr::one()))).unwrap();
        assert_eq!(e.to_string(), "1/(x1 + 1)");
    }

    #[test]
    fn negative_leading_term() {
        let e = normalize(&(-sym("y1") - Expr::one())).unwrap();
        assert_eq!(e.to_string(), "-y1 - 1");
    }
}
