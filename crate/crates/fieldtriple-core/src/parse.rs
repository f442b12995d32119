//! Recursive-descent parser for the model-file expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' integer)?
//! base   := number | ident | func '(' expr ')' | '(' expr ')' | '-' base
//! func   := sin | cos | exp | log | sqrt
//! ```
//!
//! Identifiers must name a registered chart coordinate or declared parameter;
//! numbers are integers or decimal fractions, stored as exact rationals.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigInt, BigRational};

use crate::expr::{Expr, FuncTag, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSymbol,
    Arity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownSymbol => "unknown symbol",
            ParseErrorKind::Arity => "arity error",
        };
        write!(f, "{label} at {}:{}: {}", self.line, self.col, self.message)
    }
}

/// The set of identifiers an expression is allowed to mention.
#[derive(Debug, Clone, Default)]
pub struct SymbolScope {
    allowed: BTreeSet<Symbol>,
}

impl SymbolScope {
    pub fn new() -> Self {
        SymbolScope {
            allowed: BTreeSet::new(),
        }
    }

    pub fn from_symbols<I: IntoIterator<Item = Symbol>>(symbols: I) -> Self {
        SymbolScope {
            allowed: symbols.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, s: Symbol) {
        self.allowed.insert(s);
    }

    pub fn extend<I: IntoIterator<Item = Symbol>>(&mut self, symbols: I) {
        self.allowed.extend(symbols);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.allowed.contains(&Symbol::new(name))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes = text.as_bytes();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let (tline, tcol) = (line, col);
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
                continue;
            }
            '+' => out.push(SpannedTok { tok: Tok::Plus, line: tline, col: tcol }),
            '-' => out.push(SpannedTok { tok: Tok::Minus, line: tline, col: tcol }),
            '*' => out.push(SpannedTok { tok: Tok::Star, line: tline, col: tcol }),
            '/' => out.push(SpannedTok { tok: Tok::Slash, line: tline, col: tcol }),
            '^' => out.push(SpannedTok { tok: Tok::Caret, line: tline, col: tcol }),
            '(' => out.push(SpannedTok { tok: Tok::LParen, line: tline, col: tcol }),
            ')' => out.push(SpannedTok { tok: Tok::RParen, line: tline, col: tcol }),
            ',' => out.push(SpannedTok { tok: Tok::Comma, line: tline, col: tcol }),
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let mut frac_digits = 0usize;
                if i < bytes.len() && bytes[i] as char == '.' {
                    i += 1;
                    let fstart = i;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                    frac_digits = i - fstart;
                    if frac_digits == 0 {
                        return Err(ParseError {
                            kind: ParseErrorKind::Syntax,
                            line: tline,
                            col: tcol,
                            message: "decimal point must be followed by digits".into(),
                        });
                    }
                }
                let textn = &text[start..i];
                let digits: String = textn.chars().filter(|c| *c != '.').collect();
                let numer: BigInt = digits.parse().expect("digit string");
                let denom = BigInt::from(10u32).pow(frac_digits as u32);
                out.push(SpannedTok {
                    tok: Tok::Num(BigRational::new(numer, denom)),
                    line: tline,
                    col: tcol,
                });
                col += i - start;
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_alphanumeric() || c == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(SpannedTok {
                    tok: Tok::Ident(text[start..i].to_string()),
                    line: tline,
                    col: tcol,
                });
                col += i - start;
                continue;
            }
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax,
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
        i += 1;
        col += 1;
    }
    out.push(SpannedTok {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<SpannedTok>,
    pos: usize,
    scope: &'a SymbolScope,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &SpannedTok {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> SpannedTok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, kind: ParseErrorKind, at: &SpannedTok, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line: at.line,
            col: at.col,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    factors.push(self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    factors.push(self.factor()?.pow(-1));
                }
                _ => break,
            }
        }
        Ok(Expr::prod(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if matches!(self.peek().tok, Tok::Caret) {
            self.bump();
            let exp = self.integer_exponent()?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, ParseError> {
        let negative = if matches!(self.peek().tok, Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let t = self.bump();
        match &t.tok {
            Tok::Num(r) if r.is_integer() => {
                let v: i32 = r.to_integer().try_into().map_err(|_| {
                    self.err(ParseErrorKind::Syntax, &t, "exponent out of range")
                })?;
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.err(
                ParseErrorKind::Syntax,
                &t,
                "expected an integer exponent after `^`",
            )),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(r) => Ok(Expr::constant(r.clone())),
            Tok::Minus => Ok(-self.base()?),
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.bump();
                if !matches!(close.tok, Tok::RParen) {
                    return Err(self.err(
                        ParseErrorKind::Syntax,
                        &close,
                        "expected `)` to close the parenthesis",
                    ));
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(tag) = FuncTag::from_name(name) {
                    let open = self.bump();
                    if !matches!(open.tok, Tok::LParen) {
                        return Err(self.err(
                            ParseErrorKind::Arity,
                            &t,
                            format!("function `{name}` requires one parenthesized argument"),
                        ));
                    }
                    let arg = self.expr()?;
                    let close = self.bump();
                    match close.tok {
                        Tok::RParen => Ok(Expr::func(tag, arg)),
                        Tok::Comma => Err(self.err(
                            ParseErrorKind::Arity,
                            &close,
                            format!("function `{name}` takes exactly one argument"),
                        )),
                        _ => Err(self.err(
                            ParseErrorKind::Syntax,
                            &close,
                            "expected `)` to close the function argument",
                        )),
                    }
                } else if self.scope.contains(name) {
                    Ok(Expr::sym(&Symbol::new(name)))
                } else {
                    Err(self.err(
                        ParseErrorKind::UnknownSymbol,
                        &t,
                        format!("`{name}` is not a registered coordinate or parameter"),
                    ))
                }
            }
            Tok::Eof => Err(self.err(
                ParseErrorKind::Syntax,
                &t,
                "unexpected end of input",
            )),
            other => Err(self.err(
                ParseErrorKind::Syntax,
                &t,
                format!("unexpected token {other:?}"),
            )),
        }
    }
}

/// Parse one expression against the given symbol scope.
pub fn parse_expr(text: &str, scope: &SymbolScope) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        scope,
    };
    let e = p.expr()?;
    let t = p.bump();
    if !matches!(t.tok, Tok::Eof) {
        return Err(ParseError {
            kind: ParseErrorKind::Syntax,
            line: t.line,
            col: t.col,
            message: format!("trailing input starting with {:?}", t.tok),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equivalent, normalize, Equivalence};

    fn scope(names: &[&str]) -> SymbolScope {
        SymbolScope::from_symbols(names.iter().map(Symbol::new))
    }

    #[test]
    fn electrostatics_lagrangian_parses() {
        let sc = scope(&["x1", "x2", "x3", "y1", "y1_1", "y1_2", "y1_3"]);
        let e = parse_expr("(y1_1^2 + y1_2^2 + y1_3^2)/2", &sc).unwrap();
        let n = normalize(&e).unwrap();
        assert_eq!(n.to_string(), "y1_1^2/2 + y1_2^2/2 + y1_3^2/2");
    }

    #[test]
    fn unknown_symbol_has_kind() {
        let sc = scope(&["x1", "y1", "y1_1", "y1_2", "y1_3"]);
        let err = parse_expr("y1_4", &sc).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol);
    }

    #[test]
    fn unclosed_paren_reports_position() {
        let sc = scope(&["y1"]);
        let err = parse_expr("sin(y1", &sc).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 7);
    }

    #[test]
    fn two_argument_call_is_an_arity_error() {
        let sc = scope(&["x1", "x2"]);
        let err = parse_expr("sin(x1, x2)", &sc).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Arity);
    }

    #[test]
    fn function_without_parens_is_an_arity_error() {
        let sc = scope(&["x1"]);
        let err = parse_expr("sin + x1", &sc).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Arity);
    }

    #[test]
    fn decimals_are_exact_rationals() {
        let sc = scope(&["y1"]);
        let e = parse_expr("0.25*y1", &sc).unwrap();
        let want = Expr::rational(1, 4) * parse_expr("y1", &sc).unwrap();
        assert_eq!(equivalent(&e, &want).unwrap(), Equivalence::Proved);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let sc = scope(&["a", "b", "c"]);
        let e = parse_expr("-a + b*c^2 - a/b", &sc).unwrap();
        let (a, b, c) = (
            parse_expr("a", &sc).unwrap(),
            parse_expr("b", &sc).unwrap(),
            parse_expr("c", &sc).unwrap(),
        );
        let want = -a.clone() + b.clone() * c.pow(2) - a / b;
        assert_eq!(equivalent(&e, &want).unwrap(), Equivalence::Proved);
    }

    #[test]
    fn printed_normal_forms_reparse() {
        let sc = scope(&["x1", "y1", "y1_1", "p1_1"]);
        let samples = [
            "y1_1^2/2 - y1^2/2",
            "(y1 + 1)^3/(x1 + 2)",
            "sin(y1)*y1_1 - cos(x1)/2",
            "3/2*p1_1 - 0.5",
            "1/(x1 + 1)^2",
        ];
        for text in samples {
            let e = parse_expr(text, &sc).unwrap();
            let n = normalize(&e).unwrap();
            let reparsed = parse_expr(&n.to_string(), &sc).unwrap();
            assert_eq!(
                equivalent(&n, &reparsed).unwrap(),
                Equivalence::Proved,
                "round trip failed for {text} -> {n}"
            );
        }
    }
}
