//! Recursive-descent parser for coefficient expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' uint)?
//! base   := uint | ident | '(' expr ')'
//! ```
//!
//! Positions in errors are 1-based character columns.

use num_bigint::BigInt;
use std::str::FromStr;

use super::{BaseContext, ExprError, RatFunc};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((Tok::Int(BigInt::from_str(&digits).expect("digits")), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => {
                return Err(ExprError::Syntax { pos, msg: format!("unexpected character `{other}`") });
            }
        };
        out.push((tok, pos));
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    ctx: &'a BaseContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<RatFunc, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFunc, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.factor()?;
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.factor()?;
                    acc = acc.checked_div(&d).map_err(|_| ExprError::DivisionByZero { pos })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RatFunc, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            (Tok::Int(n), _) => {
                let e = u32::try_from(n).map_err(|_| ExprError::BadExponent { pos })?;
                Ok(base.pow(e))
            }
            _ => Err(ExprError::BadExponent { pos }),
        }
    }

    fn base(&mut self) -> Result<RatFunc, ExprError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Int(n) => Ok(RatFunc::from_rational(num_rational::BigRational::from_integer(n))),
            Tok::Ident(name) => match self.ctx.index_of(&name) {
                Some(i) => Ok(RatFunc::var(i)),
                None => Err(ExprError::UnknownVariable { name, pos }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (other, p) => Err(ExprError::Syntax { pos: p, msg: format!("expected `)`, found {}", other.describe()) }),
                }
            }
            other => Err(ExprError::Syntax { pos, msg: format!("expected a number, variable or `(`, found {}", other.describe()) }),
        }
    }
}

/// Parses `text` into a canonical rational function over `ctx`.
pub fn parse_expr(text: &str, ctx: &BaseContext) -> Result<RatFunc, ExprError> {
    let mut p = Parser { toks: lex(text)?, at: 0, ctx };
    let value = p.expr()?;
    match p.peek() {
        Tok::End => Ok(value),
        other => Err(ExprError::Syntax { pos: p.pos(), msg: format!("unexpected {}", other.describe()) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> BaseContext {
        BaseContext::new(["x", "y"]).unwrap()
    }

    #[test]
    fn literals_and_precedence() {
        let c = ctx();
        assert!(parse_expr("0", &c).unwrap().is_zero());
        assert_eq!(parse_expr("2+3*4", &c).unwrap(), RatFunc::from_int(14));
        assert_eq!(parse_expr("-2^2", &c).unwrap(), RatFunc::from_int(-4));
        assert_eq!(parse_expr("(1-3)^2", &c).unwrap(), RatFunc::from_int(4));
        assert_eq!(parse_expr("12/8/3", &c).unwrap(), RatFunc::ratio(1, 2));
        assert_eq!(parse_expr("--x", &c).unwrap(), RatFunc::var(0));
    }

    #[test]
    fn reduces_to_canonical() {
        let c = ctx();
        let f = parse_expr("(x^2 - y^2)/(x - y)", &c).unwrap();
        assert_eq!(f, &RatFunc::var(0) + &RatFunc::var(1));
        let g = parse_expr("1/(1+x)", &c).unwrap();
        assert!(g.numerator().is_one());
        assert_eq!(g.denominator(), &(&num_poly_x() + &crate::field::Poly::one()));
    }

    fn num_poly_x() -> crate::field::Poly {
        crate::field::Poly::var(0)
    }

    #[test]
    fn error_positions() {
        let c = ctx();
        assert_eq!(parse_expr("x + z", &c), Err(ExprError::UnknownVariable { name: "z".into(), pos: 5 }));
        assert_eq!(parse_expr("x/(y-y)", &c), Err(ExprError::DivisionByZero { pos: 3 }));
        assert_eq!(parse_expr("x^y", &c), Err(ExprError::BadExponent { pos: 3 }));
        assert_eq!(parse_expr("x^-1", &c), Err(ExprError::BadExponent { pos: 3 }));
        assert!(matches!(parse_expr("x +", &c), Err(ExprError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expr("(x", &c), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expr("x y", &c), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expr("x # 1", &c), Err(ExprError::Syntax { pos: 3, .. })));
    }
}
