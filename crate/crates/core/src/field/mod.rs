//! The coefficient field: exact multivariate rational functions over Q.
//!
//! Every scalar in the crate (anchor entries, structure functions, form and
//! multivector coefficients) is a [`RatFunc`] over the variables of a
//! [`BaseContext`]. A "nowhere-vanishing" function is modelled as a nonzero
//! element of the field; no pointwise non-vanishing is checked.

mod gcd;
mod parse;
mod poly;
mod ratfunc;

use thiserror::Error;

pub use gcd::{gcd, lcm};
pub use parse::parse_expr;
pub use poly::{Monomial, Poly, Rational};
pub use ratfunc::{arith, ArithOp, RatFunc, RatFuncDisplay};

pub(crate) use ratfunc::{format_ratfunc, Names};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid base variable list: {0}")]
    InvalidContext(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at column {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("division by the zero expression at column {pos}")]
    DivisionByZero { pos: usize },
    #[error("exponent at column {pos} must be a nonnegative integer literal")]
    BadExponent { pos: usize },
}

impl ExprError {
    pub fn column(&self) -> usize {
        match self {
            ExprError::Syntax { pos, .. }
            | ExprError::UnknownVariable { pos, .. }
            | ExprError::DivisionByZero { pos }
            | ExprError::BadExponent { pos } => *pos,
        }
    }

    /// The error text without its position.
    pub fn message(&self) -> String {
        match self {
            ExprError::Syntax { msg, .. } => format!("syntax error: {msg}"),
            ExprError::UnknownVariable { name, .. } => format!("unknown variable `{name}`"),
            ExprError::DivisionByZero { .. } => "division by the zero expression".into(),
            ExprError::BadExponent { .. } => "exponent must be a nonnegative integer literal".into(),
        }
    }
}

/// Ordered, named coordinates of the base. An empty list models a point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BaseContext {
    vars: Vec<String>,
}

impl BaseContext {
    pub fn new<I, S>(names: I) -> Result<Self, FieldError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vars: Vec<String> = names.into_iter().map(Into::into).collect();
        if vars.len() > 64 {
            return Err(FieldError::InvalidContext("at most 64 base variables are supported".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            let mut chars = v.chars();
            let ok = chars.next().is_some_and(|c| c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_');
            if !ok {
                return Err(FieldError::InvalidContext(format!("`{v}` is not an identifier")));
            }
            if vars[..i].contains(v) {
                return Err(FieldError::InvalidContext(format!("duplicate variable `{v}`")));
            }
        }
        Ok(BaseContext { vars })
    }

    pub fn point() -> Self {
        BaseContext::default()
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn parse(&self, text: &str) -> Result<RatFunc, ExprError> {
        parse_expr(text, self)
    }
}

/// `∂f/∂var` with the variable given by name.
pub fn partial_derivative(f: &RatFunc, var: &str, ctx: &BaseContext) -> Result<RatFunc, FieldError> {
    let i = ctx.index_of(var).ok_or_else(|| FieldError::UnknownVariable(var.to_string()))?;
    Ok(f.partial(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_validation() {
        assert!(BaseContext::new(["x", "y"]).is_ok());
        assert!(BaseContext::new(Vec::<String>::new()).unwrap().dim() == 0);
        assert!(BaseContext::new(["x", "x"]).is_err());
        assert!(BaseContext::new([""]).is_err());
        assert!(BaseContext::new(["1x"]).is_err());
    }

    #[test]
    fn named_partial_derivative() {
        let ctx = BaseContext::new(["x", "y"]).unwrap();
        let f = ctx.parse("x^2*y").unwrap();
        assert_eq!(partial_derivative(&f, "x", &ctx).unwrap(), ctx.parse("2*x*y").unwrap());
        assert!(partial_derivative(&ctx.parse("5").unwrap(), "x", &ctx).unwrap().is_zero());
        assert_eq!(partial_derivative(&f, "z", &ctx), Err(FieldError::UnknownVariable("z".into())));
    }
}
