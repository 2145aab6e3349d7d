use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::gcd::gcd;
use super::poly::{Monomial, Poly, Rational};
use super::{BaseContext, FieldError};

/// An exact rational function `numerator / denominator` over Q.
///
/// Always stored reduced, with a denominator whose grlex-leading coefficient
/// is one, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

/// Field operation selector for [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field arithmetic on two canonical values.
pub fn arith(a: &RatFunc, b: &RatFunc, op: ArithOp) -> Result<RatFunc, FieldError> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn from_int(n: i64) -> Self {
        RatFunc::from_poly(Poly::from_int(n))
    }

    pub fn from_rational(q: Rational) -> Self {
        RatFunc::from_poly(Poly::constant(q))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        RatFunc::from_rational(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// The coordinate function of base variable `index`.
    pub fn var(index: usize) -> Self {
        RatFunc::from_poly(Poly::var(index))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    /// Builds `num / den` in canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.as_constant() {
            return RatFunc { num: num.scale(&c.recip()), den: Poly::one() };
        }
        let g = gcd(&num, &den);
        let (num, den) =
            if g.is_one() { (num, den) } else { (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides")) };
        Self::normalize_sign(num, den)
    }

    fn normalize_sign(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coefficient();
        if lc.is_one() {
            return RatFunc { num, den };
        }
        let inv = lc.recip();
        RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<RatFunc, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::normalize_sign(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &RatFunc) -> Result<RatFunc, FieldError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, c: &Rational) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        RatFunc { num: self.num.pow(e), den: self.den.pow(e) }
    }

    /// Partial derivative in base variable `index` (quotient rule).
    pub fn partial(&self, index: usize) -> RatFunc {
        let dn = self.num.derivative(index);
        if self.den.is_one() {
            return RatFunc::from_poly(dn);
        }
        let dd = self.den.derivative(index);
        if dd.is_zero() {
            return Self::reduce(dn, self.den.clone());
        }
        let top = &(&dn * &self.den) - &(&self.num * &dd);
        Self::reduce(top, self.den.pow(2))
    }

    /// Evaluates at a rational point; `None` if the denominator vanishes there.
    pub fn evaluate(&self, point: &[Rational]) -> Option<Rational> {
        let d = self.den.evaluate(point);
        if d.is_zero() {
            return None;
        }
        Some(self.num.evaluate(point) / d)
    }

    /// Renders with the context's variable names, in a form the expression
    /// parser reads back to the same value.
    pub fn display<'a>(&'a self, ctx: &'a BaseContext) -> RatFuncDisplay<'a> {
        RatFuncDisplay { f: self, names: Names::Ctx(ctx) }
    }
}

pub(crate) enum Names<'a> {
    Ctx(&'a BaseContext),
    Generic,
}

impl Names<'_> {
    fn name(&self, i: usize) -> String {
        match self {
            Names::Ctx(ctx) => ctx.vars().get(i).cloned().unwrap_or_else(|| format!("v{}", i + 1)),
            Names::Generic => format!("v{}", i + 1),
        }
    }
}

pub struct RatFuncDisplay<'a> {
    f: &'a RatFunc,
    names: Names<'a>,
}

fn write_monomial(out: &mut String, m: &Monomial, names: &Names) {
    let mut first = true;
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            out.push('*');
        }
        first = false;
        out.push_str(&names.name(i));
        if e > 1 {
            out.push('^');
            out.push_str(&e.to_string());
        }
    }
}

fn write_rational_abs(out: &mut String, c: &Rational) {
    let a = c.abs();
    out.push_str(&a.numer().to_string());
    if !a.is_integer() {
        out.push('/');
        out.push_str(&a.denom().to_string());
    }
}

/// Prints a polynomial as a signed sum, highest grlex term first.
pub(crate) fn write_poly(out: &mut String, p: &Poly, names: &Names) {
    if p.is_zero() {
        out.push('0');
        return;
    }
    for (idx, (m, c)) in p.terms().enumerate() {
        if idx == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let abs_one = c.abs().is_one();
        if m.is_one() {
            write_rational_abs(out, c);
        } else {
            if !abs_one {
                write_rational_abs(out, c);
                out.push('*');
            }
            write_monomial(out, m, names);
        }
    }
}

fn poly_is_atom(p: &Poly) -> bool {
    match p.leading_term() {
        Some((m, c)) if p.num_terms() == 1 => !c.is_negative() && ((m.is_one() && c.is_integer()) || (c.is_one() && m.degree() == 1)),
        _ => false,
    }
}

pub(crate) fn format_ratfunc(f: &RatFunc, names: &Names) -> String {
    let mut out = String::new();
    if f.den.is_one() {
        write_poly(&mut out, &f.num, names);
        return out;
    }
    let num_atomic = f.num.num_terms() == 1 && {
        let (_, c) = f.num.leading_term().expect("nonzero");
        c.is_integer()
    };
    if num_atomic {
        write_poly(&mut out, &f.num, names);
    } else {
        out.push('(');
        write_poly(&mut out, &f.num, names);
        out.push(')');
    }
    out.push('/');
    if poly_is_atom(&f.den) {
        write_poly(&mut out, &f.den, names);
    } else {
        out.push('(');
        write_poly(&mut out, &f.den, names);
        out.push(')');
    }
    out
}

impl fmt::Display for RatFuncDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratfunc(self.f, &self.names))
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratfunc(self, &Names::Generic))
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return RatFunc::from_poly(num);
            }
            return RatFunc::reduce(num, self.den.clone());
        }
        if rhs.den.is_one() {
            return RatFunc::reduce(&self.num + &(&rhs.num * &self.den), self.den.clone());
        }
        if self.den.is_one() {
            return RatFunc::reduce(&(&self.num * &rhs.den) + &rhs.num, rhs.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        let a_co = self.den.div_exact(&g).expect("gcd divides");
        let b_co = rhs.den.div_exact(&g).expect("gcd divides");
        let num = &(&self.num * &b_co) + &(&rhs.num * &a_co);
        let den = &self.den * &b_co;
        RatFunc::reduce(num, den)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let cut = |p: &Poly, g: &Poly| if g.is_one() { p.clone() } else { p.div_exact(g).expect("gcd divides") };
        let num = &cut(&self.num, &g1) * &cut(&rhs.num, &g2);
        let den = &cut(&self.den, &g2) * &cut(&rhs.den, &g1);
        RatFunc::normalize_sign(num, den)
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    /// Panics on a zero divisor; use [`RatFunc::checked_div`] for input-driven division.
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("RatFunc division by zero")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: RatFunc) -> RatFunc {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: &RatFunc) -> RatFunc {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl std::iter::Sum for RatFunc {
    fn sum<I: Iterator<Item = RatFunc>>(iter: I) -> RatFunc {
        iter.fold(RatFunc::zero(), |acc, x| &acc + &x)
    }
}

impl From<i64> for RatFunc {
    fn from(n: i64) -> Self {
        RatFunc::from_int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RatFunc {
        RatFunc::var(0)
    }
    fn y() -> RatFunc {
        RatFunc::var(1)
    }

    #[test]
    fn additive_and_multiplicative_inverse() {
        assert!((&x() + &(-x())).is_zero());
        let one_plus_x = &RatFunc::one() + &x();
        let inv = one_plus_x.inv().unwrap();
        assert!((&inv * &one_plus_x).is_one());
        assert_eq!(RatFunc::zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn canonical_reduction() {
        let num = &(&x() * &x()) - &(&y() * &y());
        let den = &x() - &y();
        assert_eq!(num.checked_div(&den).unwrap(), &x() + &y());
        // denominator leading coefficient is normalized
        let f = RatFunc::one().checked_div(&(&x() * &RatFunc::from_int(2))).unwrap();
        assert!(f.denominator().leading_coefficient().is_one());
        assert_eq!(f.numerator().as_constant(), Some(Rational::new(1.into(), 2.into())));
    }

    #[test]
    fn quotient_rule() {
        let f = (&RatFunc::one() + &x()).inv().unwrap();
        let expected = -(&RatFunc::one() + &x()).pow(2).inv().unwrap();
        assert_eq!(f.partial(0), expected);
        assert!(f.partial(1).is_zero());
    }

    #[test]
    fn printing() {
        let ctx = BaseContext::new(["x", "y"]).unwrap();
        let f = (&RatFunc::one() + &x()).inv().unwrap();
        assert_eq!(f.display(&ctx).to_string(), "1/(x + 1)");
        let g = &(&x() * &y()).scale(&Rational::new((-3).into(), 2.into())) + &RatFunc::from_int(4);
        assert_eq!(g.display(&ctx).to_string(), "-3/2*x*y + 4");
        let h = RatFunc::one().checked_div(&(&x() * &RatFunc::from_int(2))).unwrap();
        assert_eq!(h.display(&ctx).to_string(), "(1/2)/x");
    }
}
