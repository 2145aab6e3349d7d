//! Cocycle checks and degree-bounded exactness search for 1-cochains.
//!
//! `exactness_search` is a semi-decision: it solves `d_E f = ξ` for `f` of the
//! form `P / D` with `P` a polynomial of bounded total degree and `D` drawn
//! from the denominators of `ξ`. Failing to find `f` proves nothing unless the
//! anchor vanishes, in which case `d_E f = 0` for every `f` and the search is
//! complete.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::algebroid::{AlgebroidError, LieAlgebroid};
use crate::exterior::{GradedElement, Role};
use crate::field::{lcm, Monomial, Poly, RatFunc, Rational};
use crate::linalg;
use crate::modular::Cochain1;

pub const DEFAULT_DEGREE_BOUND: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohomologyError {
    #[error("cochain has {found} components but the algebroid has rank {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error("internal error: primitive {0} does not reproduce the cochain")]
    BadPrimitive(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleCheck {
    pub is_cocycle: bool,
    pub residual: GradedElement,
}

fn check_rank(e: &LieAlgebroid, xi: &Cochain1) -> Result<(), CohomologyError> {
    if xi.components().len() != e.rank() {
        return Err(CohomologyError::RankMismatch { expected: e.rank(), found: xi.components().len() });
    }
    Ok(())
}

/// `d_E ξ` and whether it vanishes.
pub fn is_cocycle(e: &Arc<LieAlgebroid>, xi: &Cochain1) -> Result<CocycleCheck, CohomologyError> {
    e.ensure_valid()?;
    check_rank(e, xi)?;
    if e.rank() == 0 {
        return Ok(CocycleCheck { is_cocycle: true, residual: GradedElement::zero(0, 0, Role::Form) });
    }
    let residual = e.d(&xi.to_form())?;
    Ok(CocycleCheck { is_cocycle: residual.is_zero(), residual })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExactnessStatus {
    Exact { primitive: RatFunc },
    NotExactUpToBound,
    NotACocycle { residual: GradedElement },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactnessVerdict {
    pub status: ExactnessStatus,
    pub bound: u32,
    /// True when the searched space contains every possible primitive.
    pub complete: bool,
}

impl ExactnessVerdict {
    pub fn primitive(&self) -> Option<&RatFunc> {
        match &self.status {
            ExactnessStatus::Exact { primitive } => Some(primitive),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.primitive().is_some()
    }
}

impl fmt::Display for ExactnessVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            ExactnessStatus::Exact { primitive } => write!(f, "exact, primitive {primitive}"),
            ExactnessStatus::NotExactUpToBound if self.complete => write!(f, "not exact (search complete)"),
            ExactnessStatus::NotExactUpToBound => {
                write!(f, "no primitive up to degree {}; this does not prove the class is nonzero", self.bound)
            }
            ExactnessStatus::NotACocycle { .. } => write!(f, "not a cocycle"),
        }
    }
}

fn monomials_up_to(vars: usize, bound: u32) -> Vec<Monomial> {
    let mut out = vec![Vec::new()];
    for _ in 0..vars {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().sum();
            for k in 0..=(bound - used) {
                let mut v = e.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(Monomial::from_exponents).collect()
}

fn denominator_candidates(xi: &Cochain1) -> Vec<Poly> {
    let mut out = vec![Poly::one()];
    let mut all = Poly::one();
    for c in xi.components() {
        let d = c.denominator().clone();
        if !out.contains(&d) {
            out.push(d.clone());
        }
        all = lcm(&all, &d);
    }
    if !out.contains(&all) {
        out.push(all);
    }
    out
}

/// Searches for `f` with `d_E f = ξ`.
pub fn exactness_search(e: &Arc<LieAlgebroid>, xi: &Cochain1, degree_bound: u32) -> Result<ExactnessVerdict, CohomologyError> {
    let check = is_cocycle(e, xi)?;
    let complete = (0..e.rank()).all(|i| e.anchor().row(i).iter().all(RatFunc::is_zero));
    if !check.is_cocycle {
        return Ok(ExactnessVerdict { status: ExactnessStatus::NotACocycle { residual: check.residual }, bound: degree_bound, complete });
    }
    if xi.is_zero() {
        return Ok(ExactnessVerdict { status: ExactnessStatus::Exact { primitive: RatFunc::zero() }, bound: degree_bound, complete });
    }
    if complete {
        return Ok(ExactnessVerdict { status: ExactnessStatus::NotExactUpToBound, bound: degree_bound, complete });
    }
    let m = e.ctx().dim();
    let basis = monomials_up_to(m, degree_bound);
    for den in denominator_candidates(xi) {
        let d = RatFunc::from_poly(den);
        if let Some(f) = solve_with_denominator(e, xi, &basis, &d) {
            let df: Vec<RatFunc> = (0..e.rank()).map(|i| e.anchor_frame_action(i, &f)).collect();
            if df != xi.components() {
                return Err(CohomologyError::BadPrimitive(f.to_string()));
            }
            return Ok(ExactnessVerdict { status: ExactnessStatus::Exact { primitive: f }, bound: degree_bound, complete });
        }
    }
    Ok(ExactnessVerdict { status: ExactnessStatus::NotExactUpToBound, bound: degree_bound, complete })
}

fn solve_with_denominator(e: &LieAlgebroid, xi: &Cochain1, basis: &[Monomial], den: &RatFunc) -> Option<RatFunc> {
    let candidates: Vec<RatFunc> =
        basis.iter().map(|mono| &RatFunc::from_poly(Poly::monomial(mono.clone(), Rational::from_integer(1.into()))) / den).collect();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for i in 0..e.rank() {
        let images: Vec<RatFunc> = candidates.iter().map(|c| e.anchor_frame_action(i, c)).collect();
        let target = &xi.components()[i];
        let mut common = target.denominator().clone();
        for im in &images {
            common = lcm(&common, im.denominator());
        }
        let common = RatFunc::from_poly(common);
        let scaled: Vec<Poly> = images.iter().map(|im| (im * &common).numerator().clone()).collect();
        let t = (target * &common).numerator().clone();
        let mut eqs: BTreeMap<Monomial, (Vec<Rational>, Rational)> = BTreeMap::new();
        for (col, p) in scaled.iter().enumerate() {
            for (mono, c) in p.terms() {
                let entry = eqs.entry(mono.clone()).or_insert_with(|| (vec![Rational::zero(); candidates.len()], Rational::zero()));
                entry.0[col] = c.clone();
            }
        }
        for (mono, c) in t.terms() {
            let entry = eqs.entry(mono.clone()).or_insert_with(|| (vec![Rational::zero(); candidates.len()], Rational::zero()));
            entry.1 = c.clone();
        }
        for (_, (row, b)) in eqs {
            rows.push(row);
            rhs.push(b);
        }
    }
    let u = linalg::solve(&rows, &rhs)?;
    let f: RatFunc = u.iter().zip(&candidates).filter(|(a, _)| !a.is_zero()).map(|(a, c)| c.scale(a)).sum();
    Some(f)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassComparison {
    Equal {
        primitive: RatFunc,
    },
    /// Certified different: the search space was complete.
    Distinct,
    /// No primitive of the difference up to the bound.
    DistinctUpToBound {
        bound: u32,
    },
    /// One of the inputs is not a cocycle.
    Undecided,
}

impl fmt::Display for ClassComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassComparison::Equal { primitive } => write!(f, "equal (difference = d({primitive}))"),
            ClassComparison::Distinct => write!(f, "distinct"),
            ClassComparison::DistinctUpToBound { bound } => write!(f, "distinct up to degree {bound} (undecided beyond)"),
            ClassComparison::Undecided => write!(f, "undecided (input is not a cocycle)"),
        }
    }
}

pub fn classes_equal(e: &Arc<LieAlgebroid>, xi1: &Cochain1, xi2: &Cochain1, degree_bound: u32) -> Result<ClassComparison, CohomologyError> {
    check_rank(e, xi1)?;
    check_rank(e, xi2)?;
    for xi in [xi1, xi2] {
        if !is_cocycle(e, xi)?.is_cocycle {
            return Ok(ClassComparison::Undecided);
        }
    }
    let diff = xi1.sub(xi2).map_err(|_| CohomologyError::RankMismatch { expected: e.rank(), found: xi2.components().len() })?;
    let verdict = exactness_search(e, &diff, degree_bound)?;
    Ok(match verdict.status {
        ExactnessStatus::Exact { primitive } => ClassComparison::Equal { primitive },
        ExactnessStatus::NotExactUpToBound if verdict.complete => ClassComparison::Distinct,
        ExactnessStatus::NotExactUpToBound => ClassComparison::DistinctUpToBound { bound: degree_bound },
        ExactnessStatus::NotACocycle { .. } => ClassComparison::Undecided,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BaseContext;

    #[test]
    fn antiderivative_on_the_line() {
        let ctx = BaseContext::new(["x"]).unwrap();
        let t = Arc::new(LieAlgebroid::tangent(&ctx));
        let xi = Cochain1::new(t.clone(), vec![ctx.parse("2*x").unwrap()]).unwrap();
        let v = exactness_search(&t, &xi, DEFAULT_DEGREE_BOUND).unwrap();
        assert_eq!(v.primitive(), Some(&ctx.parse("x^2").unwrap()));
        let log = Cochain1::new(t.clone(), vec![ctx.parse("1/(1+x)").unwrap()]).unwrap();
        let v = exactness_search(&t, &log, DEFAULT_DEGREE_BOUND).unwrap();
        assert_eq!(v.status, ExactnessStatus::NotExactUpToBound);
        assert!(!v.complete);
        let rational = Cochain1::new(t.clone(), vec![ctx.parse("-1/(1+x)^2").unwrap()]).unwrap();
        let v = exactness_search(&t, &rational, DEFAULT_DEGREE_BOUND).unwrap();
        assert_eq!(v.primitive(), Some(&ctx.parse("1/(1+x)").unwrap()));
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials_up_to(2, 2).len(), 6);
        assert_eq!(monomials_up_to(0, 6).len(), 1);
        assert_eq!(monomials_up_to(4, 6).len(), 210);
    }
}
