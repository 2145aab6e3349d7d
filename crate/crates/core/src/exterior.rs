//! Homogeneous elements of the exterior algebra of a rank-n frame.
//!
//! Frame indices are 0-based in the API and 1-based in rendered text. A basis
//! k-vector `e_{i1}∧…∧e_{ik}` with `i1 < … < ik` is keyed by the bit set of its
//! indices. The same storage serves multivectors (sections of ∧E) and forms
//! (sections of ∧E*); the [`Role`] tag says which.
//!
//! Sign conventions (see `CONVENTIONS.md`):
//! - contraction is first-slot: `i_{e_a*}(e_{i1}∧…∧e_{iq}) = Σ_s (-1)^{s-1} δ_{a,is} e_{i1}∧…ê_{is}…∧e_{iq}`;
//! - composition: `i_{α∧β} = i_α ∘ i_β`, the last wedge factor contracts first;
//! - so full contraction of equal degrees p gives `(-1)^{p(p-1)/2}` on dual
//!   basis blades, while [`top_pairing`] is the plain coefficient product.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::field::{BaseContext, Names, RatFunc};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Multivector,
    Form,
}

impl Role {
    pub fn dual(self) -> Role {
        match self {
            Role::Multivector => Role::Form,
            Role::Form => Role::Multivector,
        }
    }

    fn letter(self) -> char {
        match self {
            Role::Multivector => 'e',
            Role::Form => 'E',
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Multivector => "multivector",
            Role::Form => "form",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("role mismatch: expected {expected}, found {found}")]
    RoleMismatch { expected: Role, found: Role },
    #[error("cannot contract degree {p} into degree {q}")]
    DegreeTooHigh { p: usize, q: usize },
    #[error("expected top degree {rank}, found degree {degree}")]
    NotTopDegree { rank: usize, degree: usize },
    #[error("degree {degree} exceeds rank {rank}")]
    DegreeOutOfRange { rank: usize, degree: usize },
    #[error("frame index {index} out of range for rank {rank}")]
    IndexOutOfRange { rank: usize, index: usize },
    #[error("bundle map has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
}

pub type Blade = u32;

/// Largest supported rank.
pub const MAX_RANK: usize = 32;

pub fn blade_of(indices: &[usize]) -> Blade {
    indices.iter().fold(0, |acc, &i| acc | (1 << i))
}

pub fn blade_indices(b: Blade) -> Vec<usize> {
    (0..MAX_RANK).filter(|i| b & (1 << i) != 0).collect()
}

fn below(i: usize) -> Blade {
    (1u32 << i) - 1
}

/// Sign of `e_a ∧ e_b` relative to the sorted blade `a | b`; `None` if they overlap.
pub fn wedge_sign(a: Blade, b: Blade) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut parity = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        parity += (a & !below(j + 1)).count_ones();
    }
    Some(parity % 2 == 1)
}

/// `i_{dual(a)} ∘ … ` applied to blade `target`: returns (negative?, remaining blade).
fn contract_blade(a: Blade, target: Blade) -> Option<(bool, Blade)> {
    if a & target != a {
        return None;
    }
    let mut cur = target;
    let mut neg = false;
    // last factor contracts first: walk indices of `a` from the highest down
    let mut rest = a;
    while rest != 0 {
        let i = 31 - rest.leading_zeros() as usize;
        rest &= !(1 << i);
        if (cur & below(i)).count_ones() % 2 == 1 {
            neg = !neg;
        }
        cur &= !(1 << i);
    }
    Some((neg, cur))
}

/// Homogeneous element of ∧^k E or ∧^k E*.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedElement {
    rank: usize,
    degree: usize,
    role: Role,
    coeffs: BTreeMap<Blade, RatFunc>,
}

impl GradedElement {
    pub fn zero(rank: usize, degree: usize, role: Role) -> Self {
        assert!(rank <= MAX_RANK, "rank exceeds {MAX_RANK}");
        GradedElement { rank, degree, role, coeffs: BTreeMap::new() }
    }

    pub fn scalar(rank: usize, role: Role, f: RatFunc) -> Self {
        let mut z = Self::zero(rank, 0, role);
        z.insert(0, f);
        z
    }

    /// `f · e_{indices}` (or `E^{indices}`); indices in any order, signs applied.
    pub fn term(rank: usize, role: Role, indices: &[usize], f: RatFunc) -> Result<Self, ExteriorError> {
        let mut out = Self::zero(rank, indices.len(), role);
        if indices.len() > rank {
            return Err(ExteriorError::DegreeOutOfRange { rank, degree: indices.len() });
        }
        let mut blade: Blade = 0;
        let mut neg = false;
        for &i in indices {
            if i >= rank {
                return Err(ExteriorError::IndexOutOfRange { rank, index: i });
            }
            match wedge_sign(blade, 1 << i) {
                None => return Ok(out),
                Some(s) => neg ^= s,
            }
            blade |= 1 << i;
        }
        out.insert(blade, if neg { -f } else { f });
        Ok(out)
    }

    pub fn basis(rank: usize, role: Role, indices: &[usize]) -> Result<Self, ExteriorError> {
        Self::term(rank, role, indices, RatFunc::one())
    }

    /// `f · e_1∧…∧e_n`.
    pub fn top(rank: usize, role: Role, f: RatFunc) -> Self {
        let mut out = Self::zero(rank, rank, role);
        out.insert(if rank == 0 { 0 } else { (((1u64 << rank) - 1) as u32) as Blade }, f);
        out
    }

    /// Degree-1 element from its frame components.
    pub fn vector(role: Role, components: &[RatFunc]) -> Self {
        let mut out = Self::zero(components.len(), 1, role);
        for (i, c) in components.iter().enumerate() {
            out.insert(1 << i, c.clone());
        }
        out
    }

    pub fn from_blades<I: IntoIterator<Item = (Blade, RatFunc)>>(rank: usize, degree: usize, role: Role, items: I) -> Self {
        let mut out = Self::zero(rank, degree, role);
        for (b, f) in items {
            debug_assert_eq!(b.count_ones() as usize, degree);
            out.add_at(b, &f);
        }
        out
    }

    fn insert(&mut self, b: Blade, f: RatFunc) {
        if !f.is_zero() {
            self.coeffs.insert(b, f);
        }
    }

    pub(crate) fn add_at(&mut self, b: Blade, f: &RatFunc) {
        if f.is_zero() {
            return;
        }
        let v = match self.coeffs.remove(&b) {
            Some(old) => &old + f,
            None => f.clone(),
        };
        self.insert(b, v);
    }

    pub(crate) fn sub_at(&mut self, b: Blade, f: &RatFunc) {
        self.add_at(b, &-f);
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_top(&self) -> bool {
        self.degree == self.rank
    }

    pub fn coefficient(&self, indices: &[usize]) -> RatFunc {
        self.coeffs.get(&blade_of(indices)).cloned().unwrap_or_default()
    }

    pub fn coefficient_at(&self, b: Blade) -> RatFunc {
        self.coeffs.get(&b).cloned().unwrap_or_default()
    }

    pub fn top_coefficient(&self) -> Result<RatFunc, ExteriorError> {
        if !self.is_top() {
            return Err(ExteriorError::NotTopDegree { rank: self.rank, degree: self.degree });
        }
        Ok(self.coeffs.values().next().cloned().unwrap_or_default())
    }

    /// Scalar value of a degree-0 element.
    pub fn scalar_value(&self) -> RatFunc {
        debug_assert_eq!(self.degree, 0);
        self.coefficient_at(0)
    }

    /// Frame components of a degree-1 element.
    pub fn components(&self) -> Vec<RatFunc> {
        debug_assert_eq!(self.degree, 1);
        (0..self.rank).map(|i| self.coefficient_at(1 << i)).collect()
    }

    pub fn blades(&self) -> impl Iterator<Item = (Blade, &RatFunc)> {
        self.coeffs.iter().map(|(b, f)| (*b, f))
    }

    /// Terms with their sorted index tuples, in lexicographic tuple order.
    pub fn terms(&self) -> Vec<(Vec<usize>, RatFunc)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(b, f)| (blade_indices(*b), f.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Same coefficients under the other role, e.g. a top form of A read as a
    /// top multivector of A*.
    pub fn recast(&self, role: Role) -> GradedElement {
        GradedElement { role, ..self.clone() }
    }

    pub fn scale(&self, f: &RatFunc) -> GradedElement {
        if f.is_zero() {
            return Self::zero(self.rank, self.degree, self.role);
        }
        GradedElement { coeffs: self.coeffs.iter().map(|(b, c)| (*b, c * f)).collect(), ..self.clone() }
    }

    pub fn neg(&self) -> GradedElement {
        GradedElement { coeffs: self.coeffs.iter().map(|(b, c)| (*b, -c)).collect(), ..self.clone() }
    }

    fn check_same(&self, other: &GradedElement) -> Result<(), ExteriorError> {
        if self.rank != other.rank {
            return Err(ExteriorError::RankMismatch(self.rank, other.rank));
        }
        if self.role != other.role {
            return Err(ExteriorError::RoleMismatch { expected: self.role, found: other.role });
        }
        Ok(())
    }

    /// Sum of two elements of the same rank, role and degree. A zero operand
    /// of another degree is absorbed.
    pub fn add(&self, other: &GradedElement) -> Result<GradedElement, ExteriorError> {
        self.check_same(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.degree != other.degree {
            return Err(ExteriorError::DegreeOutOfRange { rank: self.rank, degree: other.degree });
        }
        let mut out = self.clone();
        for (b, f) in &other.coeffs {
            out.add_at(*b, f);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GradedElement) -> Result<GradedElement, ExteriorError> {
        self.add(&other.neg())
    }

    /// Renders as a signed sum, e.g. `x*e1^e2 - e2^e3` (forms use `E`).
    pub fn display<'a>(&'a self, ctx: &'a BaseContext) -> ElementDisplay<'a> {
        ElementDisplay { el: self, ctx }
    }
}

/// Graded-anticommutative product. A degree above the rank yields the zero
/// element of that formal degree.
pub fn wedge(a: &GradedElement, b: &GradedElement) -> Result<GradedElement, ExteriorError> {
    a.check_same(b)?;
    let degree = a.degree + b.degree;
    let mut out = GradedElement::zero(a.rank, degree, a.role);
    if degree > a.rank {
        return Ok(out);
    }
    for (ba, fa) in &a.coeffs {
        for (bb, fb) in &b.coeffs {
            if let Some(neg) = wedge_sign(*ba, *bb) {
                let p = fa * fb;
                if neg {
                    out.sub_at(ba | bb, &p);
                } else {
                    out.add_at(ba | bb, &p);
                }
            }
        }
    }
    Ok(out)
}

/// Interior product `i_alpha q` of an element into one of the opposite role and
/// at least the same degree. Degree-0 `alpha` acts by multiplication.
pub fn contract(alpha: &GradedElement, q: &GradedElement) -> Result<GradedElement, ExteriorError> {
    if alpha.rank != q.rank {
        return Err(ExteriorError::RankMismatch(alpha.rank, q.rank));
    }
    if alpha.role == q.role {
        return Err(ExteriorError::RoleMismatch { expected: q.role.dual(), found: alpha.role });
    }
    if alpha.degree > q.degree {
        return Err(ExteriorError::DegreeTooHigh { p: alpha.degree, q: q.degree });
    }
    let mut out = GradedElement::zero(q.rank, q.degree - alpha.degree, q.role);
    for (ba, fa) in &alpha.coeffs {
        for (bq, fq) in &q.coeffs {
            if let Some((neg, rest)) = contract_blade(*ba, *bq) {
                let p = fa * fq;
                if neg {
                    out.sub_at(rest, &p);
                } else {
                    out.add_at(rest, &p);
                }
            }
        }
    }
    Ok(out)
}

/// `⟨Q, λ⟩` for top-degree arguments, with `⟨e_1∧…∧e_n, E^1∧…∧E^n⟩ = 1`.
pub fn top_pairing(q: &GradedElement, lam: &GradedElement) -> Result<RatFunc, ExteriorError> {
    if q.rank != lam.rank {
        return Err(ExteriorError::RankMismatch(q.rank, lam.rank));
    }
    if q.role != Role::Multivector {
        return Err(ExteriorError::RoleMismatch { expected: Role::Multivector, found: q.role });
    }
    if lam.role != Role::Form {
        return Err(ExteriorError::RoleMismatch { expected: Role::Form, found: lam.role });
    }
    Ok(&q.top_coefficient()? * &lam.top_coefficient()?)
}

/// Image of a multivector under the bundle map `m` (target rank × source rank):
/// `∧^k m (e_{i1}∧…∧e_{ik}) = m e_{i1} ∧ … ∧ m e_{ik}`.
pub fn push_forward(m: &Matrix, q: &GradedElement, target_role: Role) -> Result<GradedElement, ExteriorError> {
    if m.cols() != q.rank {
        return Err(ExteriorError::ShapeMismatch { rows: m.rows(), cols: m.cols(), expected_rows: m.rows(), expected_cols: q.rank });
    }
    let images: Vec<GradedElement> = (0..q.rank).map(|i| GradedElement::vector(target_role, &m.column(i))).collect();
    let mut out = GradedElement::zero(m.rows(), q.degree, target_role);
    for (b, f) in &q.coeffs {
        let mut acc = GradedElement::scalar(m.rows(), target_role, f.clone());
        for i in blade_indices(*b) {
            acc = wedge(&acc, &images[i])?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// Pull-back of a form along the bundle map `m` (target rank × source rank):
/// `m*(E^{a1}∧…∧E^{ak}) = m*E^{a1} ∧ … ∧ m*E^{ak}`, with `m*E^a` the row `a`.
pub fn pull_back(m: &Matrix, beta: &GradedElement) -> Result<GradedElement, ExteriorError> {
    if m.rows() != beta.rank {
        return Err(ExteriorError::ShapeMismatch { rows: m.rows(), cols: m.cols(), expected_rows: beta.rank, expected_cols: m.cols() });
    }
    let images: Vec<GradedElement> = (0..beta.rank).map(|a| GradedElement::vector(Role::Form, m.row(a))).collect();
    let mut out = GradedElement::zero(m.cols(), beta.degree, Role::Form);
    for (b, f) in &beta.coeffs {
        let mut acc = GradedElement::scalar(m.cols(), Role::Form, f.clone());
        for a in blade_indices(*b) {
            acc = wedge(&acc, &images[a])?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

pub struct ElementDisplay<'a> {
    el: &'a GradedElement,
    ctx: &'a BaseContext,
}

impl fmt::Display for ElementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.el, &Names::Ctx(self.ctx)))
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, &Names::Generic))
    }
}

fn render(el: &GradedElement, names: &Names) -> String {
    if el.is_zero() {
        return "0".into();
    }
    let letter = el.role.letter();
    let mut out = String::new();
    for (k, (idx, c)) in el.terms().into_iter().enumerate() {
        let blade: Vec<String> = idx.iter().map(|i| format!("{letter}{}", i + 1)).collect();
        let blade = blade.join("^");
        let (neg, body) = split_sign(&c, names);
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        match (body.as_str(), blade.is_empty()) {
            (b, true) => out.push_str(b),
            ("1", false) => out.push_str(&blade),
            (b, false) => {
                out.push_str(b);
                out.push('*');
                out.push_str(&blade);
            }
        }
    }
    out
}

/// Splits a coefficient into an overall sign and a body safe to use as a factor.
fn split_sign(c: &RatFunc, names: &Names) -> (bool, String) {
    let single_term_num = c.numerator().num_terms() == 1;
    if single_term_num && c.denominator().is_one() {
        let s = crate::field::format_ratfunc(c, names);
        return match s.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, s),
        };
    }
    (false, format!("({})", crate::field::format_ratfunc(c, names)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(rank: usize, idx: &[usize]) -> GradedElement {
        GradedElement::basis(rank, Role::Multivector, idx).unwrap()
    }
    fn ef(rank: usize, idx: &[usize]) -> GradedElement {
        GradedElement::basis(rank, Role::Form, idx).unwrap()
    }

    #[test]
    fn basis_wedges() {
        let w = wedge(&e(3, &[0]), &e(3, &[1])).unwrap();
        assert_eq!(w, e(3, &[0, 1]));
        assert!(wedge(&e(3, &[0]), &e(3, &[0])).unwrap().is_zero());
        let x = RatFunc::var(0);
        let a = e(3, &[0]).scale(&x).add(&e(3, &[1])).unwrap();
        let w = wedge(&a, &e(3, &[0, 2])).unwrap();
        assert_eq!(w, e(3, &[0, 1, 2]).neg());
    }

    #[test]
    fn wedge_errors_and_overflow() {
        assert_eq!(wedge(&e(2, &[0]), &e(3, &[0])), Err(ExteriorError::RankMismatch(2, 3)));
        assert!(matches!(wedge(&e(2, &[0]), &ef(2, &[0])), Err(ExteriorError::RoleMismatch { .. })));
        let over = wedge(&e(2, &[0, 1]), &e(2, &[0])).unwrap();
        assert!(over.is_zero());
        assert_eq!(over.degree(), 3);
    }

    #[test]
    fn frozen_contraction_signs() {
        assert_eq!(contract(&ef(2, &[0]), &e(2, &[0, 1])).unwrap(), e(2, &[1]));
        assert_eq!(contract(&ef(2, &[1]), &e(2, &[0, 1])).unwrap(), e(2, &[0]).neg());
        // i_{E1^E2} = i_{E1} ∘ i_{E2}: frozen value -1
        let full = contract(&ef(2, &[0, 1]), &e(2, &[0, 1])).unwrap();
        assert_eq!(full.scalar_value(), RatFunc::from_int(-1));
        // disjoint indices vanish
        assert!(contract(&ef(3, &[2]), &e(3, &[0, 1])).unwrap().is_zero());
        // roles exchanged
        assert_eq!(contract(&e(2, &[0]), &ef(2, &[0, 1])).unwrap(), ef(2, &[1]));
        assert!(matches!(contract(&ef(2, &[0, 1]), &e(2, &[0])), Err(ExteriorError::DegreeTooHigh { p: 2, q: 1 })));
    }

    #[test]
    fn pairing() {
        let x = RatFunc::var(0);
        let two_x = x.scale(&crate::field::Rational::from_integer(2.into()));
        let q = GradedElement::top(3, Role::Multivector, two_x.clone());
        let l = GradedElement::top(3, Role::Form, two_x.inv().unwrap());
        assert!(top_pairing(&q, &l).unwrap().is_one());
        assert!(matches!(top_pairing(&e(3, &[0]), &l), Err(ExteriorError::NotTopDegree { .. })));
        let rank0 = top_pairing(
            &GradedElement::top(0, Role::Multivector, RatFunc::one()),
            &GradedElement::top(0, Role::Form, RatFunc::from_int(3)),
        )
        .unwrap();
        assert_eq!(rank0, RatFunc::from_int(3));
    }

    #[test]
    fn rendering() {
        let ctx = BaseContext::new(["x"]).unwrap();
        let a = e(3, &[0, 1]).scale(&RatFunc::var(0)).sub(&e(3, &[1, 2])).unwrap();
        assert_eq!(a.display(&ctx).to_string(), "x*e1^e2 - e2^e3");
        let b = ef(2, &[0, 1]).scale(&ctx.parse("x+1").unwrap());
        assert_eq!(b.display(&ctx).to_string(), "(x + 1)*E1^E2");
        assert_eq!(ef(2, &[0]).neg().display(&ctx).to_string(), "-E1");
    }
}
