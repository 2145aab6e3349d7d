//! Modular sections, relative modular sections and the line-bundle
//! representation `D^φ` on `∧^top E ⊗ ∧^top F*`.
//!
//! Sections of the line bundle are a single coefficient against the
//! reference element `(e_1∧…∧e_n) ⊗ (E^1∧…∧E^r)`. Densities are not modelled:
//! over the coefficient field every bundle is trivialised by its frame.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebroid::{AlgebroidError, LieAlgebroid};
use crate::exterior::{GradedElement, Role};
use crate::field::{BaseContext, RatFunc};
use crate::morphism::{is_morphism, BundleMorphism, MorphismFailure};
use crate::random;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModularError {
    #[error("{0} has a vanishing top coefficient")]
    VanishingCoefficient(&'static str),
    #[error("{what} must be a top-degree {role} of rank {rank}")]
    NotTop { what: &'static str, role: Role, rank: usize },
    #[error("expected a section of {0}")]
    NotASection(String),
    #[error("bundle map is not an algebroid morphism: {0:?}")]
    NotAMorphism(MorphismFailure),
    #[error("cochain has {found} components, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("cochains belong to different algebroids")]
    AlgebroidMismatch,
    #[error("internal convention error: {what} is not a cocycle (d = {residual})")]
    CocycleFailure { what: &'static str, residual: String },
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
}

/// A 1-cochain, stored by its values on the frame sections.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain1 {
    algebroid: Arc<LieAlgebroid>,
    components: Vec<RatFunc>,
}

impl Cochain1 {
    pub fn new(algebroid: Arc<LieAlgebroid>, components: Vec<RatFunc>) -> Result<Self, ModularError> {
        if components.len() != algebroid.rank() {
            return Err(ModularError::Length { expected: algebroid.rank(), found: components.len() });
        }
        Ok(Cochain1 { algebroid, components })
    }

    pub fn zero(algebroid: Arc<LieAlgebroid>) -> Self {
        let n = algebroid.rank();
        Cochain1 { algebroid, components: vec![RatFunc::zero(); n] }
    }

    pub fn from_form(algebroid: Arc<LieAlgebroid>, form: &GradedElement) -> Result<Self, ModularError> {
        if form.role() != Role::Form || form.degree() != 1 || form.rank() != algebroid.rank() {
            return Err(ModularError::Length { expected: algebroid.rank(), found: form.rank() });
        }
        let components = form.components();
        Ok(Cochain1 { algebroid, components })
    }

    pub fn algebroid(&self) -> &Arc<LieAlgebroid> {
        &self.algebroid
    }

    pub fn components(&self) -> &[RatFunc] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(RatFunc::is_zero)
    }

    pub fn to_form(&self) -> GradedElement {
        if self.components.is_empty() {
            return GradedElement::zero(0, 0, Role::Form);
        }
        GradedElement::vector(Role::Form, &self.components)
    }

    fn check_same(&self, other: &Cochain1) -> Result<(), ModularError> {
        if self.algebroid.rank() != other.algebroid.rank() || self.algebroid.ctx() != other.algebroid.ctx() {
            return Err(ModularError::AlgebroidMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain1) -> Result<Cochain1, ModularError> {
        self.check_same(other)?;
        let c = self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect();
        Ok(Cochain1 { algebroid: self.algebroid.clone(), components: c })
    }

    pub fn sub(&self, other: &Cochain1) -> Result<Cochain1, ModularError> {
        self.check_same(other)?;
        let c = self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect();
        Ok(Cochain1 { algebroid: self.algebroid.clone(), components: c })
    }

    pub fn scale(&self, f: &RatFunc) -> Cochain1 {
        Cochain1 { algebroid: self.algebroid.clone(), components: self.components.iter().map(|c| c * f).collect() }
    }

    /// Value on a section with the given frame components.
    pub fn pair(&self, x: &[RatFunc]) -> RatFunc {
        self.components.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn display(&self) -> CochainDisplay<'_> {
        CochainDisplay { c: self, ctx: self.algebroid.ctx() }
    }
}

pub struct CochainDisplay<'a> {
    c: &'a Cochain1,
    ctx: &'a BaseContext,
}

impl fmt::Display for CochainDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.c.components.iter().map(|x| x.display(self.ctx).to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `φ* η` for a cochain on the target.
pub fn pull_back(phi: &BundleMorphism, eta: &Cochain1) -> Result<Cochain1, ModularError> {
    if eta.algebroid.rank() != phi.target().rank() {
        return Err(ModularError::AlgebroidMismatch);
    }
    Ok(Cochain1 { algebroid: phi.source().clone(), components: phi.pull_back_components(&eta.components) })
}

fn top_coeff(el: &GradedElement, what: &'static str, role: Role, rank: usize) -> Result<RatFunc, ModularError> {
    if el.role() != role || el.rank() != rank || el.degree() != rank {
        return Err(ModularError::NotTop { what, role, rank });
    }
    let c = el.coefficient_at(if rank == 0 { 0 } else { u32::MAX >> (32 - rank) });
    if c.is_zero() {
        return Err(ModularError::VanishingCoefficient(what));
    }
    Ok(c)
}

/// Top coefficient of a top-degree element (scalar value at rank 0).
fn top_value(el: &GradedElement) -> RatFunc {
    let n = el.rank();
    el.coefficient_at(if n == 0 { 0 } else { u32::MAX >> (32 - n) })
}

pub(crate) fn assert_cocycle(e: &LieAlgebroid, c: &Cochain1, what: &'static str) -> Result<(), ModularError> {
    if e.rank() == 0 {
        return Ok(());
    }
    let d = e.d_raw(&c.to_form());
    if d.is_zero() {
        Ok(())
    } else {
        Err(ModularError::CocycleFailure { what, residual: d.display(e.ctx()).to_string() })
    }
}

/// `⟨ξ, e_i⟩ = coeff([e_i, ω]) / coeff(ω) + coeff(L_{ρ(e_i)} λ) / coeff(λ)`.
pub fn modular_section(e: &Arc<LieAlgebroid>, omega: &GradedElement, lam: &GradedElement) -> Result<Cochain1, ModularError> {
    e.ensure_valid()?;
    let n = e.rank();
    let m = e.ctx().dim();
    let w = top_coeff(omega, "omega", Role::Multivector, n)?;
    let l = top_coeff(lam, "lambda", Role::Form, m)?;
    let tm = LieAlgebroid::tangent(e.ctx());
    let components = (0..n)
        .map(|i| {
            let lw = top_value(&e.schouten_raw(&e.frame_section(i), omega));
            let lhs = &lw / &w;
            if m == 0 {
                return lhs;
            }
            let v = GradedElement::vector(Role::Multivector, e.anchor().row(i));
            let ll = top_value(&tm.lie_derivative_raw(&v, lam));
            &lhs + &(&ll / &l)
        })
        .collect();
    let xi = Cochain1 { algebroid: e.clone(), components };
    assert_cocycle(e, &xi, "modular section")?;
    Ok(xi)
}

/// Top form of `F` with `⟨ω_F, ν⟩ = 1`.
pub fn normalized_dual(omega_f: &GradedElement) -> Result<GradedElement, ModularError> {
    let r = omega_f.rank();
    let c = top_coeff(omega_f, "omega_F", Role::Multivector, r)?;
    Ok(GradedElement::top(r, Role::Form, c.inv().expect("nonzero")))
}

fn check_morphism(phi: &BundleMorphism) -> Result<(), ModularError> {
    phi.source().ensure_valid()?;
    phi.target().ensure_valid()?;
    match is_morphism(phi).failure {
        None => Ok(()),
        Some(f) => Err(ModularError::NotAMorphism(f)),
    }
}

/// `⟨η, e_i⟩ = coeff(L_{e_i} ω_E)/coeff(ω_E) + coeff(L^F_{φ e_i} ν)/coeff(ν)`
/// with `ν` dual to `ω_F`.
pub fn relative_modular_section(phi: &BundleMorphism, omega_e: &GradedElement, omega_f: &GradedElement) -> Result<Cochain1, ModularError> {
    check_morphism(phi)?;
    let (e, f) = (phi.source(), phi.target());
    let w = top_coeff(omega_e, "omega_E", Role::Multivector, e.rank())?;
    let nu = normalized_dual(omega_f)?;
    let c_nu = top_value(&nu);
    let components = (0..e.rank())
        .map(|i| {
            let x = e.frame_section(i);
            let a = &top_value(&e.schouten_raw(&x, omega_e)) / &w;
            let b = &top_value(&f.lie_derivative_raw(&phi.apply(&x), &nu)) / &c_nu;
            &a + &b
        })
        .collect();
    let eta = Cochain1 { algebroid: e.clone(), components };
    assert_cocycle(e, &eta, "relative modular section")?;
    Ok(eta)
}

/// `ξ_E(ω_E, μ) - φ* ξ_F(ω_F, μ)` for a common base volume form `μ`.
pub fn relative_modular_section_by_difference(
    phi: &BundleMorphism,
    omega_e: &GradedElement,
    omega_f: &GradedElement,
    mu: &GradedElement,
) -> Result<Cochain1, ModularError> {
    check_morphism(phi)?;
    let xe = modular_section(phi.source(), omega_e, mu)?;
    let xf = modular_section(phi.target(), omega_f, mu)?;
    xe.sub(&pull_back(phi, &xf)?)
}

/// `D^φ` on `L^{E,F} = ∧^top E ⊗ ∧^top F*`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineRep {
    phi: BundleMorphism,
}

/// A section `c · (e_1∧…∧e_n) ⊗ (E^1∧…∧E^r)` of `L^{E,F}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineSection {
    pub coeff: RatFunc,
}

impl LineSection {
    pub fn reference() -> Self {
        LineSection { coeff: RatFunc::one() }
    }
}

impl LineRep {
    /// No validity precondition; the flatness check is meaningful on any input.
    pub fn new(phi: BundleMorphism) -> Self {
        LineRep { phi }
    }

    pub fn morphism(&self) -> &BundleMorphism {
        &self.phi
    }

    pub fn source(&self) -> &Arc<LieAlgebroid> {
        self.phi.source()
    }

    /// The section `ω ⊗ ν`.
    pub fn section(&self, omega: &GradedElement, nu: &GradedElement) -> Result<LineSection, ModularError> {
        let w = top_coeff(omega, "omega", Role::Multivector, self.phi.source().rank())?;
        let v = top_coeff(nu, "nu", Role::Form, self.phi.target().rank())?;
        Ok(LineSection { coeff: &w * &v })
    }

    fn check_section(&self, x: &GradedElement) -> Result<(), ModularError> {
        let e = self.phi.source();
        if x.role() != Role::Multivector || x.degree() != 1 || x.rank() != e.rank() {
            return Err(ModularError::NotASection(e.name().to_string()));
        }
        Ok(())
    }

    /// `D^φ_x(ω ⊗ ν) = L_x ω ⊗ ν + ω ⊗ L_{φx} ν`, as a coefficient.
    pub fn apply(&self, x: &GradedElement, omega: &GradedElement, nu: &GradedElement) -> Result<LineSection, ModularError> {
        self.check_section(x)?;
        let (e, f) = (self.phi.source(), self.phi.target());
        if omega.role() != Role::Multivector || omega.rank() != e.rank() || omega.degree() != e.rank() {
            return Err(ModularError::NotTop { what: "omega", role: Role::Multivector, rank: e.rank() });
        }
        if nu.role() != Role::Form || nu.rank() != f.rank() || nu.degree() != f.rank() {
            return Err(ModularError::NotTop { what: "nu", role: Role::Form, rank: f.rank() });
        }
        Ok(LineSection { coeff: self.apply_coeff(x, &top_value(omega), &top_value(nu)) })
    }

    fn apply_coeff(&self, x: &GradedElement, w: &RatFunc, v: &RatFunc) -> RatFunc {
        let (e, f) = (self.phi.source(), self.phi.target());
        let omega = GradedElement::top(e.rank(), Role::Multivector, w.clone());
        let nu = GradedElement::top(f.rank(), Role::Form, v.clone());
        let a = top_value(&e.schouten_raw(x, &omega));
        let b = top_value(&f.lie_derivative_raw(&self.phi.apply(x), &nu));
        &(&a * v) + &(w * &b)
    }

    /// `D^φ_x s`.
    pub fn act(&self, x: &GradedElement, s: &LineSection) -> Result<LineSection, ModularError> {
        self.check_section(x)?;
        Ok(LineSection { coeff: self.apply_coeff(x, &s.coeff, &RatFunc::one()) })
    }

    fn act_raw(&self, x: &GradedElement, s: &RatFunc) -> RatFunc {
        self.apply_coeff(x, s, &RatFunc::one())
    }
}

pub fn rep_apply(rep: &LineRep, x: &GradedElement, omega: &GradedElement, nu: &GradedElement) -> Result<LineSection, ModularError> {
    rep.apply(x, omega, nu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlatnessCondition {
    /// `D_{fx} = f D_x`
    FunctionLinear,
    /// `D_x(f s) = f D_x s + (ρ(x) f) s`
    Leibniz,
    /// `D_{[x,y]} = [D_x, D_y]`
    Flat,
}

impl fmt::Display for FlatnessCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlatnessCondition::FunctionLinear => "(a) D_{fx} = f D_x",
            FlatnessCondition::Leibniz => "(b) D_x(fs) = f D_x s + (rho(x)f) s",
            FlatnessCondition::Flat => "(c) D_{[x,y]} = [D_x, D_y]",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessFailure {
    pub condition: FlatnessCondition,
    /// Frame indices when the failure is on frame sections.
    pub frame: Option<(usize, usize)>,
    pub residual: RatFunc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessReport {
    pub frame_cases: usize,
    pub random_trials: usize,
    pub failure: Option<FlatnessFailure>,
}

impl FlatnessReport {
    pub fn passes(&self) -> bool {
        self.failure.is_none()
    }
}

pub const DEFAULT_FLATNESS_SEED: u64 = 0x00d0_f1a7;

pub fn rep_flatness_check(rep: &LineRep, trials: usize) -> FlatnessReport {
    rep_flatness_check_seeded(rep, trials, DEFAULT_FLATNESS_SEED)
}

pub fn rep_flatness_check_seeded(rep: &LineRep, trials: usize, seed: u64) -> FlatnessReport {
    let e = rep.phi.source().clone();
    let n = e.rank();
    let m = e.ctx().dim();
    let mut report = FlatnessReport { frame_cases: 0, random_trials: 0, failure: None };
    let one = RatFunc::one();
    let fail = |condition, frame, residual| Some(FlatnessFailure { condition, frame, residual });

    let mut test_functions: Vec<RatFunc> = (0..m).map(RatFunc::var).collect();
    test_functions.push(RatFunc::ratio(3, 2));
    for i in 0..n {
        let x = e.frame_section(i);
        for f in &test_functions {
            report.frame_cases += 1;
            if let Some(r) = check_a(rep, &x, f, &one) {
                report.failure = fail(FlatnessCondition::FunctionLinear, Some((i, i)), r);
                return report;
            }
            if let Some(r) = check_b(rep, &e, &x, f, &one) {
                report.failure = fail(FlatnessCondition::Leibniz, Some((i, i)), r);
                return report;
            }
        }
        for j in i + 1..n {
            report.frame_cases += 1;
            if let Some(r) = check_c(rep, &e, &x, &e.frame_section(j), &one) {
                report.failure = fail(FlatnessCondition::Flat, Some((i, j)), r);
                return report;
            }
        }
    }
    if n == 0 {
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        report.random_trials += 1;
        let x = random::section(&mut rng, n, m, 2);
        let y = random::section(&mut rng, n, m, 2);
        let f = random::poly(&mut rng, m, 2);
        let s = random::poly(&mut rng, m, 2);
        if let Some(r) = check_a(rep, &x, &f, &s) {
            report.failure = fail(FlatnessCondition::FunctionLinear, None, r);
            return report;
        }
        if let Some(r) = check_b(rep, &e, &x, &f, &s) {
            report.failure = fail(FlatnessCondition::Leibniz, None, r);
            return report;
        }
        if let Some(r) = check_c(rep, &e, &x, &y, &s) {
            report.failure = fail(FlatnessCondition::Flat, None, r);
            return report;
        }
    }
    report
}

fn nonzero(r: RatFunc) -> Option<RatFunc> {
    (!r.is_zero()).then_some(r)
}

fn check_a(rep: &LineRep, x: &GradedElement, f: &RatFunc, s: &RatFunc) -> Option<RatFunc> {
    let lhs = rep.act_raw(&x.scale(f), s);
    let rhs = f * &rep.act_raw(x, s);
    nonzero(&lhs - &rhs)
}

fn check_b(rep: &LineRep, e: &LieAlgebroid, x: &GradedElement, f: &RatFunc, s: &RatFunc) -> Option<RatFunc> {
    let lhs = rep.act_raw(x, &(f * s));
    let rhs = &(f * &rep.act_raw(x, s)) + &(&e.anchor_action(&x.components(), f) * s);
    nonzero(&lhs - &rhs)
}

fn check_c(rep: &LineRep, e: &LieAlgebroid, x: &GradedElement, y: &GradedElement, s: &RatFunc) -> Option<RatFunc> {
    let lhs = rep.act_raw(&e.schouten_raw(x, y), s);
    let rhs = &rep.act_raw(x, &rep.act_raw(y, s)) - &rep.act_raw(y, &rep.act_raw(x, s));
    nonzero(&lhs - &rhs)
}

/// `⟨θ, e_i⟩ s = D_{e_i} s`.
pub fn characteristic_section(rep: &LineRep, s: &LineSection) -> Result<Cochain1, ModularError> {
    if s.coeff.is_zero() {
        return Err(ModularError::VanishingCoefficient("line section"));
    }
    let e = rep.phi.source();
    e.ensure_valid()?;
    let components = (0..e.rank()).map(|i| &rep.act_raw(&e.frame_section(i), &s.coeff) / &s.coeff).collect();
    let theta = Cochain1 { algebroid: e.clone(), components };
    assert_cocycle(e, &theta, "characteristic section")?;
    Ok(theta)
}

/// `(1/g) d_E g` as a cochain: the shift produced by rescaling by `g`.
pub fn log_differential(e: &Arc<LieAlgebroid>, g: &RatFunc) -> Result<Cochain1, ModularError> {
    if g.is_zero() {
        return Err(ModularError::VanishingCoefficient("rescaling function"));
    }
    let components = (0..e.rank()).map(|i| &e.anchor_frame_action(i, g) / g).collect();
    Ok(Cochain1 { algebroid: e.clone(), components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use std::collections::BTreeMap;

    fn q(n: i64) -> RatFunc {
        RatFunc::from_int(n)
    }

    fn aff1() -> Arc<LieAlgebroid> {
        let mut c = BTreeMap::new();
        c.insert((0, 1), vec![q(0), q(1)]);
        Arc::new(LieAlgebroid::from_lie_algebra("aff1", 2, c).unwrap())
    }

    #[test]
    fn tangent_is_unimodular() {
        let ctx = BaseContext::new(["x", "y"]).unwrap();
        let t = Arc::new(LieAlgebroid::tangent(&ctx));
        let xi = modular_section(
            &t,
            &GradedElement::top(2, Role::Multivector, RatFunc::one()),
            &GradedElement::top(2, Role::Form, RatFunc::one()),
        )
        .unwrap();
        assert!(xi.is_zero());
    }

    #[test]
    fn aff1_character() {
        let g = aff1();
        let lam = GradedElement::scalar(0, Role::Form, RatFunc::one());
        let xi = modular_section(&g, &GradedElement::top(2, Role::Multivector, RatFunc::one()), &lam).unwrap();
        assert_eq!(xi.components(), &[q(1), q(0)]);
        let theta = characteristic_section(&LineRep::new(BundleMorphism::anchor(g.clone())), &LineSection::reference()).unwrap();
        assert_eq!(theta, xi);
        assert!(rep_flatness_check(&LineRep::new(BundleMorphism::anchor(g)), 3).passes());
    }

    #[test]
    fn vanishing_coefficients_rejected() {
        let g = aff1();
        let lam = GradedElement::scalar(0, Role::Form, RatFunc::one());
        let err = modular_section(&g, &GradedElement::zero(2, 2, Role::Multivector), &lam).unwrap_err();
        assert_eq!(err, ModularError::VanishingCoefficient("omega"));
    }

    #[test]
    fn rescaling_law() {
        let ctx = BaseContext::new(["x"]).unwrap();
        // rank 1 over R with anchor x ∂x
        let anchor = Matrix::from_rows(vec![vec![RatFunc::var(0)]], 1).unwrap();
        let e = Arc::new(LieAlgebroid::new("E", ctx.clone(), 1, anchor, BTreeMap::new()).unwrap().validate().0);
        let lam = GradedElement::top(1, Role::Form, RatFunc::one());
        let w = GradedElement::top(1, Role::Multivector, RatFunc::one());
        let xi = modular_section(&e, &w, &lam).unwrap();
        assert_eq!(xi.components(), &[q(1)]);
        let g = ctx.parse("1 + x").unwrap();
        let xi_g = modular_section(&e, &w.scale(&g), &lam).unwrap();
        assert_eq!(xi_g.sub(&xi).unwrap(), log_differential(&e, &g).unwrap());
    }
}
