//! Lie algebroids presented by an anchor matrix and frame structure functions.
//!
//! For a frame `e_1, …, e_n` of E over base coordinates `x_1, …, x_m`:
//! `ρ(e_i) = Σ_j anchor[i][j] ∂/∂x_j` and `[e_i, e_j] = Σ_k c^k_{ij} e_k`.
//! Only `i < j` is stored; antisymmetry is structural.
//!
//! Validity is checked on frame generators: the anchor must be a bracket
//! homomorphism on frame pairs and the Jacobiator must vanish on frame
//! triples. With the Leibniz rule `[x, f y] = f [x, y] + (ρ(x) f) y` these
//! two conditions imply the axioms for all sections, since the Jacobiator is
//! then C∞-trilinear. A randomized section-level spot check runs as well.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exterior::{blade_indices, contract, wedge_sign, Blade, ExteriorError, GradedElement, Role};
use crate::field::{BaseContext, RatFunc};
use crate::matrix::Matrix;
use crate::random;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebroidError {
    #[error("algebroid `{0}` is not validated as a Lie algebroid")]
    NotValid(String),
    #[error("malformed algebroid: {0}")]
    Malformed(String),
    #[error("Jacobi identity fails: {0}")]
    JacobiFailure(String),
    #[error("expected a section (degree-1 multivector), found {role} of degree {degree}")]
    NotASection { role: Role, degree: usize },
    #[error("expected a {expected}, found a {found}")]
    WrongRole { expected: Role, found: Role },
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// Failure evidence from [`LieAlgebroid::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// `ρ[e_i, e_j] - [ρ e_i, ρ e_j]` as base vector-field components.
    AnchorHomomorphism { i: usize, j: usize, residual: Vec<RatFunc> },
    /// Jacobiator of frame sections.
    Jacobi { i: usize, j: usize, k: usize, residual: GradedElement },
    /// Jacobiator of random polynomial sections.
    SpotCheck { residual: GradedElement },
}

impl Witness {
    pub fn describe(&self, ctx: &BaseContext) -> String {
        match self {
            Witness::AnchorHomomorphism { i, j, residual } => {
                let r: Vec<String> = residual.iter().map(|f| f.display(ctx).to_string()).collect();
                format!("anchor is not a homomorphism on (e{}, e{}): residual [{}]", i + 1, j + 1, r.join(", "))
            }
            Witness::Jacobi { i, j, k, residual } => {
                format!("Jacobi fails on (e{}, e{}, e{}): residual {}", i + 1, j + 1, k + 1, residual.display(ctx))
            }
            Witness::SpotCheck { residual } => format!("Jacobi fails on random sections: residual {}", residual.display(ctx)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Validation {
    Unchecked,
    Valid,
    Invalid(Witness),
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub algebroid: String,
    pub validation: Validation,
    pub frame_pairs: usize,
    pub frame_triples: usize,
    pub spot_checks: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.validation == Validation::Valid
    }

    pub const SCOPE_NOTE: &'static str = "frame-level anchor homomorphism and Jacobi, extended to all sections by the Leibniz rule";
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebroid {
    name: String,
    ctx: BaseContext,
    rank: usize,
    anchor: Matrix,
    structure: Vec<Vec<RatFunc>>,
    validation: Validation,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl LieAlgebroid {
    /// Unvalidated algebroid from anchor rows and brackets keyed by `(i, j)`, `i < j`.
    pub fn new(
        name: impl Into<String>,
        ctx: BaseContext,
        rank: usize,
        anchor: Matrix,
        brackets: BTreeMap<(usize, usize), Vec<RatFunc>>,
    ) -> Result<Self, AlgebroidError> {
        let name = name.into();
        if rank > crate::exterior::MAX_RANK {
            return Err(AlgebroidError::Malformed(format!("rank {rank} is too large")));
        }
        if anchor.rows() != rank || anchor.cols() != ctx.dim() {
            return Err(AlgebroidError::Malformed(format!(
                "anchor is {}x{}, expected {}x{}",
                anchor.rows(),
                anchor.cols(),
                rank,
                ctx.dim()
            )));
        }
        let pairs = rank * rank.saturating_sub(1) / 2;
        let mut structure = vec![vec![RatFunc::zero(); rank]; pairs];
        for ((i, j), coeffs) in brackets {
            if i >= j || j >= rank {
                return Err(AlgebroidError::Malformed(format!("bracket key ({}, {}) must satisfy i < j <= rank", i + 1, j + 1)));
            }
            if coeffs.len() != rank {
                return Err(AlgebroidError::Malformed(format!(
                    "bracket ({}, {}) has {} entries, expected {}",
                    i + 1,
                    j + 1,
                    coeffs.len(),
                    rank
                )));
            }
            structure[pair_index(rank, i, j)] = coeffs;
        }
        Ok(LieAlgebroid { name, ctx, rank, anchor, structure, validation: Validation::Unchecked })
    }

    /// TM with the coordinate frame: identity anchor, zero brackets.
    pub fn tangent(ctx: &BaseContext) -> Self {
        let m = ctx.dim();
        LieAlgebroid {
            name: "TM".into(),
            ctx: ctx.clone(),
            rank: m,
            anchor: Matrix::identity(m),
            structure: vec![vec![RatFunc::zero(); m]; m * m.saturating_sub(1) / 2],
            validation: Validation::Valid,
        }
    }

    /// A Lie algebra as an algebroid over a point. `constants[(i, j)][k] = c^k_{ij}`.
    pub fn from_lie_algebra(
        name: impl Into<String>,
        rank: usize,
        constants: BTreeMap<(usize, usize), Vec<RatFunc>>,
    ) -> Result<Self, AlgebroidError> {
        for (key, row) in &constants {
            if row.iter().any(|c| c.as_constant().is_none()) {
                return Err(AlgebroidError::Malformed(format!(
                    "structure constants of ({}, {}) must be rational numbers",
                    key.0 + 1,
                    key.1 + 1
                )));
            }
        }
        let ctx = BaseContext::point();
        let raw = LieAlgebroid::new(name, ctx, rank, Matrix::zeros(rank, 0), constants)?;
        let (checked, report) = raw.validate();
        match report.validation {
            Validation::Valid => Ok(checked),
            Validation::Invalid(w) => Err(AlgebroidError::JacobiFailure(w.describe(&checked.ctx))),
            Validation::Unchecked => unreachable!("validate always decides"),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn ctx(&self) -> &BaseContext {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn anchor(&self) -> &Matrix {
        &self.anchor
    }

    pub fn validation(&self) -> &Validation {
        &self.validation
    }

    pub fn is_valid(&self) -> bool {
        self.validation == Validation::Valid
    }

    pub fn ensure_valid(&self) -> Result<(), AlgebroidError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(AlgebroidError::NotValid(self.name.clone()))
        }
    }

    /// `c^·_{ij}` for any ordered pair.
    pub fn bracket_coeffs(&self, i: usize, j: usize) -> Vec<RatFunc> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.structure[pair_index(self.rank, i, j)].clone(),
            std::cmp::Ordering::Greater => self.structure[pair_index(self.rank, j, i)].iter().map(|c| -c).collect(),
            std::cmp::Ordering::Equal => vec![RatFunc::zero(); self.rank],
        }
    }

    fn bracket_coeff(&self, i: usize, j: usize, k: usize) -> RatFunc {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.structure[pair_index(self.rank, i, j)][k].clone(),
            std::cmp::Ordering::Greater => -&self.structure[pair_index(self.rank, j, i)][k],
            std::cmp::Ordering::Equal => RatFunc::zero(),
        }
    }

    /// Structure entries `(i, j) -> c^·_{ij}` for `i < j`, zero rows omitted.
    pub fn brackets(&self) -> BTreeMap<(usize, usize), Vec<RatFunc>> {
        let mut out = BTreeMap::new();
        for i in 0..self.rank {
            for j in i + 1..self.rank {
                let row = &self.structure[pair_index(self.rank, i, j)];
                if row.iter().any(|c| !c.is_zero()) {
                    out.insert((i, j), row.clone());
                }
            }
        }
        out
    }

    /// `ρ(e_i) · f`.
    pub fn anchor_frame_action(&self, i: usize, f: &RatFunc) -> RatFunc {
        if f.is_polynomial() && f.numerator().is_constant() {
            return RatFunc::zero();
        }
        self.anchor.row(i).iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(j, a)| a * &f.partial(j)).sum()
    }

    /// `ρ(x) · f` for a section with the given frame components.
    pub fn anchor_action(&self, x: &[RatFunc], f: &RatFunc) -> RatFunc {
        x.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| c * &self.anchor_frame_action(i, f)).sum()
    }

    /// Components of the base vector field `ρ(x)`.
    pub fn anchor_of(&self, x: &[RatFunc]) -> Vec<RatFunc> {
        self.anchor.apply_transpose(x)
    }

    pub fn frame_section(&self, i: usize) -> GradedElement {
        GradedElement::basis(self.rank, Role::Multivector, &[i]).expect("index in range")
    }

    pub fn frame_form(&self, i: usize) -> GradedElement {
        GradedElement::basis(self.rank, Role::Form, &[i]).expect("index in range")
    }

    /// Checks the frame-level axioms plus a randomized section-level Jacobi
    /// check, and returns the algebroid with its validation status set.
    pub fn validate(&self) -> (LieAlgebroid, ValidationReport) {
        let n = self.rank;
        let mut report = ValidationReport {
            algebroid: self.name.clone(),
            validation: Validation::Valid,
            frame_pairs: 0,
            frame_triples: 0,
            spot_checks: 0,
        };
        let verdict = self.find_violation(&mut report);
        report.validation = match verdict {
            Some(w) => Validation::Invalid(w),
            None => Validation::Valid,
        };
        let mut out = self.clone();
        out.validation = report.validation.clone();
        let _ = n;
        (out, report)
    }

    fn find_violation(&self, report: &mut ValidationReport) -> Option<Witness> {
        let n = self.rank;
        let m = self.ctx.dim();
        for i in 0..n {
            for j in i + 1..n {
                report.frame_pairs += 1;
                // ρ[e_i, e_j]^l = Σ_k c^k_ij ρ_kl ; [ρe_i, ρe_j]^l = ρe_i(ρ_jl) - ρe_j(ρ_il)
                let c = self.bracket_coeffs(i, j);
                let residual: Vec<RatFunc> = (0..m)
                    .map(|l| {
                        let lhs: RatFunc = (0..n).map(|k| &c[k] * self.anchor.get(k, l)).sum();
                        let rhs = &self.anchor_frame_action(i, self.anchor.get(j, l)) - &self.anchor_frame_action(j, self.anchor.get(i, l));
                        &lhs - &rhs
                    })
                    .collect();
                if residual.iter().any(|r| !r.is_zero()) {
                    return Some(Witness::AnchorHomomorphism { i, j, residual });
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    report.frame_triples += 1;
                    let (a, b, c) = (self.frame_section(i), self.frame_section(j), self.frame_section(k));
                    let residual = self.jacobiator(&a, &b, &c);
                    if !residual.is_zero() {
                        return Some(Witness::Jacobi { i, j, k, residual });
                    }
                }
            }
        }
        if n >= 2 {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
            for _ in 0..SPOT_CHECKS {
                report.spot_checks += 1;
                let x = random::section(&mut rng, n, m, 2);
                let y = random::section(&mut rng, n, m, 2);
                let z = random::section(&mut rng, n, m, 2);
                let residual = self.jacobiator(&x, &y, &z);
                if !residual.is_zero() {
                    return Some(Witness::SpotCheck { residual });
                }
            }
        }
        None
    }

    fn jacobiator(&self, x: &GradedElement, y: &GradedElement, z: &GradedElement) -> GradedElement {
        let t1 = self.schouten_raw(&self.schouten_raw(x, y), z);
        let t2 = self.schouten_raw(&self.schouten_raw(y, z), x);
        let t3 = self.schouten_raw(&self.schouten_raw(z, x), y);
        t1.add(&t2).and_then(|s| s.add(&t3)).expect("same shape")
    }

    fn check_form(&self, alpha: &GradedElement) -> Result<(), AlgebroidError> {
        if alpha.rank() != self.rank {
            return Err(ExteriorError::RankMismatch(self.rank, alpha.rank()).into());
        }
        if alpha.role() != Role::Form {
            return Err(AlgebroidError::WrongRole { expected: Role::Form, found: alpha.role() });
        }
        Ok(())
    }

    fn check_multivector(&self, q: &GradedElement) -> Result<(), AlgebroidError> {
        if q.rank() != self.rank {
            return Err(ExteriorError::RankMismatch(self.rank, q.rank()).into());
        }
        if q.role() != Role::Multivector {
            return Err(AlgebroidError::WrongRole { expected: Role::Multivector, found: q.role() });
        }
        Ok(())
    }

    /// The algebroid differential on forms.
    pub fn d(&self, alpha: &GradedElement) -> Result<GradedElement, AlgebroidError> {
        self.ensure_valid()?;
        self.check_form(alpha)?;
        Ok(self.d_raw(alpha))
    }

    /// Cartan formula on frame arguments; no validity check.
    pub(crate) fn d_raw(&self, alpha: &GradedElement) -> GradedElement {
        let n = self.rank;
        let k = alpha.degree();
        let mut out = GradedElement::zero(n, k + 1, Role::Form);
        if k >= n || alpha.is_zero() {
            return out;
        }
        for target in blades_of_degree(n, k + 1) {
            let idx = blade_indices(target);
            let mut acc = RatFunc::zero();
            for (s, &js) in idx.iter().enumerate() {
                let coeff = alpha.coefficient_at(target & !(1 << js));
                if coeff.is_zero() {
                    continue;
                }
                let term = self.anchor_frame_action(js, &coeff);
                acc = if s % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            for (s, &js) in idx.iter().enumerate() {
                for (t, &jt) in idx.iter().enumerate().skip(s + 1) {
                    let rest = target & !(1 << js) & !(1 << jt);
                    let mut val = RatFunc::zero();
                    for l in 0..n {
                        if rest & (1 << l) != 0 {
                            continue;
                        }
                        let c = self.bracket_coeff(js, jt, l);
                        if c.is_zero() {
                            continue;
                        }
                        let a = alpha.coefficient_at(rest | (1 << l));
                        if a.is_zero() {
                            continue;
                        }
                        let p = &c * &a;
                        val = if (rest & ((1u32 << l) - 1)).count_ones().is_multiple_of(2) { &val + &p } else { &val - &p };
                    }
                    acc = if (s + t) % 2 == 0 { &acc + &val } else { &acc - &val };
                }
            }
            out.add_at(target, &acc);
        }
        out
    }

    /// Schouten–Nijenhuis bracket of multivectors.
    ///
    /// Extends the frame bracket as a biderivation with `[x, f] = ρ(x) f` and
    /// `[P, Q] = -(-1)^{(p-1)(q-1)} [Q, P]`. `[f, g] = 0` is returned as a
    /// zero scalar; results above the rank are zero of their formal degree.
    pub fn schouten(&self, p: &GradedElement, q: &GradedElement) -> Result<GradedElement, AlgebroidError> {
        self.ensure_valid()?;
        self.check_multivector(p)?;
        self.check_multivector(q)?;
        Ok(self.schouten_raw(p, q))
    }

    pub(crate) fn schouten_raw(&self, p: &GradedElement, q: &GradedElement) -> GradedElement {
        let n = self.rank;
        let (dp, dq) = (p.degree(), q.degree());
        if dp + dq == 0 {
            return GradedElement::zero(n, 0, Role::Multivector);
        }
        let degree = dp + dq - 1;
        let mut out = GradedElement::zero(n, degree, Role::Multivector);
        if degree > n {
            return out;
        }
        let sym_neg = (dp as i64 - 1) * (dq as i64 - 1) % 2 != 0;
        for (bi, f) in p.blades() {
            let ii = blade_indices(bi);
            for (bj, g) in q.blades() {
                let jj = blade_indices(bj);
                // f [e_I, g] ∧ e_J
                for (s, &is) in ii.iter().enumerate() {
                    let h = self.anchor_frame_action(is, g);
                    if h.is_zero() {
                        continue;
                    }
                    if let Some(neg) = wedge_sign(bi & !(1 << is), bj) {
                        let sign = neg ^ ((dp - 1 - s) % 2 == 1);
                        push_signed(&mut out, (bi & !(1 << is)) | bj, &(f * &h), sign);
                    }
                }
                // f g [e_I, e_J]
                let fg = f * g;
                for (s, &is) in ii.iter().enumerate() {
                    let ri = bi & !(1 << is);
                    for (t, &jt) in jj.iter().enumerate() {
                        let rj = bj & !(1 << jt);
                        let Some(neg_rest) = wedge_sign(ri, rj) else { continue };
                        let rest = ri | rj;
                        for l in 0..n {
                            let c = self.bracket_coeff(is, jt, l);
                            if c.is_zero() {
                                continue;
                            }
                            let Some(neg_l) = wedge_sign(1 << l, rest) else { continue };
                            let sign = neg_rest ^ neg_l ^ ((s + t) % 2 == 1);
                            push_signed(&mut out, rest | (1 << l), &(&fg * &c), sign);
                        }
                    }
                }
                // -(-1)^{(p-1)(q-1)} g [e_J, f] ∧ e_I
                for (t, &jt) in jj.iter().enumerate() {
                    let h = self.anchor_frame_action(jt, f);
                    if h.is_zero() {
                        continue;
                    }
                    if let Some(neg) = wedge_sign(bj & !(1 << jt), bi) {
                        let sign = !sym_neg ^ neg ^ ((dq - 1 - t) % 2 == 1);
                        push_signed(&mut out, (bj & !(1 << jt)) | bi, &(g * &h), sign);
                    }
                }
            }
        }
        out
    }

    /// Lie derivative along a section: Cartan formula on forms, `[x, ·]` on
    /// multivectors, `ρ(x) f` on functions.
    pub fn lie_derivative(&self, x: &GradedElement, t: &GradedElement) -> Result<GradedElement, AlgebroidError> {
        self.ensure_valid()?;
        self.check_multivector(x)?;
        if x.degree() != 1 {
            return Err(AlgebroidError::NotASection { role: x.role(), degree: x.degree() });
        }
        match t.role() {
            Role::Form => self.check_form(t)?,
            Role::Multivector => self.check_multivector(t)?,
        }
        Ok(self.lie_derivative_raw(x, t))
    }

    pub(crate) fn lie_derivative_raw(&self, x: &GradedElement, t: &GradedElement) -> GradedElement {
        if self.rank == 0 {
            return GradedElement::zero(0, t.degree(), t.role());
        }
        if t.degree() == 0 {
            let v = self.anchor_action(&x.components(), &t.scalar_value());
            return GradedElement::scalar(self.rank, t.role(), v);
        }
        match t.role() {
            Role::Multivector => self.schouten_raw(x, t),
            Role::Form => {
                let a = contract(x, &self.d_raw(t)).expect("shapes checked");
                let b = self.d_raw(&contract(x, t).expect("shapes checked"));
                a.add(&b).expect("same shape")
            }
        }
    }

    /// Bracket of two sections.
    pub fn bracket(&self, x: &GradedElement, y: &GradedElement) -> Result<GradedElement, AlgebroidError> {
        for s in [x, y] {
            self.check_multivector(s)?;
            if s.degree() != 1 {
                return Err(AlgebroidError::NotASection { role: s.role(), degree: s.degree() });
            }
        }
        self.schouten(x, y)
    }

    /// Returns a copy with its stored bracket rows replaced; validation reset.
    pub fn with_brackets(&self, brackets: BTreeMap<(usize, usize), Vec<RatFunc>>) -> Result<LieAlgebroid, AlgebroidError> {
        LieAlgebroid::new(self.name.clone(), self.ctx.clone(), self.rank, self.anchor.clone(), brackets)
    }
}

const SPOT_CHECKS: usize = 2;

fn push_signed(out: &mut GradedElement, b: Blade, v: &RatFunc, negative: bool) {
    if negative {
        out.sub_at(b, v);
    } else {
        out.add_at(b, v);
    }
}

/// All blades with `k` of the lowest `n` bits set, in increasing order.
pub fn blades_of_degree(n: usize, k: usize) -> Vec<Blade> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let limit: u64 = 1u64 << n;
    for b in 0..limit {
        if (b as u32).count_ones() as usize == k {
            out.push(b as Blade);
        }
    }
    out
}

impl fmt::Display for LieAlgebroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algebroid {} (rank {}, base dim {})", self.name, self.rank, self.ctx.dim())?;
        for i in 0..self.rank {
            let row: Vec<String> = self.anchor.row(i).iter().map(|a| a.display(&self.ctx).to_string()).collect();
            writeln!(f, "  anchor e{} = [{}]", i + 1, row.join(", "))?;
        }
        for ((i, j), row) in self.brackets() {
            let row: Vec<String> = row.iter().map(|a| a.display(&self.ctx).to_string()).collect();
            writeln!(f, "  [e{}, e{}] = [{}]", i + 1, j + 1, row.join(", "))?;
        }
        Ok(())
    }
}
