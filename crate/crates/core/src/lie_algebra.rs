//! Lie algebras as algebroids over a point: modular characters, relative
//! characters of subalgebras, and the invariant-measure obstruction.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::algebroid::{AlgebroidError, LieAlgebroid};
use crate::exterior::{GradedElement, Role};
use crate::field::{RatFunc, Rational};
use crate::linalg;
use crate::matrix::Matrix;
use crate::modular::{modular_section, relative_modular_section, Cochain1, ModularError};
use crate::morphism::BundleMorphism;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error(transparent)]
    Modular(#[from] ModularError),
    #[error("subalgebra basis vector {0} has the wrong length")]
    BasisLength(usize),
    #[error("subalgebra basis is linearly dependent")]
    Dependent,
    #[error("span is not closed: [b{}, b{}] leaves the span", .0 + 1, .1 + 1)]
    NotClosed(usize, usize),
    #[error("cochain is not a cocycle: it is nonzero on [e{}, e{}]", .0 + 1, .1 + 1)]
    NotACocycle(usize, usize),
    #[error("cochain has {found} components, expected {expected}")]
    Length { expected: usize, found: usize },
}

/// Structure constants `c^k_{ij}` for `i < j`, Jacobi-validated.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraPresentation {
    name: String,
    dim: usize,
    constants: BTreeMap<(usize, usize), Vec<Rational>>,
    algebroid: Arc<LieAlgebroid>,
}

impl LieAlgebraPresentation {
    pub fn new(name: impl Into<String>, dim: usize, constants: BTreeMap<(usize, usize), Vec<Rational>>) -> Result<Self, LieError> {
        let name = name.into();
        let as_fn = constants.iter().map(|(k, v)| (*k, v.iter().cloned().map(RatFunc::from_rational).collect())).collect();
        let algebroid = Arc::new(LieAlgebroid::from_lie_algebra(name.clone(), dim, as_fn)?);
        let constants =
            algebroid.brackets().into_iter().map(|(k, v)| (k, v.iter().map(|c| c.as_constant().expect("rational")).collect())).collect();
        Ok(LieAlgebraPresentation { name, dim, constants, algebroid })
    }

    /// From an already validated point-base algebroid.
    pub fn from_algebroid(algebroid: Arc<LieAlgebroid>) -> Result<Self, LieError> {
        algebroid.ensure_valid()?;
        let constants = algebroid.brackets();
        if algebroid.ctx().dim() != 0 {
            return Err(AlgebroidError::Malformed("a Lie algebra lives over a point".into()).into());
        }
        let constants = constants.into_iter().map(|(k, v)| (k, v.iter().map(|c| c.as_constant().expect("point base")).collect())).collect();
        Ok(LieAlgebraPresentation { name: algebroid.name().to_string(), dim: algebroid.rank(), constants, algebroid })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn algebroid(&self) -> &Arc<LieAlgebroid> {
        &self.algebroid
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> Rational {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.constants.get(&(i, j)).map_or_else(Rational::zero, |v| v[k].clone()),
            std::cmp::Ordering::Greater => self.constants.get(&(j, i)).map_or_else(Rational::zero, |v| -&v[k]),
            std::cmp::Ordering::Equal => Rational::zero(),
        }
    }

    /// `[u, v]` in coordinates.
    pub fn bracket(&self, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim];
        for (i, ui) in u.iter().enumerate().take(self.dim) {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate().take(self.dim) {
                if vj.is_zero() || i == j {
                    continue;
                }
                let uv = ui * vj;
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        *o += &uv * &c;
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad_{e_i}`: column `j` is `[e_i, e_j]`.
    pub fn ad(&self, i: usize) -> Vec<Vec<Rational>> {
        (0..self.dim).map(|k| (0..self.dim).map(|j| self.constant(i, j, k)).collect()).collect()
    }

    /// Spanning vectors of `[g, g]`.
    pub fn derived_algebra(&self) -> Vec<Vec<Rational>> {
        let mut rows: Vec<Vec<Rational>> = self.constants.values().cloned().collect();
        let pivots = linalg::rref(&mut rows);
        rows.truncate(pivots.len());
        rows
    }
}

/// `χ(e_i) = Tr ad_{e_i}`.
pub fn modular_character(g: &LieAlgebraPresentation) -> Cochain1 {
    let comps = (0..g.dim)
        .map(|i| {
            let ad = g.ad(i);
            RatFunc::from_rational((0..g.dim).map(|j| ad[j][j].clone()).sum())
        })
        .collect();
    Cochain1::new(g.algebroid.clone(), comps).expect("length")
}

/// `χ` computed as the modular section with the canonical tops.
pub fn modular_character_via_section(g: &LieAlgebraPresentation) -> Result<Cochain1, LieError> {
    let n = g.dim;
    Ok(modular_section(
        &g.algebroid,
        &GradedElement::top(n, Role::Multivector, RatFunc::one()),
        &GradedElement::scalar(0, Role::Form, RatFunc::one()),
    )?)
}

/// A subalgebra spanned by ambient-coordinate vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SubalgebraInclusion {
    ambient: LieAlgebraPresentation,
    basis: Vec<Vec<Rational>>,
    sub: LieAlgebraPresentation,
}

impl SubalgebraInclusion {
    /// Validates independence and closure, and derives the subalgebra's
    /// structure constants in the given basis.
    pub fn new(name: impl Into<String>, ambient: LieAlgebraPresentation, basis: Vec<Vec<Rational>>) -> Result<Self, LieError> {
        for (i, b) in basis.iter().enumerate() {
            if b.len() != ambient.dim {
                return Err(LieError::BasisLength(i));
            }
        }
        let k = basis.len();
        if linalg::rank(&basis) != k {
            return Err(LieError::Dependent);
        }
        // columns of the system are the basis vectors
        let columns: Vec<Vec<Rational>> = (0..ambient.dim).map(|r| (0..k).map(|c| basis[c][r].clone()).collect()).collect();
        let mut constants = BTreeMap::new();
        for i in 0..k {
            for j in i + 1..k {
                let br = ambient.bracket(&basis[i], &basis[j]);
                let coeffs = linalg::solve(&columns, &br).ok_or(LieError::NotClosed(i, j))?;
                if coeffs.iter().any(|c| !c.is_zero()) {
                    constants.insert((i, j), coeffs);
                }
            }
        }
        let sub = LieAlgebraPresentation::new(name, k, constants)?;
        Ok(SubalgebraInclusion { ambient, basis, sub })
    }

    pub fn ambient(&self) -> &LieAlgebraPresentation {
        &self.ambient
    }

    pub fn subalgebra(&self) -> &LieAlgebraPresentation {
        &self.sub
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// `ι` as a bundle morphism of point-base algebroids.
    pub fn morphism(&self) -> BundleMorphism {
        let rows = (0..self.ambient.dim).map(|r| self.basis.iter().map(|b| RatFunc::from_rational(b[r].clone())).collect()).collect();
        let m = Matrix::from_rows(rows, self.basis.len()).expect("rectangular");
        BundleMorphism::new(self.sub.algebroid.clone(), self.ambient.algebroid.clone(), m).expect("shapes")
    }
}

/// `χ^h - ι* χ^g`.
pub fn relative_character(inc: &SubalgebraInclusion) -> Cochain1 {
    let chi_h = modular_character(&inc.sub);
    let chi_g = modular_character(&inc.ambient);
    let restricted: Vec<RatFunc> = inc.basis.iter().map(|b| chi_g.pair(&to_fns(b))).collect();
    let comps = chi_h.components().iter().zip(&restricted).map(|(a, b)| a - b).collect();
    Cochain1::new(inc.sub.algebroid.clone(), comps).expect("length")
}

fn to_fns(v: &[Rational]) -> Vec<RatFunc> {
    v.iter().cloned().map(RatFunc::from_rational).collect()
}

/// The relative character through the generic relative modular section.
pub fn relative_character_via_section(inc: &SubalgebraInclusion) -> Result<Cochain1, LieError> {
    let (k, n) = (inc.sub.dim, inc.ambient.dim);
    Ok(relative_modular_section(
        &inc.morphism(),
        &GradedElement::top(k, Role::Multivector, RatFunc::one()),
        &GradedElement::top(n, Role::Multivector, RatFunc::one()),
    )?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct H1Report {
    /// `ξ` vanishes on `[g, g]`.
    pub cocycle: bool,
    /// Over a point `H¹ = Z¹`, so the class is zero iff `ξ = 0`.
    pub class_zero: bool,
    pub derived_dim: usize,
}

/// First Chevalley–Eilenberg cohomology class of `ξ`, via `H¹ = (g/[g,g])*`.
pub fn h1_class(g: &LieAlgebraPresentation, xi: &Cochain1) -> Result<H1Report, LieError> {
    if xi.components().len() != g.dim {
        return Err(LieError::Length { expected: g.dim, found: xi.components().len() });
    }
    for i in 0..g.dim {
        for j in i + 1..g.dim {
            let br = g.bracket(&unit(g.dim, i), &unit(g.dim, j));
            if !xi.pair(&to_fns(&br)).is_zero() {
                return Err(LieError::NotACocycle(i, j));
            }
        }
    }
    Ok(H1Report { cocycle: true, class_zero: xi.is_zero(), derived_dim: g.derived_algebra().len() })
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    (0..n).map(|k| if k == i { Rational::from_integer(1.into()) } else { Rational::zero() }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    pub relative: Cochain1,
    pub via_section: Cochain1,
    pub vanishes: bool,
    pub verdict: String,
}

impl ObstructionReport {
    pub fn cross_checked(&self) -> bool {
        self.relative == self.via_section
    }
}

/// For connected closed `H ⊂ G`, `G/H` carries a `G`-invariant measure iff
/// `χ^h - ι* χ^g = 0`. Only the infinitesimal criterion is evaluated.
pub fn invariant_measure_obstruction(inc: &SubalgebraInclusion) -> Result<ObstructionReport, LieError> {
    let relative = relative_character(inc);
    let via_section = relative_character_via_section(inc)?;
    let vanishes = relative.is_zero();
    let verdict = if vanishes {
        format!("invariant measure exists on G/H ({} in {}, connected closed H assumed)", inc.sub.name, inc.ambient.name)
    } else {
        format!("no invariant measure on G/H ({} in {}, connected closed H assumed)", inc.sub.name, inc.ambient.name)
    };
    Ok(ObstructionReport { relative, via_section, vanishes, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn sl2() -> LieAlgebraPresentation {
        let mut c = BTreeMap::new();
        c.insert((0, 1), vec![q(0), q(2), q(0)]);
        c.insert((0, 2), vec![q(0), q(0), q(-2)]);
        c.insert((1, 2), vec![q(1), q(0), q(0)]);
        LieAlgebraPresentation::new("sl2", 3, c).unwrap()
    }

    #[test]
    fn characters() {
        let g = sl2();
        assert!(modular_character(&g).is_zero());
        let mut c = BTreeMap::new();
        c.insert((0, 1), vec![q(0), q(1)]);
        let aff = LieAlgebraPresentation::new("aff1", 2, c).unwrap();
        let chi = modular_character(&aff);
        assert_eq!(chi.components(), &[RatFunc::one(), RatFunc::zero()]);
        assert_eq!(chi, modular_character_via_section(&aff).unwrap());
        let h1 = h1_class(&aff, &chi).unwrap();
        assert!(!h1.class_zero);
        assert_eq!(h1.derived_dim, 1);
        let bad = Cochain1::new(aff.algebroid().clone(), vec![RatFunc::zero(), RatFunc::one()]).unwrap();
        assert_eq!(h1_class(&aff, &bad), Err(LieError::NotACocycle(0, 1)));
    }

    #[test]
    fn borel_obstruction() {
        let b = SubalgebraInclusion::new("b", sl2(), vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]]).unwrap();
        let rep = invariant_measure_obstruction(&b).unwrap();
        assert_eq!(rep.relative.components(), &[RatFunc::from_int(2), RatFunc::zero()]);
        assert!(rep.cross_checked());
        assert!(!rep.vanishes);
        assert!(rep.verdict.starts_with("no invariant measure"));
    }

    #[test]
    fn closure_and_independence() {
        let err = SubalgebraInclusion::new("x", sl2(), vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]]);
        assert_eq!(err, Err(LieError::NotClosed(0, 1)));
        let err = SubalgebraInclusion::new("x", sl2(), vec![vec![q(1), q(0), q(0)], vec![q(2), q(0), q(0)]]);
        assert_eq!(err, Err(LieError::Dependent));
    }
}
