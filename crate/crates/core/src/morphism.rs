//! Base-preserving bundle maps between algebroids over the same base.

use std::sync::Arc;

use thiserror::Error;

use crate::algebroid::LieAlgebroid;
use crate::exterior::{pull_back, push_forward, GradedElement, Role};
use crate::field::RatFunc;
use crate::matrix::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorphismError {
    #[error("source and target live over different bases")]
    BaseMismatch,
    #[error("matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("morphisms are not composable")]
    NotComposable,
}

/// `φ: E → F`. The matrix is rank F × rank E with column `i` equal to `φ(e_i)`;
/// `φ*` on forms acts by the transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleMorphism {
    source: Arc<LieAlgebroid>,
    target: Arc<LieAlgebroid>,
    matrix: Matrix,
}

impl BundleMorphism {
    pub fn new(source: Arc<LieAlgebroid>, target: Arc<LieAlgebroid>, matrix: Matrix) -> Result<Self, MorphismError> {
        if source.ctx() != target.ctx() {
            return Err(MorphismError::BaseMismatch);
        }
        if matrix.rows() != target.rank() || matrix.cols() != source.rank() {
            return Err(MorphismError::Shape {
                rows: matrix.rows(),
                cols: matrix.cols(),
                expected_rows: target.rank(),
                expected_cols: source.rank(),
            });
        }
        Ok(BundleMorphism { source, target, matrix })
    }

    pub fn identity(e: Arc<LieAlgebroid>) -> Self {
        let n = e.rank();
        BundleMorphism { source: e.clone(), target: e, matrix: Matrix::identity(n) }
    }

    /// The anchor `ρ_E: E → TM`.
    pub fn anchor(e: Arc<LieAlgebroid>) -> Self {
        let tm = Arc::new(LieAlgebroid::tangent(e.ctx()));
        let matrix = e.anchor().transpose();
        BundleMorphism { source: e, target: tm, matrix }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &BundleMorphism) -> Result<BundleMorphism, MorphismError> {
        if self.target.rank() != next.source.rank() || self.target.ctx() != next.source.ctx() {
            return Err(MorphismError::NotComposable);
        }
        Ok(BundleMorphism { source: self.source.clone(), target: next.target.clone(), matrix: next.matrix.mul(&self.matrix) })
    }

    pub fn source(&self) -> &Arc<LieAlgebroid> {
        &self.source
    }

    pub fn target(&self) -> &Arc<LieAlgebroid> {
        &self.target
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `φ(x)` for a section of the source.
    pub fn apply(&self, x: &GradedElement) -> GradedElement {
        push_forward(&self.matrix, x, Role::Multivector).expect("section of the source")
    }

    /// `φ*` on source-free component vectors: `(φ*η)_i = Σ_a φ_{ai} η_a`.
    pub fn pull_back_components(&self, eta: &[RatFunc]) -> Vec<RatFunc> {
        self.matrix.apply_transpose(eta)
    }

    pub fn pull_back(&self, beta: &GradedElement) -> GradedElement {
        pull_back(&self.matrix, beta).expect("form on the target")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MorphismFailure {
    /// Source or target fails validation.
    InvalidEndpoint(String),
    /// `ρ_F(φ e_i) - ρ_E(e_i)` as base vector-field components.
    Anchor { i: usize, residual: Vec<RatFunc> },
    /// `φ* d_F E^a - d_E φ* E^a`.
    ChainMap { a: usize, residual: GradedElement },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorphismReport {
    pub failure: Option<MorphismFailure>,
}

impl MorphismReport {
    pub fn passes(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks that `φ` intertwines anchors and that `φ*` commutes with the
/// differentials on the frame 1-forms of the target.
pub fn is_morphism(phi: &BundleMorphism) -> MorphismReport {
    for end in [&phi.source, &phi.target] {
        if !end.is_valid() {
            return MorphismReport { failure: Some(MorphismFailure::InvalidEndpoint(end.name().to_string())) };
        }
    }
    is_morphism_unchecked(phi)
}

pub(crate) fn is_morphism_unchecked(phi: &BundleMorphism) -> MorphismReport {
    let (e, f) = (&phi.source, &phi.target);
    let m = e.ctx().dim();
    for i in 0..e.rank() {
        let image = phi.matrix.column(i);
        let via_f = f.anchor_of(&image);
        let residual: Vec<RatFunc> = (0..m).map(|j| &via_f[j] - e.anchor().get(i, j)).collect();
        if residual.iter().any(|r| !r.is_zero()) {
            return MorphismReport { failure: Some(MorphismFailure::Anchor { i, residual }) };
        }
    }
    for a in 0..f.rank() {
        let beta = f.frame_form(a);
        let lhs = phi.pull_back(&f.d_raw(&beta));
        let rhs = e.d_raw(&phi.pull_back(&beta));
        let residual = lhs.sub(&rhs).expect("same shape");
        if !residual.is_zero() {
            return MorphismReport { failure: Some(MorphismFailure::ChainMap { a, residual }) };
        }
    }
    MorphismReport { failure: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BaseContext;
    use std::collections::BTreeMap;

    fn q(n: i64) -> RatFunc {
        RatFunc::from_int(n)
    }

    #[test]
    fn identity_and_anchor_pass() {
        let ctx = BaseContext::new(["x", "y"]).unwrap();
        let t = Arc::new(LieAlgebroid::tangent(&ctx));
        assert!(is_morphism(&BundleMorphism::identity(t.clone())).passes());
        assert!(is_morphism(&BundleMorphism::anchor(t)).passes());
    }

    #[test]
    fn borel_inclusion() {
        let mut c = BTreeMap::new();
        c.insert((0, 1), vec![q(0), q(2), q(0)]);
        c.insert((0, 2), vec![q(0), q(0), q(-2)]);
        c.insert((1, 2), vec![q(1), q(0), q(0)]);
        let sl2 = Arc::new(LieAlgebroid::from_lie_algebra("sl2", 3, c).unwrap());
        let mut cb = BTreeMap::new();
        cb.insert((0, 1), vec![q(0), q(2)]);
        let b = Arc::new(LieAlgebroid::from_lie_algebra("b", 2, cb).unwrap());
        let inc = Matrix::from_rows(vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(0), q(0)]], 2).unwrap();
        let iota = BundleMorphism::new(b.clone(), sl2.clone(), inc).unwrap();
        assert!(is_morphism(&iota).passes());
        // h, f does not close to the same constants as h, e
        let wrong = Matrix::from_rows(vec![vec![q(1), q(0)], vec![q(0), q(0)], vec![q(0), q(1)]], 2).unwrap();
        let bad = BundleMorphism::new(b, sl2, wrong).unwrap();
        assert!(matches!(is_morphism(&bad).failure, Some(MorphismFailure::ChainMap { .. })));
    }
}
