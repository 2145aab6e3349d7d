//! Resolved objects of a problem file.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebroid::{LieAlgebroid, ValidationReport};
use crate::exterior::{GradedElement, Role};
use crate::field::{RatFunc, Rational};
use crate::lie_algebra::{LieAlgebraPresentation, SubalgebraInclusion};
use crate::matrix::Matrix;
use crate::modular::Cochain1;
use crate::morphism::BundleMorphism;
use crate::twisted::{check_twisted, TwistedReport};

use super::problem::{AlgebroidKind, ElementKind, MorphismKind, ProblemFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Declared,
    Tangent,
    Subalgebra,
}

#[derive(Clone, Debug)]
pub struct AlgebroidEntry {
    pub name: String,
    pub algebroid: Arc<LieAlgebroid>,
    pub origin: Origin,
    pub report: Option<ValidationReport>,
    /// Top multivector of E.
    pub omega: GradedElement,
    pub omega_declared: bool,
    /// Top form of the base.
    pub lambda: GradedElement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphismOrigin {
    Declared,
    Anchor,
    Inclusion,
    Sharp,
}

#[derive(Clone, Debug)]
pub struct MorphismEntry {
    pub name: String,
    pub phi: BundleMorphism,
    pub source: String,
    pub target: String,
    pub origin: MorphismOrigin,
    pub omega_source: GradedElement,
    pub omega_target: GradedElement,
    /// Common base volume for the difference route.
    pub mu: GradedElement,
    pub casts: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TwistedEntry {
    pub name: String,
    pub on: String,
    pub report: TwistedReport,
    /// Top form of A.
    pub lambda: GradedElement,
    pub casts: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SubalgebraEntry {
    pub name: String,
    pub ambient: String,
    pub inclusion: Result<SubalgebraInclusion, String>,
}

#[derive(Clone, Debug)]
pub struct Workspace {
    pub file: ProblemFile,
    pub algebroids: Vec<AlgebroidEntry>,
    pub subalgebras: Vec<SubalgebraEntry>,
    /// Declared and inclusion morphisms, in file order.
    pub morphisms: Vec<MorphismEntry>,
    pub cochains: Vec<(String, Cochain1)>,
    pub twisted: Vec<TwistedEntry>,
}

fn top_or_one(rank: usize, role: Role, c: &Option<RatFunc>) -> GradedElement {
    GradedElement::top(rank, role, c.clone().unwrap_or_else(RatFunc::one))
}

impl Workspace {
    pub fn algebroid(&self, name: &str) -> Option<&AlgebroidEntry> {
        self.algebroids.iter().find(|a| a.name == name)
    }

    /// Anchor morphisms, with `ω_TM` dual to `λ`. Subalgebras are skipped.
    pub fn anchors(&self, include_invalid: bool) -> Vec<MorphismEntry> {
        self.algebroids
            .iter()
            .filter(|a| a.origin != Origin::Subalgebra && (include_invalid || a.algebroid.is_valid()))
            .map(anchor_entry)
            .collect()
    }

    /// `π♯: A* → A` of every valid twisted structure.
    pub fn sharps(&self) -> Vec<Result<MorphismEntry, (String, String)>> {
        self.twisted
            .iter()
            .map(|t| {
                let name = format!("sharp({})", t.name);
                if !t.report.is_valid() {
                    return Err((name, format!("twisted structure `{}` is not valid", t.name)));
                }
                let s = &t.report.structure;
                let phi = s.sharp_morphism().map_err(|e| (name.clone(), e.to_string()))?;
                let n = s.algebroid().rank();
                let c = t.lambda.top_coefficient().expect("top form");
                Ok(MorphismEntry {
                    name,
                    source: format!("{}*", t.on),
                    target: t.on.clone(),
                    origin: MorphismOrigin::Sharp,
                    omega_source: t.lambda.recast(Role::Multivector),
                    omega_target: GradedElement::top(n, Role::Multivector, c.inv().expect("nonzero volume")),
                    mu: GradedElement::top(s.algebroid().ctx().dim(), Role::Form, RatFunc::one()),
                    casts: vec![format!("lambda, a top form of {}, read as the top multivector of {}*", t.on, t.on)],
                    phi,
                })
            })
            .collect()
    }
}

pub fn anchor_entry(a: &AlgebroidEntry) -> MorphismEntry {
    let phi = BundleMorphism::anchor(a.algebroid.clone());
    let m = a.algebroid.ctx().dim();
    let l = a.lambda.top_coefficient().expect("top form");
    MorphismEntry {
        name: format!("anchor({})", a.name),
        source: a.name.clone(),
        target: "TM".into(),
        origin: MorphismOrigin::Anchor,
        omega_source: a.omega.clone(),
        omega_target: GradedElement::top(m, Role::Multivector, l.inv().expect("nonzero volume")),
        mu: a.lambda.clone(),
        casts: Vec::new(),
        phi,
    }
}

/// Structural problems left after parsing are reported as plain strings.
pub fn build(file: &ProblemFile) -> Result<Workspace, String> {
    let ctx = &file.ctx;
    let m = ctx.dim();
    let mut ws = Workspace {
        file: file.clone(),
        algebroids: Vec::new(),
        subalgebras: Vec::new(),
        morphisms: Vec::new(),
        cochains: Vec::new(),
        twisted: Vec::new(),
    };
    let mut presentations: BTreeMap<String, LieAlgebraPresentation> = BTreeMap::new();
    for s in &file.sections {
        use super::problem::Section;
        match s {
            Section::Algebroid(d) => {
                let (algebroid, origin, report) = match &d.kind {
                    AlgebroidKind::Tangent => (LieAlgebroid::tangent(ctx).with_name(&d.name), Origin::Tangent, None),
                    AlgebroidKind::Explicit { rank, anchor, brackets } => {
                        let anchor = Matrix::from_rows(anchor.clone(), m).ok_or("anchor is not rectangular")?;
                        let raw = LieAlgebroid::new(&d.name, ctx.clone(), *rank, anchor, brackets.clone()).map_err(|e| e.to_string())?;
                        let (checked, report) = raw.validate();
                        (checked, Origin::Declared, Some(report))
                    }
                };
                let n = algebroid.rank();
                let algebroid = Arc::new(algebroid);
                if m == 0 && algebroid.is_valid() {
                    if let Ok(p) = LieAlgebraPresentation::from_algebroid(algebroid.clone()) {
                        presentations.insert(d.name.clone(), p);
                    }
                }
                for (what, c) in [("omega", &d.omega), ("lambda", &d.lambda)] {
                    if c.as_ref().is_some_and(RatFunc::is_zero) {
                        return Err(format!("{what} of `{}` vanishes", d.name));
                    }
                }
                ws.algebroids.push(AlgebroidEntry {
                    name: d.name.clone(),
                    algebroid,
                    origin,
                    report,
                    omega: top_or_one(n, Role::Multivector, &d.omega),
                    omega_declared: d.omega.is_some(),
                    lambda: top_or_one(m, Role::Form, &d.lambda),
                });
            }
            Section::Subalgebra(d) => {
                let basis: Vec<Vec<Rational>> =
                    d.basis.iter().map(|v| v.iter().map(|c| c.as_constant().expect("checked by the parser")).collect()).collect();
                let inclusion = match presentations.get(&d.ambient) {
                    Some(p) if m == 0 => SubalgebraInclusion::new(&d.name, p.clone(), basis).map_err(|e| e.to_string()),
                    _ if m != 0 => Err("subalgebras are supported over a point base".into()),
                    _ => Err(format!("ambient `{}` is not a valid Lie algebra", d.ambient)),
                };
                if let Ok(inc) = &inclusion {
                    let sub = inc.subalgebra().clone();
                    let k = sub.dim();
                    ws.algebroids.push(AlgebroidEntry {
                        name: d.name.clone(),
                        algebroid: sub.algebroid().clone(),
                        origin: Origin::Subalgebra,
                        report: None,
                        omega: GradedElement::top(k, Role::Multivector, RatFunc::one()),
                        omega_declared: false,
                        lambda: GradedElement::scalar(0, Role::Form, RatFunc::one()),
                    });
                    let amb = ws.algebroid(&d.ambient).expect("ambient precedes").omega.clone();
                    ws.morphisms.push(MorphismEntry {
                        name: format!("{}->{}", d.name, d.ambient),
                        phi: inc.morphism(),
                        source: d.name.clone(),
                        target: d.ambient.clone(),
                        origin: MorphismOrigin::Inclusion,
                        omega_source: GradedElement::top(k, Role::Multivector, RatFunc::one()),
                        omega_target: amb,
                        mu: GradedElement::scalar(0, Role::Form, RatFunc::one()),
                        casts: Vec::new(),
                    });
                    presentations.insert(d.name.clone(), sub);
                }
                ws.subalgebras.push(SubalgebraEntry { name: d.name.clone(), ambient: d.ambient.clone(), inclusion });
            }
            Section::Morphism(d) => {
                let source = ws.algebroid(&d.source).ok_or_else(|| format!("`{}` is not a usable algebroid", d.source))?.clone();
                let entry = match &d.kind {
                    MorphismKind::Anchor => MorphismEntry { name: d.name.clone(), ..anchor_entry(&source) },
                    MorphismKind::Identity => MorphismEntry {
                        name: d.name.clone(),
                        phi: BundleMorphism::identity(source.algebroid.clone()),
                        source: source.name.clone(),
                        target: source.name.clone(),
                        origin: MorphismOrigin::Declared,
                        omega_source: source.omega.clone(),
                        omega_target: source.omega.clone(),
                        mu: source.lambda.clone(),
                        casts: Vec::new(),
                    },
                    MorphismKind::Matrix(columns) => {
                        let tname = d.target.as_deref().expect("checked by the parser");
                        let target = ws.algebroid(tname).ok_or_else(|| format!("`{tname}` is not a usable algebroid"))?.clone();
                        let rows = target.algebroid.rank();
                        let cols = source.algebroid.rank();
                        let rows_v: Vec<Vec<RatFunc>> = (0..rows).map(|r| (0..cols).map(|c| columns[c][r].clone()).collect()).collect();
                        let matrix = Matrix::from_rows(rows_v, cols).ok_or("morphism matrix is not rectangular")?;
                        let phi =
                            BundleMorphism::new(source.algebroid.clone(), target.algebroid.clone(), matrix).map_err(|e| e.to_string())?;
                        MorphismEntry {
                            name: d.name.clone(),
                            phi,
                            source: source.name.clone(),
                            target: target.name.clone(),
                            origin: MorphismOrigin::Declared,
                            omega_source: source.omega.clone(),
                            omega_target: target.omega.clone(),
                            mu: source.lambda.clone(),
                            casts: Vec::new(),
                        }
                    }
                };
                ws.morphisms.push(entry);
            }
            Section::Element(d) if d.kind == ElementKind::Cochain => {
                let a = ws.algebroid(&d.on).ok_or_else(|| format!("`{}` is not a usable algebroid", d.on))?;
                let n = a.algebroid.rank();
                let comps = (0..n).map(|i| d.terms.get(&vec![i]).cloned().unwrap_or_else(RatFunc::zero)).collect();
                let c = Cochain1::new(a.algebroid.clone(), comps).map_err(|e| e.to_string())?;
                ws.cochains.push((d.name.clone(), c));
            }
            Section::Element(_) => {}
            Section::Twisted(d) => {
                let a = ws.algebroid(&d.on).ok_or_else(|| format!("`{}` is not a usable algebroid", d.on))?.clone();
                let n = a.algebroid.rank();
                let element = |name: &str, role: Role, degree: usize| -> GradedElement {
                    let decl = file.element(name).expect("checked by the parser");
                    let items = decl.terms.iter().map(|(idx, c)| (crate::exterior::blade_of(idx), c.clone()));
                    GradedElement::from_blades(n, degree, role, items)
                };
                let pi = element(&d.bivector, Role::Multivector, 2);
                let psi = match &d.threeform {
                    Some(t) => element(t, Role::Form, 3),
                    None => GradedElement::zero(n, 3, Role::Form),
                };
                if d.lambda.as_ref().is_some_and(RatFunc::is_zero) {
                    return Err(format!("lambda of `{}` vanishes", d.name));
                }
                let report = check_twisted(a.algebroid.clone(), pi, psi);
                let pushed = report.residual.is_some() && n >= 3;
                let casts = pushed
                    .then(|| format!("psi, a 3-form on {}, read as a 3-vector on {}* for the push-forward through pi-sharp", d.on, d.on))
                    .into_iter()
                    .collect();
                ws.twisted.push(TwistedEntry {
                    name: d.name.clone(),
                    on: d.on.clone(),
                    report,
                    lambda: top_or_one(n, Role::Form, &d.lambda),
                    casts,
                });
            }
        }
    }
    Ok(ws)
}
