//! The checks behind each subcommand.

use crate::algebroid::Validation;
use crate::cohomology::{exactness_search, is_cocycle, ExactnessStatus};
use crate::exterior::GradedElement;
use crate::field::{BaseContext, RatFunc};
use crate::lie_algebra::{
    h1_class, invariant_measure_obstruction, modular_character, modular_character_via_section, LieAlgebraPresentation,
};
use crate::modular::{
    characteristic_section, log_differential, modular_section, normalized_dual, pull_back, relative_modular_section,
    relative_modular_section_by_difference, rep_flatness_check, Cochain1, LineRep,
};
use crate::morphism::{is_morphism, MorphismFailure};
use crate::twisted::{verify_modular_data, TwistedFailure};

use super::report::Record;
use super::workspace::{MorphismEntry, MorphismOrigin, Origin, TwistedEntry, Workspace};

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub degree_bound: u32,
    pub trials: usize,
}

pub fn run_command(command: &str, ws: &Workspace, opts: &Options) -> Vec<Record> {
    match command {
        "validate" => validate(ws),
        "modular" => modular(ws),
        "relative-modular" => relative(ws),
        "rep-check" => rep_check(ws, opts),
        "twisted-check" => twisted_check(ws),
        "theorem41" => modular_data(ws),
        "lie-algebra" => lie_algebra(ws),
        "cohomology" => cohomology(ws, opts),
        other => unreachable!("unknown command {other}"),
    }
}

fn tuple(c: &[RatFunc], ctx: &BaseContext) -> String {
    let parts: Vec<String> = c.iter().map(|f| f.display(ctx).to_string()).collect();
    format!("({})", parts.join(", "))
}

fn cochain(c: &Cochain1) -> String {
    tuple(c.components(), c.algebroid().ctx())
}

fn element(e: &GradedElement, ctx: &BaseContext) -> String {
    e.display(ctx).to_string()
}

fn morphism_failure(f: &MorphismFailure, ctx: &BaseContext) -> String {
    match f {
        MorphismFailure::InvalidEndpoint(name) => format!("endpoint `{name}` is not a valid algebroid"),
        MorphismFailure::Anchor { i, residual } => {
            format!("anchor not intertwined on e{}: residual {}", i + 1, tuple(residual, ctx))
        }
        MorphismFailure::ChainMap { a, residual } => {
            format!("pull-back does not commute with d on E{}: residual {}", a + 1, element(residual, ctx))
        }
    }
}

fn twisted_failure(f: &TwistedFailure, ctx: &BaseContext) -> String {
    match f {
        TwistedFailure::InvalidBase(name) => format!("`{name}` is not a valid algebroid"),
        TwistedFailure::Shape(s) => s.clone(),
        TwistedFailure::NotClosed { d_psi } => format!("psi is not closed: d psi = {}", element(d_psi, ctx)),
        TwistedFailure::Residual { residual } => {
            format!("1/2 [pi, pi] - wedge3(pi-sharp) psi = {}", element(residual, ctx))
        }
    }
}

fn validate(ws: &Workspace) -> Vec<Record> {
    let ctx = &ws.file.ctx;
    let mut out = Vec::new();
    for a in &ws.algebroids {
        match (a.origin, &a.report) {
            (Origin::Tangent, _) => out.push(Record::pass("algebroid", &a.name).with_value("tangent bundle")),
            (Origin::Declared, Some(r)) => {
                let rec = match &r.validation {
                    Validation::Valid => Record::pass("algebroid", &a.name),
                    Validation::Invalid(w) => Record::fail("algebroid", &a.name, w.describe(ctx)),
                    Validation::Unchecked => Record::fail("algebroid", &a.name, "not validated"),
                };
                out.push(rec.with_value(format!(
                    "rank {}, {} frame pairs, {} frame triples, {} random spot checks",
                    a.algebroid.rank(),
                    r.frame_pairs,
                    r.frame_triples,
                    r.spot_checks
                )));
            }
            _ => {}
        }
    }
    for s in &ws.subalgebras {
        out.push(match &s.inclusion {
            Ok(inc) => {
                Record::pass("subalgebra", &s.name).with_value(format!("dimension {} in {}, closed", inc.subalgebra().dim(), s.ambient))
            }
            Err(e) => Record::fail("subalgebra", &s.name, e.clone()),
        });
    }
    for m in &ws.morphisms {
        let r = is_morphism(&m.phi);
        out.push(Record::verdict("morphism", &m.name, r.passes(), || morphism_failure(r.failure.as_ref().expect("failed"), ctx)));
    }
    for t in &ws.twisted {
        out.push(twisted_record(t, ctx));
    }
    out
}

fn twisted_record(t: &TwistedEntry, ctx: &BaseContext) -> Record {
    let r = &t.report;
    match &r.failure {
        None => Record::pass("twisted-structure", &t.name).with_value("d psi = 0 and 1/2 [pi, pi] = wedge3(pi-sharp) psi"),
        Some(f) => Record::fail("twisted-structure", &t.name, twisted_failure(f, ctx)),
    }
}

fn modular(ws: &Workspace) -> Vec<Record> {
    let mut out = Vec::new();
    for a in &ws.algebroids {
        let e = &a.algebroid;
        let xi = match modular_section(e, &a.omega, &a.lambda) {
            Ok(xi) => xi,
            Err(err) => {
                out.push(Record::fail("modular-section", &a.name, err.to_string()));
                continue;
            }
        };
        out.push(Record::pass("modular-section", &a.name).with_value(format!("xi = {}, d xi = 0", cochain(&xi))));
        if a.omega_declared {
            let g = a.omega.top_coefficient().expect("top");
            let unit = GradedElement::top(e.rank(), crate::exterior::Role::Multivector, RatFunc::one());
            let base = modular_section(e, &unit, &a.lambda).expect("valid algebroid");
            let shift = xi.sub(&base).expect("same algebroid");
            let expected = log_differential(e, &g).expect("nonzero");
            out.push(
                Record::verdict("rescaling", &a.name, shift == expected, || {
                    format!("xi(g omega) - xi(omega) = {}, (1/g) d g = {}", cochain(&shift), cochain(&expected))
                })
                .with_value(format!("g = {}", g.display(e.ctx()))),
            );
        }
    }
    out
}

fn rel_of(m: &MorphismEntry) -> Result<Cochain1, String> {
    relative_modular_section(&m.phi, &m.omega_source, &m.omega_target).map_err(|e| e.to_string())
}

fn relative(ws: &Workspace) -> Vec<Record> {
    let mut out = Vec::new();
    let mut entries: Vec<MorphismEntry> = ws.morphisms.clone();
    entries.extend(ws.anchors(false));
    for m in &entries {
        let eta = match rel_of(m) {
            Ok(eta) => eta,
            Err(e) => {
                out.push(Record::fail("relative-modular-section", &m.name, e));
                continue;
            }
        };
        out.push(Record::pass("relative-modular-section", &m.name).with_value(format!("eta = {}, d eta = 0", cochain(&eta))));
        match relative_modular_section_by_difference(&m.phi, &m.omega_source, &m.omega_target, &m.mu) {
            Ok(diff) => out.push(Record::verdict("relative-by-difference", &m.name, diff == eta, || {
                format!("direct {} vs difference {}", cochain(&eta), cochain(&diff))
            })),
            Err(e) => out.push(Record::fail("relative-by-difference", &m.name, e.to_string())),
        }
        if m.origin == MorphismOrigin::Anchor {
            let a = ws.algebroid(&m.source).expect("anchor of a known algebroid");
            match modular_section(&a.algebroid, &a.omega, &a.lambda) {
                Ok(xi) => out.push(Record::verdict("relative-equals-absolute", &m.name, xi == eta, || {
                    format!("relative {} vs absolute {}", cochain(&eta), cochain(&xi))
                })),
                Err(e) => out.push(Record::fail("relative-equals-absolute", &m.name, e.to_string())),
            }
        }
    }
    for f in entries.iter().filter(|f| f.origin != MorphismOrigin::Anchor) {
        for g in entries.iter().filter(|g| g.source == f.target) {
            let subject = format!("{} then {}", f.name, g.name);
            let Ok(gf) = f.phi.then(&g.phi) else { continue };
            let lhs = relative_modular_section(&gf, &f.omega_source, &g.omega_target);
            let rhs = rel_of(f).and_then(|a| {
                let b = rel_of(g)?;
                let pulled = pull_back(&f.phi, &b).map_err(|e| e.to_string())?;
                a.add(&pulled).map_err(|e| e.to_string())
            });
            out.push(match (lhs, rhs) {
                (Ok(l), Ok(r)) => Record::verdict("telescoping", &subject, l == r, || {
                    format!("eta(g f) = {}, eta(f) + f* eta(g) = {}", cochain(&l), cochain(&r))
                })
                .with_value(format!("eta = {}", cochain(&l))),
                (Err(e), _) => Record::fail("telescoping", &subject, e.to_string()),
                (_, Err(e)) => Record::fail("telescoping", &subject, e),
            });
        }
    }
    out
}

fn rep_check(ws: &Workspace, opts: &Options) -> Vec<Record> {
    let mut out = Vec::new();
    let mut entries: Vec<MorphismEntry> = ws.morphisms.clone();
    entries.extend(ws.anchors(true));
    for s in ws.sharps() {
        match s {
            Ok(m) => entries.push(m),
            Err((name, e)) => out.push(Record::fail("flatness", name, e)),
        }
    }
    for m in &entries {
        let ctx = m.phi.source().ctx();
        for c in &m.casts {
            out.push(Record::info("role-cast", &m.name).with_value(c.clone()));
        }
        let rep = LineRep::new(m.phi.clone());
        let fr = rep_flatness_check(&rep, opts.trials);
        out.push(
            Record::verdict("flatness", &m.name, fr.passes(), || {
                let f = fr.failure.as_ref().expect("failed");
                let at = match f.frame {
                    Some((i, j)) if i == j => format!(" at e{}", i + 1),
                    Some((i, j)) => format!(" at (e{}, e{})", i + 1, j + 1),
                    None => " on random sections".into(),
                };
                format!("{} fails{at}: residual {}", f.condition, f.residual.display(ctx))
            })
            .with_value(format!("(a), (b), (c) on {} frame cases and {} random trials", fr.frame_cases, fr.random_trials)),
        );
        let theta = normalized_dual(&m.omega_target)
            .and_then(|nu| rep.section(&m.omega_source, &nu))
            .and_then(|s| characteristic_section(&rep, &s))
            .map_err(|e| e.to_string());
        let eta = rel_of(m);
        out.push(match (theta, eta) {
            (Ok(t), Ok(e)) => Record::verdict("characteristic-equals-relative", &m.name, t == e, || {
                format!("characteristic {} vs relative {}", cochain(&t), cochain(&e))
            })
            .with_value(format!("theta = {}", cochain(&t))),
            (Err(e), _) | (_, Err(e)) => Record::fail("characteristic-equals-relative", &m.name, e),
        });
    }
    out
}

fn casts(t: &TwistedEntry) -> impl Iterator<Item = Record> + '_ {
    t.casts.iter().map(|c| Record::info("role-cast", &t.name).with_value(c.clone()))
}

fn twisted_check(ws: &Workspace) -> Vec<Record> {
    let ctx = &ws.file.ctx;
    let mut out = Vec::new();
    for t in &ws.twisted {
        out.extend(casts(t));
        out.push(twisted_record(t, ctx));
        if !t.report.is_valid() {
            continue;
        }
        let s = &t.report.structure;
        out.push(match s.cotangent() {
            Ok(cot) => Record::pass("cotangent-algebroid", &t.name).with_value(format!("rank {}, valid", cot.rank())),
            Err(e) => Record::fail("cotangent-algebroid", &t.name, e.to_string()),
        });
        out.push(match s.sharp_morphism() {
            Ok(_) => Record::pass("sharp-morphism", &t.name),
            Err(e) => Record::fail("sharp-morphism", &t.name, e.to_string()),
        });
    }
    out
}

fn modular_data(ws: &Workspace) -> Vec<Record> {
    let ctx = &ws.file.ctx;
    let mut out = Vec::new();
    for t in &ws.twisted {
        out.extend(casts(t));
        if let Some(f) = &t.report.failure {
            out.push(Record::fail("w-equals-2z", &t.name, format!("not a twisted structure: {}", twisted_failure(f, ctx))));
            continue;
        }
        let r = match verify_modular_data(&t.report.structure, &t.lambda) {
            Ok(r) => r,
            Err(e) => {
                out.push(Record::fail("w-equals-2z", &t.name, e.to_string()));
                continue;
            }
        };
        for c in &r.casts {
            out.push(Record::info("role-cast", &t.name).with_value(c.clone()));
        }
        let (x, y, z) = (element(&r.x, ctx), element(&r.y, ctx), element(&r.z, ctx));
        out.push(Record::info("sections", &t.name).with_value(format!("W = {}, X = {x}, Y = {y}, Z = {z}", cochain(&r.w))));
        out.push(Record::verdict("w-equals-2z", &t.name, r.w_equals_2z, || format!("W = {}, Z = {z}", cochain(&r.w))));
        out.push(Record::verdict("w-equals-relative-of-sharp", &t.name, r.w_matches_relative, || {
            "W differs from the relative modular section of pi-sharp".into()
        }));
        out.push(Record::verdict("w-equals-difference", &t.name, r.w_equals_difference, || {
            format!("W = {}, xi(A*) - sharp* xi(A) = {}", cochain(&r.w), cochain(&r.difference))
        }));
        if let Some(ok) = r.tangent_case {
            out.push(Record::verdict("tangent-specialisation", &t.name, ok, || "W differs from xi(T*M)".into()));
        }
        out.push(Record::verdict("square-identity", &t.name, r.square_identity, || "nonzero coefficient residual".into()));
        out.push(Record::verdict("generator-relation", &t.name, r.generator_relation, || "nonzero coefficient residual".into()));
        if !t.report.structure.psi().is_zero() {
            out.push(
                Record::verdict("twist-engaged", &t.name, !r.y.is_zero(), || "psi is nonzero but Y = 0".into())
                    .with_value(format!("Y = {y}")),
            );
        }
    }
    out
}

fn lie_algebra(ws: &Workspace) -> Vec<Record> {
    let mut out = Vec::new();
    if ws.file.ctx.dim() == 0 {
        for a in ws.algebroids.iter().filter(|a| a.origin == Origin::Declared) {
            let p = match LieAlgebraPresentation::from_algebroid(a.algebroid.clone()) {
                Ok(p) => p,
                Err(e) => {
                    out.push(Record::fail("modular-character", &a.name, e.to_string()));
                    continue;
                }
            };
            let chi = modular_character(&p);
            let rec = match modular_character_via_section(&p) {
                Ok(via) => Record::verdict("modular-character", &a.name, via == chi, || {
                    format!("trace {} vs modular section {}", cochain(&chi), cochain(&via))
                }),
                Err(e) => Record::fail("modular-character", &a.name, e.to_string()),
            };
            out.push(rec.with_value(format!("chi = {}", cochain(&chi))));
            match h1_class(&p, &chi) {
                Ok(h) => out.push(Record::info("unimodular", &a.name).with_value(format!(
                    "{} (derived algebra of dimension {})",
                    if h.class_zero { "yes" } else { "no" },
                    h.derived_dim
                ))),
                Err(e) => out.push(Record::fail("unimodular", &a.name, e.to_string())),
            }
        }
    }
    for s in &ws.subalgebras {
        let inc = match &s.inclusion {
            Ok(inc) => inc,
            Err(e) => {
                out.push(Record::fail("invariant-measure", &s.name, e.clone()));
                continue;
            }
        };
        let subject = format!("{} in {}", s.name, s.ambient);
        out.push(match invariant_measure_obstruction(inc) {
            Ok(obs) => Record::verdict("invariant-measure", &subject, obs.cross_checked(), || {
                format!("trace route {} vs section route {}", cochain(&obs.relative), cochain(&obs.via_section))
            })
            .with_value(format!("obstruction {}; {}", cochain(&obs.relative), obs.verdict)),
            Err(e) => Record::fail("invariant-measure", &subject, e.to_string()),
        });
    }
    out
}

fn exactness(e: &std::sync::Arc<crate::algebroid::LieAlgebroid>, xi: &Cochain1, bound: u32) -> String {
    match exactness_search(e, xi, bound) {
        Ok(v) => match &v.status {
            ExactnessStatus::Exact { primitive } => format!("class zero: = d({})", primitive.display(e.ctx())),
            _ => v.to_string(),
        },
        Err(err) => err.to_string(),
    }
}

fn cocycle_record(subject: &str, xi: &Cochain1) -> Record {
    let e = xi.algebroid();
    let rec = match is_cocycle(e, xi) {
        Ok(chk) => Record::verdict("cocycle", subject, chk.is_cocycle, || format!("d = {}", element(&chk.residual, e.ctx()))),
        Err(err) => Record::fail("cocycle", subject, err.to_string()),
    };
    rec.with_value(cochain(xi))
}

fn cohomology(ws: &Workspace, opts: &Options) -> Vec<Record> {
    let mut out = Vec::new();
    for (name, c) in &ws.cochains {
        let e = c.algebroid();
        match is_cocycle(e, c) {
            Ok(chk) => {
                let rec = Record::verdict("cocycle", name, chk.is_cocycle, || format!("d xi = {}", element(&chk.residual, e.ctx())));
                let rec = rec.with_value(format!("xi = {}", cochain(c)));
                out.push(rec);
                if chk.is_cocycle {
                    out.push(Record::info("class", name).with_value(exactness(e, c, opts.degree_bound)));
                }
            }
            Err(err) => out.push(Record::fail("cocycle", name, err.to_string())),
        }
    }
    for a in &ws.algebroids {
        let subject = format!("xi({})", a.name);
        match modular_section(&a.algebroid, &a.omega, &a.lambda) {
            Ok(xi) => {
                out.push(cocycle_record(&subject, &xi));
                out.push(Record::info("class", &subject).with_value(exactness(&a.algebroid, &xi, opts.degree_bound)));
            }
            Err(e) => out.push(Record::fail("cocycle", &subject, e.to_string())),
        }
    }
    let mut entries: Vec<MorphismEntry> = ws.morphisms.clone();
    entries.extend(ws.anchors(false));
    for m in &entries {
        let subject = format!("eta({})", m.name);
        match rel_of(m) {
            Ok(eta) => {
                out.push(cocycle_record(&subject, &eta));
                out.push(Record::info("class", &subject).with_value(exactness(m.phi.source(), &eta, opts.degree_bound)));
            }
            Err(e) => out.push(Record::fail("cocycle", &subject, e)),
        }
    }
    out
}
