//! Problem files: line-oriented sectioned text.
//!
//! ```text
//! file     := line*
//! line     := blank | comment | header | entry
//! comment  := '#' any*
//! header   := '[' kind name (('on' | 'in') name)? ']'
//! kind     := 'base' | 'algebroid' | 'morphism' | 'subalgebra'
//!           | 'bivector' | 'threeform' | 'cochain' | 'twisted'
//! entry    := key index? '=' value
//! index    := uint (',' uint)*
//! value    := string (',' string)* | word (',' word)*
//! string   := '"' [^"]* '"'
//! ```
//!
//! Indices are 1-based. Expression strings follow the coefficient grammar.
//!
//! | section | keys |
//! |---|---|
//! | `[base]` | `vars`, `origin`, `fails = command, ...` |
//! | `[algebroid N]` | `tangent = true` or `rank`, `anchor i`, `bracket i,j`; optional `omega`, `lambda` |
//! | `[morphism N]` | `source`, `target`, `kind = anchor \| identity \| matrix`, `column i` |
//! | `[subalgebra N in G]` | `vector i` |
//! | `[bivector N on A]`, `[threeform N on A]` | `term i,j[,k]` |
//! | `[cochain N on E]` | `values` |
//! | `[twisted N on A]` | `bivector`, `threeform`, optional `lambda` |

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::field::{BaseContext, ExprError, RatFunc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ProblemError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ProblemError {
    ProblemError { line, column, message: message.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlgebroidKind {
    Tangent,
    Explicit { rank: usize, anchor: Vec<Vec<RatFunc>>, brackets: BTreeMap<(usize, usize), Vec<RatFunc>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebroidDecl {
    pub name: String,
    pub kind: AlgebroidKind,
    /// Top multivector coefficient; `1` when absent.
    pub omega: Option<RatFunc>,
    /// Base volume coefficient; `1` when absent.
    pub lambda: Option<RatFunc>,
}

impl AlgebroidDecl {
    pub fn rank(&self, base_dim: usize) -> usize {
        match &self.kind {
            AlgebroidKind::Tangent => base_dim,
            AlgebroidKind::Explicit { rank, .. } => *rank,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MorphismKind {
    Anchor,
    Identity,
    Matrix(Vec<Vec<RatFunc>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorphismDecl {
    pub name: String,
    pub source: String,
    pub target: Option<String>,
    pub kind: MorphismKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubalgebraDecl {
    pub name: String,
    pub ambient: String,
    pub basis: Vec<Vec<RatFunc>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    Bivector,
    ThreeForm,
    Cochain,
}

impl ElementKind {
    fn keyword(self) -> &'static str {
        match self {
            ElementKind::Bivector => "bivector",
            ElementKind::ThreeForm => "threeform",
            ElementKind::Cochain => "cochain",
        }
    }

    pub fn degree(self) -> usize {
        match self {
            ElementKind::Bivector => 2,
            ElementKind::ThreeForm => 3,
            ElementKind::Cochain => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementDecl {
    pub name: String,
    pub on: String,
    pub kind: ElementKind,
    /// 0-based sorted indices to coefficient.
    pub terms: BTreeMap<Vec<usize>, RatFunc>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedDecl {
    pub name: String,
    pub on: String,
    pub bivector: String,
    pub threeform: Option<String>,
    pub lambda: Option<RatFunc>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Section {
    Algebroid(AlgebroidDecl),
    Morphism(MorphismDecl),
    Subalgebra(SubalgebraDecl),
    Element(ElementDecl),
    Twisted(TwistedDecl),
}

impl Section {
    pub fn name(&self) -> &str {
        match self {
            Section::Algebroid(d) => &d.name,
            Section::Morphism(d) => &d.name,
            Section::Subalgebra(d) => &d.name,
            Section::Element(d) => &d.name,
            Section::Twisted(d) => &d.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub ctx: BaseContext,
    pub origin: Option<String>,
    /// Commands expected to report at least one failing check on this file.
    pub fails: Vec<String>,
    pub sections: Vec<Section>,
}

impl ProblemFile {
    pub fn algebroids(&self) -> impl Iterator<Item = &AlgebroidDecl> {
        self.sections.iter().filter_map(|s| if let Section::Algebroid(d) = s { Some(d) } else { None })
    }

    pub fn morphisms(&self) -> impl Iterator<Item = &MorphismDecl> {
        self.sections.iter().filter_map(|s| if let Section::Morphism(d) = s { Some(d) } else { None })
    }

    pub fn subalgebras(&self) -> impl Iterator<Item = &SubalgebraDecl> {
        self.sections.iter().filter_map(|s| if let Section::Subalgebra(d) = s { Some(d) } else { None })
    }

    pub fn elements(&self) -> impl Iterator<Item = &ElementDecl> {
        self.sections.iter().filter_map(|s| if let Section::Element(d) = s { Some(d) } else { None })
    }

    pub fn twisted(&self) -> impl Iterator<Item = &TwistedDecl> {
        self.sections.iter().filter_map(|s| if let Section::Twisted(d) = s { Some(d) } else { None })
    }

    pub fn algebroid(&self, name: &str) -> Option<&AlgebroidDecl> {
        self.algebroids().find(|d| d.name == name)
    }

    pub fn subalgebra(&self, name: &str) -> Option<&SubalgebraDecl> {
        self.subalgebras().find(|d| d.name == name)
    }

    pub fn element(&self, name: &str) -> Option<&ElementDecl> {
        self.elements().find(|d| d.name == name)
    }

    /// Rank of a named algebroid or subalgebra.
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        if let Some(a) = self.algebroid(name) {
            return Some(a.rank(self.ctx.dim()));
        }
        self.subalgebra(name).map(|s| s.basis.len())
    }
}

#[derive(Clone, Debug)]
enum Value {
    Strings(Vec<(String, usize)>),
    Words(Vec<(String, usize)>),
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    key: String,
    key_col: usize,
    index: Vec<usize>,
    value: Value,
    value_col: usize,
}

struct RawSection {
    line: usize,
    kind: String,
    name: String,
    relation: Option<String>,
    entries: Vec<Entry>,
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|ch| ch.is_alphabetic() || ch == '_') && c.all(|ch| ch.is_alphanumeric() || ch == '_' || ch == '-')
}

fn parse_header(line_no: usize, text: &str) -> Result<RawSection, ProblemError> {
    let inner = text.trim();
    let body = inner
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| err(line_no, 1, "section header must be enclosed in brackets"))?;
    let words: Vec<&str> = body.split_whitespace().collect();
    let (kind, name, relation) = match words.as_slice() {
        ["base"] => ("base", String::new(), None),
        [kind, name] => (*kind, name.to_string(), None),
        [kind, name, "on" | "in", target] => (*kind, name.to_string(), Some(target.to_string())),
        _ => return Err(err(line_no, 2, format!("malformed section header `{inner}`"))),
    };
    let known = ["base", "algebroid", "morphism", "subalgebra", "bivector", "threeform", "cochain", "twisted"];
    if !known.contains(&kind) {
        return Err(err(line_no, 2, format!("unknown section kind `{kind}`")));
    }
    if kind != "base" && !is_ident(&name) {
        return Err(err(line_no, 2, format!("`{name}` is not a valid name")));
    }
    let needs_relation = matches!(kind, "subalgebra" | "bivector" | "threeform" | "cochain" | "twisted");
    if needs_relation != relation.is_some() {
        return Err(err(
            line_no,
            2,
            format!("section `{kind}` {} a target (`on`/`in`)", if needs_relation { "needs" } else { "takes no" }),
        ));
    }
    Ok(RawSection { line: line_no, kind: kind.to_string(), name, relation, entries: Vec::new() })
}

fn parse_entry(line_no: usize, text: &str) -> Result<Entry, ProblemError> {
    let chars: Vec<char> = text.chars().collect();
    let eq = chars.iter().position(|&c| c == '=').ok_or_else(|| err(line_no, 1, "expected `key = value`"))?;
    let lhs: String = chars[..eq].iter().collect();
    let lead = lhs.len() - lhs.trim_start().len();
    let mut parts = lhs.split_whitespace();
    let key = parts.next().ok_or_else(|| err(line_no, 1, "missing key"))?.to_string();
    let index_text: String = parts.collect::<Vec<_>>().join("");
    let index = if index_text.is_empty() {
        Vec::new()
    } else {
        index_text
            .split(',')
            .map(|s| match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(err(line_no, lead + key.len() + 2, format!("bad index `{index_text}` (1-based integers)"))),
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut i = eq + 1;
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    skip_ws(&mut i);
    let value_col = i + 1;
    if i >= chars.len() {
        return Ok(Entry { line: line_no, key, key_col: lead + 1, index, value: Value::Words(Vec::new()), value_col });
    }
    let value = if chars[i] == '"' {
        let mut items = Vec::new();
        loop {
            skip_ws(&mut i);
            if i >= chars.len() || chars[i] != '"' {
                return Err(err(line_no, i + 1, "expected a quoted expression"));
            }
            let start = i + 1;
            let end = (start..chars.len()).find(|&k| chars[k] == '"').ok_or_else(|| err(line_no, i + 1, "unterminated string"))?;
            items.push((chars[start..end].iter().collect(), start + 1));
            i = end + 1;
            skip_ws(&mut i);
            if i >= chars.len() {
                break;
            }
            if chars[i] != ',' {
                return Err(err(line_no, i + 1, "expected `,` between values"));
            }
            i += 1;
        }
        Value::Strings(items)
    } else {
        let rest: String = chars[i..].iter().collect();
        let mut items = Vec::new();
        let mut col = i + 1;
        for piece in rest.split(',') {
            let t = piece.trim();
            let off = piece.len() - piece.trim_start().len();
            if t.is_empty() {
                return Err(err(line_no, col, "empty value"));
            }
            items.push((t.to_string(), col + off));
            col += piece.chars().count() + 1;
        }
        Value::Words(items)
    };
    Ok(Entry { line: line_no, key, key_col: lead + 1, index, value, value_col })
}

fn lex(text: &str) -> Result<Vec<RawSection>, ProblemError> {
    let mut out: Vec<RawSection> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with('[') {
            out.push(parse_header(line_no, raw)?);
            continue;
        }
        let entry = parse_entry(line_no, raw)?;
        match out.last_mut() {
            Some(s) => s.entries.push(entry),
            None => return Err(err(line_no, 1, "entry before any section header")),
        }
    }
    Ok(out)
}

struct Resolver<'a> {
    ctx: &'a BaseContext,
}

impl Resolver<'_> {
    fn expr(&self, e: &Entry, text: &str, col: usize) -> Result<RatFunc, ProblemError> {
        self.ctx.parse(text).map_err(|x: ExprError| err(e.line, col + x.column() - 1, x.message()))
    }

    fn exprs(&self, e: &Entry) -> Result<Vec<RatFunc>, ProblemError> {
        match &e.value {
            Value::Strings(items) => items.iter().map(|(s, c)| self.expr(e, s, *c)).collect(),
            Value::Words(w) if w.is_empty() => Ok(Vec::new()),
            Value::Words(_) => Err(err(e.line, e.value_col, format!("`{}` expects quoted expressions", e.key))),
        }
    }

    fn single_expr(&self, e: &Entry) -> Result<RatFunc, ProblemError> {
        let v = self.exprs(e)?;
        if v.len() != 1 {
            return Err(err(e.line, e.value_col, format!("`{}` expects one expression", e.key)));
        }
        Ok(v.into_iter().next().unwrap())
    }
}

fn word(e: &Entry) -> Result<String, ProblemError> {
    match &e.value {
        Value::Words(w) if w.len() == 1 => Ok(w[0].0.clone()),
        _ => Err(err(e.line, e.value_col, format!("`{}` expects a single word", e.key))),
    }
}

fn string(e: &Entry) -> Result<String, ProblemError> {
    match &e.value {
        Value::Strings(w) if w.len() == 1 => Ok(w[0].0.clone()),
        _ => Err(err(e.line, e.value_col, format!("`{}` expects a single quoted string", e.key))),
    }
}

fn no_index(e: &Entry) -> Result<(), ProblemError> {
    if e.index.is_empty() {
        Ok(())
    } else {
        Err(err(e.line, e.key_col, format!("`{}` takes no index", e.key)))
    }
}

fn unknown_key(e: &Entry, section: &str) -> ProblemError {
    err(e.line, e.key_col, format!("unknown key `{}` in [{section}]", e.key))
}

fn fill_rows(
    rows: BTreeMap<usize, (Vec<RatFunc>, &Entry)>,
    count: usize,
    width: usize,
    what: &str,
) -> Result<Vec<Vec<RatFunc>>, ProblemError> {
    let mut out = vec![vec![RatFunc::zero(); width]; count];
    for (i, (row, e)) in rows {
        if i >= count {
            return Err(err(e.line, e.key_col, format!("{what} {} out of range 1..={count}", i + 1)));
        }
        if row.len() != width {
            return Err(err(e.line, e.value_col, format!("{what} {} has {} entries, expected {width}", i + 1, row.len())));
        }
        out[i] = row;
    }
    Ok(out)
}

/// Parses and resolves a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    let raw = lex(text)?;
    let base = raw.first().filter(|s| s.kind == "base").ok_or_else(|| err(1, 1, "file must start with a [base] section"))?;
    let mut vars = Vec::new();
    let mut origin = None;
    let mut fails = Vec::new();
    for e in &base.entries {
        no_index(e)?;
        match e.key.as_str() {
            "vars" => {
                vars = match &e.value {
                    Value::Words(w) => w.iter().map(|(s, _)| s.clone()).collect(),
                    Value::Strings(_) => return Err(err(e.line, e.value_col, "variable names are bare words")),
                }
            }
            "origin" => origin = Some(string(e)?),
            "fails" => {
                let Value::Words(w) = &e.value else {
                    return Err(err(e.line, e.value_col, "`fails` lists bare command names"));
                };
                for (cmd, col) in w {
                    if !super::COMMANDS.contains(&cmd.as_str()) {
                        return Err(err(e.line, *col, format!("unknown command `{cmd}`")));
                    }
                    fails.push(cmd.clone());
                }
            }
            _ => return Err(unknown_key(e, "base")),
        }
    }
    let ctx = BaseContext::new(vars).map_err(|x| err(base.line, 1, x.to_string()))?;
    let r = Resolver { ctx: &ctx };
    let mut pf = ProblemFile { ctx: ctx.clone(), origin, fails, sections: Vec::new() };
    for s in &raw[1..] {
        if s.kind == "base" {
            return Err(err(s.line, 1, "duplicate [base] section"));
        }
        if pf.sections.iter().any(|x| x.name() == s.name) {
            return Err(err(s.line, 2, format!("duplicate section name `{}`", s.name)));
        }
        let section = match s.kind.as_str() {
            "algebroid" => Section::Algebroid(algebroid_section(&r, s)?),
            "morphism" => Section::Morphism(morphism_section(&r, s, &pf)?),
            "subalgebra" => Section::Subalgebra(subalgebra_section(&r, s, &pf)?),
            "bivector" | "threeform" | "cochain" => Section::Element(element_section(&r, s, &pf)?),
            "twisted" => Section::Twisted(twisted_section(&r, s, &pf)?),
            _ => unreachable!("kinds checked in the header"),
        };
        pf.sections.push(section);
    }
    Ok(pf)
}

fn algebroid_section(r: &Resolver, s: &RawSection) -> Result<AlgebroidDecl, ProblemError> {
    let mut tangent = false;
    let mut rank = None;
    let mut anchor = BTreeMap::new();
    let mut brackets = BTreeMap::new();
    let mut omega = None;
    let mut lambda = None;
    for e in &s.entries {
        match e.key.as_str() {
            "tangent" => {
                no_index(e)?;
                tangent = match word(e)?.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(err(e.line, e.value_col, "`tangent` is `true` or `false`")),
                };
            }
            "rank" => {
                no_index(e)?;
                rank = Some(word(e)?.parse::<usize>().map_err(|_| err(e.line, e.value_col, "rank must be a nonnegative integer"))?);
            }
            "anchor" => {
                if e.index.len() != 1 {
                    return Err(err(e.line, e.key_col, "`anchor` takes one index"));
                }
                anchor.insert(e.index[0], (r.exprs(e)?, e));
            }
            "bracket" => {
                if e.index.len() != 2 || e.index[0] >= e.index[1] {
                    return Err(err(e.line, e.key_col, "`bracket i,j` needs i < j"));
                }
                brackets.insert((e.index[0], e.index[1]), (r.exprs(e)?, e));
            }
            "omega" => {
                no_index(e)?;
                omega = Some(r.single_expr(e)?);
            }
            "lambda" => {
                no_index(e)?;
                lambda = Some(r.single_expr(e)?);
            }
            _ => return Err(unknown_key(e, "algebroid")),
        }
    }
    let kind = if tangent {
        if rank.is_some() || !anchor.is_empty() || !brackets.is_empty() {
            return Err(err(s.line, 1, "a tangent algebroid takes no rank, anchor or bracket entries"));
        }
        AlgebroidKind::Tangent
    } else {
        let n = rank.ok_or_else(|| err(s.line, 1, format!("algebroid `{}` needs `rank` or `tangent = true`", s.name)))?;
        let m = r.ctx.dim();
        let anchor = fill_rows(anchor, n, m, "anchor row")?;
        let mut out = BTreeMap::new();
        for ((i, j), (row, e)) in brackets {
            if j >= n {
                return Err(err(e.line, e.key_col, format!("bracket index out of range 1..={n}")));
            }
            if row.len() != n {
                return Err(err(e.line, e.value_col, format!("bracket {},{} has {} entries, expected {n}", i + 1, j + 1, row.len())));
            }
            out.insert((i, j), row);
        }
        AlgebroidKind::Explicit { rank: n, anchor, brackets: out }
    };
    Ok(AlgebroidDecl { name: s.name.clone(), kind, omega, lambda })
}

fn require_rank(pf: &ProblemFile, name: &str, e: &Entry) -> Result<usize, ProblemError> {
    pf.rank_of(name).ok_or_else(|| err(e.line, e.value_col, format!("unknown algebroid `{name}`")))
}

fn morphism_section(r: &Resolver, s: &RawSection, pf: &ProblemFile) -> Result<MorphismDecl, ProblemError> {
    let mut source = None;
    let mut target = None;
    let mut kind_word = None;
    let mut columns = BTreeMap::new();
    for e in &s.entries {
        match e.key.as_str() {
            "source" => {
                no_index(e)?;
                let w = word(e)?;
                require_rank(pf, &w, e)?;
                source = Some((w, e));
            }
            "target" => {
                no_index(e)?;
                let w = word(e)?;
                require_rank(pf, &w, e)?;
                target = Some((w, e));
            }
            "kind" => {
                no_index(e)?;
                kind_word = Some((word(e)?, e));
            }
            "column" => {
                if e.index.len() != 1 {
                    return Err(err(e.line, e.key_col, "`column` takes one index"));
                }
                columns.insert(e.index[0], (r.exprs(e)?, e));
            }
            _ => return Err(unknown_key(e, "morphism")),
        }
    }
    let (source, se) = source.ok_or_else(|| err(s.line, 1, format!("morphism `{}` needs a source", s.name)))?;
    let (kw, ke) = kind_word.unwrap_or_else(|| ("matrix".to_string(), se));
    let kind = match kw.as_str() {
        "anchor" | "identity" => {
            if !columns.is_empty() {
                return Err(err(s.line, 1, format!("`kind = {kw}` takes no columns")));
            }
            if kw == "anchor" {
                if let Some((_, te)) = &target {
                    return Err(err(te.line, te.key_col, "an anchor morphism targets the tangent algebroid implicitly"));
                }
                MorphismKind::Anchor
            } else {
                if let Some((t, te)) = &target {
                    if *t != source {
                        return Err(err(te.line, te.value_col, "an identity morphism has target = source"));
                    }
                }
                MorphismKind::Identity
            }
        }
        "matrix" => {
            let (t, te) = target.as_ref().ok_or_else(|| err(s.line, 1, format!("morphism `{}` needs a target", s.name)))?;
            let rows = require_rank(pf, t, te)?;
            let cols = require_rank(pf, &source, se)?;
            MorphismKind::Matrix(fill_rows(columns, cols, rows, "column")?)
        }
        other => return Err(err(ke.line, ke.value_col, format!("unknown morphism kind `{other}`"))),
    };
    let target = match kind {
        MorphismKind::Matrix(_) => target.map(|t| t.0),
        _ => None,
    };
    Ok(MorphismDecl { name: s.name.clone(), source, target, kind })
}

fn subalgebra_section(r: &Resolver, s: &RawSection, pf: &ProblemFile) -> Result<SubalgebraDecl, ProblemError> {
    let ambient = s.relation.clone().expect("checked");
    let n = pf.rank_of(&ambient).ok_or_else(|| err(s.line, 2, format!("unknown algebra `{ambient}`")))?;
    let mut vectors = BTreeMap::new();
    for e in &s.entries {
        match e.key.as_str() {
            "vector" => {
                if e.index.len() != 1 {
                    return Err(err(e.line, e.key_col, "`vector` takes one index"));
                }
                let v = r.exprs(e)?;
                if let Some(bad) = v.iter().position(|c| c.as_constant().is_none()) {
                    return Err(err(e.line, e.value_col, format!("entry {} of a subalgebra vector must be a rational number", bad + 1)));
                }
                vectors.insert(e.index[0], (v, e));
            }
            _ => return Err(unknown_key(e, "subalgebra")),
        }
    }
    let k = vectors.len();
    if vectors.keys().copied().ne(0..k) {
        return Err(err(s.line, 1, "subalgebra vectors must be numbered 1..k without gaps"));
    }
    let basis = fill_rows(vectors, k, n, "vector")?;
    Ok(SubalgebraDecl { name: s.name.clone(), ambient, basis })
}

fn element_section(r: &Resolver, s: &RawSection, pf: &ProblemFile) -> Result<ElementDecl, ProblemError> {
    let on = s.relation.clone().expect("checked");
    let n = pf.rank_of(&on).ok_or_else(|| err(s.line, 2, format!("unknown algebroid `{on}`")))?;
    let kind = match s.kind.as_str() {
        "bivector" => ElementKind::Bivector,
        "threeform" => ElementKind::ThreeForm,
        _ => ElementKind::Cochain,
    };
    let mut terms = BTreeMap::new();
    for e in &s.entries {
        match (kind, e.key.as_str()) {
            (ElementKind::Cochain, "values") => {
                no_index(e)?;
                let v = r.exprs(e)?;
                if v.len() != n {
                    return Err(err(e.line, e.value_col, format!("cochain has {} values, expected {n}", v.len())));
                }
                for (i, c) in v.into_iter().enumerate() {
                    if !c.is_zero() {
                        terms.insert(vec![i], c);
                    }
                }
            }
            (ElementKind::Bivector | ElementKind::ThreeForm, "term") => {
                let d = kind.degree();
                if e.index.len() != d || e.index.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(err(e.line, e.key_col, format!("`term` takes {d} increasing indices")));
                }
                if e.index.iter().any(|&i| i >= n) {
                    return Err(err(e.line, e.key_col, format!("term index out of range 1..={n}")));
                }
                let c = r.single_expr(e)?;
                if terms.insert(e.index.clone(), c).is_some() {
                    return Err(err(e.line, e.key_col, "duplicate term"));
                }
            }
            _ => return Err(unknown_key(e, kind.keyword())),
        }
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(ElementDecl { name: s.name.clone(), on, kind, terms })
}

fn twisted_section(r: &Resolver, s: &RawSection, pf: &ProblemFile) -> Result<TwistedDecl, ProblemError> {
    let on = s.relation.clone().expect("checked");
    if pf.algebroid(&on).is_none() {
        return Err(err(s.line, 2, format!("unknown algebroid `{on}`")));
    }
    let mut bivector = None;
    let mut threeform = None;
    let mut lambda = None;
    for e in &s.entries {
        no_index(e)?;
        match e.key.as_str() {
            "bivector" | "threeform" => {
                let w = word(e)?;
                let el = pf.element(&w).ok_or_else(|| err(e.line, e.value_col, format!("unknown element `{w}`")))?;
                let want = if e.key == "bivector" { ElementKind::Bivector } else { ElementKind::ThreeForm };
                if el.kind != want || el.on != on {
                    return Err(err(e.line, e.value_col, format!("`{w}` is not a {} on `{on}`", want.keyword())));
                }
                if want == ElementKind::Bivector {
                    bivector = Some(w);
                } else {
                    threeform = Some(w);
                }
            }
            "lambda" => lambda = Some(r.single_expr(e)?),
            _ => return Err(unknown_key(e, "twisted")),
        }
    }
    let bivector = bivector.ok_or_else(|| err(s.line, 1, format!("twisted `{}` needs a bivector", s.name)))?;
    Ok(TwistedDecl { name: s.name.clone(), on, bivector, threeform, lambda })
}

fn quote_list(items: &[RatFunc], ctx: &BaseContext) -> String {
    items.iter().map(|c| format!("\"{}\"", c.display(ctx))).collect::<Vec<_>>().join(", ")
}

fn one_based(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// Canonical text of a problem file; `parse_problem(render(p)) == p`.
pub fn render(pf: &ProblemFile) -> String {
    let ctx = &pf.ctx;
    let mut out = String::new();
    out.push_str("[base]\n");
    let _ = writeln!(out, "vars = {}", ctx.vars().join(", "));
    if let Some(o) = &pf.origin {
        let _ = writeln!(out, "origin = \"{o}\"");
    }
    if !pf.fails.is_empty() {
        let _ = writeln!(out, "fails = {}", pf.fails.join(", "));
    }
    for s in &pf.sections {
        out.push('\n');
        match s {
            Section::Algebroid(d) => {
                let _ = writeln!(out, "[algebroid {}]", d.name);
                match &d.kind {
                    AlgebroidKind::Tangent => out.push_str("tangent = true\n"),
                    AlgebroidKind::Explicit { rank, anchor, brackets } => {
                        let _ = writeln!(out, "rank = {rank}");
                        if ctx.dim() > 0 {
                            for (i, row) in anchor.iter().enumerate() {
                                if row.iter().any(|c| !c.is_zero()) {
                                    let _ = writeln!(out, "anchor {} = {}", i + 1, quote_list(row, ctx));
                                }
                            }
                        }
                        for ((i, j), row) in brackets {
                            if row.iter().any(|c| !c.is_zero()) {
                                let _ = writeln!(out, "bracket {},{} = {}", i + 1, j + 1, quote_list(row, ctx));
                            }
                        }
                    }
                }
                if let Some(w) = &d.omega {
                    let _ = writeln!(out, "omega = \"{}\"", w.display(ctx));
                }
                if let Some(l) = &d.lambda {
                    let _ = writeln!(out, "lambda = \"{}\"", l.display(ctx));
                }
            }
            Section::Morphism(d) => {
                let _ = writeln!(out, "[morphism {}]", d.name);
                let _ = writeln!(out, "source = {}", d.source);
                match &d.kind {
                    MorphismKind::Anchor => out.push_str("kind = anchor\n"),
                    MorphismKind::Identity => out.push_str("kind = identity\n"),
                    MorphismKind::Matrix(cols) => {
                        let _ = writeln!(out, "target = {}", d.target.as_deref().unwrap_or(""));
                        out.push_str("kind = matrix\n");
                        for (i, c) in cols.iter().enumerate() {
                            if c.iter().any(|x| !x.is_zero()) {
                                let _ = writeln!(out, "column {} = {}", i + 1, quote_list(c, ctx));
                            }
                        }
                    }
                }
            }
            Section::Subalgebra(d) => {
                let _ = writeln!(out, "[subalgebra {} in {}]", d.name, d.ambient);
                for (i, v) in d.basis.iter().enumerate() {
                    let _ = writeln!(out, "vector {} = {}", i + 1, quote_list(v, ctx));
                }
            }
            Section::Element(d) => {
                let _ = writeln!(out, "[{} {} on {}]", d.kind.keyword(), d.name, d.on);
                if d.kind == ElementKind::Cochain {
                    let n = pf.rank_of(&d.on).unwrap_or(0);
                    let vals: Vec<RatFunc> = (0..n).map(|i| d.terms.get(&vec![i]).cloned().unwrap_or_else(RatFunc::zero)).collect();
                    let _ = writeln!(out, "values = {}", quote_list(&vals, ctx));
                } else {
                    for (idx, c) in &d.terms {
                        let _ = writeln!(out, "term {} = \"{}\"", one_based(idx), c.display(ctx));
                    }
                }
            }
            Section::Twisted(d) => {
                let _ = writeln!(out, "[twisted {} on {}]", d.name, d.on);
                let _ = writeln!(out, "bivector = {}", d.bivector);
                if let Some(t) = &d.threeform {
                    let _ = writeln!(out, "threeform = {t}");
                }
                if let Some(l) = &d.lambda {
                    let _ = writeln!(out, "lambda = \"{}\"", l.display(ctx));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_tangent_file() {
        let pf = parse_problem("[base]\nvars = x, y\n\n[algebroid TM]\ntangent = true\n").unwrap();
        assert_eq!(pf.ctx.dim(), 2);
        assert_eq!(pf.algebroids().count(), 1);
        assert_eq!(parse_problem(&render(&pf)).unwrap(), pf);
    }

    #[test]
    fn undeclared_variable_is_positioned() {
        let text = "[base]\nvars = x, y\n[algebroid E]\nrank = 1\nanchor 1 = \"x\", \"z + 1\"\n";
        let e = parse_problem(text).unwrap_err();
        assert_eq!((e.line, e.column), (5, 18));
        assert!(e.message.contains("unknown variable `z`"), "{e}");
    }

    #[test]
    fn dimension_errors() {
        let text = "[base]\nvars = x\n[algebroid E]\nrank = 2\nbracket 1,2 = \"0\"\n";
        let e = parse_problem(text).unwrap_err();
        assert!(e.message.contains("expected 2"), "{e}");
        let text = "[base]\nvars = x\n[morphism f]\nsource = E\n";
        assert!(parse_problem(text).unwrap_err().message.contains("unknown algebroid"));
        assert!(parse_problem("[algebroid E]\n").is_err());
    }

    #[test]
    fn point_base_and_empty_vars() {
        let text = "[base]\nvars =\n[algebroid g]\nrank = 2\nbracket 1,2 = \"0\", \"1\"\n";
        let pf = parse_problem(text).unwrap();
        assert_eq!(pf.ctx.dim(), 0);
        assert_eq!(parse_problem(&render(&pf)).unwrap(), pf);
    }
}
