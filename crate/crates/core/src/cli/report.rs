//! Check records and their human and machine renderings.

use std::fmt::Write as _;

use crate::conventions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub check: String,
    pub subject: String,
    pub verdict: Verdict,
    pub value: Option<String>,
    pub witness: Option<String>,
}

impl Record {
    pub fn new(check: impl Into<String>, subject: impl Into<String>, verdict: Verdict) -> Self {
        Record { check: check.into(), subject: subject.into(), verdict, value: None, witness: None }
    }

    pub fn pass(check: impl Into<String>, subject: impl Into<String>) -> Self {
        Record::new(check, subject, Verdict::Pass)
    }

    pub fn info(check: impl Into<String>, subject: impl Into<String>) -> Self {
        Record::new(check, subject, Verdict::Info)
    }

    pub fn fail(check: impl Into<String>, subject: impl Into<String>, witness: impl Into<String>) -> Self {
        Record { witness: Some(witness.into()), ..Record::new(check, subject, Verdict::Fail) }
    }

    /// Pass or fail on `ok`; `witness` is only kept on failure.
    pub fn verdict(check: impl Into<String>, subject: impl Into<String>, ok: bool, witness: impl FnOnce() -> String) -> Self {
        if ok {
            Record::pass(check, subject)
        } else {
            Record::fail(check, subject, witness())
        }
    }

    pub fn with_value(mut self, value: impl Into<String>) -> Self {
        self.value = Some(value.into());
        self
    }
}

#[derive(Clone, Debug)]
pub struct FileReport {
    pub label: String,
    pub origin: Option<String>,
    pub records: Vec<Record>,
    /// In corpus mode: this command is expected to find a failing check.
    pub expect_failure: bool,
    pub input_error: Option<String>,
}

impl FileReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.verdict == Verdict::Fail).count()
    }

    pub fn passes(&self) -> usize {
        self.records.iter().filter(|r| r.verdict == Verdict::Pass).count()
    }

    /// Whether the outcome matches the expectation.
    pub fn as_expected(&self) -> bool {
        self.input_error.is_none() && (self.records.is_empty() || (self.failures() > 0) == self.expect_failure)
    }
}

fn quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.:/()*,^+>".contains(c)) {
        return s.to_string();
    }
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn header(command: &str) -> String {
    format!("modclass {command}: convention ledger version {}, sha256 {}", conventions::VERSION, conventions::ledger_hash())
}

pub fn human(command: &str, files: &[FileReport], corpus: bool) -> String {
    let mut out = header(command);
    out.push('\n');
    for f in files {
        let _ = write!(out, "\n{}\n", f.label);
        if let Some(o) = &f.origin {
            let _ = writeln!(out, "  origin: {o}");
        }
        if let Some(e) = &f.input_error {
            let _ = writeln!(out, "  input error: {e}");
            continue;
        }
        if f.records.is_empty() {
            out.push_str("  no applicable sections\n");
            continue;
        }
        for r in &f.records {
            let _ = write!(out, "  {:<4}  {}  {}", r.verdict.as_str(), r.check, r.subject);
            if let Some(v) = &r.value {
                let _ = write!(out, ": {v}");
            }
            out.push('\n');
            if let Some(w) = &r.witness {
                let _ = writeln!(out, "        witness: {w}");
            }
        }
        let _ = writeln!(out, "  {} passed, {} failed", f.passes(), f.failures());
        if corpus && f.expect_failure {
            let seen = if f.failures() > 0 { "observed" } else { "NOT observed" };
            let _ = writeln!(out, "  expected failure for this command: {seen}");
        }
    }
    out
}

pub fn machine(command: &str, files: &[FileReport]) -> String {
    let hash = conventions::ledger_hash();
    let mut out = String::new();
    for f in files {
        let mut fields = |check: &str, subject: &str, verdict: &str, value: Option<&str>, witness: Option<&str>| {
            let _ = write!(
                out,
                "command={command} file={} check={} subject={} verdict={verdict}",
                quote(&f.label),
                quote(check),
                quote(subject)
            );
            if let Some(v) = value {
                let _ = write!(out, " value={}", quote(v));
            }
            if let Some(w) = witness {
                let _ = write!(out, " witness={}", quote(w));
            }
            if let Some(o) = &f.origin {
                let _ = write!(out, " origin={}", quote(o));
            }
            let _ = writeln!(out, " ledger={hash}");
        };
        if let Some(e) = &f.input_error {
            fields("input", &f.label, "error", None, Some(e));
            continue;
        }
        for r in &f.records {
            fields(&r.check, &r.subject, r.verdict.as_str(), r.value.as_deref(), r.witness.as_deref());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(quote("aff1"), "aff1");
        assert_eq!(quote("a b"), "\"a b\"");
        assert_eq!(quote("say \"hi\""), "\"say \\\"hi\\\"\"");
    }

    #[test]
    fn expectation() {
        let mut f = FileReport { label: "x".into(), origin: None, records: vec![], expect_failure: true, input_error: None };
        assert!(f.as_expected());
        f.records.push(Record::pass("c", "s"));
        assert!(!f.as_expected());
        f.records.push(Record::fail("c", "s", "w"));
        assert!(f.as_expected());
        f.expect_failure = false;
        assert!(!f.as_expected());
    }
}
