use std::path::PathBuf;
use std::process::{Command, Output};

use modclass::cli::problem::{parse_problem, render};
use modclass::cli::{corpus_file, COMMANDS, CORPUS};

fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn modclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modclass")).args(args).output().expect("binary runs")
}

fn status(args: &[&str]) -> i32 {
    modclass(args).status.code().expect("exit code")
}

fn file_arg(name: &str) -> String {
    corpus_path(name).display().to_string()
}

#[test]
fn every_command_matches_corpus_expectations() {
    for c in COMMANDS {
        let out = modclass(&[c, "--corpus"]);
        assert_eq!(out.status.code(), Some(0), "{c}:\n{}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn single_file_exit_codes() {
    assert_eq!(status(&["validate", &file_arg("aff1.alg")]), 0);
    assert_eq!(status(&["validate", &file_arg("broken.alg")]), 1);
    assert_eq!(status(&["rep-check", &file_arg("corrupted-rep.alg")]), 1);
    assert_eq!(status(&["twisted-check", &file_arg("twisted-nonclosed.alg")]), 1);
    assert_eq!(status(&["theorem41", &file_arg("twisted-r4.alg")]), 0);
    assert_eq!(status(&["validate", "/nonexistent/file.alg"]), 2);
    assert_eq!(status(&["no-such-command", &file_arg("aff1.alg")]), 2);
}

#[test]
fn borel_has_no_invariant_measure() {
    let out = modclass(&["lie-algebra", &file_arg("borel-sl2.alg")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("(2, 0)"), "{text}");
    assert!(text.contains("no invariant measure"), "{text}");
}

#[test]
fn malformed_input_is_positioned() {
    let dir = std::env::temp_dir().join(format!("modclass-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.alg");
    std::fs::write(&path, "[base]\nvars = x, y\n\n[algebroid T]\ntangent = true\n\n[cochain c on T]\nvalues = \"1\", \"z + 1\"\n").unwrap();
    let out = modclass(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 8"), "{err}");
    assert!(err.contains("unknown variable `z`"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn machine_output_is_deterministic() {
    for c in ["rep-check", "theorem41", "cohomology"] {
        let a = modclass(&[c, "--corpus", "--machine"]);
        let b = modclass(&[c, "--corpus", "--machine"]);
        assert_eq!(a.stdout, b.stdout, "{c}");
        let text = String::from_utf8(a.stdout).unwrap();
        assert!(!text.is_empty());
        for line in text.lines() {
            assert!(line.starts_with(&format!("command={c} file=")), "{line}");
            assert!(line.contains(" verdict="), "{line}");
            assert!(line.contains(" ledger="), "{line}");
        }
    }
}

#[test]
fn machine_report_to_file() {
    let path = std::env::temp_dir().join(format!("modclass-machine-{}.txt", std::process::id()));
    let out = modclass(&["modular", &file_arg("aff1.alg"), "--machine", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("modclass modular:"));
    let machine = std::fs::read_to_string(&path).unwrap();
    assert!(machine.lines().all(|l| l.starts_with("command=modular ")));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn corpus_round_trips_through_render() {
    for (name, text) in CORPUS {
        let pf = parse_problem(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_problem(&render(&pf)).unwrap_or_else(|e| panic!("{name} rendered: {e}"));
        assert_eq!(render(&again), render(&pf), "{name}");
        assert_eq!(again.sections.len(), pf.sections.len(), "{name}");
    }
}

#[test]
fn twisted_r4_denominators_parse() {
    let pf = parse_problem(corpus_file("twisted-r4.alg").unwrap()).unwrap();
    let rational = pf.elements().flat_map(|e| e.terms.values()).any(|c| !c.is_polynomial());
    assert!(rational);
}
