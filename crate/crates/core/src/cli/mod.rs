//! Batch interface: problem files in, reports out.
//!
//! Exit status 0 means every check passed, 1 means a check failed, 2 means
//! the input itself could not be read, parsed or resolved.

pub mod checks;
pub mod problem;
pub mod report;
pub mod workspace;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use self::checks::Options;
use self::problem::{parse_problem, ProblemFile};
use self::report::FileReport;

pub const COMMANDS: [&str; 8] =
    ["validate", "modular", "relative-modular", "rep-check", "twisted-check", "theorem41", "lie-algebra", "cohomology"];

/// The built-in corpus, shipped as problem files.
pub const CORPUS: [(&str, &str); 14] = [
    ("tangent-r2.alg", include_str!("../../corpus/tangent-r2.alg")),
    ("aff1.alg", include_str!("../../corpus/aff1.alg")),
    ("aff1-triangular.alg", include_str!("../../corpus/aff1-triangular.alg")),
    ("line-anchor.alg", include_str!("../../corpus/line-anchor.alg")),
    ("r3-degenerate.alg", include_str!("../../corpus/r3-degenerate.alg")),
    ("borel-sl2.alg", include_str!("../../corpus/borel-sl2.alg")),
    ("abelian.alg", include_str!("../../corpus/abelian.alg")),
    ("sl3-chain.alg", include_str!("../../corpus/sl3-chain.alg")),
    ("poisson-r2.alg", include_str!("../../corpus/poisson-r2.alg")),
    ("symplectic-r2.alg", include_str!("../../corpus/symplectic-r2.alg")),
    ("twisted-r4.alg", include_str!("../../corpus/twisted-r4.alg")),
    ("broken.alg", include_str!("../../corpus/broken.alg")),
    ("twisted-nonclosed.alg", include_str!("../../corpus/twisted-nonclosed.alg")),
    ("corrupted-rep.alg", include_str!("../../corpus/corrupted-rep.alg")),
];

pub fn corpus_file(name: &str) -> Option<&'static str> {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Parser, Debug)]
#[command(name = "modclass", version, about = "Exact modular-class calculus for Lie algebroids")]
struct Args {
    /// Check to run.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    command: String,
    /// Problem file.
    #[arg(required_unless_present = "corpus", conflicts_with = "corpus")]
    file: Option<PathBuf>,
    /// Run over the built-in corpus instead of a file.
    #[arg(long)]
    corpus: bool,
    /// Total degree bound of the exactness search.
    #[arg(long, default_value_t = crate::cohomology::DEFAULT_DEGREE_BOUND)]
    degree_bound: u32,
    /// Random trials per flatness check.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Write the machine-readable report to PATH, or to standard output.
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "-")]
    machine: Option<PathBuf>,
}

fn check_file(label: &str, pf: &ProblemFile, command: &str, opts: &Options, corpus: bool) -> FileReport {
    let mut fr = FileReport {
        label: label.to_string(),
        origin: pf.origin.clone(),
        records: Vec::new(),
        expect_failure: corpus && pf.fails.iter().any(|c| c == command),
        input_error: None,
    };
    match workspace::build(pf) {
        Ok(ws) => fr.records = checks::run_command(command, &ws, opts),
        Err(e) => fr.input_error = Some(e),
    }
    fr
}

fn input_error(label: &str, message: String) -> FileReport {
    FileReport { label: label.into(), origin: None, records: Vec::new(), expect_failure: false, input_error: Some(message) }
}

/// Runs one invocation and returns its exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let opts = Options { degree_bound: args.degree_bound, trials: args.trials };
    let command = args.command.as_str();
    let files: Vec<FileReport> = if args.corpus {
        std::thread::scope(|scope| {
            let handles: Vec<_> = CORPUS
                .iter()
                .map(|(name, text)| {
                    scope.spawn(move || match parse_problem(text) {
                        Ok(pf) => check_file(&format!("corpus/{name}"), &pf, command, &opts, true),
                        Err(e) => input_error(&format!("corpus/{name}"), e.to_string()),
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
        })
    } else {
        let path = args.file.as_ref().expect("required by clap");
        let label = path.display().to_string();
        let report = match std::fs::read_to_string(path) {
            Err(e) => input_error(&label, format!("cannot read file: {e}")),
            Ok(text) => match parse_problem(&text) {
                Err(e) => input_error(&label, e.to_string()),
                Ok(pf) => check_file(&label, &pf, command, &opts, false),
            },
        };
        vec![report]
    };

    let human = report::human(command, &files, args.corpus);
    match &args.machine {
        Some(p) if p.as_os_str() == "-" => {
            let _ = write!(stdout, "{}", report::machine(command, &files));
        }
        Some(p) => {
            let _ = write!(stdout, "{human}");
            if let Err(e) = std::fs::write(p, report::machine(command, &files)) {
                let _ = writeln!(stderr, "modclass: cannot write {}: {e}", p.display());
                return 2;
            }
        }
        None => {
            let _ = write!(stdout, "{human}");
        }
    }
    for f in &files {
        if let Some(e) = &f.input_error {
            let _ = writeln!(stderr, "modclass: {}: {e}", f.label);
        }
    }
    if files.iter().any(|f| f.input_error.is_some()) {
        2
    } else if args.corpus {
        i32::from(!files.iter().all(FileReport::as_expected))
    } else {
        i32::from(files.iter().any(|f| f.failures() > 0))
    }
}
