//! Batch front end for the jet-bundle symmetry engine.
//!
//! A run loads a problem file, dispatches one [`Command`] and renders a [`Report`].

pub mod commands;
pub mod error;
pub mod problem;
pub mod report;

pub use commands::{run, Command};
pub use error::CliError;
pub use problem::{load_problem, parse_problem, Format, Options, ProblemFile};
pub use report::{CheckReport, Outcome, Report, Status};

/// Loads `path` and runs `command`; loader errors become an error report.
pub fn run_file(command: Command, path: &std::path::Path, flags: &Options) -> Report {
    match load_problem(path) {
        Ok(p) => run(command, &p, flags),
        Err(e) => {
            let seed = flags.seed.unwrap_or(jetsym::expr::DEFAULT_SEED);
            let mut r = Report::new(command.name(), &path.display().to_string(), seed);
            r.error = Some(e.to_string());
            r.settle();
            r
        }
    }
}

/// Output format: the flag, else the problem file's choice, else text.
pub fn render(report: &Report, flags: &Options, path: &std::path::Path) -> String {
    let from_file = load_problem(path).ok().and_then(|p| p.options.format);
    match flags.format.or(from_file).unwrap_or_default() {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    }
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use super::*;

    fn fixture(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.jetsym"))
    }

    // columns follow Command::ALL
    const EXITS: &[(&str, [i32; 7])] = &[
        ("wave", [0, 0, 0, 0, 0, 0, 0]),
        ("gauss-codazzi", [3, 3, 0, 0, 3, 3, 0]),
        ("liouville", [3, 3, 0, 3, 3, 0, 0]),
        ("rectify", [0, 0, 0, 3, 3, 3, 0]),
        ("nonlie", [1, 0, 1, 3, 3, 3, 1]),
        ("empty-intersection", [1, 0, 1, 3, 1, 3, 1]),
    ];

    #[test]
    fn exit_status_contract() {
        for (name, codes) in EXITS {
            let problem = load_problem(&fixture(name)).unwrap();
            for (cmd, want) in Command::ALL.iter().zip(codes) {
                let r = run(*cmd, &problem, &Options::default());
                assert_eq!(r.exit_code(), *want, "{cmd} on {name}: {}", r.to_text());
                let fails = r.checks.iter().any(|c| c.outcome == Outcome::Fail);
                let unknown = r.checks.iter().any(|c| c.outcome == Outcome::Unknown);
                let expect = match (&r.error, fails, unknown) {
                    (Some(_), _, _) => 3,
                    (None, true, _) => 1,
                    (None, false, true) => 2,
                    _ => 0,
                };
                assert_eq!(r.exit_code(), expect);
            }
        }
    }

    #[test]
    fn reports_round_trip_and_repeat() {
        for (name, _) in EXITS {
            let path = fixture(name);
            for cmd in Command::ALL {
                let a = run_file(cmd, &path, &Options::default());
                let json = a.to_json();
                let back = Report::from_json(&json).unwrap();
                assert_eq!(back, a);
                assert_eq!(back.to_json(), json);
                assert_eq!(run_file(cmd, &path, &Options::default()).to_json(), json, "{cmd} on {name}");
            }
        }
    }

    #[test]
    fn flags_override_the_file() {
        let path = fixture("wave");
        let flags = Options { seed: Some(0xBEEF), ..Options::default() };
        assert_eq!(run_file(Command::VerifySymmetry, &path, &flags).seed, "0xBEEF");
        let flags = Options { force_direct: Some(true), ..Options::default() };
        let r = run_file(Command::VerifySymmetry, &path, &flags);
        assert_eq!(r.checks[0].justification.as_deref(), Some(jetsym::condsym::DIRECT_ROUTE));
        assert_eq!(r.exit_code(), 0);
        let flags = Options { format: Some(Format::Json), ..Options::default() };
        assert!(Report::from_json(&render(&r, &flags, &path)).is_ok());
    }

    #[test]
    fn load_failures_are_errors() {
        let r = run_file(Command::Charsys, std::path::Path::new("/nonexistent.jetsym"), &Options::default());
        assert_eq!(r.exit_code(), 3);
        assert!(r.error.unwrap().contains("nonexistent"));
    }

    #[test]
    fn nonzero_residual_is_printed() {
        let r = run_file(Command::Compatibility, &fixture("nonlie"), &Options::default());
        assert_eq!(r.exit_code(), 1);
        assert!(r.to_text().contains("residual: -1"));
    }
}
