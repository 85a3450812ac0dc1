//! Relative termination `R/S` by stepwise rule removal with matrix
//! interpretations, falling back to plain termination of `R ∪ S`.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::limits::{LimitError, Limits};
use crate::matrix::{search_interpretation, MatrixInterpretation};
use crate::rewriting::Trs;
use crate::tpdb::format_trs;

/// Termination of `→*_weak · →_strict · →*_weak`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelTermProblem {
    pub strict: Trs,
    pub weak: Trs,
}

/// Labels of the rules an interpretation orients strictly, per component.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Removal {
    pub strict: BTreeSet<usize>,
    pub weak: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
pub struct RemovalStep {
    /// The problem before removal.
    pub problem: RelTermProblem,
    pub interpretation: MatrixInterpretation,
    pub removed: Removal,
}

#[derive(Clone, Debug)]
pub enum Closing {
    /// No strict rules are left.
    Empty,
    /// The union of what was left terminates, shown by removing all of its
    /// rules.
    Terminating { system: Trs, steps: Vec<RemovalStep> },
    /// The union of what was left terminates according to an external tool.
    External { system: Trs, command: String },
}

#[derive(Clone, Debug)]
pub struct RelTermProof {
    pub steps: Vec<RemovalStep>,
    pub closing: Closing,
}

#[derive(Clone, Debug)]
pub struct ExternalProver {
    pub command: String,
    pub timeout: Duration,
}

#[derive(Clone, Debug)]
pub struct RelTermConfig {
    pub dim_max: usize,
    pub coef_max: u64,
    pub external: Option<ExternalProver>,
}

impl Default for RelTermConfig {
    fn default() -> Self {
        RelTermConfig { dim_max: 3, coef_max: 1, external: None }
    }
}

#[derive(Clone, Debug)]
pub enum RelTermOutcome {
    Proved(RelTermProof),
    Unknown(String),
}

impl RelTermProblem {
    pub fn new(strict: Trs, weak: Trs) -> Self {
        RelTermProblem { strict, weak }
    }

    fn without(&self, removed: &Removal) -> RelTermProblem {
        RelTermProblem {
            strict: self.strict.filter(|r| !removed.strict.contains(&r.index)),
            weak: self.weak.filter(|r| !removed.weak.contains(&r.index)),
        }
    }
}

/// Removes strictly oriented rules from both components for as long as some
/// interpretation orients a strict rule strictly.
fn removal_loop(
    mut problem: RelTermProblem,
    cfg: &RelTermConfig,
    limits: &Limits,
) -> Result<(Vec<RemovalStep>, RelTermProblem), LimitError> {
    let mut steps = Vec::new();
    'outer: while !problem.strict.is_empty() {
        for dim in 1..=cfg.dim_max {
            if let Some((interpretation, removed)) = search_interpretation(&problem, dim, cfg.coef_max, limits)? {
                let next = problem.without(&removed);
                steps.push(RemovalStep { problem, interpretation, removed });
                problem = next;
                continue 'outer;
            }
        }
        break;
    }
    Ok((steps, problem))
}

/// Never concludes non-termination: the answer is a proof or a reason for
/// giving up.
pub fn prove_relative_termination(problem: &RelTermProblem, cfg: &RelTermConfig, limits: &Limits) -> RelTermOutcome {
    match prove_inner(problem, cfg, limits) {
        Ok(o) => o,
        Err(e) => RelTermOutcome::Unknown(e.to_string()),
    }
}

fn prove_inner(problem: &RelTermProblem, cfg: &RelTermConfig, limits: &Limits) -> Result<RelTermOutcome, LimitError> {
    let (steps, rest) = removal_loop(problem.clone(), cfg, limits)?;
    if rest.strict.is_empty() {
        return Ok(RelTermOutcome::Proved(RelTermProof { steps, closing: Closing::Empty }));
    }
    let system = rest.strict.union(&rest.weak);
    let (inner, left) = removal_loop(RelTermProblem::new(system.clone(), Trs::empty()), cfg, limits)?;
    if left.strict.is_empty() {
        return Ok(RelTermOutcome::Proved(RelTermProof { steps, closing: Closing::Terminating { system, steps: inner } }));
    }
    let reason = format!("no interpretation with dimension <= {} and entries <= {}", cfg.dim_max, cfg.coef_max);
    let Some(ext) = &cfg.external else {
        return Ok(RelTermOutcome::Unknown(reason));
    };
    let timeout = match limits.deadline {
        Some(d) => ext.timeout.min(d.saturating_duration_since(Instant::now())),
        None => ext.timeout,
    };
    Ok(match external_termination_check(&system, Some(&ext.command), timeout) {
        ExternalAnswer::Yes => RelTermOutcome::Proved(RelTermProof {
            steps,
            closing: Closing::External { system, command: ext.command.clone() },
        }),
        ExternalAnswer::No => RelTermOutcome::Unknown(format!("{reason}; external prover reports non-termination")),
        ExternalAnswer::Unknown(why) => RelTermOutcome::Unknown(format!("{reason}; external prover: {why}")),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExternalAnswer {
    Yes,
    No,
    Unknown(String),
}

/// Runs `command FILE` on the system written in TPDB format and reads the
/// first line of its output. Failures of any kind give `Unknown`.
pub fn external_termination_check(trs: &Trs, command: Option<&str>, timeout: Duration) -> ExternalAnswer {
    if trs.is_empty() {
        return ExternalAnswer::Yes;
    }
    let Some(command) = command.filter(|c| !c.trim().is_empty()) else {
        return ExternalAnswer::Unknown("no external prover configured".into());
    };
    match run_external(trs, command, timeout) {
        Ok(line) => match line.trim() {
            "YES" => ExternalAnswer::Yes,
            "NO" => ExternalAnswer::No,
            other => ExternalAnswer::Unknown(format!("answered {other:?}")),
        },
        Err(e) => ExternalAnswer::Unknown(e),
    }
}

fn run_external(trs: &Trs, command: &str, timeout: Duration) -> Result<String, String> {
    let mut file = tempfile::Builder::new().suffix(".trs").tempfile().map_err(|e| e.to_string())?;
    file.write_all(format_trs(trs).as_bytes()).map_err(|e| e.to_string())?;
    file.flush().map_err(|e| e.to_string())?;
    let mut words = command.split_whitespace();
    let program = words.next().expect("command is not blank");
    let mut child = Command::new(program)
        .args(words)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("cannot run {program}: {e}"))?;
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut out = String::new();
        let _ = stdout.read_to_string(&mut out);
        out
    });
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err("timed out".into());
            }
            Ok(None) => thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(e.to_string()),
        }
    }
    let out = reader.join().map_err(|_| "reader thread panicked".to_string())?;
    Ok(out.lines().next().unwrap_or("").to_string())
}
