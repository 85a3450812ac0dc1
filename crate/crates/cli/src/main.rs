//! `ddrt`: confluence prover for TPDB plain-format rewrite systems.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use ddrt_core::prover::{prove, Config, Criterion, Verdict};
use ddrt_core::relative_termination::ExternalProver;
use ddrt_core::tpdb::parse_named;
use ddrt_core::trace::trace_json;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CriterionArg {
    Auto,
    Ortho,
    Kb,
    Rl,
    Dd1,
    Dd2,
    Dd2x,
    Nc,
}

impl CriterionArg {
    fn criteria(self) -> Vec<Criterion> {
        match self {
            CriterionArg::Auto => Criterion::ALL.to_vec(),
            CriterionArg::Ortho => vec![Criterion::Orthogonal],
            CriterionArg::Kb => vec![Criterion::KnuthBendix],
            CriterionArg::Rl => vec![Criterion::RuleLabeling],
            CriterionArg::Dd1 => vec![Criterion::DdL1],
            CriterionArg::Dd2 => vec![Criterion::DdL2],
            CriterionArg::Dd2x => vec![Criterion::DdL2NonTrivial],
            CriterionArg::Nc => vec![Criterion::NonConfluence],
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ddrt", version, about = "Prove or refute confluence of a term rewrite system")]
struct Args {
    /// Criterion to run; `auto` runs all of them, cheapest first.
    #[arg(long, value_enum, default_value = "auto")]
    criterion: CriterionArg,
    /// Maximal number of steps per side when joining critical pairs.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Time limit per input file, in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Largest matrix dimension tried for interpretations.
    #[arg(long, default_value_t = 3)]
    dim_max: usize,
    /// Largest matrix entry tried for interpretations.
    #[arg(long, default_value_t = 1)]
    coef_max: u64,
    /// Node budget for rewrite searches.
    #[arg(long)]
    node_budget: Option<usize>,
    /// Maximal number of join instances kept per critical pair.
    #[arg(long)]
    join_cap: Option<usize>,
    /// Termination tool used when interpretations fail. It is called with
    /// a .trs file as its last argument and must print YES first.
    #[arg(long, env = "DDRT_EXTERNAL_PROVER")]
    external_prover: Option<String>,
    /// Print a JSON proof trace after the verdict.
    #[arg(long)]
    proof: bool,
    /// Process every .trs file in a directory.
    #[arg(long, value_name = "DIR")]
    batch: Option<PathBuf>,
    /// Worker threads; 1 gives fully sequential runs.
    #[arg(long)]
    threads: Option<usize>,
    files: Vec<PathBuf>,
}

impl Args {
    fn config(&self) -> Result<Config, String> {
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err("--timeout must be positive".into());
        }
        if self.dim_max == 0 {
            return Err("--dim-max must be at least 1".into());
        }
        let timeout = Duration::from_secs_f64(self.timeout);
        let mut cfg = Config { k: self.k, timeout, criteria: self.criterion.criteria(), ..Config::default() };
        cfg.termination.dim_max = self.dim_max;
        cfg.termination.coef_max = self.coef_max;
        cfg.termination.external =
            self.external_prover.as_ref().filter(|c| !c.trim().is_empty()).map(|command| ExternalProver { command: command.clone(), timeout });
        if let Some(n) = self.node_budget {
            cfg.node_budget = n;
        }
        if let Some(n) = self.join_cap {
            cfg.join_cap = n;
        }
        Ok(cfg)
    }
}

struct Outcome {
    verdict: Verdict,
    trace: Option<String>,
}

fn run_file(path: &Path, cfg: &Config, with_trace: bool) -> Result<Outcome, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let problem = parse_named(&text, &path.display().to_string()).map_err(|e| format!("{}: {e}", path.display()))?;
    let verdict = prove(&problem.trs, cfg);
    let trace = with_trace.then(|| serde_json::to_string_pretty(&trace_json(&problem.trs, &verdict)).expect("json"));
    Ok(Outcome { verdict, trace })
}

fn batch_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "trs"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_many(files: &[PathBuf], cfg: &Config, with_trace: bool) -> ExitCode {
    let results: Vec<_> = files.par_iter().map(|f| run_file(f, cfg, with_trace)).collect();
    let mut counts = [0usize; 4];
    let mut out = std::io::stdout().lock();
    for (f, r) in files.iter().zip(&results) {
        match r {
            Ok(o) => {
                let a = o.verdict.answer();
                counts[["YES", "NO", "MAYBE"].iter().position(|x| *x == a).expect("known answer")] += 1;
                let _ = writeln!(out, "{}: {a}", f.display());
                if let Some(t) = &o.trace {
                    let _ = writeln!(out, "{t}");
                }
            }
            Err(e) => {
                counts[3] += 1;
                let _ = writeln!(out, "{}: ERROR", f.display());
                eprintln!("error: {e}");
            }
        }
    }
    let _ = writeln!(out, "YES {}  NO {}  MAYBE {}  ERROR {}  total {}", counts[0], counts[1], counts[2], counts[3], files.len());
    if counts[3] > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match args.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut files = args.files.clone();
    if let Some(dir) = &args.batch {
        match batch_files(dir) {
            Ok(f) => files.extend(f),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    } else if files.len() == 1 {
        return match run_file(&files[0], &cfg, args.proof) {
            Ok(o) => {
                let mut out = std::io::stdout().lock();
                let _ = writeln!(out, "{}", o.verdict.answer());
                if let Some(t) = o.trace {
                    let _ = writeln!(out, "{t}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }
    if files.is_empty() {
        eprintln!("error: no input files (give FILE... or --batch DIR)");
        return ExitCode::from(2);
    }
    run_many(&files, &cfg, args.proof)
}
