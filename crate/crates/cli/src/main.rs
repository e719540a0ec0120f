use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};

use queuebound_core::abstraction::AbstractQueue;
use queuebound_core::driver::{verify, Verdict, VerifyOptions};
use queuebound_core::explore::{explore, ExploreOptions};
use queuebound_core::frontend::{
    parse_invariant_decl, parse_invariant_file, parse_model, parse_qutl_open, render_diagnostics, DslSource,
    InvariantDecl,
};
use queuebound_core::model::{Alphabet, CqsModel};
use queuebound_core::qutl::check_abstract;
use queuebound_core::report::{RunReport, Timing};

const EXIT_SAFE: u8 = 0;
const EXIT_UNSAFE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "queuebound", version, about = "Safety verification for machines communicating through unbounded FIFO queues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prove safety for every queue bound, or find a violation.
    Verify {
        model: PathBuf,
        /// Initial prefix length of the queue abstraction.
        #[arg(long, default_value_t = 0)]
        p0: usize,
        /// Largest prefix length tried before giving up (default: max(p0, 4)).
        #[arg(long)]
        p_max: Option<usize>,
        /// Largest queue bound explored.
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// File with `machine <name>: <formula>` lines.
        #[arg(long)]
        invariants: Option<PathBuf>,
        /// Extra invariant; replaces a file entry for the same machine.
        #[arg(long = "invariant")]
        invariant: Vec<String>,
        /// Use invariants without discharging them.
        #[arg(long)]
        trust_invariants: bool,
        /// Queue length up to which invariants are discharged.
        #[arg(long, default_value_t = 16)]
        discharge_depth: usize,
        #[arg(long, default_value_t = 10_000_000)]
        max_states: usize,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        timeout: Option<u64>,
        /// Stop exploring at the first violation.
        #[arg(long)]
        fail_fast: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Print the states that blocked convergence.
        #[arg(long)]
        emit_spurious: bool,
    },
    /// Check that a model parses.
    Parse { model: PathBuf },
    /// Print statistics of the states reachable under one queue bound.
    Explore {
        model: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10_000_000)]
        max_states: usize,
    },
    /// Decide whether some concretization of an abstract queue satisfies a formula.
    QutlCheck {
        /// `prefix|suffix`; events separated by `.`, or one character each
        /// when no `.` is present.
        #[arg(long)]
        queue: String,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        formula: String,
    },
}

fn load_model(path: &Path) -> Result<CqsModel, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path.display().to_string();
    parse_model(&DslSource::new(name.clone(), text)).map_err(|d| render_diagnostics(&name, &d))
}

fn load_invariants(model: &CqsModel, file: Option<&Path>, extra: &[String]) -> Result<Vec<InvariantDecl>, String> {
    let mut decls = Vec::new();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        decls = parse_invariant_file(&text, model).map_err(|d| render_diagnostics(&path.display().to_string(), &d))?;
    }
    let mut flags = Vec::new();
    for s in extra {
        flags.push(parse_invariant_decl(s, model).map_err(|d| render_diagnostics("--invariant", &d))?);
    }
    decls.retain(|d| !flags.iter().any(|f| f.machine == d.machine));
    decls.extend(flags);
    Ok(decls)
}

/// Rewrites a queue literal into the dotted form. Parts without `.` are read
/// one character per event when `single_chars` is set.
fn dotted(text: &str, single_chars: bool) -> String {
    text.split('|')
        .map(|part| {
            let part = part.trim();
            if !single_chars || part.contains('.') || part == "ε" {
                part.to_string()
            } else {
                part.chars().map(String::from).collect::<Vec<_>>().join(".")
            }
        })
        .collect::<Vec<_>>()
        .join("|")
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Parse { model } => {
            let m = load_model(&model)?;
            println!(
                "{}: {} machines, {} events",
                model.display(),
                m.machines.len(),
                m.alphabet.len()
            );
            Ok(EXIT_SAFE)
        }
        Command::Explore { model, k, max_states } => {
            let m = load_model(&model)?;
            let opts = ExploreOptions {
                max_states,
                ..Default::default()
            };
            let ex = explore(&m, k, &opts).map_err(|e| e.to_string())?;
            println!("k = {k}: {} reachable states", ex.reach.len());
            match ex.violation {
                Some(v) => {
                    println!("violation: {}", v.violation.describe(&m));
                    print!("{}", v.trace.render(&m));
                    Ok(EXIT_UNSAFE)
                }
                None => Ok(EXIT_SAFE),
            }
        }
        Command::QutlCheck { queue, p, formula } => {
            let mut alphabet = Alphabet::new();
            let f = parse_qutl_open(&formula, &mut alphabet).map_err(|d| render_diagnostics("--formula", &d))?;
            let single = alphabet.ids().all(|e| alphabet.name(e).chars().count() == 1);
            let literal = dotted(&queue, single);
            for part in literal.split('|') {
                for n in part.split('.').map(str::trim).filter(|n| !n.is_empty() && *n != "ε") {
                    alphabet.intern(n);
                }
            }
            let q = AbstractQueue::parse(&literal, p, &alphabet).map_err(|e| format!("--queue: {e}"))?;
            println!("{}", check_abstract(&q, &f));
            Ok(EXIT_SAFE)
        }
        Command::Verify {
            model,
            p0,
            p_max,
            k_max,
            invariants,
            invariant,
            trust_invariants,
            discharge_depth,
            max_states,
            timeout,
            fail_fast,
            format,
            emit_spurious,
        } => {
            if k_max < 1 {
                return Err("--k-max must be at least 1".into());
            }
            let p_max = p_max.unwrap_or(p0.max(4));
            if p_max < p0 {
                return Err("--p-max must not be smaller than --p0".into());
            }
            let m = load_model(&model)?;
            let decls = load_invariants(&m, invariants.as_deref(), &invariant)?;
            let start = Instant::now();
            let opts = VerifyOptions {
                p0,
                p_max,
                k_max,
                invariants: decls,
                trust_invariants,
                discharge_depth,
                explore: ExploreOptions {
                    max_states,
                    deadline: timeout.map(|s| start + Duration::from_secs(s)),
                    fail_fast,
                },
                ..Default::default()
            };
            let outcome = verify(&m, &opts);
            let timing = Timing {
                elapsed_ms: start.elapsed().as_millis(),
            };
            let name = model.file_name().map_or_else(|| model.display().to_string(), |n| n.to_string_lossy().into_owned());
            let report = RunReport::new(&name, &m, &outcome, timing);
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
                Format::Text => print!("{}", report.to_text(emit_spurious)),
            }
            Ok(match outcome.verdict {
                Verdict::Safe { .. } => EXIT_SAFE,
                Verdict::Unsafe { .. } => EXIT_UNSAFE,
                Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_SAFE };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
