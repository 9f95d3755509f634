mod selftest;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fmc::encodings::{encode_cbn, encode_cbv, encode_store, parse_lambda, parse_store};
use fmc::machine::{eval_big, run, BigStep, FailureKind, MemoryRecord, RunOutcome, StateRecord};
use fmc::perpetual::{perp_eval, PerpRecord, PerpStatus};
use fmc::rewrite::{normalize_full, spine_normalize, ReductionTrace, TraceRecord};
use fmc::typesys::{
    check_derivation, infer_strong, infer_weak, infer_weak_state, inhabit_derivation, CompType, Derivation,
    DerivationRecord, InferError, System,
};
use fmc::{parse, Memory, Term};

const DEFAULT_FUEL: usize = 10_000;
const SELF_TEST_FUEL: usize = 100_000;
const STACK_SIZE: usize = 256 << 20;

#[derive(Parser)]
#[command(name = "fmc", version, about = "Functional Machine Calculus toolkit")]
struct Cli {
    /// Step budget [default: 10000, self-test 100000]
    #[arg(long, global = true)]
    fuel: Option<usize>,
    /// Print a JSON object instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Include machine states, reduction steps or trees
    #[arg(long, global = true)]
    trace: bool,
    /// Initial memory, e.g. `a:[*, <x>.x]` with the top of stack last
    #[arg(long, global = true, value_name = "SPEC")]
    mem: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it canonically
    Parse { term: String },
    /// Run the abstract machine
    Run { term: String },
    /// Big-step evaluation
    Eval { term: String },
    /// Reduce to normal form
    Normalize {
        #[arg(long, value_enum, default_value_t = Strategy::Full)]
        strategy: Strategy,
        term: String,
    },
    /// Infer a typing derivation
    Infer {
        #[arg(long, value_enum, default_value_t = SystemArg::Weak)]
        system: SystemArg,
        term: String,
    },
    /// Validate a serialized derivation
    CheckDerivation {
        #[arg(long, value_enum, default_value_t = SystemArg::Weak)]
        system: SystemArg,
        /// JSON derivation, inline or `@path`
        derivation: String,
    },
    /// Search for a closed normal term of a type
    Inhabit {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(value_name = "TYPE")]
        ty: String,
    },
    /// Translate a lambda or store program into the calculus
    Encode {
        #[arg(value_enum)]
        source: Source,
        program: String,
    },
    /// Run a built-in consistency suite
    SelfTest {
        #[arg(value_enum, default_value_t = selftest::Suite::All)]
        suite: selftest::Suite,
        /// Seed for random terms
        #[arg(long, env = "FMC_SEED", default_value_t = 0x5eed)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Full,
    Spine,
    Perpetual,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Weak,
    Strong,
    State,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> System {
        match s {
            SystemArg::Weak => System::Weak,
            SystemArg::Strong => System::Strong,
            SystemArg::State => System::State,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Cbn,
    Cbv,
    Store,
}

/// A finished command: the exit code, text for people and a JSON object.
pub struct Report {
    code: u8,
    text: String,
    json: Value,
}

impl Report {
    fn ok(text: impl Into<String>, json: Value) -> Report {
        Report { code: 0, text: text.into(), json }
    }

    fn negative(text: impl Into<String>, json: Value) -> Report {
        Report { code: 1, text: text.into(), json }
    }
}

/// Bad input or arguments; exit code 2.
#[derive(Debug)]
pub struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> UsageError {
        UsageError(e.to_string())
    }
}

fn read_arg(arg: &str) -> Result<String, UsageError> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| UsageError(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn load_term(arg: &str) -> Result<Term, UsageError> {
    Ok(parse(&read_arg(arg)?)?)
}

fn trace_lines(tr: &ReductionTrace) -> Vec<String> {
    TraceRecord::from(tr).steps.iter().map(|s| format!("{} at {}: {}", s.rule, s.position, s.result)).collect()
}

fn failure_kind(k: &FailureKind) -> String {
    match k {
        FailureKind::VarFocus => "variable in focus".into(),
        FailureKind::EmptyPop(a) => format!("pop on empty stack {a}"),
    }
}

impl Cli {
    fn fuel(&self) -> usize {
        self.fuel.unwrap_or(DEFAULT_FUEL)
    }

    fn memory(&self) -> Result<Memory, UsageError> {
        match &self.mem {
            Some(spec) => Ok(read_arg(spec)?.parse()?),
            None => Ok(Memory::new()),
        }
    }

    fn no_memory(&self, what: &str) -> Result<(), UsageError> {
        match self.mem {
            Some(_) => Err(UsageError(format!("--mem does not apply to {what}"))),
            None => Ok(()),
        }
    }

    fn dispatch(&self) -> Result<Report, UsageError> {
        match &self.command {
            Command::Parse { term } => {
                self.no_memory("parse")?;
                let t = load_term(term)?;
                let free: Vec<String> = t.free_vars().iter().map(ToString::to_string).collect();
                let json = json!({"status": "ok", "term": t.to_string(), "size": t.size(), "free_vars": free});
                Ok(Report::ok(t.to_string(), json))
            }
            Command::Run { term } => self.run(load_term(term)?),
            Command::Eval { term } => self.eval(load_term(term)?),
            Command::Normalize { strategy, term } => {
                self.no_memory("normalize")?;
                self.normalize(*strategy, load_term(term)?)
            }
            Command::Infer { system, term } => self.infer(*system, load_term(term)?),
            Command::CheckDerivation { system, derivation } => {
                self.no_memory("check-derivation")?;
                let rec: DerivationRecord = serde_json::from_str(&read_arg(derivation)?)?;
                let d = Derivation::try_from(&rec)?;
                let r = check_derivation(&d, (*system).into());
                Ok(match r.failure {
                    None => Report::ok(
                        format!("valid, weight {}", r.weight),
                        json!({"status": "valid", "weight": r.weight}),
                    ),
                    Some(f) => Report::negative(
                        format!("invalid at {:?}: {}", f.path, f.reason),
                        json!({"status": "invalid", "path": f.path, "reason": f.reason}),
                    ),
                })
            }
            Command::Inhabit { depth, ty } => {
                self.no_memory("inhabit")?;
                let target: CompType = read_arg(ty)?.parse()?;
                Ok(match inhabit_derivation(&target, *depth) {
                    Some(d) => {
                        let t = d.term().expect("a term derivation").to_string();
                        let json = json!({
                            "status": "inhabited",
                            "term": t,
                            "derivation": DerivationRecord::from(&d),
                        });
                        Report::ok(t, json)
                    }
                    None => Report::negative(
                        format!("no inhabitant up to depth {depth}"),
                        json!({"status": "empty", "depth": depth}),
                    ),
                })
            }
            Command::Encode { source, program } => {
                self.no_memory("encode")?;
                let src = read_arg(program)?;
                let t = match source {
                    Source::Cbn => encode_cbn(&parse_lambda(&src)?),
                    Source::Cbv => encode_cbv(&parse_lambda(&src)?),
                    Source::Store => encode_store(&parse_store(&src)?),
                };
                Ok(Report::ok(t.to_string(), json!({"status": "encoded", "term": t.to_string()})))
            }
            Command::SelfTest { suite, seed } => {
                self.no_memory("self-test")?;
                Ok(selftest::run_suites(*suite, *seed, self.fuel.unwrap_or(SELF_TEST_FUEL)))
            }
        }
    }

    fn run(&self, t: Term) -> Result<Report, UsageError> {
        let r = run(self.memory()?, t, self.fuel(), self.trace);
        let (code, mut text, mut json) = match &r.outcome {
            RunOutcome::Success { final_memory, length } => (
                0,
                format!("success, length {length}, final memory {final_memory}"),
                json!({"status": "success", "length": length, "final_memory": MemoryRecord::from(final_memory)}),
            ),
            RunOutcome::Failed { at, kind, length } => (
                1,
                format!("failure after {length} states: {} in {at}", failure_kind(kind)),
                json!({"status": "failure", "length": length, "reason": failure_kind(kind), "state": StateRecord::from(at)}),
            ),
            RunOutcome::FuelExhausted { at } => (
                1,
                format!("fuel exhausted at {at}"),
                json!({"status": "fuel_exhausted", "state": StateRecord::from(at)}),
            ),
        };
        if let Some(states) = &r.trace {
            let lines: Vec<String> = states.iter().enumerate().map(|(i, s)| format!("{i}: {s}")).collect();
            text = format!("{}\n{text}", lines.join("\n"));
            json["trace"] = states.iter().map(StateRecord::from).map(|s| json!(s)).collect();
        }
        Ok(Report { code, text, json })
    }

    fn eval(&self, t: Term) -> Result<Report, UsageError> {
        Ok(match eval_big(self.memory()?, t, self.fuel()) {
            BigStep::Derived { output, .. } => Report::ok(
                format!("output memory {output}"),
                json!({"status": "success", "output": MemoryRecord::from(&output)}),
            ),
            BigStep::Stuck => Report::negative("stuck", json!({"status": "stuck"})),
            BigStep::OutOfFuel => Report::negative("fuel exhausted", json!({"status": "fuel_exhausted"})),
        })
    }

    fn normalize(&self, strategy: Strategy, t: Term) -> Result<Report, UsageError> {
        let exhausted = || Report::negative("fuel exhausted", json!({"status": "fuel_exhausted"}));
        let trace = match strategy {
            Strategy::Full => normalize_full(&t, self.fuel()),
            Strategy::Spine => spine_normalize(&t, self.fuel()),
            Strategy::Perpetual => {
                let r = perp_eval(&t, self.fuel());
                let (PerpStatus::Done, Some(p)) = (r.status, r.tree) else { return Ok(exhausted()) };
                let mut json = json!({"status": "normal", "result": p.result.to_string(), "rules": p.size()});
                if self.trace {
                    json["tree"] = json!(PerpRecord::from(&p));
                }
                return Ok(Report::ok(p.result.to_string(), json));
            }
        };
        let Some(tr) = trace else { return Ok(exhausted()) };
        let mut json = json!({"status": "normal", "result": tr.result().to_string(), "steps": tr.len()});
        let mut text = tr.result().to_string();
        if self.trace {
            text = format!("{}\n{text}", trace_lines(&tr).join("\n"));
            json["trace"] = json!(TraceRecord::from(&tr));
        }
        Ok(Report::ok(text, json))
    }

    fn infer(&self, system: SystemArg, t: Term) -> Result<Report, UsageError> {
        let fuel = self.fuel();
        let result = match system {
            SystemArg::Weak => {
                self.no_memory("infer --system weak")?;
                infer_weak(&t, fuel)
            }
            SystemArg::Strong => {
                self.no_memory("infer --system strong")?;
                infer_strong(&t, fuel)
            }
            SystemArg::State => infer_weak_state(&self.memory()?, &t, fuel),
        };
        Ok(match result {
            Ok(d) => {
                let ty = d.ty.to_string();
                let ctx = d.context.to_string();
                let sep = if ctx.is_empty() { "" } else { " " };
                let mut text = format!("{ctx}{sep}⊢ {t} : {ty}\nweight {}", d.weight());
                if self.trace {
                    text.push('\n');
                    text.push_str(&serde_json::to_string_pretty(&DerivationRecord::from(&d))?);
                }
                let json = json!({
                    "status": "typed",
                    "type": ty,
                    "weight": d.weight(),
                    "derivation": DerivationRecord::from(&d),
                });
                Report::ok(text, json)
            }
            Err(InferError::FuelExhausted | InferError::NoPerpetualEvaluation) => {
                Report::negative("fuel exhausted", json!({"status": "fuel_exhausted"}))
            }
            Err(e) => {
                Report::negative(format!("untypeable: {e}"), json!({"status": "untypeable", "reason": e.to_string()}))
            }
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let worker = thread::Builder::new().stack_size(STACK_SIZE).spawn(move || {
        let out = cli.dispatch();
        (cli.json, out)
    });
    let (json, out) = worker.expect("spawn worker").join().expect("worker panicked");
    let mut stdout = std::io::stdout().lock();
    match out {
        Ok(r) => {
            let body = if json { r.json.to_string() } else { r.text };
            let _ = writeln!(stdout, "{body}");
            ExitCode::from(r.code)
        }
        Err(UsageError(msg)) => {
            if json {
                let _ = writeln!(stdout, "{}", json!({"status": "error", "message": msg}));
            }
            eprintln!("fmc: {msg}");
            ExitCode::from(2)
        }
    }
}
