use std::io::{self, BufRead, Write};
use std::process::ExitCode;

use ccsp::carbroker::{build_carbroker, inner_block, CarBrokerConfig};
use ccsp::correspondence::{run_campaign, run_lemma_campaign, CampaignSummary, CheckError};
use ccsp::operational::{Label, State};
use ccsp::syntax::{pretty, pretty_standard, pretty_state, render_set};
use ccsp::{
    check_theorem1, eval_compensable, eval_standard, parse, Engine, EngineError, Event, GenConfig,
    LemmaKind, Mutation, Term, Trace,
};
use clap::{Parser, Subcommand, ValueEnum};

const MISMATCH: u8 = 1;
const USAGE: u8 = 2;
const BOUND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ccsp",
    version,
    about = "Traces, transitions and correspondence checks for compensating CSP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct EngineArgs {
    /// Maximum number of distinct states to explore.
    #[arg(long, default_value_t = ccsp::operational::DEFAULT_STATE_BOUND)]
    bound: usize,
    /// Break one transition rule on purpose.
    #[arg(long, value_enum)]
    mutant: Option<Mutant>,
}

impl EngineArgs {
    fn engine(&self) -> Engine {
        let engine = Engine::new().with_state_bound(self.bound);
        match self.mutant {
            Some(m) => engine.with_mutation(m.into()),
            None => engine,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutant {
    DropBottom,
    DropDeadlock,
    ReverseCompensation,
}

impl From<Mutant> for Mutation {
    fn from(m: Mutant) -> Self {
        match m {
            Mutant::DropBottom => Mutation::DropUniversalBottom,
            Mutant::DropDeadlock => Mutation::DropDeadlockClauses,
            Mutant::ReverseCompensation => Mutation::ReverseCompensationOrder,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the denotation, one trace (or trace pair) per line.
    Traces { term: String },
    /// Print the traces derived from the transition system.
    Dtraces {
        term: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print every reachable transition as `STATE --label--> STATE`.
    Lts {
        term: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Walk the transition system interactively, choosing steps by number.
    Step { term: String },
    /// Compare derived traces with the denotation.
    Check {
        term: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Check generated terms in bulk.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 7)]
        size: usize,
        #[arg(long, default_value = "a,b,c", value_delimiter = ',')]
        alphabet: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability that an event joins a generated sync set.
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        /// Check a structural lemma instead of the trace correspondence.
        #[arg(long)]
        lemma: Option<LemmaKind>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Built-in example systems.
    Example {
        #[command(subcommand)]
        example: Example,
    },
}

#[derive(Subcommand)]
enum Example {
    /// Buyer, broker, supplier and loan provider.
    Carbroker {
        #[arg(long, default_value_t = 1)]
        models: usize,
        #[arg(long, default_value_t = 1)]
        quotes: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: USAGE,
            message: message.to_string(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(err: EngineError) -> Self {
        let code = match err {
            EngineError::StateBound { .. } => BOUND,
            EngineError::NullTerm => USAGE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<CheckError> for Failure {
    fn from(err: CheckError) -> Self {
        match err {
            CheckError::Engine(e) => e.into(),
            other => Failure::usage(other),
        }
    }
}

type Outcome = Result<u8, Failure>;

// A closed pipe (e.g. `| head`) just ends the output.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::usage(e)),
        _ => Ok(()),
    }
}

fn parse_term(src: &str) -> Result<Term, Failure> {
    parse(src).map_err(Failure::usage)
}

fn traces(src: &str) -> Outcome {
    let text = match parse_term(src)? {
        Term::Standard(p) => render_set(eval_standard(&p).map_err(Failure::usage)?.traces()),
        Term::Compensable(pp) => render_set(eval_compensable(&pp).map_err(Failure::usage)?.pairs()),
    };
    emit(&text)?;
    Ok(0)
}

fn dtraces(src: &str, engine: &Engine) -> Outcome {
    let text = match parse_term(src)? {
        Term::Standard(p) => render_set(&engine.derived_traces_standard(&p)?),
        Term::Compensable(pp) => render_set(&engine.derived_traces_compensable(&pp)?),
    };
    emit(&text)?;
    Ok(0)
}

fn lts(src: &str, engine: &Engine) -> Outcome {
    let lts = engine.lts(State::from(parse_term(src)?))?;
    let names: Vec<String> = lts.states.iter().map(pretty_state).collect();
    let mut text = String::new();
    for (from, label, to) in &lts.edges {
        text.push_str(&format!("{} --{label}--> {}\n", names[*from], names[*to]));
    }
    emit(&text)?;
    Ok(0)
}

fn step(src: &str) -> Outcome {
    let engine = Engine::new();
    let mut state = State::from(parse_term(src)?);
    let mut events: Vec<Event> = Vec::new();
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        let transitions = engine.transitions(&state);
        println!("state: {}", pretty_state(&state));
        for (i, t) in transitions.iter().enumerate() {
            println!("  [{}] {} -> {}", i + 1, t.label, pretty_state(&t.target));
        }
        if transitions.is_empty() {
            println!("stuck");
            return Ok(0);
        }
        let choice = loop {
            print!("> ");
            io::stdout().flush().map_err(Failure::usage)?;
            let Some(line) = lines.next() else {
                let names: Vec<&str> = events.iter().map(Event::name).collect();
                println!();
                println!("stopped after: {}", names.join(","));
                return Ok(0);
            };
            match line.map_err(Failure::usage)?.trim().parse::<usize>() {
                Ok(n) if (1..=transitions.len()).contains(&n) => break n - 1,
                _ => println!("enter a number between 1 and {}", transitions.len()),
            }
        };
        let chosen = transitions[choice].clone();
        match chosen.label {
            Label::Event(e) => {
                events.push(e);
                state = chosen.target;
            }
            Label::Terminal(w) => {
                println!("trace: {}", Trace::new(events, w));
                if let (State::Compensable(_), State::Standard(comp)) = (&state, &chosen.target) {
                    println!("compensation: {}", pretty_standard(comp));
                }
                return Ok(0);
            }
        }
    }
}

fn check(src: &str, engine: &Engine) -> Outcome {
    let report = check_theorem1(engine, &parse_term(src)?)?;
    emit(&report.to_string())?;
    Ok(if report.holds { 0 } else { MISMATCH })
}

fn summary_code(summary: &CampaignSummary) -> u8 {
    if summary.failed > 0 {
        MISMATCH
    } else if summary.engine_errors > 0 {
        BOUND
    } else {
        0
    }
}

fn fuzz(cfg: GenConfig, count: u64, lemma: Option<LemmaKind>, engine: &Engine) -> Outcome {
    let summary = match lemma {
        Some(kind) => run_lemma_campaign(engine, &cfg, count, kind),
        None => run_campaign(engine, &cfg, count),
    };
    let what = lemma.map_or("theorem".to_string(), |k| format!("lemma {k}"));
    let mut text = format!(
        "{what}: passed {}, failed {}, engine errors {}\n",
        summary.passed, summary.failed, summary.engine_errors
    );
    if let Some(cex) = &summary.first_counterexample {
        text.push_str(&format!(
            "counterexample #{} (size {}): {}\nshrunk (size {}): {}\n{}",
            cex.index,
            cex.original.size(),
            pretty(&cex.original),
            cex.shrunk.size(),
            pretty(&cex.shrunk),
            cex.report
        ));
    }
    emit(&text)?;
    Ok(summary_code(&summary))
}

fn carbroker(models: usize, quotes: usize) -> Outcome {
    let cfg = CarBrokerConfig::new(models, quotes).map_err(Failure::usage)?;
    let system = build_carbroker(&cfg);
    let traces = eval_standard(&inner_block(&cfg)).map_err(Failure::usage)?;
    emit(&format!(
        "system: {}\ntraces of [[ Broker ||B Supplier ]]:\n{}",
        pretty_standard(&system),
        render_set(traces.traces())
    ))?;
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Traces { term } => traces(&term),
        Command::Dtraces { term, engine } => dtraces(&term, &engine.engine()),
        Command::Lts { term, engine } => lts(&term, &engine.engine()),
        Command::Step { term } => step(&term),
        Command::Check { term, engine } => check(&term, &engine.engine()),
        Command::Fuzz {
            count,
            size,
            alphabet,
            seed,
            density,
            lemma,
            engine,
        } => {
            let alphabet = alphabet
                .iter()
                .map(|name| Event::new(name.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::usage)?;
            let cfg = GenConfig::new(seed, size, alphabet, density).map_err(Failure::usage)?;
            fuzz(cfg, count, lemma, &engine.engine())
        }
        Command::Example {
            example: Example::Carbroker { models, quotes },
        } => carbroker(models, quotes),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
